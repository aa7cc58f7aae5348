"""Robustness of quantum gates, threshold upper bounds, and classical simulation of
circuits built from separability-preserving gates."""

from .channels import (Channel, HypothesisError, classical_cnot, compose, depolarizing, identity_channel,
                       local_depolarizing, mixture, noisy_gate_model, one_sided_depolarize, unitary_channel,
                       worst_noise)
from .choi import ChoiState, channel_from_choi, choi_state, kraus_from_choi, psi_of_unitary, sep_char_check
from .linalg import (CNOT, SWAP, DimensionError, NotUnitaryError, Operator, as_operator, operator_schmidt,
                     partial_trace, partial_transpose, schmidt_coefficients, unitary_schmidt_form)
from .robustness import (chaining_bound, continuity_bound_random_robustness, mixing_feasibility,
                         mixing_feasibility_channels, random_robustness_channel, random_robustness_max,
                         random_robustness_unitary, relative_robustness_gate, threshold_bound_all_gates,
                         threshold_bound_depolarizing, threshold_bound_general, unital_schmidt_robustness)
from .separability import (EntangledInputError, concurrence, decompose_separable_2q, ppt_check,
                           random_robustness_state, relative_robustness_state, robustness_pure,
                           swap_witness_bound, trace_distance)
from .simulator import (BlochState, Circuit, Gate, NonSPGateError, SimulationResult, dense_oracle,
                        init_state, l1_distance, measure, run_circuit, simulate_gate)

__version__ = "0.1.0"
