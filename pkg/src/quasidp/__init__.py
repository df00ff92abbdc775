"""Dynamic programming under weak (Ciric-type) contractions.

Weighted sup-norm value spaces, policy/optimality operators, the multistep
lambda operator, randomized lambda policy iteration, empirical contraction
certification, and exact desk-scale oracles.
"""

from ._kernels import BACKEND
from .bellman_ops import (CLASSICAL_L_PLUS_1, PAPER_L, CiricComparison,
                          LambdaOperatorConfig, LambdaResult,
                          apply_lambda_operator, apply_optimality_batch,
                          apply_optimality_operator, apply_policy_batch,
                          apply_policy_operator, apply_power,
                          certified_error_bound, ciric_comparison,
                          epsilon_greedy_policy, gamma_bound_constant,
                          lambda_operator, lambda_operator_modulus,
                          optimality_operator, policy_operator, rho_modulus)
from .contraction_lab import (BANACH, CIRIC_HALFSUM, CIRIC_QUASI,
                              ContractionReport, FixedPointResult, ScalarMap,
                              ScalarPairSampler, ValuePairSampler,
                              VectorOperator, check_contraction,
                              estimate_modulus, example1_map,
                              iterate_to_fixed_point)
from .dp_model import (ControlSpace, DpModel, FiniteMdp, Policy, load_model,
                       model_from_document, random_mdp, save_model)
from .errors import (AdmissibilityError, DimensionError, DomainError,
                     EnumerationCapError, ParseError, PreconditionError,
                     QuasidpError, SamplingError, ValidationError)
from .lambda_pir import (BRANCH_LAMBDA, BRANCH_POLICY, ConstantP, GeometricP,
                         PirConfig, PirIteration, PirTrace, RunBatchSummary,
                         check_initial_condition, make_rng, pir_step, run_batch,
                         run_pir)
from .oracle_solvers import (EnumerationResult, PolicyIterationResult,
                             ValueIterationResult, enumerate_policies,
                             exact_policy_value, lambda_operator_oracle,
                             policy_iteration, value_iteration)
from .value_space import (StateSpace, ValueFunction, WeightFunction,
                          pointwise_leq, pointwise_lt, shift_by_weight,
                          weighted_distance, weighted_norm)

__version__ = "0.1.0"
