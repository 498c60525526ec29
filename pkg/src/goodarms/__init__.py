"""Pure-exploration bandit library: PAC identification of many good arms.

Finite instances: LUCB-k-m (k of the best m arms), the F2 single-arm
baseline and Median Elimination. Infinite instances: quantile-based
identification over arm reservoirs (P2, P3, KQP-1, OptQP) plus the
finite-to-infinite embeddings. Analysis oracles supply ground-truth gaps,
hardness and optimal-set membership; the harness runs seeded, parallel
experiments to CSV.
"""

from .analysis import (HardnessProfile, gaps, hardness, hardness_profile,
                       mean_quantile, predicted_budget, top_m_eps,
                       top_rho_eps, u_star, verify_run)
from .bounds import (HOEFFDING, KL, BoundScheme, ExplorationThreshold, beta,
                     kl_bernoulli, kl_lcb, kl_ucb)
from .core import (ArmState, BernoulliArm, ContinuousReservoir,
                   DiscreteReservoir, FiniteBandit, NoArmAvailableError,
                   PiecewiseUniformLaw, ReservoirArm, Tally, UniformMeanLaw,
                   UsageError, draw_arm, make_linear_instance,
                   make_lower_bound_instance, make_two_level_reservoir)
from .finite import Partition, RunRecord, f2, lucb_km, median_elimination, partition
from .harness import ExperimentConfig, aggregate, preset, run_experiment
from .infinite import (PhaseState, QuantileProblem, f2_qf_solver,
                       k_independent_qp, kqp1, lucb_qf_solver, opt_qp, p2,
                       p2_draw_count, p3, p3_copy_count, opt_qp_copy_count,
                       solve_kmn_via_kqp1, solve_qf_via_p3, uniform_embedding,
                       validate_equiprobable)
from .instancefile import (dumps_instance, load_instance, loads_instance,
                           save_instance)
from .rng import RngStream

__version__ = "0.1.0"

__all__ = [
    "ArmState", "BernoulliArm", "BoundScheme", "ContinuousReservoir",
    "DiscreteReservoir", "ExperimentConfig", "ExplorationThreshold",
    "FiniteBandit", "HOEFFDING", "HardnessProfile", "KL",
    "NoArmAvailableError", "Partition", "PhaseState", "PiecewiseUniformLaw",
    "QuantileProblem", "ReservoirArm", "RngStream", "RunRecord", "Tally",
    "UniformMeanLaw", "UsageError", "aggregate", "beta", "draw_arm",
    "dumps_instance", "f2", "f2_qf_solver", "gaps", "hardness",
    "hardness_profile", "k_independent_qp", "kl_bernoulli", "kl_lcb",
    "kl_ucb", "kqp1", "load_instance", "loads_instance", "lucb_km",
    "lucb_qf_solver", "make_linear_instance", "make_lower_bound_instance",
    "make_two_level_reservoir", "mean_quantile", "median_elimination",
    "opt_qp", "opt_qp_copy_count", "p2", "p2_draw_count", "p3",
    "p3_copy_count", "partition", "predicted_budget", "preset",
    "run_experiment", "save_instance", "solve_kmn_via_kqp1",
    "solve_qf_via_p3", "top_m_eps", "top_rho_eps", "u_star",
    "uniform_embedding", "validate_equiprobable", "verify_run",
]
