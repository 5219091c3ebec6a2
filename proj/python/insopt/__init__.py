"""Optimal insurance indemnity under exponential utility.

Thin wrapper over the C++ core. The main entry points:

    >>> import insopt
    >>> dist = insopt.LossDistribution.exponential(1.0)
    >>> g = insopt.PremiumFunction.expected_value(1.0 / 3.0)
    >>> cfg = insopt.SolverConfig()
    >>> cfg.gamma = 2.0
    >>> schedule, trace = insopt.fixed_point_solve(dist, g, cfg)
    >>> round(schedule.m_star, 4)
    3.0
"""

from ._core import (  # noqa: F401
    Atom,
    BracketFailure,
    BudgetExceeded,
    ConfigError,
    DegeneratePremium,
    DivergentMoment,
    InadmissibleIndemnity,
    IndemnitySchedule,
    IterationRecord,
    LossDistribution,
    M0Strategy,
    NoConvergenceError,
    NoRoot,
    ObjectiveReport,
    PremiumFunction,
    QuadratureBudgetExceeded,
    QuadratureSpec,
    Side,
    SolverConfig,
    SolverTrace,
    TraceDirection,
    __version__,
    brute_force_discrete,
    check_comonotone,
    deductible_from_m,
    fixed_point_solve,
    h_map,
    indemnity_at,
    kappa,
    lambert_w,
    objective,
    oracle_deductible,
    oracle_multilayer,
    oracle_quadratic,
    perturbation_test,
    post_indemnity_moment,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
