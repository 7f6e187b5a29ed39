"""Hypothesis test for the covariance function of a stationary Gaussian process."""
from ._accel import backend
from .covariance import (
    CovarianceModel,
    ModelKind,
    ObservationWindow,
    PsiCurve,
    QuadratureSpec,
    compute_cp,
    cp_bound_exponential,
    cp_bound_gaussian,
    cp_decay_check,
    eval_rho,
    psi,
    psi_curve,
)
from .criterion import MonteCarloReport, TestConfig, TestDecision, monte_carlo_level, run_test, tail_curve
from .errors import *  # noqa: F401,F403
from .simulate import Correlogram, SamplePath, correlogram, simulate_path, test_statistic
from .tailbound import (
    TailBoundParams,
    ThresholdBranch,
    g_tail,
    l0,
    moment_bound,
    s_delta,
    solve_epsilon_delta,
    z_threshold,
)

__version__ = "0.1.0"
