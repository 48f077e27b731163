"""Self-similar profiles of the inverse mean curvature flow.

Solve, continue, and verify the radially symmetric profile f(r) of the
expanding self-similar graph u(x, t) = e^{lam t} f(e^{-lam t} |x|); see the
individual modules for the machinery:

* ``profile_core``   parameters, profile data model, interpolation
* ``origin_picard``  fixed-point construction near the axis, series bootstrap
* ``continuation``   adaptive outward march and interior fixed-point windows
* ``asymptotics``    slope ratio q = r f_r / f and its limit
* ``verify``         independent residual/identity oracles
* ``cli``            the ``imcf-profile`` command
"""

from .errors import (
    BallEscape,
    DenominatorCollapse,
    DomainError,
    ImcfError,
    InsufficientRange,
    NoConvergence,
    OutOfRange,
    SeriesDivergence,
    SingularDenominator,
    SingularRadius,
    StepUnderflow,
    VanishingMeanCurvature,
    ZeroHeight,
)
from .profile_core import (
    Parameters,
    ProfilePoint,
    RadialProfile,
    SolverConfig,
    ode_rhs,
    validate,
)
from .origin_picard import (
    PicardDiagnostics,
    PicardState,
    phi_step,
    solve_origin,
    taylor_bootstrap,
)
from .continuation import (
    ExtensionWindow,
    MonitorEvent,
    detect_breakdown,
    extend_picard,
    extend_picard_chain,
    extend_rk,
    solve_profile,
)
from .asymptotics import AsymptoticsReport, alpha0, estimate_limit, q_of, q_ode_residual
from .verify import (
    SelfSimilarSolution,
    VerificationReport,
    integral_identity_defect,
    integrating_factor_defect,
    ode_residual_scan,
    origin_curvature_richardson,
    pde_residual,
    run_report,
    taylor_oracle,
)

__version__ = "0.1.0"
