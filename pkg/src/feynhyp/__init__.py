"""feynhyp: configurable-precision loop integrals, two-variable
hypergeometric functions, and a verification harness for the exact
relations connecting them."""

__version__ = "0.1.0"

from .errors import (
    DomainError,
    FeynhypError,
    NoBracket,
    NonConvergence,
    PoleError,
    QuadFailure,
    UnknownIdentity,
)
from .numkernel import (
    NumValue,
    PrecisionContext,
    SeriesResult,
    gamma,
    kallen,
    pochhammer,
    quad_de,
    sum_series,
)
from .hyperfun import (
    AppellF1Params,
    AppellF4Params,
    Gauss2F1Params,
    Hyp3F2Params,
    KdFParams,
    appell_f1,
    appell_f1_onefold,
    appell_f4,
    hyp2f1,
    hyp3f2,
    kdf_f210,
)
from .feynman import (
    BubbleKinematics,
    SunriseKinematics,
    VertexKinematics,
    bubble_xpm,
    i2,
    i2_bubble_closed,
    i3,
    i3_ode_residual,
    im_j3,
)
from .identities import (
    IdentityRecord,
    VerificationReport,
    pin_argument,
    registry,
    sweep,
    verify,
)

__all__ = [name for name in dir() if not name.startswith("_")]
