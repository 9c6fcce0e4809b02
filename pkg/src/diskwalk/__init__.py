"""Random gyrotranslation walks on the Poincare disk."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DegenerateCircleError,
    DiskwalkError,
    DomainError,
    NotApplicableError,
    PartialResultError,
    PoleMismatchError,
    PoleSingularityError,
    PreconditionError,
)
from .geometry import (
    ApollonianCircle,
    BipolarPoint,
    DiskPoint,
    Pole,
    busemann,
    from_bipolar,
    on_orbit_circle,
    orbit_circle,
    poincare_distance,
    to_bipolar,
)
from .group import GroupElement, apply, apply_Tz, compose, from_x, identity, tau_hat
from .kernels import BACKEND
from .laws import InverseCdfTable, PaperTriangular, StepLaw, Triangular, UniformX, parse_law

from .walk import (
    EnsembleConfig,
    TrajectoryRecord,
    WalkState,
    ZWalkState,
    current_position,
    run_ensemble,
    u_walk_step,
    z_current_position,
    z_walk_step,
)
