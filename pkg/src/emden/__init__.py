"""Numerical laboratory for the radial system -Δu = √p u^(p-1) v, -Δv = √p u^p."""

__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .model import (  # noqa: E402
    ClosedForm,
    ExponentRegime,
    FormKind,
    RadialFunction,
    RegimeTag,
    SystemParams,
    bubble_amplitude,
    bubble_form,
    bubble_scale_for_center_value,
    cylinder_lift,
    eval_closed_form,
    regime,
    residual_closed_form,
    residual_system,
    singular_amplitude_bracket,
    singular_form,
)
from .integrator import (  # noqa: E402
    OutcomeTag,
    RadialProfile,
    RadialState,
    TrajectoryOutcome,
    classify_trajectory,
    integrate,
    profile_from_closed_form,
    rhs,
    series_start,
)
from .shooting import (  # noqa: E402
    DecayFit,
    PowerLawDecay,
    ShootingSolver,
    ThresholdResult,
    classify,
    decay_fit,
    entire_profile,
    epsilon0,
    find_threshold,
)
from .potentials import (  # noqa: E402
    RadialField,
    default_grid,
    ie_constants,
    radial_newton,
    reconstruct_ie,
    surface_area,
    verify_ie,
)
from .reports import IdentityReport  # noqa: E402
from .identities import (  # noqa: E402
    BootstrapTrace,
    bootstrap,
    bootstrap_bound,
    energy_identity,
    pohozaev_ball,
    pohozaev_entire,
    pohozaev_q,
    radial_integral,
)
from .io import GridSpec, RunConfig, emit_profile, read_profile  # noqa: E402
