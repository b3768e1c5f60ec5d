"""Radial initial value problem for the coupled system.

The shooting problem is

    -(U'' + (n-1)U'/r) = √p U^(p-1) V,    -(V'' + (n-1)V'/r) = √p U^p,
    U(0) = 1,  V(0) = a,  U'(0) = V'(0) = 0.

Integration starts from a Taylor expansion at a small radius ``r0`` and
proceeds with an adaptive Dormand-Prince 8(5,3) pair.  Internally the state
is ``(U, W, rU', rW')`` with ``W = V - U`` as a function of ``s = ln r``:

* ``W`` obeys the linear equation ``ΔW = √p U^(p-1) W`` with ``W(0) = a-1``,
  so the sign of ``V - U`` and its size near the symmetric trajectory
  ``a = 1`` are carried without cancellation;
* in ``ln r`` the natural step sizes are uniform over many decades.
"""

import enum
import hashlib
import math
from dataclasses import dataclass, field
import numpy as np
from scipy.integrate import solve_ivp

from ._validation import check_positive
from .errors import (
    DomainError,
    GrazeError,
    ParamError,
    RegimeError,
    StiffnessError,
)
from .model import ClosedForm, FormKind, SystemParams

DEFAULT_R0 = 1e-4
DEFAULT_R_MAX = 1e3
DEFAULT_TOL = 1e-10
DEFAULT_SAMPLES_PER_DECADE = 256
POSITIVITY_FLOOR = 1e-13
SIMULTANEITY_WINDOW = 1e-8
# atol = tol * ATOL_FACTOR keeps the error control relative down to
# component values far below the solution's decayed magnitude
ATOL_FACTOR = 1e-20


@dataclass(frozen=True)
class RadialState:
    """One sample ``(r, U, V, U', V')`` of a radial trajectory."""

    r: float
    U: float
    V: float
    dU: float
    dV: float

    def __post_init__(self):
        values = (self.r, self.U, self.V, self.dU, self.dV)
        if not all(math.isfinite(v) for v in values):
            raise ParamError(f"radial state has non-finite entries: {values}")
        if self.r < 0:
            raise ParamError(f"radius must be non-negative, got {self.r}")
        if self.r == 0 and (self.dU != 0 or self.dV != 0):
            raise ParamError("derivatives must vanish at r = 0")


class OutcomeTag(str, enum.Enum):
    U_VANISHED = "UVanished"
    V_VANISHED = "VVanished"
    BOTH_VANISHED = "BothVanished"
    ENTIRE_POSITIVE = "EntirePositive"


@dataclass(frozen=True)
class TrajectoryOutcome:
    """How an integrated trajectory ended.

    ``radius`` is the vanishing radius ``R`` for the three vanishing tags and
    the horizon ``r_max`` for ``EntirePositive``.
    """

    tag: OutcomeTag
    radius: float

    @property
    def vanished(self):
        return self.tag is not OutcomeTag.ENTIRE_POSITIVE


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Sampled trajectory of the radial system.

    Samples are stored column-wise; ``states()`` yields :class:`RadialState`
    records.  ``step_radii`` holds the radii of accepted integrator steps.
    """

    params: SystemParams
    a: float
    r: np.ndarray
    U: np.ndarray
    dU: np.ndarray
    V: np.ndarray
    dV: np.ndarray
    outcome: TrajectoryOutcome
    step_radii: np.ndarray = field(default_factory=lambda: _readonly([]))

    def __post_init__(self):
        for name in ("r", "U", "dU", "V", "dV", "step_radii"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))
        size = self.r.size
        if any(getattr(self, c).shape != (size,) for c in ("U", "dU", "V", "dV")):
            raise ParamError("profile columns must have equal length")
        if size > 1 and np.any(np.diff(self.r) <= 0):
            raise ParamError("profile radii must be strictly increasing")

    def __len__(self):
        return self.r.size

    def states(self):
        for row in zip(self.r, self.U, self.V, self.dU, self.dV):
            yield RadialState(*map(float, row))

    @property
    def r_max(self):
        return float(self.r[-1])

    def sync_deviation(self):
        """``max |U - V| / max U`` over the samples."""
        return float(np.max(np.abs(self.U - self.V)) / np.max(self.U))

    def scaled(self, factor):
        """Profile with both components multiplied by ``factor``."""
        f = float(factor)
        return RadialProfile(
            self.params, self.a, self.r, f * self.U, f * self.dU, f * self.V, f * self.dV,
            self.outcome, self.step_radii,
        )

    def digest(self):
        h = hashlib.sha256()
        h.update(repr((self.params.n, self.params.p, self.a, self.outcome.tag.value,
                       self.outcome.radius)).encode())
        for col in (self.r, self.U, self.dU, self.V, self.dV):
            h.update(np.ascontiguousarray(col).tobytes())
        return h.hexdigest()


def rhs(params, s):
    """Derivative of a :class:`RadialState` along ``r``.

    Returns ``(dU, dV, dU', dV')`` with ``dU' = -(n-1)U'/r - √p U^(p-1) V``
    and ``dV' = -(n-1)V'/r - √p U^p``.
    """
    if s.r == 0:
        raise DomainError("right-hand side is singular at r = 0; use series_start")
    if s.U < 0:
        raise DomainError(f"U must be non-negative, got {s.U}")
    n, p, sp = params.n, params.p, params.sqrt_p
    d2U = -(n - 1) * s.dU / s.r - sp * s.U ** (p - 1) * s.V
    d2V = -(n - 1) * s.dV / s.r - sp * s.U**p
    return s.dU, s.dV, d2U, d2V


def _series_coefficients(params, a):
    """Even Taylor coefficients of U, V and W = V - U up to r^4."""
    n, p, sp = params.n, params.p, params.sqrt_p
    am1 = a - 1.0
    u2 = -sp * a / (2 * n)
    v2 = -sp / (2 * n)
    w2 = sp * am1 / (2 * n)
    u4 = -sp * ((p - 1) * a * u2 + v2) / (4 * (n + 2))
    v4 = -sp * p * u2 / (4 * (n + 2))
    # v4 - u4 written in powers of (a - 1) so that a = 1 gives exactly zero
    w4 = sp * (w2 + (p - 1) * am1 * u2) / (4 * (n + 2))
    return (u2, u4), (v2, v4), (w2, w4)


def _check_shoot_args(a, r0):
    a = check_positive(a, "a")
    r0 = check_positive(r0, "r0")
    return a, r0


def series_start(params, a, r0=DEFAULT_R0):
    """State at ``r0`` from the small-r expansion of the regular solution.

    ``U = 1 - √p a r^2/(2n) + O(r^4)`` and ``V = a - √p r^2/(2n) + O(r^4)``;
    the r^4 terms are included, so the truncation error is ``O(r0^6)``.
    """
    a, r0 = _check_shoot_args(a, r0)
    (u2, u4), (v2, v4), _ = _series_coefficients(params, a)
    r2 = r0 * r0
    return RadialState(
        r0,
        1.0 + r2 * (u2 + u4 * r2),
        a + r2 * (v2 + v4 * r2),
        r0 * (2 * u2 + 4 * u4 * r2),
        r0 * (2 * v2 + 4 * v4 * r2),
    )


def _initial_log_state(params, a, r0):
    (u2, u4), _, (w2, w4) = _series_coefficients(params, a)
    r2 = r0 * r0
    U = 1.0 + r2 * (u2 + u4 * r2)
    W = (a - 1.0) + r2 * (w2 + w4 * r2)
    PU = r2 * (2 * u2 + 4 * u4 * r2)
    PW = r2 * (2 * w2 + 4 * w4 * r2)
    return np.array([U, W, PU, PW])


def _log_rhs(params):
    n, p, sp = params.n, params.p, params.sqrt_p
    pm1 = p - 1.0
    exp = math.exp

    def f(s, y):
        U, W, PU, PW = y
        r2 = exp(2.0 * s)
        Up = U if U > 0.0 else 0.0
        g = sp * Up**pm1 * r2
        return np.array([PU, PW, -(n - 2) * PU - g * (Up + W), -(n - 2) * PW + g * W])

    return f


def _event_u(s, y):
    return y[0]


def _event_v(s, y):
    return y[0] + y[1]


_event_u.terminal = True
_event_u.direction = -1
_event_v.terminal = True
_event_v.direction = -1


def _check_integrable(params):
    if params.p < 2:
        raise RegimeError(
            f"integration needs p >= 2 (Lipschitz forcing at U = 0), got p = {params.p:g}"
        )


def _to_columns(s, y):
    r = np.exp(s)
    U, W, PU, PW = y
    return r, U, PU / r, U + W, (PU + PW) / r


def _classify_end(sol, r0, r_end):
    """Outcome from a finished solve, and the final sample ``(s, y)``."""
    if sol.status == -1:
        raise StiffnessError(f"integration failed: {sol.message}")
    hits = [(float(t[0]), k) for k, t in enumerate(sol.t_events) if t.size]
    if sol.status == 1 and hits:
        which = min(hits)[1]
        s_end = float(sol.t_events[which][0])
        y_end = np.asarray(sol.y_events[which][0], dtype=float)
        R = math.exp(s_end)
        U, W, PU, PW = y_end
        other, d_other = (U + W, (PU + PW) / R) if which == 0 else (U, PU / R)
        both = other <= 0 or (d_other < 0 and -other / d_other < SIMULTANEITY_WINDOW)
        if both:
            tag = OutcomeTag.BOTH_VANISHED
        else:
            tag = OutcomeTag.U_VANISHED if which == 0 else OutcomeTag.V_VANISHED
        return TrajectoryOutcome(tag, R), s_end, y_end
    y_end = sol.y[:, -1]
    s_end = float(sol.t[-1])
    U, W, PU, PW = y_end
    for value, slope in ((U, PU), (U + W, PU + PW)):
        # value/|r c'| is the relative distance in r to the linearly
        # extrapolated zero; a power tail keeps it of order 1/rate
        if value <= POSITIVITY_FLOOR * abs(slope):
            raise GrazeError(
                f"component fell to {value:.3e} at r = {math.exp(s_end):.6g} "
                "without a resolved zero crossing"
            )
    return TrajectoryOutcome(OutcomeTag.ENTIRE_POSITIVE, float(r_end)), s_end, y_end


def _solve(params, a, r_end, tol, r0, dense=False):
    _check_integrable(params)
    a, r0 = _check_shoot_args(a, r0)
    r_end = check_positive(r_end, "r_max")
    tol = check_positive(tol, "tol")
    if r_end <= r0:
        raise ParamError(f"r_max = {r_end:g} must exceed the start radius r0 = {r0:g}")
    s0, s1 = math.log(r0), math.log(r_end)
    y0 = _initial_log_state(params, a, r0)
    sol = solve_ivp(
        _log_rhs(params),
        (s0, s1),
        y0,
        method="DOP853",
        rtol=tol,
        atol=tol * ATOL_FACTOR,
        events=[_event_u, _event_v],
        dense_output=dense,
        first_step=min(0.01, (s1 - s0) / 10),
    )
    outcome, s_end, y_end = _classify_end(sol, r0, r_end)
    if outcome.tag is OutcomeTag.ENTIRE_POSITIVE:
        # the horizon may differ from exp(log(r_end)) in the last ulp
        outcome = TrajectoryOutcome(outcome.tag, float(r_end))
    return sol, outcome, s_end, y_end


def classify_trajectory(params, a, r_max=DEFAULT_R_MAX, tol=DEFAULT_TOL, r0=DEFAULT_R0):
    """Outcome of the trajectory with ``V(0) = a`` without retaining samples."""
    return _solve(params, a, r_max, tol, r0)[1]


def log_grid(r0, r_max, per_decade):
    count = max(2, int(math.ceil(per_decade * math.log10(r_max / r0))) + 1)
    return np.linspace(math.log(r0), math.log(r_max), count)


def integrate(
    params,
    a,
    r_max=DEFAULT_R_MAX,
    tol=DEFAULT_TOL,
    r0=DEFAULT_R0,
    samples_per_decade=DEFAULT_SAMPLES_PER_DECADE,
):
    """Integrate the shooting problem with ``V(0) = a`` out to ``r_max``.

    Parameters
    ----------
    params : SystemParams
        ``p >= 2`` is required.
    a : float
        Shooting parameter ``V(0)``.
    r_max : float
        Horizon standing in for infinity.
    tol : float
        Relative local error tolerance of the adaptive stepper.
    r0 : float
        Radius where the series start hands over to the stepper.
    samples_per_decade : int
        Density of the log-uniform sampling grid (dense output).

    Returns
    -------
    RadialProfile
        Samples on ``[r0, R]`` where ``R`` is the first zero of ``U`` or
        ``V``, or on ``[r0, r_max]`` if both stay positive.
    """
    r_max = check_positive(r_max, "r_max")
    r0 = check_positive(r0, "r0")
    if samples_per_decade < 1:
        raise ParamError("samples_per_decade must be at least 1")
    sol, outcome, s_end, y_end = _solve(params, a, r_max, tol, r0, dense=True)
    s_grid = log_grid(r0, r_max, samples_per_decade)
    spacing = s_grid[1] - s_grid[0]
    s = s_grid[s_grid < s_end - 1e-3 * spacing]
    y = sol.sol(s) if s.size else np.empty((4, 0))
    s = np.concatenate([s, [s_end]])
    y = np.concatenate([y, np.asarray(y_end, dtype=float)[:, None]], axis=1)
    r, U, dU, V, dV = _to_columns(s, y)
    r[0] = r0
    r[-1] = outcome.radius
    return RadialProfile(params, float(a), r, U, dU, V, dV, outcome, step_radii=np.exp(sol.t))


def profile_from_closed_form(form, r_grid):
    """Sample a radial closed form (bubble or singular power) as a profile.

    The result is marked ``EntirePositive`` at the last grid radius and has
    ``a = 1`` since the closed forms satisfy ``u = v``.
    """
    if not isinstance(form, ClosedForm) or form.kind is FormKind.CYLINDER_LIFT:
        raise ParamError("only radial closed forms can be sampled as profiles")
    r = np.asarray(r_grid, dtype=float)
    cols = np.array([form.radial_derivatives(float(x))[:2] for x in r])
    U, dU = cols[:, 0], cols[:, 1]
    outcome = TrajectoryOutcome(OutcomeTag.ENTIRE_POSITIVE, float(r[-1]))
    return RadialProfile(form.params, 1.0, r, U, dU, U.copy(), dU.copy(), outcome)
