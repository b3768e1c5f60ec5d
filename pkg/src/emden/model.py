"""Parameters, exponent regimes and closed-form solution families.

The system studied throughout the package is

    -Δu = √p u^{p-1} v,    -Δv = √p u^p    in R^n,

with n >= 3 and p > 1.  This module holds the parameter type, the
classification of p against the Serrin exponent n/(n-2) and the critical
exponent (n+2)/(n-2), and the three explicit solution families: the critical
bubble, the singular power solution and the cylinder lift of a bubble.
"""

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from ._validation import check_dimension, check_positive, same_threshold
from .errors import (
    DifferentiationError,
    DomainError,
    KindError,
    ParamError,
    RegimeError,
    SingularityError,
)

DEFAULT_H_FD = 1e-3


@dataclass(frozen=True)
class SystemParams:
    """Dimension ``n`` and exponent ``p`` of the system.

    Parameters
    ----------
    n : int
        Space dimension, at least 3.
    p : float
        Nonlinearity exponent, strictly greater than 1.
    """

    n: int
    p: float

    def __post_init__(self):
        object.__setattr__(self, "n", check_dimension(self.n))
        p = check_positive(self.p, "p")
        if p <= 1:
            raise ParamError(f"exponent p must exceed 1, got {p!r}")
        object.__setattr__(self, "p", p)

    @property
    def serrin(self):
        return self.n / (self.n - 2)

    @property
    def critical(self):
        return (self.n + 2) / (self.n - 2)

    @property
    def sobolev(self):
        """The Sobolev exponent 2* = 2n/(n-2)."""
        return 2 * self.n / (self.n - 2)

    @property
    def slow_rate(self):
        return 2 / (self.p - 1)

    @property
    def fast_rate(self):
        return float(self.n - 2)

    @property
    def sqrt_p(self):
        return math.sqrt(self.p)


class RegimeTag(str, enum.Enum):
    NO_POSITIVE_SOLUTION = "NoPositiveSolution"
    SUBCRITICAL = "Subcritical"
    CRITICAL = "Critical"
    SUPERCRITICAL = "Supercritical"


@dataclass(frozen=True)
class ExponentRegime:
    tag: RegimeTag
    shooting_admissible: bool


def regime(params):
    """Classify ``params.p`` against the Serrin and critical exponents.

    Boundaries follow the nonexistence convention: ``p == n/(n-2)`` is
    ``NoPositiveSolution`` and ``p == (n+2)/(n-2)`` is ``Critical``.  The
    shooting construction needs ``p >= max(2, (n+2)/(n-2))``.
    """
    p = params.p
    if p < params.serrin or same_threshold(p, params.serrin):
        tag = RegimeTag.NO_POSITIVE_SOLUTION
    elif same_threshold(p, params.critical):
        tag = RegimeTag.CRITICAL
    elif p < params.critical:
        tag = RegimeTag.SUBCRITICAL
    else:
        tag = RegimeTag.SUPERCRITICAL
    admissible = (p >= 2 or same_threshold(p, 2.0)) and tag in (
        RegimeTag.CRITICAL,
        RegimeTag.SUPERCRITICAL,
    )
    return ExponentRegime(tag, admissible)


@dataclass(frozen=True)
class RadialFunction:
    """A radial scalar field with optional analytic derivatives.

    ``derivatives(r)`` returns ``(w, w', w'')``.  Fields without it are
    differentiated numerically by :func:`residual_system`.  ``laplacian(r)``,
    when given, is the radial Laplacian in closed form and takes precedence.
    """

    value: Callable[[float], float]
    derivatives: Optional[Callable[[float], Tuple[float, float, float]]] = None
    laplacian: Optional[Callable[[float], float]] = None

    def __call__(self, r):
        return self.value(r)


class FormKind(str, enum.Enum):
    BUBBLE = "Bubble"
    SINGULAR_POWER = "SingularPower"
    CYLINDER_LIFT = "CylinderLift"


@dataclass(frozen=True)
class ClosedForm:
    """An explicit solution with ``u = v``.

    Attributes
    ----------
    kind : FormKind
    params : SystemParams
        Parameters of the space the form lives in.  For a cylinder lift this
        is ``(n+1, p)`` while ``base.params`` is ``(n, p)``.
    amplitude : float
        ``c`` in ``c (t/(t^2+r^2))^((n-2)/2)`` or ``c r^(-2/(p-1))``.
    scale : float or None
        Bubble concentration ``t``.
    exponent : float or None
        Decay exponent of the singular power, ``2/(p-1)``.
    center : tuple of float
        Center of the bubble (or pole of the singular power).
    base : ClosedForm or None
        Lifted bubble for ``CYLINDER_LIFT``.
    """

    kind: FormKind
    params: SystemParams
    amplitude: float
    scale: Optional[float] = None
    exponent: Optional[float] = None
    center: Tuple[float, ...] = ()
    base: Optional["ClosedForm"] = None

    @property
    def dimension(self):
        return self.params.n

    @property
    def radial_dimension(self):
        """Dimension in which the form is radial (the base one for a lift)."""
        if self.kind is FormKind.CYLINDER_LIFT:
            return self.base.params.n
        return self.params.n

    def radial(self, r):
        """Profile value as a function of the radial coordinate."""
        return self.radial_derivatives(r)[0]

    def radial_derivatives(self, r):
        """Return ``(U, U', U'')`` of the radial profile at ``r``."""
        if self.kind is FormKind.CYLINDER_LIFT:
            return self.base.radial_derivatives(r)
        c = self.amplitude
        if self.kind is FormKind.SINGULAR_POWER:
            if r <= 0:
                raise SingularityError("singular power solution is undefined at its pole")
            tau = self.exponent
            w = c * r ** (-tau)
            return w, -tau * w / r, tau * (tau + 1) * w / (r * r)
        k = (self.params.n - 2) / 2
        t = self.scale
        q = t * t + r * r
        w = c * (t / q) ** k
        dw = -2 * k * r * w / q
        d2w = -2 * k * w / q * (1 - 2 * (k + 1) * r * r / q)
        return w, dw, d2w

    def radial_laplacian(self, r):
        """Radial Laplacian of the profile in one factored expression.

        Summing ``w'' + (n-1) w'/r`` cancels terms much larger than the
        result near the pole; the factored forms avoid that.
        """
        if self.kind is FormKind.CYLINDER_LIFT:
            return self.base.radial_laplacian(r)
        n = self.params.n
        if self.kind is FormKind.SINGULAR_POWER:
            if r <= 0:
                raise SingularityError("singular power solution is undefined at its pole")
            tau = self.exponent
            return self.amplitude * tau * (tau + 2 - n) * r ** (-tau - 2)
        w = self.radial(r)
        q = self.scale * self.scale + r * r
        return -n * (n - 2) * self.scale * self.scale / (q * q) * w

    @property
    def u(self):
        return RadialFunction(self.radial, self.radial_derivatives, self.radial_laplacian)

    @property
    def v(self):
        return RadialFunction(self.radial, self.radial_derivatives, self.radial_laplacian)


def singular_amplitude_bracket(params):
    """The bracket ``2n/(√p(p-1)) - 4√p/(p-1)^2`` of the singular amplitude.

    It is positive exactly when ``p > n/(n-2)``.
    """
    n, p, sp = params.n, params.p, params.sqrt_p
    return 2 * n / (sp * (p - 1)) - 4 * sp / (p - 1) ** 2


def singular_form(params):
    """Singular solution ``u = v = c |x|^(-2/(p-1))`` on R^n minus the origin."""
    if params.p < params.serrin or same_threshold(params.p, params.serrin):
        raise RegimeError(
            f"singular solution needs p > n/(n-2) = {params.serrin:g}, got p = {params.p:g}"
        )
    bracket = singular_amplitude_bracket(params)
    amplitude = bracket ** (1 / (params.p - 1))
    return ClosedForm(
        FormKind.SINGULAR_POWER,
        params,
        amplitude,
        exponent=params.slow_rate,
        center=(0.0,) * params.n,
    )


def bubble_amplitude(params):
    # rescale the unit-coefficient bubble (n(n-2))^((n-2)/4) (t/(t^2+r^2))^((n-2)/2)
    # by λ with λ^(p-1) = 1/√p
    lam = params.p ** (-1 / (2 * (params.p - 1)))
    n = params.n
    return lam * (n * (n - 2)) ** ((n - 2) / 4)


def bubble_form(params, t=1.0, center=None):
    """Critical bubble ``c (t/(t^2+|x-x*|^2))^((n-2)/2)``.

    Raises
    ------
    RegimeError
        Unless ``p`` is the critical exponent ``(n+2)/(n-2)``.
    """
    if not same_threshold(params.p, params.critical):
        raise RegimeError(
            f"bubble needs p = (n+2)/(n-2) = {params.critical:g}, got p = {params.p:g}"
        )
    t = check_positive(t, "t")
    if center is None:
        center = (0.0,) * params.n
    center = tuple(float(c) for c in center)
    if len(center) != params.n:
        raise ParamError(f"center must have {params.n} coordinates")
    return ClosedForm(FormKind.BUBBLE, params, bubble_amplitude(params), scale=t, center=center)


def bubble_scale_for_center_value(params, value=1.0):
    """Concentration ``t`` for which the bubble takes ``value`` at its center."""
    c = bubble_amplitude(params)
    return (c / value) ** (2 / (params.n - 2))


def cylinder_lift(base):
    """Lift an n-dimensional bubble to R^(n+1), constant along the new axis.

    The exponent is unchanged, so in n+1 dimensions it is supercritical.
    Both components are lifted along the same axis.
    """
    if base.kind is not FormKind.BUBBLE:
        raise KindError(f"only a Bubble can be lifted, got {base.kind.value}")
    lifted = SystemParams(base.params.n + 1, base.params.p)
    return ClosedForm(
        FormKind.CYLINDER_LIFT,
        lifted,
        base.amplitude,
        scale=base.scale,
        center=base.center,
        base=base,
    )


def _radius(form, x):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1 or x.size != form.dimension:
        raise ParamError(f"point must have {form.dimension} coordinates, got shape {x.shape}")
    m = form.radial_dimension
    return float(np.linalg.norm(x[:m] - np.asarray(form.center)))


def eval_closed_form(form, x):
    """Evaluate ``(u(x), v(x))`` at a point of R^n (R^(n+1) for a lift)."""
    r = _radius(form, x)
    if form.kind is FormKind.SINGULAR_POWER and r == 0:
        raise SingularityError("singular power solution is undefined at its pole")
    w = form.radial(r)
    return w, w


def radial_laplacian(w, dw, d2w, r, n):
    """``w'' + (n-1) w'/r``, with the limit ``n w''(0)`` at the origin."""
    if r == 0:
        return n * d2w
    return d2w + (n - 1) * dw / r


def _fd_derivatives(f, r, h):
    d1 = (f(r + h) - f(r - h)) / (2 * h)
    d2 = (f(r + h) - 2 * f(r) + f(r - h)) / (h * h)
    return d1, d2


def _richardson_derivatives(f, r, h):
    d1h, d2h = _fd_derivatives(f, r, h)
    d1s, d2s = _fd_derivatives(f, r, h / 2)
    return (4 * d1s - d1h) / 3, (4 * d2s - d2h) / 3


def residual_system(u_fn, v_fn, params, r, h_fd=DEFAULT_H_FD):
    """Pointwise residuals of the radial system at radius ``r``.

    Returns ``(|ΔU + √p U^(p-1) V|, |ΔV + √p U^p|)``.  Fields carrying
    a closed-form Laplacian or analytic derivatives use them; others are
    differentiated by central differences with one Richardson level.
    """
    r = float(r)
    if r < 0:
        raise ParamError(f"radius must be non-negative, got {r}")
    n, sp, p = params.n, params.sqrt_p, params.p
    laps = []
    values = []
    for fn in (u_fn, v_fn):
        derivs = getattr(fn, "derivatives", None)
        closed_lap = getattr(fn, "laplacian", None)
        if closed_lap is not None:
            w = fn(r)
            laps.append(closed_lap(r))
            values.append(float(w))
            continue
        if derivs is not None:
            w, dw, d2w = derivs(r)
        else:
            if r < 2 * h_fd:
                raise DifferentiationError(
                    f"finite differences need r >= 2*h_fd = {2 * h_fd:g}, got r = {r:g}"
                )
            w = fn(r)
            dw, d2w = _richardson_derivatives(fn, r, h_fd)
        laps.append(radial_laplacian(w, dw, d2w, r, n))
        values.append(float(w))
    U, V = values
    if U < 0:
        raise DomainError(f"U must be non-negative for U^(p-1), got {U}")
    res_u = abs(laps[0] + sp * U ** (p - 1) * V)
    res_v = abs(laps[1] + sp * U**p)
    return res_u, res_v


def residual_closed_form(form, x):
    """Residuals of a closed form at a point, using its natural coordinates.

    For a cylinder lift the Laplacian in R^(n+1) of a function of the first n
    coordinates is the n-dimensional radial Laplacian of the base profile.
    """
    r = _radius(form, x)
    base_params = form.base.params if form.kind is FormKind.CYLINDER_LIFT else form.params
    return residual_system(form.u, form.v, base_params, r)
