"""Radial Newton potentials and the integral form of the system.

For a radial density f the Newton potential reduces to two one-dimensional
integrals, because the mean of ``|x-y|^(2-n)`` over the sphere ``|y| = s``
equals ``max(|x|, s)^(2-n)``:

    ∫ f(|y|) |x-y|^(2-n) dy
        = ω_{n-1} [ r^(2-n) ∫_0^r s^(n-1) f(s) ds + ∫_r^∞ s f(s) ds ].

Beyond the last grid node the density is continued as a power law with the
field's ``tail_exponent`` and that part is integrated in closed form.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import gamma

from . import _quadrature
from ._validation import check_dimension, check_grid, check_samples
from .errors import GridError, TailError
from .integrator import OutcomeTag
from .reports import IdentityReport
from .shooting import DEFAULT_WINDOW, decay_fit

DEFAULT_GRID_NODES = 2048
DEFAULT_GRID_RANGE = (1e-4, 1e3)


@dataclass(frozen=True, eq=False)
class RadialField:
    """Samples of a nonnegative radial function.

    Parameters
    ----------
    grid : array_like
        Strictly increasing radii.
    values : array_like
        Nonnegative samples on ``grid``.
    tail_exponent : float, optional
        If set, ``value(r) = value(r_max) (r/r_max)^(-tail_exponent)`` for
        ``r > r_max``.
    """

    grid: np.ndarray
    values: np.ndarray
    tail_exponent: Optional[float] = None

    def __post_init__(self):
        grid = check_grid(self.grid)
        values = check_samples(self.values, grid)
        if np.any(values < 0):
            raise GridError("radial field values must be nonnegative")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        if self.tail_exponent is not None:
            object.__setattr__(self, "tail_exponent", float(self.tail_exponent))


def surface_area(n):
    """Area ``2 π^(n/2) / Γ(n/2)`` of the unit sphere in R^n."""
    n = check_dimension(n, minimum=1)
    return float(2 * math.pi ** (n / 2) / gamma(n / 2))


def default_grid(nodes=DEFAULT_GRID_NODES, r_min=DEFAULT_GRID_RANGE[0], r_max=DEFAULT_GRID_RANGE[1]):
    """Log-spaced radii, by default 2048 nodes on ``[1e-4, 1e3]``."""
    return np.geomspace(r_min, r_max, int(nodes))


def _outer_tail(field):
    """``∫_{r_max}^∞ s f(s) ds`` for the power-law continuation."""
    last = field.values[-1]
    t = field.tail_exponent
    if t is None:
        if last == 0:
            return 0.0
        raise TailError("field does not vanish at the grid end and has no tail_exponent")
    if t <= 2:
        raise TailError(f"outer Newton integral diverges for tail exponent {t:g} <= 2")
    r_max = field.grid[-1]
    return last * r_max * r_max / (t - 2)


def radial_newton(f, n):
    """Newton potential ``∫ f(|y|) |x-y|^(2-n) dy`` of a radial field.

    Returns a :class:`RadialField` on the same grid.  The interval
    ``[0, grid[0]]`` is treated with ``f`` frozen at its first sample.
    """
    n = check_dimension(n)
    r, vals = f.grid, f.values
    tail = _outer_tail(f)
    r_first = r[0]
    inner_seed = vals[0] * r_first**n / n
    inner = inner_seed + _quadrature.cumulative(r, r ** (n - 1) * vals)
    outer_parts = _quadrature.interval_integrals(r, r * vals)
    outer = tail + np.concatenate((np.cumsum(outer_parts[::-1])[::-1], [0.0]))
    with np.errstate(divide="ignore"):
        far = np.where(r > 0, r ** (2.0 - n), 0.0)
    g = surface_area(n) * (far * inner + outer)
    if r_first == 0:
        g[0] = surface_area(n) * outer[0]
    if f.tail_exponent is None:
        g_tail = float(n - 2)
    else:
        g_tail = min(float(n - 2), f.tail_exponent - 2)
    return RadialField(r, g, g_tail)


def ie_constants(params):
    """Constants ``(c1, c2)`` of the integral system.

    Both equal ``√p / ((n-2) ω_{n-1})``: the fundamental solution of ``-Δ``
    is ``|x|^(2-n) / ((n-2) ω_{n-1})``.
    """
    c = params.sqrt_p / ((params.n - 2) * surface_area(params.n))
    return c, c


@dataclass(frozen=True, eq=False)
class IntegralReconstruction:
    """``U`` and ``V`` rebuilt from the integral system on a profile's grid."""

    grid: np.ndarray
    U: np.ndarray
    V: np.ndarray
    u_reconstructed: np.ndarray
    v_reconstructed: np.ndarray
    c1: float
    c2: float
    tail_exponent: float

    @property
    def u_deviation(self):
        return float(np.max(np.abs(self.u_reconstructed - self.U) / self.U))

    @property
    def v_deviation(self):
        return float(np.max(np.abs(self.v_reconstructed - self.V) / self.V))


def reconstruct_ie(profile, params=None, window_fraction=DEFAULT_WINDOW, tail_rate=None):
    """Rebuild ``U`` and ``V`` of an entire profile from their Newton potentials.

    Parameters
    ----------
    profile : RadialProfile
        Must be ``EntirePositive``.
    params : SystemParams, optional
        Defaults to ``profile.params``.
    window_fraction : tuple of float
        Window of the tail fit, as fractions of the last radius.
    tail_rate : float, optional
        Decay rate of ``U`` beyond the grid; fitted from the profile by
        default.

    Raises
    ------
    TailError
        When the integrands ``U^(p-1) V`` and ``U^p`` decay no faster than
        ``r^-2``, so the Newton representation does not converge.
    """
    params = profile.params if params is None else params
    if profile.outcome.tag is not OutcomeTag.ENTIRE_POSITIVE:
        raise TailError("integral system needs an entire positive profile")
    if tail_rate is None:
        tail_rate = decay_fit(profile, window_fraction).rate
    p = params.p
    # U^(p-1) V and U^p both decay like r^(-p rate)
    t = p * float(tail_rate)
    if t <= 2:
        raise TailError(f"integrands decay like r^-{t:.4g}; the Newton integral needs an exponent > 2")
    U, V, r = profile.U, profile.V, profile.r
    c1, c2 = ie_constants(params)
    g_u = radial_newton(RadialField(r, U ** (p - 1) * V, t), params.n).values
    g_v = radial_newton(RadialField(r, U**p, t), params.n).values
    return IntegralReconstruction(r, U, V, c1 * g_u, c2 * g_v, c1, c2, t)


def verify_ie(profile, params=None, window_fraction=DEFAULT_WINDOW, tail_rate=None):
    """Check that a profile solves the integral system.

    Returns an :class:`IdentityReport` whose ``residual`` is the larger of the
    maximal relative deviations ``|rebuilt - sampled| / sampled`` of ``U`` and
    ``V``; ``lhs`` and ``rhs`` are the sampled and rebuilt values at the worst
    node.  See :func:`reconstruct_ie` for the arguments.
    """
    rec = reconstruct_ie(profile, params, window_fraction, tail_rate)
    dev_u = np.abs(rec.u_reconstructed - rec.U) / rec.U
    dev_v = np.abs(rec.v_reconstructed - rec.V) / rec.V
    iu, iv = int(np.argmax(dev_u)), int(np.argmax(dev_v))
    if dev_u[iu] >= dev_v[iv]:
        lhs, rhs = rec.U[iu], rec.u_reconstructed[iu]
    else:
        lhs, rhs = rec.V[iv], rec.v_reconstructed[iv]
    components = {
        "u_deviation": float(dev_u[iu]),
        "v_deviation": float(dev_v[iv]),
        "u_worst_radius": float(rec.grid[iu]),
        "v_worst_radius": float(rec.grid[iv]),
        "c1": rec.c1,
        "c2": rec.c2,
        "tail_exponent": rec.tail_exponent,
    }
    return IdentityReport(
        "integral_system",
        float(lhs),
        float(rhs),
        max(components["u_deviation"], components["v_deviation"]),
        components,
        profile.digest(),
    )
