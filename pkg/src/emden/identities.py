"""Quadrature checks of the integral identities of the system.

All integrals are over R^n (or a ball) of radial functions and reduce to
``ω_{n-1} ∫ f(r) r^(n-1) dr``.  With

    A_u = ∫|∇u|²,   A_v = ∫|∇v|²,   J = ∫u^p v,

a solution decaying fast enough satisfies the energy identity
``A_u = A_v = √p J``.  Multiplying the equations by ``x·∇u`` and
``x·∇v / p`` gives the Pohozaev identities

    ball, u = v = 0 on |x| = R:
        -(n-2)/2 (A_u + A_v/p) - (B_u + B_v/p)/2 = -(n/√p) J,
        B_w = R ω_{n-1} R^(n-1) w'(R)²;
    whole space:
        (n-2)/2 (p A_u + A_v) = n √p J.

Combined with the energy identity the ball version reads
``-(B_u + B_v/p)/2 = Q J`` with
``Q = (n-2)/2 (√p + 1/√p) - n/√p``, so a ball solution needs ``Q < 0``,
which holds exactly for ``p < (n+2)/(n-2)``.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np

from . import _quadrature
from ._validation import check_dimension, check_grid, check_samples, same_threshold
from .errors import BoundaryError, DecayError, KindError, SingularityError, TailError
from .integrator import OutcomeTag, RadialProfile, profile_from_closed_form
from .model import ClosedForm, FormKind
from .potentials import default_grid, surface_area
from .reports import IdentityReport, form_digest, relative_residual
from .shooting import DEFAULT_WINDOW, decay_fit

BOUNDARY_TOL = 1e-10


def radial_integral(r, f, n, tail_exponent=None):
    """Integral over R^n (or the ball of radius ``r[-1]``) of a radial function.

    Parameters
    ----------
    r : array_like
        Strictly increasing radii.  If ``r[0] > 0`` the core ``[0, r[0]]`` is
        added with ``f`` frozen at ``f[0]``.
    f : array_like
        Samples on ``r``.
    n : int
        Space dimension.
    tail_exponent : float, optional
        When given, ``f`` is continued as ``f[-1] (r/r[-1])^(-t)`` beyond the
        grid and the integral is over all of R^n.

    Raises
    ------
    TailError
        If ``t <= n``, so the continued integral diverges.
    """
    n = check_dimension(n, minimum=1)
    r = check_grid(r)
    f = check_samples(f, r, "f")
    total = _quadrature.integrate(r, f * r ** (n - 1))
    total += f[0] * r[0] ** n / n
    if tail_exponent is not None:
        t = float(tail_exponent)
        if t <= n:
            raise TailError(f"tail r^-{t:g} is not integrable in dimension {n}")
        total += f[-1] * r[-1] ** n / (t - n)
    return float(surface_area(n) * total)


@dataclass(frozen=True, eq=False)
class _Sampled:
    profile: RadialProfile
    rate: Optional[float]
    digest: str

    @property
    def entire(self):
        return self.rate is not None


def _sample(obj, params, grid, window_fraction):
    """Turn a profile or closed form into samples plus its decay rate.

    The rate is ``None`` for a ball profile (both components vanish at the
    last radius).
    """
    if isinstance(obj, ClosedForm):
        if obj.kind is FormKind.CYLINDER_LIFT:
            raise DecayError("a cylinder lift does not decay along its axis")
        if obj.kind is FormKind.SINGULAR_POWER:
            raise SingularityError("the singular power solution has no finite energy")
        grid = default_grid() if grid is None else grid
        prof = profile_from_closed_form(obj, grid)
        return _Sampled(prof, float(obj.params.n - 2), form_digest(obj))
    prof = obj
    tag = prof.outcome.tag
    if tag is OutcomeTag.ENTIRE_POSITIVE:
        return _Sampled(prof, decay_fit(prof, window_fraction).rate, prof.digest())
    if tag is OutcomeTag.BOTH_VANISHED:
        _check_boundary(prof)
        return _Sampled(prof, None, prof.digest())
    raise BoundaryError(
        f"profile ends with {tag.value}; identities need both components to vanish"
    )


def _check_boundary(prof):
    u_end, v_end = prof.U[-1], prof.V[-1]
    if abs(u_end) > BOUNDARY_TOL or abs(v_end) > BOUNDARY_TOL:
        raise BoundaryError(
            f"boundary values U(R) = {u_end:.3g}, V(R) = {v_end:.3g} exceed {BOUNDARY_TOL:g}"
        )


def _require_fast_decay(rate, n, what):
    # boundary terms R^(n-1) U U' vanish only if 2 rate > n - 2
    if rate <= (n - 2) / 2:
        raise DecayError(
            f"{what} needs decay faster than r^-{(n - 2) / 2:g}; fitted rate is {rate:.6g}"
        )


def _integrals(sampled, params):
    """``A_u``, ``A_v`` and ``J`` with analytic tails for entire profiles."""
    prof, n, p = sampled.profile, params.n, params.p
    U = np.clip(prof.U, 0.0, None)
    V = np.clip(prof.V, 0.0, None)
    if sampled.entire:
        rate = sampled.rate
        t_grad, t_j = 2 * rate + 2, (p + 1) * rate
    else:
        t_grad = t_j = None
    A_u = radial_integral(prof.r, prof.dU**2, n, t_grad)
    A_v = radial_integral(prof.r, prof.dV**2, n, t_grad)
    J = radial_integral(prof.r, U**p * V, n, t_j)
    return A_u, A_v, J


def energy_identity(obj, params=None, grid=None, window_fraction=DEFAULT_WINDOW):
    """Check ``∫|∇u|² = ∫|∇v|² = √p ∫u^p v``.

    Parameters
    ----------
    obj : RadialProfile or ClosedForm
        An entire profile or bubble (whole-space identity) or a profile whose
        components both vanish at its last radius (ball identity).
    params : SystemParams, optional
    grid : array_like, optional
        Sampling radii for a closed form; 2048 log-spaced nodes on
        ``[1e-4, 1e3]`` by default.

    Returns
    -------
    IdentityReport
        ``lhs = A_u``, ``rhs = √p J``; ``residual`` is the larger of the two
        pairwise residuals, both of which are in ``components``.

    Raises
    ------
    DecayError
        For an entire profile decaying too slowly for the boundary terms at
        infinity to vanish.
    """
    params = obj.params if params is None else params
    sampled = _sample(obj, params, grid, window_fraction)
    if sampled.entire:
        _require_fast_decay(sampled.rate, params.n, "the energy identity")
    A_u, A_v, J = _integrals(sampled, params)
    rhs = params.sqrt_p * J
    res_uv = relative_residual(A_u, A_v)
    res_uj = relative_residual(A_u, rhs)
    components = {
        "grad_u_sq": A_u,
        "grad_v_sq": A_v,
        "upv": J,
        "residual_uv": res_uv,
        "residual_u_upv": res_uj,
        "residual_v_upv": relative_residual(A_v, rhs),
        "domain_radius": math.inf if sampled.entire else float(sampled.profile.r[-1]),
    }
    name = "energy_entire" if sampled.entire else "energy_ball"
    return IdentityReport(name, A_u, rhs, max(res_uv, res_uj), components, sampled.digest)


def pohozaev_q(n, p):
    """Obstruction ``Q(n, p) = (n-2)/2 (√p + 1/√p) - n/√p``.

    ``Q`` has the sign of ``p - (n+2)/(n-2)``.
    """
    n = check_dimension(n)
    sp = math.sqrt(p)
    return (n - 2) / 2 * (sp + 1 / sp) - n / sp


def pohozaev_ball(profile, params=None) -> Tuple[IdentityReport, bool]:
    """Pohozaev identity on the ball where both components vanish.

    Returns
    -------
    report : IdentityReport
        The full identity ``-(n-2)/2 (A_u + A_v/p) - (B_u + B_v/p)/2`` versus
        ``-(n/√p) J``.  ``components`` holds every integral and boundary
        term, ``Q`` and the reduced form ``-(B_u + B_v/p)/2 = Q J``.
    admissible : bool
        ``Q < 0``: only then can a positive ball solution exist.

    Raises
    ------
    BoundaryError
        Unless the profile ends with both ``|U(R)|`` and ``|V(R)|`` at most
        1e-10.
    """
    if isinstance(profile, ClosedForm):
        raise KindError("the ball identity needs a Dirichlet profile, not a closed form")
    params = profile.params if params is None else params
    if profile.outcome.tag is not OutcomeTag.BOTH_VANISHED:
        _check_boundary(profile)
        raise BoundaryError(f"profile ends with {profile.outcome.tag.value}, not BothVanished")
    sampled = _sample(profile, params, None, DEFAULT_WINDOW)
    n, p, sp = params.n, params.p, params.sqrt_p
    A_u, A_v, J = _integrals(sampled, params)
    R = float(profile.r[-1])
    sphere = surface_area(n) * R ** (n - 1)
    B_u = R * sphere * profile.dU[-1] ** 2
    B_v = R * sphere * profile.dV[-1] ** 2
    lhs = -(n - 2) / 2 * (A_u + A_v / p) - (B_u + B_v / p) / 2
    rhs = -(n / sp) * J
    Q = pohozaev_q(n, p)
    flux = -(B_u + B_v / p) / 2
    components = {
        "grad_u_sq": A_u,
        "grad_v_sq": A_v,
        "upv": J,
        "boundary_u": B_u,
        "boundary_v": B_v,
        "radius": R,
        "Q": Q,
        "flux": flux,
        "QJ": Q * J,
        "reduced_residual": relative_residual(flux, Q * J),
    }
    report = IdentityReport.from_sides("pohozaev_ball", lhs, rhs, components, sampled.digest)
    return report, Q < 0


def pohozaev_entire(obj, params=None, grid=None, window_fraction=DEFAULT_WINDOW):
    """Whole-space Pohozaev relation ``(n-2)/2 (p A_u + A_v) = n √p J``.

    ``components["p_implied"]`` is the exponent solving the relation with the
    measured ratios ``A_u/(√p J)`` and ``A_v/(√p J)``; for a solution that
    also satisfies the energy identity it is ``(n+2)/(n-2)``.

    Raises
    ------
    DecayError
        For slowly decaying entire profiles, as in :func:`energy_identity`.
    """
    params = obj.params if params is None else params
    sampled = _sample(obj, params, grid, window_fraction)
    if not sampled.entire:
        raise BoundaryError("the whole-space relation needs an entire profile")
    _require_fast_decay(sampled.rate, params.n, "the whole-space Pohozaev relation")
    n, p, sp = params.n, params.p, params.sqrt_p
    A_u, A_v, J = _integrals(sampled, params)
    lhs = (n - 2) / 2 * (p * A_u + A_v)
    rhs = n * sp * J
    e_u, e_v = A_u / (sp * J), A_v / (sp * J)
    components = {
        "grad_u_sq": A_u,
        "grad_v_sq": A_v,
        "upv": J,
        "p_implied": (2 * n / (n - 2) - e_v) / e_u,
    }
    return IdentityReport.from_sides("pohozaev_entire", lhs, rhs, components, sampled.digest)


def _as_fraction(params):
    """``p`` as an exact fraction, snapped to ``n/(n-2)`` when within 1e-12."""
    n = params.n
    if same_threshold(params.p, params.serrin):
        return Fraction(n, n - 2)
    return Fraction(params.p)


def _to_float(q):
    try:
        return float(q)
    except OverflowError:
        return math.inf if q > 0 else -math.inf


@dataclass(frozen=True)
class BootstrapTrace:
    """Exponent sequence of the nonexistence bootstrap.

    ``a_{j+1} = (2p-1) a_j - 4`` from ``a_0 = n-2``, ``b_j = p a_j - 2``, and
    ``j0`` is the first index with ``a_j <= 0`` (``None`` if there is none up
    to ``j_max``).  The recurrence is evaluated in exact rational arithmetic.
    """

    params: object
    a_seq: Tuple[float, ...]
    b_seq: Tuple[float, ...]
    j0: Optional[int]

    def closed_form(self):
        """``(n-2-2/(p-1)) (2p-1)^j + 2/(p-1)`` for each computed ``j``."""
        n, p = self.params.n, self.params.p
        k = 2 / (p - 1)
        return tuple((n - 2 - k) * (2 * p - 1) ** j + k for j in range(len(self.a_seq)))

    def closed_form_discrepancy(self):
        """Largest relative gap between recurrence and closed form."""
        gaps = [
            relative_residual(a, c) if abs(a) > 1 else abs(a - c)
            for a, c in zip(self.a_seq, self.closed_form())
            if math.isfinite(a) and math.isfinite(c)
        ]
        return max(gaps, default=0.0)


def bootstrap_bound(params):
    """Upper bound ``ceil(log(k/(k-(n-2))) / log(2p-1)) + 1`` on ``j0``.

    ``k = 2/(p-1)``.  Only meaningful for ``p < n/(n-2)``, where ``k > n-2``.
    """
    n, p = params.n, params.p
    k = 2 / (p - 1)
    if k <= n - 2:
        return None
    return math.ceil(math.log(k / (k - (n - 2))) / math.log(2 * p - 1)) + 1


def bootstrap(params, j_max=50):
    """Run the exponent recurrence up to ``j_max``.

    ``j0`` exists exactly when ``p < n/(n-2)``; the sequence is computed with
    fractions so the sign of each ``a_j`` is decided without rounding.
    """
    j_max = int(j_max)
    if j_max < 0:
        raise ValueError(f"j_max must be non-negative, got {j_max}")
    p = _as_fraction(params)
    a = Fraction(params.n - 2)
    a_exact = [a]
    for _ in range(j_max):
        a = (2 * p - 1) * a - 4
        a_exact.append(a)
    j0 = next((j for j, x in enumerate(a_exact) if x <= 0), None)
    a_seq = tuple(_to_float(x) for x in a_exact)
    b_seq = tuple(_to_float(p * x - 2) for x in a_exact)
    return BootstrapTrace(params, a_seq, b_seq, j0)
