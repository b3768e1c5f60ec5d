"""Shooting in ``a = V(0)`` for entire positive radial solutions.

Trajectories with small ``a`` have ``V`` vanish first; the entire solution
sits at the supremum of that set.  :func:`find_threshold` bisects on the
predicate "V vanishes first", :func:`entire_profile` integrates at the
threshold, and :func:`decay_fit` measures the power-law tail rate of the
result.  :class:`ShootingSolver` and :class:`PowerLawDecay` expose the same
machinery through the scikit-learn estimator protocol.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_positive, check_window
from .errors import BracketError, PositivityError, ThresholdUnresolved, WindowError
from .integrator import (
    DEFAULT_R0,
    DEFAULT_R_MAX,
    DEFAULT_TOL,
    DEFAULT_SAMPLES_PER_DECADE,
    OutcomeTag,
    RadialProfile,
    TrajectoryOutcome,
    classify_trajectory,
    integrate,
)
from .model import SystemParams

DEFAULT_BISECT_TOL = 1e-8
DEFAULT_A_HI = 2.0
DEFAULT_WINDOW = (0.5, 0.9)
MIN_WINDOW_SAMPLES = 20
# Radius out to which bisection classifies trajectories.  Near the threshold
# V - U grows like a power of r while U decays, so the radius at which V
# vanishes diverges as a approaches the threshold; a short horizon would
# stop the bisection well short of it.
DEFAULT_HORIZON = 1e30
MAX_BISECTIONS = 200


def epsilon0(params):
    """Shooting parameter below which V is guaranteed to vanish in the unit ball."""
    return 1.0 / (params.n * 2.0 ** (1 + params.p) * params.sqrt_p)


def default_bracket(params):
    return min(1e-3, 0.9 * epsilon0(params)), DEFAULT_A_HI


def classify(params, a, r_max=DEFAULT_R_MAX, tol=DEFAULT_TOL, r0=DEFAULT_R0):
    """Outcome of the trajectory ``U(0) = 1, V(0) = a`` up to ``r_max``."""
    return classify_trajectory(params, a, r_max=r_max, tol=tol, r0=r0)


@dataclass(frozen=True)
class ThresholdResult:
    """Result of bisecting for the shooting threshold.

    ``bracket_outcomes`` are the outcomes recorded at ``bracket`` during the
    search, classified out to ``horizon``.
    """

    a_star: float
    bracket: Tuple[float, float]
    iterations: int
    profile_at_star: RadialProfile
    bracket_outcomes: Tuple[TrajectoryOutcome, TrajectoryOutcome]
    horizon: float


def _v_first(outcome):
    return outcome.tag is OutcomeTag.V_VANISHED


def find_threshold(
    params,
    a_lo=None,
    a_hi=None,
    bisect_tol=DEFAULT_BISECT_TOL,
    r_max=DEFAULT_R_MAX,
    tol=DEFAULT_TOL,
    horizon=DEFAULT_HORIZON,
    r0=DEFAULT_R0,
    samples_per_decade=DEFAULT_SAMPLES_PER_DECADE,
):
    """Bisect for the supremum of shooting parameters whose V vanishes first.

    Parameters
    ----------
    params : SystemParams
    a_lo, a_hi : float, optional
        Initial bracket.  ``a_lo`` must classify as ``VVanished`` and ``a_hi``
        as anything else.  Defaults to ``(min(1e-3, 0.9 ε0), 2)``.
    bisect_tol : float
        Final bracket width.
    r_max : float
        Horizon of the returned profile at the threshold.
    horizon : float
        Horizon used to classify trajectories during the search (at least
        ``r_max``).

    Returns
    -------
    ThresholdResult
    """
    lo_default, hi_default = default_bracket(params)
    a_lo = lo_default if a_lo is None else check_positive(a_lo, "a_lo")
    a_hi = hi_default if a_hi is None else check_positive(a_hi, "a_hi")
    bisect_tol = check_positive(bisect_tol, "bisect_tol")
    horizon = max(check_positive(horizon, "horizon"), check_positive(r_max, "r_max"))
    if not a_lo < a_hi:
        raise BracketError(f"empty bracket: a_lo = {a_lo!r} is not below a_hi = {a_hi!r}")

    def outcome_at(a):
        return classify(params, a, r_max=horizon, tol=tol, r0=r0)

    out_lo, out_hi = outcome_at(a_lo), outcome_at(a_hi)
    if not _v_first(out_lo):
        raise BracketError(f"a_lo = {a_lo:g} gives {out_lo.tag.value}, expected VVanished")
    if _v_first(out_hi):
        raise BracketError(f"a_hi = {a_hi:g} gives VVanished; the bracket does not straddle")

    iterations = 0
    while a_hi - a_lo > bisect_tol and iterations < MAX_BISECTIONS:
        mid = 0.5 * (a_lo + a_hi)
        if mid in (a_lo, a_hi):
            break
        out_mid = outcome_at(mid)
        if _v_first(out_mid):
            a_lo, out_lo = mid, out_mid
        else:
            a_hi, out_hi = mid, out_mid
        iterations += 1

    a_star = 0.5 * (a_lo + a_hi)
    profile = integrate(
        params, a_star, r_max=r_max, tol=tol, r0=r0, samples_per_decade=samples_per_decade
    )
    return ThresholdResult(a_star, (a_lo, a_hi), iterations, profile, (out_lo, out_hi), horizon)


def entire_profile(params, r_max=DEFAULT_R_MAX, **kwargs):
    """Profile at the shooting threshold, certified positive out to ``r_max``.

    Raises
    ------
    ThresholdUnresolved
        If the threshold trajectory vanishes before ``r_max``.
    """
    result = find_threshold(params, r_max=r_max, **kwargs)
    profile = result.profile_at_star
    if profile.outcome.tag is not OutcomeTag.ENTIRE_POSITIVE:
        raise ThresholdUnresolved(
            f"threshold a* = {result.a_star:.12g} gives {profile.outcome.tag.value} "
            f"at R = {profile.outcome.radius:.12g}; no entire positive radial solution"
        )
    return profile


@dataclass(frozen=True)
class DecayFit:
    """Power-law fit ``u ~ c r^(-rate)`` over a window of radii."""

    rate: float
    amplitude_band: Tuple[float, float]
    window: Tuple[float, float]
    regression_residual: float
    n_samples: int


class PowerLawDecay(RegressorMixin, BaseEstimator):
    """Least-squares power law ``y = c x^(-rate)`` on a window of the data.

    Parameters
    ----------
    window : tuple of float
        Fractions ``(f_lo, f_hi)`` of ``max(x)``; only samples with
        ``f_lo*max(x) <= x <= f_hi*max(x)`` enter the fit.
    min_samples : int
        Minimum number of samples in the window.

    Attributes
    ----------
    rate_ : float
    amplitude_ : float
        Fitted ``c``.
    amplitude_band_ : tuple of float
        Extremes of ``y x^rate`` over the window.
    window_ : tuple of float
        Window bounds in units of ``x``.
    regression_residual_ : float
        RMS residual in log space.
    """

    def __init__(self, window=DEFAULT_WINDOW, min_samples=MIN_WINDOW_SAMPLES):
        self.window = window
        self.min_samples = min_samples

    def fit(self, X, y):
        x = np.asarray(X, dtype=float).reshape(-1)
        y = np.asarray(y, dtype=float).reshape(-1)
        if x.shape != y.shape:
            raise WindowError("radii and values must have the same length")
        f_lo, f_hi = check_window(self.window)
        x_top = float(np.max(x))
        lo, hi = f_lo * x_top, f_hi * x_top
        mask = (x >= lo) & (x <= hi)
        count = int(mask.sum())
        if count < self.min_samples:
            raise WindowError(
                f"window [{lo:.6g}, {hi:.6g}] holds {count} samples, need {self.min_samples}"
            )
        xs, ys = x[mask], y[mask]
        if np.any(ys <= 0):
            raise PositivityError("decay fit needs positive values in the window")
        lx, ly = np.log(xs), np.log(ys)
        slope, intercept = np.polyfit(lx, ly, 1)
        resid = ly - (slope * lx + intercept)
        self.rate_ = float(-slope)
        self.amplitude_ = float(math.exp(intercept))
        scaled = ys * xs**self.rate_
        self.amplitude_band_ = (float(scaled.min()), float(scaled.max()))
        self.window_ = (lo, hi)
        self.regression_residual_ = float(np.sqrt(np.mean(resid**2)))
        self.n_samples_ = count
        return self

    def predict(self, X):
        check_is_fitted(self, "rate_")
        x = np.asarray(X, dtype=float).reshape(-1)
        return self.amplitude_ * x ** (-self.rate_)


def decay_fit(profile, window_fraction=DEFAULT_WINDOW):
    """Fit the tail rate of ``U`` over ``window_fraction`` of the horizon."""
    if profile.outcome.tag is not OutcomeTag.ENTIRE_POSITIVE:
        raise WindowError(
            f"decay fit needs an EntirePositive profile, got {profile.outcome.tag.value}"
        )
    est = PowerLawDecay(window=window_fraction).fit(profile.r, profile.U)
    return DecayFit(
        est.rate_, est.amplitude_band_, est.window_, est.regression_residual_, est.n_samples_
    )


class ShootingSolver(BaseEstimator):
    """Find the entire radial solution of the system by shooting.

    ``fit`` locates the threshold ``a*`` by bisection and integrates at it;
    ``predict`` interpolates ``U`` at requested radii.

    Parameters
    ----------
    n : int
    p : float
    a_lo, a_hi : float or None
        Initial bracket (see :func:`find_threshold`).
    bisect_tol : float
    r_max : float
        Horizon of the final profile.
    tol : float
        Integrator tolerance.
    horizon : float
        Classification horizon for the bisection.
    window : tuple of float
        Decay-fit window as fractions of ``r_max``.

    Attributes
    ----------
    params_ : SystemParams
    threshold_ : ThresholdResult
    a_star_ : float
    profile_ : RadialProfile
    outcome_ : TrajectoryOutcome
    sync_deviation_ : float
        ``max|U - V| / max U`` on the profile.
    decay_ : DecayFit or None
        Tail fit, when the profile is entire.
    """

    def __init__(
        self,
        n=4,
        p=4.0,
        a_lo=None,
        a_hi=None,
        bisect_tol=DEFAULT_BISECT_TOL,
        r_max=DEFAULT_R_MAX,
        tol=DEFAULT_TOL,
        horizon=DEFAULT_HORIZON,
        window=DEFAULT_WINDOW,
    ):
        self.n = n
        self.p = p
        self.a_lo = a_lo
        self.a_hi = a_hi
        self.bisect_tol = bisect_tol
        self.r_max = r_max
        self.tol = tol
        self.horizon = horizon
        self.window = window

    def fit(self, X=None, y=None):
        self.params_ = SystemParams(self.n, self.p)
        self.threshold_ = find_threshold(
            self.params_,
            a_lo=self.a_lo,
            a_hi=self.a_hi,
            bisect_tol=self.bisect_tol,
            r_max=self.r_max,
            tol=self.tol,
            horizon=self.horizon,
        )
        self.a_star_ = self.threshold_.a_star
        self.profile_ = self.threshold_.profile_at_star
        self.outcome_ = self.profile_.outcome
        self.sync_deviation_ = self.profile_.sync_deviation()
        self.decay_ = None
        if self.outcome_.tag is OutcomeTag.ENTIRE_POSITIVE:
            self.decay_ = decay_fit(self.profile_, self.window)
        self._spline = CubicHermiteSpline(self.profile_.r, self.profile_.U, self.profile_.dU)
        return self

    def predict(self, X):
        """Interpolated ``U`` at radii ``X`` inside the profile range."""
        check_is_fitted(self, "profile_")
        r = np.asarray(X, dtype=float).reshape(-1)
        prof = self.profile_
        if np.any(r < prof.r[0]) or np.any(r > prof.r[-1]):
            raise WindowError(
                f"radii must lie in [{prof.r[0]:g}, {prof.r[-1]:g}] covered by the profile"
            )
        return self._spline(r)
