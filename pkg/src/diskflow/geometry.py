"""Local geometry of trajectories near the Denjoy-Wolff point.

Every orbit of an admissible flow lands at the boundary fixed point 1
tangentially to a single line, the limit tangent.  This module measures how
an orbit hugs that line: the limiting slope of 1 - F_t(z), the Euclidean
distance from the orbit to the tangent, the signed curvature along the way,
the contact order between orbit and tangent, straight-line asymptotes in
the half-plane frame, and the relative position of two orbits of the same
flow.  The (alpha, beta) exponent plane splits into five regions with
qualitatively different answers; ``classify_omega`` computes the region and
the classification routines dispatch on it together with one scalar
dichotomy, the imaginary part of mu * lambda**(-beta/alpha).

Numeric estimates ride on the half-plane integrator: the boundary gap
1 - F_t(z) equals 2 / (Phi_t(w) + 1) exactly, so distances that shrink like
a power of the gap keep full relative precision long after the disk picture
has collapsed into rounding noise.
"""

from __future__ import annotations

import cmath
import dataclasses
import math

import numpy as np

from .asymptotics import LimitEstimate, estimate_limit
from .errors import ValidationError
from .flow import GeometricGrid, conjugate_series, flow_at, integrate_trajectory
from .generators import cayley
from .koenigs import evaluator_for

__all__ = [
    "OMEGA_1",
    "OMEGA_2",
    "OMEGA_3",
    "OMEGA_4",
    "OMEGA_5",
    "CURV_ZERO",
    "CURV_FINITE_PER_TRAJECTORY",
    "CURV_FINITE_SHARED",
    "CURV_INFINITE_EXCEPT_SPECIAL",
    "CURV_INFINITE",
    "OmegaRegion",
    "AsymptoteReport",
    "ContactOrderReport",
    "MutualPosition",
    "classify_omega",
    "limit_slope",
    "empirical_slope",
    "tangent_direction",
    "tangent_distance",
    "tangent_distance_formula",
    "curvature",
    "curvature_value",
    "curvature_tail",
    "limit_curvature_class",
    "contact_order_theory",
    "contact_order_estimate",
    "contact_order_for",
    "asymptote_report",
    "mutual_position",
    "parallel_ratio_spread",
    "special_trajectory_locator",
]

OMEGA_1 = "Omega1"
OMEGA_2 = "Omega2"
OMEGA_3 = "Omega3"
OMEGA_4 = "Omega4"
OMEGA_5 = "Omega5"

CURV_ZERO = "Zero"
CURV_FINITE_PER_TRAJECTORY = "FinitePerTrajectory"
CURV_FINITE_SHARED = "FiniteShared"
CURV_INFINITE_EXCEPT_SPECIAL = "InfiniteExceptSpecial"
CURV_INFINITE = "Infinite"

# dichotomies like Im(mu lambda^(-beta/alpha)) = 0 are discontinuous in the
# parameters; floating-point zero tests use this relative threshold and the
# caller may override the verdict outright
IM_ZERO_RTOL = 1e-12

_UNDERFLOW_FLOOR = 1e-280


@dataclasses.dataclass(frozen=True)
class OmegaRegion:
    """One cell of the exponent-plane partition."""

    variant: str


@dataclasses.dataclass(frozen=True)
class AsymptoteReport:
    """Existence and placement of the straight-line asymptote of t -> Phi_t(w).

    intercept is the signed offset along the rotated imaginary axis: the
    asymptote consists of the points p with
    Im(conj(lambda^(1/alpha)) (p + 1)) = intercept + 1, so intercept = -1
    means the line passes through -1.  It is present exactly when
    exists == "Yes".  numeric_limit estimates
    lim Im(conj(lambda^(1/alpha)) (Phi_t(w) + 1)), the quantity whose finite
    existence is equivalent to having an asymptote.
    """

    exists: str
    shared_across_initial_points: bool
    passes_through_minus_one: bool
    intercept: float | None
    numeric_limit: LimitEstimate
    inconsistent: bool = False


@dataclasses.dataclass(frozen=True)
class ContactOrderReport:
    """Fitted contact order between an orbit and its limit tangent line.

    estimated_order comes from the log-log slope of d(t) against the gap
    |1 - F_t(z)| over the last decade and a half of the gap range, minus 1.
    limit_constant extrapolates d / gap^(1 + theoretical_order), with an
    extra 1/|log gap| factor when log_corrected is set.  above_all marks
    orbits whose distance is rounding-level zero (the orbit rides the
    tangent line; every finite order passes).
    """

    estimated_order: float
    limit_constant: LimitEstimate | None
    theoretical_order: float | None
    fit_r2: float
    above_all: bool = False
    log_corrected: bool = False
    unreliable: bool = False


@dataclasses.dataclass(frozen=True)
class MutualPosition:
    """Relative position of two orbits: the limit s of Phi_t(w1) - Phi_t(w2).

    variant is MutuallyConvergent (s = 0), AsymptoticallyParallel (finite
    nonzero s, reported in s_value together with the ratio
    s / (sigma(w1) - sigma(w2)) which is the same for every pair), or
    MutuallyDivergent.  theoretical_variant is the class predicted from
    (alpha, beta) alone, None where the classification is silent.
    """

    variant: str
    evidence: LimitEstimate
    s_value: complex | None = None
    parallel_ratio: complex | None = None
    theoretical_variant: str | None = None


def classify_omega(alpha, beta):
    """Assign (alpha, beta) to its region of the exponent plane.

    The five sets partition (0, 2] x (0, inf); membership follows the
    set-builder definitions literally, comparisons against 1 and between
    alpha and beta, no tolerance fuzz.
    """
    alpha = float(alpha)
    beta = float(beta)
    if not (0.0 < alpha <= 2.0) or not math.isfinite(alpha):
        raise ValidationError(f"alpha must lie in (0, 2], got {alpha}")
    if not (beta > 0.0) or not math.isfinite(beta):
        raise ValidationError(f"beta must be positive and finite, got {beta}")
    if alpha > 1.0 and beta > 1.0:
        return OmegaRegion(OMEGA_1)
    if alpha == 1.0 and beta > 1.0:
        return OmegaRegion(OMEGA_2)
    if alpha < min(1.0, beta):
        return OmegaRegion(OMEGA_3)
    if beta == 1.0 and 1.0 < alpha <= 2.0:
        return OmegaRegion(OMEGA_4)
    # remaining: beta <= min(1, alpha) minus the fourth region
    return OmegaRegion(OMEGA_5)


def _im_dichotomy(gen):
    """Value and magnitude scale of Im(mu * lambda**(-beta/alpha))."""
    if gen.b == 0:
        return 0.0, 0.0
    val = gen.mu * gen.lam ** complex(-gen.beta / gen.alpha)
    return float(val.imag), abs(val)


def _im_is_zero(value, scale):
    return abs(value) <= IM_ZERO_RTOL * max(scale, 1.0)


def resolved_im_dichotomy(gen, im_zero=None):
    """True when the mu lambda^(-beta/alpha) dichotomy resolves to zero."""
    if im_zero is not None:
        return bool(im_zero)
    val, scale = _im_dichotomy(gen)
    return _im_is_zero(val, scale)


def _series_at_positive_times(gen, w0s, t_grid, horizon):
    """Half-plane orbit samples restricted to t > 0, rows aligned with times.

    The integrator always prepends t = 0; extrapolation wants strictly
    positive, increasing times, so that row is cut here once for everyone.
    """
    if t_grid is None:
        t_grid = GeometricGrid.to_horizon(horizon, include_zero=False)
    times = np.asarray(t_grid.times() if hasattr(t_grid, "times") else t_grid, dtype=float)
    times = times[times > 0.0]
    if times.size == 0:
        raise ValidationError("the time grid has no positive entries")
    W, gap, _ = conjugate_series(gen, w0s, times)
    return times, W[-times.size :], gap[-times.size :]


# ---- slope and tangent ------------------------------------------------------


def limit_slope(gen):
    """Limiting value of arg(1 - F_t(z)), equal to -arg(a)/alpha."""
    return -cmath.phase(gen.a) / gen.alpha


def tangent_direction(gen):
    """Unit direction of the limit tangent line at 1.

    lambda = alpha 2^alpha a has the argument of a, so
    exp(-i arg(a)/alpha) = conj(lambda^(1/alpha)) / |lambda^(1/alpha)|: the
    tangent direction is the conjugate root of the leading coefficient.
    """
    return cmath.exp(-1j * cmath.phase(gen.a) / gen.alpha)


def empirical_slope(gen, z, t_grid=None):
    """Extrapolated tail of arg(1 - F_t(z)) along one orbit.

    The angle sequence is unwrapped before extrapolation so slopes near
    +-pi/2 do not alias across the branch cut.  Orbits whose theoretical
    slope sits at exactly +-pi/2 approach the boundary tangentially and
    converge slowly; the estimate error reflects that honestly.  The angle
    settles like t^(-beta/alpha) when the second term decays slower than
    the first bracket correction and like 1/t otherwise, so the decay
    exponent is handed to the extrapolator instead of being refit.
    """
    times, _, gap = _series_at_positive_times(gen, [cayley(z)], t_grid, 1e6)
    ang = np.unwrap(np.angle(gap[:, 0]))
    if gen.is_pure:
        p = 1.0
    elif gen.beta == gen.alpha:
        p = None  # log(t)/t tail, no clean power
    else:
        p = min(gen.beta / gen.alpha, 1.0)
    return estimate_limit(list(zip(times, ang)), p=p)


def _require_disk_trajectory(trajectory):
    if trajectory.frame != "disk":
        raise ValidationError(
            f"tangent distances are defined on disk-frame orbits, got {trajectory.frame!r}"
        )


def tangent_distance(gen, trajectory, signed=False):
    """Distance from each trajectory point to the limit tangent line.

    The line passes through 1 with unit direction u = exp(-i arg(a)/alpha).
    Signed distance is the component of z - 1 along the normal i u, which
    works out to Im((z - 1) conj(u)); the default is its absolute value.
    Returns an (n, 2) array of rows (t, d).
    """
    _require_disk_trajectory(trajectory)
    u = tangent_direction(gen)
    s = np.imag((trajectory.points - 1.0) * np.conj(u))
    if not signed:
        s = np.abs(s)
    return np.column_stack([trajectory.times, s])


def tangent_distance_formula(gen, trajectory):
    """The same distance through the residual formula, as a cross-check.

    With r(z,t) = 1/(1 - F_t(z)) - (lambda t)^(1/alpha) / 2 the distance is
    |lambda^(1/alpha)| |Im(r / lambda^(1/alpha))| |1 - F_t(z)|^2.  The
    subtracted term is real after dividing by lambda^(1/alpha) (t >= 0), so
    this is algebraically identical to the geometric distance, not merely
    asymptotically: Im(1/zeta) = -Im(zeta)/|zeta|^2 collapses the rest.
    """
    _require_disk_trajectory(trajectory)
    lam_root = gen.lam ** complex(1.0 / gen.alpha)
    gap = 1.0 - trajectory.points
    tt = np.asarray(trajectory.times, dtype=float)
    r = 1.0 / gap - 0.5 * lam_root * tt.astype(complex) ** (1.0 / gen.alpha)
    d = abs(lam_root) * np.abs(np.imag(r / lam_root)) * np.abs(gap) ** 2
    return np.column_stack([trajectory.times, d])


# ---- curvature --------------------------------------------------------------


def curvature_value(fz, fpz):
    """Curvature of an orbit of z' = f(z) from the field value and derivative.

    The velocity is f and the acceleration f' f, so the plane-curve
    curvature Im(conj(z') z'') / |z'|^3 = Im(conj(f) f' f) / |f|^3
    = Im(f') / |f|, because f conj(f) = |f|^2 is real.  NaN when |f|
    underflows below 1e-280 and the quotient stops being trustworthy.
    """
    speed = abs(complex(fz))
    if not math.isfinite(speed) or speed < _UNDERFLOW_FLOOR:
        return math.nan
    return float(complex(fpz).imag) / speed


def curvature(gen, z, t):
    """Signed curvature of the orbit through z at the point F_t(z).

    Underflow of |f(F_t(z))| is reported as NaN; it occurs only at
    enormous times.
    """
    w = flow_at(gen, z, t)
    return curvature_value(gen.f(w), gen.f_prime(w))


def curvature_tail(gen, z, t_grid=None):
    """Curvature along one orbit, rows (t, kappa), for tail inspection.

    limit_curvature_class predicts the t -> infinity behaviour from the
    parameters alone; this gives the data to confirm it on samples.
    """
    if t_grid is None:
        t_grid = GeometricGrid.to_horizon(1e5, include_zero=False)
    traj = integrate_trajectory(gen, z, grid=t_grid)
    speed = np.abs(gen.f(traj.points))
    with np.errstate(divide="ignore", invalid="ignore"):
        kappa = np.imag(gen.f_prime(traj.points)) / speed
    kappa = np.where(speed < _UNDERFLOW_FLOOR, np.nan, kappa)
    return np.column_stack([traj.times, kappa])


def limit_curvature_class(gen, im_zero=None):
    """Limiting curvature class of all orbits, from the parameters.

    Region one gives curvature tending to zero on every orbit; region two a
    finite limit that differs from orbit to orbit; region three a finite
    limit only on the single special orbit (infinite elsewhere); region
    four one shared finite limit; region five is a dichotomy resolved by
    Im(mu lambda^(-beta/alpha)): zero limit when it vanishes, infinite
    otherwise.  im_zero overrides the floating-point zero test.
    """
    if gen.b == 0:
        raise ValidationError("limit curvature classification needs both power terms")
    region = classify_omega(gen.alpha, gen.beta).variant
    if region == OMEGA_1:
        return CURV_ZERO
    if region == OMEGA_2:
        return CURV_FINITE_PER_TRAJECTORY
    if region == OMEGA_3:
        return CURV_INFINITE_EXCEPT_SPECIAL
    if region == OMEGA_4:
        return CURV_FINITE_SHARED
    return CURV_ZERO if resolved_im_dichotomy(gen, im_zero) else CURV_INFINITE


# ---- contact order ----------------------------------------------------------


def contact_order_theory(gen, z=None, im_zero=None):
    """Predicted contact order, limit constant, and log flag for one orbit.

    Returns (order, constant, log_corrected).  order is None when the
    prediction is only a lower bound (the measured order then exceeds every
    listed threshold).  The constant needs a concrete initial point in the
    regimes where it involves the shifted Koenigs value h1(z); passing
    z=None leaves it None there.
    """
    alpha = gen.alpha
    beta = gen.beta
    lam = gen.lam
    lam_root_mag = abs(lam) ** (1.0 / alpha)

    def h1_value(zz):
        if zz is None:
            return None
        if gen.is_pure:
            # exact Abel map for a single power term: h = ((2/(1-z))^alpha
            # - 2^alpha)/lambda, and the shift constant is 2^alpha/lambda
            return (2.0 / (1.0 - complex(zz))) ** alpha / lam
        return evaluator_for(gen).h1(zz)

    if gen.is_pure or beta > alpha:
        h1v = h1_value(z)
        if h1v is None:
            return None, None, False
        if _im_is_zero(h1v.imag, abs(h1v)):
            if gen.is_pure:
                return None, None, False
            imv, ims = _im_dichotomy(gen)
            if im_zero is True or (im_zero is None and _im_is_zero(imv, ims)):
                return None, None, False
            const = abs(lam) ** (beta / alpha) / (2.0**beta * (beta - alpha)) * abs(imv)
            return beta, const, False
        return alpha, lam_root_mag * abs(h1v.imag) / (2.0 * alpha), False

    imv, ims = _im_dichotomy(gen)
    if im_zero is True or (im_zero is None and _im_is_zero(imv, ims)):
        return None, None, False
    if beta < alpha:
        return beta, 0.5 * lam_root_mag * abs(imv) / (alpha - beta), False
    # beta == alpha: the distance picks up a logarithmic factor
    const = abs(lam ** complex(1.0 / alpha) / (2.0 * gen.a)) * abs((gen.mu / (alpha * lam)).imag)
    return alpha, const, True


def contact_order_estimate(d_samples, gap_samples, theoretical_order=None, log_corrected=False):
    """Fit the contact order from paired distance and gap samples.

    Both inputs are sequences of (t, value) rows on the same time grid.
    The regression window is the last decade and a half of the gap range
    (the asymptotic regime must dominate, so everything with
    gap > 10^1.5 * min gap is dropped); the order is the least-squares
    slope of log d against log gap minus 1, r^2 < 0.999 flags the fit
    unreliable.  The limit constant extrapolates d / gap^(1 + order) using
    the theoretical order when given, the fitted one otherwise, with an
    extra 1/|log gap| when log_corrected.
    """
    d_arr = np.asarray(d_samples, dtype=float)
    g_arr = np.asarray(gap_samples, dtype=float)
    if d_arr.ndim != 2 or g_arr.ndim != 2 or d_arr.shape[1] != 2 or g_arr.shape[1] != 2:
        raise ValidationError("d_samples and gap_samples must be sequences of (t, value) rows")
    if d_arr.shape[0] != g_arr.shape[0] or not np.allclose(
        d_arr[:, 0], g_arr[:, 0], rtol=1e-9, atol=0.0
    ):
        raise ValidationError("distance and gap samples must share one time grid")

    t = d_arr[:, 0]
    d = d_arr[:, 1]
    gap = g_arr[:, 1]
    ok = np.isfinite(d) & np.isfinite(gap) & (gap > 0.0) & (t > 0.0)
    if not np.any(ok):
        raise ValidationError("no usable samples")
    t, d, gap = t[ok], d[ok], gap[ok]

    gmin = float(np.min(gap))
    window = gap <= gmin * 10.0**1.5
    tw, dw, gw = t[window], d[window], gap[window]

    # rounding-level distances mean the orbit rides the tangent line; any
    # finite order would fit, so report that outcome on its own
    if float(np.median(dw)) <= 1e-10 * float(np.median(gw)):
        ratio = dw / gw ** (1.0 + (theoretical_order if theoretical_order else 0.0))
        if log_corrected:
            ratio = ratio / np.abs(np.log(gw))
        est = estimate_limit(list(zip(tw, ratio))) if tw.size >= 6 else None
        return ContactOrderReport(
            estimated_order=math.inf,
            limit_constant=est,
            theoretical_order=theoretical_order,
            fit_r2=math.nan,
            above_all=True,
            log_corrected=log_corrected,
        )

    pos = dw > 0.0
    x = np.log(gw[pos])
    y = np.log(dw[pos])
    if x.size < 3:
        raise ValidationError("too few positive distances in the regression window")
    slope, bias = np.polyfit(x, y, 1)
    resid = y - (slope * x + bias)
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0.0 else 0.0

    raw_order = float(slope) - 1.0
    unreliable = r2 < 0.999 or x.size < 6
    if raw_order < -1e-6:
        unreliable = True
    order = max(raw_order, 0.0)

    kappa = theoretical_order if theoretical_order is not None else order
    ratio = dw / gw ** (1.0 + kappa)
    if log_corrected:
        ratio = ratio / np.abs(np.log(gw))
    est = estimate_limit(list(zip(tw, ratio))) if tw.size >= 6 else None

    return ContactOrderReport(
        estimated_order=order,
        limit_constant=est,
        theoretical_order=theoretical_order,
        fit_r2=r2,
        log_corrected=log_corrected,
        unreliable=unreliable,
    )


def contact_order_for(gen, z, t_grid=None, im_zero=None):
    """Integrate one orbit and estimate its contact order with the tangent.

    The horizon is chosen so the boundary gap reaches about 1e-4 (the gap
    shrinks like 2 (|lambda| t)^(-1/alpha)); distances are evaluated from
    the half-plane gap 2/(Phi_t + 1), which keeps relative precision where
    the disk coordinates would have rounded away.
    """
    if t_grid is None:
        t_max = min((2.0e4) ** gen.alpha / abs(gen.lam) * 2.0, 1e8)
        t_grid = GeometricGrid.to_horizon(max(t_max, 10.0), include_zero=False)
    times, _, gap = _series_at_positive_times(gen, [cayley(z)], t_grid, 1e6)
    gap = gap[:, 0]
    u = tangent_direction(gen)
    # F - 1 = -gap, so the signed offset Im((F-1) conj(u)) = -Im(gap conj(u))
    d = np.abs(np.imag(gap * np.conj(u)))
    order, _, log_corrected = contact_order_theory(gen, z, im_zero=im_zero)
    return contact_order_estimate(
        np.column_stack([times, d]),
        np.column_stack([times, np.abs(gap)]),
        theoretical_order=order,
        log_corrected=log_corrected,
    )


# ---- asymptotes -------------------------------------------------------------


def _pure_effective_region(alpha):
    # a single power term behaves like beta = +infinity: only alpha decides
    if alpha > 1.0:
        return OMEGA_1
    if alpha == 1.0:
        return OMEGA_2
    return OMEGA_3


def _sigma1_value(gen, w):
    if gen.is_pure:
        # sigma = ((w+1)^alpha - 2^alpha)/lambda exactly, shift adds
        # 2^alpha/lambda
        return (complex(w) + 1.0) ** gen.alpha / gen.lam
    return evaluator_for(gen).sigma1(w)


def asymptote_report(gen, w, t_grid=None, im_zero=None):
    """Classify and measure the straight-line asymptote of t -> Phi_t(w).

    The orbit has an asymptote exactly when
    L = lim Im(conj(lambda^(1/alpha)) (Phi_t(w) + 1)) exists finitely, and
    the asymptote passes through -1 exactly when L = 0.  The theoretical
    verdict comes from the exponent region and the
    Im(mu lambda^(-beta/alpha)) dichotomy; the numeric limit is estimated
    from an integrated orbit and the two are compared, with disagreement
    flagged rather than hidden.  Closed forms for L: zero in the shared
    through -1 cases, |lambda|^2 Im(sigma1(w)) per orbit when alpha = 1 <
    beta, and |lambda|^(2/alpha)/(alpha - 1) Im(mu lambda^(-1/alpha)) in
    the fourth region.  intercept = L - 1.
    """
    w = complex(w)
    if w.real <= 0.0:
        raise ValidationError(f"w must lie in the right half-plane, got {w}")
    alpha = gen.alpha
    lam = gen.lam
    if gen.is_pure:
        region = _pure_effective_region(alpha)
        im_zero_resolved = True
    else:
        region = classify_omega(alpha, gen.beta).variant
        im_zero_resolved = resolved_im_dichotomy(gen, im_zero)

    exists = "Yes"
    shared = True
    theory_L = 0.0
    if region == OMEGA_2:
        # alpha = 1: Phi_t + 1 = lambda t + lambda sigma1(w) + o(1), the
        # higher bracket terms carry binom(1, j) = 0, so
        # L = Im(conj(lambda) lambda sigma1(w)) = |lambda|^2 Im sigma1(w)
        shared = False
        theory_L = abs(lam) ** 2 * float(_sigma1_value(gen, w).imag)
    elif region == OMEGA_3:
        exists = "OnlySpecialTrajectory"
        shared = False
    elif region == OMEGA_4 and not im_zero_resolved:
        val, _ = _im_dichotomy(gen)
        theory_L = abs(lam) ** (2.0 / alpha) / (alpha - 1.0) * val
    elif region == OMEGA_5 and not im_zero_resolved:
        exists = "No"
        shared = False

    sigma1_im = None
    if region == OMEGA_3:
        sigma1_im = float(_sigma1_value(gen, w).imag)

    times, W, _ = _series_at_positive_times(gen, [w], t_grid, 1e6)
    lam_root = lam ** complex(1.0 / alpha)
    samples = np.imag(np.conj(lam_root) * (W[:, 0] + 1.0))
    est = estimate_limit(list(zip(times, samples)))

    if exists == "Yes":
        passes = _im_is_zero(theory_L, max(abs(theory_L), 1.0)) if region != OMEGA_2 else _im_is_zero(
            theory_L, abs(lam) ** 2 * max(abs(_sigma1_value(gen, w)), 1.0)
        )
        intercept = theory_L - 1.0
    elif exists == "OnlySpecialTrajectory":
        # the one orbit with Im sigma1 = 0 has its asymptote through -1
        passes = True
        intercept = None
    else:
        passes = False
        intercept = None

    # consistency between the classification and the measured tail
    value = float(np.real(est.value))
    if exists == "Yes" or (exists == "OnlySpecialTrajectory" and _im_is_zero(sigma1_im, 1.0)):
        tol = max(5.0 * est.error, 0.02 * max(1.0, abs(theory_L)))
        inconsistent = est.divergent or abs(value - theory_L) > tol
    else:
        inconsistent = (not est.divergent) and abs(value) < 1e2 and est.error < 0.1 * max(
            1.0, abs(value)
        )

    return AsymptoteReport(
        exists=exists,
        shared_across_initial_points=shared,
        passes_through_minus_one=bool(passes),
        intercept=intercept,
        numeric_limit=est,
        inconsistent=bool(inconsistent),
    )


# ---- mutual position --------------------------------------------------------

MUTUALLY_CONVERGENT = "MutuallyConvergent"
ASYMPTOTICALLY_PARALLEL = "AsymptoticallyParallel"
MUTUALLY_DIVERGENT = "MutuallyDivergent"


def _theoretical_mutual_variant(gen):
    alpha = gen.alpha
    beta = gen.beta
    if gen.is_pure:
        if alpha > 1.0:
            return MUTUALLY_CONVERGENT
        if alpha == 1.0:
            return ASYMPTOTICALLY_PARALLEL
        return MUTUALLY_DIVERGENT
    if alpha > 1.0 and beta >= 1.0:
        return MUTUALLY_CONVERGENT
    if beta > alpha == 1.0:
        return ASYMPTOTICALLY_PARALLEL
    if alpha < min(1.0, beta):
        return MUTUALLY_DIVERGENT
    return None


def mutual_position(gen, w1, w2, t_grid=None):
    """Relative position of the orbits from w1 and w2: s = lim Phi_t(w1) - Phi_t(w2).

    Both orbits ride one shared adaptive clock so their local errors cancel
    in the difference.  The numeric verdict (converge / parallel / diverge)
    is read off the extrapolated limit and cross-checked against the
    classification by exponents where that speaks: alpha > 1, beta >= 1
    converge; beta > alpha = 1 parallel; alpha < min(1, beta) diverge.
    """
    w1 = complex(w1)
    w2 = complex(w2)
    if w1.real <= 0.0 or w2.real <= 0.0:
        raise ValidationError("both points must lie in the right half-plane")
    if w1 == w2:
        raise ValidationError("mutual position needs two distinct points")
    times, W, _ = _series_at_positive_times(gen, [w1, w2], t_grid, 1e6)
    diff = W[:, 0] - W[:, 1]
    # the initial-point dependence of Phi_t sits in the sigma(w)/t bracket
    # term, so the difference settles like t^(1/alpha - 1) when alpha > 1;
    # the leading power and the mu correction cancel between the two orbits
    p = 1.0 - 1.0 / gen.alpha if gen.alpha > 1.0 else None
    est = estimate_limit(list(zip(times, diff)), p=p)

    theoretical = _theoretical_mutual_variant(gen)
    # genuinely parallel limits are of the order of the Koenigs difference
    # itself, so anything below 1e-6 of the initial separation counts as a
    # vanished limit rather than a parallel offset
    scale0 = abs(w1 - w2)
    if est.divergent:
        variant = MUTUALLY_DIVERGENT
        s_value = None
        ratio = None
    elif abs(est.value) <= max(5.0 * est.error, 1e-6 * scale0):
        variant = MUTUALLY_CONVERGENT
        s_value = None
        ratio = None
    else:
        variant = ASYMPTOTICALLY_PARALLEL
        s_value = complex(est.value)
        if gen.is_pure:
            ev_sigma = lambda w: ((w + 1.0) ** gen.alpha - 2.0**gen.alpha) / gen.lam
        else:
            ev_sigma = evaluator_for(gen).sigma
        ratio = s_value / (ev_sigma(w1) - ev_sigma(w2))
    return MutualPosition(
        variant=variant,
        evidence=est,
        s_value=s_value,
        parallel_ratio=ratio,
        theoretical_variant=theoretical,
    )


def parallel_ratio_spread(gen, pairs, t_grid=None):
    """Ratios s(w1,w2)/(sigma(w1)-sigma(w2)) over several pairs, with spread.

    In the asymptotically parallel regime the ratio is one constant for the
    whole semigroup; the relative spread across at least three pairs is the
    constancy check.  Returns (ratios, relative_spread).
    """
    pairs = list(pairs)
    if len(pairs) < 3:
        raise ValidationError("constancy needs at least three pairs")
    ratios = []
    for w1, w2 in pairs:
        pos = mutual_position(gen, w1, w2, t_grid=t_grid)
        if pos.parallel_ratio is None:
            raise ValidationError(
                f"pair ({w1}, {w2}) did not resolve to the parallel regime"
            )
        ratios.append(pos.parallel_ratio)
    center = np.mean(ratios)
    spread = float(np.max(np.abs(np.array(ratios) - center))) / max(abs(center), 1e-300)
    return ratios, spread


# ---- special trajectory -----------------------------------------------------


def special_trajectory_locator(gen, search_box, samples=33, tol=1e-13):
    """Find the initial point of the maximal-contact orbit inside a box.

    Scans the vertical slice through the box centre for a sign change of
    Im h1 and bisects it down to tol in the imaginary coordinate.  Needs
    beta > alpha, where the shifted Koenigs map exists and the orbit with
    Im h1 = 0 is the unique one whose contact order beats alpha.
    """
    if not gen.is_pure and not (gen.beta > gen.alpha):
        raise ValidationError("the special orbit needs beta > alpha")
    re_min, re_max, im_min, im_max = (float(v) for v in search_box)
    if not (re_min < re_max and im_min < im_max):
        raise ValidationError("search box must have positive extent")
    x0 = 0.5 * (re_min + re_max)
    corners = [complex(x0, im_min), complex(x0, im_max)]
    if any(abs(c) >= 1.0 for c in corners):
        raise ValidationError("search slice leaves the unit disk")

    if gen.is_pure:
        g = lambda y: ((2.0 / (1.0 - complex(x0, y))) ** gen.alpha / gen.lam).imag
    else:
        ev = evaluator_for(gen)
        g = lambda y: ev.h1(complex(x0, y)).imag

    ys = np.linspace(im_min, im_max, int(samples))
    vals = [g(y) for y in ys]
    lo = hi = None
    for k in range(len(ys) - 1):
        if vals[k] == 0.0:
            return complex(x0, ys[k])
        if vals[k] * vals[k + 1] < 0.0:
            lo, hi = ys[k], ys[k + 1]
            flo = vals[k]
            break
    if lo is None:
        raise ValidationError(
            "Im h1 does not change sign along the slice; widen the box or move it"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = g(mid)
        if fm == 0.0 or hi - lo < tol:
            return complex(x0, mid)
        if flo * fm < 0.0:
            hi = mid
        else:
            lo, flo = mid, fm
    return complex(x0, 0.5 * (lo + hi))
