"""Pair experiments: when do two flows with the same leading term coincide?

Two semigroups whose generators share the leading coefficient and exponent
approach the boundary fixed point in lockstep; the question is how fast the
orbits of one close in on the orbits of the other.  The parameter-related
contact order of the pair measures that: the order exceeds kappa when
|F_t(z1) - F*_t(z2)| / |1 - F_t(z1)|^(kappa + 1) collapses to zero.  The
weak rigidity statement says a perturbation of the second coefficient by c
is visible at order beta, so an order beyond beta forces c = 0; the strong
statement replaces orders by one scaled real-part limit and concludes the
flows coincide outright.  This module estimates the orders, runs both
experiments, and reports the Koenigs-difference diagnostic that drives the
strong proof.

Everything rides on one shared adaptive clock per pair: both flows see
identical step sequences, so the local errors of the two orbits correlate
and mostly cancel in the difference, which can sit six orders of magnitude
below the orbits themselves.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .asymptotics import LimitEstimate, estimate_limit, _strong_remainder
from .errors import ValidationError
from .flow import GeometricGrid, paired_conjugate_series
from .generators import make_generator, cayley
from .koenigs import evaluator_for

__all__ = [
    "PairOrderReport",
    "StrongRigidityReport",
    "WeakRigidityResult",
    "pair_order_estimate",
    "order_exceeds",
    "weak_rigidity_experiment",
    "strong_rigidity_check",
    "same_trajectory_order",
    "VERDICT_CONSISTENT",
    "VERDICT_INCONSISTENT",
]

VERDICT_CONSISTENT = "RIGID-CONSISTENT"
VERDICT_INCONSISTENT = "RIGID-INCONSISTENT"

# rounding-level pair gaps: below this multiple of the boundary gap the
# difference of the two orbits is integrator noise, not signal
_GAP_FLOOR_RTOL = 1e-12


@dataclasses.dataclass(frozen=True)
class PairOrderReport:
    """Fitted parameter-related contact order of a pair of flows.

    estimated_order is the log-log regression slope of the pair gap against
    the boundary gap, minus 1.  predicted_order is a float when the theory
    pins the order exactly, a (low, inf) tuple when it only gives "exceeds
    low", and None when it is silent.  gap_curve rows are
    (t, |F_t(z1) - F*_t(z2)|, |1 - F_t(z1)|).  above_all means the pair gap
    sat at rounding level, so every finite order passes.  scaled_check is
    the regime-specific scaled-difference limit when the caller asked for
    one (same-flow experiments); it should vanish.
    """

    estimated_order: float
    predicted_order: object
    gap_curve: np.ndarray
    fit_r2: float
    above_all: bool = False
    unreliable: bool = False
    scaled_check: LimitEstimate | None = None


@dataclasses.dataclass(frozen=True)
class WeakRigidityResult:
    """Outcome of one perturbation experiment f* = f + c (1-z)^(1+alpha+beta)."""

    c: complex
    verdict: str
    exceeds_beta: bool
    report: PairOrderReport


@dataclasses.dataclass(frozen=True)
class StrongRigidityReport:
    """Scaled real-part limits t^(1+1/alpha) Re(e^(i theta)(F_t - F*_t)).

    per_point maps each probed z to its LimitEstimate.  all_vanish is the
    experiment's answer: every limit settled at zero, which is the
    condition that forces the two flows to coincide under the theorem's
    hypotheses.  h_difference_spread is the proof diagnostic: the maximum
    deviation of h(z) - h*(z) from its mean over the probe grid (the proof
    pivots on that difference being constant, and it is zero at z = 0, so
    constant means identically zero).  conjecture_probe marks runs outside
    the proved hypotheses, recorded as exploratory data only.
    """

    theta: float
    per_point: tuple
    all_vanish: bool
    h_difference_mean: complex
    h_difference_spread: float
    conjecture_probe: bool = False


def _require_same_leading(gen_s, gen_star):
    if gen_s.a != gen_star.a or gen_s.alpha != gen_star.alpha:
        raise ValidationError(
            "pair experiments need identical leading terms: "
            f"(a, alpha) = ({gen_s.a}, {gen_s.alpha}) vs ({gen_star.a}, {gen_star.alpha})"
        )


def _pair_series(gen_s, gen_star, z1, z2, t_grid, horizon):
    """Both flows from both points on one clock; returns t > 0 samples.

    The disk difference is reconstructed without cancellation:
    F - F* = 2 (Wa - Wb) / ((Wa + 1)(Wb + 1)), and the boundary gap of the
    first flow is |2 / (Wa + 1)|.
    """
    if t_grid is None:
        t_grid = GeometricGrid.to_horizon(horizon, include_zero=False)
    times = np.asarray(t_grid.times() if hasattr(t_grid, "times") else t_grid, dtype=float)
    times = times[times > 0.0]
    if times.size == 0:
        raise ValidationError("the time grid has no positive entries")
    w1 = cayley(complex(z1))
    w2 = cayley(complex(z2))
    Wa, Wb, _ = paired_conjugate_series(gen_s, gen_star, [w1, w2], times)
    Wa = Wa[-times.size :]
    Wb = Wb[-times.size :]
    wa = Wa[:, 0]
    wb = Wb[:, 1]
    diff = 2.0 * (wa - wb) / ((wa + 1.0) * (wb + 1.0))
    gap = np.abs(2.0 / (wa + 1.0))
    return times, diff, gap


def _same_two_term(gen_s, gen_star):
    return (
        gen_s.b == gen_star.b
        and gen_s.beta == gen_star.beta
        and gen_s.remainder == gen_star.remainder
    )


def _predicted_pair_order(gen_s, gen_star, z1, z2):
    """What the theory says about the pair order, if anything.

    Same flow, distinct points: exceeds beta when beta < alpha, exceeds
    every value below alpha otherwise.  Same (a, alpha, beta) with a
    different second coefficient: the second-term mismatch surfaces at
    order exactly beta when beta <= alpha, while for beta > alpha the
    Koenigs difference dominates at order alpha.
    """
    if _same_two_term(gen_s, gen_star):
        if complex(z1) == complex(z2):
            return math.inf
        if gen_s.b == 0:
            return (gen_s.alpha, math.inf)
        if gen_s.beta < gen_s.alpha:
            return (gen_s.beta, math.inf)
        return (gen_s.alpha, math.inf)
    if gen_s.beta == gen_star.beta and gen_s.remainder == gen_star.remainder:
        if gen_s.beta <= gen_s.alpha:
            return float(gen_s.beta)
        return float(gen_s.alpha)
    return None


def pair_order_estimate(gen_s, gen_star, z1, z2, t_grid=None):
    """Estimate the parameter-related contact order of two flows.

    Integrates F_t(z1) under the first flow and F*_t(z2) under the second
    on a shared clock, then regresses log of the pair gap against log of
    the boundary gap over the last decade and a half; the order is the
    slope minus 1.  Pair gaps at rounding level are reported above_all.
    """
    _require_same_leading(gen_s, gen_star)
    # two extra decades past the contact-order horizon: pair slopes converge
    # like a power of 1/t and the shared clock keeps the cost trivial
    horizon = min((2.0e4) ** gen_s.alpha / abs(gen_s.lam) * 200.0, 1e8)
    times, diff, gap = _pair_series(gen_s, gen_star, z1, z2, t_grid, max(horizon, 10.0))
    d = np.abs(diff)
    curve = np.column_stack([times, d, gap])
    predicted = _predicted_pair_order(gen_s, gen_star, z1, z2)

    gmin = float(np.min(gap))
    window = gap <= gmin * 10.0**1.5
    dw, gw, _ = d[window], gap[window], times[window]

    if float(np.median(dw)) <= _GAP_FLOOR_RTOL * float(np.median(gw)):
        return PairOrderReport(
            estimated_order=math.inf,
            predicted_order=predicted,
            gap_curve=curve,
            fit_r2=math.nan,
            above_all=True,
        )

    pos = dw > 0.0
    x = np.log(gw[pos])
    y = np.log(dw[pos])
    if x.size < 3:
        raise ValidationError("too few nonzero pair gaps in the regression window")
    slope, bias = np.polyfit(x, y, 1)
    resid = y - (slope * x + bias)
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0.0 else 0.0
    raw = float(slope) - 1.0
    unreliable = r2 < 0.999 or x.size < 6 or raw < -1e-6
    return PairOrderReport(
        estimated_order=max(raw, 0.0),
        predicted_order=predicted,
        gap_curve=curve,
        fit_r2=r2,
        unreliable=unreliable,
    )


def order_exceeds(gap_curve, kappa):
    """Decide "pair order greater than kappa" from a gap curve.

    Operational rule: the scaled gap d / gap^(1 + kappa) must fall below
    1e-3 of its value at the start of the curve.  Exact zeros (identical
    flows) pass every kappa.
    """
    curve = np.asarray(gap_curve, dtype=float)
    t, d, gap = curve[:, 0], curve[:, 1], curve[:, 2]
    ok = (t > 0.0) & np.isfinite(d) & (gap > 0.0)
    d, gap = d[ok], gap[ok]
    if d.size < 6:
        raise ValidationError("need at least 6 usable samples")
    scaled = d / gap ** (1.0 + float(kappa))
    head = float(np.median(scaled[:5]))
    tail = float(np.median(scaled[-5:]))
    if head == 0.0:
        return tail == 0.0
    return tail <= 1e-3 * head


def weak_rigidity_experiment(gen, c, z, t_grid=None):
    """Perturb the second coefficient by c and test whether the order notices.

    Builds f* = f + c (1 - z)^(1 + alpha + beta) (which must itself be
    admissible), estimates the pair order from z against itself, and checks
    the biconditional of the rigidity statement for beta <= alpha: the
    order exceeds beta exactly when c = 0.  The verdict is RIGID-CONSISTENT
    when the data agrees with that, whatever c was.
    """
    if not (gen.beta <= gen.alpha):
        raise ValidationError("the weak rigidity statement needs beta <= alpha")
    c = complex(c)
    gen_star = make_generator(
        gen.a, gen.alpha, gen.b + c, gen.beta, remainder=gen.remainder
    )
    report = pair_order_estimate(gen, gen_star, z, z, t_grid=t_grid)
    exceeds = order_exceeds(report.gap_curve, gen.beta)
    consistent = (c == 0) == exceeds
    return WeakRigidityResult(
        c=c,
        verdict=VERDICT_CONSISTENT if consistent else VERDICT_INCONSISTENT,
        exceeds_beta=exceeds,
        report=report,
    )


def _strong_hypotheses_hold(gen_s, gen_star):
    a = gen_s.alpha
    b = gen_s.beta
    if gen_s.beta != gen_star.beta:
        return False
    if b > a:
        # remainders must vanish faster than the second term
        return _remainder_beats_second_term(gen_s) and _remainder_beats_second_term(gen_star)
    return (
        a / 2.0 < b <= a
        and _strong_remainder(gen_s)
        and _strong_remainder(gen_star)
    )


def _remainder_beats_second_term(gen):
    r = gen.remainder
    if r is None or r.kind == "zero":
        return True
    if r.kind == "extra_power":
        return r.gamma > gen.alpha + gen.beta
    # the rational example deviates from its two-term expansion only at
    # relative order (1-z)^4, which beats (1-z)^(alpha+beta) = (1-z)^3
    return True


def strong_rigidity_check(gen_s, gen_star, theta, z_grid, t_grid=None, allow_conjecture_probe=False):
    """Run the strong rigidity experiment over a grid of initial points.

    For each z the scaled difference t^(1 + 1/alpha) Re(e^(i theta)
    (F_t(z) - F*_t(z))) is extrapolated; if every limit vanishes, the
    theorem concludes the flows coincide, provided the hypotheses hold
    (alpha/2 < beta <= alpha with strong remainders, or beta > alpha with
    remainders beating the second term).  Outside those hypotheses the run
    is refused unless allow_conjecture_probe is set, in which case it is
    recorded as exploratory evidence with no verdict force.  The report
    carries the proof diagnostic: the spread of h(z) - h*(z) over the
    grid, which the argument needs to be constant (hence zero).
    """
    _require_same_leading(gen_s, gen_star)
    theta = float(theta)
    z_grid = [complex(z) for z in z_grid]
    if not z_grid:
        raise ValidationError("z_grid must not be empty")
    probe = False
    if not _strong_hypotheses_hold(gen_s, gen_star):
        if not allow_conjecture_probe:
            raise ValidationError(
                "outside the strong rigidity hypotheses; pass "
                "allow_conjecture_probe=True to record exploratory data"
            )
        probe = True

    phase = np.exp(1j * theta)
    power = 1.0 + 1.0 / gen_s.alpha
    per_point = []
    all_vanish = True
    for z in z_grid:
        times, diff, _ = _pair_series(gen_s, gen_star, z, z, t_grid, 1e6)
        scaled = times**power * np.real(phase * diff)
        est = estimate_limit(list(zip(times, scaled)))
        head = float(np.max(np.abs(scaled[: max(5, scaled.size // 4)])))
        vanished = (not est.divergent) and abs(est.value) <= max(
            5.0 * est.error, 1e-3 * head, 1e-12
        )
        all_vanish = all_vanish and vanished
        per_point.append((z, est))

    # Koenigs difference diagnostic: constant h - h* (zero at the origin)
    # is what the proof extracts from the vanishing limits
    if _same_two_term(gen_s, gen_star):
        diffs = np.zeros(len(z_grid), dtype=complex)
    else:
        ev_s = evaluator_for(gen_s)
        ev_t = evaluator_for(gen_star)
        diffs = np.array([ev_s.h(z) - ev_t.h(z) for z in z_grid])
    mean = complex(np.mean(diffs))
    spread = float(np.max(np.abs(diffs - mean))) if len(z_grid) > 1 else 0.0

    return StrongRigidityReport(
        theta=theta,
        per_point=tuple(per_point),
        all_vanish=all_vanish,
        h_difference_mean=mean,
        h_difference_spread=spread,
        conjecture_probe=probe,
    )


def same_trajectory_order(gen, z1, z2, t_grid=None):
    """Pair order of two orbits of one flow, with the regime's scaled check.

    The order estimate reuses the pair machinery with both slots holding
    the same generator.  The scaled check extrapolates the regime-specific
    normalized difference that the theory says vanishes: for beta < alpha
    the gap scaled by gap^(1+beta); for beta = alpha the same with an extra
    log(t+1); for beta > alpha (and for single-term flows) the half-plane
    difference minus its sigma-driven prediction, scaled by t^((beta-1)/alpha).
    """
    z1 = complex(z1)
    z2 = complex(z2)
    if z1 == z2:
        raise ValidationError("same-flow order needs two distinct points")
    base = pair_order_estimate(gen, gen, z1, z2, t_grid=t_grid)

    times = base.gap_curve[:, 0]
    d = base.gap_curve[:, 1]
    gap = base.gap_curve[:, 2]
    alpha = gen.alpha
    beta = gen.beta
    if not gen.is_pure and beta < alpha:
        scaled = d / gap ** (1.0 + beta)
        check = estimate_limit(list(zip(times, scaled)))
    elif not gen.is_pure and beta == alpha:
        scaled = d / (np.log(times + 1.0) * gap ** (1.0 + alpha))
        check = estimate_limit(list(zip(times, scaled)))
    else:
        w1 = cayley(z1)
        w2 = cayley(z2)
        if t_grid is None:
            horizon = min((2.0e4) ** alpha / abs(gen.lam) * 2.0, 1e8)
            t_grid2 = GeometricGrid.to_horizon(max(horizon, 10.0), include_zero=False)
        else:
            t_grid2 = t_grid
        tt = np.asarray(
            t_grid2.times() if hasattr(t_grid2, "times") else t_grid2, dtype=float
        )
        tt = tt[tt > 0.0]
        from .flow import conjugate_series

        W, _, _ = conjugate_series(gen, [w1, w2], tt)
        W = W[-tt.size :]
        if gen.is_pure:
            sig = lambda w: ((w + 1.0) ** alpha - 2.0**alpha) / gen.lam
            b_eff = 1.0
        else:
            ev = evaluator_for(gen)
            sig = ev.sigma
            b_eff = beta
        lead = (
            gen.lam ** complex(1.0 / alpha)
            / alpha
            * tt.astype(complex) ** (b_eff / alpha - 1.0)
            * (sig(w1) - sig(w2))
        )
        scaled = tt ** ((b_eff - 1.0) / alpha) * (W[:, 0] - W[:, 1]) - lead
        check = estimate_limit(list(zip(tt, np.abs(scaled))))

    return dataclasses.replace(base, scaled_check=check)
