"""Large-time expansions of the flow and honest limit estimation.

Every generator falls into one of four regimes by comparing the secondary
exponent beta against the leading alpha; the regime decides which expansion
of Phi_t(w) + 1 applies and how its remainder must be rescaled to vanish:

    PurePower    b = 0:      Phi_t = (lam t)^(1/alpha) + Gamma,
                             t^(-1/alpha) Gamma -> 0
    BetaLess     beta<alpha: bracket 1 + mu/(alpha-beta) (lam t)^(-beta/alpha),
                             t^(beta/alpha) Gamma -> 0
    BetaEqual    beta=alpha: bracket 1 + (mu/alpha) log(t+1)/(lam t),
                             t Gamma / log(t+1) -> 0
    BetaGreater  beta>alpha: bracket adds binomial corrections in
                             sigma_1(w)/t up to depth k = floor(beta/alpha),
                             t^(beta/alpha) Gamma -> 0

where Gamma is the bracket residual, lam = alpha 2^alpha a and
mu = 2^beta b / a.  The disk statements are the same displays read through
1/(1 - F_t(z)) = (Phi_t(C(z)) + 1)/2, so every disk prediction here is the
half-plane one over two, by construction rather than by a parallel code
path.

Limits claimed by the theory are never reported as bare numbers: every
estimator returns a LimitEstimate carrying the extrapolation model used and
a spread-based error, and flags tails that refuse to converge.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .flow import GeometricGrid, conjugate_series, _resolve_times
from .generators import REMAINDER_EXTRA_POWER, REMAINDER_ZERO, cayley
from .koenigs import evaluator_for

REGIME_PURE = "PurePower"
REGIME_LESS = "BetaLess"
REGIME_EQUAL = "BetaEqual"
REGIME_GREATER = "BetaGreater"

# exact-equality semantics with a snap for beta/alpha hitting an integer in
# floating point; the regime is the caller's modeling choice, not a response
# to measurement noise
_RATIO_SNAP = 1e-9


@dataclass(frozen=True)
class Regime:
    """Which expansion applies, plus the binomial depth for BetaGreater."""

    variant: str
    k: int = 0


def classify_regime(gen):
    """Regime from (alpha, beta, b); b = 0 wins regardless of beta."""
    if gen.b == 0:
        return Regime(REGIME_PURE)
    if gen.beta == gen.alpha:
        return Regime(REGIME_EQUAL)
    if gen.beta < gen.alpha:
        return Regime(REGIME_LESS)
    k = int(math.floor(gen.beta / gen.alpha + _RATIO_SNAP))
    return Regime(REGIME_GREATER, k=k)


@dataclass(frozen=True)
class LimitEstimate:
    """A limit value with its honest uncertainty.

    error is a spread, not a bound: the maximum disagreement between the
    fitted model and the data over the last third of the samples, combined
    with the shift seen when refitting on half the tail.  divergent means
    the tail never settled and value is just the final sample.
    """

    value: complex
    error: float
    model: str
    samples_used: int
    divergent: bool = False


def _binom_frac(x, j):
    """Generalized binomial coefficient (x choose j) for integer j >= 0."""
    out = 1.0
    for i in range(j):
        out *= (x - i) / (i + 1)
    return out


def _split_samples(samples):
    pairs = [(float(t), complex(v)) for t, v in samples]
    if len(pairs) < 6:
        raise ValidationError("estimate_limit needs at least 6 samples")
    ts = np.array([p[0] for p in pairs])
    vs = np.array([p[1] for p in pairs])
    if np.any(ts <= 0) or np.any(np.diff(ts) <= 0):
        raise ValidationError("sample times must be positive and increasing")
    return ts, vs


def _fit_tail(ts, vs, p):
    """Least squares v ~ L + c t^(-p); returns (L, max residual)."""
    basis = np.column_stack([np.ones_like(ts), ts ** (-p)])
    coef, *_ = np.linalg.lstsq(basis, vs, rcond=None)
    resid = np.abs(vs - basis @ coef)
    return complex(coef[0]), float(np.max(resid))


def _aitken(vs):
    """One Aitken sweep over the sample tail; returns the accelerated list."""
    out = []
    for k in range(len(vs) - 2):
        d1 = vs[k + 1] - vs[k]
        d2 = vs[k + 2] - vs[k + 1]
        den = d2 - d1
        if abs(den) > 1e-300:
            out.append(vs[k + 2] - d2 * d2 / den)
    return out


def estimate_limit(samples, p=None):
    """Extrapolate a (t, value) tail to its t -> infinity limit.

    samples: at least 6 pairs on an increasing (ideally geometric) time
    grid.  p fixes the decay exponent of the model value ~ L + c t^(-p)
    when the theory prescribes one; otherwise the exponent is read off the
    successive differences first.  Falls back to Aitken acceleration or the
    last raw value, whichever the data supports, and flags tails whose
    differences grow instead of shrink.
    """
    ts, vs = _split_samples(samples)
    n = ts.size
    tail = max(6, n // 2)
    tt, vv = ts[-tail:], vs[-tail:]
    third = max(2, n // 3)
    scale = float(np.max(np.abs(vs[-third:]))) or 1.0

    diffs = np.abs(np.diff(vv))
    lead = np.median(diffs[: max(2, diffs.size // 3)])
    trail = np.median(diffs[-max(2, diffs.size // 3):])

    # a tail whose successive moves keep growing is not converging
    if trail > 2.0 * lead and trail > 1e-12 * scale:
        dev = float(np.max(np.abs(vs[-third:] - vs[-1])))
        return LimitEstimate(
            value=complex(vs[-1]),
            error=dev,
            model="LastValue",
            samples_used=n,
            divergent=True,
        )

    # differences at rounding level: the sequence already converged
    if float(np.max(diffs)) <= 1e-13 * scale:
        dev = float(np.max(np.abs(vs[-third:] - vs[-1])))
        return LimitEstimate(complex(vs[-1]), dev, "LastValue", n)

    candidates = []

    p_fit = p
    if p_fit is None:
        # decay exponent from successive differences: on a geometric grid
        # |v_{k+1}-v_k| ~ t^(-p), so the log-log slope of the moves gives p
        mids = np.sqrt(tt[1:] * tt[:-1])
        good = diffs > 1e-14 * scale
        if np.count_nonzero(good) >= 3:
            slope = np.polyfit(np.log(mids[good]), np.log(diffs[good]), 1)[0]
            if slope < -0.02:
                p_fit = -slope
    if p_fit is not None and p_fit > 0:
        L, resid = _fit_tail(tt, vv, p_fit)
        L_half, _ = _fit_tail(tt[-max(4, tail // 2):], vv[-max(4, tail // 2):], p_fit)
        err = max(resid, abs(L - L_half))
        tag = "TailFit(p=%.4g)" % p_fit
        candidates.append((err, L, tag))

    acc = _aitken(list(vv))
    if len(acc) >= 2:
        err = abs(acc[-1] - acc[-2])
        candidates.append((err, acc[-1], "Aitken"))

    dev_last = float(np.max(np.abs(vs[-third:] - vs[-1])))
    candidates.append((dev_last, complex(vs[-1]), "LastValue"))

    err, value, tag = min(candidates, key=lambda c: c[0])
    divergent = err > scale and abs(value) > 0
    return LimitEstimate(complex(value), float(err), tag, n, divergent)


def _bracket_terms(gen, regime, t, sigma1_w=None):
    """Sum of the expansion bracket beyond the leading 1 (vectorized in t)."""
    t = np.asarray(t, dtype=float)
    lam, mu, al, be = gen.lam, gen.mu, gen.alpha, gen.beta
    if regime.variant == REGIME_PURE:
        return np.zeros_like(t, dtype=complex)
    if regime.variant == REGIME_LESS:
        return (mu / (al - be)) * (lam * t) ** (-be / al)
    if regime.variant == REGIME_EQUAL:
        return (mu / al) * np.log(t + 1.0) / (lam * t)
    total = (mu / (al - be)) * (lam * t) ** (-be / al)
    if sigma1_w is None:
        raise ValidationError("BetaGreater bracket needs sigma_1(w)")
    for j in range(1, regime.k + 1):
        total = total + _binom_frac(1.0 / al, j) * (sigma1_w / t) ** j
    return total


def predict_halfplane(gen, w, t):
    """Theoretical Phi_t(w) + 1 with the remainder dropped.

    Returns (lam t)^(1/alpha) times the regime bracket.  Only the
    BetaGreater bracket actually depends on w (through sigma_1); the other
    regimes predict one leading profile for every starting point.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise ValidationError("prediction needs t > 0")
    regime = classify_regime(gen)
    sig1 = None
    if regime.variant == REGIME_GREATER:
        sig1 = evaluator_for(gen).sigma1(w)
    lead = (gen.lam * t_arr) ** (1.0 / gen.alpha)
    out = lead * (1.0 + _bracket_terms(gen, regime, t_arr, sig1))
    return complex(out) if np.isscalar(t) else out


def predict_disk(gen, z, t):
    """Theoretical 1/(1 - F_t(z)): the half-plane prediction over two."""
    return predict_halfplane(gen, cayley(z), t) / 2.0


def remainder_decay(gen, point, t_grid, frame="halfplane"):
    """Scaled expansion remainders along an integrated flow.

    Returns (times, scaled): for each positive grid time the bracket
    residual Gamma is extracted from the integrated trajectory and scaled
    by the factor the theory says must crush it:

        PurePower    t^(-1/alpha) (Phi_t - (lam t)^(1/alpha))
        BetaLess     t^(beta/alpha)  Gamma
        BetaEqual    t Gamma / log(t+1)
        BetaGreater  t^(beta/alpha)  Gamma

    The disk frame maps the point through Cayley and measures the same
    bracket, since 1/(1-F_t) = (Phi_t + 1)/2 exactly.
    """
    times = _resolve_times(t_grid)
    pos = times[times > 0]
    if pos.size == 0:
        raise ValidationError("t_grid has no positive times")
    w0 = cayley(point) if frame == "disk" else complex(point)
    W, _, _ = conjugate_series(gen, [w0], times)
    phi1 = W[times > 0, 0] + 1.0

    regime = classify_regime(gen)
    lam, al, be = gen.lam, gen.alpha, gen.beta
    lead = (lam * pos) ** (1.0 / al)
    if regime.variant == REGIME_PURE:
        gamma = (phi1 - 1.0) - lead
        scaled = pos ** (-1.0 / al) * gamma
        return pos, scaled
    sig1 = None
    if regime.variant == REGIME_GREATER:
        sig1 = evaluator_for(gen).sigma1(w0)
    gamma = phi1 / lead - 1.0 - _bracket_terms(gen, regime, pos, sig1)
    if regime.variant == REGIME_EQUAL:
        scaled = pos * gamma / np.log(pos + 1.0)
    else:
        scaled = pos ** (be / al) * gamma
    return pos, scaled


def _strong_remainder(gen):
    rem = gen.remainder
    if rem.kind == REMAINDER_ZERO:
        return True
    if rem.kind == REMAINDER_EXTRA_POWER:
        return rem.gamma > 2.0 * gen.alpha
    # the rational closed-form field deviates from its two leading powers
    # only at relative order (1-z)^4, far beyond 2 alpha = 2
    return True


def _require_refined(gen):
    if gen.b == 0:
        return
    if not _strong_remainder(gen):
        raise ValidationError(
            "refined expansion needs the remainder to vanish faster than "
            "(1-z)^(1+2*alpha)"
        )
    if not (gen.alpha / 2.0 < gen.beta <= gen.alpha):
        raise ValidationError(
            "refined expansion holds for alpha/2 < beta <= alpha only"
        )


def _refined_correction(gen, t):
    """The t-dependent middle term of the refined expansion."""
    t = np.asarray(t, dtype=float)
    lam, mu, al, be = gen.lam, gen.mu, gen.alpha, gen.beta
    if gen.b == 0:
        return np.zeros_like(t, dtype=complex)
    if be == al:
        return mu * np.log(t + 1.0).astype(complex)
    return (mu * al / (al - be)) * (lam * (t + 1.0)) ** (1.0 - be / al)


_C_CACHE = {}


def constant_C_estimate(gen, frame="halfplane", t_grid=None):
    """The additive constant of the refined expansion, by tail limit.

    Integrates the flow from w = 1 (equivalently z = 0, the Cayley image)
    and extrapolates (Phi_t(1)+1)^alpha - lam t - correction(t); under the
    strong-remainder hypothesis this settles to the constant C appearing in
    refined_expansion.  A divergent tail means the hypothesis fails.
    """
    _require_refined(gen)
    if t_grid is None:
        t_grid = GeometricGrid.to_horizon(1e6)
    times = _resolve_times(t_grid)
    pos = times[times > 0]
    W, _, _ = conjugate_series(gen, [1.0 + 0.0j], times)
    phi1 = W[times > 0, 0] + 1.0
    vals = phi1 ** gen.alpha - gen.lam * pos - _refined_correction(gen, pos)
    est = estimate_limit(list(zip(pos, vals)))
    if frame not in ("halfplane", "disk"):
        raise ValidationError(f"unknown frame {frame!r}")
    # the disk constant is the same number: (2/(1-F_t(0)))^alpha is exactly
    # (Phi_t(1)+1)^alpha and h(0) = sigma(1) = 0
    return est


def refined_expansion(gen, frame, point, t):
    """Sharper expansion available under a fast-vanishing remainder.

    Half-plane: (Phi_t(w)+1)^alpha ~ lam t + correction(t) + lam sigma(w) + C.
    Disk:       (2/(1-F_t(z)))^alpha, same display with h(z) for sigma(w).
    The constant C comes from constant_C_estimate (cached per generator).
    """
    _require_refined(gen)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise ValidationError("refined expansion needs t > 0")
    koe = evaluator_for(gen)
    if frame == "halfplane":
        lin = koe.sigma(point)
    elif frame == "disk":
        lin = koe.h(point)
    else:
        raise ValidationError(f"unknown frame {frame!r}")
    key = gen
    if key not in _C_CACHE:
        _C_CACHE[key] = constant_C_estimate(gen)
    C = _C_CACHE[key].value
    out = gen.lam * t_arr + _refined_correction(gen, t_arr) + gen.lam * lin + C
    return complex(out) if np.isscalar(t) else out


def appendix_limit(gen, w, t_grid=None):
    """Rate at which the Koenigs difference limit is approached.

    Estimates lim (t+1)^(beta/alpha) ((Phi_t(w)+1)^alpha - (Phi_t(1)+1)^alpha
    - lam sigma(w)) and returns (estimate, closed_form) where the closed
    form is mu lam^(1-beta/alpha) sigma(w).  Both flows ride one clock so
    the difference keeps its digits.
    """
    if t_grid is None:
        t_grid = GeometricGrid.to_horizon(1e6)
    times = _resolve_times(t_grid)
    pos = times[times > 0]
    w = complex(w)
    W, _, _ = conjugate_series(gen, [w, 1.0 + 0.0j], times)
    sel = times > 0
    al, be, lam, mu = gen.alpha, gen.beta, gen.lam, gen.mu
    sig = evaluator_for(gen).sigma(w)
    diff = (W[sel, 0] + 1.0) ** al - (W[sel, 1] + 1.0) ** al - lam * sig
    vals = (pos + 1.0) ** (be / al) * diff
    est = estimate_limit(list(zip(pos, vals)))
    closed = mu * lam ** (1.0 - be / al) * sig
    return est, complex(closed)


def koenigs_difference_limit(gen, z, t_grid=None, frame="disk"):
    """Limit of the alpha-power difference against its quadrature value.

    Disk: 1/(1-F_t(z))^alpha - 1/(1-F_t(0))^alpha -> lam h(z)/2^alpha.
    Half-plane: (Phi_t(w)+1)^alpha - (Phi_t(1)+1)^alpha -> lam sigma(w).
    Returns (estimate, reference) with the reference computed by the
    independent Koenigs quadrature, never from the flow.
    """
    if t_grid is None:
        t_grid = GeometricGrid.to_horizon(1e6)
    times = _resolve_times(t_grid)
    pos = times[times > 0]
    koe = evaluator_for(gen)
    if frame == "disk":
        w0 = cayley(z)
        reference = gen.lam * koe.h(z) / 2.0 ** gen.alpha
        unit = 2.0
    elif frame == "halfplane":
        w0 = complex(z)
        reference = gen.lam * koe.sigma(w0)
        unit = 1.0
    else:
        raise ValidationError(f"unknown frame {frame!r}")
    W, _, _ = conjugate_series(gen, [w0, 1.0 + 0.0j], times)
    sel = times > 0
    al = gen.alpha
    diff = ((W[sel, 0] + 1.0) / unit) ** al - ((W[sel, 1] + 1.0) / unit) ** al
    est = estimate_limit(list(zip(pos, diff)), p=gen.beta / gen.alpha)
    return est, complex(reference)
