"""Koenigs linearizing maps for parabolic power-form semigroups.

The disk Koenigs function h solves h'(z) f(z) = 1 with h(0) = 0, so that the
Abel equation h(F_t(z)) = h(z) + t holds along the flow.  Its half-plane
conjugate sigma = h o C^{-1} solves sigma'(w) phi(w) = 1 with sigma(1) = 0.
Both are computed as path integrals of 1/f and 1/phi along straight
segments, which stay inside the respective domains by convexity; the fields
have no interior zeros (their Berkson-Porta quotients have strictly positive
real part), so the integrands are holomorphic and the paths immaterial.

When beta > alpha the theory provides a normalized shift

    h_1(z) = h(z) + 2^alpha / lambda - c_1,
    c_1 = integral_0^1 [ h'(s) - 1/(a (1-s)^(1+alpha)) ] ds,

and likewise sigma_1 = sigma + 2^alpha / lambda - c_1.  The correction
integrand has an integrable endpoint singularity of known strength
(1-s)^(beta-alpha-1), so c_1 is evaluated by a truncation ladder
delta_k = 1e-2 * 2^(-k) with Richardson extrapolation at the known exponent
q = beta - alpha, followed by one Aitken sweep for the unknown next order.
An independent half-plane route computes the same constant as

    integral_1^inf [ sigma'(v) - (1/A) (v+1)^(alpha-1) ] dv

over a doubling horizon ladder; the change of variables v = C(s) shows the
two integrals agree exactly, so their spread is a genuine accuracy check and
is exposed on the evaluator.
"""

import functools
import math
import warnings

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .errors import QuadratureError, ValidationError

_LADDER_LEVELS = 26


def _quad_complex(func, a, b, epsabs, epsrel, depth=0):
    """quad with complex integrand, bisecting on poor reported accuracy.

    QUADPACK's slow-convergence warnings are suppressed: the ladder callers
    inspect the returned error estimate themselves and stop refining once a
    segment is rounding-noise dominated.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, err = quad(
            func, a, b, epsabs=epsabs, epsrel=epsrel, limit=200, complex_func=True
        )
    # quad reports the real/imag error estimates as one complex number
    err = abs(complex(err).real) + abs(complex(err).imag)
    tol = max(epsabs, epsrel * abs(val)) * 50.0
    if err > tol and abs(val) > 10.0 * epsabs and depth < 3:
        mid = 0.5 * (a + b)
        v1, e1 = _quad_complex(func, a, mid, epsabs, epsrel, depth + 1)
        v2, e2 = _quad_complex(func, mid, b, epsabs, epsrel, depth + 1)
        if e1 + e2 < err:
            return v1 + v2, e1 + e2
    return val, err


def _ladder_extrapolate(partials, q):
    """Extrapolate cumulative integrals whose tail shrinks by 2^-q per level.

    partials[k] = I - tail_k with tail_{k+1} ~ tail_k / 2^q.  One Richardson
    stage at the known exponent removes that tail; an Aitken stage absorbs
    the next (unknown) order.  Returns (value, spread) where spread is the
    last observed correction, a practical error estimate.
    """
    p = list(partials)
    if len(p) < 3:
        raise QuadratureError("truncation ladder too short to extrapolate")
    w = 2.0**q
    r1 = [(w * p[k + 1] - p[k]) / (w - 1.0) for k in range(len(p) - 1)]
    best = r1[-1]
    spread = abs(r1[-1] - r1[-2])
    # Aitken on the Richardson column
    r2 = []
    for k in range(len(r1) - 2):
        d1 = r1[k + 1] - r1[k]
        d2 = r1[k + 2] - r1[k + 1]
        den = d2 - d1
        if abs(den) > 1e-30:
            r2.append(r1[k + 2] - d2 * d2 / den)
    if len(r2) >= 2:
        a_spread = abs(r2[-1] - r2[-2])
        if a_spread < spread:
            best = r2[-1]
            spread = a_spread
    return best, spread


class KoenigsEvaluator:
    """Koenigs maps h, sigma and their shifted versions for one generator.

    The instance is immutable after construction: when beta > alpha the
    shift constant c_1 is computed eagerly through both the disk and the
    half-plane route, so concurrent readers never race a lazy fill-in.

    Parameters
    ----------
    gen : GeneratorSpec.
    quad_tol : relative tolerance handed to the quadrature engine; the
        absolute floor is quad_tol * 1e-3.
    """

    def __init__(self, gen, quad_tol=1e-10):
        self.gen = gen
        self.quad_tol = float(quad_tol)
        self._epsrel = self.quad_tol
        self._epsabs = self.quad_tol * 1e-3
        self._c1 = None
        self._c1_halfplane = None
        self._c1_spread = None
        if gen.beta > gen.alpha:
            c1d, sd = self._compute_c1_disk()
            c1h, sh = self._compute_c1_halfplane()
            self._c1 = c1d
            self._c1_halfplane = c1h
            self._c1_spread = max(sd, sh, abs(c1d - c1h))

    # ---- plain Koenigs maps ------------------------------------------------

    def h(self, z):
        """Disk Koenigs function, h(z) = integral_0^z ds / f(s), h(0) = 0."""
        z = np.asarray(z, dtype=complex)
        flat = np.atleast_1d(z).ravel()
        out = np.empty(flat.shape, dtype=complex)
        for i, zi in enumerate(flat):
            if abs(zi) >= 1.0:
                raise ValidationError(f"h requires |z| < 1, got |z| = {abs(zi):.6g}")
            if zi == 0:
                out[i] = 0.0
                continue
            def integrand(s, zi=zi):
                return zi / self.gen.f(s * zi)
            val, _ = _quad_complex(integrand, 0.0, 1.0, self._epsabs, self._epsrel)
            out[i] = val
        if z.ndim == 0:
            return complex(out[0])
        return out.reshape(z.shape)

    def sigma(self, w):
        """Half-plane Koenigs function, sigma(w) = integral_1^w dv / phi(v)."""
        w = np.asarray(w, dtype=complex)
        flat = np.atleast_1d(w).ravel()
        out = np.empty(flat.shape, dtype=complex)
        for i, wi in enumerate(flat):
            if wi.real <= 0.0:
                raise ValidationError(f"sigma requires Re w > 0, got {wi:.6g}")
            if wi == 1.0:
                out[i] = 0.0
                continue
            dw = wi - 1.0
            def integrand(s, dw=dw):
                return dw / self.gen.phi(1.0 + s * dw)
            val, _ = _quad_complex(integrand, 0.0, 1.0, self._epsabs, self._epsrel)
            out[i] = val
        if w.ndim == 0:
            return complex(out[0])
        return out.reshape(w.shape)

    def h_prime(self, z):
        """h'(z) = 1 / f(z)."""
        return 1.0 / self.gen.f(z)

    def sigma_prime(self, w):
        """sigma'(w) = 1 / phi(w)."""
        return 1.0 / self.gen.phi(w)

    # ---- shifted maps (beta > alpha) ----------------------------------------

    @property
    def c1(self):
        """Shift-correction constant (disk route); None unless beta > alpha."""
        return self._c1

    @property
    def c1_halfplane(self):
        """The same constant through the half-plane route."""
        return self._c1_halfplane

    @property
    def c1_spread(self):
        """Max of the two ladder spreads and the cross-route disagreement."""
        return self._c1_spread

    @property
    def shift_constant(self):
        """Additive constant h_1 - h = 2^alpha / lambda - c_1."""
        self._require_shift()
        return 2.0**self.gen.alpha / self.gen.lam - self._c1

    def h1(self, z):
        """Shifted disk Koenigs function h_1 = h + 2^alpha/lambda - c_1."""
        self._require_shift()
        return self.h(z) + self.shift_constant

    def sigma1(self, w):
        """Shifted half-plane Koenigs function sigma_1 = sigma + 2^alpha/lambda - c_1."""
        self._require_shift()
        return self.sigma(w) + self.shift_constant

    def _require_shift(self):
        if self._c1 is None:
            raise ValidationError(
                "the shifted Koenigs map needs beta > alpha "
                f"(alpha={self.gen.alpha}, beta={self.gen.beta})"
            )

    def _compute_c1_disk(self):
        """c_1 = int_0^1 [1/f(s) - 1/(a (1-s)^(1+alpha))] ds via the
        delta_k = 1e-2 * 2^-k endpoint-truncation ladder."""
        g = self.gen
        a, al = g.a, g.alpha
        q = g.beta - g.alpha

        def integrand(s):
            u = 1.0 - s
            return 1.0 / g.f(s) - 1.0 / (a * u ** (1.0 + al))

        deltas = [1e-2 * 2.0**-k for k in range(_LADDER_LEVELS)]
        base, _ = _quad_complex(
            integrand, 0.0, 1.0 - deltas[0], self._epsabs, self._epsrel
        )
        partials = [base]
        for k in range(len(deltas) - 1):
            seg, err = _quad_complex(
                integrand, 1.0 - deltas[k], 1.0 - deltas[k + 1],
                self._epsabs, self._epsrel,
            )
            if err > 0.1 * abs(seg) and k >= 3:
                break  # segment drowned in rounding noise; extrapolate from here
            partials.append(partials[-1] + seg)
        return _ladder_extrapolate(partials, q)

    def _compute_c1_halfplane(self):
        """Same constant as int_1^inf [1/phi(v) - (1/A)(v+1)^(alpha-1)] dv,
        over a doubling-horizon ladder T_k = 100 * 2^k; the tail decays like
        T^(alpha-beta), again a factor 2^-q per level."""
        g = self.gen
        A, al = g.A, g.alpha
        q = g.beta - g.alpha

        def integrand(v):
            return 1.0 / g.phi(v) - (1.0 / A) * (v + 1.0) ** (al - 1.0)

        horizons = [100.0 * 2.0**k for k in range(_LADDER_LEVELS)]
        base, _ = _quad_complex(integrand, 1.0, horizons[0], self._epsabs, self._epsrel)
        partials = [base]
        for k in range(len(horizons) - 1):
            seg, err = _quad_complex(
                integrand, horizons[k], horizons[k + 1], self._epsabs, self._epsrel
            )
            if err > 0.1 * abs(seg) and k >= 3:
                break  # cancellation noise exceeds the segment; stop refining
            partials.append(partials[-1] + seg)
        return _ladder_extrapolate(partials, q)

    # ---- consistency checks --------------------------------------------------

    def abel_residual(self, z0, t, frame="disk", config=None):
        """|h(F_t(z0)) - h(z0) - t| (or the sigma analogue).

        Keep t moderate (say <= 100): the check integrates 1/f right up to
        the flow point, and the quadrature slows as the orbit crowds the
        boundary.
        """
        from .flow import flow_at

        if frame == "disk":
            zt = flow_at(self.gen, z0, t, config=config, frame="disk")
            return abs(self.h(zt) - self.h(z0) - t)
        wt = flow_at(self.gen, z0, t, config=config, frame="halfplane")
        return abs(self.sigma(wt) - self.sigma(z0) - t)


@functools.lru_cache(maxsize=64)
def evaluator_for(gen, quad_tol=1e-10):
    """Shared per-generator evaluator.

    Construction is the expensive part (the c_1 ladders when beta > alpha),
    so downstream modules that keep asking for h, sigma, or sigma_1 of the
    same generator should come through here.
    """
    return KoenigsEvaluator(gen, quad_tol=quad_tol)
