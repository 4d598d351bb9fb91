"""Generators of parabolic-type semigroups on the unit disk.

The vector fields handled here have the power form

    f(z) = a (1 - z)^(1+alpha) + b (1 - z)^(1+alpha+beta) + R(z)

with 0 < alpha <= 2, beta > 0, a != 0 and |arg a| <= (pi/2) min(alpha,
2 - alpha), plus an optional lower-order remainder R.  Fields of this shape
generate continuous one-parameter semigroups of holomorphic self-maps of the
disk whose common Denjoy-Wolff point sits at z = 1, and every flow map is
parabolic: the boundary fixed point is attracting with unit multiplier.

All powers are principal-branch: Re(1 - z) > 0 on the disk, so (1 - z)^p is
single-valued there and the coefficient condition above is exactly what makes
Re[f(z) / (1 - z)^2] >= 0 (the Berkson-Porta criterion at tau = 1).

The Cayley transform C(z) = (1 + z)/(1 - z) conjugates everything to the right
half-plane Pi = {Re w > 0}, where the same field becomes

    phi(w) = A (w + 1)^(1-alpha) + B (w + 1)^(1-alpha-beta) + rho(w)

with A = 2^alpha a and B = 2^(alpha+beta) b.  The constants lambda = alpha A
and mu = B / A drive every asymptotic statement downstream, so they are
exposed on the spec object.
"""

import cmath
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AdmissibilityError, ValidationError

# slack applied to the coefficient argument bound and the Berkson-Porta
# positivity check; keeps boundary cases like arg(a) = pi/4 at alpha = 1/2
# from tripping on representation error
ARG_TOL = 1e-12
ADMISSIBILITY_TOL = 1e-12

REMAINDER_ZERO = "zero"
REMAINDER_EXTRA_POWER = "extra_power"
REMAINDER_RATIONAL = "rational_example_1"

# the pinned rational model: f(z) = (1-z)^2 / (4 + i (1-z)^2), which expands
# as (1/4)(1-z)^2 - (i/16)(1-z)^4 + O((1-z)^6), so alpha = 1, beta = 2
RATIONAL_A = 0.25 + 0.0j
RATIONAL_ALPHA = 1.0
RATIONAL_B = -0.0625j
RATIONAL_BETA = 2.0


@dataclass(frozen=True)
class Remainder:
    """Lower-order remainder attached to a power-form generator.

    kind is one of "zero", "extra_power", "rational_example_1".

    extra_power adds c (1 - z)^(1+gamma) with gamma > alpha + beta, which
    keeps the remainder subordinate to both explicit power terms.

    rational_example_1 does not add a term: it replaces the whole field with
    f(z) = (1 - z)^2 / (4 + i (1 - z)^2), whose expansion has
    a = 1/4, alpha = 1, b = -i/16, beta = 2 and an O((1-z)^6) tail.  The
    coefficients of the owning GeneratorSpec are pinned to those values.
    """

    kind: str = REMAINDER_ZERO
    c: complex = 0j
    gamma: float = 0.0

    def __post_init__(self):
        if self.kind not in (REMAINDER_ZERO, REMAINDER_EXTRA_POWER, REMAINDER_RATIONAL):
            raise ValidationError(f"unknown remainder kind {self.kind!r}")
        if self.kind == REMAINDER_EXTRA_POWER:
            if self.c == 0:
                raise ValidationError("extra_power remainder needs c != 0")
            if not (self.gamma > 0) or not math.isfinite(self.gamma):
                raise ValidationError("extra_power remainder needs finite gamma > 0")


@dataclass(frozen=True)
class GeneratorSpec:
    """Validated parameters of one power-form generator.

    Instances are immutable; build them through make_generator, which performs
    the full coefficient validation and the numerical Berkson-Porta sweep.

    Attributes
    ----------
    a, alpha : leading coefficient and exponent, f ~ a (1-z)^(1+alpha).
    b, beta : second-order coefficient and exponent offset.
    remainder : optional tail, see Remainder.
    tangential : True when |arg a| sits exactly on the admissible boundary
        (pi/2) min(alpha, 2 - alpha); trajectories then approach z = 1
        tangentially to the unit circle and several asymptotic constants
        degenerate, so downstream reports flag it.
    """

    a: complex
    alpha: float
    b: complex = 0j
    beta: float = 1.0
    remainder: Remainder = field(default_factory=Remainder)
    tangential: bool = False

    # ---- derived constants ------------------------------------------------

    @property
    def A(self):
        """Half-plane leading coefficient, A = 2^alpha a."""
        return (2.0**self.alpha) * self.a

    @property
    def B(self):
        """Half-plane second coefficient, B = 2^(alpha+beta) b."""
        return (2.0 ** (self.alpha + self.beta)) * self.b

    @property
    def lam(self):
        """lambda = alpha A = 2^alpha alpha a; Re lambda > 0 off the
        tangential boundary.  Scales the leading term (lambda t)^(1/alpha)."""
        return self.alpha * self.A

    @property
    def mu(self):
        """mu = B / A = 2^beta b / a, the second-order expansion weight."""
        return self.B / self.A

    @property
    def is_pure(self):
        """True when the field is a single power term a (1 - z)^(1+alpha)."""
        return self.b == 0 and self.remainder.kind == REMAINDER_ZERO

    # ---- evaluation -------------------------------------------------------

    def f(self, z):
        """Evaluate the disk field at z (scalar or ndarray)."""
        z = np.asarray(z, dtype=complex)
        u = 1.0 - z
        if self.remainder.kind == REMAINDER_RATIONAL:
            u2 = u * u
            out = u2 / (4.0 + 1j * u2)
        else:
            out = self.a * u ** (1.0 + self.alpha)
            if self.b != 0:
                out = out + self.b * u ** (1.0 + self.alpha + self.beta)
            if self.remainder.kind == REMAINDER_EXTRA_POWER:
                out = out + self.remainder.c * u ** (1.0 + self.remainder.gamma)
        return out if out.ndim else complex(out)

    def f_prime(self, z):
        """Evaluate f'(z) analytically (no differencing)."""
        z = np.asarray(z, dtype=complex)
        u = 1.0 - z
        if self.remainder.kind == REMAINDER_RATIONAL:
            u2 = u * u
            den = 4.0 + 1j * u2
            out = -8.0 * u / (den * den)
        else:
            out = -self.a * (1.0 + self.alpha) * u**self.alpha
            if self.b != 0:
                p = self.alpha + self.beta
                out = out - self.b * (1.0 + p) * u**p
            if self.remainder.kind == REMAINDER_EXTRA_POWER:
                g = self.remainder.gamma
                out = out - self.remainder.c * (1.0 + g) * u**g
        return out if out.ndim else complex(out)

    def phi(self, w):
        """Evaluate the conjugate half-plane field phi = C'(z) f(z) at w = C(z).

        Closed form: phi(w) = A (w+1)^(1-alpha) + B (w+1)^(1-alpha-beta) + rho(w)
        where an extra_power tail c (1-z)^(1+gamma) maps to 2^gamma c (w+1)^(1-gamma)
        and the rational model maps to (w+1)^2 / (2 ((w+1)^2 + i)).
        """
        w = np.asarray(w, dtype=complex)
        v = w + 1.0
        if self.remainder.kind == REMAINDER_RATIONAL:
            v2 = v * v
            out = v2 / (2.0 * (v2 + 1j))
        else:
            out = self.A * v ** (1.0 - self.alpha)
            if self.b != 0:
                out = out + self.B * v ** (1.0 - self.alpha - self.beta)
            if self.remainder.kind == REMAINDER_EXTRA_POWER:
                g = self.remainder.gamma
                out = out + (2.0**g) * self.remainder.c * v ** (1.0 - g)
        return out if out.ndim else complex(out)

    # ---- kernel wiring ----------------------------------------------------

    def field_terms(self, frame):
        """Flatten the field into (kind, coefficients, exponents) for the
        ODE kernel.  kind 0 sums c_j (1 - y)^(p_j) in the disk, kind 1 sums
        c_j (y + 1)^(p_j) in the half-plane; kinds 2 and 3 are the pinned
        rational model in each frame.
        """
        if self.remainder.kind == REMAINDER_RATIONAL:
            return (2 if frame == "disk" else 3), [], []
        if frame == "disk":
            coefs = [self.a]
            expos = [1.0 + self.alpha]
            if self.b != 0:
                coefs.append(self.b)
                expos.append(1.0 + self.alpha + self.beta)
            if self.remainder.kind == REMAINDER_EXTRA_POWER:
                coefs.append(self.remainder.c)
                expos.append(1.0 + self.remainder.gamma)
            return 0, coefs, expos
        coefs = [self.A]
        expos = [1.0 - self.alpha]
        if self.b != 0:
            coefs.append(self.B)
            expos.append(1.0 - self.alpha - self.beta)
        if self.remainder.kind == REMAINDER_EXTRA_POWER:
            g = self.remainder.gamma
            coefs.append((2.0**g) * self.remainder.c)
            expos.append(1.0 - g)
        return 1, coefs, expos


def cayley(z):
    """Cayley transform C(z) = (1 + z) / (1 - z), disk -> right half-plane."""
    z = np.asarray(z, dtype=complex)
    out = (1.0 + z) / (1.0 - z)
    return out if out.ndim else complex(out)


def cayley_inverse(w):
    """Inverse Cayley transform, written as 1 - 2/(w + 1).

    This form evaluates the boundary gap 1 - z = 2/(w + 1) without
    cancellation when |w| is large, which matters at long flow horizons.
    """
    w = np.asarray(w, dtype=complex)
    out = 1.0 - 2.0 / (w + 1.0)
    return out if out.ndim else complex(out)


def gap_from_halfplane(w):
    """Boundary gap 1 - z for z = C^{-1}(w), computed cancellation-free."""
    w = np.asarray(w, dtype=complex)
    out = 2.0 / (w + 1.0)
    return out if out.ndim else complex(out)


def make_generator(a, alpha, b=0j, beta=1.0, remainder=None, check_admissible=True):
    """Validate parameters and build a GeneratorSpec.

    Raises ValidationError for out-of-range parameters and
    AdmissibilityError when the numerical Berkson-Porta sweep finds
    Re[f(z)/(1-z)^2] < -1e-12 somewhere on the disk.  check_admissible=False
    skips the sweep (the analytic coefficient bound is always enforced).
    """
    remainder = remainder if remainder is not None else Remainder()
    if remainder.kind == REMAINDER_RATIONAL:
        a, alpha, b, beta = RATIONAL_A, RATIONAL_ALPHA, RATIONAL_B, RATIONAL_BETA
    a = complex(a)
    b = complex(b)
    alpha = float(alpha)
    beta = float(beta)

    if a == 0:
        raise ValidationError("leading coefficient a must be nonzero")
    if not (0.0 < alpha <= 2.0):
        raise ValidationError(f"alpha must lie in (0, 2], got {alpha}")
    if not (beta > 0.0) or not math.isfinite(beta):
        raise ValidationError(f"beta must be positive and finite, got {beta}")
    if remainder.kind == REMAINDER_EXTRA_POWER and not (
        remainder.gamma > alpha + beta
    ):
        raise ValidationError(
            "extra_power remainder needs gamma > alpha + beta "
            f"(gamma={remainder.gamma}, alpha+beta={alpha + beta})"
        )

    bound = 0.5 * math.pi * min(alpha, 2.0 - alpha)
    arg_a = abs(cmath.phase(a))
    if arg_a > bound + ARG_TOL:
        raise ValidationError(
            f"|arg a| = {arg_a:.6g} exceeds (pi/2) min(alpha, 2-alpha) = {bound:.6g}"
        )
    tangential = arg_a >= bound - ARG_TOL

    spec = GeneratorSpec(
        a=a, alpha=alpha, b=b, beta=beta, remainder=remainder, tangential=tangential
    )
    if check_admissible:
        validate_admissibility(spec)
    return spec


def validate_admissibility(spec, n_radial=64, n_angular=64, tol=ADMISSIBILITY_TOL):
    """Check Re[f(z) / (1 - z)^2] >= -tol on a disk grid.

    The grid covers radii up to 1 - 1e-6 and is refined near the fixed point
    z = 1, where the quotient is most sensitive: an extra patch samples
    1 - z = r e^{i theta} with r down to 1e-8 and |theta| < pi/2.  Raises
    AdmissibilityError with the worst offending point on failure.
    """
    radii = 1.0 - np.geomspace(1e-6, 2.0, n_radial)
    radii = radii[radii > 0]
    angles = np.linspace(0.0, 2.0 * np.pi, n_angular, endpoint=False)
    z = (radii[:, None] * np.exp(1j * angles[None, :])).ravel()

    # refinement patch: approach z = 1 inside the disk along many directions
    r_small = np.geomspace(1e-8, 0.5, 24)
    theta = np.linspace(-np.pi / 2 + 1e-3, np.pi / 2 - 1e-3, 25)
    u = (r_small[:, None] * np.exp(1j * theta[None, :])).ravel()
    z_near = 1.0 - u
    z_near = z_near[np.abs(z_near) < 1.0]

    pts = np.concatenate([z, z_near])
    quot = spec.f(pts) / (1.0 - pts) ** 2
    worst = np.min(quot.real)
    if worst < -tol:
        idx = int(np.argmin(quot.real))
        raise AdmissibilityError(
            f"Re[f(z)/(1-z)^2] = {worst:.3e} < -{tol:g} at z = {pts[idx]:.6g}"
        )
    return float(worst)


# ---- serialization --------------------------------------------------------


def _c2pair(c):
    return [float(c.real), float(c.imag)]


def generator_to_dict(spec):
    """JSON-ready dict: complex numbers as [re, im] pairs."""
    d = {
        "a": _c2pair(spec.a),
        "alpha": spec.alpha,
        "b": _c2pair(spec.b),
        "beta": spec.beta,
        "remainder": {"kind": spec.remainder.kind},
    }
    if spec.remainder.kind == REMAINDER_EXTRA_POWER:
        d["remainder"]["c"] = _c2pair(spec.remainder.c)
        d["remainder"]["gamma"] = spec.remainder.gamma
    return d


def generator_from_dict(d):
    """Inverse of generator_to_dict, with full validation."""
    rem = d.get("remainder", {"kind": REMAINDER_ZERO})
    kind = rem.get("kind", REMAINDER_ZERO)
    if kind == REMAINDER_EXTRA_POWER:
        c = rem["c"]
        remainder = Remainder(
            kind=kind, c=complex(c[0], c[1]), gamma=float(rem["gamma"])
        )
    else:
        remainder = Remainder(kind=kind)
    a = d["a"]
    b = d.get("b", [0.0, 0.0])
    return make_generator(
        a=complex(a[0], a[1]),
        alpha=float(d["alpha"]),
        b=complex(b[0], b[1]),
        beta=float(d.get("beta", 1.0)),
        remainder=remainder,
    )


def generator_to_json(spec, **kwargs):
    return json.dumps(generator_to_dict(spec), **kwargs)


def generator_from_json(text):
    return generator_from_dict(json.loads(text))
