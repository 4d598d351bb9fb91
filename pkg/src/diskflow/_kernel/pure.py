"""Reference ODE kernel: batched Dormand-Prince RK5(4) over complex state.

This is the pure-numpy backend.  The compiled backend in _native.pyx mirrors
it loop for loop; both expose the same integrate_batch signature.

The state vector packs every trajectory of every requested vector field into
one flat complex array driven by a single adaptive clock.  Sharing the clock
matters when a caller subtracts two nearby solutions (pair experiments):
both components then carry the same local error signature and the difference
keeps far more accurate digits than independently stepped runs would.

Field encodings (part_kinds entries):
    0  disk power sum      y' = sum_j c_j (1 - y)^(p_j)
    1  half-plane power    y' = sum_j c_j (y + 1)^(p_j)
    2  disk rational       y' = (1 - y)^2 / (4 + i (1 - y)^2)
    3  half-plane rational y' = (y + 1)^2 / (2 ((y + 1)^2 + i))

Status codes returned:
    0  success
    1  step size underflow
    2  state left its domain (|y| >= 1 in the disk, Re y <= 0 half-plane)
    3  non-finite state
"""

import numpy as np

# Dormand-Prince 5(4) tableau (FSAL: last stage of an accepted step is the
# first stage of the next)
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = (
    9017 / 3168,
    -355 / 33,
    46732 / 5247,
    49 / 176,
    -5103 / 18656,
)
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# fourth-order weights for the embedded error estimate
_E1, _E3, _E4, _E5, _E6, _E7 = (
    35 / 384 - 5179 / 57600,
    500 / 1113 - 7571 / 16695,
    125 / 192 - 393 / 640,
    -2187 / 6784 + 92097 / 339200,
    11 / 84 - 187 / 2100,
    -1 / 40,
)

_SAFETY = 0.9
_MIN_SHRINK = 0.2
_ORDER_EXP = -1 / 5


def _build_rhs(part_kinds, part_counts, coefs, expos):
    """Compile the per-part field table into one vectorized rhs closure."""
    kinds = list(part_kinds)
    counts = list(part_counts)
    starts = np.concatenate([[0], np.cumsum(counts)]).astype(int)
    coefs = [np.asarray(c, dtype=complex) for c in coefs]
    expos = [np.asarray(e, dtype=float) for e in expos]

    def rhs(y, out):
        term = 0
        for p, kind in enumerate(kinds):
            lo, hi = starts[p], starts[p + 1]
            yp = y[lo:hi]
            if kind == 0:
                u = 1.0 - yp
                acc = np.zeros_like(yp)
                for c, e in zip(coefs[term], expos[term]):
                    acc += c * u**e
                out[lo:hi] = acc
                term += 1
            elif kind == 1:
                v = yp + 1.0
                acc = np.zeros_like(yp)
                for c, e in zip(coefs[term], expos[term]):
                    acc += c * v**e
                out[lo:hi] = acc
                term += 1
            elif kind == 2:
                u2 = (1.0 - yp) ** 2
                out[lo:hi] = u2 / (4.0 + 1j * u2)
            elif kind == 3:
                v2 = (yp + 1.0) ** 2
                out[lo:hi] = v2 / (2.0 * (v2 + 1j))
            else:
                raise ValueError(f"unknown field kind {kind}")

    def in_domain(y):
        ok = True
        for p, kind in enumerate(kinds):
            lo, hi = starts[p], starts[p + 1]
            yp = y[lo:hi]
            if kind in (0, 2):
                ok = ok and bool(np.all(np.abs(yp) < 1.0))
            else:
                ok = ok and bool(np.all(yp.real > 0.0))
        return ok

    n_terms = sum(1 for k in kinds if k in (0, 1))
    if n_terms != len(coefs):
        raise ValueError("coefficient table does not match power-form parts")
    return rhs, in_domain


def integrate_batch(
    part_kinds,
    part_counts,
    coefs,
    expos,
    y0,
    t_out,
    rtol=1e-10,
    atol=1e-12,
    max_growth=5.0,
):
    """Integrate the packed system from t=0 through every time in t_out.

    Parameters
    ----------
    part_kinds, part_counts : per-part field kind codes and state counts.
    coefs, expos : one (coefficients, exponents) row per power-form part,
        in part order; rational parts contribute no row.
    y0 : complex initial state, length sum(part_counts).
    t_out : strictly increasing output times; t_out[0] may be 0.
    rtol, atol : mixed error test, err_i / (atol + rtol max(|y_i|, |y_new_i|)).
    max_growth : cap on the step-size growth factor per accepted step.

    Returns
    -------
    (Y, E, status) : Y[k] is the state at t_out[k]; E[k] accumulates the
        per-component embedded local error magnitudes up to that time;
        status as documented in the module header.  On failure the rows
        beyond the last reached output time hold NaN.
    """
    y0 = np.asarray(y0, dtype=complex)
    t_out = np.asarray(t_out, dtype=float)
    n = y0.size
    nt = t_out.size
    Y = np.full((nt, n), np.nan, dtype=complex)
    E = np.full((nt, n), np.nan, dtype=float)

    rhs, in_domain = _build_rhs(part_kinds, part_counts, coefs, expos)

    y = y0.copy()
    t = 0.0
    acc_err = np.zeros(n, dtype=float)

    k1 = np.empty(n, dtype=complex)
    k2 = np.empty(n, dtype=complex)
    k3 = np.empty(n, dtype=complex)
    k4 = np.empty(n, dtype=complex)
    k5 = np.empty(n, dtype=complex)
    k6 = np.empty(n, dtype=complex)
    k7 = np.empty(n, dtype=complex)

    out_idx = 0
    while out_idx < nt and t_out[out_idx] <= t:
        Y[out_idx] = y
        E[out_idx] = acc_err
        out_idx += 1
    if out_idx >= nt:
        return Y, E, 0

    rhs(y, k1)
    f0 = np.max(np.abs(k1)) if n else 1.0
    h = 1e-4 * (1.0 + np.max(np.abs(y))) / (1.0 + f0)
    t_end = t_out[-1]

    while t < t_end:
        if h < 1e-14 * max(1.0, abs(t)):
            return Y, E, 1
        if t + h > t_end:
            h = t_end - t
        # also never step past the next requested output time; landing on it
        # exactly keeps the dense output trivial and the clock shared
        if t + h > t_out[out_idx]:
            h = t_out[out_idx] - t

        k2_in = y + h * (_A21 * k1)
        rhs(k2_in, k2)
        k3_in = y + h * (_A31 * k1 + _A32 * k2)
        rhs(k3_in, k3)
        k4_in = y + h * (_A41 * k1 + _A42 * k2 + _A43 * k3)
        rhs(k4_in, k4)
        k5_in = y + h * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4)
        rhs(k5_in, k5)
        k6_in = y + h * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5)
        rhs(k6_in, k6)
        y_new = y + h * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
        rhs(y_new, k7)
        err_vec = h * (
            _E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6 + _E7 * k7
        )

        if not np.all(np.isfinite(y_new.view(float))):
            return Y, E, 3

        abs_err = np.abs(err_vec)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.max(abs_err / scale)) if n else 0.0

        if err <= 1.0:
            t = t + h
            y = y_new
            k1, k7 = k7, k1
            acc_err = acc_err + abs_err
            if not in_domain(y):
                while out_idx < nt and t_out[out_idx] <= t:
                    Y[out_idx] = y
                    E[out_idx] = acc_err
                    out_idx += 1
                return Y, E, 2
            while out_idx < nt and t_out[out_idx] <= t * (1.0 + 1e-15):
                Y[out_idx] = y
                E[out_idx] = acc_err
                out_idx += 1
            if err == 0.0:
                factor = max_growth
            else:
                factor = min(max_growth, max(_MIN_SHRINK, _SAFETY * err**_ORDER_EXP))
            h = h * factor
        else:
            h = h * max(_MIN_SHRINK, min(0.5, _SAFETY * err**_ORDER_EXP))

    return Y, E, 0
