# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled ODE kernel: batched Dormand-Prince RK5(4) over complex state.

Mirrors pure.py loop for loop; see that module for the field encodings,
status codes, and the shared-clock rationale.  The only differences are
mechanical: flattened coefficient tables instead of per-part rows, and C
loops instead of numpy vector arithmetic.
"""

import numpy as np

cdef extern from "complex.h" nogil:
    double complex cexp(double complex)
    double complex clog(double complex)
    double cabs(double complex)
    double creal(double complex)
    double cimag(double complex)

cdef extern from "math.h" nogil:
    double fabs(double)
    double fmax(double, double)
    double fmin(double, double)
    double pow(double, double)
    bint isfinite(double)

# Dormand-Prince 5(4) tableau, identical to the pure backend
cdef double _A21 = 1.0 / 5.0
cdef double _A31 = 3.0 / 40.0, _A32 = 9.0 / 40.0
cdef double _A41 = 44.0 / 45.0, _A42 = -56.0 / 15.0, _A43 = 32.0 / 9.0
cdef double _A51 = 19372.0 / 6561.0, _A52 = -25360.0 / 2187.0
cdef double _A53 = 64448.0 / 6561.0, _A54 = -212.0 / 729.0
cdef double _A61 = 9017.0 / 3168.0, _A62 = -355.0 / 33.0
cdef double _A63 = 46732.0 / 5247.0, _A64 = 49.0 / 176.0
cdef double _A65 = -5103.0 / 18656.0
cdef double _B1 = 35.0 / 384.0, _B3 = 500.0 / 1113.0, _B4 = 125.0 / 192.0
cdef double _B5 = -2187.0 / 6784.0, _B6 = 11.0 / 84.0
cdef double _E1 = 35.0 / 384.0 - 5179.0 / 57600.0
cdef double _E3 = 500.0 / 1113.0 - 7571.0 / 16695.0
cdef double _E4 = 125.0 / 192.0 - 393.0 / 640.0
cdef double _E5 = -2187.0 / 6784.0 + 92097.0 / 339200.0
cdef double _E6 = 11.0 / 84.0 - 187.0 / 2100.0
cdef double _E7 = -1.0 / 40.0

cdef double _SAFETY = 0.9
cdef double _MIN_SHRINK = 0.2
cdef double _ORDER_EXP = -1.0 / 5.0


cdef inline double complex _cpow(double complex u, double e) noexcept nogil:
    if e == 1.0:
        return u
    if e == 2.0:
        return u * u
    return cexp(e * clog(u))


cdef void _rhs(int nparts, int[:] kinds, int[:] starts, int[:] term_off,
               double complex[:] cc, double[:] ee,
               double complex[:] y, double complex[:] out) noexcept nogil:
    cdef int p, i, m, k
    cdef double complex u, u2, acc
    for p in range(nparts):
        k = kinds[p]
        if k == 0:
            for i in range(starts[p], starts[p + 1]):
                u = 1.0 - y[i]
                acc = 0.0
                for m in range(term_off[p], term_off[p + 1]):
                    acc = acc + cc[m] * _cpow(u, ee[m])
                out[i] = acc
        elif k == 1:
            for i in range(starts[p], starts[p + 1]):
                u = y[i] + 1.0
                acc = 0.0
                for m in range(term_off[p], term_off[p + 1]):
                    acc = acc + cc[m] * _cpow(u, ee[m])
                out[i] = acc
        elif k == 2:
            for i in range(starts[p], starts[p + 1]):
                u = 1.0 - y[i]
                u2 = u * u
                out[i] = u2 / (4.0 + 1j * u2)
        else:
            for i in range(starts[p], starts[p + 1]):
                u = y[i] + 1.0
                u2 = u * u
                out[i] = u2 / (2.0 * (u2 + 1j))


cdef bint _in_domain(int nparts, int[:] kinds, int[:] starts,
                     double complex[:] y) noexcept nogil:
    cdef int p, i, k
    for p in range(nparts):
        k = kinds[p]
        if k == 0 or k == 2:
            for i in range(starts[p], starts[p + 1]):
                if cabs(y[i]) >= 1.0:
                    return False
        else:
            for i in range(starts[p], starts[p + 1]):
                if creal(y[i]) <= 0.0:
                    return False
    return True


cdef int _drive(int nparts, int[:] kinds, int[:] starts, int[:] term_off,
                double complex[:] cc, double[:] ee,
                double complex[:] y, double[:] t_out,
                double complex[:, :] Y, double[:, :] E,
                double[:] acc_err,
                double complex[:] k1, double complex[:] k2,
                double complex[:] k3, double complex[:] k4,
                double complex[:] k5, double complex[:] k6,
                double complex[:] k7, double complex[:] y_new,
                double complex[:] stage, double complex[:] err_vec,
                double rtol, double atol, double max_growth) noexcept nogil:
    cdef int n = y.shape[0]
    cdef int nt = t_out.shape[0]
    cdef int out_idx = 0, i
    cdef double t = 0.0, h, f0, err, scale, ae, factor, t_end
    cdef double complex tmp, swp

    while out_idx < nt and t_out[out_idx] <= t:
        for i in range(n):
            Y[out_idx, i] = y[i]
            E[out_idx, i] = acc_err[i]
        out_idx += 1
    if out_idx >= nt:
        return 0

    _rhs(nparts, kinds, starts, term_off, cc, ee, y, k1)
    f0 = 1.0 if n == 0 else 0.0
    for i in range(n):
        f0 = fmax(f0, cabs(k1[i]))
    h = 0.0
    for i in range(n):
        h = fmax(h, cabs(y[i]))
    h = 1e-4 * (1.0 + h) / (1.0 + f0)
    t_end = t_out[nt - 1]

    while t < t_end:
        if h < 1e-14 * fmax(1.0, fabs(t)):
            return 1
        if t + h > t_end:
            h = t_end - t
        # never step past the next requested output time; landing on it
        # exactly keeps the dense output trivial and the clock shared
        if t + h > t_out[out_idx]:
            h = t_out[out_idx] - t

        for i in range(n):
            stage[i] = y[i] + h * (_A21 * k1[i])
        _rhs(nparts, kinds, starts, term_off, cc, ee, stage, k2)
        for i in range(n):
            stage[i] = y[i] + h * (_A31 * k1[i] + _A32 * k2[i])
        _rhs(nparts, kinds, starts, term_off, cc, ee, stage, k3)
        for i in range(n):
            stage[i] = y[i] + h * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i])
        _rhs(nparts, kinds, starts, term_off, cc, ee, stage, k4)
        for i in range(n):
            stage[i] = y[i] + h * (_A51 * k1[i] + _A52 * k2[i]
                                   + _A53 * k3[i] + _A54 * k4[i])
        _rhs(nparts, kinds, starts, term_off, cc, ee, stage, k5)
        for i in range(n):
            stage[i] = y[i] + h * (_A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i]
                                   + _A64 * k4[i] + _A65 * k5[i])
        _rhs(nparts, kinds, starts, term_off, cc, ee, stage, k6)
        for i in range(n):
            y_new[i] = y[i] + h * (_B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i]
                                   + _B5 * k5[i] + _B6 * k6[i])
        _rhs(nparts, kinds, starts, term_off, cc, ee, y_new, k7)

        err = 0.0
        for i in range(n):
            err_vec[i] = h * (_E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i]
                              + _E5 * k5[i] + _E6 * k6[i] + _E7 * k7[i])
            if not (isfinite(creal(y_new[i])) and isfinite(cimag(y_new[i]))):
                return 3
            ae = cabs(err_vec[i])
            scale = atol + rtol * fmax(cabs(y[i]), cabs(y_new[i]))
            err = fmax(err, ae / scale)

        if err <= 1.0:
            t = t + h
            for i in range(n):
                y[i] = y_new[i]
                acc_err[i] = acc_err[i] + cabs(err_vec[i])
                swp = k1[i]
                k1[i] = k7[i]
                k7[i] = swp
            if not _in_domain(nparts, kinds, starts, y):
                while out_idx < nt and t_out[out_idx] <= t:
                    for i in range(n):
                        Y[out_idx, i] = y[i]
                        E[out_idx, i] = acc_err[i]
                    out_idx += 1
                return 2
            while out_idx < nt and t_out[out_idx] <= t * (1.0 + 1e-15):
                for i in range(n):
                    Y[out_idx, i] = y[i]
                    E[out_idx, i] = acc_err[i]
                out_idx += 1
            if err == 0.0:
                factor = max_growth
            else:
                factor = fmin(max_growth,
                              fmax(_MIN_SHRINK, _SAFETY * pow(err, _ORDER_EXP)))
            h = h * factor
        else:
            h = h * fmax(_MIN_SHRINK, fmin(0.5, _SAFETY * pow(err, _ORDER_EXP)))

    return 0


def integrate_batch(part_kinds, part_counts, coefs, expos, y0, t_out,
                    rtol=1e-10, atol=1e-12, max_growth=5.0):
    """Integrate the packed system from t=0 through every time in t_out.

    Same contract as the pure backend: returns (Y, E, status) with Y[k] the
    state at t_out[k], E[k] the accumulated local error magnitudes, and
    status 0/1/2/3.  Rows beyond a failure hold NaN.
    """
    kinds = np.ascontiguousarray(part_kinds, dtype=np.int32)
    counts = np.ascontiguousarray(part_counts, dtype=np.int32)
    nparts = kinds.shape[0]
    starts = np.zeros(nparts + 1, dtype=np.int32)
    np.cumsum(counts, out=starts[1:])

    term_off = np.zeros(nparts + 1, dtype=np.int32)
    flat_c = []
    flat_e = []
    row = 0
    for p in range(nparts):
        if kinds[p] in (0, 1):
            flat_c.extend(np.asarray(coefs[row], dtype=complex))
            flat_e.extend(np.asarray(expos[row], dtype=float))
            row += 1
        elif kinds[p] not in (2, 3):
            raise ValueError(f"unknown field kind {kinds[p]}")
        term_off[p + 1] = len(flat_c)
    if row != len(coefs):
        raise ValueError("coefficient table does not match power-form parts")
    cc = np.ascontiguousarray(flat_c, dtype=complex)
    ee = np.ascontiguousarray(flat_e, dtype=float)
    if cc.size == 0:
        cc = np.zeros(1, dtype=complex)
        ee = np.zeros(1, dtype=float)

    y = np.array(y0, dtype=complex, copy=True, order="C")
    tt = np.ascontiguousarray(t_out, dtype=float)
    cdef int n = y.shape[0]
    cdef int nt = tt.shape[0]
    Y = np.full((nt, n), np.nan, dtype=complex)
    E = np.full((nt, n), np.nan, dtype=float)
    acc_err = np.zeros(n, dtype=float)
    scratch = [np.empty(n, dtype=complex) for _ in range(10)]

    cdef int status = _drive(
        nparts, kinds, starts, term_off, cc, ee,
        y, tt, Y, E, acc_err,
        scratch[0], scratch[1], scratch[2], scratch[3], scratch[4],
        scratch[5], scratch[6], scratch[7], scratch[8], scratch[9],
        float(rtol), float(atol), float(max_growth),
    )
    return Y, E, status
