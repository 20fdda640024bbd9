# cython: language_level=3, boundscheck=False, wraparound=False
# cython: initializedcheck=False, cdivision=True
"""Compiled decision kernels; mirrors _kernels_py.py formula for formula.

Alphabet reductions run in ascending index order, matching the numpy
fallback's contiguous small-axis sums. Logarithms come from libm, which can
differ from numpy's vectorized log by one ulp, so cross-backend comparisons
are tolerance-based rather than bitwise.
"""

from libc.math cimport log

import numpy as np

BACKEND_NAME = "compiled"


cdef void _lrt(const double[:, ::1] f, const double[::1] v,
               double[::1] out) noexcept nogil:
    cdef Py_ssize_t i, a
    cdef double acc
    for i in range(f.shape[0]):
        acc = 0.0
        for a in range(f.shape[1]):
            acc += f[i, a] * v[a]
        out[i] = acc


def lrt_statistics(freqs, llr):
    """Rowwise D(f||P0) - D(f||P1) in its linear form sum_a f_a * ln(P1_a/P0_a)."""
    f = np.ascontiguousarray(freqs, dtype=np.float64)
    v = np.ascontiguousarray(llr, dtype=np.float64)
    out = np.empty(f.shape[0], dtype=np.float64)
    _lrt(f, v, out)
    return out


cdef void _glrt(const double[:, ::1] f, const double[::1] lp,
                double[::1] out) noexcept nogil:
    cdef Py_ssize_t i, a
    cdef double acc, fa
    for i in range(f.shape[0]):
        acc = 0.0
        for a in range(f.shape[1]):
            fa = f[i, a]
            acc += fa * (log(fa) - lp[a]) if fa > 0.0 else 0.0
        out[i] = acc


def glrt_statistics(freqs, logp0):
    """Rowwise D(f||P0) with the 0*ln(0) = 0 convention."""
    f = np.ascontiguousarray(freqs, dtype=np.float64)
    lp = np.ascontiguousarray(logp0, dtype=np.float64)
    out = np.empty(f.shape[0], dtype=np.float64)
    _glrt(f, lp, out)
    return out


cdef void _interp(const double[:, ::1] f, const double[::1] lp,
                  const double[:, ::1] lt, Py_ssize_t lt_step, double beta,
                  double[::1] out) noexcept nogil:
    cdef Py_ssize_t i, a
    cdef double acc, fa
    for i in range(f.shape[0]):
        acc = 0.0
        for a in range(f.shape[1]):
            fa = f[i, a]
            acc += fa * ((beta - 1.0) * log(fa) - beta * lt[i * lt_step, a]
                         + lp[a]) if fa > 0.0 else 0.0
        out[i] = acc


def interp_statistics(freqs, logp0, logt, beta):
    """Rowwise beta*D(f||T') - D(f||P0); logt broadcasts over rows or pairs them."""
    f = np.ascontiguousarray(freqs, dtype=np.float64)
    lp = np.ascontiguousarray(logp0, dtype=np.float64)
    lt = np.ascontiguousarray(np.atleast_2d(np.asarray(logt, dtype=np.float64)))
    out = np.empty(f.shape[0], dtype=np.float64)
    _interp(f, lp, lt, 0 if lt.shape[0] == 1 else 1, float(beta), out)
    return out


cdef void _gjs(const double[:, ::1] fx, const double[:, ::1] fX,
               Py_ssize_t fX_step, double alpha, double[::1] out) noexcept nogil:
    cdef Py_ssize_t i, a
    cdef double acc1, acc2, xa, Xa, logmix
    for i in range(fx.shape[0]):
        acc1 = 0.0
        acc2 = 0.0
        for a in range(fx.shape[1]):
            xa = fx[i, a]
            Xa = fX[i * fX_step, a]
            logmix = log((xa + alpha * Xa) / (1.0 + alpha))
            acc1 += xa * (log(xa) - logmix) if xa > 0.0 else 0.0
            acc2 += Xa * (log(Xa) - logmix) if Xa > 0.0 else 0.0
        out[i] = acc1 + alpha * acc2


def gjs_statistics(fx, fX, alpha):
    """Rowwise GJS_alpha(fx, fX); fX broadcasts over rows or pairs them."""
    x = np.ascontiguousarray(np.atleast_2d(np.asarray(fx, dtype=np.float64)))
    X = np.ascontiguousarray(np.atleast_2d(np.asarray(fX, dtype=np.float64)))
    out = np.empty(x.shape[0], dtype=np.float64)
    _gjs(x, X, 0 if X.shape[0] == 1 else 1, float(alpha), out)
    return out


def seq_segment(counts_x, counts_X, test_syms, train_syms, train_take,
                p0, logp0, n_design, delta, c_pen, t_start):
    """Advance one trial through a segment of steps; stop at the first crossing.

    Step i of the segment is time t = t_start + i + 1 and ingests one test
    symbol plus train_take[i] training symbols. counts_x / counts_X carry the
    cumulative symbol counts at t_start and are updated in place to the state
    at the stopping step (or the segment end).

    Returns (stopped, decision, tau, statistic); decision is -1 while running.
    """
    cdef long long[::1] cx = counts_x
    cdef long long[::1] cX = counts_X
    cdef const long long[::1] tsym = test_syms
    cdef const long long[::1] Xsym = train_syms
    cdef const long long[::1] take = train_take
    cdef const double[::1] p0v = p0
    cdef const double[::1] lpv = logp0
    cdef Py_ssize_t n_d = n_design
    cdef double dlt = delta
    cdef double pen_c = c_pen
    cdef Py_ssize_t t0 = t_start

    cdef Py_ssize_t steps = tsym.shape[0]
    cdef Py_ssize_t dim = p0v.shape[0]
    cdef Py_ssize_t i, a, j, t, pos = 0
    cdef long long ks
    cdef double k_t, fXa, lt, td, stat = 0.0, g0, g1, d_train, pen

    for i in range(steps):
        cx[tsym[i]] += 1
        for j in range(take[i]):
            cX[Xsym[pos]] += 1
            pos += 1
        t = t0 + i + 1

        ks = 0
        for a in range(dim):
            ks += cX[a]
        k_t = <double> ks
        stat = 0.0
        g0 = 0.0
        d_train = 0.0
        for a in range(dim):
            fXa = (<double> cX[a]) / k_t
            lt = log((1.0 - dlt) * fXa + dlt / dim)
            stat += (<double> cx[a]) * (lpv[a] - lt)
            g0 += p0v[a] * (lpv[a] - lt)
            d_train += fXa * (log(fXa) - lpv[a]) if fXa > 0.0 else 0.0
        td = <double> t
        pen = pen_c * log(td + 1.0)
        g0 = n_d * g0 + pen
        g1 = n_d * d_train + pen

        # the rule only starts checking at t = n_design
        if t >= n_d:
            if stat >= g0:
                return True, 0, t, stat
            if stat <= -g1:
                return True, 1, t, stat
    return False, -1, t0 + steps, stat
