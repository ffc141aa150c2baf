# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled fused LSTM step kernels. Same contract as ``_pykernels``."""

from libc.math cimport exp, tanh, fabs


cdef inline double _sigmoid(double x) nogil:
    cdef double e = exp(-fabs(x))
    if x >= 0:
        return 1.0 / (1.0 + e)
    return e / (1.0 + e)


def forward_step(const double[:, ::1] z, const double[:, ::1] c_prev,
                 double[:, ::1] gates, double[:, ::1] c,
                 double[:, ::1] tanh_c, double[:, ::1] h):
    cdef Py_ssize_t B = c_prev.shape[0]
    cdef Py_ssize_t H = c_prev.shape[1]
    cdef Py_ssize_t b, k
    cdef double i, f, o, g, ct, tc
    with nogil:
        for b in range(B):
            for k in range(H):
                i = _sigmoid(z[b, k])
                f = _sigmoid(z[b, H + k])
                o = _sigmoid(z[b, 2 * H + k])
                g = tanh(z[b, 3 * H + k])
                gates[b, k] = i
                gates[b, H + k] = f
                gates[b, 2 * H + k] = o
                gates[b, 3 * H + k] = g
                ct = f * c_prev[b, k] + i * g
                tc = tanh(ct)
                c[b, k] = ct
                tanh_c[b, k] = tc
                h[b, k] = o * tc


def backward_step(const double[:, ::1] gates, const double[:, ::1] c_prev,
                  const double[:, ::1] tanh_c, const double[:, ::1] dh,
                  const double[:, ::1] dc, double[:, ::1] dz,
                  double[:, ::1] dc_prev):
    cdef Py_ssize_t B = c_prev.shape[0]
    cdef Py_ssize_t H = c_prev.shape[1]
    cdef Py_ssize_t b, k
    cdef double i, f, o, g, tc, d, dct
    with nogil:
        for b in range(B):
            for k in range(H):
                i = gates[b, k]
                f = gates[b, H + k]
                o = gates[b, 2 * H + k]
                g = gates[b, 3 * H + k]
                tc = tanh_c[b, k]
                d = dh[b, k]
                dct = dc[b, k] + d * o * (1.0 - tc * tc)
                dz[b, k] = dct * g * i * (1.0 - i)
                dz[b, H + k] = dct * c_prev[b, k] * f * (1.0 - f)
                dz[b, 2 * H + k] = d * tc * o * (1.0 - o)
                dz[b, 3 * H + k] = dct * i * (1.0 - g * g)
                dc_prev[b, k] = dct * f
