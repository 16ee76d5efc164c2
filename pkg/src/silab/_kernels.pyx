# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled RK4 propagation kernels (see _kernels_py for the reference)."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline void _matmul(double[:, ::1] A, double[:, ::1] B, double[:, ::1] C, int d) noexcept nogil:
    cdef int i, j, k
    cdef double s
    for i in range(d):
        for j in range(d):
            s = 0.0
            for k in range(d):
                s = s + A[i, k] * B[k, j]
            C[i, j] = s


def rk4_fundamental(double[:, :, ::1] A, double h, double[:, ::1] start):
    """Propagate Y' = A(t) Y with classical RK4.

    ``A`` holds the generator at t_0, t_0 + h/2, t_1, ..., t_M (2M+1 slices).
    Returns the (M+1, d, d) array of Y(t_i) with Y(t_0) = start.
    """
    cdef Py_ssize_t nslices = A.shape[0]
    cdef int d = A.shape[1]
    cdef Py_ssize_t M = (nslices - 1) // 2
    out_arr = np.empty((M + 1, d, d), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    cdef double[:, ::1] P1 = np.empty((d, d))
    cdef double[:, ::1] P2 = np.empty((d, d))
    cdef double[:, ::1] P3 = np.empty((d, d))
    cdef double[:, ::1] P4 = np.empty((d, d))
    cdef double[:, ::1] T = np.empty((d, d))
    cdef double[:, ::1] P = np.empty((d, d))
    cdef double[:, ::1] Y = np.empty((d, d))
    cdef double[:, ::1] Yn = np.empty((d, d))
    cdef Py_ssize_t step
    cdef int i, j
    cdef double hh = 0.5 * h
    cdef double h6 = h / 6.0
    Y[:, :] = start
    out[0, :, :] = Y
    with nogil:
        for step in range(M):
            # P1 = A1
            for i in range(d):
                for j in range(d):
                    P1[i, j] = A[2 * step, i, j]
                    T[i, j] = hh * P1[i, j]
                T[i, i] = T[i, i] + 1.0
            _matmul(A[2 * step + 1], T, P2, d)
            for i in range(d):
                for j in range(d):
                    T[i, j] = hh * P2[i, j]
                T[i, i] = T[i, i] + 1.0
            _matmul(A[2 * step + 1], T, P3, d)
            for i in range(d):
                for j in range(d):
                    T[i, j] = h * P3[i, j]
                T[i, i] = T[i, i] + 1.0
            _matmul(A[2 * step + 2], T, P4, d)
            for i in range(d):
                for j in range(d):
                    P[i, j] = h6 * (P1[i, j] + 2.0 * P2[i, j] + 2.0 * P3[i, j] + P4[i, j])
                P[i, i] = P[i, i] + 1.0
            _matmul(P, Y, Yn, d)
            Y[:, :] = Yn
            out[step + 1, :, :] = Y
    return out_arr


def chain_products(double[:, :, ::1] P, double[:, ::1] start):
    """Return Y_0 = start, Y_{k+1} = P_k Y_k as a (K+1, d, d) array."""
    cdef Py_ssize_t K = P.shape[0]
    cdef int d = P.shape[1]
    out_arr = np.empty((K + 1, d, d), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t k
    out[0, :, :] = start
    with nogil:
        for k in range(K):
            _matmul(P[k], out[k], out[k + 1], d)
    return out_arr
