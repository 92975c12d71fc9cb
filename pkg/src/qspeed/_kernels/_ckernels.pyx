# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled propagation kernels.

Same contract as :mod:`qspeed._kernels._fallback`. Internally every n x n
matrix is a column-major block of ``double complex``; LAPACK ``zheevd`` and
BLAS ``zgemm`` are taken from SciPy's Cython bindings so no extra link step
is needed.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, fabs
from scipy.linalg.cython_lapack cimport zheevd
from scipy.linalg.cython_blas cimport zgemm

cnp.import_array()

ctypedef double complex cplx


cdef inline cplx cexpi(double x) noexcept nogil:
    # exp(1j * x)
    return cos(x) + 1j * sin(x)


cdef inline double sinc(double x) noexcept nogil:
    if fabs(x) < 1e-4:
        return 1.0 - x * x / 6.0
    return sin(x) / x


cdef inline void gemm(char *ta, char *tb, int n, cplx *a, cplx *b, cplx *c) noexcept nogil:
    cdef cplx one = 1.0
    cdef cplx zero = 0.0
    zgemm(ta, tb, &n, &n, &n, &one, a, &n, b, &n, &zero, c, &n)


cdef class _Eig:
    """Workspace for repeated ``zheevd`` calls at a fixed size."""
    cdef int n, lwork, lrwork, liwork
    cdef cplx[::1] work
    cdef double[::1] rwork
    cdef int[::1] iwork

    def __init__(self, int n):
        cdef cplx wq
        cdef double rq
        cdef int iq, info
        cdef int m1 = -1
        cdef cplx[::1] a = np.zeros(n * n, dtype=np.complex128)
        cdef double[::1] w = np.zeros(n, dtype=np.float64)
        self.n = n
        zheevd(b"V", b"L", &n, &a[0], &n, &w[0], &wq, &m1, &rq, &m1, &iq, &m1, &info)
        self.lwork = max(1, <int>wq.real)
        self.lrwork = max(1, <int>rq)
        self.liwork = max(1, iq)
        self.work = np.zeros(self.lwork, dtype=np.complex128)
        self.rwork = np.zeros(self.lrwork, dtype=np.float64)
        self.iwork = np.zeros(self.liwork, dtype=np.intc)

    cdef int run(self, cplx *a, double *w) noexcept nogil:
        cdef int info = 0
        cdef int n = self.n
        zheevd(b"V", b"L", &n, a, &n, w, &self.work[0], &self.lwork,
               &self.rwork[0], &self.lrwork, &self.iwork[0], &self.liwork, &info)
        return info


cdef inline void build_h(int n, int nk, const cplx[:, ::1] h0, const cplx[:, :, ::1] ops,
                         const double[:, ::1] amps, int s, cplx *h) noexcept nogil:
    cdef int r, c, k
    cdef cplx acc
    for c in range(n):
        for r in range(c, n):
            acc = h0[r, c]
            for k in range(nk):
                acc = acc + amps[s, k] * ops[k, r, c]
            h[r + c * n] = acc


cdef inline void step_unitary(int n, cplx *v, double *w, double dt, cplx *tmp, cplx *u) noexcept nogil:
    cdef int r, c
    cdef cplx e
    for c in range(n):
        e = cexpi(-w[c] * dt)
        for r in range(n):
            tmp[r + c * n] = v[r + c * n] * e
    gemm(b"N", b"C", n, tmp, v, u)


def propagate(h0, ops, amps, double dt):
    cdef const cplx[:, ::1] h0v = np.ascontiguousarray(h0, dtype=np.complex128)
    cdef const cplx[:, :, ::1] opsv = np.ascontiguousarray(ops, dtype=np.complex128)
    cdef const double[:, ::1] ampv = np.ascontiguousarray(amps, dtype=np.float64)
    cdef int n = h0v.shape[0]
    cdef int nk = opsv.shape[0]
    cdef int steps = ampv.shape[0]
    cdef _Eig eig = _Eig(n)
    cdef cplx[::1] h = np.zeros(n * n, dtype=np.complex128)
    cdef double[::1] w = np.zeros(n, dtype=np.float64)
    cdef cplx[::1] tmp = np.zeros(n * n, dtype=np.complex128)
    cdef cplx[::1] us = np.zeros(n * n, dtype=np.complex128)
    cdef cplx[::1] p = np.zeros(n * n, dtype=np.complex128)
    cdef cplx[::1] q = np.zeros(n * n, dtype=np.complex128)
    cdef int s, i, info = 0
    for i in range(n):
        p[i + i * n] = 1.0
    with nogil:
        for s in range(steps):
            build_h(n, nk, h0v, opsv, ampv, s, &h[0])
            info = eig.run(&h[0], &w[0])
            if info != 0:
                break
            step_unitary(n, &h[0], &w[0], dt, &tmp[0], &us[0])
            gemm(b"N", b"N", n, &us[0], &p[0], &q[0])
            p[:] = q
    if info != 0:
        raise np.linalg.LinAlgError(f"zheevd failed with info={info}")
    return np.asarray(p).reshape((n, n), order="F").copy(order="C")


def propagate_with_gradient(h0, ops, amps, double dt, a):
    cdef const cplx[:, ::1] h0v = np.ascontiguousarray(h0, dtype=np.complex128)
    cdef const cplx[:, :, ::1] opsv = np.ascontiguousarray(ops, dtype=np.complex128)
    cdef const double[:, ::1] ampv = np.ascontiguousarray(amps, dtype=np.float64)
    cdef int n = h0v.shape[0]
    cdef int nk = opsv.shape[0]
    cdef int steps = ampv.shape[0]
    cdef int nn = n * n
    cdef _Eig eig = _Eig(n)
    cdef cplx[::1] vs = np.zeros(max(steps, 1) * nn, dtype=np.complex128)
    cdef double[:, ::1] ws = np.zeros((max(steps, 1), n), dtype=np.float64)
    cdef cplx[::1] us = np.zeros(max(steps, 1) * nn, dtype=np.complex128)
    cdef cplx[::1] pre = np.zeros((steps + 1) * nn, dtype=np.complex128)
    cdef cplx[::1] q = np.asfortranarray(a, dtype=np.complex128).ravel(order="F").copy()
    cdef cplx[::1] t1 = np.zeros(nn, dtype=np.complex128)
    cdef cplx[::1] t2 = np.zeros(nn, dtype=np.complex128)
    cdef cplx[::1] hh = np.zeros(n, dtype=np.complex128)
    cdef cplx[:, ::1] dz = np.zeros((steps, nk), dtype=np.complex128)
    cdef int s, i, r, c, k, info = 0
    cdef cplx *v
    cdef double *w
    cdef cplx acc
    for i in range(n):
        pre[i + i * n] = 1.0
    with nogil:
        # forward sweep: eigensystems, step unitaries, prefix products
        for s in range(steps):
            v = &vs[s * nn]
            w = &ws[s, 0]
            build_h(n, nk, h0v, opsv, ampv, s, v)
            info = eig.run(v, w)
            if info != 0:
                break
            step_unitary(n, v, w, dt, &t1[0], &us[s * nn])
            gemm(b"N", b"N", n, &us[s * nn], &pre[s * nn], &pre[(s + 1) * nn])
        if info == 0:
            # backward sweep: q holds a @ U_S ... U_{s+2} when step s is processed
            for s in range(steps - 1, -1, -1):
                v = &vs[s * nn]
                w = &ws[s, 0]
                # B = prefix_s @ q ; Bt = V^H B V
                gemm(b"N", b"N", n, &pre[s * nn], &q[0], &t1[0])
                gemm(b"C", b"N", n, v, &t1[0], &t2[0])
                gemm(b"N", b"N", n, &t2[0], v, &t1[0])
                # conj(C)[r, c] = conj(Bt[c, r] * phi[r, c]), stored in t2
                for i in range(n):
                    hh[i] = cexpi(-0.5 * w[i] * dt)
                for c in range(n):
                    for r in range(n):
                        acc = t1[c + r * n] * (-1j * dt) * hh[r] * hh[c] * sinc(0.5 * dt * (w[r] - w[c]))
                        t2[r + c * n] = acc.conjugate()
                # G = conj(V conj(C) V^H)
                gemm(b"N", b"N", n, v, &t2[0], &t1[0])
                gemm(b"N", b"C", n, &t1[0], v, &t2[0])
                for k in range(nk):
                    acc = 0.0
                    for c in range(n):
                        for r in range(n):
                            acc = acc + opsv[k, r, c] * t2[r + c * n].conjugate()
                    dz[s, k] = acc
                gemm(b"N", b"N", n, &q[0], &us[s * nn], &t1[0])
                q[:] = t1
    if info != 0:
        raise np.linalg.LinAlgError(f"zheevd failed with info={info}")
    u = np.asarray(pre[steps * nn:]).reshape((n, n), order="F").copy(order="C")
    return u, np.asarray(dz)
