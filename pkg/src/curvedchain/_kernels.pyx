# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled in-place statevector kernels.

``site`` is the 1-based site label; site 1 is the most significant bit,
so site ``j`` has amplitude stride ``2**(n - j)``.
"""

ctypedef double complex cplx


def apply_1q(cplx[::1] state, int n, int site,
             cplx u00, cplx u01, cplx u10, cplx u11):
    cdef Py_ssize_t stride = (<Py_ssize_t>1) << (n - site)
    cdef Py_ssize_t dim = state.shape[0]
    cdef Py_ssize_t base, k
    cdef cplx a, b
    with nogil:
        base = 0
        while base < dim:
            for k in range(base, base + stride):
                a = state[k]
                b = state[k + stride]
                state[k] = u00 * a + u01 * b
                state[k + stride] = u10 * a + u11 * b
            base += 2 * stride


def apply_diag(cplx[::1] state, int n, int site, cplx d0, cplx d1):
    cdef Py_ssize_t stride = (<Py_ssize_t>1) << (n - site)
    cdef Py_ssize_t dim = state.shape[0]
    cdef Py_ssize_t base, k
    with nogil:
        base = 0
        while base < dim:
            for k in range(base, base + stride):
                state[k] = d0 * state[k]
                state[k + stride] = d1 * state[k + stride]
            base += 2 * stride


def apply_x(cplx[::1] state, int n, int site):
    cdef Py_ssize_t stride = (<Py_ssize_t>1) << (n - site)
    cdef Py_ssize_t dim = state.shape[0]
    cdef Py_ssize_t base, k
    cdef cplx a
    with nogil:
        base = 0
        while base < dim:
            for k in range(base, base + stride):
                a = state[k]
                state[k] = state[k + stride]
                state[k + stride] = a
            base += 2 * stride


def apply_cnot(cplx[::1] state, int n, int control, int target):
    # visit only indices with control = 1 and target = 0
    cdef Py_ssize_t cbit = (<Py_ssize_t>1) << (n - control)
    cdef Py_ssize_t tbit = (<Py_ssize_t>1) << (n - target)
    cdef Py_ssize_t hi = cbit if cbit > tbit else tbit
    cdef Py_ssize_t lo = cbit if cbit < tbit else tbit
    cdef Py_ssize_t dim = state.shape[0]
    cdef Py_ssize_t outer, mid, k, i
    cdef cplx a
    with nogil:
        outer = 0
        while outer < dim:
            mid = outer
            while mid < outer + hi:
                for k in range(mid, mid + lo):
                    i = k | cbit
                    a = state[i]
                    state[i] = state[i | tbit]
                    state[i | tbit] = a
                mid += 2 * lo
            outer += 2 * hi
