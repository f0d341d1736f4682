# cython: language_level=3
# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: batch eigensolver, Kraus application, sampling, collusion trials.

Twin of the pure-NumPy module ``_kernels_py``; see that module for the
semantic contract.  Integer decisions derived from uniform draws are
bit-identical across the two backends.
"""

import numpy as np

from libc.math cimport fabs, sqrt


cdef inline double _off_norm(double *c, Py_ssize_t n) noexcept:
    cdef double acc = 0.0
    cdef Py_ssize_t i, j
    for i in range(n):
        for j in range(n):
            if i != j:
                acc += c[i * n + j] * c[i * n + j]
    return sqrt(acc)


cdef int _jacobi8(double *c, double *eigs, double tol, int max_sweeps) noexcept:
    """Cyclic Jacobi on a symmetric 8x8 matrix stored row-major in c.

    Writes the 8 eigenvalues (descending) to eigs.  Returns 0 on
    convergence, 1 when the sweep budget is exhausted.
    """
    cdef Py_ssize_t n = 8
    cdef double skip = tol / (4.0 * n)
    cdef Py_ssize_t p, q, k, sweep
    cdef double apq, theta, sign, t, cs, sn, vp, vq, tmp
    cdef bint converged = 0
    for sweep in range(max_sweeps):
        if _off_norm(c, n) <= tol:
            converged = 1
            break
        for p in range(n):
            for q in range(p + 1, n):
                apq = c[p * n + q]
                if fabs(apq) <= skip:
                    continue
                theta = (c[q * n + q] - c[p * n + p]) / (2.0 * apq)
                sign = 1.0 if theta >= 0.0 else -1.0
                t = sign / (fabs(theta) + sqrt(theta * theta + 1.0))
                cs = 1.0 / sqrt(t * t + 1.0)
                sn = t * cs
                for k in range(n):
                    vp = c[p * n + k]
                    vq = c[q * n + k]
                    c[p * n + k] = cs * vp - sn * vq
                    c[q * n + k] = sn * vp + cs * vq
                for k in range(n):
                    vp = c[k * n + p]
                    vq = c[k * n + q]
                    c[k * n + p] = cs * vp - sn * vq
                    c[k * n + q] = sn * vp + cs * vq
    if not converged and _off_norm(c, n) > tol:
        return 1
    cdef double d[8]
    for k in range(n):
        d[k] = c[k * n + k]
    # insertion sort, descending
    cdef Py_ssize_t i, j
    for i in range(1, n):
        tmp = d[i]
        j = i
        while j > 0 and d[j - 1] < tmp:
            d[j] = d[j - 1]
            j -= 1
        d[j] = tmp
    # embedding doubles every eigenvalue; adjacent twins after the sort
    for k in range(4):
        eigs[k] = d[2 * k]
    return 0


def eigvalsh_batch(mats, double tol=1e-12, int max_sweeps=100):
    """Eigenvalues of a stack of Hermitian matrices, each row sorted descending.

    Same contract as ``_kernels_py.eigvalsh_batch``.
    """
    mats = np.ascontiguousarray(mats, dtype=np.complex128)
    if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
        raise ValueError("expected a (m, n, n) matrix stack")
    cdef Py_ssize_t m = mats.shape[0]
    cdef Py_ssize_t n = mats.shape[1]
    out = np.empty((m, n), dtype=np.float64)
    if m == 0:
        return out
    if n != 2 and n != 4:
        raise ValueError("only 2x2 and 4x4 matrices are supported")
    cdef const double complex[:, :, ::1] mv = mats
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t idx, i, j
    cdef double a00, a11, mean, rad, reod, imod
    cdef double c[64]
    cdef double eigs[4]
    cdef double complex zij, zji
    if n == 2:
        for idx in range(m):
            a00 = mv[idx, 0, 0].real
            a11 = mv[idx, 1, 1].real
            reod = 0.5 * (mv[idx, 0, 1].real + mv[idx, 1, 0].real)
            imod = 0.5 * (mv[idx, 0, 1].imag - mv[idx, 1, 0].imag)
            mean = 0.5 * (a00 + a11)
            rad = sqrt(
                (0.5 * (a00 - a11)) * (0.5 * (a00 - a11))
                + reod * reod
                + imod * imod
            )
            ov[idx, 0] = mean + rad
            ov[idx, 1] = mean - rad
        return out
    for idx in range(m):
        # real symmetric embedding [[A, -B], [B, A]] of the symmetrized input
        for i in range(4):
            for j in range(4):
                zij = mv[idx, i, j]
                zji = mv[idx, j, i]
                c[i * 8 + j] = 0.5 * (zij.real + zji.real)
                c[(i + 4) * 8 + (j + 4)] = c[i * 8 + j]
                c[i * 8 + (j + 4)] = -0.5 * (zij.imag - zji.imag)
                c[(i + 4) * 8 + j] = 0.5 * (zij.imag - zji.imag)
        if _jacobi8(c, eigs, tol, max_sweeps) != 0:
            raise RuntimeError("Jacobi eigensolver failed to converge")
        for i in range(4):
            ov[idx, i] = eigs[i]
    return out


def kraus_apply_batch(states, ops):
    """Apply sum_k E_k rho E_k^dag to every state in a stack.

    Same contract as ``_kernels_py.kraus_apply_batch``.
    """
    states = np.ascontiguousarray(states, dtype=np.complex128)
    ops = np.ascontiguousarray(ops, dtype=np.complex128)
    if states.ndim != 3 or states.shape[1] != states.shape[2]:
        raise ValueError("expected a (m, n, n) matrix stack")
    if ops.ndim != 3 or ops.shape[1] != ops.shape[2]:
        raise ValueError("expected a (m, n, n) matrix stack")
    if states.shape[1] != ops.shape[1]:
        raise ValueError("state and operator dimensions differ")
    cdef Py_ssize_t m = states.shape[0]
    cdef Py_ssize_t d = states.shape[1]
    cdef Py_ssize_t nk = ops.shape[0]
    if d != 2 and d != 4:
        raise ValueError("only 2x2 and 4x4 matrices are supported")
    out = np.zeros((m, d, d), dtype=np.complex128)
    if m == 0 or nk == 0:
        return out
    cdef const double complex[:, :, ::1] sv = states
    cdef const double complex[:, :, ::1] kv = ops
    cdef double complex[:, :, ::1] ov = out
    cdef double complex tmp[16]
    cdef double complex acc
    cdef Py_ssize_t idx, k, a, b, cc
    for idx in range(m):
        for k in range(nk):
            # tmp = E_k @ rho
            for a in range(d):
                for cc in range(d):
                    acc = 0.0
                    for b in range(d):
                        acc = acc + kv[k, a, b] * sv[idx, b, cc]
                    tmp[a * d + cc] = acc
            # out += tmp @ E_k^dag
            for a in range(d):
                for cc in range(d):
                    acc = 0.0
                    for b in range(d):
                        acc = acc + tmp[a * d + b] * kv[k, cc, b].conjugate()
                    ov[idx, a, cc] = ov[idx, a, cc] + acc
    return out


def categorical_rows(probs, uniforms):
    """Inverse-CDF sample one category per row of a probability table.

    Same contract as ``_kernels_py.categorical_rows``.
    """
    probs = np.ascontiguousarray(probs, dtype=np.float64)
    uniforms = np.ascontiguousarray(uniforms, dtype=np.float64)
    if probs.ndim != 2 or uniforms.ndim != 1 or uniforms.shape[0] != probs.shape[0]:
        raise ValueError("probs must be (m, k) and uniforms (m,)")
    cdef Py_ssize_t m = probs.shape[0]
    cdef Py_ssize_t kk = probs.shape[1]
    out = np.empty(m, dtype=np.int64)
    cdef const double[:, ::1] pv = probs
    cdef const double[::1] uv = uniforms
    cdef long long[::1] ov = out
    cdef Py_ssize_t i, j
    cdef double acc
    cdef long long pick
    for i in range(m):
        acc = 0.0
        pick = kk - 1
        for j in range(kk):
            acc += pv[i, j]
            if uv[i] < acc:
                pick = j
                break
        ov[i] = pick
    return out


def collusion_counts(uniforms, Py_ssize_t n):
    """Correct-decode counts for identity-pairing attacks on scrambled runs.

    Same contract as ``_kernels_py.collusion_counts``.
    """
    uniforms = np.ascontiguousarray(uniforms, dtype=np.float64)
    if n < 1:
        raise ValueError("n must be at least 1")
    if uniforms.ndim != 2 or uniforms.shape[1] != 2 * n - 1:
        raise ValueError("uniform block must have shape (trials, 2n-1)")
    cdef Py_ssize_t trials = uniforms.shape[0]
    out = np.empty(trials, dtype=np.int64)
    perm_arr = np.empty(n, dtype=np.int64)
    cdef const double[:, ::1] uv = uniforms
    cdef long long[::1] ov = out
    cdef long long[::1] perm = perm_arr
    cdef Py_ssize_t t, i, j, slot, col
    cdef long long tmp, correct
    for t in range(trials):
        for i in range(n):
            perm[i] = i
        col = 0
        for i in range(n - 1, 0, -1):
            j = <Py_ssize_t>(uv[t, col] * (i + 1))
            col += 1
            tmp = perm[i]
            perm[i] = perm[j]
            perm[j] = tmp
        correct = 0
        for slot in range(n):
            if perm[slot] == slot:
                correct += 1
            elif <int>(uv[t, n - 1 + slot] * 4.0) == 0:
                correct += 1
        ov[t] = correct
    return out
