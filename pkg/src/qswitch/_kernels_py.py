"""Pure-NumPy kernels: batch eigensolver, Kraus application, sampling, collusion trials.

This module is the fallback twin of the compiled extension ``_kernels``.
Both expose the same four functions with the same semantics.  Floating-point
eigenvalues may differ between backends at rounding level; integer decisions
derived from uniform draws (``categorical_rows``, ``collusion_counts``) are
bit-identical because both backends consume the same pre-generated uniform
blocks with the same index arithmetic.
"""

import numpy as np


def _as_stack(mats):
    mats = np.asarray(mats, dtype=np.complex128)
    if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
        raise ValueError("expected a (m, n, n) matrix stack")
    return mats


def eigvalsh_batch(mats, tol=1e-12, max_sweeps=100):
    """Eigenvalues of a stack of Hermitian matrices, each row sorted descending.

    Supports n = 2 (closed form) and n = 4 (cyclic Jacobi on the real
    symmetric 8x8 embedding [[A, -B], [B, A]] of M = A + iB).  The input is
    symmetrized internally; callers are responsible for rejecting matrices
    that are not Hermitian to begin with.

    Parameters
    ----------
    mats : array_like, shape (m, n, n)
    tol : float
        Convergence threshold on the off-diagonal Frobenius norm.
    max_sweeps : int
        Sweep budget; exceeding it raises RuntimeError.
    """
    mats = _as_stack(mats)
    m, n = mats.shape[0], mats.shape[1]
    out = np.empty((m, n), dtype=np.float64)
    if m == 0:
        return out
    if n == 2:
        a00 = mats[:, 0, 0].real
        a11 = mats[:, 1, 1].real
        od = 0.5 * (mats[:, 0, 1] + np.conj(mats[:, 1, 0]))
        mean = 0.5 * (a00 + a11)
        # sum of squares spelled out to round exactly like the compiled twin
        rad = np.sqrt((0.5 * (a00 - a11)) ** 2 + od.real**2 + od.imag**2)
        out[:, 0] = mean + rad
        out[:, 1] = mean - rad
        return out
    if n != 4:
        raise ValueError("only 2x2 and 4x4 matrices are supported")

    re = mats.real
    im = mats.imag
    a = 0.5 * (re + re.transpose(0, 2, 1))
    b = 0.5 * (im - im.transpose(0, 2, 1))
    big = 2 * n
    c = np.empty((m, big, big), dtype=np.float64)
    c[:, :n, :n] = a
    c[:, n:, n:] = a
    c[:, :n, n:] = -b
    c[:, n:, :n] = b

    # rotations below this size cannot push the off-norm above tol
    skip = tol / (4.0 * big)
    pairs = [(p, q) for p in range(big) for q in range(p + 1, big)]
    diag_idx = np.arange(big)
    # summing off-diagonal squares directly avoids the cancellation floor
    # of total^2 - diag^2, which stalls around sqrt(eps) * norm
    offmask = 1.0 - np.eye(big)
    converged = False
    for _ in range(max_sweeps):
        off2 = np.einsum("mij,mij,ij->m", c, c, offmask)
        if np.sqrt(np.maximum(off2, 0.0)).max() <= tol:
            converged = True
            break
        for p, q in pairs:
            apq = c[:, p, q]
            mask = np.abs(apq) > skip
            if not mask.any():
                continue
            denom = np.where(mask, 2.0 * apq, 1.0)
            theta = np.where(mask, (c[:, q, q] - c[:, p, p]) / denom, 0.0)
            sign = np.where(theta >= 0.0, 1.0, -1.0)
            t = sign / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            t = np.where(mask, t, 0.0)
            cs = 1.0 / np.sqrt(t * t + 1.0)
            sn = t * cs
            rowp = c[:, p, :].copy()
            rowq = c[:, q, :].copy()
            c[:, p, :] = cs[:, None] * rowp - sn[:, None] * rowq
            c[:, q, :] = sn[:, None] * rowp + cs[:, None] * rowq
            colp = c[:, :, p].copy()
            colq = c[:, :, q].copy()
            c[:, :, p] = cs[:, None] * colp - sn[:, None] * colq
            c[:, :, q] = sn[:, None] * colp + cs[:, None] * colq
    else:
        converged = False
    if not converged:
        off2 = np.einsum("mij,mij,ij->m", c, c, offmask)
        if np.sqrt(np.maximum(off2, 0.0)).max() > tol:
            raise RuntimeError("Jacobi eigensolver failed to converge")

    diag = c[:, diag_idx, diag_idx]
    # embedding doubles every eigenvalue; descending sort puts twins adjacent
    out[:] = np.sort(diag, axis=1)[:, ::-1][:, ::2]
    return out


def kraus_apply_batch(states, ops):
    """Apply sum_k E_k rho E_k^dag to every state in a stack.

    states: (m, d, d) complex, ops: (k, d, d) complex with the same d.
    """
    states = _as_stack(states)
    ops = _as_stack(ops)
    if states.shape[1] != ops.shape[1]:
        raise ValueError("state and operator dimensions differ")
    return np.einsum("kab,mbc,kdc->mad", ops, states, ops.conj(), optimize=True)


def categorical_rows(probs, uniforms):
    """Inverse-CDF sample one category per row of a probability table.

    probs: (m, k) nonnegative rows summing to ~1; uniforms: (m,) draws in
    [0, 1).  Row i yields the first j with cumsum(probs[i])[j] > uniforms[i],
    clamped to k-1 when rounding leaves the total slightly under 1.
    """
    probs = np.asarray(probs, dtype=np.float64)
    uniforms = np.asarray(uniforms, dtype=np.float64)
    if probs.ndim != 2 or uniforms.shape != (probs.shape[0],):
        raise ValueError("probs must be (m, k) and uniforms (m,)")
    cum = np.cumsum(probs, axis=1)
    idx = (uniforms[:, None] >= cum).sum(axis=1)
    return np.minimum(idx, probs.shape[1] - 1).astype(np.int64)


def collusion_counts(uniforms, n):
    """Correct-decode counts for identity-pairing attacks on scrambled runs.

    Each row of ``uniforms`` (shape (trials, 2n-1), entries in [0, 1)) drives
    one simulated session: the first n-1 draws build a Fisher-Yates
    permutation of the n pair slots, the remaining n draws pick a uniform
    Bell outcome per slot.  A slot decodes correctly when the permutation
    fixes it (the adversary's pairing is then the true pairing) or, when
    mispaired, with probability 1/4 (the mispaired joint state is maximally
    mixed, so the sampled outcome matches the true code in exactly one of
    four cases).  The outcome draw for a fixed slot is consumed but unused,
    keeping the consumption layout independent of the permutation.
    """
    uniforms = np.asarray(uniforms, dtype=np.float64)
    if n < 1:
        raise ValueError("n must be at least 1")
    if uniforms.ndim != 2 or uniforms.shape[1] != 2 * n - 1:
        raise ValueError("uniform block must have shape (trials, 2n-1)")
    trials = uniforms.shape[0]
    perm = np.tile(np.arange(n, dtype=np.int64), (trials, 1))
    rows = np.arange(trials)
    col = 0
    for i in range(n - 1, 0, -1):
        j = (uniforms[:, col] * (i + 1)).astype(np.int64)
        col += 1
        tmp = perm[rows, i].copy()
        perm[rows, i] = perm[rows, j]
        perm[rows, j] = tmp
    fixed = perm == np.arange(n, dtype=np.int64)
    guess = (uniforms[:, n - 1 : 2 * n - 1] * 4.0).astype(np.int64) == 0
    return (fixed | guess).sum(axis=1).astype(np.int64)
