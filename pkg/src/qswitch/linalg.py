"""Dense complex linear algebra for two-qubit work: products, traces, spectra.

Matrices are plain ``complex128`` ndarrays.  A density matrix is Hermitian
within 1e-10, has unit trace within 1e-10, and eigenvalues no lower than
-1e-10; ``clamp_spectrum`` maps that tolerated negative dust to exact zeros
before anything takes a logarithm.
"""

import numpy as np

from ._backend import kernels

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
EIGENVALUE_FLOOR = -1e-10

__all__ = [
    "HERMITICITY_TOL",
    "TRACE_TOL",
    "EIGENVALUE_FLOOR",
    "tensor_product",
    "partial_trace",
    "hermitian_eigenvalues",
    "hermitian_eigenvalues_batch",
    "is_hermitian",
    "check_density_matrix",
    "clamp_spectrum",
]


def _as_square(m, name="matrix"):
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {m.shape}")
    return m


def tensor_product(a, b):
    """Kronecker product of two square matrices.

    Entry ((i*dB + k), (j*dB + l)) equals a[i, j] * b[k, l], so the first
    factor owns the slow (leftmost) index.
    """
    a = _as_square(a, "a")
    b = _as_square(b, "b")
    return np.kron(a, b)


def partial_trace(rho, keep):
    """Trace out one qubit of a 4x4 two-qubit operator.

    Parameters
    ----------
    rho : array_like, shape (4, 4)
    keep : str
        "first" keeps the slow subsystem, "second" the fast one.
    """
    rho = _as_square(rho, "rho")
    if rho.shape != (4, 4):
        raise ValueError(f"partial_trace needs a 4x4 matrix, got shape {rho.shape}")
    r = rho.reshape(2, 2, 2, 2)
    if keep == "first":
        return np.einsum("abcb->ac", r).copy()
    if keep == "second":
        return np.einsum("abac->bc", r).copy()
    raise ValueError(f"keep must be 'first' or 'second', got {keep!r}")


def is_hermitian(m, tol=HERMITICITY_TOL):
    """Whether max |M - M^dag| stays within tol."""
    m = _as_square(m)
    return bool(np.abs(m - m.conj().T).max() <= tol)


def hermitian_eigenvalues(m, tol=1e-12, max_sweeps=100):
    """Real eigenvalues of a Hermitian 2x2 or 4x4 matrix, sorted descending.

    The input must be Hermitian within 1e-10 (ValueError otherwise) and is
    symmetrized as (M + M^dag)/2 before solving.  2x2 inputs use the closed
    form; 4x4 inputs run a cyclic Jacobi iteration on the real symmetric
    8x8 embedding of the matrix, converged when the off-diagonal Frobenius
    norm drops below ``tol``.
    """
    m = _as_square(m)
    if not is_hermitian(m):
        raise ValueError("matrix is not Hermitian within 1e-10")
    sym = 0.5 * (m + m.conj().T)
    return kernels.eigvalsh_batch(sym[None, :, :], tol, max_sweeps)[0]


def hermitian_eigenvalues_batch(mats, tol=1e-12, max_sweeps=100):
    """Row-wise ``hermitian_eigenvalues`` over a (m, n, n) stack."""
    mats = np.asarray(mats, dtype=np.complex128)
    if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
        raise ValueError("expected a (m, n, n) matrix stack")
    if mats.shape[0] and np.abs(mats - mats.conj().transpose(0, 2, 1)).max() > HERMITICITY_TOL:
        raise ValueError("stack contains a matrix that is not Hermitian within 1e-10")
    sym = 0.5 * (mats + mats.conj().transpose(0, 2, 1))
    return kernels.eigvalsh_batch(sym, tol, max_sweeps)


def check_density_matrix(rho, name="rho"):
    """Validate Hermiticity and unit trace; return the array as complex128.

    Positivity is not rechecked here (it costs an eigensolve); routines that
    already have the spectrum apply ``clamp_spectrum`` instead.
    """
    rho = _as_square(rho, name)
    if not is_hermitian(rho):
        raise ValueError(f"{name} is not Hermitian within {HERMITICITY_TOL:g}")
    tr = rho.trace()
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValueError(f"{name} trace {tr:.12g} differs from 1 beyond {TRACE_TOL:g}")
    return rho


def clamp_spectrum(eigs):
    """Zero out eigenvalues in [-1e-10, 0); reject anything more negative."""
    eigs = np.asarray(eigs, dtype=np.float64)
    low = eigs.min() if eigs.size else 0.0
    if low < EIGENVALUE_FLOOR:
        raise ValueError(
            f"eigenvalue {low:.6g} below the tolerated floor {EIGENVALUE_FLOOR:g}"
        )
    return np.where(eigs < 0.0, 0.0, eigs)
