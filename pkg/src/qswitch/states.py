"""Bell pairs, Pauli encoding, the Werner family, and Bell-basis measurement.

A Bell index is a bit pair (j, k): j is the parity bit, k the phase bit.
The four kets, in the computational basis |00>, |01>, |10>, |11> with the
first (Alice's) qubit owning the slow index, are

    (0, 0): (|00> + |11>) / sqrt(2)
    (0, 1): (|00> - |11>) / sqrt(2)
    (1, 0): (|01> + |10>) / sqrt(2)
    (1, 1): (|01> - |10>) / sqrt(2)

A message is likewise a bit pair (a, b); encoding applies the Pauli with
that code to the first qubit and shifts index (j, k) to (j^a, k^b).
"""

import numpy as np

from . import linalg
from ._backend import kernels

__all__ = [
    "BELL_INDEX_ORDER",
    "bell_projector",
    "pauli_matrix",
    "dense_encode",
    "werner_weights",
    "werner_state",
    "bell_measure",
    "sample_bell_index",
    "decode_message",
]

BELL_INDEX_ORDER = ((0, 0), (0, 1), (1, 0), (1, 1))

_SQRT_HALF = 1.0 / np.sqrt(2.0)

PAULI_I = np.eye(2, dtype=np.complex128)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)

_PAULI_BY_CODE = {
    (0, 0): PAULI_I,
    (0, 1): PAULI_Z,
    (1, 0): PAULI_X,
    (1, 1): PAULI_Y,
}


def _check_bit_pair(value, name):
    try:
        j, k = value
    except (TypeError, ValueError):
        raise ValueError(f"{name} must be a pair of bits, got {value!r}") from None
    if j not in (0, 1) or k not in (0, 1):
        raise ValueError(f"{name} bits must be 0 or 1, got {value!r}")
    return int(j), int(k)


def _bell_ket(j, k):
    ket = np.zeros(4, dtype=np.complex128)
    sign = -1.0 if k else 1.0
    if j == 0:
        ket[0] = _SQRT_HALF
        ket[3] = sign * _SQRT_HALF
    else:
        ket[1] = _SQRT_HALF
        ket[2] = sign * _SQRT_HALF
    return ket

_PROJECTORS = np.stack(
    [np.outer(_bell_ket(j, k), _bell_ket(j, k).conj()) for j, k in BELL_INDEX_ORDER]
)
_PROJECTORS.flags.writeable = False

_LIFTED_PAULI = np.stack(
    [linalg.tensor_product(_PAULI_BY_CODE[code], PAULI_I) for code in BELL_INDEX_ORDER]
)
_LIFTED_PAULI.flags.writeable = False


def bell_projector(idx):
    """Projector onto the Bell state with index (j, k), as a 4x4 array."""
    j, k = _check_bit_pair(idx, "idx")
    return _PROJECTORS[2 * j + k].copy()


def pauli_matrix(code):
    """The 2x2 Pauli assigned to message code (a, b): I, Z, X, Y in code order."""
    a, b = _check_bit_pair(code, "code")
    return _PAULI_BY_CODE[(a, b)].copy()


def lifted_pauli(code):
    """``pauli_matrix(code)`` acting on the first qubit of a pair: P (x) I."""
    a, b = _check_bit_pair(code, "code")
    return _LIFTED_PAULI[2 * a + b].copy()


def dense_encode(rho, code):
    """Conjugate a two-qubit state by the code's Pauli on the first qubit.

    Sends the Bell projector with index (j, k) to the one with index
    (j^a, k^b); any Bell-diagonal state keeps its weights, permuted.
    """
    rho = linalg._as_square(rho, "rho")
    if rho.shape != (4, 4):
        raise ValueError(f"dense_encode needs a 4x4 state, got shape {rho.shape}")
    a, b = _check_bit_pair(code, "code")
    u = _LIFTED_PAULI[2 * a + b]
    return u @ rho @ u.conj().T


def werner_weights(param):
    """Bell-basis weights (w_major, w_minor) of the Werner family member.

    w_major = 1/4 + (3/4) sin(param) sits on the anchor Bell state; the
    other three states share w_minor = (1 - w_major)/3 each.  param runs
    from 0 (maximally mixed) to pi/2 (pure).
    """
    param = float(param)
    if not 0.0 <= param <= np.pi / 2:
        raise ValueError(f"param must lie in [0, pi/2], got {param:.6g}")
    w_major = 0.25 + 0.75 * np.sin(param)
    w_minor = (1.0 - w_major) / 3.0
    return w_major, w_minor


def werner_state(param):
    """Werner family member anchored on Bell index (0, 0)."""
    w_major, w_minor = werner_weights(param)
    weights = np.array([w_major, w_minor, w_minor, w_minor])
    return np.einsum("i,ijk->jk", weights, _PROJECTORS)


def bell_measure(rho):
    """Bell-basis outcome distribution of a two-qubit state.

    Returns the four probabilities tr(Pi_{j,k} rho) in BELL_INDEX_ORDER.
    """
    rho = linalg.check_density_matrix(rho)
    if rho.shape != (4, 4):
        raise ValueError(f"bell_measure needs a 4x4 state, got shape {rho.shape}")
    probs = np.einsum("iab,ba->i", _PROJECTORS, rho).real
    return np.where(probs < 0.0, 0.0, probs)


def bell_measure_batch(states):
    """Row-wise ``bell_measure`` over a (m, 4, 4) stack, without revalidation."""
    return np.einsum("iab,mba->mi", _PROJECTORS, states).real.clip(min=0.0)


def sample_bell_index(probs, rng):
    """Draw one Bell index from a 4-outcome distribution by inverse CDF."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.shape != (4,):
        raise ValueError(f"probs must have shape (4,), got {probs.shape}")
    pick = int(kernels.categorical_rows(probs[None, :], rng.random(1))[0])
    return BELL_INDEX_ORDER[pick]


def decode_message(measured, revealed_initial):
    """Recover the message: bitwise XOR of measured and revealed indices."""
    j1, k1 = _check_bit_pair(measured, "measured")
    j0, k0 = _check_bit_pair(revealed_initial, "revealed_initial")
    return (j1 ^ j0, k1 ^ k0)
