"""qswitch: a controlled-key dense-coding protocol, its noise, and its leaks.

A controller prepares Bell pairs whose identities stay secret; a sender
encodes two-bit messages on her halves; the receiver can read them only
once the controller releases the pair identities (and, in the scrambled
variant, the pair ordering).  The package simulates the whole session,
quantifies what the disclosure is worth (released key information c,
Holevo quantity of the signal ensemble), models the transmission qubit's
passage through a squeezed thermal bath as a two-branch damping channel,
and prices the receiver's best cheat (the collusion attack).

Numerics run on a compiled Cython kernel when available and a pure-NumPy
twin otherwise; set QSWITCH_BACKEND=python|compiled|auto to choose.
"""

from ._backend import backend_name
from .channels import (
    BathConfig,
    CompletenessViolation,
    KrausSet,
    ProviderDomainError,
    SGADParams,
    apply_channel,
    identity_kraus,
    sgad_kraus,
    sgad_params_from_bath,
    squeezed_bath_params,
    verify_completeness,
)
from .information import (
    Ensemble,
    NotADistribution,
    bell_mutual_information,
    holevo,
    key_information,
    psi_for_key_information,
    shannon_entropy,
    signal_ensemble,
    von_neumann_entropy,
)
from .linalg import hermitian_eigenvalues, partial_trace, tensor_product
from .protocol import (
    PairRegister,
    PermutationKey,
    ProtocolError,
    SessionConfig,
    SessionResult,
    SessionTranscript,
    alice_encode,
    bob_decode,
    charlie_prepare,
    charlie_reveal,
    collusion_attack,
    collusion_expected_accuracy,
    collusion_mc,
    run_session,
    scramble,
)
from .states import (
    BELL_INDEX_ORDER,
    bell_measure,
    bell_projector,
    decode_message,
    dense_encode,
    pauli_matrix,
    werner_state,
    werner_weights,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "backend_name",
    "BathConfig",
    "CompletenessViolation",
    "KrausSet",
    "ProviderDomainError",
    "SGADParams",
    "apply_channel",
    "identity_kraus",
    "sgad_kraus",
    "sgad_params_from_bath",
    "squeezed_bath_params",
    "verify_completeness",
    "Ensemble",
    "NotADistribution",
    "bell_mutual_information",
    "holevo",
    "key_information",
    "psi_for_key_information",
    "shannon_entropy",
    "signal_ensemble",
    "von_neumann_entropy",
    "hermitian_eigenvalues",
    "partial_trace",
    "tensor_product",
    "PairRegister",
    "PermutationKey",
    "ProtocolError",
    "SessionConfig",
    "SessionResult",
    "SessionTranscript",
    "alice_encode",
    "bob_decode",
    "charlie_prepare",
    "charlie_reveal",
    "collusion_attack",
    "collusion_expected_accuracy",
    "collusion_mc",
    "run_session",
    "scramble",
    "BELL_INDEX_ORDER",
    "bell_measure",
    "bell_projector",
    "decode_message",
    "dense_encode",
    "pauli_matrix",
    "werner_state",
    "werner_weights",
]
