"""Controlled-key sessions: prepare, scramble, encode, reveal, decode, attack.

The controller prepares Bell pairs and keeps their identities secret.  The
sender encodes two-bit messages on her halves; the receiver can decode only
once the controller releases the initial indices (and, for scrambled
sessions, the pair ordering).  Every run leaves a line-oriented transcript.

Transcript format, version ``qswitch-transcript/1``: a header line
``qswitch-transcript/1<TAB>seed=<seed>`` followed by one tab-separated
event per line, fields after the tag as ``key=value``.  Tags in phase
order: PREPARE, SCRAMBLE, ENCODE, CHANNEL, REVEAL, MEASURE, DECODE.  The
tag DECOY is reserved for check-bit events and never emitted here.  All
slot and pair numbering is zero-based.

Randomness: a session seed feeds one SeedSequence whose spawned children
drive preparation, scrambling, message generation, and measurement in that
order, so e.g. an ideal and a scrambled run of the same seed prepare
identical pairs and encode identical messages.
"""

from dataclasses import dataclass, field

import numpy as np

from . import channels, states
from ._backend import kernels

__all__ = [
    "TRANSCRIPT_SCHEMA",
    "ProtocolError",
    "PairRegister",
    "PermutationKey",
    "Reveal",
    "DecodeResult",
    "SessionTranscript",
    "SessionConfig",
    "SessionResult",
    "charlie_prepare",
    "scramble",
    "alice_encode",
    "charlie_reveal",
    "bob_decode",
    "collusion_attack",
    "collusion_mc",
    "collusion_expected_accuracy",
    "run_session",
]

TRANSCRIPT_SCHEMA = "qswitch-transcript/1"

_RESERVED_TAGS = ("DECOY",)


class ProtocolError(RuntimeError):
    """Protocol phase misuse: out-of-order or impossible operations."""


@dataclass
class PairRegister:
    """The controller's bookkeeping for one session of n Bell pairs.

    All arrays are indexed by true pair id.  ``indices`` holds the secret
    initial Bell indices, ``states`` the evolving joint states,
    ``alice_slots``/``bob_slots`` the physical storage slot of each half,
    and ``perm`` (set after scrambling) maps the receiver's slot to the
    true pair id stored there.
    """

    indices: np.ndarray
    states: np.ndarray
    alice_slots: np.ndarray
    bob_slots: np.ndarray
    psi: float | None = None
    scrambled: bool = False
    perm: np.ndarray | None = None
    encoded: bool = False
    messages: np.ndarray | None = None
    channel_digest: str | None = None

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=np.uint8)
        self.states = np.asarray(self.states, dtype=np.complex128)
        self.alice_slots = np.asarray(self.alice_slots, dtype=np.intp)
        self.bob_slots = np.asarray(self.bob_slots, dtype=np.intp)
        n = self.indices.shape[0]
        if n < 1 or self.indices.shape != (n, 2):
            raise ValueError("indices must be a nonempty (n, 2) bit array")
        if self.states.shape != (n, 4, 4):
            raise ValueError("states must have shape (n, 4, 4)")
        if self.alice_slots.shape != (n,) or self.bob_slots.shape != (n,):
            raise ValueError("slot arrays must have shape (n,)")

    @property
    def n(self):
        return self.indices.shape[0]

    def pair(self, i):
        """(index, joint_state, alice_slot, bob_slot) for pair i."""
        return (
            (int(self.indices[i, 0]), int(self.indices[i, 1])),
            self.states[i],
            int(self.alice_slots[i]),
            int(self.bob_slots[i]),
        )


@dataclass(frozen=True)
class PermutationKey:
    """Bijection from the receiver's slot to the true pair id stored there."""

    perm: tuple

    def __post_init__(self):
        perm = tuple(int(x) for x in self.perm)
        if sorted(perm) != list(range(len(perm))):
            raise ValueError(f"not a permutation of 0..{len(perm) - 1}: {perm!r}")
        object.__setattr__(self, "perm", perm)

    def __len__(self):
        return len(self.perm)

    def inverse(self):
        """Map from true pair id to the receiver's slot."""
        inv = [0] * len(self.perm)
        for slot, pair_id in enumerate(self.perm):
            inv[pair_id] = slot
        return tuple(inv)


@dataclass(frozen=True, eq=False)
class Reveal:
    """The controller's disclosure: initial indices, plus the pair ordering
    when the session was scrambled and the controller chose to release it."""

    indices: np.ndarray
    perm: tuple | None = None


@dataclass(frozen=True, eq=False)
class DecodeResult:
    """Receiver-side output: Bell outcomes, decoded codes, and the fraction
    matching the sender's messages."""

    outcomes: np.ndarray
    codes: np.ndarray
    accuracy: float
    events: tuple = field(repr=False, default=())


@dataclass(frozen=True)
class SessionTranscript:
    """A finished session's event log; ``text()`` is byte-stable per seed."""

    seed: int
    events: tuple

    def header(self):
        return f"{TRANSCRIPT_SCHEMA}\tseed={self.seed}"

    def text(self):
        return "\n".join((self.header(), *self.events)) + "\n"

    def write(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.text())


def charlie_prepare(n, rng, psi=None):
    """Draw n Bell pairs with uniform secret indices.

    With ``psi`` given, each pair is the Werner member anchored on its drawn
    index; otherwise pairs are pure Bell projectors.  A batch where every
    index came out identical is redrawn whole, so the session never leaks
    by defaulting to a constant key.  Needs n >= 2.
    """
    if n < 2:
        raise ValueError(f"a session needs at least 2 pairs, got {n}")
    draws = rng.integers(0, 4, size=n)
    while (draws == draws[0]).all():
        draws = rng.integers(0, 4, size=n)
    indices = np.stack([draws >> 1, draws & 1], axis=1).astype(np.uint8)
    if psi is None:
        anchors = np.stack(
            [states.bell_projector(code) for code in states.BELL_INDEX_ORDER]
        )
    else:
        base = states.werner_state(psi)
        anchors = np.stack(
            [states.dense_encode(base, code) for code in states.BELL_INDEX_ORDER]
        )
    return PairRegister(
        indices=indices,
        states=anchors[draws],
        alice_slots=np.arange(n, dtype=np.intp),
        bob_slots=np.arange(n, dtype=np.intp),
        psi=psi,
    )


def scramble(reg, rng):
    """Shuffle the order of the receiver-bound halves (Fisher-Yates).

    Returns the PermutationKey mapping the receiver's slot to the true pair
    id; the register records it and the new bob_slots.  Must run before
    encoding and at most once per session.
    """
    if reg.encoded:
        raise ProtocolError("scrambling must happen before encoding")
    if reg.scrambled:
        raise ProtocolError("register already scrambled")
    n = reg.n
    order = np.arange(n, dtype=np.int64)
    if n > 1:
        uniforms = rng.random(n - 1)
        col = 0
        for i in range(n - 1, 0, -1):
            j = int(uniforms[col] * (i + 1))
            col += 1
            order[i], order[j] = order[j], order[i]
    inv = np.empty(n, dtype=np.intp)
    inv[order] = np.arange(n, dtype=np.intp)
    reg.bob_slots = inv
    reg.perm = order.copy()
    reg.scrambled = True
    return PermutationKey(tuple(int(x) for x in order))


def alice_encode(reg, messages, channel=None):
    """Encode one two-bit message per pair on the sender's halves.

    Mutates the register states in place (Pauli conjugation on the first
    qubit, then the optional channel on the same qubit) and returns the
    transcript events.  Message count must match the register.
    """
    if reg.encoded:
        raise ProtocolError("register already encoded")
    messages = np.asarray(messages)
    if messages.shape != (reg.n, 2):
        raise ValueError(
            f"need {reg.n} two-bit messages, got array of shape {messages.shape}"
        )
    if not np.isin(messages, (0, 1)).all():
        raise ValueError("messages must be bits")
    messages = messages.astype(np.uint8)
    codes = (messages[:, 0].astype(np.intp) << 1) | messages[:, 1]
    for c in range(4):
        mask = codes == c
        if mask.any():
            u = states.lifted_pauli(states.BELL_INDEX_ORDER[c])
            reg.states[mask] = u @ reg.states[mask] @ u.conj().T
    digest = None
    if channel is not None:
        reg.states = channels.apply_channel_batch(reg.states, channel, target="first")
        digest = channels.kraus_digest(channel)
        reg.channel_digest = digest
    events = []
    for i in range(reg.n):
        events.append(f"ENCODE\tslot={i}\ta={messages[i, 0]}\tb={messages[i, 1]}")
        if digest is not None:
            events.append(f"CHANNEL\tslot={i}\tparams={digest}")
    reg.encoded = True
    reg.messages = messages.copy()
    return events


def charlie_reveal(reg, include_perm=False):
    """Release the initial Bell indices, optionally with the pair ordering.

    Refuses to run before encoding (the disclosure is what unlocks the
    already-sent signal) and refuses ``include_perm`` on a session that was
    never scrambled.
    """
    if not reg.encoded:
        raise ProtocolError("nothing to unlock: encoding has not happened yet")
    if include_perm and not reg.scrambled:
        raise ValueError("session was not scrambled; there is no ordering to reveal")
    perm = tuple(int(x) for x in reg.perm) if include_perm else None
    return Reveal(indices=reg.indices.copy(), perm=perm)


def _measure_codes(joint_states, revealed_indices, rng):
    probs = states.bell_measure_batch(joint_states)
    probs = probs / probs.sum(axis=1, keepdims=True)
    picks = kernels.categorical_rows(probs, rng.random(joint_states.shape[0]))
    outcomes = np.stack([picks >> 1, picks & 1], axis=1).astype(np.uint8)
    codes = outcomes ^ revealed_indices
    return outcomes, codes


def bob_decode(reg, reveal, rng):
    """Measure every pair in the Bell basis and decode against the reveal.

    A scrambled session without the revealed ordering cannot be paired up
    and raises ProtocolError; the quantitative story of guessing anyway is
    ``collusion_attack``.
    """
    if not reg.encoded:
        raise ProtocolError("cannot decode before encoding")
    if reg.scrambled and reveal.perm is None:
        raise ProtocolError(
            "scrambled session: decoding needs the revealed pair ordering"
        )
    outcomes, codes = _measure_codes(reg.states, reveal.indices, rng)
    accuracy = float((codes == reg.messages).all(axis=1).mean())
    events = []
    for i in range(reg.n):
        events.append(f"MEASURE\tslot={i}\tj={outcomes[i, 0]}\tk={outcomes[i, 1]}")
        events.append(f"DECODE\tslot={i}\ta={codes[i, 0]}\tb={codes[i, 1]}")
    return DecodeResult(
        outcomes=outcomes, codes=codes, accuracy=accuracy, events=tuple(events)
    )


def _collusion_details(reg, rng):
    """Identity-pairing attack on a scrambled register, full result."""
    if not reg.encoded:
        raise ProtocolError("cannot attack before encoding")
    if not reg.scrambled or reg.perm is None:
        raise ProtocolError("collusion attack targets scrambled sessions")
    n = reg.n
    order = np.asarray(reg.perm, dtype=np.intp)
    fixed = order == np.arange(n)
    joint = np.empty((n, 4, 4), dtype=np.complex128)
    joint[fixed] = reg.states[fixed]
    loose = ~fixed
    if loose.any():
        r5 = reg.states.reshape(n, 2, 2, 2, 2)
        sender_half = np.einsum("nabcb->nac", r5)
        receiver_half = np.einsum("nabac->nbc", r5)
        pairs_a = sender_half[loose]
        pairs_b = receiver_half[order[loose]]
        joint[loose] = np.einsum("nik,njl->nijkl", pairs_a, pairs_b).reshape(
            -1, 4, 4
        )
    outcomes, codes = _measure_codes(joint, reg.indices, rng)
    accuracy = float((codes == reg.messages).all(axis=1).mean())
    events = []
    for i in range(n):
        events.append(f"MEASURE\tslot={i}\tj={outcomes[i, 0]}\tk={outcomes[i, 1]}")
        events.append(f"DECODE\tslot={i}\ta={codes[i, 0]}\tb={codes[i, 1]}")
    return DecodeResult(
        outcomes=outcomes, codes=codes, accuracy=accuracy, events=tuple(events)
    )


def collusion_attack(reg, rng):
    """Sender and receiver decode a scrambled session assuming identity pairing.

    Each receiver slot is measured jointly with the sender half of the same
    slot number; mispaired slots hold a product of half-traced marginals.
    Returns the fraction of messages recovered.  For pure noiseless pairs
    the expected accuracy is 1/4 + 3/(4n); a single-pair session is
    trivially unscrambled and yields 1.0.
    """
    return _collusion_details(reg, rng).accuracy


def collusion_expected_accuracy(n):
    """Expected identity-pairing accuracy on pure pairs: 1/4 + 3/(4n)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return 0.25 + 0.75 / n


def collusion_mc(n, trials, rng):
    """Monte-Carlo mean collusion accuracy over fresh pure-pair sessions.

    Each trial draws a scrambled ordering and per-slot Bell outcomes from a
    pre-generated uniform block (fixed layout: n-1 permutation draws, then n
    outcome draws), so results are reproducible and backend-independent.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    total = 0
    chunk = max(1, min(trials, 20_000_000 // max(2 * n - 1, 1)))
    done = 0
    while done < trials:
        take = min(chunk, trials - done)
        uniforms = rng.random((take, 2 * n - 1))
        total += int(kernels.collusion_counts(uniforms, n).sum())
        done += take
    return total / (trials * n)


@dataclass(frozen=True, eq=False)
class SessionConfig:
    """Everything a reproducible session needs.

    ``psi`` of None prepares pure Bell pairs; ``reveal_perm`` of None means
    "reveal the ordering exactly when the session is scrambled and nobody
    is attacking".  ``attack`` is None or "collusion".  ``messages`` of
    None draws random message bits from the session's own stream.
    """

    n: int
    psi: float | None = None
    channel: channels.KrausSet | None = None
    scrambled: bool = False
    reveal_perm: bool | None = None
    attack: str | None = None
    messages: np.ndarray | None = None
    seed: int = 0


@dataclass(frozen=True, eq=False)
class SessionResult:
    """Outcome of ``run_session``."""

    config: SessionConfig
    transcript: SessionTranscript
    messages: np.ndarray
    decoded: np.ndarray
    accuracy: float
    permutation: tuple | None


def run_session(config):
    """Run one full session deterministically from its config.

    Phases in order: prepare, scramble (optional), encode (+ channel),
    reveal, then decode or attack.  Identical configs produce byte-identical
    transcripts.  A scrambled session that withholds the ordering and names
    no attack fails at the decode step with ProtocolError.
    """
    if config.attack not in (None, "collusion"):
        raise ValueError(f"unknown attack {config.attack!r}")
    if config.attack is not None and not config.scrambled:
        raise ValueError("an attack needs a scrambled session to target")
    reveal_perm = config.reveal_perm
    if reveal_perm is None:
        reveal_perm = config.scrambled and config.attack is None
    reveal_perm = bool(reveal_perm)
    if reveal_perm and not config.scrambled:
        raise ValueError("cannot reveal an ordering that was never scrambled")
    if reveal_perm and config.attack is not None:
        raise ValueError("an attack models a withheld ordering; cannot reveal it")

    seq = np.random.SeedSequence(config.seed)
    rng_prepare, rng_scramble, rng_messages, rng_measure = (
        np.random.Generator(np.random.PCG64(child)) for child in seq.spawn(4)
    )

    reg = charlie_prepare(config.n, rng_prepare, psi=config.psi)
    events = [f"PREPARE\tn={reg.n}\tindices=hidden"]

    permutation = None
    if config.scrambled:
        permutation = scramble(reg, rng_scramble).perm
        events.append("SCRAMBLE\tapplied=1")
    else:
        events.append("SCRAMBLE\tapplied=0")

    if config.messages is None:
        messages = rng_messages.integers(0, 2, size=(reg.n, 2), dtype=np.uint8)
    else:
        messages = np.asarray(config.messages)
    events.extend(alice_encode(reg, messages, channel=config.channel))

    reveal = charlie_reveal(reg, include_perm=reveal_perm)
    idx_text = ",".join(f"{j}{k}" for j, k in reg.indices)
    perm_text = "none" if reveal.perm is None else ",".join(map(str, reveal.perm))
    events.append(f"REVEAL\tindices={idx_text}\tperm={perm_text}")

    if config.attack == "collusion":
        result = _collusion_details(reg, rng_measure)
    else:
        result = bob_decode(reg, reveal, rng_measure)
    events.extend(result.events)

    transcript = SessionTranscript(seed=config.seed, events=tuple(events))
    return SessionResult(
        config=config,
        transcript=transcript,
        messages=reg.messages,
        decoded=result.codes,
        accuracy=result.accuracy,
        permutation=permutation,
    )
