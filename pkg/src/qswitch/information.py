"""Entropies, the released-key information, and the Holevo bound of the signal.

The controller's disclosure is worth c(psi) = 2 - H(weights) bits: two bits
of Bell index minus the receiver's residual uncertainty about the prepared
state.  The receiver's ceiling on the sender's two encoded bits is the
Holevo quantity of the four equiprobable encoded states; without channel
noise the two coincide.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import channels, linalg, states

__all__ = [
    "NotADistribution",
    "shannon_entropy",
    "von_neumann_entropy",
    "key_information",
    "psi_for_key_information",
    "Ensemble",
    "signal_ensemble",
    "holevo",
    "bell_mutual_information",
]

_DIST_SUM_TOL = 1e-9
_NEGATIVE_DUST = -1e-12
_CHI_FLOOR = -1e-9


class NotADistribution(ValueError):
    """Input vector is not a probability distribution."""


def _entropy_of(clean):
    positive = clean[clean > 0.0]
    if not positive.size:
        return 0.0
    # an entry a rounding error above 1 would otherwise go slightly negative
    return max(float(-(positive * np.log2(positive)).sum()), 0.0)


def shannon_entropy(probs):
    """Base-2 Shannon entropy of a probability vector.

    Entries must be nonnegative (dust above -1e-12 is zeroed) and sum to 1
    within 1e-9; NotADistribution otherwise.
    """
    probs = np.asarray(probs, dtype=np.float64).ravel()
    if probs.size == 0:
        raise NotADistribution("empty probability vector")
    if probs.min() < _NEGATIVE_DUST:
        raise NotADistribution(f"negative probability {probs.min():.6g}")
    total = probs.sum()
    if abs(total - 1.0) > _DIST_SUM_TOL:
        raise NotADistribution(f"probabilities sum to {total:.12g}, not 1")
    return _entropy_of(np.where(probs < 0.0, 0.0, probs))


def von_neumann_entropy(rho):
    """Base-2 von Neumann entropy of a density matrix."""
    rho = linalg.check_density_matrix(rho)
    eigs = linalg.hermitian_eigenvalues(rho)
    return _entropy_of(linalg.clamp_spectrum(eigs))


def key_information(psi):
    """Bits the controller's disclosure is worth: c = 2 - H(Werner weights)."""
    w_major, w_minor = states.werner_weights(psi)
    return 2.0 - shannon_entropy([w_major, w_minor, w_minor, w_minor])


def psi_for_key_information(c):
    """Invert ``key_information`` on [0, 2] by bisection."""
    c = float(c)
    if not 0.0 <= c <= 2.0:
        raise ValueError(f"key information must lie in [0, 2], got {c:.6g}")
    lo, hi = 0.0, math.pi / 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if key_information(mid) < c:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class Ensemble:
    """A finite ensemble of quantum states with prior probabilities."""

    priors: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        priors = np.asarray(self.priors, dtype=np.float64)
        mats = np.asarray(self.states, dtype=np.complex128)
        if priors.ndim != 1 or priors.size == 0:
            raise ValueError("priors must be a nonempty vector")
        if priors.min() < 0.0:
            raise NotADistribution(f"negative prior {priors.min():.6g}")
        if abs(priors.sum() - 1.0) > _DIST_SUM_TOL:
            raise NotADistribution(f"priors sum to {priors.sum():.12g}, not 1")
        if mats.ndim != 3 or mats.shape[0] != priors.size:
            raise ValueError("states must be a (m, d, d) stack matching priors")
        if mats.shape[1] != mats.shape[2]:
            raise ValueError("ensemble states must be square")
        priors = priors.copy()
        mats = mats.copy()
        priors.flags.writeable = False
        mats.flags.writeable = False
        object.__setattr__(self, "priors", priors)
        object.__setattr__(self, "states", mats)

    @classmethod
    def from_members(cls, members):
        """Build from a list of (prior, state) pairs."""
        priors = [p for p, _ in members]
        mats = [s for _, s in members]
        return cls(np.asarray(priors), np.stack([np.asarray(s) for s in mats]))

    @property
    def members(self):
        return list(zip(self.priors.tolist(), self.states))

    def average_state(self):
        return np.einsum("i,ijk->jk", self.priors, self.states)


def signal_ensemble(psi, channel=None):
    """The four equiprobable encoded states the receiver must distinguish.

    Each member encodes one two-bit message into the Werner member at
    ``psi`` and, when a channel is given, sends the first qubit through it.
    """
    base = states.werner_state(psi)
    members = np.stack(
        [states.dense_encode(base, code) for code in states.BELL_INDEX_ORDER]
    )
    if channel is not None:
        members = channels.apply_channel_batch(members, channel, target="first")
    return Ensemble(np.full(4, 0.25), members)


def holevo(ensemble):
    """Holevo quantity S(sum_i p_i rho_i) - sum_i p_i S(rho_i), in bits.

    Clamps rounding dust in [-1e-9, 0) to zero; a more negative value is an
    error in the inputs and raises.
    """
    if not isinstance(ensemble, Ensemble):
        ensemble = Ensemble.from_members(ensemble)
    stack = np.concatenate(
        [ensemble.average_state()[None, :, :], ensemble.states], axis=0
    )
    spectra = linalg.hermitian_eigenvalues_batch(stack)
    entropies = [_entropy_of(linalg.clamp_spectrum(row)) for row in spectra]
    chi = entropies[0] - float(np.dot(ensemble.priors, entropies[1:]))
    if chi < _CHI_FLOOR:
        raise ValueError(f"Holevo quantity {chi:.6g} below the rounding floor")
    return max(chi, 0.0)


def bell_mutual_information(ensemble):
    """Mutual information between the member label and a Bell measurement.

    I(label; outcome) for the joint distribution p_i * tr(Pi_b rho_i).  For
    the noiseless signal ensemble this equals the released key information.
    """
    if not isinstance(ensemble, Ensemble):
        ensemble = Ensemble.from_members(ensemble)
    if ensemble.states.shape[1] != 4:
        raise ValueError("bell measurement needs two-qubit ensemble members")
    conditionals = states.bell_measure_batch(ensemble.states)
    marginal = ensemble.priors @ conditionals
    info = _entropy_of(marginal)
    for p, row in zip(ensemble.priors, conditionals):
        total = row.sum()
        if total > 0.0:
            info -= p * _entropy_of(row / total)
    return max(float(info), 0.0)
