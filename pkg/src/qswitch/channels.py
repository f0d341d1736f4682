"""Two-branch damping channels and the squeezed-thermal-bath parameter provider.

The channel family is a four-operator Kraus set with two branches.  Branch
weights p1 and p2 must sum to one for a complete channel.  Basis index 0 is
the level that decays: branch one damps with rate alpha (and back-excites
with beta), branch two damps with mu and back-excites with nu, each
off-diagonal operator carrying a free phase.

    E0 = sqrt(p1) * [[sqrt(1-alpha), 0], [0, sqrt(1-beta)]]
    E1 = sqrt(p1) * [[0, sqrt(beta)], [sqrt(alpha) e^{-i phi}, 0]]
    E2 = sqrt(p2) * [[sqrt(1-mu), 0], [0, sqrt(1-nu)]]
    E3 = sqrt(p2) * [[0, sqrt(nu)], [sqrt(mu) e^{-i theta}, 0]]

The provider maps a dissipative squeezed thermal bath (squeezing r, bath
temperature T, interaction time t, spontaneous rate gamma0, unit level
splitting) onto these parameters so that the Kraus map reproduces the exact
single-qubit relaxation: populations relax toward the bath's stationary
mixture at the squeezing-dressed rate while coherences decay with the
squeezing-modified envelope.
"""

import hashlib
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import linalg
from ._backend import kernels

__all__ = [
    "COMPLETENESS_TOL",
    "CompletenessViolation",
    "ProviderDomainError",
    "SGADParams",
    "BathConfig",
    "KrausSet",
    "identity_kraus",
    "sgad_kraus",
    "verify_completeness",
    "apply_channel",
    "apply_channel_batch",
    "kraus_digest",
    "squeezed_bath_params",
    "sgad_params_from_bath",
]

COMPLETENESS_TOL = 1e-9

# level splitting used by the bath provider (temperatures are in its units)
BATH_LEVEL_SPLITTING = 1.0

# post-solve certificate: the returned parameters must reproduce the bath's
# relaxation coefficients this tightly or the config is out of domain
_PROVIDER_RESIDUAL_TOL = 1e-9


class CompletenessViolation(Exception):
    """A Kraus set whose operators do not resolve the identity.

    Carries the scalar residual max|sum_k E_k^dag E_k - I| and the full
    residual matrix.
    """

    def __init__(self, residual, residual_matrix):
        super().__init__(
            f"Kraus completeness violated: max residual {residual:.6g}"
        )
        self.residual = float(residual)
        self.residual_matrix = residual_matrix


class ProviderDomainError(ValueError):
    """Bath configuration outside the representable domain of the channel family."""


def _check_unit_interval(value, name):
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value:.6g}")
    return value


@dataclass(frozen=True)
class SGADParams:
    """Parameters of the two-branch damping family.

    Branch weights p1, p2 and damping strengths alpha, beta, mu, nu each
    live in [0, 1]; phi and theta are the branch phases.  A complete channel
    additionally satisfies p1 + p2 = 1 within 1e-12; ``sgad_kraus`` enforces
    that, while the dataclass itself allows deliberately broken weights so
    diagnostic code can inspect the violation.
    """

    p1: float
    p2: float
    alpha: float
    beta: float
    mu: float
    nu: float
    phi: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        for name in ("p1", "p2", "alpha", "beta", "mu", "nu"):
            object.__setattr__(
                self, name, _check_unit_interval(getattr(self, name), name)
            )
        for name in ("phi", "theta"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, value)

    def completeness_residual(self):
        """|p1 + p2 - 1|: zero for any complete channel."""
        return abs(self.p1 + self.p2 - 1.0)


@dataclass(frozen=True)
class BathConfig:
    """Dissipative squeezed thermal bath: squeezing r, temperature T >= 0,
    interaction time t >= 0, spontaneous emission rate gamma0 > 0."""

    r: float
    T: float
    t: float
    gamma0: float = 1.0

    def __post_init__(self):
        for name in ("r", "T", "t", "gamma0"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if self.T < 0.0:
            raise ValueError(f"T must be nonnegative, got {self.T:.6g}")
        if self.t < 0.0:
            raise ValueError(f"t must be nonnegative, got {self.t:.6g}")
        if self.gamma0 <= 0.0:
            raise ValueError(f"gamma0 must be positive, got {self.gamma0:.6g}")


class KrausSet:
    """An immutable ordered collection of same-dimension Kraus operators."""

    __slots__ = ("operators",)

    def __init__(self, operators):
        ops = []
        dim = None
        for k, op in enumerate(operators):
            op = np.array(op, dtype=np.complex128)
            if op.ndim != 2 or op.shape[0] != op.shape[1]:
                raise ValueError(f"operator {k} is not square: shape {op.shape}")
            if dim is None:
                dim = op.shape[0]
            elif op.shape[0] != dim:
                raise ValueError("operators have mismatched dimensions")
            op.flags.writeable = False
            ops.append(op)
        if not ops:
            raise ValueError("a Kraus set needs at least one operator")
        object.__setattr__(self, "operators", tuple(ops))

    def __setattr__(self, name, value):
        raise AttributeError("KrausSet is immutable")

    def __iter__(self):
        return iter(self.operators)

    def __len__(self):
        return len(self.operators)

    @property
    def dim(self):
        return self.operators[0].shape[0]

    def stack(self):
        """Operators as one (k, d, d) array."""
        return np.stack(self.operators)

    def completeness_residual(self):
        """max |sum_k E_k^dag E_k - I|."""
        ops = self.stack()
        acc = np.einsum("kba,kbc->ac", ops.conj(), ops)
        return float(np.abs(acc - np.eye(self.dim)).max())

    def compose(self, other):
        """The set {E_i F_j}: this channel applied after ``other``."""
        if self.dim != other.dim:
            raise ValueError("cannot compose channels of different dimensions")
        return KrausSet(
            [e @ f for e in self.operators for f in other.operators]
        )


def identity_kraus(dim=2):
    """The do-nothing channel on a dim-level system."""
    return KrausSet([np.eye(dim, dtype=np.complex128)])


def sgad_kraus(params, check=True):
    """Build the two-branch damping Kraus set for ``params``.

    With ``check`` (the default) the set must resolve the identity within
    1e-9; a violation raises CompletenessViolation carrying the residual.
    Passing ``check=False`` returns the broken set for diagnostics.
    """
    if not isinstance(params, SGADParams):
        params = SGADParams(*params)
    s1 = math.sqrt(params.p1)
    s2 = math.sqrt(params.p2)
    a, b = params.alpha, params.beta
    m, n = params.mu, params.nu
    e_phi = np.exp(-1j * params.phi)
    e_theta = np.exp(-1j * params.theta)
    ops = [
        s1 * np.array([[math.sqrt(1 - a), 0], [0, math.sqrt(1 - b)]]),
        s1 * np.array([[0, math.sqrt(b)], [math.sqrt(a) * e_phi, 0]]),
        s2 * np.array([[math.sqrt(1 - m), 0], [0, math.sqrt(1 - n)]]),
        s2 * np.array([[0, math.sqrt(n)], [math.sqrt(m) * e_theta, 0]]),
    ]
    ks = KrausSet(ops)
    if check:
        residual = ks.completeness_residual()
        if residual > COMPLETENESS_TOL:
            stacked = ks.stack()
            acc = np.einsum("kba,kbc->ac", stacked.conj(), stacked)
            raise CompletenessViolation(residual, acc - np.eye(2))
    return ks


def verify_completeness(ks, tol=None):
    """Return max |sum_k E_k^dag E_k - I| for a Kraus set.

    Purely diagnostic: never raises.  When ``tol`` is given, a residual
    above it emits a warning so silent misuse still leaves a trace.
    """
    residual = ks.completeness_residual()
    if tol is not None and residual > tol:
        warnings.warn(
            f"Kraus set completeness residual {residual:.6g} exceeds {tol:.6g}",
            stacklevel=2,
        )
    return residual


def _lift_ops(ks, target):
    eye = np.eye(2, dtype=np.complex128)
    if target == "first":
        return np.stack([np.kron(op, eye) for op in ks])
    if target == "second":
        return np.stack([np.kron(eye, op) for op in ks])
    raise ValueError(f"target must be 'first' or 'second', got {target!r}")


def apply_channel(rho, ks, target="first"):
    """Apply a single-qubit Kraus channel to one qubit of a two-qubit state.

    The output is sum_k (E_k (x) I) rho (E_k (x) I)^dag (operators on the
    other slot for target='second').  An incomplete set triggers a warning
    via ``verify_completeness``; the result is returned as-is, never
    renormalized, so the trace deficit stays visible to the caller.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != (4, 4):
        raise ValueError(f"apply_channel needs a 4x4 state, got shape {rho.shape}")
    if ks.dim != 2:
        raise ValueError("apply_channel lifts single-qubit sets only")
    verify_completeness(ks, COMPLETENESS_TOL)
    lifted = _lift_ops(ks, target)
    return kernels.kraus_apply_batch(rho[None, :, :], lifted)[0]


def apply_channel_batch(states, ks, target="first"):
    """Row-wise ``apply_channel`` over a (m, 4, 4) stack (one warning, not m)."""
    states = np.asarray(states, dtype=np.complex128)
    if states.ndim != 3 or states.shape[1:] != (4, 4):
        raise ValueError("expected a (m, 4, 4) stack")
    if ks.dim != 2:
        raise ValueError("apply_channel_batch lifts single-qubit sets only")
    verify_completeness(ks, COMPLETENESS_TOL)
    return kernels.kraus_apply_batch(states, _lift_ops(ks, target))


def kraus_digest(ks):
    """12-hex-digit digest of a Kraus set's operator entries."""
    h = hashlib.sha256()
    for op in ks:
        h.update(np.ascontiguousarray(op).tobytes())
    return h.hexdigest()[:12]


def _bath_coefficients(cfg):
    """Exact relaxation coefficients of the squeezed-bath master equation.

    Returns (lam_down, lam_up, c1, c2): the downward and upward population
    transfer fractions after time t, and the two coherence envelope
    coefficients (c1 multiplies the initial coherence, c2 couples it to the
    conjugate coherence; with the bath phase fixed at zero both are real).
    """
    if cfg.T == 0.0:
        n_th = 0.0
    else:
        ratio = BATH_LEVEL_SPLITTING / cfg.T
        # below double range: the thermal occupation is an exact zero
        n_th = 1.0 / math.expm1(ratio) if ratio <= 700.0 else 0.0
    try:
        ch = math.cosh(2.0 * cfg.r)
        sh = math.sinh(cfg.r) ** 2
        n_eff = n_th * ch + sh
        a_s = math.sinh(2.0 * cfg.r) * (2.0 * n_th + 1.0)
    except OverflowError:
        raise ProviderDomainError(f"bath coefficients overflow for {cfg!r}") from None
    gam = cfg.gamma0 * (2.0 * n_eff + 1.0)
    x = gam * cfg.t
    decay = -math.expm1(-x)
    lam_down = (n_eff + 1.0) / (2.0 * n_eff + 1.0) * decay
    lam_up = n_eff / (2.0 * n_eff + 1.0) * decay
    # both exponents are <= 0 because 2*n_eff + 1 >= |a_s| for every bath
    kap = 0.5 * cfg.gamma0 * a_s * cfg.t
    c1 = 0.5 * (math.exp(kap - 0.5 * x) + math.exp(-kap - 0.5 * x))
    c2 = 0.5 * (math.exp(kap - 0.5 * x) - math.exp(-kap - 0.5 * x))
    return lam_down, lam_up, c1, c2


def _coherence_coefficient(p2, a_tot, q_tot, l_tot):
    """g(p2) = p1 sqrt((1-alpha)(1-beta)) + p2 sqrt((1-mu)(1-nu)) in closed form.

    Factors only rounding error pushes below zero are clamped so the search
    in ``squeezed_bath_params`` can evaluate g at the feasibility endpoints.
    """
    t1 = (1.0 - p2) * (1.0 - p2 - a_tot)
    t2 = (p2 - q_tot) * (p2 - l_tot)
    return math.sqrt(max(t1, 0.0)) + math.sqrt(max(t2, 0.0))


def squeezed_bath_params(cfg):
    """Channel parameters reproducing a dissipative squeezed thermal bath.

    The zero-back-excitation branch layout (beta = 0) is used: branch one
    carries pure decay alpha, branch two carries decay mu and excitation nu.
    Matching the exact relaxation fixes the products p1*alpha, p2*mu, p2*nu
    and leaves one scalar equation g(p2) = c1 for the branch weight.  g is
    concave on the feasible interval, so a ternary search finds its peak and
    a bisection on the crossing flank pins the root to the last float; the
    squared form of the same equation is a quadratic in p2, but its roots
    lose half the working precision whenever the crossing hugs a feasibility
    endpoint, which deep relaxation makes the common case.  Every returned
    parameter set is certified against the bath coefficients to 1e-9 before
    it leaves this function; configurations the parametrization cannot
    express that precisely (relaxation so deep the feasible interval shrinks
    to a few floats) raise ProviderDomainError instead.
    """
    if not isinstance(cfg, BathConfig):
        raise TypeError("squeezed_bath_params expects a BathConfig")
    if cfg.t == 0.0:
        return SGADParams(1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    lam_down, lam_up, c1, c2 = _bath_coefficients(cfg)
    if not all(map(math.isfinite, (lam_down, lam_up, c1, c2))):
        raise ProviderDomainError(
            f"bath coefficients overflow for {cfg!r}"
        )
    theta = 0.0 if c2 >= 0.0 else math.pi
    if lam_up <= 0.0:
        # unsqueezed zero-temperature bath: plain amplitude damping
        params = SGADParams(1.0, 0.0, lam_down, 0.0, 0.0, 0.0, 0.0, 0.0)
        return _certify(params, cfg)

    q_tot = c2 * c2 / lam_up
    l_tot = lam_up
    a_tot = lam_down - q_tot

    # p2 must keep all four damping fractions inside [0, 1]
    lo = max(q_tot, l_tot)
    hi = 1.0 - a_tot
    if lo > hi:
        if lo - hi > _PROVIDER_RESIDUAL_TOL:
            raise ProviderDomainError(
                f"no two-branch damping channel reproduces the bath relaxation "
                f"for {cfg!r} (feasible interval empty by {lo - hi:.3g})"
            )
        # collapsed to a point by rounding; the certificate has the last word
        lo = hi = 0.5 * (lo + hi)

    def residual(p2):
        return _coherence_coefficient(p2, a_tot, q_tot, l_tot) - c1

    a, b = lo, hi
    for _ in range(200):
        if b <= a:
            break
        m1 = a + (b - a) / 3.0
        m2 = b - (b - a) / 3.0
        if _coherence_coefficient(m1, a_tot, q_tot, l_tot) < _coherence_coefficient(
            m2, a_tot, q_tot, l_tot
        ):
            a = m1
        else:
            b = m2
    peak = 0.5 * (a + b)
    r_lo, r_hi, r_peak = residual(lo), residual(hi), residual(peak)

    if r_peak < 0.0:
        # even the best mixture decoheres too fast
        p2 = peak
    elif r_lo >= 0.0 and r_hi >= 0.0:
        # every mixture keeps too much coherence; take the closer endpoint
        p2 = lo if r_lo <= r_hi else hi
    else:
        # one sign change per flank; prefer the smaller root when both cross
        neg, pos = (lo, peak) if r_lo < 0.0 else (hi, peak)
        for _ in range(200):
            mid = 0.5 * (neg + pos)
            if mid == neg or mid == pos:
                break
            if residual(mid) < 0.0:
                neg = mid
            else:
                pos = mid
        p2 = pos if abs(residual(pos)) <= abs(residual(neg)) else neg

    p1 = 1.0 - p2
    alpha = 0.0 if p1 <= 0.0 else min(max(a_tot / p1, 0.0), 1.0)
    mu = min(max(q_tot / p2, 0.0), 1.0)
    nu = min(max(l_tot / p2, 0.0), 1.0)
    params = SGADParams(p1, p2, alpha, 0.0, mu, nu, 0.0, theta)
    return _certify(params, cfg)


def _certify(params, cfg):
    """Check that params reproduce the bath's four relaxation coefficients."""
    lam_down, lam_up, c1, c2 = _bath_coefficients(cfg)
    got_down = params.p1 * params.alpha + params.p2 * params.mu
    got_up = params.p1 * params.beta + params.p2 * params.nu
    got_c1 = params.p1 * math.sqrt(
        (1.0 - params.alpha) * (1.0 - params.beta)
    ) + params.p2 * math.sqrt((1.0 - params.mu) * (1.0 - params.nu))
    got_c2 = params.p2 * math.sqrt(params.mu * params.nu) * math.cos(params.theta)
    worst = max(
        abs(got_down - lam_down),
        abs(got_up - lam_up),
        abs(got_c1 - c1),
        abs(got_c2 - c2),
    )
    if worst > _PROVIDER_RESIDUAL_TOL:
        raise ProviderDomainError(
            f"no two-branch damping channel reproduces the bath relaxation for "
            f"{cfg!r} (worst coefficient mismatch {worst:.3g})"
        )
    return params


def sgad_params_from_bath(cfg, provider=None):
    """Resolve channel parameters for a bath, via a custom provider if given."""
    provider = squeezed_bath_params if provider is None else provider
    return provider(cfg)
