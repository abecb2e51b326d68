"""Domain types and assembly of the block Lindblad rate generator.

A laser-driven two-level fluorophore (ground ``|a>``, excited ``|b>``) is
coupled to ``r_max`` configurational macrostates of its nano-environment.
The joint state is the tuple of auxiliary 2x2 density matrices ``rho_R``
(one per macrostate, :class:`BlockState`); the physical system state is
their sum and the environment populations are their traces.

Everything is expressed in the frame rotating at the laser frequency, so
the generator is time independent. Per block ``R`` the effective detuning
is ``delta_R = detuning - delta_omega[R]``.

Rate-table orientation (important, both index orders appear in the
literature): for every r_max x r_max table in this module,

    ``table[R][R']`` is the rate of the transition ``R' -> R``

i.e. first index = destination (gain into ``R``), second = source. Loss
terms on block ``R`` therefore use *column* sums ``sum_R' table[R'][R]``.

Basis and vectorization conventions (fixed so golden files are stable):
index 0 = ``|a>``, 1 = ``|b>``; a block state is vectorized block-major,
each 2x2 block column-major, i.e. ``(aa, ba, ab, bb)`` per block.

hbar = 1 throughout; rates and angular frequencies share one time unit.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels

# Two-level operators in the (|a>, |b>) basis.
SIGMA = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)       # |a><b|
SIGMA_DAG = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)   # |b><a|
UPPER_PROJECTOR = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)
LOWER_PROJECTOR = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
IDENTITY2 = np.eye(2, dtype=complex)


class OperatorKind(enum.Enum):
    """System operator of a general environment-fluctuation channel."""

    IDENTITY = "identity"
    LOWER = "lower"
    RAISE = "raise"
    UPPER_PROJECTOR = "upper_projector"
    LOWER_PROJECTOR = "lower_projector"

    def matrix(self) -> np.ndarray:
        return {
            OperatorKind.IDENTITY: IDENTITY2,
            OperatorKind.LOWER: SIGMA,
            OperatorKind.RAISE: SIGMA_DAG,
            OperatorKind.UPPER_PROJECTOR: UPPER_PROJECTOR,
            OperatorKind.LOWER_PROJECTOR: LOWER_PROJECTOR,
        }[self]


def _frozen_array(a, dtype=float) -> np.ndarray:
    out = np.array(a, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ConfigSpace:
    """Coarse-grained configurational macrostates of the environment."""

    r_max: int
    labels: tuple[str, ...] | None = None


@dataclass(frozen=True)
class PerStateParams:
    """System parameters induced by one configurational state.

    delta_omega is the shift of the transition frequency, gamma the
    radiative decay rate, omega_rabi the Rabi frequency (phase absorbed
    into the lowering operator, so omega_rabi >= 0).
    """

    delta_omega: float
    gamma: float
    omega_rabi: float


@dataclass(frozen=True, eq=False)
class FluctuationRates:
    """System-independent (phi) and emission-assisted (gamma_cross) rate tables.

    ``phi[R][R']`` / ``gamma_cross[R][R']`` are R'->R rates; diagonals must
    be zero (the diagonal emission channel lives in PerStateParams.gamma).
    """

    phi: np.ndarray
    gamma_cross: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "phi", _frozen_array(self.phi))
        object.__setattr__(self, "gamma_cross", _frozen_array(self.gamma_cross))

    @classmethod
    def none(cls, r_max: int) -> "FluctuationRates":
        z = np.zeros((r_max, r_max))
        return cls(phi=z, gamma_cross=z.copy())


@dataclass(frozen=True, eq=False)
class GeneralJumpChannel:
    """Extra fluctuation channel: loss -(eta[R'][R]/2){A†A, rho_R} and gain
    eta[R][R'] A rho_R' A† for a fixed system operator A."""

    operator_kind: OperatorKind
    eta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "eta", _frozen_array(self.eta))


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Full parameterization of the driven fluorophore + environment model.

    detuning is laser minus bare transition frequency; per-block effective
    detunings are detuning - per_state[R].delta_omega.
    """

    space: ConfigSpace
    per_state: tuple[PerStateParams, ...]
    rates: FluctuationRates
    extra_channels: tuple[GeneralJumpChannel, ...] = ()
    detuning: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "per_state", tuple(self.per_state))
        object.__setattr__(self, "extra_channels", tuple(self.extra_channels))

    @property
    def r_max(self) -> int:
        return self.space.r_max

    def delta_omegas(self) -> np.ndarray:
        return np.array([p.delta_omega for p in self.per_state])

    def gammas(self) -> np.ndarray:
        return np.array([p.gamma for p in self.per_state])

    def omega_rabis(self) -> np.ndarray:
        return np.array([p.omega_rabi for p in self.per_state])

    def effective_decays(self) -> np.ndarray:
        """gamma_tilde_R = gamma_R + sum_R' gamma_cross[R'][R] (column sums)."""
        return self.gammas() + self.rates.gamma_cross.sum(axis=0)


@dataclass(frozen=True, eq=False)
class BlockState:
    """Tuple of auxiliary 2x2 matrices, stored as a (r_max, 2, 2) array.

    Physical states have total trace 1 and Hermitian blocks; intermediate
    regression/counting vectors need not.
    """

    blocks: np.ndarray

    def __post_init__(self):
        b = np.array(self.blocks, dtype=complex)
        if b.ndim != 3 or b.shape[1:] != (2, 2):
            raise ValueError(f"blocks must have shape (r_max, 2, 2), got {b.shape}")
        b.setflags(write=False)
        object.__setattr__(self, "blocks", b)

    @property
    def r_max(self) -> int:
        return self.blocks.shape[0]

    def total_trace(self) -> complex:
        return self.blocks[:, 0, 0].sum() + self.blocks[:, 1, 1].sum()

    def system_state(self) -> np.ndarray:
        """2x2 reduced system density matrix (sum over blocks)."""
        return self.blocks.sum(axis=0)

    def to_vector(self) -> np.ndarray:
        """Block-major, column-major-within-block (aa, ba, ab, bb) vector."""
        return self.blocks.transpose(0, 2, 1).reshape(-1).copy()

    @classmethod
    def from_vector(cls, v: np.ndarray) -> "BlockState":
        v = np.asarray(v, dtype=complex)
        if v.size % 4 != 0:
            raise ValueError(f"vector length {v.size} is not a multiple of 4")
        return cls(v.reshape(-1, 2, 2).transpose(0, 2, 1))

    @classmethod
    def ground(cls, r_max: int, populations=None) -> "BlockState":
        """All blocks in |a><a|, block weights given by populations (default:
        everything in the first configurational state)."""
        p = np.zeros(r_max)
        if populations is None:
            p[0] = 1.0
        else:
            p[:] = populations
        b = np.zeros((r_max, 2, 2), dtype=complex)
        b[:, 0, 0] = p
        return cls(b)


@dataclass(frozen=True, eq=False)
class SuperOp:
    """Dense generator (or derived operator) on vectorized block states."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 4 != 0:
            raise ValueError(f"matrix must be square with dim divisible by 4, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def r_max(self) -> int:
        return self.dim // 4

    def apply(self, x: BlockState) -> BlockState:
        return BlockState.from_vector(self.matrix @ x.to_vector())


def trace_functional(r_max: int) -> np.ndarray:
    """Row vector theta with theta @ vec(x) = total trace of x."""
    return np.tile(np.array([1.0, 0.0, 0.0, 1.0]), r_max)


def validate(spec: ModelSpec) -> list[str]:
    """Return every invariant violation as a path-like message; [] when valid."""
    out: list[str] = []
    r = spec.space.r_max
    if r < 1:
        out.append(f"space.r_max: must be >= 1, got {r}")
        return out
    if spec.space.labels is not None and len(spec.space.labels) != r:
        out.append(f"space.labels: length {len(spec.space.labels)} != r_max {r}")
    if len(spec.per_state) != r:
        out.append(f"per_state: length {len(spec.per_state)} != r_max {r}")
    for i, p in enumerate(spec.per_state):
        for name, val in (("delta_omega", p.delta_omega), ("gamma", p.gamma),
                          ("omega_rabi", p.omega_rabi)):
            if not math.isfinite(val):
                out.append(f"per_state[{i}].{name}: not finite")
        if math.isfinite(p.gamma) and p.gamma < 0:
            out.append(f"per_state[{i}].gamma: negative ({p.gamma})")
        if math.isfinite(p.omega_rabi) and p.omega_rabi < 0:
            out.append(f"per_state[{i}].omega_rabi: negative ({p.omega_rabi})")
    out.extend(_validate_table(spec.rates.phi, r, "rates.phi"))
    out.extend(_validate_table(spec.rates.gamma_cross, r, "rates.gamma_cross"))
    kinds_seen = set()
    for k, ch in enumerate(spec.extra_channels):
        if ch.operator_kind in kinds_seen:
            out.append(f"extra_channels[{k}]: duplicate operator_kind {ch.operator_kind.value}")
        kinds_seen.add(ch.operator_kind)
        out.extend(_validate_table(ch.eta, r, f"extra_channels[{k}].eta"))
    if not math.isfinite(spec.detuning):
        out.append("detuning: not finite")
    return out


def _validate_table(t: np.ndarray, r: int, path: str) -> list[str]:
    out = []
    if t.shape != (r, r):
        out.append(f"{path}: shape {t.shape} != ({r}, {r})")
        return out
    if not np.all(np.isfinite(t)):
        i, j = np.argwhere(~np.isfinite(t))[0]
        out.append(f"{path}[{i}][{j}]: not finite")
    for i, j in np.argwhere(t < 0):
        out.append(f"{path}[{i}][{j}]: negative ({t[i, j]})")
    for i in np.flatnonzero(np.diag(t) != 0):
        out.append(f"{path}[{i}][{i}]: diagonal must be zero (got {t[i, i]})")
    return out


def require_valid(spec: ModelSpec) -> None:
    problems = validate(spec)
    if problems:
        raise ValueError("invalid model spec:\n  " + "\n  ".join(problems))


def effective_decay(spec: ModelSpec, r: int) -> float:
    """gamma_tilde_R for macrostate r (0-based)."""
    if not 0 <= r < spec.r_max:
        raise IndexError(f"state index {r} out of range for r_max={spec.r_max}")
    return float(spec.effective_decays()[r])


def block_hamiltonians(spec: ModelSpec) -> np.ndarray:
    """Rotating-frame Hamiltonians H_R, shape (r_max, 2, 2).

    H_R = -(delta_R/2) sigma_z + (Omega_R/2)(sigma + sigma†) with
    delta_R = detuning - delta_omega[R] and sigma_z = |b><b| - |a><a|.
    """
    deltas = spec.detuning - spec.delta_omegas()
    omegas = spec.omega_rabis()
    h = np.zeros((spec.r_max, 2, 2), dtype=complex)
    h[:, 0, 0] = 0.5 * deltas
    h[:, 1, 1] = -0.5 * deltas
    h[:, 0, 1] = 0.5 * omegas
    h[:, 1, 0] = 0.5 * omegas
    return h


# vec(A rho) = kron(I, A) vec(rho); vec(rho B) = kron(B.T, I) vec(rho);
# vec(A rho A†) = kron(A.conj(), A) vec(rho)  [column-major vec]
def _left(op):
    return np.kron(IDENTITY2, op)


def _right(op):
    return np.kron(op.T, IDENTITY2)


def _sandwich(op):
    return np.kron(op.conj(), op)


def build_generator(spec: ModelSpec) -> SuperOp:
    """Assemble the dense block generator.

    Per block R: rotating-frame Hamiltonian commutator; radiative
    dissipator with anticommutator weight gamma_tilde_R and own-block
    recycling gain gamma_R; phi gain/loss; emission-assisted cross gains
    gamma_cross[R][R']; plus any general channels (loss from eta column
    sums, gain eta[R][R'] A · A†).
    """
    require_valid(spec)
    r = spec.r_max
    dim = 4 * r
    m = np.zeros((dim, dim), dtype=complex)
    h = block_hamiltonians(spec)
    gammas = spec.gammas()
    gtilde = spec.effective_decays()
    phi = spec.rates.phi
    gcross = spec.rates.gamma_cross
    d_anti = _left(SIGMA_DAG @ SIGMA / 2) + _right(SIGMA_DAG @ SIGMA / 2)
    jump = _sandwich(SIGMA)
    phi_loss = phi.sum(axis=0)

    for a in range(r):
        sl = slice(4 * a, 4 * a + 4)
        blk = -1j * (_left(h[a]) - _right(h[a]))
        blk -= gtilde[a] * d_anti
        blk += gammas[a] * jump
        blk -= phi_loss[a] * np.eye(4)
        m[sl, sl] += blk
        for b in range(r):
            if b == a:
                continue
            slb = slice(4 * b, 4 * b + 4)
            m[sl, slb] += phi[a, b] * np.eye(4) + gcross[a, b] * jump

    for ch in spec.extra_channels:
        op = ch.operator_kind.matrix()
        anti = _left(op.conj().T @ op) + _right(op.conj().T @ op)
        gain = _sandwich(op)
        loss = ch.eta.sum(axis=0)
        for a in range(r):
            sl = slice(4 * a, 4 * a + 4)
            m[sl, sl] -= 0.5 * loss[a] * anti
            for b in range(r):
                if b != a:
                    m[sl, slice(4 * b, 4 * b + 4)] += ch.eta[a, b] * gain
    return SuperOp(m)


def apply_generator(spec: ModelSpec, x: BlockState) -> BlockState:
    """Matrix-free generator application (same physics as build_generator,
    evaluated term by term on the blocks; numba-compiled when available)."""
    require_valid(spec)
    if x.r_max != spec.r_max:
        raise ValueError(f"state has {x.r_max} blocks, spec has {spec.r_max}")
    chan_ops = np.array([ch.operator_kind.matrix() for ch in spec.extra_channels],
                        dtype=complex).reshape(-1, 2, 2)
    chan_eta = np.array([ch.eta for ch in spec.extra_channels],
                        dtype=float).reshape(-1, spec.r_max, spec.r_max)
    out = _kernels.apply_blocks(
        np.ascontiguousarray(x.blocks),
        np.ascontiguousarray(block_hamiltonians(spec)),
        spec.gammas(),
        spec.effective_decays(),
        np.ascontiguousarray(spec.rates.phi),
        np.ascontiguousarray(spec.rates.gamma_cross),
        chan_ops,
        chan_eta,
    )
    return BlockState(out)
