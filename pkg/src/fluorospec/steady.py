"""Linear-algebra kernels on the block generator.

Time propagation (scaling-and-squaring expm), steady state, resolvent
solves, and the Laurent decomposition (steady projector + reduced
resolvent) that underpins the exact stationary counting moments.

Everything is dense: dimensions are 4*r_max with r_max expected well below
a few hundred, so LU/SVD exactness beats any iterative machinery.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .model import BlockState, SuperOp, trace_functional


class NullSpaceDegenerate(Exception):
    """Generator nullity != 1 (disconnected configurational space)."""


class SingularShift(Exception):
    """Resolvent shift u is (numerically) on the spectrum of the generator."""


@dataclass(frozen=True, eq=False)
class SteadyDecomposition:
    """Steady state, its spectral projector P = |steady><trace|, and the
    reduced resolvent R0 with R0 L = L R0 = P - Id, R0 P = P R0 = 0,
    normalized so that (u - L)^-1 = P/u + R0 + O(u)."""

    steady: BlockState
    projector: SuperOp
    reduced_resolvent: SuperOp


def evolve(generator: SuperOp, x0: BlockState, t: float) -> BlockState:
    """e^{t L} x0 (t >= 0)."""
    if not np.isfinite(t) or t < 0:
        raise ValueError(f"propagation time must be finite and >= 0, got {t}")
    v = x0.to_vector()
    if v.size != generator.dim:
        raise ValueError(f"state dim {v.size} != generator dim {generator.dim}")
    if not np.all(np.isfinite(v)):
        raise ValueError("state contains non-finite entries")
    if t == 0:
        return x0
    return BlockState.from_vector(la.expm(t * generator.matrix) @ v)


def _null_row(m: np.ndarray) -> int:
    """Row index to sacrifice for deflated solves: the largest component of
    the left null vector, so the remaining rows keep full rank."""
    s = la.svd(m, compute_uv=True)
    u_null = s[0][:, -1]
    return int(np.argmax(np.abs(u_null)))


def _check_nullity(m: np.ndarray) -> None:
    svals = la.svdvals(m)
    tol = m.shape[0] * np.finfo(float).eps * la.norm(m, "fro")
    nullity = int(np.sum(svals < tol))
    if nullity != 1:
        raise NullSpaceDegenerate(
            f"generator nullity is {nullity}, expected 1 "
            "(disconnected configurational space?)")


def steady_state(generator: SuperOp) -> BlockState:
    """Unique trace-1 null state of the generator.

    Solved by replacing one row of L with the trace functional (deterministic
    and well conditioned for ergodic models); SVD is used only to certify
    nullity 1 and pick the sacrificed row.
    """
    m = generator.matrix
    _check_nullity(m)
    k = _null_row(m)
    a = m.copy()
    a[k, :] = trace_functional(generator.r_max)
    b = np.zeros(generator.dim, dtype=complex)
    b[k] = 1.0
    x = la.solve(a, b)
    st = BlockState.from_vector(x)
    blocks = 0.5 * (st.blocks + st.blocks.conj().transpose(0, 2, 1))
    blocks = blocks / np.real(blocks[:, 0, 0].sum() + blocks[:, 1, 1].sum())
    eigmin = min(la.eigvalsh(blk).min() for blk in blocks)
    if eigmin < -1e-10:
        raise ValueError(
            f"steady-state block eigenvalue {eigmin:.3e} < -1e-10; "
            "model or assembly bug")
    return BlockState(blocks)


def resolve(generator: SuperOp, u: complex, v: BlockState) -> BlockState:
    """Solve (u Id - L) x = v by dense LU; residual must stay <= 1e-10 |v|."""
    rhs = v.to_vector()
    if rhs.size != generator.dim:
        raise ValueError(f"state dim {rhs.size} != generator dim {generator.dim}")
    a = u * np.eye(generator.dim) - generator.matrix
    x = _checked_solve(a, a, rhs, u)
    return BlockState.from_vector(x)


def resolve_deflated(generator: SuperOp, u: complex, v: BlockState) -> BlockState:
    """Resolvent solve restricted to the trace-zero complement.

    Valid only for trace-free right-hand sides; pins the trace of the
    solution to zero, which also regularizes u = 0 (the steady pole) where
    the plain resolvent is singular but the complement solve is not.
    """
    rhs = v.to_vector()
    if rhs.size != generator.dim:
        raise ValueError(f"state dim {rhs.size} != generator dim {generator.dim}")
    m = generator.matrix
    a = u * np.eye(generator.dim) - m
    k = _null_row(m)
    a_defl = a.copy()
    a_defl[k, :] = trace_functional(generator.r_max)
    rhs_defl = rhs.copy()
    rhs_defl[k] = 0.0
    x = _checked_solve(a_defl, a, rhs, u, rhs_defl=rhs_defl)
    return BlockState.from_vector(x)


def _checked_solve(a_solve, a_resid, rhs, u, rhs_defl=None):
    import warnings as _warnings

    try:
        with _warnings.catch_warnings():
            _warnings.simplefilter("ignore", la.LinAlgWarning)
            lu, piv = la.lu_factor(a_solve)
            x = la.lu_solve((lu, piv), rhs if rhs_defl is None else rhs_defl)
    except la.LinAlgError as exc:
        raise SingularShift(f"factorization failed at u={u}") from exc
    if not np.all(np.isfinite(x)):
        raise SingularShift(f"resolvent solve diverged at u={u}")
    resid = la.norm(a_resid @ x - rhs)
    if resid > 1e-10 * max(la.norm(rhs), 1e-300):
        raise SingularShift(
            f"residual {resid:.3e} exceeds tolerance at u={u} "
            "(shift too close to the spectrum)")
    return x


def laurent_decomposition(generator: SuperOp) -> SteadyDecomposition:
    """Steady state plus projector P and reduced resolvent R0.

    R0 is obtained from the deflated solve L X = P - Id with the trace of
    every column pinned to zero, which lands exactly on the reduced
    resolvent (the trace functional is the only left null vector)."""
    st = steady_state(generator)
    m = generator.matrix
    dim = generator.dim
    theta = trace_functional(generator.r_max)
    p = np.outer(st.to_vector(), theta)
    k = _null_row(m)
    a = m.copy()
    a[k, :] = theta
    b = p - np.eye(dim)
    b[k, :] = 0.0
    lu, piv = la.lu_factor(a)
    r0 = la.lu_solve((lu, piv), b)
    r0 += la.lu_solve((lu, piv), b - a @ r0)   # one refinement step
    # achievable accuracy for a backward-stable solve is eps*|L|*|R0|,
    # which dominates 1e-9 for stiff models (|R0| ~ 1/slowest rate)
    scale = max(1.0, la.norm(m, 2) * la.norm(r0, 2))
    defect = max(
        la.norm(r0 @ m - (p - np.eye(dim)), 2),
        la.norm(m @ r0 - (p - np.eye(dim)), 2),
        la.norm(r0 @ p, 2),
        la.norm(p @ r0, 2),
    )
    if defect > 1e-9 * scale:
        raise NullSpaceDegenerate(
            f"reduced resolvent defect {defect:.3e} exceeds 1e-9*|L||R0|; "
            "steady decomposition unreliable")
    return SteadyDecomposition(steady=st, projector=SuperOp(p),
                               reduced_resolvent=SuperOp(r0))


def config_populations(x: BlockState) -> np.ndarray:
    """P_R = Tr rho_R (real part; physical states sum to 1)."""
    return np.real(x.blocks[:, 0, 0] + x.blocks[:, 1, 1])
