"""Two-time correlations of the scattered field via the quantum regression
theorem for block Lindblad rate equations.

A stationary correlation <O1(t) A(t+tau) O2(t)> is evaluated by seeding
each block with O2 rho_R^inf O1, propagating the full block state with the
one-time generator, and reading out Tr{A .} per destination block. The
field correlations carry sqrt(gamma_tilde) emission weights per block; all
results are reported in the dimensionless normalization where the
geometric far-field prefactor is 1.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .model import (SIGMA, SIGMA_DAG, BlockState, ModelSpec, SuperOp,
                    build_generator, require_valid)
from .steady import steady_state


class ZeroIntensity(Exception):
    """Stationary intensity vanishes; normalized correlations undefined."""


class SeriesKind(enum.Enum):
    C1 = "c1"
    C2 = "c2"
    G2 = "g2"
    SPECTRUM_INC = "spectrum_inc"
    MANDEL_Q = "mandel_q"
    MEAN_COUNTS = "mean_counts"
    LINE_SHAPE = "line_shape"
    POPULATIONS = "populations"


@dataclass(frozen=True, eq=False)
class ObservableSeries:
    """Tagged (abscissa, values) grid for one observable."""

    abscissa: np.ndarray
    values: np.ndarray
    kind: SeriesKind
    unit: str = ""

    def __post_init__(self):
        a = np.asarray(self.abscissa, dtype=float)
        v = np.asarray(self.values)
        if a.shape != (v.shape[0],):
            raise ValueError(f"abscissa length {a.shape} != values length {v.shape}")
        if a.size > 1 and not np.all(np.diff(a) > 0):
            raise ValueError("abscissa must be strictly increasing")
        object.__setattr__(self, "abscissa", a)
        object.__setattr__(self, "values", v)


def propagate_on_grid(generator: SuperOp, v0: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """e^{t L} v0 for every t in a strictly increasing grid, t >= 0.

    Sequential expm stepping; a uniform grid reuses one step propagator.
    Returns shape (len(grid), dim).
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size and (grid[0] < 0 or not np.all(np.isfinite(grid))):
        raise ValueError("grid must be finite and nonnegative")
    if grid.size > 1 and not np.all(np.diff(grid) > 0):
        raise ValueError("grid must be strictly increasing")
    m = generator.matrix
    out = np.empty((grid.size, v0.size), dtype=complex)
    steps = np.diff(grid, prepend=0.0)
    uniform = grid.size > 1 and np.allclose(steps[1:], steps[1], rtol=1e-12, atol=0.0)
    prop = la.expm(steps[1] * m) if uniform else None
    v = v0
    for i, dt in enumerate(steps):
        if dt > 0:
            if uniform and i > 0 and abs(dt - steps[1]) <= 1e-12 * steps[1]:
                v = prop @ v
            else:
                v = la.expm(dt * m) @ v
        out[i] = v
    return out


def _qrt_series(generator, steady, seeds, readout, tau_grid):
    """seeds: (r,2,2) per-block seed; readout: callable blocks -> scalar."""
    v0 = BlockState(seeds).to_vector()
    traj = propagate_on_grid(generator, v0, tau_grid)
    vals = np.empty(traj.shape[0], dtype=complex)
    for i, v in enumerate(traj):
        vals[i] = readout(BlockState.from_vector(v).blocks)
    return vals


def qrt_two_time(spec: ModelSpec, o1: np.ndarray, a: np.ndarray, o2: np.ndarray,
                 tau_grid) -> ObservableSeries:
    """Stationary <O1(t) A(t+tau) O2(t)> on a tau grid (complex values)."""
    require_valid(spec)
    gen = build_generator(spec)
    st = steady_state(gen)
    seeds = np.einsum("ij,rjk,kl->ril", np.asarray(o2, complex), st.blocks,
                      np.asarray(o1, complex))
    readout = lambda blocks: np.einsum("ij,rji->", np.asarray(a, complex), blocks)
    vals = _qrt_series(gen, st, seeds, readout, np.asarray(tau_grid, float))
    return ObservableSeries(np.asarray(tau_grid, float), vals, SeriesKind.C1)


def _c1_pieces(spec: ModelSpec, st: BlockState):
    """Seed blocks sqrt(gt_R') rho_R'^inf sigma† and the readout weight
    vector picking sqrt(gt_R) Tr{sigma .} = sqrt(gt_R) x_ba per block."""
    sq = np.sqrt(spec.effective_decays())
    seeds = sq[:, None, None] * (st.blocks @ SIGMA_DAG)
    w = np.zeros(4 * spec.r_max, dtype=complex)
    w[1::4] = sq          # vec order (aa, ba, ab, bb): Tr{sigma x} = x_ba
    return seeds, w


def c1(spec: ModelSpec, tau_grid) -> ObservableSeries:
    """Dimensionless first-order field correlation C1(tau), tau >= 0.

    C1(-tau) is defined by conjugation; C1(0) equals the stationary
    intensity and C1(inf) the coherent spectral weight.
    """
    require_valid(spec)
    gen = build_generator(spec)
    st = steady_state(gen)
    seeds, w = _c1_pieces(spec, st)
    tau = np.asarray(tau_grid, float)
    traj = propagate_on_grid(gen, BlockState(seeds).to_vector(), tau)
    return ObservableSeries(tau, traj @ w, SeriesKind.C1)


def _c2_seeds(spec: ModelSpec, st: BlockState) -> np.ndarray:
    """Per-block emission seeds gamma_R' sigma rho_R'^inf sigma†
    + sum_R'' gamma_cross[R'][R''] sigma rho_R''^inf sigma†."""
    bb = st.blocks[:, 1, 1]
    weights = spec.gammas() * bb + spec.rates.gamma_cross @ bb
    seeds = np.zeros((spec.r_max, 2, 2), dtype=complex)
    seeds[:, 0, 0] = weights
    return seeds


def c2(spec: ModelSpec, tau_grid) -> ObservableSeries:
    """Dimensionless intensity correlation C2(tau) (real)."""
    require_valid(spec)
    gen = build_generator(spec)
    st = steady_state(gen)
    seeds = _c2_seeds(spec, st)
    w = np.zeros(4 * spec.r_max, dtype=complex)
    w[3::4] = spec.effective_decays()   # gt_R Tr{sigma†sigma x} = gt_R x_bb
    tau = np.asarray(tau_grid, float)
    traj = propagate_on_grid(gen, BlockState(seeds).to_vector(), tau)
    return ObservableSeries(tau, np.real(traj @ w), SeriesKind.C2)


def stationary_intensity(spec: ModelSpec) -> float:
    """I_st = sum_R gamma_tilde_R <b|rho_R^inf|b>."""
    require_valid(spec)
    st = steady_state(build_generator(spec))
    return float(np.real(spec.effective_decays() @ st.blocks[:, 1, 1]))


def g2(spec: ModelSpec, tau_grid) -> ObservableSeries:
    """Normalized intensity-intensity correlation g2(tau) = C2(tau)/I_st^2."""
    i_st = stationary_intensity(spec)
    if i_st <= 1e-300:
        raise ZeroIntensity("stationary intensity is zero; g2 undefined")
    series = c2(spec, tau_grid)
    return ObservableSeries(series.abscissa, series.values / i_st**2, SeriesKind.G2)
