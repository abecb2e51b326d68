"""Matrix-free application of the block generator (hot kernel).

Two interchangeable implementations: a numba-compiled loop version and a
vectorized numpy one. Selection happens at import time; set
``FLUOROSPEC_NO_NUMBA=1`` to force the numpy path (also used automatically
when numba is unavailable). ``benchmarks/bench_apply.py`` compares them.
"""
from __future__ import annotations

import os

import numpy as np


def apply_blocks_numpy(blocks, ham, gammas, gtilde, phi, gcross, chan_ops, chan_eta):
    """d(blocks)/dt for the block Lindblad rate generator.

    blocks/ham: (r, 2, 2) complex; gammas/gtilde: (r,); phi/gcross: (r, r)
    with [dest][src] orientation; chan_ops: (c, 2, 2); chan_eta: (c, r, r).
    """
    out = -1j * (ham @ blocks - blocks @ ham)
    # radiative dissipator: anticommutator with sigma†sigma/2 = diag(0, 1/2)
    out[:, 0, 1] -= 0.5 * gtilde * blocks[:, 0, 1]
    out[:, 1, 0] -= 0.5 * gtilde * blocks[:, 1, 0]
    out[:, 1, 1] -= gtilde * blocks[:, 1, 1]
    bb = blocks[:, 1, 1]
    out[:, 0, 0] += gammas * bb + gcross @ bb
    # system-independent mixing
    out += np.einsum("rs,sij->rij", phi, blocks)
    out -= phi.sum(axis=0)[:, None, None] * blocks
    for k in range(chan_ops.shape[0]):
        a = chan_ops[k]
        ada = a.conj().T @ a
        loss = 0.5 * chan_eta[k].sum(axis=0)
        out -= loss[:, None, None] * (ada @ blocks + blocks @ ada)
        out += np.einsum("rs,sij->rij", chan_eta[k], a @ blocks @ a.conj().T)
    return out


def _apply_blocks_loops(blocks, ham, gammas, gtilde, phi, gcross, chan_ops, chan_eta):
    r = blocks.shape[0]
    out = np.zeros((r, 2, 2), dtype=np.complex128)
    for a in range(r):
        h = ham[a]
        x = blocks[a]
        for i in range(2):
            for j in range(2):
                acc = 0.0 + 0.0j
                for k in range(2):
                    acc += h[i, k] * x[k, j] - x[i, k] * h[k, j]
                out[a, i, j] = -1j * acc
        out[a, 0, 1] -= 0.5 * gtilde[a] * x[0, 1]
        out[a, 1, 0] -= 0.5 * gtilde[a] * x[1, 0]
        out[a, 1, 1] -= gtilde[a] * x[1, 1]
        out[a, 0, 0] += gammas[a] * x[1, 1]
        floss = 0.0
        for b in range(r):
            floss += phi[b, a]
            if b != a:
                out[a, 0, 0] += gcross[a, b] * blocks[b, 1, 1]
                for i in range(2):
                    for j in range(2):
                        out[a, i, j] += phi[a, b] * blocks[b, i, j]
        for i in range(2):
            for j in range(2):
                out[a, i, j] -= floss * x[i, j]
    for c in range(chan_ops.shape[0]):
        op = chan_ops[c]
        ada = op.conj().T @ op
        for a in range(r):
            loss = 0.0
            for b in range(r):
                loss += chan_eta[c, b, a]
                if b != a and chan_eta[c, a, b] != 0.0:
                    g = op @ blocks[b] @ op.conj().T
                    for i in range(2):
                        for j in range(2):
                            out[a, i, j] += chan_eta[c, a, b] * g[i, j]
            half = 0.5 * loss
            ac = ada @ blocks[a] + blocks[a] @ ada
            for i in range(2):
                for j in range(2):
                    out[a, i, j] -= half * ac[i, j]
    return out


_FORCE_NUMPY = os.environ.get("FLUOROSPEC_NO_NUMBA", "") not in ("", "0")

if not _FORCE_NUMPY:
    try:
        import numba

        apply_blocks_numba = numba.njit(cache=True)(_apply_blocks_loops)
        apply_blocks = apply_blocks_numba
        BACKEND = "numba"
    except ImportError:
        apply_blocks = apply_blocks_numpy
        BACKEND = "numpy"
else:
    apply_blocks = apply_blocks_numpy
    BACKEND = "numpy"
