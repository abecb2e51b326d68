"""Shared helpers for the test suite: grids, peak fitting, width measures."""
import numpy as np
from scipy.optimize import curve_fit


def log_symmetric_grid(inner, outer, n_per_side):
    """Symmetric grid ±[inner, outer] log-spaced plus 0: resolves features
    on every scale between inner and outer."""
    side = np.logspace(np.log10(inner), np.log10(outer), n_per_side)
    return np.concatenate([-side[::-1], [0.0], side])


def lorentzian(w, amp, hwhm, offset):
    return offset + amp / (1.0 + (w / hwhm) ** 2)


def fit_lorentzian(grid, vals, hwhm_guess):
    """Least-squares Lorentzian + constant fit; returns (amp, hwhm, offset)."""
    p, _ = curve_fit(lorentzian, grid, vals,
                     p0=[vals.max() - vals.min(), hwhm_guess, vals.min()])
    amp, hwhm, offset = p
    return amp, abs(hwhm), offset


def fwhm(grid, vals):
    """Full width of the outermost half-maximum crossings (linear interp)."""
    top = vals.max()
    half = top / 2.0
    above = vals >= half
    i0 = int(np.argmax(above))
    i1 = len(vals) - 1 - int(np.argmax(above[::-1]))
    left = grid[i0] if i0 == 0 else np.interp(half, [vals[i0 - 1], vals[i0]],
                                              [grid[i0 - 1], grid[i0]])
    right = grid[i1] if i1 == len(vals) - 1 else np.interp(
        half, [vals[i1 + 1], vals[i1]], [grid[i1 + 1], grid[i1]])
    return right - left


def peak_position(grid, vals, lo, hi):
    """Abscissa of the maximum restricted to [lo, hi]."""
    mask = (grid >= lo) & (grid <= hi)
    sub = np.flatnonzero(mask)
    return grid[sub[np.argmax(vals[sub])]]
