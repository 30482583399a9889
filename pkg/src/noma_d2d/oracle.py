"""Brute-force verification of the closed-form allocator.

A dense (alpha1, alpha2) lattice over [0, 0.5]^2 is evaluated against the
full constraint set; the feasible sum-rate maximizer is the reference the
analytic solver must match.  Central finite differences provide the
independent check of the analytic derivatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .linkmodel import ALPHA_TOL, RATE_TOL_REL, PowerSplit, QosSpec
from .scenario import ChannelState


@dataclass(frozen=True)
class GridSpec:
    """Lattice step (alpha units) and number of local refinement rounds."""

    resolution: float = 1.0e-3
    refine_rounds: int = 2

    def __post_init__(self):
        if not (0.0 < self.resolution <= 0.01):
            raise ValueError("resolution must be in (0, 0.01]")
        if self.refine_rounds < 0:
            raise ValueError("refine_rounds must be >= 0")


@dataclass(frozen=True)
class OracleResult:
    """Feasible maximizer of one grid search.

    `lipschitz_bound` is the largest adjacent-cell sum-rate difference per
    alpha unit on the coarse lattice; `L * resolution` bounds how far the
    lattice optimum can sit below the true optimum.
    """

    best_split: PowerSplit | None
    best_r_sum: float
    feasible_count: int
    lipschitz_bound: float


def _rate_grid(
    ch: ChannelState, qos: QosSpec, p_ue: float, a1: np.ndarray, a2: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """(r_sum, feasible) arrays over the alpha1 x alpha2 mesh.

    Same expressions and tolerances as the scalar link model; a1 varies
    along axis 0 and a2 along axis 1.
    """
    h1, h2, h3, hsi = ch.h1_sq, ch.h2_sq, ch.h3_sq, ch.hsi_sq
    p = p_ue
    si = hsi * p
    b = qos.bandwidth_hz
    A1 = a1[:, None]
    A2 = a2[None, :]

    g_bs_a = h1 * (1.0 - A1) * p / (h2 * (1.0 - A2) * p + 1.0)
    g_bs_b = h2 * (1.0 - A2) * p
    g_ue1_b = h3 * (1.0 - A2) * p / (h3 * A2 * p + si + 1.0)
    g_ue1_d = h3 * A2 * p / (si + 1.0)
    g_ue2_a = h3 * (1.0 - A1) * p / (h3 * A1 * p + si + 1.0)
    g_ue2_c = h3 * A1 * p / (si + 1.0)

    inv_ln2 = 1.0 / math.log(2.0)
    r_bs_a = b * inv_ln2 * np.log1p(g_bs_a)
    r_bs_b = b * inv_ln2 * np.log1p(g_bs_b)
    r_ue1_d = b * inv_ln2 * np.log1p(g_ue1_d)
    r_ue2_c = b * inv_ln2 * np.log1p(g_ue2_c)
    r_ue2_a = b * inv_ln2 * np.log1p(g_ue2_a)
    r_ue1_b = b * inv_ln2 * np.log1p(g_ue1_b)
    r_sum = r_bs_a + r_bs_b + r_ue1_d + r_ue2_c

    tol = RATE_TOL_REL * b
    lower = np.minimum(
        np.maximum(np.maximum(1.0 - A2 * h3 / hsi, (1.0 - A2) * hsi / h3), 0.0), 0.5
    )
    upper = np.minimum(((h1 - h2) + A2 * h2) / h1, 0.5)
    feasible = (
        (r_bs_a - qos.r_min_a >= -tol)
        & (r_bs_b - qos.r_min_b >= -tol)
        & (r_ue1_d - qos.r_min_d >= -tol)
        & (r_ue2_c - qos.r_min_c >= -tol)
        & (r_ue2_a - qos.r_min_a >= -tol)
        & (r_ue1_b - qos.r_min_b >= -tol)
        & (A1 - lower >= -ALPHA_TOL)
        & (upper - A1 >= -ALPHA_TOL)
    )
    return r_sum, feasible


def _axis(lo: float, hi: float, step: float) -> np.ndarray:
    n = int(round((hi - lo) / step)) + 1
    return lo + step * np.arange(n)


def _best_on_axes(
    ch: ChannelState, qos: QosSpec, p_ue: float, a1: np.ndarray, a2: np.ndarray
) -> tuple[tuple[float, float] | None, float, int, np.ndarray]:
    r_sum, feasible = _rate_grid(ch, qos, p_ue, a1, a2)
    count = int(feasible.sum())
    if count == 0:
        return None, -math.inf, 0, r_sum
    masked = np.where(feasible, r_sum, -np.inf)
    # C-order argmax: first max in row-major order, i.e. ties break on the
    # smallest alpha1 then the smallest alpha2
    i, j = np.unravel_index(int(np.argmax(masked)), masked.shape)
    return (float(a1[i]), float(a2[j])), float(masked[i, j]), count, r_sum


def grid_search(
    ch: ChannelState, qos: QosSpec, p_ue: float, spec: GridSpec = GridSpec()
) -> OracleResult:
    """Exhaustive search of [0, 0.5]^2 for the feasible sum-rate maximum.

    After the coarse pass the incumbent's one-cell neighbourhood is
    re-gridded at resolution/10 per refinement round.  Deterministic for
    fixed inputs regardless of evaluation order.
    """
    step = spec.resolution
    axis = _axis(0.0, 0.5, step)
    best, best_r, count, r_grid = _best_on_axes(ch, qos, p_ue, axis, axis)

    d1 = np.abs(np.diff(r_grid, axis=0)).max() if r_grid.shape[0] > 1 else 0.0
    d2 = np.abs(np.diff(r_grid, axis=1)).max() if r_grid.shape[1] > 1 else 0.0
    lipschitz = float(max(d1, d2)) / step

    if best is None:
        return OracleResult(None, 0.0, 0, lipschitz)

    for _ in range(spec.refine_rounds):
        step /= 10.0
        a1c, a2c = best
        ax1 = np.clip(_axis(a1c - 10.0 * step, a1c + 10.0 * step, step), 0.0, 0.5)
        ax2 = np.clip(_axis(a2c - 10.0 * step, a2c + 10.0 * step, step), 0.0, 0.5)
        fine_best, fine_r, _, _ = _best_on_axes(ch, qos, p_ue, ax1, ax2)
        if fine_best is not None and fine_r > best_r:
            best, best_r = fine_best, fine_r

    return OracleResult(PowerSplit(*best), best_r, count, lipschitz)


def local_feasible_exists(
    ch: ChannelState,
    qos: QosSpec,
    p_ue: float,
    around: PowerSplit,
    resolution: float,
    shrink: float = 10.0,
) -> bool:
    """Fine re-grid of one lattice cell around a point; True if any point
    in it is feasible.  Used to classify boundary-width disagreements."""
    step = resolution / shrink
    ax1 = np.clip(
        _axis(around.alpha1 - resolution, around.alpha1 + resolution, step), 0.0, 0.5
    )
    ax2 = np.clip(
        _axis(around.alpha2 - resolution, around.alpha2 + resolution, step), 0.0, 0.5
    )
    _, feasible = _rate_grid(ch, qos, p_ue, ax1, ax2)
    return bool(feasible.any())


def finite_diff(
    fn: Callable[[float], float],
    x: float,
    h: float,
    domain: tuple[float, float] | None = None,
) -> tuple[float, float]:
    """Central first and second difference quotients of fn at x.

    When `domain` is given, raises ValueError if the stencil [x-h, x+h]
    would leave it (fn is typically only defined on a power-fraction
    interval).
    """
    if h <= 0.0:
        raise ValueError("h must be > 0")
    if domain is not None and (x - h < domain[0] or x + h > domain[1]):
        raise ValueError(f"stencil [{x - h}, {x + h}] leaves the domain {domain}")
    f_hi = fn(x + h)
    f_lo = fn(x - h)
    f_0 = fn(x)
    return (f_hi - f_lo) / (2.0 * h), (f_hi - 2.0 * f_0 + f_lo) / (h * h)
