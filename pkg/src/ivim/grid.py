"""Uniform grids and first-order B-spline (hat function) interpolation.

The iteration state space is the span of the hat functions ``phi_2 .. phi_n``
on a uniform grid over ``[a, T]``: piecewise-linear functions that vanish at
the left endpoint.  ``phi_1`` is deliberately excluded, so every element of
the space satisfies ``v(a) = 0``; this is what makes the left endpoint term
drop out of the quadrature in the default solver mode.

Index conventions follow the usual 1-based numbering of the nodes
(``t_1 = a``, ``t_n = T``); the underlying numpy arrays are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "Grid",
    "PiecewiseLinear",
    "make_grid",
    "hat_eval",
    "mu_weight",
    "interp_eval",
    "project_samples",
]


@dataclass(frozen=True)
class Grid:
    """Uniform partition of ``[a, T]`` into ``n - 1`` cells.

    Attributes
    ----------
    a, T : float
        Interval endpoints, ``T > a``.
    n : int
        Number of nodes, ``n >= 2``.
    h : float
        Cell width ``(T - a) / (n - 1)``.
    nodes : ndarray of shape (n,)
        ``nodes[i] = a + i * h`` (0-based), with the endpoints exact.
    """

    a: float
    T: float
    n: int
    h: float
    nodes: np.ndarray

    def __post_init__(self):
        self.nodes.flags.writeable = False


def make_grid(a: float, T: float, n: int) -> Grid:
    """Build a uniform grid with ``n`` nodes on ``[a, T]``.

    Raises
    ------
    ValueError
        If ``T <= a`` (invalid interval) or ``n < 2`` (too few nodes).
    """
    a = float(a)
    T = float(T)
    if not (np.isfinite(a) and np.isfinite(T)):
        raise ValueError("grid endpoints must be finite")
    if T <= a:
        raise ValueError(f"invalid interval: T={T} must exceed a={a}")
    n = int(n)
    if n < 2:
        raise ValueError(f"too few nodes: n={n}, need at least 2")
    h = (T - a) / (n - 1)
    nodes = np.linspace(a, T, n)
    return Grid(a=a, T=T, n=n, h=h, nodes=nodes)


def hat_eval(grid: Grid, i: int, t: float) -> float:
    """Evaluate the hat function ``phi_i`` at ``t``.

    ``phi_i`` equals 1 at node ``t_i``, 0 at every other node, and is
    supported on ``[t_{i-1}, t_{i+1}]`` (one-sided for ``i = n``).  The index
    ``i`` is 1-based and restricted to ``2 .. n`` since ``phi_1`` is not part
    of the basis.
    """
    i = int(i)
    if i < 2 or i > grid.n:
        raise ValueError(f"basis index out of range: i={i}, valid range is 2..{grid.n}")
    t = float(t)
    if t < grid.a or t > grid.T:
        raise ValueError(f"t={t} outside [{grid.a}, {grid.T}]")
    center = grid.nodes[i - 1]
    if t == center:
        return 1.0
    left = grid.nodes[i - 2]
    if t <= left:
        return 0.0
    if t < center:
        return (t - left) / grid.h
    # falling branch; absent for the last node
    if i == grid.n:
        return 0.0  # unreachable given t <= T == center, kept for clarity
    right = grid.nodes[i]
    if t >= right:
        return 0.0
    return (right - t) / grid.h


def mu_weight(r: int, i: int, h: float) -> float:
    """Integral of ``phi_r`` over ``[a, t_i]``.

    Equals 0 when the support lies right of ``t_i`` (``i <= r - 1``), ``h/2``
    when the upper limit cuts the hat at its peak (``i = r``) and ``h`` once
    the full hat is covered (``i >= r + 1``).  These are the weights that turn
    the interpolated integrand into a plain nodal sum.
    """
    r = int(r)
    i = int(i)
    if r < 2 or i < 2:
        raise ValueError(f"indices out of range: r={r}, i={i}, both must be >= 2")
    if i <= r - 1:
        return 0.0
    if i == r:
        return h / 2.0
    return float(h)


@dataclass(frozen=True)
class PiecewiseLinear:
    """Element of the hat-function space: nodal values, zero at the left end.

    Evaluation between nodes is exact linear interpolation of the two
    bracketing nodal values.  Instances are immutable and safe to share.
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=float)
        if vals.shape != (self.grid.n,):
            raise ValueError(
                f"expected {self.grid.n} nodal values, got shape {vals.shape}"
            )
        if vals[0] != 0.0:
            raise ValueError("nodal value at t_1 = a must be 0")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def __call__(self, t: float) -> float:
        return interp_eval(self, t)


def interp_eval(pl: PiecewiseLinear, t: float) -> float:
    """Evaluate a piecewise-linear element at ``t`` in ``[a, T]``.

    Exactly reproduces nodal values at the nodes and returns 0 at ``t = a``.
    """
    grid = pl.grid
    t = float(t)
    if t < grid.a or t > grid.T:
        raise ValueError(f"t={t} outside [{grid.a}, {grid.T}]")
    return float(np.interp(t, grid.nodes, pl.values))


def project_samples(grid: Grid, sampler: Callable[[float], float]) -> PiecewiseLinear:
    """Sample a function at the grid nodes and wrap it as a basis element.

    The value at the first node is pinned to 0 regardless of ``sampler(a)``,
    since every element of the space vanishes there.
    """
    values = np.zeros(grid.n)
    for idx in range(1, grid.n):
        v = float(sampler(float(grid.nodes[idx])))
        if not np.isfinite(v):
            raise ValueError(
                f"sampler returned non-finite value {v!r} at node {idx + 1} "
                f"(t={grid.nodes[idx]})"
            )
        values[idx] = v
    return PiecewiseLinear(grid=grid, values=values)
