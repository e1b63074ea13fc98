"""Foliations of the annulus by graphs and their generating functions.

A foliation is a family of graphs ``theta -> eta(theta, c)`` labelled by their
mean value ``c``. Its generating function ``u`` satisfies
``du/dtheta = eta_c - c`` and ``u(0, c) = 0``; every regularity question about
the foliation (C1, Lipschitz, Holder) is asked of ``u`` or of ``eta``.
"""
import csv
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import RegularGridInterpolator

from ._numerics import gauss_legendre, simpson_periodic_mean
from .exceptions import InsufficientDataError, LabelingError


@dataclass(frozen=True)
class FoliationSpec:
    """Vectorized leaf function ``leaf(theta, c)`` with optional exact partials.

    ``d_theta`` and ``d_c`` are derivatives of ``eta`` in ``theta`` and ``c``.
    ``label_tol`` is the accepted error of the mean-value labelling.
    """

    leaf: Callable
    domain: Tuple[float, float] = (-np.inf, np.inf)
    d_theta: Optional[Callable] = None
    d_c: Optional[Callable] = None
    name: str = ""
    label_tol: float = 1e-6
    extras: dict = field(default_factory=dict, compare=False, repr=False)

    def __call__(self, theta, c):
        return self.leaf(theta, c)

    @classmethod
    def from_generating_function(cls, u_theta, u_theta_c=None, u_theta_theta=None,
                                 domain=(-np.inf, np.inf), name=""):
        """Foliation whose leaves are ``c + u_theta(theta, c)``."""
        d_c = None if u_theta_c is None else (lambda t, c: 1.0 + u_theta_c(t, c))
        return cls(leaf=lambda t, c: c + u_theta(t, c), domain=domain,
                   d_theta=u_theta_theta, d_c=d_c, name=name)


@dataclass
class GeneratingGrid:
    """Samples of ``u`` on ``theta_nodes x c_nodes``; arrays are indexed [i_theta, j_c]."""

    theta_nodes: np.ndarray
    c_nodes: np.ndarray
    u: np.ndarray
    du_dtheta: np.ndarray
    du_dc: np.ndarray
    foliation: Optional[FoliationSpec] = None

    @property
    def shape(self):
        return self.u.shape

    def to_csv(self, path):
        T, C = np.meshgrid(self.theta_nodes, self.c_nodes, indexing="ij")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["theta", "c", "u", "du_dtheta", "du_dc"])
            for row in zip(T.ravel(), C.ravel(), self.u.ravel(),
                           self.du_dtheta.ravel(), self.du_dc.ravel()):
                w.writerow([repr(float(v)) for v in row])


@dataclass(frozen=True)
class HolderFit:
    exponent: float
    constant: float
    r_squared: float
    pair_count: int
    sup_drift: float = 0.0


@dataclass(frozen=True)
class LipschitzFit:
    K_upper: float
    K_lower: float
    k_minus: float
    k_plus: float
    bilipschitz: bool


@dataclass(frozen=True)
class C1Report:
    """Largest jump of the c-derivative of ``u`` between neighbouring cells."""

    max_jump: float
    theta_at_max: float
    c_at_max: float
    cell_jumps: np.ndarray
    cell_centers: np.ndarray
    flagged_c: np.ndarray

    @property
    def flagged(self):
        return self.flagged_c.size > 0


@dataclass(frozen=True)
class MixedPartialsReport:
    max_discrepancy: float
    theta_at_max: float
    c_at_max: float
    row_max: np.ndarray
    row_centers: np.ndarray
    method: str


def _check_window(fol, window):
    lo, hi = float(window[0]), float(window[1])
    if not lo < hi:
        raise ValueError("window must satisfy lo < hi")
    if lo < fol.domain[0] or hi > fol.domain[1]:
        raise ValueError(f"window {window} leaves the foliation domain {fol.domain}")
    return lo, hi


def leaf_mean(fol, c, N=1025):
    theta = np.linspace(0.0, 1.0, N)
    return float(simpson_periodic_mean(fol.leaf(theta, np.full_like(theta, c))))


def _cumulative(values, theta):
    return cumulative_simpson(values, x=theta, axis=0, initial=0.0)


def build_generating_function(fol, N, M, window, label_tol=None):
    """Tabulate ``u(theta, c) = int_0^theta (eta_c - c)`` on an N x M grid.

    The theta integral is a cumulative composite Simpson rule per c-node.
    ``du_dtheta`` is ``eta - c`` itself; ``du_dc`` integrates the exact
    c-partial of the leaves when the foliation provides one, and otherwise
    differentiates ``u`` by second-order central differences.
    """
    if N < 8 or M < 8:
        raise ValueError("N and M must be at least 8")
    lo, hi = _check_window(fol, window)
    tol = fol.label_tol if label_tol is None else label_tol
    theta = np.linspace(0.0, 1.0, N)
    c = np.linspace(lo, hi, M)
    T, C = np.meshgrid(theta, c, indexing="ij")
    eta = fol.leaf(T, C)
    means = simpson_periodic_mean(eta, axis=0)
    bad = np.abs(means - c) > tol
    if np.any(bad):
        j = int(np.argmax(np.abs(means - c)))
        raise LabelingError(f"leaf c={c[j]:.6g} has mean {means[j]:.10g}")
    du_dtheta = eta - C
    u = _cumulative(du_dtheta, theta)
    if fol.d_c is not None:
        du_dc = _cumulative(fol.d_c(T, C) - 1.0, theta)
    else:
        du_dc = np.gradient(u, c, axis=1, edge_order=2)
    return GeneratingGrid(theta, c, u, du_dtheta, du_dc, fol)


def grid_from_function(u, u_theta, u_c, theta_nodes, c_nodes, foliation=None):
    """Grid built directly from a closed-form generating function."""
    T, C = np.meshgrid(theta_nodes, c_nodes, indexing="ij")
    return GeneratingGrid(np.asarray(theta_nodes, float), np.asarray(c_nodes, float),
                          u(T, C), u_theta(T, C), u_c(T, C), foliation)


def _cell_jumps(u, theta, c):
    """Per-cell jump of the one-sided c-slopes of ``u``, maximized over theta."""
    slopes = np.diff(u, axis=1) / np.diff(c)
    jumps = np.abs(slopes[:, 2:] - slopes[:, :-2])
    imax = np.argmax(jumps, axis=0)
    vals = jumps[imax, np.arange(jumps.shape[1])]
    centers = 0.5 * (c[1:-2] + c[2:-1])
    return vals, centers, theta[imax]


def c1_report(grid, ratio=0.8, floor=1e-8):
    """Locate c-cells where the c-derivative of ``u`` jumps.

    The jump is measured on the full grid and on grids keeping every second and
    every fourth c-node. A C1 function has jumps that roughly halve with each
    refinement; a cell whose jump keeps at least ``ratio`` of its coarser
    value across both refinements is flagged.
    """
    if grid.c_nodes.size < 64:
        raise ValueError("c1_report needs at least 64 c-nodes")
    u, theta, c = grid.u, grid.theta_nodes, grid.c_nodes
    j1, cen1, th1 = _cell_jumps(u, theta, c)
    j2, cen2, _ = _cell_jumps(u[:, ::2], theta, c[::2])
    j4, cen4, _ = _cell_jumps(u[:, ::4], theta, c[::4])

    def coarse(vals, cen, at):
        idx = np.clip(np.searchsorted(cen, at), 0, vals.size - 1)
        left = np.clip(idx - 1, 0, vals.size - 1)
        pick = np.where(np.abs(cen[left] - at) < np.abs(cen[idx] - at), left, idx)
        return vals[pick]

    r2 = coarse(j2, cen2, cen1)
    r4 = coarse(j4, cen4, cen1)
    flags = (j1 > floor) & (j1 >= ratio * r2) & (r2 >= ratio * r4)
    k = int(np.argmax(j1))
    return C1Report(float(j1[k]), float(th1[k]), float(cen1[k]), j1, cen1, cen1[flags])


def _sup_diff(fol, c1, c2, n):
    theta = np.arange(n) / n
    d = fol.leaf(theta[None, :], c2[:, None]) - fol.leaf(theta[None, :], c1[:, None])
    return np.max(np.abs(d), axis=1)


def holder_fit(fol, window, pair_count=40, seed=0, gap_range=(1e-6, 1e-1),
               resolutions=(256, 512, 1024)):
    """Fit ``sup_theta |eta_c' - eta_c| ~ K |c' - c|**alpha`` on log-log axes.

    Gaps are log-uniform in ``gap_range``; the sup over theta is taken on the
    finest of ``resolutions`` and ``sup_drift`` reports its relative change
    from the next coarser one.
    """
    if pair_count < 20:
        raise ValueError("holder_fit needs at least 20 pairs")
    lo, hi = _check_window(fol, window)
    g_lo, g_hi = gap_range
    g_hi = min(g_hi, 0.5 * (hi - lo))
    rng = np.random.default_rng(seed)
    gaps = np.exp(rng.uniform(np.log(g_lo), np.log(g_hi), pair_count))
    c1 = lo + rng.uniform(0.0, 1.0, pair_count) * (hi - lo - gaps)
    c2 = c1 + gaps
    sups = [_sup_diff(fol, c1, c2, n) for n in resolutions]
    fine = sups[-1]
    ok = fine > 0
    if np.count_nonzero(ok) < 10:
        raise InsufficientDataError("fewer than 10 pairs with distinct leaves")
    drift = float(np.max(np.abs(fine[ok] - sups[-2][ok]) / fine[ok])) if len(sups) > 1 else 0.0
    x = np.log(gaps[ok])
    y = np.log(fine[ok])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss_tot if ss_tot > 0 else 1.0
    return HolderFit(float(slope), float(np.exp(intercept)), float(np.clip(r2, 0.0, 1.0)),
                     int(np.count_nonzero(ok)), drift)


def bilipschitz_fit(fol, window, samples=4000, seed=0, grid=(128, 128), floor=1e-3):
    """Empirical Lipschitz bounds of ``c -> eta_c(theta)`` on a c-window.

    ``K_upper`` and ``K_lower`` are the largest and smallest difference
    quotients over sampled ``(theta, c1, c2)``; half of the theta samples sit
    on a uniform 64-point grid so that symmetric extrema are hit exactly.
    ``k_minus``/``k_plus`` bracket 99% of the cell values of the mixed
    partial of ``u`` on a ``grid``-sized lattice.
    """
    lo, hi = _check_window(fol, window)
    rng = np.random.default_rng(seed)
    half = samples // 2
    theta = np.concatenate([np.arange(half) % 64 / 64.0, rng.uniform(0.0, 1.0, samples - half)])
    a = rng.uniform(lo, hi, samples)
    b = rng.uniform(lo, hi, samples)
    keep = a != b
    c1, c2, th = np.minimum(a, b)[keep], np.maximum(a, b)[keep], theta[keep]
    q = (fol.leaf(th, c2) - fol.leaf(th, c1)) / (c2 - c1)
    nt, nc = grid
    t = np.arange(nt) / nt
    c = np.linspace(lo, hi, nc + 1)
    T, C = np.meshgrid(t, c, indexing="ij")
    cells = np.diff(fol.leaf(T, C), axis=1) / np.diff(c) - 1.0
    k_minus, k_plus = np.quantile(cells, [0.005, 0.995])
    k_lower = float(np.min(q))
    return LipschitzFit(float(np.max(q)), k_lower, float(k_minus), float(k_plus),
                        bool(k_lower > floor))


def _gl_cell_integrals(fun, nodes, n=16):
    """Integrals of a vectorized ``fun`` over each cell of ``nodes`` (last axis)."""
    x, w = gauss_legendre(n)
    a, b = nodes[:-1], nodes[1:]
    pts = 0.5 * (b - a)[:, None] * x + 0.5 * (b + a)[:, None]
    vals = fun(pts)
    return np.sum(vals * w, axis=-1) * 0.5 * (b - a)


def mixed_partials_check(grid, gl_order=16):
    """Compare the two orders of the mixed difference of ``u`` per grid cell.

    On a single grid both orders agree identically, so each order is
    evaluated through an independent route. With an exact c-partial of the
    leaves: ``A`` differences in c the theta-cell integrals of ``eta - c``,
    ``B`` integrates the exact mixed partial ``d eta/dc - 1`` over the cell,
    both divided by the cell area. Without it, mixed differences on the grid and on a
    half-cell staggered grid are compared at shared interior nodes.
    """
    fol = grid.foliation
    theta, c = grid.theta_nodes, grid.c_nodes
    if fol is not None and fol.d_c is not None:
        area = np.outer(np.diff(theta), np.diff(c))

        def eta_cells(cj):
            return _gl_cell_integrals(lambda t: fol.leaf(t, np.full_like(t, cj)) - cj,
                                      theta, gl_order)

        row_int = np.stack([eta_cells(cj) for cj in c], axis=1)
        d_a = np.diff(row_int, axis=1) / area

        x, w = gauss_legendre(gl_order)
        tq = 0.5 * np.diff(theta)[:, None] * x + 0.5 * (theta[1:] + theta[:-1])[:, None]
        cq = 0.5 * np.diff(c)[:, None] * x + 0.5 * (c[1:] + c[:-1])[:, None]
        vals = fol.d_c(tq[:, :, None, None], cq[None, None, :, :]) - 1.0
        cell = np.einsum("ikjl,k,l->ij", vals, w, w) * 0.25 * area
        d_b = cell / area
        disc = np.abs(d_a - d_b)
        tc = 0.5 * (theta[1:] + theta[:-1])
        cc = 0.5 * (c[1:] + c[:-1])
        method = "analytic"
    elif fol is not None:
        d1 = np.diff(np.diff(grid.u, axis=0), axis=1) / np.outer(np.diff(theta), np.diff(c))
        ts = 0.5 * (theta[1:] + theta[:-1])
        cs = 0.5 * (c[1:] + c[:-1])
        T, C = np.meshgrid(np.concatenate([[0.0], ts]), cs, indexing="ij")
        stag = _cumulative(fol.leaf(T, C) - C, T[:, 0])
        d2 = np.diff(np.diff(stag[1:], axis=0), axis=1) / np.outer(np.diff(ts), np.diff(cs))
        avg = 0.25 * (d1[1:, 1:] + d1[:-1, 1:] + d1[1:, :-1] + d1[:-1, :-1])
        disc = np.abs(avg - d2)
        tc, cc = theta[1:-1], c[1:-1]
        method = "staggered"
    else:
        raise ValueError("mixed_partials_check needs the grid's foliation")
    i, j = np.unravel_index(int(np.argmax(disc)), disc.shape)
    return MixedPartialsReport(float(disc[i, j]), float(tc[i]), float(cc[j]),
                               disc.max(axis=0), cc, method)


def area_between(fol, c, c2, theta1, theta2, panels=16, order=32):
    """Normalized area between leaves ``c < c2`` over ``[theta1, theta2]``."""
    if not c < c2:
        raise ValueError("area_between requires c < c2")
    if not theta1 < theta2 <= theta1 + 1.0:
        raise ValueError("need theta1 < theta2 <= theta1 + 1")
    edges = np.linspace(theta1, theta2, panels + 1)
    total = _gl_cell_integrals(lambda t: fol.leaf(t, np.full_like(t, c2))
                               - fol.leaf(t, np.full_like(t, c)), edges, order)
    return float(np.sum(total) / (c2 - c))


def standard_foliation():
    return FoliationSpec(leaf=lambda t, c: np.asarray(c, float) + 0.0 * np.asarray(t, float),
                         d_theta=lambda t, c: 0.0 * (np.asarray(t, float) + c),
                         d_c=lambda t, c: 1.0 + 0.0 * (np.asarray(t, float) + c),
                         name="standard")


def table_foliation(theta_nodes, c_nodes, eta, name="table", label_tol=1e-4):
    """Bilinear interpolant of tabulated leaves, 1-periodic in theta.

    ``theta_nodes`` must be increasing within [0, 1); a closing column at
    theta = 1 is appended when absent.
    """
    theta_nodes = np.asarray(theta_nodes, dtype=float)
    c_nodes = np.asarray(c_nodes, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if theta_nodes[-1] < 1.0:
        theta_nodes = np.append(theta_nodes, theta_nodes[0] + 1.0)
        eta = np.vstack([eta, eta[:1]])
    interp = RegularGridInterpolator((theta_nodes, c_nodes), eta)
    t0 = theta_nodes[0]

    def leaf(theta, c):
        theta, c = np.broadcast_arrays(np.asarray(theta, float), np.asarray(c, float))
        t = t0 + np.mod(theta - t0, 1.0)
        return interp(np.stack([t, c], axis=-1))

    return FoliationSpec(leaf=leaf, domain=(float(c_nodes[0]), float(c_nodes[-1])),
                         name=name, label_tol=label_tol)


def tabulate(fol, n_theta, c_nodes, name=None):
    """Sample a foliation on a lattice and return its bilinear table."""
    theta = np.arange(n_theta) / n_theta
    T, C = np.meshgrid(theta, c_nodes, indexing="ij")
    return table_foliation(theta, c_nodes, fol.leaf(T, C), name=name or f"{fol.name}-table")


def read_foliation_csv(path, **kwargs):
    """Load (theta, c, eta) triples on a full lattice into a table foliation."""
    with open(path, newline="") as fh:
        rows = np.array([[float(r["theta"]), float(r["c"]), float(r["eta"])]
                         for r in csv.DictReader(fh)])
    theta = np.unique(rows[:, 0])
    c = np.unique(rows[:, 1])
    eta = np.full((theta.size, c.size), np.nan)
    eta[np.searchsorted(theta, rows[:, 0]), np.searchsorted(c, rows[:, 1])] = rows[:, 2]
    if np.isnan(eta).any():
        raise ValueError("CSV does not cover a full theta x c lattice")
    return table_foliation(theta, c, eta, **kwargs)
