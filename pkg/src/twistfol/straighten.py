"""Straightening maps built from generating functions, and their smoothings.

A generating function ``u`` defines ``Phi(x, c) = (theta, r)`` implicitly by
``x = theta + du/dc(theta, c)`` and ``r = c + du/dtheta(theta, c)``. ``Phi``
carries the horizontal line ``c`` onto the leaf ``eta_c`` and preserves
area; it exists as a homeomorphism only when every
``theta -> theta + du/dc`` is increasing and ``u`` is C1.
"""
import csv
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.signal import fftconvolve

from ._numerics import bisect_increasing, bump, gauss_legendre, wrap_angle
from .exceptions import DomainError, NotStraightenableError
from .foliation import GeneratingGrid, c1_report


class _PeriodicBilinear:
    """Bilinear interpolant on a uniform grid, 1-periodic in the first variable.

    The first axis holds nodes ``0, 1/(N-1), ..., 1`` with the last row a
    copy of the first.
    """

    def __init__(self, theta, c, values):
        self.n = theta.size - 1
        self.c0 = c[0]
        self.dc = (c[-1] - c[0]) / (c.size - 1)
        self.m = c.size - 1
        self.v = values

    def __call__(self, theta, c):
        t = np.mod(theta, 1.0) * self.n
        i = np.clip(np.floor(t).astype(int), 0, self.n - 1)
        ft = t - i
        s = (c - self.c0) / self.dc
        j = np.clip(np.floor(s).astype(int), 0, self.m - 1)
        fc = s - j
        v = self.v
        return ((1 - ft) * (1 - fc) * v[i, j] + ft * (1 - fc) * v[i + 1, j]
                + (1 - ft) * fc * v[i, j + 1] + ft * fc * v[i + 1, j + 1])


@dataclass(frozen=True)
class StraighteningMap:
    """``forward(x, c) -> (theta, r)`` and ``inverse(theta, r) -> (x, c)``."""

    forward: Callable
    inverse: Callable
    source_grid: Optional[GeneratingGrid] = None

    def export_samples(self, path, x, c):
        x, c = np.broadcast_arrays(np.asarray(x, float), np.asarray(c, float))
        th, r = self.forward(x, c)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "c", "theta", "r"])
            for row in zip(x.ravel(), c.ravel(), np.ravel(th), np.ravel(r)):
                w.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_conjugator(cls, psi):
        return cls(psi.forward, psi.inverse, None)


def monotonicity_margins(grid, stride=1):
    """Per c-node minimum of the slopes of ``theta + du/dc`` on every ``stride``-th theta node."""
    th = grid.theta_nodes[::stride]
    h = th[:, None] + grid.du_dc[::stride]
    return np.min(np.diff(h, axis=0) / np.diff(th)[:, None], axis=0)


def build_straightening(grid, threshold=1e-9, check_c1=True):
    """Straightening map of a generating grid, after checking its hypotheses.

    Raises :class:`NotStraightenableError` naming a c-node when the c1 report
    flags a jump of ``du/dc`` (grids with at least 64 c-nodes) or when
    ``theta -> theta + du/dc`` has slope at most ``threshold`` somewhere on
    both the full and the half theta resolution. ``forward`` inverts the
    bilinear interpolant of ``theta + du/dc`` by 60 bisection steps; the
    inverse solves the increasing map ``c -> c + du/dtheta`` the same way.
    """
    theta, c = grid.theta_nodes, grid.c_nodes
    if not (np.isclose(theta[0], 0.0) and np.isclose(theta[-1], 1.0)):
        raise ValueError("grid theta nodes must span [0, 1]")
    if check_c1 and c.size >= 64:
        rep = c1_report(grid)
        if rep.flagged:
            c_bad = float(rep.flagged_c[np.argmin(np.abs(rep.flagged_c - rep.c_at_max))])
            raise NotStraightenableError(f"du/dc jumps by {rep.max_jump:.3g} near c={c_bad:.6g}",
                                         c_node=c_bad, reason="c1")
    full = monotonicity_margins(grid, 1)
    half = monotonicity_margins(grid, 2)
    bad = (full <= threshold) & (half <= threshold)
    if np.any(bad):
        j = int(np.argmin(np.where(bad, full, np.inf)))
        raise NotStraightenableError(
            f"theta + du/dc is not increasing at c={c[j]:.6g} (min slope {full[j]:.3g})",
            c_node=float(c[j]), reason="monotonicity")
    duc = _PeriodicBilinear(theta, c, grid.du_dc)
    dut = _PeriodicBilinear(theta, c, grid.du_dtheta)
    c_lo, c_hi = c[0], c[-1]

    def forward(x, cc):
        x, cc = np.broadcast_arrays(np.asarray(x, float), np.asarray(cc, float))
        if np.any((cc < c_lo) | (cc > c_hi)):
            raise DomainError("c outside the grid window")
        n = np.floor(x)
        tf = bisect_increasing(lambda t: t + duc(t, cc), x - n, 0.0, 1.0)
        return n + tf, cc + dut(tf, cc)

    def inverse(th, r):
        th, r = np.broadcast_arrays(np.asarray(th, float), np.asarray(r, float))
        lo_r = c_lo + dut(th, np.full(th.shape, c_lo))
        hi_r = c_hi + dut(th, np.full(th.shape, c_hi))
        if np.any((r < lo_r - 1e-12) | (r > hi_r + 1e-12)):
            raise DomainError("point lies outside the leaves of the grid window")
        cc = bisect_increasing(lambda s: s + dut(th, s), r, c_lo, c_hi)
        return th + duc(th, cc), cc

    return StraighteningMap(forward, inverse, grid)


def _shoelace(x, y):
    return 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)


def area_distortion(phi, rectangles, refinement=1024):
    """Largest ``|area(phi(R))/area(R) - 1|`` over rectangles ``(x0, x1, c0, c1)``."""
    worst = 0.0
    s = np.linspace(0.0, 1.0, refinement, endpoint=False)
    for x0, x1, c0, c1 in rectangles:
        bx = np.concatenate([x0 + (x1 - x0) * s, np.full(refinement, x1),
                             x1 - (x1 - x0) * s, np.full(refinement, x0)])
        bc = np.concatenate([np.full(refinement, c0), c0 + (c1 - c0) * s,
                             np.full(refinement, c1), c1 - (c1 - c0) * s])
        th, r = phi.forward(bx, bc)
        area = abs(_shoelace(np.asarray(th), np.asarray(r)))
        worst = max(worst, abs(area / ((x1 - x0) * (c1 - c0)) - 1.0))
    return float(worst)


def random_rectangles(window, count=20, seed=0, max_side=0.3):
    rng = np.random.default_rng(seed)
    lo, hi = window
    out = []
    for _ in range(count):
        w = rng.uniform(0.05, max_side)
        h = rng.uniform(0.05, max_side) * (hi - lo)
        h = min(h, 0.9 * (hi - lo))
        x0 = rng.uniform(0.0, 1.0)
        c0 = rng.uniform(lo, hi - h)
        out.append((x0, x0 + w, c0, c0 + h))
    return out


def arnold_liouville_residual(fmap, phi, profile, samples=200, window=None, seed=0):
    """``sup |Phi^-1 f Phi(x, c) - (x + rho(c), c)|`` with angles compared mod 1.

    ``profile`` is a :class:`RhoProfile` (interpolated linearly) or a callable.
    ``samples`` is an ``(x, c)`` array pair or a count of random points in
    ``window`` (default: the profile's node range).
    """
    rho = profile if callable(profile) else \
        (lambda c: np.interp(c, profile.c_nodes, profile.rho_values))
    if np.ndim(samples) == 0:
        if window is None:
            window = (profile.c_nodes[0], profile.c_nodes[-1])
        rng = np.random.default_rng(seed)
        x = rng.uniform(0.0, 1.0, int(samples))
        c = rng.uniform(window[0], window[1], int(samples))
    else:
        x, c = (np.asarray(a, float) for a in samples)
    th, r = phi.forward(x, c)
    th2, r2 = fmap.forward(th, r)
    x2, c2 = phi.inverse(th2, r2)
    err = np.maximum(np.abs(wrap_angle(x2 - x - rho(c))), np.abs(c2 - c))
    return float(np.max(err))


@dataclass
class MollifiedFamily:
    epsilon_values: np.ndarray
    u_eps_grids: list
    c1_errors: np.ndarray
    window: tuple

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["epsilon", "c1_error"])
            for e, v in zip(self.epsilon_values, self.c1_errors):
                w.writerow([repr(float(e)), repr(float(v))])


def bump_kernel(eps, dtheta, dc):
    """Radial bump ``exp(-1/(1 - |z|^2))`` of radius ``eps`` sampled on the grid, unit mass."""
    nt = int(np.floor(eps / dtheta))
    nc = int(np.floor(eps / dc))
    if nt < 1 or nc < 1:
        raise DomainError(f"epsilon={eps} is below the grid spacing")
    T, C = np.meshgrid(np.arange(-nt, nt + 1) * dtheta, np.arange(-nc, nc + 1) * dc,
                       indexing="ij")
    k = bump((T * T + C * C) / (eps * eps))
    return k / k.sum()


def _c1_parts(u, theta, c):
    return u, np.gradient(u, theta, axis=0, edge_order=2), np.gradient(u, c, axis=1, edge_order=2)


def mollify(grid, epsilons):
    """Convolve ``u`` with bump kernels of the given radii.

    The convolution wraps in theta and repeats edge values in c; every
    result is then trimmed to the c-nodes at least ``max(epsilons)`` from the
    window edges, where it is exact. C1 errors compare values and
    second-order finite-difference gradients on that common window.
    """
    theta, c = grid.theta_nodes, grid.c_nodes
    eps = np.asarray(epsilons, dtype=float)
    emax = float(np.max(eps))
    keep = (c >= c[0] + emax - 1e-12) & (c <= c[-1] - emax + 1e-12)
    if np.count_nonzero(keep) < 3:
        raise DomainError("c-window too small to shrink by the largest epsilon")
    dt = theta[1] - theta[0]
    dc = c[1] - c[0]
    u = grid.u[:-1]
    ref = _c1_parts(grid.u, theta, c)
    grids, errs = [], []
    for e in eps:
        k = bump_kernel(e, dt, dc)
        pt, pc = k.shape[0] // 2, k.shape[1] // 2
        padded = np.pad(np.pad(u, ((pt, pt), (0, 0)), mode="wrap"), ((0, 0), (pc, pc)),
                        mode="edge")
        ue = fftconvolve(padded, k[::-1, ::-1], mode="valid")
        ue = np.vstack([ue, ue[:1]])
        parts = _c1_parts(ue, theta, c)
        err = max(float(np.max(np.abs(a[:, keep] - b[:, keep]))) for a, b in zip(parts, ref))
        grids.append(GeneratingGrid(theta, c[keep], ue[:, keep], parts[1][:, keep],
                                    parts[2][:, keep], grid.foliation))
        errs.append(err)
    return MollifiedFamily(eps, grids, np.array(errs), (float(c[keep][0]), float(c[keep][-1])))


def bump_1d(eps, order=64):
    """Gauss-Legendre nodes and weights of the unit-mass 1-D bump on [-eps, eps]."""
    x, w = gauss_legendre(order)
    k = bump(x * x)
    wk = w * k
    return eps * x, wk / wk.sum()


def convolve_1d(g, eps, points, order=64):
    """``(g * v_eps)(points)`` by Gauss-Legendre quadrature of the bump."""
    s, w = bump_1d(eps, order)
    points = np.asarray(points, dtype=float)
    return np.sum(g(points[..., None] - s) * w, axis=-1)


def monotone_convolution_check(g, eps, samples=10000, window=(-5.0, 5.0)):
    """Minimum increment of ``g * v_eps`` on a sorted sample grid; positive means increasing."""
    pts = np.linspace(window[0], window[1], samples)
    vals = convolve_1d(g, eps, pts)
    d = np.diff(vals)
    return float(np.min(d)), bool(np.all(d > 0))
