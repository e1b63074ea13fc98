"""Circle dynamics on invariant leaves: rotation numbers and semi-conjugacies.

The dynamics restricted to a leaf ``eta_c`` and projected to the angle is a
degree-one monotone circle map ``g_c``. Its rotation number is bracketed
rigorously from a single orbit, and the cumulative distribution of that
orbit (Birkhoff frequencies) gives the monotone map ``h_c`` with
``h_c o g_c = h_c + rho(c)``.
"""
import csv
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .exceptions import (InsufficientIterationsError, NotInvariantError, PreconditionError,
                         TorsionSignError)
from .maps import jacobian_array


@dataclass(frozen=True)
class CircleMapLift:
    """Lift ``g`` of a circle map (vectorized), optionally with a fast orbit routine.

    ``orbit_fn(x0, n)`` must return the ``n + 1`` lifted points
    ``x0, g(x0), ..., g^n(x0)``.
    """

    g: Callable
    orbit_fn: Optional[Callable] = None
    name: str = ""

    def __call__(self, x):
        return self.g(x)

    def orbit(self, x0, n):
        if self.orbit_fn is not None:
            return np.asarray(self.orbit_fn(float(x0), int(n)), dtype=float)
        out = np.empty(int(n) + 1)
        x = float(x0)
        out[0] = x
        g = self.g
        for k in range(1, int(n) + 1):
            x = float(g(x))
            out[k] = x
        return out

    def shifted(self, k):
        """The lift ``g + k``."""
        base = self

        def orbit_fn(x0, n):
            return base.orbit(x0, n) + k * np.arange(n + 1)

        return CircleMapLift(lambda x: base.g(x) + k, orbit_fn, self.name)


@dataclass(frozen=True)
class RotationNumber:
    """Estimate with a rigorous bracket ``lower <= rho <= upper``."""

    estimate: float
    lower: float
    upper: float
    iterations: int

    @property
    def error_bound(self):
        return 0.5 * (self.upper - self.lower)

    def __float__(self):
        return self.estimate


@dataclass
class ConjugacyData:
    """Birkhoff CDF of an orbit and its semi-conjugacy defect.

    ``h_samples`` are values of ``h`` at ``theta_nodes``; ``support`` holds the
    sorted orbit points mod 1 (None when ``h`` comes from a generating grid).
    ``atom_mass`` is the largest orbit fraction in a window of length
    ``1/orbit_length``; a large value signals concentration on a periodic
    orbit, where the CDF describes a periodic measure rather than a
    conjugacy.
    """

    rho: float
    h_samples: np.ndarray
    residual: float
    orbit_length: int
    theta_nodes: np.ndarray
    M_counts: Optional[np.ndarray] = None
    support: Optional[np.ndarray] = None
    atom_mass: float = 0.0
    flagged: bool = False
    rho_bracket: tuple = (np.nan, np.nan)
    node_residuals: Optional[np.ndarray] = field(default=None, repr=False)

    def h(self, theta):
        theta = np.asarray(theta, dtype=float)
        base = np.floor(theta)
        frac = theta - base
        if self.support is not None:
            return base + np.searchsorted(self.support, frac, side="left") / self.support.size
        nodes, vals = self.theta_nodes, self.h_samples
        if nodes[-1] < 1.0:
            nodes = np.append(nodes, 1.0)
            vals = np.append(vals, vals[0] + 1.0)
        return base + np.interp(frac, nodes, vals)

    def to_csv(self, path):
        res = self.node_residuals if self.node_residuals is not None else \
            np.full(self.theta_nodes.shape, np.nan)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["theta", "h", "residual"])
            for row in zip(self.theta_nodes, self.h_samples, res):
                w.writerow([repr(float(v)) for v in row])


@dataclass
class RhoProfile:
    c_nodes: np.ndarray
    rho_values: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    lower_lip: float
    upper_lip: float
    monotone: bool
    violations: np.ndarray

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["c", "rho", "bracket"])
            for c, r, lo, hi in zip(self.c_nodes, self.rho_values, self.lower, self.upper):
                w.writerow([repr(float(c)), repr(float(r)), repr(float(0.5 * (hi - lo)))])


@dataclass(frozen=True)
class RationalDensity:
    theta: np.ndarray
    density: np.ndarray
    h: np.ndarray
    s_q: np.ndarray
    p: int
    q: int


def _leaf_orbit(fmap, x0, r0, n):
    """Lifted angles of ``n`` forward iterates of ``(x0, r0)`` (length ``n + 1``)."""
    out = np.empty(n + 1)
    out[0] = x0
    if fmap.point is not None:
        x, r = float(x0), float(r0)
        step = fmap.point
        for k in range(1, n + 1):
            x, r = step(x, r)
            out[k] = x
    else:
        x, r = np.float64(x0), np.float64(r0)
        for k in range(1, n + 1):
            x, r = fmap.forward(x, r)
            out[k] = x
    return out


def leaf_orbits(fmap, fol, c_values, n, x0=0.0):
    """Orbits of ``(x0, eta_c(x0))`` for every ``c`` as an array ``(len(c), n + 1)``."""
    c_values = np.atleast_1d(np.asarray(c_values, dtype=float))
    r0 = fol.leaf(np.full(c_values.shape, x0), c_values)
    if fmap.point is not None:
        return np.stack([_leaf_orbit(fmap, x0, r, n) for r in r0])
    out = np.empty((c_values.size, n + 1))
    x = np.full(c_values.shape, float(x0))
    r = r0.copy()
    out[:, 0] = x
    for k in range(1, n + 1):
        x, r = fmap.forward(x, r)
        out[:, k] = x
    return out


def leaf_invariance_defect(fmap, fol, c, samples=64):
    theta = np.arange(samples) / samples
    cc = np.full(theta.shape, float(c))
    X, R = fmap.forward(theta, fol.leaf(theta, cc))
    return float(np.max(np.abs(R - fol.leaf(X, cc))))


def projected_circle_map(fmap, fol, c, tol=1e-8, samples=64, normalize=True):
    """Projected dynamics ``g_c(x) = F_1(x, eta_c(x))`` on the leaf ``c``.

    With ``normalize`` the lift is shifted by an integer so that
    ``g_c(0)`` lies in [0, 1).
    """
    dev = leaf_invariance_defect(fmap, fol, c, samples)
    if not dev <= tol:
        raise NotInvariantError(f"leaf c={c} moves by {dev:.3g} under the map", dev)
    c = float(c)

    def g(x):
        x = np.asarray(x, dtype=float)
        return fmap.forward(x, fol.leaf(x, np.full(x.shape, c)))[0]

    def orbit_fn(x0, n):
        return _leaf_orbit(fmap, x0, float(fol.leaf(np.float64(x0), np.float64(c))), n)

    lift = CircleMapLift(g, orbit_fn, name=f"{fmap.name}@c={c:g}")
    if normalize:
        k = -float(np.floor(g(0.0)))
        if k != 0.0:
            lift = lift.shifted(k)
    return lift


def bracket_from_orbit(xs):
    """Rigorous rotation-number bracket from a lifted orbit ``xs[0..n]``.

    For a monotone degree-one lift ``|g^k(x) - x - k rho| < 1`` for every k,
    so each iterate gives ``(x_k - x_0 - 1)/k < rho < (x_k - x_0 + 1)/k``.
    """
    xs = np.asarray(xs, dtype=float)
    k = np.arange(1, xs.size)
    d = xs[1:] - xs[0]
    lower = float(np.max((d - 1.0) / k))
    upper = float(np.min((d + 1.0) / k))
    est = float(np.clip(d[-1] / k[-1], lower, upper))
    return RotationNumber(est, lower, upper, int(k[-1]))


def rotation_number(g, n_max=10 ** 6, tol=None, x0=0.0, chunk=20000):
    """Rotation number of a degree-one monotone lift with a rigorous bracket.

    Iterates up to ``n_max`` times; with ``tol`` it stops as soon as the
    bracket half-width is below ``tol``.
    """
    if n_max < 100:
        raise InsufficientIterationsError("rotation_number needs n_max >= 100")
    if tol is None:
        return bracket_from_orbit(g.orbit(x0, n_max))
    pieces = [np.array([float(x0)])]
    done = 0
    while done < n_max:
        m = min(chunk, n_max - done)
        seg = g.orbit(pieces[-1][-1], m)
        pieces.append(seg[1:])
        done += m
        rn = bracket_from_orbit(np.concatenate(pieces))
        if rn.error_bound <= tol:
            return rn
    return rn


def _count_cdf(support, theta):
    theta = np.asarray(theta, dtype=float)
    base = np.floor(theta)
    return base + np.searchsorted(support, theta - base, side="left") / support.size


def measure_cdf(g, theta_nodes, N=100000, x0=0.0, orbit=None):
    """Birkhoff CDF ``h(theta) = #{j < N : g^j(x0) mod 1 < theta} / N``.

    ``orbit`` may supply precomputed lifted iterates ``x0, ..., g^N(x0)``.
    The rotation number and its bracket come from the same orbit.
    """
    theta_nodes = np.asarray(theta_nodes, dtype=float)
    xs = g.orbit(x0, N) if orbit is None else np.asarray(orbit, dtype=float)[: N + 1]
    rn = bracket_from_orbit(xs)
    support = np.sort(np.mod(xs[:N], 1.0))
    counts = np.searchsorted(support, np.mod(theta_nodes, 1.0), side="left")
    h = _count_cdf(support, theta_nodes)
    ext = np.concatenate([support, support + 1.0])
    hi = np.searchsorted(ext, support + 1.0 / N, side="right")
    atom = float(np.max(hi - np.arange(N)) / N)
    data = ConjugacyData(rn.estimate, h, 0.0, N, theta_nodes, counts, support, atom,
                         rho_bracket=(rn.lower, rn.upper))
    data.node_residuals = _node_residuals(data, g)
    data.residual = float(np.max(data.node_residuals))
    data.flagged = bool(data.residual > 5.0 / N or atom > 0.25)
    return data


def _node_residuals(data, g):
    th = data.theta_nodes
    return np.abs(data.h(g(th)) - data.h(th) - data.rho)


def semiconjugacy_residual(data, g):
    """``sup |h(g(theta)) - h(theta) - rho|`` over the data's nodes."""
    return float(np.max(_node_residuals(data, g)))


def conjugacy_from_grid(grid, j, rho):
    """``h_c = theta + du/dc`` at c-node ``j`` of a generating grid."""
    theta = grid.theta_nodes
    return ConjugacyData(float(rho), theta + grid.du_dc[:, j], 0.0, 0, theta)


def rational_leaf_density(fmap, fol, c, q, p=None, n_theta=1024, tol=1e-6, check_iter=1000):
    """Density ``1/sqrt(s_q)`` (normalized) of the invariant measure on a periodic leaf.

    ``s_q`` is the upper-right entry of ``DF^q`` along the leaf. The leaf
    must consist of ``q``-periodic points: ``F^q(x) = x + (p, 0)`` is checked
    on 16 samples and the rotation bracket must meet ``[p/q - 1/q, p/q + 1/q]``.
    """
    q = int(q)
    if q < 1:
        raise ValueError("q must be positive")
    cc = float(c)
    t16 = np.arange(16) / 16
    r16 = fol.leaf(t16, np.full(16, cc))
    X, R = t16, r16
    for _ in range(q):
        X, R = fmap.forward(X, R)
    if p is None:
        p = int(np.rint(np.mean(X - t16)))
    dev = float(np.max(np.hypot(X - t16 - p, R - r16)))
    if dev > tol:
        raise PreconditionError(f"F^{q} is not a shift by ({p}, 0) on leaf c={cc}: {dev:.3g}")
    rn = bracket_from_orbit(_leaf_orbit(fmap, 0.0, float(r16[0]), check_iter))
    if rn.upper < p / q - 1.0 / q or rn.lower > p / q + 1.0 / q:
        raise PreconditionError(f"rotation bracket [{rn.lower}, {rn.upper}] far from {p}/{q}")
    theta = np.arange(n_theta) / n_theta
    x, r = theta, fol.leaf(theta, np.full(n_theta, cc))
    prod = np.broadcast_to(np.eye(2), (n_theta, 2, 2)).copy()
    for _ in range(q):
        prod = jacobian_array(fmap, x, r) @ prod
        x, r = fmap.forward(x, r)
    s_q = prod[:, 0, 1]
    if np.any(s_q <= 0):
        i = int(np.argmin(s_q))
        raise TorsionSignError(f"s_{q} = {s_q[i]:.3g} <= 0 at theta={theta[i]:.6g}")
    w = 1.0 / np.sqrt(s_q)
    density = w / np.mean(w)
    h = np.concatenate([[0.0], np.cumsum(0.5 * (density + np.roll(density, -1)))]) / n_theta
    return RationalDensity(np.append(theta, 1.0), np.append(density, density[0]), h, s_q, p, q)


def rho_profile(fmap, fol, c_nodes, n_max=10000, tol=1e-8):
    """Rotation numbers along ``c_nodes`` in the map's own lift.

    Reports min/max difference quotients as Lipschitz bounds and flags any
    decrease that exceeds the combined brackets.
    """
    c_nodes = np.asarray(c_nodes, dtype=float)
    for c in c_nodes:
        dev = leaf_invariance_defect(fmap, fol, c)
        if not dev <= tol:
            raise NotInvariantError(f"leaf c={c} moves by {dev:.3g} under the map", dev)
    orbits = leaf_orbits(fmap, fol, c_nodes, n_max)
    rns = [bracket_from_orbit(o) for o in orbits]
    rho = np.array([r.estimate for r in rns])
    lo = np.array([r.lower for r in rns])
    hi = np.array([r.upper for r in rns])
    if c_nodes.size > 1:
        quot = np.diff(rho) / np.diff(c_nodes)
        bad = np.nonzero(hi[1:] < lo[:-1])[0]
        lower_lip, upper_lip = float(np.min(quot)), float(np.max(quot))
    else:
        bad = np.array([], dtype=int)
        lower_lip = upper_lip = np.nan
    return RhoProfile(c_nodes, rho, lo, hi, lower_lip, upper_lip, bad.size == 0, c_nodes[bad])
