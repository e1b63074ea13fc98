"""Twist maps of the annulus, handled through lifts to the plane.

A map is stored as a pair of vectorized callables ``forward(x, r)`` and
``inverse(x, r)`` returning ``(x', r')``; ``x`` is the lifted angle. An optional
``differential(x, r)`` returns the Jacobian as an array of shape ``(..., 2, 2)``.
"""
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .exceptions import DivergenceError, NonGraphError, StepSizeError

DIVERGENCE_BOUND = 1e6


@dataclass(frozen=True)
class LiftPoint:
    x: float
    r: float

    def __post_init__(self):
        if not (np.isfinite(self.x) and np.isfinite(self.r)):
            raise ValueError("LiftPoint coordinates must be finite")

    def project(self):
        return AnnulusPoint(self.x % 1.0, self.r)


@dataclass(frozen=True)
class AnnulusPoint:
    theta: float
    r: float

    def __post_init__(self):
        if not 0.0 <= self.theta < 1.0:
            raise ValueError(f"theta must lie in [0, 1), got {self.theta}")


@dataclass(frozen=True)
class Jacobian2:
    """Row-major 2x2 differential ``[[a, b], [c, d]]``."""

    a: float
    b: float
    c: float
    d: float

    @property
    def det(self):
        return self.a * self.d - self.b * self.c

    def as_array(self):
        return np.array([[self.a, self.b], [self.c, self.d]])

    @classmethod
    def from_array(cls, m):
        m = np.asarray(m, dtype=float)
        return cls(float(m[0, 0]), float(m[0, 1]), float(m[1, 0]), float(m[1, 1]))


@dataclass(frozen=True)
class TwistMapSpec:
    """A lift ``F`` of an annulus map together with its inverse.

    ``torsion_bounds`` are the declared minimum and maximum of dF1/dr on the
    strip ``strip = (r_lo, r_hi)``; both are optional metadata that the
    checks below can confirm. ``point`` is an optional scalar version of
    ``forward`` used for long single orbits, where per-call array overhead
    dominates.
    """

    forward: Callable
    inverse: Callable
    differential: Optional[Callable] = None
    torsion_bounds: Optional[Tuple[float, float]] = None
    strip: Optional[Tuple[float, float]] = None
    symplectic: bool = True
    name: str = ""
    point: Optional[Callable] = None
    extras: dict = field(default_factory=dict, compare=False, repr=False)


def _check_bound(r):
    if np.any(~np.isfinite(r)) or np.any(np.abs(r) > DIVERGENCE_BOUND):
        raise DivergenceError(f"orbit left |r| <= {DIVERGENCE_BOUND:g}")


def iterate(fmap, x, r, n):
    """Apply ``F**n`` to (arrays of) points; negative ``n`` uses the inverse."""
    step = fmap.forward if n >= 0 else fmap.inverse
    x = np.asarray(x, dtype=float)
    r = np.asarray(r, dtype=float)
    for _ in range(abs(int(n))):
        x, r = step(x, r)
        _check_bound(r)
    return x, r


def map_eval_lift(fmap, p, n):
    """Return ``F**n(p)`` as a :class:`LiftPoint`."""
    x, r = iterate(fmap, p.x, p.r, n)
    return LiftPoint(float(x), float(r))


def fd_step(v):
    return np.maximum(1e-6, 1e-8 * (1.0 + np.abs(v)))


def fd_jacobian(fun, x, r):
    """Central-difference Jacobian of a vectorized planar map, shape (..., 2, 2)."""
    x = np.asarray(x, dtype=float)
    r = np.asarray(r, dtype=float)
    hx, hr = fd_step(x), fd_step(r)
    if np.any(x + hx == x) or np.any(r + hr == r):
        raise StepSizeError("finite-difference step underflows at this point")
    xp, rp = fun(x + hx, r)
    xm, rm = fun(x - hx, r)
    xu, ru = fun(x, r + hr)
    xd, rd = fun(x, r - hr)
    jac = np.empty(np.broadcast(x, r).shape + (2, 2))
    jac[..., 0, 0] = (xp - xm) / (2 * hx)
    jac[..., 1, 0] = (rp - rm) / (2 * hx)
    jac[..., 0, 1] = (xu - xd) / (2 * hr)
    jac[..., 1, 1] = (ru - rd) / (2 * hr)
    return jac


def jacobian_array(fmap, x, r, allow_fd=True):
    if fmap.differential is not None:
        return np.asarray(fmap.differential(np.asarray(x, float), np.asarray(r, float)))
    if not allow_fd:
        raise ValueError("map has no differential and finite differences are disabled")
    return fd_jacobian(fmap.forward, x, r)


def map_jacobian(fmap, p, allow_fd=True):
    return Jacobian2.from_array(jacobian_array(fmap, p.x, p.r, allow_fd))


def _strip_grid(strip, grid):
    r_lo, r_hi = strip
    if np.ndim(grid) == 0:
        grid = (int(grid), int(grid))
    nx, nr = grid
    xs = np.arange(nx) / nx
    rs = np.linspace(r_lo, r_hi, nr)
    return np.meshgrid(xs, rs, indexing="ij")


def twist_margin(fmap, strip, grid=(256, 256)):
    """Minimum over a grid of the finite-difference derivative dF1/dr.

    ``strip`` is ``(r_lo, r_hi)`` over the full circle; a positive value
    certifies the twist condition on the sampled grid.
    """
    return iterated_twist_margin(fmap, 1, strip, grid)


def iterated_twist_margin(fmap, n, strip, grid=(256, 256)):
    if n < 1:
        raise ValueError("n must be positive")
    X, R = _strip_grid(strip, grid)
    h = fd_step(R)
    up, _ = iterate(fmap, X, R + h, n)
    dn, _ = iterate(fmap, X, R - h, n)
    return float(np.min((up - dn) / (2 * h)))


def exactness_flux(fmap, curve_r):
    """Signed area between a sampled graph and its image.

    ``curve_r`` holds the graph values at ``theta_i = i/N``, ``i < N`` (closed
    curve, the endpoint is not repeated). Both integrals use the trapezoid
    rule; the image must again be a graph, otherwise :class:`NonGraphError`
    names the first offending sample.
    """
    curve_r = np.asarray(curve_r, dtype=float)
    n = curve_r.size
    theta = np.arange(n) / n
    X, R = fmap.forward(theta, curve_r)
    X = np.append(X, X[0] + 1.0)
    R = np.append(R, R[0])
    dx = np.diff(X)
    if np.any(dx <= 0):
        idx = int(np.argmax(dx <= 0))
        raise NonGraphError(f"image is not a graph near sample {idx}", index=idx)
    image_area = float(np.sum(0.5 * (R[1:] + R[:-1]) * dx))
    return image_area - float(np.mean(curve_r))


def lift_periodicity_defect(fmap, x, r):
    x1, r1 = fmap.forward(np.asarray(x) + 1.0, r)
    x0, r0 = fmap.forward(x, r)
    return float(np.max(np.hypot(x1 - x0 - 1.0, r1 - r0)))


def inverse_defect(fmap, x, r):
    X, R = fmap.forward(x, r)
    xb, rb = fmap.inverse(X, R)
    return float(np.max(np.hypot(xb - x, rb - r)))


def det_defect(fmap, x, r):
    jac = jacobian_array(fmap, x, r)
    return float(np.max(np.abs(np.linalg.det(jac) - 1.0)))


def _newton_inverse(forward, X, R, iters=50, tol=1e-13):
    x = np.array(X, dtype=float)
    r = np.array(R, dtype=float)
    for _ in range(iters):
        fx, fr = forward(x, r)
        ex, er = fx - X, fr - R
        if np.max(np.abs(ex) + np.abs(er)) < tol:
            break
        jac = fd_jacobian(forward, x, r)
        det = jac[..., 0, 0] * jac[..., 1, 1] - jac[..., 0, 1] * jac[..., 1, 0]
        dx = (jac[..., 1, 1] * ex - jac[..., 0, 1] * er) / det
        dr = (-jac[..., 1, 0] * ex + jac[..., 0, 0] * er) / det
        x, r = x - dx, r - dr
    return x, r


def table_map(x_nodes, r_nodes, f1, f2, name="user_table"):
    """Build a map from a table of lift values ``F(x_i, r_j)`` on [0, 1] x strip.

    The displacement ``F1 - x`` and ``F2`` are interpolated bilinearly and
    extended 1-periodically in ``x``; the inverse is a Newton solve.
    """
    x_nodes = np.asarray(x_nodes, dtype=float)
    r_nodes = np.asarray(r_nodes, dtype=float)
    disp = np.asarray(f1, dtype=float) - x_nodes[:, None]
    i1 = RegularGridInterpolator((x_nodes, r_nodes), disp, bounds_error=False, fill_value=None)
    i2 = RegularGridInterpolator((x_nodes, r_nodes), np.asarray(f2, dtype=float),
                                 bounds_error=False, fill_value=None)
    span = x_nodes[-1] - x_nodes[0]

    def forward(x, r):
        x = np.asarray(x, dtype=float)
        r = np.asarray(r, dtype=float)
        x, r = np.broadcast_arrays(x, r)
        xr = x_nodes[0] + np.mod(x - x_nodes[0], span)
        pts = np.stack([xr, r], axis=-1)
        return x + i1(pts).reshape(x.shape), i2(pts).reshape(x.shape)

    def inverse(X, R):
        return _newton_inverse(forward, X, R)

    return TwistMapSpec(forward=forward, inverse=inverse, strip=(r_nodes[0], r_nodes[-1]),
                        name=name)
