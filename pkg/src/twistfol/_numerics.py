"""Small numerical kernels shared across modules.

Root finding here is always for increasing functions, which is the only case
that arises (leaf labels, lifted circle maps, monotone conjugacies).
"""
import numpy as np
from scipy.integrate import simpson

_GL_CACHE = {}


def bisect_increasing(fun, target, lo, hi, iters=60):
    """Invert an increasing function by plain bisection.

    ``fun`` must be vectorized. ``lo``/``hi`` broadcast against ``target`` and
    must bracket the solution. A fixed iteration count keeps the result
    deterministic; 60 halvings shrink any unit bracket below 1e-18.
    """
    target = np.asarray(target, dtype=float)
    lo = np.broadcast_to(np.asarray(lo, dtype=float), target.shape).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), target.shape).copy()
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        below = fun(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def solve_increasing(fun, dfun, target, guess, lo, hi, xtol=1e-15, maxiter=80):
    """Safeguarded Newton iteration for an increasing function.

    Newton steps that leave the current bracket are replaced by bisection, so
    convergence only needs ``lo <= x* <= hi``. Works for scalars and arrays.
    """
    scalar = np.ndim(target) == 0 and np.ndim(guess) == 0
    target = np.asarray(target, dtype=float)
    x = np.array(np.broadcast_to(guess, target.shape), dtype=float)
    lo = np.array(np.broadcast_to(lo, target.shape), dtype=float)
    hi = np.array(np.broadcast_to(hi, target.shape), dtype=float)
    for _ in range(maxiter):
        fx = fun(x) - target
        lo = np.where(fx < 0, x, lo)
        hi = np.where(fx > 0, x, hi)
        d = dfun(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = fx / d
        nxt = x - step
        bad = ~np.isfinite(nxt) | (nxt <= lo) | (nxt >= hi) | (d <= 0)
        nxt = np.where(bad, 0.5 * (lo + hi), nxt)
        done = (np.abs(nxt - x) <= xtol * (1.0 + np.abs(x))) | (fx == 0)
        x = np.where(fx == 0, x, nxt)
        if np.all(done):
            break
    return float(x) if scalar else x


def gauss_legendre(n):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def integrate_fixed(fun, a, b, n=64):
    """Gauss-Legendre integral of a vectorized ``fun`` over [a, b] (arrays ok)."""
    x, w = gauss_legendre(n)
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    pts = 0.5 * (b - a) * x + 0.5 * (b + a)
    return np.sum(fun(pts) * w, axis=-1) * 0.5 * (b - a)[..., 0]


def simpson_periodic_mean(values, axis=0):
    """Mean over one period of samples on a closed uniform grid of [0, 1]."""
    n = values.shape[axis]
    return simpson(values, x=np.linspace(0.0, 1.0, n), axis=axis)


def bump(rho2):
    """Unnormalized radial bump exp(-1/(1 - |x|^2)) given |x|^2, zero outside."""
    rho2 = np.asarray(rho2, dtype=float)
    out = np.zeros_like(rho2)
    inside = rho2 < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - rho2[inside]))
    return out


def wrap_angle(d):
    """Signed distance to the nearest integer, in [-1/2, 1/2)."""
    return (np.asarray(d) + 0.5) % 1.0 - 0.5
