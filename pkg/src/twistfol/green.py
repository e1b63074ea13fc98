"""Green bundles of twist maps from pushed vertical lines.

``s_k(p)`` is the slope at ``p`` of the image of the vertical line at
``F^-k(p)`` under ``DF^k``; for negative ``k`` the vertical is pulled back
from the future. Along minimizing orbits the slopes interleave as
``s_-1 < s_-2 < ... < s_2 < s_1`` and converge to the Green slopes
``s_- <= s_+``.
"""
import csv
from dataclasses import dataclass

import numpy as np

from .exceptions import DivergenceError, VerticalImageError
from .maps import DIVERGENCE_BOUND, LiftPoint, jacobian_array

VERTICAL_TOL = 1e-14


def _orbit(fmap, x, r, n, backward):
    step = fmap.inverse if backward else fmap.forward
    xs, rs = [float(x)], [float(r)]
    for _ in range(n):
        x, r = step(np.float64(x), np.float64(r))
        if not np.isfinite(r) or abs(float(r)) > DIVERGENCE_BOUND:
            raise DivergenceError("orbit left the divergence bound")
        xs.append(float(x))
        rs.append(float(r))
    return np.array(xs), np.array(rs)


def _slope(v):
    if abs(v[0]) <= VERTICAL_TOL * np.hypot(v[0], v[1]):
        raise VerticalImageError("pushed vertical is vertical")
    return v[1] / v[0]


def green_slope(fmap, p, k):
    """Slope of ``DF^k(F^-k p) (0, 1)``, pushing the vector one factor at a time."""
    k = int(k)
    if k == 0:
        raise ValueError("k must be nonzero")
    xs, rs = _orbit(fmap, p.x, p.r, abs(k), backward=k > 0)
    # xs[j] is F^{-j}(p) for k > 0 and F^{j}(p) for k < 0
    if k > 0:
        jac = jacobian_array(fmap, xs[1:], rs[1:])
    else:
        jac = jacobian_array(fmap, xs[:-1], rs[:-1])
    v = np.array([0.0, 1.0])
    if k > 0:
        for j in range(abs(k) - 1, -1, -1):
            v = jac[j] @ v
            v /= np.hypot(v[0], v[1])
    else:
        for j in range(abs(k) - 1, -1, -1):
            a = jac[j]
            v = np.array([a[1, 1] * v[0] - a[0, 1] * v[1], -a[1, 0] * v[0] + a[0, 0] * v[1]])
            v /= np.hypot(v[0], v[1])
    return float(_slope(v))


@dataclass
class GreenData:
    base_point: LiftPoint
    s_pos: np.ndarray
    s_neg: np.ndarray
    s_plus_estimate: float
    s_minus_estimate: float
    converged_plus: bool
    converged_minus: bool
    interleaved: bool
    violations: np.ndarray

    @property
    def gap(self):
        return self.s_plus_estimate - self.s_minus_estimate

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "s_k", "s_minus_k"])
            for k, (a, b) in enumerate(zip(self.s_pos, self.s_neg), start=1):
                w.writerow([k, repr(float(a)), repr(float(b))])


def _adj(m):
    out = np.empty_like(m)
    out[..., 0, 0] = m[..., 1, 1]
    out[..., 1, 1] = m[..., 0, 0]
    out[..., 0, 1] = -m[..., 0, 1]
    out[..., 1, 0] = -m[..., 1, 0]
    return out


def _slopes_by_products(factors):
    """Slopes of ``M_k^-1 (0, 1)`` where ``M_k = factors[k-1] ... factors[0]``.

    ``M_k`` is accumulated left-multiplicatively and rescaled at every step;
    ``M^-1 (0, 1)`` is parallel to ``(-m12, m11)``.
    """
    m = np.eye(2)
    out = np.empty(len(factors))
    for k, a in enumerate(factors):
        m = a @ m
        m /= np.max(np.abs(m))
        out[k] = _slope(np.array([-m[0, 1], m[0, 0]]))
    return out


def extrapolate_mobius(s, ks=None):
    """Limit of a sequence assumed to behave like ``s + a/(k + b)``.

    Three terms at ``k = n/4, n/2, n`` determine the Mobius profile exactly;
    the result is returned together with a flag telling whether the solve was
    well conditioned.
    """
    n = len(s)
    if n < 8:
        return float(s[-1]), False
    k1, k2, k3 = n // 4, n // 2, n
    s1, s2, s3 = s[k1 - 1], s[k2 - 1], s[k3 - 1]
    a = (s1 - s2) / (k2 - k1)
    b = (s2 - s3) / (k3 - k2)
    den = a - b
    if abs(den) <= 1e-6 * max(abs(a), abs(b), 1e-300):
        return float(s3), False
    return float((a * s3 - b * s1) / den), True


def green_limits(fmap, p, n_max=200, tol=1e-9, order_tol=1e-12):
    """Finite-time Green slopes ``s_{+-k}``, k = 1..n_max, and their limits.

    The limits extrapolate the last terms with a Mobius profile in k (exact
    for parabolic orbits such as fixed-point leaves, where convergence is
    only like 1/k); extrapolations outside ``[s_-n, s_n]`` fall back to the
    last computed terms. ``converged_*`` tests ``|s_n - s_(n-1)| < tol``.
    A step of the sequences in the wrong direction by more than ``order_tol``
    is an interleaving violation; steps below it are rounding once a
    sequence has converged to machine precision.
    """
    xb, rb = _orbit(fmap, p.x, p.r, n_max, backward=True)
    xf, rf = _orbit(fmap, p.x, p.r, n_max, backward=False)
    jb = jacobian_array(fmap, xb[1:], rb[1:])
    jf = jacobian_array(fmap, xf[:-1], rf[:-1])
    # G_k(p) = DF^{-k}(p)^{-1} V; DF^{-k}(p) = adj(DF(F^{-k} p)) ... adj(DF(F^{-1} p))
    s_pos = _slopes_by_products(_adj(jb))
    # G_{-k}(p) = DF^{k}(p)^{-1} V; DF^{k}(p) = DF(F^{k-1} p) ... DF(p)
    s_neg = _slopes_by_products(jf)
    viol = []
    if np.any(np.diff(s_pos) > order_tol):
        viol.append("s_k not decreasing")
    if np.any(np.diff(s_neg) < -order_tol):
        viol.append("s_-k not increasing")
    if s_neg[-1] > s_pos[-1] + order_tol:
        viol.append("s_-n > s_n")
    sp, okp = extrapolate_mobius(s_pos)
    sm, okm = extrapolate_mobius(s_neg)
    lo, hi = s_neg[-1], s_pos[-1]
    if not (okp and lo <= sp <= hi):
        sp = hi
    if not (okm and lo <= sm <= hi):
        sm = lo
    conv_p = bool(abs(s_pos[-1] - s_pos[-2]) < tol) if n_max > 1 else False
    conv_m = bool(abs(s_neg[-1] - s_neg[-2]) < tol) if n_max > 1 else False
    return GreenData(LiftPoint(float(p.x), float(p.r)), s_pos, s_neg, float(sp), float(sm),
                     conv_p, conv_m, not viol, np.array(viol))


@dataclass
class SandwichReport:
    theta: np.ndarray
    dini_lower: np.ndarray
    dini_upper: np.ndarray
    s_minus: np.ndarray
    s_plus: np.ndarray
    violations: np.ndarray
    dini_drift: float = 0.0

    @property
    def passed(self):
        return self.violations.size == 0


def _dini_bracket(curve, theta, h):
    quots = [(curve(b) - curve(a)) / (b - a)
             for a, b in ((theta - h, theta), (theta, theta + h), (theta - h, theta + h))]
    return np.min(quots, axis=0), np.max(quots, axis=0)


def sandwich_check(fmap, fol, c, samples=64, curve=None, n_max=200, tol=1e-4,
                   hs=(1e-4, 1e-5, 1e-6)):
    """Check ``s_- <= gamma'_- <= gamma'_+ <= s_+`` along a curve.

    ``curve`` defaults to the leaf ``c``. The Dini bracket is the range of the
    left, right and central difference quotients over the smallest window in
    ``hs``; ``dini_drift`` reports how far the brackets of the larger windows
    move away from it. ``tol`` absorbs the 1/n convergence of the Green
    slopes along non-periodic orbits. Green slopes are computed at
    the points of the curve itself, so a non-invariant curve is tested against
    the bundles along its own (non-leaf) points.
    """
    if curve is None:
        cc = float(c)
        curve = lambda t: fol.leaf(np.asarray(t, float), np.full(np.shape(t), cc))
    theta = np.arange(samples) / samples
    hs = sorted(hs)
    lo, hi = _dini_bracket(curve, theta, hs[0])
    drift = 0.0
    for h in hs[1:]:
        lo_h, hi_h = _dini_bracket(curve, theta, h)
        drift = max(drift, float(np.max(np.abs(lo_h - lo))), float(np.max(np.abs(hi_h - hi))))
    r = curve(theta)
    sm = np.empty(samples)
    sp = np.empty(samples)
    for i in range(samples):
        gd = green_limits(fmap, LiftPoint(float(theta[i]), float(r[i])), n_max)
        sm[i], sp[i] = gd.s_minus_estimate, gd.s_plus_estimate
    bad = (lo < sm - tol) | (hi > sp + tol)
    return SandwichReport(theta, lo, hi, sm, sp, theta[bad], drift)


@dataclass
class CriterionEvidence:
    forward: np.ndarray
    backward: np.ndarray
    forward_min: float
    backward_min: float
    forward_bounded: bool
    backward_bounded: bool
    slope: float
    s_minus: float
    s_plus: float


def dynamical_criterion(fmap, p, v, n_max=200, bound=10.0):
    """First components of ``DF^n(p) v`` forward and backward.

    A forward sequence staying below ``bound`` over the second half of the
    window is evidence that ``v`` lies in the lower Green bundle; the same
    backward points to the upper one. The slope of ``v`` is reported next to
    the Green slopes for comparison.
    """
    v = np.asarray(v, dtype=float)
    xf, rf = _orbit(fmap, p.x, p.r, n_max, backward=False)
    xb, rb = _orbit(fmap, p.x, p.r, n_max, backward=True)
    jf = jacobian_array(fmap, xf[:-1], rf[:-1])
    jb = _adj(jacobian_array(fmap, xb[1:], rb[1:]))
    fwd, bwd = np.empty(n_max), np.empty(n_max)
    w = v.copy()
    for k in range(n_max):
        w = jf[k] @ w
        fwd[k] = abs(w[0])
    w = v.copy()
    for k in range(n_max):
        det = np.linalg.det(jb[k])
        w = jb[k] @ w / det
        bwd[k] = abs(w[0])
    half = n_max // 2
    fmin, bmin = float(np.min(fwd[half:])), float(np.min(bwd[half:]))
    gd = green_limits(fmap, p, n_max)
    slope = v[1] / v[0] if v[0] != 0 else np.inf
    return CriterionEvidence(fwd, bwd, fmin, bmin, bool(np.max(fwd[half:]) <= bound),
                             bool(np.max(bwd[half:]) <= bound), float(slope),
                             gd.s_minus_estimate, gd.s_plus_estimate)
