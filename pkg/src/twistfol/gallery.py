"""Closed-form twist maps and foliations used as ground truth.

* integrable maps ``f_rho(x, r) = (x + rho(r), r)`` and their conjugates by an
  explicit exact symplectic shear;
* the Lipschitz foliation ``eta_c = c + eps(c) cos(2 pi theta)`` with a kink of
  ``eps`` at ``c = 0``, together with a C1 twist map preserving it;
* a smooth-looking foliation ``u = zeta(c) gamma(theta)`` whose straightening
  at ``c = 0`` collapses an interval.
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import simpson

from ._numerics import bisect_increasing, gauss_legendre, solve_increasing
from .exceptions import ConstructionError, ParameterError
from .foliation import FoliationSpec, standard_foliation
from .maps import TwistMapSpec

TWO_PI = 2.0 * np.pi


def _arr(v):
    return np.asarray(v, dtype=float)


def _inv2(m):
    det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    out = np.empty_like(m)
    out[..., 0, 0] = m[..., 1, 1] / det
    out[..., 1, 1] = m[..., 0, 0] / det
    out[..., 0, 1] = -m[..., 0, 1] / det
    out[..., 1, 0] = -m[..., 1, 0] / det
    return out


def _mat(a, b, c, d):
    a, b, c, d = np.broadcast_arrays(_arr(a), _arr(b), _arr(c), _arr(d))
    return np.stack([np.stack([a, b], -1), np.stack([c, d], -1)], -2)


# ---------------------------------------------------------------------------
# integrable families

def integrable_map(rho=None, drho=None, name="integrable"):
    """The map ``(x, r) -> (x + rho(r), r)``; the default is ``rho(r) = r``."""
    if rho is None:
        rho, drho = (lambda r: _arr(r)), (lambda r: np.ones_like(_arr(r)))

    def forward(x, r):
        x, r = np.broadcast_arrays(_arr(x), _arr(r))
        return x + rho(r), r.copy()

    def inverse(x, r):
        x, r = np.broadcast_arrays(_arr(x), _arr(r))
        return x - rho(r), r.copy()

    def differential(x, r):
        x, r = np.broadcast_arrays(_arr(x), _arr(r))
        return _mat(1.0, drho(r), 0.0, 1.0)

    def point(x, r):
        return x + float(rho(r)), r

    return TwistMapSpec(forward, inverse, differential, name=name, point=point,
                        extras={"rho": rho, "drho": drho})


def linear_map(matrix, name="linear"):
    """Planar linear map, used as a hyperbolic model for Green bundles."""
    A = np.asarray(matrix, dtype=float)
    Ai = np.linalg.inv(A)

    def forward(x, r):
        x, r = _arr(x), _arr(r)
        return A[0, 0] * x + A[0, 1] * r, A[1, 0] * x + A[1, 1] * r

    def inverse(x, r):
        x, r = _arr(x), _arr(r)
        return Ai[0, 0] * x + Ai[0, 1] * r, Ai[1, 0] * x + Ai[1, 1] * r

    def differential(x, r):
        shape = np.broadcast(_arr(x), _arr(r)).shape
        return np.broadcast_to(A, shape + (2, 2)).copy()

    return TwistMapSpec(forward, inverse, differential, name=name)


@dataclass(frozen=True)
class Conjugator:
    """Exact symplectic diffeomorphism with inverse and differential.

    ``max_shift`` bounds ``|forward(x, c)[0] - x|``; it brackets the root
    solve that turns pushed horizontal lines into graphs.
    """

    forward: Callable
    inverse: Callable
    differential: Callable
    max_shift: float = 1.0
    name: str = ""


def shear_conjugator(a=0.05, b=0.5):
    """``Psi = H o V`` with ``V(x, c) = (x, c + a sin 2pi x)`` and
    ``H(x, y) = (x + b sin(2pi y)/(2pi), y)``; both factors are exact shears."""
    if TWO_PI * abs(a * b) >= 1.0:
        raise ParameterError("need 2*pi*|a*b| < 1 for the pushed lines to stay graphs")

    def forward(x, c):
        x, c = _arr(x), _arr(c)
        y = c + a * np.sin(TWO_PI * x)
        return x + b * np.sin(TWO_PI * y) / TWO_PI, y

    def inverse(X, Y):
        X, Y = _arr(X), _arr(Y)
        x = X - b * np.sin(TWO_PI * Y) / TWO_PI
        return x, Y - a * np.sin(TWO_PI * x)

    def differential(x, c):
        x, c = np.broadcast_arrays(_arr(x), _arr(c))
        y = c + a * np.sin(TWO_PI * x)
        y_x = TWO_PI * a * np.cos(TWO_PI * x)
        bc = b * np.cos(TWO_PI * y)
        return _mat(1.0 + bc * y_x, bc, y_x, 1.0)

    return Conjugator(forward, inverse, differential, max_shift=abs(b) / TWO_PI + 1e-12,
                      name=f"shear(a={a},b={b})")


def _check_increasing(rho):
    r = np.linspace(-3.0, 3.0, 601)
    if np.any(np.diff(rho(r)) <= 0):
        raise ValueError("rho must be strictly increasing")


def integrable_family(rho=None, drho=None, conjugator=None):
    """Return ``(map, foliation)`` for ``Psi o f_rho o Psi^-1`` and the pushed leaves.

    Without a conjugator this is the integrable map with the standard
    foliation. Leaves are relabelled by a constant so that their means equal
    ``c``; ``map.extras`` holds ``rho``, ``drho``, the conjugator and the
    offset.
    """
    if rho is None:
        rho, drho = (lambda r: _arr(r)), (lambda r: np.ones_like(_arr(r)))
    _check_increasing(rho)
    base = integrable_map(rho, drho)
    if conjugator is None:
        ident = Conjugator(lambda x, c: (_arr(x), _arr(c)), lambda x, c: (_arr(x), _arr(c)),
                           lambda x, c: _mat(1.0, 0.0, 0.0, 1.0 + 0.0 * _arr(x) * _arr(c)),
                           max_shift=0.0, name="identity")
        base.extras.update(conjugator=ident, offset=0.0)
        return base, standard_foliation()
    psi = conjugator

    def forward(x, r):
        qx, qc = psi.inverse(x, r)
        return psi.forward(qx + rho(qc), qc)

    def inverse(x, r):
        qx, qc = psi.inverse(x, r)
        return psi.forward(qx - rho(qc), qc)

    def differential(x, r):
        qx, qc = psi.inverse(x, r)
        inner = _mat(1.0, drho(qc), 0.0, 1.0)
        return psi.differential(qx + rho(qc), qc) @ inner @ _inv2(psi.differential(qx, qc))

    def point(x, r):
        X, R = forward(np.float64(x), np.float64(r))
        return float(X), float(R)

    def pushed_x(theta, c):
        theta, c = np.broadcast_arrays(_arr(theta), _arr(c))
        s = psi.max_shift
        return solve_increasing(lambda x: psi.forward(x, c)[0],
                                lambda x: psi.differential(x, c)[..., 0, 0],
                                theta, theta, theta - s - 1e-9, theta + s + 1e-9)

    def raw_leaf(theta, c):
        return psi.forward(pushed_x(theta, c), c)[1]

    t = np.linspace(0.0, 1.0, 2049)
    offset = float(simpson(raw_leaf(t, np.zeros_like(t)), x=t))

    def leaf(theta, c):
        return raw_leaf(theta, _arr(c) - offset)

    def partials(theta, c):
        c = _arr(c) - offset
        return psi.differential(pushed_x(theta, c), c)

    def d_c(theta, c):
        return 1.0 / partials(theta, c)[..., 0, 0]

    def d_theta(theta, c):
        m = partials(theta, c)
        return m[..., 1, 0] / m[..., 0, 0]

    fmap = TwistMapSpec(forward, inverse, differential, name=f"conjugated-{psi.name}", point=point,
                        extras={"rho": rho, "drho": drho, "conjugator": psi, "offset": offset})
    fol = FoliationSpec(leaf, d_theta=d_theta, d_c=d_c, name=f"pushed-{psi.name}")
    return fmap, fol


# ---------------------------------------------------------------------------
# the Lipschitz foliation with a kink at c = 0

def _default_eps(scale):
    k = scale / (8.0 * np.pi)

    def eps(c):
        c = _arr(c)
        return k * np.abs(c) * np.exp(-c * c)

    def d_eps(c, side=None):
        c = _arr(c)
        s = np.where(c < 0, -1.0, 1.0) if side is None else np.asarray(side, float)
        return s * k * (1.0 - 2.0 * c * c) * np.exp(-c * c)

    def dd_eps(c, side=None):
        c = _arr(c)
        s = np.where(c < 0, -1.0, 1.0) if side is None else np.asarray(side, float)
        return s * k * (4.0 * c ** 3 - 6.0 * c) * np.exp(-c * c)

    def scalar(c):
        """``(eps(c), eps'(c))`` for a plain float, right-hand limit at 0."""
        e = math.exp(-c * c)
        return k * abs(c) * e, math.copysign(1.0, c if c != 0.0 else 1.0) * k * (1.0 - 2.0 * c * c) * e

    return eps, d_eps, dd_eps, scalar


@dataclass(frozen=True)
class StrangeParams:
    """Data of the kinked foliation and of the map preserving it.

    ``d_epsilon`` and ``dd_epsilon`` take an optional ``side`` (+1 or -1)
    selecting one-sided limits at ``c = 0``; without it ``c = 0`` uses the
    right-hand limits. ``eps_bound`` bounds ``|epsilon|`` and brackets the
    leaf-label solve. ``M1``, ``M2`` and ``M`` are filled in by
    :func:`strange_params`.
    """

    epsilon: Callable
    d_epsilon: Callable
    dd_epsilon: Callable
    lipschitz: float
    eps_bound: float
    M1: float = float("nan")
    M2: float = float("nan")
    M: float = float("nan")
    rho: Optional[Callable] = None
    drho: Optional[Callable] = None
    extras: dict = field(default_factory=dict, compare=False, repr=False)


def _sampled_lipschitz(eps, lo=-6.0, hi=6.0, n=200001):
    c = np.linspace(lo, hi, n)
    return float(np.max(np.abs(np.diff(eps(c)) / np.diff(c))))


def strange_params(scale=1.0, epsilon=None, d_epsilon=None, dd_epsilon=None,
                   m_window=(0.0, 6.0), m_grid=256):
    """Build :class:`StrangeParams`, measuring M1, M2 and setting ``M = 2 M1/M2``.

    The default ``eps(c) = scale |c| exp(-c^2)/(8 pi)``. The constants are
    measured on both half-annuli and the larger ``M`` is kept, so that
    ``rho(t) = sign(t) t^2 exp(M |t|)`` serves both halves.
    """
    scalar = None
    if epsilon is None:
        epsilon, d_epsilon, dd_epsilon, scalar = _default_eps(scale)
    elif d_epsilon is None or dd_epsilon is None:
        raise ParameterError("a custom epsilon needs its first and second derivatives")
    lip = _sampled_lipschitz(epsilon)
    if lip > 1.0 / (4.0 * np.pi) + 1e-12:
        raise ParameterError(f"epsilon has Lipschitz constant {lip:.4g} > 1/(4 pi)")
    if abs(float(epsilon(0.0))) > 1e-15:
        raise ParameterError("epsilon(0) must vanish")
    cs = np.linspace(-6.0, 6.0, 20001)
    bound = float(np.max(np.abs(epsilon(cs)))) + 1e-12
    p = StrangeParams(epsilon, d_epsilon, dd_epsilon, lip, bound)
    plus = m_constants(half_straightening(p, +1), m_window, m_grid)
    minus = m_constants(half_straightening(p, -1), (-m_window[1], -m_window[0]), m_grid)
    M1, M2 = max(plus[0], minus[0]), min(plus[1], minus[1])
    M = 2.0 * M1 / M2

    def rho(t):
        t = _arr(t)
        return np.sign(t) * t * t * np.exp(M * np.abs(t))

    def drho(t):
        t = _arr(t)
        a = np.abs(t)
        return (2.0 * a + M * a * a) * np.exp(M * a)

    def rho_scalar(t):
        a = abs(t)
        return math.copysign(a * a * math.exp(M * a), t)

    return StrangeParams(epsilon, d_epsilon, dd_epsilon, lip, bound, M1, M2, M, rho, drho,
                         extras={"plus": plus, "minus": minus, "scalar": scalar,
                                 "rho_scalar": rho_scalar})


def strange_foliation(params=None):
    """Leaves ``c + eps(c) cos(2 pi theta)``; generating function ``eps(c) sin(2 pi theta)/(2 pi)``."""
    if params is None:
        params = strange_params()
    if params.lipschitz > 1.0 / (4.0 * np.pi) + 1e-12:
        raise ParameterError("epsilon violates the 1/(4 pi) Lipschitz bound")
    eps, d_eps = params.epsilon, params.d_epsilon

    def leaf(theta, c):
        return _arr(c) + eps(c) * np.cos(TWO_PI * _arr(theta))

    def d_theta(theta, c):
        return -TWO_PI * eps(c) * np.sin(TWO_PI * _arr(theta))

    def d_c(theta, c):
        return 1.0 + d_eps(c) * np.cos(TWO_PI * _arr(theta))

    def u(theta, c):
        return eps(c) * np.sin(TWO_PI * _arr(theta)) / TWO_PI

    return FoliationSpec(leaf, d_theta=d_theta, d_c=d_c, name="strange", extras={"u": u})


@dataclass(frozen=True)
class HalfStraightening:
    """Straightening of one half-annulus, ``(x, c) -> (h(x, c), eta(h, c))``.

    ``h(., c)`` inverts ``y -> y + eps'(c) sin(2 pi y)/(2 pi)``; the partials
    of ``h`` up to the mixed second order are closed forms in ``y = h``.
    """

    params: StrangeParams
    side: int

    def _e(self, c):
        p = self.params
        return p.epsilon(c), p.d_epsilon(c, self.side), p.dd_epsilon(c, self.side)

    def h(self, x, c):
        x, c = np.broadcast_arrays(_arr(x), _arr(c))
        e1 = self.params.d_epsilon(c, self.side)
        s = np.abs(e1) / TWO_PI + 1e-12
        return solve_increasing(lambda y: y + e1 * np.sin(TWO_PI * y) / TWO_PI,
                                lambda y: 1.0 + e1 * np.cos(TWO_PI * y), x, x, x - s, x + s)

    def forward(self, x, c):
        y = self.h(x, c)
        return y, _arr(c) + self.params.epsilon(c) * np.cos(TWO_PI * y)

    def inverse(self, theta, r):
        theta, r = np.broadcast_arrays(_arr(theta), _arr(r))
        c = _leaf_label(self.params, theta, r, self.side)
        e1 = self.params.d_epsilon(c, self.side)
        return theta + e1 * np.sin(TWO_PI * theta) / TWO_PI, c

    def partials(self, x, c):
        """``h, h_x, h_c, h_xx, h_xc`` at ``(x, c)``."""
        y = self.h(x, c)
        _, e1, e2 = self._e(c)
        cs, sn = np.cos(TWO_PI * y), np.sin(TWO_PI * y)
        k_y = 1.0 + e1 * cs
        k_yy = -TWO_PI * e1 * sn
        k_yc = e2 * cs
        h_x = 1.0 / k_y
        h_c = -e2 * sn / TWO_PI / k_y
        h_xx = -k_yy / k_y ** 3
        h_xc = -(k_yy * h_c + k_yc) / k_y ** 2
        return y, h_x, h_c, h_xx, h_xc

    def differential(self, x, c):
        y, h_x, h_c, _, _ = self.partials(x, c)
        e0, e1, _ = self._e(c)
        eta_t = -TWO_PI * e0 * np.sin(TWO_PI * y)
        eta_c = 1.0 + e1 * np.cos(TWO_PI * y)
        return _mat(h_x, h_c, eta_t * h_x, eta_t * h_c + eta_c)


def half_straightening(params, side):
    return HalfStraightening(params, int(np.sign(side)) or 1)


def _leaf_label(params, theta, r, side=None):
    """Label ``c`` of the leaf through ``(theta, r)``: solves ``c + eps(c) cos = r``."""
    cs = np.cos(TWO_PI * theta)
    b = params.eps_bound
    if side is None:
        d = lambda c: 1.0 + params.d_epsilon(c) * cs
    else:
        d = lambda c: 1.0 + params.d_epsilon(c, side) * cs
    return solve_increasing(lambda c: c + params.epsilon(c) * cs, d, r, r, r - b, r + b)


def m_constants(phi, window, grid=256):
    """Twist-estimate constants of a half straightening on ``T x window``.

    ``M1 = |h_xc| + |1/h_x| |h_xx| |h_c|`` (sup norms) and ``M2 = min h_x``,
    extremized on a ``grid x grid`` lattice and on one of half that size;
    the relative change between the two is returned as the third entry.
    """
    def at(n):
        x = np.arange(n) / n
        c = np.linspace(window[0], window[1], n)
        X, C = np.meshgrid(x, c, indexing="ij")
        _, h_x, h_c, h_xx, h_xc = phi.partials(X, C)
        if np.min(h_x) <= 0:
            raise ConstructionError("h is not increasing in its angle variable")
        m1 = np.max(np.abs(h_xc)) + np.max(1.0 / np.abs(h_x)) * np.max(np.abs(h_xx)) \
            * np.max(np.abs(h_c))
        return float(m1), float(np.min(h_x))

    m1c, m2c = at(grid // 2)
    m1, m2 = at(grid)
    drift = max(abs(m1 - m1c) / max(m1, 1e-300), abs(m2 - m2c) / m2)
    return m1, m2, drift


class StrangeMap:
    """The glued map ``Phi_pm o f_rho o Phi_pm^-1`` preserving the kinked foliation.

    ``twist_map`` is the assembled :class:`TwistMapSpec`; the two half
    straightenings and ``f_rho`` are exposed separately so the gluing can be
    checked against a direct composition.
    """

    def __init__(self, params=None):
        self.params = params if params is not None else strange_params()
        p = self.params
        self.phi_plus = half_straightening(p, +1)
        self.phi_minus = half_straightening(p, -1)
        self.f_rho = integrable_map(p.rho, p.drho, name="f_rho")
        self.foliation = strange_foliation(p)
        self.twist_map = TwistMapSpec(self.forward, self.inverse, self.differential,
                                      name="strange", point=self.point,
                                      extras={"rho": p.rho, "drho": p.drho, "glued": self})

    @property
    def M1(self):
        return self.params.M1

    @property
    def M2(self):
        return self.params.M2

    @property
    def M(self):
        return self.params.M

    def _move(self, theta, r, sign):
        p = self.params
        theta, r = np.broadcast_arrays(_arr(theta), _arr(r))
        c = _leaf_label(p, theta, r)
        side = np.where(c < 0, -1.0, 1.0)
        e1 = p.d_epsilon(c, side)
        x = theta + e1 * np.sin(TWO_PI * theta) / TWO_PI + sign * p.rho(c)
        s = np.abs(e1) / TWO_PI + 1e-12
        y = solve_increasing(lambda y: y + e1 * np.sin(TWO_PI * y) / TWO_PI,
                             lambda y: 1.0 + e1 * np.cos(TWO_PI * y), x, x, x - s, x + s)
        return y, c + p.epsilon(c) * np.cos(TWO_PI * y)

    def forward(self, theta, r):
        return self._move(theta, r, 1.0)

    def inverse(self, theta, r):
        return self._move(theta, r, -1.0)

    def differential(self, theta, r):
        p = self.params
        theta, r = np.broadcast_arrays(_arr(theta), _arr(r))
        c = np.asarray(_leaf_label(p, theta, r))
        out = np.empty(theta.shape + (2, 2))
        for half, mask in ((self.phi_plus, c >= 0), (self.phi_minus, c < 0)):
            if not np.any(mask):
                continue
            cm = c[mask]
            x = half.inverse(theta[mask], r[mask])[0]
            inner = _mat(1.0, p.drho(cm), 0.0, 1.0)
            out[mask] = half.differential(x + p.rho(cm), cm) @ inner \
                @ _inv2(half.differential(x, cm))
        return out

    def point(self, theta, r):
        """Scalar forward map with plain-float Newton solves."""
        p = self.params
        ev = p.extras.get("scalar") or (lambda c: (float(p.epsilon(c)), float(p.d_epsilon(c))))
        rho = p.extras.get("rho_scalar") or (lambda c: float(p.rho(c)))
        cs = math.cos(TWO_PI * theta)
        c = r
        lo, hi = r - p.eps_bound, r + p.eps_bound
        for _ in range(100):
            e0, e1 = ev(c)
            f = c + e0 * cs - r
            if f == 0.0:
                break
            if f < 0:
                lo = c
            else:
                hi = c
            nxt = c - f / (1.0 + e1 * cs)
            if not lo < nxt < hi:
                nxt = 0.5 * (lo + hi)
            if abs(nxt - c) <= 1e-16 * (1.0 + abs(c)):
                c = nxt
                break
            c = nxt
        e0, e1 = ev(c)
        x = theta + e1 * math.sin(TWO_PI * theta) / TWO_PI + rho(c)
        y = x
        for _ in range(100):
            nxt = y - (y + e1 * math.sin(TWO_PI * y) / TWO_PI - x) / (1.0 + e1 * math.cos(TWO_PI * y))
            if abs(nxt - y) <= 1e-16 * (1.0 + abs(y)):
                y = nxt
                break
            y = nxt
        return y, c + e0 * math.cos(TWO_PI * y)


def strange_twist_map(params=None):
    return StrangeMap(params)


# ---------------------------------------------------------------------------
# the foliation u = zeta(c) gamma(theta)

@dataclass(frozen=True)
class AppendixAParams:
    gamma: Callable
    d_gamma: Callable
    dd_gamma: Callable
    zeta: Callable
    d_zeta: Callable
    plateau_halfwidth: float
    excess: Optional[Callable] = None


def _psi(t):
    t = _arr(t)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def _dpsi(t):
    t = _arr(t)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos]) / t[pos] ** 2
    return out


def appendix_a_params(plateau_halfwidth=0.05, knots=2048):
    """Default ``gamma`` and ``zeta``.

    ``gamma' = -1 + A phi`` with ``phi = psi(cos(2 pi w) + cos(2 pi theta))``,
    ``psi(t) = exp(-1/t)`` for ``t > 0``: it equals -1 exactly on the plateau
    ``|theta - 1/2| <= w`` and exceeds -1 elsewhere; ``A`` makes it mean-zero.
    ``excess = gamma' + 1 = A phi`` is kept separately because the sum
    cancels to zero in floating point near the plateau.
    ``gamma`` is tabulated at ``knots`` points by Gauss-Legendre panels and
    completed by one more panel at evaluation. ``zeta(c) = (c + arctan c)/2``.
    """
    w = float(plateau_halfwidth)
    if not 0.0 < w < 0.5:
        raise ParameterError("plateau half-width must lie in (0, 1/2)")
    cw = np.cos(TWO_PI * w)
    phi = lambda t: _psi(cw + np.cos(TWO_PI * _arr(t)))
    gx, gw = gauss_legendre(24)
    edges = np.linspace(0.0, 1.0, knots + 1)
    mid, half = 0.5 * (edges[1:] + edges[:-1]), 0.5 * np.diff(edges)
    panel = np.sum(phi(mid[:, None] + half[:, None] * gx) * gw, axis=1) * half
    cum = np.concatenate([[0.0], np.cumsum(panel)])
    A = 1.0 / cum[-1]

    def big_phi(t):
        t = _arr(t)
        k = np.clip(np.floor(t * knots).astype(int), 0, knots - 1)
        a = edges[k]
        hw = 0.5 * (t - a)
        pts = (a + hw)[..., None] + hw[..., None] * gx
        return cum[k] + np.sum(phi(pts) * gw, axis=-1) * hw

    def gamma(t):
        t = np.mod(_arr(t), 1.0)
        return -t + A * big_phi(t)

    def d_gamma(t):
        return -1.0 + A * phi(t)

    def dd_gamma(t):
        t = _arr(t)
        return A * _dpsi(cw + np.cos(TWO_PI * t)) * (-TWO_PI * np.sin(TWO_PI * t))

    def zeta(c):
        c = _arr(c)
        return 0.5 * (c + np.arctan(c))

    def d_zeta(c):
        c = _arr(c)
        return 0.5 + 0.5 / (1.0 + c * c)

    def excess(t):
        return A * phi(t)

    return AppendixAParams(gamma, d_gamma, dd_gamma, zeta, d_zeta, w, excess)


@dataclass(frozen=True)
class AppendixAFamily:
    params: AppendixAParams
    foliation: FoliationSpec

    def h0(self, theta, c=0.0):
        """Angle part of the straightening, ``theta + gamma(theta) zeta'(c)``."""
        p = self.params
        return _arr(theta) + p.gamma(theta) * p.d_zeta(c)

    def h0_prime(self, theta):
        """``1 + gamma'(theta)``, the derivative of ``h0`` at ``c = 0``."""
        return self.params.excess(theta)

    def _scales(self, n):
        return 1.0 if n is None else 1.0 - 1.0 / n

    def approximant(self, n, theta, r):
        """``H_n = G_n o F_n^-1`` at ``(theta, r)``; ``n=None`` gives the limit ``H``.

        ``F_n(theta, c) = (theta, c + zeta_n(c) gamma_n'(theta))`` and
        ``G_n(theta, c) = (theta + gamma_n(theta) zeta_n'(c), c)`` with
        ``gamma_n = s gamma``, ``zeta_n = s zeta``, ``s = 1 - 1/n``.
        """
        p = self.params
        s = self._scales(n)
        theta, r = np.broadcast_arrays(_arr(theta), _arr(r))
        g1 = s * p.d_gamma(theta)
        bound = 10.0 + 10.0 * np.abs(r)
        c = bisect_increasing(lambda c: c + s * p.zeta(c) * g1, r, -bound, bound, iters=110)
        return theta + s * p.gamma(theta) * s * p.d_zeta(c), c


def appendix_a_family(params=None):
    p = params if params is not None else appendix_a_params()

    def leaf(theta, c):
        return _arr(c) + p.zeta(c) * p.d_gamma(theta)

    def d_c(theta, c):
        return 1.0 + p.d_zeta(c) * p.d_gamma(theta)

    def d_theta(theta, c):
        return p.zeta(c) * p.dd_gamma(theta)

    def u(theta, c):
        return p.zeta(c) * p.gamma(theta)

    fol = FoliationSpec(leaf, d_theta=d_theta, d_c=d_c, name="appendix-a", extras={"u": u})
    return AppendixAFamily(p, fol)
