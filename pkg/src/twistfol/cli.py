"""Config-driven experiment runner.

Every subcommand reads an experiment config (a JSON file and/or ``--set``
overrides), runs one verification, and writes ``summary.json`` plus CSV data
into ``--out``. Exit status: 0 when the verification passes, 2 when it
fails, 1 on a usage error.

Config layout::

    {"map": {"kind": "integrable", "shear": [0.05, 0.5]},
     "foliation": {"kind": "map"},
     "params": {"c": 0.3, "n_max": 100000}}

Map kinds are ``integrable`` (``rho(r) = slope*r + cubic*r**3``, optional
``shear`` conjugation), ``strange`` (``scale``), ``appendix_a`` (foliation
only, ``plateau_halfwidth``) and ``user_table`` (``csv`` with columns
``x,r,f1,f2`` on a tensor grid, or inline ``x_nodes``, ``r_nodes``, ``f1``,
``f2``). Foliation kinds are ``map`` (the one carried by the map),
``standard`` and ``table`` (``csv`` with columns ``theta,c,eta``).

The worker count for leaf sweeps is read from ``TWISTFOL_WORKERS``; results
are collected in input order, so artifacts do not depend on it.
"""
import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import foliation as fo
from . import gallery, green, rotation, straighten
from .exceptions import (DomainError, InsufficientIterationsError, NotStraightenableError,
                         ParameterError, TwistFolError)
from .maps import LiftPoint, exactness_flux, jacobian_array, table_map, twist_margin


class UsageError(ValueError):
    pass


USAGE_ERRORS = (UsageError, ParameterError, DomainError, InsufficientIterationsError,
                FileNotFoundError, json.JSONDecodeError)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# config handling

def _set_path(cfg, dotted, raw):
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    keys = dotted.split(".")
    node = cfg
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise UsageError(f"--set {dotted}: {k} is not a section")
    node[keys[-1]] = value


def load_config(path=None, overrides=()):
    cfg = {}
    if path:
        with open(path) as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")
    for item in overrides:
        if "=" not in item:
            raise UsageError(f"--set expects key=value, got {item!r}")
        key, raw = item.split("=", 1)
        _set_path(cfg, key, raw)
    cfg.setdefault("map", {}).setdefault("kind", "integrable")
    cfg.setdefault("foliation", {}).setdefault("kind", "map")
    cfg.setdefault("params", {})
    return cfg


def _num(params, key, default, cast=float, positive=False):
    v = params.get(key, default)
    try:
        v = cast(v) if v is not None else None
    except (TypeError, ValueError):
        raise UsageError(f"parameter {key} must be {cast.__name__}") from None
    if positive and v is not None and not v > 0:
        raise UsageError(f"parameter {key} must be positive")
    return v


def _window(params, key="window", default=(-0.5, 0.5)):
    w = params.get(key, default)
    if len(w) != 2 or not float(w[0]) < float(w[1]):
        raise UsageError(f"{key} must be an increasing pair")
    return float(w[0]), float(w[1])


def _read_columns(path, names):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    try:
        return [np.array([float(r[n]) for r in rows]) for n in names]
    except KeyError as exc:
        raise UsageError(f"{path}: missing column {exc}") from None


class Experiment:
    """Map and foliation built from a config."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.map_cfg = dict(cfg["map"])
        self.kind = self.map_cfg.get("kind")
        self.twist_map, self.map_foliation, self.extras = self._build_map()
        self.foliation = self._build_foliation(dict(cfg["foliation"]))

    def _build_map(self):
        m = self.map_cfg
        if self.kind == "integrable":
            slope = _num(m, "slope", 1.0, positive=True)
            cubic = _num(m, "cubic", 0.0)
            if cubic < 0:
                raise UsageError("cubic must be non-negative")
            rho = lambda r: slope * np.asarray(r) + cubic * np.asarray(r) ** 3
            drho = lambda r: slope + 3.0 * cubic * np.asarray(r) ** 2
            conj = None
            if m.get("shear") is not None:
                a, b = (float(v) for v in m["shear"])
                conj = gallery.shear_conjugator(a, b)
            fmap, fol = gallery.integrable_family(rho, drho, conj)
            return fmap, fol, {"rho": rho, "conjugator": conj}
        if self.kind == "strange":
            sm = gallery.strange_twist_map(gallery.strange_params(_num(m, "scale", 1.0,
                                                                       positive=True)))
            return sm.twist_map, sm.foliation, {"rho": sm.params.rho, "strange": sm}
        if self.kind == "appendix_a":
            fam = gallery.appendix_a_family(
                gallery.appendix_a_params(_num(m, "plateau_halfwidth", 0.05)))
            return None, fam.foliation, {"family": fam}
        if self.kind == "user_table":
            if "csv" in m:
                x, r, f1, f2 = _read_columns(m["csv"], ("x", "r", "f1", "f2"))
                xn, rn = np.unique(x), np.unique(r)
                order = np.lexsort((r, x))
                shape = (xn.size, rn.size)
                if x.size != xn.size * rn.size:
                    raise UsageError("user_table csv must hold a full tensor grid")
                f1, f2 = f1[order].reshape(shape), f2[order].reshape(shape)
            else:
                try:
                    xn, rn = np.asarray(m["x_nodes"], float), np.asarray(m["r_nodes"], float)
                    f1, f2 = np.asarray(m["f1"], float), np.asarray(m["f2"], float)
                except KeyError as exc:
                    raise UsageError(f"user_table needs {exc}") from None
            return table_map(xn, rn, f1, f2), None, {}
        raise UsageError(f"unknown map kind {self.kind!r}")

    def _build_foliation(self, f):
        kind = f.get("kind", "map")
        if kind == "map":
            return self.map_foliation
        if kind == "standard":
            return fo.standard_foliation()
        if kind == "table":
            if "csv" not in f:
                raise UsageError("table foliation needs csv")
            return fo.read_foliation_csv(f["csv"])
        raise UsageError(f"unknown foliation kind {kind!r}")

    def need_map(self):
        if self.twist_map is None:
            raise UsageError(f"map kind {self.kind!r} carries no map for this subcommand")
        return self.twist_map

    def need_foliation(self):
        if self.foliation is None:
            raise UsageError("this subcommand needs a foliation")
        return self.foliation


def _workers():
    raw = os.environ.get("TWISTFOL_WORKERS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError("TWISTFOL_WORKERS must be an integer") from None
    return max(1, n)


def pmap(fn, items):
    """Ordered map over ``items`` on ``TWISTFOL_WORKERS`` threads."""
    items = list(items)
    n = _workers()
    if n == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                        for v in row])


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if np.isfinite(v) else repr(v)
    return obj


def _c_list(params, default):
    c = params.get("c", default)
    return [float(v) for v in np.atleast_1d(c)]


def _grid(exp, params, N=129, M=129, window=(-0.5, 0.5)):
    return fo.build_generating_function(exp.need_foliation(), _num(params, "N", N, int),
                                        _num(params, "M", M, int), _window(params, default=window))


# ---------------------------------------------------------------------------
# subcommands: each returns (summary dict, passed)

def cmd_rotation_number(exp, p, out, seed, thr):
    fmap, fol = exp.need_map(), exp.need_foliation()
    n = _num(p, "n_max", 100000, int)
    tol = _num(p, "tol", 1e-8, positive=True)
    thr = 1e-4 if thr is None else thr

    def one(c):
        return rotation.rotation_number(rotation.projected_circle_map(fmap, fol, c, tol), n)

    res = pmap(one, _c_list(p, 0.3))
    cs = _c_list(p, 0.3)
    _write_rows(os.path.join(out, "rotation_number.csv"), ["c", "rho", "lower", "upper"],
                [(c, r.estimate, r.lower, r.upper) for c, r in zip(cs, res)])
    worst = max(r.error_bound for r in res)
    return {"verifies": "rotation number of the projected leaf dynamics, rigorous bracket",
            "rho": [r.estimate for r in res], "max_error_bound": worst,
            "threshold": thr}, worst <= thr


def cmd_rho_profile(exp, p, out, seed, thr):
    lo, hi = _window(p)
    nodes = np.linspace(lo, hi, _num(p, "nodes", 11, int))
    prof = rotation.rho_profile(exp.need_map(), exp.need_foliation(), nodes,
                                _num(p, "n_max", 10000, int))
    prof.to_csv(os.path.join(out, "rho_profile.csv"))
    return {"verifies": "monotone rotation-number profile across leaves",
            "monotone": prof.monotone, "lower_lipschitz": prof.lower_lip,
            "upper_lipschitz": prof.upper_lip, "violations": prof.violations}, prof.monotone


def cmd_conjugacy(exp, p, out, seed, thr):
    fmap, fol = exp.need_map(), exp.need_foliation()
    N = _num(p, "N", 100000, int, positive=True)
    nodes = np.arange(_num(p, "nodes", 1024, int)) / _num(p, "nodes", 1024, int)
    thr = 5.0 if thr is None else thr
    cs = _c_list(p, 0.3)

    def one(c):
        g = rotation.projected_circle_map(fmap, fol, c, _num(p, "tol", 1e-8))
        return rotation.measure_cdf(g, nodes, N)

    res = pmap(one, cs)
    rows = [(c, t, h, r) for c, d in zip(cs, res)
            for t, h, r in zip(d.theta_nodes, d.h_samples, d.node_residuals)]
    _write_rows(os.path.join(out, "conjugacy.csv"), ["c", "theta", "h", "residual"], rows)
    worst = max(d.residual for d in res)
    return {"verifies": "semi-conjugacy of leaf dynamics to a rotation via the Birkhoff CDF",
            "rho": [d.rho for d in res], "residual": [d.residual for d in res],
            "residual_times_N": worst * N, "atom_mass": [d.atom_mass for d in res],
            "flagged": [d.flagged for d in res], "threshold_times_N": thr}, worst <= thr / N


def cmd_rational_density(exp, p, out, seed, thr):
    fol = exp.need_foliation()
    c = _num(p, "c", 0.0)
    d = rotation.rational_leaf_density(exp.need_map(), fol, c, _num(p, "q", 1, int),
                                       p.get("p"), _num(p, "n_theta", 1024, int))
    _write_rows(os.path.join(out, "rational_density.csv"), ["theta", "density", "h"],
                zip(d.theta, d.density, d.h))
    thr = 1e-9 if thr is None else thr
    mass_err = abs(d.h[-1] - 1.0)
    summary = {"verifies": "invariant density 1/sqrt(torsion) on a leaf of periodic points",
               "p": d.p, "q": d.q, "mass_error": mass_err, "min_s_q": float(np.min(d.s_q))}
    ok = mass_err <= thr
    if fol.d_c is not None:
        dc = fol.d_c(d.theta, np.full(d.theta.shape, c))
        summary["sup_vs_deta_dc"] = float(np.max(np.abs(d.density - dc)))
    return summary, ok


def cmd_generating_function(exp, p, out, seed, thr):
    g = _grid(exp, p)
    g.to_csv(os.path.join(out, "generating_function.csv"))
    closure = float(np.max(np.abs(g.u[-1])))
    thr = 1e-8 if thr is None else thr
    return {"verifies": "generating function of a foliation labeled by leaf means",
            "shape": list(g.u.shape), "periodicity_defect": closure}, closure <= thr


def cmd_c1_report(exp, p, out, seed, thr):
    g = _grid(exp, p, N=129, M=128)
    rep = fo.c1_report(g)
    _write_rows(os.path.join(out, "c1_report.csv"), ["c", "jump"],
                zip(rep.cell_centers, rep.cell_jumps))
    return {"verifies": "C1 regularity of the generating function in c",
            "max_jump": rep.max_jump, "theta_at_max": rep.theta_at_max,
            "c_at_max": rep.c_at_max, "flagged_c": rep.flagged_c}, not rep.flagged


def cmd_holder_fit(exp, p, out, seed, thr):
    thr = 0.45 if thr is None else thr
    fit = fo.holder_fit(exp.need_foliation(), _window(p), _num(p, "pair_count", 40, int),
                        seed)
    _write_rows(os.path.join(out, "holder_fit.csv"),
                ["exponent", "constant", "r_squared", "pair_count", "sup_drift"],
                [(fit.exponent, fit.constant, fit.r_squared, fit.pair_count, fit.sup_drift)])
    ok = fit.exponent >= thr and fit.r_squared >= _num(p, "min_r_squared", 0.9)
    return {"verifies": "Holder continuity of leaves in the label",
            "exponent": fit.exponent, "r_squared": fit.r_squared,
            "threshold": thr}, ok


def cmd_bilipschitz(exp, p, out, seed, thr):
    fit = fo.bilipschitz_fit(exp.need_foliation(), _window(p),
                             _num(p, "samples", 4000, int), seed)
    _write_rows(os.path.join(out, "bilipschitz.csv"),
                ["K_upper", "K_lower", "k_minus", "k_plus"],
                [(fit.K_upper, fit.K_lower, fit.k_minus, fit.k_plus)])
    return {"verifies": "biLipschitz dependence of leaves on the label",
            "K_upper": fit.K_upper, "K_lower": fit.K_lower,
            "bilipschitz": fit.bilipschitz}, fit.bilipschitz


def cmd_mixed_partials(exp, p, out, seed, thr):
    g = _grid(exp, p, N=128, M=128)
    rep = fo.mixed_partials_check(g)
    _write_rows(os.path.join(out, "mixed_partials.csv"), ["c", "row_max"],
                zip(rep.row_centers, rep.row_max))
    thr = 1e-5 if thr is None else thr
    return {"verifies": "equality of mixed partials of the generating function",
            "max_discrepancy": rep.max_discrepancy, "c_at_max": rep.c_at_max,
            "method": rep.method, "threshold": thr}, rep.max_discrepancy <= thr


def cmd_green(exp, p, out, seed, thr):
    fmap = exp.need_map()
    if "point" in p:
        x, r = (float(v) for v in p["point"])
    else:
        x = _num(p, "theta", 0.1)
        r = float(exp.need_foliation().leaf(np.float64(x), np.float64(_num(p, "c", 0.3))))
    gd = green.green_limits(fmap, LiftPoint(x, r), _num(p, "n_max", 200, int))
    gd.to_csv(os.path.join(out, "green.csv"))
    return {"verifies": "interleaving and limits of pushed vertical slopes",
            "point": [x, r], "s_plus": gd.s_plus_estimate, "s_minus": gd.s_minus_estimate,
            "interleaved": gd.interleaved, "violations": gd.violations}, gd.interleaved


def cmd_sandwich(exp, p, out, seed, thr):
    fmap, fol = exp.need_map(), exp.need_foliation()
    cs = _c_list(p, 0.3)
    samples = _num(p, "samples", 32, int)
    thr = 1e-4 if thr is None else thr
    tilt = _num(p, "tilt", 0.0)
    reps = []
    for c in cs:
        curve = None
        if tilt:
            curve = lambda t, c=c: fol.leaf(np.asarray(t, float), np.full(np.shape(t), c)) \
                + tilt * np.sin(2 * np.pi * np.asarray(t, float))
        reps.append(green.sandwich_check(fmap, fol, c, samples, curve,
                                         _num(p, "n_max", 200, int), thr))
    rows = [(c, t, a, b, s, q) for c, rp in zip(cs, reps)
            for t, a, b, s, q in zip(rp.theta, rp.dini_lower, rp.dini_upper, rp.s_minus,
                                     rp.s_plus)]
    _write_rows(os.path.join(out, "sandwich.csv"),
                ["c", "theta", "dini_lower", "dini_upper", "s_minus", "s_plus"], rows)
    ok = all(rp.passed for rp in reps)
    return {"verifies": "Green slopes bound the Dini derivatives of invariant graphs",
            "violations": [int(rp.violations.size) for rp in reps], "tolerance": thr}, ok


def _straightening(exp, p):
    if p.get("analytic"):
        conj = exp.extras.get("conjugator")
        if conj is None:
            raise UsageError("analytic straightening needs a shear-conjugated integrable map")
        return straighten.StraighteningMap.from_conjugator(conj)
    return straighten.build_straightening(_grid(exp, p, N=257, M=257, window=(-0.6, 0.6)))


def _straighten_failure(err):
    return {"not_straightenable": True, "c_node": err.c_node, "reason": err.reason,
            "message": str(err)}


def cmd_straighten(exp, p, out, seed, thr):
    thr = 1e-3 if thr is None else thr
    try:
        phi = _straightening(exp, p)
    except NotStraightenableError as err:
        summary = _straighten_failure(err)
        summary["verifies"] = "symplectic straightening of the foliation"
        return summary, False
    win = _window(p, "sample_window", (-0.4, 0.4))
    rects = straighten.random_rectangles(win, _num(p, "rectangles", 20, int), seed)
    dist = straighten.area_distortion(phi, rects, _num(p, "refinement", 1024, int))
    xs, cs = np.meshgrid(np.linspace(0, 1, 17), np.linspace(win[0], win[1], 17), indexing="ij")
    phi.export_samples(os.path.join(out, "straighten.csv"), xs.ravel(), cs.ravel())
    return {"verifies": "symplectic straightening of the foliation",
            "area_distortion": dist, "threshold": thr}, dist <= thr


def cmd_arnold_liouville(exp, p, out, seed, thr):
    fmap = exp.need_map()
    thr = 1e-4 if thr is None else thr
    try:
        phi = _straightening(exp, p)
    except NotStraightenableError as err:
        summary = _straighten_failure(err)
        summary["verifies"] = "Arnold-Liouville coordinates from the straightening"
        return summary, False
    win = _window(p, "sample_window", (-0.4, 0.4))
    rho = exp.extras.get("rho")
    if rho is None:
        rho = rotation.rho_profile(fmap, exp.need_foliation(),
                                   np.linspace(win[0], win[1], 33), 10000)
    rng = np.random.default_rng(seed)
    n = _num(p, "samples", 200, int)
    x, c = rng.uniform(0, 1, n), rng.uniform(win[0], win[1], n)
    res = straighten.arnold_liouville_residual(fmap, phi, rho, (x, c))
    _write_rows(os.path.join(out, "arnold_liouville.csv"), ["x", "c"], zip(x, c))
    return {"verifies": "Arnold-Liouville coordinates from the straightening",
            "residual": res, "threshold": thr}, res <= thr


def cmd_mollify(exp, p, out, seed, thr):
    g = _grid(exp, p, N=257, M=257, window=(-1.0, 1.0))
    eps = [float(e) for e in p.get("epsilons", [0.2, 0.1, 0.05, 0.025])]
    fam = straighten.mollify(g, eps)
    fam.to_csv(os.path.join(out, "mollify.csv"))
    errs = fam.c1_errors
    ok = bool(np.all(np.diff(errs) < 0)) if np.all(np.diff(eps) < 0) else True
    kept = np.isin(g.c_nodes, fam.u_eps_grids[0].c_nodes)
    increasing = straighten.monotonicity_margins(g)[kept] > 0
    mono = [bool(np.all(straighten.monotonicity_margins(u)[increasing] > 0))
            for u in fam.u_eps_grids]
    return {"verifies": "C1 approximation by mollified generating functions",
            "c1_errors": errs, "window": fam.window, "monotone_preserved": mono}, \
        ok and all(mono)


def cmd_strange_demo(exp, p, out, seed, thr):
    if exp.kind != "strange":
        raise UsageError("strange-demo needs map kind 'strange'")
    sm = exp.extras["strange"]
    fmap, fol = sm.twist_map, sm.foliation
    checks = []
    leaves = np.linspace(-1.0, 1.0, 20)
    inv = max(rotation.leaf_invariance_defect(fmap, fol, c) for c in leaves)
    checks.append(("leaf_invariance", inv, inv <= 1e-8))
    theta = np.arange(64) / 64
    norms = []
    for R in (1e-2, 1e-3, 1e-4):
        rs = fol.leaf(theta, np.full(64, R))
        d = jacobian_array(fmap, theta, rs) - np.eye(2)
        norms.append(float(np.max(np.linalg.norm(d, 2, axis=(1, 2)))))
    ratios = [norms[0] / norms[1], norms[1] / norms[2]]
    checks.append(("df_minus_identity_1e-2", norms[0], True))
    checks.append(("df_minus_identity_1e-3", norms[1], True))
    checks.append(("df_minus_identity_1e-4", norms[2], all(5.0 <= q <= 20.0 for q in ratios)))
    tm = twist_margin(fmap, (1e-3, 1.0), (128, 128))
    checks.append(("twist_margin", tm, tm > 0))
    flux = max(abs(exactness_flux(fmap, fol.leaf(np.arange(512) / 512, np.full(512, c))))
               for c in (-0.8, -0.3, 0.1, 0.5, 0.9))
    checks.append(("exactness_flux", flux, flux <= 1e-6))
    grid = fo.build_generating_function(fol, 129, 129, (-0.5, 0.5))
    try:
        straighten.build_straightening(grid)
        checks.append(("not_straightenable", float("nan"), False))
    except NotStraightenableError as err:
        checks.append(("not_straightenable", err.c_node, abs(err.c_node) < 0.05))
    _write_rows(os.path.join(out, "strange_demo.csv"), ["check", "value", "passed"],
                [(n, v, int(ok)) for n, v, ok in checks])
    return {"verifies": "C1 twist map with a Lipschitz invariant foliation that is not "
                        "symplectically straightenable",
            "checks": {n: {"value": v, "passed": ok} for n, v, ok in checks},
            "M1": sm.M1, "M2": sm.M2, "M": sm.M}, all(ok for _, _, ok in checks)


def cmd_appendix_a_demo(exp, p, out, seed, thr):
    if exp.kind != "appendix_a":
        raise UsageError("appendix-a-demo needs map kind 'appendix_a'")
    fam = exp.extras["family"]
    pa, fol = fam.params, fam.foliation
    checks = []
    t = np.linspace(0, 1, 4097)
    dg = pa.d_gamma(t)
    checks.append(("min_dgamma_plus_one", float(np.min(dg) + 1.0), abs(np.min(dg) + 1.0) <= 1e-12))
    ns = [4, 8, 16, 32, 64]
    rng = np.random.default_rng(seed)
    th, r = rng.uniform(0, 1, 400), rng.uniform(-0.5, 0.5, 400)
    dist = []
    for n in ns:
        a, b = fam.approximant(n, th, r), fam.approximant(2 * n, th, r)
        dist.append(float(np.max(np.abs(a[0] - b[0]))))
    checks.append(("approximants_cauchy", dist[-1], bool(np.all(np.diff(dist) < 0))))
    grid = fo.build_generating_function(fol, 257, 129, (-0.5, 0.5))
    try:
        straighten.build_straightening(grid)
        checks.append(("not_straightenable", float("nan"), False))
    except NotStraightenableError as err:
        checks.append(("not_straightenable", err.c_node, abs(err.c_node) < 1e-12))
    _write_rows(os.path.join(out, "appendix_a_demo.csv"), ["check", "value", "passed"],
                [(n, v, int(ok)) for n, v, ok in checks])
    _write_rows(os.path.join(out, "appendix_a_cauchy.csv"), ["n", "sup_distance"],
                zip(ns, dist))
    return {"verifies": "smooth foliation whose straightening degenerates on one leaf",
            "checks": {n: {"value": v, "passed": ok} for n, v, ok in checks}}, \
        all(ok for _, _, ok in checks)


COMMANDS = {
    "rotation-number": cmd_rotation_number,
    "rho-profile": cmd_rho_profile,
    "conjugacy": cmd_conjugacy,
    "rational-density": cmd_rational_density,
    "generating-function": cmd_generating_function,
    "c1-report": cmd_c1_report,
    "holder-fit": cmd_holder_fit,
    "bilipschitz": cmd_bilipschitz,
    "mixed-partials": cmd_mixed_partials,
    "green": cmd_green,
    "sandwich": cmd_sandwich,
    "straighten": cmd_straighten,
    "arnold-liouville": cmd_arnold_liouville,
    "mollify": cmd_mollify,
    "strange-demo": cmd_strange_demo,
    "appendix-a-demo": cmd_appendix_a_demo,
}

DEFAULT_MAPS = {"strange-demo": "strange", "appendix-a-demo": "appendix_a"}


def build_parser():
    parser = _Parser(prog="twistfol", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, fn in COMMANDS.items():
        sp = sub.add_parser(name, help=fn.__name__.replace("cmd_", "").replace("_", " "))
        sp.add_argument("--config", help="experiment config (JSON)")
        sp.add_argument("--out", default="twistfol-out", help="output directory")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config entry, e.g. params.c=0.2 or map.kind=strange")
        sp.add_argument("--threshold", type=float, default=None,
                        help="pass/fail threshold of the headline quantity")
    return parser


def run(args):
    """Execute one parsed command; returns the exit status."""
    try:
        overrides = list(args.set)
        if args.command in DEFAULT_MAPS and not args.config and \
                not any(s.startswith("map.") for s in overrides):
            overrides.insert(0, f"map.kind={DEFAULT_MAPS[args.command]}")
        cfg = load_config(args.config, overrides)
        if args.threshold is not None and not args.threshold > 0:
            raise UsageError("--threshold must be positive")
        exp = Experiment(cfg)
        os.makedirs(args.out, exist_ok=True)
    except USAGE_ERRORS as err:
        print(f"twistfol: usage error: {err}", file=sys.stderr)
        return 1
    summary = {"operation": args.command, "inputs": cfg, "seed": args.seed}
    try:
        result, passed = COMMANDS[args.command](exp, cfg["params"], args.out, args.seed,
                                                args.threshold)
        summary.update(result)
    except USAGE_ERRORS as err:
        print(f"twistfol: usage error: {err}", file=sys.stderr)
        return 1
    except TwistFolError as err:
        passed = False
        summary.update({"error": type(err).__name__, "message": str(err)})
    summary["passed"] = bool(passed)
    with open(os.path.join(args.out, "summary.json"), "w") as fh:
        json.dump(_clean(summary), fh, indent=2, sort_keys=True)
        fh.write("\n")
    status = "PASS" if passed else "FAIL"
    print(f"{args.command}: {status} -> {os.path.join(args.out, 'summary.json')}")
    return 0 if passed else 2


def main(argv=None):
    args = build_parser().parse_args(argv)
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
