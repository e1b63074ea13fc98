"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line.

The lines are printed at the end of the pytest session (see ``conftest.py``)
and also when the module is run directly with ``python tests/test_acceptance.py``.
"""
import subprocess
import sys

import numpy as np
import pytest
from scipy.integrate import trapezoid
from scipy.optimize import brentq

from twistfol import gallery
from twistfol.exceptions import NotStraightenableError
from twistfol.foliation import (bilipschitz_fit, build_generating_function, holder_fit,
                                mixed_partials_check, standard_foliation, tabulate)
from twistfol.green import green_limits, sandwich_check
from twistfol.maps import LiftPoint, exactness_flux, jacobian_array, twist_margin
from twistfol.rotation import (leaf_invariance_defect, measure_cdf, projected_circle_map,
                               rational_leaf_density, semiconjugacy_residual)
from twistfol.straighten import (StraighteningMap, area_distortion, arnold_liouville_residual,
                                 build_straightening, monotone_convolution_check, mollify,
                                 random_rectangles)

TWO_PI = 2.0 * np.pi
RESULTS = []


def record(label, ok, detail):
    line = f"{label}: {'PASS' if ok else 'FAIL'} ({detail})"
    RESULTS.append(line)
    print(line)
    assert ok, line


def _conjugated():
    return gallery.integrable_family(conjugator=gallery.shear_conjugator(0.05, 0.5))


def _cubic():
    return gallery.integrable_family(lambda r: np.asarray(r) + 0.5 * np.asarray(r) ** 3,
                                     lambda r: 1.0 + 1.5 * np.asarray(r) ** 2,
                                     gallery.shear_conjugator(0.05, 0.5))


@pytest.fixture(scope="module")
def maps():
    sm = gallery.strange_twist_map()
    return {"conjugated": _conjugated(), "cubic": _cubic(),
            "strange": (sm.twist_map, sm.foliation), "_strange": sm}


def test_c1_integrable_ground_truth():
    psi = gallery.shear_conjugator(0.05, 0.5)
    fmap, fol = gallery.integrable_family(conjugator=psi)
    rho = lambda c: np.asarray(c)
    win = (-0.45, 0.45)
    analytic = arnold_liouville_residual(fmap, StraighteningMap.from_conjugator(psi), rho,
                                         200, window=win)
    grid = build_generating_function(fol, 513, 513, (-0.5, 0.5))
    numeric = arnold_liouville_residual(fmap, build_straightening(grid), rho, 200, window=win)
    record("C1 integrable ground truth", analytic <= 1e-8 and numeric <= 1e-4,
           f"analytic {analytic:.2e} <= 1e-8, numeric {numeric:.2e} <= 1e-4")


def test_c2_rational_density():
    fmap, fol = _conjugated()
    d = rational_leaf_density(fmap, fol, 0.0, 1)
    h = 1e-5
    spread = (fol.leaf(d.theta, np.full(d.theta.shape, h))
              - fol.leaf(d.theta, np.full(d.theta.shape, -h))) / (2 * h)
    err = float(np.max(np.abs(d.density - spread)))
    mass = abs(trapezoid(d.density, d.theta) - 1.0)
    record("C2 rational-leaf density", err <= 1e-3 and mass <= 1e-9,
           f"sup error {err:.2e} <= 1e-3, mass defect {mass:.2e} <= 1e-9")


def _half_leaf(rho, lo, hi, target):
    return brentq(lambda c: float(rho(c)) - target, lo, hi, xtol=1e-14)


def test_c3_semiconjugacy(maps):
    N = 100000
    nodes = np.arange(1024) / 1024
    sm = maps["_strange"]
    rho_of = {"conjugated": lambda c: c, "cubic": lambda c: c + 0.5 * c ** 3,
              "strange": sm.params.rho}
    worst, near_half = 0.0, []
    for name in ("conjugated", "cubic", "strange"):
        fmap, fol = maps[name]
        rho = rho_of[name]
        near = [_half_leaf(rho, 0.0, 2.0, 0.5 - 7e-4), _half_leaf(rho, 0.0, 2.0, 0.5 + 8e-4)]
        leaves = list(np.linspace(-0.4, 0.4, 8)) + near
        for c in leaves:
            data = measure_cdf(projected_circle_map(fmap, fol, c), nodes, N)
            worst = max(worst, data.residual * N)
        near_half += [abs(float(rho(c)) - 0.5) for c in near]
    # continuity across the rational 1/2 on the conjugated family
    fmap, fol = maps["conjugated"]
    fine = np.linspace(0.4513, 0.5513, 17)
    hs = [measure_cdf(projected_circle_map(fmap, fol, c), nodes, N).h_samples for c in fine]
    dists = [max(float(np.max(np.abs(a - b))) for a, b in zip(hs[::s][:-1], hs[::s][1:]))
             for s in (4, 2, 1)]
    ok = worst <= 5.0 and max(near_half) < 1e-3 and dists[0] > dists[1] > dists[2]
    record("C3 semi-conjugacy", ok,
           f"max residual*N {worst:.2f} <= 5 over 30 leaves, adjacent sup-distances "
           + " > ".join(f"{d:.3g}" for d in dists))


def test_c4_holder():
    sm = gallery.strange_twist_map()
    _, conj = _conjugated()
    _, cubic = _cubic()
    app = gallery.appendix_a_family()
    tables = {
        "strange": (tabulate(sm.foliation, 512, np.linspace(-1, 1, 401)), (-0.9, 0.9)),
        "conjugated": (tabulate(conj, 512, np.linspace(-1, 1, 401)), (-0.9, 0.9)),
        "cubic": (tabulate(cubic, 512, np.linspace(-1, 1, 401)), (-0.9, 0.9)),
        "appendix_a": (tabulate(app.foliation, 512, np.linspace(-1, 1, 401)), (-0.9, 0.9)),
    }
    fits = {k: holder_fit(t, w, gap_range=(1e-3, 1e-1)) for k, (t, w) in tables.items()}
    std = holder_fit(standard_foliation(), (-1, 1))
    ok = all(f.exponent >= 0.45 and f.r_squared >= 0.9 for f in fits.values()) \
        and abs(std.exponent - 1.0) <= 0.01
    record("C4 Holder", ok, ", ".join(f"{k} {f.exponent:.3f}/r2 {f.r_squared:.4f}"
                                      for k, f in fits.items())
           + f", standard {std.exponent:.4f}")


def test_c5_green(maps):
    gd = green_limits(gallery.integrable_map(), LiftPoint(0.3, 0.2), 200)
    k = np.arange(1, 201)
    exact = max(np.max(np.abs(gd.s_pos - 1.0 / k)), np.max(np.abs(gd.s_neg + 1.0 / k)))
    rng = np.random.default_rng(0)
    bad = 0
    for i in range(100):
        name = ("conjugated", "cubic", "strange")[i % 3]
        fmap, fol = maps[name]
        t = rng.uniform(0, 1)
        # the strange map is the identity on the zero leaf, where slopes are undefined
        c = rng.uniform(0.05, 0.9) * rng.choice([-1.0, 1.0])
        g = green_limits(fmap, LiftPoint(t, float(fol.leaf(t, c))), 100)
        strict = np.all(np.diff(g.s_pos) < 0) and np.all(np.diff(g.s_neg) > 0) \
            and g.s_neg[-1] < g.s_pos[-1]
        bad += not (g.interleaved and strict)
    leaves = {"conjugated": (-0.3, 0.0, 0.3), "cubic": (-0.3, 0.3), "strange": (-0.5, 0.3, 0.7)}
    sandwiches = [sandwich_check(*maps[n], c, samples=64).passed
                  for n, cs in leaves.items() for c in cs]
    fmap, fol = maps["conjugated"]
    tilt = lambda t: fol.leaf(np.asarray(t), np.full(np.shape(t), 0.2)) \
        + 0.1 * np.sin(TWO_PI * np.asarray(t))
    tilted = sandwich_check(fmap, fol, 0.2, samples=64, curve=tilt).passed
    ok = exact <= 1e-12 and bad == 0 and all(sandwiches) and not tilted
    record("C5 Green bundles", ok,
           f"|s_k -+ 1/k| {exact:.1e}, interleaving failures {bad}/100, "
           f"sandwich {sum(sandwiches)}/{len(sandwiches)} leaves, tilted curve rejected {not tilted}")


def test_c6_straightening_gate(maps):
    sm = maps["_strange"]
    app = gallery.appendix_a_family()
    smooth = {"conjugated": (maps["conjugated"][1], (-0.5, 0.5)),
              "cubic": (maps["cubic"][1], (-0.5, 0.5)),
              "strange upper half": (sm.foliation, (0.1, 0.9)),
              "appendix_a off zero": (app.foliation, (0.1, 0.6))}
    dists = {}
    for name, (fol, win) in smooth.items():
        grid = build_generating_function(fol, 513, 129, win)
        inner = (win[0] + 0.05 * (win[1] - win[0]), win[1] - 0.05 * (win[1] - win[0]))
        dists[name] = area_distortion(build_straightening(grid), random_rectangles(inner, 20))
    raised = []
    for win in ((-0.5, 0.5), (-0.5, 0.53), (-0.3, 0.7), (-0.9, 0.2), (-0.2, 0.05)):
        try:
            build_straightening(build_generating_function(sm.foliation, 257, 128, win))
            raised.append(False)
        except NotStraightenableError as err:
            raised.append(abs(err.c_node) < 0.05)
    try:
        build_straightening(build_generating_function(app.foliation, 257, 129, (-0.5, 0.5)))
        app_ok = False
    except NotStraightenableError as err:
        app_ok = err.c_node == 0.0
    ok = max(dists.values()) <= 1e-3 and all(raised) and app_ok
    record("C6 straightening gate", ok,
           f"max area distortion {max(dists.values()):.2e} <= 1e-3, strange windows raised "
           f"{sum(raised)}/{len(raised)}, appendix_a raised at c=0 {app_ok}")


def test_c7_strange_map(maps):
    sm = maps["_strange"]
    fmap, fol = maps["strange"]
    inv = max(leaf_invariance_defect(fmap, fol, c) for c in np.linspace(-1, 1, 20))
    theta = np.arange(64) / 64
    norms = []
    for R in (1e-2, 1e-3, 1e-4):
        d = jacobian_array(fmap, theta, fol.leaf(theta, np.full(64, R))) - np.eye(2)
        norms.append(float(np.max(np.linalg.norm(d, 2, axis=(1, 2)))))
    slope = np.polyfit(np.log10([1e-2, 1e-3, 1e-4]), np.log10(norms), 1)[0]
    linear = norms[0] > norms[1] > norms[2] and abs(slope - 1.0) < 0.05
    tm = twist_margin(fmap, (1e-3, 1.0), (256, 256))
    flux = max(abs(exactness_flux(fmap, fol.leaf(np.arange(4096) / 4096, np.full(4096, c))))
               for c in (-0.8, -0.3, 0.1, 0.5, 0.9))
    ok = inv <= 1e-8 and linear and tm > 0 and flux <= 1e-6
    record("C7 strange map", ok,
           f"invariance {inv:.1e}, |Df-I| log-slope {slope:.3f}, twist margin {tm:.2e}, "
           f"flux {flux:.1e}")


def test_c8_mollification(maps):
    grid = build_generating_function(maps["conjugated"][1], 257, 129, (-0.5, 0.5))
    fam = mollify(grid, [0.2, 0.1, 0.05, 0.025])
    dec = bool(np.all(np.diff(fam.c1_errors) < 0))
    margin, mono = monotone_convolution_check(lambda x: x + np.sin(x), 0.1, samples=10000)
    record("C8 mollification", dec and mono,
           "c1 errors " + " > ".join(f"{e:.2e}" for e in fam.c1_errors)
           + f", min increment {margin:.2e} on 1e4 samples")


def test_c9_mixed_partials(maps):
    smooth = [mixed_partials_check(build_generating_function(maps[n][1], 128, 128, (-0.5, 0.5)))
              for n in ("conjugated", "cubic")]
    worst = max(r.max_discrepancy for r in smooth)
    # zero is neither a node nor a cell midpoint of this window
    rep = mixed_partials_check(build_generating_function(maps["strange"][1], 128, 128,
                                                         (-0.5, 0.53)))
    far = np.abs(rep.row_centers) > 0.01
    off = float(np.max(rep.row_max[far]))
    ok = worst <= 1e-5 and abs(rep.c_at_max) < 0.01 and off <= 1e-3 * rep.max_discrepancy
    record("C9 mixed partials", ok,
           f"smooth {worst:.1e} <= 1e-5, strange max {rep.max_discrepancy:.1e} at "
           f"c={rep.c_at_max:.4f}, elsewhere {off:.1e}")


def test_c10_determinism(tmp_path):
    runs = [["conjugacy", "--set", "params.c=[0.1,0.3]", "--set", "params.N=20000"],
            ["straighten", "--set", "map.shear=[0.05,0.5]", "--seed", "5"],
            ["holder-fit", "--set", "map.kind=strange", "--seed", "2"],
            ["strange-demo"]]
    same = 0
    for i, argv in enumerate(runs):
        outs = []
        for rep in "ab":
            out = tmp_path / f"{i}{rep}"
            subprocess.run([sys.executable, "-m", "twistfol", *argv, "--out", str(out)],
                           check=True, capture_output=True)
            outs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
        same += outs[0] == outs[1]
    record("C10 determinism", same == len(runs),
           f"{same}/{len(runs)} subcommands byte-identical across reruns")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
