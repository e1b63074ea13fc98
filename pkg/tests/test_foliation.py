import csv

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from twistfol import gallery
from twistfol.exceptions import InsufficientDataError, LabelingError
from twistfol.foliation import (FoliationSpec, area_between, bilipschitz_fit,
                                build_generating_function, c1_report, grid_from_function,
                                holder_fit, leaf_mean, mixed_partials_check,
                                read_foliation_csv, standard_foliation, table_foliation,
                                tabulate)

TWO_PI = 2.0 * np.pi
STRANGE_FOL = gallery.strange_foliation()
CONJ_FOL = gallery.integrable_family(conjugator=gallery.shear_conjugator())[1]


def smooth_square_foliation():
    """Leaves of the generating function u = c^2 sin(2 pi theta)."""
    return FoliationSpec.from_generating_function(
        lambda t, c: TWO_PI * c * c * np.cos(TWO_PI * t),
        lambda t, c: 2.0 * TWO_PI * c * np.cos(TWO_PI * t),
        lambda t, c: -TWO_PI ** 2 * c * c * np.sin(TWO_PI * t), name="c2sin")


def test_standard_generating_function_vanishes():
    g = build_generating_function(standard_foliation(), 33, 17, (-1, 1))
    assert np.all(g.u == 0) and np.all(g.du_dc == 0)


def test_strange_generating_function_closed_form(linear_eps_params):
    fol = gallery.strange_foliation(linear_eps_params)
    g = build_generating_function(fol, 257, 65, (-1, 1))
    T, C = np.meshgrid(g.theta_nodes, g.c_nodes, indexing="ij")
    expected = linear_eps_params.epsilon(C) * np.sin(TWO_PI * T) / TWO_PI
    assert np.max(np.abs(g.u - expected)) < 1e-8


def test_appendix_a_gamma_against_adaptive_quadrature(appendix_a):
    p = appendix_a.params
    for t in (0.1, 0.3, 0.45, 0.5, 0.55, 0.8, 1.0):
        ref, _ = quad(lambda s: float(p.d_gamma(s)), 0.0, t, limit=200, epsabs=1e-13)
        assert abs(float(p.gamma(t)) - ref) < 1e-10


def test_appendix_a_generating_function(appendix_a):
    p = appendix_a.params
    g = build_generating_function(appendix_a.foliation, 513, 33, (-1, 1))
    T, C = np.meshgrid(g.theta_nodes, g.c_nodes, indexing="ij")
    expected = p.zeta(C) * (p.gamma(T) - p.gamma(0.0))
    assert np.max(np.abs(g.u - expected)) < 1e-6


def test_leaf_mean_values():
    assert leaf_mean(standard_foliation(), 0.42) == pytest.approx(0.42, abs=1e-15)
    assert leaf_mean(STRANGE_FOL, 0.7) == pytest.approx(0.7, abs=1e-12)


def test_mislabeled_table_detected():
    theta = np.arange(64) / 64
    c = np.linspace(-1, 1, 21)
    T, C = np.meshgrid(theta, c, indexing="ij")
    fol = table_foliation(theta, c, C + 0.1 + 0.05 * np.cos(TWO_PI * T))
    assert leaf_mean(fol, 0.3) == pytest.approx(0.4, abs=1e-12)
    with pytest.raises(LabelingError):
        build_generating_function(fol, 65, 9, (-0.5, 0.5))


def test_window_outside_domain():
    fol = table_foliation(np.arange(8) / 8, np.array([0.0, 1.0]), np.tile([0.0, 1.0], (8, 1)))
    with pytest.raises(ValueError):
        build_generating_function(fol, 9, 9, (-1, 1))


def test_c1_report_flags_kink(linear_eps_params):
    fol = gallery.strange_foliation(linear_eps_params)
    g = build_generating_function(fol, 129, 128, (-0.5, 0.5))
    rep = c1_report(g)
    # one-sided c-derivatives of u differ by (eps'(0+) - eps'(0-)) sin(2 pi theta)/(2 pi)
    jump = (2.0 / (8.0 * np.pi)) / TWO_PI
    assert rep.flagged
    assert np.all(np.abs(rep.flagged_c) < 0.02)
    assert rep.max_jump == pytest.approx(jump, rel=1e-6)
    assert rep.theta_at_max in (0.25, 0.75)


def test_c1_report_zero_and_smooth():
    th = np.linspace(0, 1, 65)
    zero = grid_from_function(lambda t, c: 0 * t, lambda t, c: 0 * t, lambda t, c: 0 * t,
                              th, np.linspace(-1, 1, 64))
    assert not c1_report(zero).flagged
    for M in (64, 128, 256):
        g = build_generating_function(smooth_square_foliation(), 65, M, (-1, 1))
        rep = c1_report(g)
        assert not rep.flagged
    # jumps shrink linearly with the c-spacing
    j = [c1_report(build_generating_function(smooth_square_foliation(), 65, M, (-1, 1))).max_jump
         for M in (64, 128, 256)]
    assert j[0] / j[1] == pytest.approx(2.0, rel=0.1) and j[1] / j[2] == pytest.approx(2.0, rel=0.1)


def test_c1_report_needs_resolution():
    g = build_generating_function(standard_foliation(), 9, 32, (-1, 1))
    with pytest.raises(ValueError):
        c1_report(g)


def test_holder_standard():
    fit = holder_fit(standard_foliation(), (-1, 1))
    assert fit.exponent == pytest.approx(1.0, abs=0.01)
    assert 0.0 <= fit.r_squared <= 1.0


def test_holder_strange(linear_eps_params):
    fit = holder_fit(gallery.strange_foliation(linear_eps_params), (-1, 1))
    assert fit.exponent == pytest.approx(1.0, abs=0.05)


def test_holder_errors():
    with pytest.raises(ValueError):
        holder_fit(standard_foliation(), (-1, 1), pair_count=10)
    flat = FoliationSpec(lambda t, c: np.floor(np.asarray(c)) + 0 * np.asarray(t))
    with pytest.raises(InsufficientDataError):
        holder_fit(flat, (0.1, 0.9))


def test_bilipschitz_standard():
    fit = bilipschitz_fit(standard_foliation(), (-1, 1))
    assert fit.K_upper == pytest.approx(1.0, abs=1e-12)
    assert fit.K_lower == pytest.approx(1.0, abs=1e-12)
    assert abs(fit.k_minus) < 1e-12 and abs(fit.k_plus) < 1e-12
    assert fit.bilipschitz


def test_bilipschitz_strange(linear_eps_params):
    fit = bilipschitz_fit(gallery.strange_foliation(linear_eps_params), (-1, 1))
    k = 1.0 / (8.0 * np.pi)
    assert fit.K_upper == pytest.approx(1 + k, abs=1e-3)
    assert fit.K_lower == pytest.approx(1 - k, abs=1e-3)
    assert fit.k_plus > fit.k_minus > -1


def test_bilipschitz_appendix_a_degenerates(appendix_a):
    fit = bilipschitz_fit(appendix_a.foliation, (-0.05, 0.05))
    assert not fit.bilipschitz
    assert fit.K_lower < 1e-3


def test_mixed_partials_smooth():
    g = build_generating_function(smooth_square_foliation(), 128, 128, (-1, 1))
    rep = mixed_partials_check(g)
    assert rep.method == "analytic" and rep.max_discrepancy <= 1e-6


def test_mixed_partials_zero():
    g = build_generating_function(standard_foliation(), 128, 128, (-1, 1))
    assert mixed_partials_check(g).max_discrepancy == 0.0


def test_mixed_partials_strange_row(linear_eps_params):
    fol = gallery.strange_foliation(linear_eps_params)
    # zero is neither a node nor a cell midpoint, where symmetric quadrature would hide the kink
    g = build_generating_function(fol, 128, 128, (-0.5, 0.53))
    rep = mixed_partials_check(g)
    far = np.abs(rep.row_centers) > 0.01
    assert np.max(rep.row_max[far]) <= 1e-6
    assert abs(rep.c_at_max) < 0.01 and rep.max_discrepancy > 1e-3


def test_mixed_partials_staggered_route():
    theta = np.arange(256) / 256
    c = np.linspace(-1.2, 1.2, 241)
    T, C = np.meshgrid(theta, c, indexing="ij")
    fol = table_foliation(theta, c, C + TWO_PI * C * C * np.cos(TWO_PI * T))
    g = build_generating_function(fol, 129, 129, (-1, 1), label_tol=1e-3)
    rep = mixed_partials_check(g)
    assert rep.method == "staggered"
    assert rep.max_discrepancy < 0.05


def test_area_between_examples():
    std = standard_foliation()
    assert area_between(std, 0.1, 0.4, 0.2, 0.7) == pytest.approx(0.5, abs=1e-14)
    assert area_between(STRANGE_FOL, -0.3, 0.2, 0.1, 1.1) == pytest.approx(1.0, abs=1e-8)
    with pytest.raises(ValueError):
        area_between(std, 0.4, 0.4, 0.0, 0.5)


def test_area_between_strange_half_period(linear_eps_params):
    fol = gallery.strange_foliation(linear_eps_params)
    d = 0.01
    t = np.linspace(0, 0.5, 10001)
    diff = fol.leaf(t, np.full_like(t, d)) - fol.leaf(t, np.full_like(t, -d))
    oracle = np.trapezoid(diff, t) / (2 * d)
    assert area_between(fol, -d, d, 0.0, 0.5) == pytest.approx(oracle, abs=1e-8)


def test_csv_round_trip(tmp_path):
    g = build_generating_function(STRANGE_FOL, 9, 8, (-1, 1))
    path = tmp_path / "u.csv"
    g.to_csv(path)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["theta", "c", "u", "du_dtheta", "du_dc"]
    assert len(rows) == 1 + 72

    theta = np.arange(16) / 16
    c = np.linspace(-1, 1, 5)
    src = tmp_path / "fol.csv"
    with open(src, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["theta", "c", "eta"])
        for t in theta:
            for cc in c:
                w.writerow([t, cc, cc + 0.1 * np.cos(TWO_PI * t)])
    fol = read_foliation_csv(src)
    assert fol.leaf(0.25, 0.5) == pytest.approx(0.5 + 0.1 * np.cos(TWO_PI * 0.25), abs=1e-12)


window_c = st.floats(-1.5, 1.5)


@given(window_c)
def test_generating_grid_properties(c0):
    for fol in (STRANGE_FOL, CONJ_FOL):
        g = build_generating_function(fol, 65, 8, (c0, c0 + 0.5))
        assert np.max(np.abs(g.u[-1] - g.u[0])) <= 1e-9
        assert np.all(g.u[0] == 0)
        T, C = np.meshgrid(g.theta_nodes, g.c_nodes, indexing="ij")
        assert np.max(np.abs(C + g.du_dtheta - fol.leaf(T, C))) <= 1e-12


@given(st.floats(0, 1), st.floats(-2, 2), st.floats(1e-6, 1.0))
def test_leaves_are_ordered(theta, c, gap):
    for fol in (STRANGE_FOL, CONJ_FOL):
        assert fol.leaf(np.float64(theta), np.float64(c)) < fol.leaf(np.float64(theta),
                                                                     np.float64(c + gap))


@given(st.floats(-2, 2), st.floats(1e-3, 1.0), st.floats(0, 1))
def test_area_normalization(c, gap, t0):
    assert area_between(STRANGE_FOL, c, c + gap, t0, t0 + 1.0) == pytest.approx(1.0, abs=1e-8)


def test_tabulate_keeps_leaves():
    tab = tabulate(STRANGE_FOL, 512, np.linspace(-1, 1, 201))
    t = np.array([0.0, 0.25, 0.5])
    assert np.allclose(tab.leaf(t, np.full(3, 0.3)), STRANGE_FOL.leaf(t, np.full(3, 0.3)))
