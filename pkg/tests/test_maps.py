import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from twistfol import gallery
from twistfol.exceptions import DivergenceError, NonGraphError, StepSizeError
from twistfol.maps import (AnnulusPoint, Jacobian2, LiftPoint, TwistMapSpec, det_defect,
                           exactness_flux, fd_jacobian, fd_step, inverse_defect,
                           iterated_twist_margin, jacobian_array, lift_periodicity_defect,
                           map_eval_lift, map_jacobian, table_map, twist_margin)

angles = st.floats(-3.0, 3.0)
radii = st.floats(-0.8, 0.8)


def test_lift_point_rejects_nonfinite():
    with pytest.raises(ValueError):
        LiftPoint(np.nan, 0.0)
    assert LiftPoint(2.25, 0.1).project() == AnnulusPoint(0.25, 0.1)


def test_annulus_point_range():
    with pytest.raises(ValueError):
        AnnulusPoint(1.0, 0.0)


def test_eval_integrable_two_steps():
    fmap = gallery.integrable_map()
    q = map_eval_lift(fmap, LiftPoint(0.0, 0.5), 2)
    assert (q.x, q.r) == (1.0, 0.5)


def test_eval_zero_steps_is_identity(strange):
    p = LiftPoint(0.3, 0.2)
    assert map_eval_lift(strange.twist_map, p, 0) == p


def test_eval_negative_steps_inverts(strange):
    p = LiftPoint(0.3, 0.2)
    q = map_eval_lift(strange.twist_map, map_eval_lift(strange.twist_map, p, 3), -3)
    assert abs(q.x - p.x) < 1e-12 and abs(q.r - p.r) < 1e-12


def test_strange_step_matches_composed_factors(strange):
    # oracle: Phi+ o f_rho o (Phi+)^-1 from the three factor callables
    x, c = strange.phi_plus.inverse(0.3, 0.2)
    x2, c2 = strange.f_rho.forward(x, c)
    theta, r = strange.phi_plus.forward(x2, c2)
    q = map_eval_lift(strange.twist_map, LiftPoint(0.3, 0.2), 1)
    assert abs(q.x - float(theta)) < 1e-12 and abs(q.r - float(r)) < 1e-12


def test_divergence_bound():
    fmap = TwistMapSpec(lambda x, r: (x, 10.0 * r + 1.0), lambda x, r: (x, (r - 1.0) / 10.0))
    with pytest.raises(DivergenceError):
        map_eval_lift(fmap, LiftPoint(0.0, 1.0), 10)


def test_jacobian_integrable_constant():
    j = map_jacobian(gallery.integrable_map(), LiftPoint(0.7, -2.0))
    assert j == Jacobian2(1.0, 1.0, 0.0, 1.0)
    assert j.det == 1.0


def test_jacobian_rigid_rotation_fd():
    rot = TwistMapSpec(lambda x, r: (np.asarray(x) + 0.3, np.asarray(r) + 0.0),
                       lambda x, r: (np.asarray(x) - 0.3, np.asarray(r) + 0.0))
    j = map_jacobian(rot, LiftPoint(0.2, 0.4)).as_array()
    assert np.allclose(j, np.eye(2), atol=1e-9)


def test_fd_step_underflow():
    with pytest.raises(StepSizeError):
        fd_jacobian(lambda x, r: (x, r), np.array([0.0]), np.array([1e300]) * 0 + np.inf)


def test_fd_step_rule():
    assert fd_step(0.0) == 1e-6
    assert fd_step(1e4) == pytest.approx(1e-8 * (1 + 1e4))


def test_strange_differential_matches_finite_differences(strange):
    rng = np.random.default_rng(1)
    x, r = rng.uniform(0, 1, 50), rng.uniform(-1, 1, 50)
    r = r[np.abs(r) > 0.05]
    x = x[: r.size]
    exact = jacobian_array(strange.twist_map, x, r)
    approx = fd_jacobian(strange.twist_map.forward, x, r)
    assert np.max(np.abs(exact - approx)) < 1e-7


def test_strange_near_zero_section_linear(strange):
    # sup ||Df - I|| on the leaf c = R shrinks by 10 with R
    theta = np.arange(64) / 64
    fol = strange.foliation
    norms = []
    for R in (1e-2, 1e-3, 1e-4):
        d = jacobian_array(strange.twist_map, theta, fol.leaf(theta, np.full(64, R))) - np.eye(2)
        norms.append(np.max(np.linalg.norm(d, 2, axis=(1, 2))))
    ratios = np.array(norms[:-1]) / np.array(norms[1:])
    assert np.all(np.abs(ratios - 10.0) < 0.5)
    assert norms[-1] / 1e-4 < 10 * norms[0] / 1e-2


def test_twist_margin_linear(shear_map):
    assert twist_margin(shear_map, (-1, 1)) == pytest.approx(1.0, abs=1e-9)
    neg = TwistMapSpec(lambda x, r: (np.asarray(x) - r, np.asarray(r) + 0.0),
                       lambda x, r: (np.asarray(x) + r, np.asarray(r) + 0.0))
    assert twist_margin(neg, (-1, 1)) == pytest.approx(-1.0, abs=1e-9)


def test_iterated_twist_margin(shear_map):
    assert iterated_twist_margin(shear_map, 3, (-1, 1)) == pytest.approx(3.0, abs=1e-8)
    assert iterated_twist_margin(shear_map, 1, (-1, 1), 32) == twist_margin(shear_map, (-1, 1), 32)


def test_iterated_twist_margin_cubic():
    rho = lambda r: np.asarray(r) + 0.5 * np.asarray(r) ** 3
    drho = lambda r: 1.0 + 1.5 * np.asarray(r) ** 2
    fmap, _ = gallery.integrable_family(rho, drho)
    # d(F^5)_1/dr = 5 rho'(r) for the integrable family, minimized at r = 0 on [-0.5, 0.5]
    got = iterated_twist_margin(fmap, 5, (-0.5, 0.5), (16, 65))
    assert got == pytest.approx(5.0, abs=1e-6)


def test_strange_twist_margin_positive(strange):
    assert twist_margin(strange.twist_map, (0.01, 1.0)) > 0
    assert twist_margin(strange.twist_map, (-1.0, -0.01)) > 0


def test_flux_trivial_cases(shear_map):
    assert exactness_flux(shear_map, np.full(256, 0.4)) == pytest.approx(0.0, abs=1e-14)
    lift = TwistMapSpec(lambda x, r: (np.asarray(x) + 0.0, np.asarray(r) + 1.0),
                        lambda x, r: (np.asarray(x) + 0.0, np.asarray(r) - 1.0))
    assert exactness_flux(lift, np.zeros(256)) == pytest.approx(1.0, abs=1e-14)


def test_flux_strange_leaf(strange):
    theta = np.arange(4096) / 4096
    curve = strange.foliation.leaf(theta, np.full(4096, 0.3))
    assert abs(exactness_flux(strange.twist_map, curve)) <= 1e-6


def test_flux_non_graph():
    fold = TwistMapSpec(lambda x, r: (np.asarray(x) + 0.3 * np.sin(6 * np.pi * np.asarray(x)), r),
                        lambda x, r: (x, r))
    with pytest.raises(NonGraphError) as info:
        exactness_flux(fold, np.zeros(64))
    assert info.value.index >= 0


def test_table_map_reproduces_affine_shear():
    xn = np.linspace(0, 1, 33)
    rn = np.linspace(-1, 1, 17)
    X, R = np.meshgrid(xn, rn, indexing="ij")
    fmap = table_map(xn, rn, X + R, R)
    x, r = np.array([0.13, 1.7, -0.4]), np.array([0.2, -0.5, 0.9])
    fx, fr = fmap.forward(x, r)
    assert np.allclose(fx, x + r) and np.allclose(fr, r)
    assert inverse_defect(fmap, x, r) < 1e-10


_STRANGE = gallery.strange_twist_map().twist_map
_CONJ, _ = gallery.integrable_family(conjugator=gallery.shear_conjugator())


@given(angles, radii)
def test_structural_identities_strange(x, r):
    assert lift_periodicity_defect(_STRANGE, x, r) <= 1e-12
    assert inverse_defect(_STRANGE, x, r) <= 1e-10
    assert det_defect(_STRANGE, x, r) <= 1e-8


@given(angles, radii)
def test_structural_identities_conjugated(x, r):
    fmap = _CONJ
    assert lift_periodicity_defect(fmap, x, r) <= 1e-12
    assert inverse_defect(fmap, x, r) <= 1e-10
    assert det_defect(fmap, x, r) <= 1e-8
