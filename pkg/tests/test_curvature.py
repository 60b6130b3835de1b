"""Closed-form curvature of the deformed connection against a direct oracle."""

import numpy as np
import pytest

from affconn import (
    BadParams,
    ConnectionSpec,
    Corruption,
    IdentityEndoField,
    PolynomialOneFormField,
    PolynomialScalarField,
    compare_curvature,
    curvature_direct,
    curvature_formula,
    diagnose,
    evaluate_spec,
    max_abs,
    needed_order,
    norm_residual,
    preset_manifold,
    random_spec,
)
from affconn.cases import RicciOperatorEndoField
from affconn.curvature import GROUPS, eta_helpers, exterior_2du, mu_tensor, r0
from affconn.fields import PolynomialExpr, random_polynomial
from conftest import rel_err

x1 = PolynomialExpr.coordinate(2, 0)
x2 = PolynomialExpr.coordinate(2, 1)
zero2 = PolynomialExpr.zero(2)


def identity_phi_frame(order=2):
    man = preset_manifold("euclidean", {"n": 2})
    spec = ConnectionSpec.build(
        2, u=PolynomialOneFormField(2, [zero2, x1]), phi=IdentityEndoField(2)
    )
    pts = np.array([[1.0, 0.0]])
    return man, spec, evaluate_spec(man.chart, man.metric, spec, pts, order=order)


def double_recurrence_spec():
    omega = PolynomialOneFormField(2, [x2, zero2])
    return ConnectionSpec.build(
        2,
        f1=PolynomialScalarField.constant(2, -1.0),
        f2=PolynomialScalarField.constant(2, -1.0),
        u1=omega,
        u2=omega,
    )


# ---------------------------------------------------------------- helpers

def test_eta_helper_matrix_on_identity_phi_fixture():
    _, _, frame = identity_phi_frame()
    eh = eta_helpers(frame.u, frame)
    assert np.array_equal(eh.alpha[0], [[0.5, 1.0], [0.0, -0.5]])


def test_mu_vanishes_for_identity_phi():
    _, _, frame = identity_phi_frame()
    assert max_abs(mu_tensor(frame)) == 0.0


def test_r0_antisymmetrizes_its_vector_slots():
    rng = np.random.default_rng(0)
    g = rng.normal(size=(3, 2, 2))
    g = g + g.swapaxes(1, 2)
    x, y, z = (rng.normal(size=(3, 2)) for _ in range(3))
    out = r0(g, x, y, z)
    flipped = r0(g, y, x, z)
    assert rel_err(out, -flipped) < 1e-14
    # flat metric, orthonormal slots: R0(e1, e2)e2 = e1
    e1 = np.tile([1.0, 0.0], (1, 1))
    e2 = np.tile([0.0, 1.0], (1, 1))
    flat = np.eye(2)[None]
    assert np.array_equal(r0(flat, e1, e2, e2), e1)


def test_exterior_derivative_layout_and_exactness():
    # u = x^2 dx^1 has 2du_{12} = d_1 u_2 - d_2 u_1 = -1
    u = PolynomialOneFormField(2, [x2, zero2])
    j = u.jet(np.zeros((1, 2)))
    du = exterior_2du(j)
    assert du[0, 0, 1] == -1.0 and du[0, 1, 0] == 1.0
    assert np.array_equal(du, -du.swapaxes(1, 2))
    # gradient one-forms are closed, and the cancellation is exact
    f = random_polynomial(2, np.random.default_rng(1), degree=4)
    df = PolynomialOneFormField(2, [f.deriv(0), f.deriv(1)])
    pts = np.random.default_rng(2).uniform(-1, 1, size=(8, 2))
    assert np.all(exterior_2du(df.jet(pts)) == 0.0)


def test_needed_order_accounts_for_derived_fields():
    assert needed_order(ConnectionSpec.zero(2)) == 2
    spec = ConnectionSpec.build(2, u=PolynomialOneFormField(2, [zero2, x1]),
                                phi=RicciOperatorEndoField(2))
    assert needed_order(spec) == 3


# ----------------------------------------------------------- degeneration

def test_zero_spec_reduces_to_levi_civita_curvature(bumpy2):
    spec = ConnectionSpec.zero(2)
    pts = bumpy2.chart.sample(6, 3)
    frame = evaluate_spec(bumpy2.chart, bumpy2.metric, spec, pts, order=2)
    r, groups = curvature_formula(frame)
    assert norm_residual(r, frame.geo.riemann.r) < 1e-15
    assert all(np.all(groups[name] == 0.0) for name in GROUPS if name != "riemann")
    direct = curvature_direct(bumpy2.chart, bumpy2.metric, spec, pts)
    assert norm_residual(direct, frame.geo.riemann.r) < 1e-12


def test_identity_phi_fixture_activates_only_its_groups():
    _, _, frame = identity_phi_frame()
    _, groups = curvature_formula(frame)
    live = sorted(name for name, v in groups.items() if max_abs(v) > 0.0)
    assert live == ["a_phi1", "alpha_phi1"]


def test_curvature_values_double_recurrence_fixture():
    man = preset_manifold("euclidean", {"n": 2})
    spec = double_recurrence_spec()
    pts = np.array([[0.0, 1.0]])
    frame = evaluate_spec(man.chart, man.metric, spec, pts, order=2)
    r, _ = curvature_formula(frame)
    assert r[0, 0, 0, 1, 0] == -2.0  # first component of R(d1,d2)d1
    assert r[0, 1, 0, 1, 0] == -1.0  # second component
    direct = curvature_direct(man.chart, man.metric, spec, pts)
    assert norm_residual(r, direct) < 1e-14


# ------------------------------------------------------- formula vs oracle

def test_formula_matches_direct_oracle_on_all_presets(flat2, flat3, sphere, halfplane, bumpy2, bumpy3):
    for k, man in enumerate((flat2, flat3, sphere, halfplane, bumpy2, bumpy3)):
        spec = random_spec(man.chart, 300 + k)
        pts = man.chart.sample(8, 400 + k)
        for rep in compare_curvature(man.chart, man.metric, spec, pts):
            assert rep.residual < 1e-8


def test_curvature_is_antisymmetric_in_the_plane_slots(bumpy2):
    spec = random_spec(bumpy2.chart, 17)
    pts = bumpy2.chart.sample(5, 18)
    frame = evaluate_spec(bumpy2.chart, bumpy2.metric, spec, pts, order=2)
    r, _ = curvature_formula(frame)
    assert norm_residual(r, -r.swapaxes(2, 3)) < 1e-14
    direct = curvature_direct(bumpy2.chart, bumpy2.metric, spec, pts)
    assert norm_residual(direct, -direct.swapaxes(2, 3)) < 1e-14


def test_compare_curvature_reports_per_point(bumpy2):
    spec = random_spec(bumpy2.chart, 19)
    pts = bumpy2.chart.sample(4, 20)
    reports = compare_curvature(bumpy2.chart, bumpy2.metric, spec, pts)
    assert len(reports) == 4
    for i, rep in enumerate(reports):
        assert np.array_equal(rep.point, pts[i])
        assert sorted(rep.term_contributions) == sorted(GROUPS)
        assert rep.formula.shape == (2, 2, 2, 2)
        assert rep.residual < 1e-8


# ------------------------------------------------------------- corruption

def test_group_corruption_moves_the_formula_only(bumpy2):
    spec = random_spec(bumpy2.chart, 21)
    pts = bumpy2.chart.sample(4, 22)
    frame = evaluate_spec(bumpy2.chart, bumpy2.metric, spec, pts, order=2)
    clean, _ = curvature_formula(frame)
    hot, _ = curvature_formula(frame, corrupt=Corruption("f1_block"))
    assert max_abs(hot - clean) > 1e-6
    clean_direct = curvature_direct(bumpy2.chart, bumpy2.metric, spec, pts)
    hot_direct = curvature_direct(bumpy2.chart, bumpy2.metric, spec, pts, corrupt=Corruption("f1_block"))
    assert np.array_equal(clean_direct, hot_direct)


def test_h_corruption_moves_the_oracle_only(bumpy2):
    spec = random_spec(bumpy2.chart, 23)
    pts = bumpy2.chart.sample(4, 24)
    frame = evaluate_spec(bumpy2.chart, bumpy2.metric, spec, pts, order=2)
    clean, _ = curvature_formula(frame)
    hot, _ = curvature_formula(frame, corrupt=Corruption("h_f1"))
    assert np.array_equal(clean, hot)
    clean_direct = curvature_direct(bumpy2.chart, bumpy2.metric, spec, pts)
    hot_direct = curvature_direct(bumpy2.chart, bumpy2.metric, spec, pts, corrupt=Corruption("h_f1"))
    assert max_abs(hot_direct - clean_direct) > 1e-6


def test_unknown_corruption_term_is_rejected(bumpy2):
    spec = random_spec(bumpy2.chart, 25)
    pts = bumpy2.chart.sample(2, 26)
    with pytest.raises(BadParams):
        compare_curvature(bumpy2.chart, bumpy2.metric, spec, pts, corrupt=Corruption("no_such_term"))


# --------------------------------------------------------------- diagnosis

def test_diagnose_passes_on_clean_input(bumpy2):
    spec = random_spec(bumpy2.chart, 27)
    pts = bumpy2.chart.sample(5, 28)
    report = diagnose(bumpy2.chart, bumpy2.metric, spec, pts)
    assert report["pass"] is True
    assert report["minimal_failing_bindings"] == []
    assert all(row["pass"] for row in report["binding_ablation"])


@pytest.mark.parametrize(
    "term,expected_bindings",
    [
        ("alpha_phi1", {"u", "phi"}),
        ("h_f1", {"f1", "u1"}),
        ("h_f2", {"f2", "u2"}),
        ("du_phi2", {"u", "phi"}),
    ],
)
def test_diagnose_attributes_injected_faults(bumpy2, term, expected_bindings):
    spec = random_spec(bumpy2.chart, 29)
    pts = bumpy2.chart.sample(6, 30)
    report = diagnose(bumpy2.chart, bumpy2.metric, spec, pts, corrupt=Corruption(term))
    assert report["pass"] is False
    top = report["term_table"][0]
    assert top["term"] == term
    assert top["explained_fraction"] > 0.999
    assert set(report["minimal_failing_bindings"]) == expected_bindings
    # keeping only the named bindings must still fail; that is minimality's other half
    kept = report["minimal_failing_bindings"]
    stripped = spec
    for name in ("u", "u1", "u2", "f1", "f2", "phi"):
        if name not in kept:
            stripped = stripped.with_zeroed(name)
    for rep in compare_curvature(bumpy2.chart, bumpy2.metric, stripped, pts, corrupt=Corruption(term)):
        pass
    assert max(r.residual for r in compare_curvature(
        bumpy2.chart, bumpy2.metric, stripped, pts, corrupt=Corruption(term))) > 1e-8


def test_diagnose_alignment_sign_separates_the_sides(bumpy2):
    # formula-side faults align positively, oracle-side faults negatively
    spec = random_spec(bumpy2.chart, 31)
    pts = bumpy2.chart.sample(5, 32)
    for term, sign in (("f2_block", 1.0), ("h_u_phi1", -1.0)):
        report = diagnose(bumpy2.chart, bumpy2.metric, spec, pts, corrupt=Corruption(term))
        top = report["term_table"][0]
        assert top["term"] == term
        assert top["alignment"] == pytest.approx(sign, abs=1e-9)


def test_diagnose_is_deterministic(bumpy2):
    spec = random_spec(bumpy2.chart, 33)
    pts = bumpy2.chart.sample(5, 34)
    a = diagnose(bumpy2.chart, bumpy2.metric, spec, pts, corrupt=Corruption("r0_mu"))
    b = diagnose(bumpy2.chart, bumpy2.metric, spec, pts, corrupt=Corruption("r0_mu"))
    assert a == b
