"""Metric families: closed-form curvature, volumes, chart finite differences,
and the conformal transformation rule."""

import numpy as np
import pytest

from conftest import sectional_curvatures
from ricci_lab import charts, models
from ricci_lab.curvature import Metric4, decompose, kulkarni_nomizu
from ricci_lab.errors import ContractViolation, RicciLabError
from ricci_lab.models import FubiniStudy, ProductS2S2, RoundS4

I4 = np.eye(4)
PI2 = np.pi ** 2


# ---------------------------------------------------------------------------
# homogeneous families

def test_round_sphere_curvature_oracle():
    g, rm = RoundS4(1.0).curvature_at()
    secs = sectional_curvatures(rm, g.g)
    assert np.allclose(secs, 1.0, atol=1e-12)
    dec = decompose(rm, g)
    assert np.isclose(dec.scalar, 12.0)
    assert np.allclose(dec.ric, 3.0 * I4, atol=1e-12)


def test_round_sphere_radius_scaling():
    g, rm = RoundS4(2.0).curvature_at()
    assert np.allclose(sectional_curvatures(rm, g.g), 0.25, atol=1e-13)


def test_product_curvature_oracle():
    g, rm = ProductS2S2(1.0, 1.0).curvature_at()
    dec = decompose(rm, g)
    assert np.isclose(dec.scalar, 4.0)
    assert np.allclose(dec.e, 0.0, atol=1e-13)
    # factor planes have curvature 1, mixed planes 0
    assert np.isclose(rm[0, 1, 0, 1], 1.0)
    assert np.isclose(rm[2, 3, 2, 3], 1.0)
    assert abs(rm[0, 2, 0, 2]) < 1e-14


def test_projective_plane_is_einstein_and_self_dual():
    g, rm = FubiniStudy(6.0).curvature_at()
    dec = decompose(rm, g)
    assert np.allclose(dec.ric, 6.0 * I4, atol=1e-12)
    assert np.max(np.abs(dec.w_minus)) < 1e-12
    secs = sectional_curvatures(rm, g.g)
    assert secs.min() > 1.0 - 1e-9 and secs.max() < 4.0 + 1e-9


def test_volumes():
    assert np.isclose(RoundS4(1.0).volume(), 8 * PI2 / 3)
    assert np.isclose(RoundS4(2.0).volume(), 8 * PI2 / 3 * 16)
    assert np.isclose(ProductS2S2(1.0, 1.0).volume(), 16 * PI2)
    assert np.isclose(FubiniStudy(6.0).volume(), PI2 / 2)


def test_homogeneous_curvature_same_at_every_point():
    m = ProductS2S2(1.3, 0.7)
    _, rm1 = m.curvature_at([0.0, 0.0, 0.0, 0.0])
    _, rm2 = m.curvature_at([5.0, -1.0, 2.0, 0.1])
    assert np.array_equal(rm1, rm2)


def test_invalid_parameters_rejected():
    with pytest.raises(ContractViolation):
        RoundS4(-1.0)
    with pytest.raises(ContractViolation):
        ProductS2S2(1.0, 0.0)


# ---------------------------------------------------------------------------
# chart finite differences

def test_chart_sphere_fd_matches_closed_form():
    """Fourth-order differences at step 1e-2 reproduce the stereographic
    closed form to 1e-6 relative."""
    chart = charts.chart_s4(1.0, resolution=6)
    for pt in ([0.3, -0.2, 0.1, 0.4], [0.0, 0.0, 0.0, 0.0], [0.7, 0.3, -0.3, 0.1]):
        g, rm = chart.curvature_at(np.array(pt))
        rm_exact = 0.5 * kulkarni_nomizu(g.g, g.g)
        scale = np.max(np.abs(rm_exact))
        assert np.max(np.abs(rm - rm_exact)) < 1e-6 * scale


def test_chart_sphere_volume_quadrature():
    chart = charts.chart_s4(1.0, resolution=12)
    assert np.isclose(chart.volume(), 8 * PI2 / 3, rtol=1e-10)
    chart = charts.chart_s4(2.0, resolution=12)
    assert np.isclose(chart.volume(), 8 * PI2 / 3 * 16, rtol=1e-10)


def test_chart_point_outside_domain_rejected():
    chart = charts.chart_s4(1.0, resolution=4)
    with pytest.raises(RicciLabError):
        chart.curvature_at(np.array([3.0, 0.0, 0.0, 0.0]))


def test_chart_homogeneity_of_scalars():
    chart = charts.chart_s4(1.0, resolution=4)
    decs = []
    for pt in ([0.2, 0.1, 0.0, -0.3], [0.6, -0.5, 0.3, 0.0]):
        g, rm = chart.curvature_at(np.array(pt))
        decs.append(decompose(rm, g))
    assert np.isclose(decs[0].scalar, decs[1].scalar, rtol=1e-7)
    assert np.isclose(decs[0].sigma2, decs[1].sigma2, rtol=1e-7)


def test_chart_product_volume_and_report_values():
    chart = charts.chart_s2s2(1.0, 1.3, resolution=10)
    assert np.isclose(chart.volume(), 16 * PI2 * 1.69, rtol=1e-10)
    vals = chart.integrate_many({"r": lambda d: d.scalar})
    expected = (2.0 + 2.0 / 1.69) * 16 * PI2 * 1.69
    assert np.isclose(vals["r"], expected, rtol=1e-5)


def test_richardson_estimate_small_on_smooth_chart():
    chart = charts.chart_s4(1.0, resolution=6)
    est = chart.richardson_estimate({"sigma2": lambda d: d.sigma2}, subsample=64)
    assert est["sigma2"] < 1e-6


# ---------------------------------------------------------------------------
# conformal transformation of the Schouten-type tensor

def _sphere_chart_quantities(x):
    """Analytic P, w, dw, Hess(w) for flattening the unit-sphere chart:
    exp(2w) g is the flat metric for w = log((1 + |x|^2) / 2)."""
    x = np.asarray(x, dtype=float)
    s = float(x @ x)
    psi = 2.0 / (1.0 + s)
    g = Metric4(psi ** 2 * I4)
    p = 0.5 * psi ** 2 * I4
    dw = 2.0 * x / (1.0 + s)
    ddw = 2.0 * I4 / (1.0 + s) - 4.0 * np.outer(x, x) / (1.0 + s) ** 2
    # covariant correction for the conformally flat metric: the flat-chart
    # Christoffels of g contract dw to  -(2 dw dw - |dw|^2 I)
    hess = ddw + 2.0 * np.outer(dw, dw) - (dw @ dw) * I4
    return g, p, dw, hess


def test_conformal_schouten_identity_factor():
    g = Metric4(I4)
    p = 0.3 * I4
    out = models.conformal_schouten(p, 0.0, np.zeros(4), np.zeros((4, 4)), g)
    assert np.array_equal(out, p)


def test_conformal_schouten_constant_factor_scaling():
    g = Metric4(I4)
    p = np.diag([0.1, 0.2, 0.3, 0.4])
    c = 0.8
    out = models.conformal_schouten(p, c, np.zeros(4), np.zeros((4, 4)), g)
    # as a (0,2) tensor P is unchanged; eigenvalues of gtilde^-1 P pick up
    # exp(-2c), and sigma2 dv stays invariant
    assert np.allclose(out, p)
    ev_new = np.linalg.eigvalsh(np.exp(-2 * c) * out)
    assert np.allclose(ev_new, np.exp(-2 * c) * np.linalg.eigvalsh(p))


def test_conformal_schouten_flattens_the_sphere_chart():
    for x in ([0.0, 0.0, 0.0, 0.0], [0.5, -0.2, 0.1, 0.3], [1.2, 0.0, -0.7, 0.4]):
        g, p, dw, hess = _sphere_chart_quantities(x)
        out = models.conformal_schouten(p, 0.0, dw, hess, g)
        assert np.max(np.abs(out)) < 1e-12


def test_conformal_schouten_round_trip():
    """Deforming by w and back by -w returns the original tensor when the
    second leg uses the Hessian and norm of the deformed metric."""
    rng = np.random.default_rng(4)
    g_mat = rng.normal(size=(4, 4))
    g_mat = g_mat @ g_mat.T + 4 * I4
    g = Metric4(g_mat)
    p = rng.normal(size=(4, 4))
    p = 0.5 * (p + p.T)
    w = 0.37
    dw = rng.normal(size=4)
    hess = rng.normal(size=(4, 4))
    hess = 0.5 * (hess + hess.T)

    p1 = models.conformal_schouten(p, w, dw, hess, g)
    # Hessian of -w with respect to exp(2w) g, by the standard rule
    ginv = np.linalg.inv(g_mat)
    norm2 = dw @ ginv @ dw
    hess_back = -hess + 2.0 * np.outer(dw, dw) - norm2 * g_mat
    g2 = Metric4(np.exp(2 * w) * g_mat)
    p2 = models.conformal_schouten(p1, -w, -dw, hess_back, g2)
    assert np.allclose(p2, p, atol=1e-10)


def test_conformal_schouten_shape_validation():
    with pytest.raises(ContractViolation):
        models.conformal_schouten(0.3 * I4, 0.0, np.zeros(3), np.zeros((4, 4)),
                                  Metric4(I4))


def test_conformal_chart_matches_pointwise_rule():
    """Finite-difference curvature of exp(2w) g agrees with the pointwise
    transformation rule applied to the base chart decomposition."""
    w_fn = models.random_conformal_exponent(7, amplitude=0.2)
    base = charts.chart_s4(1.0, resolution=4)
    deformed = models.conformal_chart_s4(1.0, w_fn, resolution=4)
    pt = np.array([0.25, -0.1, 0.4, 0.05])

    g0, rm0 = base.curvature_at(pt)
    dec0 = decompose(rm0, g0)

    # chart-coordinate derivatives of w by high-order differences
    def w_chart(x):
        r2 = 1.0
        s = np.sum(x * x, axis=-1, keepdims=True)
        head = 2 * r2 * x / (r2 + s)
        last = (r2 - s) / (r2 + s)
        return w_fn(np.concatenate([head, last], axis=-1))

    h = 1e-3
    dw = np.zeros(4)
    ddw = np.zeros((4, 4))
    for i in range(4):
        for sgn, c in ((2, -1), (1, 8), (-1, -8), (-2, 1)):
            dw[i] += c * w_chart((pt + sgn * h * I4[i])[None])[0] / (12 * h)
    w0 = w_chart(pt[None])[0]
    for i in range(4):
        vals = [w_chart((pt + k * h * I4[i])[None])[0] for k in (-2, -1, 0, 1, 2)]
        ddw[i, i] = (-vals[0] + 16 * vals[1] - 30 * vals[2] + 16 * vals[3] - vals[4]) / (12 * h * h)
    for i in range(4):
        for j in range(i + 1, 4):
            acc = 0.0
            for ci, si in ((1, 2), (-8, 1), (8, -1), (-1, -2)):
                for cj, sj in ((1, 2), (-8, 1), (8, -1), (-1, -2)):
                    acc += ci * cj * w_chart((pt + si * h * I4[i] + sj * h * I4[j])[None])[0]
            ddw[i, j] = ddw[j, i] = acc / (144 * h * h)

    # covariant Hessian with respect to the base metric
    gl = np.zeros((4, 4, 4))
    gj, dg, _ = charts.metric_jets(base.patches[0].metric_fn, pt[None])
    ginv = np.linalg.inv(gj[0])
    gl = 0.5 * (np.einsum("imj->mij", dg[0]) + np.einsum("jmi->mij", dg[0])
                - np.einsum("mij->mij", dg[0]))
    gamma = np.einsum("lm,mij->lij", ginv, gl)
    hess = ddw - np.einsum("kij,k->ij", gamma, dw)

    p_rule = models.conformal_schouten(dec0.p, w0, dw, hess, g0)

    g1, rm1 = deformed.curvature_at(pt)
    dec1 = decompose(rm1, g1)
    assert np.max(np.abs(dec1.p - p_rule)) < 1e-6


# ---------------------------------------------------------------------------
# JSON specs

def test_spec_round_trip():
    m = models.from_spec({"kind": "product_s2s2", "a": 1.0, "b": 1.2})
    assert isinstance(m, ProductS2S2) and m.b == 1.2
    spec = models.describe(m)
    assert spec == {"spec_version": 1, "kind": "product_s2s2", "a": 1.0, "b": 1.2}


def test_spec_chart_kinds_accept_resolution():
    m = models.from_spec({"kind": "chart_s4", "r": 1.0, "resolution": 4})
    assert m.node_count == 2 * 4 ** 4


def test_spec_rejects_unknown_kind_and_version():
    with pytest.raises(ContractViolation):
        models.from_spec({"kind": "klein_bottle"})
    with pytest.raises(ContractViolation):
        models.from_spec({"kind": "round_s4", "spec_version": 99})


def test_spec_conformal_kind():
    m = models.from_spec({"kind": "conformal",
                          "base": {"kind": "chart_s4", "r": 1.0, "resolution": 4},
                          "w": {"seed": 1, "amplitude": 0.1}})
    assert m.kind == "conformal_s4"
    assert m.node_count == 2 * 4 ** 4
