import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crflat.errors import (DomainGuard, JacobianSingular, ProfileViolation,
                           QuadratureUnreliable)
from crflat.mapar import (OdeFamily, PQProfile, closed_form_residuals,
                          final1_residuals, firstcur_check, forward_map,
                          invert_point, w_product_closed_form, liouville_residuals,
                          monge_residual_1d, pq_validate, rho_jet_from_pq)
from crflat.tube import tube_invariants
from oracles import random_profile

PARABOLA = PQProfile("v^2/2", "v")
CONIC = PQProfile("sqrt(1+v^2)-1", "v/sqrt(1+v^2)")
CUBIC = PQProfile("v^2/2+v^3/6", "v")


def test_validate_parabola():
    d = pq_validate(PARABOLA)
    assert d.min_qprime == 1 and d.min_abs_pdd == 1


@pytest.mark.parametrize("p,q,where", [("v^3/6", "v", 0.0), ("v^2/2", "v^2", None),
                                       ("v^2/2+1", "v", 0.0)])
def test_validate_rejects(p, q, where):
    with pytest.raises(ProfileViolation) as exc:
        pq_validate(PQProfile(p, q))
    if where is not None:
        assert exc.value.at == where


def test_invert_parabola():
    v, w = invert_point(PARABOLA, 0.2, 0.1)
    assert v == pytest.approx(0.2 / 0.9, rel=1e-14)
    assert w == 0.1
    assert invert_point(CONIC, 0.0, 0.0) == (0.0, 0.0)


def test_invert_jacobian_guard():
    # q' - w p'' = 1 - w vanishes at w = 1
    with pytest.raises(JacobianSingular):
        invert_point(PARABOLA, 0.1, 1.0)


def test_rho_parabola_closed_form():
    rho = rho_jet_from_pq(PARABOLA, 0.2, 0.1)
    assert rho.value == pytest.approx(0.04 / 1.8, rel=1e-13)
    assert rho.partial((2, 0)) == pytest.approx(1 / 0.9, rel=1e-13)
    # every partial of t1^2 / (2 (1 - t2))
    for (a, b), c in rho.as_dict().items():
        if a > 2:
            assert abs(c) < 1e-13
    assert rho.partial((2, 3)) == pytest.approx(6 / 0.9 ** 4, rel=1e-12)


def test_rho_at_origin():
    rho = rho_jet_from_pq(CUBIC, 0.0, 0.0)
    assert rho.value == 0 and rho.partial((1, 0)) == 0 and rho.partial((0, 1)) == 0


def test_quadrature_guard():
    prof = PQProfile("v^2/2", "v", interval=(-0.1, 0.1))
    with pytest.raises(QuadratureUnreliable):
        rho_jet_from_pq(prof, 0.3, 0.0)


def test_closed_form_cubic():
    assert closed_form_residuals(CUBIC, 0.1, 0.05)["max"] < 1e-9


def test_closed_form_parabola_rho111_zero():
    q = closed_form_residuals(PARABOLA, 0.2, -0.1)["quantities"]
    assert q["rho_111"][1] == 0


def test_closed_form_guard():
    with pytest.raises(JacobianSingular):
        closed_form_residuals(PARABOLA, 0.1, 1.0)


def test_final1_conic():
    res = final1_residuals(CONIC, 0.3)
    assert max(res["scaled"]) < 1e-9


def test_final1_quartic_direct_substitution():
    # p = v^4 + v^2/2, q = v: p'' = 12 v^2 + 1, p''' = 24 v, p'''' = 24, p''''' = 0
    v = 0.1
    p2, p3, p4 = 12 * v * v + 1, 24 * v, 24.0
    expected = -45 * p4 * p3 * p2 + 40 * p3 ** 3
    res = final1_residuals(PQProfile("v^4+v^2/2", "v"), v)
    assert res["signed"][0] == pytest.approx(expected, rel=1e-12)


def test_final1_trivial_profile():
    assert final1_residuals(PARABOLA, 0.2)["raw"] == [0, 0, 0, 0]


def test_firstcur():
    assert firstcur_check(PARABOLA) == (True, 0.0)
    const, dev = firstcur_check(CONIC)
    assert const and dev < 1e-12
    const, dev = firstcur_check(CUBIC)
    assert not const
    # q'/p'' = 1/(1+v) on [-0.5, 0.5]: largest gap to 1 is at v = -0.5
    assert dev == pytest.approx(1.0, rel=1e-12)


def test_monge_1d():
    assert monge_residual_1d("sqrt(1+v^2)-1", 0.3)[1] < 1e-10
    assert monge_residual_1d("v^2/2", 0.4) == (0.0, 0.0)
    assert monge_residual_1d("v^4", 0.1)[0] == pytest.approx(241.92, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(-0.3, 0.3), st.floats(-0.2, 0.2))
def test_forward_inverse_roundtrip(seed, v, w):
    prof = random_profile(np.random.default_rng(seed))
    t1, t2 = forward_map(prof, v, w)
    v2, w2 = invert_point(prof, t1, t2)
    assert abs(v2 - v) < 1e-11 and w2 == w


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_reconstructed_tube_is_monge_ampere(seed):
    prof = random_profile(np.random.default_rng(seed))
    for t in [(a, b) for a in (-0.05, 0.0, 0.05) for b in (-0.05, 0.0, 0.05)]:
        rep = tube_invariants(rho_jet_from_pq(prof, *t), t)
        assert rep.residual_ma_scaled < 1e-9


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(-0.3, 0.3), st.floats(-0.2, 0.2))
def test_closed_forms_random(seed, v, w):
    prof = random_profile(np.random.default_rng(seed))
    assert closed_form_residuals(prof, v, w)["max"] < 1e-9


def _final1_to_monge_identity(prof, v, w):
    """monge residual of rho at (v, w) versus -P / Delta^9."""
    p, q = prof.derivatives(v, 5)
    delta = q[1] - w * p[2]
    E1, E2, E3, E4 = final1_residuals(prof, v)["signed"]
    P = E4 - 3 * E3 * w + 3 * E2 * w ** 2 - E1 * w ** 3
    t = forward_map(prof, v, w)
    rep = tube_invariants(rho_jet_from_pq(prof, *t), t)
    return rep.residual_monge, abs(P / delta ** 9)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(-0.3, 0.3), st.floats(-0.2, 0.2))
def test_final1_collects_monge_in_w(seed, v, w):
    prof = random_profile(np.random.default_rng(seed))
    got, ref = _final1_to_monge_identity(prof, v, w)
    assert got == pytest.approx(ref, rel=1e-8, abs=1e-10)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(-0.3, 0.3), st.floats(-0.2, 0.2))
def test_w_product_identity(seed, v, w):
    prof = random_profile(np.random.default_rng(seed))
    t = forward_map(prof, v, w)
    rep = tube_invariants(rho_jet_from_pq(prof, *t), t)
    S = rep.s_chain.S
    ref = w_product_closed_form(prof, v, w)
    assert 3 * S ** 3 * rep.W == pytest.approx(ref, rel=1e-8, abs=1e-12)


def test_w_sign_correspondence():
    # p''' q' - p'' q'' = 1 for the cubic profile at v = 0, so W != 0 there
    t = forward_map(CUBIC, 0.0, 0.1)
    rep = tube_invariants(rho_jet_from_pq(CUBIC, *t), t)
    assert abs(rep.W) > 10 * 1e-8
    t = forward_map(CONIC, 0.2, 0.1)
    rep = tube_invariants(rho_jet_from_pq(CONIC, *t), t)
    assert abs(rep.W) < 1e-12


def test_conic_profile_gives_flat_tube():
    for t in [(a, b) for a in (-0.05, 0.0, 0.05) for b in (-0.05, 0.0, 0.05)]:
        rep = tube_invariants(rho_jet_from_pq(CONIC, *t), t)
        assert rep.label == "flat"
        assert rep.residual_monge_scaled < 1e-8


@pytest.mark.parametrize("fam,x", [
    (OdeFamily("case1", 1, 0.0, 1.0), 0.2),
    (OdeFamily("case1", -1, 0.0, 0.5), 0.1),
    (OdeFamily("case2", 1, 1.0, 0.5), 0.1),
    (OdeFamily("case2", -1, 2.0, 0.3), -0.1),
    (OdeFamily("case3", 1, -1.0, math.pi / 4), 0.1),
    (OdeFamily("case3", -1, -0.5, 1.0), 0.3),
])
def test_liouville_cases(fam, x):
    r = liouville_residuals(fam, x)
    assert r["ode"] < 1e-10 and r["first_integral"] < 1e-10
    assert r["C_recovered"] == pytest.approx(fam.C, abs=1e-10)


def test_liouville_case1_closed_form():
    r = liouville_residuals(OdeFamily("case1", 1, 0.0, 1.0), 0.2)
    assert r["g"] == pytest.approx(-math.log(0.8), rel=1e-15)
    assert r["ode"] < 1e-12 and r["first_integral"] < 1e-12


def test_liouville_reinhardt():
    r = liouville_residuals(OdeFamily("reinhardt", beta=0.0), 0.3)
    assert r["g"] == pytest.approx(-math.log(0.7), rel=1e-15)
    assert r["ode"] < 1e-12 and r["first_integral"] < 1e-12


@pytest.mark.parametrize("kw", [dict(family="case1", C=0.0, D=-1.0),
                                dict(family="case2", C=1.0, D=1.5),
                                dict(family="case3", C=-1.0, D=2.0),
                                dict(family="case3", C=1.0, D=0.5),
                                dict(family="case4"),
                                dict(family="case1", sigma=2)])
def test_ode_param_ranges(kw):
    with pytest.raises(ValueError):
        OdeFamily(**kw)


def test_liouville_domain_guard():
    with pytest.raises(DomainGuard):
        liouville_residuals(OdeFamily("case1", 1, 0.0, 1.0), 1.0)


@pytest.mark.parametrize("fam", [OdeFamily("case1", 1, 0.0, 1.0),
                                 OdeFamily("case2", -1, 1.0, 0.5),
                                 OdeFamily("case3", 1, -1.0, 0.7),
                                 OdeFamily("reinhardt", beta=-0.2)])
def test_graphing_functions_flat(fam):
    from crflat.rigid import rigid_invariants
    for pt in [(0.03 + 0.02j, 0.01 - 0.02j), (-0.02j, 0.04)]:
        r = rigid_invariants(fam.graphing_function(), pt)
        assert r.label == "flat"
