import math

import pytest

from crflat import expr as E
from crflat.catalog import (default_grid, evaluate_grid, expectation_met,
                            expr_spec, list_families, make_family)
from crflat.errors import ParamOutOfRange, UnknownFamily
from crflat.rigid import polystruct_residual

NAMES = ["thm54_i", "thm54_i_rigid", "thm54_ii", "thm54_iii", "thm54_ii_exp",
         "thm54_iii_trig", "fk", "lightcone_tube", "pq_generic", "perturbed_i"]


def test_family_i_tube_form():
    spec = make_family("thm54_i", D=1)
    assert spec.form == "tube"
    assert E.to_text(spec.expr) == E.to_text(E.parse("2*t1^2/(t2+1.0)"))
    assert [g for g, _ in spec.guards] == ["t2+1.0"]
    assert spec.expected == "flat"


def test_param_ranges():
    with pytest.raises(ParamOutOfRange):
        make_family("thm54_ii", D=2)
    with pytest.raises(ParamOutOfRange):
        make_family("thm54_iii", D=math.pi / 2)
    with pytest.raises(ParamOutOfRange):
        make_family("thm54_i", D=0)
    with pytest.raises(ParamOutOfRange):
        make_family("fk", D=1)
    with pytest.raises(UnknownFamily):
        make_family("thm99")


def test_fk_guard():
    spec = make_family("fk")
    assert [g for g, _ in spec.guards] == ["1-z2*z2b"]
    assert spec.guard_violation((0.0, 1.0)) == "1-z2*z2b"
    assert spec.guard_violation((0.0, 0.5)) is None


def test_listing():
    listing = list_families()
    assert [n for n, *_ in listing] == NAMES
    schema = dict((n, p) for n, _, _, p, _ in listing)
    assert schema["thm54_iii"] == {"D": "(0.0, pi/2)"}
    assert list_families() == listing


def test_default_grids():
    tube = default_grid("tube")
    assert len(tube) == 9 and tube[0] == (-0.05, -0.05) and tube[4] == (0.0, 0.0)
    rigid = default_grid("rigid")
    assert len(rigid) == 81
    assert rigid[0] == (complex(-0.05, -0.05), complex(-0.05, -0.05))
    assert default_grid("tube", (0.1,), 0.1, 5)[0] == (0.0, 0.0)


@pytest.mark.parametrize("name,params", [
    ("thm54_i", {"D": 0.5}), ("thm54_i_rigid", {"D": 2.0}), ("thm54_ii", {"D": 0.75}),
    ("thm54_iii", {"D": 3 * math.pi / 8}), ("thm54_ii_exp", {"D": 0.25}),
    ("thm54_iii_trig", {"D": math.pi / 8}), ("fk", {}), ("lightcone_tube", {}),
])
def test_expected_flat_families(name, params):
    spec = make_family(name, params)
    reps = evaluate_grid(spec)
    assert all(r.label == "flat" for r in reps)
    assert max(r.J_scaled for r in reps) < 1e-8
    assert max(r.W_scaled for r in reps) < 1e-8


def test_negative_controls():
    labels = [r.label for r in evaluate_grid(make_family("perturbed_i", D=1))]
    assert "not_rank1" in labels
    assert expectation_met("nonflat", labels)
    reps = evaluate_grid(make_family("pq_generic"))
    assert any(r.label == "nonflat" for r in reps)
    assert all(r.residual_ma_scaled < 1e-9 for r in reps)


@pytest.mark.parametrize("name", ["thm54_ii", "thm54_iii", "fk"])
def test_gauge_preserves_flatness(name):
    spec = make_family(name, gauge=[0.5, -0.3 + 0.8j, 0, 1j, -0.25])
    assert all(r.label == "flat" for r in evaluate_grid(spec))


def test_gauge_rejected_for_tubes():
    with pytest.raises(ValueError):
        make_family("thm54_i", gauge=[1, 1])


@pytest.mark.parametrize("name", ["thm54_i_rigid", "thm54_ii", "thm54_iii", "thm54_ii_exp",
                                  "thm54_iii_trig", "fk"])
def test_polystruct_matches_cmonge(name):
    spec = make_family(name)
    pts = [(complex(a, 0.01), complex(0.02, b)) for a in (-0.05, 0, 0.05) for b in (-0.05, 0, 0.05)]
    for rep, pt in zip(evaluate_grid(spec, pts), pts):
        ps = polystruct_residual(spec.expr, pt)
        assert (ps < 1e-9) == (rep.residual_cmonge < 1e-9)


def test_guard_skip_recorded():
    spec = make_family("thm54_i", D=0.05)
    reps = evaluate_grid(spec, default_grid("tube"))
    skipped = [r for r in reps if r.label == "out_of_domain"]
    # the t2 = -0.05 row sits on the pole
    assert len(skipped) == 3 and all(r.guard == "t2+0.05" for r in skipped)
    assert expectation_met("flat", [r.label for r in reps])


def test_expr_spec_guards_denominators():
    spec = expr_spec("2*t1^2/(t2+1)", "tube")
    assert [g for g, _ in spec.guards] == ["(t2+1.0)"]
    assert spec.guard_violation((0.0, -1.0)) is not None


def test_expectation_rules():
    assert expectation_met("flat", ["flat", "out_of_domain"])
    assert not expectation_met("flat", ["out_of_domain"])
    assert not expectation_met("flat", ["flat", "nonflat"])
    assert expectation_met("nonflat", ["flat", "nonflat"])
    assert not expectation_met("nonflat", ["flat", "flat"])
    assert expectation_met("unknown", [])


def test_polystruct_matches_cmonge_control():
    spec = expr_spec("z1*z1b + (z1*z1b)^3", "rigid")
    pts = [(complex(a, 0.1), 0.0) for a in (0.2, 0.3, 0.4)]
    for rep, pt in zip(evaluate_grid(spec, pts), pts):
        assert rep.residual_cmonge > 1e-9
        assert polystruct_residual(spec.expr, pt) > 1e-9
