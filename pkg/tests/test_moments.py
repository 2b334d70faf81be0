import itertools
import json

import pytest

from canonmoments.errors import DegreeTooLarge, MissingMoment
from canonmoments.moments import (
    MomentIndex,
    MomentPolynomial,
    MomentState,
    bracket_single_dof,
    k_coefficient,
    moments_of_order,
    moments_up_to,
    truncate,
    uncertainty_check,
)
from canonmoments.weyl import weyl_bracket_oracle


def test_parse_single_dof_labels():
    assert MomentIndex.parse("q2pi").powers == ((2, 1),)
    assert MomentIndex.parse("pi3").powers == ((0, 3),)
    assert MomentIndex.parse("qpi").powers == ((1, 1),)
    assert MomentIndex.parse("q2pi").label == "q2pi"


def test_parse_two_dof_labels():
    idx = MomentIndex.parse("q1^2pi2", 2)
    assert idx.powers == ((2, 0), (0, 1))
    assert idx.label == "q1^2pi2"


@pytest.mark.parametrize("bad", ["q-1", "x2", "", "q2q"])
def test_parse_rejects_malformed(bad):
    with pytest.raises(ValueError):
        MomentIndex.parse(bad)


def test_moment_counts():
    assert len(moments_of_order(3)) == 4
    assert len(moments_of_order(2, dof=2)) == 10
    assert len(moments_up_to(4)) == 3 + 4 + 5


def test_second_order_brackets():
    assert str(bracket_single_dof("q2", "pi2", 2)) == "4*qpi"
    assert str(bracket_single_dof("q2", "qpi", 2)) == "2*q2"
    assert str(bracket_single_dof("qpi", "pi2", 2)) == "2*pi2"


def test_third_order_abelian():
    assert bracket_single_dof("q3", "pi3", 3).is_zero()
    full = bracket_single_dof("q3", "pi3")
    assert not full.is_zero()
    assert full.max_order() > 3


def test_k_coefficient_validation():
    assert k_coefficient(1, 1, 1, 1, 1) == 0
    with pytest.raises(ValueError):
        k_coefficient(0, 1, 1, 1, 1)
    with pytest.raises(ValueError):
        k_coefficient(1, -1, 1, 1, 1)


LABELS = [m.label for m in moments_up_to(4)]


@pytest.mark.parametrize("a,b", list(itertools.combinations(LABELS, 2)))
def test_closed_formula_matches_operator_oracle(a, b):
    assert bracket_single_dof(a, b) == weyl_bracket_oracle(a, b)


@pytest.mark.parametrize("a,b", list(itertools.combinations(LABELS[:7], 2)))
def test_bracket_antisymmetry(a, b):
    assert bracket_single_dof(a, b) == -bracket_single_dof(b, a)


def test_two_dof_oracle_second_order():
    poly = weyl_bracket_oracle("q1q2", "pi1^2", 2)
    assert str(poly) == "2*q2pi1"


def test_oracle_degree_cap():
    with pytest.raises(DegreeTooLarge):
        weyl_bracket_oracle("q7", "pi2")


def test_truncation_drops_high_orders():
    poly = bracket_single_dof("q3", "pi3")
    assert truncate(poly, 3).is_zero()
    assert truncate(poly, 4) == truncate(poly, 4).truncate(4)
    with pytest.raises(ValueError):
        truncate(poly, 1)


def test_evaluate_and_missing_moment():
    poly = MomentPolynomial.from_terms([(2, 0, [MomentIndex.parse("q2")]), (1, 1, [MomentIndex.parse("pi2")])])
    assert poly.evaluate({MomentIndex.parse("q2"): 3.0, MomentIndex.parse("pi2"): 5.0}, hbar=0.5) == 8.5
    with pytest.raises(MissingMoment):
        poly.evaluate({}, 1.0)


def test_state_json_round_trip():
    st = MomentState({"q2": 1.0, "qpi": 0.1, "pi2": 0.5}, hbar=1.0)
    back = MomentState.from_json(st.to_json())
    assert back.moments == st.moments
    assert json.loads(st.to_json())["moments"]["q2"] == 1.0
    with pytest.raises(ValueError):
        MomentState.from_json({"moments": {}, "bogus": 1})


def test_uncertainty_check():
    assert uncertainty_check(MomentState({"q2": 0.5, "qpi": 0.0, "pi2": 0.5})) == []
    assert uncertainty_check(MomentState({"q2": 0.1, "qpi": 0.0, "pi2": 0.1})) != []
