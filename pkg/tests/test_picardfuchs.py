"""Differential-operator checks: exact residuals, transport, error paths."""

from fractions import Fraction

import pytest

from crepant.algebra import AlgebraZ
from crepant.geometry import builtin
from crepant.ifunction import build_ifunction
from crepant.picardfuchs import (
    LinForm,
    PFError,
    PFOperator,
    PFTerm,
    apply_operator,
    pf_system,
    proportional,
    recorded_systems,
    transform_chart,
    verify_pf,
)


def test_single_derivation_at_origin():
    # D on the base geometry hits the prefactor class: d=0 layer gives p
    geom = builtin("ex1-Y")
    alg = geom.algebra
    I = build_ifunction(geom, 1)
    op = PFOperator("D", 1, (PFTerm((0,), Fraction(1), (LinForm((Fraction(1),)),)),))
    values, skipped = apply_operator(op, I)
    assert not skipped
    assert values[(0,)].num == AlgebraZ(alg, {0: alg.from_label("p")})


def test_zero_operator_gives_zero():
    geom = builtin("ex1-Y")
    I = build_ifunction(geom, 2)
    op = PFOperator("0", 1, (PFTerm((0,), Fraction(0), ()),))
    values, _ = apply_operator(op, I)
    assert all(v.is_zero for v in values.values())


def test_scalar_prefactor_enters_derivation():
    # the quotient side carries x^(-λ/z); D at index 0 must give -λ
    geom = builtin("ex1-X")
    alg = geom.algebra
    I = build_ifunction(geom, 1)
    op = PFOperator("D", 1, (PFTerm((0,), Fraction(1), (LinForm((Fraction(1),)),)),))
    values, _ = apply_operator(op, I)
    from crepant.lambda_rat import LambdaRat
    assert values[(0,)].num == AlgebraZ(alg, {0: alg.one() * (-LambdaRat.gen())})


@pytest.mark.parametrize("name", sorted(recorded_systems()))
def test_recorded_systems_annihilate(name):
    rep = verify_pf(name, 8)
    assert rep.geometry == name
    assert rep.bound == 8
    assert all(count > 0 for _, count in rep.checked)


def test_residual_detects_corruption():
    ops = pf_system("ex1-Y")
    good = ops[0]
    bad = PFOperator(good.label, 1, (
        good.terms[0],
        PFTerm(good.terms[1].shift, good.terms[1].constant, (
            good.terms[1].factors[0],
            good.terms[1].factors[1],
            LinForm((Fraction(-3),), Fraction(1), Fraction(-5)),  # -5z, not -2z
        ))))
    I = build_ifunction(builtin("ex1-Y"), 3)
    values, _ = apply_operator(bad, I)
    assert any(not v.is_zero for v in values.values())


def test_verify_raises_on_corruption(monkeypatch):
    import crepant.picardfuchs as pf
    good = pf_system("ex1-Y")

    def bad_system(name):
        op = good[0]
        broken = PFOperator(op.label, 1, (
            op.terms[0],
            PFTerm(op.terms[1].shift, Fraction(-2), op.terms[1].factors)))
        return (broken,)

    monkeypatch.setattr(pf, "pf_system", bad_system)
    with pytest.raises(PFError, match="residual nonzero at index"):
        pf.verify_pf("ex1-Y", 3)


def test_no_recorded_system():
    with pytest.raises(PFError, match="no recorded differential system"):
        pf_system("ex3-X")


def test_insufficient_truncation_reported():
    # at bound 2 the cubic-shift term never engages
    with pytest.raises(PFError, match="insufficient truncation|never engages"):
        verify_pf("ex1-X", 2)


def test_chart_transport_ex1():
    op_y = pf_system("ex1-Y")[0]
    moved = transform_chart(op_y, [[Fraction(-1, 3)]], [[-3]])
    assert proportional(moved, pf_system("ex1-X")[0])
    # and back
    op_x = pf_system("ex1-X")[0]
    back = transform_chart(op_x, [[Fraction(-3)]], [[Fraction(-1, 3)]])
    assert proportional(back, op_y)


def test_chart_transport_rejects_off_lattice():
    op_x = pf_system("ex1-X")[0]
    with pytest.raises(PFError, match="off the\\s+integer lattice"):
        transform_chart(op_x, [[Fraction(-3)]], [[Fraction(-1, 2)]])


def test_proportional_distinguishes():
    assert not proportional(pf_system("ex1-Y")[0], pf_system("ex4-Y")[0])
    op = pf_system("ex1-Y")[0]
    doubled = PFOperator(op.label, 1, tuple(
        PFTerm(t.shift, t.constant * 2, t.factors) for t in op.terms))
    assert proportional(op, doubled)


def test_operator_validation():
    with pytest.raises(PFError, match="negative shift"):
        PFOperator("bad", 1, (PFTerm((-1,), Fraction(1), ()),))
    with pytest.raises(PFError, match="arity"):
        PFOperator("bad", 2, (PFTerm((0,), Fraction(1), ()),))


def test_partial_resolution_shares_system():
    a = pf_system("ex2-X")
    b = pf_system("ex3-Y")
    assert len(a) == len(b) == 3
    for opa, opb in zip(a, b):
        assert proportional(opa, opb)
