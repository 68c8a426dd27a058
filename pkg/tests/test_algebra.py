"""Algebra, Element, AlgebraZ behavior against frozen closed forms."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from crepant.algebra import (
    exp_truncated,
    AlgebraError,
    AlgebraZ,
    ZLaurent,
    exp_nilpotent,
    nonequivariant_limit,
)
from crepant.geometry import builtin
from crepant.lambda_rat import LambdaRat, format_lambda_rat, parse_lambda_rat


KP2 = builtin("ex1-Y").algebra
C3Z3 = builtin("ex1-X").algebra
KF3 = builtin("ex2-Y").algebra
KP113 = builtin("ex2-X").algebra
C3Z5 = builtin("ex3-X").algebra
OP12 = builtin("ex4-X").algebra
ALL = [KP2, C3Z3, KF3, KP113, C3Z5, OP12, builtin("ex4-Y").algebra]


def el(alg, **coeffs):
    vec = [LambdaRat(0)] * alg.dim
    for label, s in coeffs.items():
        vec[alg.labels.index(label)] = parse_lambda_rat(str(s))
    return alg.element(vec)


def test_all_builtin_algebras_validate():
    for alg in ALL:
        alg.validate()


def test_kp2_dual_basis_closed_form():
    duals = KP2.dual_basis()
    assert duals[0] == el(KP2, **{"p^2": "λ"})
    assert duals[1] == el(KP2, **{"p": "λ", "p^2": "-3"})
    assert duals[2] == el(KP2, **{"1": "λ", "p": "-3"})


def test_c3z3_dual_basis_closed_form():
    duals = C3Z3.dual_basis()
    assert duals[0] == el(C3Z3, **{"1_0": "λ^3/9"})
    assert duals[1] == el(C3Z3, **{"1_2/3": "3"})
    assert duals[2] == el(C3Z3, **{"1_1/3": "3"})


def test_pairing_values():
    p = KP2.from_label("p")
    dual_p = el(KP2, **{"p": "λ", "p^2": "-3"})
    assert format_lambda_rat(KP2.pairing(p, dual_p)) == "1/1"
    one = C3Z3.one()
    assert format_lambda_rat(C3Z3.pairing(one, one)) == "9/λ^3"
    a = C3Z3.from_label("1_1/3")
    b = C3Z3.from_label("1_2/3")
    assert format_lambda_rat(C3Z3.pairing(a, b)) == "1/3"


def test_dual_basis_is_dual_everywhere():
    for alg in ALL:
        duals = alg.dual_basis()
        for i in range(alg.dim):
            for j in range(alg.dim):
                want = LambdaRat(1 if i == j else 0)
                assert alg.pairing(alg.basis(i), duals[j]) == want


def test_product_lambda_enters_with_degree():
    # (λ - 3p)·p^2 = λp^2 in the plane bundle algebra
    a = el(KP2, **{"1": "λ", "p": "-3"})
    b = KP2.from_label("p^2")
    assert a * b == el(KP2, **{"p^2": "λ"})
    # twisted squares pick up λ^3 factors
    t = C3Z3.from_label("1_2/3")
    assert t * t == el(C3Z3, **{"1_1/3": "λ^3/27"})


def test_exp_nilpotent_divisor():
    p = KP2.from_label("p")
    e = exp_nilpotent(p)
    assert e.coefficient(0) == KP2.one()
    assert e.coefficient(-1) == p
    assert e.coefficient(-2) == el(KP2, **{"p^2": "1/2"})
    assert e.support() == [-2, -1, 0]


def test_exp_nilpotent_inverse_property():
    for alg, label in [(KP2, "p"), (KF3, "p1"), (OP12, "p")]:
        a = alg.from_label(label)
        prod = exp_nilpotent(a) * exp_nilpotent(-a)
        assert prod == AlgebraZ(alg, {0: alg.one()})


def test_exp_truncated_handles_non_nilpotent():
    # p2 restricts nontrivially to the point fixed locus: p2^3 = -λ p2^2,
    # so its exponential never terminates and must be truncated by depth
    p2 = KF3.from_label("p2")
    with pytest.raises(AlgebraError, match="not nilpotent"):
        exp_nilpotent(p2)
    prod = exp_truncated(p2, 8) * exp_truncated(-p2, 8)
    assert prod.coefficient(0) == KF3.one()
    for e in range(-8, 0):
        assert prod.coefficient(e).is_zero


def test_exp_nilpotent_rejects_twisted_unit():
    with pytest.raises(AlgebraError):
        exp_nilpotent(C3Z3.from_label("1_1/3"))


def test_nonequivariant_limit_scalar_and_element():
    r = parse_lambda_rat("λ^2+3λ") / parse_lambda_rat("λ")
    assert nonequivariant_limit(r) == LambdaRat(3)
    a = el(KP2, **{"1": "(λ^2+3λ)/(λ)", "p": "2"})
    assert a.nonequivariant_limit() == el(KP2, **{"1": "3", "p": "2"})
    bad = el(KP2, **{"p": "9/λ^3"})
    with pytest.raises(ValueError, match="coefficient of p"):
        bad.nonequivariant_limit()


def test_algebraz_arithmetic_and_shift():
    p = KP2.from_label("p")
    f = AlgebraZ(KP2, {0: KP2.one(), -1: p})
    g = f * f
    assert g.coefficient(0) == KP2.one()
    assert g.coefficient(-1) == 2 * p
    assert g.coefficient(-2) == KP2.from_label("p^2")
    assert g.shift(2).support() == [0, 1, 2]
    zl = ZLaurent({1: parse_lambda_rat("λ"), 0: LambdaRat(-1)})
    h = f * zl
    assert h.coefficient(1) == el(KP2, **{"1": "λ"})
    assert h.coefficient(0) == el(KP2, **{"1": "-1", "p": "λ"})
    assert h.coefficient(-1) == -p


def test_algebraz_nonequivariant_error_names_layer():
    bad = AlgebraZ(KP2, {-3: el(KP2, **{"1": "9/λ^3"})})
    with pytest.raises(ValueError, match="z\\^-3 layer"):
        bad.nonequivariant_limit()


@st.composite
def kf3_elements(draw):
    vec = [
        LambdaRat(Fraction(draw(st.integers(-4, 4)), draw(st.integers(1, 3))))
        for _ in range(KF3.dim)
    ]
    return KF3.element(vec)


@settings(max_examples=50, deadline=None)
@given(kf3_elements(), kf3_elements(), kf3_elements())
def test_random_elements_associative_commutative_frobenius(a, b, c):
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert KF3.pairing(a * b, c) == KF3.pairing(a, b * c)


@settings(max_examples=30, deadline=None)
@given(kf3_elements(), kf3_elements())
def test_pairing_bilinear(a, b):
    two_a = a * 2
    assert KF3.pairing(two_a, b) == KF3.pairing(a, b) * 2
    assert KF3.pairing(a + b, b) == KF3.pairing(a, b) + KF3.pairing(b, b)
