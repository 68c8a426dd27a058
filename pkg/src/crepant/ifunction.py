"""Hypergeometric generating series built from a geometry's gamma rows.

The series of a geometry is

    I = z * (scalar prefactors x_i^(-a_i λ/z))
          * (divisor prefactors x_i^(P_i/z))
          * Σ_n  coeff(n) · Π_i x_i^(step_i · n_i)

where coeff(n) multiplies one gamma ratio per row at shifted index
v_j = Σ_i charge[j][i] n_i / m_i and the sector class of n.  Prefactors are
carried symbolically; coeff(0) is the unit at z^0.

Inverse factors 1/(D + b z) are expanded into finite Laurent polynomials
whenever D is nilpotent with no λ part.  Classes that restrict nontrivially
to a point fixed locus (the Hirzebruch-surface bundle has two such rows)
make the coefficients genuinely rational in z, so coefficients are stored
as a Laurent-polynomial numerator together with a multiset of linear
denominator factors; exact identities are checked by clearing denominators
and z-expansions are produced on request.
"""

from __future__ import annotations

from fractions import Fraction
from math import factorial

from .algebra import Algebra, AlgebraZ, Element
from .geometry import Geometry, enumerate_degrees
from .lambda_rat import LambdaRat, format_lambda_rat


class IFunctionError(ValueError):
    pass


def _scalar_z(alg: Algebra, c: Fraction, e: int = 0) -> AlgebraZ:
    return AlgebraZ(alg, {e: alg.one() * LambdaRat(c)})


def _linear(alg: Algebra, d: Element, b: Fraction) -> AlgebraZ:
    """The factor (D + b z)."""
    layers = {0: d}
    if b != 0:
        layers[1] = alg.one() * LambdaRat(b)
    return AlgebraZ(alg, layers)


def _nilpotency_order(d: Element) -> int | None:
    """Smallest k with d^k = 0, or None if d is not nilpotent."""
    alg = d.algebra
    power = d
    for k in range(1, alg.dim + 2):
        if power.is_zero:
            return k
        power = power * d
    return None


def _den_key(d: Element, b: Fraction):
    """Hashable identity of a denominator factor (D + b z)."""
    return (b, d.coeffs)


def _den_sort_key(t):
    d, b = t
    return (b, tuple(format_lambda_rat(c) for c in d.coeffs))


class RatAZ:
    """AlgebraZ numerator over a multiset of linear factors (D + b z)."""

    __slots__ = ("num", "den")

    def __init__(self, num: AlgebraZ, den=()):
        self.num = num
        self.den = tuple(sorted(den, key=_den_sort_key))

    @property
    def algebra(self) -> Algebra:
        return self.num.algebra

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    @property
    def is_laurent(self) -> bool:
        return not self.den

    def as_algebra_z(self) -> AlgebraZ:
        if self.den:
            raise IFunctionError("coefficient has uncleared denominator factors")
        return self.num

    def __eq__(self, other):
        if not isinstance(other, RatAZ):
            return NotImplemented
        return (self - other).is_zero

    def __mul__(self, other):
        if isinstance(other, RatAZ):
            return RatAZ(self.num * other.num, self.den + other.den)
        return RatAZ(self.num * other, self.den)

    __rmul__ = __mul__

    def __neg__(self):
        return RatAZ(-self.num, self.den)

    def __sub__(self, other):
        return self + (-other)

    def __add__(self, other):
        if not isinstance(other, RatAZ):
            return NotImplemented
        from collections import Counter
        mine = Counter(_den_key(d, b) for d, b in self.den)
        theirs = Counter(_den_key(d, b) for d, b in other.den)
        lookup = {_den_key(d, b): (d, b) for d, b in self.den + other.den}
        union = mine | theirs
        left = self.num
        for key, count in (union - mine).items():
            d, b = lookup[key]
            f = _linear(self.algebra, d, b)
            for _ in range(count):
                left = left * f
        right = other.num
        for key, count in (union - theirs).items():
            d, b = lookup[key]
            f = _linear(self.algebra, d, b)
            for _ in range(count):
                right = right * f
        den = tuple(lookup[key] for key, count in union.items()
                    for _ in range(count))
        return RatAZ(left + right, den)

    def expand(self, zmin: int) -> AlgebraZ:
        """z-adic expansion (around z = ∞) keeping layers with exponent >= zmin."""
        alg = self.algebra
        out = self.num
        for d, b in self.den:
            if b == 0:
                raise IFunctionError("cannot expand a z-free denominator factor")
            if out.is_zero:
                break
            top = max(out.support())
            depth = top - zmin  # 1/(D+bz) contributes z^{-1} ... z^{-depth}
            inv = {}
            power = alg.one()
            sign = 1
            for k in range(depth):
                inv[-(k + 1)] = power * LambdaRat(
                    Fraction(sign, 1) / (b ** (k + 1)))
                power = power * d
                sign = -sign
                if power.is_zero:
                    break
            out = out * AlgebraZ(alg, inv)
            out = AlgebraZ(alg, {e: v for e, v in out.layers.items()
                                 if e >= zmin})
        return out

    def nonequivariant_limit(self) -> "RatAZ":
        return RatAZ(self.num.nonequivariant_limit(),
                     tuple((d.nonequivariant_limit(), b) for d, b in self.den))

    def __repr__(self):
        return f"RatAZ({self.num!r}, den={len(self.den)} factors)"


def _frac_part(v: Fraction) -> Fraction:
    return v - (v.numerator // v.denominator)


def gamma_ratio(d: Element, v: Fraction) -> RatAZ:
    """One row's contribution at shifted index v.

    v <= 0: product of (D + b z) over b in (v, 0] with frac(b) = frac(v).
    v > 0:  inverse of the product over b in (0, v] with the same fractional
    part, expanded to a finite Laurent polynomial when D is nilpotent and
    λ-free, kept as denominator factors otherwise.
    """
    alg = d.algebra
    one = RatAZ(AlgebraZ(alg, {0: alg.one()}))
    if v == 0:
        return one
    f = _frac_part(v)
    if v < 0:
        b = f - 1 if f > 0 else Fraction(0)
        num = one.num
        while b > v:
            num = num * _linear(alg, d, b)
            b -= 1
        return RatAZ(num)
    # v > 0
    bs = []
    b = f if f > 0 else Fraction(1)
    while b <= v:
        bs.append(b)
        b += 1
    lam_free = d.coeffs[alg.unit].is_zero
    order = _nilpotency_order(d) if lam_free else None
    if order is None:
        return RatAZ(one.num, tuple((d, b) for b in bs))
    out = one.num
    for b in bs:
        inv = {}
        power = alg.one()
        sign = 1
        for k in range(order):
            inv[-(k + 1)] = power * LambdaRat(Fraction(sign, 1) / (b ** (k + 1)))
            power = power * d
            sign = -sign
            if power.is_zero:
                break
        out = out * AlgebraZ(alg, inv)
    return RatAZ(out)


def gamma_ratio_defining_product(d: Element, v: Fraction) -> AlgebraZ:
    """For v > 0, the product that gamma_ratio inverts (test oracle hook)."""
    if v <= 0:
        raise IFunctionError("defining product only applies to v > 0")
    alg = d.algebra
    f = _frac_part(v)
    out = AlgebraZ(alg, {0: alg.one()})
    b = f if f > 0 else Fraction(1)
    while b <= v:
        out = out * _linear(alg, d, b)
        b += 1
    return out


def modification_factor(geom: Geometry, index: tuple[int, ...]) -> RatAZ:
    """Product of the gamma ratios of the λ-carrying (fiber) rows.

    Meaningful for geometries presented by a bundle or quotient-point
    structure, where these rows are exactly the fiber directions.
    """
    alg = geom.algebra
    out = RatAZ(AlgebraZ(alg, {0: alg.one()}))
    for j, row in enumerate(geom.rows):
        if row.weight != 0:
            out = out * gamma_ratio(geom.row_element(j),
                                    geom.shifted_index(j, index))
    return out


class IFunction:
    """Truncated series: coefficients per index, prefactors symbolic."""

    def __init__(self, geometry: Geometry, bound: int,
                 coeffs: dict[tuple[int, ...], RatAZ]):
        self.geometry = geometry
        self.bound = bound
        self.coeffs = coeffs
        self.leading_z = 1  # overall factor z, recorded explicitly

    def indices(self) -> list[tuple[int, ...]]:
        return enumerate_degrees(self.geometry.lattice(self.bound))

    def coefficient(self, index: tuple[int, ...]) -> RatAZ:
        return self.coeffs[tuple(index)]

    def algebra_coefficient(self, index: tuple[int, ...]) -> AlgebraZ:
        return self.coeffs[tuple(index)].as_algebra_z()

    def expanded(self, index: tuple[int, ...], zmin: int) -> AlgebraZ:
        return self.coeffs[tuple(index)].expand(zmin)

    @property
    def scalar_exponents(self) -> tuple[Fraction, ...]:
        return tuple(v.scalar_exponent for v in self.geometry.variables)

    def prefactor_classes(self) -> tuple[Element | None, ...]:
        return tuple(self.geometry.prefactor_element(i)
                     for i in range(len(self.geometry.variables)))


def build_ifunction(geom: Geometry, bound: int) -> IFunction:
    if bound < 0:
        raise IFunctionError("bound must be nonnegative")
    alg = geom.algebra
    coeffs: dict[tuple[int, ...], RatAZ] = {}
    for n in enumerate_degrees(geom.lattice(bound)):
        c = RatAZ(AlgebraZ(alg, {0: alg.one()}))
        for j in range(len(geom.rows)):
            c = c * gamma_ratio(geom.row_element(j), geom.shifted_index(j, n))
        label = geom.sector_label_index(n)
        if label != alg.unit:
            c = c * alg.basis(label)
        coeffs[n] = c
    out = IFunction(geom, bound, coeffs)
    zero = tuple(0 for _ in geom.variables)
    if out.coeffs[zero].expand(0) != AlgebraZ(alg, {0: alg.one()}):
        raise IFunctionError(f"{geom.name}: zero-index coefficient is not the unit")
    return out


def expand_prefactor(ifn: IFunction, log_order: int
                     ) -> dict[tuple[tuple[int, ...], tuple[int, ...]], RatAZ]:
    """Coefficients of x^n (log x)^c after expanding the divisor prefactors.

    exp(Σ_i P_i log x_i / z) is expanded through total log order log_order;
    classes that square to zero terminate earlier on their own.  The scalar
    x^(-aλ/z) prefactors stay symbolic.
    """
    geom = ifn.geometry
    alg = geom.algebra
    nvar = len(geom.variables)
    prefs = ifn.prefactor_classes()
    powers: list[list[Element]] = []
    for i in range(nvar):
        col = [alg.one()]
        if prefs[i] is not None:
            while len(col) <= log_order:
                nxt = col[-1] * prefs[i]
                if nxt.is_zero:
                    break
                col.append(nxt)
        powers.append(col)

    out: dict[tuple[tuple[int, ...], tuple[int, ...]], RatAZ] = {}

    def rec(i: int, c: list[int], acc: Element, budget: int):
        if i == nvar:
            scale = 1
            for ci in c:
                scale *= factorial(ci)
            term = acc * Fraction(1, scale)
            shift = -sum(c)
            for n, coeff in ifn.coeffs.items():
                val = coeff * AlgebraZ(alg, {shift: term})
                if val.is_zero:
                    continue
                key = (n, tuple(c))
                out[key] = out[key] + val if key in out else val
            return
        for ci in range(min(budget, len(powers[i]) - 1) + 1):
            rec(i + 1, c + [ci], acc * powers[i][ci], budget - ci)

    rec(0, [], alg.one(), log_order)
    return out
