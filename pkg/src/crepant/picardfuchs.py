"""Differential operators annihilating the hypergeometric series.

An operator is a sum of terms (curve monomial, product of linear forms in
the logarithmic derivations D_i, λ, z).  Acting on a prefactor-normalized
series, D_i multiplies the degree-n term by (P_i - a_i λ + z e_i(n)) where
P_i is the divisor prefactor class, a_i the scalar exponent and e_i(n) the
actual exponent of the i-th variable.  Residuals are exact; no tolerance.

Negative curve monomials are cleared in the recorded data, so every stored
term shifts the index lattice by a non-negative vector.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .algebra import AlgebraZ, Element
from .geometry import Geometry, builtin, enumerate_degrees
from .ifunction import IFunction, RatAZ, build_ifunction
from .lambda_rat import LambdaRat


class PFError(ValueError):
    pass


@dataclass(frozen=True)
class LinForm:
    """Σ_i d[i]·D_i + lam·λ + zc·z."""

    d: tuple[Fraction, ...]
    lam: Fraction = Fraction(0)
    zc: Fraction = Fraction(0)


@dataclass(frozen=True)
class PFTerm:
    shift: tuple[int, ...]          # lattice units, non-negative
    constant: Fraction
    factors: tuple[LinForm, ...]


@dataclass(frozen=True)
class PFOperator:
    label: str
    nvars: int
    terms: tuple[PFTerm, ...]

    def __post_init__(self):
        for t in self.terms:
            if len(t.shift) != self.nvars:
                raise PFError(f"{self.label}: term shift arity mismatch")
            if any(s < 0 for s in t.shift):
                raise PFError(f"{self.label}: negative shift {t.shift}")
            for f in t.factors:
                if len(f.d) != self.nvars:
                    raise PFError(f"{self.label}: linear form arity mismatch")


def _lf(d, lam=0, zc=0) -> LinForm:
    if not isinstance(d, tuple):
        d = (d,)
    return LinForm(tuple(Fraction(x) for x in d), Fraction(lam), Fraction(zc))


def _term(shift, constant, factors) -> PFTerm:
    if not isinstance(shift, tuple):
        shift = (shift,)
    return PFTerm(shift, Fraction(constant), tuple(factors))


def _conjugated_classes(geom: Geometry) -> list[Element]:
    """P_i - a_i λ per variable, as elements."""
    alg = geom.algebra
    lam_unit = alg.one() * LambdaRat.gen()
    out = []
    for i, var in enumerate(geom.variables):
        e = geom.prefactor_element(i)
        e = alg.zero() if e is None else e
        if var.scalar_exponent:
            e = e - lam_unit * LambdaRat(var.scalar_exponent)
        out.append(e)
    return out


def _factor_value(geom: Geometry, conj: list[Element], f: LinForm,
                  index: tuple[int, ...]) -> AlgebraZ:
    alg = geom.algebra
    elem = alg.zero()
    zscal = f.zc
    for i, c in enumerate(f.d):
        if c:
            elem = elem + conj[i] * LambdaRat(c)
            zscal += c * geom.variables[i].step * index[i]
    if f.lam:
        elem = elem + alg.one() * (LambdaRat.gen() * LambdaRat(f.lam))
    layers = {}
    if not elem.is_zero:
        layers[0] = elem
    if zscal:
        layers[1] = alg.one() * LambdaRat(zscal)
    return AlgebraZ(alg, layers)


def apply_operator(op: PFOperator, ifn: IFunction
                   ) -> tuple[dict[tuple[int, ...], RatAZ], list[tuple[int, ...]]]:
    """Evaluate op on the series, index by index.

    Returns (values, skipped): values maps each index where every term's
    source lies inside the truncated lattice to the exact result; indices
    needing unknown coefficients are listed in skipped.
    """
    geom = ifn.geometry
    if len(geom.variables) != op.nvars:
        raise PFError(f"{op.label}: operator arity {op.nvars} does not match "
                      f"geometry {geom.name}")
    alg = geom.algebra
    conj = _conjugated_classes(geom)
    values: dict[tuple[int, ...], RatAZ] = {}
    skipped: list[tuple[int, ...]] = []
    for n in enumerate_degrees(geom.lattice(ifn.bound)):
        total = RatAZ(AlgebraZ(alg))
        ok = True
        for t in op.terms:
            m = tuple(a - b for a, b in zip(n, t.shift))
            if any(x < 0 for x in m):
                continue  # series has no such term: contributes zero
            if m not in ifn.coeffs:
                ok = False
                break
            prod = AlgebraZ(alg, {0: alg.one() * LambdaRat(t.constant)})
            for f in t.factors:
                prod = prod * _factor_value(geom, conj, f, m)
            total = total + ifn.coeffs[m] * prod
        if ok:
            values[n] = total
        else:
            skipped.append(n)
    if not values:
        raise PFError(f"{op.label}: insufficient truncation "
                      f"(bound {ifn.bound} leaves no checkable index)")
    return values, skipped


@dataclass(frozen=True)
class PFReport:
    geometry: str
    bound: int
    checked: tuple[tuple[str, int], ...]  # (operator label, indices verified)


def verify_pf(geom: Geometry | str, bound: int = 8,
              ifn: IFunction | None = None) -> PFReport:
    if isinstance(geom, str):
        geom = builtin(geom)
    ops = pf_system(geom.name)
    if ifn is None:
        ifn = build_ifunction(geom, bound)
    results = []
    for op in ops:
        values, _ = apply_operator(op, ifn)
        engaged = 0
        for n, v in values.items():
            if not v.is_zero:
                num = v.num
                raise PFError(
                    f"{geom.name}: '{op.label}' residual nonzero at index {n}; "
                    f"numerator layers {sorted(num.layers)}")
            if all(a >= b for a, b in zip(n, _max_shift(op))):
                engaged += 1
        if engaged == 0:
            raise PFError(f"{geom.name}: '{op.label}' never engages all terms "
                          f"at bound {ifn.bound} (insufficient truncation)")
        results.append((op.label, len(values)))
    return PFReport(geom.name, ifn.bound, tuple(results))


def _max_shift(op: PFOperator) -> tuple[int, ...]:
    return tuple(max(t.shift[i] for t in op.terms) for i in range(op.nvars))


# Recorded systems, one per geometry that has a displayed equation.
# The operators act on the full series (prefactors included); terms were
# cleared of negative monomials by multiplying through by a monomial.

def _system_ex1y():
    D = _lf(1)
    L = lambda k: _lf(-3, lam=1, zc=-k)   # λ - 3D - kz
    return (PFOperator(
        "D^3 = y(λ-3D)(λ-3D-z)(λ-3D-2z)", 1,
        (_term(0, 1, [D, D, D]),
         _term(1, -1, [L(0), L(1), L(2)]))),)


def _system_ex1x():
    D = _lf(1)
    L = lambda k: _lf(1, lam=1, zc=-k)    # λ + D - kz
    return (PFOperator(
        "x^3 D^3 = -27(λ+D)(λ+D-z)(λ+D-2z)", 1,
        (_term(3, 1, [D, D, D]),
         _term(0, 27, [L(0), L(1), L(2)]))),)


def _system_ex2y():
    D1 = _lf((1, 0))
    D2 = _lf((0, 1))
    A = _lf((1, -3))                       # D1 - 3D2
    W = lambda k: _lf((-2, 1), lam=1, zc=-k)  # λ + D2 - 2D1 - kz
    B = lambda k: _lf((1, -3), zc=-k)      # D1 - 3D2 - kz
    return (
        PFOperator("D1(D1-3D2) = y1(λ+D2-2D1)(λ+D2-2D1-z)", 2,
                   (_term((0, 0), 1, [D1, A]),
                    _term((1, 0), -1, [W(0), W(1)]))),
        PFOperator("D2^2(λ+D2-2D1) = y2(D1-3D2)(D1-3D2-z)(D1-3D2-2z)", 2,
                   (_term((0, 0), 1, [D2, D2, W(0)]),
                    _term((0, 1), -1, [B(0), B(1), B(2)]))),
    )


def _system_ex2x(symbols=("x1", "x2")):
    D1 = lambda k: _lf((1, 0), zc=-k)
    D2 = lambda k: _lf((0, 1), zc=-k)
    E = _lf((Fraction(1, 3), Fraction(-1, 3)))          # (D1 - D2)/3
    V = lambda k: _lf((Fraction(-5, 3), Fraction(-1, 3)), lam=1, zc=-k)
    s1, s2 = symbols
    return (
        PFOperator(f"D2(D2-z)(D2-2z) = {s2}^3((D1-D2)/3)^2(λ-(5/3)D1-(1/3)D2)", 2,
                   (_term((0, 0), 1, [D2(0), D2(1), D2(2)]),
                    _term((0, 3), -1, [E, E, V(0)]))),
        PFOperator(f"D1 D2 = {s1}{s2}(λ-(5/3)D1-(1/3)D2)(λ-(5/3)D1-(1/3)D2-z)", 2,
                   (_term((0, 0), 1, [D1(0), D2(0)]),
                    _term((1, 1), -1, [V(0), V(1)]))),
        PFOperator(f"D1(D1-z)(D1-2z)((D1-D2)/3)^2 = {s1}^3 Π_k(λ-(5/3)D1-(1/3)D2-kz)", 2,
                   (_term((0, 0), 1, [D1(0), D1(1), D1(2), E, E]),
                    _term((3, 0), -1, [V(0), V(1), V(2), V(3), V(4)]))),
    )


def _system_ex4y():
    D = _lf(1)
    return (PFOperator(
        "D^3 = y(λ-D)(2λ-2D)(2λ-2D-z)", 1,
        (_term(0, 1, [D, D, D]),
         _term(1, -1, [_lf(-1, lam=1), _lf(-2, lam=2), _lf(-2, lam=2, zc=-1)]))),)


def _system_ex4x():
    # -x D^3 = (λ+D)(2λ+2D)(2λ+2D-z); x^1 shifts the half-step lattice by 2
    D = _lf(1)
    return (PFOperator(
        "x D^3 = -(λ+D)(2λ+2D)(2λ+2D-z)", 1,
        (_term(2, 1, [D, D, D]),
         _term(0, 1, [_lf(1, lam=1), _lf(2, lam=2), _lf(2, lam=2, zc=-1)]))),)


_SYSTEMS = {
    "ex1-Y": _system_ex1y,
    "ex1-X": _system_ex1x,
    "ex2-Y": _system_ex2y,
    "ex2-X": _system_ex2x,
    "ex3-Y": lambda: _system_ex2x(symbols=("y1", "y2")),
    "ex4-Y": _system_ex4y,
    "ex4-X": _system_ex4x,
}


def pf_system(name: str) -> tuple[PFOperator, ...]:
    try:
        maker = _SYSTEMS[name]
    except KeyError:
        raise PFError(f"no recorded differential system for '{name}'") from None
    return maker()


def recorded_systems() -> tuple[str, ...]:
    return tuple(sorted(_SYSTEMS))


# Chart transport: rewrite an operator under D_i = Σ_j A[i][j] D'_j and a
# monomial substitution shifting the lattice by an integer matrix B (new
# shift = B·old shift), then clear negative shifts.

def transform_chart(op: PFOperator, dmatrix, shift_matrix) -> PFOperator:
    nv = len(dmatrix[0])
    terms = []
    for t in op.terms:
        raw = [sum(Fraction(shift_matrix[i][j]) * t.shift[j]
                   for j in range(op.nvars))
               for i in range(len(shift_matrix))]
        if any(s.denominator != 1 for s in raw):
            raise PFError(f"{op.label}: chart takes shift {t.shift} off the "
                          f"integer lattice")
        new_shift = tuple(int(s) for s in raw)
        new_factors = tuple(
            LinForm(tuple(sum(Fraction(dmatrix[i][j]) * f.d[i]
                              for i in range(op.nvars)) for j in range(nv)),
                    f.lam, f.zc)
            for f in t.factors)
        terms.append(PFTerm(new_shift, t.constant, new_factors))
    mins = tuple(min(t.shift[i] for t in terms) for i in range(nv))
    terms = tuple(PFTerm(tuple(s - m for s, m in zip(t.shift, mins)),
                         t.constant, t.factors) for t in terms)
    return PFOperator(op.label + " (transported)", nv, terms)


def _expand_term(t: PFTerm) -> dict:
    """Expand constant·Πfactors into {(d-exponents, λ-power, z-power): c}."""
    nv = len(t.shift)
    poly = {((0,) * nv, 0, 0): t.constant}
    for f in t.factors:
        nxt = {}
        entries = [((tuple(1 if j == i else 0 for j in range(nv)), 0, 0), c)
                   for i, c in enumerate(f.d) if c]
        if f.lam:
            entries.append((((0,) * nv, 1, 0), f.lam))
        if f.zc:
            entries.append((((0,) * nv, 0, 1), f.zc))
        for key, c in poly.items():
            for (de, le, ze), fc in entries:
                k2 = (tuple(a + b for a, b in zip(key[0], de)),
                      key[1] + le, key[2] + ze)
                nxt[k2] = nxt.get(k2, Fraction(0)) + c * fc
        poly = {k: v for k, v in nxt.items() if v}
    return poly


def canonical_form(op: PFOperator) -> dict:
    out: dict = {}
    for t in op.terms:
        poly = _expand_term(t)
        slot = out.setdefault(t.shift, {})
        for k, v in poly.items():
            slot[k] = slot.get(k, Fraction(0)) + v
    return {s: {k: v for k, v in p.items() if v}
            for s, p in out.items() if any(p.values())}


def proportional(a: PFOperator, b: PFOperator) -> bool:
    """Same operator up to one overall rational scale."""
    ca, cb = canonical_form(a), canonical_form(b)
    if set(ca) != set(cb):
        return False
    scale = None
    for s in ca:
        if set(ca[s]) != set(cb[s]):
            return False
        for k in ca[s]:
            r = ca[s][k] / cb[s][k]
            if scale is None:
                scale = r
            elif r != scale:
                return False
    return scale is not None
