"""Exact commutative polynomial engine over the rationals.

Backs the constant-coefficient pdo subalgebra: Buchberger's algorithm,
normal forms, row syzygies of polynomial matrices (Schreyer-style, with
tagged reductions), exactness certificates, and the symbol map sending the
derivative d_j to the frequency variable xi_j (the factor i is dropped,
matching how the worked constant-coefficient computations are carried out;
only kernels and images matter, so the convention is harmless).

All coefficients are Fractions; no floating point enters this module.
Degree and pair budgets keep desk-scale computations from running away.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

from .algebra import BND, INT, BvOp, OpExpr, OpMatrix, Word
from .errors import BudgetExceeded, OutsideSubalgebra, ShapeMismatch
from .orders import GeneratorSet

Expvec = tuple[int, ...]

DEFAULT_DEGREE_CAP = 8
DEFAULT_PAIR_CAP = 10_000


@dataclass(frozen=True, slots=True)
class MonomialOrder:
    """A term order on monomials in a fixed variable list."""

    tag: str  # "degrevlex" or "lex"
    variables: tuple[str, ...]

    def __post_init__(self):
        if self.tag not in ("degrevlex", "lex"):
            raise ValueError(f"unknown monomial order {self.tag!r}")

    def key(self, e: Expvec):
        """Sort key: larger key = larger monomial."""
        if self.tag == "lex":
            return e
        return (sum(e), tuple(-x for x in reversed(e)))


def degrevlex(variables: Sequence[str]) -> MonomialOrder:
    return MonomialOrder("degrevlex", tuple(variables))


def lex(variables: Sequence[str]) -> MonomialOrder:
    return MonomialOrder("lex", tuple(variables))


class Poly:
    """A multivariate polynomial with exact rational coefficients."""

    __slots__ = ("variables", "terms")

    def __init__(self, variables: Sequence[str], terms: dict[Expvec, Fraction | int]):
        self.variables = tuple(variables)
        n = len(self.variables)
        clean: dict[Expvec, Fraction] = {}
        for e, c in terms.items():
            e = tuple(e)
            if len(e) != n or any(x < 0 for x in e):
                raise ValueError(f"bad exponent vector {e} for {n} variables")
            c = Fraction(c)
            if c != 0:
                clean[e] = c
        self.terms = clean

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(variables: Sequence[str]) -> "Poly":
        return Poly(variables, {})

    @staticmethod
    def constant(variables: Sequence[str], c: Fraction | int) -> "Poly":
        return Poly(variables, {tuple(0 for _ in variables): Fraction(c)})

    @staticmethod
    def variable(variables: Sequence[str], name: str) -> "Poly":
        variables = tuple(variables)
        e = [0] * len(variables)
        e[variables.index(name)] = 1
        return Poly(variables, {tuple(e): Fraction(1)})

    # -- algebra -----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def __add__(self, other: "Poly") -> "Poly":
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, Fraction(0)) + c
        return Poly(self.variables, terms)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __neg__(self) -> "Poly":
        return self.scale(-1)

    def scale(self, c: Fraction | int) -> "Poly":
        c = Fraction(c)
        return Poly(self.variables, {e: c * v for e, v in self.terms.items()})

    def __mul__(self, other: "Poly") -> "Poly":
        terms: dict[Expvec, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = terms.get(e, Fraction(0)) + c1 * c2
        return Poly(self.variables, terms)

    def mul_term(self, e: Expvec, c: Fraction) -> "Poly":
        return Poly(
            self.variables,
            {tuple(a + b for a, b in zip(e, ee)): c * cc for ee, cc in self.terms.items()},
        )

    def lead(self, order: MonomialOrder) -> tuple[Expvec, Fraction]:
        e = max(self.terms, key=order.key)
        return e, self.terms[e]

    def monic(self, order: MonomialOrder) -> "Poly":
        if self.is_zero():
            return self
        _, c = self.lead(order)
        return self.scale(1 / c)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            return NotImplemented
        return self.variables == other.variables and self.terms == other.terms

    def __hash__(self):
        return hash((self.variables, frozenset(self.terms.items())))

    def __str__(self) -> str:
        if not self.terms:
            return "0"

        def mono(e):
            parts = []
            for v, p in zip(self.variables, e):
                if p == 1:
                    parts.append(v)
                elif p > 1:
                    parts.append(f"{v}^{p}")
            return "*".join(parts)

        out = []
        for e in sorted(self.terms, key=lambda e: (-sum(e), e)):
            c, m = self.terms[e], mono(e)
            if not m:
                out.append(str(c))
            elif c == 1:
                out.append(m)
            elif c == -1:
                out.append(f"-{m}")
            else:
                out.append(f"{c}*{m}")
        s = out[0]
        for p in out[1:]:
            s += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return s

    __repr__ = __str__


class PolyMatrix:
    """A dense matrix of polynomials over a shared variable list."""

    __slots__ = ("rows", "cols", "variables", "entries")

    def __init__(self, entries: list[list[Poly]]):
        self.rows = len(entries)
        self.cols = len(entries[0]) if entries else 0
        for row in entries:
            if len(row) != self.cols:
                raise ShapeMismatch("ragged polynomial matrix")
        self.variables = entries[0][0].variables if entries and entries[0] else ()
        self.entries = [list(r) for r in entries]

    def row(self, i: int) -> list[Poly]:
        return list(self.entries[i])

    def is_zero(self) -> bool:
        return all(p.is_zero() for r in self.entries for p in r)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        return self.entries == other.entries

    def __str__(self) -> str:
        return "[" + " ; ".join(", ".join(str(p) for p in r) for r in self.entries) + "]"

    __repr__ = __str__


def polymat_mul(a: PolyMatrix, b: PolyMatrix) -> PolyMatrix:
    if a.cols != b.rows:
        raise ShapeMismatch(f"cannot multiply {a.rows}x{a.cols} by {b.rows}x{b.cols}")
    variables = a.variables or b.variables
    out = []
    for i in range(a.rows):
        row = []
        for j in range(b.cols):
            acc = Poly.zero(variables)
            for k in range(a.cols):
                acc = acc + a.entries[i][k] * b.entries[k][j]
            row.append(acc)
        out.append(row)
    return PolyMatrix(out)


# ---------------------------------------------------------------------------
# Module arithmetic (positions over terms)
#
# A module element of Poly^c is a dict (position, expvec) -> Fraction.  The
# position-over-term order ranks any term in a lower-numbered position above
# all terms in higher-numbered positions.

ModElem = dict[tuple[int, Expvec], Fraction]


def _mod_lead(f: ModElem, order: MonomialOrder):
    return max(f, key=lambda pe: (-pe[0], order.key(pe[1])))


def _mod_sub_scaled(f: ModElem, g: ModElem, e: Expvec, c: Fraction) -> ModElem:
    """f - c * x^e * g."""
    out = dict(f)
    for (pos, ee), cc in g.items():
        key = (pos, tuple(a + b for a, b in zip(e, ee)))
        out[key] = out.get(key, Fraction(0)) - c * cc
        if out[key] == 0:
            del out[key]
    return out


def _divides(a: Expvec, b: Expvec) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _mod_reduce(f: ModElem, basis: list[ModElem], order: MonomialOrder,
                budget: "_Budget") -> tuple[ModElem, list[tuple[int, Expvec, Fraction]]]:
    """Full normal form of f against basis; returns (remainder, quotient ops).

    Quotient ops record (basis index, monomial, coefficient) of every
    subtraction, so callers can track tags.
    """
    leads = [(_mod_lead(g, order), g) for g in basis]
    rem: ModElem = {}
    work = dict(f)
    ops: list[tuple[int, Expvec, Fraction]] = []
    while work:
        budget.step()
        (pos, e) = _mod_lead(work, order)
        c = work[(pos, e)]
        hit = None
        for idx, ((lpos, le), g) in enumerate(leads):
            if lpos == pos and _divides(le, e):
                hit = (idx, le, g)
                break
        if hit is None:
            rem[(pos, e)] = rem.get((pos, e), Fraction(0)) + c
            del work[(pos, e)]
            continue
        idx, le, g = hit
        q_e = tuple(a - b for a, b in zip(e, le))
        q_c = c / g[(pos, le)]
        work = _mod_sub_scaled(work, g, q_e, q_c)
        ops.append((idx, q_e, q_c))
    return rem, ops


class _Budget:
    def __init__(self, degree_cap: int, pair_cap: int):
        self.degree_cap = degree_cap
        self.pair_cap = pair_cap
        self.steps = 0

    def step(self):
        self.steps += 1
        if self.steps > 200_000:
            raise BudgetExceeded("polynomial reduction step budget exhausted")

    def check_degree(self, f: ModElem):
        for (_, e) in f:
            if sum(e) > self.degree_cap:
                raise BudgetExceeded(
                    f"intermediate degree exceeds cap {self.degree_cap}"
                )


def _module_groebner(rows: list[ModElem], order: MonomialOrder, budget: _Budget,
                     collect_tags: bool = False, ncols: int = 0):
    """Buchberger for submodules of Poly^c, optionally tracking tags.

    With ``collect_tags`` the elements live in Poly^(c+r): positions >= ncols
    are tag slots tracking the expression of each basis element in the input
    rows, and every S-pair whose genuine part reduces to zero contributes its
    tag as a syzygy (Schreyer generators, translated to the input rows).

    Returns (basis, syzygy tags).
    """

    def genuine(f: ModElem) -> ModElem:
        if not collect_tags:
            return f
        return {pe: c for pe, c in f.items() if pe[0] < ncols}

    def tag(f: ModElem) -> ModElem:
        return {pe: c for pe, c in f.items() if pe[0] >= ncols}

    basis: list[ModElem] = []
    syz: list[ModElem] = []
    for f in rows:
        if genuine(f):
            basis.append(f)
        elif collect_tags and tag(f):
            syz.append(tag(f))

    def reduce_full(f: ModElem) -> ModElem:
        """Reduce the genuine part of f against basis, carrying tags along."""
        work = dict(f)
        rem: ModElem = {}
        while True:
            g_part = genuine(work)
            if not g_part:
                break
            budget.step()
            pos, e = _mod_lead(g_part, order)
            c = work[(pos, e)]
            hit = None
            for g in basis:
                lpos, le = _mod_lead(genuine(g), order)
                if lpos == pos and _divides(le, e):
                    hit = (g, le, genuine(g)[(lpos, le)])
                    break
            if hit is None:
                rem[(pos, e)] = c
                del work[(pos, e)]
                continue
            g, le, lc = hit
            work = _mod_sub_scaled(work, g, tuple(a - b for a, b in zip(e, le)), c / lc)
        # remainder keeps its tag part
        for pe, c in work.items():
            rem[pe] = rem.get(pe, Fraction(0)) + c
        return rem

    pairs = list(itertools.combinations(range(len(basis)), 2))
    processed = 0
    while pairs:
        i, j = pairs.pop(0)
        processed += 1
        if processed > budget.pair_cap:
            raise BudgetExceeded(f"pair budget {budget.pair_cap} exhausted")
        gi, gj = basis[i], basis[j]
        (pi, ei) = _mod_lead(genuine(gi), order)
        (pj, ej) = _mod_lead(genuine(gj), order)
        if pi != pj:
            continue
        lcm = tuple(max(a, b) for a, b in zip(ei, ej))
        ci = genuine(gi)[(pi, ei)]
        cj = genuine(gj)[(pj, ej)]
        spair = _mod_sub_scaled(
            _mod_sub_scaled({}, gi, tuple(a - b for a, b in zip(lcm, ei)), Fraction(-1) / ci),
            gj,
            tuple(a - b for a, b in zip(lcm, ej)),
            Fraction(1) / cj,
        )
        red = reduce_full(spair)
        g_red = genuine(red)
        if not g_red:
            t = tag(red)
            if collect_tags and t:
                syz.append(t)
            continue
        budget.check_degree(g_red)
        new_idx = len(basis)
        basis.append(red)
        pairs.extend((k, new_idx) for k in range(new_idx))
    return basis, syz


# ---------------------------------------------------------------------------
# Public ideal-level operations


def _poly_to_mod(p: Poly, pos: int = 0) -> ModElem:
    return {(pos, e): c for e, c in p.terms.items()}


def _mod_to_polyrow(f: ModElem, variables: Sequence[str], width: int) -> list[Poly]:
    cols = [dict() for _ in range(width)]
    for (pos, e), c in f.items():
        cols[pos][e] = c
    return [Poly(variables, terms) for terms in cols]


def buchberger(gens: list[Poly], order: MonomialOrder,
               degree_cap: int = DEFAULT_DEGREE_CAP,
               pair_cap: int = DEFAULT_PAIR_CAP) -> list[Poly]:
    """Reduced Groebner basis of the ideal generated by ``gens``."""
    gens = [g for g in gens if not g.is_zero()]
    if not gens:
        return []
    variables = gens[0].variables
    budget = _Budget(degree_cap, pair_cap)
    basis, _ = _module_groebner([_poly_to_mod(g) for g in gens], order, budget)
    polys = [_mod_to_polyrow(f, variables, 1)[0] for f in basis]

    # interreduce: drop redundant leads (ascending order puts dividers first),
    # then tail-reduce each survivor against the others and normalize
    polys.sort(key=lambda p: order.key(p.lead(order)[0]))
    minimal: list[Poly] = []
    for p in polys:
        le = p.lead(order)[0]
        if any(_divides(q.lead(order)[0], le) for q in minimal):
            continue
        minimal.append(p)
    reduced = []
    for i, p in enumerate(minimal):
        others = minimal[:i] + minimal[i + 1:]
        r = reduce(p, others, order) if others else p
        if not r.is_zero():
            reduced.append(r.monic(order))
    reduced.sort(key=lambda p: order.key(p.lead(order)[0]))
    return reduced


def reduce(p: Poly, gb: list[Poly], order: MonomialOrder) -> Poly:
    """Normal form of p modulo gb; zero iff p lies in the ideal."""
    gb = [g for g in gb if not g.is_zero()]
    if p.is_zero() or not gb:
        return p
    budget = _Budget(10**9, 10**9)
    rem, _ = _mod_reduce(_poly_to_mod(p), [_poly_to_mod(g) for g in gb], order, budget)
    return _mod_to_polyrow(rem, p.variables, 1)[0]


# ---------------------------------------------------------------------------
# Syzygies and exactness


def _row_to_mod(row: list[Poly]) -> ModElem:
    out: ModElem = {}
    for pos, p in enumerate(row):
        for e, c in p.terms.items():
            out[(pos, e)] = c
    return out


def _content_normalize(row: list[Poly]) -> list[Poly]:
    """Clear denominators, divide by integer content, make first coeff > 0."""
    nums, dens = [], []
    for p in row:
        for c in p.terms.values():
            nums.append(abs(c.numerator))
            dens.append(c.denominator)
    if not nums:
        return row
    den_lcm = 1
    for d in dens:
        den_lcm = den_lcm * d // gcd(den_lcm, d)
    num_gcd = 0
    for n in nums:
        num_gcd = gcd(num_gcd, n)
    factor = Fraction(den_lcm, num_gcd if num_gcd else 1)
    row = [p.scale(factor) for p in row]
    for p in row:
        if p.terms:
            lead_c = p.terms[min(p.terms)]
            if lead_c < 0:
                row = [q.scale(-1) for q in row]
            break
    return row


def syzygies(m: PolyMatrix, order: MonomialOrder | None = None,
             degree_cap: int = DEFAULT_DEGREE_CAP,
             pair_cap: int = DEFAULT_PAIR_CAP) -> PolyMatrix:
    """Generators of the row syzygies {v : v * m = 0}, one per output row.

    Uses tagged Buchberger reductions: each S-pair of the row module that
    reduces to zero yields its tag as a Schreyer generator, and rows of
    I - V U (V the division of the inputs by the computed basis, U the tags)
    cover the non-basis part.  Every returned row annihilates m exactly;
    together they generate the full syzygy module.
    """
    variables = m.variables
    if order is None:
        order = degrevlex(variables)
    r, c = m.rows, m.cols
    budget = _Budget(degree_cap, pair_cap)

    augmented = []
    for i in range(r):
        f = _row_to_mod(m.row(i))
        f[(c + i, tuple(0 for _ in variables))] = Fraction(1)
        augmented.append(f)

    basis, syz_tags = _module_groebner(
        augmented, order, budget, collect_tags=True, ncols=c
    )

    # rows of I - V U, where each input row is re-expressed in the basis
    genuine_basis = [
        {pe: cc for pe, cc in g.items() if pe[0] < c} for g in basis
    ]
    tags = [
        {(pe[0] - c, pe[1]): cc for pe, cc in g.items() if pe[0] >= c} for g in basis
    ]
    extra: list[ModElem] = []
    for i in range(r):
        f = _row_to_mod(m.row(i))
        rem, ops = _mod_reduce(f, genuine_basis, order, budget) if f else ({}, [])
        if rem:
            raise AssertionError("input row failed to reduce against its own basis")
        vu: ModElem = {}
        for idx, e, q in ops:
            for (pos, ee), cc in tags[idx].items():
                key = (pos, tuple(a + b for a, b in zip(e, ee)))
                vu[key] = vu.get(key, Fraction(0)) + q * cc
                if vu[key] == 0:
                    del vu[key]
        unit = (i, tuple(0 for _ in variables))
        vu[unit] = vu.get(unit, Fraction(0)) - 1
        if vu:
            extra.append({pe: -cc for pe, cc in vu.items()})

    raw = [
        {(pe[0] - c, pe[1]): cc for pe, cc in t.items()} for t in syz_tags
    ] + extra

    rows = [
        _content_normalize(_mod_to_polyrow(t, variables, r)) for t in raw if t
    ]
    rows = _minimize_rows(rows, order, budget)

    # certification: every generator annihilates m
    for v in rows:
        for j in range(c):
            acc = Poly.zero(variables)
            for i in range(r):
                acc = acc + v[i] * m.entries[i][j]
            if not acc.is_zero():
                raise AssertionError("computed syzygy fails to annihilate the matrix")
    return PolyMatrix(rows) if rows else PolyMatrix([[Poly.zero(variables)] * r])[0:0] or _empty_matrix(variables, r)


def _empty_matrix(variables, width: int) -> PolyMatrix:
    m = PolyMatrix.__new__(PolyMatrix)
    m.rows = 0
    m.cols = width
    m.variables = tuple(variables)
    m.entries = []
    return m


def _minimize_rows(rows: list[list[Poly]], order: MonomialOrder,
                   budget: _Budget) -> list[list[Poly]]:
    """Drop rows lying in the module generated by the remaining rows."""
    rows = [r for r in rows if any(not p.is_zero() for p in r)]
    changed = True
    while changed:
        changed = False
        for i in range(len(rows)):
            others = rows[:i] + rows[i + 1:]
            if not others:
                continue
            if in_row_module(rows[i], others, order, budget):
                del rows[i]
                changed = True
                break
    return rows


def in_row_module(row: list[Poly], gens_rows: list[list[Poly]],
                  order: MonomialOrder, budget: _Budget | None = None) -> bool:
    """Groebner membership of a row vector in the module its peers generate."""
    if all(p.is_zero() for p in row):
        return True
    if not gens_rows:
        return False
    if budget is None:
        budget = _Budget(DEFAULT_DEGREE_CAP * 4, DEFAULT_PAIR_CAP)
    basis, _ = _module_groebner(
        [_row_to_mod(g) for g in gens_rows if any(not p.is_zero() for p in g)],
        order, budget,
    )
    if not basis:
        return False
    rem, _ = _mod_reduce(_row_to_mod(row), basis, order, budget)
    return not rem


def exactness_check(L: PolyMatrix, S: PolyMatrix,
                    order: MonomialOrder | None = None) -> bool:
    """Image of *L equals kernel of *S, certified by Groebner membership.

    The maps are v -> v L on rows; the check computes generators of
    ker(. S) = syzygies of the rows of S and compares with the row module of
    L in both directions.  Returns False when L S != 0 (not even a complex).
    """
    if order is None:
        order = degrevlex(L.variables)
    if not polymat_mul(L, S).is_zero():
        return False
    Z = syzygies(S, order)
    L_rows = [L.row(i) for i in range(L.rows)]
    Z_rows = [Z.row(i) for i in range(Z.rows)]
    for z in Z_rows:
        if not in_row_module(z, L_rows, order):
            return False
    for l in L_rows:
        if not in_row_module(l, Z_rows, order):
            return False
    return True


# ---------------------------------------------------------------------------
# Symbol map between the operator algebra and polynomials


def _expr_to_poly(e: OpExpr, gens: GeneratorSet, variables: tuple[str, ...]) -> Poly:
    terms: dict[Expvec, Fraction] = {}
    for w, c in e.terms.items():
        exp = [0] * len(variables)
        for name in w.factors:
            decl = gens[name]
            if decl.symbol_var is None:
                raise OutsideSubalgebra(
                    f"generator {name!r} has no declared symbol variable"
                )
            exp[variables.index(decl.symbol_var)] += 1
        key = tuple(exp)
        terms[key] = terms.get(key, Fraction(0)) + c
    return Poly(variables, terms)


def symbol_map(m: OpMatrix, gens: GeneratorSet) -> PolyMatrix:
    """Send d_j to xi_j entrywise; only interior blocks may be populated."""
    variables = tuple(gens.symbol_variables())
    if not variables:
        raise OutsideSubalgebra("no symbol variables declared")
    out = []
    for i in range(m.rows):
        row = []
        for j in range(m.cols):
            b = m.entries[i][j]
            if not (b.a12.is_zero() and b.a21.is_zero() and b.a22.is_zero()):
                raise OutsideSubalgebra(
                    f"entry ({i},{j}) has boundary blocks; the polynomial "
                    "subalgebra covers interior constant-coefficient pdos only"
                )
            row.append(_expr_to_poly(b.a11, gens, variables))
        out.append(row)
    return PolyMatrix(out)


def op_map(p: PolyMatrix, gens: GeneratorSet) -> OpMatrix:
    """Inverse of symbol_map on its image; monomials become sorted words."""
    variables = tuple(gens.symbol_variables())
    out = []
    for i in range(p.rows):
        row = []
        for j in range(p.cols):
            poly = p.entries[i][j]
            terms: dict[Word, Fraction] = {}
            for e, c in poly.terms.items():
                names: list[str] = []
                for var, power in zip(variables, e):
                    names.extend([gens.generator_for_variable(var).name] * power)
                w = Word(tuple(names), INT, INT)
                terms[w] = terms.get(w, Fraction(0)) + c
            expr = OpExpr(terms, INT, INT)
            row.append(BvOp.block(gens, a11=expr))
        out.append(row)
    return OpMatrix(out)
