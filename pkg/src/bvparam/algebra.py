"""Noncommutative operator algebra: words, rewrite normal forms, block matrices.

Elements are finite rational linear combinations of composition words over
declared generators.  A word lists factors outermost-to-innermost, so
``Word(("A", "B"))`` denotes A o B.  The empty word is the identity of its
signature (interior or boundary).  Equality of expressions is decided by
normalizing with a user-supplied rewrite system encoding operator identities
such as r'K = I'.

Everything here is immutable; a shared RewriteSystem is read-only, so all
operations are reentrant and safe to use from multiple threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import BudgetExceeded, KindMismatch, NotAdjointable, ShapeMismatch
from .orders import (
    GeneratorSet,
    OpKind,
    OrderData,
    adjoint_order,
    compose_order,
    merge_order,
)

INT = "int"
BND = "bnd"

Scalar = Fraction | int


@dataclass(frozen=True, slots=True)
class Word:
    """A composition chain of generator names with a fixed kind signature.

    ``factors`` runs left-to-right = outermost-to-innermost.  ``dom``/``cod``
    are "int" or "bnd"; for nonempty words they are implied by the factors and
    the constructor only records them, for the empty word they select which
    identity (I or I') is meant.
    """

    factors: tuple[str, ...]
    dom: str
    cod: str

    @staticmethod
    def identity(space: str) -> "Word":
        return Word((), space, space)

    def is_identity(self) -> bool:
        return not self.factors

    def concat(self, other: "Word") -> "Word":
        if self.dom != other.cod:
            raise KindMismatch(
                f"cannot compose {self} (domain {self.dom}) with {other} "
                f"(codomain {other.cod})"
            )
        return Word(self.factors + other.factors, other.dom, self.cod)

    def __str__(self) -> str:
        if not self.factors:
            return "I" if self.dom == INT else "Ib"
        return ".".join(self.factors)


def _word_of(gens: GeneratorSet, name: str) -> Word:
    dom, cod = gens[name].signature
    return Word((name,), dom, cod)


class OpExpr:
    """A rational linear combination of words sharing one kind signature."""

    __slots__ = ("terms", "dom", "cod")

    def __init__(self, terms: Mapping[Word, Scalar], dom: str, cod: str):
        clean: dict[Word, Fraction] = {}
        for w, c in terms.items():
            if w.dom != dom or w.cod != cod:
                raise KindMismatch(
                    f"word {w} has signature ({w.dom}->{w.cod}), "
                    f"expression wants ({dom}->{cod})"
                )
            c = Fraction(c)
            if c != 0:
                clean[w] = c
        self.terms = clean
        self.dom = dom
        self.cod = cod

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(dom: str, cod: str) -> "OpExpr":
        return OpExpr({}, dom, cod)

    @staticmethod
    def identity(space: str) -> "OpExpr":
        return OpExpr({Word.identity(space): Fraction(1)}, space, space)

    @staticmethod
    def generator(gens: GeneratorSet, name: str, coeff: Scalar = 1) -> "OpExpr":
        w = _word_of(gens, name)
        return OpExpr({w: Fraction(coeff)}, w.dom, w.cod)

    @staticmethod
    def word(gens: GeneratorSet, names: Iterable[str], coeff: Scalar = 1) -> "OpExpr":
        names = list(names)
        if not names:
            raise ValueError("use OpExpr.identity for the empty word")
        w = _word_of(gens, names[0])
        for n in names[1:]:
            w = w.concat(_word_of(gens, n))
        return OpExpr({w: Fraction(coeff)}, w.dom, w.cod)

    # -- algebra -----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_identity(self) -> bool:
        return self.terms == {Word.identity(self.dom): Fraction(1)} and self.dom == self.cod

    def __add__(self, other: "OpExpr") -> "OpExpr":
        if (self.dom, self.cod) != (other.dom, other.cod):
            raise KindMismatch("cannot add expressions of different signatures")
        terms = dict(self.terms)
        for w, c in other.terms.items():
            terms[w] = terms.get(w, Fraction(0)) + c
        return OpExpr(terms, self.dom, self.cod)

    def __sub__(self, other: "OpExpr") -> "OpExpr":
        return self + (-other)

    def __neg__(self) -> "OpExpr":
        return self.scale(-1)

    def scale(self, c: Scalar) -> "OpExpr":
        c = Fraction(c)
        return OpExpr({w: c * v for w, v in self.terms.items()}, self.dom, self.cod)

    def compose(self, other: "OpExpr") -> "OpExpr":
        """self o other; requires self.dom == other.cod."""
        if self.dom != other.cod:
            raise KindMismatch(
                f"cannot compose ({self.dom}->{self.cod}) after ({other.dom}->{other.cod})"
            )
        terms: dict[Word, Fraction] = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                w = w1.concat(w2)
                terms[w] = terms.get(w, Fraction(0)) + c1 * c2
        return OpExpr(terms, other.dom, self.cod)

    def __eq__(self, other) -> bool:
        if not isinstance(other, OpExpr):
            return NotImplemented
        return (self.dom, self.cod) == (other.dom, other.cod) and self.terms == other.terms

    def __hash__(self):
        return hash((frozenset(self.terms.items()), self.dom, self.cod))

    def order_data(self, gens: GeneratorSet) -> OrderData:
        """Slotwise max of the order data of the constituent words."""
        out = OrderData.zero()
        for w in self.terms:
            if w.is_identity():
                od = OrderData(m1=0) if w.dom == INT else OrderData(m5=0)
            else:
                od = gens[w.factors[-1]].order_data
                for name in reversed(w.factors[:-1]):
                    od = compose_order(gens[name].order_data, od)
            out = merge_order(out, od)
        return out

    def generator_names(self) -> set[str]:
        names: set[str] = set()
        for w in self.terms:
            names.update(w.factors)
        return names

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for w in sorted(self.terms, key=lambda w: (len(w.factors), w.factors)):
            c = self.terms[w]
            if c == 1:
                parts.append(str(w))
            elif c == -1:
                parts.append(f"-{w}")
            else:
                parts.append(f"{c}*{w}")
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out

    __repr__ = __str__


# ---------------------------------------------------------------------------
# Rewriting


@dataclass(frozen=True)
class RewriteSystem:
    """An ordered list of word-level identities lhs -> rhs.

    Normalization applies rules at the leftmost matching position, trying
    rules in declaration order, and restarts until no subword matches, so
    normal forms are deterministic for any rule list.  Confluence (and hence
    strategy-independence of the normal form) is the caller's responsibility;
    a step budget guards against non-terminating systems.
    """

    rules: tuple[tuple[Word, OpExpr], ...] = ()
    budget: int = 10_000

    def __post_init__(self):
        for lhs, rhs in self.rules:
            if not lhs.factors:
                raise ValueError("rewrite rule left-hand side must be a nonempty word")
            if (lhs.dom, lhs.cod) != (rhs.dom, rhs.cod):
                raise KindMismatch(
                    f"rule {lhs} -> {rhs} changes the kind signature"
                )

    @staticmethod
    def build(gens: GeneratorSet, rules: Iterable[tuple[Iterable[str], OpExpr]],
              budget: int = 10_000) -> "RewriteSystem":
        built = []
        for names, rhs in rules:
            lhs = None
            for n in names:
                w = _word_of(gens, n)
                lhs = w if lhs is None else lhs.concat(w)
            if lhs is None:
                raise ValueError("empty rule left-hand side")
            built.append((lhs, rhs))
        return RewriteSystem(tuple(built), budget)


EMPTY_RULES = RewriteSystem()


def _rewrite_word_once(w: Word, rs: RewriteSystem) -> OpExpr | None:
    """Apply the first matching rule at the leftmost position, or None."""
    n = len(w.factors)
    for start in range(n):
        for lhs, rhs in rs.rules:
            k = len(lhs.factors)
            if start + k <= n and w.factors[start:start + k] == lhs.factors:
                prefix = w.factors[:start]
                suffix = w.factors[start + k:]
                terms: dict[Word, Fraction] = {}
                for rw, rc in rhs.terms.items():
                    nw = Word(prefix + rw.factors + suffix, w.dom, w.cod)
                    terms[nw] = terms.get(nw, Fraction(0)) + rc
                return OpExpr(terms, w.dom, w.cod)
    return None


def normalize(e: OpExpr, rs: RewriteSystem) -> OpExpr:
    """Rewrite to a fixpoint; the result contains no rule-matching subword."""
    steps = 0
    pending = dict(e.terms)
    done: dict[Word, Fraction] = {}
    while pending:
        w, c = next(iter(pending.items()))
        del pending[w]
        replaced = _rewrite_word_once(w, rs)
        if replaced is None:
            done[w] = done.get(w, Fraction(0)) + c
            continue
        steps += 1
        if steps > rs.budget:
            raise BudgetExceeded(
                f"rewrite budget {rs.budget} exhausted; rule system may not terminate"
            )
        for nw, nc in replaced.terms.items():
            pending[nw] = pending.get(nw, Fraction(0)) + c * nc
            if pending[nw] == 0:
                del pending[nw]
    return OpExpr(done, e.dom, e.cod)


# ---------------------------------------------------------------------------
# Block operators and matrices


class BvOp:
    """A 2x2 block boundary value operator (r+A+B, K; T, Q)."""

    __slots__ = ("a11", "a12", "a21", "a22", "order")

    def __init__(self, a11: OpExpr, a12: OpExpr, a21: OpExpr, a22: OpExpr,
                 order: OrderData | None = None, gens: GeneratorSet | None = None):
        if (a11.dom, a11.cod) != (INT, INT):
            raise KindMismatch("a11 block must map interior -> interior")
        if (a12.dom, a12.cod) != (BND, INT):
            raise KindMismatch("a12 block must map boundary -> interior")
        if (a21.dom, a21.cod) != (INT, BND):
            raise KindMismatch("a21 block must map interior -> boundary")
        if (a22.dom, a22.cod) != (BND, BND):
            raise KindMismatch("a22 block must map boundary -> boundary")
        self.a11, self.a12, self.a21, self.a22 = a11, a12, a21, a22
        if order is None:
            if gens is None:
                order = OrderData.zero()
            else:
                order = merge_order(
                    merge_order(a11.order_data(gens), a12.order_data(gens)),
                    merge_order(a21.order_data(gens), a22.order_data(gens)),
                )
        self.order = order

    @staticmethod
    def zero() -> "BvOp":
        return BvOp(
            OpExpr.zero(INT, INT), OpExpr.zero(BND, INT),
            OpExpr.zero(INT, BND), OpExpr.zero(BND, BND),
            OrderData.zero(),
        )

    @staticmethod
    def unit() -> "BvOp":
        return BvOp(
            OpExpr.identity(INT), OpExpr.zero(BND, INT),
            OpExpr.zero(INT, BND), OpExpr.identity(BND),
            OrderData.identity(),
        )

    @staticmethod
    def block(gens: GeneratorSet, a11: OpExpr | None = None, a12: OpExpr | None = None,
              a21: OpExpr | None = None, a22: OpExpr | None = None) -> "BvOp":
        return BvOp(
            a11 if a11 is not None else OpExpr.zero(INT, INT),
            a12 if a12 is not None else OpExpr.zero(BND, INT),
            a21 if a21 is not None else OpExpr.zero(INT, BND),
            a22 if a22 is not None else OpExpr.zero(BND, BND),
            gens=gens,
        )

    def blocks(self) -> tuple[OpExpr, OpExpr, OpExpr, OpExpr]:
        return self.a11, self.a12, self.a21, self.a22

    def is_zero(self) -> bool:
        return all(b.is_zero() for b in self.blocks())

    def is_unit(self) -> bool:
        return (
            self.a11.is_identity() and self.a22.is_identity()
            and self.a12.is_zero() and self.a21.is_zero()
        )

    def __add__(self, other: "BvOp") -> "BvOp":
        return BvOp(
            self.a11 + other.a11, self.a12 + other.a12,
            self.a21 + other.a21, self.a22 + other.a22,
            merge_order(self.order, other.order),
        )

    def __neg__(self) -> "BvOp":
        return self.scale(-1)

    def __sub__(self, other: "BvOp") -> "BvOp":
        return self + (-other)

    def scale(self, c: Scalar) -> "BvOp":
        return BvOp(
            self.a11.scale(c), self.a12.scale(c),
            self.a21.scale(c), self.a22.scale(c),
            self.order,
        )

    def compose(self, other: "BvOp", rs: RewriteSystem = EMPTY_RULES) -> "BvOp":
        """2x2 block product, each entry normalized."""
        x, y = self, other
        return BvOp(
            normalize(x.a11.compose(y.a11) + x.a12.compose(y.a21), rs),
            normalize(x.a11.compose(y.a12) + x.a12.compose(y.a22), rs),
            normalize(x.a21.compose(y.a11) + x.a22.compose(y.a21), rs),
            normalize(x.a21.compose(y.a12) + x.a22.compose(y.a22), rs),
            compose_order(x.order, y.order),
        )

    def normalized(self, rs: RewriteSystem) -> "BvOp":
        return BvOp(
            normalize(self.a11, rs), normalize(self.a12, rs),
            normalize(self.a21, rs), normalize(self.a22, rs),
            self.order,
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, BvOp):
            return NotImplemented
        return self.blocks() == other.blocks()

    def __hash__(self):
        return hash(self.blocks())

    def generator_names(self) -> set[str]:
        out: set[str] = set()
        for b in self.blocks():
            out |= b.generator_names()
        return out

    def __str__(self) -> str:
        return f"[{self.a11} | {self.a12} ; {self.a21} | {self.a22}]"

    __repr__ = __str__


class OpMatrix:
    """A dense matrix over BvOp blocks, an element of D'(rows x cols).

    ``invertible`` is caller-supplied metadata used by order reduction; it is
    never inferred.
    """

    __slots__ = ("rows", "cols", "entries", "invertible")

    def __init__(self, entries: list[list[BvOp]], invertible: bool = False):
        self.rows = len(entries)
        self.cols = len(entries[0]) if entries else 0
        for row in entries:
            if len(row) != self.cols:
                raise ShapeMismatch("ragged operator matrix")
        self.entries = [list(row) for row in entries]
        self.invertible = invertible

    @staticmethod
    def zero(rows: int, cols: int) -> "OpMatrix":
        return OpMatrix([[BvOp.zero() for _ in range(cols)] for _ in range(rows)])

    @staticmethod
    def identity(n: int) -> "OpMatrix":
        m = OpMatrix.zero(n, n)
        for i in range(n):
            m.entries[i][i] = BvOp.unit()
        return m

    def __getitem__(self, ij: tuple[int, int]) -> BvOp:
        i, j = ij
        return self.entries[i][j]

    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def is_zero(self) -> bool:
        return all(e.is_zero() for row in self.entries for e in row)

    def is_identity(self) -> bool:
        if self.rows != self.cols:
            return False
        return all(
            (e.is_unit() if i == j else e.is_zero())
            for i, row in enumerate(self.entries)
            for j, e in enumerate(row)
        )

    def scale(self, c: Scalar) -> "OpMatrix":
        return OpMatrix([[e.scale(c) for e in row] for row in self.entries])

    def normalized(self, rs: RewriteSystem) -> "OpMatrix":
        return OpMatrix([[e.normalized(rs) for e in row] for row in self.entries])

    def generator_names(self) -> set[str]:
        out: set[str] = set()
        for row in self.entries:
            for e in row:
                out |= e.generator_names()
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, OpMatrix):
            return NotImplemented
        return self.shape() == other.shape() and self.entries == other.entries

    def __str__(self) -> str:
        lines = []
        for row in self.entries:
            lines.append("  " + " , ".join(str(e) for e in row))
        return "[\n" + " ;\n".join(lines) + "\n]"

    __repr__ = __str__


def mat_add(a: OpMatrix, b: OpMatrix) -> OpMatrix:
    if a.shape() != b.shape():
        raise ShapeMismatch(f"cannot add {a.shape()} and {b.shape()} matrices")
    return OpMatrix(
        [[a.entries[i][j] + b.entries[i][j] for j in range(a.cols)] for i in range(a.rows)]
    )


def mat_sub(a: OpMatrix, b: OpMatrix) -> OpMatrix:
    return mat_add(a, b.scale(-1))


def mat_mul(a: OpMatrix, b: OpMatrix, rs: RewriteSystem = EMPTY_RULES) -> OpMatrix:
    if a.cols != b.rows:
        raise ShapeMismatch(f"cannot multiply {a.shape()} by {b.shape()}")
    out = []
    for i in range(a.rows):
        row = []
        for j in range(b.cols):
            acc = BvOp.zero()
            for k in range(a.cols):
                acc = acc + a.entries[i][k].compose(b.entries[k][j], rs)
            row.append(acc.normalized(rs))
        out.append(row)
    return OpMatrix(out)


def mat_equal(a: OpMatrix, b: OpMatrix, rs: RewriteSystem = EMPTY_RULES) -> bool:
    """Entrywise zero test of the normalized difference."""
    return mat_sub(a, b).normalized(rs).is_zero()


# ---------------------------------------------------------------------------
# Formal adjoints


def adjoint_expr(e: OpExpr, gens: GeneratorSet) -> OpExpr:
    """Anti-homomorphism: reverse words, swap each factor for its adjoint.

    Raises NotAdjointable for any factor failing the class-0 / transmission
    gate; the caller may order-reduce first and retry.
    """
    terms: dict[Word, Fraction] = {}
    for w, c in e.terms.items():
        sign = 1
        names = []
        for name in reversed(w.factors):
            decl = gens[name]
            if not decl.adjointable:
                reason = []
                if decl.kind in (OpKind.TRACE, OpKind.INTERIOR_GREEN) and decl.cls not in (None, 0):
                    reason.append(f"class {decl.cls} != 0")
                if decl.kind == OpKind.INTERIOR_GREEN and not decl.transmission_alpha_zero_only:
                    reason.append("transmission expansion not alpha_0-only")
                raise NotAdjointable(name, "; ".join(reason))
            sign *= decl.adjoint_sign
            names.append(decl.adjoint_name)
        nw = Word.identity(e.cod) if not names else None
        if nw is None:
            nw = _word_of(gens, names[0])
            for n in names[1:]:
                nw = nw.concat(_word_of(gens, n))
        if (nw.dom, nw.cod) != (e.cod, e.dom):
            raise KindMismatch(f"adjoint of word {w} has inconsistent signature")
        terms[nw] = terms.get(nw, Fraction(0)) + sign * c
    return OpExpr(terms, e.cod, e.dom)


def bvop_adjoint(b: BvOp, gens: GeneratorSet) -> BvOp:
    """Blockwise formal adjoint; the K and T blocks trade places."""
    return BvOp(
        adjoint_expr(b.a11, gens),
        adjoint_expr(b.a21, gens),
        adjoint_expr(b.a12, gens),
        adjoint_expr(b.a22, gens),
        adjoint_order(b.order),
    )


def mat_adjoint(a: OpMatrix, gens: GeneratorSet) -> OpMatrix:
    """Transpose of elementwise adjoints: result[j][i] = a[i][j]*."""
    return OpMatrix(
        [[bvop_adjoint(a.entries[i][j], gens) for i in range(a.rows)] for j in range(a.cols)]
    )
