"""Order/class bookkeeping for boundary value operators.

A 2x2 boundary value operator block carries five integer orders and two
classes,

    m = (m1, m2 | m3 ; m4 | m5),   d = (d2 ; d4),

indexing the interior pdo part, the singular Green part, the potential part,
the trace part and the boundary pdo part.  A slot holds ``None`` when the
corresponding part of the block is absent (the zero operator); the canonical
identity, for instance, has only its two diagonal slots present.

Composition combines orders tropically: every way a part of the right factor
can feed a part of the left factor contributes the sum of the two orders, and
slots take the maximum over contributing paths.  Classes use a conservative
upper bound (never under-reports, so an adjointability claim derived from it
is always safe), except when the right factor is a diagonal order reducer, in
which case the exact shift rule applies.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass


class OpKind(enum.Enum):
    """The seven operator kinds appearing in a block operator."""

    INTERIOR_GREEN = "interior_green"      # r+A + B : interior -> interior
    POTENTIAL = "potential"                # K : boundary -> interior
    TRACE = "trace"                        # T : interior -> boundary
    BOUNDARY_PDO = "boundary_pdo"          # Q : boundary -> boundary
    INTERIOR_IDENTITY = "interior_identity"
    BOUNDARY_IDENTITY = "boundary_identity"
    ZERO = "zero"

    @property
    def signature(self) -> tuple[str, str] | None:
        """(domain, codomain) over {"int", "bnd"}; None for the zero kind."""
        return _SIGNATURES[self]


_SIGNATURES = {
    OpKind.INTERIOR_GREEN: ("int", "int"),
    OpKind.POTENTIAL: ("bnd", "int"),
    OpKind.TRACE: ("int", "bnd"),
    OpKind.BOUNDARY_PDO: ("bnd", "bnd"),
    OpKind.INTERIOR_IDENTITY: ("int", "int"),
    OpKind.BOUNDARY_IDENTITY: ("bnd", "bnd"),
    OpKind.ZERO: None,
}

_NEG_INF = float("-inf")


def _lift(x):
    return _NEG_INF if x is None else x


def _drop(x):
    return None if x == _NEG_INF else int(x)


def _maxopt(*vals):
    best = max(_lift(v) for v in vals)
    return _drop(best)


def _addopt(a, b):
    if a is None or b is None:
        return None
    return a + b


@dataclass(frozen=True, slots=True)
class OrderData:
    """Five order slots and two class slots; ``None`` marks an absent part."""

    m1: int | None = None
    m2: int | None = None
    m3: int | None = None
    m4: int | None = None
    m5: int | None = None
    d2: int | None = None
    d4: int | None = None

    @staticmethod
    def identity() -> "OrderData":
        """The unit diag(r+I, I'): order 0 on both diagonal slots, class 0."""
        return OrderData(m1=0, m5=0)

    @staticmethod
    def zero() -> "OrderData":
        return OrderData()

    @staticmethod
    def reducer(n1: int, n2: int) -> "OrderData":
        """Diagonal operator diag(r+T1, T2) with ord r+T1 = -n1, ord T2 = -n2."""
        return OrderData(m1=-n1, m5=-n2)

    def is_diagonal(self) -> bool:
        """Only the interior-pdo and boundary-pdo slots are present."""
        return (
            self.m2 is None
            and self.m3 is None
            and self.m4 is None
            and self.d2 is None
            and self.d4 is None
        )

    def max_order(self) -> int | None:
        return _maxopt(self.m1, self.m2, self.m3, self.m4, self.m5)

    def __str__(self) -> str:
        def s(x):
            return "." if x is None else str(x)

        return (
            f"({s(self.m1)},{s(self.m2)}|{s(self.m3)};{s(self.m4)}|{s(self.m5)}"
            f" d=({s(self.d2)};{s(self.d4)}))"
        )


def compose_order(a: OrderData, b: OrderData) -> OrderData:
    """Orders and classes of the composition A o B.

    Order slots take the max of order sums over all composition paths of the
    2x2 block product.  Classes: when ``b`` is a diagonal reducer shape the
    exact shift d -> d + ord(b1) applies; otherwise the conservative bound

        class(A o B) = max(class parts of B, class parts of A + max(ord_B1, 0))

    is used, which can over-report but never under-reports a class.
    """
    a1, a2, a3, a4, a5 = (_lift(a.m1), _lift(a.m2), _lift(a.m3), _lift(a.m4), _lift(a.m5))
    b1, b2, b3, b4, b5 = (_lift(b.m1), _lift(b.m2), _lift(b.m3), _lift(b.m4), _lift(b.m5))

    m1 = a1 + b1
    m2 = max(a1 + b2, a2 + b1, a2 + b2, a3 + b4)
    m3 = max(a1 + b3, a2 + b3, a3 + b5)
    m4 = max(a4 + b1, a4 + b2, a5 + b4)
    m5 = max(a4 + b3, a5 + b5)

    if b.is_diagonal():
        # Exact rule for composition with diag(r+T1, T2): classes shift by
        # ord(T1), orders shift slotwise.
        d2 = _addopt(a.d2, b.m1)
        d4 = _addopt(a.d4, b.m1)
    else:
        db = _maxopt(b.d2, b.d4)
        bump = max(b1, 0) if b.m1 is not None else 0
        d2 = _maxopt(db, _addopt(a.d2, bump)) if m2 != _NEG_INF else None
        d4 = _maxopt(db, _addopt(a.d4, bump)) if m4 != _NEG_INF else None
        # Classes only attach to parts that exist.
        if m2 == _NEG_INF:
            d2 = None
        if m4 == _NEG_INF:
            d4 = None

    return OrderData(_drop(m1), _drop(m2), _drop(m3), _drop(m4), _drop(m5), d2, d4)


def merge_order(a: OrderData, b: OrderData) -> OrderData:
    """Slotwise max, the order data of a sum A + B."""
    return OrderData(
        _maxopt(a.m1, b.m1),
        _maxopt(a.m2, b.m2),
        _maxopt(a.m3, b.m3),
        _maxopt(a.m4, b.m4),
        _maxopt(a.m5, b.m5),
        _maxopt(a.d2, b.d2),
        _maxopt(a.d4, b.d4),
    )


def reduce_order(m: OrderData, n1: int, n2: int) -> OrderData:
    """Order data of A o diag(r+T1, T2) with ord r+T1 = -n1, ord T2 = -n2."""
    if n1 < 1 or n2 < 1:
        raise ValueError(f"reduction orders must be >= 1, got n1={n1}, n2={n2}")
    return OrderData(
        _addopt(m.m1, -n1),
        _addopt(m.m2, -n1),
        _addopt(m.m3, -n2),
        _addopt(m.m4, -n1),
        _addopt(m.m5, -n2),
        _addopt(m.d2, -n1),
        _addopt(m.d4, -n1),
    )


def adjoint_reduction_sufficient(m: OrderData, n1: int) -> bool:
    """True iff n1 > max(m1, d2, d4), the reduction margin that restores adjoints."""
    return n1 > _lift(_maxopt(m.m1, m.d2, m.d4))


def adjoint_order(m: OrderData) -> OrderData:
    """Order data of the formal adjoint: potential and trace slots swap."""
    return OrderData(m.m1, m.m2, m.m4, m.m3, m.m5, m.d2, m.d4)


def generator_order(kind: OpKind, order: int, cls: int | None) -> OrderData:
    """Order data of a single declared generator."""
    if kind in (OpKind.INTERIOR_GREEN, OpKind.INTERIOR_IDENTITY):
        if cls is None:
            return OrderData(m1=order)
        return OrderData(m2=order, d2=cls)
    if kind == OpKind.POTENTIAL:
        return OrderData(m3=order)
    if kind == OpKind.TRACE:
        return OrderData(m4=order, d4=0 if cls is None else cls)
    if kind in (OpKind.BOUNDARY_PDO, OpKind.BOUNDARY_IDENTITY):
        return OrderData(m5=order)
    return OrderData.zero()


@dataclass(frozen=True, slots=True)
class GeneratorDecl:
    """A named atomic operator together with its calculus metadata.

    ``cls`` is meaningful for trace generators and for interior generators
    with a singular Green part; a pure interior pdo leaves it ``None``.
    ``adjoint_name``/``adjoint_sign`` record the declared formal adjoint
    (e.g. a first-order derivative is its own adjoint up to sign -1).
    ``transmission_alpha_zero_only`` flags interior symbols whose transmission
    expansion has only the zeroth polynomial coefficient, one of the two
    conditions for the adjoint to stay inside the algebra.
    ``symbol_var`` names the frequency variable of a constant-coefficient
    first-order derivative, enabling the polynomial symbol map.
    ``numeric_key`` selects a concrete grid realization.
    """

    name: str
    kind: OpKind
    order: int = 0
    cls: int | None = None
    adjointable: bool = False
    adjoint_name: str | None = None
    adjoint_sign: int = 1
    transmission_alpha_zero_only: bool = False
    symbol_var: str | None = None
    numeric_key: str | None = None

    def __post_init__(self):
        if self.adjointable:
            if self.kind in (OpKind.TRACE, OpKind.INTERIOR_GREEN) and self.cls not in (None, 0):
                raise ValueError(
                    f"{self.name}: adjointable trace/Green generators must have class 0"
                )
            if self.kind == OpKind.INTERIOR_GREEN and not self.transmission_alpha_zero_only:
                raise ValueError(
                    f"{self.name}: adjointable interior generators need the "
                    "alpha_0-only transmission property"
                )
            if self.adjoint_name is None:
                raise ValueError(f"{self.name}: adjointable but no adjoint_name given")
        elif self.adjoint_name is not None:
            raise ValueError(f"{self.name}: adjoint_name given but adjointable=False")
        if self.adjoint_sign not in (1, -1):
            raise ValueError(f"{self.name}: adjoint_sign must be +1 or -1")

    @property
    def signature(self) -> tuple[str, str]:
        sig = self.kind.signature
        if sig is None:
            raise ValueError(f"{self.name}: the zero kind has no signature")
        return sig

    @property
    def order_data(self) -> OrderData:
        return generator_order(self.kind, self.order, self.cls)


class GeneratorSet:
    """Registry of generator declarations; the vocabulary of an algebra."""

    def __init__(self, decls: list[GeneratorDecl] | None = None):
        self._decls: dict[str, GeneratorDecl] = {}
        for d in decls or []:
            self.add(d)

    def add(self, decl: GeneratorDecl) -> GeneratorDecl:
        if decl.name in self._decls:
            raise ValueError(f"generator {decl.name!r} already declared")
        if decl.name in ("I", "Ib", "0"):
            raise ValueError(f"{decl.name!r} is reserved")
        self._decls[decl.name] = decl
        return decl

    def declare(self, name: str, kind: OpKind, **kwargs) -> GeneratorDecl:
        return self.add(GeneratorDecl(name, kind, **kwargs))

    def __contains__(self, name: str) -> bool:
        return name in self._decls

    def __getitem__(self, name: str) -> GeneratorDecl:
        try:
            return self._decls[name]
        except KeyError:
            raise KeyError(f"unknown generator {name!r}") from None

    def __iter__(self):
        return iter(self._decls.values())

    def __len__(self) -> int:
        return len(self._decls)

    def names(self) -> list[str]:
        return list(self._decls)

    def symbol_variables(self) -> list[str]:
        """Declared frequency variables, in declaration order."""
        seen = []
        for d in self._decls.values():
            if d.symbol_var is not None and d.symbol_var not in seen:
                seen.append(d.symbol_var)
        return seen

    def generator_for_variable(self, var: str) -> GeneratorDecl:
        for d in self._decls.values():
            if d.symbol_var == var:
                return d
        raise KeyError(f"no generator declared for symbol variable {var!r}")

    def validate_adjoints(self) -> None:
        """Check that declared adjoint pairs exist and have dual kinds."""
        dual = {
            OpKind.INTERIOR_GREEN: OpKind.INTERIOR_GREEN,
            OpKind.POTENTIAL: OpKind.TRACE,
            OpKind.TRACE: OpKind.POTENTIAL,
            OpKind.BOUNDARY_PDO: OpKind.BOUNDARY_PDO,
        }
        for d in self._decls.values():
            if not d.adjointable:
                continue
            other = self[d.adjoint_name]
            if other.kind != dual[d.kind]:
                raise ValueError(
                    f"{d.name}*: declared adjoint {other.name} has kind "
                    f"{other.kind.value}, expected {dual[d.kind].value}"
                )
