"""Assembling raw block control systems into square-block matrix form.

A raw system couples N interior and m boundary indeterminates through N1
interior equations and m1 boundary equations, given as four operator grids.
Assembly pads to Nbar = max(N, m) columns and Nbar1 = max(N1, m1) rows of
2x2 blocks, inserting zeros where an index runs out of range, and records
which slots are notational padding so reports can suppress them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .algebra import BND, INT, BvOp, OpExpr, OpMatrix
from .errors import ShapeMismatch
from .orders import GeneratorSet


@dataclass
class SystemSpec:
    """The four block grids of a raw control system.

    block1 (N1 x N) holds interior->interior entries, block2 (N1 x m)
    potential entries, block3 (m1 x N) trace entries and block4 (m1 x m)
    boundary entries.  Any of N, m, N1, m1 may be declared larger than the
    variables that genuinely exist; ``phantom_*`` mark such padding.
    """

    gens: GeneratorSet
    n_state: int
    m_bdry: int
    n_eqs: int
    m_beqs: int
    block1: list[list[OpExpr]]
    block2: list[list[OpExpr]]
    block3: list[list[OpExpr]]
    block4: list[list[OpExpr]]
    phantom_interior: set[int] = field(default_factory=set)
    phantom_boundary: set[int] = field(default_factory=set)

    def __post_init__(self):
        self._check_grid(self.block1, self.n_eqs, self.n_state, INT, INT, "block1")
        self._check_grid(self.block2, self.n_eqs, self.m_bdry, BND, INT, "block2")
        self._check_grid(self.block3, self.m_beqs, self.n_state, INT, BND, "block3")
        self._check_grid(self.block4, self.m_beqs, self.m_bdry, BND, BND, "block4")

    @staticmethod
    def _check_grid(grid, rows, cols, dom, cod, name):
        if len(grid) != rows or any(len(r) != cols for r in grid):
            raise ShapeMismatch(f"{name} must be {rows} x {cols}")
        for r in grid:
            for e in r:
                if (e.dom, e.cod) != (dom, cod):
                    raise ShapeMismatch(
                        f"{name} entries must have signature ({dom}->{cod}), "
                        f"got ({e.dom}->{e.cod})"
                    )


@dataclass
class AssembledSystem:
    """The square-block matrix L together with padding bookkeeping."""

    L: OpMatrix
    n_state: int
    m_bdry: int
    n_eqs: int
    m_beqs: int
    phantom_interior_cols: tuple[int, ...]
    phantom_boundary_cols: tuple[int, ...]
    phantom_interior_rows: tuple[int, ...]
    phantom_boundary_rows: tuple[int, ...]

    @property
    def nbar(self) -> int:
        return self.L.cols

    @property
    def nbar1(self) -> int:
        return self.L.rows


@dataclass
class ModulePresentation:
    """Relations matrix of the factor module D'^Nbar / D'^Nbar1 L."""

    relations: OpMatrix
    ambient_rank: int
    relation_rank: int


def assemble(spec: SystemSpec) -> AssembledSystem:
    """Pack the four grids into L of shape max(N1,m1) x max(N,m).

    Block (i, j) collects whatever sub-entries exist for that index pair;
    absent sub-blocks are zero.  All four parity cases of N vs m and N1 vs m1
    are covered by the same range test.
    """
    n, m = spec.n_state, spec.m_bdry
    n1, m1 = spec.n_eqs, spec.m_beqs
    nbar, nbar1 = max(n, m), max(n1, m1)

    entries = []
    for i in range(nbar1):
        row = []
        for j in range(nbar):
            row.append(
                BvOp.block(
                    spec.gens,
                    a11=spec.block1[i][j] if i < n1 and j < n else None,
                    a12=spec.block2[i][j] if i < n1 and j < m else None,
                    a21=spec.block3[i][j] if i < m1 and j < n else None,
                    a22=spec.block4[i][j] if i < m1 and j < m else None,
                )
            )
        entries.append(row)

    return AssembledSystem(
        L=OpMatrix(entries),
        n_state=n,
        m_bdry=m,
        n_eqs=n1,
        m_beqs=m1,
        phantom_interior_cols=tuple(sorted(set(range(n, nbar)) | spec.phantom_interior)),
        phantom_boundary_cols=tuple(sorted(set(range(m, nbar)) | spec.phantom_boundary)),
        phantom_interior_rows=tuple(range(n1, nbar1)),
        phantom_boundary_rows=tuple(range(m1, nbar1)),
    )


def read_back(assembled: AssembledSystem) -> SystemSpec:
    """Recover the four sub-grids from L.  Inverse of assemble up to padding."""
    L = assembled.L
    n, m = assembled.n_state, assembled.m_bdry
    n1, m1 = assembled.n_eqs, assembled.m_beqs
    return SystemSpec(
        gens=GeneratorSet(),  # read-back grids are checked for shape only
        n_state=n,
        m_bdry=m,
        n_eqs=n1,
        m_beqs=m1,
        block1=[[L.entries[i][j].a11 for j in range(n)] for i in range(n1)],
        block2=[[L.entries[i][j].a12 for j in range(m)] for i in range(n1)],
        block3=[[L.entries[i][j].a21 for j in range(n)] for i in range(m1)],
        block4=[[L.entries[i][j].a22 for j in range(m)] for i in range(m1)],
    )


def canonical_basis(rank: int) -> list[OpMatrix]:
    """Rows E_1 .. E_rank of the free module, unit block in one slot each."""
    if rank < 1:
        raise ValueError("rank must be >= 1")
    rows = []
    for j in range(rank):
        e = OpMatrix.zero(1, rank)
        e.entries[0][j] = BvOp.unit()
        rows.append(e)
    return rows


def present_module(L: OpMatrix) -> ModulePresentation:
    """Package L as the relations of the finitely presented system module."""
    return ModulePresentation(relations=L, ambient_rank=L.cols, relation_rank=L.rows)


def scalar_equations(L: OpMatrix):
    """Expand L u = 0 into scalar equations, one dict per block row.

    Row i yields two dicts: the interior equation mapping (kind, j, word) ->
    coefficient on v_j / w_j, and likewise the boundary equation.  Used to
    check that assembly preserves the flattened system.
    """
    eqs = []
    for i in range(L.rows):
        interior: dict[tuple[str, int, tuple[str, ...]], object] = {}
        boundary: dict[tuple[str, int, tuple[str, ...]], object] = {}
        for j in range(L.cols):
            b = L.entries[i][j]
            for w, c in b.a11.terms.items():
                interior[("v", j, w.factors)] = c
            for w, c in b.a12.terms.items():
                interior[("w", j, w.factors)] = c
            for w, c in b.a21.terms.items():
                boundary[("v", j, w.factors)] = c
            for w, c in b.a22.terms.items():
                boundary[("w", j, w.factors)] = c
        eqs.append((interior, boundary))
    return eqs
