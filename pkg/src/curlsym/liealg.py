"""Lie-algebra structure of generator bases: brackets, structure constants,
the adjoint representation, and subalgebra closure.

Brackets are computed exactly on the generator coefficients; a basis is
closed when every bracket decomposes over the basis with rational
coordinates, and the resulting constants tensor is the single source for
everything else here.  The adjoint representation Ad(exp(eps*Xi)) acts on
coordinates as exp(-eps * ad_i) (so the eps-linear term of Ad applied to
Xj is -eps*[Xi, Xj]); the numeric route evaluates the matrix exponential,
and the closed-form route fits those values against the small function
dictionary {1, eps, eps^2, cos eps, sin eps, e^eps, e^-eps} with an exact
rational snap and an out-of-sample residual gate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.linalg import expm

from .expr import Expr, Num, S, cos, equal_exprs, exp, sin, normal_expression
from .jet import GeneratorField
from .symmetry import coordinates_in_basis


class NotClosed(ValueError):
    """A bracket of basis elements falls outside the basis span."""

    def __init__(self, i: int, j: int, field: GeneratorField):
        super().__init__(f"bracket ({i},{j}) is not in the span of the basis")
        self.pair = (i, j)
        self.field = field


class NoClosedForm(ValueError):
    """An adjoint entry is not a combination of the dictionary functions."""


def bracket(a: GeneratorField, b: GeneratorField) -> GeneratorField:
    """Commutator of vector fields on (x,y,z,u,v,w)-space, componentwise
    a(b's coefficients) minus b(a's coefficients)."""
    coeffs = [
        normal_expression(a.apply(cb) - b.apply(ca))
        for ca, cb in zip(a.as_tuple(), b.as_tuple())
    ]
    return GeneratorField(*coeffs)


@dataclass(frozen=True)
class LieAlgebraTable:
    """Closed basis with the constants tensor of all pairwise brackets.

    `constants[i][j][k]` is the coefficient of basis element k in the
    bracket of elements i and j (all 0-based internally; the public lookup
    helpers below speak 1-based indices to match the X1..Xn names)."""

    basis: tuple
    names: tuple
    constants: tuple

    @property
    def dim(self) -> int:
        return len(self.basis)

    def coordinates(self, i: int, j: int) -> tuple:
        """Coordinates of [Xi, Xj]; i, j are 1-based."""
        return self.constants[i - 1][j - 1]

    def entry_string(self, i: int, j: int) -> str:
        return format_combination(self.coordinates(i, j), self.names)


def structure_constants(basis, names=None) -> LieAlgebraTable:
    basis = tuple(basis)
    n = len(basis)
    names = tuple(names) if names else tuple(f"X{k}" for k in range(1, n + 1))
    zero = tuple(Fraction(0) for _ in range(n))
    table = [[zero] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            br = bracket(basis[i], basis[j])
            coords = coordinates_in_basis(basis, br)
            if coords is None:
                raise NotClosed(i + 1, j + 1, br)
            vec = tuple(coords)
            table[i][j] = vec
            table[j][i] = tuple(-c for c in vec)
    return LieAlgebraTable(
        basis=basis,
        names=names,
        constants=tuple(tuple(row) for row in table),
    )


def jacobi_check(table: LieAlgebraTable) -> bool:
    """Exact Jacobi identity over all triples of the constants tensor."""
    c = table.constants
    n = table.dim
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                for l in range(n):
                    acc = Fraction(0)
                    for m in range(n):
                        acc += (
                            c[i][j][m] * c[m][k][l]
                            + c[j][k][m] * c[m][i][l]
                            + c[k][i][m] * c[m][j][l]
                        )
                    if acc:
                        return False
    return True


def format_combination(coords, names) -> str:
    """Human form of a coordinate vector: '0', 'X3', '-1/2*X8 + X1', ..."""
    parts = []
    for c, name in zip(coords, names):
        if not c:
            continue
        mag = abs(c)
        body = name if mag == 1 else f"{mag}*{name}"
        parts.append(("- " if c < 0 else "+ ") + body)
    if not parts:
        return "0"
    head = parts[0].replace("- ", "-", 1).replace("+ ", "", 1)
    return " ".join([head] + parts[1:])


# --- adjoint representation ---------------------------------------------------


def ad_matrix(table: LieAlgebraTable, i: int) -> np.ndarray:
    """Matrix of ad(Xi) on coordinates: column l holds [Xi, Xl]; 1-based i."""
    n = table.dim
    a = np.zeros((n, n))
    for l in range(n):
        for k in range(n):
            a[k, l] = float(table.constants[i - 1][l][k])
    return a


def adjoint_numeric(table: LieAlgebraTable, i: int, j: int, eps: float) -> np.ndarray:
    """Coordinates of Ad(exp(eps*Xi)) applied to Xj: exp(-eps*ad_i) e_j."""
    m = expm(-eps * ad_matrix(table, i))
    return m[:, j - 1]


# dictionary of eps-functions an adjoint entry may be built from
_DICTIONARY = (
    (lambda t: 1.0, Num(Fraction(1))),
    (lambda t: t, S.eps),
    (lambda t: t * t, S.eps**2),
    (np.cos, cos(S.eps)),
    (np.sin, sin(S.eps)),
    (np.exp, exp(S.eps)),
    (lambda t: np.exp(-t), exp(-S.eps)),
)
_FIT_SAMPLES = np.linspace(0.25, 3.0, 12)
_CHECK_SAMPLES = np.linspace(0.13, 2.71, 20)
_SNAP_DEN = 1_000_000
_TOL = 1e-9


@dataclass(frozen=True)
class AdjointEntry:
    source: int  # 1-based basis indices
    target: int
    coefficients: tuple  # Expr per basis element, functions of eps

    def to_string(self, names) -> str:
        from .expr import to_string

        parts = []
        for c, name in zip(self.coefficients, names):
            if isinstance(c, Num) and c.val == 0:
                continue
            if isinstance(c, Num) and c.val == 1:
                parts.append(("+", name))
            else:
                s = to_string(c)
                if s.startswith("-"):
                    parts.append(("-", f"{s[1:]}*{name}"))
                else:
                    parts.append(("+", f"{s}*{name}"))
        if not parts:
            return "0"
        head = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        rest = [f"{sign} {body}" for sign, body in parts[1:]]
        return " ".join([head] + rest)


def _fit_eps_function(values_at, samples=_FIT_SAMPLES):
    """Rational-snapped dictionary fit of a sampled function of eps."""
    m = np.array([[fn(t) for fn, _ in _DICTIONARY] for t in samples])
    rhs = np.array([values_at(t) for t in samples])
    sol, *_ = np.linalg.lstsq(m, rhs, rcond=None)
    snapped = []
    for c in sol:
        q = Fraction(float(c)).limit_denominator(_SNAP_DEN)
        if abs(float(q) - float(c)) > _TOL:
            raise NoClosedForm(f"coefficient {c!r} does not snap to a rational")
        snapped.append(q)
    return snapped


def adjoint_closed_form(table: LieAlgebraTable, i: int, j: int) -> AdjointEntry:
    """Closed form of Ad(exp(eps*Xi)) Xj over the dictionary, validated
    against the matrix exponential on fresh samples."""
    a = ad_matrix(table, i)
    n = table.dim

    def column(t):
        return expm(-t * a)[:, j - 1]

    sampled = {t: column(t) for t in _FIT_SAMPLES}
    coeffs = []
    for k in range(n):
        snapped = _fit_eps_function(lambda t, k=k: sampled[t][k])
        expr: Expr = Num(Fraction(0))
        for q, (_, basis_expr) in zip(snapped, _DICTIONARY):
            if q:
                expr = expr + Num(q) * basis_expr
        coeffs.append(normal_expression(expr))

        def fitted(t, snapped=snapped):
            return sum(float(q) * fn(t) for q, (fn, _) in zip(snapped, _DICTIONARY))

        for t in _CHECK_SAMPLES:
            truth = column(t)[k]
            if abs(fitted(t) - truth) > _TOL * max(1.0, abs(truth)):
                raise NoClosedForm(
                    f"entry ({i},{j}) component {k + 1} fails out-of-sample check"
                )
    return AdjointEntry(source=i, target=j, coefficients=tuple(coeffs))


def adjoint_entry_matches(entry: AdjointEntry, reference_coeffs) -> bool:
    """Exact comparison of an entry against reference coefficient functions."""
    if len(entry.coefficients) != len(reference_coeffs):
        return False
    return all(
        equal_exprs(a, b) for a, b in zip(entry.coefficients, reference_coeffs)
    )


# --- subalgebras and fixture diffs --------------------------------------------


def is_subalgebra(table: LieAlgebraTable, subset) -> bool:
    """True iff brackets of subset members stay in the subset's span.

    `subset` holds 1-based basis indices; because the basis is independent,
    membership in the span is support containment of the coordinates."""
    chosen = sorted(set(subset))
    inside = {k - 1 for k in chosen}
    for i in chosen:
        for j in chosen:
            vec = table.coordinates(i, j)
            if any(c for k, c in enumerate(vec) if k not in inside):
                return False
    return True


@dataclass(frozen=True)
class TableMismatch:
    pair: tuple
    computed: tuple
    reference: tuple

    def describe(self, names) -> str:
        i, j = self.pair
        return (
            f"[{names[i - 1]},{names[j - 1]}]: computed "
            f"{format_combination(self.computed, names)}, reference "
            f"{format_combination(self.reference, names)}"
        )


def table_mismatches(table: LieAlgebraTable, reference) -> list:
    """Cells where the computed table disagrees with a reference mapping
    {(i, j): Combination}; sorted by (i, j)."""
    out = []
    for (i, j), combo in sorted(reference.items()):
        ref_vec = combo.constant_coordinates(table.dim)
        got = table.coordinates(i, j)
        if tuple(got) != tuple(ref_vec):
            out.append(TableMismatch((i, j), tuple(got), tuple(ref_vec)))
    return out


# --- serialization ------------------------------------------------------------


def table_to_json(table: LieAlgebraTable) -> dict:
    return {
        "names": list(table.names),
        "entries": {
            f"{table.names[i]},{table.names[j]}": table.entry_string(i + 1, j + 1)
            for i in range(table.dim)
            for j in range(table.dim)
        },
    }


def table_grid(table: LieAlgebraTable) -> str:
    """Aligned text grid of the full bracket table."""
    cells = [[""] + list(table.names)]
    for i in range(table.dim):
        row = [table.names[i]]
        for j in range(table.dim):
            row.append(table.entry_string(i + 1, j + 1))
        cells.append(row)
    widths = [max(len(r[c]) for r in cells) for c in range(len(cells[0]))]
    lines = [
        "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
        for row in cells
    ]
    return "\n".join(lines)


def adjoint_grid(entries, names) -> str:
    """Aligned text grid for a full set of adjoint entries {(i,j): entry}."""
    n = len(names)
    cells = [["Ad"] + list(names)]
    for i in range(1, n + 1):
        row = [names[i - 1]]
        for j in range(1, n + 1):
            row.append(entries[(i, j)].to_string(names))
        cells.append(row)
    widths = [max(len(r[c]) for r in cells) for c in range(len(cells[0]))]
    lines = [
        "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
        for row in cells
    ]
    return "\n".join(lines)
