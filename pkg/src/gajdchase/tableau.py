"""Tableaux as mappings between weighted relations.

A tableau is a table of variables over a scheme: the distinguished variable
`a_i` may appear only in column i, every other cell holds a nondistinguished
variable, and each variable lives in exactly one column.  A tableau denotes a
mapping on relations: a valuation assigns a value to every variable, a
valuation is admissible when each row's instantiated pattern is a tuple of
the input relation with positive weight, and each admissible valuation emits
the distinguished tuple with a weight given by the tableau's quotient
expression over edge and interaction marginals.

For the tableau built from a dependency's hypertree the emitted weight
depends only on the distinguished tuple, and the mapping coincides with the
marginalize/product-join map of the same hypertree.  Arbitrary hand-built
tableaux may carry weight expressions that mention nondistinguished
variables; the executor then checks that duplicate valuations of one
distinguished tuple agree and raises otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import SchemeError, TableauInconsistencyError
from .hypergraph import AttributeSet
from .prelation import Gajd, WeightedRelation
from .symbolic import MarginalAtom, RationalExpression, Variable, distinguished_for, evaluate


@dataclass(frozen=True)
class Row:
    """One tableau row: a variable per column plus its weight expression."""

    cells: tuple[Variable, ...]
    weight_expr: RationalExpression

    @property
    def pattern(self) -> tuple[Variable, ...]:
        return self.cells

    def distinguished_count(self) -> int:
        return sum(1 for v in self.cells if v.distinguished)

    def render_pattern(self) -> str:
        return "(" + ",".join(v.render() for v in self.cells) + ")"


class Tableau:
    """An ordered set of rows over a scheme, with the emission expression `psi`.

    Rows keep insertion order for reproducible traces, and a pattern index
    enforces set semantics.  `fresh_counter` is the next nondistinguished
    index to hand out.
    """

    def __init__(self, scheme: AttributeSet, psi: RationalExpression, fresh_counter: int = 1):
        if len(scheme) == 0:
            raise ValueError("a tableau needs a nonempty scheme")
        self.scheme = scheme
        self.psi = psi
        self.rows: list[Row] = []
        self.fresh_counter = fresh_counter
        self._index: dict[tuple[Variable, ...], int] = {}

    def __len__(self) -> int:
        return len(self.rows)

    def has_pattern(self, cells: tuple[Variable, ...]) -> bool:
        return cells in self._index

    def row_id(self, cells: tuple[Variable, ...]) -> int:
        return self._index[cells]

    def add_row(self, row: Row) -> int:
        if len(row.cells) != len(self.scheme):
            raise SchemeError("row width does not match the tableau scheme")
        for attr, var in zip(self.scheme, row.cells):
            if var.column != attr:
                raise ValueError(f"variable {var.render()} does not belong in column {attr}")
            if var.distinguished and var.index != self.scheme.index(attr) + 1:
                raise ValueError(f"distinguished variable {var.render()} is outside its own column")
        if row.cells in self._index:
            raise ValueError(f"duplicate row pattern {row.render_pattern()}")
        self.rows.append(row)
        self._index[row.cells] = len(self.rows) - 1
        return len(self.rows) - 1

    def fresh(self, column: str) -> Variable:
        v = Variable(False, self.fresh_counter, column)
        self.fresh_counter += 1
        return v

    def distinguished_row(self) -> tuple[Variable, ...]:
        return tuple(distinguished_for(self.scheme, a) for a in self.scheme)

    def contains_distinguished_row(self) -> bool:
        return self.has_pattern(self.distinguished_row())

    def copy(self) -> "Tableau":
        t = Tableau(self.scheme, self.psi, self.fresh_counter)
        for row in self.rows:
            t.add_row(row)
        return t

    def pattern_set(self) -> frozenset[tuple[Variable, ...]]:
        return frozenset(self._index)

    def render(self) -> str:
        """Aligned table: a header line, then one line per row with cells and the weight expression."""
        headers = list(self.scheme) + ["f"]
        table = [[v.render() for v in row.cells] + [row.weight_expr.render()] for row in self.rows]
        widths = [max(len(headers[c]), max((len(r[c]) for r in table), default=0)) for c in range(len(headers))]
        def fmt(parts: list[str]) -> str:
            return "  ".join(p.ljust(widths[i]) for i, p in enumerate(parts)).rstrip()
        return "\n".join([fmt(headers)] + [fmt(r) for r in table]) + "\n"


def build_tr(g: Gajd) -> Tableau:
    """The tableau of a dependency: one row per hypertree edge, in certificate order.

    Row i carries the distinguished variable in every column of its edge and
    fresh nondistinguished variables elsewhere (unique across the tableau).
    Its weight expression is the single full-scheme atom at its own pattern.
    The emission expression multiplies one edge marginal per row, at the
    distinguished pattern, and divides by the interaction-set marginals.
    """
    scheme = g.scheme
    dist = {a: distinguished_for(scheme, a) for a in scheme}
    num = [MarginalAtom.from_cells(edge, dist) for edge in g.edges_in_order]
    den = [MarginalAtom.from_cells(s, dist) for s in g.interactions]
    t = Tableau(scheme, RationalExpression.of(num, den))
    for edge in g.edges_in_order:
        cells = tuple(dist[a] if a in edge else t.fresh(a) for a in scheme)
        expr = RationalExpression.atom(MarginalAtom(scheme, cells))
        t.add_row(Row(cells, expr))
    return t


def identity_tableau(scheme: AttributeSet) -> Tableau:
    """The single all-distinguished row; the identity mapping on every relation."""
    t = Tableau(scheme, RationalExpression.atom(
        MarginalAtom(scheme, tuple(distinguished_for(scheme, a) for a in scheme))))
    cells = t.distinguished_row()
    t.add_row(Row(cells, RationalExpression.atom(MarginalAtom(scheme, cells))))
    return t


def run(t: Tableau, rel: WeightedRelation, weight_tol: float = 1e-12) -> WeightedRelation:
    """Execute a tableau against a relation.

    Valuations are materialized by a backtracking join over the relation's
    positive-weight tuples (zero-weight tuples count as absent).  The output
    deduplicates distinguished tuples; if two valuations of one distinguished
    tuple ever disagree on the emitted weight beyond `weight_tol`, the input
    violates the marginal-consistency contract and an error is raised.
    """
    if rel.scheme != t.scheme:
        raise SchemeError(
            f"relation scheme {rel.scheme.render()} does not match tableau scheme {t.scheme.render()}"
        )
    support = [key for key, w in rel.items() if w > 0.0]
    rows = t.rows
    row_vars = {v for row in rows for v in row.cells}
    for v in t.distinguished_row():
        if v not in row_vars:
            raise ValueError(f"distinguished variable {v.render()} appears in no row")
    psi_vars = t.psi.variables()
    for v in psi_vars:
        if v not in row_vars:
            raise ValueError(f"emission variable {v.render()} appears in no row")
    marginal_cache: dict[AttributeSet, WeightedRelation] = {}
    value_cache: dict[tuple[str, ...], float] = {}
    results: dict[tuple[str, ...], float] = {}
    dist_vars = t.distinguished_row()
    binding: dict[Variable, str] = {}

    def emit() -> None:
        key = tuple(binding[v] for v in psi_vars)
        value = value_cache.get(key)
        if value is None:
            value = evaluate(t.psi, rel, binding, marginal_cache)
            value_cache[key] = value
        dist = tuple(binding[v] for v in dist_vars)
        seen = results.get(dist)
        if seen is None:
            results[dist] = value
        elif abs(seen - value) > weight_tol * max(1.0, abs(seen), abs(value)):
            raise TableauInconsistencyError(
                f"distinguished tuple {dist} received weights {seen} and {value}"
            )

    def extend(i: int) -> None:
        if i == len(rows):
            emit()
            return
        cells = rows[i].cells
        for tup in support:
            bound: list[Variable] = []
            ok = True
            for var, value in zip(cells, tup):
                prev = binding.get(var)
                if prev is None:
                    binding[var] = value
                    bound.append(var)
                elif prev != value:
                    ok = False
                    break
            if ok:
                extend(i + 1)
            for var in bound:
                del binding[var]

    extend(0)
    return WeightedRelation(t.scheme, results)
