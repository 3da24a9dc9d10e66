"""Derivation rules, the chase fixpoint, and the implication test.

Each dependency over the full scheme induces a derivation rule: rows
k_1..k_q (repetition allowed) are joinable when a row pattern exists that
agrees with row k_i on the i-th hypertree edge; the produced row's weight is
the quotient of the selected edge atoms by the interaction atoms at the new
row's cells.  The chase applies rules until no new pattern appears.  Every
produced cell comes from a selected row, so the variable universe is fixed,
the pattern space is finite, the chase terminates, and the fixpoint is
independent of application order.

The implication test builds the target's tableau and chases it under the
constraint rules: the target is implied exactly when the all-distinguished
row becomes derivable.  Two stop rules shape the output without affecting
the verdict:

* `stop_at_distinguished` ends the run as soon as the all-distinguished row
  appears (sound: the row is in the fixpoint).
* `stop_when_no_gain` ends the run when no candidate row carries more
  distinguished variables than the tableau already has.  This yields the
  short, human-readable generating prefix, but it is *not* decision-complete:
  reaching the all-distinguished row can require intermediate rows that drop
  distinguished variables, so a negative verdict is only trusted after the
  unrestricted fixpoint confirms it (`implies` always runs that closure).
"""

from __future__ import annotations

import heapq
import itertools
import random
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .errors import ChaseRowLimitError, SchemeError
from .hypergraph import AttributeSet
from .prelation import Gajd
from .symbolic import (
    MarginalAtom,
    RationalExpression,
    Variable,
    eq5_expression,
    restrict_atom,
)
from .tableau import Row, Tableau, build_tr

DEFAULT_MAX_ROWS = 100_000


@dataclass(frozen=True)
class JRule:
    """A named derivation rule for a dependency covering the full scheme."""

    name: str
    gajd: Gajd

    @property
    def arity(self) -> int:
        return len(self.gajd.hypergraph.edges)

    @property
    def edges_in_order(self) -> tuple[AttributeSet, ...]:
        return self.gajd.edges_in_order

    @property
    def interactions(self) -> tuple[AttributeSet, ...]:
        return tuple(self.gajd.interactions)


class Joinability(Enum):
    NEW = "new"
    ALREADY_PRESENT = "already_present"
    NOT_JOINABLE = "not_joinable"


def _mix_pattern(
    t: Tableau, rule: JRule, selection: Sequence[int]
) -> tuple[Variable, ...] | None:
    """Blockwise mix of the selected rows along the rule's edges; None when inconsistent."""
    cells: list[Variable | None] = [None] * len(t.scheme)
    for edge, k in zip(rule.edges_in_order, selection):
        row_cells = t.rows[k].cells
        for a in edge:
            ci = t.scheme.index(a)
            v = row_cells[ci]
            if cells[ci] is None:
                cells[ci] = v
            elif cells[ci] != v:
                return None
    return tuple(cells)  # type: ignore[arg-type]


def _eq5_for(t: Tableau, rule: JRule, selection: Sequence[int], pattern: tuple[Variable, ...]) -> RationalExpression:
    scheme = t.scheme
    by_col = dict(zip(scheme, pattern))
    edge_patterns = []
    for edge, k in zip(rule.edges_in_order, selection):
        row_cells = dict(zip(scheme, t.rows[k].cells))
        edge_patterns.append((edge, row_cells))
    interaction_patterns = [(s, by_col) for s in rule.interactions]
    return eq5_expression(edge_patterns, interaction_patterns)


def joinable(t: Tableau, rule: JRule, selection: Sequence[int]) -> tuple[Joinability, Row | None]:
    """Evaluate one rule application.

    Returns NEW with the candidate row (weight expression attached), or
    ALREADY_PRESENT when the mixed pattern is already a row of `t`, or
    NOT_JOINABLE when the selected rows disagree on an edge overlap.
    """
    if len(selection) != rule.arity:
        raise ValueError(f"rule {rule.name} needs {rule.arity} selected rows, got {len(selection)}")
    for k in selection:
        if not 0 <= k < len(t.rows):
            raise ValueError(f"row id {k} out of range")
    if rule.gajd.scheme != t.scheme:
        raise SchemeError(
            f"rule scheme {rule.gajd.scheme.render()} does not match tableau scheme {t.scheme.render()}"
        )
    pattern = _mix_pattern(t, rule, selection)
    if pattern is None:
        return (Joinability.NOT_JOINABLE, None)
    if t.has_pattern(pattern):
        return (Joinability.ALREADY_PRESENT, None)
    return (Joinability.NEW, Row(pattern, _eq5_for(t, rule, selection, pattern)))


@dataclass(frozen=True)
class ChaseStep:
    """One rule application: which rule, which rows, what was produced."""

    rule: JRule
    selection: tuple[int, ...]
    produced: Row
    produced_id: int

    def render(self, number: int) -> str:
        rows = ",".join(str(k + 1) for k in self.selection)
        return (
            f"step {number}: rule {self.rule.name} rows [{rows}] -> "
            f"row {self.produced.render_pattern()} expr {self.produced.weight_expr.render()}"
        )

    def record(self, number: int) -> dict:
        return {
            "step": number,
            "rule": self.rule.name,
            "rows": [k + 1 for k in self.selection],
            "pattern": self.produced.render_pattern(),
            "expr": self.produced.weight_expr.render(),
        }


@dataclass
class ChaseTrace:
    """A replayable derivation log: initial tableau, steps, final tableau."""

    initial: Tableau
    steps: list[ChaseStep]
    final: Tableau
    stop_reason: str
    duplicates: int = 0

    def render_steps(self) -> list[str]:
        return [step.render(i + 1) for i, step in enumerate(self.steps)]

    def records(self) -> list[dict]:
        return [step.record(i + 1) for i, step in enumerate(self.steps)]

    def replay(self) -> Tableau:
        """Re-derive the final tableau from the initial one; raises if any step disagrees."""
        t = self.initial.copy()
        for step in self.steps:
            status, row = joinable(t, step.rule, step.selection)
            if status is not Joinability.NEW or row != step.produced:
                raise ValueError(f"step {step} does not replay")
            rid = t.add_row(row)
            if rid != step.produced_id:
                raise ValueError(f"step {step} replayed to row id {rid}")
        return t


def _as_rules(constraints: Iterable[Gajd | JRule]) -> tuple[JRule, ...]:
    rules = []
    for c in constraints:
        rules.append(c if isinstance(c, JRule) else JRule(c.render(), c))
    return tuple(rules)


def chase(
    t: Tableau,
    constraints: Iterable[Gajd | JRule],
    *,
    stop_at_distinguished: bool = False,
    stop_when_no_gain: bool = False,
    rng: random.Random | None = None,
    max_rows: int = DEFAULT_MAX_ROWS,
) -> ChaseTrace:
    """Apply derivation rules to (a copy of) `t` until a stop condition holds.

    With no stop options this runs to the fixpoint, which is unique whatever
    the application order.  The default order is deterministic best-first:
    among all applicable productive rule applications, prefer the candidate
    row with the most distinguished variables, breaking ties by rule input
    order and then by selection.  Passing `rng` replaces that priority with a
    seeded random choice (used to exercise order independence).

    Raises ChaseRowLimitError when the tableau would exceed `max_rows`.
    """
    rules = _as_rules(constraints)
    for rule in rules:
        if rule.gajd.scheme != t.scheme:
            raise SchemeError(
                f"constraint {rule.name} is over {rule.gajd.scheme.render()}, "
                f"not the tableau scheme {t.scheme.render()}; schemes must match exactly"
            )
    if stop_when_no_gain and rng is not None:
        raise ValueError("the no-gain stop rule requires the deterministic order")

    work = t.copy()
    initial = t.copy()
    steps: list[ChaseStep] = []
    duplicates = 0
    # pending candidate applications: (-distinguished_count, rule_index, selection)
    pending: list[tuple[int, int, tuple[int, ...]]] = []

    def consider(rule_idx: int, selection: tuple[int, ...]) -> None:
        nonlocal duplicates
        pattern = _mix_pattern(work, rules[rule_idx], selection)
        if pattern is None:
            return
        if work.has_pattern(pattern):
            duplicates += 1
            return
        dist = sum(1 for v in pattern if v.distinguished)
        entry = (-dist, rule_idx, selection)
        if rng is None:
            heapq.heappush(pending, entry)
        else:
            pending.append(entry)

    def generate(lo: int, hi: int) -> None:
        """Consider every selection over rows [0, hi) that uses at least one row in [lo, hi).

        Placing the first new-row position explicitly enumerates each
        qualifying selection exactly once, so every application is classified
        a single time over the whole run.
        """
        for rule_idx, rule in enumerate(rules):
            q = rule.arity
            for new_pos in range(q):
                spans = [range(lo)] * new_pos + [range(lo, hi)] + [range(hi)] * (q - new_pos - 1)
                for selection in itertools.product(*spans):
                    consider(rule_idx, selection)

    def pop_valid() -> tuple[int, int, tuple[int, ...]] | None:
        # Entries are pushed only when consistent and new; they can only go
        # stale by their pattern having been produced since.
        nonlocal duplicates
        while pending:
            if rng is None:
                entry = pending[0]
            else:
                entry = pending[rng.randrange(len(pending))]
            pattern = _mix_pattern(work, rules[entry[1]], entry[2])
            assert pattern is not None
            if work.has_pattern(pattern):
                duplicates += 1
                _discard(entry)
                continue
            return entry
        return None

    def _discard(entry) -> None:
        if rng is None:
            heapq.heappop(pending)
        else:
            pending.remove(entry)

    generate(0, len(work.rows))
    stop_reason = "fixpoint"
    max_dist = max((row.distinguished_count() for row in work.rows), default=0)

    while True:
        entry = pop_valid()
        if entry is None:
            break
        neg_dist, rule_idx, selection = entry
        if stop_when_no_gain and -neg_dist <= max_dist:
            stop_reason = "no_gain"
            break
        _discard(entry)
        rule = rules[rule_idx]
        pattern = _mix_pattern(work, rule, selection)
        assert pattern is not None
        if len(work.rows) + 1 > max_rows:
            raise ChaseRowLimitError(
                f"chase exceeded the {max_rows}-row cap before terminating", limit=max_rows
            )
        row = Row(pattern, _eq5_for(work, rule, selection, pattern))
        rid = work.add_row(row)
        steps.append(ChaseStep(rule, tuple(selection), row, rid))
        max_dist = max(max_dist, row.distinguished_count())
        if stop_at_distinguished and all(v.distinguished for v in pattern):
            stop_reason = "distinguished"
            break
        generate(rid, rid + 1)

    return ChaseTrace(initial=initial, steps=steps, final=work, stop_reason=stop_reason, duplicates=duplicates)


@dataclass(frozen=True)
class AtomRewrite:
    """A marginal-consistency rewrite applied while assembling a factorization."""

    original: MarginalAtom
    restricted: MarginalAtom
    summed: Variable

    def render(self) -> str:
        return f"rewrite: {self.original.render()} -> {self.restricted.render()} (sum over {self.summed.render()})"


@dataclass
class Verdict:
    """Outcome of an implication test.

    `trace` is the presentation derivation (hill-climbing prefix, stopped at
    the all-distinguished row when reached).  For negative verdicts
    `closure_trace` holds the continuation to the unrestricted fixpoint that
    certifies non-derivability.  `factorization` is the decomposable-product
    form of the all-distinguished row, with the atom rewrites used to reach
    it listed in `rewrites`.
    """

    holds: bool
    factorization: RationalExpression | None
    trace: ChaseTrace
    closure_trace: ChaseTrace | None = None
    rewrites: tuple[AtomRewrite, ...] = ()


def _atom_at(scheme: AttributeSet, row: Row, over: AttributeSet) -> MarginalAtom:
    cells = dict(zip(scheme, row.cells))
    return MarginalAtom.from_cells(over, cells)


def _marginalize_expr(
    expr: RationalExpression,
    row: Row,
    scheme: AttributeSet,
    onto: AttributeSet,
    rewrites: list[AtomRewrite],
) -> RationalExpression | None:
    """Sum the row's pattern variables outside `onto` out of `expr`, atom by atom.

    Succeeds only when each summed variable occurs in exactly one numerator
    atom instance and nowhere else; the sum then slides inside that atom and
    restricts it.  Returns None when any variable resists, in which case the
    caller falls back to the unexpanded marginal atom.
    """
    current = expr
    for a in scheme:
        if a in onto:
            continue
        v = row.cells[scheme.index(a)]
        in_den = sum(1 for at in current.denominator if v in at.pattern)
        holders = [i for i, at in enumerate(current.numerator) if v in at.pattern]
        if in_den or len(holders) != 1:
            return None
        i = holders[0]
        atom = current.numerator[i]
        restricted = restrict_atom(atom, atom.over - AttributeSet([a]))
        rewrites.append(AtomRewrite(atom, restricted, v))
        num = list(current.numerator)
        num[i] = restricted
        current = RationalExpression.of(num, current.denominator)
    return current


def factorization_for(trace: ChaseTrace) -> tuple[RationalExpression, tuple[AtomRewrite, ...]]:
    """Expand the all-distinguished row's derivation into its product form.

    Working down the derivation, each edge atom over a derived row is
    replaced by that row's own derivation expression marginalized onto the
    edge.  Atoms over initial rows reduce directly to marginal atoms.  The
    result only mentions distinguished variables, and on every relation
    satisfying the constraints it evaluates to the relation's weight.
    """
    final = trace.final
    scheme = final.scheme
    wd = final.distinguished_row()
    if not final.has_pattern(wd):
        raise ValueError("the final tableau has no all-distinguished row")
    derivations = {step.produced_id: step for step in trace.steps}
    rewrites: list[AtomRewrite] = []
    memo: dict[tuple[int, AttributeSet], RationalExpression] = {}

    def expr_for(rid: int, onto: AttributeSet) -> RationalExpression:
        key = (rid, onto)
        if key in memo:
            return memo[key]
        row = final.rows[rid]
        step = derivations.get(rid)
        if step is None:
            result = RationalExpression.atom(_atom_at(scheme, row, onto))
        else:
            e = RationalExpression.of()
            for edge, k in zip(step.rule.edges_in_order, step.selection):
                e = e * expr_for(k, edge)
            e = e * RationalExpression.of((), [_atom_at(scheme, row, s) for s in step.rule.interactions])
            if onto == scheme:
                result = e
            else:
                reduced = _marginalize_expr(e, row, scheme, onto, rewrites)
                result = reduced if reduced is not None else RationalExpression.atom(
                    _atom_at(scheme, row, onto)
                )
        memo[key] = result
        return result

    expression = expr_for(final.row_id(wd), scheme)
    return expression, tuple(rewrites)


def implies(
    constraints: Iterable[Gajd | JRule],
    target: Gajd,
    *,
    max_rows: int = DEFAULT_MAX_ROWS,
) -> Verdict:
    """Decide whether the constraints logically imply the target dependency.

    The target holds exactly when the all-distinguished row is derivable in
    the chase of the target's tableau under the constraint rules.  The
    presentation trace is the hill-climbing prefix; when it does not reach
    the all-distinguished row, the unrestricted closure decides the verdict
    and is attached as `closure_trace`.
    """
    rules = _as_rules(constraints)
    for rule in rules:
        if rule.gajd.scheme != target.scheme:
            raise SchemeError(
                f"constraint {rule.name} is over {rule.gajd.scheme.render()} but the target "
                f"scheme is {target.scheme.render()}; constraints must cover the full scheme "
                "(implicit padding is not performed)"
            )
    t = build_tr(target)
    if t.contains_distinguished_row():
        trace = ChaseTrace(initial=t.copy(), steps=[], final=t.copy(), stop_reason="distinguished")
        expression, rewrites = factorization_for(trace)
        return Verdict(True, expression, trace, None, rewrites)

    prefix = chase(t, rules, stop_at_distinguished=True, stop_when_no_gain=True, max_rows=max_rows)
    if prefix.final.contains_distinguished_row():
        expression, rewrites = factorization_for(prefix)
        return Verdict(True, expression, prefix, None, rewrites)

    closure = chase(prefix.final, rules, stop_at_distinguished=True, max_rows=max_rows)
    if closure.final.contains_distinguished_row():
        merged = ChaseTrace(
            initial=prefix.initial,
            steps=prefix.steps + closure.steps,
            final=closure.final,
            stop_reason=closure.stop_reason,
            duplicates=prefix.duplicates + closure.duplicates,
        )
        expression, rewrites = factorization_for(merged)
        return Verdict(True, expression, merged, None, rewrites)
    return Verdict(False, None, prefix, closure, ())
