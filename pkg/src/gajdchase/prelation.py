"""Weighted relations and the marginalize/product-join algebra.

A weighted relation is a finite table of tuples over an attribute set with
one nonnegative weight per tuple; a probability distribution is the special
case where the weights sum to one.  On top of plain marginalization and
product join, the monotone join of two relations divides out the marginal of
their shared attributes, which makes the two-operand case exactly
conditional independence given the intersection.  A generalized acyclic join
dependency (GAJD) asserts that a relation equals the left-to-right monotone
join of its marginals over a hypertree's edges.

Zero handling: the inverse relation is defined only where the weight is
nonzero, so zero-weight tuples are dropped by `inverse` and, consequently,
tuples whose intersection marginal vanishes are dropped by `monotone_join`.
The numeric oracle works with strictly positive distributions, keeping every
operation exact; the zero-drop rule is the documented extension outside that
regime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product as iterproduct
from typing import Iterable, Iterator, Mapping, NamedTuple

from .errors import SchemeError, NotHypertreeError
from .hypergraph import (
    AttributeSet,
    Hypergraph,
    HypertreeCertificate,
    InteractionSet,
    NotHypertree,
    find_certificate,
    interaction_set,
    validate_certificate,
)

ValueTuple = tuple[str, ...]


@dataclass(frozen=True)
class DomainSpec:
    """Finite value domains, one label list per attribute."""

    domains: Mapping[str, tuple[str, ...]]

    def __post_init__(self):
        for attr, labels in self.domains.items():
            if not labels:
                raise ValueError(f"domain of {attr} must be nonempty")
            if len(set(labels)) != len(labels):
                raise ValueError(f"domain of {attr} has duplicate labels")

    @classmethod
    def uniform(cls, attrs: Iterable[str], size: int = 2) -> "DomainSpec":
        return cls({a: tuple(str(i) for i in range(size)) for a in attrs})

    @classmethod
    def with_sizes(cls, attrs: Iterable[str], sizes: Mapping[str, int], default: int = 2) -> "DomainSpec":
        return cls({a: tuple(str(i) for i in range(sizes.get(a, default))) for a in attrs})

    @property
    def scheme(self) -> AttributeSet:
        return AttributeSet(self.domains.keys())

    def labels(self, attr: str) -> tuple[str, ...]:
        return tuple(self.domains[attr])

    def table_size(self, scheme: AttributeSet | None = None) -> int:
        scheme = scheme if scheme is not None else self.scheme
        return math.prod(len(self.domains[a]) for a in scheme)

    def tuples(self, scheme: AttributeSet | None = None) -> Iterator[ValueTuple]:
        """All value tuples over `scheme`, attributes in canonical order, labels in declared order."""
        scheme = scheme if scheme is not None else self.scheme
        yield from iterproduct(*(self.domains[a] for a in scheme))


class WeightedRelation:
    """A finite map from value tuples over a scheme to nonnegative weights.

    Tuples are keyed by value tuples aligned with the scheme's canonical
    attribute order.  Instances are treated as immutable; every operation
    returns a new relation.  A tuple absent from the table carries weight 0.
    """

    __slots__ = ("scheme", "_rows")

    def __init__(self, scheme: AttributeSet, rows: Mapping[ValueTuple, float]):
        width = len(scheme)
        table: dict[ValueTuple, float] = {}
        for key, w in rows.items():
            key = tuple(key)
            if len(key) != width:
                raise SchemeError(f"tuple {key!r} does not match scheme {scheme.render()}")
            w = float(w)
            if not math.isfinite(w) or w < 0.0:
                raise ValueError(f"weight for {key!r} must be finite and nonnegative, got {w}")
            if key in table:
                raise ValueError(f"duplicate tuple {key!r}")
            table[key] = w
        self.scheme = scheme
        self._rows = table

    def items(self) -> Iterator[tuple[ValueTuple, float]]:
        return iter(self._rows.items())

    def keys(self) -> Iterator[ValueTuple]:
        return iter(self._rows.keys())

    def weight(self, key: ValueTuple) -> float:
        return self._rows.get(tuple(key), 0.0)

    def __len__(self) -> int:
        return len(self._rows)

    def __contains__(self, key: object) -> bool:
        return key in self._rows

    def total(self) -> float:
        return math.fsum(self._rows.values())

    def is_normalized(self, tol: float = 1e-12) -> bool:
        return abs(self.total() - 1.0) <= tol

    def min_weight(self) -> float:
        return min(self._rows.values(), default=0.0)

    def scaled(self, factor: float) -> "WeightedRelation":
        return WeightedRelation(self.scheme, {k: w * factor for k, w in self._rows.items()})

    def max_abs_diff(self, other: "WeightedRelation") -> float:
        """Largest pointwise weight difference; missing tuples count as 0."""
        if self.scheme != other.scheme:
            raise SchemeError("cannot compare relations over different schemes")
        keys = set(self._rows) | set(other._rows)
        return max((abs(self.weight(k) - other.weight(k)) for k in keys), default=0.0)

    def __repr__(self) -> str:
        return f"WeightedRelation({self.scheme.render()}, {len(self._rows)} rows)"

    def to_text(self) -> str:
        """Serialize as a header of attribute names plus `f`, one tuple per line.

        Weights are printed with 17 significant digits so a round trip is
        value-exact for binary64.
        """
        lines = [" ".join(list(self.scheme) + ["f"])]
        for key in sorted(self._rows):
            lines.append(" ".join(list(key) + [format(self._rows[key], ".17g")]))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "WeightedRelation":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty relation text")
        header = lines[0].split()
        if not header or header[-1] != "f":
            raise ValueError("header must end with the weight column `f`")
        scheme = AttributeSet(header[:-1])
        if list(scheme) != header[:-1]:
            raise ValueError("header attributes must be listed in canonical sorted order")
        rows: dict[ValueTuple, float] = {}
        for ln in lines[1:]:
            parts = ln.split()
            if len(parts) != len(header):
                raise ValueError(f"row {ln!r} does not match the header width")
            rows[tuple(parts[:-1])] = float(parts[-1])
        return cls(scheme, rows)


def relation_from_domains(domains: DomainSpec, weights: Iterable[float]) -> WeightedRelation:
    """Dense relation over the full domain product, weights in tuple-iteration order."""
    keys = list(domains.tuples())
    ws = list(weights)
    if len(ws) != len(keys):
        raise ValueError(f"expected {len(keys)} weights, got {len(ws)}")
    return WeightedRelation(domains.scheme, dict(zip(keys, ws)))


def _projector(src: AttributeSet, dst: AttributeSet):
    idx = [src.index(a) for a in dst]
    return lambda key: tuple(key[i] for i in idx)


def marginalize(rel: WeightedRelation, onto: AttributeSet) -> WeightedRelation:
    """Sum weights over the attributes outside `onto`; total mass is preserved."""
    if not onto <= rel.scheme:
        raise SchemeError(f"{onto.render()} is not a subset of {rel.scheme.render()}")
    proj = _projector(rel.scheme, onto)
    acc: dict[ValueTuple, float] = {}
    for key, w in rel.items():
        p = proj(key)
        acc[p] = acc.get(p, 0.0) + w
    return WeightedRelation(onto, acc)


def product_join(p: WeightedRelation, q: WeightedRelation) -> WeightedRelation:
    """Natural join of the tuple sets with pointwise multiplied weights."""
    shared = p.scheme & q.scheme
    out_scheme = p.scheme | q.scheme
    proj_p = _projector(p.scheme, shared)
    proj_q = _projector(q.scheme, shared)
    by_shared: dict[ValueTuple, list[tuple[ValueTuple, float]]] = {}
    for qk, qw in q.items():
        by_shared.setdefault(proj_q(qk), []).append((qk, qw))
    pos: dict[str, tuple[int, int]] = {}
    for a in out_scheme:
        if a in p.scheme:
            pos[a] = (0, p.scheme.index(a))
        else:
            pos[a] = (1, q.scheme.index(a))
    layout = [pos[a] for a in out_scheme]
    rows: dict[ValueTuple, float] = {}
    for pk, pw in p.items():
        for qk, qw in by_shared.get(proj_p(pk), []):
            key = tuple((pk, qk)[side][i] for side, i in layout)
            rows[key] = pw * qw
    return WeightedRelation(out_scheme, rows)


def inverse(rel: WeightedRelation) -> WeightedRelation:
    """Reciprocal weights; tuples with weight 0 are dropped."""
    return WeightedRelation(rel.scheme, {k: 1.0 / w for k, w in rel.items() if w != 0.0})


def monotone_join(p: WeightedRelation, q: WeightedRelation) -> WeightedRelation:
    """Product join of p and q divided by the marginal of q on the shared attributes.

    Taking the intersection marginal from the second operand is a fixed
    convention; when p and q are marginals of one joint both choices agree.
    Tuples whose intersection marginal is zero are dropped.
    """
    shared = p.scheme & q.scheme
    return product_join(product_join(p, q), inverse(marginalize(q, shared)))


@dataclass(frozen=True)
class Gajd:
    """A generalized acyclic join dependency: a hypertree over the full scheme.

    The certificate is validated at construction, so downstream code can rely
    on the ordering and branching without re-checking.
    """

    hypergraph: Hypergraph
    certificate: HypertreeCertificate | None = None

    def __post_init__(self):
        cert = self.certificate
        if cert is None:
            found = find_certificate(self.hypergraph)
            if isinstance(found, NotHypertree):
                edges = ", ".join(self.hypergraph.edges[i].render() for i in found.witness)
                raise NotHypertreeError(
                    f"no tree construction ordering exists; stuck edges: {edges}",
                    witness=found.witness,
                )
            cert = found
            object.__setattr__(self, "certificate", cert)
        else:
            validate_certificate(self.hypergraph, cert)

    @classmethod
    def from_edges(cls, edges: Iterable[Iterable[str]], certificate: HypertreeCertificate | None = None) -> "Gajd":
        return cls(Hypergraph(edges), certificate)

    @property
    def scheme(self) -> AttributeSet:
        return self.hypergraph.nodes

    @property
    def edges_in_order(self) -> tuple[AttributeSet, ...]:
        return tuple(self.hypergraph.edges[i] for i in self.certificate.ordering)

    @property
    def interactions(self) -> InteractionSet:
        return interaction_set(self.certificate, self.hypergraph)

    def render(self) -> str:
        return "(x)" + self.hypergraph.render()


def mpj_map(rel: WeightedRelation, g: Gajd) -> WeightedRelation:
    """Left fold of the monotone join over the marginals in certificate order."""
    if rel.scheme != g.scheme:
        raise SchemeError(
            f"relation scheme {rel.scheme.render()} does not match constraint scheme {g.scheme.render()}"
        )
    edges = g.edges_in_order
    acc = marginalize(rel, edges[0])
    for edge in edges[1:]:
        acc = monotone_join(acc, marginalize(rel, edge))
    return acc


class SatisfiesResult(NamedTuple):
    holds: bool
    residual: float


def satisfies(rel: WeightedRelation, g: Gajd, tol: float = 1e-12) -> SatisfiesResult:
    """Whether `rel` is a fixed point of its own marginalize/product-join map, within `tol`."""
    residual = rel.max_abs_diff(mpj_map(rel, g))
    return SatisfiesResult(residual <= tol, residual)


def ci_residual(rel: WeightedRelation, x: AttributeSet, y: AttributeSet) -> float:
    """Residual of the two-edge dependency over {x, y}: independence of x and y given x ∩ y."""
    if (x | y) != rel.scheme:
        raise SchemeError(
            f"{x.render()} and {y.render()} must cover the scheme {rel.scheme.render()}"
        )
    return satisfies(rel, Gajd.from_edges([x, y])).residual
