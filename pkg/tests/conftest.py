import itertools
import random
from pathlib import Path

import pytest

from gajdchase import (
    AttributeSet,
    Gajd,
    HypertreeCertificate,
    NotHypertreeError,
    WeightedRelation,
    is_twig,
    validate_certificate,
)

GOLDEN_DIR = Path(__file__).parent / "golden"


@pytest.fixture
def golden_dir() -> Path:
    return GOLDEN_DIR


def covering_hypertrees(attrs, max_edges):
    """Every hypertree whose edges cover `attrs`, with at most `max_edges` edges."""
    universe = list(attrs)
    subsets = []
    for r in range(1, len(universe) + 1):
        subsets.extend(tuple(c) for c in itertools.combinations(universe, r))
    found = []
    for k in range(1, max_edges + 1):
        for combo in itertools.combinations(subsets, k):
            if set().union(*(set(e) for e in combo)) != set(universe):
                continue
            try:
                found.append(Gajd.from_edges(combo))
            except NotHypertreeError:
                continue
    return found


def random_hypertree(attrs, max_edges, rng):
    """One random covering hypertree, by rejection sampling over edge sets."""
    universe = list(attrs)
    subsets = []
    for r in range(1, len(universe) + 1):
        subsets.extend(tuple(c) for c in itertools.combinations(universe, r))
    while True:
        k = rng.randint(1, max_edges)
        combo = rng.sample(subsets, k)
        if set().union(*(set(e) for e in combo)) != set(universe):
            continue
        try:
            return Gajd.from_edges(combo)
        except NotHypertreeError:
            continue


def random_certificate(g: Gajd, rng: random.Random) -> HypertreeCertificate:
    """A uniformly scrambled valid certificate: random twig removal, random branch choice."""
    h = g.hypergraph
    n = len(h.edges)
    remaining = list(range(n))
    removal = []
    while len(remaining) > 1:
        twigs = [e for e in remaining if is_twig(h, e, remaining).is_twig]
        pick = rng.choice(twigs)
        removal.append(pick)
        remaining.remove(pick)
    ordering = tuple(remaining + list(reversed(removal)))
    branching: list[int | None] = [None] * n
    for i in range(1, n):
        cand = h.edges[ordering[i]]
        prefix = AttributeSet.union(h.edges[ordering[k]] for k in range(i))
        needed = prefix & cand
        options = [j for j in range(i) if (h.edges[ordering[j]] & cand) == needed]
        branching[i] = rng.choice(options)
    cert = HypertreeCertificate(ordering, tuple(branching))
    validate_certificate(h, cert)
    return cert


def reverse_greedy_certificate(g: Gajd) -> HypertreeCertificate:
    """A second deterministic strategy: remove the largest-index twig, pick the largest branch."""
    h = g.hypergraph
    n = len(h.edges)
    remaining = list(range(n))
    removal = []
    while len(remaining) > 1:
        twigs = [e for e in remaining if is_twig(h, e, remaining).is_twig]
        pick = max(twigs)
        removal.append(pick)
        remaining.remove(pick)
    ordering = tuple(remaining + list(reversed(removal)))
    branching: list[int | None] = [None] * n
    for i in range(1, n):
        cand = h.edges[ordering[i]]
        prefix = AttributeSet.union(h.edges[ordering[k]] for k in range(i))
        needed = prefix & cand
        options = [j for j in range(i) if (h.edges[ordering[j]] & cand) == needed]
        branching[i] = max(options)
    cert = HypertreeCertificate(ordering, tuple(branching))
    validate_certificate(h, cert)
    return cert


def brute_marginal(rel: WeightedRelation, onto: AttributeSet) -> dict:
    """Independent marginalization: direct summation, no library reuse."""
    positions = [list(rel.scheme).index(a) for a in onto]
    out: dict = {}
    for key, w in rel.items():
        sub = tuple(key[i] for i in positions)
        out[sub] = out.get(sub, 0.0) + w
    return out


# Golden problem: the four-attribute chain target with its two covering splits.
CHAIN4_ATTRS = ["A1", "A2", "A3", "A4"]
CHAIN4_TARGET = [["A1", "A2"], ["A2", "A3"], ["A3", "A4"]]
CHAIN4_LEFT_SPLIT = [["A1", "A2"], ["A2", "A3", "A4"]]
CHAIN4_RIGHT_SPLIT = [["A1", "A2", "A3"], ["A3", "A4"]]

CHAIN4_PROBLEM = """\
attrs A1 A2 A3 A4
gajd C1 = {A1 A2} {A2 A3 A4}
gajd C2 = {A1 A2 A3} {A3 A4}
query {A1 A2} {A2 A3} {A3 A4} given C1 C2
"""

CHAIN4_NEGATIVE_PROBLEM = """\
attrs A1 A2 A3 A4
gajd C1 = {A1 A2} {A2 A3 A4}
query {A1 A2} {A2 A3} {A3 A4} given C1
"""


@pytest.fixture
def chain4():
    target = Gajd.from_edges(CHAIN4_TARGET)
    left = Gajd.from_edges(CHAIN4_LEFT_SPLIT)
    right = Gajd.from_edges(CHAIN4_RIGHT_SPLIT)
    return target, left, right
