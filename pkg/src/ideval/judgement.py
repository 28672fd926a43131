"""Equivalence judgements: sampling pairs, ingesting verdicts, estimating.

When no full ideal partition exists, quality is estimated from human
verdicts on sampled element pairs. Anchors are drawn proportional to
weight x jaccard distance (elements that matter and changed), partners
weight-proportional from the symmetric difference of the anchor's two
clusters. Pairs touching a synthetic id element are auto-judged distinct:
a freshly minted id carries no evidence of belonging with anything.

Pair files are TSVs with columns left, right, verdict, source; verdicts
arrive as TSVs with columns left, right, verdict. Verdict tokens are
``equiv``, ``distinct``, ``unsure`` (plus ``unjudged`` for sampled pairs
still waiting). Later verdict rows supersede earlier ones, so a verdict
file can be maintained append-only.
"""

from __future__ import annotations

import math
import random
from bisect import bisect_left
from collections import deque
from dataclasses import dataclass, replace
from enum import Enum
from itertools import accumulate

from ._backend import full_sums
from .errors import (
    InputError,
    InsufficientCoverage,
    JudgementConflict,
    NothingToSample,
    ParseError,
    UnknownElement,
    UnknownPair,
)
from .metrics import (
    Distances,
    ImpactMetrics,
    MetricsReport,
    QualityMetrics,
    compute_iq,
    pointwise_impact,
)
from .model import (
    KIND_SYNTHETIC,
    ElementRef,
    element_key,
    parse_element_key,
    sorted_elements,
)
from .transform import EvalInputs

MAX_REPORTED_CONFLICTS = 20


class Verdict(Enum):
    UNJUDGED = "unjudged"
    EQUIVALENT = "equiv"
    DISTINCT = "distinct"
    DISCARDED = "unsure"


class Source(Enum):
    PENDING = "pending"
    AUTO = "auto"
    HUMAN = "human"


_JUDGED = (Verdict.EQUIVALENT, Verdict.DISTINCT)


@dataclass(frozen=True)
class JudgementPair:
    """A canonical (left < right by element key) pair with its verdict."""

    left: ElementRef
    right: ElementRef
    verdict: Verdict = Verdict.UNJUDGED
    source: Source = Source.PENDING


def make_pair(
    a: ElementRef,
    b: ElementRef,
    verdict: Verdict = Verdict.UNJUDGED,
    source: Source = Source.PENDING,
) -> JudgementPair:
    if a == b:
        raise InputError(f"a pair needs two distinct elements, got {a.key()}")
    if element_key(a) > element_key(b):
        a, b = b, a
    return JudgementPair(a, b, verdict, source)


@dataclass(frozen=True)
class JudgementSet:
    """An ordered, duplicate-free collection of judgement pairs."""

    pairs: tuple[JudgementPair, ...]
    seed: int | None = None

    def judged(self) -> tuple[JudgementPair, ...]:
        return tuple(p for p in self.pairs if p.verdict in _JUDGED)

    def coverage_weight(self, inputs: EvalInputs) -> float:
        covered = set()
        for pair in self.judged():
            covered.add(pair.left)
            covered.add(pair.right)
        return math.fsum(inputs.weights[e] for e in covered)


def auto_judge(pairs: tuple[JudgementPair, ...]) -> tuple[JudgementPair, ...]:
    """Mark every pair with a synthetic-id side as distinct. Idempotent."""
    out = []
    for pair in pairs:
        if pair.verdict is Verdict.UNJUDGED and (
            pair.left.kind == KIND_SYNTHETIC or pair.right.kind == KIND_SYNTHETIC
        ):
            pair = replace(pair, verdict=Verdict.DISTINCT, source=Source.AUTO)
        out.append(pair)
    return tuple(out)


def _weighted_chooser(elements, masses):
    cum = list(accumulate(masses))
    total = cum[-1]

    def choose(rng: random.Random):
        return elements[bisect_left(cum, rng.random() * total)]

    return choose, total


def sample_pairs(inputs: EvalInputs, n_pairs: int, seed: int) -> JudgementSet:
    """Draw up to n_pairs distinct pairs for judgement.

    Fewer pairs are returned when the universe cannot yield n_pairs
    distinct ones within a bounded number of draws.
    """
    if n_pairs < 1:
        raise InputError("n_pairs must be at least 1")
    elements = inputs.elements
    masses = []
    for element in elements:
        jd, _, _ = pointwise_impact(
            inputs.base_index, inputs.exp_index, inputs.weights, element
        )
        masses.append(inputs.weights[element] * jd)
    if not any(m > 0 for m in masses):
        raise NothingToSample(
            "base and experiment clusterings are identical; nothing to judge"
        )
    choose_anchor, _ = _weighted_chooser(elements, masses)

    rng = random.Random(seed)
    chosen: set[tuple[ElementRef, ElementRef]] = set()
    attempts_left = 50 * n_pairs + 100
    while len(chosen) < n_pairs and attempts_left > 0:
        attempts_left -= 1
        anchor = choose_anchor(rng)
        diff = sorted_elements(
            inputs.base_index.members_of(anchor)
            ^ inputs.exp_index.members_of(anchor)
        )
        if not diff:
            continue
        choose_partner, _ = _weighted_chooser(
            diff, [inputs.weights[e] for e in diff]
        )
        partner = choose_partner(rng)
        pair = make_pair(anchor, partner)
        chosen.add((pair.left, pair.right))

    pairs = tuple(
        JudgementPair(left, right)
        for left, right in sorted(
            chosen, key=lambda lr: (element_key(lr[0]), element_key(lr[1]))
        )
    )
    return JudgementSet(pairs=auto_judge(pairs), seed=seed)


# --- pair and verdict files --------------------------------------------------

def write_pairs_tsv(path, judgements: JudgementSet) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# left\tright\tverdict\tsource\n")
        for pair in judgements.pairs:
            fh.write(
                f"{element_key(pair.left)}\t{element_key(pair.right)}\t"
                f"{pair.verdict.value}\t{pair.source.value}\n"
            )


def _parse_pair_elements(path, line_no, left_text, right_text):
    try:
        left = parse_element_key(left_text)
        right = parse_element_key(right_text)
    except ValueError as exc:
        raise ParseError(path, line_no, str(exc)) from None
    if left == right:
        raise ParseError(path, line_no, "pair elements must differ")
    return left, right


def _parse_verdict(path, line_no, token) -> Verdict:
    try:
        return Verdict(token)
    except ValueError:
        raise ParseError(path, line_no, f"unknown verdict {token!r}") from None


def read_pairs_tsv(path) -> JudgementSet:
    from .io import _rows  # same framing as every other TSV

    pairs: dict[tuple[ElementRef, ElementRef], JudgementPair] = {}
    for line_no, fields in _rows(path):
        if len(fields) != 4:
            raise ParseError(
                path, line_no, "expected left\tright\tverdict\tsource"
            )
        left, right = _parse_pair_elements(path, line_no, fields[0], fields[1])
        verdict = _parse_verdict(path, line_no, fields[2])
        try:
            source = Source(fields[3])
        except ValueError:
            raise ParseError(
                path, line_no, f"unknown source {fields[3]!r}"
            ) from None
        pair = make_pair(left, right, verdict, source)
        key = (pair.left, pair.right)
        if key in pairs:
            raise ParseError(
                path, line_no,
                f"duplicate pair {element_key(left)} / {element_key(right)}",
            )
        pairs[key] = pair
    ordered = tuple(
        pairs[k]
        for k in sorted(pairs, key=lambda lr: (element_key(lr[0]), element_key(lr[1])))
    )
    return JudgementSet(pairs=ordered)


def ingest_verdicts(pairs_path, verdicts_path=None) -> JudgementSet:
    """Load a pair file and fold in a verdict file on top of it.

    Verdict rows must reference sampled pairs; the latest row for a pair
    wins. Rows with verdict ``unsure`` discard the pair from estimation.
    """
    from .io import _rows

    judgements = read_pairs_tsv(pairs_path)
    if verdicts_path is None:
        return judgements
    by_key = {(p.left, p.right): p for p in judgements.pairs}
    for line_no, fields in _rows(verdicts_path):
        if len(fields) != 3:
            raise ParseError(verdicts_path, line_no, "expected left\tright\tverdict")
        left, right = _parse_pair_elements(
            verdicts_path, line_no, fields[0], fields[1]
        )
        verdict = _parse_verdict(verdicts_path, line_no, fields[2])
        if verdict is Verdict.UNJUDGED:
            raise ParseError(
                verdicts_path, line_no, "verdict rows cannot be 'unjudged'"
            )
        canon = make_pair(left, right)
        key = (canon.left, canon.right)
        if key not in by_key:
            raise UnknownPair(
                f"{verdicts_path}:{line_no}: verdict for unsampled pair "
                f"{element_key(canon.left)} / {element_key(canon.right)}"
            )
        by_key[key] = replace(by_key[key], verdict=verdict, source=Source.HUMAN)
    ordered = tuple(
        by_key[k]
        for k in sorted(by_key, key=lambda lr: (element_key(lr[0]), element_key(lr[1])))
    )
    return JudgementSet(pairs=ordered, seed=judgements.seed)


# --- consistency and estimation ----------------------------------------------

class _UnionFind:
    def __init__(self):
        self.parent: dict[ElementRef, ElementRef] = {}

    def add(self, x: ElementRef) -> None:
        self.parent.setdefault(x, x)

    def find(self, x: ElementRef) -> ElementRef:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: ElementRef, b: ElementRef) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def find_inconsistencies(
    judgements: JudgementSet,
) -> list[tuple[ElementRef, ElementRef, tuple[ElementRef, ...]]]:
    """Distinct pairs contradicted by a chain of equivalences.

    Returns up to MAX_REPORTED_CONFLICTS entries (left, right, chain),
    where chain is an equivalence path connecting left to right.
    """
    uf = _UnionFind()
    adjacency: dict[ElementRef, list[ElementRef]] = {}
    for pair in judgements.pairs:
        if pair.verdict is Verdict.EQUIVALENT:
            uf.add(pair.left)
            uf.add(pair.right)
            uf.union(pair.left, pair.right)
            adjacency.setdefault(pair.left, []).append(pair.right)
            adjacency.setdefault(pair.right, []).append(pair.left)

    conflicts = []
    for pair in judgements.pairs:
        if pair.verdict is not Verdict.DISTINCT:
            continue
        if pair.left not in uf.parent or pair.right not in uf.parent:
            continue
        if uf.find(pair.left) != uf.find(pair.right):
            continue
        conflicts.append(
            (pair.left, pair.right, _equivalence_chain(adjacency, pair))
        )
        if len(conflicts) >= MAX_REPORTED_CONFLICTS:
            break
    return conflicts


def _equivalence_chain(adjacency, pair) -> tuple[ElementRef, ...]:
    seen = {pair.left: None}
    queue = deque([pair.left])
    while queue:
        node = queue.popleft()
        if node == pair.right:
            chain = [node]
            while seen[chain[-1]] is not None:
                chain.append(seen[chain[-1]])
            return tuple(reversed(chain))
        for neighbor in sorted(adjacency.get(node, ()), key=element_key):
            if neighbor not in seen:
                seen[neighbor] = node
                queue.append(neighbor)
    return ()


def estimate_quality_from_judgements(
    inputs: EvalInputs, judgements: JudgementSet
) -> MetricsReport:
    """Quality metrics over the judged subset of the universe.

    Judged pairs induce a partial ideal: equivalence classes are the
    connected components of the equivalent-pairs graph, everything else in
    the judged set stays separate. All three clusterings are restricted to
    the judged elements, and metrics are averaged over exactly that set,
    so with full coverage the estimate equals the exact quality report.
    """
    conflicts = find_inconsistencies(judgements)
    if conflicts:
        left, right, chain = conflicts[0]
        raise JudgementConflict(
            f"{len(conflicts)}+ contradictions; e.g. {element_key(left)} and "
            f"{element_key(right)} are judged distinct but linked via "
            + " -> ".join(element_key(e) for e in chain),
            triangles=conflicts,
        )

    judged = judgements.judged()
    if not judged:
        raise InsufficientCoverage("no judged pairs; nothing to estimate from")

    universe = set(inputs.elements)
    uf = _UnionFind()
    covered: set[ElementRef] = set()
    for pair in judged:
        for element in (pair.left, pair.right):
            if element not in universe:
                raise UnknownElement(
                    f"judged pair references {element_key(element)}, which is "
                    "not in the evaluation universe"
                )
            uf.add(element)
            covered.add(element)
        if pair.verdict is Verdict.EQUIVALENT:
            uf.union(pair.left, pair.right)

    elements = sorted_elements(covered)
    base_owner = inputs.base_index.owner_map()
    exp_owner = inputs.exp_index.owner_map()

    def codes(owner_of) -> tuple[list[int], int]:
        raw = [owner_of(e) for e in elements]
        ids = sorted(set(raw))
        code = {cid: j for j, cid in enumerate(ids)}
        return [code[c] for c in raw], len(ids)

    b, nb = codes(lambda e: base_owner[e])
    e, ne = codes(lambda e: exp_owner[e])
    i, ni = codes(lambda e: element_key(uf.find(e)))
    w = [inputs.weights[el] for el in elements]

    (jd_s, sp_s, mg_s, gs_s, bs_s, gm_s, bm_s,
     dp_s, dr_s, dbi_s, dei_s, covered_w) = full_sums(b, e, i, w, nb, ne, ni)
    distances = Distances(
        dbi_s / covered_w, dei_s / covered_w, jd_s / covered_w
    )
    return MetricsReport(
        impact=ImpactMetrics(
            jd_s / covered_w, sp_s / covered_w, mg_s / covered_w
        ),
        total_weight=inputs.total_weight(),
        quality=QualityMetrics(
            good_split_rate=gs_s / covered_w,
            bad_split_rate=bs_s / covered_w,
            good_merge_rate=gm_s / covered_w,
            bad_merge_rate=bm_s / covered_w,
            delta_precision=dp_s / covered_w,
            delta_recall=dr_s / covered_w,
            iq=compute_iq(
                distances.base_to_ideal,
                distances.exp_to_ideal,
                distances.base_to_exp,
            ),
        ),
        distances=distances,
        estimate=True,
        coverage_weight=covered_w,
    )
