"""Core data model: elements, weighted clusterings, membership indexes.

The evaluation universe mixes three kinds of elements:

* current items (``cur``)  - items being clustered in the run under test,
* historical items (``hist``) - items from a labeled historical epoch,
* synthetic ids (``id``)   - placeholder elements that stand in for a
  cluster id with no historical members.

Every element has a stable text key (``cur:<item>``, ``hist:<epoch>:<item>``,
``id:<cluster_id>``) used for files, sorting, and reports. All summation
over elements happens in canonical key order so that repeated runs are
bit-for-bit reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, NamedTuple

from .errors import InvalidClustering, MissingWeight, UnknownElement

KIND_CURRENT = "cur"
KIND_HISTORICAL = "hist"
KIND_SYNTHETIC = "id"

_KINDS = (KIND_CURRENT, KIND_HISTORICAL, KIND_SYNTHETIC)

# Violations are reported per category, capped so a hopeless input cannot
# produce an unbounded report.
MAX_VIOLATIONS_PER_CATEGORY = 1000


class ElementRef(NamedTuple):
    """One element of the evaluation universe.

    ``epoch`` is empty unless ``kind`` is historical; historical items from
    different epochs are distinct elements even when ``external_id`` matches.
    """

    kind: str
    epoch: str
    external_id: str

    @classmethod
    def current(cls, item_id: str) -> "ElementRef":
        return cls(KIND_CURRENT, "", item_id)

    @classmethod
    def historical(cls, epoch: str, item_id: str) -> "ElementRef":
        return cls(KIND_HISTORICAL, epoch, item_id)

    @classmethod
    def synthetic(cls, cluster_id: str) -> "ElementRef":
        return cls(KIND_SYNTHETIC, "", cluster_id)

    def key(self) -> str:
        if self.kind == KIND_HISTORICAL:
            return f"hist:{self.epoch}:{self.external_id}"
        return f"{self.kind}:{self.external_id}"


def element_key(element: ElementRef) -> str:
    return element.key()


def parse_element_key(key: str) -> ElementRef:
    """Inverse of :meth:`ElementRef.key`.

    Raises ValueError for malformed keys; callers that read files wrap the
    failure in a ParseError carrying the line number.
    """
    kind, sep, rest = key.partition(":")
    if not sep or not rest:
        raise ValueError(f"malformed element key: {key!r}")
    if kind == KIND_HISTORICAL:
        epoch, sep, item = rest.partition(":")
        if not sep or not item:
            raise ValueError(f"malformed historical element key: {key!r}")
        return ElementRef(KIND_HISTORICAL, epoch, item)
    if kind in (KIND_CURRENT, KIND_SYNTHETIC):
        return ElementRef(kind, "", rest)
    raise ValueError(f"unknown element kind in key: {key!r}")


def sorted_elements(elements: Iterable[ElementRef]) -> list[ElementRef]:
    """Canonical universe order: ascending by text key."""
    return sorted(elements, key=element_key)


@dataclass(frozen=True)
class LabeledClustering:
    """A partition of elements into clusters keyed by cluster id.

    ``epoch`` is a human-readable tag for where the clustering came from
    (an epoch label for historical clusterings, empty for current ones).
    It carries no semantics beyond reporting.
    """

    clusters: Mapping[str, frozenset[ElementRef]]
    epoch: str = ""

    def iter_elements(self) -> Iterator[ElementRef]:
        for members in self.clusters.values():
            yield from members

    def element_count(self) -> int:
        return sum(len(m) for m in self.clusters.values())

    def partition(self) -> frozenset[frozenset[ElementRef]]:
        """The cluster contents with ids erased."""
        return frozenset(self.clusters.values())


def clustering_from_pairs(
    pairs: Iterable[tuple[str, ElementRef]], epoch: str = ""
) -> LabeledClustering:
    clusters: dict[str, set[ElementRef]] = {}
    for cluster_id, element in pairs:
        clusters.setdefault(cluster_id, set()).add(element)
    return LabeledClustering(
        {cid: frozenset(members) for cid, members in clusters.items()}, epoch
    )


@dataclass
class ValidationReport:
    """Partition violations found in a candidate clustering.

    Violations are data, not control flow: callers decide whether to raise.
    Each category keeps at most MAX_VIOLATIONS_PER_CATEGORY entries; the
    counts are always exact.
    """

    violations: dict[str, list[str]] = field(default_factory=dict)
    counts: dict[str, int] = field(default_factory=dict)

    def add(self, category: str, detail: str) -> None:
        self.counts[category] = self.counts.get(category, 0) + 1
        bucket = self.violations.setdefault(category, [])
        if len(bucket) < MAX_VIOLATIONS_PER_CATEGORY:
            bucket.append(detail)

    def ok(self) -> bool:
        return not self.counts

    def summary(self) -> str:
        if self.ok():
            return "valid"
        parts = [f"{cat}={n}" for cat, n in sorted(self.counts.items())]
        return "invalid: " + ", ".join(parts)


def validate_cluster_records(
    records: Iterable[tuple[str, frozenset[ElementRef]]]
) -> ValidationReport:
    """Validate raw (cluster_id, members) records before they become a map.

    Checks the three partition violations: duplicate cluster id, empty
    cluster, and an element owned by more than one cluster.
    """
    report = ValidationReport()
    seen_ids: set[str] = set()
    owner: dict[ElementRef, str] = {}
    for cluster_id, members in records:
        if cluster_id in seen_ids:
            report.add("duplicate_cluster_id", cluster_id)
        seen_ids.add(cluster_id)
        if not members:
            report.add("empty_cluster", cluster_id)
        for element in members:
            prior = owner.get(element)
            if prior is not None and prior != cluster_id:
                report.add(
                    "duplicate_element",
                    f"{element.key()} in {prior} and {cluster_id}",
                )
            else:
                owner[element] = cluster_id
    return report


def validate_labeled_clustering(clustering: LabeledClustering) -> ValidationReport:
    # Cluster ids are dict keys here, so only the element checks can fire;
    # count elements first and take the record-by-record path only when the
    # totals disagree, keeping validation cheap on large, clean inputs.
    clusters = clustering.clusters
    owner = {e: cid for cid, members in clusters.items() for e in members}
    if len(owner) != sum(len(m) for m in clusters.values()) or any(
        not m for m in clusters.values()
    ):
        return validate_cluster_records(clusters.items())
    return ValidationReport()


def require_valid(clustering: LabeledClustering, name: str) -> None:
    report = validate_labeled_clustering(clustering)
    if not report.ok():
        raise InvalidClustering(f"{name} clustering is {report.summary()}", report)


class WeightMap:
    """Positive finite weight per element, with exact-sum set weights."""

    __slots__ = ("_weights",)

    def __init__(self, weights: Mapping[ElementRef, float], validate: bool = True):
        self._weights = dict(weights)
        if validate:
            for element, w in self._weights.items():
                if not (isinstance(w, (int, float)) and math.isfinite(w) and w > 0):
                    raise MissingWeight(
                        f"weight for {element.key()} must be a positive finite "
                        f"number, got {w!r}"
                    )

    def __getitem__(self, element: ElementRef) -> float:
        try:
            return self._weights[element]
        except KeyError:
            raise MissingWeight(f"no weight for element {element.key()}") from None

    def __contains__(self, element: ElementRef) -> bool:
        return element in self._weights

    def __len__(self) -> int:
        return len(self._weights)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, WeightMap):
            return self._weights == other._weights
        return NotImplemented

    def items(self) -> Iterable[tuple[ElementRef, float]]:
        return self._weights.items()

    def elements(self) -> Iterable[ElementRef]:
        return self._weights.keys()

    def set_weight(self, elements: Iterable[ElementRef]) -> float:
        """Correctly rounded sum of weights over a set of elements."""
        # map() keeps the lookup loop in C; universes run into the millions.
        try:
            return math.fsum(map(self._weights.__getitem__, elements))
        except KeyError as exc:
            raise MissingWeight(
                f"no weight for element {exc.args[0].key()}"
            ) from None

    def values_for(self, elements: Iterable[ElementRef]) -> list[float]:
        """Weights of the given elements, in the given order."""
        try:
            return list(map(self._weights.__getitem__, elements))
        except KeyError as exc:
            raise MissingWeight(
                f"no weight for element {exc.args[0].key()}"
            ) from None

    def scaled(self, factor: float) -> "WeightMap":
        return WeightMap(
            {e: w * factor for e, w in self._weights.items()}, validate=False
        )


class MembershipIndex:
    """Element -> cluster lookup plus cached cluster weights."""

    __slots__ = ("clustering", "weights", "_owner", "_cluster_weight")

    def __init__(
        self,
        clustering: LabeledClustering,
        owner: dict[ElementRef, str],
        weights: WeightMap,
    ):
        self.clustering = clustering
        self.weights = weights
        self._owner = owner
        self._cluster_weight: dict[str, float] = {}

    def cluster_id_of(self, element: ElementRef) -> str:
        try:
            return self._owner[element]
        except KeyError:
            raise UnknownElement(
                f"element {element.key()} is not in the clustering"
            ) from None

    def members_of(self, element: ElementRef) -> frozenset[ElementRef]:
        return self.clustering.clusters[self.cluster_id_of(element)]

    def cluster_weight_of(self, element: ElementRef) -> float:
        return self.cluster_weight(self.cluster_id_of(element))

    def cluster_weight(self, cluster_id: str) -> float:
        # Summed on first use per cluster; callers that probe a handful of
        # elements then never pay for the full pass over every member.
        w = self._cluster_weight.get(cluster_id)
        if w is None:
            w = self.weights.set_weight(self.clustering.clusters[cluster_id])
            self._cluster_weight[cluster_id] = w
        return w

    def owner_map(self) -> dict[ElementRef, str]:
        return self._owner

    def __contains__(self, element: ElementRef) -> bool:
        return element in self._owner


def build_membership_index(
    clustering: LabeledClustering, weights: WeightMap
) -> MembershipIndex:
    """Index a valid clustering; every member must have a weight."""
    clusters = clustering.clusters
    owner = {e: cid for cid, members in clusters.items() for e in members}
    if len(owner) != sum(len(m) for m in clusters.values()):
        seen: dict[ElementRef, str] = {}
        for cluster_id, members in clusters.items():
            for element in members:
                if element in seen:
                    raise InvalidClustering(
                        f"element {element.key()} belongs to clusters "
                        f"{seen[element]} and {cluster_id}"
                    )
                seen[element] = cluster_id
    missing = owner.keys() - weights.elements()
    if missing:
        first = sorted_elements(missing)[0]
        raise MissingWeight(f"no weight for element {first.key()}")
    return MembershipIndex(clustering, owner, weights)
