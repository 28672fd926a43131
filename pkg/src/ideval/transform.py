"""Turning id-assignment runs into a cluster-membership evaluation problem.

An id assignment is compared against history by expanding every cluster id
into a cluster over a mixed universe: the id's historical members (or a
synthetic stand-in element when the id has none) together with the current
items the run assigned to that id. Two assignment runs expanded this way
become ordinary clusterings of one shared universe, which the metrics
layer can diff pointwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Mapping, Sequence

from .errors import (
    DuplicateEpochLabel,
    EmptyIntersection,
    InputError,
    InvalidClustering,
    ItemUniverseMismatch,
    MissingIdealClass,
    UniverseMismatch,
)
from .model import (
    KIND_CURRENT,
    KIND_HISTORICAL,
    KIND_SYNTHETIC,
    ElementRef,
    LabeledClustering,
    MembershipIndex,
    WeightMap,
    build_membership_index,
    require_valid,
    sorted_elements,
)

MODE_SEPARATE = "separate"
MODE_SIMULTANEOUS = "simultaneous"

DEFAULT_K = 0.001

# Ideal classes auto-created for synthetic ids get this prefix; user class
# ids must not collide with it.
AUTO_CLASS_PREFIX = "__auto__:"

_EMPTY: frozenset[ElementRef] = frozenset()


@dataclass(frozen=True)
class HistoricalEpoch:
    """One labeled historical clustering plus its relative weight."""

    label: str
    clustering: LabeledClustering
    weights: WeightMap
    epoch_weight: float = 1.0


@dataclass(frozen=True)
class TransformConfig:
    k: float = DEFAULT_K
    hist_scale_factor: float = 1.0
    mode: str = MODE_SEPARATE
    align_items: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.k) and self.k > 0):
            raise InputError(f"k must be a positive finite number, got {self.k!r}")
        if not (math.isfinite(self.hist_scale_factor) and self.hist_scale_factor > 0):
            raise InputError(
                "hist_scale_factor must be a positive finite number, "
                f"got {self.hist_scale_factor!r}"
            )
        if self.mode not in (MODE_SEPARATE, MODE_SIMULTANEOUS):
            raise InputError(f"unknown mode {self.mode!r}")


@dataclass(frozen=True)
class IdCensus:
    """Which cluster ids each side used, and their union."""

    ids_base: frozenset[str]
    ids_exp: frozenset[str]
    ids_hist: frozenset[str]
    all_ids: frozenset[str] = field(default_factory=frozenset)
    non_hist_ids: frozenset[str] = field(default_factory=frozenset)


@dataclass
class EvalInputs:
    """A fully materialized evaluation problem.

    ``base`` and ``exp`` partition the same expanded universe; ``weights``
    covers exactly that universe. Instances are treated as immutable after
    construction.
    """

    base: LabeledClustering
    exp: LabeledClustering
    weights: WeightMap
    census: IdCensus
    k: float = DEFAULT_K
    ideal: LabeledClustering | None = None

    @cached_property
    def elements(self) -> tuple[ElementRef, ...]:
        """The universe in canonical summation order."""
        return tuple(sorted_elements(self.weights.elements()))

    @cached_property
    def element_positions(self) -> dict[ElementRef, int]:
        """Element -> index into :attr:`elements`."""
        return {e: j for j, e in enumerate(self.elements)}

    @cached_property
    def base_index(self) -> MembershipIndex:
        return build_membership_index(self.base, self.weights)

    @cached_property
    def exp_index(self) -> MembershipIndex:
        return build_membership_index(self.exp, self.weights)

    @cached_property
    def ideal_index(self) -> MembershipIndex | None:
        if self.ideal is None:
            return None
        return build_membership_index(self.ideal, self.weights)

    def total_weight(self) -> float:
        return math.fsum(w for _, w in self.weights.items())


def hist_members_or_id(cluster_id: str, hist: LabeledClustering) -> frozenset[ElementRef]:
    """Historical members of an id, or its synthetic stand-in element."""
    members = hist.clusters.get(cluster_id)
    if members:
        return members
    return frozenset((ElementRef.synthetic(cluster_id),))


def _require_kind(clustering: LabeledClustering, kind: str, name: str) -> None:
    for element in clustering.iter_elements():
        if element.kind != kind:
            raise InvalidClustering(
                f"{name} clustering may only contain {kind!r} elements, "
                f"found {element.key()}"
            )


def merge_historical_epochs(
    epochs: Sequence[HistoricalEpoch],
) -> tuple[LabeledClustering, WeightMap]:
    """Combine epochs into one historical clustering.

    Epoch weights are normalized to sum to 1 and scale the item weights of
    their epoch; clusters with the same id are unioned across epochs.
    Items stay distinct across epochs because elements are epoch-tagged.
    """
    if not epochs:
        raise InputError("at least one historical epoch is required")
    labels = [ep.label for ep in epochs]
    if len(set(labels)) != len(labels):
        dupes = sorted({x for x in labels if labels.count(x) > 1})
        raise DuplicateEpochLabel(f"duplicate epoch labels: {', '.join(dupes)}")
    for ep in epochs:
        if not (math.isfinite(ep.epoch_weight) and ep.epoch_weight > 0):
            raise InputError(
                f"epoch {ep.label!r} weight must be positive and finite"
            )
        _require_kind(ep.clustering, KIND_HISTORICAL, f"epoch {ep.label!r}")
        for element in ep.clustering.iter_elements():
            if element.epoch != ep.label:
                raise InvalidClustering(
                    f"epoch {ep.label!r} contains element {element.key()} "
                    "tagged with a different epoch"
                )

    total = math.fsum(ep.epoch_weight for ep in epochs)
    merged_clusters: dict[str, set[ElementRef]] = {}
    merged_weights: dict[ElementRef, float] = {}
    for ep in epochs:
        scale = ep.epoch_weight / total
        for cid, members in ep.clustering.clusters.items():
            merged_clusters.setdefault(cid, set()).update(members)
            for element in members:
                merged_weights[element] = scale * ep.weights[element]
    clustering = LabeledClustering(
        {cid: frozenset(m) for cid, m in merged_clusters.items()}
    )
    return clustering, WeightMap(merged_weights, validate=False)


def align_current_items(
    base_labels: LabeledClustering,
    base_weights: WeightMap,
    exp_labels: LabeledClustering,
    exp_weights: WeightMap,
) -> tuple[LabeledClustering, LabeledClustering, WeightMap]:
    """Restrict both runs to the items they share.

    Clusters are intersected with the shared item set; clusters (and with
    them ids) that lose all members are dropped. Shared items take the max
    of their two weights.
    """
    base_items = frozenset(base_labels.iter_elements())
    exp_items = frozenset(exp_labels.iter_elements())
    shared = base_items & exp_items
    if not shared:
        raise EmptyIntersection("the two runs have no current items in common")

    def restrict(labels: LabeledClustering) -> LabeledClustering:
        kept = {}
        for cid, members in labels.clusters.items():
            subset = members & shared
            if subset:
                kept[cid] = subset
        return LabeledClustering(kept, labels.epoch)

    weights = {e: max(base_weights[e], exp_weights[e]) for e in shared}
    return restrict(base_labels), restrict(exp_labels), WeightMap(weights, validate=False)


def build_eval_inputs(
    hist: LabeledClustering,
    hist_weights: WeightMap,
    base_labels: LabeledClustering,
    exp_labels: LabeledClustering,
    item_weights: WeightMap,
    config: TransformConfig = TransformConfig(),
) -> EvalInputs:
    """Expand two id-assignment runs into comparable clusterings.

    ``base_labels`` and ``exp_labels`` map cluster ids to current items;
    ``hist`` maps cluster ids to historical items. In separate mode the two
    runs must partition the current items identically (only the ids may
    differ); simultaneous mode only requires the same item set. When the
    runs carry different per-item weights the caller resolves them first
    (see align_current_items and the io layer, which take the max).
    """
    require_valid(hist, "historical")
    require_valid(base_labels, "base")
    require_valid(exp_labels, "experiment")
    _require_kind(hist, KIND_HISTORICAL, "historical")
    _require_kind(base_labels, KIND_CURRENT, "base")
    _require_kind(exp_labels, KIND_CURRENT, "experiment")

    base_items = frozenset(base_labels.iter_elements())
    exp_items = frozenset(exp_labels.iter_elements())
    if base_items != exp_items:
        only_base = len(base_items - exp_items)
        only_exp = len(exp_items - base_items)
        raise ItemUniverseMismatch(
            "base and experiment cover different current items "
            f"({only_base} only in base, {only_exp} only in experiment)"
        )
    if config.mode == MODE_SEPARATE:
        if base_labels.partition() != exp_labels.partition():
            raise ItemUniverseMismatch(
                "separate mode requires identical memberships in both runs; "
                "use simultaneous mode when memberships may differ"
            )

    ids_base = frozenset(base_labels.clusters)
    ids_exp = frozenset(exp_labels.clusters)
    ids_hist = frozenset(hist.clusters)
    all_ids = ids_base | ids_exp | ids_hist
    non_hist_ids = all_ids - ids_hist
    census = IdCensus(ids_base, ids_exp, ids_hist, all_ids, non_hist_ids)

    items_ordered = list(base_items)
    weights: dict[ElementRef, float] = dict(
        zip(items_ordered, item_weights.values_for(items_ordered))
    )
    base_clusters: dict[str, frozenset[ElementRef]] = {}
    exp_clusters: dict[str, frozenset[ElementRef]] = {}
    hist_clusters = hist.clusters
    for cid in all_ids:
        anchor = hist_clusters.get(cid)
        if not anchor:
            syn = ElementRef.synthetic(cid)
            anchor = frozenset((syn,))
            weights[syn] = config.k
        base_clusters[cid] = anchor | base_labels.clusters.get(cid, _EMPTY)
        exp_clusters[cid] = anchor | exp_labels.clusters.get(cid, _EMPTY)

    hsf = config.hist_scale_factor
    for members in hist_clusters.values():
        for element in members:
            weights[element] = hsf * hist_weights[element]

    return EvalInputs(
        base=LabeledClustering(base_clusters),
        exp=LabeledClustering(exp_clusters),
        weights=WeightMap(weights, validate=False),
        census=census,
        k=config.k,
    )


def attach_ideal(inputs: EvalInputs, classes: Mapping[ElementRef, str]) -> EvalInputs:
    """Attach the reference partition used by the quality metrics.

    Every universe element must be assigned a class, except synthetic ids,
    which default to singleton classes (a fresh id carries no evidence of
    belonging with anything). Classes over unknown elements are rejected.
    """
    universe = inputs.weights.elements()
    unknown = classes.keys() - universe
    if unknown:
        sample = ", ".join(e.key() for e in sorted_elements(unknown)[:5])
        raise UniverseMismatch(
            f"ideal classes cover {len(unknown)} elements outside the "
            f"evaluation universe (e.g. {sample})"
        )
    clusters: dict[str, set[ElementRef]] = {}
    for element, class_id in classes.items():
        group = clusters.get(class_id)
        if group is None:
            clusters[class_id] = group = set()
        group.add(element)
    for class_id in clusters:
        if class_id.startswith(AUTO_CLASS_PREFIX):
            raise InputError(
                f"ideal class ids must not start with {AUTO_CLASS_PREFIX!r}"
            )
    if len(classes) != len(universe):
        missing = universe - classes.keys()
        uncovered = [e for e in missing if e.kind != KIND_SYNTHETIC]
        if uncovered:
            first = sorted_elements(uncovered)[0]
            raise MissingIdealClass(
                f"element {first.key()} has no ideal class"
            )
        for element in sorted_elements(missing):
            clusters[AUTO_CLASS_PREFIX + element.external_id] = {element}
    ideal = LabeledClustering({cid: frozenset(m) for cid, m in clusters.items()})
    out = replace(inputs, ideal=ideal)
    # replace() drops cached properties; the universe is unchanged, so the
    # canonical order and positions (expensive at scale) carry over.
    for name in ("elements", "element_positions"):
        if name in inputs.__dict__:
            out.__dict__[name] = inputs.__dict__[name]
    return out


def collapse_historical_clusters(inputs: EvalInputs) -> EvalInputs:
    """Replace each id's historical members with one stand-in element.

    The stand-in for id X weighs max(weight of X's historical cluster, k),
    so ids without history keep their synthetic weight k. Impact metrics
    are invariant under this rewrite; the ideal partition does not carry
    over, so the result supports impact evaluation only.
    """
    base_clusters: dict[str, frozenset[ElementRef]] = {}
    exp_clusters: dict[str, frozenset[ElementRef]] = {}
    weights: dict[ElementRef, float] = {}
    for cid in inputs.census.all_ids:
        syn = ElementRef.synthetic(cid)
        base_cur = frozenset(
            e for e in inputs.base.clusters[cid] if e.kind == KIND_CURRENT
        )
        exp_cur = frozenset(
            e for e in inputs.exp.clusters[cid] if e.kind == KIND_CURRENT
        )
        base_clusters[cid] = base_cur | {syn}
        exp_clusters[cid] = exp_cur | {syn}
        if cid in inputs.census.ids_hist:
            hist_members = [
                e for e in inputs.base.clusters[cid] if e.kind == KIND_HISTORICAL
            ]
            hist_weight = math.fsum(inputs.weights[e] for e in hist_members)
            weights[syn] = max(hist_weight, inputs.k)
        else:
            weights[syn] = inputs.k
        for e in base_cur:
            weights[e] = inputs.weights[e]

    return EvalInputs(
        base=LabeledClustering(base_clusters),
        exp=LabeledClustering(exp_clusters),
        weights=WeightMap(weights, validate=False),
        census=inputs.census,
        k=inputs.k,
        ideal=None,
    )
