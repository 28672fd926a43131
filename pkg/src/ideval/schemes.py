"""Reference id-assignment schemes.

These generate the runs the evaluation engine compares: given a clustering
of current items (under arbitrary grouping keys), produce a labeled run by
minting fresh ids, by letting historical ids follow their items, or by
relabeling an existing run. All tie-breaks are lexicographic so repeated
runs are identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from .errors import InputError, NotABijection
from .model import (
    KIND_CURRENT,
    ElementRef,
    LabeledClustering,
    WeightMap,
    require_valid,
)


@dataclass(frozen=True)
class AssignmentResult:
    """A labeled run: final cluster ids over the input clusters.

    ``minted`` lists ids invented by the scheme; ``adopted`` maps a final
    id to the historical id it continues (for schemes that adopt ids).
    """

    labels: LabeledClustering
    minted: frozenset[str]
    adopted: Mapping[str, str]


def _ordered_clusters(
    clustering: LabeledClustering,
) -> list[tuple[str, frozenset[ElementRef]]]:
    """Clusters in deterministic order: by smallest member external id."""
    return sorted(
        clustering.clusters.items(),
        key=lambda kv: min(e.external_id for e in kv[1]),
    )


def _check_current_clustering(clustering: LabeledClustering) -> None:
    require_valid(clustering, "input")
    for element in clustering.iter_elements():
        if element.kind != KIND_CURRENT:
            raise InputError(
                f"assignment schemes take current items only, found "
                f"{element.key()}"
            )


def assign_fresh_ids(
    clustering: LabeledClustering, prefix: str = "id_", start: int = 1
) -> AssignmentResult:
    """Give every cluster a newly minted id: prefix plus a counter."""
    _check_current_clustering(clustering)
    labels = {}
    counter = start
    for _, members in _ordered_clusters(clustering):
        labels[f"{prefix}{counter}"] = members
        counter += 1
    return AssignmentResult(
        labels=LabeledClustering(labels),
        minted=frozenset(labels),
        adopted={},
    )


def assign_by_majority_vote(
    clustering: LabeledClustering,
    hist: LabeledClustering,
    hist_weights: WeightMap,
    prefix: str = "id_",
    start: int = 1,
) -> AssignmentResult:
    """Let historical ids follow the weight of their members.

    A current item votes for a historical id when an item with the same
    external id belonged to that id historically; the vote weighs as much
    as the historical item did. Each historical id goes to the cluster
    where its vote weight is maximal, each cluster keeps the
    highest-voted id it won, and clusters that won nothing mint fresh
    ids. Ties break toward the lexicographically smallest cluster key or
    id.
    """
    _check_current_clustering(clustering)
    hist_of_item: dict[str, list[tuple[str, float]]] = {}
    for hist_id, members in hist.clusters.items():
        for element in members:
            hist_of_item.setdefault(element.external_id, []).append(
                (hist_id, hist_weights[element])
            )

    vote_parts: dict[str, dict[str, list[float]]] = {}
    for key, members in clustering.clusters.items():
        for element in members:
            for hist_id, w in hist_of_item.get(element.external_id, ()):
                vote_parts.setdefault(key, {}).setdefault(hist_id, []).append(w)
    votes = {
        key: {hist_id: math.fsum(parts) for hist_id, parts in per_id.items()}
        for key, per_id in vote_parts.items()
    }

    by_hist_id: dict[str, list[tuple[str, float]]] = {}
    for key, per_id in votes.items():
        for hist_id, vote in per_id.items():
            by_hist_id.setdefault(hist_id, []).append((key, vote))
    won: dict[str, list[tuple[str, float]]] = {}
    for hist_id, candidates in by_hist_id.items():
        best_key, best_vote = min(candidates, key=lambda kv: (-kv[1], kv[0]))
        won.setdefault(best_key, []).append((hist_id, best_vote))

    labels: dict[str, frozenset[ElementRef]] = {}
    adopted: dict[str, str] = {}
    unlabeled: list[frozenset[ElementRef]] = []
    for key, members in _ordered_clusters(clustering):
        winners = won.get(key)
        if winners:
            hist_id, _ = min(winners, key=lambda hv: (-hv[1], hv[0]))
            labels[hist_id] = members
            adopted[hist_id] = hist_id
        else:
            unlabeled.append(members)

    used = set(labels) | set(hist.clusters)
    minted: set[str] = set()
    counter = start
    for members in unlabeled:
        while f"{prefix}{counter}" in used:
            counter += 1
        fresh = f"{prefix}{counter}"
        counter += 1
        labels[fresh] = members
        minted.add(fresh)
        used.add(fresh)
    return AssignmentResult(
        labels=LabeledClustering(labels),
        minted=frozenset(minted),
        adopted=adopted,
    )


def permute_ids(
    result: AssignmentResult, permutation: Mapping[str, str]
) -> AssignmentResult:
    """Relabel a run through a bijection on its assigned id set."""
    assigned = set(result.labels.clusters)
    if set(permutation.keys()) != assigned or set(permutation.values()) != assigned:
        raise NotABijection(
            "permutation must be a bijection on the assigned id set"
        )
    return AssignmentResult(
        labels=LabeledClustering(
            {permutation[cid]: members
             for cid, members in result.labels.clusters.items()}
        ),
        minted=frozenset(permutation[cid] for cid in result.minted),
        adopted={permutation[cid]: hist_id
                 for cid, hist_id in result.adopted.items()},
    )
