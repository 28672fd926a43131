"""Naive reference implementation the real engine is checked against.

Everything here is computed from first principles with explicit set
arithmetic over plain dicts, exact summation, and none of the package's
indexes or kernels. Slow on purpose; used only on small universes.

Clusterings are plain ``{cluster_id: set_of_elements}`` mappings and
weights a plain ``{element: float}`` mapping. Elements are opaque
hashable keys.
"""

from __future__ import annotations

import math


def cluster_of(clusters, element):
    """The unique cluster (as a set) containing element."""
    owners = [cid for cid, members in clusters.items() if element in members]
    if len(owners) != 1:
        raise AssertionError(f"{element!r} is in {len(owners)} clusters")
    return set(clusters[owners[0]])


def set_weight(weights, elements):
    return math.fsum(weights[e] for e in elements)


def jaccard_distance(weights, a, b):
    # diff / (diff + intersection), each region weighed directly. The
    # complement form 1 - inter/union is equal in exact arithmetic but
    # rounds differently, and the IQ quotient divides by this value, so
    # its tiny discrepancy would be amplified past useful tolerances.
    a, b = set(a), set(b)
    diff = set_weight(weights, a ^ b)
    if diff == 0.0:
        return 0.0
    return diff / (diff + set_weight(weights, a & b))


def weighted_mean(weights, universe, value_of):
    num = math.fsum(weights[e] * value_of(e) for e in universe)
    den = math.fsum(weights[e] for e in universe)
    return num / den


def pointwise(clusters_b, clusters_e, weights, element, clusters_i=None):
    """Every pointwise metric for one element, as a dict."""
    b = cluster_of(clusters_b, element)
    e = cluster_of(clusters_e, element)
    wb = set_weight(weights, b)
    we = set_weight(weights, e)
    lost = b - e
    gained = e - b
    out = {
        "jaccard_distance": jaccard_distance(weights, b, e),
        "split_rate": set_weight(weights, lost) / wb,
        "merge_rate": set_weight(weights, gained) / we,
    }
    if clusters_i is not None:
        i = cluster_of(clusters_i, element)
        wi = set_weight(weights, i)
        out.update(
            good_split_rate=set_weight(weights, lost - i) / wb,
            bad_split_rate=set_weight(weights, lost & i) / wb,
            good_merge_rate=set_weight(weights, gained & i) / we,
            bad_merge_rate=set_weight(weights, gained - i) / we,
            delta_precision=(
                set_weight(weights, e & i) / we - set_weight(weights, b & i) / wb
            ),
            delta_recall=(
                (set_weight(weights, e & i) - set_weight(weights, b & i)) / wi
            ),
            d_base_ideal=jaccard_distance(weights, b, i),
            d_exp_ideal=jaccard_distance(weights, e, i),
        )
    return out


def iq_of(d_base_ideal, d_exp_ideal, d_base_exp):
    if d_base_exp == 0.0:
        return 0.0
    return (d_base_ideal - d_exp_ideal) / d_base_exp


def aggregate(clusters_b, clusters_e, weights, clusters_i=None):
    """Weight-weighted mean of every pointwise metric over the universe."""
    universe = sorted(weights)
    if not universe:
        raise AssertionError("empty universe")

    def mean_of(key):
        return weighted_mean(
            weights,
            universe,
            lambda el: pointwise(clusters_b, clusters_e, weights, el, clusters_i)[key],
        )

    out = {
        "jaccard_distance": mean_of("jaccard_distance"),
        "split_rate": mean_of("split_rate"),
        "merge_rate": mean_of("merge_rate"),
        "total_weight": math.fsum(weights[e] for e in universe),
    }
    if clusters_i is not None:
        for key in (
            "good_split_rate",
            "bad_split_rate",
            "good_merge_rate",
            "bad_merge_rate",
            "delta_precision",
            "delta_recall",
            "d_base_ideal",
            "d_exp_ideal",
        ):
            out[key] = mean_of(key)
        out["d_base_exp"] = out["jaccard_distance"]
        out["iq"] = iq_of(out["d_base_ideal"], out["d_exp_ideal"], out["d_base_exp"])
    return out
