"""Pointwise impact and quality metrics plus their weighted aggregates.

Every metric is the weight-weighted mean of a per-element quantity, taken
over the whole evaluation universe. With B, E, I the base, experiment, and
ideal clusters containing element e, and w(.) the weight of a set:

* jaccard distance  1 - w(B&E)/w(B|E)
* split rate        w(B-E)/w(B)        (lost from e's cluster)
* merge rate        w(E-B)/w(E)        (gained into e's cluster)
* good/bad split    the lost mass outside / inside e's ideal class
* good/bad merge    the gained mass inside / outside e's ideal class
* precision         w(C&I)/w(C) for C in {B, E}; recall uses w(I)
* IQ                (d(base, ideal) - d(exp, ideal)) / d(base, exp), the
                    share of the diff that moved toward the ideal

Aggregates run through the kernel backend (see _backend); the pointwise
functions here are the readable set-arithmetic reference used for
per-element reports and diagnosis.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from ._backend import BACKEND_NAME, full_sums, impact_sums
from .errors import InputError, UniverseMismatch
from .model import (
    ElementRef,
    MembershipIndex,
    WeightMap,
    element_key,
    sorted_elements,
)
from .transform import EvalInputs

IMPACT_ROWS = ("JaccardDistance", "SplitRate", "MergeRate")
QUALITY_ROWS = (
    "GoodSplitRate",
    "BadSplitRate",
    "GoodMergeRate",
    "BadMergeRate",
    "DeltaPrecision",
    "DeltaRecall",
    "IQ",
)


@dataclass(frozen=True)
class PointwiseRecord:
    """Per-element metric values; quality fields are None without an ideal."""

    element: ElementRef
    weight: float
    jaccard_distance: float
    split_rate: float
    merge_rate: float
    good_split_rate: float | None = None
    bad_split_rate: float | None = None
    good_merge_rate: float | None = None
    bad_merge_rate: float | None = None
    precision_base: float | None = None
    precision_exp: float | None = None
    recall_base: float | None = None
    recall_exp: float | None = None


@dataclass(frozen=True)
class ImpactMetrics:
    jaccard_distance: float
    split_rate: float
    merge_rate: float


@dataclass(frozen=True)
class QualityMetrics:
    good_split_rate: float
    bad_split_rate: float
    good_merge_rate: float
    bad_merge_rate: float
    delta_precision: float
    delta_recall: float
    iq: float


@dataclass(frozen=True)
class Distances:
    base_to_ideal: float
    exp_to_ideal: float
    base_to_exp: float


@dataclass
class MetricsReport:
    impact: ImpactMetrics
    total_weight: float
    quality: QualityMetrics | None = None
    distances: Distances | None = None
    per_element: list[PointwiseRecord] | None = None
    estimate: bool = False
    coverage_weight: float | None = None


def pointwise_impact(
    base_index: MembershipIndex,
    exp_index: MembershipIndex,
    weights: WeightMap,
    element: ElementRef,
) -> tuple[float, float, float]:
    """(jaccard_distance, split_rate, merge_rate) for one element."""
    members_b = base_index.members_of(element)
    members_e = exp_index.members_of(element)
    wb = base_index.cluster_weight_of(element)
    we = exp_index.cluster_weight_of(element)
    inter = weights.set_weight(members_b & members_e)
    lost = wb - inter
    gained = we - inter
    diff = lost + gained
    # diff/(diff+inter) is bitwise symmetric in the two clusters; it also
    # yields exactly 0.0 for identical clusters because their weight sums
    # are bit-identical (inter > 0: the element itself is in both).
    return diff / (diff + inter), lost / wb, gained / we


def pointwise_quality(
    base_index: MembershipIndex,
    exp_index: MembershipIndex,
    ideal_index: MembershipIndex,
    weights: WeightMap,
    element: ElementRef,
) -> PointwiseRecord:
    members_b = base_index.members_of(element)
    members_e = exp_index.members_of(element)
    members_i = ideal_index.members_of(element)
    wb = base_index.cluster_weight_of(element)
    we = exp_index.cluster_weight_of(element)
    wi = ideal_index.cluster_weight_of(element)
    jd, split, merge = pointwise_impact(base_index, exp_index, weights, element)
    lost = members_b - members_e
    gained = members_e - members_b
    inter_bi = weights.set_weight(members_b & members_i)
    inter_ei = weights.set_weight(members_e & members_i)
    return PointwiseRecord(
        element=element,
        weight=weights[element],
        jaccard_distance=jd,
        split_rate=split,
        merge_rate=merge,
        good_split_rate=weights.set_weight(lost - members_i) / wb,
        bad_split_rate=weights.set_weight(lost & members_i) / wb,
        good_merge_rate=weights.set_weight(gained & members_i) / we,
        bad_merge_rate=weights.set_weight(gained - members_i) / we,
        precision_base=inter_bi / wb,
        precision_exp=inter_ei / we,
        recall_base=inter_bi / wi,
        recall_exp=inter_ei / wi,
    )


def compute_iq(
    d_base_ideal: float, d_exp_ideal: float, d_base_exp: float
) -> float:
    """Improvement quotient; 0 by convention when base and exp coincide."""
    if d_base_exp == 0.0:
        return 0.0
    return (d_base_ideal - d_exp_ideal) / d_base_exp


def _cluster_codes(owner: dict[ElementRef, str], elements) -> tuple[list[int], int]:
    ids = sorted(set(owner.values()))
    code = {cid: j for j, cid in enumerate(ids)}
    # chained map() keeps the per-element translation in C
    return list(map(code.__getitem__, map(owner.__getitem__, elements))), len(ids)


def _codes_array(clusters, positions: dict[ElementRef, int]) -> tuple[np.ndarray, int]:
    """Dense cluster code per element, ordered as ``positions`` dictates.

    Which cluster gets which code is irrelevant: the kernels accumulate
    strictly in element order, so any dense numbering yields bit-identical
    sums. Skipping the per-element owner lookup this way is what makes
    aggregates on multi-million universes cheap.
    """
    codes = np.full(len(positions), -1, dtype=np.int64)
    try:
        for j, members in enumerate(clusters.values()):
            codes[
                np.fromiter(map(positions.__getitem__, members), np.int64, len(members))
            ] = j
    except KeyError:
        extra = {e for m in clusters.values() for e in m} - positions.keys()
        sample = ", ".join(e.key() for e in sorted_elements(extra)[:5])
        raise UniverseMismatch(
            f"clustering contains {len(extra)} elements outside the "
            f"evaluation universe (e.g. {sample})"
        ) from None
    if len(codes) and codes.min() < 0:
        uncovered = int((codes < 0).sum())
        raise UniverseMismatch(
            f"clustering leaves {uncovered} universe elements unassigned"
        )
    return codes, len(clusters)


def expected_jaccard_distance(
    a_index: MembershipIndex,
    b_index: MembershipIndex,
    weights: WeightMap,
) -> float:
    """Weighted mean pointwise jaccard distance between two clusterings."""
    a_owner = a_index.owner_map()
    b_owner = b_index.owner_map()
    if a_owner.keys() != b_owner.keys():
        raise UniverseMismatch(
            "clusterings cover different universes "
            f"({len(a_owner)} vs {len(b_owner)} elements)"
        )
    elements = sorted_elements(a_owner)
    if not elements:
        raise InputError("cannot average over an empty universe")
    a, na = _cluster_codes(a_owner, elements)
    b, nb = _cluster_codes(b_owner, elements)
    w = weights.values_for(elements)
    jd_sum, _, _, total = impact_sums(a, b, w, na, nb)
    return jd_sum / total


def aggregate_impact(inputs: EvalInputs, per_element: bool = False) -> MetricsReport:
    """Impact metrics over the whole universe."""
    elements = inputs.elements
    if not elements:
        raise InputError("evaluation universe is empty")
    positions = inputs.element_positions
    b, nb = _codes_array(inputs.base.clusters, positions)
    e, ne = _codes_array(inputs.exp.clusters, positions)
    w = inputs.weights.values_for(elements)
    jd_sum, sp_sum, mg_sum, total = impact_sums(b, e, w, nb, ne)
    report = MetricsReport(
        impact=ImpactMetrics(jd_sum / total, sp_sum / total, mg_sum / total),
        total_weight=total,
    )
    if per_element:
        report.per_element = _per_element_records(inputs)
    return report


def aggregate_quality(inputs: EvalInputs, per_element: bool = False) -> MetricsReport:
    """Impact plus quality metrics; requires an attached ideal."""
    if inputs.ideal is None:
        raise InputError("quality metrics require an ideal partition")
    elements = inputs.elements
    if not elements:
        raise InputError("evaluation universe is empty")
    positions = inputs.element_positions
    b, nb = _codes_array(inputs.base.clusters, positions)
    e, ne = _codes_array(inputs.exp.clusters, positions)
    i, ni = _codes_array(inputs.ideal.clusters, positions)
    w = inputs.weights.values_for(elements)
    sums = full_sums(b, e, i, w, nb, ne, ni)
    (jd_s, sp_s, mg_s, gs_s, bs_s, gm_s, bm_s,
     dp_s, dr_s, dbi_s, dei_s, total) = sums
    distances = Distances(dbi_s / total, dei_s / total, jd_s / total)
    quality = QualityMetrics(
        good_split_rate=gs_s / total,
        bad_split_rate=bs_s / total,
        good_merge_rate=gm_s / total,
        bad_merge_rate=bm_s / total,
        delta_precision=dp_s / total,
        delta_recall=dr_s / total,
        iq=compute_iq(distances.base_to_ideal, distances.exp_to_ideal,
                      distances.base_to_exp),
    )
    report = MetricsReport(
        impact=ImpactMetrics(jd_s / total, sp_s / total, mg_s / total),
        total_weight=total,
        quality=quality,
        distances=distances,
    )
    if per_element:
        report.per_element = _per_element_records(inputs)
    return report


def evaluate(inputs: EvalInputs, per_element: bool = False) -> MetricsReport:
    """Full report: quality when an ideal is attached, impact otherwise."""
    if inputs.ideal is not None:
        return aggregate_quality(inputs, per_element=per_element)
    return aggregate_impact(inputs, per_element=per_element)


def _per_element_records(inputs: EvalInputs) -> list[PointwiseRecord]:
    records = []
    if inputs.ideal is not None:
        for element in inputs.elements:
            records.append(
                pointwise_quality(
                    inputs.base_index, inputs.exp_index, inputs.ideal_index,
                    inputs.weights, element,
                )
            )
    else:
        for element in inputs.elements:
            jd, split, merge = pointwise_impact(
                inputs.base_index, inputs.exp_index, inputs.weights, element
            )
            records.append(
                PointwiseRecord(
                    element=element,
                    weight=inputs.weights[element],
                    jaccard_distance=jd,
                    split_rate=split,
                    merge_rate=merge,
                )
            )
    records.sort(
        key=lambda r: (-(r.weight * r.jaccard_distance), element_key(r.element))
    )
    return records


# --- rendering -----------------------------------------------------------

def format_percent(fraction: float) -> str:
    """Two-decimal percent rendering, ties away from zero.

    The value is first quantized at a scale far below the displayed digits
    to absorb binary float noise around decimal ties.
    """
    d = Decimal(repr(fraction)) * 100
    d = d.quantize(Decimal("0.000001"))
    d = d.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
    if d.is_zero():
        d = abs(d)
    return str(d)


def rendered_rows(report: MetricsReport) -> dict[str, str]:
    """The report as two-decimal percent strings keyed by row name."""
    impact = report.impact
    rows = {
        "JaccardDistance": format_percent(impact.jaccard_distance),
        "SplitRate": format_percent(impact.split_rate),
        "MergeRate": format_percent(impact.merge_rate),
    }
    if report.quality is not None:
        q = report.quality
        rows.update(
            {
                "GoodSplitRate": format_percent(q.good_split_rate),
                "BadSplitRate": format_percent(q.bad_split_rate),
                "GoodMergeRate": format_percent(q.good_merge_rate),
                "BadMergeRate": format_percent(q.bad_merge_rate),
                "DeltaPrecision": format_percent(q.delta_precision),
                "DeltaRecall": format_percent(q.delta_recall),
                "IQ": format_percent(q.iq),
            }
        )
    return rows


def render_table(report: MetricsReport) -> str:
    rows = rendered_rows(report)
    lines = ["Impact"]
    for name in IMPACT_ROWS:
        lines.append(f"  {name:<16}{rows[name] + '%':>10}")
    if report.quality is not None:
        lines.append("")
        lines.append("Quality" + (" (estimate)" if report.estimate else ""))
        for name in QUALITY_ROWS:
            lines.append(f"  {name:<16}{rows[name] + '%':>10}")
    if report.estimate and report.coverage_weight is not None:
        lines.append("")
        share = report.coverage_weight / report.total_weight
        lines.append(f"  Coverage        {format_percent(share) + '%':>10}")
    return "\n".join(lines) + "\n"


def _record_dict(record: PointwiseRecord) -> dict:
    d = {
        "element": element_key(record.element),
        "weight": record.weight,
        "jaccard_distance": record.jaccard_distance,
        "split_rate": record.split_rate,
        "merge_rate": record.merge_rate,
    }
    if record.good_split_rate is not None:
        d.update(
            {
                "good_split_rate": record.good_split_rate,
                "bad_split_rate": record.bad_split_rate,
                "good_merge_rate": record.good_merge_rate,
                "bad_merge_rate": record.bad_merge_rate,
                "precision_base": record.precision_base,
                "precision_exp": record.precision_exp,
                "recall_base": record.recall_base,
                "recall_exp": record.recall_exp,
            }
        )
    return d


def report_to_json_dict(report: MetricsReport) -> dict:
    out: dict = {
        "impact": {
            "jaccard_distance": report.impact.jaccard_distance,
            "split_rate": report.impact.split_rate,
            "merge_rate": report.impact.merge_rate,
        },
        "quality": None,
        "distances": None,
        "total_weight": report.total_weight,
        "rendered": rendered_rows(report),
    }
    if report.quality is not None:
        q = report.quality
        out["quality"] = {
            "good_split_rate": q.good_split_rate,
            "bad_split_rate": q.bad_split_rate,
            "good_merge_rate": q.good_merge_rate,
            "bad_merge_rate": q.bad_merge_rate,
            "delta_precision": q.delta_precision,
            "delta_recall": q.delta_recall,
            "iq": q.iq,
        }
    if report.distances is not None:
        out["distances"] = {
            "base_to_ideal": report.distances.base_to_ideal,
            "exp_to_ideal": report.distances.exp_to_ideal,
            "base_to_exp": report.distances.base_to_exp,
        }
    if report.estimate:
        out["estimate"] = True
        out["coverage_weight"] = report.coverage_weight
    if report.per_element is not None:
        out["per_element"] = [_record_dict(r) for r in report.per_element]
    return out


__all__ = [
    "BACKEND_NAME",
    "Distances",
    "ImpactMetrics",
    "MetricsReport",
    "PointwiseRecord",
    "QualityMetrics",
    "aggregate_impact",
    "aggregate_quality",
    "compute_iq",
    "evaluate",
    "expected_jaccard_distance",
    "format_percent",
    "pointwise_impact",
    "pointwise_quality",
    "render_table",
    "rendered_rows",
    "report_to_json_dict",
]
