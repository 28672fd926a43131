"""Shared builders and randomized generators for the test suite."""

from __future__ import annotations

import dataclasses
import random

import pytest

from ideval.model import ElementRef, LabeledClustering, WeightMap
from ideval.transform import (
    EvalInputs,
    TransformConfig,
    attach_ideal,
    build_eval_inputs,
)

ID_POOL = ("id1", "id2", "id3", "id4", "f1", "f2", "f3", "f4")
EXT_POOL = ("e1", "e2", "e3", "e4", "e5", "e6")
EPOCH = "H"


def cur(item: str) -> ElementRef:
    return ElementRef.current(item)


def his(item: str, epoch: str = EPOCH) -> ElementRef:
    return ElementRef.historical(epoch, item)


def syn(cluster_id: str) -> ElementRef:
    return ElementRef.synthetic(cluster_id)


def make_current(clusters: dict[str, list[str]]) -> LabeledClustering:
    return LabeledClustering(
        {cid: frozenset(cur(x) for x in members) for cid, members in clusters.items()}
    )


def make_hist(clusters: dict[str, list[str]], epoch: str = EPOCH) -> LabeledClustering:
    return LabeledClustering(
        {
            cid: frozenset(his(x, epoch) for x in members)
            for cid, members in clusters.items()
        },
        epoch=epoch,
    )


def unit_weights(clustering: LabeledClustering) -> WeightMap:
    return WeightMap({e: 1.0 for e in clustering.iter_elements()})


def fig1_raw():
    """The smallest worked universe: three items, two historical ids."""
    hist = make_hist({"id_1": ["x1", "x2"], "id_2": ["x3"]})
    base = make_current({"id_1": ["x1"], "id_2": ["x2", "x3"]})
    exp = make_current({"id_3": ["x1"], "id_4": ["x2", "x3"]})
    items = unit_weights(base)
    return hist, unit_weights(hist), base, exp, items


def random_partition(rng: random.Random, elements) -> list[frozenset]:
    elements = list(elements)
    if not elements:
        return []
    n_buckets = rng.randint(1, len(elements))
    buckets: dict[int, set] = {}
    for element in elements:
        buckets.setdefault(rng.randrange(n_buckets), set()).add(element)
    return [frozenset(members) for members in buckets.values()]


def random_raw_run(rng: random.Random, max_items=4, max_hist=4, mode="separate"):
    """Random historical epoch plus two labeled runs over the same items."""
    items = [cur(x) for x in rng.sample(EXT_POOL, rng.randint(1, max_items))]
    hist_members = [his(x) for x in rng.sample(EXT_POOL, rng.randint(0, max_hist))]

    hist_parts = random_partition(rng, hist_members)
    hist = LabeledClustering(
        dict(zip(rng.sample(ID_POOL, len(hist_parts)), hist_parts)), epoch=EPOCH
    )
    base_parts = random_partition(rng, items)
    exp_parts = base_parts if mode == "separate" else random_partition(rng, items)
    base = LabeledClustering(dict(zip(rng.sample(ID_POOL, len(base_parts)), base_parts)))
    exp = LabeledClustering(dict(zip(rng.sample(ID_POOL, len(exp_parts)), exp_parts)))

    hist_weights = WeightMap(
        {e: round(rng.uniform(0.1, 10.0), 3) for e in hist_members}
    )
    item_weights = WeightMap({e: round(rng.uniform(0.1, 10.0), 3) for e in items})
    # k stays below any scaled member weight (>= 0.1 * 0.5) so the
    # collapse stand-in floor max(hist_weight, k) never activates here.
    config = TransformConfig(
        k=rng.choice((0.001, 0.01)),
        hist_scale_factor=rng.choice((1.0, 0.5, 2.5)),
        mode=mode,
    )
    return hist, hist_weights, base, exp, item_weights, config


def random_ideal_classes(rng: random.Random, inputs: EvalInputs):
    """Random class per element; synthetic ids sometimes left to default."""
    n_classes = max(2, len(inputs.elements) // 2)
    classes = {}
    for element in inputs.elements:
        if element.kind == "id" and rng.random() < 0.5:
            continue
        classes[element] = f"c{rng.randint(1, n_classes)}"
    return classes


def random_eval_inputs(
    rng: random.Random,
    with_ideal=True,
    mode=None,
    max_items=4,
    max_hist=4,
) -> EvalInputs:
    mode = mode or rng.choice(("separate", "simultaneous"))
    pieces = random_raw_run(rng, max_items=max_items, max_hist=max_hist, mode=mode)
    inputs = build_eval_inputs(*pieces)
    if with_ideal:
        inputs = attach_ideal(inputs, random_ideal_classes(rng, inputs))
    return inputs


def ideal_from_partition(inputs: EvalInputs, index) -> EvalInputs:
    """Attach an ideal that equals the given side's expanded partition."""
    owner = index.owner_map()
    return attach_ideal(inputs, {e: f"cls:{owner[e]}" for e in inputs.elements})


def swapped(inputs: EvalInputs) -> EvalInputs:
    """The same problem with base and experiment roles exchanged."""
    return dataclasses.replace(
        inputs,
        base=inputs.exp,
        exp=inputs.base,
        census=dataclasses.replace(
            inputs.census,
            ids_base=inputs.census.ids_exp,
            ids_exp=inputs.census.ids_base,
        ),
    )


def scaled_weights(inputs: EvalInputs, factor: float) -> EvalInputs:
    return dataclasses.replace(
        inputs,
        weights=WeightMap(
            {e: factor * w for e, w in inputs.weights.items()}, validate=False
        ),
    )


def oracle_view(inputs: EvalInputs):
    """Plain dict/set projection of an evaluation problem for oracle.py."""
    weights = dict(inputs.weights.items())
    base = {cid: set(m) for cid, m in inputs.base.clusters.items()}
    exp = {cid: set(m) for cid, m in inputs.exp.clusters.items()}
    ideal = (
        {cid: set(m) for cid, m in inputs.ideal.clusters.items()}
        if inputs.ideal is not None
        else None
    )
    return base, exp, ideal, weights


def report_values(report) -> dict[str, float]:
    """Flatten a MetricsReport into oracle-keyed floats."""
    out = {
        "jaccard_distance": report.impact.jaccard_distance,
        "split_rate": report.impact.split_rate,
        "merge_rate": report.impact.merge_rate,
        "total_weight": report.total_weight,
    }
    if report.quality is not None:
        out.update(
            good_split_rate=report.quality.good_split_rate,
            bad_split_rate=report.quality.bad_split_rate,
            good_merge_rate=report.quality.good_merge_rate,
            bad_merge_rate=report.quality.bad_merge_rate,
            delta_precision=report.quality.delta_precision,
            delta_recall=report.quality.delta_recall,
            iq=report.quality.iq,
            d_base_ideal=report.distances.base_to_ideal,
            d_exp_ideal=report.distances.exp_to_ideal,
            d_base_exp=report.distances.base_to_exp,
        )
    return out


@pytest.fixture
def rng():
    return random.Random(20260814)


ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    """Register one acceptance-criterion verdict for the terminal summary."""
    line = f"CRITERION {number}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
