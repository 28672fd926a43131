import itertools
import math
import random

import pytest

import oracle
from conftest import (
    cur,
    fig1_raw,
    oracle_view,
    random_eval_inputs,
    report_values,
    syn,
)
from ideval.errors import (
    InputError,
    InsufficientCoverage,
    JudgementConflict,
    NothingToSample,
    ParseError,
    UnknownElement,
    UnknownPair,
)
from ideval.judgement import (
    JudgementSet,
    Source,
    Verdict,
    auto_judge,
    estimate_quality_from_judgements,
    find_inconsistencies,
    ingest_verdicts,
    make_pair,
    read_pairs_tsv,
    sample_pairs,
    write_pairs_tsv,
)
from ideval.metrics import aggregate_quality, evaluate
from ideval.transform import build_eval_inputs


def quality_inputs(seed=21, **kw):
    rng = random.Random(seed)
    while True:
        inputs = random_eval_inputs(rng, **kw)
        if evaluate(inputs).impact.jaccard_distance > 0:
            return inputs


def full_coverage_judgements(inputs) -> JudgementSet:
    """Spanning-tree equivalences per ideal class plus cross-class pairs."""
    pairs = []
    classes = list(inputs.ideal.clusters.values())
    for members in classes:
        ordered = sorted(members)
        for a, b in zip(ordered, ordered[1:]):
            pairs.append(make_pair(a, b, Verdict.EQUIVALENT, Source.HUMAN))
    for left_members, right_members in itertools.combinations(classes, 2):
        pairs.append(
            make_pair(
                next(iter(left_members)),
                next(iter(right_members)),
                Verdict.DISTINCT,
                Source.HUMAN,
            )
        )
    return JudgementSet(pairs=tuple(pairs))


class TestMakePairAndAutoJudge:
    def test_pairs_are_canonically_ordered(self):
        pair = make_pair(cur("z"), cur("a"))
        assert (pair.left, pair.right) == (cur("a"), cur("z"))

    def test_self_pair_rejected(self):
        with pytest.raises(InputError):
            make_pair(cur("a"), cur("a"))

    def test_synthetic_sides_are_auto_distinct(self):
        pairs = (
            make_pair(cur("a"), syn("id_9")),
            make_pair(cur("a"), cur("b")),
            make_pair(cur("c"), syn("id_9"), Verdict.EQUIVALENT, Source.HUMAN),
        )
        judged = auto_judge(pairs)
        assert judged[0].verdict is Verdict.DISTINCT
        assert judged[0].source is Source.AUTO
        assert judged[1].verdict is Verdict.UNJUDGED
        # a human verdict is never overwritten
        assert judged[2].verdict is Verdict.EQUIVALENT
        assert auto_judge(judged) == judged


class TestSamplePairs:
    def test_deterministic_for_a_seed(self):
        inputs = quality_inputs()
        a = sample_pairs(inputs, 5, seed=42)
        b = sample_pairs(inputs, 5, seed=42)
        assert a == b
        assert a.seed == 42

    def test_pairs_span_an_actual_difference(self):
        inputs = quality_inputs()
        judgements = sample_pairs(inputs, 8, seed=1)
        assert judgements.pairs
        for pair in judgements.pairs:
            in_left_diff = pair.right in (
                inputs.base_index.members_of(pair.left)
                ^ inputs.exp_index.members_of(pair.left)
            )
            in_right_diff = pair.left in (
                inputs.base_index.members_of(pair.right)
                ^ inputs.exp_index.members_of(pair.right)
            )
            assert in_left_diff or in_right_diff

    def test_identity_run_has_nothing_to_sample(self):
        hist, hist_weights, base, _, items = fig1_raw()
        inputs = build_eval_inputs(hist, hist_weights, base, base, items)
        with pytest.raises(NothingToSample):
            sample_pairs(inputs, 3, seed=0)

    def test_n_pairs_must_be_positive(self):
        inputs = quality_inputs()
        with pytest.raises(InputError):
            sample_pairs(inputs, 0, seed=0)

    def test_file_round_trip(self, tmp_path):
        inputs = quality_inputs()
        judgements = sample_pairs(inputs, 6, seed=3)
        path = tmp_path / "pairs.tsv"
        write_pairs_tsv(path, judgements)
        reread = read_pairs_tsv(path)
        assert reread.pairs == judgements.pairs


class TestIngestVerdicts:
    def setup_files(self, tmp_path, verdict_rows):
        inputs = quality_inputs()
        judgements = sample_pairs(inputs, 6, seed=7)
        pairs_path = tmp_path / "pairs.tsv"
        write_pairs_tsv(pairs_path, judgements)
        verdicts_path = tmp_path / "verdicts.tsv"
        verdicts_path.write_text("".join(verdict_rows(judgements)), encoding="utf-8")
        return inputs, judgements, pairs_path, verdicts_path

    def test_latest_row_wins(self, tmp_path):
        def rows(judgements):
            pair = judgements.pairs[0]
            key = f"{pair.left.key()}\t{pair.right.key()}"
            return [f"{key}\tequiv\n", f"{key}\tdistinct\n"]

        _, judgements, pairs_path, verdicts_path = self.setup_files(tmp_path, rows)
        merged = ingest_verdicts(pairs_path, verdicts_path)
        target = merged.pairs[0]
        assert target.verdict is Verdict.DISTINCT
        assert target.source is Source.HUMAN

    def test_reversed_element_order_is_accepted(self, tmp_path):
        def rows(judgements):
            pair = judgements.pairs[0]
            return [f"{pair.right.key()}\t{pair.left.key()}\tunsure\n"]

        _, _, pairs_path, verdicts_path = self.setup_files(tmp_path, rows)
        merged = ingest_verdicts(pairs_path, verdicts_path)
        assert merged.pairs[0].verdict is Verdict.DISCARDED

    def test_unsampled_pair_rejected(self, tmp_path):
        def rows(judgements):
            return ["cur:ghost-a\tcur:ghost-b\tequiv\n"]

        _, _, pairs_path, verdicts_path = self.setup_files(tmp_path, rows)
        with pytest.raises(UnknownPair):
            ingest_verdicts(pairs_path, verdicts_path)

    def test_unknown_verdict_token_rejected(self, tmp_path):
        def rows(judgements):
            pair = judgements.pairs[0]
            return [f"{pair.left.key()}\t{pair.right.key()}\tmaybe\n"]

        _, _, pairs_path, verdicts_path = self.setup_files(tmp_path, rows)
        with pytest.raises(ParseError):
            ingest_verdicts(pairs_path, verdicts_path)

    def test_without_verdict_file_returns_pairs(self, tmp_path):
        _, judgements, pairs_path, _ = self.setup_files(tmp_path, lambda j: [])
        assert ingest_verdicts(pairs_path).pairs == judgements.pairs


class TestFindInconsistencies:
    def test_contradiction_via_chain(self):
        a, b, c = cur("a"), cur("b"), cur("c")
        judgements = JudgementSet(
            pairs=(
                make_pair(a, b, Verdict.EQUIVALENT, Source.HUMAN),
                make_pair(b, c, Verdict.EQUIVALENT, Source.HUMAN),
                make_pair(a, c, Verdict.DISTINCT, Source.HUMAN),
            )
        )
        conflicts = find_inconsistencies(judgements)
        assert len(conflicts) == 1
        left, right, chain = conflicts[0]
        assert (left, right) == (a, c)
        assert chain == (a, b, c)

    def test_consistent_judgements_have_no_conflicts(self):
        inputs = quality_inputs()
        judgements = full_coverage_judgements(inputs)
        assert find_inconsistencies(judgements) == []


class TestEstimate:
    def test_full_coverage_equals_exact_quality(self):
        for seed in (21, 22, 23, 24):
            inputs = quality_inputs(seed)
            estimate = estimate_quality_from_judgements(
                inputs, full_coverage_judgements(inputs)
            )
            exact = aggregate_quality(inputs)
            assert estimate.quality == exact.quality
            assert estimate.impact == exact.impact
            assert estimate.distances == exact.distances
            assert estimate.estimate is True
            assert estimate.coverage_weight == exact.total_weight

    def test_partial_coverage_matches_restricted_oracle(self):
        for seed in (31, 32, 33):
            inputs = quality_inputs(seed)
            judgements = JudgementSet(
                pairs=tuple(
                    p
                    for p in full_coverage_judgements(inputs).pairs
                    if p.verdict is not Verdict.UNJUDGED
                )[::2]  # drop every other pair to break full coverage
            )
            judged = judgements.judged()
            if not judged:
                continue
            estimate = estimate_quality_from_judgements(inputs, judgements)

            covered = set()
            groups: list[set] = []
            for pair in judged:
                covered.update((pair.left, pair.right))
                if pair.verdict is Verdict.EQUIVALENT:
                    hit = [g for g in groups if pair.left in g or pair.right in g]
                    merged = {pair.left, pair.right}.union(*hit) if hit else {
                        pair.left,
                        pair.right,
                    }
                    groups = [g for g in groups if g not in hit]
                    groups.append(merged)
            grouped = set().union(*groups) if groups else set()
            classes = {f"g{i}": g for i, g in enumerate(groups)}
            classes.update(
                {f"s{i}": {e} for i, e in enumerate(covered - grouped)}
            )

            base, exp, _, weights = oracle_view(inputs)
            restrict = lambda clusters: {
                cid: members & covered
                for cid, members in clusters.items()
                if members & covered
            }
            weights_s = {e: weights[e] for e in covered}
            want = oracle.aggregate(
                restrict(base), restrict(exp), weights_s, classes
            )
            got = report_values(estimate)
            for key, value in want.items():
                if key == "total_weight":
                    assert estimate.coverage_weight == pytest.approx(
                        value, abs=1e-12
                    )
                else:
                    assert got[key] == pytest.approx(value, abs=1e-12), key
            assert estimate.total_weight == pytest.approx(
                inputs.total_weight(), abs=1e-12
            )

    def test_contradictions_are_fatal(self):
        inputs = quality_inputs()
        a, b, c = inputs.elements[:3]
        judgements = JudgementSet(
            pairs=(
                make_pair(a, b, Verdict.EQUIVALENT, Source.HUMAN),
                make_pair(b, c, Verdict.EQUIVALENT, Source.HUMAN),
                make_pair(a, c, Verdict.DISTINCT, Source.HUMAN),
            )
        )
        with pytest.raises(JudgementConflict) as err:
            estimate_quality_from_judgements(inputs, judgements)
        assert err.value.triangles

    def test_no_judged_pairs_is_insufficient(self):
        inputs = quality_inputs()
        pair = make_pair(*inputs.elements[:2])  # unjudged
        with pytest.raises(InsufficientCoverage):
            estimate_quality_from_judgements(inputs, JudgementSet(pairs=(pair,)))

    def test_unsure_pairs_do_not_count_as_coverage(self):
        inputs = quality_inputs()
        a, b = inputs.elements[:2]
        judgements = JudgementSet(
            pairs=(make_pair(a, b, Verdict.DISCARDED, Source.HUMAN),)
        )
        with pytest.raises(InsufficientCoverage):
            estimate_quality_from_judgements(inputs, judgements)

    def test_foreign_elements_rejected(self):
        inputs = quality_inputs()
        judgements = JudgementSet(
            pairs=(
                make_pair(
                    cur("definitely-not-here"),
                    inputs.elements[0],
                    Verdict.DISTINCT,
                    Source.HUMAN,
                ),
            )
        )
        with pytest.raises(UnknownElement):
            estimate_quality_from_judgements(inputs, judgements)

    def test_coverage_weight_sums_judged_elements(self):
        inputs = quality_inputs()
        judgements = full_coverage_judgements(inputs)
        assert judgements.coverage_weight(inputs) == pytest.approx(
            math.fsum(w for _, w in inputs.weights.items()), abs=1e-12
        )
