import pytest

from conftest import cur, his, make_current, make_hist, unit_weights
from ideval.errors import InputError, NotABijection
from ideval.model import LabeledClustering, WeightMap
from ideval.schemes import assign_by_majority_vote, assign_fresh_ids, permute_ids


class TestFreshIds:
    def test_ids_follow_smallest_member_order(self):
        clustering = make_current({"a": ["zeta", "beta"], "b": ["alpha"]})
        result = assign_fresh_ids(clustering)
        assert result.labels.clusters["id_1"] == frozenset(
            [cur("alpha")]
        )
        assert result.labels.clusters["id_2"] == frozenset(
            [cur("zeta"), cur("beta")]
        )
        assert result.minted == {"id_1", "id_2"}
        assert result.adopted == {}

    def test_prefix_and_start(self):
        clustering = make_current({"a": ["x"]})
        result = assign_fresh_ids(clustering, prefix="run7_", start=40)
        assert set(result.labels.clusters) == {"run7_40"}

    def test_rejects_non_current_elements(self):
        clustering = LabeledClustering({"a": frozenset([his("x")])})
        with pytest.raises(InputError):
            assign_fresh_ids(clustering)


class TestMajorityVote:
    def hist(self):
        return make_hist({"id_1": ["x1", "x2"], "id_2": ["x3"]})

    def test_adopts_ids_where_members_went(self):
        # the Fig. 1 baseline: {x1} and {x2, x3}
        clustering = make_current({"a": ["x1"], "b": ["x2", "x3"]})
        hist = self.hist()
        result = assign_by_majority_vote(clustering, hist, unit_weights(hist))
        assert result.labels.clusters["id_1"] == frozenset([cur("x1")])
        assert result.labels.clusters["id_2"] == frozenset([cur("x2"), cur("x3")])
        assert result.adopted == {"id_1": "id_1", "id_2": "id_2"}
        assert result.minted == frozenset()

    def test_higher_vote_wins_the_id(self):
        # id_1's weight sits mostly in the second cluster
        clustering = make_current({"a": ["x1"], "b": ["x2"]})
        hist = make_hist({"id_1": ["x1", "x2"]})
        weights = WeightMap({his("x1"): 1.0, his("x2"): 5.0})
        result = assign_by_majority_vote(clustering, hist, weights)
        assert result.labels.clusters["id_1"] == frozenset([cur("x2")])
        assert result.minted == {"id_2"}  # fresh id skips the used id_1

    def test_tied_vote_goes_to_smallest_cluster_key(self):
        clustering = make_current({"b": ["x2"], "a": ["x1"]})
        hist = make_hist({"id_1": ["x1", "x2"]})
        result = assign_by_majority_vote(clustering, hist, unit_weights(hist))
        assert result.labels.clusters["id_1"] == frozenset([cur("x1")])

    def test_cluster_keeps_highest_voted_of_several_won_ids(self):
        clustering = make_current({"a": ["x1", "x2", "x3"]})
        hist = make_hist({"id_1": ["x1"], "id_2": ["x2", "x3"]})
        result = assign_by_majority_vote(clustering, hist, unit_weights(hist))
        # it wins both ids; id_2 brought vote weight 2 vs 1
        assert set(result.labels.clusters) == {"id_2"}
        assert result.adopted == {"id_2": "id_2"}

    def test_votes_use_historical_weights_not_current(self):
        clustering = make_current({"a": ["x1"], "b": ["x2", "x3"]})
        hist = make_hist({"id_1": ["x1", "x2", "x3"]})
        weights = WeightMap({his("x1"): 10.0, his("x2"): 1.0, his("x3"): 1.0})
        result = assign_by_majority_vote(clustering, hist, weights)
        assert result.labels.clusters["id_1"] == frozenset([cur("x1")])

    def test_fresh_ids_skip_all_historical_ids(self):
        clustering = make_current({"a": ["y1"], "b": ["y2"]})
        hist = make_hist({"id_1": ["x1"], "id_2": ["x2"]})
        result = assign_by_majority_vote(clustering, hist, unit_weights(hist))
        # no votes anywhere; minted ids must not collide with history
        assert set(result.labels.clusters) == {"id_3", "id_4"}
        assert result.minted == {"id_3", "id_4"}

    def test_each_id_assigned_at_most_once(self, rng):
        for _ in range(50):
            items = [f"x{i}" for i in range(rng.randint(1, 6))]
            n_parts = rng.randint(1, len(items))
            parts: dict[int, list[str]] = {}
            for item in items:
                parts.setdefault(rng.randrange(n_parts), []).append(item)
            clustering = make_current(
                {f"c{j}": members for j, members in parts.items()}
            )
            hist_parts: dict[int, list[str]] = {}
            for item in items:
                if rng.random() < 0.8:
                    hist_parts.setdefault(rng.randrange(3), []).append(item)
            hist = make_hist(
                {f"id_{j}": members for j, members in hist_parts.items()}
            )
            result = assign_by_majority_vote(clustering, hist, unit_weights(hist))
            ids = list(result.labels.clusters)
            assert len(ids) == len(set(ids)) == len(clustering.clusters)
            assert result.labels.partition() == clustering.partition()


class TestPermuteIds:
    def test_swap_relabels_clusters(self):
        clustering = make_current({"a": ["x1"], "b": ["x2", "x3"]})
        hist = make_hist({"id_1": ["x1", "x2"], "id_2": ["x3"]})
        result = assign_by_majority_vote(clustering, hist, unit_weights(hist))
        swapped = permute_ids(result, {"id_1": "id_2", "id_2": "id_1"})
        assert swapped.labels.clusters["id_2"] == frozenset([cur("x1")])
        assert swapped.labels.clusters["id_1"] == frozenset([cur("x2"), cur("x3")])

    def test_identity_permutation(self):
        result = assign_fresh_ids(make_current({"a": ["x"]}))
        same = permute_ids(result, {"id_1": "id_1"})
        assert same.labels.clusters == result.labels.clusters

    @pytest.mark.parametrize(
        "mapping",
        [
            {},
            {"id_1": "id_1", "extra": "extra"},
            {"id_1": "other"},
        ],
    )
    def test_non_bijections_rejected(self, mapping):
        result = assign_fresh_ids(make_current({"a": ["x"]}))
        with pytest.raises(NotABijection):
            permute_ids(result, mapping)
