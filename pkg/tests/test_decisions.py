import numpy as np
import pytest

from txdiff.decisions import (
    fdr_threshold_select,
    loss_rule,
    loss_threshold,
    naive_rule,
    write_decision_tsv,
)


class TestThresholdRule:
    def test_worked_example(self):
        rep = fdr_threshold_select([0.99, 0.97, 0.90, 0.50], 0.05)
        assert rep.n_discoveries == 3
        assert rep.decisions.tolist() == [1, 1, 1, 0]
        np.testing.assert_allclose(rep.expected_fdr, (0.01 + 0.03 + 0.10) / 3)

    def test_certain_flags_always_accepted(self):
        rep = fdr_threshold_select(np.ones(5), 0.001)
        assert rep.n_discoveries == 5
        assert rep.expected_fdr == 0.0

    def test_weak_top_gives_empty_set(self):
        rep = fdr_threshold_select([0.5, 0.4], 0.05)
        assert rep.n_discoveries == 0
        assert rep.expected_fdr == 0.0

    def test_guarantee_holds_on_random_inputs(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            probs = rng.uniform(0, 1, size=rng.integers(1, 60))
            alpha = rng.uniform(0.01, 0.5)
            rep = fdr_threshold_select(probs, alpha)
            if rep.n_discoveries:
                accepted = probs[rep.decisions == 1]
                assert np.mean(1 - accepted) <= alpha + 1e-12

    def test_monotone_in_alpha(self):
        rng = np.random.default_rng(1)
        probs = rng.uniform(0, 1, size=40)
        sizes = [
            fdr_threshold_select(probs, a).n_discoveries
            for a in (0.01, 0.05, 0.1, 0.2, 0.5)
        ]
        assert sizes == sorted(sizes)

    def test_naive_subset_of_threshold(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            probs = rng.uniform(0, 1, size=30)
            alpha = rng.uniform(0.02, 0.3)
            hard = naive_rule(probs, alpha).decisions
            soft = fdr_threshold_select(probs, alpha).decisions
            assert (soft >= hard).all()

    def test_ties_broken_by_index(self):
        rep = fdr_threshold_select([0.9, 0.9, 0.9], 0.2)
        assert rep.rank.tolist() == [1, 2, 3]


class TestNaiveRule:
    def test_worked_example(self):
        rep = naive_rule([0.99, 0.96, 0.90], 0.05)
        assert rep.decisions.tolist() == [1, 1, 0]

    def test_half_alpha(self):
        rep = naive_rule([0.6, 0.4], 0.5)
        assert rep.decisions.tolist() == [1, 0]

    def test_empty_input(self):
        rep = naive_rule(np.empty(0), 0.1)
        assert rep.n_discoveries == 0


class TestLossRule:
    def test_threshold_values(self):
        assert loss_threshold(19) == 0.95
        assert loss_threshold(1) == 0.5
        assert loss_threshold(1e9) > 0.999999

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            loss_threshold(0)

    def test_rule(self):
        rep = loss_rule([0.96, 0.94], 19)
        assert rep.decisions.tolist() == [1, 0]


class TestEligibility:
    def test_filtered_entries_never_accepted(self):
        probs = np.array([0.99, 0.98, 0.97])
        eligible = np.array([True, False, True])
        rep = fdr_threshold_select(probs, 0.1, eligible)
        assert rep.decisions.tolist() == [1, 0, 1]

    def test_write_tsv(self, tmp_path):
        probs = np.array([0.9, 0.1])
        rep = fdr_threshold_select(probs, 0.2)
        path = tmp_path / "decisions.tsv"
        write_decision_tsv(
            path, ["T1", "T2"], [1, 1], probs, [0.6, 0.4], [0.3, 0.7],
            [1.0, -0.8], rep, ["ok", "ok"],
        )
        lines = path.read_text().strip().split("\n")
        assert lines[0].split("\t") == [
            "transcript_id", "cluster", "p_de", "theta_mean", "w_mean",
            "log2fc", "decision", "flag",
        ]
        assert lines[1].split("\t")[6] == "1"
        assert lines[2].split("\t")[6] == "0"
