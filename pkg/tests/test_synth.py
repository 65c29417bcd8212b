import numpy as np
import pytest
from synthdata import make_aset, random_tiny_aset

from txdiff.model import PriorConfig
from txdiff.synth import (
    ScenarioSpec,
    brute_force_posterior,
    enumerate_reference_posterior,
    generate_scenario,
    write_truth_tsv,
)


class TestGenerator:
    def test_deterministic(self):
        spec = ScenarioSpec(k=20, n_de=4, reads_per_replicate=(500, 500), seed=9)
        a1, t1 = generate_scenario(spec)
        a2, t2 = generate_scenario(spec)
        assert a1 == a2
        assert (t1.labels == t2.labels).all()
        assert (t1.theta == t2.theta).all()

    def test_fold_change_structure(self):
        spec = ScenarioSpec(
            k=40, n_de=10, mean_model=("constant", 65.0), fold=("fixed", 5.0),
            reads_per_replicate=(2000, 2000), seed=3,
        )
        _, truth = generate_scenario(spec)
        assert truth.labels.sum() == 10
        de = np.flatnonzero(truth.labels == 1)
        ratios = truth.theta[de] / truth.w[de]
        # half up / half down with mean-level fold 5 (replicate noise on top)
        assert np.sum(ratios > 2) == 5
        assert np.sum(ratios < 0.5) == 5

    def test_global_null(self):
        spec = ScenarioSpec(k=30, n_de=0, reads_per_replicate=(1000, 1000), seed=4)
        aset, truth = generate_scenario(spec)
        assert truth.labels.sum() == 0
        assert aset.r == 2000 and aset.s == 2000

    def test_read_origin_matches_abundance(self):
        # with no shared blocks every read tags its source directly
        spec = ScenarioSpec(
            k=50, n_de=0, replicates=(1, 1), reads_per_replicate=(100000, 1000),
            shared_frac=0.0, seed=6,
        )
        aset, truth = generate_scenario(spec)
        counts = np.zeros(50)
        rs = aset.reads_a
        for i in range(rs.n_reads):
            tr, _ = rs.read(i)
            counts[tr[0]] += 1
        props = counts / counts.sum()
        assert np.abs(props - truth.theta).sum() < 0.02

    def test_infeasible_spec_rejected(self):
        with pytest.raises(ValueError):
            ScenarioSpec(read_length=500, length_range=(300, 400))
        with pytest.raises(ValueError):
            ScenarioSpec(n_de=3)

    def test_truth_tsv(self, tmp_path):
        spec = ScenarioSpec(k=5, n_de=2, reads_per_replicate=(50, 50), seed=7)
        aset, truth = generate_scenario(spec)
        p = tmp_path / "truth.tsv"
        write_truth_tsv(p, aset.catalog, truth)
        lines = p.read_text().strip().split("\n")
        assert len(lines) == 6
        assert lines[0].startswith("transcript_id")


class TestOracle:
    def test_zero_reads_fixed_pi(self):
        aset = make_aset(2, [], [])
        res = brute_force_posterior(aset, PriorConfig(pi=0.5))
        np.testing.assert_allclose(res["p_state"], [0.5, 0.5], atol=1e-12)
        np.testing.assert_allclose(res["p_de"], [0.5, 0.5], atol=1e-12)

    def test_one_read_each_hand_computed(self):
        # one read per condition, both uniquely on the first of two
        # transcripts, unit hyperparameters, fixed pi = 1/2:
        # the joint weights work out to 1/2 (shared) vs 3/8 (flagged),
        # so P(flagged) = 3/7
        aset = make_aset(2, [[0]], [[0]])
        res = brute_force_posterior(aset, PriorConfig(pi=0.5))
        idx = [tuple(c) for c in res["states"]]
        np.testing.assert_allclose(
            res["p_state"][idx.index((1, 1))], 3 / 7, atol=1e-12
        )
        np.testing.assert_allclose(res["p_de"], [3 / 7, 3 / 7], atol=1e-12)

    def test_jeffreys_one_read_each(self):
        # the two valid flag counts get equal marginal prior mass at K=2,
        # so the answer matches the fixed-1/2 case
        aset = make_aset(2, [[0]], [[0]])
        res = brute_force_posterior(aset, PriorConfig())
        np.testing.assert_allclose(res["p_de"], [3 / 7, 3 / 7], atol=1e-10)

    def test_matches_literal_enumeration(self):
        rng = np.random.default_rng(11)
        for _ in range(8):
            aset = random_tiny_aset(rng, k=3, n_a=3, n_b=3)
            for prior in (PriorConfig(pi=0.4), PriorConfig()):
                fast = brute_force_posterior(aset, prior)
                slow = enumerate_reference_posterior(aset, prior)
                np.testing.assert_allclose(fast["p_state"], slow["p_state"], atol=1e-10)
                np.testing.assert_allclose(fast["p_de"], slow["p_de"], atol=1e-10)

    def test_relabeling_equivariance(self):
        rng = np.random.default_rng(12)
        reads_a = [[0, 1], [2]]
        probs_a = [[0.2, 0.3], [0.4]]
        reads_b = [[1, 2]]
        probs_b = [[0.25, 0.15]]
        aset = make_aset(3, reads_a, reads_b, probs_a, probs_b)
        res = brute_force_posterior(aset, PriorConfig())
        # relabel transcripts with the permutation (2, 0, 1)
        perm = np.array([2, 0, 1])
        reads_a2 = [[perm[t] for t in r] for r in reads_a]
        reads_b2 = [[perm[t] for t in r] for r in reads_b]
        aset2 = make_aset(3, reads_a2, reads_b2, probs_a, probs_b)
        res2 = brute_force_posterior(aset2, PriorConfig())
        np.testing.assert_allclose(res2["p_de"][perm], res["p_de"], atol=1e-12)
        np.testing.assert_allclose(res2["e_theta"][perm], res["e_theta"], atol=1e-12)

    def test_posterior_mean_expression_sane(self):
        # all reads on the first transcript pull its expression up
        aset = make_aset(2, [[0]] * 5, [[0]] * 5)
        res = brute_force_posterior(aset, PriorConfig(pi=0.5))
        assert res["e_theta"][0] > 0.7
        np.testing.assert_allclose(res["e_theta"].sum(), 1.0, atol=1e-12)
        np.testing.assert_allclose(res["e_w"].sum(), 1.0, atol=1e-12)

    def test_budget_guard(self):
        aset = make_aset(5, [[0]], [[1]])
        with pytest.raises(ValueError):
            brute_force_posterior(aset, PriorConfig())
        aset = make_aset(2, [[0]] * 8, [[0]] * 8)
        with pytest.raises(ValueError):
            brute_force_posterior(aset, PriorConfig())

    def test_state_probs_normalize(self):
        rng = np.random.default_rng(13)
        aset = random_tiny_aset(rng, k=3, n_a=4, n_b=3)
        res = brute_force_posterior(aset, PriorConfig())
        np.testing.assert_allclose(res["p_state"].sum(), 1.0, atol=1e-12)
