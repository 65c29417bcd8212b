"""Turning posterior flag probabilities into discovery lists.

Three rules: a running-mean threshold that controls the posterior expected
false discovery proportion at a target level, the conservative per-transcript
cutoff, and a loss-ratio cutoff.
"""

from dataclasses import dataclass

import numpy as np


@dataclass
class DecisionReport:
    rule: str
    level: float               # target level (threshold/naive) or cost (loss)
    decisions: np.ndarray      # 0/1 per transcript, input order
    rank: np.ndarray           # 1-based position in the descending ranking
    n_discoveries: int
    expected_fdr: float        # mean of (1 - prob) over the accepted set


def _ranking(probs, eligible):
    """Descending by probability, ties broken by ascending index; ineligible
    entries rank last."""
    probs = np.asarray(probs, dtype=np.float64)
    n = probs.size
    key = np.where(eligible, probs, -np.inf)
    order = np.lexsort((np.arange(n), -key))
    rank = np.empty(n, dtype=np.int64)
    rank[order] = np.arange(1, n + 1)
    return order, rank


def _report(rule, level, probs, order, rank, g):
    n = probs.size
    decisions = np.zeros(n, dtype=np.int8)
    decisions[order[:g]] = 1
    efdr = float(np.mean(1.0 - probs[order[:g]])) if g else 0.0
    return DecisionReport(
        rule=rule, level=level, decisions=decisions, rank=rank,
        n_discoveries=int(g), expected_fdr=efdr,
    )


def fdr_threshold_select(probs, alpha, eligible=None):
    """Accept the longest top slice whose running mean of (1 - prob) stays
    at or below alpha; that mean is the posterior expected FDR of the slice."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    probs = np.asarray(probs, dtype=np.float64)
    if eligible is None:
        eligible = np.ones(probs.size, dtype=bool)
    order, rank = _ranking(probs, eligible)
    n_el = int(eligible.sum())
    if n_el == 0:
        return _report("threshold", alpha, probs, order, rank, 0)
    q = probs[order[:n_el]]
    running = np.cumsum(1.0 - q) / np.arange(1, n_el + 1)
    g = int(np.searchsorted(running, alpha, side="right"))
    return _report("threshold", alpha, probs, order, rank, g)


def naive_rule(probs, alpha, eligible=None):
    """Accept transcripts with probability strictly above 1 - alpha."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    probs = np.asarray(probs, dtype=np.float64)
    if eligible is None:
        eligible = np.ones(probs.size, dtype=bool)
    order, rank = _ranking(probs, eligible)
    g = int(np.sum((probs > 1.0 - alpha) & eligible))
    return _report("naive", alpha, probs, order, rank, g)


def loss_threshold(cost):
    """Probability cutoff minimizing cost * E(false discoveries) + E(false
    negatives): accept above cost / (cost + 1)."""
    if not cost > 0:
        raise ValueError("cost must be positive")
    return cost / (cost + 1.0)


def loss_rule(probs, cost, eligible=None):
    probs = np.asarray(probs, dtype=np.float64)
    if eligible is None:
        eligible = np.ones(probs.size, dtype=bool)
    order, rank = _ranking(probs, eligible)
    g = int(np.sum((probs > loss_threshold(cost)) & eligible))
    return _report("loss", cost, probs, order, rank, g)


def write_decision_tsv(path, ids, clusters, probs, theta, w, log2fc, report, flags):
    """Decision table, one row per transcript, 1-based cluster labels."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(
            "transcript_id\tcluster\tp_de\ttheta_mean\tw_mean\tlog2fc\tdecision\tflag\n"
        )
        for i, tid in enumerate(ids):
            fh.write(
                f"{tid}\t{clusters[i]}\t{probs[i]:.6f}\t{theta[i]:.8e}\t{w[i]:.8e}"
                f"\t{log2fc[i]:.4f}\t{int(report.decisions[i])}\t{flags[i]}\n"
            )
