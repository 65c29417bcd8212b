"""Shared helpers for building tiny in-memory alignment sets in tests."""

import numpy as np

from txdiff.ingest import AlignmentSet, ReadSet, TranscriptCatalog


def make_aset(k, reads_a, reads_b, probs_a=None, probs_b=None, lengths=None):
    """Build an alignment set from lists of target-index lists.

    probs default to 0.1 per alignment entry; pass parallel nested lists to
    override.
    """
    cat = TranscriptCatalog([f"T{i + 1}" for i in range(k)],
                            lengths if lengths is not None else [100] * k)

    def build(reads, probs, tag):
        ids, sizes, tr, pr = [], [], [], []
        for i, targets in enumerate(reads):
            ids.append(f"{tag}{i}")
            sizes.append(len(targets))
            tr.extend(targets)
            pr.extend(probs[i] if probs is not None else [0.1] * len(targets))
        offsets = np.concatenate([[0], np.cumsum(sizes)]) if sizes else [0]
        return ReadSet(ids, offsets, tr, pr)

    return AlignmentSet(cat, build(reads_a, probs_a, "a"), build(reads_b, probs_b, "b"))


def random_tiny_aset(rng, k=None, n_a=None, n_b=None, max_targets=None):
    """Random small instance with random alignment probabilities."""
    if k is None:
        k = int(rng.integers(2, 4))
    if n_a is None:
        n_a = int(rng.integers(1, 5))
    if n_b is None:
        n_b = int(rng.integers(1, 5))
    if max_targets is None:
        max_targets = k
    reads_a, probs_a = [], []
    for _ in range(n_a):
        n_t = int(rng.integers(1, max_targets + 1))
        reads_a.append(sorted(rng.choice(k, size=n_t, replace=False).tolist()))
        probs_a.append(rng.uniform(0.01, 0.5, size=n_t).tolist())
    reads_b, probs_b = [], []
    for _ in range(n_b):
        n_t = int(rng.integers(1, max_targets + 1))
        reads_b.append(sorted(rng.choice(k, size=n_t, replace=False).tolist()))
        probs_b.append(rng.uniform(0.01, 0.5, size=n_t).tolist())
    return make_aset(k, reads_a, reads_b, probs_a, probs_b)
