"""The three discovery rules on one posterior-probability vector.

The running-mean rule accepts the longest top slice whose average miss
probability stays below the target level; the conservative rule thresholds
each transcript alone; the loss rule trades false discoveries against
misses at a fixed cost ratio.
"""

import numpy as np

from txdiff.decisions import fdr_threshold_select, loss_rule, loss_threshold, naive_rule

rng = np.random.default_rng(3)
probs = np.sort(np.concatenate([
    rng.uniform(0.9, 1.0, 12),      # strong candidates
    rng.uniform(0.3, 0.9, 20),      # middling
    rng.uniform(0.0, 0.3, 68),      # background
]))[::-1]

alpha = 0.05
t = fdr_threshold_select(probs, alpha)
n = naive_rule(probs, alpha)
l19 = loss_rule(probs, 19.0)

print(f"{probs.size} transcripts, target level {alpha}")
print(f"running-mean rule: {t.n_discoveries} discoveries, "
      f"expected FDR {t.expected_fdr:.4f}")
print(f"per-transcript rule (p > {1 - alpha}): {n.n_discoveries} discoveries")
print(f"loss rule (cost 19, cutoff {loss_threshold(19.0):.2f}): "
      f"{l19.n_discoveries} discoveries")
print()
print("top of the ranking (probability, running mean of miss probability):")
run = np.cumsum(1 - probs) / np.arange(1, probs.size + 1)
for i in range(16):
    mark = "accepted" if i < t.n_discoveries else ""
    print(f"  {i + 1:3d}  p={probs[i]:.3f}  G={run[i]:.4f}  {mark}")
