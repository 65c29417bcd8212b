"""Full pipeline on a synthetic scenario: simulate, infer, decide.

Generates a 100-transcript dataset with ten fold-4 changes, runs the
clustered collapsed sampler over a two-worker pool, and reports discovery
quality against the generating truth.  Runs in under a minute.
"""

import tempfile
from pathlib import Path

import numpy as np

from txdiff.ingest import write_alignments, write_catalog
from txdiff.runner import RunConfig, orchestrate
from txdiff.synth import ScenarioSpec, generate_scenario, write_truth_tsv

work = Path(tempfile.mkdtemp(prefix="txdiff_demo_"))
spec = ScenarioSpec(
    k=100, n_de=10, mean_model=("constant", 65.0), fold=("fixed", 4.0),
    replicates=(2, 2), reads_per_replicate=(5000, 5000),
    group_size=3, shared_frac=0.5, seed=7,
)
aset, truth = generate_scenario(spec)
write_catalog(work / "catalog.tsv", aset.catalog)
write_alignments(work / "cond_a.tsv", aset.reads_a, aset.catalog)
write_alignments(work / "cond_b.tsv", aset.reads_b, aset.catalog)
write_truth_tsv(work / "truth.tsv", aset.catalog, truth)
print(f"simulated {aset.r} + {aset.s} reads over {aset.catalog.n} transcripts -> {work}")

cfg = RunConfig(
    catalog=str(work / "catalog.tsv"),
    cond_a=[str(work / "cond_a.tsv")],
    cond_b=[str(work / "cond_b.tsv")],
    out=str(work / "out"),
    chains=4, iters=2500, burnin=500, thin=5,
    fdr_alpha=0.05, threads=2, seed=1, fc_filter=1.0,
)
info = orchestrate(cfg)
print(f"{info['n_clusters']} clusters, {info['n_discoveries']} discoveries, "
      f"expected FDR {info['expected_fdr']:.4f}")

rows = (work / "out" / "decisions.tsv").read_text().strip().split("\n")[1:]
dec = np.array([int(r.split("\t")[6]) for r in rows])
tp = int(np.sum((dec == 1) & (truth.labels == 1)))
fp = int(np.sum((dec == 1) & (truth.labels == 0)))
print(f"against truth: {tp} true and {fp} false discoveries "
      f"of {truth.labels.sum()} changed transcripts")
print(f"estimates: {info['estimates']}")

try:
    from txreport.figures import FigureJob, render

    render(FigureJob(kind="roc", out=str(work / "roc.png"),
                     estimates=str(work / "out" / "estimates.tsv"),
                     truth=str(work / "truth.tsv")))
    print(f"ROC figure: {work / 'roc.png'}")
except ImportError:
    print("install the reportviz package for figures")
