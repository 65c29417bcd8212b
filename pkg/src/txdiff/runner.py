"""End-to-end orchestration: ingest, cluster, per-cluster ensembles on a
worker pool, merge, decide, and write reports.

Per-cluster seeds are derived from (master seed, cluster label, chain id),
so results are bitwise independent of thread count and scheduling order.
"""

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .clusters import augment_cluster, break_bridge_reads, build_clusters, write_cluster_dump
from .decisions import fdr_threshold_select, loss_rule, naive_rule, write_decision_tsv
from .ingest import load_alignment_set
from .model import PriorConfig
from .samplers import ChainConfig, run_ensemble


@dataclass
class RunConfig:
    catalog: str
    cond_a: list
    cond_b: list
    out: str
    align_mode: str = "precomputed"
    sampler: str = "collapsed"
    chains: int = 6
    iters: int = 5000
    burnin: int = 1000
    thin: int = 5
    prior: str = "jeffreys"          # "jeffreys" or "fixed:P"
    fdr_alpha: float = 0.05
    rule: str = "threshold"          # "threshold" | "naive" | "loss:C"
    threads: int = 1
    seed: int = 0
    dump_draws: bool = False
    cluster_dump: bool = False
    fc_filter: float | None = None   # min |log2 fold change|, None disables
    max_cluster_reads_break: int | None = None
    audit_every: int = 1000

    def prior_config(self):
        if self.prior == "jeffreys":
            return PriorConfig()
        if self.prior.startswith("fixed:"):
            return PriorConfig(pi=float(self.prior.split(":", 1)[1]))
        raise ValueError(f"unknown prior mode {self.prior!r}")


def parse_prior(text):
    return RunConfig(catalog="", cond_a=[], cond_b=[], out="", prior=text).prior_config()


def _acf_median_abs(theta_draws, n_chains, n_lags=50):
    """Median over transcripts of |autocorrelation| of log expression,
    averaged over chains, at lags 1..n_lags."""
    n_total, k = theta_draws.shape
    per = n_total // n_chains
    acf = np.zeros((n_lags, k))
    for ch in range(n_chains):
        block = np.log(theta_draws[ch * per : (ch + 1) * per])
        block = block - block.mean(axis=0)
        var = (block * block).mean(axis=0)
        var[var == 0] = 1.0
        for lag in range(1, n_lags + 1):
            if lag >= per:
                continue
            cov = (block[lag:] * block[:-lag]).mean(axis=0)
            acf[lag - 1] += cov / var
    acf /= n_chains
    return np.median(np.abs(acf), axis=1)


def orchestrate(cfg: RunConfig):
    """Run the full pipeline; returns the output file paths."""
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    prior = cfg.prior_config()

    aset = load_alignment_set(cfg.catalog, cfg.cond_a, cfg.cond_b, cfg.align_mode)
    n_dropped = 0
    if cfg.max_cluster_reads_break is not None:
        aset, n_dropped = break_bridge_reads(aset, cfg.max_cluster_reads_break)
    part = build_clusters(aset)
    if cfg.cluster_dump:
        write_cluster_dump(out / "clusters.tsv", aset, part)

    jobs = sorted(range(len(part.clusters)),
                  key=lambda j: (-part.clusters[j].n_reads, part.clusters[j].label))
    largest = jobs[0] if jobs else None

    def run_job(j):
        cluster = augment_cluster(aset, part, j, prior)
        record = 2 if (cfg.dump_draws or j == largest) else 0
        chain_cfg = ChainConfig(
            n_chains=cfg.chains, iterations=cfg.iters, burnin=cfg.burnin,
            thin=cfg.thin, kind=cfg.sampler, seed=cfg.seed,
            audit_every=cfg.audit_every, record=record,
        )
        t0 = time.perf_counter()
        try:
            summary = run_ensemble(cluster, chain_cfg, prior)
        except Exception as exc:
            raise RuntimeError(f"cluster {cluster.label + 1} failed: {exc}") from exc
        return j, summary, time.perf_counter() - t0, chain_cfg

    results = {}
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            for j, summary, dt, ccfg in pool.map(run_job, jobs):
                results[j] = (summary, dt, ccfg)
    else:
        for j in jobs:
            jj, summary, dt, ccfg = run_job(j)
            results[jj] = (summary, dt, ccfg)

    k = aset.catalog.n
    p_de = np.zeros(k)
    theta = np.zeros(k)
    w = np.zeros(k)
    cluster_of = np.zeros(k, dtype=np.int64)     # 0 marks the no-read set
    flags = ["no_reads"] * k
    mass_theta = 0.0
    mass_w = 0.0
    for j in sorted(results):
        summary, _, _ = results[j]
        kj = summary.members.size
        p_de[summary.members] = summary.p_de[:kj]
        theta[summary.members] = summary.mean_theta[:kj]
        w[summary.members] = summary.mean_w[:kj]
        cluster_of[summary.members] = summary.label + 1
        for t in summary.members:
            flags[t] = "ok"
        mass_theta += summary.mean_theta[:kj].sum()
        mass_w += summary.mean_w[:kj].sum()
    if mass_theta > 0:
        theta /= mass_theta
    if mass_w > 0:
        w /= mass_w

    log2fc = np.zeros(k)
    covered = cluster_of > 0
    log2fc[covered] = np.log2(theta[covered] / w[covered])

    eligible = covered.copy()
    if cfg.fc_filter is not None:
        eligible &= np.abs(log2fc) >= cfg.fc_filter
    if cfg.rule == "threshold":
        report = fdr_threshold_select(p_de, cfg.fdr_alpha, eligible)
    elif cfg.rule == "naive":
        report = naive_rule(p_de, cfg.fdr_alpha, eligible)
    elif cfg.rule.startswith("loss:"):
        report = loss_rule(p_de, float(cfg.rule.split(":", 1)[1]), eligible)
    else:
        raise ValueError(f"unknown decision rule {cfg.rule!r}")

    est_path = out / "estimates.tsv"
    with open(est_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("transcript_id\tcluster\tp_de\ttheta_mean\tw_mean\tlog2fc\tflag\n")
        for i, tid in enumerate(aset.catalog.ids):
            fh.write(
                f"{tid}\t{cluster_of[i]}\t{p_de[i]:.6f}\t{theta[i]:.8e}"
                f"\t{w[i]:.8e}\t{log2fc[i]:.4f}\t{flags[i]}\n"
            )
    dec_path = out / "decisions.tsv"
    write_decision_tsv(
        dec_path, aset.catalog.ids, cluster_of, p_de, theta, w, log2fc, report, flags
    )

    diag_path = out / "diagnostics.csv"
    n_lags = 50
    with open(diag_path, "w", encoding="utf-8", newline="\n") as fh:
        n_ckpt = ChainConfig().n_checkpoints
        head = ["cluster", "n_transcripts", "n_reads_a", "n_reads_b", "runtime_s",
                "rj_accept_rate", "kept_draws"]
        head += [f"halfmae_c{i + 1:02d}" for i in range(n_ckpt)]
        head += [f"acf_lag{i + 1:02d}" for i in range(n_lags)]
        fh.write(",".join(head) + "\n")
        for j in sorted(results):
            summary, dt, ccfg = results[j]
            cl = part.clusters[j]
            row = [
                str(summary.label + 1), str(cl.members.size),
                str(cl.reads_a.size), str(cl.reads_b.size), f"{dt:.3f}",
                "" if math.isnan(summary.accept_rate) else f"{summary.accept_rate:.4f}",
                str(summary.n_kept),
            ]
            row += [f"{v:.6f}" if not math.isnan(v) else "" for v in summary.half_mae]
            if j == largest and summary.theta_draws is not None:
                acf = _acf_median_abs(summary.theta_draws, ccfg.n_chains, n_lags)
                row += [f"{v:.6f}" for v in acf]
            else:
                row += [""] * n_lags
            fh.write(",".join(row) + "\n")

    if cfg.dump_draws:
        for j in sorted(results):
            summary, _, _ = results[j]
            if summary.c_draws is None:
                continue
            with open(out / f"draws_cluster{summary.label + 1}.tsv", "w",
                      encoding="utf-8", newline="\n") as fh:
                fh.write("iteration\tc\ttheta\n")
                for it in range(summary.c_draws.shape[0]):
                    bits = "".join(str(b) for b in summary.c_draws[it])
                    th = ",".join(f"{v:.8e}" for v in summary.theta_draws[it])
                    fh.write(f"{it}\t{bits}\t{th}\n")

    return {
        "estimates": est_path,
        "decisions": dec_path,
        "diagnostics": diag_path,
        "n_discoveries": report.n_discoveries,
        "expected_fdr": report.expected_fdr,
        "n_clusters": len(part.clusters),
        "n_orphans": int(part.orphans.size),
        "n_reads_dropped": n_dropped,
    }
