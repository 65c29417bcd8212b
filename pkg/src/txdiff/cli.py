"""Command-line entry points: run, simulate, cluster, oracle."""

import argparse
import sys
from pathlib import Path

import numpy as np


def _split_paths(text):
    return [p for p in text.split(",") if p]


def _add_input_args(p):
    p.add_argument("--catalog", required=True)
    p.add_argument("--cond-a", required=True, help="comma-separated replicate files")
    p.add_argument("--cond-b", required=True)
    p.add_argument("--align-mode", choices=["precomputed", "uniform"],
                   default="precomputed")


def cmd_run(args):
    from .runner import RunConfig, orchestrate

    cfg = RunConfig(
        catalog=args.catalog,
        cond_a=_split_paths(args.cond_a),
        cond_b=_split_paths(args.cond_b),
        out=args.out,
        align_mode=args.align_mode,
        sampler=args.sampler,
        chains=args.chains,
        iters=args.iters,
        burnin=args.burnin,
        thin=args.thin,
        prior=args.prior,
        fdr_alpha=args.fdr,
        rule=args.rule,
        threads=args.threads,
        seed=args.seed,
        dump_draws=args.dump_draws,
        cluster_dump=args.cluster_dump,
        fc_filter=args.fc_filter,
        max_cluster_reads_break=args.max_cluster_reads_break,
    )
    info = orchestrate(cfg)
    print(f"clusters: {info['n_clusters']}  no-read transcripts: {info['n_orphans']}")
    print(f"discoveries: {info['n_discoveries']}  expected FDR: {info['expected_fdr']:.4f}")
    print(f"estimates: {info['estimates']}")
    print(f"decisions: {info['decisions']}")
    return 0


def cmd_simulate(args):
    from .ingest import write_alignments, write_catalog
    from .synth import ScenarioSpec, generate_scenario, write_truth_tsv

    if args.dispersion == "poisson":
        dispersion = ("poisson",)
    elif args.dispersion.startswith("nb:"):
        dispersion = ("nb", float(args.dispersion.split(":", 1)[1]))
    else:
        raise ValueError(f"unknown dispersion {args.dispersion!r}")
    if args.mean.startswith("constant:"):
        mean_model = ("constant", float(args.mean.split(":", 1)[1]))
    elif args.mean.startswith("uniform:"):
        lo, hi = args.mean.split(":", 1)[1].split(",")
        mean_model = ("uniform", float(lo), float(hi))
    else:
        raise ValueError(f"unknown mean model {args.mean!r}")
    if args.fold.startswith("fixed:"):
        fold = ("fixed", float(args.fold.split(":", 1)[1]))
    elif args.fold.startswith("uniform:"):
        lo, hi = args.fold.split(":", 1)[1].split(",")
        fold = ("uniform", float(lo), float(hi))
    else:
        raise ValueError(f"unknown fold model {args.fold!r}")

    spec = ScenarioSpec(
        k=args.k, n_de=args.n_de, replicates=(args.replicates, args.replicates),
        mean_model=mean_model, dispersion=dispersion, fold=fold,
        reads_per_replicate=(args.reads, args.reads), read_length=args.read_length,
        group_size=args.group_size, shared_frac=args.shared_frac, seed=args.seed,
    )
    aset, truth = generate_scenario(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_catalog(out / "catalog.tsv", aset.catalog)
    write_alignments(out / "cond_a.tsv", aset.reads_a, aset.catalog)
    write_alignments(out / "cond_b.tsv", aset.reads_b, aset.catalog)
    write_truth_tsv(out / "truth.tsv", aset.catalog, truth)
    print(f"wrote {aset.r} + {aset.s} reads over {aset.catalog.n} transcripts to {out}")
    return 0


def cmd_cluster(args):
    from .clusters import build_clusters, write_cluster_dump
    from .ingest import load_alignment_set

    aset = load_alignment_set(args.catalog, _split_paths(args.cond_a),
                              _split_paths(args.cond_b), args.align_mode)
    part = build_clusters(aset)
    write_cluster_dump(args.out, aset, part)
    sizes = [cl.members.size for cl in part.clusters]
    print(f"{len(part.clusters)} clusters, largest {max(sizes) if sizes else 0} "
          f"transcripts, {part.orphans.size} without reads")
    return 0


def cmd_oracle(args):
    from .ingest import load_alignment_set
    from .runner import parse_prior
    from .synth import brute_force_posterior

    aset = load_alignment_set(args.catalog, _split_paths(args.cond_a),
                              _split_paths(args.cond_b), args.align_mode)
    prior = parse_prior(args.prior)
    res = brute_force_posterior(aset, prior)
    rows = zip(aset.catalog.ids, res["p_de"], res["e_theta"], res["e_w"])
    lines = ["transcript_id\tp_de\te_theta\te_w"]
    lines += [f"{t}\t{p:.10f}\t{a:.10f}\t{b:.10f}" for t, p, a, b in rows]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(
        prog="txdiff",
        description="Joint Bayesian transcript expression and differential "
                    "expression from two read samples.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="full inference pipeline")
    _add_input_args(p)
    p.add_argument("--sampler", choices=["collapsed", "rjmcmc"], default="collapsed")
    p.add_argument("--chains", type=int, default=6)
    p.add_argument("--iters", type=int, default=5000)
    p.add_argument("--burnin", type=int, default=1000)
    p.add_argument("--thin", type=int, default=5)
    p.add_argument("--prior", default="jeffreys", help="jeffreys or fixed:P")
    p.add_argument("--fdr", type=float, default=0.05)
    p.add_argument("--rule", default="threshold", help="threshold, naive or loss:C")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--dump-draws", action="store_true")
    p.add_argument("--cluster-dump", action="store_true")
    p.add_argument("--fc-filter", type=float, default=None,
                   help="drop candidates with |log2 fold change| below this")
    p.add_argument("--max-cluster-reads-break", type=int, default=None,
                   help="drop bridging reads in clusters above this many transcripts")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("simulate", help="generate a synthetic scenario")
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int, default=100)
    p.add_argument("--n-de", type=int, default=10)
    p.add_argument("--replicates", type=int, default=2)
    p.add_argument("--reads", type=int, default=10000, help="per replicate")
    p.add_argument("--read-length", type=int, default=50)
    p.add_argument("--mean", default="constant:65")
    p.add_argument("--dispersion", default="poisson", help="poisson or nb:PHI")
    p.add_argument("--fold", default="fixed:5")
    p.add_argument("--group-size", type=int, default=3)
    p.add_argument("--shared-frac", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("cluster", help="write the read-sharing partition only")
    _add_input_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("oracle", help="exact posterior for tiny inputs")
    _add_input_args(p)
    p.add_argument("--prior", default="jeffreys")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - single reporting point
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
