"""Figure rendering from the engine's estimates/truth/diagnostics files.

Reads only the documented TSV/CSV formats; every curve is a deterministic
function of the input files.
"""

import csv
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

KINDS = ("roc", "fdr_power", "convergence", "acf", "scatter")


@dataclass(frozen=True)
class FigureJob:
    kind: str
    out: str
    estimates: str | None = None
    truth: str | None = None
    diagnostics: str | None = None
    estimates2: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}")
        if self.kind in ("roc", "fdr_power") and not self.truth:
            raise ValueError(f"{self.kind} needs a truth file")
        if self.kind in ("roc", "fdr_power", "scatter") and not self.estimates:
            raise ValueError(f"{self.kind} needs an estimates file")
        if self.kind in ("convergence", "acf") and not self.diagnostics:
            raise ValueError(f"{self.kind} needs a diagnostics file")
        if self.kind == "scatter" and not self.estimates2:
            raise ValueError("scatter needs two estimates files")


def load_estimates(path):
    """transcript_id -> flag probability from an estimates or decisions TSV."""
    ids, p_de = [], []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        try:
            col = header.index("p_de")
        except ValueError:
            raise ValueError(f"{path}: no p_de column") from None
        for line in fh:
            parts = line.rstrip("\n").split("\t")
            ids.append(parts[0])
            p_de.append(float(parts[col]))
    return ids, np.array(p_de)


def load_truth(path):
    """transcript_id -> binary label from a truth TSV."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        col = header.index("true_label")
        for line in fh:
            parts = line.rstrip("\n").split("\t")
            out[parts[0]] = int(parts[col])
    return out


def _aligned_scores(estimates_path, truth_path):
    ids, scores = load_estimates(estimates_path)
    truth = load_truth(truth_path)
    missing = [t for t in ids if t not in truth]
    if missing:
        raise ValueError(f"truth file lacks {len(missing)} transcripts, e.g. {missing[0]}")
    labels = np.array([truth[t] for t in ids])
    return scores, labels


def compute_roc(scores, labels):
    """Stepwise ROC over score thresholds; endpoints pinned at the corners."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    n_pos = int((labels == 1).sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("need both labels for a ROC curve")
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_labels = labels[order]
    tp = np.cumsum(sorted_labels == 1)
    fp = np.cumsum(sorted_labels == 0)
    # keep one point per distinct threshold
    keep = np.flatnonzero(np.diff(sorted_scores) != 0)
    keep = np.concatenate([keep, [scores.size - 1]])
    fpr = np.concatenate([[0.0], fp[keep] / n_neg])
    tpr = np.concatenate([[0.0], tp[keep] / n_pos])
    auc = float(np.trapezoid(tpr, fpr))
    return fpr, tpr, auc


def compute_fdr_power(scores, labels):
    """Achieved false-discovery proportion and recall along the ranking."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    n_pos = int((labels == 1).sum())
    if n_pos == 0:
        raise ValueError("need at least one flagged transcript in the truth")
    order = np.argsort(-scores, kind="stable")
    sorted_labels = labels[order]
    tp = np.cumsum(sorted_labels == 1)
    fp = np.cumsum(sorted_labels == 0)
    d = np.arange(1, scores.size + 1)
    return fp / d, tp / n_pos


def load_diagnostics(path):
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    return rows


def render(job: FigureJob):
    """Write the requested figure; returns the plotted data series."""
    fig, ax = plt.subplots(figsize=(6, 4.5), dpi=120)
    try:
        if job.kind == "roc":
            scores, labels = _aligned_scores(job.estimates, job.truth)
            fpr, tpr, auc = compute_roc(scores, labels)
            ax.plot(fpr, tpr, lw=1.8)
            ax.plot([0, 1], [0, 1], ls=":", c="gray", lw=0.8)
            ax.set_xlabel("false positive rate")
            ax.set_ylabel("true positive rate")
            ax.set_title(f"ROC (AUC = {auc:.4f})")
            series = (fpr, tpr)
        elif job.kind == "fdr_power":
            scores, labels = _aligned_scores(job.estimates, job.truth)
            fdp, power = compute_fdr_power(scores, labels)
            ax.plot(fdp, power, lw=1.8)
            ax.set_xlabel("achieved FDR")
            ax.set_ylabel("power")
            ax.set_title("power vs achieved FDR")
            series = (fdp, power)
        elif job.kind == "convergence":
            rows = load_diagnostics(job.diagnostics)
            cols = [c for c in rows[0] if c.startswith("halfmae_c")]
            cols.sort()
            xs = np.arange(1, len(cols) + 1)
            series = []
            for row in rows:
                vals = [row[c] for c in cols]
                if any(v == "" for v in vals):
                    continue
                ys = np.array([float(v) for v in vals])
                ax.plot(xs, ys, lw=1.0, alpha=0.7)
                series.append(ys)
            ax.set_xlabel("checkpoint")
            ax.set_ylabel("half-ensemble MAE of flag means")
            ax.set_title("ergodic-mean convergence per cluster")
            series = tuple(series)
        elif job.kind == "acf":
            rows = load_diagnostics(job.diagnostics)
            cols = [c for c in rows[0] if c.startswith("acf_lag")]
            cols.sort()
            series = None
            for row in rows:
                vals = [row[c] for c in cols]
                if all(v != "" for v in vals):
                    series = np.array([float(v) for v in vals])
                    label = row.get("cluster", "?")
                    break
            if series is None:
                raise ValueError("diagnostics file has no autocorrelation row")
            lags = np.arange(1, series.size + 1)
            ax.plot(lags, series, lw=1.5)
            ax.set_xlim(0, series.size)
            ax.set_ylim(bottom=0)
            ax.set_xlabel("lag")
            ax.set_ylabel("median |autocorrelation| of log expression")
            ax.set_title(f"autocorrelation, cluster {label}")
            series = (lags, series)
        else:  # scatter
            ids1, p1 = load_estimates(job.estimates)
            ids2, p2 = load_estimates(job.estimates2)
            lookup = dict(zip(ids2, p2))
            missing = [t for t in ids1 if t not in lookup]
            if missing:
                raise ValueError(f"second estimates file lacks {missing[0]!r}")
            q = np.array([lookup[t] for t in ids1])
            ax.plot([0, 1], [0, 1], ls=":", c="gray", lw=0.8)
            ax.scatter(p1, q, s=8, alpha=0.6)
            ax.set_xlabel("flag probability (first run)")
            ax.set_ylabel("flag probability (second run)")
            ax.set_title("run-to-run flag probabilities")
            series = (p1, q)
        fig.tight_layout()
        fig.savefig(job.out)
    finally:
        plt.close(fig)
    return series
