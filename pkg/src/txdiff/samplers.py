"""MCMC kernels: a collapsed single-site Gibbs sampler and a birth/death
reversible-jump sampler, plus the shared conditional updates.

The hot loops live in :mod:`txdiff._kernels`; this module provides the
numpy-facing reference implementations of every conditional (used by the
tests as ground truth for the kernels) and the chain/ensemble drivers.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import _kernels
from .clusters import AugmentedCluster
from .distributions import (
    GDParams,
    beta_mixture_logpdf,
    dirichlet_logpdf,
    sample_dirichlet,
    sample_gd,
)
from .model import PriorConfig, dead_alive_sets, validate_state


@dataclass(frozen=True)
class ChainConfig:
    """Ensemble geometry and proposal settings.

    ``pair_updates=0`` means ceil(K/2) flag-pair updates per sweep;
    ``audit_every=1`` turns on the debug count audit after every sweep.
    """

    n_chains: int = 6
    iterations: int = 5000
    burnin: int = 1000
    thin: int = 5
    kind: str = "collapsed"
    proposal_betas: tuple = (1.0, 10.0, 100.0, 250.0, 500.0)
    seed: int = 0
    pair_updates: int = 0
    audit_every: int = 1000
    n_checkpoints: int = 10
    record: int = 0  # 0 none, 1 flag draws, 2 flags + expression draws

    def __post_init__(self):
        if self.burnin >= self.iterations:
            raise ValueError("burnin must be smaller than iterations")
        if self.thin < 1 or self.n_chains < 1:
            raise ValueError("thin and n_chains must be >= 1")
        if self.kind not in ("collapsed", "rjmcmc"):
            raise ValueError(f"unknown sampler kind {self.kind!r}")

    @property
    def n_kept(self):
        return (self.iterations - self.burnin - 1) // self.thin + 1


# ---------------------------------------------------------------------------
# reference conditionals


class AllocationState:
    """Read allocations with incrementally maintained count tables."""

    def __init__(self, cluster: AugmentedCluster, xi, z):
        self.cluster = cluster
        self.xi = np.asarray(xi, dtype=np.int64)
        self.z = np.asarray(z, dtype=np.int64)
        self.s_xi = np.bincount(self.xi, minlength=cluster.k).astype(np.int64)
        self.s_z = np.bincount(self.z, minlength=cluster.k).astype(np.int64)
        if cluster.has_pseudo:
            self.s_xi[-1] += cluster.pinned_a
            self.s_z[-1] += cluster.pinned_b

    def audit(self):
        """Recompute the count tables from scratch and compare exactly."""
        sx = np.bincount(self.xi, minlength=self.cluster.k).astype(np.int64)
        sz = np.bincount(self.z, minlength=self.cluster.k).astype(np.int64)
        if self.cluster.has_pseudo:
            sx[-1] += self.cluster.pinned_a
            sz[-1] += self.cluster.pinned_b
        return (sx == self.s_xi).all() and (sz == self.s_z).all()


def gibbs_allocation_probs(weights, targets, f):
    """P(read -> target) proportional to mixture weight times alignment mass."""
    wgt = weights[targets] * f
    tot = wgt.sum()
    if tot <= 0:
        raise ValueError("read has zero total allocation mass")
    return wgt / tot


def gibbs_allocations(theta, w, cluster: AugmentedCluster, rng):
    """Draw all allocations given expression; returns an AllocationState."""
    xi = np.empty(cluster.n_reads_a, dtype=np.int64)
    for i in range(cluster.n_reads_a):
        lo, hi = cluster.a_off[i], cluster.a_off[i + 1]
        p = gibbs_allocation_probs(theta, cluster.a_tr[lo:hi], cluster.a_f[lo:hi])
        xi[i] = cluster.a_tr[lo + rng.choice(p.size, p=p)]
    z = np.empty(cluster.n_reads_b, dtype=np.int64)
    for j in range(cluster.n_reads_b):
        lo, hi = cluster.b_off[j], cluster.b_off[j + 1]
        p = gibbs_allocation_probs(w, cluster.b_tr[lo:hi], cluster.b_f[lo:hi])
        z[j] = cluster.b_tr[lo + rng.choice(p.size, p=p)]
    return AllocationState(cluster, xi, z)


def uv_conditional_params(c, s_xi, s_z, alpha, gamma):
    """Parameters of the conditional law of (u, v) given counts and flags.

    Returns (GDParams or Dirichlet alpha for u, Dirichlet params for v).
    With no flagged transcript u is plain Dirichlet over pooled counts and
    v is empty.
    """
    c = validate_state(c)
    sets = dead_alive_sets(c)
    k = c.size
    alpha = np.asarray(alpha, dtype=np.float64)
    s_xi = np.asarray(s_xi)
    s_z = np.asarray(s_z)
    kstar = sets.n_dead
    if sets.n_alive == 0:
        return np.asarray(alpha + s_xi + s_z, dtype=np.float64), np.empty(0)
    tau = sets.tau
    ax = alpha[tau] + s_xi[tau]
    axz = ax + s_z[tau]
    lam = np.empty(k - 1)
    bet = np.empty(k - 1)
    for p in range(k - 1):
        if p < kstar:
            lam[p] = axz[p]
            bet[p] = axz[p + 1 :].sum()
        else:
            lam[p] = ax[p]
            bet[p] = ax[p + 1 :].sum()
    gamma = np.asarray(gamma, dtype=np.float64)
    v_par = gamma[: sets.n_alive] + s_z[tau[kstar:]]
    return GDParams(lam, bet), v_par


def sample_uv_conditional(c, s_xi, s_z, alpha, gamma, rng):
    """Draw the free parameters from their conditional given counts."""
    u_par, v_par = uv_conditional_params(c, s_xi, s_z, alpha, gamma)
    if isinstance(u_par, GDParams):
        u = sample_gd(u_par, rng)
        v = sample_dirichlet(v_par, rng)
    else:
        u = sample_dirichlet(u_par, rng)
        v = np.empty(0)
    return u, v


def collapsed_allocation_probs(condition, targets, f, drop_count_of, c, s_xi, s_z, alpha, gamma):
    """Single-read collapsed conditional over the read's alignment targets.

    ``drop_count_of`` is the read's current allocation (its own count is
    removed first); pass -1 when counts already exclude the read.
    """
    c = validate_state(c)
    k = c.size
    s_xi = np.asarray(s_xi, dtype=np.int64).copy()
    s_z = np.asarray(s_z, dtype=np.int64).copy()
    alpha = np.asarray(alpha, dtype=np.float64)
    gamma = np.asarray(gamma, dtype=np.float64)
    alive = np.flatnonzero(c == 1)
    grank = {int(t): r for r, t in enumerate(alive)}
    if condition == "a":
        if drop_count_of >= 0:
            s_xi[drop_count_of] -= 1
        num = (alpha[alive] + s_xi[alive] + s_z[alive]).sum()
        den = (alpha[alive] + s_xi[alive]).sum()
        ratio = num / den if alive.size else 1.0
        wgt = np.empty(len(targets))
        for t, kk in enumerate(targets):
            if c[kk] == 0:
                wgt[t] = (alpha[kk] + s_xi[kk] + s_z[kk]) * f[t]
            else:
                wgt[t] = ratio * (alpha[kk] + s_xi[kk]) * f[t]
    elif condition == "b":
        if drop_count_of >= 0:
            s_z[drop_count_of] -= 1
        num = (alpha[alive] + s_xi[alive] + s_z[alive]).sum()
        den = sum(gamma[grank[int(t)]] + s_z[t] for t in alive)
        ratio = num / den if alive.size else 1.0
        wgt = np.empty(len(targets))
        for t, kk in enumerate(targets):
            if c[kk] == 0:
                wgt[t] = (alpha[kk] + s_xi[kk] + s_z[kk]) * f[t]
            else:
                wgt[t] = ratio * (gamma[grank[int(kk)]] + s_z[kk]) * f[t]
    else:
        raise ValueError("condition must be 'a' or 'b'")
    tot = wgt.sum()
    if tot <= 0:
        raise ValueError("read has zero total allocation mass")
    return wgt / tot


def collapsed_allocation_update(i, condition, state: AllocationState, c, alpha, gamma, rng):
    """Resample one read's allocation from its collapsed conditional."""
    cl = state.cluster
    if condition == "a":
        lo, hi = cl.a_off[i], cl.a_off[i + 1]
        targets, f = cl.a_tr[lo:hi], cl.a_f[lo:hi]
        probs = collapsed_allocation_probs(
            "a", targets, f, state.xi[i], c, state.s_xi, state.s_z, alpha, gamma
        )
        state.s_xi[state.xi[i]] -= 1
        state.xi[i] = targets[rng.choice(probs.size, p=probs)]
        state.s_xi[state.xi[i]] += 1
    else:
        lo, hi = cl.b_off[i], cl.b_off[i + 1]
        targets, f = cl.b_tr[lo:hi], cl.b_f[lo:hi]
        probs = collapsed_allocation_probs(
            "b", targets, f, state.z[i], c, state.s_xi, state.s_z, alpha, gamma
        )
        state.s_z[state.z[i]] -= 1
        state.z[i] = targets[rng.choice(probs.size, p=probs)]
        state.s_z[state.z[i]] += 1
    return state


def allocation_marginal_logweight(c, s_xi, s_z, alpha, gamma):
    """Log weight of the allocation counts with expression integrated out,
    including the varying-dimension prior constant of the alive shares.

    Alignment-probability factors and the flag-prior powers are excluded;
    both are added by callers where they do not cancel.
    """
    c = validate_state(c)
    alive = np.flatnonzero(c == 1)
    dead = np.flatnonzero(c == 0)
    alpha = np.asarray(alpha, dtype=np.float64)
    gamma = np.asarray(gamma, dtype=np.float64)
    s_xi = np.asarray(s_xi)
    s_z = np.asarray(s_z)
    acc = gammaln(alpha[dead] + s_xi[dead] + s_z[dead]).sum()
    if alive.size:
        g = gamma[: alive.size]
        ax = alpha[alive] + s_xi[alive]
        acc += gammaln(ax).sum() + gammaln(g + s_z[alive]).sum() - gammaln(g).sum()
        acc += gammaln((ax + s_z[alive]).sum()) - gammaln(ax.sum())
        acc -= gammaln((g + s_z[alive]).sum())
        acc += gammaln(g.sum())
    return float(acc)


def block_update_logweights(c, j1, j2, s_xi, s_z, alpha, gamma, pi):
    """Admissible flag patterns for a pair and their log conditional weights."""
    c = np.asarray(c, dtype=np.int8)
    k = c.size
    d = int(c.sum()) - int(c[j1]) - int(c[j2])
    cells = [(1, 1)]
    if d != 1:
        cells.append((0, 0))
    if d != 0:
        cells.extend([(1, 0), (0, 1)])
    logw = np.empty(len(cells))
    for idx, (b1, b2) in enumerate(cells):
        cc = c.copy()
        cc[j1], cc[j2] = b1, b2
        m = int(cc.sum())
        logw[idx] = (
            allocation_marginal_logweight(cc, s_xi, s_z, alpha, gamma)
            + m * math.log(pi)
            + (k - m) * math.log1p(-pi)
        )
    return cells, logw


def collapsed_block_update_c(c, state: AllocationState, alpha, gamma, pi, rng, pair=None):
    """Exact conditional draw of a random flag pair; never rejected."""
    k = c.size
    if pair is None:
        j1 = rng.integers(k)
        j2 = rng.integers(k - 1)
        if j2 >= j1:
            j2 += 1
    else:
        j1, j2 = pair
    cells, logw = block_update_logweights(c, j1, j2, state.s_xi, state.s_z, alpha, gamma, pi)
    p = np.exp(logw - logw.max())
    p /= p.sum()
    b1, b2 = cells[rng.choice(len(cells), p=p)]
    out = np.asarray(c, dtype=np.int8).copy()
    out[j1], out[j2] = b1, b2
    return out


# ---------------------------------------------------------------------------
# reversible-jump pieces


def rj_move_probabilities(c_plus, k):
    """Per-target birth and death selection probabilities."""
    if not (c_plus == 0 or 2 <= c_plus <= k):
        raise ValueError("invalid flag count")
    if c_plus == 0:
        birth = 2.0 / (k * (k - 1))
    elif c_plus <= k - 1:
        birth = 1.0 / k
    else:
        birth = 0.0
    if c_plus == 0:
        death = 0.0
    elif c_plus == 2:
        death = 2.0 / k
    else:
        death = 1.0 / k
    return birth, death


def rj_birth_transform(v, delta, j):
    """Insert a new share delta at slot j, scaling the rest by (1 - delta).

    Returns the extended share vector and the log absolute Jacobian of the
    dimension-bridging map.  An empty v (no flagged transcripts) grows to
    the pair (delta, 1 - delta) with unit Jacobian.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie strictly inside (0, 1)")
    v = np.asarray(v, dtype=np.float64)
    c_plus = v.size
    if c_plus == 0:
        return np.array([delta, 1.0 - delta]), 0.0
    if not 0 <= j <= c_plus:
        raise ValueError("insertion slot out of range")
    v_new = np.empty(c_plus + 1)
    v_new[:j] = v[:j] * (1.0 - delta)
    v_new[j] = delta
    v_new[j + 1 :] = v[j:] * (1.0 - delta)
    return v_new, (c_plus - 1) * math.log1p(-delta)


def rj_death_transform(v, j):
    """Remove slot j, rescaling the rest; returns (shrunk vector, delta).

    A two-share vector collapses to the empty vector with delta the first
    share, the exact inverse of the paired growth move.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.size < 2:
        raise ValueError("need at least two shares")
    if v.size == 2:
        return np.empty(0), float(v[0])
    delta = float(v[j])
    v_new = np.concatenate([v[:j], v[j + 1 :]]) / (1.0 - delta)
    return v_new, delta


def _obs_loglik_b(cluster: AugmentedCluster, w):
    acc = 0.0
    for j in range(cluster.n_reads_b):
        lo, hi = cluster.b_off[j], cluster.b_off[j + 1]
        acc += math.log((w[cluster.b_tr[lo:hi]] * cluster.b_f[lo:hi]).sum())
    return acc


def rj_acceptance_log_ratio(cluster, prior: PriorConfig, pi, cur, prop, delta, kind,
                            proposal_betas=(1.0, 10.0, 100.0, 250.0, 500.0)):
    """Log acceptance ratio of a birth or death move.

    ``cur`` and ``prop`` are (c, theta, w, v) tuples; theta is unchanged by
    construction, so the shared-vector prior and the condition-A likelihood
    cancel and only condition-B terms, move/state priors, the share-simplex
    densities, the Jacobian and the proposal density remain.  Pinned pseudo
    reads are never reallocated, so their likelihood ratio enters directly.
    """
    c_cur, theta_cur, w_cur, v_cur = cur
    c_prop, theta_prop, w_prop, v_prop = prop
    if not np.array_equal(theta_cur, theta_prop):
        raise ValueError("theta must be preserved by the move")
    k = len(c_cur)
    m_cur = int(np.sum(c_cur))
    m_prop = int(np.sum(c_prop))
    gamma = prior.gamma_vector(k)
    betas = np.asarray(proposal_betas, dtype=np.float64)

    dlik = _obs_loglik_b(cluster, np.asarray(w_prop)) - _obs_loglik_b(cluster, np.asarray(w_cur))
    if cluster.has_pseudo and cluster.pinned_b > 0:
        dlik += cluster.pinned_b * (
            math.log(w_prop[k - 1]) - math.log(w_cur[k - 1])
        )

    def v_logpdf(v):
        v = np.asarray(v)
        return dirichlet_logpdf(v, gamma[: v.size]) if v.size else 0.0

    dv = v_logpdf(v_prop) - v_logpdf(v_cur)
    if kind == "birth":
        if m_prop != (2 if m_cur == 0 else m_cur + 1):
            raise ValueError("inconsistent flag counts for a birth")
        p_birth, _ = rj_move_probabilities(m_cur, k)
        _, p_death = rj_move_probabilities(m_prop, k)
        dprior = (m_prop - m_cur) * (math.log(pi) - math.log1p(-pi))
        log_jac = (m_cur - 1) * math.log1p(-delta) if m_cur >= 2 else 0.0
        return (
            dlik + math.log(p_death) - math.log(p_birth) + dprior + dv
            + log_jac - beta_mixture_logpdf(delta, betas)
        )
    if kind == "death":
        if m_prop != (0 if m_cur == 2 else m_cur - 1):
            raise ValueError("inconsistent flag counts for a death")
        _, p_death = rj_move_probabilities(m_cur, k)
        p_birth, _ = rj_move_probabilities(m_prop, k)
        dprior = (m_prop - m_cur) * (math.log(pi) - math.log1p(-pi))
        log_jac = -(m_prop - 1) * math.log1p(-delta) if m_prop >= 2 else 0.0
        return (
            dlik + math.log(p_birth) - math.log(p_death) + dprior + dv
            + log_jac + beta_mixture_logpdf(delta, betas)
        )
    raise ValueError(f"unknown move kind {kind!r}")


# ---------------------------------------------------------------------------
# chain drivers


@dataclass
class ChainResult:
    mean_c: np.ndarray
    mean_theta: np.ndarray
    mean_w: np.ndarray
    n_kept: int
    checkpoint_c: np.ndarray
    accept_rate: float = float("nan")
    c_draws: np.ndarray | None = None
    theta_draws: np.ndarray | None = None
    w_draws: np.ndarray | None = None


@dataclass
class PosteriorSummary:
    """Per-cluster posterior means over the retained draws of all chains."""

    label: int
    members: np.ndarray
    k: int
    has_pseudo: bool
    p_de: np.ndarray
    mean_theta: np.ndarray
    mean_w: np.ndarray
    n_kept: int
    accept_rate: float
    half_mae: np.ndarray
    c_draws: np.ndarray | None = None
    theta_draws: np.ndarray | None = None


class ChainError(RuntimeError):
    pass


_ERRORS = {
    1: "incremental count tables diverged from a recount",
    2: "a read had zero total allocation mass",
}


def _initial_state(cluster: AugmentedCluster, all_de):
    c0 = np.full(cluster.k, 1 if all_de else 0, dtype=np.int8)
    return c0


def run_chain(cluster: AugmentedCluster, cfg: ChainConfig, prior: PriorConfig,
              chain_id, init_all_de=None):
    """Run one chain; the initial state is all-shared or all-flagged.

    When ``init_all_de`` is None the ensemble rule applies: the first half of
    chain ids (rounded up) starts all-shared, the rest all-flagged.
    """
    if init_all_de is None:
        init_all_de = chain_id >= (cfg.n_chains + 1) // 2
    k = cluster.k
    rng_state = _kernels.make_state(cfg.seed, cluster.label, chain_id)
    c0 = _initial_state(cluster, init_all_de)
    fixed_pi = prior.pi if prior.pi is not None else -1.0
    pair_updates = cfg.pair_updates if cfg.pair_updates > 0 else (k + 1) // 2
    pseudo = k - 1 if cluster.has_pseudo else -1

    mean_c = np.zeros(k)
    mean_theta = np.zeros(k)
    mean_w = np.zeros(k)
    ckpt = np.zeros((cfg.n_checkpoints, k))
    n_kept = cfg.n_kept
    rec_shape = (n_kept, k) if cfg.record > 0 else (1, 1)
    rec_c = np.zeros(rec_shape, dtype=np.int8)
    exp_shape = (n_kept, k) if cfg.record > 1 else (1, 1)
    rec_theta = np.zeros(exp_shape)
    rec_w = np.zeros(exp_shape)

    if cfg.kind == "collapsed":
        kept, err = _kernels.collapsed_chain(
            cluster.a_off, cluster.a_tr, cluster.a_f,
            cluster.b_off, cluster.b_tr, cluster.b_f,
            cluster.alpha, cluster.gamma,
            cluster.pinned_a, cluster.pinned_b, pseudo,
            c0, cfg.iterations, cfg.burnin, cfg.thin, pair_updates,
            cfg.audit_every, fixed_pi, rng_state,
            mean_c, mean_theta, mean_w, ckpt,
            rec_c, rec_theta, rec_w, cfg.record,
        )
        acc_rate = float("nan")
    else:
        betas = np.asarray(cfg.proposal_betas, dtype=np.float64)
        kept, err, n_acc, n_prop = _kernels.rj_chain(
            cluster.a_off, cluster.a_tr, cluster.a_f,
            cluster.b_off, cluster.b_tr, cluster.b_f,
            cluster.alpha, cluster.gamma,
            cluster.pinned_a, cluster.pinned_b, pseudo,
            c0, cfg.iterations, cfg.burnin, cfg.thin,
            cfg.audit_every, fixed_pi, betas, rng_state,
            mean_c, mean_theta, mean_w, ckpt,
            rec_c, rec_theta, rec_w, cfg.record,
        )
        acc_rate = n_acc / n_prop if n_prop else float("nan")
    if err != 0:
        raise ChainError(
            f"cluster {cluster.label} chain {chain_id}: {_ERRORS.get(err, err)}"
        )
    return ChainResult(
        mean_c=mean_c, mean_theta=mean_theta, mean_w=mean_w, n_kept=kept,
        checkpoint_c=ckpt, accept_rate=acc_rate,
        c_draws=rec_c if cfg.record > 0 else None,
        theta_draws=rec_theta if cfg.record > 1 else None,
        w_draws=rec_w if cfg.record > 1 else None,
    )


def run_ensemble(cluster: AugmentedCluster, cfg: ChainConfig, prior: PriorConfig):
    """Run the chain ensemble and average the ergodic means across chains.

    Half the chains start all-shared, half all-flagged (odd counts favour
    the all-shared side).  The half-ensemble disagreement of the flag means
    is tracked at checkpoints as a convergence diagnostic.
    """
    results = [run_chain(cluster, cfg, prior, cid) for cid in range(cfg.n_chains)]
    p_de = np.mean([r.mean_c for r in results], axis=0)
    mean_theta = np.mean([r.mean_theta for r in results], axis=0)
    mean_w = np.mean([r.mean_w for r in results], axis=0)
    rates = [r.accept_rate for r in results if not math.isnan(r.accept_rate)]
    n_ee = (cfg.n_chains + 1) // 2
    if 0 < n_ee < cfg.n_chains:
        ee = np.mean([r.checkpoint_c for r in results[:n_ee]], axis=0)
        de = np.mean([r.checkpoint_c for r in results[n_ee:]], axis=0)
        half_mae = np.abs(ee - de).mean(axis=1)
    else:
        half_mae = np.full(cfg.n_checkpoints, np.nan)
    c_draws = theta_draws = None
    if cfg.record > 0:
        c_draws = np.concatenate([r.c_draws for r in results])
    if cfg.record > 1:
        theta_draws = np.concatenate([r.theta_draws for r in results])
    return PosteriorSummary(
        label=cluster.label,
        members=cluster.members,
        k=cluster.k,
        has_pseudo=cluster.has_pseudo,
        p_de=p_de,
        mean_theta=mean_theta,
        mean_w=mean_w,
        n_kept=sum(r.n_kept for r in results),
        accept_rate=float(np.mean(rates)) if rates else float("nan"),
        half_mae=half_mae,
        c_draws=c_draws,
        theta_draws=theta_draws,
    )
