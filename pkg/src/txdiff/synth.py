"""Synthetic two-condition read generation and the exact posterior oracle.

The generator mirrors desk-scale versions of the benchmark scenarios:
per-replicate reads-per-kilobase counts (Poisson or Negative Binomial around
condition means), conversion to relative abundances, and uniform-start read
placement.  Multi-mapping ambiguity comes from a shared-block overlap map
instead of real sequence, which reproduces the inferential difficulty
without a genome.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .ingest import AlignmentSet, ReadSet, TranscriptCatalog
from .model import PriorConfig, dead_alive_sets, enumerate_states
from .distributions import jeffreys_quadrature


@dataclass(frozen=True)
class ScenarioSpec:
    k: int = 100
    n_de: int = 10
    replicates: tuple = (2, 2)
    mean_model: tuple = ("constant", 65.0)       # or ("uniform", lo, hi)
    dispersion: tuple = ("poisson",)             # or ("nb", phi)
    fold: tuple = ("fixed", 5.0)                 # or ("uniform", lo, hi)
    reads_per_replicate: tuple = (10000, 10000)
    read_length: int = 50
    length_range: tuple = (300, 2500)
    group_size: int = 3
    shared_frac: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.n_de % 2 != 0 or self.n_de > self.k:
            raise ValueError("n_de must be even and at most k")
        if self.dispersion[0] == "nb" and not self.dispersion[1] > 0:
            raise ValueError("negative binomial dispersion must be positive")
        if self.read_length < 1:
            raise ValueError("read length must be >= 1")
        if self.length_range[0] < self.read_length:
            raise ValueError("read length exceeds the shortest transcript")


@dataclass(frozen=True)
class ScenarioTruth:
    labels: np.ndarray       # 1 for transcripts generated with differing means
    theta: np.ndarray        # expected read-origin proportions, condition A
    w: np.ndarray


def _draw_rpk(rng, mu, dispersion):
    if dispersion[0] == "poisson":
        return rng.poisson(mu).astype(np.float64)
    phi = float(dispersion[1])
    p = phi / (phi + mu)
    return rng.negative_binomial(phi, p).astype(np.float64)


def generate_scenario(spec: ScenarioSpec):
    """Simulate an alignment set plus ground truth for one scenario."""
    rng = np.random.default_rng(spec.seed)
    k = spec.k
    lengths = rng.integers(spec.length_range[0], spec.length_range[1] + 1, size=k)
    catalog = TranscriptCatalog([f"T{i + 1:05d}" for i in range(k)], lengths)

    if spec.mean_model[0] == "constant":
        mu = np.full(k, float(spec.mean_model[1]))
    elif spec.mean_model[0] == "uniform":
        mu = rng.uniform(spec.mean_model[1], spec.mean_model[2], size=k)
    else:
        raise ValueError(f"unknown mean model {spec.mean_model[0]!r}")

    labels = np.zeros(k, dtype=np.int8)
    de = rng.choice(k, size=spec.n_de, replace=False)
    labels[de] = 1
    half = spec.n_de // 2
    if spec.fold[0] == "fixed":
        delta = np.full(spec.n_de, math.sqrt(float(spec.fold[1])))
    elif spec.fold[0] == "uniform":
        delta = np.sqrt(rng.uniform(spec.fold[1], spec.fold[2], size=spec.n_de))
    else:
        raise ValueError(f"unknown fold model {spec.fold[0]!r}")
    mu_a = mu.copy()
    mu_b = mu.copy()
    mu_a[de[:half]] *= delta[:half]
    mu_b[de[:half]] /= delta[:half]
    mu_a[de[half:]] /= delta[half:]
    mu_b[de[half:]] *= delta[half:]

    group = np.arange(k) // spec.group_size
    n_groups = int(group.max()) + 1
    block = np.zeros(n_groups, dtype=np.int64)
    for g in range(n_groups):
        members = np.flatnonzero(group == g)
        block[g] = int(spec.shared_frac * lengths[members].min())

    def simulate_condition(tag, mu_cond, n_reps, n_reads):
        sets = []
        abunds = []
        for rep in range(n_reps):
            rpk = _draw_rpk(rng, mu_cond, spec.dispersion)
            weight = rpk * lengths / 1000.0
            tot = weight.sum()
            abund = weight / tot if tot > 0 else np.full(k, 1.0 / k)
            abunds.append(abund)
            counts = rng.multinomial(n_reads, abund)
            ids, sizes, tr_all, f_all = [], [], [], []
            ridx = 0
            for src in range(k):
                n_src = counts[src]
                if n_src == 0:
                    continue
                placements = lengths[src] - spec.read_length + 1
                starts = rng.integers(0, placements, size=n_src)
                g = group[src]
                members = np.flatnonzero(group == g)
                for st in starts:
                    if st + spec.read_length <= block[g] and members.size > 1:
                        tr = members
                    else:
                        tr = np.array([src])
                    ids.append(f"{tag}{rep + 1}_{ridx:07d}")
                    ridx += 1
                    sizes.append(tr.size)
                    tr_all.append(tr)
                    f_all.append(1.0 / (lengths[tr] - spec.read_length + 1))
            if sizes:
                offsets = np.concatenate([[0], np.cumsum(sizes)])
                sets.append(
                    ReadSet(ids, offsets, np.concatenate(tr_all).astype(np.int32),
                            np.concatenate(f_all))
                )
            else:
                sets.append(ReadSet.empty())
        return ReadSet.concat(sets), np.mean(abunds, axis=0)

    reads_a, theta_true = simulate_condition("a", mu_a, spec.replicates[0],
                                             spec.reads_per_replicate[0])
    reads_b, w_true = simulate_condition("b", mu_b, spec.replicates[1],
                                         spec.reads_per_replicate[1])
    aset = AlignmentSet(catalog, reads_a, reads_b)
    return aset, ScenarioTruth(labels=labels, theta=theta_true, w=w_true)


def write_truth_tsv(path, catalog, truth: ScenarioTruth):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("transcript_id\ttrue_label\ttheta_true\tw_true\n")
        for i, tid in enumerate(catalog.ids):
            fh.write(
                f"{tid}\t{int(truth.labels[i])}\t{truth.theta[i]:.8e}\t{truth.w[i]:.8e}\n"
            )


# ---------------------------------------------------------------------------
# exact posterior by enumeration


def _count_dp(rs: ReadSet, k):
    """Group allocation configurations by their count vector.

    Returns (counts matrix, log mass) where each row's mass is the summed
    product of alignment probabilities over all allocations with that count
    vector — an exact regrouping of the full enumeration.
    """
    table = {tuple([0] * k): 0.0}
    for i in range(rs.n_reads):
        tr, prob = rs.read(i)
        new = {}
        for counts, lm in table.items():
            for kk, p in zip(tr, prob):
                nxt = list(counts)
                nxt[kk] += 1
                nxt = tuple(nxt)
                add = lm + math.log(p)
                if nxt in new:
                    new[nxt] = np.logaddexp(new[nxt], add)
                else:
                    new[nxt] = add
        table = new
    counts = np.array(list(table.keys()), dtype=np.int64).reshape(len(table), k)
    return counts, np.array(list(table.values()))


def _grid_logweight(c, sx, sz, alpha, gamma):
    """allocation_marginal_logweight broadcast over count-vector grids."""
    alive = np.flatnonzero(np.asarray(c) == 1)
    dead = np.flatnonzero(np.asarray(c) == 0)
    acc = gammaln(alpha[dead] + sx[..., dead] + sz[..., dead]).sum(axis=-1)
    if alive.size:
        g = gamma[: alive.size]
        ax = alpha[alive] + sx[..., alive]
        gz = g + sz[..., alive]
        acc = acc + gammaln(ax).sum(axis=-1) + gammaln(gz).sum(axis=-1)
        acc = acc - gammaln(g).sum() + gammaln(g.sum())
        acc = acc + gammaln(ax.sum(axis=-1) + sz[..., alive].sum(axis=-1))
        acc = acc - gammaln(ax.sum(axis=-1)) - gammaln(gz.sum(axis=-1))
    return acc


def _grid_posterior_means(c, sx, sz, alpha, gamma):
    """Conditional posterior means of (theta, w) on count-vector grids.

    The sticks of the shared-vector law are independent, so the mean of each
    simplex component is the product of Beta means; shared slots pool both
    conditions' counts, differing slots use condition A, and a tail term
    switches pooling at the block boundary.
    """
    sets = dead_alive_sets(c)
    k = sets.n
    kstar = sets.n_dead
    tau = sets.tau
    ax = alpha[tau] + sx[..., tau]
    axz = ax + sz[..., tau]
    ax = np.broadcast_to(ax, axz.shape)
    shape = axz.shape[:-1]
    lam = np.concatenate([axz[..., :kstar], ax[..., kstar:]], axis=-1)
    suf_axz = np.zeros(shape + (k + 1,))
    suf_ax = np.zeros(shape + (k + 1,))
    suf_axz[..., :k] = np.cumsum(axz[..., ::-1], axis=-1)[..., ::-1]
    suf_ax[..., :k] = np.cumsum(ax[..., ::-1], axis=-1)[..., ::-1]
    bet = np.concatenate(
        [suf_axz[..., 1 : kstar + 1], suf_ax[..., kstar + 1 :]], axis=-1
    )
    ez = lam[..., : k - 1] / (lam[..., : k - 1] + bet[..., : k - 1])
    eu = np.empty(shape + (k,))
    rem = np.ones(shape)
    for p in range(k - 1):
        eu[..., p] = ez[..., p] * rem
        rem = rem * (1.0 - ez[..., p])
    eu[..., k - 1] = rem
    etheta = np.empty(shape + (k,))
    etheta[..., tau] = eu
    ew = np.empty(shape + (k,))
    ew[..., sets.dead] = eu[..., :kstar]
    if sets.n_alive:
        g = gamma[: sets.n_alive]
        vpar = g + sz[..., tau[kstar:]]
        ev = vpar / vpar.sum(axis=-1, keepdims=True)
        es = eu[..., kstar:].sum(axis=-1, keepdims=True)
        ew[..., sets.alive] = ev * es
    return etheta, ew


def _state_prior_logweights(k, prior: PriorConfig, n_grid=2001):
    """Unnormalized log prior weight per flag count, matching the samplers.

    Fixed mode uses the Bernoulli powers; Jeffreys mode integrates them
    against the Beta(1/2,1/2) density on the quadrature grid (the valid-state
    normalization happens once over all states at the end).
    """
    out = np.full(k + 1, -np.inf)
    if prior.pi is not None:
        for m in range(k + 1):
            out[m] = m * math.log(prior.pi) + (k - m) * math.log1p(-prior.pi)
        return out
    nodes, weights = jeffreys_quadrature(n_grid)
    for m in range(k + 1):
        vals = nodes**m * (1.0 - nodes) ** (k - m)
        out[m] = math.log(float(np.sum(weights * vals)))
    return out


def brute_force_posterior(aset: AlignmentSet, prior: PriorConfig,
                          max_k=4, max_reads=10, n_grid=2001):
    """Exact posterior over (states, flags, expression) for tiny instances.

    Enumerates every valid state and every allocation configuration (grouped
    exactly by count vectors), evaluates the collapsed joint weight times the
    state prior, and normalizes.  Expression means use the conditional
    stick-breaking/Dirichlet means per configuration.
    """
    k = aset.catalog.n
    if k > max_k or aset.r + aset.s > max_reads:
        raise ValueError("enumeration budget exceeded")
    alpha = prior.alpha_vector(k)
    gamma = prior.gamma_vector(k)
    sa, la = _count_dp(aset.reads_a, k)
    sb, lb = _count_dp(aset.reads_b, k)
    prior_lw = _state_prior_logweights(k, prior, n_grid)

    states = list(enumerate_states(k))
    state_logmass = np.empty(len(states))
    theta_acc = np.zeros((len(states), k))
    w_acc = np.zeros((len(states), k))
    for si, c in enumerate(states):
        sx = sa[:, None, :]
        sz = sb[None, :, :]
        lw = _grid_logweight(c, sx, sz, alpha, gamma)
        lw = lw + la[:, None] + lb[None, :] + prior_lw[int(c.sum())]
        mx = lw.max()
        wgt = np.exp(lw - mx)
        tot = wgt.sum()
        state_logmass[si] = mx + math.log(tot)
        etheta, ew = _grid_posterior_means(c, sx, sz, alpha, gamma)
        theta_acc[si] = (wgt[..., None] * etheta).sum(axis=(0, 1)) / tot
        w_acc[si] = (wgt[..., None] * ew).sum(axis=(0, 1)) / tot

    mx = state_logmass.max()
    p_state = np.exp(state_logmass - mx)
    p_state /= p_state.sum()
    p_de = np.zeros(k)
    e_theta = np.zeros(k)
    e_w = np.zeros(k)
    for si, c in enumerate(states):
        p_de += p_state[si] * c
        e_theta += p_state[si] * theta_acc[si]
        e_w += p_state[si] * w_acc[si]
    return {
        "states": states,
        "p_state": p_state,
        "p_de": p_de,
        "e_theta": e_theta,
        "e_w": e_w,
    }


def enumerate_reference_posterior(aset: AlignmentSet, prior: PriorConfig, n_grid=2001):
    """Literal product-space enumeration of all allocations; tiny inputs only.

    Cross-check for :func:`brute_force_posterior` — no grouping at all.
    """
    k = aset.catalog.n
    if aset.r + aset.s > 6:
        raise ValueError("too many reads for the literal enumerator")
    alpha = prior.alpha_vector(k)
    gamma = prior.gamma_vector(k)
    prior_lw = _state_prior_logweights(k, prior, n_grid)
    reads_a = [aset.reads_a.read(i) for i in range(aset.r)]
    reads_b = [aset.reads_b.read(j) for j in range(aset.s)]

    states = list(enumerate_states(k))
    logterms = {si: [] for si in range(len(states))}
    from .samplers import allocation_marginal_logweight

    for xa in itertools.product(*[range(len(t)) for t, _ in reads_a]) if reads_a else [()]:
        sx = np.zeros(k, dtype=np.int64)
        lfa = 0.0
        for (t, p), pick in zip(reads_a, xa):
            sx[t[pick]] += 1
            lfa += math.log(p[pick])
        for xb in itertools.product(*[range(len(t)) for t, _ in reads_b]) if reads_b else [()]:
            sz = np.zeros(k, dtype=np.int64)
            lfb = 0.0
            for (t, p), pick in zip(reads_b, xb):
                sz[t[pick]] += 1
                lfb += math.log(p[pick])
            for si, c in enumerate(states):
                lw = (
                    allocation_marginal_logweight(c, sx, sz, alpha, gamma)
                    + lfa + lfb + prior_lw[int(c.sum())]
                )
                logterms[si].append(lw)
    state_logmass = np.array(
        [np.logaddexp.reduce(logterms[si]) for si in range(len(states))]
    )
    p_state = np.exp(state_logmass - state_logmass.max())
    p_state /= p_state.sum()
    p_de = np.zeros(k)
    for si, c in enumerate(states):
        p_de += p_state[si] * c
    return {"states": states, "p_state": p_state, "p_de": p_de}
