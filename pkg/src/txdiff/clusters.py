"""Read-sharing connected components and per-cluster model augmentation.

Transcripts are joined whenever a read aligns to both; each component gets
an extra pseudo-component absorbing all reads (and prior mass) of the rest
of the transcriptome, so per-component inference targets proper marginals
of the full posterior.
"""

from dataclasses import dataclass

import numpy as np

from .ingest import AlignmentSet, ReadSet
from .model import PriorConfig


class UnionFind:
    """Array union-find with path halving."""

    def __init__(self, n):
        self.parent = np.arange(n, dtype=np.int64)

    def find(self, a):
        p = self.parent
        while p[a] != a:
            p[a] = p[p[a]]
            a = p[a]
        return a

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


@dataclass(frozen=True)
class Cluster:
    label: int                 # minimum member index, 0-based
    members: np.ndarray        # ascending global transcript indices
    reads_a: np.ndarray        # indices into the pooled condition-A reads
    reads_b: np.ndarray

    @property
    def n_reads(self):
        return self.reads_a.size + self.reads_b.size


@dataclass(frozen=True)
class ClusterPartition:
    clusters: tuple
    orphans: np.ndarray        # transcripts with no aligned read
    n_transcripts: int
    r: int
    s: int


def build_clusters(aset: AlignmentSet) -> ClusterPartition:
    """Connected components of the co-alignment graph over both conditions.

    Reads are attached to the unique component containing their targets.
    The output is independent of read order: components and labels depend
    only on the set of edges.
    """
    k = aset.catalog.n
    uf = UnionFind(k)
    covered = np.zeros(k, dtype=bool)
    for rs in (aset.reads_a, aset.reads_b):
        for i in range(rs.n_reads):
            tr, _ = rs.read(i)
            covered[tr] = True
            for j in range(1, tr.size):
                uf.union(tr[0], tr[j])

    root = np.array([uf.find(t) if covered[t] else -1 for t in range(k)])
    labels = {}
    for t in range(k):
        if root[t] >= 0 and root[t] not in labels:
            labels[root[t]] = t  # first hit is the minimum index
    members = {lab: [] for lab in labels.values()}
    for t in range(k):
        if root[t] >= 0:
            members[labels[root[t]]].append(t)

    read_cluster_a = _assign_reads(aset.reads_a, root, labels)
    read_cluster_b = _assign_reads(aset.reads_b, root, labels)

    clusters = []
    for lab in sorted(members):
        clusters.append(
            Cluster(
                label=lab,
                members=np.array(members[lab], dtype=np.int64),
                reads_a=np.flatnonzero(read_cluster_a == lab),
                reads_b=np.flatnonzero(read_cluster_b == lab),
            )
        )
    part = ClusterPartition(
        clusters=tuple(clusters),
        orphans=np.flatnonzero(~covered),
        n_transcripts=k,
        r=aset.r,
        s=aset.s,
    )
    _assert_partition(part)
    return part


def _assign_reads(rs: ReadSet, root, labels):
    out = np.empty(rs.n_reads, dtype=np.int64)
    for i in range(rs.n_reads):
        tr, _ = rs.read(i)
        out[i] = labels[root[tr[0]]]
    return out


def _assert_partition(part: ClusterPartition):
    seen = np.zeros(part.n_transcripts, dtype=np.int64)
    for cl in part.clusters:
        if cl.label != int(cl.members.min()):
            raise AssertionError("cluster label is not its minimum member")
        seen[cl.members] += 1
    seen[part.orphans] += 1
    if not (seen == 1).all():
        raise AssertionError("clusters plus orphans do not partition the transcripts")
    if sum(cl.reads_a.size for cl in part.clusters) != part.r:
        raise AssertionError("condition-A reads not fully assigned")
    if sum(cl.reads_b.size for cl in part.clusters) != part.s:
        raise AssertionError("condition-B reads not fully assigned")


@dataclass(frozen=True)
class AugmentedCluster:
    """Local model over one component plus (usually) a pseudo-component.

    Local indices 0..K-1; when ``has_pseudo`` the last one is the pseudo
    component, it appears in no alignment record, and its allocation counts
    are pinned to the read totals of the rest of the transcriptome.
    """

    label: int
    members: np.ndarray        # global indices of the real transcripts
    k: int                     # local component count (pseudo included)
    has_pseudo: bool
    pinned_a: int
    pinned_b: int
    alpha: np.ndarray          # per-component prior mass (pseudo aggregated)
    gamma: np.ndarray          # per-alive-slot prior mass
    a_off: np.ndarray
    a_tr: np.ndarray
    a_f: np.ndarray
    b_off: np.ndarray
    b_tr: np.ndarray
    b_f: np.ndarray

    @property
    def n_reads_a(self):
        return self.a_off.size - 1

    @property
    def n_reads_b(self):
        return self.b_off.size - 1


def _local_csr(rs: ReadSet, read_idx, local_of):
    tr, prob, sizes = [], [], []
    for i in read_idx:
        t, p = rs.read(i)
        tr.append(local_of[t])
        prob.append(p)
        sizes.append(t.size)
    if not sizes:
        return np.array([0], dtype=np.int64), np.empty(0, np.int32), np.empty(0)
    offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
    return offsets, np.concatenate(tr).astype(np.int32), np.concatenate(prob)


def augment_cluster(aset: AlignmentSet, part: ClusterPartition, j, prior: PriorConfig):
    """Build the local inference model for cluster ``j``.

    The pseudo-component receives the summed prior mass of all non-member
    transcripts and permanently holds the reads that align elsewhere.  When
    that prior mass is zero (a single cluster covering the whole catalog)
    the pseudo-component would be degenerate and is omitted; the local model
    then coincides with the global one.
    """
    cl = part.clusters[j]
    alpha_global = prior.alpha_vector(aset.catalog.n)
    complement = float(alpha_global.sum() - alpha_global[cl.members].sum())
    has_pseudo = complement > 0.0
    kj = cl.members.size
    k = kj + 1 if has_pseudo else kj

    local_of = np.full(aset.catalog.n, -1, dtype=np.int64)
    local_of[cl.members] = np.arange(kj)
    a_off, a_tr, a_f = _local_csr(aset.reads_a, cl.reads_a, local_of)
    b_off, b_tr, b_f = _local_csr(aset.reads_b, cl.reads_b, local_of)

    alpha = np.empty(k)
    alpha[:kj] = alpha_global[cl.members]
    if has_pseudo:
        alpha[kj] = complement
    return AugmentedCluster(
        label=cl.label,
        members=cl.members,
        k=k,
        has_pseudo=has_pseudo,
        pinned_a=part.r - cl.reads_a.size if has_pseudo else 0,
        pinned_b=part.s - cl.reads_b.size if has_pseudo else 0,
        alpha=alpha,
        gamma=prior.gamma_vector(k),
        a_off=a_off, a_tr=a_tr, a_f=a_f,
        b_off=b_off, b_tr=b_tr, b_f=b_f,
    )


def whole_set_cluster(aset: AlignmentSet, prior: PriorConfig):
    """The unpartitioned model over every catalog transcript, no pseudo."""
    k = aset.catalog.n
    return AugmentedCluster(
        label=0,
        members=np.arange(k, dtype=np.int64),
        k=k,
        has_pseudo=False,
        pinned_a=0,
        pinned_b=0,
        alpha=prior.alpha_vector(k),
        gamma=prior.gamma_vector(k),
        a_off=aset.reads_a.offsets, a_tr=aset.reads_a.tr, a_f=aset.reads_a.prob,
        b_off=aset.reads_b.offsets, b_tr=aset.reads_b.tr, b_f=aset.reads_b.prob,
    )


def break_bridge_reads(aset: AlignmentSet, max_transcripts):
    """Drop reads that alone bridge otherwise-disconnected parts of oversized clusters.

    A read is a bridge when its targets span at least two read-covered
    components of the graph built from all other reads of its cluster
    (articulation points of the bipartite graph are the candidates; reads
    whose removal merely orphans a transcript are kept).  Only clusters with
    more than ``max_transcripts`` members are touched.  Returns the filtered
    set and the number of reads dropped.
    """
    part = build_clusters(aset)
    drop_a = np.zeros(aset.r, dtype=bool)
    drop_b = np.zeros(aset.s, dtype=bool)
    for cl in part.clusters:
        if cl.members.size <= max_transcripts:
            continue
        bridges_a, bridges_b = _bridge_reads(aset, cl)
        drop_a[cl.reads_a[bridges_a]] = True
        drop_b[cl.reads_b[bridges_b]] = True
    n_dropped = int(drop_a.sum() + drop_b.sum())
    if n_dropped == 0:
        return aset, 0
    return (
        AlignmentSet(aset.catalog, aset.reads_a.subset(~drop_a), aset.reads_b.subset(~drop_b)),
        n_dropped,
    )


def _bridge_reads(aset: AlignmentSet, cl: Cluster):
    trans = {t: i for i, t in enumerate(cl.members)}
    n_t = cl.members.size
    adj_reads = []
    for rs, idx in ((aset.reads_a, cl.reads_a), (aset.reads_b, cl.reads_b)):
        for i in idx:
            tr, _ = rs.read(i)
            adj_reads.append([trans[t] for t in tr])
    candidates = _articulation_reads(adj_reads, n_t)
    bridges = []
    for cand in candidates:
        uf = UnionFind(n_t)
        covered = np.zeros(n_t, dtype=bool)
        for ri, ts in enumerate(adj_reads):
            if ri == cand:
                continue
            covered[ts] = True
            for t in ts[1:]:
                uf.union(ts[0], t)
        roots = {uf.find(t) for t in adj_reads[cand] if covered[t]}
        if len(roots) >= 2:
            bridges.append(cand)
    bridges = np.array(bridges, dtype=np.int64)
    n_a = cl.reads_a.size
    return bridges[bridges < n_a], bridges[bridges >= n_a] - n_a


def _articulation_reads(adj_reads, n_t):
    """Articulation points on the read side of a bipartite read-transcript graph."""
    n_r = len(adj_reads)
    adj_trans = [[] for _ in range(n_t)]
    for ri, ts in enumerate(adj_reads):
        for t in ts:
            adj_trans[t].append(ri)

    # iterative Tarjan over nodes 0..n_t-1 (transcripts) and n_t.. (reads)
    n = n_t + n_r
    neighbors = lambda v: (
        [n_t + ri for ri in adj_trans[v]] if v < n_t else adj_reads[v - n_t]
    )
    disc = np.full(n, -1, dtype=np.int64)
    low = np.zeros(n, dtype=np.int64)
    is_art = np.zeros(n, dtype=bool)
    timer = 0
    for start in range(n):
        if disc[start] != -1:
            continue
        root_children = 0
        stack = [(start, -1, iter(neighbors(start)))]
        disc[start] = low[start] = timer
        timer += 1
        while stack:
            v, parent, it = stack[-1]
            advanced = False
            for u in it:
                if disc[u] == -1:
                    disc[u] = low[u] = timer
                    timer += 1
                    if v == start:
                        root_children += 1
                    stack.append((u, v, iter(neighbors(u))))
                    advanced = True
                    break
                elif u != parent:
                    low[v] = min(low[v], disc[u])
            if not advanced:
                stack.pop()
                if stack:
                    pv = stack[-1][0]
                    low[pv] = min(low[pv], low[v])
                    if pv != start and low[v] >= disc[pv]:
                        is_art[pv] = True
        if root_children > 1:
            is_art[start] = True

    return np.flatnonzero(is_art[n_t:])


def write_cluster_dump(path, aset: AlignmentSet, part: ClusterPartition):
    """TSV: cluster label (1-based), sizes, read counts and member ids."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("cluster_label\tn_transcripts\tn_reads_a\tn_reads_b\tmember_ids\n")
        for cl in part.clusters:
            ids = ",".join(aset.catalog.ids[t] for t in cl.members)
            fh.write(
                f"{cl.label + 1}\t{cl.members.size}\t{cl.reads_a.size}\t{cl.reads_b.size}\t{ids}\n"
            )
        if part.orphans.size:
            ids = ",".join(aset.catalog.ids[t] for t in part.orphans)
            fh.write(f"0\t{part.orphans.size}\t0\t0\t{ids}\n")
