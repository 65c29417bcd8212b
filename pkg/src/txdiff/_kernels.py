"""JIT chain kernels with an explicit counter-free PRNG.

Every chain owns a xoshiro256++ state seeded from (master seed, cluster
label, chain id), so draws are bitwise reproducible regardless of thread
count or scheduling.  All workspaces are allocated by the callers; nothing
allocates inside the iteration loops.

Error codes returned by the chain kernels:
    0 ok, 1 count audit mismatch, 2 zero weight mass for a read.
"""

import math

import numpy as np
from numba import int64, njit, uint64

_MASK = (1 << 64) - 1


def _splitmix(x):
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return x, (z ^ (z >> 31)) & _MASK


def make_state(master_seed, cluster_label=0, chain_id=0):
    """Derive a xoshiro256++ state from the (seed, cluster, chain) triple."""
    x = master_seed & _MASK
    x, h = _splitmix(x)
    x, _ = _splitmix((x ^ ((cluster_label + 1) * 0x9E3779B97F4A7C15)) & _MASK)
    x, _ = _splitmix((x ^ ((chain_id + 1) * 0xBF58476D1CE4E5B9)) & _MASK)
    state = np.empty(4, dtype=np.uint64)
    for i in range(4):
        x, h = _splitmix(x)
        state[i] = h
    if not state.any():
        state[0] = 1
    return state


@njit(nogil=True, cache=True, inline="always")
def _rotl(x, k):
    return (x << k) | (x >> (uint64(64) - k))


@njit(nogil=True, cache=True, inline="always")
def _next_u64(s):
    res = _rotl(s[0] + s[3], uint64(23)) + s[0]
    t = s[1] << uint64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], uint64(45))
    return res


@njit(nogil=True, cache=True, inline="always")
def runif(s):
    # 53-bit uniform in [0, 1)
    return (_next_u64(s) >> uint64(11)) * 1.1102230246251565e-16


@njit(nogil=True, cache=True, inline="always")
def runif_pos(s):
    u = runif(s)
    while u <= 0.0:
        u = runif(s)
    return u


@njit(nogil=True, cache=True, inline="always")
def randint(s, n):
    # explicit signed cast: unsigned results poison later arithmetic
    return int64(_next_u64(s) % uint64(n))


@njit(nogil=True, cache=True)
def rnorm(s):
    u1 = runif_pos(s)
    u2 = runif(s)
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(6.283185307179586 * u2)


@njit(nogil=True, cache=True)
def rgamma(s, shape):
    # Marsaglia-Tsang; shapes below 1 boosted by U^(1/shape)
    while True:
        a = shape
        boost = 1.0
        if a < 1.0:
            boost = math.pow(runif_pos(s), 1.0 / a)
            a += 1.0
        d = a - 1.0 / 3.0
        cc = 1.0 / math.sqrt(9.0 * d)
        g = 0.0
        while True:
            x = rnorm(s)
            v = 1.0 + cc * x
            if v <= 0.0:
                continue
            v = v * v * v
            u = runif_pos(s)
            if math.log(u) < 0.5 * x * x + d - d * v + d * math.log(v):
                g = d * v * boost
                break
        if g > 0.0:
            return g


@njit(nogil=True, cache=True)
def rbeta(s, a, b):
    g1 = rgamma(s, a)
    g2 = rgamma(s, b)
    x = g1 / (g1 + g2)
    while x <= 0.0 or x >= 1.0:
        g1 = rgamma(s, a)
        g2 = rgamma(s, b)
        x = g1 / (g1 + g2)
    return x


@njit(nogil=True, cache=True)
def _categorical(s, wbuf, n, tot):
    u = runif(s) * tot
    acc = 0.0
    for t in range(n):
        acc += wbuf[t]
        if u <= acc:
            return t
    return n - 1


@njit(nogil=True, cache=True)
def _propose_fprop(s, betas):
    # equally weighted Beta(1, b_j) mixture, inverse-CDF per component
    j = randint(s, betas.size)
    u = runif_pos(s)
    d = 1.0 - math.pow(u, 1.0 / betas[j])
    while d <= 0.0 or d >= 1.0:
        u = runif_pos(s)
        d = 1.0 - math.pow(u, 1.0 / betas[j])
    return d


@njit(nogil=True, cache=True)
def _logpdf_fprop(delta, betas):
    m = -1e308
    for j in range(betas.size):
        t = math.log(betas[j]) + (betas[j] - 1.0) * math.log1p(-delta)
        if t > m:
            m = t
    acc = 0.0
    for j in range(betas.size):
        acc += math.exp(math.log(betas[j]) + (betas[j] - 1.0) * math.log1p(-delta) - m)
    return m + math.log(acc) - math.log(float(betas.size))


# ---------------------------------------------------------------------------
# shared model pieces

@njit(nogil=True, cache=True)
def _draw_pi(s, c, k, fixed_pi):
    if fixed_pi > 0.0:
        return fixed_pi
    m = 0
    for i in range(k):
        m += c[i]
    pi = rbeta(s, m + 0.5, k - m + 0.5)
    if pi < 1e-12:
        pi = 1e-12
    elif pi > 1.0 - 1e-12:
        pi = 1.0 - 1e-12
    return pi


@njit(nogil=True, cache=True)
def _cell_logweight(c, j1, b1, j2, b2, sx, sz, alpha, gamma, k):
    """Log joint weight (allocation marginal x state prior pieces) of the
    state that equals c except bits (j1, j2); returns (logw, flag_count).

    Includes the varying-dimension prior constant of the alive-share simplex;
    the flag-probability powers are added by the caller.
    """
    a1 = 0.0
    a1z = 0.0
    g1z = 0.0
    acc = 0.0
    gsum = 0.0
    m = 0
    for t in range(k):
        if t == j1:
            bit = b1
        elif t == j2:
            bit = b2
        else:
            bit = c[t]
        if bit == 1:
            ax = alpha[t] + sx[t]
            a1 += ax
            a1z += ax + sz[t]
            gl = gamma[m] + sz[t]
            g1z += gl
            acc += math.lgamma(ax) + math.lgamma(gl) - math.lgamma(gamma[m])
            gsum += gamma[m]
            m += 1
        else:
            acc += math.lgamma(alpha[t] + sx[t] + sz[t])
    if m > 0:
        acc += math.lgamma(a1z) - math.lgamma(a1) - math.lgamma(g1z)
        acc += math.lgamma(gsum)
    return acc, m


@njit(nogil=True, cache=True)
def _block_update(s, c, sx, sz, alpha, gamma, k, log_pi, log_1mpi, wbuf4, bits1, bits2):
    j1 = randint(s, k)
    j2 = randint(s, k - 1)
    if j2 >= j1:
        j2 += 1
    d = 0
    for t in range(k):
        d += c[t]
    d -= c[j1] + c[j2]

    n_cell = 0
    # (1,1) always admissible
    lw, m = _cell_logweight(c, j1, 1, j2, 1, sx, sz, alpha, gamma, k)
    wbuf4[n_cell] = lw + m * log_pi + (k - m) * log_1mpi
    bits1[n_cell] = 1
    bits2[n_cell] = 1
    n_cell += 1
    if d != 1:
        lw, m = _cell_logweight(c, j1, 0, j2, 0, sx, sz, alpha, gamma, k)
        wbuf4[n_cell] = lw + m * log_pi + (k - m) * log_1mpi
        bits1[n_cell] = 0
        bits2[n_cell] = 0
        n_cell += 1
    if d != 0:
        lw, m = _cell_logweight(c, j1, 1, j2, 0, sx, sz, alpha, gamma, k)
        wbuf4[n_cell] = lw + m * log_pi + (k - m) * log_1mpi
        bits1[n_cell] = 1
        bits2[n_cell] = 0
        n_cell += 1
        lw, m = _cell_logweight(c, j1, 0, j2, 1, sx, sz, alpha, gamma, k)
        wbuf4[n_cell] = lw + m * log_pi + (k - m) * log_1mpi
        bits1[n_cell] = 0
        bits2[n_cell] = 1
        n_cell += 1

    mx = wbuf4[0]
    for t in range(1, n_cell):
        if wbuf4[t] > mx:
            mx = wbuf4[t]
    tot = 0.0
    for t in range(n_cell):
        wbuf4[t] = math.exp(wbuf4[t] - mx)
        tot += wbuf4[t]
    pick = _categorical(s, wbuf4, n_cell, tot)
    c[j1] = bits1[pick]
    c[j2] = bits2[pick]


@njit(nogil=True, cache=True)
def _draw_expression(s, c, sx, sz, alpha, gamma, k, tau, suf_all, suf_x, ubuf, vbuf, theta, w):
    """Sample the free parameters given counts and map them to (theta, w).

    The shared vector follows the stick-breaking law with shape/tail pairs
    built from the counts (shared slots pool both conditions, differing
    slots use condition A only); alive shares are Dirichlet over condition-B
    counts.  Shared components of w copy theta's storage bitwise.
    """
    m = 0
    for t in range(k):
        if c[t] == 0:
            tau[m] = t
            m += 1
    kstar = m
    for t in range(k):
        if c[t] == 1:
            tau[m] = t
            m += 1
    suf_all[k] = 0.0
    suf_x[k] = 0.0
    for p in range(k - 1, -1, -1):
        t = tau[p]
        suf_all[p] = suf_all[p + 1] + alpha[t] + sx[t] + sz[t]
        suf_x[p] = suf_x[p + 1] + alpha[t] + sx[t]
    rem = 1.0
    for p in range(k - 1):
        t = tau[p]
        if p < kstar:
            lam = alpha[t] + sx[t] + sz[t]
            bet = suf_all[p + 1]
        else:
            lam = alpha[t] + sx[t]
            bet = suf_x[p + 1]
        zeta = rbeta(s, lam, bet)
        ubuf[p] = zeta * rem
        rem *= 1.0 - zeta
    ubuf[k - 1] = rem

    for p in range(k):
        theta[tau[p]] = ubuf[p]
    for p in range(kstar):
        w[tau[p]] = ubuf[p]
    c_plus = k - kstar
    if c_plus > 0:
        alive_mass = 0.0
        for p in range(kstar, k):
            alive_mass += ubuf[p]
        tot = 0.0
        for l in range(c_plus):
            g = rgamma(s, gamma[l] + sz[tau[kstar + l]])
            vbuf[l] = g
            tot += g
        for l in range(c_plus):
            vbuf[l] = vbuf[l] / tot
            w[tau[kstar + l]] = vbuf[l] * alive_mass
    return kstar


@njit(nogil=True, cache=True)
def _init_allocations(s, off, tr, f, weights, assign, counts, wbuf):
    n = off.size - 1
    for i in range(n):
        lo = off[i]
        hi = off[i + 1]
        tot = 0.0
        for t in range(lo, hi):
            wgt = weights[tr[t]] * f[t]
            wbuf[t - lo] = wgt
            tot += wgt
        if tot <= 0.0:
            return 2
        pick = _categorical(s, wbuf, hi - lo, tot)
        kk = tr[lo + pick]
        assign[i] = kk
        counts[kk] += 1
    return 0


@njit(nogil=True, cache=True)
def _audit(assign, counts, k, pinned, pseudo, tmp):
    for t in range(k):
        tmp[t] = 0
    for i in range(assign.size):
        tmp[assign[i]] += 1
    if pseudo >= 0:
        tmp[pseudo] += pinned
    for t in range(k):
        if tmp[t] != counts[t]:
            return False
    return True


# ---------------------------------------------------------------------------
# collapsed sampler

@njit(nogil=True, cache=True)
def _alive_sums(c, sx, sz, alpha, gamma, k, grank):
    """Running totals over the flagged set; counts change them by exactly
    1.0 per reallocation so incremental maintenance is lossless."""
    a1 = 0.0
    a1z = 0.0
    g1 = 0.0
    m = 0
    for t in range(k):
        if c[t] == 1:
            grank[t] = m
            ax = alpha[t] + sx[t]
            a1 += ax
            a1z += ax + sz[t]
            g1 += gamma[m] + sz[t]
            m += 1
    return a1, a1z, g1, m


@njit(nogil=True, cache=True)
def collapsed_chain(
    a_off, a_tr, a_f, b_off, b_tr, b_f,
    alpha, gamma, pinned_a, pinned_b, pseudo,
    c0, iterations, burnin, thin, pair_updates, audit_every, fixed_pi,
    rng,
    mean_c, mean_theta, mean_w, ckpt_c,
    rec_c, rec_theta, rec_w, record,
):
    k = alpha.size
    n_a = a_off.size - 1
    n_b = b_off.size - 1

    c = c0.copy()
    sx = np.zeros(k)
    sz = np.zeros(k)
    xi = np.empty(n_a, dtype=np.int64)
    z = np.empty(n_b, dtype=np.int64)
    tau = np.empty(k, dtype=np.int64)
    grank = np.empty(k, dtype=np.int64)
    suf_all = np.empty(k + 1)
    suf_x = np.empty(k + 1)
    ubuf = np.empty(k)
    vbuf = np.empty(k)
    theta = np.empty(k)
    w = np.empty(k)
    tmp = np.empty(k, dtype=np.int64)
    wbuf4 = np.empty(4)
    bits1 = np.empty(4, dtype=np.int8)
    bits2 = np.empty(4, dtype=np.int8)
    maxt = 1
    for i in range(n_a):
        if a_off[i + 1] - a_off[i] > maxt:
            maxt = a_off[i + 1] - a_off[i]
    for j in range(n_b):
        if b_off[j + 1] - b_off[j] > maxt:
            maxt = b_off[j + 1] - b_off[j]
    wbuf = np.empty(maxt)

    # initial expression from the prior (zero counts), then allocations
    _draw_expression(rng, c, sx, sz, alpha, gamma, k, tau, suf_all, suf_x, ubuf, vbuf, theta, w)
    if pseudo >= 0:
        sx[pseudo] += pinned_a
        sz[pseudo] += pinned_b
    err = _init_allocations(rng, a_off, a_tr, a_f, theta, xi, sx, wbuf)
    if err != 0:
        return 0, err
    err = _init_allocations(rng, b_off, b_tr, b_f, w, z, sz, wbuf)
    if err != 0:
        return 0, err

    pi = _draw_pi(rng, c, k, fixed_pi)
    n_kept_total = (iterations - burnin - 1) // thin + 1 if iterations > burnin else 0
    n_ckpt = ckpt_c.shape[0]
    stride = n_kept_total // n_ckpt if n_ckpt > 0 else 0
    if stride < 1:
        stride = 1
    kept = 0
    ckpt_i = 0
    a1, a1z, g1, c_plus = _alive_sums(c, sx, sz, alpha, gamma, k, grank)

    for it in range(iterations):
        for i in range(n_a):
            k_old = xi[i]
            sx[k_old] -= 1
            if c[k_old] == 1:
                a1 -= 1.0
                a1z -= 1.0
            ratio = a1z / a1 if c_plus > 0 else 1.0
            lo = a_off[i]
            hi = a_off[i + 1]
            tot = 0.0
            for t in range(lo, hi):
                kk = a_tr[t]
                if c[kk] == 0:
                    tot += (alpha[kk] + sx[kk] + sz[kk]) * a_f[t]
                else:
                    tot += ratio * (alpha[kk] + sx[kk]) * a_f[t]
            if tot <= 0.0:
                return kept, 2
            u = runif(rng) * tot
            k_new = a_tr[hi - 1]
            acc = 0.0
            for t in range(lo, hi):
                kk = a_tr[t]
                if c[kk] == 0:
                    acc += (alpha[kk] + sx[kk] + sz[kk]) * a_f[t]
                else:
                    acc += ratio * (alpha[kk] + sx[kk]) * a_f[t]
                if u <= acc:
                    k_new = kk
                    break
            xi[i] = k_new
            sx[k_new] += 1
            if c[k_new] == 1:
                a1 += 1.0
                a1z += 1.0
        for j in range(n_b):
            k_old = z[j]
            sz[k_old] -= 1
            if c[k_old] == 1:
                a1z -= 1.0
                g1 -= 1.0
            ratio = a1z / g1 if c_plus > 0 else 1.0
            lo = b_off[j]
            hi = b_off[j + 1]
            tot = 0.0
            for t in range(lo, hi):
                kk = b_tr[t]
                if c[kk] == 0:
                    tot += (alpha[kk] + sx[kk] + sz[kk]) * b_f[t]
                else:
                    tot += ratio * (gamma[grank[kk]] + sz[kk]) * b_f[t]
            if tot <= 0.0:
                return kept, 2
            u = runif(rng) * tot
            k_new = b_tr[hi - 1]
            acc = 0.0
            for t in range(lo, hi):
                kk = b_tr[t]
                if c[kk] == 0:
                    acc += (alpha[kk] + sx[kk] + sz[kk]) * b_f[t]
                else:
                    acc += ratio * (gamma[grank[kk]] + sz[kk]) * b_f[t]
                if u <= acc:
                    k_new = kk
                    break
            z[j] = k_new
            sz[k_new] += 1
            if c[k_new] == 1:
                a1z += 1.0
                g1 += 1.0
        log_pi = math.log(pi)
        log_1mpi = math.log1p(-pi)
        if k >= 2:
            for _ in range(pair_updates):
                _block_update(rng, c, sx, sz, alpha, gamma, k, log_pi, log_1mpi,
                              wbuf4, bits1, bits2)
        a1, a1z, g1, c_plus = _alive_sums(c, sx, sz, alpha, gamma, k, grank)
        pi = _draw_pi(rng, c, k, fixed_pi)
        if audit_every > 0 and (it + 1) % audit_every == 0:
            if not _audit(xi, sx, k, pinned_a, pseudo, tmp):
                return kept, 1
            if not _audit(z, sz, k, pinned_b, pseudo, tmp):
                return kept, 1
        if it >= burnin and (it - burnin) % thin == 0:
            _draw_expression(
                rng, c, sx, sz, alpha, gamma, k, tau, suf_all, suf_x, ubuf, vbuf, theta, w
            )
            for t in range(k):
                mean_c[t] += c[t]
                mean_theta[t] += theta[t]
                mean_w[t] += w[t]
            if record > 0:
                for t in range(k):
                    rec_c[kept, t] = c[t]
                if record > 1:
                    for t in range(k):
                        rec_theta[kept, t] = theta[t]
                        rec_w[kept, t] = w[t]
            kept += 1
            if ckpt_i < n_ckpt and kept % stride == 0:
                for t in range(k):
                    ckpt_c[ckpt_i, t] = mean_c[t] / kept
                ckpt_i += 1
    for t in range(k):
        mean_c[t] /= kept
        mean_theta[t] /= kept
        mean_w[t] /= kept
    while ckpt_i < n_ckpt:
        for t in range(k):
            ckpt_c[ckpt_i, t] = mean_c[t]
        ckpt_i += 1
    return kept, 0


# ---------------------------------------------------------------------------
# reversible-jump sampler

@njit(nogil=True, cache=True)
def _logpdf_dirichlet(x, par, n):
    acc = math.lgamma(_sum(par, n))
    for i in range(n):
        acc += (par[i] - 1.0) * math.log(x[i]) - math.lgamma(par[i])
    return acc


@njit(nogil=True, cache=True, inline="always")
def _sum(x, n):
    acc = 0.0
    for i in range(n):
        acc += x[i]
    return acc


@njit(nogil=True, cache=True)
def _loglik_b_pair(b_off, b_tr, b_f, w_cur, w_new):
    """Sum over condition-B reads of log of the mixture mass, current vs
    proposed; returns the difference (proposed minus current)."""
    acc = 0.0
    for j in range(b_off.size - 1):
        s1 = 0.0
        s2 = 0.0
        for t in range(b_off[j], b_off[j + 1]):
            kk = b_tr[t]
            s1 += w_cur[kk] * b_f[t]
            s2 += w_new[kk] * b_f[t]
        acc += math.log(s2) - math.log(s1)
    return acc


@njit(nogil=True, cache=True)
def rj_chain(
    a_off, a_tr, a_f, b_off, b_tr, b_f,
    alpha, gamma, pinned_a, pinned_b, pseudo,
    c0, iterations, burnin, thin, audit_every, fixed_pi, prop_betas,
    rng,
    mean_c, mean_theta, mean_w, ckpt_c,
    rec_c, rec_theta, rec_w, record,
):
    k = alpha.size
    n_a = a_off.size - 1
    n_b = b_off.size - 1

    c = c0.copy()
    sx = np.zeros(k)
    sz = np.zeros(k)
    xi = np.empty(n_a, dtype=np.int64)
    z = np.empty(n_b, dtype=np.int64)
    tau = np.empty(k, dtype=np.int64)
    suf_all = np.empty(k + 1)
    suf_x = np.empty(k + 1)
    ubuf = np.empty(k)
    vbuf = np.empty(k)
    v = np.empty(k)
    v_new = np.empty(k)
    theta = np.empty(k)
    w = np.empty(k)
    w_new = np.empty(k)
    tmp = np.empty(k, dtype=np.int64)
    maxt = 1
    for i in range(n_a):
        if a_off[i + 1] - a_off[i] > maxt:
            maxt = a_off[i + 1] - a_off[i]
    for j in range(n_b):
        if b_off[j + 1] - b_off[j] > maxt:
            maxt = b_off[j + 1] - b_off[j]
    wbuf = np.empty(maxt)

    kstar = _draw_expression(
        rng, c, sx, sz, alpha, gamma, k, tau, suf_all, suf_x, ubuf, vbuf, theta, w
    )
    c_plus = k - kstar
    for l in range(c_plus):
        v[l] = vbuf[l]
    if pseudo >= 0:
        sx[pseudo] += pinned_a
        sz[pseudo] += pinned_b
    err = _init_allocations(rng, a_off, a_tr, a_f, theta, xi, sx, wbuf)
    if err != 0:
        return 0, err, 0, 0
    err = _init_allocations(rng, b_off, b_tr, b_f, w, z, sz, wbuf)
    if err != 0:
        return 0, err, 0, 0

    pi = _draw_pi(rng, c, k, fixed_pi)
    n_kept_total = (iterations - burnin - 1) // thin + 1 if iterations > burnin else 0
    n_ckpt = ckpt_c.shape[0]
    stride = n_kept_total // n_ckpt if n_ckpt > 0 else 0
    if stride < 1:
        stride = 1
    kept = 0
    ckpt_i = 0
    n_prop = 0
    n_acc = 0

    for it in range(iterations):
        # (a) reallocate given current expression
        for i in range(n_a):
            k_old = xi[i]
            sx[k_old] -= 1
            lo = a_off[i]
            hi = a_off[i + 1]
            tot = 0.0
            for t in range(lo, hi):
                wgt = theta[a_tr[t]] * a_f[t]
                wbuf[t - lo] = wgt
                tot += wgt
            if tot <= 0.0:
                return kept, 2, n_acc, n_prop
            k_new = a_tr[lo + _categorical(rng, wbuf, hi - lo, tot)]
            xi[i] = k_new
            sx[k_new] += 1
        for j in range(n_b):
            k_old = z[j]
            sz[k_old] -= 1
            lo = b_off[j]
            hi = b_off[j + 1]
            tot = 0.0
            for t in range(lo, hi):
                wgt = w[b_tr[t]] * b_f[t]
                wbuf[t - lo] = wgt
                tot += wgt
            if tot <= 0.0:
                return kept, 2, n_acc, n_prop
            k_new = b_tr[lo + _categorical(rng, wbuf, hi - lo, tot)]
            z[j] = k_new
            sz[k_new] += 1

        # (b, c) conjugate expression update
        kstar = _draw_expression(
            rng, c, sx, sz, alpha, gamma, k, tau, suf_all, suf_x, ubuf, vbuf, theta, w
        )
        c_plus = k - kstar
        for l in range(c_plus):
            v[l] = vbuf[l]

        # (d) birth/death proposal for the flag vector and alive shares
        log_pi = math.log(pi)
        log_1mpi = math.log1p(-pi)
        if it >= burnin:
            n_prop += 1
        if k < 2:
            pass  # a one-component model has a single valid state
        elif runif(rng) < (k - c_plus) / k:
            # birth
            if c_plus == 0:
                i1 = randint(rng, k)
                i2 = randint(rng, k - 1)
                if i2 >= i1:
                    i2 += 1
                if i2 < i1:
                    i1, i2 = i2, i1
                delta = _propose_fprop(rng, prop_betas)
                v_new[0] = delta
                v_new[1] = 1.0 - delta
                n_new = 2
                smass = theta[i1] + theta[i2]
                for t in range(k):
                    w_new[t] = theta[t]
                w_new[i1] = delta * smass
                w_new[i2] = (1.0 - delta) * smass
                log_moves = math.log(k - 1.0)
                log_prior_c = 2.0 * (log_pi - log_1mpi)
                log_jac = 0.0
                lp_v_old = 0.0
                k_born1 = i1
                k_born2 = i2
            else:
                di = randint(rng, k - c_plus)
                m = -1
                k_born1 = -1
                for t in range(k):
                    if c[t] == 0:
                        m += 1
                        if m == di:
                            k_born1 = t
                            break
                k_born2 = -1
                slot = 0
                for t in range(k_born1):
                    slot += c[t]
                delta = _propose_fprop(rng, prop_betas)
                for l in range(slot):
                    v_new[l] = v[l] * (1.0 - delta)
                v_new[slot] = delta
                for l in range(slot, c_plus):
                    v_new[l + 1] = v[l] * (1.0 - delta)
                n_new = c_plus + 1
                smass = theta[k_born1]
                for t in range(k):
                    if c[t] == 1:
                        smass += theta[t]
                m = 0
                for t in range(k):
                    w_new[t] = theta[t]
                for t in range(k):
                    if c[t] == 1 or t == k_born1:
                        w_new[t] = v_new[m] * smass
                        m += 1
                log_moves = 0.0
                log_prior_c = log_pi - log_1mpi
                log_jac = (c_plus - 1.0) * math.log1p(-delta)
                lp_v_old = _logpdf_dirichlet(v, gamma, c_plus)
            lp_v_new = _logpdf_dirichlet(v_new, gamma, n_new)
            # theta is unchanged, so the shared-vector prior terms cancel;
            # pinned pseudo reads are never reallocated, so their likelihood
            # ratio enters directly
            log_a = (
                _loglik_b_pair(b_off, b_tr, b_f, w, w_new)
                + log_moves + log_prior_c + lp_v_new - lp_v_old
                + log_jac - _logpdf_fprop(delta, prop_betas)
            )
            if pseudo >= 0 and pinned_b > 0:
                log_a += pinned_b * (math.log(w_new[pseudo]) - math.log(w[pseudo]))
            if math.log(runif_pos(rng)) < log_a:
                if it >= burnin:
                    n_acc += 1
                c[k_born1] = 1
                if c_plus == 0:
                    c[k_born2] = 1
                c_plus = n_new
                kstar = k - c_plus
                for l in range(n_new):
                    v[l] = v_new[l]
                for t in range(k):
                    w[t] = w_new[t]
                for j in range(n_b):
                    k_old = z[j]
                    sz[k_old] -= 1
                    lo = b_off[j]
                    hi = b_off[j + 1]
                    tot = 0.0
                    for t in range(lo, hi):
                        wgt = w[b_tr[t]] * b_f[t]
                        wbuf[t - lo] = wgt
                        tot += wgt
                    if tot <= 0.0:
                        return kept, 2, n_acc, n_prop
                    k_new = b_tr[lo + _categorical(rng, wbuf, hi - lo, tot)]
                    z[j] = k_new
                    sz[k_new] += 1
        elif c_plus > 0:
            # death
            if c_plus == 2:
                delta = v[0]
                n_new = 0
                for t in range(k):
                    w_new[t] = theta[t]
                log_moves = -math.log(k - 1.0)
                log_prior_c = 2.0 * (log_1mpi - log_pi)
                log_jac = 0.0
                lp_v_new = 0.0
                k_dead = -2  # both alive components die
            else:
                ai = randint(rng, c_plus)
                m = -1
                k_dead = -1
                for t in range(k):
                    if c[t] == 1:
                        m += 1
                        if m == ai:
                            k_dead = t
                            break
                slot = 0
                for t in range(k_dead):
                    slot += c[t]
                delta = v[slot]
                for l in range(slot):
                    v_new[l] = v[l] / (1.0 - delta)
                for l in range(slot + 1, c_plus):
                    v_new[l - 1] = v[l] / (1.0 - delta)
                n_new = c_plus - 1
                smass = 0.0
                for t in range(k):
                    if c[t] == 1:
                        smass += theta[t]
                smass -= theta[k_dead]
                m = 0
                for t in range(k):
                    w_new[t] = theta[t]
                for t in range(k):
                    if c[t] == 1 and t != k_dead:
                        w_new[t] = v_new[m] * smass
                        m += 1
                log_moves = 0.0
                log_prior_c = log_1mpi - log_pi
                log_jac = -(c_plus - 2.0) * math.log1p(-delta)
                lp_v_new = _logpdf_dirichlet(v_new, gamma, n_new)
            lp_v_old = _logpdf_dirichlet(v, gamma, c_plus)
            log_a = (
                _loglik_b_pair(b_off, b_tr, b_f, w, w_new)
                + log_moves + log_prior_c + lp_v_new - lp_v_old
                + log_jac + _logpdf_fprop(delta, prop_betas)
            )
            if pseudo >= 0 and pinned_b > 0:
                log_a += pinned_b * (math.log(w_new[pseudo]) - math.log(w[pseudo]))
            if math.log(runif_pos(rng)) < log_a:
                if it >= burnin:
                    n_acc += 1
                if k_dead == -2:
                    for t in range(k):
                        c[t] = 0
                else:
                    c[k_dead] = 0
                c_plus = n_new
                kstar = k - c_plus
                for l in range(n_new):
                    v[l] = v_new[l]
                for t in range(k):
                    w[t] = w_new[t]
                for j in range(n_b):
                    k_old = z[j]
                    sz[k_old] -= 1
                    lo = b_off[j]
                    hi = b_off[j + 1]
                    tot = 0.0
                    for t in range(lo, hi):
                        wgt = w[b_tr[t]] * b_f[t]
                        wbuf[t - lo] = wgt
                        tot += wgt
                    if tot <= 0.0:
                        return kept, 2, n_acc, n_prop
                    k_new = b_tr[lo + _categorical(rng, wbuf, hi - lo, tot)]
                    z[j] = k_new
                    sz[k_new] += 1

        # (e) flag-probability update
        pi = _draw_pi(rng, c, k, fixed_pi)
        if audit_every > 0 and (it + 1) % audit_every == 0:
            if not _audit(xi, sx, k, pinned_a, pseudo, tmp):
                return kept, 1, n_acc, n_prop
            if not _audit(z, sz, k, pinned_b, pseudo, tmp):
                return kept, 1, n_acc, n_prop
        if it >= burnin and (it - burnin) % thin == 0:
            for t in range(k):
                mean_c[t] += c[t]
                mean_theta[t] += theta[t]
                mean_w[t] += w[t]
            if record > 0:
                for t in range(k):
                    rec_c[kept, t] = c[t]
                if record > 1:
                    for t in range(k):
                        rec_theta[kept, t] = theta[t]
                        rec_w[kept, t] = w[t]
            kept += 1
            if ckpt_i < n_ckpt and kept % stride == 0:
                for t in range(k):
                    ckpt_c[ckpt_i, t] = mean_c[t] / kept
                ckpt_i += 1
    for t in range(k):
        mean_c[t] /= kept
        mean_theta[t] /= kept
        mean_w[t] /= kept
    while ckpt_i < n_ckpt:
        for t in range(k):
            ckpt_c[ckpt_i, t] = mean_c[t]
        ckpt_i += 1
    return kept, 0, n_acc, n_prop
