"""Core model types: binary expression states, free parameters and the
deterministic map onto per-condition abundance vectors.

Each transcript carries a flag: 0 means its relative abundance is shared
between the two conditions, 1 means it differs.  A state with exactly one
flag set is impossible (two probability vectors that agree everywhere but
one coordinate are equal), so every valid state has flag sum != 1.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import betaln

SIMPLEX_ATOL = 1e-12


class InvalidStateError(ValueError):
    """Raised for state vectors with exactly one flag set."""


def validate_state(c):
    """Return ``c`` as an int8 array after checking the state invariants."""
    c = np.asarray(c)
    if c.ndim != 1 or c.size < 1:
        raise ValueError("state vector must be a nonempty 1-d array")
    if not np.isin(c, (0, 1)).all():
        raise ValueError("state vector entries must be 0 or 1")
    if int(c.sum()) == 1:
        raise InvalidStateError("exactly one flagged transcript is impossible")
    return c.astype(np.int8)


def _check_simplex(x, name):
    x = np.asarray(x, dtype=np.float64)
    if x.size and (x < 0).any():
        raise ValueError(f"{name} has negative components")
    if x.size and abs(x.sum() - 1.0) > 1e-9:
        raise ValueError(f"{name} does not sum to 1 (got {x.sum()!r})")
    return x


@dataclass(frozen=True)
class DeadAliveSets:
    """Ascending index sets of shared (dead) and differing (alive) transcripts.

    ``tau`` concatenates them; ``tau_inv`` is its inverse, so component
    ``tau[p]`` of the transcriptome occupies slot ``p`` of the free vector.
    """

    dead: np.ndarray
    alive: np.ndarray
    tau: np.ndarray
    tau_inv: np.ndarray

    @property
    def n(self):
        return self.tau.size

    @property
    def n_alive(self):
        return self.alive.size

    @property
    def n_dead(self):
        return self.dead.size


def dead_alive_sets(c) -> DeadAliveSets:
    """Split transcript indices by flag and build the slot permutation."""
    c = validate_state(c)
    dead = np.flatnonzero(c == 0)
    alive = np.flatnonzero(c == 1)
    tau = np.concatenate([dead, alive]).astype(np.int64)
    tau_inv = np.empty_like(tau)
    tau_inv[tau] = np.arange(tau.size)
    return DeadAliveSets(dead=dead, alive=alive, tau=tau, tau_inv=tau_inv)


def map_free_to_expression(sets: DeadAliveSets, u, v):
    """Map free parameters (u, v) to the abundance pair (theta, w).

    ``u`` lives on the full simplex in slot order (dead block first), ``v``
    on the simplex over alive slots.  theta picks up u directly; w copies the
    dead entries of u (the same stored values, so equality is bitwise) and
    splits the total alive mass of theta according to v.
    """
    u = _check_simplex(u, "u")
    if u.size != sets.n:
        raise ValueError(f"u has {u.size} components, expected {sets.n}")
    v = np.asarray(v, dtype=np.float64)
    if v.size != sets.n_alive:
        raise ValueError(f"v has {v.size} components, expected {sets.n_alive}")
    if v.size:
        _check_simplex(v, "v")

    kstar = sets.n_dead
    theta = np.empty(sets.n)
    theta[sets.tau] = u
    w = np.empty(sets.n)
    w[sets.dead] = u[:kstar]
    if sets.n_alive:
        w[sets.alive] = v * u[kstar:].sum()
    return theta, w


def extract_free_params(sets: DeadAliveSets, theta, w):
    """Invert :func:`map_free_to_expression`; exact for u, float-divided for v."""
    theta = np.asarray(theta, dtype=np.float64)
    u = theta[sets.tau]
    if sets.n_alive:
        v = np.asarray(w, dtype=np.float64)[sets.alive] / theta[sets.alive].sum()
    else:
        v = np.empty(0)
    return u, v


@dataclass(frozen=True)
class PriorConfig:
    """Hyperparameters: per-transcript alpha, per-alive-slot gamma, and the
    flag prior (``pi=None`` selects the Jeffreys treatment, a float fixes it).
    """

    alpha: float | np.ndarray = 1.0
    gamma: float | np.ndarray = 1.0
    pi: float | None = None

    def __post_init__(self):
        if np.any(np.asarray(self.alpha) <= 0) or np.any(np.asarray(self.gamma) <= 0):
            raise ValueError("hyperparameters must be strictly positive")
        if self.pi is not None and not 0.0 < self.pi < 1.0:
            raise ValueError("fixed flag probability must lie strictly inside (0, 1)")

    def alpha_vector(self, n):
        a = np.asarray(self.alpha, dtype=np.float64)
        if a.ndim == 0:
            return np.full(n, float(a))
        if a.size != n:
            raise ValueError(f"alpha has {a.size} entries, expected {n}")
        return a.copy()

    def gamma_vector(self, n):
        g = np.asarray(self.gamma, dtype=np.float64)
        if g.ndim == 0:
            return np.full(n, float(g))
        if g.size < n:
            raise ValueError(f"gamma has {g.size} entries, need at least {n}")
        return g[:n].copy()


def state_prior_logprob(c, pi):
    """Log-probability of a valid state given the flag probability.

    P(c) = pi^m (1-pi)^(K-m) / (1 - K pi (1-pi)^(K-1)) with m the flag sum;
    the denominator removes the single-flag states from the binary cube.
    """
    if not 0.0 < pi < 1.0:
        raise ValueError("pi must lie strictly inside (0, 1)")
    c = validate_state(c)
    k = c.size
    m = int(c.sum())
    norm = np.log1p(-k * pi * (1.0 - pi) ** (k - 1))
    return m * np.log(pi) + (k - m) * np.log1p(-pi) - norm


def pi_posterior_params(c_plus, k):
    """Beta parameters of the flag-probability update given the flag count."""
    if not 0 <= c_plus <= k:
        raise ValueError("flag count out of range")
    if c_plus == 1:
        raise InvalidStateError("flag count 1 has zero prior mass")
    return c_plus + 0.5, k - c_plus + 0.5


def enumerate_states(k):
    """Yield every valid state vector of length ``k`` (flag sum != 1)."""
    for bits in range(1 << k):
        c = np.array([(bits >> i) & 1 for i in range(k)], dtype=np.int8)
        if int(c.sum()) != 1:
            yield c


def sample_state(k, pi, rng):
    """Draw a valid state: independent flags, rejecting the flag-sum-1 states."""
    while True:
        c = (rng.random(k) < pi).astype(np.int8)
        if int(c.sum()) != 1:
            return c


def sample_prior(k, prior: PriorConfig, rng):
    """Forward draw from the joint prior: (c, theta, w).

    pi is drawn first (Beta(1/2, 1/2) in Jeffreys mode), then the state given
    pi, then the free parameters, which are mapped deterministically.
    """
    from .distributions import sample_dirichlet

    pi = prior.pi if prior.pi is not None else rng.beta(0.5, 0.5)
    pi = min(max(pi, 1e-12), 1.0 - 1e-12)
    c = sample_state(k, pi, rng)
    sets = dead_alive_sets(c)
    u = sample_dirichlet(prior.alpha_vector(k)[sets.tau], rng)
    if sets.n_alive:
        v = sample_dirichlet(prior.gamma_vector(sets.n_alive), rng)
    else:
        v = np.empty(0)
    theta, w = map_free_to_expression(sets, u, v)
    return c, theta, w


def forward_prior_p_ee(k, prior: PriorConfig, n_grid=2001):
    """P(flag_k = 0) under the forward prior draw of :func:`sample_prior`.

    For fixed pi this is exact; in Jeffreys mode pi is integrated out on a
    quadrature grid, with the per-pi state normalization inside the integral
    (matching the forward sampling procedure).
    """
    from .distributions import jeffreys_quadrature

    def p_ee_given_pi(pi):
        num = (1.0 - pi) * (1.0 - (k - 1) * pi * (1.0 - pi) ** (k - 2))
        den = 1.0 - k * pi * (1.0 - pi) ** (k - 1)
        return num / den

    if prior.pi is not None:
        return p_ee_given_pi(prior.pi)
    nodes, weights = jeffreys_quadrature(n_grid)
    return float(np.sum(weights * p_ee_given_pi(nodes)))


def stationary_prior_state_logweights(k, prior: PriorConfig):
    """Unnormalized log prior weight per flag count under the samplers' target.

    With fixed pi these are the Eq.-style Bernoulli weights; in Jeffreys mode
    the Beta resampling of pi implies marginal weights B(m + 1/2, K - m + 1/2)
    for flag count m.  Returns an array indexed by m = 0..K (entry for m = 1
    is -inf).
    """
    out = np.full(k + 1, -np.inf)
    for m in range(k + 1):
        if m == 1:
            continue
        if prior.pi is not None:
            out[m] = m * np.log(prior.pi) + (k - m) * np.log1p(-prior.pi)
        else:
            out[m] = betaln(m + 0.5, k - m + 0.5)
    return out


def stationary_prior_p_de(k, prior: PriorConfig):
    """Zero-data marginal P(flag_k = 1) under the samplers' stationary law."""
    from scipy.special import comb

    lw = stationary_prior_state_logweights(k, prior)
    num = 0.0
    den = 0.0
    for m in range(k + 1):
        if not np.isfinite(lw[m]):
            continue
        wm = np.exp(lw[m])
        den += comb(k, m) * wm
        if m >= 1:
            num += comb(k - 1, m - 1) * wm
    return num / den
