"""Dirichlet, Beta-mixture and stick-breaking simplex distributions.

The stick-breaking family generalizes the Dirichlet with one (shape, tail)
pair per free component; it shows up as the conditional law of the shared
free parameter whenever some mixture weights are tied across conditions.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import betaln, gammaln


def sample_dirichlet(alpha, rng):
    """Draw a simplex point via normalized Gamma variates.

    Correct for shapes below 1; redraws the (measure-zero) exact-zero
    underflows so components are strictly positive.
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    if alpha.ndim != 1 or alpha.size < 1:
        raise ValueError("alpha must be a nonempty vector")
    if (alpha <= 0).any():
        raise ValueError("Dirichlet parameters must be strictly positive")
    g = rng.gamma(alpha)
    while (g == 0.0).any():
        bad = g == 0.0
        g[bad] = rng.gamma(alpha[bad])
    return g / g.sum()


def dirichlet_logpdf(x, alpha):
    """Log density of a Dirichlet at an interior simplex point."""
    x = np.asarray(x, dtype=np.float64)
    alpha = np.asarray(alpha, dtype=np.float64)
    if x.shape != alpha.shape:
        raise ValueError("dimension mismatch")
    if (x <= 0).any() or (x >= 1).any():
        raise ValueError("point must lie in the simplex interior")
    return float(
        np.sum((alpha - 1.0) * np.log(x)) + gammaln(alpha.sum()) - gammaln(alpha).sum()
    )


@dataclass(frozen=True)
class GDParams:
    """Shape/tail parameter pairs of the stick-breaking simplex law."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=np.float64)
        b = np.asarray(self.b, dtype=np.float64)
        if a.ndim != 1 or a.shape != b.shape or a.size < 1:
            raise ValueError("a and b must be equally sized nonempty vectors")
        if (a <= 0).any() or (b <= 0).any():
            raise ValueError("parameters must be strictly positive")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def k(self):
        return self.a.size


def gd_logpdf(x, params: GDParams):
    """Log density at a full simplex point of k+1 components.

    Density over the k free components x_1..x_k:
        prod_j x_j^(a_j - 1) (1 - x_1 - ... - x_j)^(g_j) / B(a_j, b_j)
    with g_j = b_j - a_{j+1} - b_{j+1} for j < k and g_k = b_k - 1.
    """
    k = params.k
    x = np.asarray(x, dtype=np.float64)
    if x.size != k + 1:
        raise ValueError(f"point has {x.size} components, expected {k + 1}")
    if abs(x.sum() - 1.0) > 1e-8:
        raise ValueError("point does not sum to 1")
    if (x <= 0).any():
        raise ValueError("point must lie in the simplex interior")
    # 1 - x_1 - ... - x_j via tail sums, accurate near the boundary
    tails = np.cumsum(x[::-1])[::-1]
    rem = tails[1:-1] if k > 1 else np.empty(0)
    if (rem <= 0).any():
        raise ValueError("point must lie in the simplex interior")
    g = np.empty(k)
    g[: k - 1] = params.b[:-1] - params.a[1:] - params.b[1:]
    g[k - 1] = params.b[-1] - 1.0
    logdet = np.sum((params.a - 1.0) * np.log(x[:k]))
    logdet += np.sum(g[: k - 1] * np.log(rem)) if k > 1 else 0.0
    logdet += g[k - 1] * np.log(tails[k])
    logdet -= betaln(params.a, params.b).sum()
    return float(logdet)


def sample_gd(params: GDParams, rng):
    """Stick-breaking draw: independent Beta fractions of the remaining mass."""
    k = params.k
    x = np.empty(k + 1)
    rem = 1.0
    for j in range(k):
        z = rng.beta(params.a[j], params.b[j])
        while z <= 0.0 or z >= 1.0:
            z = rng.beta(params.a[j], params.b[j])
        x[j] = z * rem
        rem *= 1.0 - z
    x[k] = rem
    return x


def gd_reduction_dirichlet(params: GDParams):
    """Dirichlet parameters equal to the stick-breaking law when b_j telescopes.

    Requires b_j = a_{j+1} + b_{j+1} for all j < k; the matching Dirichlet is
    (a_1, ..., a_k, b_k).  Raises if the condition fails.
    """
    if params.k > 1:
        need = params.a[1:] + params.b[1:]
        if not np.allclose(params.b[:-1], need, rtol=0, atol=1e-12):
            raise ValueError("tail parameters do not telescope")
    return np.concatenate([params.a, params.b[-1:]])


def beta_mixture_logpdf(x, betas):
    """Log density of the equally weighted Beta(1, b_j) mixture on (0, 1)."""
    betas = np.asarray(betas, dtype=np.float64)
    if not 0.0 < x < 1.0:
        raise ValueError("x must lie in (0, 1)")
    return float(np.log(np.mean(betas * (1.0 - x) ** (betas - 1.0))))


def sample_beta_mixture(betas, rng):
    """Draw from the equally weighted Beta(1, b_j) mixture."""
    b = betas[rng.integers(len(betas))]
    x = rng.beta(1.0, b)
    while x <= 0.0 or x >= 1.0:
        x = rng.beta(1.0, b)
    return x


def jeffreys_quadrature(n=2001):
    """Nodes and weights integrating smooth f against the Beta(1/2,1/2) density.

    Gauss-Legendre applied after the substitution p = sin^2(phi), which turns
    the inverse-square-root endpoint singularities into a trigonometric
    polynomial; weights sum to 1.
    """
    y, w = np.polynomial.legendre.leggauss(n)
    phi = 0.25 * np.pi * (y + 1.0)
    nodes = np.sin(phi) ** 2
    weights = w * (0.25 * np.pi) * (2.0 / np.pi)
    return nodes, weights
