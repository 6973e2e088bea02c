"""Shared spectral machinery: Chebyshev collocation on [0,1], Clenshaw-Curtis
weights, orthonormal Jacobi bases for the weighted eigenproblem, and panel
Gauss-Legendre quadrature."""

import numpy as np
from scipy.special import gammaln, roots_jacobi


def cheb_lobatto(m):
    """Ascending Chebyshev-Lobatto nodes on [0,1]: x_j = sin^2(pi j / 2m)."""
    j = np.arange(m + 1)
    return np.sin(0.5 * np.pi * j / m) ** 2


def cheb_diff_matrix(m):
    """First-derivative collocation matrix on cheb_lobatto(m) nodes."""
    if m == 0:
        return np.zeros((1, 1))
    # standard matrix on z_j = cos(pi j / m), then chain rule x = (1-z)/2
    z = np.cos(np.pi * np.arange(m + 1) / m)
    c = np.ones(m + 1)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** np.arange(m + 1)
    Z = np.tile(z, (m + 1, 1)).T
    dZ = Z - Z.T + np.eye(m + 1)
    D = np.outer(c, 1.0 / c) / dZ
    D -= np.diag(D.sum(axis=1))
    return -2.0 * D


def clenshaw_curtis_weights(m):
    """Weights w_j with sum_j w_j f(x_j) ~ int_0^1 f dx on cheb_lobatto(m)."""
    if m == 0:
        return np.array([1.0])
    k = np.arange(0, m + 1, 2)
    w = np.zeros(m + 1)
    # Fejer/Clenshaw-Curtis via cosine sums (O(m^2), built once)
    j = np.arange(m + 1)
    for idx in j:
        s = 1.0
        for kk in k[1:]:
            factor = 0.5 if kk == m else 1.0
            s -= factor * 2.0 * np.cos(kk * np.pi * idx / m) / (kk * kk - 1.0)
        w[idx] = 2.0 * s / m
    w[0] *= 0.5
    w[-1] *= 0.5
    return 0.5 * w  # map [-1,1] -> [0,1]


def cheb_coefficients(values):
    """Chebyshev coefficients of data sampled on cheb_lobatto nodes.

    values[..., j] corresponds to x_j ascending; returns a_k with
    f = sum_k a_k T_k(1 - 2x)."""
    v = np.asarray(values, dtype=float)
    m = v.shape[-1] - 1
    if m == 0:
        return v.copy()
    j = np.arange(m + 1)
    cosmat = np.cos(np.pi * np.outer(j, j) / m)
    scale = np.ones(m + 1)
    scale[0] = scale[-1] = 0.5
    a = (2.0 / m) * ((v * scale) @ cosmat)
    a[..., 0] *= 0.5
    a[..., -1] *= 0.5
    return a


def gauss_panels(edges, nodes_per_panel=12):
    """Gauss-Legendre nodes/weights tiling the intervals between edges."""
    xg, wg = np.polynomial.legendre.leggauss(nodes_per_panel)
    lo = np.asarray(edges[:-1])
    hi = np.asarray(edges[1:])
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = mid[:, None] + half[:, None] * xg
    weights = half[:, None] * wg
    return nodes.ravel(), weights.ravel(), nodes.shape


# ---------------------------------------------------------------------------
# Jacobi machinery on [0,1] with weight x^beta (1-x)^alpha


def gauss_jacobi01(n, alpha, beta):
    """Nodes/weights with sum w_i f(x_i) = int_0^1 f(x) x^beta (1-x)^alpha dx."""
    t, w = roots_jacobi(n, alpha, beta)
    return 0.5 * (t + 1.0), w * 2.0 ** (-(alpha + beta + 1.0))


def _jacobi_lognorm(n, alpha, beta):
    # squared L2 norm of P_n^(a,b) under x^beta (1-x)^alpha on [0,1]
    n = np.asarray(n, dtype=float)
    ln = (
        gammaln(n + alpha + 1.0)
        + gammaln(n + beta + 1.0)
        - gammaln(n + alpha + beta + 1.0)
        - gammaln(n + 1.0)
        - np.log(2.0 * n + alpha + beta + 1.0)
    )
    return ln


def jacobi_recurrence_values(x, nmax, alpha, beta):
    """Values P_n^(alpha,beta)(2x-1) for n = 0..nmax-1, shape (len(x), nmax)."""
    t = 2.0 * np.asarray(x, dtype=float) - 1.0
    out = np.empty(t.shape + (nmax,))
    out[..., 0] = 1.0
    if nmax > 1:
        out[..., 1] = 0.5 * (alpha + beta + 2.0) * t + 0.5 * (alpha - beta)
    for n in range(2, nmax):
        a1 = 2.0 * n * (n + alpha + beta) * (2.0 * n + alpha + beta - 2.0)
        a2 = (2.0 * n + alpha + beta - 1.0) * (alpha**2 - beta**2)
        a3 = (2.0 * n + alpha + beta - 1.0) * (2.0 * n + alpha + beta) * (2.0 * n + alpha + beta - 2.0)
        a4 = 2.0 * (n + alpha - 1.0) * (n + beta - 1.0) * (2.0 * n + alpha + beta)
        out[..., n] = ((a2 + a3 * t) * out[..., n - 1] - a4 * out[..., n - 2]) / a1
    return out


def orthonormal_jacobi(x, nmax, alpha, beta, deriv=False):
    """Orthonormal basis phi_n on [0,1] under x^beta (1-x)^alpha, optionally
    with d/dx values; returns (values, derivs or None), shape (len(x), nmax)."""
    norm = np.exp(-0.5 * _jacobi_lognorm(np.arange(nmax), alpha, beta))
    vals = jacobi_recurrence_values(x, nmax, alpha, beta) * norm
    if not deriv:
        return vals, None
    dvals = np.zeros_like(vals)
    if nmax > 1:
        inner = jacobi_recurrence_values(x, nmax - 1, alpha + 1.0, beta + 1.0)
        n = np.arange(1, nmax, dtype=float)
        # d/dx P_n(2x-1) = (n + alpha + beta + 1) P_(n-1)^(a+1,b+1)(2x-1)
        dvals[..., 1:] = inner * (n + alpha + beta + 1.0) * norm[1:]
    return vals, dvals
