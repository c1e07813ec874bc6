"""Independent oracles used by the test suite.

Everything here is deliberately written from first principles (closed-form
two-exponential solutions, numeric power matching of the layer ansatz) and
must stay independent of the library code paths it is used to check.
"""

import numpy as np


def constant_coefficient_solution(eps1, eps2, b=1.0, c=1.0, f=1.0):
    """Exact solution of -eps1 u'' + eps2 b u' + c u = f, u(0)=u(1)=0,
    for constant data, in an overflow-safe form.

    Returns (u, du) callables.  The two characteristic roots satisfy
    lam0 < 0 < lam1; the lam1 mode is anchored at x = 1 so only
    non-positive exponents are ever evaluated.
    """
    disc = np.sqrt(eps2**2 * b**2 + 4.0 * eps1 * c)
    lam0 = (eps2 * b - disc) / (2.0 * eps1)
    lam1 = (eps2 * b + disc) / (2.0 * eps1)
    up = f / c
    # u = up + A exp(lam0 x) + Bt exp(lam1 (x-1)) with
    #   A + Bt exp(-lam1) = -up
    #   A exp(lam0) + Bt  = -up
    e0 = np.exp(lam0)   # lam0 < 0
    e1 = np.exp(-lam1)  # lam1 > 0
    det = 1.0 - e0 * e1
    A = -up * (1.0 - e1) / det
    Bt = -up * (1.0 - e0) / det

    def u(x):
        x = np.asarray(x, dtype=float)
        return up + A * np.exp(lam0 * x) + Bt * np.exp(lam1 * (x - 1.0))

    def du(x):
        x = np.asarray(x, dtype=float)
        return A * lam0 * np.exp(lam0 * x) + Bt * lam1 * np.exp(lam1 * (x - 1.0))

    return u, du


def manufactured_sine(eps1, eps2, b=1.0, c=1.0):
    """Data making u*(x) = sin(pi x) the exact solution, as one sinusoid.

    -eps1 u*'' + eps2 b u*' + c u* = (c + eps1 pi^2) sin(pi x)
                                     + eps2 b pi cos(pi x)
                                   = R sin(pi x + phi)
    """
    s = c + eps1 * np.pi**2
    t = eps2 * b * np.pi
    R = np.hypot(s, t)
    phi = np.arctan2(t, s)
    return R, phi


def extract_bivariate_coefficients(values_fn, deg_a, deg_b, a_nodes, b_nodes):
    """Coefficients C[a, b] of a polynomial sum C[a,b] s^a t^b from samples.

    ``values_fn(s, t)`` is evaluated on the node grid and the coefficient
    array is recovered by solving the two 1-D Vandermonde systems, one
    variable at a time.  Node counts must exceed the degrees.
    """
    a_nodes = np.asarray(a_nodes, dtype=float)
    b_nodes = np.asarray(b_nodes, dtype=float)
    samples = np.empty((a_nodes.size, b_nodes.size))
    for i, s in enumerate(a_nodes):
        for j, t in enumerate(b_nodes):
            samples[i, j] = values_fn(s, t)
    Va = np.vander(a_nodes, deg_a + 1, increasing=True)
    Vb = np.vander(b_nodes, deg_b + 1, increasing=True)
    # samples = Va @ C @ Vb.T
    tmp = np.linalg.lstsq(Va, samples, rcond=None)[0]
    C = np.linalg.lstsq(Vb, tmp.T, rcond=None)[0].T
    return C


def extract_univariate_coefficients(values_fn, deg, nodes):
    nodes = np.asarray(nodes, dtype=float)
    samples = np.array([values_fn(s) for s in nodes])
    V = np.vander(nodes, deg + 1, increasing=True)
    return np.linalg.lstsq(V, samples, rcond=None)[0]


def chebyshev_nodes(n, lo, hi):
    k = np.arange(n)
    x = np.cos((2 * k + 1) * np.pi / (2 * n))
    return 0.5 * (lo + hi) + 0.5 * (hi - lo) * x
