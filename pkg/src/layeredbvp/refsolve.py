"""High-order Galerkin reference solver on a layer-adapted mesh.

A small spectral-element discretization: two or three boundary-layer
elements of width proportional to ``degree * layer_width`` next to each
endpoint region, hierarchic integrated-Legendre shape functions inside each
element, dense LU for the (tiny) nonsymmetric system.  The resulting
solution acts as the numerical stand-in for the exact one when bounds and
decompositions are measured.
"""

from dataclasses import dataclass

import numpy as np

from .errors import OutOfDomain, QuadratureUnderResolved, SingularSystem
from .problem import classify_regime, layer_sample_grid, layer_widths


@dataclass(frozen=True)
class Mesh:
    breakpoints: tuple

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        if bp.size < 2 or np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing, length >= 2")
        object.__setattr__(self, "breakpoints", tuple(float(x) for x in bp))

    @property
    def n_elements(self):
        return len(self.breakpoints) - 1


def gauss_rule(n):
    """Gauss-Legendre nodes and weights on [-1, 1], exact to degree 2n-1."""
    if not 1 <= n <= 64:
        raise ValueError("gauss_rule supports 1 <= n <= 64")
    return np.polynomial.legendre.leggauss(n)


def build_layer_mesh(p, degree, kappa=2.5, regime_index=None, layer_elements=4,
                     grading=1.0 / 3.0):
    """Layer-adapted mesh: a patch of width ``min(kappa*degree*w, 1/3)`` at
    each endpoint, graded geometrically inside so a fixed degree resolves
    the exponential through the whole patch, plus one interior element.
    """
    if degree < 1:
        raise ValueError("degree must be at least 1")
    if regime_index is None:
        regime_index = classify_regime(p.eps1, p.eps2).index
    w_l, w_r = layer_widths(p, regime_index)
    t_l = min(kappa * degree * w_l, 1.0 / 3.0)
    t_r = min(kappa * degree * w_r, 1.0 / 3.0)
    pts = {0.0, t_l, 1.0 - t_r, 1.0}
    for k in range(1, layer_elements):
        pts.add(t_l * grading**k)
        pts.add(1.0 - t_r * grading**k)
    return Mesh(tuple(sorted(pts)))


def refine_layers(mesh):
    """Bisect the first and last elements (doubled layer resolution)."""
    bp = list(mesh.breakpoints)
    first_mid = 0.5 * (bp[0] + bp[1])
    last_mid = 0.5 * (bp[-2] + bp[-1])
    return Mesh(tuple(sorted(set(bp + [first_mid, last_mid]))))


def _legendre_table(xi, kmax):
    """P_0..P_kmax at the points xi, by the three-term recurrence."""
    xi = np.asarray(xi, dtype=float)
    P = np.zeros((kmax + 1, xi.size))
    P[0] = 1.0
    if kmax >= 1:
        P[1] = xi
    for k in range(1, kmax):
        P[k + 1] = ((2 * k + 1) * xi * P[k] - k * P[k - 1]) / (k + 1)
    return P


def shape_functions(xi, degree):
    """Values and xi-derivatives of the hierarchic basis on [-1, 1].

    Local ordering: [left vertex, right vertex, bubble_2, ..., bubble_degree].
    Bubble k is the integrated Legendre mode (P_k - P_{k-2}) / sqrt(2(2k-1)),
    which vanishes at both endpoints.
    """
    xi = np.asarray(xi, dtype=float)
    P = _legendre_table(xi, degree)
    n_loc = degree + 1
    V = np.zeros((xi.size, n_loc))
    D = np.zeros((xi.size, n_loc))
    V[:, 0] = 0.5 * (1.0 - xi)
    V[:, 1] = 0.5 * (1.0 + xi)
    D[:, 0] = -0.5
    D[:, 1] = 0.5
    for k in range(2, degree + 1):
        scale = 1.0 / np.sqrt(2.0 * (2.0 * k - 1.0))
        V[:, k] = (P[k] - P[k - 2]) * scale
        D[:, k] = np.sqrt((2.0 * k - 1.0) / 2.0) * P[k - 1]
    return V, D


def _dof_map(n_elements, degree):
    """Local-to-global map; -1 marks the eliminated boundary vertices."""
    n_bub = degree - 1
    maps = []
    for e in range(n_elements):
        left = e - 1 if e > 0 else -1
        right = e if e < n_elements - 1 else -1
        bub = [(n_elements - 1) + e * n_bub + j for j in range(n_bub)]
        maps.append([left, right] + bub)
    n_dofs = (n_elements - 1) + n_elements * n_bub
    return maps, n_dofs


@dataclass(frozen=True)
class FemSolution:
    mesh: Mesh
    degree: int
    coefficients: np.ndarray
    problem: object

    def eval(self, x, deriv_order=0):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        xs = np.atleast_1d(x)
        if np.any(xs < -1e-14) or np.any(xs > 1 + 1e-14):
            raise OutOfDomain("evaluation points must lie in [0, 1]")
        xs = np.clip(xs, 0.0, 1.0)
        bp = np.asarray(self.mesh.breakpoints)
        elem = np.clip(np.searchsorted(bp, xs, side="right") - 1, 0, bp.size - 2)
        out = np.zeros_like(xs)
        maps, _ = _dof_map(self.mesh.n_elements, self.degree)
        for e in np.unique(elem):
            sel = elem == e
            a, b = bp[e], bp[e + 1]
            h = b - a
            xi = 2.0 * (xs[sel] - a) / h - 1.0
            V, D = shape_functions(xi, self.degree)
            tab = V if deriv_order == 0 else D * (2.0 / h)
            coefs = np.array(
                [0.0 if g < 0 else self.coefficients[g] for g in maps[e]]
            )
            out[sel] = tab @ coefs
        return float(out[0]) if scalar else out

    def __call__(self, x, deriv=0):
        return self.eval(x, deriv)

    def sampled(self, grid=None):
        """(x, u, u') arrays on the layer-weighted sample grid."""
        if grid is None:
            regime = classify_regime(self.problem.eps1, self.problem.eps2)
            w_l, w_r = layer_widths(self.problem, regime.index)
            grid = layer_sample_grid(w_l, w_r)
        return grid, self.eval(grid, 0), self.eval(grid, 1)

    def to_dict(self):
        return {
            "breakpoints": [float(t) for t in self.mesh.breakpoints],
            "degree": int(self.degree),
            "coefficients": [float(c) for c in self.coefficients],
        }


def fem_solution_from_dict(d, problem=None):
    return FemSolution(
        mesh=Mesh(tuple(d["breakpoints"])),
        degree=int(d["degree"]),
        coefficients=np.asarray(d["coefficients"], dtype=float),
        problem=problem,
    )


def assemble(p, mesh, degree, n_quad=None):
    """Stiffness matrix and load vector of the weak form."""
    if n_quad is None:
        n_quad = min(degree + 6, 64)
    nodes, weights = gauss_rule(n_quad)
    maps, n_dofs = _dof_map(mesh.n_elements, degree)
    K = np.zeros((n_dofs, n_dofs))
    F = np.zeros(n_dofs)
    V, D = shape_functions(nodes, degree)
    bp = np.asarray(mesh.breakpoints)
    for e in range(mesh.n_elements):
        a, b = bp[e], bp[e + 1]
        h = b - a
        xq = 0.5 * h * (nodes + 1.0) + a
        jac = 0.5 * h
        bq, cq, fq = p.b(xq), p.c(xq), p.f(xq)
        wj = weights * jac
        Ke = (
            p.eps1 * (2.0 / h) ** 2 * (D.T * wj) @ D
            + p.eps2 * (2.0 / h) * (V.T * (wj * bq)) @ D
            + (V.T * (wj * cq)) @ V
        )
        Fe = V.T @ (wj * fq)
        gm = maps[e]
        for i_loc, gi in enumerate(gm):
            if gi < 0:
                continue
            F[gi] += Fe[i_loc]
            for j_loc, gj in enumerate(gm):
                if gj >= 0:
                    K[gi, gj] += Ke[i_loc, j_loc]
    return K, F


def solve_bvp(p, mesh, degree):
    """Galerkin solution with zero endpoint values; dense LU."""
    K, F = assemble(p, mesh, degree)
    try:
        coeffs = np.linalg.solve(K, F)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    res = np.linalg.norm(K @ coeffs - F)
    scale = np.linalg.norm(F)
    if scale > 0 and res > 1e-10 * scale:
        raise SingularSystem(
            f"linear solve residual {res:.3e} exceeds 1e-10 * ||F|| = {1e-10 * scale:.3e}"
        )
    return FemSolution(mesh=mesh, degree=degree, coefficients=coeffs, problem=p)


def reference_solution(p, degree, regime_index=None, extra_degree=4):
    """Surrogate-truth solve: higher degree on a layer-refined mesh.

    Returns ``(solution, gap)`` where ``gap`` is the max-norm distance to the
    next-lower-degree solve on the same mesh, i.e. a self-convergence
    estimate of the reference error.
    """
    mesh = refine_layers(build_layer_mesh(p, degree + extra_degree, regime_index=regime_index))
    hi = solve_bvp(p, mesh, degree + extra_degree)
    lo = solve_bvp(p, mesh, degree + extra_degree - 2)
    if regime_index is None:
        regime_index = classify_regime(p.eps1, p.eps2).index
    grid = layer_sample_grid(*layer_widths(p, regime_index))
    gap = float(np.max(np.abs(hi.eval(grid) - lo.eval(grid))))
    return hi, gap


def convergence_study(p, degrees, regime_index=None):
    """Energy/max-norm errors per degree against a higher-degree reference."""
    from .problem import QuadSpec, energy_norm

    ref, _gap = reference_solution(p, max(degrees), regime_index=regime_index)
    if regime_index is None:
        regime_index = classify_regime(p.eps1, p.eps2).index
    grid = layer_sample_grid(*layer_widths(p, regime_index))
    rows = []
    for deg in degrees:
        sol = solve_bvp(p, build_layer_mesh(p, deg, regime_index=regime_index), deg)
        diff = lambda x, d: sol(x, d) - ref(x, d)
        quad = QuadSpec.for_problem(
            p, regime_index, extra=sol.mesh.breakpoints + ref.mesh.breakpoints
        )
        rows.append(
            {
                "degree": int(deg),
                "error_max": float(np.max(np.abs(sol.eval(grid) - ref.eval(grid)))),
                "error_energy": energy_norm(diff, p, quad=quad),
                "error_energy_paper": energy_norm(diff, p, quad=quad, variant="paper"),
            }
        )
    return rows
