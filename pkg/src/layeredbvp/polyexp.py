"""Exact algebra of polynomial-times-exponential functions.

A :class:`PolyExp` represents ``z -> sum_k p_k(z) * exp(-lam_k z)`` with real
polynomial factors and real decay rates.  Layer terms of the boundary-layer
hierarchies live in this class, and the two solvers below return exact
solutions of the constant-coefficient layer ODEs, so every computed layer
satisfies its equation to rounding error.

Decay (all rates positive) is what makes these functions admissible layer
carriers; it is enforced at the solver boundaries rather than in the
constructor so that non-decaying inputs can be rejected loudly.
"""

import numpy as np

from .errors import NoDecayingSolution, NonDecayingInput, SelfCheckFailed

_RATE_MERGE_TOL = 1e-12
_SELF_CHECK_TOL = 1e-9


def _trim(poly):
    p = np.asarray(poly, dtype=float)
    nz = np.nonzero(p)[0]
    if nz.size == 0:
        return None
    return p[: nz[-1] + 1]


class PolyExp:
    """Finite sum of ``p(z) * exp(-rate * z)`` terms.

    Terms whose rates agree to within ``1e-12 * max(1, rate)`` are merged by
    polynomial addition and zero polynomials are dropped, so the stored term
    list is canonical.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms=()):
        merged = []
        for poly, rate in terms:
            p = _trim(poly)
            if p is None:
                continue
            rate = float(rate)
            if not np.isfinite(rate):
                raise ValueError("rate must be finite")
            for idx, (q, mu) in enumerate(merged):
                if abs(rate - mu) < _RATE_MERGE_TOL * max(1.0, abs(mu)):
                    n = max(p.size, q.size)
                    s = np.zeros(n)
                    s[: q.size] += q
                    s[: p.size] += p
                    merged[idx] = (s, mu)
                    break
            else:
                merged.append((p.copy(), rate))
        clean = []
        for p, mu in merged:
            p = _trim(p)
            if p is not None:
                clean.append((p, mu))
        clean.sort(key=lambda t: t[1])
        self._terms = tuple((_readonly(p), mu) for p, mu in clean)

    @property
    def terms(self):
        return self._terms

    @property
    def is_zero(self):
        return not self._terms

    @property
    def is_decaying(self):
        return all(rate > 0 for _, rate in self._terms)

    def min_rate(self):
        """Dominant (slowest) decay rate; None for the zero function."""
        if not self._terms:
            return None
        return min(rate for _, rate in self._terms)

    def degree(self):
        """Largest polynomial degree across terms; -1 for the zero function."""
        if not self._terms:
            return -1
        return max(p.size - 1 for p, _ in self._terms)

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def exponential(cls, coeff, rate):
        return cls([(np.array([float(coeff)]), rate)])

    def __add__(self, other):
        return PolyExp(self._terms + other._terms)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return PolyExp([(-p, mu) for p, mu in self._terms])

    def __rmul__(self, scalar):
        s = float(scalar)
        return PolyExp([(s * p, mu) for p, mu in self._terms])

    __mul__ = __rmul__

    def times_monomial(self, k):
        """Multiply by ``z**k`` (shifts every polynomial factor)."""
        if k == 0:
            return self
        out = []
        for p, mu in self._terms:
            q = np.zeros(p.size + k)
            q[k:] = p
            out.append((q, mu))
        return PolyExp(out)

    def derive(self):
        """Term-wise derivative: (p e^{-mu z})' = (p' - mu p) e^{-mu z}."""
        out = []
        for p, mu in self._terms:
            dp = p[1:] * np.arange(1, p.size) if p.size > 1 else np.zeros(0)
            q = np.zeros(p.size)
            q[: dp.size] += dp
            q -= mu * p
            out.append((q, mu))
        return PolyExp(out)

    def derivative(self, n):
        v = self
        for _ in range(n):
            v = v.derive()
        return v

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        out = np.zeros_like(z, dtype=float)
        for p, mu in self._terms:
            out += np.polynomial.polynomial.polyval(z, p) * np.exp(-mu * z)
        return out

    def sup_tail(self, z0):
        """Overestimate of ``sup_{z >= z0} |v(z)|``.

        Each term is bounded by the max of ``|p|`` on the window where the
        product can still peak (about ``deg/rate`` past ``z0``) times the
        exponential at ``z0``.
        """
        z0 = float(z0)
        if z0 < 0:
            raise ValueError("sup_tail needs z0 >= 0")
        total = 0.0
        for p, mu in self._terms:
            if mu <= 0:
                raise NonDecayingInput("sup_tail requires positive rates")
            width = (p.size - 1) / mu + 10.0 / mu
            zs = np.linspace(z0, z0 + width, 256)
            pmax = float(np.max(np.abs(np.polynomial.polynomial.polyval(zs, p))))
            total += pmax * np.exp(-mu * z0)
        return total

    def pretty(self):
        """Debug form ``(c0 + c1 z + ...)*exp(-lam z) + ...`` at 17 digits."""
        if not self._terms:
            return "0"
        parts = []
        for p, mu in self._terms:
            inner = " + ".join(
                f"{c:.17g}" if k == 0 else f"{c:.17g} z^{k}" if k > 1 else f"{c:.17g} z"
                for k, c in enumerate(p)
            )
            parts.append(f"({inner})*exp(-{mu:.17g} z)")
        return " + ".join(parts)

    def __repr__(self):
        return f"PolyExp<{len(self._terms)} terms, degree {self.degree()}>"


def _readonly(a):
    a = np.asarray(a, dtype=float)
    a.flags.writeable = False
    return a


def polyexp_derive(v):
    return v.derive()


def polyexp_eval(v, z):
    return v(z)


def polyexp_sup_tail(v, z0):
    return v.sup_tail(z0)


def _check_decaying(rhs):
    for _, rate in rhs.terms:
        if rate <= 0:
            raise NonDecayingInput(f"rhs rate {rate} is not positive")


def _poly_antiderivative(p):
    out = np.zeros(p.size + 1)
    out[1:] = p / np.arange(1, p.size + 1)
    return out


def solve_first_order(b0, c0, rhs, alpha):
    """Exact decaying solution of ``b0 v' + c0 v = rhs`` with ``v(0) = alpha``.

    ``c0 / b0`` must be positive (the homogeneous mode decays).  Resonant
    right-hand-side terms raise the polynomial degree by one through exact
    antidifferentiation; the rest are solved by back substitution.
    """
    b0 = float(b0)
    c0 = float(c0)
    if b0 == 0:
        raise ValueError("b0 must be nonzero")
    lam = c0 / b0
    if lam <= 0:
        raise NoDecayingSolution("homogeneous rate c0/b0 must be positive")
    _check_decaying(rhs)

    parts = []
    for q, nu in rhs.terms:
        if abs(nu - lam) < _RATE_MERGE_TOL * max(1.0, lam):
            # resonant: b0 p' = q
            parts.append((_poly_antiderivative(q / b0), lam))
        else:
            a = c0 - b0 * nu
            p = np.zeros(q.size)
            for k in range(q.size - 1, -1, -1):
                upper = b0 * (k + 1) * p[k + 1] if k + 1 < q.size else 0.0
                p[k] = (q[k] - upper) / a
            parts.append((p, nu))
    particular = PolyExp(parts)
    hom = alpha - float(particular(0.0))
    v = particular + PolyExp.exponential(hom, lam)
    _self_check(lambda w: b0 * w.derive() + c0 * w, v, rhs, alpha)
    return v


def solve_constant_ode(a2, a1, a0, rhs, alpha):
    """Exact decaying solution of ``a2 w'' + a1 w' + a0 w = rhs``, ``w(0) = alpha``.

    The characteristic polynomial ``a2 m^2 + a1 m + a0`` must have two real
    roots, one negative (the decaying kernel mode) and one >= 0.  The
    growing/constant mode is excluded by the decay requirement; the decaying
    mode's coefficient matches the boundary value.
    """
    a2, a1, a0 = float(a2), float(a1), float(a0)
    disc = a1 * a1 - 4 * a2 * a0
    if a2 == 0 or disc <= 0:
        raise NoDecayingSolution("characteristic roots must be real and distinct")
    sq = np.sqrt(disc)
    m1 = (-a1 + sq) / (2 * a2)
    m2 = (-a1 - sq) / (2 * a2)
    m_minus, m_plus = min(m1, m2), max(m1, m2)
    if not (m_minus < 0 <= m_plus):
        raise NoDecayingSolution(
            f"need one negative and one nonnegative root, got {m_minus}, {m_plus}"
        )
    r_decay = -m_minus
    _check_decaying(rhs)

    parts = []
    for q, nu in rhs.terms:
        if nu < _RATE_MERGE_TOL:
            raise NoDecayingSolution("rate-0 forcing admits no decaying solution")
        if abs(nu - r_decay) < _RATE_MERGE_TOL * max(1.0, r_decay):
            # resonant with the decaying kernel mode: solve for s = p' first
            d = a1 - 2 * a2 * r_decay  # characteristic derivative at the root
            s = np.zeros(q.size)
            for k in range(q.size - 1, -1, -1):
                upper = a2 * (k + 1) * s[k + 1] if k + 1 < q.size else 0.0
                s[k] = (q[k] - upper) / d
            parts.append((_poly_antiderivative(s), r_decay))
        else:
            chi = a2 * nu * nu - a1 * nu + a0  # characteristic at m = -nu
            if abs(chi) < _RATE_MERGE_TOL * max(1.0, abs(a0) + abs(a1) + abs(a2)):
                raise NoDecayingSolution(
                    f"forcing rate {nu} resonates with the non-decaying mode"
                )
            d = a1 - 2 * a2 * nu
            p = np.zeros(q.size)
            for k in range(q.size - 1, -1, -1):
                t1 = d * (k + 1) * p[k + 1] if k + 1 < q.size else 0.0
                t2 = a2 * (k + 2) * (k + 1) * p[k + 2] if k + 2 < q.size else 0.0
                p[k] = (q[k] - t1 - t2) / chi
            parts.append((p, nu))
    particular = PolyExp(parts)
    k2 = alpha - float(particular(0.0))
    w = particular + PolyExp.exponential(k2, r_decay)
    _self_check(
        lambda v: a2 * v.derivative(2) + a1 * v.derive() + a0 * v, w, rhs, alpha
    )
    return w


def solve_second_order_layer(b0, rhs, alpha):
    """Exact decaying solution of ``w'' + b0 w' = rhs`` with ``w(0) = alpha``.

    The kernel is ``{1, exp(-b0 z)}``; decay kills the constant mode.
    """
    b0 = float(b0)
    if b0 <= 0:
        raise NoDecayingSolution("b0 must be positive for a decaying kernel mode")
    return solve_constant_ode(1.0, b0, 0.0, rhs, alpha)


def _self_check(op, v, rhs, alpha):
    # loud failure beats silent drift: sample the ODE residual after solving.
    # The tolerance scales with the solution's own coefficients because
    # near-resonant forcing legitimately produces large exact coefficients.
    zs = np.linspace(0.0, 10.0, 9)
    res = op(v)(zs) - rhs(zs)
    scale = 1.0 + abs(alpha)
    for q, _ in rhs.terms:
        scale = max(scale, float(np.max(np.abs(q))))
    for q, _ in v.terms:
        scale = max(scale, float(np.max(np.abs(q))))
    if np.max(np.abs(res)) > _SELF_CHECK_TOL * scale:
        raise SelfCheckFailed(
            f"ODE residual {np.max(np.abs(res)):.3e} exceeds {_SELF_CHECK_TOL:.0e} * {scale:.3e}"
        )
    if abs(float(v(0.0)) - alpha) > 1e-12 * (1.0 + abs(alpha)) + 1e-14 * scale:
        raise SelfCheckFailed("boundary value mismatch after solve")
