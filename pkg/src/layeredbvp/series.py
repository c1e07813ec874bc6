"""Truncated power-series arithmetic and analytic coefficient providers.

A :class:`PowerSeries` stores the first ``order + 1`` Taylor coefficients of
an analytic function about a fixed center, so every derivative up to the
truncation order is available exactly.  The coefficient catalogue at the
bottom supplies problem data (constant, affine, polynomial, exponential,
trigonometric, rational) with exact derivative rules, so no numerical
differentiation is ever needed.
"""

import math

import numpy as np

from .errors import (
    CenterMismatch,
    DivisionByZeroConstantTerm,
    InsufficientOrder,
    InvalidCoefficient,
    OrderExhausted,
)

DEFAULT_ORDER = 40

_DIV_PIVOT_TOL = 1e-14


class PowerSeries:
    """Taylor expansion ``sum a_k (x - center)^k`` truncated at ``order``.

    Coefficients are ``a_k = g^(k)(center) / k!``.  Instances are immutable
    values; arithmetic returns new series truncated to the shorter operand.
    """

    __slots__ = ("_center", "_coeffs")

    def __init__(self, center, coeffs):
        c = np.asarray(coeffs, dtype=float)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coeffs must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(c)):
            raise ValueError("coeffs must be finite")
        self._center = float(center)
        self._coeffs = c.copy()
        self._coeffs.flags.writeable = False

    @property
    def center(self):
        return self._center

    @property
    def coeffs(self):
        return self._coeffs

    @property
    def order(self):
        return self._coeffs.size - 1

    @classmethod
    def zero(cls, center, order):
        return cls(center, np.zeros(order + 1))

    @classmethod
    def constant(cls, value, center=0.0, order=DEFAULT_ORDER):
        c = np.zeros(order + 1)
        c[0] = value
        return cls(center, c)

    def _check_center(self, other):
        if self._center != other._center:
            raise CenterMismatch(
                f"centers differ: {self._center} vs {other._center}"
            )

    def __add__(self, other):
        self._check_center(other)
        n = min(self.order, other.order) + 1
        return PowerSeries(self._center, self._coeffs[:n] + other._coeffs[:n])

    def __sub__(self, other):
        self._check_center(other)
        n = min(self.order, other.order) + 1
        return PowerSeries(self._center, self._coeffs[:n] - other._coeffs[:n])

    def __neg__(self):
        return PowerSeries(self._center, -self._coeffs)

    def __mul__(self, other):
        if np.isscalar(other):
            return PowerSeries(self._center, self._coeffs * float(other))
        self._check_center(other)
        n = min(self.order, other.order) + 1
        prod = np.convolve(self._coeffs[:n], other._coeffs[:n])[:n]
        return PowerSeries(self._center, prod)

    __rmul__ = __mul__

    def __truediv__(self, other):
        self._check_center(other)
        n = min(self.order, other.order) + 1
        b = other._coeffs[:n]
        if abs(b[0]) < _DIV_PIVOT_TOL:
            raise DivisionByZeroConstantTerm(
                f"divisor constant term {b[0]!r} below {_DIV_PIVOT_TOL}"
            )
        a = self._coeffs[:n]
        q = np.zeros(n)
        for k in range(n):
            acc = a[k] - np.dot(b[1 : k + 1], q[k - 1 :: -1][: k])
            q[k] = acc / b[0]
        return PowerSeries(self._center, q)

    def derive(self):
        """Term-by-term derivative; the truncation order drops by one."""
        if self.order == 0:
            raise OrderExhausted("cannot differentiate an order-0 series")
        k = np.arange(1, self.order + 1)
        return PowerSeries(self._center, self._coeffs[1:] * k)

    def __call__(self, x):
        """Horner evaluation of the truncated polynomial at ``x``."""
        t = np.asarray(x, dtype=float) - self._center
        return np.polynomial.polynomial.polyval(t, self._coeffs)

    def eval_deriv(self, x, n=0):
        """Evaluate the n-th derivative of the truncated polynomial."""
        if n == 0:
            return self(x)
        if n > self.order:
            return np.zeros_like(np.asarray(x, dtype=float)) + 0.0
        k = np.arange(n, self.order + 1, dtype=float)
        falling = np.ones(k.size)
        for j in range(n):
            falling *= k - j
        t = np.asarray(x, dtype=float) - self._center
        return np.polynomial.polynomial.polyval(t, self._coeffs[n:] * falling)

    def shift(self, x0, order=None):
        """Re-expand about ``x0`` using the exact binomial shift.

        Raises ``InsufficientOrder`` when more coefficients are requested
        than this series carries.
        """
        if order is None:
            order = self.order
        if order > self.order:
            raise InsufficientOrder(
                f"series of order {self.order} cannot supply order {order}"
            )
        h = float(x0) - self._center
        n = self.order
        out = np.zeros(order + 1)
        # b_m = sum_k a_k C(k, m) h^(k-m); evaluated by synthetic Horner so
        # each output coefficient is a plain polynomial evaluation in h.
        work = self._coeffs.copy()
        for m in range(order + 1):
            acc = 0.0
            for k in range(n, m - 1, -1):
                acc = acc * h + work[k] * math.comb(k, m)
            out[m] = acc
        return PowerSeries(x0, out)

    def __repr__(self):
        head = ", ".join(f"{c:.6g}" for c in self._coeffs[:4])
        tail = ", ..." if self.order >= 4 else ""
        return f"PowerSeries(center={self._center}, coeffs=[{head}{tail}])"


def series_combine(a, b, op):
    """Combine two same-center series with ``add``, ``sub``, ``mul`` or ``div``."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown op {op!r}")


def series_derive(a):
    return a.derive()


def series_eval(a, x):
    return a(x)


def taylor_at(g, x0, order):
    """Taylor coefficients of ``g`` about ``x0`` up to ``order``.

    ``g`` may be a coefficient provider from the catalogue (exact rules) or
    an existing :class:`PowerSeries` (exact binomial recentring).
    """
    if isinstance(g, PowerSeries):
        return g.shift(x0, order)
    return g.series(x0, order)


# ---------------------------------------------------------------------------
# Coefficient catalogue
# ---------------------------------------------------------------------------


class CoefficientFunction:
    """Analytic function on [0, 1] with exact Taylor data at any point."""

    kind = None

    def series(self, x0, order):
        raise NotImplementedError

    def __call__(self, x):
        raise NotImplementedError

    def derivative(self):
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError

    def __repr__(self):
        params = ", ".join(f"{k}={v!r}" for k, v in self.to_dict().items() if k != "kind")
        return f"{type(self).__name__}({params})"


class Constant(CoefficientFunction):
    kind = "constant"

    def __init__(self, value):
        self.value = float(value)

    def series(self, x0, order):
        c = np.zeros(order + 1)
        c[0] = self.value
        return PowerSeries(x0, c)

    def __call__(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.value)

    def derivative(self):
        return Constant(0.0)

    def to_dict(self):
        return {"kind": self.kind, "value": self.value}


class Polynomial(CoefficientFunction):
    """Polynomial with ascending coefficients about 0."""

    kind = "polynomial"

    def __init__(self, coeffs):
        c = np.asarray(coeffs, dtype=float)
        if c.ndim != 1 or c.size == 0:
            raise InvalidCoefficient("polynomial needs at least one coefficient")
        self.coeffs = c

    def series(self, x0, order):
        base = PowerSeries(0.0, self.coeffs)
        shifted = base.shift(x0, min(order, base.order))
        out = np.zeros(order + 1)
        out[: shifted.order + 1] = shifted.coeffs
        return PowerSeries(x0, out)

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), self.coeffs)

    def derivative(self):
        if self.coeffs.size == 1:
            return Constant(0.0)
        k = np.arange(1, self.coeffs.size)
        return Polynomial(self.coeffs[1:] * k)

    def to_dict(self):
        return {"kind": self.kind, "coeffs": [float(c) for c in self.coeffs]}


class Affine(Polynomial):
    kind = "affine"

    def __init__(self, intercept, slope):
        super().__init__([intercept, slope])
        self.intercept = float(intercept)
        self.slope = float(slope)

    def to_dict(self):
        return {"kind": self.kind, "intercept": self.intercept, "slope": self.slope}


class Exponential(CoefficientFunction):
    """amplitude * exp(rate * x)"""

    kind = "exp"

    def __init__(self, amplitude=1.0, rate=1.0):
        self.amplitude = float(amplitude)
        self.rate = float(rate)

    def series(self, x0, order):
        c = np.zeros(order + 1)
        c[0] = self.amplitude * math.exp(self.rate * x0)
        for k in range(1, order + 1):
            c[k] = c[k - 1] * self.rate / k
        return PowerSeries(x0, c)

    def __call__(self, x):
        return self.amplitude * np.exp(self.rate * np.asarray(x, dtype=float))

    def derivative(self):
        return Exponential(self.amplitude * self.rate, self.rate)

    def to_dict(self):
        return {"kind": self.kind, "amplitude": self.amplitude, "rate": self.rate}


class Sin(CoefficientFunction):
    """amplitude * sin(frequency * x + phase)"""

    kind = "sin"

    def __init__(self, amplitude=1.0, frequency=1.0, phase=0.0):
        self.amplitude = float(amplitude)
        self.frequency = float(frequency)
        self.phase = float(phase)

    def series(self, x0, order):
        # k-th coefficient is A w^k sin(w x0 + phase + k pi/2) / k!
        k = np.arange(order + 1)
        wk = np.ones(order + 1)
        for j in range(1, order + 1):
            wk[j] = wk[j - 1] * self.frequency / j
        angles = self.frequency * x0 + self.phase + k * (np.pi / 2)
        return PowerSeries(x0, self.amplitude * wk * np.sin(angles))

    def __call__(self, x):
        return self.amplitude * np.sin(self.frequency * np.asarray(x, dtype=float) + self.phase)

    def derivative(self):
        return Sin(self.amplitude * self.frequency, self.frequency, self.phase + np.pi / 2)

    def to_dict(self):
        return {
            "kind": self.kind,
            "amplitude": self.amplitude,
            "frequency": self.frequency,
            "phase": self.phase,
        }


class Cos(Sin):
    kind = "cos"

    def __init__(self, amplitude=1.0, frequency=1.0, phase=0.0):
        super().__init__(amplitude, frequency, phase + np.pi / 2)
        self._phase_in = float(phase)

    def to_dict(self):
        return {
            "kind": self.kind,
            "amplitude": self.amplitude,
            "frequency": self.frequency,
            "phase": self._phase_in,
        }


class Rational(CoefficientFunction):
    """p(x) / q(x) with q nonvanishing on [0, 1]."""

    kind = "rational"

    def __init__(self, num, den):
        self.num = np.asarray(num, dtype=float)
        self.den = np.asarray(den, dtype=float)
        if self.num.ndim != 1 or self.den.ndim != 1 or self.num.size == 0 or self.den.size == 0:
            raise InvalidCoefficient("rational needs 1-D num and den coefficients")
        probe = np.polynomial.polynomial.polyval(np.linspace(0.0, 1.0, 513), self.den)
        if np.min(np.abs(probe)) < 1e-9 or np.min(probe) * np.max(probe) <= 0:
            raise InvalidCoefficient("denominator must be bounded away from 0 on [0, 1]")

    def series(self, x0, order):
        p = Polynomial(self.num).series(x0, order)
        q = Polynomial(self.den).series(x0, order)
        return p / q

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        pv = np.polynomial.polynomial.polyval(x, self.num)
        qv = np.polynomial.polynomial.polyval(x, self.den)
        return pv / qv

    def derivative(self):
        p, q = Polynomial(self.num), Polynomial(self.den)
        dp, dq = p.derivative(), q.derivative()
        dp_c = dp.coeffs if isinstance(dp, Polynomial) else np.array([0.0])
        dq_c = dq.coeffs if isinstance(dq, Polynomial) else np.array([0.0])
        num = np.polynomial.polynomial.polysub(
            np.polynomial.polynomial.polymul(dp_c, self.den),
            np.polynomial.polynomial.polymul(self.num, dq_c),
        )
        den = np.polynomial.polynomial.polymul(self.den, self.den)
        return Rational(num, den)

    def to_dict(self):
        return {
            "kind": self.kind,
            "num": [float(c) for c in self.num],
            "den": [float(c) for c in self.den],
        }


_KINDS = {
    "constant": lambda d: Constant(d["value"]),
    "affine": lambda d: Affine(d["intercept"], d["slope"]),
    "polynomial": lambda d: Polynomial(d["coeffs"]),
    "exp": lambda d: Exponential(d.get("amplitude", 1.0), d.get("rate", 1.0)),
    "sin": lambda d: Sin(d.get("amplitude", 1.0), d.get("frequency", 1.0), d.get("phase", 0.0)),
    "cos": lambda d: Cos(d.get("amplitude", 1.0), d.get("frequency", 1.0), d.get("phase", 0.0)),
    "rational": lambda d: Rational(d["num"], d["den"]),
}


def coefficient_from_dict(d):
    """Build a catalogue function from a {kind, parameters} mapping."""
    try:
        kind = d["kind"]
    except (TypeError, KeyError):
        raise InvalidCoefficient("coefficient spec needs a 'kind' key") from None
    try:
        factory = _KINDS[kind]
    except KeyError:
        raise InvalidCoefficient(f"unknown coefficient kind {kind!r}") from None
    try:
        return factory(d)
    except KeyError as exc:
        raise InvalidCoefficient(f"missing parameter {exc} for kind {kind!r}") from None
