"""Dense univariate real polynomials.

Coefficients are stored in ascending order (``coeffs[i]`` multiplies
``x**i``) as a read-only float64 array with trailing zeros stripped.
"""

from __future__ import annotations

import json
import math
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.optimize import brentq


class IndeterminateRoots(ValueError):
    """Raised when asking for the roots of the zero polynomial."""


class RealRoot(NamedTuple):
    x: float
    odd: bool  # True when the polynomial changes sign at x


def _normalize(coeffs) -> np.ndarray:
    c = np.array(coeffs, dtype=float).ravel()
    if not np.all(np.isfinite(c)):
        raise ValueError("polynomial coefficients must be finite")
    nz = np.flatnonzero(c)
    c = c[: nz[-1] + 1] if nz.size else c[:0]
    c = c.copy()
    c.setflags(write=False)
    return c


class Polynomial:
    """Immutable dense polynomial with float coefficients."""

    __slots__ = ("_c",)

    def __init__(self, coeffs: Iterable[float] = ()):
        self._c = _normalize(list(coeffs) if not isinstance(coeffs, np.ndarray) else coeffs)

    @classmethod
    def monomial(cls, k: int, c: float = 1.0) -> "Polynomial":
        out = np.zeros(k + 1)
        out[k] = c
        return cls(out)

    @classmethod
    def constant(cls, c: float) -> "Polynomial":
        return cls([c])

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    def degree(self) -> int | None:
        """Index of the last nonzero coefficient, ``None`` for the zero polynomial."""
        return self._c.size - 1 if self._c.size else None

    def is_zero(self) -> bool:
        return self._c.size == 0

    def leading(self) -> float:
        return float(self._c[-1]) if self._c.size else 0.0

    def __call__(self, x):
        return evaluate(self, x)

    def __len__(self):
        return self._c.size

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._c.shape == other._c.shape and bool(np.all(self._c == other._c))

    def __hash__(self):
        return hash(self._c.tobytes())

    def __repr__(self):
        return f"Polynomial({self._c.tolist()!r})"

    def __neg__(self):
        return Polynomial(-self._c)

    def __add__(self, other):
        other = _coerce(other)
        n = max(self._c.size, other._c.size)
        out = np.zeros(n)
        out[: self._c.size] += self._c
        out[: other._c.size] += other._c
        return Polynomial(out)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            if self.is_zero() or other.is_zero():
                return Polynomial()
            return Polynomial(np.convolve(self._c, other._c))
        return Polynomial(self._c * float(other))

    __rmul__ = __mul__

    def is_even(self) -> bool:
        return not np.any(self._c[1::2])

    def is_odd(self) -> bool:
        return not np.any(self._c[0::2])

    def abs_eval(self, x):
        """Evaluate sum |c_i| |x|^i, the natural rounding scale of ``p(x)``."""
        return evaluate(Polynomial(np.abs(self._c)), np.abs(x))

    def to_list(self) -> list[float]:
        return [float(v) for v in self._c]

    def to_json(self) -> str:
        return json.dumps(self.to_list())

    @classmethod
    def from_json(cls, text: str) -> "Polynomial":
        data = json.loads(text)
        if not isinstance(data, list):
            raise ValueError("polynomial JSON must be an array of coefficients")
        return cls(data)


def _coerce(p) -> Polynomial:
    return p if isinstance(p, Polynomial) else Polynomial([float(p)])


def evaluate(p: Polynomial, x):
    """Horner evaluation; accepts scalars or numpy arrays."""
    c = p.coeffs
    if c.size == 0:
        return np.zeros_like(x, dtype=float) if isinstance(x, np.ndarray) else 0.0
    acc = c[-1] * np.ones_like(x, dtype=float) if isinstance(x, np.ndarray) else float(c[-1])
    for ci in c[-2::-1]:
        acc = acc * x + ci
    return acc


def differentiate(p: Polynomial) -> Polynomial:
    c = p.coeffs
    if c.size <= 1:
        return Polynomial()
    return Polynomial(c[1:] * np.arange(1, c.size))


def antiderivative(p: Polynomial) -> Polynomial:
    """Antiderivative with zero constant term."""
    c = p.coeffs
    if c.size == 0:
        return Polynomial()
    return Polynomial(np.concatenate(([0.0], c / np.arange(1, c.size + 1))))


def compose_square_shift(p: Polynomial, x0: float) -> Polynomial:
    """Return ``p(x**2 + x0)``."""
    inner = Polynomial([x0, 0.0, 1.0])
    out = Polynomial()
    for ci in p.coeffs[::-1]:
        out = out * inner + ci
    return out


def cauchy_bound(p: Polynomial) -> float:
    """Every real root of p lies in [-B, B]."""
    c = p.coeffs
    if c.size <= 1:
        return 1.0
    return 1.0 + float(np.max(np.abs(c[:-1] / c[-1])))


def real_roots(p: Polynomial, lo: float, hi: float) -> list[RealRoot]:
    """Distinct real roots of ``p`` in ``[lo, hi]``, ascending.

    Monotone pieces are delimited by the roots of ``p'`` (found recursively);
    a sign change on a piece is refined with Brent's method, and a critical
    point where ``p`` vanishes is reported as a multiple root whose parity is
    read off the signs of the neighbouring pieces.
    """
    if not lo < hi:
        raise ValueError("real_roots requires lo < hi")
    if p.is_zero():
        raise IndeterminateRoots("indeterminate roots")
    return _roots(p, float(lo), float(hi))


def _is_zero_at(p: Polynomial, x: float) -> bool:
    # x may itself be a computed root of p'; allow for its position error
    scale = p.abs_eval(x) + 1e-8 * max(1.0, abs(x)) * differentiate(p).abs_eval(x)
    return abs(evaluate(p, x)) <= 1e-11 * max(scale, 1e-300)


def _sign_near(p: Polynomial, x: float, toward: float) -> float:
    v = evaluate(p, 0.5 * (x + toward))
    return math.copysign(1.0, v) if v != 0 else 0.0


def _roots(p: Polynomial, lo: float, hi: float) -> list[RealRoot]:
    d = p.degree()
    if d is None or d == 0:
        return []
    c = p.coeffs
    if d == 1:
        r = -c[0] / c[1]
        return [RealRoot(float(r), True)] if lo <= r <= hi else []

    crit = [r.x for r in _roots(differentiate(p), lo, hi) if lo < r.x < hi]
    pts = [lo, *crit, hi]
    width = hi - lo
    out: list[RealRoot] = []
    zero = [_is_zero_at(p, x) for x in pts]

    for i, x in enumerate(pts):
        if not zero[i]:
            continue
        left = pts[i - 1] if i > 0 else x - 0.5 * (pts[1] - x)
        right = pts[i + 1] if i + 1 < len(pts) else x + 0.5 * (x - pts[-2])
        if right == x:
            right = x + 1e-6 * width
        if left == x:
            left = x - 1e-6 * width
        sl, sr = _sign_near(p, x, left), _sign_near(p, x, right)
        out.append(RealRoot(float(x), sl * sr < 0))

    for i in range(len(pts) - 1):
        u, v = pts[i], pts[i + 1]
        if zero[i] or zero[i + 1]:
            continue
        fu, fv = evaluate(p, u), evaluate(p, v)
        if fu * fv < 0:
            r = brentq(lambda t: evaluate(p, t), u, v, xtol=1e-15 * max(1.0, abs(u), abs(v)),
                       rtol=4 * np.finfo(float).eps, maxiter=200)
            out.append(RealRoot(float(r), True))

    out.sort(key=lambda r: r.x)
    merged: list[RealRoot] = []
    for r in out:
        if merged and abs(r.x - merged[-1].x) <= 1e-12 * (1.0 + abs(r.x)):
            continue
        merged.append(r)
    return merged


def as_polynomial(obj: Sequence[float] | Polynomial | str) -> Polynomial:
    """Build a polynomial from a coefficient list or a ``"c0,c1,..."`` string."""
    if isinstance(obj, Polynomial):
        return obj
    if isinstance(obj, str):
        parts = [s for s in obj.replace(" ", "").split(",") if s]
        return Polynomial([float(s) for s in parts])
    return Polynomial(obj)
