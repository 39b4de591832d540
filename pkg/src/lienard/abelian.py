"""Abelian integrals and first-order Melnikov functions over period annuli.

Orientation is the flow direction of x' = y, y' = -G'(x) (clockwise), so for
an orbit with turning points a < b

    M(h) = oint F(x) dy = -2 * int_a^b F'(x) sqrt(2 (h - G(x))) dx.

The integrand vanishes like a square root at both turning points.  Each
panel between consecutive enclosed critical points is mapped through
x = c + r sin(theta), which makes the integrand analytic, and is then
integrated with Gauss-Legendre rules of doubling order.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.optimize import brentq

from .hamiltonian import OUTER, PeriodAnnulus, Potential, critical_profile, turning_points
from .poly import Polynomial, differentiate, evaluate

MAX_NODES = 4096
_START_NODES = 32
_QUAD_RTOL = 1e-13
_EPS = float(np.finfo(float).eps)


class QuadratureError(RuntimeError):
    pass


@lru_cache(maxsize=None)
def _gauss_legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _panel(dF: Polynomial, G: Polynomial, h: float, p: float, q: float, n: int):
    """Panel sum, its absolute scale, and the rounding noise inherited from h - G."""
    t, w = _gauss_legendre(n)
    theta = 0.5 * math.pi * t
    c, r = 0.5 * (p + q), 0.5 * (q - p)
    x = c + r * np.sin(theta)
    jac = 0.5 * math.pi * r * np.cos(theta)
    gap = np.maximum(h - evaluate(G, x), 0.0)
    root = np.sqrt(2.0 * gap)
    base = evaluate(dF, x) * jac * w
    f = base * root
    # perturbing the gap by delta moves sqrt(2 gap) by delta / sqrt(2 gap)
    delta = 4.0 * _EPS * (abs(h) + G.abs_eval(x))
    noise = np.abs(base) * np.minimum(delta / np.maximum(root, 1e-300), np.sqrt(2.0 * delta))
    noise += 4.0 * _EPS * dF.abs_eval(x) * root * np.abs(jac * w)
    return float(f.sum()), float(np.abs(f).sum()), float(noise.sum())


def _panels(dF: Polynomial, G: Polynomial, h: float, breaks: list[float]) -> list[float]:
    n_panels = len(breaks) - 1
    start = max(8, min(_START_NODES, MAX_NODES // (4 * n_panels)))
    out, used = [], 0
    for p, q in zip(breaks[:-1], breaks[1:]):
        n = start
        prev, _, _ = _panel(dF, G, h, p, q, n)
        while True:
            n *= 2
            if used + n + start * (n_panels - len(out) - 1) > MAX_NODES:
                raise QuadratureError(f"quadrature did not converge at h={h!r} within {MAX_NODES} nodes")
            cur, scale, noise = _panel(dF, G, h, p, q, n)
            if abs(cur - prev) <= _QUAD_RTOL * scale + 4.0 * noise + 1e-300:
                break
            prev = cur
        used += n
        out.append(cur)
    return out


def _breaks(A: PeriodAnnulus, a: float, b: float, extra=(), G: Polynomial | None = None,
            h: float | None = None) -> list[float]:
    inner = sorted({x for x in (*A.interior, *extra) if a < x < b})
    pts = [a, *inner, b]
    if G is None:
        return pts
    # near a saddle the orbit passes at height sqrt(h - G(xc)); grade the
    # panels geometrically toward xc down to that width
    G2 = differentiate(differentiate(G))
    graded = set(pts)
    for i in range(1, len(pts) - 1):
        xc = pts[i]
        if xc not in A.interior:
            continue
        curv = abs(float(evaluate(G2, xc)))
        gap = h - float(evaluate(G, xc))
        if curv == 0.0 or gap <= 0.0:
            continue
        width = math.sqrt(gap / curv)
        for nb in (pts[i - 1], pts[i + 1]):
            d = 0.5 * (nb - xc)
            while abs(d) > 2.0 * width and len(graded) < 256:
                graded.add(xc + d)
                d *= 0.5
    return sorted(graded)


def melnikov(F: Polynomial, P: Potential, A: PeriodAnnulus, h: float) -> float:
    """oint F dy along the clockwise orbit of energy h in A."""
    a, b = turning_points(P, A, h)
    dF = differentiate(F)
    if dF.is_zero():
        return 0.0
    return -2.0 * sum(_panels(dF, P.G, h, _breaks(A, a, b, (), P.G, h)))


def melnikov_split(F: Polynomial, P: Potential, A: PeriodAnnulus, h: float, x_split: float) -> tuple[float, float]:
    """Contributions of the orbit arcs left and right of ``x = x_split``."""
    a, b = turning_points(P, A, h)
    if not a < x_split < b:
        raise ValueError("split point must lie strictly between the turning points")
    dF = differentiate(F)
    brk = _breaks(A, a, b, (x_split,), P.G, h)
    vals = _panels(dF, P.G, h, brk)
    left = sum(v for v, q in zip(vals, brk[1:]) if q <= x_split)
    right = sum(v for v, p in zip(vals, brk[:-1]) if p >= x_split)
    return -2.0 * left, -2.0 * right


def abelian_integral(P: Potential, A: PeriodAnnulus, j: int, h: float) -> float:
    """I_j(h) = oint x**(2j+1) dy."""
    if j < 0:
        raise ValueError("j must be non-negative")
    return melnikov(Polynomial.monomial(2 * j + 1), P, A, h)


# -- independent cross-check: the 1/y form regularised by u = h0 + (h-h0) sin^2 --

def _inverse(G: Polynomial, u: float, lo: float, hi: float) -> float:
    f = lambda x: evaluate(G, x) - u  # noqa: E731
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    return brentq(f, lo, hi, xtol=1e-15 * max(1.0, abs(lo), abs(hi)), rtol=8.9e-16, maxiter=200)


def singular_form_pieces(F: Polynomial, P: Potential, A: PeriodAnnulus, h: float) -> dict[str, float]:
    """The orbit integral -2 int F G' / sqrt(2(h-G)) dx, split into three arcs.

    The two end arcs run from a turning point to the nearest enclosed minimum,
    where G is monotone; on them the substitution G(x) = u0 + (h - u0) sin^2(t)
    removes the inverse square root.  The middle arc stays below h and is
    integrated directly.  Uses adaptive QUADPACK, not the Gauss-Legendre path.
    """
    a, b = turning_points(P, A, h)
    G, g = P.G, differentiate(P.G)
    opts = dict(epsabs=1e-13, epsrel=1e-12, limit=200)

    xl = A.left_anchor
    ul = float(evaluate(G, xl))
    sl = math.sqrt(2.0 * (h - ul))
    left = integrate.quad(
        lambda t: evaluate(F, _inverse(G, ul + (h - ul) * math.sin(t) ** 2, a, xl)) * math.sin(t),
        0.0, 0.5 * math.pi, **opts)[0]

    xr = A.right_anchor
    ur = float(evaluate(G, xr))
    sr = math.sqrt(2.0 * (h - ur))
    right = integrate.quad(
        lambda t: evaluate(F, _inverse(G, ur + (h - ur) * math.sin(t) ** 2, xr, b)) * math.sin(t),
        0.0, 0.5 * math.pi, **opts)[0]

    middle = 0.0
    if xr > xl:
        middle = integrate.quad(
            lambda x: evaluate(F, x) * evaluate(g, x) / math.sqrt(2.0 * (h - evaluate(G, x))),
            xl, xr, points=[x for x in A.interior if xl < x < xr] or None, **opts)[0]
    return {"left": 2.0 * sl * left, "middle": -2.0 * middle, "right": -2.0 * sr * right}


def melnikov_singular(F: Polynomial, P: Potential, A: PeriodAnnulus, h: float) -> float:
    return sum(singular_form_pieces(F, P, A, h).values())


# -- profiles --------------------------------------------------------------

@dataclass
class MelnikovProfile:
    annulus: PeriodAnnulus
    h_grid: np.ndarray
    values: np.ndarray
    zeros: list[tuple[float, str]] = field(default_factory=list)

    @property
    def zero_energies(self) -> list[float]:
        return [z for z, _ in self.zeros]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["h", "M"])
        for h, m in zip(self.h_grid, self.values):
            w.writerow([f"{h:.17g}", f"{m:.17g}"])
        return buf.getvalue()

    def zeros_json(self) -> str:
        return json.dumps({"annulus": self.annulus.to_dict(),
                           "zeros": [{"h": z, "parity": p} for z, p in self.zeros]}, indent=2)


def _grid(h_lo: float, h_hi: float, n: int) -> np.ndarray:
    if h_lo > 0 and h_hi / h_lo > 100:
        return np.geomspace(h_lo, h_hi, n)
    return np.linspace(h_lo, h_hi, n)


def _sign(v: float) -> int:
    return (v > 0) - (v < 0)


def profile(F: Polynomial, P: Potential, A: PeriodAnnulus, h_lo: float, h_hi: float,
            n_points: int = 64, refine_passes: int = 3) -> MelnikovProfile:
    """Sample M on [h_lo, h_hi] and locate its sign-change zeros."""
    if n_points < 8:
        raise ValueError("n_points must be at least 8")
    if not h_lo < h_hi:
        raise ValueError("h_lo must be below h_hi")
    if not (A.contains(h_lo) and A.contains(h_hi)):
        raise ValueError(f"profile window [{h_lo!r}, {h_hi!r}] is not inside the annulus "
                         f"({A.h_min!r}, {A.h_max!r})")
    M = lambda h: melnikov(F, P, A, h)  # noqa: E731
    hs = list(_grid(h_lo, h_hi, n_points))
    vs = [M(h) for h in hs]

    # a dip of |M| without a sign change may hide a close pair of zeros
    for _ in range(refine_passes):
        peak = max(abs(v) for v in vs)
        if peak == 0.0:
            break
        new = set()
        for i, v in enumerate(vs):
            if abs(v) >= 1e-3 * peak:
                continue
            for k in (i - 1, i + 1):
                if 0 <= k < len(vs) and _sign(vs[k]) * _sign(v) > 0:
                    new.add(0.5 * (hs[min(i, k)] + hs[max(i, k)]))
        if not new:
            break
        extra = sorted(new)
        merged = sorted(zip(hs + extra, vs + [M(h) for h in extra]))
        hs, vs = [m[0] for m in merged], [m[1] for m in merged]

    zeros = []
    nz = [(h, v) for h, v in zip(hs, vs) if v != 0.0]
    for (h0, v0), (h1, v1) in zip(nz[:-1], nz[1:]):
        if _sign(v0) * _sign(v1) < 0:
            tol = 1e-8 * max(abs(h0), abs(h1))
            z = brentq(M, h0, h1, xtol=tol, rtol=8.9e-16, maxiter=100)
            zeros.append((float(z), "odd"))
    return MelnikovProfile(A, np.array(hs), np.array(vs), zeros)


# -- asymptotics -------------------------------------------------------------

def fit_growth_exponent(P: Potential, A: PeriodAnnulus, j: int, h_decades: tuple[float, float],
                        n_samples: int = 24) -> float:
    """Least-squares slope of log|I_j| against log h."""
    if not P.coercive or A.kind != OUTER:
        raise ValueError("growth exponent needs a coercive potential and its outer annulus")
    h_lo, h_hi = h_decades
    top = max([c.energy for c in critical_profile(P)] + [0.0])
    if h_lo <= max(top, 0.0) or h_hi < 1e3 * h_lo:
        raise ValueError("energy range must span three decades above every critical energy")
    hs = np.geomspace(h_lo, h_hi, max(n_samples, 20))
    vals = np.array([abelian_integral(P, A, j, h) for h in hs])
    slope, _ = np.polyfit(np.log(hs), np.log(np.abs(vals)), 1)
    return float(slope)


def check_ratio_growth(P: Potential, A: PeriodAnnulus, j: int, h1: float, h2: float) -> bool:
    """True when |I_{j+1}/I_j| is strictly larger at h2 than at h1."""
    def ratio(h):
        base = abelian_integral(P, A, j, h)
        if abs(base) < 1e-12:
            raise ZeroDivisionError(f"I_{j}({h!r}) is numerically zero")
        return abs(abelian_integral(P, A, j + 1, h) / base)
    return ratio(h2) > ratio(h1)
