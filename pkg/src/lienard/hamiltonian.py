"""Level-set geometry of H(x, y) = y**2/2 + G(x).

Period annuli are read off the merge tree of the sublevel sets of G: each
local minimum starts an inner well, wells fuse at local maxima into bands,
and the component above the highest critical energy is the outer annulus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy.optimize import brentq

from .poly import Polynomial, antiderivative, cauchy_bound, differentiate, evaluate, real_roots

INNER, BAND, OUTER = "inner-well", "band", "outer"

# h closer than this (relative to the window's energy scale) to a critical
# energy counts as outside the annulus
WINDOW_TOL = 1e-9
_RTOL = 4 * 2.220446049250313e-16


class EnergyOutOfAnnulus(ValueError):
    pass


class DegenerateCriticalPoint(ValueError):
    pass


@dataclass(frozen=True)
class Potential:
    G: Polynomial
    coercive: bool
    leading_coeff: float | None = None
    half_degree: int | None = None

    def __call__(self, x):
        return evaluate(self.G, x)

    @property
    def g(self) -> Polynomial:
        return differentiate(self.G)


@dataclass(frozen=True)
class CriticalPoint:
    x: float
    energy: float
    kind: str  # "min" | "max" | "inflection"


@dataclass(frozen=True)
class PeriodAnnulus:
    """A family of closed level curves of H, indexed by energy in (h_min, h_max).

    The left turning point lives in ``[left_limit, left_anchor]`` and the right
    one in ``[right_anchor, right_limit]``; G is monotone on both brackets.
    ``interior`` lists the critical abscissae enclosed by every orbit.
    """

    center_x: float
    h_min: float
    h_max: float
    kind: str
    left_limit: float = -math.inf
    left_anchor: float = 0.0
    right_anchor: float = 0.0
    right_limit: float = math.inf
    interior: tuple[float, ...] = field(default=())

    @property
    def scale(self) -> float:
        hs = [abs(self.h_min)] + ([abs(self.h_max)] if math.isfinite(self.h_max) else [])
        return max(1.0, *hs)

    def contains(self, h: float) -> bool:
        tol = WINDOW_TOL * self.scale
        return self.h_min + tol < h < self.h_max - tol

    def to_dict(self) -> dict:
        return {"center_x": self.center_x, "h_min": self.h_min,
                "h_max": self.h_max if math.isfinite(self.h_max) else "inf", "kind": self.kind}


def potential_of(g: Polynomial) -> Potential:
    G = antiderivative(g)
    d = G.degree()
    if d is not None and d >= 2 and d % 2 == 0 and G.leading() > 0:
        return Potential(G, True, G.leading(), d // 2)
    return Potential(G, False)


def critical_profile(P: Potential) -> list[CriticalPoint]:
    """Real critical points of G, classified by how G' changes sign across them."""
    g = P.g
    if g.is_zero() or g.degree() == 0:
        return []
    bound = cauchy_bound(g)
    roots = real_roots(g, -bound, bound)
    out = []
    for i, r in enumerate(roots):
        if not r.odd:
            kind = "inflection"
        else:
            nxt = roots[i + 1].x if i + 1 < len(roots) else r.x + 1.0
            kind = "min" if evaluate(g, 0.5 * (r.x + nxt)) > 0 else "max"
        out.append(CriticalPoint(r.x, float(evaluate(P.G, r.x)), kind))
    return out


def annuli(P: Potential) -> list[PeriodAnnulus]:
    """All period annuli: inner wells (by center), then bands, then the outer one."""
    if not P.coercive:
        raise ValueError("annuli require a coercive potential (even degree, positive leading coefficient)")
    crit = critical_profile(P)
    if any(c.kind == "inflection" for c in crit):
        raise DegenerateCriticalPoint("potential has a degenerate critical point; not supported")
    xs = [c.x for c in crit]
    es = [c.energy for c in crit]
    found: list[PeriodAnnulus] = []

    def build(lo: int, hi: int, h_top: float, left_limit: float, right_limit: float):
        # crit[lo] and crit[hi] are minima; every max strictly inside is enclosed
        maxima = [i for i in range(lo + 1, hi) if crit[i].kind == "max"]
        if not maxima:
            kind = OUTER if math.isinf(h_top) else INNER
            found.append(PeriodAnnulus(xs[lo], es[lo], h_top, kind, left_limit,
                                       xs[lo], xs[lo], right_limit, (xs[lo],)))
            return
        e_top = max(es[i] for i in maxima)
        tol = 1e-12 * max(1.0, abs(e_top))
        split = [i for i in maxima if es[i] >= e_top - tol]
        kind = OUTER if math.isinf(h_top) else BAND
        center = xs[split[len(split) // 2]]
        found.append(PeriodAnnulus(center, e_top, h_top, kind, left_limit, xs[lo], xs[hi],
                                   right_limit, tuple(xs[lo:hi + 1])))
        bounds = [lo - 1, *split, hi + 1]
        for a, b in zip(bounds[:-1], bounds[1:]):
            build(a + 1, b - 1, e_top, xs[a] if a >= lo else left_limit,
                  xs[b] if b <= hi else right_limit)

    build(0, len(crit) - 1, math.inf, -math.inf, math.inf)
    order = {INNER: 0, BAND: 1, OUTER: 2}
    found.sort(key=lambda A: (order[A.kind], A.center_x))
    return found


def outer_annulus(P: Potential) -> PeriodAnnulus:
    return next(A for A in annuli(P) if A.kind == OUTER)


def _expand(P: Potential, start: float, h: float, direction: float) -> float:
    step = 1.0
    x = start + direction * step
    while evaluate(P.G, x) <= h:
        step *= 2.0
        x = start + direction * step
        if step > 1e200:
            raise EnergyOutOfAnnulus("level set is unbounded")
    return x


def turning_points(P: Potential, A: PeriodAnnulus, h: float) -> tuple[float, float]:
    """The two roots a < b of G(x) = h bounding the orbit of energy h in A."""
    if not A.contains(h):
        raise EnergyOutOfAnnulus(f"energy out of annulus: h={h!r} not in ({A.h_min!r}, {A.h_max!r})")
    f = lambda x: evaluate(P.G, x) - h  # noqa: E731
    lo = A.left_limit if math.isfinite(A.left_limit) else _expand(P, A.left_anchor, h, -1.0)
    hi = A.right_limit if math.isfinite(A.right_limit) else _expand(P, A.right_anchor, h, 1.0)
    xtol = 1e-15
    a = brentq(f, lo, A.left_anchor, xtol=xtol * max(1.0, abs(lo)), rtol=_RTOL, maxiter=200)
    b = brentq(f, A.right_anchor, hi, xtol=xtol * max(1.0, abs(hi)), rtol=_RTOL, maxiter=200)
    return float(a), float(b)


def section_window(P: Potential, A: PeriodAnnulus) -> tuple[float, float]:
    """Abscissae on y = 0 to the right of the annulus that are swept by its orbits."""
    return A.right_anchor, A.right_limit


def energy_window(A: PeriodAnnulus, margin: float = 1e-3, cap: float | None = None) -> tuple[float, float]:
    """A closed h-interval strictly inside A, trimmed by ``margin`` of its width."""
    top = A.h_max if math.isfinite(A.h_max) else cap
    if top is None:
        raise ValueError("outer annulus needs an explicit energy cap")
    w = top - A.h_min
    return A.h_min + margin * w, top - (margin * w if math.isfinite(A.h_max) else 0.0)
