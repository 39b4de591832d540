"""Direct ODE checks: Poincaré return map on y = 0 and limit-cycle counting.

The section is the half line {y = 0, x > x_s} to the right of the annulus
core, crossed downward by the clockwise flow.  The energy displacement
d(a) = H(B) - H(A) = G(x_B) - G(a) is, to first order, eps times the
Melnikov function at h = G(a).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .abelian import melnikov
from .constructor import ConstructedSystem
from .hamiltonian import PeriodAnnulus, annuli, energy_window, turning_points
from .poly import evaluate

RTOL = 1e-10
MAX_STEPS = 10_000_000
MAX_HALVINGS = 12
BISECT_WIDTH = 1e-6
RICHARDSON_EPS = (1e-2, 5e-3, 2.5e-3)


class VerificationError(RuntimeError):
    pass


@dataclass(frozen=True)
class DisplacementSample:
    a: float
    d: float
    return_x: float
    steps: int


@dataclass
class CycleCount:
    epsilon: float
    window: tuple[float, float]
    count: int
    brackets: list[tuple[float, float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon, "window": list(self.window), "count": self.count,
                "brackets": [{"a_lo": lo, "a_hi": hi} for lo, hi in self.brackets]}


def section_annulus(sys: ConstructedSystem, a: float) -> PeriodAnnulus:
    """The annulus whose right section branch passes through (a, 0)."""
    P = sys.potential
    h = float(evaluate(P.G, a))
    for A in annuli(P):
        if A.contains(h) and A.right_anchor < a < A.right_limit:
            return A
    raise VerificationError(f"start point ({a!r}, 0) is not on the section of any period annulus")


def _box(sys: ConstructedSystem, a: float) -> float:
    scale = max([1.0, abs(a), *(abs(x) for A in annuli(sys.potential) for x in A.interior)])
    return 1e3 * scale


def _coeffs(sys: ConstructedSystem):
    return (np.ascontiguousarray(sys.F.coeffs, dtype=float),
            np.ascontiguousarray(sys.g.coeffs, dtype=float))


def next_crossing(sys: ConstructedSystem, start: tuple[float, float], epsilon: float,
                  x_threshold: float | None = None, max_steps: int = MAX_STEPS) -> tuple[tuple[float, float], int]:
    """First return of ``start`` to its section branch; also returns the step count."""
    a, y0 = start
    if abs(y0) > 1e-10:
        raise VerificationError("start point must lie on y = 0")
    if x_threshold is None:
        x_threshold = section_annulus(sys, a).right_anchor
    Fc, gc = _coeffs(sys)
    # essentially relative control; atol only guards orbits through x = 0
    atol = 1e-2 * RTOL * max(1.0, abs(a))
    x, steps, status = kernels.return_map(Fc, gc, float(epsilon), float(a), float(x_threshold),
                                          _box(sys, a), RTOL, atol, int(max_steps))
    if status == kernels.UNBOUNDED:
        raise VerificationError(f"unbounded orbit from a={a!r}")
    if status in (kernels.NO_RETURN, kernels.UNDERFLOW):
        raise VerificationError(f"no return from a={a!r} after {steps} steps")
    return (float(x), 0.0), int(steps)


def displacement(sys: ConstructedSystem, a: float, epsilon: float, x_threshold: float | None = None) -> DisplacementSample:
    (xb, _), steps = next_crossing(sys, (a, 0.0), epsilon, x_threshold)
    G = sys.potential.G
    d = float(evaluate(G, xb)) - float(evaluate(G, a))
    if not math.isfinite(d):
        raise VerificationError(f"non-finite displacement at a={a!r}")
    return DisplacementSample(float(a), d, xb, steps)


def _noise(sys: ConstructedSystem, a: float) -> float:
    # integration error shows up in G(x_B) through G'(x_B) * dx
    G = sys.potential.G
    return 2e-9 * (1.0 + abs(float(evaluate(G, a))))


def _sign(sys, s: DisplacementSample) -> int:
    if abs(s.d) <= _noise(sys, s.a):
        return 0
    return 1 if s.d > 0 else -1


def count_limit_cycles(sys: ConstructedSystem, a_window: tuple[float, float], epsilon: float,
                       grid: int = 32) -> CycleCount:
    """Sign changes of d over a uniform a-grid, each bisected to width 1e-6."""
    lo, hi = map(float, a_window)
    if not lo < hi:
        raise ValueError("a window must satisfy a_lo < a_hi")
    if grid < 2:
        raise ValueError("grid must have at least 2 points")
    A = section_annulus(sys, lo)
    if section_annulus(sys, hi) != A:
        raise VerificationError("section window straddles two period annuli")
    xs = A.right_anchor
    disp = lambda a: displacement(sys, a, epsilon, xs)  # noqa: E731
    samples = [disp(a) for a in np.linspace(lo, hi, grid)]
    signed = [(s, _sign(sys, s)) for s in samples]
    signed = [(s, v) for s, v in signed if v != 0]
    brackets = []
    for (s0, v0), (s1, v1) in zip(signed[:-1], signed[1:]):
        if v0 * v1 >= 0:
            continue
        a0, a1 = s0.a, s1.a
        while a1 - a0 > BISECT_WIDTH:
            mid = 0.5 * (a0 + a1)
            vm = _sign(sys, disp(mid))
            if vm == 0:
                break
            if vm == v0:
                a0 = mid
            else:
                a1 = mid
        brackets.append((a0, a1))
    return CycleCount(float(epsilon), (lo, hi), len(brackets), brackets)


def shrink_until_stable(sys: ConstructedSystem, a_window: tuple[float, float], eps_start: float,
                        grid: int = 32, repeats: int = 3) -> tuple[float, int]:
    """Halve eps until the cycle count repeats ``repeats`` times in a row.

    Returns the largest eps of the stable run and its count.
    """
    if eps_start <= 0:
        raise ValueError("eps_start must be positive")
    if sys.F.is_zero():
        return float(eps_start), 0
    eps = float(eps_start)
    history: list[tuple[float, int]] = []
    for _ in range(MAX_HALVINGS + 1):
        history.append((eps, count_limit_cycles(sys, a_window, eps, grid).count))
        tail = history[-repeats:]
        if len(tail) == repeats and len({c for _, c in tail}) == 1:
            return tail[0]
        eps *= 0.5
    raise VerificationError("unresolved at desk scale")


def first_order_ratio(sys: ConstructedSystem, a: float, eps_values=RICHARDSON_EPS) -> dict:
    """Richardson extrapolation of d(a, eps)/eps to eps = 0, next to M(G(a))."""
    xs = section_annulus(sys, a).right_anchor
    q = [displacement(sys, a, e, xs).d / e for e in eps_values]
    # eps halves each time; d/eps = M + c1 eps + c2 eps^2 + ...
    r1 = [2.0 * q[i + 1] - q[i] for i in range(len(q) - 1)]
    r2 = (4.0 * r1[1] - r1[0]) / 3.0 if len(r1) > 1 else r1[0]
    A = section_annulus(sys, a)
    h = float(evaluate(sys.potential.G, a))
    M = melnikov(sys.F, sys.potential, A, h)
    return {"a": a, "h": h, "ratios": q, "extrapolated": r2, "melnikov": M,
            "rel_err": abs(r2 - M) / max(abs(M), 1e-300)}


def well_section_window(sys: ConstructedSystem, A: PeriodAnnulus, margin: float = 0.02) -> tuple[float, float]:
    """A range of section abscissae whose orbits lie inside A away from its edges."""
    P = sys.potential
    lo, hi = energy_window(A, margin)
    return turning_points(P, A, lo)[1], turning_points(P, A, hi)[1]
