"""Building Liénard systems with many limit cycles from smaller ones.

A seed system x' = y - eps F(x), y' = -g(x) whose Melnikov function has k
sign-change zeros is doubled by x -> x**2 + x0 (two mirrored copies of its
cycles, one per side), and then perturbed by an odd polynomial
sum_j b_j x**(2j+1) whose Melnikov function has q zeros at large energies.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Sequence

import numpy as np

from .abelian import MelnikovProfile, abelian_integral, profile
from .hamiltonian import (BAND, INNER, OUTER, PeriodAnnulus, Potential, annuli, critical_profile,
                          energy_window, potential_of, turning_points)
from .poly import Polynomial, compose_square_shift, differentiate

log = logging.getLogger(__name__)

DEFAULT_POINTS = 64
TARGET_RATIO = 4.0


class ConstructionError(RuntimeError):
    """A numerical check of the construction did not come out as required."""

    def __init__(self, message: str, profiles: Sequence[MelnikovProfile] = ()):
        super().__init__(message)
        self.profiles = list(profiles)


@dataclass(frozen=True)
class ZeroWindow:
    annulus: int
    kind: str
    center_x: float
    h_lo: float
    h_hi: float
    zeros: tuple[float, ...]

    def to_dict(self) -> dict:
        return {"annulus": self.annulus, "kind": self.kind, "center_x": self.center_x,
                "h_lo": self.h_lo, "h_hi": self.h_hi, "zeros": list(self.zeros)}

    @classmethod
    def from_dict(cls, d: dict) -> "ZeroWindow":
        return cls(int(d["annulus"]), d["kind"], float(d["center_x"]), float(d["h_lo"]),
                   float(d["h_hi"]), tuple(float(z) for z in d["zeros"]))


@dataclass(frozen=True)
class ZCertificate:
    """At least k odd-multiplicity limit cycles for deg F <= n+1, deg g <= m."""

    n: int
    m: int
    k: int
    h_windows: tuple[ZeroWindow, ...] = ()
    epsilon0: float | None = None
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.n < 1 or self.m < 1 or self.k < 0:
            raise ValueError(f"invalid certificate Z({self.n},{self.m},{self.k})")
        if self.h_windows and self.recorded_zeros != self.k:
            raise ValueError(f"certificate claims k={self.k} but records {self.recorded_zeros} zeros")

    @property
    def realized(self) -> bool:
        return bool(self.h_windows) or (self.k == 0 and self.epsilon0 is not None)

    @property
    def recorded_zeros(self) -> int:
        return sum(len(w.zeros) for w in self.h_windows)

    @property
    def triple(self) -> tuple[int, int, int]:
        return self.n, self.m, self.k

    def to_dict(self) -> dict:
        return {"n": self.n, "m": self.m, "k": self.k, "epsilon0": self.epsilon0,
                "h_windows": [w.to_dict() for w in self.h_windows]}

    @classmethod
    def from_dict(cls, d: dict, provenance: dict | None = None) -> "ZCertificate":
        return cls(int(d["n"]), int(d["m"]), int(d["k"]),
                   tuple(ZeroWindow.from_dict(w) for w in d.get("h_windows", [])),
                   d.get("epsilon0"), provenance or {})


@dataclass(frozen=True)
class ConstructedSystem:
    """x' = y - eps F(x), y' = -g(x) together with the data it was built from."""

    F: Polynomial
    g: Polynomial
    lam: float = 1.0
    mu: float = 0.0
    b: tuple[float, ...] = ()
    x0: float | None = None
    certificate: ZCertificate | None = None
    F2: Polynomial | None = None
    seed: "ConstructedSystem | None" = field(default=None, repr=False, compare=False)

    @property
    def potential(self) -> Potential:
        return potential_of(self.g)

    def to_dict(self) -> dict:
        return {
            "F": self.F.to_list(),
            "g": self.g.to_list(),
            "lambda": self.lam,
            "mu": self.mu,
            "b": list(self.b),
            "x0": self.x0,
            "F2": self.F2.to_list() if self.F2 is not None else None,
            "certificate": self.certificate.to_dict() if self.certificate else None,
            "provenance": self.certificate.provenance if self.certificate else {},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ConstructedSystem":
        cert = d.get("certificate")
        return cls(
            F=Polynomial(d["F"]),
            g=Polynomial(d["g"]),
            lam=float(d.get("lambda", 1.0)),
            mu=float(d.get("mu", 0.0)),
            b=tuple(float(v) for v in d.get("b", [])),
            x0=d.get("x0"),
            certificate=ZCertificate.from_dict(cert, d.get("provenance")) if cert else None,
            F2=Polynomial(d["F2"]) if d.get("F2") is not None else None,
        )


def odd_perturbation(b: Sequence[float]) -> Polynomial:
    """sum_j b_j x**(2j+1)."""
    c = np.zeros(2 * len(b))
    c[1::2] = b
    return Polynomial(c)


def default_h_star(P: Potential) -> float:
    """Ten times the largest critical energy scale (at least 10)."""
    es = [abs(c.energy) for c in critical_profile(P)]
    return 10.0 * max([1.0, *es])


# -- realising certificates ----------------------------------------------------

def realize(system: ConstructedSystem, n: int, m: int, outer_cap: float | None = None,
            n_points: int = DEFAULT_POINTS, epsilon0: float = 1.0, provenance: dict | None = None,
            margin: float = 1e-3) -> ConstructedSystem:
    """Attach a certificate whose k is the number of Melnikov sign changes found.

    Every annulus of the system's potential is profiled; the outer one up to
    ``outer_cap`` (default 100 times the critical energy scale).
    """
    P = system.potential
    if outer_cap is None:
        outer_cap = 10.0 * default_h_star(P)
    windows = []
    for idx, A in enumerate(annuli(P)):
        lo, hi = energy_window(A, margin, cap=outer_cap)
        pr = profile(system.F, P, A, lo, hi, n_points)
        windows.append(ZeroWindow(idx, A.kind, A.center_x, lo, hi, tuple(pr.zero_energies)))
    k = sum(len(w.zeros) for w in windows)
    cert = ZCertificate(n, m, k, tuple(windows), epsilon0, provenance or {"node": "seed"})
    return replace(system, certificate=cert)


def van_der_pol_seed(epsilon0: float = 0.1) -> ConstructedSystem:
    """x' = y - eps (x**3/3 - x), y' = -x with its amplitude-2 cycle: Z(2, 1, 1)."""
    sys = ConstructedSystem(F=Polynomial([0.0, -1.0, 0.0, 1.0 / 3.0]), g=Polynomial([0.0, 1.0]))
    return realize(sys, 2, 1, outer_cap=20.0, epsilon0=epsilon0,
                   provenance={"node": "seed", "name": "van der Pol"})


def zero_orbit_extent(system: ConstructedSystem) -> float:
    """Largest |x| reached by an orbit at one of the certified zero energies."""
    cert = system.certificate
    if cert is None:
        raise ValueError("system carries no certificate")
    P = system.potential
    ann = annuli(P)
    extent = 0.0
    for w in cert.h_windows:
        A = ann[w.annulus]
        for h in w.zeros:
            a, b = turning_points(P, A, h)
            extent = max(extent, abs(a), abs(b))
    return extent


# -- the construction steps ------------------------------------------------------

def doubling_transform(seed: ConstructedSystem, x0: float | str = "auto") -> ConstructedSystem:
    """Replace x by x**2 + x0, producing two mirrored copies of the seed's cycles."""
    cert = seed.certificate
    if cert is None or not cert.realized:
        raise ValueError("seed certificate must be numerically realized")
    crit = [abs(c.x) for c in critical_profile(seed.potential)]
    x_star = 1.1 * max([zero_orbit_extent(seed), *crit])
    if x0 == "auto":
        x0 = -x_star - 1.0
    x0 = float(x0)
    if x0 >= -x_star:
        raise ValueError(f"shift too small: x0={x0!r} must be below -x*={-x_star!r}")
    F2 = compose_square_shift(seed.F, x0)
    g2 = Polynomial([0.0, 2.0]) * compose_square_shift(seed.g, x0)
    prov = {"node": "doubled", "x0": x0, "x_star": x_star, "parent": cert.provenance}
    new_cert = ZCertificate(2 * cert.n + 1, 2 * cert.m + 1, 2 * cert.k, (), cert.epsilon0, prov)
    return ConstructedSystem(F=F2, g=g2, x0=x0, certificate=new_cert, F2=F2, seed=seed)


def _side_windows(F2: Polynomial, P: Potential, n_points: int, margin: float = 1e-3):
    """Profile F2 over every bounded annulus; returns (windows, profiles)."""
    windows, profiles = [], []
    for idx, A in enumerate(annuli(P)):
        if A.kind == OUTER:
            continue
        lo, hi = energy_window(A, margin)
        pr = profile(F2, P, A, lo, hi, n_points)
        profiles.append(pr)
        windows.append(ZeroWindow(idx, A.kind, A.center_x, lo, hi, tuple(pr.zero_energies)))
    return windows, profiles


def realize_doubled(doubled: ConstructedSystem, n_points: int = DEFAULT_POINTS) -> ConstructedSystem:
    """Check that each side of the doubled potential carries the seed's k zeros."""
    P = doubled.potential
    windows, profiles = _side_windows(doubled.F, P, n_points)
    k = doubled.seed.certificate.k
    left = sum(len(w.zeros) for w in windows if w.center_x < 0)
    right = sum(len(w.zeros) for w in windows if w.center_x > 0)
    if left != k or right != k:
        raise ConstructionError(f"doubled system shows {left}+{right} well zeros, expected {k}+{k}", profiles)
    return replace(doubled, certificate=replace(doubled.certificate, h_windows=tuple(windows)))


def select_perturbation_coefficients(P2: Potential, q: int, h_star: float | None = None,
                                     target_zeros: Sequence[float] | str = "auto", b0: float = 1.0,
                                     n_points: int = DEFAULT_POINTS, verify: bool = True
                                     ) -> tuple[float, ...]:
    """Coefficients b_0..b_q making sum_j b_j I_j(h) vanish at the targets.

    b_0 is fixed and the remaining q coefficients solve a q x q linear system
    built from quadratures on the outer annulus.  With ``verify`` the result is
    profiled over the outer annulus and must show exactly one sign change near
    each target.
    """
    if q < 1:
        raise ValueError("q must be at least 1")
    A = next(A for A in annuli(P2) if A.kind == OUTER)
    if h_star is None:
        h_star = default_h_star(P2)
    if target_zeros == "auto":
        targets = [h_star * TARGET_RATIO ** i for i in range(1, q + 1)]
    else:
        targets = [float(t) for t in target_zeros]
    if len(targets) != q:
        raise ValueError(f"need exactly q={q} targets")
    if any(t1 <= t0 for t0, t1 in zip(targets[:-1], targets[1:])):
        raise ValueError("targets must be strictly ascending")
    if h_star <= A.h_min or targets[0] <= h_star:
        raise ValueError("targets must exceed h_star, which must exceed every critical energy")

    I = np.array([[abelian_integral(P2, A, j, h) for j in range(q + 1)] for h in targets])
    rows = I[:, 1:]
    # equilibrate so the singularity test is scale free
    col = np.max(np.abs(rows), axis=0)
    row = np.max(np.abs(I), axis=1)
    scaled = rows / col / row[:, None]
    if np.linalg.cond(scaled) > 1e12:
        raise ValueError("degenerate targets: placement system is singular")
    sol = np.linalg.solve(scaled, -b0 * I[:, 0] / row) / col
    b = (float(b0), *map(float, sol))
    if any(bj * bk >= 0 for bj, bk in zip(b[:-1], b[1:])):
        log.warning("perturbation coefficients do not alternate in sign: %s", b)

    if verify:
        pr = profile(odd_perturbation(b), P2, A, h_star, 2.0 * targets[-1], n_points)
        found = pr.zero_energies
        ok = len(found) == q and all(abs(z - t) <= 1e-3 * t for z, t in zip(found, targets))
        if not ok:
            raise ConstructionError(f"placement failed: zeros {found} vs targets {targets}", [pr])
    return b


def compose_step(seed: ConstructedSystem, parity: str = "odd", lam: float | None = None,
                 mu_ratio: float = 1e-2, x0: float | str = "auto", h_star: float | None = None,
                 n_points: int = DEFAULT_POINTS) -> ConstructedSystem:
    """One doubling-plus-perturbation step: Z(n,m,k) -> Z(2n+1,2m+1,2k+n) (odd)
    or Z(2n+2,2m+1,2k+n+1) (even)."""
    if parity not in ("odd", "even"):
        raise ValueError("parity must be 'odd' or 'even'")
    cert = seed.certificate
    if cert is None or not cert.realized:
        raise ValueError("seed certificate must be numerically realized")
    n, m, k = cert.triple
    q = n if parity == "odd" else n + 1

    doubled = realize_doubled(doubling_transform(seed, x0), n_points)
    P2 = doubled.potential
    if h_star is None:
        h_star = default_h_star(P2)
    targets = [h_star * TARGET_RATIO ** i for i in range(1, q + 1)]
    b = select_perturbation_coefficients(P2, q, h_star, targets, 1.0, n_points)

    eps0 = cert.epsilon0 if cert.epsilon0 else 1.0
    if lam is None:
        lam = 0.1 * eps0
    mu = lam * mu_ratio
    pert = odd_perturbation(b)
    F = doubled.F * lam + pert * mu
    g = doubled.g

    outer_idx = next(i for i, A in enumerate(annuli(P2)) if A.kind == OUTER)
    outer_win = ZeroWindow(outer_idx, OUTER, annuli(P2)[outer_idx].center_x, h_star,
                           2.0 * targets[-1], tuple(_outer_zeros(pert, P2, h_star, targets, n_points)))
    windows = (*doubled.certificate.h_windows, outer_win)
    n_new = 2 * n + 1 if parity == "odd" else 2 * n + 2
    prov = {"node": "composed", "parity": parity, "q": q, "lambda": lam, "mu": mu,
            "h_star": h_star, "targets": targets, "x0": doubled.x0, "parent": cert.provenance}
    new_cert = ZCertificate(n_new, 2 * m + 1, 2 * k + q, windows, 1.0, prov)

    out = ConstructedSystem(F=F, g=g, lam=lam, mu=mu, b=b, x0=doubled.x0, certificate=new_cert,
                            F2=doubled.F, seed=seed)
    _check_degrees(out, seed, parity)
    return out


def _outer_zeros(pert, P2, h_star, targets, n_points):
    A = next(A for A in annuli(P2) if A.kind == OUTER)
    return profile(pert, P2, A, h_star, 2.0 * targets[-1], n_points).zero_energies


def _check_degrees(sys: ConstructedSystem, seed: ConstructedSystem, parity: str):
    n, m, _ = seed.certificate.triple
    dF, dg = sys.F.degree(), sys.g.degree()
    assert dg == 2 * seed.g.degree() + 1 <= 2 * m + 1, "g degree bookkeeping"
    if parity == "odd":
        assert dF is not None and dF <= 2 * n + 2, "F degree bookkeeping"
    else:
        assert dF == 2 * n + 3, "F degree bookkeeping"
    assert sys.g.is_odd(), "g must be odd"


def weaken_certificate(c: ZCertificate, n_new: int, m_new: int) -> ZCertificate:
    """Relabel degrees upward; the cycle count is unchanged."""
    if n_new < c.n or m_new < c.m:
        raise ValueError(f"cannot strengthen Z({c.n},{c.m},{c.k}) to Z({n_new},{m_new},{c.k})")
    prov = dict(c.provenance)
    if (n_new, m_new) != (c.n, c.m):
        prov = {"node": "weakened", "from": [c.n, c.m], "parent": c.provenance}
    return replace(c, n=n_new, m=m_new, provenance=prov)


# -- recursion bookkeeping -------------------------------------------------------------

MAX_DEPTH = 30


@dataclass
class RecursionPlan:
    """Level-indexed certificate triples; level 0 is the seed.

    ``levels[i][l-1]`` holds (n_il, m_il, k_il).  Mixed-index products
    Z(n_pi, m_pj, k_pi) are available through :meth:`cross`.
    """

    seed: tuple[int, int, int]
    n: list[np.ndarray]
    m: list[np.ndarray]
    k: list[np.ndarray]

    @property
    def depth(self) -> int:
        return len(self.n) - 1

    def level(self, i: int) -> list[tuple[int, int, int]]:
        return list(zip(self.n[i].tolist(), self.m[i].tolist(), self.k[i].tolist()))

    def leaves(self) -> list[tuple[int, int, int]]:
        return self.level(self.depth)

    def cross(self, i: int, j: int, level: int | None = None) -> tuple[int, int, int]:
        p = self.depth if level is None else level
        return int(self.n[p][i - 1]), int(self.m[p][j - 1]), int(self.k[p][i - 1])


def plan_recursion(seed: tuple[int, int, int], depth: int) -> RecursionPlan:
    n0, m0, k0 = seed
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if depth > MAX_DEPTH:
        raise OverflowError(f"depth {depth} exceeds the guard of {MAX_DEPTH}")
    n = [np.array([n0], dtype=np.int64)]
    m = [np.array([m0], dtype=np.int64)]
    k = [np.array([k0], dtype=np.int64)]
    for _ in range(depth):
        pn, pm, pk = n[-1], m[-1], k[-1]
        n.append(np.stack([2 * pn + 1, 2 * pn + 2], axis=1).ravel())
        m.append(np.stack([2 * pm + 1, 2 * pm + 2], axis=1).ravel())
        k.append(np.stack([2 * pk + pn, 2 * pk + pn + 1], axis=1).ravel())
    return RecursionPlan(seed, n, m, k)


def realize_plan(seed: ConstructedSystem, depth: int, parity_path: Sequence[str],
                 **step_kwargs: Any) -> ConstructedSystem:
    """Apply compose_step along ``parity_path`` (desk scale: depth 1 or 2)."""
    if depth not in (1, 2):
        raise ValueError("numerical realization is limited to depth 1 or 2")
    if len(parity_path) != depth:
        raise ValueError("parity path length must equal depth")
    sys = seed
    for parity in parity_path:
        sys = compose_step(sys, parity, **step_kwargs)
    return sys


def well_annuli(P: Potential) -> list[PeriodAnnulus]:
    return [A for A in annuli(P) if A.kind in (INNER, BAND)]
