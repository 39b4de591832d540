"""Closed-form lower bounds on H(n, m) and the index arithmetic behind them.

H(n, m) is the largest number of limit cycles of x' = y - eps F(x),
y' = -g(x) with deg F' = n and deg g = m at small eps.  Every bound here is
either an integer formula (evaluated exactly) or a real expression in
log2 of integers; :func:`best_bound` compares ceilings.

Degree slack is used throughout: H(n, m) >= H(n', m') whenever n' <= n and
m' <= m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable

import numpy as np

from .constructor import MAX_DEPTH, ZCertificate

SOURCES = ("Registry§1", "Lemma2.1", "Thm3.1", "Thm3.2-S1", "Thm3.2-S2", "Thm4.1",
           "Thm4.2", "Thm4.3", "Thm5.1", "Thm5.2")
# the generic recursion search duplicates its named corollaries, so it only wins outright
_RANK = {s: i for i, s in enumerate(SOURCES)}
_RANK["Thm4.1"] = len(SOURCES)

_CEIL_TOL = 1e-9


class NotApplicable(ValueError):
    """The requested bound does not cover this (n, m)."""


@dataclass(frozen=True)
class BoundRecord:
    n: int
    m: int
    bound: float
    source: str
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.source not in SOURCES:
            raise ValueError(f"unknown source {self.source!r}")
        if not math.isfinite(self.bound):
            raise ValueError("bound must be finite")

    @property
    def value(self) -> int:
        return ceil_bound(self.bound)

    def to_dict(self) -> dict:
        return {"n": self.n, "m": self.m, "bound": self.value, "raw": self.bound,
                "source": self.source, "params": self.params}


def ceil_bound(x: float | Fraction | int) -> int:
    """Ceiling that ignores float noise just above an integer."""
    if isinstance(x, (int, Fraction)):
        return math.ceil(x)
    return math.ceil(x - _CEIL_TOL * max(1.0, abs(x)))


def _log2(k: int) -> float:
    return math.log2(k)


# -- seed registry -------------------------------------------------------------

@dataclass(frozen=True)
class _Family:
    name: str
    m: int
    n_lo: int
    n_hi: int | None
    k: Callable[[int], int]
    citation: str


# the four families a seed may be drawn from
SEED_FAMILIES = (
    _Family("m=1", 1, 1, None, lambda n: n // 2, "Blows-Lloyd"),
    _Family("m=2", 2, 2, None, lambda n: (2 * n + 1) // 3, "Han 1999"),
    _Family("m=3", 3, 2, 8, lambda n: (3 * n + 14) // 4, "Yang-Han-Romanovski"),
    _Family("m=4", 4, 3, 18, lambda n: n + 4 - (n + 1) // 5, "Yu-Han"),
)


def _hty(n: int, m: int) -> int:
    return max((m - 2) // 3 + (2 * n + 1) // 3, (n - 2) // 3 + (2 * m + 1) // 3)


@dataclass(frozen=True)
class _Entry:
    name: str
    citation: str
    m_min: int
    ns: tuple[int, int] | frozenset | None  # inclusive range, explicit set, or all n >= 1
    k: Callable[[int, int], int]

    def admits(self, n: int) -> bool:
        if self.ns is None:
            return n >= 1
        if isinstance(self.ns, frozenset):
            return n in self.ns
        return self.ns[0] <= n <= self.ns[1]


# earlier results that are not already restated by the seed families
REGISTRY = (
    _Entry("[(n+m-1)/2]", "Llibre-Mereu-Teixeira", 1, None, lambda n, m: (n + m - 1) // 2),
    _Entry("Han-Tian-Yu", "Han-Tian-Yu", 2, (2, 10**9), _hty),
    _Entry("2[(3n+6)/8]", "Christopher-Lynch", 3, (2, 50), lambda n, m: 2 * ((3 * n + 6) // 8)),
    _Entry("n+2-[(n+1)/4]", "Han-Zang-Yang; Yang-Han", 3, (9, 22), lambda n, m: n + 2 - (n + 1) // 4),
    _Entry("n+3", "Han-Yan-Yang-Lhotka", 4, frozenset({2, 3, 5, 6, 7, 8}), lambda n, m: n + 3),
    _Entry("H(4,4)>=6", "Han-Yan-Yang-Lhotka", 4, frozenset({4}), lambda n, m: 6),
    _Entry("H(9,4)>=9", "Christopher-Lynch", 4, frozenset({9}), lambda n, m: 9),
    _Entry("n", "Yu-Han", 4, frozenset({10, 11, 12, 13, 14}), lambda n, m: n),
)


def _entry_k(e: _Entry, n: int, m: int) -> int | None:
    # slack in m only matters for the two entries whose value depends on m
    if m < e.m_min:
        return None
    best = None
    for n2 in range(1, n + 1):
        if not e.admits(n2):
            continue
        if e.name in ("[(n+m-1)/2]", "Han-Tian-Yu"):
            v = e.k(n2, m)
        else:
            v = e.k(n2, e.m_min)
        best = v if best is None else max(best, v)
    return best


@lru_cache(maxsize=None)
def registry_k(n0: int, m0: int) -> int:
    """Largest k with Z(n0, m0, k) from the seed families (degree slack allowed)."""
    best = 0
    for f in SEED_FAMILIES:
        if m0 < f.m or n0 < f.n_lo:
            continue
        n_use = n0 if f.n_hi is None else min(n0, f.n_hi)
        best = max(best, f.k(n_use))
    return best


def lemma21_certificates(n: int, m: int) -> list[ZCertificate]:
    """Every registry certificate Z(n', m', k) with n' <= n, m' <= m."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    out = []
    for f in SEED_FAMILIES:
        if f.m > m:
            continue
        hi = n if f.n_hi is None else min(n, f.n_hi)
        for n2 in range(f.n_lo, hi + 1):
            out.append(ZCertificate(n2, f.m, f.k(n2), (), None,
                                    {"source": "Lemma2.1", "family": f.name, "citation": f.citation}))
    for e in REGISTRY:
        if e.m_min > m:
            continue
        for n2 in range(1, n + 1):
            if e.admits(n2):
                m2 = m if e.name in ("[(n+m-1)/2]", "Han-Tian-Yu") else e.m_min
                out.append(ZCertificate(n2, m2, e.k(n2, m2), (), None,
                                        {"source": "Registry§1", "entry": e.name, "citation": e.citation}))
    return out


def registry_bound(n: int, m: int) -> BoundRecord:
    best, which = None, None
    for e in REGISTRY:
        k = _entry_k(e, n, m)
        if k is not None and (best is None or k > best):
            best, which = k, e
    if best is None:
        raise NotApplicable(f"no registry entry covers ({n},{m})")
    return BoundRecord(n, m, float(best), "Registry§1", {"entry": which.name, "citation": which.citation})


def lemma21_bound(n: int, m: int) -> BoundRecord:
    k = registry_k(n, m)
    fam = max((f for f in SEED_FAMILIES if m >= f.m and n >= f.n_lo),
              key=lambda f: f.k(n if f.n_hi is None else min(n, f.n_hi)), default=None)
    params = {"family": fam.name, "citation": fam.citation} if fam else {}
    return BoundRecord(n, m, float(k), "Lemma2.1", params)


# -- fixed m -------------------------------------------------------------------

def thm31_bound(n: int, m: int) -> BoundRecord:
    if m not in (3, 4, 5, 6):
        raise NotApplicable("m must be 3, 4, 5 or 6")
    if n < 3:
        raise NotApplicable("n must be at least 3")
    d = 4 if m <= 4 else 3
    k = 2 * ((n - 1) // d) + (n - 1) // 2
    return BoundRecord(n, m, float(k), "Thm3.1", {"divisor": d})


def l_p(p: int) -> Fraction:
    return Fraction(p + 1, 2)


def r_p(p: int) -> Fraction:
    return Fraction(p, 2) + Fraction(2, 3)


def delta_p(p: int) -> Fraction:
    if p < 1:
        raise ValueError("p must be at least 1")
    return Fraction(3 * 2 ** (p - 1) + sum((j + 1) * 2 ** (p - j) for j in range(2, p + 1)))


def beta_p(p: int) -> Fraction:
    if p < 1:
        raise ValueError("p must be at least 1")
    return 3 * 2 ** (p - 1) + sum((j + Fraction(4, 3)) * 2 ** (p - j) for j in range(2, p + 1))


def delta_recursive(p: int) -> Fraction:
    d, l = Fraction(3), Fraction(1)
    for _ in range(p - 1):
        d, l = 2 * d + 2 * l + 1, l + Fraction(1, 2)
    return d


def beta_recursive(p: int) -> Fraction:
    b, r = Fraction(3), Fraction(7, 6)
    for _ in range(p - 1):
        b, r = 2 * b + 2 * r + 1, r + Fraction(1, 2)
    return b


def _thm32_branches(m_cap: int) -> Iterable[tuple[str, int, int, int]]:
    """(branch, p, start, end) for every p >= 2 branch starting at or below m_cap."""
    p = 2
    while 2 ** (p + 1) - 1 <= m_cap:
        yield "S1", p, 2 ** (p + 1) - 1, 3 * 2 ** p - 2
        if 3 * 2 ** p - 1 <= m_cap:
            yield "S2", p, 3 * 2 ** p - 1, 2 ** (p + 2) - 2
        p += 1


def thm32_bound(n: int, m: int) -> BoundRecord:
    """Best of the linear-in-n bounds whose branch starts at or below m."""
    if m < 7:
        raise NotApplicable("m must be at least 7")
    if n < m:
        raise NotApplicable("n must be at least m")
    best = None
    for branch, p, start, end in _thm32_branches(m):
        if branch == "S1":
            val = l_p(p) * n - delta_p(p)
            params = {"p": p, "l_p": str(l_p(p)), "delta_p": str(delta_p(p))}
        else:
            val = r_p(p) * n - beta_p(p)
            params = {"p": p, "r_p": str(r_p(p)), "beta_p": str(beta_p(p))}
        params.update(j=m - start + 1 if m <= end else None, m_branch=[start, end])
        if best is None or val > best[0]:
            best = (val, branch, params)
    val, branch, params = best
    # uniform slope valid for every m >= 7, shown for comparison
    params["uniform_slope"] = math.log(m + 2) / (2 * math.log(2)) - 1.0 / 3.0
    return BoundRecord(n, m, float(val), f"Thm3.2-{branch}", params)


# -- recursion indices -----------------------------------------------------------

def _check_index(p: int, i: int):
    if p < 0:
        raise ValueError("p must be non-negative")
    if not 1 <= i <= 2 ** p:
        raise ValueError(f"index i={i} out of range 1..{2 ** p}")


def seq_recursive(seed: tuple[int, int, int], p: int, i: int) -> tuple[int, int, int]:
    """(n_pi, m_pi, k_pi) by walking the doubling tree from the root."""
    _check_index(p, i)
    n, m, k = seed
    path = i - 1
    for level in range(p - 1, -1, -1):
        if (path >> level) & 1:
            n, m, k = 2 * n + 2, 2 * m + 2, 2 * k + n + 1
        else:
            n, m, k = 2 * n + 1, 2 * m + 1, 2 * k + n
    return n, m, k


def seq_closed_form(seed: tuple[int, int, int], p: int, i: int) -> tuple[int, int, int]:
    """Closed forms at the two extreme leaves i = 1 and i = 2**p."""
    _check_index(p, i)
    n0, m0, k0 = seed
    q = 2 ** p
    half = (p * q) // 2  # p * 2**(p-1), zero when p = 0
    if i == 1:
        return q * (n0 + 1) - 1, q * (m0 + 1) - 1, q * (k0 - 1) + half * (n0 + 1) + 1
    if i == q:
        return q * (n0 + 2) - 2, q * (m0 + 2) - 2, q * (k0 - 1) + half * (n0 + 2) + 1
    raise ValueError("closed form only covers i = 1 and i = 2**p")


def all_leaves(seed: tuple[int, int, int], p: int) -> np.ndarray:
    """k_{p,1..2^p} for the whole level, vectorised."""
    if p > MAX_DEPTH:
        raise OverflowError(f"depth {p} exceeds the guard of {MAX_DEPTH}")
    n = np.array([seed[0]], dtype=np.int64)
    k = np.array([seed[2]], dtype=np.int64)
    for _ in range(p):
        n, k = (np.stack([2 * n + 1, 2 * n + 2], axis=1).ravel(),
                np.stack([2 * k + n, 2 * k + n + 1], axis=1).ravel())
    return k


def s_membership(m: int, m0: int) -> tuple[int, int] | None:
    """The (i, j) with m = 2**i (m0 + 1) - 2 + j, 1 <= j <= 2**i, if any."""
    if m < 1 or m0 < 1:
        raise ValueError("m and m0 must be positive")
    i = 0
    while 2 ** i * (m0 + 1) - 1 <= m:
        if m <= 2 ** i * (m0 + 2) - 2:
            return i, m - 2 ** i * (m0 + 1) + 2
        i += 1
    return None


def partition_check(M: int, m_max: int) -> bool:
    """Do the sets S_{m0}, M <= m0 <= 2M, cover every m in [M, m_max]?"""
    if M < 1:
        raise ValueError("M must be positive")
    if m_max < M:
        return True
    hit = np.zeros(m_max + 1, dtype=bool)
    for m0 in range(M, 2 * M + 1):
        i = 0
        while 2 ** i * (m0 + 1) - 1 <= m_max:
            lo, hi = 2 ** i * (m0 + 1) - 1, min(2 ** i * (m0 + 2) - 2, m_max)
            hit[lo:hi + 1] = True
            i += 1
    return bool(hit[M:].all())


# -- growth in m ----------------------------------------------------------------

def N(m0: int, k0: int) -> float:
    return (k0 - 1) / (m0 + 1) - _log2(m0 + 1) / 2


def _lead(x: int) -> float:
    # x log2(x) / 2, exact when x is a power of two
    return x * _log2(x) / 2


def _diag_pow2(m: int) -> float:
    return _lead(m + 1) + 1


def _is_pow2(x: int) -> bool:
    return x > 0 and x & (x - 1) == 0


def thm42_bound(m: int) -> BoundRecord:
    """Best of the diagonal bounds from seeds Z(m0, m0, k0) for this exact m."""
    cands = []
    if m >= 3 and _is_pow2(m + 1):
        cands.append((_diag_pow2(m), {"form": "power-of-two", "seed": [3, 3, 5]}))
    p = 1
    while 2 ** p * 2 - 2 <= m:
        q = 2 ** p
        if (m + 1) % q == 0 and (m + 1) // q >= 2:
            m0 = (m + 1) // q - 1
            k0 = registry_k(m0, m0)
            exact = q * (k0 - 1) + (p * q // 2) * (m0 + 1) + 1
            val = _lead(m + 1) + N(m0, k0) * (m + 1) + 1
            cands.append((val, {"form": "m=2^p(m0+1)-1", "p": p, "m0": m0, "k0": k0,
                                "N": N(m0, k0), "leaf_k": exact}))
        if (m + 2) % q == 0 and (m + 2) // q >= 3:
            m0 = (m + 2) // q - 2
            k0 = registry_k(m0, m0)
            exact = q * (k0 - 1) + (p * q // 2) * (m0 + 2) + 1
            val = _lead(m + 2) + N(m0 + 1, k0) * (m + 2) + 1
            cands.append((val, {"form": "m=2^p(m0+2)-2", "p": p, "m0": m0, "k0": k0,
                                "N": N(m0 + 1, k0), "leaf_k": exact}))
        p += 1
    if not cands:
        raise NotApplicable(f"m={m} has no decomposition over a registry seed")
    val, params = max(cands, key=lambda c: c[0])
    return BoundRecord(m, m, float(val), "Thm4.2", params)


def _diag_all(m: int) -> float:
    return (m + 2) * _log2(m + 2) / 3 - (m + 2) / 3 * (1 + _log2(3)) + 1


def thm43_bound(m: int) -> BoundRecord:
    if m < 3:
        raise NotApplicable("m must be at least 3")
    return BoundRecord(m, m, _diag_all(m), "Thm4.3", {"seeds": [[1, 1, 0], [2, 2, 1]]})


def thm51_candidates(m: int, r: int, use_registry: bool = True) -> list[BoundRecord]:
    """One record per decomposition of m; seeds Z(m0 - r, m0, k0), k0 = 0 always available."""
    if r < 1:
        raise ValueError("r must be positive")
    s = r // 2
    out = []

    def seed_k(m0):
        return registry_k(m0 - r, m0) if use_registry and m0 - r >= 1 else 0

    p = 1
    while 2 ** p * 2 - 2 <= m:
        q = 2 ** p
        if (m + 1) % q == 0 and (m + 1) // q >= 2:
            k = (m + 1) // q
            k0 = seed_k(k - 1)
            B = (k0 - s - 1) / k - _log2(k) / 2
            val = _lead(m + 1) + B * (m + 1) + 1 + s
            out.append(BoundRecord(m - r, m, val, "Thm5.1", {"form": "m=2^p k-1", "p": p, "k": k, "m0": k - 1,
                                                             "k0": k0, "B": B, "r": r}))
        if (m + 2) % q == 0 and (m + 2) // q >= 3:
            k = (m + 2) // q - 1
            k0 = seed_k(k - 1)
            B = (k0 - 1 - s - 1) / (k + 1) - _log2(k + 1) / 2
            val = _lead(m + 2) + B * (m + 2) + 2 + s
            out.append(BoundRecord(m - r, m, val, "Thm5.1", {"form": "m=2^p(k+1)-2", "p": p, "k": k, "m0": k - 1,
                                                             "k0": k0, "B_bar": B, "r": r}))
        p += 1
    return out


def thm51_bound(m: int, r: int, use_registry: bool = True) -> BoundRecord:
    """Bound on H(m - r, m): the best decomposition (the first one on ties)."""
    cands = thm51_candidates(m, r, use_registry)
    if not cands:
        raise NotApplicable(f"m={m} has no decomposition with k >= 2")
    best = cands[0]
    for c in cands[1:]:
        if c.bound > best.bound:
            best = c
    return best


def displayed_B(k: int, r: int) -> float:
    """The stated lower estimate of B_{k,r}."""
    return -((1 + r // 2) / k + _log2(k) / 2)


def displayed_B_bar(k: int, r: int) -> float:
    return -((2 + r // 2) / (k + 1) + _log2(k + 1) / 2)


def thm52_bound(m: int) -> BoundRecord:
    """Bound on H(m - 1, m)."""
    if m < 3:
        raise NotApplicable("m must be at least 3")
    if _is_pow2(m + 1):
        v = _diag_pow2(m)
        if v >= _diag_all(m):
            return BoundRecord(m - 1, m, v, "Thm5.2", {"form": "power-of-two", "seed": [2, 3, 5]})
    return BoundRecord(m - 1, m, _diag_all(m), "Thm5.2", {"form": "all m"})


# -- the generic recursion search ---------------------------------------------

def thm41_bound(n: int, m: int) -> BoundRecord:
    """Best leaf of a doubling tree from a registry seed that fits in (n, m)."""
    best = None
    for m0 in range(1, 5):
        p = 1
        while 2 ** p * (m0 + 1) - 1 <= m:
            q = 2 ** p
            n0 = (n + 1) // q - 1  # largest n0 whose first leaf fits
            if n0 >= 1:
                i = min(q, n - q * (n0 + 1) + 2)
                k0 = registry_k(n0, m0)
                k = seq_recursive((n0, m0, k0), p, i)[2]
                if best is None or k > best[0]:
                    best = (k, {"seed": [n0, m0, k0], "p": p, "i": i, "j": 1})
            p += 1
    if best is None:
        raise NotApplicable(f"no recursion leaf fits in ({n},{m})")
    return BoundRecord(n, m, float(best[0]), "Thm4.1", best[1])


# -- aggregation -------------------------------------------------------------

def _diag_candidates(d: int) -> Iterable[int]:
    """Diagonal sizes m' <= d worth evaluating (the largest member of each family)."""
    out = {d}
    p = 1
    while 2 ** (p + 1) - 1 <= d:
        p += 1
    out.add(2 ** p - 1)
    for m0 in range(1, d):
        for shift, width in ((1, m0 + 1), (2, m0 + 2)):
            q = 2
            if q * width - shift > d:
                continue
            while 2 * q * width - shift <= d:
                q *= 2
            out.add(q * width - shift)
    return sorted(x for x in out if x >= 1)


def _safe(fn, *args):
    try:
        return fn(*args)
    except NotApplicable:
        return None


def _relabel(rec: BoundRecord | None, n: int, m: int) -> BoundRecord | None:
    if rec is None:
        return None
    params = dict(rec.params)
    if (rec.n, rec.m) != (n, m):
        params["via"] = [rec.n, rec.m]
    return BoundRecord(n, m, rec.bound, rec.source, params)


def candidates(n: int, m: int) -> list[BoundRecord]:
    """Every applicable record for H(n, m), degree slack included."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    out = [_safe(registry_bound, n, m), lemma21_bound(n, m)]
    if n >= 3 and m >= 3:
        out.append(_relabel(thm31_bound(n, min(m, 6)), n, m))
    if m >= 7 and n >= 7:
        out.append(_relabel(thm32_bound(n, m) if n >= m else _best_thm32_slack(n, m), n, m))
    out.append(_safe(thm41_bound, n, m))
    d = min(n, m)
    diag = [r for r in (_safe(thm42_bound, x) for x in _diag_candidates(d)) if r is not None]
    if diag:
        out.append(_relabel(max(diag, key=lambda r: r.bound), n, m))
    if d >= 3:
        best43 = max((thm43_bound(x) for x in _diag_candidates(d) if x >= 3), key=lambda r: r.bound)
        out.append(_relabel(best43, n, m))
    if m >= 3:
        r = max(1, m - n)
        out.append(_relabel(_safe(thm51_bound, m, r), n, m))
        if n >= m - 1:
            out.append(_relabel(thm52_bound(m), n, m))
    return [r for r in out if r is not None]


def _best_thm32_slack(n: int, m: int) -> BoundRecord | None:
    # m > n: use the largest m' <= n
    return _safe(thm32_bound, n, n) if n >= 7 else None


def best_bound(n: int, m: int) -> BoundRecord:
    """Largest ceiling over all sources; ties go to the earlier source."""
    cands = candidates(n, m)
    return max(cands, key=lambda r: (r.value, -_RANK[r.source]))


def bound_table(n_max: int, m_max: int) -> list[BoundRecord]:
    return [best_bound(n, m) for n in range(1, n_max + 1) for m in range(1, m_max + 1)]


def asymptotic_ratio(m: int) -> float:
    if m < 3:
        raise ValueError("m must be at least 3")
    return best_bound(m, m).value / ((m + 2) * math.log(m + 2))
