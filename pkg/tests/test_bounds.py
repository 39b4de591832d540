import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lienard import bounds as B

LN2 = math.log(2)


def test_seed_certificates():
    triples = {c.triple for c in B.lemma21_certificates(3, 3)}
    assert (3, 3, 5) in triples
    assert (2, 3, 5) in {c.triple for c in B.lemma21_certificates(2, 3)}
    assert (1, 1, 0) in {c.triple for c in B.lemma21_certificates(1, 1)}
    for c in B.lemma21_certificates(6, 4):
        assert c.provenance["citation"] and c.n <= 6 and c.m <= 4 and not c.h_windows


def test_seed_family_ranges():
    # the m = 3 family stops at n = 8, the m = 4 family at n = 18
    assert B.registry_k(8, 3) == (3 * 8 + 14) // 4
    assert B.registry_k(9, 3) == B.registry_k(8, 3)
    assert B.registry_k(18, 4) == 18 + 4 - 19 // 5
    assert B.registry_k(5, 2) == 11 // 3
    assert B.registry_k(1, 1) == 0


@pytest.mark.parametrize("n, m, expected", [(9, 3, 8), (3, 3, 1), (7, 5, 7), (10, 6, 2 * 3 + 4)])
def test_small_m_bound(n, m, expected):
    rec = B.thm31_bound(n, m)
    assert rec.value == expected and rec.source == "Thm3.1"


def test_small_m_bound_range():
    with pytest.raises(B.NotApplicable):
        B.thm31_bound(9, 7)
    with pytest.raises(B.NotApplicable):
        B.thm31_bound(2, 3)


def test_slopes_and_intercepts():
    assert B.delta_p(2) == 9 and B.delta_p(3) == 22
    assert B.l_p(2) == Fraction(3, 2)
    assert B.beta_p(2) == Fraction(28, 3)
    assert B.r_p(2) == Fraction(5, 3)


@pytest.mark.parametrize("p", range(1, 21))
def test_intercepts_recursion_matches_sum(p):
    assert B.delta_p(p) == B.delta_recursive(p)
    assert B.beta_p(p) == B.beta_recursive(p)
    assert B.delta_p(p) <= (p + 4) * 2 ** (p - 1) - (p + 1)


def test_linear_in_n_bound():
    rec = B.thm32_bound(10, 7)
    assert rec.bound == 6.0 and rec.source == "Thm3.2-S1" and rec.params["p"] == 2
    assert B.thm32_bound(7, 7).bound == pytest.approx(1.5)
    # m = 11 lies on the second branch for p = 2
    rec = B.thm32_bound(30, 11)
    assert rec.bound == pytest.approx(max(1.5 * 30 - 9, float(Fraction(5, 3) * 30 - Fraction(28, 3))))
    with pytest.raises(B.NotApplicable):
        B.thm32_bound(6, 7)
    with pytest.raises(B.NotApplicable):
        B.thm32_bound(20, 6)


SEEDS = [(1, 1, 0), (2, 2, 1), (3, 3, 5)]


@pytest.mark.parametrize("seed", SEEDS)
def test_sequence_closed_forms(seed):
    for p in range(0, 21):
        for i in {1, 2 ** p}:
            assert B.seq_closed_form(seed, p, i) == B.seq_recursive(seed, p, i)


@pytest.mark.parametrize("seed", SEEDS)
def test_leaves_strictly_increase(seed):
    for p in range(1, 13):
        k = B.all_leaves(seed, p)
        assert np.all(np.diff(k) > 0)
        assert k[0] == B.seq_recursive(seed, p, 1)[2] and k[-1] == B.seq_recursive(seed, p, 2 ** p)[2]


def test_sequence_examples():
    assert B.seq_recursive((3, 3, 5), 1, 1) == (7, 7, 13)
    assert B.seq_recursive((3, 3, 5), 2, 1) == (15, 15, 33)
    assert B.seq_closed_form((3, 3, 5), 2, 4) == (18, 18, 37)
    with pytest.raises(ValueError):
        B.seq_recursive((3, 3, 5), 2, 5)
    with pytest.raises(ValueError):
        B.seq_closed_form((3, 3, 5), 2, 2)


def test_leaves_match_walk():
    seed = (2, 2, 1)
    k = B.all_leaves(seed, 5)
    assert [B.seq_recursive(seed, 5, i)[2] for i in range(1, 33)] == k.tolist()


def test_s_membership():
    assert B.s_membership(7, 3) == (1, 1)
    assert B.s_membership(12, 2) == (2, 2)
    assert B.s_membership(2, 3) is None


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 5000), st.integers(1, 60))
def test_s_membership_reconstructs(m, m0):
    r = B.s_membership(m, m0)
    if r is not None:
        i, j = r
        assert 1 <= j <= 2 ** i and m == 2 ** i * (m0 + 1) - 2 + j


def test_partition():
    assert B.partition_check(1, 1000)
    assert B.partition_check(8, 10 ** 4)
    assert B.partition_check(3, 2)
    assert all(B.partition_check(M, 10 ** 4) for M in range(1, 65))


def test_two_sets_cover_everything():
    covered = [B.s_membership(m, 1) is not None or B.s_membership(m, 2) is not None for m in range(1, 10 ** 4 + 1)]
    assert all(covered)


def test_diagonal_power_of_two_bound():
    rec = B.thm42_bound(7)
    assert rec.value == 13 and rec.source == "Thm4.2"
    assert B.N(3, 5) == 0.0
    assert B.thm42_bound(3).bound == pytest.approx(5.0, abs=1e-12)
    assert B.thm42_bound(3).value == 5


def test_diagonal_all_m_bound():
    expected = 8 - (8 / 3) * (1 + math.log(3) / LN2) + 1
    assert B.thm43_bound(6).bound == pytest.approx(expected, rel=1e-14)
    assert B.thm43_bound(6).bound == pytest.approx(2.107, abs=1e-3)


def test_offset_bound_fallback_example():
    rec = B.thm51_bound(15, 2, use_registry=False)
    assert rec.params["k"] == 4 and rec.params["B"] == -1.5
    assert rec.bound == pytest.approx(10.0, abs=1e-12)


@pytest.mark.parametrize("r", range(1, 9))
def test_offset_fallback_matches_displayed_intercepts(r):
    for k in range(2, 65):
        cands = B.thm51_candidates(2 * k - 1, r, use_registry=False)
        rec = next(c for c in cands if c.params["form"] == "m=2^p k-1" and c.params["k"] == k)
        assert rec.params["B"] == B.displayed_B(k, r)
        cands = B.thm51_candidates(2 * k, r, use_registry=False)
        rec = next(c for c in cands if c.params["form"] == "m=2^p(k+1)-2" and c.params["k"] == k)
        assert rec.params["B_bar"] == B.displayed_B_bar(k, r)


def test_offset_one_bound():
    assert B.thm52_bound(7).value == 13
    assert B.thm52_bound(7).bound == pytest.approx(13.0, abs=1e-12)
    assert B.thm52_bound(6).bound == B.thm43_bound(6).bound


@pytest.mark.parametrize("n, m, value, source", [
    (3, 3, 5, "Lemma2.1"),
    (7, 7, 13, "Thm4.2"),
    (9, 3, 9, "Registry§1"),
    (1, 1, 0, "Registry§1"),
])
def test_best_bound_examples(n, m, value, source):
    rec = B.best_bound(n, m)
    assert rec.value == value and rec.source == source


def test_best_bound_ties_go_to_earlier_source():
    for n in range(1, 20):
        for m in range(1, 20):
            best = B.best_bound(n, m)
            for c in B.candidates(n, m):
                if c.value == best.value:
                    assert B.SOURCES.index(c.source) >= B.SOURCES.index(best.source) or c.source == "Thm4.1"


def test_best_bound_monotone_in_n():
    table = np.zeros((65, 65), dtype=int)
    for r in B.bound_table(64, 64):
        table[r.n, r.m] = r.value
    assert np.all(np.diff(table[1:, 1:], axis=0) >= 0)


def test_ceiling_tolerance():
    assert B.ceil_bound(5.000000000001) == 5
    assert B.ceil_bound(5.1) == 6
    assert B.ceil_bound(Fraction(11, 2)) == 6


def test_asymptotic_examples():
    assert B.asymptotic_ratio(7) == pytest.approx(13 / (9 * math.log(9)), rel=1e-14)
    assert B.asymptotic_ratio(3) == pytest.approx(5 / (5 * math.log(5)), rel=1e-14)


def test_asymptotic_ratio_increases():
    target = 1 / (2 * LN2)
    ratios = [B.asymptotic_ratio(2 ** (p + 1) - 1) for p in range(1, 15)]
    assert all(b > a for a, b in zip(ratios[:-1], ratios[1:]))
    assert ratios[-1] < target
    assert abs(ratios[-1] - target) <= 0.05 * target


def test_record_validation():
    with pytest.raises(ValueError):
        B.BoundRecord(1, 1, 1.0, "Thm9.9")
    with pytest.raises(ValueError):
        B.BoundRecord(1, 1, math.inf, "Thm4.2")
    d = B.best_bound(7, 7).to_dict()
    assert d["bound"] == 13 and d["source"] == "Thm4.2"
