import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lienard.abelian import melnikov, profile
from lienard.constructor import (ConstructedSystem, ZCertificate, ZeroWindow, compose_step, doubling_transform,
                                 plan_recursion, realize, realize_doubled, realize_plan, van_der_pol_seed,
                                 weaken_certificate, well_annuli, zero_orbit_extent)
from lienard.hamiltonian import OUTER, annuli, energy_window
from lienard.poly import Polynomial, evaluate


def test_van_der_pol_seed(vdp):
    c = vdp.certificate
    assert c.triple == (2, 1, 1) and c.realized
    assert c.h_windows[0].zeros[0] == pytest.approx(2.0, abs=1e-7)
    assert zero_orbit_extent(vdp) == pytest.approx(2.0, abs=1e-7)


def test_doubling_explicit_shift(vdp):
    d = doubling_transform(vdp, -3.5)
    u = Polynomial([-3.5, 0.0, 1.0])
    F_expected = u * u * u * (1.0 / 3.0) - u
    xs = np.linspace(-3, 3, 13)
    assert np.allclose(evaluate(d.F, xs), evaluate(F_expected, xs), rtol=1e-13, atol=1e-12)
    assert np.allclose(evaluate(d.g, xs), 2 * xs * (xs ** 2 - 3.5), rtol=1e-13, atol=1e-12)
    centers = sorted(A.center_x for A in well_annuli(d.potential))
    assert centers == pytest.approx([-math.sqrt(3.5), math.sqrt(3.5)], rel=1e-13)
    assert d.certificate.triple == (5, 3, 2) and not d.certificate.realized


def test_doubling_auto_shift(vdp):
    d = doubling_transform(vdp)
    assert d.certificate.provenance["x_star"] == pytest.approx(2.2, abs=1e-6)
    assert d.x0 == pytest.approx(-3.2, abs=1e-6)


def test_doubling_shift_too_small(vdp):
    with pytest.raises(ValueError, match="shift too small"):
        doubling_transform(vdp, -2.0)


def test_doubling_needs_realized_seed():
    bare = ConstructedSystem(F=Polynomial([0.0, -1.0, 0.0, 1 / 3]), g=Polynomial([0.0, 1.0]))
    with pytest.raises(ValueError):
        doubling_transform(bare)


def test_doubling_seed_without_zeros():
    # F = x^3 gives M(h) < 0 for all h > 0: no cycles
    seed = realize(ConstructedSystem(F=Polynomial([0.0, 0.0, 0.0, 1.0]), g=Polynomial([0.0, 1.0])),
                   2, 1, outer_cap=20.0, epsilon0=0.1)
    assert seed.certificate.k == 0 and seed.certificate.realized
    d = realize_doubled(doubling_transform(seed))
    assert d.certificate.k == 0 and d.certificate.recorded_zeros == 0


def test_doubled_wells_mirror(vdp):
    d = realize_doubled(doubling_transform(vdp))
    assert d.certificate.recorded_zeros == 2
    left, right = sorted(well_annuli(d.potential), key=lambda A: A.center_x)
    assert left.center_x == pytest.approx(-right.center_x, rel=1e-13)
    assert (left.h_min, left.h_max) == pytest.approx((right.h_min, right.h_max), abs=1e-12)
    lo, hi = energy_window(right, 1e-3)
    pl = profile(d.F, d.potential, left, lo, hi, 32)
    pr = profile(d.F, d.potential, right, lo, hi, 32)
    # F2 even: the orbit integrals over the two wells are opposite
    assert np.allclose(pl.values, -pr.values, rtol=1e-9, atol=1e-12 * np.max(np.abs(pr.values)))
    assert pl.zero_energies == pytest.approx(pr.zero_energies, rel=1e-9)


def test_compose_odd(composed_odd):
    c = composed_odd.certificate
    assert c.triple == (5, 3, 4) and c.realized
    assert composed_odd.F.degree() <= 6 and composed_odd.g.degree() == 3
    assert composed_odd.g.is_odd()
    wells = [w for w in c.h_windows if w.kind != OUTER]
    assert sorted(len(w.zeros) for w in wells) == [1, 1]
    outer = next(w for w in c.h_windows if w.kind == OUTER)
    targets = c.provenance["targets"]
    assert len(outer.zeros) == 2
    for z, t in zip(outer.zeros, targets):
        assert z == pytest.approx(t, rel=1e-3)
    assert composed_odd.mu == pytest.approx(1e-2 * composed_odd.lam)
    assert composed_odd.lam == pytest.approx(0.01)


def test_compose_even(composed_even):
    c = composed_even.certificate
    assert c.triple == (6, 3, 5)
    assert composed_even.F.degree() == 7 and composed_even.g.is_odd()
    outer = next(w for w in c.h_windows if w.kind == OUTER)
    assert len(outer.zeros) == 3


def test_compose_rejects_parity(vdp):
    with pytest.raises(ValueError):
        compose_step(vdp, "both")


def test_composed_outer_zeros_survive_full_F(composed_odd):
    # with mu << lambda the perturbation still dominates far out: the full F
    # shows a sign change next to every target
    s = composed_odd
    A = next(A for A in annuli(s.potential) if A.kind == OUTER)
    targets = s.certificate.provenance["targets"]
    for t in targets:
        lo, hi = melnikov(s.F, s.potential, A, 0.8 * t), melnikov(s.F, s.potential, A, 1.25 * t)
        assert lo * hi < 0


def test_weaken():
    c = ZCertificate(5, 3, 4)
    w = weaken_certificate(c, 5, 4)
    assert w.triple == (5, 4, 4)
    assert weaken_certificate(c, 5, 3).triple == (5, 3, 4)
    with pytest.raises(ValueError):
        weaken_certificate(c, 4, 3)


def test_certificate_invariants():
    with pytest.raises(ValueError):
        ZCertificate(0, 1, 0)
    with pytest.raises(ValueError):
        ZCertificate(1, 1, -1)
    w = ZeroWindow(0, OUTER, 0.0, 0.1, 10.0, (2.0,))
    with pytest.raises(ValueError):
        ZCertificate(2, 1, 2, (w,))


def test_plan_examples():
    plan = plan_recursion((3, 3, 5), 1)
    assert plan.leaves() == [(7, 7, 13), (8, 8, 14)]
    assert plan.cross(1, 2) == (7, 8, 13)
    plan2 = plan_recursion((3, 3, 5), 2)
    assert plan2.level(2)[0] == (15, 15, 33)
    assert plan_recursion((1, 1, 0), 1).leaves()[0][2] == 1


def test_plan_guard():
    with pytest.raises(OverflowError):
        plan_recursion((1, 1, 0), 31)
    with pytest.raises(ValueError):
        plan_recursion((1, 1, 0), 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 12), st.integers(1, 20))
def test_plan_closed_forms(n0, m0, k0, p):
    plan = plan_recursion((n0, m0, k0), p)
    i = np.arange(1, 2 ** p + 1)
    assert np.array_equal(plan.n[p], 2 ** p * (n0 + 1) - 2 + i)
    assert np.array_equal(plan.m[p], 2 ** p * (m0 + 1) - 2 + i)
    assert plan.k[p][0] == 2 ** p * (k0 - 1) + p * 2 ** (p - 1) * (n0 + 1) + 1
    assert np.all(np.diff(plan.k[p]) > 0)


def test_json_round_trip(composed_odd):
    text = json.dumps(composed_odd.to_dict())
    back = ConstructedSystem.from_dict(json.loads(text))
    assert back.F == composed_odd.F and back.g == composed_odd.g
    assert back.certificate == composed_odd.certificate
    assert back.b == composed_odd.b and back.x0 == composed_odd.x0
    keys = set(json.loads(text))
    assert {"F", "g", "lambda", "mu", "b", "x0", "certificate", "provenance"} <= keys


def test_realize_plan_depth_one(vdp, composed_odd):
    s = realize_plan(vdp, 1, ["even"])
    assert s.certificate.triple == (6, 3, 5)
    with pytest.raises(ValueError):
        realize_plan(vdp, 3, ["odd"] * 3)
    with pytest.raises(ValueError):
        realize_plan(vdp, 2, ["odd"])


def test_realize_plan_depth_two(vdp):
    s = realize_plan(vdp, 2, ["odd", "odd"])
    c = s.certificate
    assert c.triple == (11, 7, 13) and c.recorded_zeros == 13
    assert s.g.degree() == 7 and s.F.degree() <= 12
