import math

import numpy as np
import pytest

from conftest import bisect_min_root, quadratic_min_root
from nkcert.criteria import (
    EARLIER_ARGYROS_THRESHOLD,
    ARGYROS_THRESHOLD,
    CRITICAL_RATIO,
    NEW_THRESHOLD,
    Certificate,
    ComparisonVerdict,
    Criterion,
    check_argyros,
    check_kantorovich,
    check_new_general,
    check_new_lipschitz,
    compare_criteria,
    discriminant,
)
from nkcert.majorant import MajorantModel, argyros_map, psi
from nkcert.modulus import ZERO, LinearModulus, LipschitzPair, PiecewiseLinearModulus, PowerModulus


def test_constants():
    assert NEW_THRESHOLD == pytest.approx(0.17157287525381, abs=1e-13)
    assert CRITICAL_RATIO == pytest.approx(0.34314575050762, abs=1e-13)
    assert EARLIER_ARGYROS_THRESHOLD == pytest.approx(0.13397459621556, abs=1e-13)
    # both earlier bounds sit below the new one; they are not ordered among themselves
    assert NEW_THRESHOLD > EARLIER_ARGYROS_THRESHOLD > ARGYROS_THRESHOLD


def test_kantorovich_examples():
    cert = check_kantorovich(LipschitzPair(1.0, 1.0), 0.5)
    assert cert.passed and cert.v_star == pytest.approx(1.0, abs=1e-15)
    assert cert.eta_max == 0.5
    assert not check_kantorovich(LipschitzPair(1.0, 1.0), 0.51).passed
    cert = check_kantorovich(LipschitzPair(1.0, 2.0), 0.0)
    assert cert.passed and cert.v_star == 0.0


def test_kantorovich_root_solves_quadratic(rng):
    for _ in range(50):
        l = 10 ** rng.uniform(-2, 2)
        eta = rng.uniform(0, 0.5) / l
        v = check_kantorovich(LipschitzPair(l, l), eta).v_star
        assert v == pytest.approx((1 - math.sqrt(1 - 2 * l * eta)) / l, rel=1e-9)
        assert abs(eta - v + l * v * v / 2) <= 1e-12 * max(1, v)


def test_new_lipschitz_boundary():
    cert = check_new_lipschitz(LipschitzPair(1.0, 1.0), NEW_THRESHOLD, 1.0)
    assert cert.passed
    assert abs(cert.diagnostics["discriminant"]) <= 1e-15
    assert cert.eta_max == pytest.approx(NEW_THRESHOLD, abs=1e-15)


def test_discriminant_matches_expanded_form(rng):
    for lam in rng.uniform(0, 6, 100):
        assert discriminant(lam) == pytest.approx(lam * lam - 6 * lam + 1, abs=1e-13)


def test_new_lipschitz_examples():
    assert not check_new_lipschitz(LipschitzPair(1.0, 1.0), 0.2, 1.0).passed
    cert = check_new_lipschitz(LipschitzPair(1.0, 1.0), 0.0, 1.0)
    assert cert.passed and cert.v_star == 0.0
    cert = check_new_lipschitz(LipschitzPair(2.0, 3.0), 0.05, 1.0)
    assert cert.v_star == pytest.approx(quadratic_min_root(2.0, 0.05), rel=1e-13)


def test_new_lipschitz_radius_binds():
    # v*(0.1) with l0 = 1 is (1.1 - sqrt(0.41)) / 4 = 0.11492...; a ball of 0.11 is too small
    cert = check_new_lipschitz(LipschitzPair(1.0, 1.0), 0.1, 0.11)
    assert not cert.passed
    assert cert.eta_max < 0.1
    at_max = check_new_lipschitz(LipschitzPair(1.0, 1.0), cert.eta_max, 0.11)
    assert at_max.passed and at_max.v_star == pytest.approx(0.11, rel=1e-12)


def test_new_general_examples():
    cert = check_new_general(MajorantModel(ZERO, 0.3, 1.0))
    assert cert.passed and cert.v_star == 0.3 and cert.diagnostics["degenerate"]
    cert = check_new_general(MajorantModel(LinearModulus(1.0), 0.0, 1.0))
    assert cert.passed and cert.v_star == 0.0


def test_new_general_power_against_oracle():
    model = MajorantModel(PowerModulus(1.0, 0.5), 0.5, 1.0)
    cert = check_new_general(model, with_eta_max=False)
    oracle = bisect_min_root(lambda v: v - psi(model, v), 0.5, 0.99, grid=4000)
    assert cert.passed is (oracle is not None)
    small = MajorantModel(PowerModulus(1.0, 0.5), 0.02, 1.0)
    cert = check_new_general(small)
    oracle = bisect_min_root(lambda v: v - psi(small, v), 0.0, 0.9, grid=4000)
    assert cert.passed and cert.v_star == pytest.approx(oracle, abs=1e-10)


def test_new_general_agrees_with_lipschitz(rng):
    for _ in range(1000):
        l0 = 10 ** rng.uniform(-1, 1)
        eta = rng.uniform(0, 0.25) / l0
        R = rng.uniform(max(eta, 0.05 / l0), 0.99 / l0)
        eta = min(eta, R)
        a = check_new_lipschitz(LipschitzPair(l0, l0), eta, R)
        b = check_new_general(MajorantModel(LinearModulus(l0), eta, R), with_eta_max=False)
        if abs(l0 * eta - NEW_THRESHOLD) < 1e-9 or (a.v_star is not None and abs(a.v_star - R) < 1e-9):
            continue
        assert a.passed == b.passed
        if a.passed:
            assert b.v_star == pytest.approx(a.v_star, abs=1e-10)


def test_eta_max_bisection_matches_closed_form():
    for l0 in (2.0,):
        R = 0.9 / l0
        # a table that reproduces l0 * r exactly on [0, R]
        table = PiecewiseLinearModulus(((0.0, 0.0), (R, l0 * R)))
        cert = check_new_general(MajorantModel(table, 0.01, R))
        assert cert.eta_max == pytest.approx(NEW_THRESHOLD / l0, abs=1e-8)
        arg = check_argyros(MajorantModel(table, 0.01, R))
        assert arg.eta_max == pytest.approx(ARGYROS_THRESHOLD / l0, abs=1e-8)


def test_argyros_examples():
    cert = check_argyros(MajorantModel(LinearModulus(1.0), 0.1, 1.0))
    assert cert.passed
    # (5/2) r^2 - r + 0.1 = 0 has the double root r = 0.2
    assert cert.diagnostics["r0"] == pytest.approx(0.2, abs=1e-7)
    assert not check_argyros(MajorantModel(LinearModulus(1.0), 0.11, 1.0)).passed
    cert = check_argyros(MajorantModel(ZERO, 0.3, 1.0))
    assert cert.passed and cert.diagnostics["r0"] == 0.3 and cert.diagnostics["q_r0"] == 0.0


def test_argyros_root_against_oracle(rng):
    for _ in range(30):
        l0 = rng.uniform(0.2, 2.0)
        eta = rng.uniform(0.001, 0.099) / l0
        model = MajorantModel(LinearModulus(l0), eta, 0.9 / l0)
        cert = check_argyros(model)
        expected = (1 - math.sqrt(1 - 10 * l0 * eta)) / (5 * l0)
        assert cert.passed and cert.diagnostics["r0"] == pytest.approx(expected, abs=1e-10)
        assert abs(argyros_map(model, expected) - expected) <= 1e-12


def test_argyros_implies_new(rng):
    moduli = [LinearModulus(1.0), PowerModulus(0.7, 0.6), PowerModulus(1.5, 1.0),
              PiecewiseLinearModulus(((0.0, 0.0), (0.3, 0.1), (0.6, 0.5), (1.0, 0.9)))]
    hits = 0
    for modulus in moduli:
        for eta in np.linspace(0, 0.3, 61):
            model = MajorantModel(modulus, float(eta), 1.0)
            arg = check_argyros(model, with_eta_max=False)
            if arg.passed:
                hits += 1
                new = check_new_general(model, with_eta_max=False)
                assert new.passed
                assert new.v_star <= arg.v_star + 1e-9
    assert hits > 20


def test_compare_criteria_verdicts():
    verdict, _ = compare_criteria(LipschitzPair(0.3, 1.0), 0.1, 1.0)
    assert verdict.new_weaker_than_kantorovich
    verdict, _ = compare_criteria(LipschitzPair(1.0, 1.0), 0.1, 1.0)
    assert not verdict.new_weaker_than_kantorovich
    verdict, _ = compare_criteria(LipschitzPair(CRITICAL_RATIO, 1.0), 0.1, 1.0)
    assert not verdict.new_weaker_than_kantorovich


def test_compare_criteria_certificates():
    verdict, certs = compare_criteria(LipschitzPair(0.5, 1.0), 0.3, 1.0)
    assert [c.criterion for c in certs] == [Criterion.KANTOROVICH, Criterion.NEW, Criterion.ARGYROS]
    assert [c.passed for c in certs] == [True, True, False]
    diag = certs[1].diagnostics
    assert diag["eta_max_times_l0"] > max(diag["argyros_eta_max_times_l0"],
                                          diag["earlier_argyros_eta_max_times_l0"])
    assert verdict.ratio == 0.5


def test_round_trip():
    _, certs = compare_criteria(LipschitzPair(0.5, 1.0), 0.3, 1.0)
    for cert in certs:
        assert Certificate.from_dict(cert.to_dict()) == cert
    verdict = ComparisonVerdict(0.25, CRITICAL_RATIO, True)
    assert ComparisonVerdict.from_dict(verdict.to_dict()) == verdict
