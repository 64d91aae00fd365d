import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qeraser import entanglement as ent
from qeraser.entanglement import (
    PauliCorrelators,
    bell_fidelity,
    concurrence,
    concurrence_via_sqrt,
    correlators_from_conditioning,
    entanglement_report,
    eraser_criterion,
    fringe_correlators,
    negativity,
    pauli_correlators,
    pure_concurrence,
    reconstruct_state,
    witness_expectation,
)
from qeraser.model import EraserParams, build_joint_state
from qeraser.qmat import InvalidDensityMatrix, ket, projector

from conftest import S2, random_params

BELL = (ket("L", "H") + ket("R", "V")) / math.sqrt(2)


def bell_correlators(xx, yy, zz):
    d = np.zeros((3, 3))
    d[0, 0], d[1, 1], d[2, 2] = xx, yy, zz
    return PauliCorrelators(np.zeros(3), np.zeros(3), d)


def brute_negativity(rho):
    """Partial transpose by explicit index swap, then numpy's Hermitian solver."""
    pt = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for m in range(2):
                    pt[2 * i + j, 2 * k + m] = rho[2 * i + m, 2 * k + j]
    vals = np.linalg.eigvalsh(pt)
    return float(-vals[vals < 0].sum())


class TestConcurrence:
    def test_bell(self):
        assert concurrence(projector(BELL)) == pytest.approx(1, abs=1e-12)

    def test_dephased_is_zero(self, rng):
        for _ in range(20):
            assert concurrence(build_joint_state(random_params(rng, gamma=0.0))) == 0.0

    def test_non_orthogonal_markers(self):
        p = EraserParams(h=0.6, v=0.8)
        assert concurrence(build_joint_state(p)) == pytest.approx(0.8, abs=1e-12)

    def test_pure_oracle(self, rng):
        for _ in range(1000):
            p = random_params(rng, gamma=1.0)
            expected = 2 * abs(p.a * p.b * p.v)
            psi = p.a * ket("L", "H") + p.b * np.kron(ket("R"), p.marker)
            assert pure_concurrence(psi) == pytest.approx(expected, abs=1e-12)
            assert concurrence(build_joint_state(p)) == pytest.approx(expected, abs=1e-9)

    def test_sqrt_route_agrees(self, rng):
        for _ in range(300):
            rho = build_joint_state(random_params(rng))
            assert concurrence_via_sqrt(rho) == pytest.approx(concurrence(rho), abs=1e-7)

    def test_monotone_in_gamma(self, rng):
        gammas = np.linspace(0, 1, 41)
        for _ in range(50):
            p = random_params(rng)
            cs = [concurrence(build_joint_state(EraserParams(p.a, p.b, p.h, p.v, g))) for g in gammas]
            assert np.all(np.diff(cs) >= -1e-12)

    def test_product_state(self):
        rho = np.kron(projector(ket("L")), projector(ket("H")))
        assert concurrence(rho) == 0.0

    def test_rejects_invalid(self):
        with pytest.raises(InvalidDensityMatrix):
            concurrence(np.diag([0.5, 0.5, 0.5, -0.5]))
        with pytest.raises(ValueError):
            concurrence(np.eye(2) / 2)


class TestNegativity:
    def test_examples(self):
        assert negativity(projector(BELL)) == pytest.approx(0.5, abs=1e-12)
        assert negativity(np.kron(projector(ket("R")), projector(ket("V")))) == 0.0
        assert negativity(build_joint_state(EraserParams(h=0.6, v=0.8))) == pytest.approx(0.4, abs=1e-12)

    def test_against_brute_partial_transpose(self, rng):
        for _ in range(200):
            rho = build_joint_state(random_params(rng)).mat
            assert negativity(rho) == pytest.approx(brute_negativity(rho), abs=1e-10)

    def test_agrees_with_concurrence_on_support(self, rng):
        for _ in range(1000):
            rho = build_joint_state(random_params(rng))
            c, n = concurrence(rho), negativity(rho)
            assert (c > 1e-9) == (n > 1e-9), (c, n)

    def test_pure_states_half_concurrence(self, rng):
        for _ in range(200):
            rho = build_joint_state(random_params(rng, gamma=1.0))
            assert negativity(rho) == pytest.approx(concurrence(rho) / 2, abs=1e-9)


class TestCorrelators:
    def test_bell(self):
        k = pauli_correlators(projector(BELL))
        np.testing.assert_allclose(k.d, np.diag([1, -1, 1]), atol=1e-15)
        np.testing.assert_allclose(k.b, 0, atol=1e-15)
        np.testing.assert_allclose(k.c, 0, atol=1e-15)

    def test_maximally_mixed(self):
        k = pauli_correlators(np.eye(4) / 4)
        assert not np.any(k.b) and not np.any(k.c) and not np.any(k.d)

    def test_dephased_orthogonal(self):
        k = pauli_correlators(build_joint_state(EraserParams(gamma=0.0)))
        assert k.dd("zz") == pytest.approx(1)
        assert k.dd("xx") == 0 and k.dd("yy") == 0

    def test_singles_match_reduced_states(self, rng):
        from qeraser.qmat import partial_trace, SX, SY, SZ
        for _ in range(50):
            rho = build_joint_state(random_params(rng)).mat
            k = pauli_correlators(rho)
            re, rp = partial_trace(rho, "photon"), partial_trace(rho, "electron")
            for i, s in enumerate((SX, SY, SZ)):
                assert k.b[i] == pytest.approx(np.trace(s @ re).real, abs=1e-12)
                assert k.c[i] == pytest.approx(np.trace(s @ rp).real, abs=1e-12)

    def test_in_range(self):
        assert bell_correlators(1, -1, 1).in_range()
        assert not bell_correlators(1.1, 0, 0).in_range()


class TestFidelityAndWitness:
    def test_examples(self):
        assert bell_fidelity(bell_correlators(1, -1, 1)) == 1.0
        assert bell_fidelity(bell_correlators(0, 0, 0)) == 0.25
        k = pauli_correlators(build_joint_state(EraserParams(gamma=0.0)))
        assert bell_fidelity(k) == pytest.approx(0.5, abs=1e-15)

    def test_fidelity_is_overlap(self, rng):
        for _ in range(200):
            rho = build_joint_state(random_params(rng)).mat
            overlap = np.vdot(BELL, rho @ BELL).real
            assert bell_fidelity(pauli_correlators(rho)) == pytest.approx(overlap, abs=1e-12)

    @settings(max_examples=500)
    @given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1))
    def test_identity(self, xx, yy, zz):
        k = bell_correlators(xx, yy, zz)
        assert abs(witness_expectation(k) + bell_fidelity(k) - 0.5) <= 1e-12

    def test_eraser_examples(self):
        lhs, ok = eraser_criterion(pauli_correlators(projector(BELL)))
        assert lhs == pytest.approx(2) and ok
        lhs, ok = eraser_criterion(pauli_correlators(build_joint_state(EraserParams(gamma=0.0))))
        assert lhs == pytest.approx(1) and not ok
        lhs, ok = eraser_criterion(pauli_correlators(build_joint_state(EraserParams(gamma=0.8))))
        assert lhs == pytest.approx(1.8, abs=1e-12) and ok

    def test_separable_grid_never_fires(self):
        for a2 in np.linspace(0, 1, 50):
            for h2 in np.linspace(0, 1, 50):
                p = EraserParams(math.sqrt(a2), math.sqrt(1 - a2), math.sqrt(h2), math.sqrt(1 - h2) * 1j, 0.0)
                k = pauli_correlators(build_joint_state(p))
                assert bell_fidelity(k) <= 0.5 + 1e-12
                assert eraser_criterion(k)[0] <= 1 + 1e-12

    def test_h0_family_fidelity(self):
        for g in np.linspace(0, 1, 101):
            k = pauli_correlators(build_joint_state(EraserParams(gamma=g)))
            assert k.dd("xx") == pytest.approx(g, abs=1e-12)
            assert k.dd("yy") == pytest.approx(-g, abs=1e-12)
            assert bell_fidelity(k) == pytest.approx((1 + g) / 2, abs=1e-10)


class TestBridge:
    def test_bell_x_basis(self):
        d = correlators_from_conditioning(build_joint_state(EraserParams()), "x")
        assert d[0] == pytest.approx(1, abs=1e-12)

    def test_product_state_cross_terms(self):
        rho = build_joint_state(EraserParams(h=1.0, v=0.0))
        d = correlators_from_conditioning(rho, "y")
        np.testing.assert_allclose(d, 0, atol=1e-12)

    def test_partial_coherence(self):
        d = correlators_from_conditioning(build_joint_state(EraserParams(gamma=0.5)), "x")
        assert d[0] == pytest.approx(0.5, abs=1e-12)

    def test_matches_trace_contraction(self, rng):
        for _ in range(300):
            rho = build_joint_state(random_params(rng))
            k = pauli_correlators(rho)
            for j, basis in enumerate("xyz"):
                np.testing.assert_allclose(correlators_from_conditioning(rho, basis), k.d[:, j], atol=1e-9)

    def test_bad_probabilities(self):
        with pytest.raises(ValueError):
            fringe_correlators([(1, 0.6, np.eye(2) / 2), (-1, 0.6, np.eye(2) / 2)])


class TestReconstruction:
    def test_bell(self):
        r = reconstruct_state(pauli_correlators(projector(BELL)))
        np.testing.assert_allclose(r.state.mat, projector(BELL), atol=1e-12)
        assert r.adjustment == 0.0

    def test_zero_correlators(self):
        r = reconstruct_state(bell_correlators(0, 0, 0))
        np.testing.assert_allclose(r.state.mat, np.eye(4) / 4, atol=1e-15)

    def test_round_trip(self, rng):
        rho = build_joint_state(EraserParams(h=0.6, v=0.8, gamma=0.7)).mat
        assert np.max(np.abs(reconstruct_state(pauli_correlators(rho)).state.mat - rho)) <= 1e-10
        for _ in range(1000):
            rho = build_joint_state(random_params(rng)).mat
            assert np.max(np.abs(reconstruct_state(pauli_correlators(rho)).state.mat - rho)) <= 1e-10

    def test_projection_of_unphysical_input(self):
        # xx = zz = 1 with yy = +1 is outside the state space
        r = reconstruct_state(bell_correlators(1, 1, 1))
        vals = np.linalg.eigvalsh(r.state.mat)
        assert vals.min() >= -1e-12
        assert np.trace(r.state.mat).real == pytest.approx(1)
        assert r.adjustment > 0


class TestReport:
    def test_bell(self):
        rep = entanglement_report(projector(BELL))
        assert rep.concurrence == pytest.approx(1) and rep.eraser_lhs == pytest.approx(2)
        assert set(rep.flags) == {"concurrence", "negativity", "bell_fidelity", "eraser_criterion"}

    def test_separable(self):
        rep = entanglement_report(build_joint_state(EraserParams(gamma=0.0)))
        assert rep.concurrence == 0.0 and rep.flags == []

    def test_json_fields(self):
        data = json.loads(entanglement_report(build_joint_state(EraserParams(gamma=0.8))).to_json())
        assert set(data) == {"concurrence", "negativity", "bell_fidelity", "witness_expectation",
                             "eraser_lhs", "flags"}
        assert data["bell_fidelity"] == pytest.approx(0.9)
        assert data["witness_expectation"] == pytest.approx(-0.4)
