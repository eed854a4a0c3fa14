import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tocgates.lindblad import choi_of_unitary
from tocgates.metrics import (avg_gate_fidelity_from_choi,
                              gate_fidelity_trace, populations,
                              state_fidelity)


def random_unitary(d, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))


class TestGateFidelityTrace:
    def test_self_overlap_is_one(self):
        for seed in range(4):
            u = random_unitary(3, seed)
            assert gate_fidelity_trace(u, u) == pytest.approx(1.0)

    def test_global_phase_insensitive(self):
        u = random_unitary(2, 7)
        assert gate_fidelity_trace(u, np.exp(1j * 0.83) * u) \
            == pytest.approx(1.0)

    def test_orthogonal(self):
        sx = np.array([[0, 1], [1, 0]], dtype=complex)
        assert gate_fidelity_trace(np.eye(2, dtype=complex), sx) == 0.0

    def test_shape_check(self):
        with pytest.raises(ValueError):
            gate_fidelity_trace(np.eye(2, dtype=complex),
                                np.eye(3, dtype=complex))


class TestAvgGateFidelity:
    def test_identity_channel(self):
        c = choi_of_unitary(np.eye(2, dtype=complex))
        rep = avg_gate_fidelity_from_choi(c, c)
        assert rep.f_pro == pytest.approx(1.0)
        assert rep.f_avg == pytest.approx(1.0)
        assert rep.dim == 2

    def test_relation_between_f_avg_and_f_pro(self):
        u = random_unitary(2, 1)
        v = random_unitary(2, 2)
        rep = avg_gate_fidelity_from_choi(choi_of_unitary(u),
                                          choi_of_unitary(v))
        assert rep.f_avg == pytest.approx((2.0 * rep.f_pro + 1.0) / 3.0)
        # f_pro between unitaries equals |Tr(U^+ V)|^2 / d^2
        tr = abs(np.trace(v.conj().T @ u)) ** 2 / 4.0
        assert rep.f_pro == pytest.approx(tr, abs=1e-12)

    def test_leakage_of_trace_decreasing_channel(self):
        c = choi_of_unitary(np.eye(2, dtype=complex))
        rep = avg_gate_fidelity_from_choi(0.9 * c, c)
        assert rep.leakage == pytest.approx(0.1)

    def test_shape_check(self):
        with pytest.raises(ValueError):
            avg_gate_fidelity_from_choi(np.eye(3, dtype=complex),
                                        np.eye(3, dtype=complex))

    @given(st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_range_property(self, seed):
        u = random_unitary(2, seed)
        v = random_unitary(2, seed + 1)
        rep = avg_gate_fidelity_from_choi(choi_of_unitary(u),
                                          choi_of_unitary(v))
        assert 0.0 <= rep.f_pro <= 1.0 + 1e-12
        assert 1.0 / 3.0 - 1e-12 <= rep.f_avg <= 1.0 + 1e-12


class TestStateFidelity:
    def test_pure_state(self):
        psi = np.array([1.0, 1.0], dtype=complex) / math.sqrt(2.0)
        rho = np.outer(psi, psi.conj())
        assert state_fidelity(rho, psi) == pytest.approx(1.0)
        orth = np.array([1.0, -1.0], dtype=complex) / math.sqrt(2.0)
        assert state_fidelity(rho, orth) == pytest.approx(0.0, abs=1e-14)

    def test_mixed_state(self):
        rho = 0.5 * np.eye(2, dtype=complex)
        psi = np.array([1.0, 0.0], dtype=complex)
        assert state_fidelity(rho, psi) == pytest.approx(0.5)


class TestPopulations:
    def test_residual(self):
        rho = np.diag([0.5, 0.3, 0.2]).astype(complex)
        p = populations(rho, [0, 1])
        assert p[0] == pytest.approx(0.5)
        assert p[1] == pytest.approx(0.3)
        assert p[-1] == pytest.approx(0.2)
