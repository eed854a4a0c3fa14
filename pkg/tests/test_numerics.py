import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tocgates.numerics import (TimeGrid, bessel_j, bessel_j_array,
                               expm_hermitian, from_khz, from_mhz,
                               is_hermitian, is_unitary, max_norm, rk4_step,
                               to_mhz)


def bessel_series(n: int, x: float, terms: int = 60) -> float:
    """Power-series oracle sum_m (-1)^m (x/2)^{n+2m} / (m! (n+m)!)."""
    total = 0.0
    for m in range(terms):
        total += (-1.0) ** m * (0.5 * x) ** (n + 2 * m) \
            / (math.factorial(m) * math.factorial(n + m))
    return total


class TestBessel:
    @pytest.mark.parametrize("x", [0.1, 0.5, 1.5, 1.6, 3.0, 6.5, 9.5])
    def test_against_power_series(self, x):
        for n in range(0, 21):
            assert bessel_j(n, x) == pytest.approx(bessel_series(n, x),
                                                   abs=1e-12)

    def test_negative_order_symmetry(self):
        for n in range(1, 12):
            assert bessel_j(-n, 2.3) == pytest.approx(
                (-1.0) ** n * bessel_j(n, 2.3), abs=1e-14)

    def test_negative_argument_symmetry(self):
        for n in range(0, 8):
            assert bessel_j(n, -1.7) == pytest.approx(
                (-1.0) ** n * bessel_j(n, 1.7), abs=1e-14)

    def test_sum_rule(self):
        # J_0(x) + 2 sum_k J_{2k}(x) = 1
        for x in (0.3, 1.0, 2.0):
            total = bessel_j(0, x) + 2.0 * sum(
                bessel_j(2 * k, x) for k in range(1, 21))
            assert total == pytest.approx(1.0, abs=1e-12)

    def test_at_zero(self):
        assert bessel_j(0, 0.0) == 1.0
        assert bessel_j(3, 0.0) == 0.0

    def test_truncation_tail_is_negligible(self):
        # |n| = 16 at the working modulation depths
        assert abs(bessel_j(16, 1.5)) < 1e-12
        assert abs(bessel_j(16, 1.6)) < 1e-12

    def test_domain_errors(self):
        with pytest.raises(ValueError, match="order"):
            bessel_j(65, 1.0)
        with pytest.raises(ValueError, match="argument"):
            bessel_j(0, 10.5)

    def test_array_helper(self):
        ns = np.array([-2, -1, 0, 1, 2])
        vals = bessel_j_array(ns, 1.5)
        assert vals.shape == (5,)
        assert vals[0] == pytest.approx(vals[4], abs=1e-14)
        assert vals[1] == pytest.approx(-vals[3], abs=1e-14)

    @given(n=st.integers(-30, 30), x=st.floats(-9.9, 9.9))
    @settings(max_examples=60, deadline=None)
    def test_symmetry_property(self, n, x):
        lhs = bessel_j(-n, x)
        rhs = (-1.0) ** n * bessel_j(n, x)
        assert lhs == pytest.approx(rhs, abs=1e-12)


class TestExpmHermitian:
    def test_pauli_z_rotation(self):
        sz = np.diag([1.0, -1.0]).astype(complex)
        theta = 0.83
        u = expm_hermitian(sz, theta)
        assert np.allclose(u, np.diag([np.exp(-1j * theta),
                                       np.exp(1j * theta)]), atol=1e-14)

    def test_pauli_x_rotation(self):
        sx = np.array([[0, 1], [1, 0]], dtype=complex)
        u = expm_hermitian(sx, 0.4)
        expect = math.cos(0.4) * np.eye(2) - 1j * math.sin(0.4) * sx
        assert np.allclose(u, expect, atol=1e-14)

    def test_unitarity_random(self):
        rng = np.random.default_rng(7)
        a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        h = a + a.conj().T
        assert is_unitary(expm_hermitian(h, 2.5))

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError, match="Hermitian"):
            expm_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestPredicates:
    def test_hermitian_and_unitary(self):
        assert is_hermitian(np.diag([1.0, 2.0]).astype(complex))
        assert not is_hermitian(np.array([[0, 1j], [1j, 0]]))
        assert is_unitary(np.eye(3, dtype=complex))
        assert not is_unitary(2.0 * np.eye(3, dtype=complex))

    def test_max_norm(self):
        assert max_norm(np.array([[1.0, -3.0]])) == 3.0
        assert max_norm(np.zeros((0, 2))) == 0.0


class TestUnits:
    def test_round_trip(self):
        assert to_mhz(from_mhz(16.18)) == pytest.approx(16.18, rel=1e-15)

    def test_values(self):
        assert from_mhz(1000.0) == pytest.approx(2.0 * math.pi, rel=1e-15)
        assert from_khz(4.0) == pytest.approx(from_mhz(0.004), rel=1e-15)


class TestTimeGrid:
    def test_from_span(self):
        g = TimeGrid.from_span(0.0, 10.0, 0.3)
        assert g.n_steps == 33
        assert g.n_steps * g.dt == pytest.approx(10.0, abs=1e-12)
        ts = g.times()
        assert ts[0] == 0.0
        assert ts[-1] == pytest.approx(10.0, abs=1e-12)

    def test_invariant_enforced(self):
        with pytest.raises(ValueError):
            TimeGrid(t0=0.0, t1=1.0, dt=0.3, n_steps=3)
        with pytest.raises(ValueError):
            TimeGrid.from_span(1.0, 1.0, 0.1)


class TestRk4:
    def test_fourth_order_convergence(self):
        # y' = -y + sin(t), y(0) = 1 has a smooth exact solution
        def f(t, y):
            return -y + math.sin(t)

        def exact(t):
            return 1.5 * math.exp(-t) + 0.5 * (math.sin(t) - math.cos(t))

        def run(dt):
            y, t = 1.0, 0.0
            while t < 2.0 - 1e-12:
                y = rk4_step(f, y, t, dt)
                t += dt
            return abs(y - exact(2.0))

        ratio = run(0.02) / run(0.01)
        assert 16.0 * 0.7 < ratio < 16.0 * 1.3

    def test_rejects_bad_step(self):
        with pytest.raises(ValueError):
            rk4_step(lambda t, y: y, 1.0, 0.0, -0.1)
