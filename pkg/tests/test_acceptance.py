"""End-to-end acceptance suite.

Each test checks one headline deliverable at its stated tolerance and prints
a single PASS/FAIL line (visible with ``pytest -s`` or on failure).  The
heavier open-system runs use the production step size dt = 0.5 ps.
"""

import math
import time

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from tocgates import presets
from tocgates.device import (DriveSpec, interaction_frame_unitary,
                             interaction_hamiltonian_pair,
                             lattice_from_config, pair_lab_hamiltonian,
                             single_gate_resonance)
from tocgates.experiments import (_cp_cell, _single_gate_final_fidelity,
                                  run_cp_dynamics_full, run_drift_robustness)
from tocgates.lindblad import evolve
from tocgates.numerics import TimeGrid, bessel_j, from_mhz, to_mhz
from tocgates.toc import (PulseSpec, cp_target, gate_time, ideal_evolution,
                          invariant_residual, named_target, overall_phase,
                          synthesize, two_level_hamiltonian)

OMEGA = from_mhz(16.18)
DT_PROD = 0.5e-3


def _report(name: str, passed: bool, detail: str) -> None:
    print(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
    assert passed, f"{name}: {detail}"


def _random_pulses(n, seed=0):
    rng = np.random.default_rng(seed)
    return [PulseSpec(omega=rng.uniform(0.02, 0.3),
                      delta=rng.uniform(-0.3, 0.3),
                      eta=rng.uniform(-0.5, 0.5),
                      phi0=rng.uniform(-math.pi, math.pi),
                      tau=rng.uniform(1.0, 40.0)) for _ in range(n)]


class TestGateTimes:
    def test_closed_form_gate_times(self):
        cases = {"H": (0.0, 21.9), "S": (25.0, 9.5), "T": (15.0, 7.8)}
        t0 = time.perf_counter()
        taus = {k: gate_time(k, OMEGA, from_mhz(d))
                for k, (d, _) in cases.items()}
        runtime = time.perf_counter() - t0
        worst = max(abs(taus[k] - ref) for k, (_, ref) in cases.items())
        detail = (", ".join(f"tau_{k} = {taus[k]:.4f} ns" for k in cases)
                  + f"; max |dev| {worst * 1e3:.1f} ps, "
                  f"runtime {runtime * 1e6:.0f} us")
        _report("gate-time closed forms (+-0.05 ns, < 1 ms)",
                worst <= 0.05 and runtime < 1e-3, detail)

    def test_hadamard_forced_detuning(self):
        pulse = synthesize(named_target("H"), OMEGA)
        delta_mhz = to_mhz(pulse.delta)
        _report("Hadamard forced detuning (29.58 +- 0.01 MHz)",
                abs(delta_mhz - 29.58) <= 0.01,
                f"delta_H = {delta_mhz:.4f} MHz")

    def test_effective_rabi_frequency(self):
        omega = 2.0 * from_mhz(14.5) * bessel_j(1, 1.5)
        rel = abs(to_mhz(omega) - 16.18) / 16.18
        _report("effective Rabi 2*g*J1(1.5) (16.18 MHz +- 0.1%)",
                rel <= 1e-3, f"Omega = {to_mhz(omega):.4f} MHz "
                f"({rel * 100:.3f}% off)")


class TestOpenSystemFidelities:
    @pytest.mark.parametrize("gate,target", [("H", 0.9989), ("S", 0.9996),
                                             ("T", 0.9997)])
    def test_single_gate_fidelity(self, gate, target):
        t0 = time.perf_counter()
        f = _single_gate_final_fidelity(gate, presets.pair_config(),
                                        dt=DT_PROD, decoherence=True,
                                        n_bessel=15)
        wall = time.perf_counter() - t0
        ok = abs(f - target) <= 1e-3 and wall <= 300.0
        _report(f"open-system F_{gate} ({target * 100:.2f}% +- 0.10 pp, "
                "<= 5 min)", ok,
                f"F = {f * 100:.3f}%, wall {wall:.1f} s")


class TestConditionalPhaseGate:
    def test_two_pair_fidelity(self):
        f = _cp_cell((600.0, 7.0, math.pi / 2, DT_PROD, True, 15))
        _report("CP two-pair fidelity (99.88% +- 0.10 pp)",
                abs(f - 0.9988) <= 1e-3, f"F = {f * 100:.3f}%")

    def test_four_transmon_fidelity(self):
        r = run_cp_dynamics_full(dt=DT_PROD, n_samples=2)
        f = r.rows[-1][-1]
        _report("CP four-transmon fidelity (99.72% +- 0.15 pp)",
                abs(f - 0.9972) <= 1.5e-3, f"F = {f * 100:.3f}%")

    def test_tau2_reference_cell(self):
        delta2 = from_mhz(27.0)
        tau2 = gate_time("CP", delta2 / 2.3929, delta2,
                         gamma_cp=math.pi / 2)
        _report("tau2 at (gamma = pi/2, delta2/Omega = 2.3929) "
                "(17.8 +- 0.1 ns)", abs(tau2 - 17.8) <= 0.1,
                f"tau2 = {tau2:.4f} ns")


class TestPropertySuite:
    def test_gamma_prime_quadrature(self):
        worst = max(abs(p.phi_minus + overall_phase(p) - p.gamma_prime)
                    for p in _random_pulses(100, seed=11))
        _report("gamma' closed form vs quadrature (< 1e-9 rad, 100 pulses)",
                worst < 1e-9, f"max deviation {worst:.2e} rad")

    def test_invariant_residual_on_synthesized_pulses(self):
        pulses = [synthesize(named_target("H"), OMEGA),
                  synthesize(named_target("S"), OMEGA, from_mhz(25.0)),
                  synthesize(named_target("T"), OMEGA, from_mhz(15.0)),
                  synthesize(cp_target(math.pi / 2), from_mhz(11.2834),
                             from_mhz(27.0))]
        worst = max(invariant_residual(
            p, TimeGrid.from_span(0.0, p.tau, p.tau / 64)) for p in pulses)
        _report("dynamical invariant residual (< 1e-8)",
                worst < 1e-8, f"max residual {worst:.2e}")

    def test_frame_consistency(self):
        # scaled-down absolute frequencies keep the lab-frame integration
        # tractable; the frame transformation itself is exact
        lat = lattice_from_config({
            "transmons": [{"omega0_mhz": 600.0, "alpha_mhz": 220.0},
                          {"omega0_mhz": 80.0, "alpha_mhz": 210.0}],
            "couplings": [{"pair": [0, 1], "g_mhz": 14.5}]})
        drive = DriveSpec.from_gamma(
            1, 1.5, nu=single_gate_resonance(lat, from_mhz(25.0)),
            phi0=0.7, eta=0.31)

        def propagate(h_func, t1):
            def rhs(t, y):
                return (-1j * h_func(t) @ y.reshape(9, 9)).ravel()
            sol = solve_ivp(rhs, (0.0, t1),
                            np.eye(9, dtype=complex).ravel(),
                            method="DOP853", rtol=1e-11, atol=1e-11)
            return sol.y[:, -1].reshape(9, 9)

        t1 = 25.0
        u_lab = propagate(
            lambda t: pair_lab_hamiltonian(lat, 0, 1, drive, t), t1)
        u_int = propagate(
            lambda t: interaction_hamiltonian_pair(lat, 0, 1, drive, t, 20),
            t1)
        dev = np.max(np.abs(
            u_lab - interaction_frame_unitary(lat, 0, 1, drive, t1) @ u_int))
        _report("lab vs Bessel-series frame consistency (< 1e-6, t <= 25 ns)",
                dev < 1e-6, f"max |U_lab - V U_int| = {dev:.2e}")

    def test_zero_noise_lindblad_equals_unitary(self):
        pulse = synthesize(named_target("S"), OMEGA, from_mhz(25.0))
        psi0 = np.array([1.0, 1.0], dtype=complex) / math.sqrt(2.0)
        rho0 = np.outer(psi0, psi0.conj())
        grid = TimeGrid.from_span(0.0, pulse.tau, 0.25e-3)
        rho = evolve(lambda t: two_level_hamiltonian(pulse, t), rho0, grid,
                     collapse=None).final[0]
        u = ideal_evolution(pulse)
        dev = np.max(np.abs(rho - u @ rho0 @ u.conj().T))
        _report("zero-noise master equation vs unitary (< 1e-8)",
                dev < 1e-8, f"max deviation {dev:.2e}")

    def test_phase_gate_times_vs_root_solve(self):
        # independent oracle: solve eta*tau = 2*phi- + 2*pi*k for chi with
        # brentq, one bracket per winding, and keep the fastest solution
        def root_solve(target, om, de):
            best = math.inf
            for k in range(-3, 4):
                rhs = 2.0 * target.phi_minus + 2.0 * math.pi * k

                def f(chi):
                    tau = 2.0 * target.gamma_prime * math.sin(chi) / om
                    return (de + om / math.tan(chi)) * tau - rhs

                for lo, hi in ((1e-6, math.pi / 2 - 1e-9),
                               (math.pi / 2 + 1e-9, math.pi - 1e-6)):
                    if f(lo) * f(hi) > 0:
                        continue
                    chi = brentq(f, lo, hi, xtol=1e-14)
                    tau = 2.0 * target.gamma_prime * math.sin(chi) / om
                    if 1e-9 < tau < best:
                        best = tau
            return best

        worst = 0.0
        for kind in ("S", "T"):
            target = named_target(kind)
            for om in np.linspace(0.05, 0.3, 20):
                for de in np.linspace(0.0, 0.25, 20):
                    closed = gate_time(kind, om, de)
                    rel = abs(root_solve(target, om, de) - closed) / closed
                    worst = max(worst, rel)
        _report("tau_S/tau_T closed forms vs root solve "
                "(< 1e-6 rel, 20x20 grid)", worst < 1e-6,
                f"max relative deviation {worst:.2e}")


class TestDriftRobustness:
    def test_fidelity_peaks_at_zero_drift(self):
        r = run_drift_robustness("H", n_points=41, dt=1e-3)
        betas = np.array([row[0] for row in r.rows])
        fids = np.array([row[1] for row in r.rows])
        i0 = int(np.argmin(np.abs(betas)))
        ok = (np.argmax(fids) == i0 and fids[0] < fids[i0]
              and fids[-1] < fids[i0])
        _report("drift robustness: F(0) is the 41-point max, "
                "F(+-0.1) < F(0)", ok,
                f"F(0) = {fids[i0] * 100:.3f}%, "
                f"F(-0.1) = {fids[0] * 100:.3f}%, "
                f"F(+0.1) = {fids[-1] * 100:.3f}%")
