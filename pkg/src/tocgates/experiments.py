"""Named, reproducible simulation recipes with CSV/JSON artifact output.

Every recipe is a pure function of its configuration: no randomness, fixed
grids, fixed-step integration, so identical inputs give bit-identical CSV
text.  Sweeps can fan out over a process pool; cells are independent and the
aggregation order is fixed, so parallel output equals serial output.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import presets
from .device import (DriftSpec, DriveSpec, Encoding, LatticeSpec,
                     bessel_phase_factor, drift_perturbation,
                     effective_rabi_cp, effective_rabi_single,
                     lattice_from_config, rotating_frame_hamiltonian_single,
                     sideband_stark_shift)
from .lindblad import (CollapseSet, assemble_choi, choi_of_unitary,
                       collapse_operators, evolve)
from .metrics import avg_gate_fidelity_from_choi, state_fidelity
from .numerics import (TimeGrid, bessel_j_array, expm_hermitian, from_mhz,
                       to_mhz)
from .toc import (PulseSpec, cp_target, gate_time, ideal_evolution_at,
                  named_target, synthesize)

#: default integration steps (ns): single-gate dynamics run at 0.5 ps, the
#: wider sweeps and the 81-dim model at 1 ps (validated against 0.5 ps)
DT_FINE = 0.5e-3
DT_COARSE = 1.0e-3

DEFAULT_BESSEL_ORDER = 15

S1 = Encoding("S1")
S2 = Encoding("S2")


# -- artifact container --------------------------------------------------

def _fmt(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".9g")


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class RecipeResult:
    """Tabular recipe output plus the metadata sidecar content."""

    recipe: str
    columns: tuple[str, ...]
    rows: list[tuple]
    metadata: dict = field(default_factory=dict)

    def to_csv_text(self) -> str:
        lines = [",".join(self.columns)]
        for row in self.rows:
            lines.append(",".join(_fmt(v) for v in row))
        return "\n".join(lines) + "\n"

    def write(self, out_path) -> None:
        out_path = str(out_path)
        with open(out_path, "w") as fh:
            fh.write(self.to_csv_text())
        sidecar = dict(self.metadata)
        sidecar.update(recipe=self.recipe, columns=list(self.columns),
                       n_rows=len(self.rows))
        with open(out_path + ".meta.json", "w") as fh:
            json.dump(sidecar, fh, indent=2, sort_keys=True)
            fh.write("\n")


# -- single-logical-qubit recipes ----------------------------------------

@lru_cache(maxsize=256)
def _calibrated_frame_detuning(g: float, delta01: float, delta: float,
                               eta: float, phi0: float, tau: float,
                               gamma_mod: float, n_bessel: int) -> float:
    """Frame detuning whose dressed value realizes the designed `delta`.

    The off-resonant modulation sidebands Stark-shift the logical splitting,
    so the bare resonance condition nu = Delta - delta misses the designed
    working point.  Seeded by the second-order shift formula and refined by
    minimizing the closed-system gate error of the exact logical two-level
    model, exactly the drive-frequency calibration done on hardware.
    """
    from scipy.optimize import minimize_scalar

    pulse = PulseSpec(omega=effective_rabi_single(g, gamma_mod), delta=delta,
                      eta=eta, phi0=phi0, tau=tau)
    u_target = ideal_evolution_at(pulse, tau)
    grid = TimeGrid.from_span(0.0, tau, 4e-3)
    mids = grid.times()[:-1] + 0.5 * grid.dt
    orders = np.arange(-n_bessel, n_bessel + 1)
    weights = g * bessel_j_array(orders, gamma_mod) \
        * np.exp(-1j * orders * phi0) * np.exp(1j * gamma_mod * math.sin(phi0))

    def infidelity(delta_frame: float) -> float:
        nu = delta01 - delta_frame
        # g K(t) e^{i (Delta - delta_f) t}: harmonic n rotates at (1-n)nu -
        # n eta, so n = 1 is the resonant Rabi term
        coup = np.exp(np.outer(1j * mids, (1 - orders) * nu - orders * eta)) \
            @ weights
        u = np.eye(2, dtype=complex)
        half = 0.5 * delta_frame
        for c in coup:
            h = np.array([[half, c], [np.conj(c), -half]])
            u = expm_hermitian(h, grid.dt) @ u
        return 1.0 - (abs(np.trace(u_target.conj().T @ u)) / 2.0) ** 2

    seed = delta - sideband_stark_shift(g, gamma_mod, delta01 - delta, eta,
                                        n_bessel)
    res = minimize_scalar(infidelity, bounds=(seed - 0.01, seed + 0.01),
                          method="bounded",
                          options={"xatol": 1e-6})
    return float(res.x)


def _single_gate_setup(kind: str, cfg: dict,
                       gamma_mod: float = presets.GAMMA_SINGLE):
    """Lattice, synthesized pulse and modulation drive for one named gate.

    The drive frequency is calibrated so the dressed logical detuning equals
    the pulse's designed detuning (see _calibrated_frame_detuning)."""
    lat = lattice_from_config(cfg)
    omega = effective_rabi_single(lat.g(0, 1), gamma_mod)
    target = named_target(kind)
    if target.chi is not None:
        pulse = synthesize(target, omega)  # detuning forced by chi
    else:
        pulse = synthesize(target, omega, delta=presets.single_gate_detuning(kind))
    delta_frame = _calibrated_frame_detuning(
        lat.g(0, 1), lat.delta(0, 1), pulse.delta, pulse.eta, pulse.phi0,
        pulse.tau, gamma_mod, DEFAULT_BESSEL_ORDER)
    nu = lat.delta(0, 1) - delta_frame
    drive = DriveSpec.from_gamma(target=1, gamma=gamma_mod, nu=nu,
                                 phi0=pulse.phi0, eta=pulse.eta)
    return lat, pulse, drive


def _single_gate_hfunc(lat: LatticeSpec, pulse: PulseSpec, drive: DriveSpec,
                       n_bessel: int, drift: DriftSpec | None = None):
    h_drift = drift_perturbation(drift) if drift is not None else None
    delta_frame = lat.delta(0, 1) - drive.nu

    def h(t: float) -> np.ndarray:
        hm = rotating_frame_hamiltonian_single(lat, drive, t, delta_frame,
                                               n_bessel=n_bessel)
        if h_drift is not None:
            hm = hm + h_drift
        return hm

    return h


def _single_gate_initial(kind: str) -> np.ndarray:
    """Dynamics initial state: |0>_L for H, (|0>_L + |1>_L)/sqrt2 for the
    phase gates (which act trivially on basis kets)."""
    kets = S1.logical_kets()
    if kind.upper() == "H":
        return kets[0]
    return (kets[0] + kets[1]) / math.sqrt(2.0)


def run_single_gate_dynamics(kind: str, config: dict | None = None,
                             dt: float = DT_FINE, decoherence: bool = True,
                             n_samples: int = 400,
                             n_bessel: int = DEFAULT_BESSEL_ORDER) -> RecipeResult:
    """Populations and running gate fidelity over one gate; columns
    t_ns, P0, P1, F with F the Choi-based average gate fidelity against the
    ideal propagator at the same instant."""
    cfg = presets.pair_config() if config is None else config
    t0 = time.perf_counter()
    lat, pulse, drive = _single_gate_setup(kind, cfg)
    h = _single_gate_hfunc(lat, pulse, drive, n_bessel)
    grid = TimeGrid.from_span(0.0, pulse.tau, dt)
    collapse = collapse_operators(lat) if decoherence else None

    kets = S1.logical_kets()
    psi0 = _single_gate_initial(kind)
    rho0 = np.empty((5, lat.dim, lat.dim), dtype=complex)
    for a in range(2):
        for b in range(2):
            rho0[2 * a + b] = np.outer(kets[a], kets[b].conj())
    rho0[4] = np.outer(psi0, psi0.conj())

    stride = max(1, grid.n_steps // max(1, n_samples))
    traj = evolve(h, rho0, grid, collapse=collapse, sample_stride=stride)

    i0, i1 = S1.logical_indices()
    rows = []
    for t, states in zip(traj.times, traj.states):
        choi = assemble_choi(states[:4], kets)
        choi_id = choi_of_unitary(ideal_evolution_at(pulse, t))
        rep = avg_gate_fidelity_from_choi(choi, choi_id)
        diag = np.diag(states[4]).real
        rows.append((t, diag[i0], diag[i1], rep.f_avg))

    meta = _base_meta(cfg, dt=dt, decoherence=decoherence, gate=kind.upper(),
                      n_bessel=n_bessel, pulse=_pulse_meta(pulse),
                      wall_time_s=round(time.perf_counter() - t0, 3))
    return RecipeResult("single_gate_dynamics", ("t_ns", "P0", "P1", "F"),
                        rows, meta)


def _single_gate_final_fidelity(kind: str, cfg: dict, dt: float,
                                decoherence: bool, n_bessel: int,
                                drift_beta: float = 0.0) -> float:
    lat, pulse, drive = _single_gate_setup(kind, cfg)
    drift = DriftSpec(beta=drift_beta, omega_ref=pulse.omega) \
        if drift_beta else None
    h = _single_gate_hfunc(lat, pulse, drive, n_bessel, drift=drift)
    grid = TimeGrid.from_span(0.0, pulse.tau, dt)
    collapse = collapse_operators(lat) if decoherence else None
    kets = S1.logical_kets()
    rho0 = np.empty((4, lat.dim, lat.dim), dtype=complex)
    for a in range(2):
        for b in range(2):
            rho0[2 * a + b] = np.outer(kets[a], kets[b].conj())
    traj = evolve(h, rho0, grid, collapse=collapse)
    choi = assemble_choi(traj.final, kets)
    choi_id = choi_of_unitary(ideal_evolution_at(pulse, pulse.tau))
    return avg_gate_fidelity_from_choi(choi, choi_id).f_avg


def _sweep_cell_single(args) -> float:
    kind, d12, g, dt, decoherence, n_bessel, rate_khz = args
    cfg = presets.pair_config(delta12_mhz=d12, g_mhz=g, rate_khz=rate_khz)
    return _single_gate_final_fidelity(kind, cfg, dt, decoherence, n_bessel)


def run_fidelity_sweep(kind: str,
                       delta12_mhz: np.ndarray | None = None,
                       g12_mhz: np.ndarray | None = None,
                       dt: float = DT_COARSE, decoherence: bool = True,
                       rate_khz: float = presets.DEFAULT_RATE_KHZ,
                       n_bessel: int = DEFAULT_BESSEL_ORDER,
                       jobs: int = 1) -> RecipeResult:
    """Gate fidelity over the (Delta_12, g_12) plane; columns
    delta12_mhz, g12_mhz, F.  Default grid: 26 x 21 points over
    [400, 650] x [10, 20] MHz."""
    if delta12_mhz is None:
        delta12_mhz = np.linspace(400.0, 650.0, 26)
    if g12_mhz is None:
        g12_mhz = np.linspace(10.0, 20.0, 21)
    t0 = time.perf_counter()
    cells = [(kind, float(d), float(g), dt, decoherence, n_bessel, rate_khz)
             for d in delta12_mhz for g in g12_mhz]
    values = _map_cells(_sweep_cell_single, cells, jobs)
    rows = [(c[1], c[2], f) for c, f in zip(cells, values)]
    meta = _base_meta({"rate_khz": rate_khz}, dt=dt, decoherence=decoherence,
                      gate=kind.upper(), n_bessel=n_bessel, jobs=jobs,
                      axis1={"name": "delta12_mhz",
                             "values": [float(v) for v in delta12_mhz]},
                      axis2={"name": "g12_mhz",
                             "values": [float(v) for v in g12_mhz]},
                      wall_time_s=round(time.perf_counter() - t0, 3))
    return RecipeResult("fidelity_sweep", ("delta12_mhz", "g12_mhz", "F"),
                        rows, meta)


def _robustness_cell(args) -> float:
    kind, beta, cfg, dt, decoherence, n_bessel = args
    return _single_gate_final_fidelity(kind, cfg, dt, decoherence, n_bessel,
                                       drift_beta=beta)


def run_drift_robustness(kind: str = "H",
                         beta_range: tuple[float, float] = (-0.1, 0.1),
                         n_points: int = 41, config: dict | None = None,
                         dt: float = DT_COARSE, decoherence: bool = True,
                         n_bessel: int = DEFAULT_BESSEL_ORDER,
                         jobs: int = 1) -> RecipeResult:
    """Gate fidelity under a static frequency drift +-beta*Omega on the pair;
    columns beta, F."""
    cfg = presets.pair_config() if config is None else config
    t0 = time.perf_counter()
    betas = np.linspace(beta_range[0], beta_range[1], n_points)
    cells = [(kind, float(b), cfg, dt, decoherence, n_bessel) for b in betas]
    values = _map_cells(_robustness_cell, cells, jobs)
    rows = [(b, f) for b, f in zip(betas, values)]
    meta = _base_meta(cfg, dt=dt, decoherence=decoherence, gate=kind.upper(),
                      n_bessel=n_bessel, jobs=jobs,
                      beta_range=list(beta_range), n_points=n_points,
                      wall_time_s=round(time.perf_counter() - t0, 3))
    return RecipeResult("drift_robustness", ("beta", "F"), rows, meta)


# -- two-logical-qubit (CP) recipes --------------------------------------

def run_tau2_surface(gamma_values: np.ndarray | None = None,
                     ratio_values: np.ndarray | None = None,
                     omega: float | None = None,
                     g24_mhz: float = 7.0) -> RecipeResult:
    """Conditional-phase gate time tau2 in units of 1/Omega over the
    (gamma, delta2/Omega) plane; columns gamma_rad, ratio, tau2_omega.
    Infeasible cells (negative radicand) are nan."""
    if gamma_values is None:
        gamma_values = np.linspace(0.05, 2.0 * math.pi - 0.05, 50)
    if ratio_values is None:
        ratio_values = np.linspace(0.0, 4.0, 41)
    t0 = time.perf_counter()
    if omega is None:
        omega = effective_rabi_cp(from_mhz(g24_mhz), presets.GAMMA_CP)
    rows = []
    for g in gamma_values:
        for r in ratio_values:
            try:
                tau2 = gate_time("CP", omega, delta=float(r) * omega,
                                 gamma_cp=float(g))
                val = tau2 * omega
            except ValueError:
                val = math.nan
            rows.append((float(g), float(r), val))
    meta = _base_meta({"g24_mhz": g24_mhz}, omega_mhz=to_mhz(omega),
                      axis1={"name": "gamma_rad",
                             "values": [float(v) for v in gamma_values]},
                      axis2={"name": "ratio",
                             "values": [float(v) for v in ratio_values]},
                      wall_time_s=round(time.perf_counter() - t0, 3))
    return RecipeResult("tau2_surface", ("gamma_rad", "ratio", "tau2_omega"),
                        rows, meta)


def _cp_setup(cfg: dict, gamma_cp: float,
              gamma_mod: float = presets.GAMMA_CP):
    """Lattice, effective pulse and drive for the conditional-phase gate.

    The effective two-level drive phase is phi2 + pi, so the physical
    modulation phase is pulse.phi0 - pi.
    """
    lat = lattice_from_config(cfg)
    omega = effective_rabi_cp(lat.g(1, 3), gamma_mod)
    delta2 = presets.cp_detuning()
    pulse = synthesize(cp_target(gamma_cp), omega, delta=delta2)
    nu = lat.delta(1, 3) - lat.transmons[1].alpha - delta2
    drive = DriveSpec.from_gamma(target=1, gamma=gamma_mod, nu=nu,
                                 phi0=pulse.phi0 - math.pi, eta=pulse.eta)
    return lat, pulse, drive


class _CpGenerator:
    """Fast builder for the CP-frame Hamiltonian on the two-excitation
    subspace (10 of 81 product states).

    Every coupling term is a constant matrix times a time-dependent scalar;
    the constant matrices are projected onto the subspace once.  Total
    excitation is conserved by the coherent dynamics and decay only leaks
    weight out of the subspace, so populations and fidelities computed here
    equal the full 81-dim values.
    """

    def __init__(self, lat4: LatticeSpec, drive: DriveSpec, delta2: float,
                 n_bessel: int, include_spectators: bool):
        if lat4.n_sites != 4:
            raise ValueError("CP model expects a 4-site lattice")
        occs = [(a, b, c, d)
                for a in range(3) for b in range(3)
                for c in range(3) for d in range(3) if a + b + c + d == 2]
        self.occs = occs
        self.indices = [lat4.product_index(o) for o in occs]
        self.dim = len(occs)
        self.lat = lat4
        self.drive = drive
        self.n_bessel = n_bessel
        self.include_spectators = include_spectators

        from .device import E01, E10, E12, E21
        ix = np.ix_(self.indices, self.indices)

        def pair_mats(i, j):
            exch = (lat4.embed(i, E10) @ lat4.embed(j, E01))[ix]
            up_j = (lat4.embed(i, E10) @ lat4.embed(j, E12))[ix]
            up_i = (lat4.embed(i, E21) @ lat4.embed(j, E01))[ix]
            return exch, up_j, up_i

        self.m42 = pair_mats(3, 1)
        self.m12 = pair_mats(0, 1)
        self.m34 = pair_mats(2, 3)
        self.alpha = [tq.alpha for tq in lat4.transmons]
        self.d42 = lat4.delta(3, 1)
        self.d12 = lat4.delta(0, 1)
        self.d34 = lat4.delta(2, 3)
        self.g42 = lat4.g(3, 1)
        self.g12 = lat4.g(0, 1)
        self.g34 = lat4.g(2, 3)

        theta = np.zeros(self.dim)
        theta[occs.index((0, 2, 0, 0))] = 0.5 * delta2
        theta[occs.index((0, 1, 0, 1))] = -0.5 * delta2
        self.theta = theta
        self.s_diag = np.diag(theta)

    def state_index(self, occ) -> int:
        return self.occs.index(tuple(occ))

    def __call__(self, t: float) -> np.ndarray:
        k = bessel_phase_factor(self.drive, t, self.n_bessel)
        a = self.alpha
        exch, up_j, up_i = self.m42
        half = self.g42 * k * np.exp(1j * self.d42 * t) * (
            exch + math.sqrt(2) * np.exp(1j * a[1] * t) * up_j
            + math.sqrt(2) * np.exp(-1j * a[3] * t) * up_i)
        if self.include_spectators:
            exch, up_j, up_i = self.m12
            half = half + self.g12 * k * np.exp(1j * self.d12 * t) * (
                exch + math.sqrt(2) * np.exp(1j * a[1] * t) * up_j
                + math.sqrt(2) * np.exp(-1j * a[0] * t) * up_i)
            exch, up_j, up_i = self.m34
            half = half + self.g34 * np.exp(1j * self.d34 * t) * (
                exch + math.sqrt(2) * np.exp(1j * a[3] * t) * up_j
                + math.sqrt(2) * np.exp(-1j * a[2] * t) * up_i)
        h = half + half.conj().T
        u = np.exp(1j * self.theta * t)
        return h * (u.conj()[:, None] * u[None, :]) + self.s_diag

    def loss_and_mask(self, sites) -> tuple[np.ndarray, CollapseSet]:
        """Collapse data restricted to the subspace.

        Decay recycles population into lower-excitation states outside the
        subspace, so inside it only the anti-Hermitian drift
        G = sum (r/2) b^+ b survives; b^+ b is diagonal, so its restriction
        is exact.  Dephasing operators are diagonal and project exactly.
        """
        full = collapse_operators(self.lat, sites=sites)
        ix = np.ix_(self.indices, self.indices)
        g_loss = np.zeros((self.dim, self.dim), dtype=complex)
        for op, rate in zip(full.decay_ops, full.decay_rates):
            g_loss += 0.5 * rate * (op.conj().T @ op)[ix]
        dephase = CollapseSet(decay_ops=(), decay_rates=(),
                              dephase_ops=tuple(op[ix] for op in full.dephase_ops),
                              dephase_rates=full.dephase_rates)
        return g_loss, dephase


def _cp_evolve(gen: _CpGenerator, lat: LatticeSpec, noise_sites,
               rho0: np.ndarray, grid: TimeGrid, decoherence: bool,
               sample_stride: int | None):
    """Integrate the CP master equation on the two-excitation subspace.

    The decay recycling term has no weight inside the subspace, so the
    projected equation closes: non-Hermitian drift plus dephasing mask.
    The result equals the full 81-dim evolution projected onto the subspace.
    """
    if not decoherence:
        return evolve(gen, rho0, grid, collapse=None,
                      sample_stride=sample_stride)
    g_loss, dephase = gen.loss_and_mask(noise_sites)
    return _evolve_with_loss(gen, g_loss, dephase, rho0, grid, sample_stride)


def _evolve_with_loss(h_func, g_loss: np.ndarray, dephase: CollapseSet,
                      rho0: np.ndarray, grid: TimeGrid,
                      sample_stride: int | None):
    """evolve() variant with an extra anti-Hermitian drift -i*g_loss
    (population leaks out of the represented subspace, never recycled)."""
    from .lindblad import Trajectory, _dephasing_mask

    rho = np.asarray(rho0, dtype=complex)
    if rho.ndim == 2:
        rho = rho[None]
    mask = _dephasing_mask(dephase, rho.shape[-1])

    def rhs(h, rho_b):
        a = h - 1j * g_loss
        out = -1j * (a @ rho_b - rho_b @ a.conj().T)
        if mask is not None:
            out += mask * rho_b
        return out

    dt = grid.dt
    ts = grid.times()
    kept_t, kept_s = [], []
    if sample_stride is not None:
        kept_t.append(ts[0])
        kept_s.append(rho)
    h_t = h_func(ts[0])
    for step in range(grid.n_steps):
        t = ts[step]
        h_mid = h_func(t + 0.5 * dt)
        h_end = h_func(t + dt)
        k1 = rhs(h_t, rho)
        k2 = rhs(h_mid, rho + 0.5 * dt * k1)
        k3 = rhs(h_mid, rho + 0.5 * dt * k2)
        k4 = rhs(h_end, rho + dt * k3)
        rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        h_t = h_end
        if sample_stride is not None and (
                (step + 1) % sample_stride == 0 or step + 1 == grid.n_steps):
            kept_t.append(ts[step + 1])
            kept_s.append(rho)
    if sample_stride is None:
        kept_t, kept_s = [ts[-1]], [rho]
    return Trajectory(times=np.array(kept_t), states=np.stack(kept_s))


def _cp_initial(gen: _CpGenerator) -> tuple[np.ndarray, dict]:
    """(|10>_L + |11>_L)/sqrt2 in subspace coordinates plus the index map."""
    idx = {
        "P00": gen.state_index((1, 0, 1, 0)),
        "P01": gen.state_index((1, 0, 0, 1)),
        "P10": gen.state_index((0, 1, 1, 0)),
        "P11": gen.state_index((0, 1, 0, 1)),
        "Pa": gen.state_index((0, 2, 0, 0)),
    }
    psi = np.zeros(gen.dim, dtype=complex)
    psi[idx["P10"]] = 1.0 / math.sqrt(2.0)
    psi[idx["P11"]] = 1.0 / math.sqrt(2.0)
    return psi, idx


def _cp_ideal_state(gen: _CpGenerator, pulse: PulseSpec, idx: dict,
                    t: float) -> np.ndarray:
    """Ideal evolving state: |10>_L untouched, (|a>, |11>_L) pair under the
    effective two-level propagator."""
    u = ideal_evolution_at(pulse, t)
    psi = np.zeros(gen.dim, dtype=complex)
    psi[idx["P10"]] = 1.0 / math.sqrt(2.0)
    psi[idx["Pa"]] = u[0, 1] / math.sqrt(2.0)
    psi[idx["P11"]] = u[1, 1] / math.sqrt(2.0)
    return psi


def _run_cp(cfg: dict, gamma_cp: float, dt: float, decoherence: bool,
            include_spectators: bool, noise_sites, n_bessel: int,
            sample_stride: int | None):
    lat, pulse, drive = _cp_setup(cfg, gamma_cp)
    gen = _CpGenerator(lat, drive, pulse.delta, n_bessel, include_spectators)
    psi0, idx = _cp_initial(gen)
    rho0 = np.outer(psi0, psi0.conj())
    grid = TimeGrid.from_span(0.0, pulse.tau, dt)
    traj = _cp_evolve(gen, lat, noise_sites, rho0, grid, decoherence,
                      sample_stride)
    return gen, pulse, idx, traj


def _cp_cell(args) -> float:
    d24, g24, gamma_cp, dt, decoherence, n_bessel = args
    cfg = presets.plaquette_config(delta24_mhz=d24, g24_mhz=g24)
    gen, pulse, idx, traj = _run_cp(cfg, gamma_cp, dt, decoherence,
                                    include_spectators=False,
                                    noise_sites=(1, 3), n_bessel=n_bessel,
                                    sample_stride=None)
    psi_id = _cp_ideal_state(gen, pulse, idx, pulse.tau)
    return state_fidelity(traj.final[0], psi_id)


def run_cp_sweep(delta24_mhz: np.ndarray | None = None,
                 g24_mhz: np.ndarray | None = None,
                 gamma_cp: float = presets.CP_PHASE,
                 dt: float = DT_COARSE, decoherence: bool = True,
                 n_bessel: int = DEFAULT_BESSEL_ORDER,
                 jobs: int = 1) -> RecipeResult:
    """Final-state fidelity of the CP gate over the (Delta_24, g_24) plane,
    two-pair model (spectator couplings off, noise on the driven pair);
    columns delta24_mhz, g24_mhz, F."""
    if delta24_mhz is None:
        delta24_mhz = np.linspace(550.0, 650.0, 5)
    if g24_mhz is None:
        g24_mhz = np.linspace(5.0, 9.0, 5)
    t0 = time.perf_counter()
    cells = [(float(d), float(g), gamma_cp, dt, decoherence, n_bessel)
             for d in delta24_mhz for g in g24_mhz]
    values = _map_cells(_cp_cell, cells, jobs)
    rows = [(c[0], c[1], f) for c, f in zip(cells, values)]
    meta = _base_meta({"gamma_cp": gamma_cp}, dt=dt, decoherence=decoherence,
                      n_bessel=n_bessel, jobs=jobs,
                      axis1={"name": "delta24_mhz",
                             "values": [float(v) for v in delta24_mhz]},
                      axis2={"name": "g24_mhz",
                             "values": [float(v) for v in g24_mhz]},
                      wall_time_s=round(time.perf_counter() - t0, 3))
    return RecipeResult("cp_sweep", ("delta24_mhz", "g24_mhz", "F"),
                        rows, meta)


def run_cp_dynamics(config: dict | None = None,
                    gamma_cp: float = presets.CP_PHASE,
                    dt: float = DT_COARSE, decoherence: bool = True,
                    include_spectators: bool = True,
                    noise_sites=None, n_samples: int = 400,
                    n_bessel: int = DEFAULT_BESSEL_ORDER) -> RecipeResult:
    """Population and state-fidelity dynamics of the CP gate; columns
    t_ns, P00, P01, P10, P11, Pa, F_S.  Defaults model the full four-transmon
    plaquette with noise on every transmon."""
    cfg = presets.plaquette_config() if config is None else config
    if noise_sites is None:
        noise_sites = (0, 1, 2, 3) if include_spectators else (1, 3)
    t0 = time.perf_counter()
    lat, pulse, drive = _cp_setup(cfg, gamma_cp)
    gen = _CpGenerator(lat, drive, pulse.delta, n_bessel, include_spectators)
    psi0, idx = _cp_initial(gen)
    grid = TimeGrid.from_span(0.0, pulse.tau, dt)
    stride = max(1, grid.n_steps // max(1, n_samples))
    traj = _cp_evolve(gen, lat, noise_sites, np.outer(psi0, psi0.conj()),
                      grid, decoherence, sample_stride=stride)
    rows = []
    keys = ("P00", "P01", "P10", "P11", "Pa")
    for t, states in zip(traj.times, traj.states):
        rho = states[0]
        diag = np.diag(rho).real
        psi_id = _cp_ideal_state(gen, pulse, idx, t)
        rows.append((t,) + tuple(diag[idx[k]] for k in keys)
                    + (state_fidelity(rho, psi_id),))
    meta = _base_meta(cfg, dt=dt, decoherence=decoherence,
                      gamma_cp=gamma_cp, n_bessel=n_bessel,
                      include_spectators=include_spectators,
                      noise_sites=list(noise_sites),
                      pulse=_pulse_meta(pulse),
                      wall_time_s=round(time.perf_counter() - t0, 3))
    return RecipeResult("cp_dynamics",
                        ("t_ns", "P00", "P01", "P10", "P11", "Pa", "F_S"),
                        rows, meta)


def run_cp_dynamics_full(config: dict | None = None, **kwargs) -> RecipeResult:
    """Four-transmon CP dynamics with spectator couplings and noise on all
    transmons (the strictest model)."""
    kwargs.setdefault("include_spectators", True)
    kwargs.setdefault("noise_sites", (0, 1, 2, 3))
    return run_cp_dynamics(config=config, **kwargs)


# -- validation ----------------------------------------------------------

def validate_setup(config: dict | None = None,
                   n_bessel: int = DEFAULT_BESSEL_ORDER) -> dict:
    """Cheap invariant suite on a device configuration.

    Checks synthesis feasibility and self-consistency for H, S, T, the CP
    pulse when the lattice has four sites, Hermiticity of the generated
    Hamiltonians, and the Bessel-series truncation tail.  Returns a report
    dict with per-check results; 'ok' is the conjunction.
    """
    from .numerics import TimeGrid as _TG
    from .numerics import bessel_j, is_hermitian
    from .toc import invariant_residual

    cfg = presets.pair_config() if config is None else config
    checks = []

    def record(name, passed, detail=""):
        checks.append({"name": name, "passed": bool(passed), "detail": detail})

    try:
        lat = lattice_from_config(cfg)
    except Exception as exc:
        record("config_parses", False, str(exc))
        return {"ok": False, "checks": checks}
    record("config_parses", True)

    is_pair = lat.n_sites == 2
    if is_pair:
        for kind in ("H", "S", "T"):
            try:
                lat_k, pulse, drive = _single_gate_setup(kind, cfg)
                grid = _TG.from_span(0.0, pulse.tau, pulse.tau / 64)
                res = invariant_residual(pulse, grid)
                record(f"synthesize_{kind}", res < 1e-8,
                       f"invariant residual {res:.2e}, tau {pulse.tau:.4f} ns")
                hm = rotating_frame_hamiltonian_single(
                    lat_k, drive, 0.37 * pulse.tau,
                    lat_k.delta(0, 1) - drive.nu, n_bessel=n_bessel)
                record(f"hermitian_{kind}", is_hermitian(hm))
            except Exception as exc:
                record(f"synthesize_{kind}", False, str(exc))
        gamma_mod = presets.GAMMA_SINGLE
    else:
        try:
            lat4, pulse, drive = _cp_setup(cfg, presets.CP_PHASE)
            gen = _CpGenerator(lat4, drive, pulse.delta, n_bessel, True)
            record("synthesize_CP", True, f"tau2 {pulse.tau:.4f} ns")
            record("hermitian_CP", is_hermitian(gen(0.41 * pulse.tau)))
        except Exception as exc:
            record("synthesize_CP", False, str(exc))
        gamma_mod = presets.GAMMA_CP

    tail = abs(bessel_j(n_bessel + 1, gamma_mod))
    record("bessel_truncation", tail < 1e-12,
           f"|J_{n_bessel + 1}({gamma_mod})| = {tail:.2e}")

    return {"ok": all(c["passed"] for c in checks), "checks": checks}


# -- shared plumbing ------------------------------------------------------

def _map_cells(func, cells, jobs: int):
    if jobs is None or jobs <= 1 or len(cells) <= 1:
        return [func(c) for c in cells]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, cells, chunksize=1))


def _pulse_meta(pulse: PulseSpec) -> dict:
    return {
        "omega_mhz": to_mhz(pulse.omega),
        "delta_mhz": to_mhz(pulse.delta),
        "eta_rad_per_ns": pulse.eta,
        "phi0_rad": pulse.phi0,
        "tau_ns": pulse.tau,
    }


def _base_meta(cfg: dict, **extra) -> dict:
    meta = {"config_hash": config_hash(cfg), "config": cfg}
    meta.update(extra)
    return meta
