"""Transmon-lattice model: lab/interaction/rotating-frame Hamiltonians.

Transmons are truncated at three levels (|0>, |1>, |2>); a parametric
frequency modulation on one transmon, omega_j(t) = omega_j0 +
eps*cos(nu*t + phi(t)), produces tunable coupling whose sidebands carry
Bessel-function weights J_n(Gamma) with Gamma = eps/(nu + phi_dot).

Site indices are 0-based; conventional transmon labels T1..T4 map to
sites 0..3.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .numerics import bessel_j, bessel_j_array, from_khz, from_mhz
from .toc import PulseSpec

SQRT2 = math.sqrt(2.0)

# single-site operators (3 levels)
E01 = np.zeros((3, 3), dtype=complex); E01[0, 1] = 1.0
E10 = E01.conj().T.copy()
E12 = np.zeros((3, 3), dtype=complex); E12[1, 2] = 1.0
E21 = E12.conj().T.copy()
LOWER = E01 + SQRT2 * E12  # b = |0><1| + sqrt(2) |1><2|
NUMBER = LOWER.conj().T @ LOWER


class ConfigError(ValueError):
    """Malformed or inconsistent device configuration."""


@dataclass(frozen=True)
class TransmonSpec:
    """Bare frequency, anharmonicity and decoherence rates of one transmon."""

    omega0: float          # rad/ns
    alpha: float           # rad/ns, > 0
    levels: int = 3
    r_minus: float = 0.0   # decay rate, rad/ns
    r_z: float = 0.0       # dephasing rate, rad/ns

    def __post_init__(self):
        if self.alpha <= 0:
            raise ConfigError("anharmonicity alpha must be positive")
        if self.levels < 3:
            raise ConfigError("at least 3 levels are required")
        if self.r_minus < 0 or self.r_z < 0:
            raise ConfigError("decoherence rates must be non-negative")

    def level_energy(self, m: int, omega: float | None = None) -> float:
        """Energy of level m: omega*m - alpha/2 * m*(m-1)."""
        w = self.omega0 if omega is None else omega
        return w * m - 0.5 * self.alpha * m * (m - 1)


@dataclass(frozen=True)
class LatticeSpec:
    """Ordered transmons plus pairwise capacitive couplings g_ij."""

    transmons: tuple[TransmonSpec, ...]
    couplings: dict[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.transmons)
        for (i, j), g in self.couplings.items():
            if not 0 <= i < j < n:
                raise ConfigError(f"coupling key ({i}, {j}) must satisfy 0 <= i < j < {n}")
            if g <= 0:
                raise ConfigError(f"coupling g[{i},{j}] must be positive")

    @property
    def n_sites(self) -> int:
        return len(self.transmons)

    @property
    def dim(self) -> int:
        return 3 ** self.n_sites

    def g(self, i: int, j: int) -> float:
        key = (i, j) if i < j else (j, i)
        if key not in self.couplings:
            raise ConfigError(f"no coupling defined between sites {i} and {j}")
        return self.couplings[key]

    def delta(self, i: int, j: int) -> float:
        """Frequency difference Delta_ij = omega_i0 - omega_j0."""
        return self.transmons[i].omega0 - self.transmons[j].omega0

    def embed(self, site: int, op: np.ndarray) -> np.ndarray:
        """Single-site operator lifted to the product space."""
        mats = [np.eye(3, dtype=complex)] * self.n_sites
        mats[site] = op
        out = mats[0]
        for m in mats[1:]:
            out = np.kron(out, m)
        return out

    def product_index(self, occupations) -> int:
        idx = 0
        for m in occupations:
            idx = 3 * idx + m
        return idx

    def product_ket(self, occupations) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.product_index(occupations)] = 1.0
        return v


@dataclass(frozen=True)
class DriveSpec:
    """Parametric frequency modulation applied to one transmon.

    omega_target(t) = omega0 + epsilon * cos(nu*t + phi(t)) with
    phi(t) = phi0 + eta*t.  Gamma = epsilon/(nu + eta) is constant because
    the phase slope eta is constant.
    """

    target: int
    epsilon: float
    nu: float
    phi0: float = 0.0
    eta: float = 0.0

    def __post_init__(self):
        if self.epsilon < 0:
            raise ConfigError("modulation amplitude epsilon must be >= 0")
        if abs(self.nu + self.eta) < 1e-12:
            raise ConfigError("nu + eta must not vanish (Gamma undefined)")

    @classmethod
    def from_gamma(cls, target: int, gamma: float, nu: float,
                   phi0: float = 0.0, eta: float = 0.0) -> "DriveSpec":
        return cls(target=target, epsilon=gamma * (nu + eta), nu=nu,
                   phi0=phi0, eta=eta)

    @property
    def gamma(self) -> float:
        return self.epsilon / (self.nu + self.eta)

    def phi(self, t: float) -> float:
        return self.phi0 + self.eta * t

    def phase_integral(self, t: float) -> float:
        """Integral of epsilon*cos(nu t' + phi(t')) dt' from 0 to t."""
        return self.gamma * (math.sin(self.nu * t + self.phi(t))
                             - math.sin(self.phi0))


@dataclass(frozen=True)
class Encoding:
    """Single-excitation DFS encodings S1 (one pair) and S2 (two pairs)."""

    kind: str

    def __post_init__(self):
        if self.kind not in ("S1", "S2"):
            raise ConfigError("encoding kind must be 'S1' or 'S2'")

    @property
    def n_sites(self) -> int:
        return 2 if self.kind == "S1" else 4

    @property
    def logical_states(self) -> tuple[tuple[int, ...], ...]:
        if self.kind == "S1":
            return ((1, 0), (0, 1))
        return ((1, 0, 1, 0), (1, 0, 0, 1), (0, 1, 1, 0), (0, 1, 0, 1))

    @property
    def auxiliary_state(self) -> tuple[int, ...] | None:
        return (0, 2, 0, 0) if self.kind == "S2" else None

    @property
    def dim(self) -> int:
        return 3 ** self.n_sites

    def logical_indices(self) -> list[int]:
        return [_pidx(s) for s in self.logical_states]

    def auxiliary_index(self) -> int | None:
        aux = self.auxiliary_state
        return None if aux is None else _pidx(aux)

    def logical_kets(self) -> np.ndarray:
        """Row-stacked logical kets, shape (d_logical, d_physical)."""
        kets = np.zeros((len(self.logical_states), self.dim), dtype=complex)
        for r, idx in enumerate(self.logical_indices()):
            kets[r, idx] = 1.0
        return kets


def _pidx(occupations) -> int:
    idx = 0
    for m in occupations:
        idx = 3 * idx + m
    return idx


@dataclass(frozen=True)
class DriftSpec:
    """Crosstalk-induced frequency drift +-beta*Omega on a transmon pair."""

    beta: float
    omega_ref: float

    def __post_init__(self):
        if abs(self.beta) > 0.5:
            raise ConfigError("|beta| must not exceed 0.5")


def logical_projector(enc: Encoding, include_auxiliary: bool = False) -> np.ndarray:
    """Orthogonal projector onto the logical span (optionally plus |a>)."""
    idx = enc.logical_indices()
    if include_auxiliary and enc.auxiliary_index() is not None:
        idx = idx + [enc.auxiliary_index()]
    p = np.zeros((enc.dim, enc.dim), dtype=complex)
    for k in idx:
        p[k, k] = 1.0
    return p


def drift_perturbation(d: DriftSpec) -> np.ndarray:
    """beta*Omega*(n1 - n2) on the 9-dim pair space."""
    n1 = np.kron(NUMBER, np.eye(3))
    n2 = np.kron(np.eye(3), NUMBER)
    return d.beta * d.omega_ref * (n1 - n2)


def _check_pair(lat: LatticeSpec, i: int, j: int, drive: DriveSpec | None):
    if i == j or not (0 <= i < lat.n_sites and 0 <= j < lat.n_sites):
        raise ConfigError(f"invalid pair ({i}, {j})")
    if drive is not None and drive.target != j:
        raise ConfigError("the modulated transmon must be the pair's j index")


def pair_lab_hamiltonian(lat: LatticeSpec, i: int, j: int,
                         drive: DriveSpec, t: float) -> np.ndarray:
    """Lab-frame pair Hamiltonian with the driven frequency evaluated at t.

    Self-energies omega_k|1><1| + (2 omega_k - alpha_k)|2><2| plus the
    capacitive coupling g_ij (|10><01| + sqrt2 |11><02| + sqrt2 |20><11| + h.c.).
    """
    _check_pair(lat, i, j, drive)
    g = lat.g(i, j)
    ti, tj = lat.transmons[i], lat.transmons[j]
    wj = tj.omega0 + drive.epsilon * math.cos(drive.nu * t + drive.phi(t))
    di = np.diag([ti.level_energy(m) for m in range(3)]).astype(complex)
    dj = np.diag([tj.level_energy(m, omega=wj) for m in range(3)]).astype(complex)
    h = np.kron(di, np.eye(3)) + np.kron(np.eye(3), dj)
    coup = np.outer(_ket2(1, 0), _ket2(0, 1)) \
        + SQRT2 * np.outer(_ket2(1, 1), _ket2(0, 2)) \
        + SQRT2 * np.outer(_ket2(2, 0), _ket2(1, 1))
    h += g * (coup + coup.conj().T)
    return h


def _ket2(a: int, b: int) -> np.ndarray:
    v = np.zeros(9, dtype=complex)
    v[3 * a + b] = 1.0
    return v


def interaction_frame_unitary(lat: LatticeSpec, i: int, j: int,
                              drive: DriveSpec, t: float) -> np.ndarray:
    """Diagonal frame unitary U^I_i(t) x U^I_j(t) with the driven phase
    integrated analytically; U^I(0) = I by the sin(phi0) reference."""
    _check_pair(lat, i, j, drive)
    ti, tj = lat.transmons[i], lat.transmons[j]
    phases_i = np.array([ti.level_energy(m) * t for m in range(3)])
    base_j = np.array([tj.level_energy(m) * t for m in range(3)])
    mod_j = drive.phase_integral(t) * np.arange(3)
    return np.kron(np.diag(np.exp(-1j * phases_i)),
                   np.diag(np.exp(-1j * (base_j + mod_j))))


def bessel_phase_factor(drive: DriveSpec, t: float, n_bessel: int) -> complex:
    """Truncated Jacobi-Anger series K(t) = sum_n J_n(Gamma) e^{-i n (nu t + phi)},
    times the constant e^{i Gamma sin(phi0)} reference that makes the
    interaction frame start at the identity."""
    if n_bessel < 1:
        raise ConfigError("n_bessel must be >= 1")
    ns = np.arange(-n_bessel, n_bessel + 1)
    jn = bessel_j_array(ns, drive.gamma)
    theta = drive.nu * t + drive.phi(t)
    k = np.sum(jn * np.exp(-1j * ns * theta))
    return complex(k * np.exp(1j * drive.gamma * math.sin(drive.phi0)))


def _pair_coupling_terms(lat: LatticeSpec, i: int, j: int, t: float,
                         k_factor: complex) -> np.ndarray:
    """Non-Hermitian half of the interaction-picture coupling for pair (i, j):
    g_ij e^{i Delta_ij t} K (|10><01| + sqrt2 e^{i a_j t}|11><02|
    + sqrt2 e^{-i a_i t}|20><11|), lifted to the full lattice space."""
    g = lat.g(i, j)
    ai, aj = lat.transmons[i].alpha, lat.transmons[j].alpha
    dij = lat.delta(i, j)
    exch = lat.embed(i, E10) @ lat.embed(j, E01)
    up_j = lat.embed(i, E10) @ lat.embed(j, E12)
    up_i = lat.embed(i, E21) @ lat.embed(j, E01)
    return g * k_factor * np.exp(1j * dij * t) * (
        exch
        + SQRT2 * np.exp(1j * aj * t) * up_j
        + SQRT2 * np.exp(-1j * ai * t) * up_i)


def interaction_hamiltonian_pair(lat: LatticeSpec, i: int, j: int,
                                 drive: DriveSpec, t: float,
                                 n_bessel: int = 15) -> np.ndarray:
    """Interaction-picture pair Hamiltonian with the Bessel series truncated
    at |n| <= n_bessel.  9x9 and Hermitian."""
    _check_pair(lat, i, j, drive)
    if lat.n_sites != 2:
        raise ConfigError("interaction_hamiltonian_pair expects a 2-site lattice")
    k = bessel_phase_factor(drive, t, n_bessel)
    half = _pair_coupling_terms(lat, i, j, t, k)
    return half + half.conj().T


def rotating_frame_hamiltonian_single(lat: LatticeSpec, drive: DriveSpec,
                                      t: float, delta: float,
                                      n_bessel: int = 15) -> np.ndarray:
    """Pair Hamiltonian in the logical rotating frame (S1 encoding on sites
    0, 1); this is the generator integrated by the master equation.

    (delta/2)(|0L><0L| - |1L><1L|) + g {K e^{i Delta t} (e^{-i delta t}
    |0L><1L| + sqrt2 e^{i a_j t}|11><02| + sqrt2 e^{-i a_i t}|20><11|) + h.c.}
    """
    _check_pair(lat, 0, 1, drive)
    if lat.n_sites != 2:
        raise ConfigError("S1 rotating frame expects a 2-site lattice")
    g = lat.g(0, 1)
    a0, a1 = lat.transmons[0].alpha, lat.transmons[1].alpha
    d01 = lat.delta(0, 1)
    k = bessel_phase_factor(drive, t, n_bessel)
    k0, k1 = _ket2(1, 0), _ket2(0, 1)  # |0>_L, |1>_L
    diag = 0.5 * delta * (np.outer(k0, k0) - np.outer(k1, k1))
    half = g * k * np.exp(1j * d01 * t) * (
        np.exp(-1j * delta * t) * np.outer(k0, k1)
        + SQRT2 * np.exp(1j * a1 * t) * np.outer(_ket2(1, 1), _ket2(0, 2))
        + SQRT2 * np.exp(-1j * a0 * t) * np.outer(_ket2(2, 0), _ket2(1, 1)))
    return diag + half + half.conj().T


def effective_pulse_single(g: float, gamma_mod: float, delta: float,
                           eta: float, phi0: float, tau: float) -> PulseSpec:
    """Effective logical-qubit pulse: Omega = 2 g J1(Gamma).

    The modulation frequency must meet the resonance nu = Delta - delta;
    use `single_gate_resonance` to obtain it.
    """
    if not 0.0 < gamma_mod <= 2.5:
        raise ConfigError("Gamma must lie in (0, 2.5]")
    omega = effective_rabi_single(g, gamma_mod)
    return PulseSpec(omega=omega, delta=delta, eta=eta, phi0=phi0, tau=tau)


def effective_rabi_single(g: float, gamma_mod: float) -> float:
    """Omega = 2 g J1(Gamma) for the S1 exchange transition."""
    return 2.0 * g * float(bessel_j_array(np.array([1]), gamma_mod)[0])


def effective_rabi_cp(g: float, gamma_mod: float) -> float:
    """Omega = 2 sqrt(2) g J1(Gamma') for the |11>_L <-> |a> transition.

    The sqrt(2) is the b-operator matrix element <2|b^+|1>; it is required to
    make the reduced two-level model consistent (the published ratio
    delta2/Omega = 2.3929 at delta2 = 2pi x 27 MHz, g24 = 2pi x 7 MHz,
    Gamma' = 1.6 pins it).
    """
    return SQRT2 * effective_rabi_single(g, gamma_mod)


def single_gate_resonance(lat: LatticeSpec, delta: float) -> float:
    """Modulation frequency nu = Delta_01 - delta for S1 logical drive."""
    return lat.delta(0, 1) - delta


def sideband_stark_shift(g: float, gamma_mod: float, nu: float, eta: float,
                         n_bessel: int = 15) -> float:
    """Second-order shift of the logical splitting from the off-resonant
    Jacobi-Anger sidebands (every modulation harmonic except the resonant
    n = 1 term).  The dressed logical detuning is delta + this shift, so a
    calibrated drive subtracts it from the frame detuning.
    """
    shift = 0.0
    for n in range(-n_bessel, n_bessel + 1):
        if n == 1:
            continue
        c = g * bessel_j(abs(n), gamma_mod)
        if n < 0 and abs(n) % 2 == 1:
            c = -c
        w = (1 - n) * nu - n * eta
        shift += 2.0 * c * c / w
    return shift


def cp_resonance(lat4: LatticeSpec, delta2: float) -> float:
    """Modulation frequency nu = Delta_24 - alpha_2 - delta2 for the CP gate
    (sites 1 and 3 in 0-based labels)."""
    return lat4.delta(1, 3) - lat4.transmons[1].alpha - delta2


def cp_interaction_hamiltonian(lat4: LatticeSpec, drive: DriveSpec, t: float,
                               delta2: float, n_bessel: int = 15,
                               include_spectators: bool = False) -> np.ndarray:
    """Four-transmon Hamiltonian in the |a>/|11>_L rotating frame (81x81).

    The driven pair is (T4, T2) = sites (3, 1); with include_spectators the
    interaction-picture terms of the (T1, T2) and (T3, T4) couplings are
    added before the frame conjugation.
    """
    if lat4.n_sites != 4:
        raise ConfigError("CP model expects a 4-site lattice")
    if drive.target != 1:
        raise ConfigError("the CP drive modulates T2 (site 1)")
    enc = Encoding("S2")
    ia = enc.auxiliary_index()
    i11 = enc.logical_indices()[3]

    k = bessel_phase_factor(drive, t, n_bessel)
    half = _pair_coupling_terms(lat4, 3, 1, t, k)
    if include_spectators:
        half = half + _pair_coupling_terms(lat4, 0, 1, t, k)
        half = half + _pair_coupling_terms(lat4, 2, 3, t, 1.0 + 0.0j)
    h = half + half.conj().T

    # conjugate by U_A = exp[i (delta2/2) t (|a><a| - |11><11|)] and add the
    # frame-derivative diagonal
    theta = np.zeros(lat4.dim)
    theta[ia] = 0.5 * delta2 * t
    theta[i11] = -0.5 * delta2 * t
    u = np.exp(1j * theta)
    h = h * (u.conj()[:, None] * u[None, :])
    h[ia, ia] += 0.5 * delta2
    h[i11, i11] -= 0.5 * delta2
    return h


# -- configuration files ------------------------------------------------

def lattice_from_config(cfg: dict) -> LatticeSpec:
    """LatticeSpec from a JSON-style mapping; frequencies are plain MHz/kHz
    values and convert to rad/ns internally."""
    try:
        transmons = tuple(
            TransmonSpec(
                omega0=from_mhz(tq["omega0_mhz"]),
                alpha=from_mhz(tq["alpha_mhz"]),
                levels=int(tq.get("levels", 3)),
                r_minus=from_khz(tq.get("r_minus_khz", 0.0)),
                r_z=from_khz(tq.get("r_z_khz", 0.0)),
            )
            for tq in cfg["transmons"])
        couplings = {tuple(c["pair"]): from_mhz(c["g_mhz"])
                     for c in cfg.get("couplings", [])}
    except KeyError as exc:
        raise ConfigError(f"device config missing required field {exc}") from None
    return LatticeSpec(transmons=transmons, couplings=couplings)


def drive_from_config(cfg: dict) -> DriveSpec:
    d = cfg["drive"]
    nu = from_mhz(d["nu_mhz"])
    eta = d.get("eta", 0.0)
    if "gamma" in d:
        return DriveSpec.from_gamma(int(d["target"]), float(d["gamma"]),
                                    nu, d.get("phi0", 0.0), eta)
    return DriveSpec(target=int(d["target"]), epsilon=from_mhz(d["epsilon_mhz"]),
                     nu=nu, phi0=d.get("phi0", 0.0), eta=eta)


def load_device_config(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
