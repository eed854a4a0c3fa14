"""Reference operating points for the simulated devices.

Two lattices are provided: a two-transmon pair hosting one logical qubit
(S1 encoding) and a four-transmon plaquette hosting two logical qubits
(S2 encoding).  Frequencies in the config dictionaries are plain MHz/kHz;
the builders convert to rad/ns.
"""

from __future__ import annotations

import math

from .device import (DriveSpec, Encoding, LatticeSpec, cp_resonance,
                     lattice_from_config, single_gate_resonance)
from .numerics import from_mhz

#: default decoherence rate for every transmon, 4 kHz (both decay and
#: dephasing)
DEFAULT_RATE_KHZ = 4.0

#: modulation depths used for the logical drives
GAMMA_SINGLE = 1.5
GAMMA_CP = 1.6

#: named single-logical-qubit detunings (MHz)
SINGLE_GATE_DETUNING_MHZ = {"H": 29.58, "S": 25.0, "T": 15.0}

#: two-logical-qubit drive detuning (MHz)
CP_DETUNING_MHZ = 27.0


def pair_config(delta12_mhz: float = 520.0, g_mhz: float = 14.5,
                rate_khz: float = DEFAULT_RATE_KHZ) -> dict:
    """Two-transmon operating point: only the difference Delta_12 matters
    for the encoded dynamics (excitation number is conserved), so absolute
    frequencies are representative values."""
    return {
        "transmons": [
            {"omega0_mhz": 5000.0 + delta12_mhz, "alpha_mhz": 220.0,
             "r_minus_khz": rate_khz, "r_z_khz": rate_khz},
            {"omega0_mhz": 5000.0, "alpha_mhz": 210.0,
             "r_minus_khz": rate_khz, "r_z_khz": rate_khz},
        ],
        "couplings": [{"pair": [0, 1], "g_mhz": g_mhz}],
    }


def plaquette_config(delta24_mhz: float = 600.0, g24_mhz: float = 7.0,
                     g12_mhz: float = 14.5, g34_mhz: float = 14.5,
                     rate_khz: float = DEFAULT_RATE_KHZ) -> dict:
    """Four-transmon plaquette T1..T4 (sites 0..3): Delta_12 = Delta_34 =
    2*pi x 900 MHz, Delta_24 adjustable via T4."""
    w4 = 5000.0 - delta24_mhz
    return {
        "transmons": [
            {"omega0_mhz": 5900.0, "alpha_mhz": 200.0,
             "r_minus_khz": rate_khz, "r_z_khz": rate_khz},
            {"omega0_mhz": 5000.0, "alpha_mhz": 210.0,
             "r_minus_khz": rate_khz, "r_z_khz": rate_khz},
            {"omega0_mhz": w4 + 900.0, "alpha_mhz": 220.0,
             "r_minus_khz": rate_khz, "r_z_khz": rate_khz},
            {"omega0_mhz": w4, "alpha_mhz": 230.0,
             "r_minus_khz": rate_khz, "r_z_khz": rate_khz},
        ],
        "couplings": [
            {"pair": [0, 1], "g_mhz": g12_mhz},
            {"pair": [2, 3], "g_mhz": g34_mhz},
            {"pair": [1, 3], "g_mhz": g24_mhz},
        ],
    }


def pair_lattice(**kwargs) -> LatticeSpec:
    return lattice_from_config(pair_config(**kwargs))


def plaquette_lattice(**kwargs) -> LatticeSpec:
    return lattice_from_config(plaquette_config(**kwargs))


def single_gate_drive(lat: LatticeSpec, delta: float, eta: float,
                      phi0: float, gamma: float = GAMMA_SINGLE) -> DriveSpec:
    """Drive on T2 at the S1 resonance nu = Delta_12 - delta."""
    nu = single_gate_resonance(lat, delta)
    return DriveSpec.from_gamma(target=1, gamma=gamma, nu=nu,
                                phi0=phi0, eta=eta)


def cp_drive(lat4: LatticeSpec, delta2: float, eta: float,
             phi2: float, gamma: float = GAMMA_CP) -> DriveSpec:
    """Drive on T2 at the CP resonance nu = Delta_24 - alpha_2 - delta2.

    phi2 is the physical modulation phase; the effective two-level drive
    phase is phi2 + pi.
    """
    nu = cp_resonance(lat4, delta2)
    return DriveSpec.from_gamma(target=1, gamma=gamma, nu=nu,
                                phi0=phi2, eta=eta)


def single_gate_detuning(kind: str) -> float:
    try:
        return from_mhz(SINGLE_GATE_DETUNING_MHZ[kind.upper()])
    except KeyError:
        raise ValueError(f"no preset detuning for gate {kind!r}") from None


def cp_detuning() -> float:
    return from_mhz(CP_DETUNING_MHZ)


S1 = Encoding("S1")
S2 = Encoding("S2")

#: conditional phase of the reference CP gate
CP_PHASE = 0.5 * math.pi
