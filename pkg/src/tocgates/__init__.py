"""Time-optimal-control gate synthesis and open-system simulation for
DFS-encoded transmon qubits."""

from .device import (DriftSpec, DriveSpec, Encoding, LatticeSpec,
                     TransmonSpec, effective_pulse_single, effective_rabi_cp,
                     effective_rabi_single, lattice_from_config)
from .lindblad import (CollapseSet, Trajectory, choi_from_evolution,
                       choi_of_unitary, collapse_operators, evolve,
                       unitary_propagate)
from .metrics import (FidelityReport, avg_gate_fidelity_from_choi,
                      gate_fidelity_trace, populations, state_fidelity)
from .numerics import TimeGrid, bessel_j, expm_hermitian, from_mhz, to_mhz
from .toc import (GateTarget, PulseSpec, SynthesisError, cp_target,
                  gate_time, ideal_evolution, named_target, optimal_detuning,
                  synthesize)

__version__ = "0.1.0"

__all__ = [
    "CollapseSet", "DriftSpec", "DriveSpec", "Encoding", "FidelityReport",
    "GateTarget", "LatticeSpec", "PulseSpec", "SynthesisError", "TimeGrid",
    "Trajectory", "TransmonSpec", "avg_gate_fidelity_from_choi", "bessel_j",
    "choi_from_evolution", "choi_of_unitary", "collapse_operators",
    "cp_target", "effective_pulse_single", "effective_rabi_cp",
    "effective_rabi_single", "evolve", "expm_hermitian", "from_mhz",
    "gate_fidelity_trace", "gate_time", "ideal_evolution",
    "lattice_from_config", "named_target", "optimal_detuning", "populations",
    "state_fidelity", "synthesize", "to_mhz", "unitary_propagate",
    "__version__",
]
