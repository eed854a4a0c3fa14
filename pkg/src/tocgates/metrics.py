"""Gate and state fidelity measures.

All channel fidelities go through the Choi matrix with the block convention
C[d*a:(a+1)*d, d*b:(b+1)*d] = E(|a><b|).  For a trace-preserving channel
Tr C = d; the deficit per dimension is reported as leakage out of the
logical subspace.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FidelityReport:
    """Average gate fidelity, process fidelity and leakage of one channel."""

    f_avg: float
    f_pro: float
    leakage: float
    dim: int


def gate_fidelity_trace(u: np.ndarray, v: np.ndarray) -> float:
    """|Tr(U^+ V)| / d, the phase-insensitive unitary overlap."""
    d = u.shape[0]
    if u.shape != v.shape or u.shape != (d, d):
        raise ValueError("unitaries must be square and of equal dimension")
    return float(abs(np.trace(u.conj().T @ v)) / d)


def avg_gate_fidelity_from_choi(choi: np.ndarray,
                                choi_ideal: np.ndarray) -> FidelityReport:
    """F_avg = (d F_pro + 1)/(d + 1) with F_pro = Tr(C_ideal^+ C)/d^2.

    The ideal Choi must come from a unitary (Tr C_ideal = d); the actual
    channel may be trace-decreasing on the logical subspace, in which case
    the missing weight shows up as leakage = (d - Tr C)/d.
    """
    d2 = choi.shape[0]
    d = int(round(np.sqrt(d2)))
    if d * d != d2 or choi.shape != choi_ideal.shape or choi.shape != (d2, d2):
        raise ValueError("Choi matrices must be square with d^2 rows")
    f_pro = float(np.trace(choi_ideal.conj().T @ choi).real) / d2
    f_avg = (d * f_pro + 1.0) / (d + 1.0)
    leakage = float((d - np.trace(choi).real) / d)
    return FidelityReport(f_avg=f_avg, f_pro=f_pro, leakage=leakage, dim=d)


def state_fidelity(rho: np.ndarray, psi: np.ndarray) -> float:
    """<psi| rho |psi> for a pure reference state."""
    return float(np.real(psi.conj() @ rho @ psi))


def populations(rho: np.ndarray, indices) -> np.ndarray:
    """Diagonal populations at the given basis indices plus the residual.

    The last entry is 1 - sum(listed), the weight outside the listed states.
    """
    diag = np.diag(rho).real
    vals = np.array([diag[i] for i in indices])
    return np.append(vals, 1.0 - vals.sum())
