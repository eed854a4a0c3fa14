"""Fixed-step Lindblad master-equation integrator.

Convention: each collapse channel enters the generator as (r/2) A(b) rho with
A(b) rho = 2 b rho b^+ - b^+ b rho - rho b^+ b, i.e. the standard dissipator
r D[b].  Decay channels use b = |0><1| + sqrt(2)|1><2| per transmon at rate
r_minus; dephasing uses b = n (the number operator) at rate r_z.

The integration is classical RK4 on a uniform grid.  Decay channels are
folded into an effective non-Hermitian drift A = H - i G with
G = sum (r/2) b^+ b; dephasing channels with diagonal b contribute an
elementwise mask on rho, so no matrix products are needed for them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .device import LOWER, NUMBER, LatticeSpec
from .numerics import TimeGrid, max_norm

POSITIVITY_TOL = -1e-6


class IntegrationError(RuntimeError):
    """The state left the physical set (negative population, trace drift)."""


@dataclass(frozen=True)
class CollapseSet:
    """Decay and dephasing channels on a lattice.

    ops[k] is dense and acts on the full product space; decay flags select
    the A = H - iG fold-in, diagonal ops go into the dephasing mask.
    """

    decay_ops: tuple[np.ndarray, ...]
    decay_rates: tuple[float, ...]
    dephase_ops: tuple[np.ndarray, ...]
    dephase_rates: tuple[float, ...]

    def __post_init__(self):
        if len(self.decay_ops) != len(self.decay_rates):
            raise ValueError("decay ops/rates length mismatch")
        if len(self.dephase_ops) != len(self.dephase_rates):
            raise ValueError("dephase ops/rates length mismatch")
        if any(r < 0 for r in self.decay_rates + self.dephase_rates):
            raise ValueError("collapse rates must be non-negative")

    @property
    def is_empty(self) -> bool:
        return not (any(self.decay_rates) or any(self.dephase_rates))


def collapse_operators(lat: LatticeSpec, sites=None) -> CollapseSet:
    """Per-transmon decay (rate r_minus) and dephasing (rate r_z) channels.

    sites restricts the noisy transmons (default: all).  Dephasing operators
    are number operators, hence diagonal.
    """
    if sites is None:
        sites = range(lat.n_sites)
    decay_ops, decay_rates = [], []
    deph_ops, deph_rates = [], []
    for s in sites:
        tq = lat.transmons[s]
        if tq.r_minus > 0:
            decay_ops.append(lat.embed(s, LOWER))
            decay_rates.append(tq.r_minus)
        if tq.r_z > 0:
            deph_ops.append(lat.embed(s, NUMBER))
            deph_rates.append(tq.r_z)
    return CollapseSet(tuple(decay_ops), tuple(decay_rates),
                       tuple(deph_ops), tuple(deph_rates))


def _dephasing_mask(collapse: CollapseSet, dim: int) -> np.ndarray | None:
    """mask[r, c] = -sum_k (r_k/2) (n_r - n_c)^2 for diagonal channels."""
    if not collapse.dephase_ops:
        return None
    mask = np.zeros((dim, dim))
    for op, rate in zip(collapse.dephase_ops, collapse.dephase_rates):
        if max_norm(op - np.diag(np.diag(op))) > 1e-14:
            raise ValueError("dephasing operators must be diagonal")
        n = np.diag(op).real
        mask -= 0.5 * rate * (n[:, None] - n[None, :]) ** 2
    return mask


@dataclass(frozen=True)
class Trajectory:
    """States rho(t) at the sampled times; states[k] has shape (n_batch, d, d)."""

    times: np.ndarray             # (n_samples,)
    states: np.ndarray            # (n_samples, n_batch, d, d)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def evolve(h_func, rho0: np.ndarray, grid: TimeGrid,
           collapse: CollapseSet | None = None,
           sample_stride: int | None = None) -> Trajectory:
    """Integrate drho/dt = -i[H(t), rho] + dissipators with fixed-step RK4.

    rho0 may be a single (d, d) state or a batch (n, d, d); all batch members
    share the Hamiltonian, so H(t) is built once per stage.  The three RK4
    stage times per step are t, t + dt/2 and t + dt; the end-point build is
    reused as the next step's start.  Diagonal populations are checked each
    step and the run aborts if any drops below -1e-6.

    sample_stride controls storage: None keeps only the final state, k keeps
    every k-th step plus the endpoints.
    """
    rho = np.asarray(rho0, dtype=complex)
    single = rho.ndim == 2
    if single:
        rho = rho[None]
    dim = rho.shape[-1]
    if sample_stride is not None and sample_stride < 1:
        raise ValueError("sample_stride must be >= 1")

    decay_ops, decay_rates = (), ()
    mask = None
    if collapse is not None:
        decay_ops, decay_rates = collapse.decay_ops, collapse.decay_rates
        mask = _dephasing_mask(collapse, dim)
    g_decay = np.zeros((dim, dim), dtype=complex)
    for op, rate in zip(decay_ops, decay_rates):
        g_decay += 0.5 * rate * (op.conj().T @ op)
    has_decay = bool(decay_ops)

    def rhs(h, rho_b):
        a = h - 1j * g_decay if has_decay else h
        out = -1j * (a @ rho_b - rho_b @ a.conj().T)
        for op, rate in zip(decay_ops, decay_rates):
            out += rate * (op @ rho_b @ op.conj().T)
        if mask is not None:
            out += mask * rho_b
        return out

    # positivity is only meaningful for density-like batch members; Choi
    # batches also carry |a><b| operators whose diagonals may go negative
    density_like = np.array([max_norm(r - r.conj().T) < 1e-12 and
                             abs(np.trace(r) - 1.0) < 1e-12 for r in rho])
    check_pop = bool(np.any(density_like))

    dt = grid.dt
    ts = grid.times()
    kept_times, kept_states = [], []
    if sample_stride is not None:
        kept_times.append(ts[0])
        kept_states.append(rho)
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
        if check_pop:
            pmin = float(np.min(
                np.einsum("bii->bi", rho[density_like]).real))
            if pmin < POSITIVITY_TOL:
                raise IntegrationError(
                    f"population {pmin:.3e} below tolerance at "
                    f"t={t + dt:.4f} ns; reduce dt")
        if sample_stride is not None and (
                (step + 1) % sample_stride == 0 or step + 1 == grid.n_steps):
            kept_times.append(ts[step + 1])
            kept_states.append(rho)
    if sample_stride is None:
        kept_times, kept_states = [ts[-1]], [rho]
    return Trajectory(times=np.array(kept_times), states=np.stack(kept_states))


def unitary_propagate(h_func, grid: TimeGrid) -> np.ndarray:
    """Product of midpoint-rule step propagators exp(-i H(t_mid) dt).

    Second-order accurate; used as the zero-noise reference and for frame
    cross-checks.
    """
    from .numerics import expm_hermitian

    dim = h_func(grid.t0).shape[0]
    u = np.eye(dim, dtype=complex)
    dt = grid.dt
    for step in range(grid.n_steps):
        t_mid = grid.t0 + (step + 0.5) * dt
        u = expm_hermitian(h_func(t_mid), dt) @ u
    return u


def choi_from_evolution(h_func, grid: TimeGrid,
                        collapse: CollapseSet | None,
                        basis_kets: np.ndarray,
                        sample_stride: int | None = None):
    """Choi matrix of the channel restricted to a logical subspace.

    basis_kets is (d_l, d_p) row-stacked; the channel maps |a><b| through the
    full physical evolution and the Choi blocks C[d_l*a:, d_l*b:] collect the
    projected outputs.  d_l^2 initial operators are propagated in one batch.
    Returns (choi, trajectory); the trajectory keeps intermediate states when
    sample_stride is given.
    """
    d_l, d_p = basis_kets.shape
    rho0 = np.empty((d_l * d_l, d_p, d_p), dtype=complex)
    for a in range(d_l):
        for b in range(d_l):
            rho0[a * d_l + b] = np.outer(basis_kets[a], basis_kets[b].conj())
    traj = evolve(h_func, rho0, grid, collapse=collapse,
                  sample_stride=sample_stride)
    choi = _assemble_choi(traj.final, basis_kets)
    return choi, traj


def assemble_choi(final_states: np.ndarray, basis_kets: np.ndarray) -> np.ndarray:
    """Choi blocks from the propagated basis operators |a><b| (row-major)."""
    return _assemble_choi(final_states, basis_kets)


def _assemble_choi(final_states: np.ndarray, basis_kets: np.ndarray) -> np.ndarray:
    d_l = basis_kets.shape[0]
    choi = np.zeros((d_l * d_l, d_l * d_l), dtype=complex)
    for a in range(d_l):
        for b in range(d_l):
            blk = basis_kets.conj() @ final_states[a * d_l + b] @ basis_kets.T
            choi[a * d_l:(a + 1) * d_l, b * d_l:(b + 1) * d_l] = blk
    return choi


def choi_of_unitary(u: np.ndarray) -> np.ndarray:
    """Choi matrix of conjugation by a square unitary: blocks U|a><b|U^+."""
    d = u.shape[0]
    if u.shape != (d, d):
        raise ValueError("choi_of_unitary expects a square matrix")
    choi = np.zeros((d * d, d * d), dtype=complex)
    for a in range(d):
        for b in range(d):
            choi[a * d:(a + 1) * d, b * d:(b + 1) * d] = \
                np.outer(u[:, a], u[:, b].conj())
    return choi
