"""Two-level time-optimal-control (TOC) engine.

Square pulses with constant amplitude Omega, constant detuning delta and a
linear drive phase phi(t) = phi0 + eta*t realize arbitrary single-qubit gates
in a single step.  The mixing angle chi obeys cot(chi) = (eta - delta)/Omega,
the accumulated rotation is gamma' = Omega*tau / (2 sin chi), and the phase
budget is fixed by eta*tau = 2*phi_minus (mod 2*pi).  This module builds the
Hamiltonians, evaluates the closed-form evolution operator and the invariant
trajectory, synthesizes pulses for gate targets, and evaluates the
closed-form gate times for the S, T, H and CP gates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from .numerics import TimeGrid, max_norm

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

#: winding numbers examined when matching eta*tau = 2*phi_minus + 2*pi*k
_WINDINGS = range(-4, 5)


class SynthesisError(ValueError):
    """No TOC pulse exists for the requested target/detuning branch."""


def wrap_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    w = math.fmod(a + math.pi, 2.0 * math.pi)
    if w <= 0.0:
        w += 2.0 * math.pi
    return w - math.pi


@dataclass(frozen=True)
class PulseSpec:
    """One square TOC segment: amplitude, detuning, phase slope, duration.

    All frequencies in rad/ns, times in ns, angles in rad.
    """

    omega: float
    delta: float
    eta: float
    phi0: float
    tau: float

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError("drive amplitude omega must be positive")
        if self.tau <= 0:
            raise ValueError("pulse duration tau must be positive")

    @property
    def chi(self) -> float:
        """Mixing angle in (0, pi), from cot(chi) = (eta - delta)/omega."""
        return math.atan2(self.omega, self.eta - self.delta)

    def phi(self, t: float) -> float:
        return self.phi0 + self.eta * t

    @property
    def phi_minus(self) -> float:
        """Half the accumulated drive phase, [phi(tau) - phi(0)]/2."""
        return 0.5 * self.eta * self.tau

    @property
    def phi_plus(self) -> float:
        return self.phi0 + 0.5 * self.eta * self.tau

    @property
    def gamma_prime(self) -> float:
        """Closed-form rotation angle Omega*tau / (2 sin chi)."""
        return self.omega * self.tau / (2.0 * math.sin(self.chi))


@dataclass(frozen=True)
class GateTarget:
    """Target-unitary parameters (gamma', chi, phi_minus, phi(0)).

    chi may be None when the rotation angle gamma' is a multiple of pi, in
    which case the target unitary is diagonal and chi is a free synthesis
    parameter fixed by the detuning.
    """

    gamma_prime: float
    chi: float | None
    phi_minus: float
    phi0: float

    def __post_init__(self):
        g = math.fmod(self.gamma_prime, 2.0 * math.pi)
        if g <= 0.0:
            g += 2.0 * math.pi
        object.__setattr__(self, "gamma_prime", g)
        if self.chi is not None and not 0.0 < self.chi < math.pi:
            raise ValueError("chi must lie in (0, pi)")
        object.__setattr__(self, "phi_minus", wrap_angle(self.phi_minus))
        object.__setattr__(self, "phi0", wrap_angle(self.phi0))

    def unitary(self, chi: float | None = None) -> np.ndarray:
        """The target unitary diag(e^{-i phi-}, e^{i phi-}) * U_g."""
        chi = self.chi if chi is None else chi
        g, pm, p0 = self.gamma_prime, self.phi_minus, self.phi0
        if chi is None:
            if abs(math.sin(g)) > 1e-12:
                raise ValueError("chi is required for a non-diagonal target")
            chi = 0.5 * math.pi  # unused: sin(gamma') = 0
        ug = math.cos(g) * np.eye(2, dtype=complex) + 1j * math.sin(g) * np.array(
            [[math.cos(chi), -math.sin(chi) * np.exp(-1j * p0)],
             [-math.sin(chi) * np.exp(1j * p0), -math.cos(chi)]])
        return np.diag([np.exp(-1j * pm), np.exp(1j * pm)]) @ ug


#: standard single-logical-qubit targets
NAMED_TARGETS = {
    "H": GateTarget(gamma_prime=0.5 * math.pi, chi=0.25 * math.pi,
                    phi_minus=math.pi, phi0=math.pi),
    "S": GateTarget(gamma_prime=math.pi, chi=None,
                    phi_minus=-0.75 * math.pi, phi0=0.0),
    "T": GateTarget(gamma_prime=math.pi, chi=None,
                    phi_minus=-0.875 * math.pi, phi0=0.0),
}


def named_target(kind: str) -> GateTarget:
    try:
        return NAMED_TARGETS[kind.upper()]
    except KeyError:
        raise ValueError(f"unknown gate kind {kind!r}; expected one of "
                         f"{sorted(NAMED_TARGETS)}") from None


def cp_target(gamma: float) -> GateTarget:
    """Target for the |11>_L <-> |a> Rabi loop imprinting phase gamma.

    A full loop (gamma' = pi) with phi_minus = gamma - pi leaves |11>_L with
    the conditional phase e^{i gamma}.  The effective drive phase starts at
    phi(0) = pi because the slow Jacobi-Anger term enters with phi = phi2 + pi.
    """
    if not 0.0 < gamma < 2.0 * math.pi:
        raise ValueError("conditional phase gamma must lie in (0, 2*pi)")
    return GateTarget(gamma_prime=math.pi, chi=None,
                      phi_minus=gamma - math.pi, phi0=math.pi)


def two_level_hamiltonian(p: PulseSpec, t: float) -> np.ndarray:
    """H(t) = 1/2 [[delta, Omega e^{-i phi}], [Omega e^{i phi}, -delta]]."""
    ph = np.exp(1j * p.phi(t))
    return 0.5 * np.array([[p.delta, p.omega / ph],
                           [p.omega * ph, -p.delta]], dtype=complex)


def overall_phase(p: PulseSpec) -> float:
    """Accumulated overall phase gamma(tau) of the dressed-state pair.

    Quadrature of (2 eta sin^2(chi/2) - delta) / (2 cos chi) over the pulse;
    at chi = pi/2 (eta = delta) the integrand is an exact 0/0 limit and the
    simplified constant form applies.  Equals gamma' - phi_minus.
    """
    chi = p.chi
    c = math.cos(chi)
    if abs(c) < 1e-6:
        return p.gamma_prime - p.phi_minus
    s2 = math.sin(0.5 * chi) ** 2
    val, _ = quad(lambda _t: (2.0 * p.eta * s2 - p.delta) / (2.0 * c),
                  0.0, p.tau, limit=200)
    return val


def ideal_evolution_at(p: PulseSpec, t: float) -> np.ndarray:
    """Exact propagator U(t) of the TOC pulse at an intermediate time.

    In the frame rotating with the drive phase the Hamiltonian is the
    constant 1/2 [(delta - eta) sigma_z + Omega sigma_x].
    """
    h_rot = 0.5 * ((p.delta - p.eta) * SIGMA_Z + p.omega * SIGMA_X)
    w = 0.5 * math.hypot(p.delta - p.eta, p.omega)
    # exp(-i h_rot t) analytically: h_rot has eigenvalues +/- w
    u_rot = math.cos(w * t) * np.eye(2) - 1j * math.sin(w * t) * h_rot / w
    v_t = np.diag([np.exp(-0.5j * p.phi(t)), np.exp(0.5j * p.phi(t))])
    v_0 = np.diag([np.exp(-0.5j * p.phi0), np.exp(0.5j * p.phi0)])
    return v_t @ u_rot @ v_0.conj().T


def ideal_evolution(p: PulseSpec) -> np.ndarray:
    """Closed-form U(tau): cos(gamma') and sin(gamma') blocks with the
    boundary phases phi+- = [phi(tau) +- phi(0)]/2."""
    chi, g = p.chi, p.gamma_prime
    pm, pp = p.phi_minus, p.phi_plus
    off = math.sin(chi) * np.exp(-1j * (pp - math.pi))
    u = math.cos(g) * np.diag([np.exp(-1j * pm), np.exp(1j * pm)]) \
        + 1j * math.sin(g) * np.array(
            [[math.cos(chi) * np.exp(-1j * pm), off],
             [np.conj(off), -math.cos(chi) * np.exp(1j * pm)]])
    return u


def invariant_trajectory(p: PulseSpec, grid: TimeGrid):
    """Sampled dressed-state angles (chi, xi, gamma) along the pulse.

    Under the TOC constants chi is constant and xi(t) = phi(t) - pi.
    """
    ts = grid.times()
    chi = np.full_like(ts, p.chi)
    xi = p.phi0 + p.eta * ts - math.pi
    gamma_rate = overall_phase(p) / p.tau
    return chi, xi, gamma_rate * ts


def _invariant_op(chi: float, xi: float) -> np.ndarray:
    return 0.5 * np.array(
        [[math.cos(chi), math.sin(chi) * np.exp(-1j * xi)],
         [math.sin(chi) * np.exp(1j * xi), -math.cos(chi)]])


def invariant_residual(p: PulseSpec, grid: TimeGrid) -> float:
    """Max norm of i*dI/dt - [H, I] over the grid, mu = 1.

    Vanishes (< 1e-8) exactly when the pulse satisfies the TOC constraints.
    """
    chi = p.chi
    s = math.sin(chi)
    res = 0.0
    for t in grid.times():
        xi = p.phi(t) - math.pi
        i_op = _invariant_op(chi, xi)
        di = 0.5 * p.eta * s * np.array(
            [[0.0, -1j * np.exp(-1j * xi)], [1j * np.exp(1j * xi), 0.0]])
        h = two_level_hamiltonian(p, t)
        res = max(res, max_norm(1j * di - (h @ i_op - i_op @ h)))
    return res


def _branch_solutions(gamma_prime: float, phi_minus: float,
                      omega: float, delta: float):
    """All (tau, chi, eta, k) solving the TOC system at fixed detuning.

    Eliminating eta and tau leaves (delta/omega) sin(chi) + cos(chi) = A_k
    with A_k = (phi_minus + pi*k)/gamma'; each admissible winding k yields up
    to two chi roots.
    """
    a = delta / omega
    sols = []
    for k in _WINDINGS:
        big_a = (phi_minus + math.pi * k) / gamma_prime
        disc = a * a - big_a * big_a + 1.0
        if disc < 0.0:
            continue
        root = math.sqrt(disc)
        for sgn in (1.0, -1.0):
            s = (a * big_a + sgn * root) / (1.0 + a * a)
            if s <= 1e-12 or s > 1.0 + 1e-12:
                continue
            s = min(s, 1.0)
            c = big_a - a * s
            chi = math.atan2(s, c)
            tau = 2.0 * gamma_prime * s / omega
            eta = delta + omega * c / s
            sols.append((tau, chi, eta, k))
    sols.sort(key=lambda x: x[0])
    return sols


def synthesize(target: GateTarget, omega: float,
               delta: float | None = None) -> PulseSpec:
    """Pulse parameters (Omega, delta, eta, phi0, tau) realizing the target.

    With chi fixed by the target the detuning is forced (the smallest
    non-negative branch is chosen unless delta is supplied and consistent);
    with chi free the requested delta selects the branch and the smallest
    positive tau wins.  The synthesized pulse reproduces the target unitary
    up to global phase to < 1e-8.
    """
    if omega <= 0:
        raise SynthesisError("omega must be positive")
    g, pm = target.gamma_prime, target.phi_minus

    if target.chi is not None:
        chi = target.chi
        s, c = math.sin(chi), math.cos(chi)
        tau = 2.0 * g * s / omega
        candidates = [((pm + math.pi * k) * omega / (g * s) - omega * c / s, k)
                      for k in _WINDINGS]
        if delta is not None:
            match = [d for d, _ in candidates if abs(d - delta) <= 1e-9 * max(1.0, abs(delta))]
            if not match:
                admissible = ", ".join(f"{d:.6g}" for d, _ in sorted(candidates))
                raise SynthesisError(
                    f"detuning {delta:.6g} rad/ns incompatible with the fixed "
                    f"chi={chi:.6g}; admissible detunings: {admissible}")
            delta_sel = match[0]
        else:
            nonneg = [d for d, _ in candidates if d >= -1e-12]
            delta_sel = min(nonneg) if nonneg else min(
                (d for d, _ in candidates), key=abs)
        eta = delta_sel + omega * c / s
        pulse = PulseSpec(omega=omega, delta=delta_sel, eta=eta,
                          phi0=target.phi0, tau=tau)
    else:
        if delta is None:
            raise SynthesisError("delta is required when the target leaves chi free")
        sols = _branch_solutions(g, pm, omega, delta)
        if not sols:
            # admissible deltas need |A_k| <= sqrt(1 + (delta/omega)^2)
            amin = min(abs((pm + math.pi * k) / g) for k in _WINDINGS)
            bound = omega * math.sqrt(max(amin * amin - 1.0, 0.0))
            raise SynthesisError(
                f"no TOC branch for gamma'={g:.6g}, phi-={pm:.6g} at "
                f"delta={delta:.6g}; admissible |delta| >= {bound:.6g} rad/ns")
        tau, chi, eta, _ = sols[0]
        pulse = PulseSpec(omega=omega, delta=delta, eta=eta,
                          phi0=target.phi0, tau=tau)

    u = ideal_evolution(pulse)
    v = target.unitary(chi=pulse.chi)
    overlap = abs(np.trace(u.conj().T @ v)) / 2.0
    if overlap < 1.0 - 1e-8:
        raise SynthesisError(
            f"synthesis self-check failed: target overlap {overlap:.12f}")
    return pulse


def gate_time(kind: str, omega: float, delta: float = 0.0,
              gamma_cp: float | None = None) -> float:
    """Closed-form gate times tau_S, tau_T, tau_H and tau_2 (CP)."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    kind = kind.upper()
    if kind == "S":
        return math.pi * (math.sqrt(16 * delta ** 2 + 7 * omega ** 2) - 3 * delta) \
            / (2.0 * (omega ** 2 + delta ** 2))
    if kind == "T":
        return math.pi * (math.sqrt(64 * delta ** 2 + 15 * omega ** 2) - 7 * delta) \
            / (4.0 * (omega ** 2 + delta ** 2))
    if kind == "H":
        return math.pi / (math.sqrt(2.0) * omega)
    if kind == "CP":
        if gamma_cp is None or not 0.0 < gamma_cp < 2.0 * math.pi:
            raise ValueError("CP gate time needs gamma_cp in (0, 2*pi)")
        radicand = (math.pi * delta) ** 2 \
            - omega ** 2 * (gamma_cp ** 2 - 2.0 * math.pi * gamma_cp)
        if radicand < 0.0:
            raise ValueError(
                f"infeasible CP branch: negative radicand {radicand:.6g} "
                f"for gamma={gamma_cp:.6g}, delta2={delta:.6g}")
        return 2.0 * (delta * (gamma_cp - math.pi) + math.sqrt(radicand)) \
            / (omega ** 2 + delta ** 2)
    raise ValueError(f"unknown gate kind {kind!r}")


def optimal_detuning(kind: str, omega: float,
                     delta_range: tuple[float, float],
                     gamma_cp: float | None = None) -> tuple[float, float]:
    """Detuning minimizing the closed-form gate time over a range.

    256-point scan followed by golden-section refinement around the best
    sample.  Returns (delta*, tau*).
    """
    lo, hi = delta_range
    if not hi > lo:
        raise ValueError("empty detuning range")
    deltas = np.linspace(lo, hi, 256)
    taus = np.array([gate_time(kind, omega, d, gamma_cp) for d in deltas])
    i = int(np.argmin(taus))
    a = deltas[max(i - 1, 0)]
    b = deltas[min(i + 1, len(deltas) - 1)]
    if b > a:
        res = minimize_scalar(lambda d: gate_time(kind, omega, d, gamma_cp),
                              bounds=(a, b), method="bounded",
                              options={"xatol": 1e-12})
        if res.fun <= taus[i]:
            return float(res.x), float(res.fun)
    return float(deltas[i]), float(taus[i])
