"""Dense complex linear algebra, special functions and time steppers.

Internal unit convention used throughout the package: angular frequencies in
rad/ns, times in ns.  Configuration values quoted as plain frequencies f (MHz)
convert as ``omega = 2*pi*f*1e-3``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi

HERMITIAN_TOL = 1e-10
UNITARY_TOL = 1e-10

#: Default integration step (ns) for the full driven models: 0.5 ps resolves
#: the fastest scale in the four-transmon model (2*pi x 900 MHz) with more
#: than 2200 steps per period.
DEFAULT_DT = 0.5e-3


def from_mhz(f: float) -> float:
    """Angular frequency (rad/ns) of a plain frequency given in MHz."""
    return TWO_PI * f * 1e-3


def to_mhz(omega: float) -> float:
    """Plain frequency (MHz) of an angular frequency given in rad/ns."""
    return omega / (TWO_PI * 1e-3)


def from_khz(f: float) -> float:
    """Angular frequency (rad/ns) of a plain frequency given in kHz."""
    return TWO_PI * f * 1e-6


def max_norm(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


def is_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return a.shape[0] == a.shape[1] and max_norm(a - a.conj().T) < tol


def is_unitary(a: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    if a.shape[0] != a.shape[1]:
        return False
    return max_norm(a.conj().T @ a - np.eye(a.shape[0])) < tol


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product with the row-major block convention, |CD> = |C> x |D>."""
    return np.kron(a, b)


def expm_hermitian(h: np.ndarray, s: float = 1.0) -> np.ndarray:
    """exp(-i*h*s) of a Hermitian matrix via eigendecomposition.

    Raises ValueError for non-Hermitian input.  The result is unitary to
    machine precision for any real s.
    """
    h = np.asarray(h, dtype=complex)
    if not is_hermitian(h):
        raise ValueError("expm_hermitian requires a Hermitian matrix "
                         f"(deviation {max_norm(h - h.conj().T):.3e})")
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * s)) @ v.conj().T


MAX_BESSEL_ORDER = 64
MAX_BESSEL_ARG = 10.0


def bessel_j(n: int, x: float) -> float:
    """Bessel function of the first kind J_n(x) for integer order.

    Miller's downward recurrence with sum-rule normalization
    (J_0 + 2*sum_k J_2k = 1).  Valid for |n| <= 64 and |x| <= 10, accurate
    to better than 1e-12 on that domain.
    """
    n = int(n)
    if abs(n) > MAX_BESSEL_ORDER:
        raise ValueError(f"bessel order |n|={abs(n)} exceeds {MAX_BESSEL_ORDER}")
    if abs(x) > MAX_BESSEL_ARG:
        raise ValueError(f"bessel argument |x|={abs(x)} exceeds {MAX_BESSEL_ARG}")
    sign = 1.0
    if n < 0:
        n = -n
        if n % 2:
            sign = -sign
    if x < 0:
        if n % 2:
            sign = -sign
        x = -x
    if x < 1e-3:
        # ascending series; three terms leave a relative error below 1e-19
        # for x < 1e-3, and the Miller recurrence would overflow here
        h = 0.5 * x
        if n > 180:
            return 0.0
        lead = h ** n / math.factorial(n)
        return sign * lead * (1.0 - h * h / (n + 1)
                              + h ** 4 / (2.0 * (n + 1) * (n + 2)))
    # start well above both the order and the argument; the recurrence decays
    # super-exponentially past the turning point
    m = n + int(np.ceil(x)) + 40
    if m % 2:
        m += 1
    jp, jc = 0.0, 1e-30
    norm = 0.0
    jn = 0.0
    for k in range(m, 0, -1):
        jm = (2.0 * k / x) * jc - jp
        jp, jc = jc, jm
        if abs(jc) > 1e10:
            # rescale to avoid overflow; ratios are all that matter
            jc *= 1e-10
            jp *= 1e-10
            norm *= 1e-10
            jn *= 1e-10
        if k - 1 == n:
            jn = jc
        if (k - 1) % 2 == 0:
            norm += jc if k - 1 == 0 else 2.0 * jc
    return sign * jn / norm


def bessel_j_array(orders: np.ndarray, x: float) -> np.ndarray:
    """J_n(x) for several integer orders at a common argument."""
    return np.array([bessel_j(int(n), x) for n in orders])


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid; n_steps * dt spans [t0, t1] to within 1e-12 ns."""

    t0: float
    t1: float
    dt: float
    n_steps: int

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if abs(self.n_steps * self.dt - (self.t1 - self.t0)) > 1e-12:
            raise ValueError("n_steps * dt does not match the grid span")

    @classmethod
    def from_span(cls, t0: float, t1: float, dt: float) -> "TimeGrid":
        """Grid over [t0, t1] with dt adjusted so the span divides exactly."""
        if t1 <= t0 or dt <= 0:
            raise ValueError("require t1 > t0 and dt > 0")
        n = max(1, int(round((t1 - t0) / dt)))
        return cls(t0=t0, t1=t1, dt=(t1 - t0) / n, n_steps=n)

    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_steps + 1)


def rk4_step(f, y, t: float, dt: float):
    """One classical 4th-order Runge-Kutta step for y' = f(t, y)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    k1 = f(t, y)
    k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
