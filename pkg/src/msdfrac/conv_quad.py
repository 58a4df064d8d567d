"""Trapezoidal convolution quadrature for the fractional integral I^a.

On a uniform mesh the Riemann-Liouville integral of order a is
approximated by

    Q_m(phi) = tau^a sum_{p=0}^{m} omega_p phi^{m-p} + chi_m phi^0,

where the omega_p are the Taylor coefficients of the generating
function (2(1-z)/(1+z))^{-a} = 2^{-a}(1+z)^a (1-z)^{-a}, obtained here
by convolving the two binomial series directly.  The starting weights
chi_m absorb the rule's error on constants: they are defined so that
Q_m(1) = t_m^a/Gamma(1+a) holds exactly for every m (chi_0, forced by
that identity at t_0 = 0, makes Q_0 vanish identically).  The rule is
then second-order accurate for smooth inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["CQWeights", "build_cq", "apply_cq"]


@dataclass(frozen=True, eq=False)
class CQWeights:
    alpha: float
    tau: float
    M: int
    omega: np.ndarray  # omega_0 .. omega_M
    chi: np.ndarray  # chi_0 .. chi_M


def build_cq(alpha: float, tau: float, M: int) -> CQWeights:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"order must lie in (0, 1), got {alpha}")
    if not (tau > 0.0 and math.isfinite(tau)):
        raise ValueError(f"step must be positive, got {tau}")
    if M < 1:
        raise ValueError(f"need at least one step, got M={M}")

    # binomial series of (1+z)^a and (1-z)^{-a}
    k = np.arange(1, M + 1, dtype=float)
    c = np.concatenate(([1.0], np.cumprod((alpha - k + 1.0) / k)))
    d = np.concatenate(([1.0], np.cumprod((k - 1.0 + alpha) / k)))
    omega = 2.0 ** (-alpha) * np.convolve(c, d)[: M + 1]

    t = tau * np.arange(M + 1)
    chi = t**alpha / math.gamma(1.0 + alpha) - tau**alpha * np.cumsum(omega)
    return CQWeights(alpha=alpha, tau=tau, M=M, omega=omega, chi=chi)


def apply_cq(w: CQWeights, values) -> float:
    """Quadrature value approximating (I^a phi)(t_m) from phi^0..phi^m."""
    phi = np.asarray(values, dtype=float)
    if phi.ndim != 1 or phi.size < 1:
        raise ValueError("expected a one-dimensional sequence of node values")
    m = phi.size - 1
    if m > w.M:
        raise ValueError(f"got {phi.size} values but the rule holds {w.M + 1} weights")
    return float(w.tau**w.alpha * (w.omega[: m + 1] @ phi[::-1]) + w.chi[m] * phi[0])
