"""Nonuniform L1 discretization of the Caputo derivative of order in (0,1).

The scheme replaces the integrand's time derivative by difference
quotients on each cell, which turns the derivative at t_m into a
discrete convolution

    D^a v^m = sum_{k=1}^{m} a_{m-k}^{(m)} (v^k - v^{k-1}),

with positive weights that decrease away from the diagonal.  The
complementary kernel P inverts this convolution summatively: the rows
of P against the columns of a sum to one exactly, which is the identity
the stability analysis of every L1-based solver in the package rests
on.  Both triangles are kept densely; the kernel triangle costs O(M^3)
to fill and is only needed by the verification suite, so it is built on
first access.
"""

from __future__ import annotations

import math

import numpy as np

from .mesh import GradedMesh

__all__ = ["L1System", "build_l1", "apply_dfrac", "l1_weight_row", "march_l1"]


def l1_weight_row(alpha: float, nodes: np.ndarray, m: int) -> np.ndarray:
    """Row of L1 weights at node m: row[k-1] = a^{(m)}_{m-k}, k = 1..m.

    row[-1] is the diagonal weight tau_m^{-alpha}/Gamma(2-alpha).  The
    marching solvers call this directly instead of building the full
    triangle, which keeps them at O(M) memory.
    """
    tm = nodes[m]
    pw = (tm - nodes[: m + 1]) ** (1.0 - alpha)  # last entry is 0^{1-a} = 0
    tau = np.diff(nodes[: m + 1])
    return (pw[:-1] - pw[1:]) / (tau * math.gamma(2.0 - alpha))


def _kernel_row(a: np.ndarray, m: int) -> np.ndarray:
    """P^{(m)}_{m-k} for k = 1..m, from the backward recursion."""
    prow = np.zeros(m + 1)
    prow[m] = 1.0 / a[m, m]
    for k in range(m - 1, 0, -1):
        d = a[k + 1 : m + 1, k + 1] - a[k + 1 : m + 1, k]
        prow[k] = (d @ prow[k + 1 : m + 1]) / a[k, k]
    return prow[1:]


class L1System:
    """L1 weights and complementary kernel on a fixed mesh.

    ``a[m, k]`` holds the weight a^{(m)}_{m-k} for 1 <= k <= m <= M and
    is zero elsewhere; ``P[m, j]`` holds the kernel value P^{(m)}_{m-j}
    with the same layout.
    """

    def __init__(self, mesh: GradedMesh, alpha: float, weights: np.ndarray):
        self.mesh = mesh
        self.alpha = alpha
        self.a = weights
        self._P: np.ndarray | None = None

    @property
    def P(self) -> np.ndarray:
        if self._P is None:
            M = self.mesh.M
            P = np.zeros_like(self.a)
            for m in range(1, M + 1):
                P[m, 1 : m + 1] = _kernel_row(self.a, m)
            self._P = P
        return self._P

    def kernel_row(self, m: int) -> np.ndarray:
        """Single kernel row P^{(m)}_{m-k}, k = 1..m, in O(m^2) work."""
        if self._P is not None:
            return self._P[m, 1 : m + 1]
        return _kernel_row(self.a, m)


def build_l1(mesh: GradedMesh, alpha: float) -> L1System:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"fractional order must lie in (0, 1), got {alpha}")
    M = mesh.M
    a = np.zeros((M + 1, M + 1))
    for m in range(1, M + 1):
        a[m, 1 : m + 1] = l1_weight_row(alpha, mesh.nodes, m)
    return L1System(mesh, alpha, a)


def apply_dfrac(sys: L1System, values) -> float:
    """Discrete Caputo derivative at the last supplied node.

    ``values`` are v^0..v^m with m <= M; returns
    sum_k a^{(m)}_{m-k} (v^k - v^{k-1}).
    """
    v = np.asarray(values, dtype=float)
    if v.ndim != 1:
        raise ValueError("expected a one-dimensional sequence of node values")
    m = v.size - 1
    if not 1 <= m <= sys.mesh.M:
        raise ValueError(f"need between 2 and {sys.mesh.M + 1} values, got {v.size}")
    return float(sys.a[m, 1 : m + 1] @ np.diff(v))


def march_l1(alpha: float, nodes: np.ndarray, lam: float, rhs: np.ndarray) -> np.ndarray:
    """Solve D^a V^m + lam V^m = rhs^m for m = 1..M with V^0 = 0.

    rhs[0] is ignored.  On a uniform mesh the weight rows are slices of
    a single gap-indexed vector, which is precomputed; graded meshes
    rebuild the row at every step.
    """
    M = len(nodes) - 1
    taus = np.diff(nodes)
    uniform = bool(np.all(taus == taus[0]))
    if uniform:
        tau = float(taus[0])
        pw = np.arange(M + 1, dtype=float) ** (1.0 - alpha)
        w = (pw[1:] - pw[:-1]) * tau ** (-alpha) / math.gamma(2.0 - alpha)

    V = np.zeros(M + 1)
    D = np.zeros(M)  # D[k-1] = V^k - V^{k-1}
    for m in range(1, M + 1):
        if uniform:
            a0 = w[0]
            hist = w[m - 1 : 0 : -1] @ D[: m - 1] if m > 1 else 0.0
        else:
            row = l1_weight_row(alpha, nodes, m)
            a0 = row[-1]
            hist = row[: m - 1] @ D[: m - 1] if m > 1 else 0.0
        den = a0 + lam
        if den <= 0.0:
            raise ValueError(f"degenerate step {m}: diagonal weight + lam = {den}")
        V[m] = (rhs[m] + a0 * V[m - 1] - hist) / den
        D[m - 1] = V[m] - V[m - 1]
    return V
