"""Piecewise-polynomial collocation for weakly singular Volterra equations.

The integral equation

    u(t) = f(t) + int_0^t (t-s)^{-a} K(s,t) u(s) ds

has a solution with a t^{1-a} singular layer at the origin, which limits
uniform-mesh collocation to order 2(1-a) regardless of the polynomial
degree.  Writing (Lg)(t) for the integral operator above, the
substitution u = w + f(0) gives an equation for w with a forcing
f~ = L f(0) + f - f(0) vanishing at zero, and the decomposition

    w = v + sum_{i=0}^{n-1} L^i f~

leaves a remainder v solving the same equation with forcing L^n f~,
which is in C^m once n(1-a) >= m.  The collocation scheme is applied to
v on a uniform mesh with q points t_m + c_i tau per cell; the split-off
sum is added back at the collocation points.

The singular cell integrals reduce to moments of the Lagrange basis.
On the current cell they are exact Beta-function values.  For a history
cell at gap g >= 1 the moment int_0^1 (d-s)^{-a} s^k ds with d = c_i + g
is summed as d^{-a} sum_l (a)_l/l! d^{-l}/(k+l+1): every term is
positive and the ratio is at most 1/d, so the evaluation is stable for
arbitrarily large gaps (the direct binomial expansion loses d^k worth
of digits there).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .fracint import ForcingFunction, TimeProfile, as_forcing, frac_integrate
from .mesh import GradedMesh, build_mesh

__all__ = [
    "VolterraProblem",
    "CollocationTrace",
    "collocation_depth",
    "volterra_transform",
    "msd_volterra_forcing",
    "solve_volterra",
    "singular_moment",
]


@dataclass(frozen=True, eq=False)
class VolterraProblem:
    """u = f + integral of (t-s)^{-a} K(s,t) u(s), decomposed to depth n.

    ``kernel`` is either a real number (constant K, the analytic path)
    or a callable K(s, t).
    """

    alpha: float
    T: float
    kernel: object
    f: ForcingFunction
    n: int = 0
    q: int = 2
    c: tuple = (2.0 / 3.0, 1.0)

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"exponent must lie in (0, 1), got {self.alpha}")
        if not (self.T > 0.0 and math.isfinite(self.T)):
            raise ValueError(f"horizon must be positive, got {self.T}")
        if self.n < 0:
            raise ValueError(f"decomposition depth must be >= 0, got {self.n}")
        c = tuple(float(x) for x in self.c)
        if len(c) != self.q or self.q < 1:
            raise ValueError(f"need q = {self.q} collocation parameters, got {c}")
        if not all(0.0 < x <= 1.0 for x in c) or len(set(c)) != len(c) or list(c) != sorted(c):
            raise ValueError(f"collocation parameters must be distinct, increasing, in (0, 1]: {c}")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "f", as_forcing(self.f))

    @property
    def constant_kernel(self) -> bool:
        return not callable(self.kernel)


@dataclass(frozen=True, eq=False)
class CollocationTrace:
    """Remainder and reconstructed values at the collocation points.

    V and U have shape (M, q); row m holds the values at t_m + c_i tau.
    nodal_values lists U at the mesh points t_1..t_M (requires c_q = 1).
    """

    mesh: GradedMesh
    c: tuple
    V: np.ndarray
    U: np.ndarray

    @property
    def nodal_values(self) -> np.ndarray:
        if self.c[-1] != 1.0:
            raise ValueError("mesh-point values need c_q = 1")
        return self.U[:, -1]


def collocation_depth(alpha: float, order: int = 1) -> int:
    """Smallest depth n with n(1-a) >= order, i.e. L^n f~ in C^order."""
    return math.ceil(order / (1.0 - alpha) - 1e-12) - 1


def _lagrange_coeffs(c: tuple) -> np.ndarray:
    """A[k, j]: monomial coefficients of the Lagrange basis L_j on [0, 1]."""
    q = len(c)
    V = np.vander(np.asarray(c), q, increasing=True)
    return np.linalg.inv(V)


def singular_moment(alpha: float, d: float, k: int) -> float:
    """int_0^1 (d - s)^{-alpha} s^k ds for d >= 1 (history cells)."""
    if d < 1.0:
        raise ValueError("history moment needs d >= 1")
    if d < 3.0:
        # exact antiderivative after expanding s^k about d; the alternating
        # sum loses a factor d^k of precision, harmless this close to 1
        acc = 0.0
        for j in range(k + 1):
            p = j + 1.0 - alpha
            diff = d**p - (d - 1.0) ** p
            acc += math.comb(k, j) * (-1.0) ** j * d ** (k - j) * diff / p
        return acc
    # positive-term series: d^{-a} sum_l (a)_l/l! d^{-l} / (k+l+1);
    # the ratio is 1/d < 1/3, so 40 terms reach full precision
    dinv = 1.0 / d
    poch = 1.0
    acc = 0.0
    p = 1.0
    for l in range(64):
        term = poch * p / (k + l + 1.0)
        acc += term
        if term < 1e-18 * acc:
            break
        poch *= (alpha + l) / (l + 1.0)
        p *= dinv
    return d ** (-alpha) * acc


def _history_blocks(alpha: float, c: tuple, A: np.ndarray, M: int) -> np.ndarray:
    """psi[g, i, j] = int_0^1 (c_i + g - s)^{-a} L_j(s) ds for g = 1..M.

    psi[0] is unused (zero).  Vectorized over the gap axis with the
    same positive-term series as singular_moment.
    """
    q = len(c)
    g0 = min(3, M)  # gaps 1..g0 have d < 3, done with the exact formula
    mom = np.zeros((M, q, q))  # [g-1, i, k]
    for i, ci in enumerate(c):
        for g in range(1, g0 + 1):
            for k in range(q):
                mom[g - 1, i, k] = singular_moment(alpha, ci + g, k)
    if M > g0:
        g = np.arange(g0 + 1, M + 1, dtype=float)
        for i, ci in enumerate(c):
            d = ci + g
            dinv = 1.0 / d
            # series terms share the Pochhammer/power factors across k
            poch = 1.0
            p = np.ones_like(d)
            for l in range(40):
                w = poch * p
                for k in range(q):
                    mom[g0:, i, k] += w / (k + l + 1.0)
                poch *= (alpha + l) / (l + 1.0)
                p *= dinv
            mom[g0:, i, :] *= (d ** (-alpha))[:, None]
    psi = np.zeros((M + 1, q, q))
    psi[1:] = mom @ A  # sum_k mom[:, i, k] A[k, j]
    return psi


def _current_block(alpha: float, c: tuple, A: np.ndarray) -> np.ndarray:
    """Phi[i, j] = int_0^{c_i} (c_i - s)^{-a} L_j(s) ds, exact."""
    q = len(c)
    mom = np.empty((q, q))
    for i, ci in enumerate(c):
        for k in range(q):
            mom[i, k] = (
                ci ** (k + 1.0 - alpha)
                * math.gamma(k + 1.0)
                * math.gamma(1.0 - alpha)
                / math.gamma(k + 2.0 - alpha)
            )
    return mom @ A


def volterra_transform(prob: VolterraProblem, M: int | None = None):
    """The zero-at-origin forcing f~ = L f(0) + f - f(0).

    Analytic path (constant kernel, profile f): returns a TimeProfile.
    Otherwise returns the (M, q) array of values at the collocation
    points, computed by product integration.
    """
    terms = _decomposition_terms(prob, M, depth=0)
    return terms[0]


def msd_volterra_forcing(prob: VolterraProblem, M: int | None = None):
    """The pair (L^n f~, sum_{i<n} L^i f~), profiles or point arrays."""
    terms = _decomposition_terms(prob, M, depth=prob.n)
    forcing = terms[-1]
    if prob.n == 0:
        zero = TimeProfile.zero() if isinstance(forcing, TimeProfile) else np.zeros_like(forcing)
        return forcing, zero
    if isinstance(forcing, TimeProfile):
        total = terms[0]
        for t in terms[1:-1]:
            total = total + t
        return forcing, total
    return forcing, sum(terms[:-1])


def _collocation_points(T: float, M: int, c: tuple) -> np.ndarray:
    tau = T / M
    return tau * (np.arange(M)[:, None] + np.asarray(c)[None, :])


def _apply_L_profile(g: TimeProfile, kappa: float, alpha: float) -> TimeProfile:
    # int_0^t (t-s)^{-a} g ds = Gamma(1-a) I^{1-a} g
    return (kappa * math.gamma(1.0 - alpha)) * frac_integrate(g, 1.0 - alpha)


def _decomposition_terms(prob: VolterraProblem, M: int | None, depth: int):
    """[f~, L f~, ..., L^depth f~] as profiles or (M, q) value arrays."""
    alpha = prob.alpha
    if prob.constant_kernel and prob.f.is_analytic:
        kappa = float(prob.kernel)
        f = prob.f.profile
        f0 = f(0.0)
        ft = _apply_L_profile(TimeProfile.constant(f0), kappa, alpha) + f - TimeProfile.constant(f0)
        out = [ft]
        for _ in range(depth):
            out.append(_apply_L_profile(out[-1], kappa, alpha))
        return out

    if M is None:
        raise ValueError("the general-kernel path needs the mesh size M")
    warnings.warn(
        "non-constant kernel or pointwise forcing: decomposition terms are "
        "computed by product integration at the collocation points",
        stacklevel=3,
    )
    pts = _collocation_points(prob.T, M, prob.c)
    fv = np.asarray(prob.f.sample(pts), dtype=float)
    if np.isscalar(fv) or fv.shape != pts.shape:
        fv = np.broadcast_to(fv, pts.shape).copy()
    f0 = float(prob.f.sample(0.0))
    ones = np.ones_like(fv)
    ft = f0 * _apply_L_points(ones, prob, pts) + fv - f0
    out = [ft]
    for _ in range(depth):
        out.append(_apply_L_points(out[-1], prob, pts))
    return out


def _kernel_samples(prob: VolterraProblem, pts: np.ndarray, m: int, gmax: int):
    """K(t_{e,j}, t_{m,i}) for history cells e = m-gmax..m-1 plus current."""
    if prob.constant_kernel:
        return None, None
    ti = pts[m]  # (q,)
    hist = prob.kernel(pts[m - gmax : m][None, :, :], ti[:, None, None]) if gmax else None
    cur = prob.kernel(pts[m][None, :], ti[:, None])
    return hist, cur


def _apply_L_points(vals: np.ndarray, prob: VolterraProblem, pts: np.ndarray) -> np.ndarray:
    """(L g) at all collocation points from g's collocation values."""
    M, q = vals.shape
    alpha = prob.alpha
    tau = prob.T / M
    A = _lagrange_coeffs(prob.c)
    psi = _history_blocks(alpha, prob.c, A, M)
    phi = _current_block(alpha, prob.c, A)
    s = tau ** (1.0 - alpha)
    out = np.empty_like(vals)
    for m in range(M):
        hist_k, cur_k = _kernel_samples(prob, pts, m, m)
        if prob.constant_kernel:
            kappa = float(prob.kernel)
            hist = np.einsum("gij,gj->i", psi[1 : m + 1][::-1], vals[:m]) if m else 0.0
            out[m] = s * kappa * (hist + phi @ vals[m])
        else:
            hist = np.einsum("igj,gj->i", psi[1 : m + 1][::-1].transpose(1, 0, 2) * hist_k, vals[:m]) if m else 0.0
            out[m] = s * (hist + (phi * cur_k) @ vals[m])
    return out


def solve_volterra(prob: VolterraProblem, M: int) -> CollocationTrace:
    """March the collocation scheme for the remainder and reconstruct u."""
    if M < 1:
        raise ValueError(f"need at least one cell, got M={M}")
    alpha = prob.alpha
    tau = prob.T / M
    q = prob.q
    A = _lagrange_coeffs(prob.c)
    phi = _current_block(alpha, prob.c, A)
    psi = _history_blocks(alpha, prob.c, A, M)
    s = tau ** (1.0 - alpha)
    pts = _collocation_points(prob.T, M, prob.c)

    forcing, recon = msd_volterra_forcing(prob, M)
    if isinstance(forcing, TimeProfile):
        rhs = forcing(pts)
    else:
        rhs = forcing

    V = np.zeros((M, q))
    if prob.constant_kernel:
        kappa = float(prob.kernel)
        mat = np.eye(q) - s * kappa * phi
        if abs(np.linalg.det(mat)) < 1e-14:
            raise ValueError("singular local collocation system; check the c_i")
        for m in range(M):
            if m:
                hist = np.einsum("gij,gj->i", psi[m:0:-1], V[:m])
                b = rhs[m] + s * kappa * hist
            else:
                b = rhs[m]
            V[m] = np.linalg.solve(mat, b)
    else:
        for m in range(M):
            hist_k, cur_k = _kernel_samples(prob, pts, m, m)
            mat = np.eye(q) - s * (phi * cur_k)
            if abs(np.linalg.det(mat)) < 1e-14:
                raise ValueError("singular local collocation system; check the c_i")
            if m:
                hist = np.einsum("igj,gj->i", psi[m:0:-1].transpose(1, 0, 2) * hist_k, V[:m])
                b = rhs[m] + s * hist
            else:
                b = rhs[m]
            V[m] = np.linalg.solve(mat, b)

    f0 = float(prob.f.sample(0.0))
    U = V + f0
    if isinstance(recon, TimeProfile):
        if not recon.is_zero:
            U = U + recon(pts)
    else:
        U = U + recon
    mesh = build_mesh(prob.T, M, 1.0)
    return CollocationTrace(mesh=mesh, c=prob.c, V=V, U=U)


def collocation_residual(prob: VolterraProblem, trace: CollocationTrace) -> float:
    """Max residual of the discrete equations over all collocation points."""
    M, q = trace.V.shape
    lhs = _apply_L_points(trace.V, prob, _collocation_points(prob.T, M, prob.c))
    forcing, _ = msd_volterra_forcing(prob, M)
    if isinstance(forcing, TimeProfile):
        forcing = forcing(_collocation_points(prob.T, M, prob.c))
    return float(np.max(np.abs(trace.V - lhs - forcing)))
