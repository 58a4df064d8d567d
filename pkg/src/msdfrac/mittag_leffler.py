"""Two-parameter Mittag-Leffler function on the real axis.

E_{a,b}(x) = sum_{k>=0} x^k / Gamma(a k + b) for 0 < a <= 2, b > 0.
Every closed-form reference solution in this package (relaxation,
Volterra, per-mode subdiffusion, integrodifferential, diffusion-wave)
is assembled from values of E on the negative real axis, so the
evaluator targets 1e-10 relative accuracy there for |x| <= 100.

Branches:

* Power series with Kahan summation.  The float64 pass keeps track of
  the largest term; if the cancellation it implies cannot deliver the
  target accuracy, the sum is redone in mpmath at a working precision
  sized from the term-to-result ratio.  This path also covers modest
  positive arguments (all series terms positive, no cancellation),
  which the Volterra reference solution needs.
* Algebraic asymptotic series -sum_{k>=1} x^{-k}/Gamma(b - a k) for
  x -> -inf, truncated at its smallest term.  For a in (1, 2] the
  exponentially damped oscillatory contribution

      (2/a) v^{1-b} exp(v cos(pi/a)) cos(v sin(pi/a) + pi (1-b)/a),
      v = |x|^{1/a},

  is added; at a = 2 the algebraic part degenerates and the formula
  reduces to the elementary E_{2,1}(-y) = cos(sqrt(y)) and
  E_{2,2}(-y) = sin(sqrt(y))/sqrt(y).  The branch certifies itself by
  requiring its smallest retained term to sit below 1e-13 of the
  result; when it cannot, the series branch is used instead.

The decay of the oscillatory term degenerates as a -> 1+ (the two
complex contributions coalesce on the negative axis, where they count
with half weight), so arguments with a <= 1.05 are always routed to
the series branch.
"""

from __future__ import annotations

import math

import mpmath as mp
import numpy as np
from scipy.special import rgamma

__all__ = ["ml_eval", "relaxation_exact"]

_TARGET_REL = 1e-12  # internal goal, slightly tighter than the 1e-10 guarantee
_CERTIFY = 1e-13
_DPS_CAP = 400
_ASYM_MIN_ABS = 2.0  # do not bother with the asymptotic branch below this
_OSC_ALPHA_MIN = 1.05
_KMAX_ASYM = 400


def _validate(alpha: float, beta: float) -> None:
    if not (0.0 < alpha <= 2.0):
        raise ValueError(f"first parameter must lie in (0, 2], got {alpha}")
    if not (beta > 0.0 and math.isfinite(beta)):
        raise ValueError(f"second parameter must be positive, got {beta}")


def _ml_asymptotic(alpha: float, beta: float, x: float):
    """Algebraic expansion plus oscillatory term for x << 0.

    Returns (value, certified).  certified is True when the truncation
    term is provably below _CERTIFY relative to the result.
    """
    y = -x
    yinv = 1.0 / y
    # Collect terms first, truncate afterwards.  |term_k| is not a safe
    # divergence monitor on its own: whenever b - a k lands next to a
    # pole of Gamma the term dips to roundoff level without the
    # expansion having converged, so both the truncation point and the
    # error proxy use the max over adjacent term pairs instead.  Pole
    # zeros are simple and at least 1/a apart in k, so two neighbouring
    # terms never dip together.
    vals: list[float] = []
    mags: list[float] = []
    best_env = math.inf
    p = 1.0
    for k in range(1, _KMAX_ASYM + 1):
        p *= yinv  # p = y^{-k}
        if p == 0.0:
            break
        # term_k = -x^{-k}/Gamma(b - a k) = -(-1)^k y^{-k} rgamma(b - a k)
        sign = 1.0 if k % 2 else -1.0
        vals.append(sign * rgamma(beta - alpha * k) * p)
        mags.append(abs(vals[-1]))
        if len(mags) >= 2:
            env = max(mags[-1], mags[-2])
            if env > 8.0 * best_env:
                break  # the expansion has clearly started to diverge
            if env < best_env:
                best_env = env
            if 0.0 < env < 1e-320:
                break

    if len(vals) >= 2:
        envs = [max(mags[i], mags[i + 1]) for i in range(len(mags) - 1)]
        i_star = min(range(len(envs)), key=envs.__getitem__)
        acc = math.fsum(vals[: i_star + 2])
        smallest = envs[i_star]
    elif vals:
        acc = vals[0]
        smallest = mags[0]
    else:
        acc = 0.0
        smallest = 0.0

    osc = 0.0
    if alpha > 1.0:
        v = y ** (1.0 / alpha)
        damp = v * math.cos(math.pi / alpha)
        if damp > 700.0:  # cannot happen for a in (1,2], cos(pi/a) <= 0
            return math.nan, False
        osc = (
            (2.0 / alpha)
            * v ** (1.0 - beta)
            * math.exp(damp)
            * math.cos(v * math.sin(math.pi / alpha) + math.pi * (1.0 - beta) / alpha)
        )
    total = acc + osc

    # smallest == 0 covers the all-pole case (a = 2 with integer b),
    # where the algebraic part vanishes identically and the oscillatory
    # formula alone is exact.
    scale = max(abs(total), abs(acc), abs(osc))
    certified = scale > 0.0 and smallest <= _CERTIFY * scale
    return total, certified


def _ml_series_f64(alpha: float, beta: float, x: float):
    """Float64 Kahan series.  Returns (value, largest_term)."""
    acc = 0.0
    comp = 0.0
    term_x = 1.0
    largest = 0.0
    k = 0
    while k < 100000:
        term = term_x * rgamma(alpha * k + beta)
        at = abs(term)
        if at > largest:
            largest = at
        yk = term - comp
        t = acc + yk
        comp = (t - acc) - yk
        acc = t
        term_x *= x
        if not math.isfinite(term_x):
            # Overflow before the terms started decaying.  The sum so far
            # is useless but the largest term seen still calibrates the
            # precision escalation.
            return math.nan, largest
        if at < 1e-30 * max(largest, 1.0) and k > 4:
            break
        k += 1
    return acc, largest


def _ml_series_mp(alpha: float, beta: float, x: float, dps: int):
    """mpmath series at a fixed working precision.  Returns (value, largest/|value|)."""
    with mp.workdps(dps):
        xa = mp.mpf(x)
        # The Gamma argument must be formed in working precision: computing
        # alpha*k + beta in float64 first injects an O(k * eps) argument
        # error that Gamma amplifies into the sum at the size of the
        # largest term, independently of dps.
        am = mp.mpf(alpha)
        bm = mp.mpf(beta)
        acc = mp.mpf(0)
        largest = mp.mpf(0)
        term_x = mp.mpf(1)
        k = 0
        while True:
            term = term_x / mp.gamma(am * k + bm)
            at = abs(term)
            if at > largest:
                largest = at
            acc += term
            term_x *= xa
            if k > 4 and at < mp.mpf(10) ** (-(dps + 10)) * max(largest, mp.mpf(1)):
                break
            k += 1
            if k > 2000000:
                raise RuntimeError("series failed to terminate")
        ratio = largest / abs(acc) if acc != 0 else mp.inf
        return float(acc), float(mp.log10(ratio)) if mp.isfinite(ratio) else math.inf


def _ml_series(alpha: float, beta: float, x: float):
    val, largest = _ml_series_f64(alpha, beta, x)
    if math.isfinite(val) and largest * 5e-16 <= _TARGET_REL * abs(val):
        return val, True
    # Cancellation too strong for float64: escalate the working precision.
    # The needed number of digits is the term-to-result ratio; the first
    # estimate may be off when the float64 sum is pure noise, so iterate.
    ref = abs(val) if (math.isfinite(val) and val != 0.0) else largest * 5e-16
    if not math.isfinite(largest) or largest <= 0.0:
        return math.nan, False
    dps = min(_DPS_CAP, 25 + int(math.ceil(math.log10(largest / max(ref, 1e-300)))))
    for _ in range(4):
        val, log_ratio = _ml_series_mp(alpha, beta, x, dps)
        needed = 18 + int(math.ceil(log_ratio)) if math.isfinite(log_ratio) else _DPS_CAP + 1
        if needed <= dps:
            return val, True
        if dps >= _DPS_CAP:
            return val, False
        dps = min(_DPS_CAP, max(needed + 10, 2 * dps))
    return val, False


def _ml_scalar(alpha: float, beta: float, x: float) -> float:
    if x == 0.0:
        return float(rgamma(beta))
    # a in [1, 1.05] never uses the asymptotic branch: at a = 1 the pole
    # pair coalesces on the negative axis (the oscillatory formula would
    # double-count, and without it the algebraic part self-certifies
    # while missing the exponential term entirely), and just above 1 the
    # oscillatory decay rate degenerates.
    if x < 0.0 and abs(x) >= _ASYM_MIN_ABS and not (1.0 <= alpha <= _OSC_ALPHA_MIN):
        val, ok = _ml_asymptotic(alpha, beta, x)
        if ok:
            return val
    val, ok = _ml_series(alpha, beta, x)
    if ok:
        return val
    raise ValueError(
        f"E_{{{alpha},{beta}}}({x}) is outside the validated range of the evaluator"
    )


def ml_eval(alpha: float, beta: float, x):
    """Evaluate E_{alpha,beta}(x) for real x (scalar or array).

    Guaranteed to 1e-10 relative accuracy for x in [-100, 0]; larger
    negative arguments succeed whenever the asymptotic branch certifies
    itself (it does in practice for all a not too close to 1), and
    positive arguments are served by the plain series while it remains
    representable.  Raises ValueError when no branch can certify the
    target accuracy.
    """
    _validate(alpha, beta)
    if np.isscalar(x):
        return _ml_scalar(alpha, beta, float(x))
    xv = np.asarray(x, dtype=float)
    out = np.empty(xv.shape, dtype=float)
    flat = xv.ravel()
    res = out.ravel()
    for i in range(flat.size):
        res[i] = _ml_scalar(alpha, beta, flat[i])
    return out


def relaxation_exact(alpha: float, lam: float, t):
    """Exact solution of  d^alpha u + lam u = 1,  u(0) = 0,  f constant 1.

    u(t) = (1 - E_{alpha,1}(-lam t^alpha)) / lam.
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"order must lie in (0, 1), got {alpha}")
    if lam <= 0.0:
        raise ValueError(f"relaxation coefficient must be positive, got {lam}")
    scalar = np.isscalar(t)
    tv = np.asarray(t, dtype=float)
    vals = ml_eval(alpha, 1.0, -lam * tv**alpha)
    out = (1.0 - vals) / lam
    return float(out) if scalar else out
