"""Volatility functions and their Gaussian functionals.

The volatility process is ``sigma_t = F(Z_t)`` where ``Z`` is the stationary
Gaussian factor with standard deviation ``sigma_ou``.  The model hypotheses
require ``F`` to be one-to-one, positive, smooth, bounded and with bounded
derivatives; :class:`BoundedSigmoid` is the default family satisfying all of
them.  This module computes the scalar functionals that parametrize prices:

* the moments ``<F^j> = E[F(sigma_ou Z)^j]`` and ``<F'^j>``,
* the effective volatility ``sigma_bar = sqrt(<F^2>)`` and the diffusion
  time ``tau_bar = 2/sigma_bar^2``,
* the correction coefficient

      d_bar = sigma_ou * int_0^infty E[F(sigma_ou Z) (FF')(sigma_ou Z')] K(s) ds,

  where ``(Z, Z')`` is bivariate normal with correlation ``C_Z(s)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import interpolate, special

from .kernel import (
    CovarianceEval,
    KernelEval,
    bivariate_expect,
    gamma_reflect,
    gaussian_expect,
    sigma_ou,
)

__all__ = [
    "VolFunction",
    "BoundedSigmoid",
    "ConstantVol",
    "ExponentialVol",
    "TabulatedVol",
    "GroupParams",
    "moments",
    "sigma_bar",
    "d_bar",
    "group_params",
    "g_prime_sup",
]


class VolFunction:
    """Base interface for volatility functions ``F``.

    Subclasses implement ``__call__(z)`` and ``deriv(z)`` (both vectorized)
    and expose ``sigma_min``/``sigma_max`` bounds.  The model hypotheses —
    strictly increasing, bounded, positive — are validated at construction
    for every family intended for production use.
    """

    sigma_min: float
    sigma_max: float

    def __call__(self, z):  # pragma: no cover - abstract
        raise NotImplementedError

    def deriv(self, z):  # pragma: no cover - abstract
        raise NotImplementedError


class BoundedSigmoid(VolFunction):
    """Logistic volatility function
    ``F(z) = sigma_min + (sigma_max - sigma_min) / (1 + e^(-slope z))``.

    Strictly increasing with ``F' > 0`` everywhere, bounded in
    ``(sigma_min, sigma_max)``, and smooth — the reference family for all
    studies.

    Parameters
    ----------
    sigma_min, sigma_max : float
        Volatility bounds (year^-1/2), ``0 < sigma_min < sigma_max``.
    slope : float
        Positive steepness of the transition.
    """

    def __init__(self, sigma_min: float, sigma_max: float, slope: float):
        if not (0.0 < sigma_min < sigma_max < math.inf):
            raise ValueError(
                "volatility bounds must satisfy 0 < sigma_min < sigma_max; "
                f"got ({sigma_min!r}, {sigma_max!r})"
            )
        if not (slope > 0.0):
            raise ValueError(f"slope must be positive; got {slope!r}")
        self.sigma_min = float(sigma_min)
        self.sigma_max = float(sigma_max)
        self.slope = float(slope)

    def __call__(self, z):
        p = special.expit(self.slope * np.asarray(z, dtype=float))
        return self.sigma_min + (self.sigma_max - self.sigma_min) * p

    def deriv(self, z):
        p = special.expit(self.slope * np.asarray(z, dtype=float))
        return (self.sigma_max - self.sigma_min) * self.slope * p * (1.0 - p)

    def __repr__(self):
        return (
            f"BoundedSigmoid(sigma_min={self.sigma_min}, "
            f"sigma_max={self.sigma_max}, slope={self.slope})"
        )


class ConstantVol(VolFunction):
    """Constant volatility ``F == value`` (degenerate zero-slope limit).

    Violates the one-to-one hypothesis; it is admitted as a validation case
    (every correction vanishes, the price is exactly Black--Scholes) and for
    baseline runs.
    """

    def __init__(self, value: float):
        if not (value > 0.0):
            raise ValueError(f"constant volatility must be positive; got {value!r}")
        self.value = float(value)
        self.sigma_min = self.value
        self.sigma_max = self.value

    def __call__(self, z):
        return np.full_like(np.asarray(z, dtype=float), self.value)

    def deriv(self, z):
        return np.zeros_like(np.asarray(z, dtype=float))

    def __repr__(self):
        return f"ConstantVol({self.value})"


class ExponentialVol(VolFunction):
    """Exponential volatility ``F(z) = scale * e^z`` (outside the hypotheses).

    Unbounded with unbounded derivatives: the asymptotic theory implemented
    here does not cover it.  Construction is refused unless ``unsafe=True``
    is passed explicitly; intended for comparison runs only.
    """

    def __init__(self, scale: float = 0.2, unsafe: bool = False):
        if not unsafe:
            raise ValueError(
                "ExponentialVol is unbounded and violates the model "
                "hypotheses (bounded F with bounded derivatives); pass "
                "unsafe=True to construct it for comparison runs"
            )
        if not (scale > 0.0):
            raise ValueError(f"scale must be positive; got {scale!r}")
        self.scale = float(scale)
        self.sigma_min = 0.0
        self.sigma_max = math.inf

    def __call__(self, z):
        return self.scale * np.exp(np.asarray(z, dtype=float))

    def deriv(self, z):
        return self.scale * np.exp(np.asarray(z, dtype=float))

    def __repr__(self):
        return f"ExponentialVol(scale={self.scale}, unsafe=True)"


class TabulatedVol(VolFunction):
    """Monotone ``C^2`` volatility function interpolating user table data.

    A natural cubic spline is fitted to the logit-transformed normalized
    values ``u(z) = logit((sigma - sigma_min)/(sigma_max - sigma_min))`` and
    mapped back through the logistic function, with linear continuation of
    ``u`` beyond the knot range (the natural boundary conditions make the
    join ``C^2``).  The result is bounded in ``(sigma_min, sigma_max)`` and
    strictly increasing; tables whose spline is not strictly increasing on a
    dense check grid are rejected.

    Parameters
    ----------
    z_knots, sigma_values : array_like
        Strictly increasing knots and values.
    sigma_min, sigma_max : float, optional
        Bounds enclosing all values; default to the value range widened by
        10% of its span on each side.
    """

    def __init__(self, z_knots, sigma_values, sigma_min=None, sigma_max=None):
        z = np.asarray(z_knots, dtype=float)
        v = np.asarray(sigma_values, dtype=float)
        if z.ndim != 1 or z.shape != v.shape or z.size < 4:
            raise ValueError("need matching 1-D knot/value arrays with >= 4 points")
        if np.any(np.diff(z) <= 0.0):
            raise ValueError("z_knots must be strictly increasing")
        if np.any(np.diff(v) <= 0.0):
            raise ValueError("table values must be strictly increasing (monotone)")
        if np.any(v <= 0.0):
            raise ValueError("table values must be positive")
        span = v[-1] - v[0]
        lo = float(sigma_min) if sigma_min is not None else float(v[0] - 0.1 * span)
        hi = float(sigma_max) if sigma_max is not None else float(v[-1] + 0.1 * span)
        if not (0.0 < lo < v[0] and v[-1] < hi):
            raise ValueError(
                "bounds must satisfy 0 < sigma_min < min(values) and "
                f"max(values) < sigma_max; got ({lo!r}, {hi!r})"
            )
        self.sigma_min, self.sigma_max = lo, hi
        self._z0, self._z1 = float(z[0]), float(z[-1])
        u = special.logit((v - lo) / (hi - lo))
        self._spline = interpolate.CubicSpline(z, u, bc_type="natural")
        self._du = self._spline.derivative()
        self._u0, self._u1 = float(self._spline(z[0])), float(self._spline(z[-1]))
        self._s0, self._s1 = float(self._du(z[0])), float(self._du(z[-1]))
        check = np.linspace(self._z0, self._z1, 2001)
        if np.any(self._du(check) <= 0.0) or self._s0 <= 0.0 or self._s1 <= 0.0:
            raise ValueError(
                "table data produce a non-monotone interpolant; supply a "
                "table whose spline is strictly increasing"
            )

    def _u(self, z):
        z = np.asarray(z, dtype=float)
        out = np.empty_like(z)
        left = z < self._z0
        right = z > self._z1
        mid = ~(left | right)
        out[mid] = self._spline(z[mid])
        out[left] = self._u0 + self._s0 * (z[left] - self._z0)
        out[right] = self._u1 + self._s1 * (z[right] - self._z1)
        return out

    def _u_prime(self, z):
        z = np.asarray(z, dtype=float)
        out = np.empty_like(z)
        left = z < self._z0
        right = z > self._z1
        mid = ~(left | right)
        out[mid] = self._du(z[mid])
        out[left] = self._s0
        out[right] = self._s1
        return out

    def __call__(self, z):
        p = special.expit(self._u(z))
        return self.sigma_min + (self.sigma_max - self.sigma_min) * p

    def deriv(self, z):
        p = special.expit(self._u(z))
        return (self.sigma_max - self.sigma_min) * p * (1.0 - p) * self._u_prime(z)


@dataclass(frozen=True)
class GroupParams:
    """Derived market-group parameters of the model.

    Attributes
    ----------
    sigma_bar : float
        Effective (root-mean-square) volatility ``sqrt(<F^2>)``.
    d_bar : float
        Price-correction coefficient (units year^-3/2).
    tau_bar : float
        Characteristic diffusion time ``2/sigma_bar^2`` (years).
    mean_F, var_F : float
        Stationary mean and variance of the volatility.
    mean_Fp, mean_Fp2 : float
        ``<F'>`` and ``<F'^2>`` under the stationary Gaussian law.
    """

    sigma_bar: float
    d_bar: float
    tau_bar: float
    mean_F: float
    var_F: float
    mean_Fp: float
    mean_Fp2: float


_GH_ORDER_MAX = 320  # Gauss-Hermite weights underflow beyond this order


def _converged_expect(fn, gh_order: int, tol: float = 1e-10) -> float:
    """Gauss--Hermite expectation, doubling the order until stable.

    Sharply-sloped volatility functions (poles of the logistic close to the
    real axis) converge slowly in the GH order, so a fixed order cannot meet
    the absolute-error contracts; the order is escalated from ``gh_order``
    until one more doubling moves the value by less than ``tol`` (capped at
    order 320, beyond which the quadrature weights underflow).
    """
    n = max(int(gh_order), 2)
    prev = gaussian_expect(fn, n)
    while n < _GH_ORDER_MAX:
        n = min(2 * n, _GH_ORDER_MAX)
        cur = gaussian_expect(fn, n)
        if abs(cur - prev) < tol:
            return cur
        prev = cur
    return prev


def moments(vol_fn: VolFunction, hurst, gh_order: int = 40):
    """One-dimensional Gaussian moments ``(<F>, <F^2>, <F'>, <F'^2>)``.

    All are expectations of ``F(sigma_ou Z)`` (respectively ``F'``) under
    standard normal ``Z``, evaluated by Gauss--Hermite quadrature starting
    at order ``gh_order`` and refined until the absolute error is below
    1e-10.
    """
    so = sigma_ou(hurst)
    mean_f = _converged_expect(lambda z: vol_fn(so * z), gh_order)
    mean_f2 = _converged_expect(lambda z: vol_fn(so * z) ** 2, gh_order)
    mean_fp = _converged_expect(lambda z: vol_fn.deriv(so * z), gh_order)
    mean_fp2 = _converged_expect(lambda z: vol_fn.deriv(so * z) ** 2, gh_order)
    return mean_f, mean_f2, mean_fp, mean_fp2


def sigma_bar(vol_fn: VolFunction, hurst, gh_order: int = 40) -> float:
    """Effective volatility ``sqrt(<F^2>)`` (the leading-order implied vol)."""
    _, mean_f2, _, _ = moments(vol_fn, hurst, gh_order)
    return math.sqrt(mean_f2)


def g_prime_sup(vol_fn: VolFunction, z_range: float = 40.0) -> float:
    """Supremum of ``|G'| = |F F'|`` (dense-grid scan over the factor range).

    ``G(z) = (F(z)^2 - sigma_bar^2)/2`` drives every remainder bound; its
    derivative's sup norm enters the pathwise bound on the martingale
    correction term.
    """
    z = np.linspace(-z_range, z_range, 40001)
    return float(np.max(np.abs(vol_fn(z) * vol_fn.deriv(z))))


def d_bar(
    vol_fn: VolFunction,
    ke: KernelEval,
    ce: CovarianceEval,
    gh_order: int = 40,
    s_max: float = 2000.0,
    return_diagnostics: bool = False,
):
    """Correction coefficient ``d_bar`` by nested quadrature.

    Evaluates ``sigma_ou * int_0^infty Lambda(C_Z(s)) K(s) ds`` where
    ``Lambda(c) = E[F(sigma_ou Z) (FF')(sigma_ou Z')]`` at correlation ``c``.

    Because ``int_0^infty K = 0`` exactly, the constant component
    ``Lambda(0) = <F><FF'>`` contributes nothing, and the integral is
    computed in the subtracted form
    ``sigma_ou * int (Lambda(C_Z(s)) - Lambda(0)) K(s) ds``, whose integrand
    decays like ``s^(3H-7/2)``.  (The naive split into a finite range plus a
    tail assembles the answer from pieces up to ~40x larger than the result;
    the subtracted form has no such cancellation.)  The origin singularity
    ``s^(H-1/2)`` is flattened by the substitution ``w = s^(H+1/2)`` on
    geometrically graded panels (the residual ``s^(2H)`` correlation cusp is
    not polynomial in ``w``); the range ``[1, s_max]`` uses panels graded
    geometrically to match the ``s^(H-3/2)`` kernel tail; beyond ``s_max``
    a closed-form linearized tail (local slope of ``Lambda`` times the
    asymptotic powers of ``C_Z`` and ``K``) is added, with twice its
    magnitude as the error bound.  The inner Gauss--Hermite order starts at
    ``gh_order`` and is escalated until the bivariate expectation is stable
    to 1e-11 at probe correlations, meeting the absolute error target
    ``1e-7 * sigma_max^3`` independent of the steepness of ``F``.

    Raises
    ------
    RuntimeError
        If the tail bound exceeds the absolute tolerance
        ``1e-7 * sigma_max^3`` (quadrature non-convergence), with the
        diagnostic numbers in the message.
    """
    if gh_order < 2:
        raise ValueError(f"gh_order must be >= 2; got {gh_order!r}")
    if s_max < 50.0:
        raise ValueError(f"s_max must be >= 50; got {s_max!r}")
    h = ke.hurst
    so = ke.sigma_ou
    a = h + 0.5

    def f1(z):
        return vol_fn(so * z)

    def f2(z):
        return vol_fn(so * z) * vol_fn.deriv(so * z)

    # escalate the inner GH order until the probe expectations are stable
    order = max(int(gh_order), 20)
    probes = (0.95, 0.5)
    prev = [bivariate_expect(f1, f2, c, order) for c in probes]
    while order < _GH_ORDER_MAX:
        nxt = min(2 * order, _GH_ORDER_MAX)
        cand = [bivariate_expect(f1, f2, c, nxt) for c in probes]
        if max(abs(u - v) for u, v in zip(cand, prev)) < 1e-10:
            break
        order, prev = nxt, cand
    lam0 = _converged_expect(f1, order) * _converged_expect(f2, order)

    def integrand(s: float) -> float:
        lam = bivariate_expect(f1, f2, ce.cov_CZ(s), order)
        return (lam - lam0) * float(ke.kernel_K(s))

    nodes, weights = np.polynomial.legendre.leggauss(20)
    total = 0.0
    # [0, 1] with w = s^a: geometric panels toward w=0 resolve the s^(2H)
    # correlation cusp left over after the kernel singularity is flattened
    w_edges = np.concatenate(([0.0], np.geomspace(1e-10, 1.0, 41)))
    for w_lo, w_hi in zip(w_edges[:-1], w_edges[1:]):
        mid, half = 0.5 * (w_lo + w_hi), 0.5 * (w_hi - w_lo)
        wn = mid + half * nodes
        vals = np.array([integrand(float(w ** (1.0 / a))) for w in wn])
        jac = (1.0 / a) * wn ** (1.0 / a - 1.0)
        total += half * float(np.dot(weights, vals * jac))
    # [1, s_max] on geometrically graded panels
    edges = np.exp(np.linspace(0.0, math.log(s_max), 61))
    for left, right in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (left + right), 0.5 * (right - left)
        vals = np.array([integrand(float(s)) for s in mid + half * nodes])
        total += half * float(np.dot(weights, vals))

    # linearized tail: Lambda - Lambda(0) ~ lam_slope * C_Z with
    # C_Z ~ s^(2H-2)/Gamma(2H-1) and K ~ s^(H-3/2)/(sigma_ou Gamma(H-1/2))
    c_ref = ce.cov_CZ(s_max)
    lam_slope = 0.0
    if abs(c_ref) > 0.0:
        lam_slope = (bivariate_expect(f1, f2, c_ref, order) - lam0) / c_ref
    q_exp = 3.0 * h - 3.5
    tail = (
        lam_slope
        / (gamma_reflect(2.0 * h - 1.0) * so * gamma_reflect(h - 0.5))
        * s_max ** (q_exp + 1.0)
        / (-(q_exp + 1.0))
    )
    tail_bound = 2.0 * abs(tail)
    scale = vol_fn.sigma_max**3 if math.isfinite(vol_fn.sigma_max) else abs(so * total)
    tol = 1e-7 * max(scale, 1e-12)
    if tail_bound > tol:
        raise RuntimeError(
            "d_bar outer quadrature did not converge: tail bound "
            f"{tail_bound:.3e} beyond s_max={s_max} exceeds tolerance "
            f"{tol:.3e}; increase s_max"
        )
    value = so * (total + tail)
    if return_diagnostics:
        return value, {
            "s_max": s_max,
            "tail_estimate": so * tail,
            "tail_bound": so * tail_bound,
            "lambda_at_zero": lam0,
            "gh_order": order,
        }
    return value


def group_params(mp, gh_order: int = 40) -> GroupParams:
    """All derived group parameters for a model (pure function of ``mp``).

    ``mp`` provides ``hurst`` and ``vol_fn``
    (see :class:`roughvol.simulate.ModelParams`).
    """
    mean_f, mean_f2, mean_fp, mean_fp2 = moments(mp.vol_fn, mp.hurst, gh_order)
    sbar = math.sqrt(mean_f2)
    if mean_fp2 == 0.0:
        dbar = 0.0
    else:
        ke = KernelEval(mp.hurst)
        ce = CovarianceEval(mp.hurst)
        dbar = d_bar(mp.vol_fn, ke, ce, gh_order)
    return GroupParams(
        sigma_bar=sbar,
        d_bar=dbar,
        tau_bar=2.0 / mean_f2,
        mean_F=mean_f,
        var_F=mean_f2 - mean_f**2,
        mean_Fp=mean_fp,
        mean_Fp2=mean_fp2,
    )
