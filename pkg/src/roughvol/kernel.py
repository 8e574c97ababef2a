"""Moving-average kernel and covariance numerics for the fast-scale volatility factor.

This module evaluates, with certified accuracy, the three deterministic
ingredients that every other part of the package builds on:

* the moving-average kernel ``K`` of the stationary fractional
  Ornstein--Uhlenbeck (fOU) volatility factor, normalized so that
  ``int_0^infty K(u)^2 du = 1``,
* the normalized covariance ``C_Z`` of that factor, in two independent
  representations (time-domain and spectral) that are cross-checked
  against each other,
* bivariate Gaussian functionals ``Psi`` of a volatility function, and
  the covariance of the volatility process itself.

The kernel is

    K(t) = [ t^(H-1/2) - int_0^t (t-s)^(H-1/2) e^(-s) ds ] / (sigma_ou * Gamma(H+1/2)),

with ``0 < H < 1/2`` and ``sigma_ou^2 = 1/(2 sin(pi H))``.  It behaves like
``t^(H-1/2)`` at the origin (integrable singularity) and like
``t^(H-3/2)/(sigma_ou*Gamma(H-1/2))`` at infinity; ``Gamma(H-1/2) < 0`` so the
tail is negative, and the total mass ``int_0^infty K`` is exactly zero (the
Laplace transform of the bracket is ``Gamma(H+1/2) s^(1/2-H)/(1+s)``, which
vanishes at ``s=0``).  Several downstream quantities rely on this exact
cancellation and on the sign of the tail; none of it is "fixed up" here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, linalg, optimize, special

__all__ = [
    "Hurst",
    "KernelEval",
    "CovarianceEval",
    "sigma_ou",
    "gamma_reflect",
    "kernel_K",
    "cov_CZ",
    "psi_of_C",
    "cov_sigma",
    "cov_RL",
    "cz_matrix_cholesky",
]

# Default tail beyond which the asymptotic series for K is used; the series
# remainder there is below 1e-12 relative for all H in (0, 1/2).
_ASYM_SWITCH_K = 60.0
# Confluent-hypergeometric forms overflow in double precision near t ~ 700;
# integrated-kernel evaluations switch to the tail series well before that.
_ASYM_SWITCH_IK = 600.0
# Time-domain covariance switches to its (even) asymptotic series here.
_ASYM_SWITCH_CZ = 30.0
_N_ASYM_TERMS = 14


def _hurst_value(h) -> float:
    """Validate and return a rough-regime Hurst exponent as a plain float."""
    value = float(h.value) if isinstance(h, Hurst) else float(h)
    if not (0.0 < value < 0.5):
        raise ValueError(
            f"Hurst exponent must lie in the rough regime (0, 1/2); got {value!r}"
        )
    return value


@dataclass(frozen=True)
class Hurst:
    """Hurst exponent restricted to the rough regime ``0 < H < 1/2``.

    Values in ``[1/2, 1)`` describe long-range-correlated volatility and are
    rejected: the expansions implemented here are specific to short-range
    (rough) volatility.
    """

    value: float

    def __post_init__(self):
        if not (0.0 < float(self.value) < 0.5):
            raise ValueError(
                "Hurst exponent must lie in the rough regime (0, 1/2); "
                f"got {self.value!r}"
            )
        object.__setattr__(self, "value", float(self.value))

    def __float__(self) -> float:
        return self.value


def sigma_ou(h) -> float:
    """Stationary standard deviation of the fOU factor, ``sqrt(1/(2 sin(pi H)))``.

    Parameters
    ----------
    h : float or Hurst
        Hurst exponent in ``(0, 1/2)``.

    Returns
    -------
    float
        ``sigma_ou`` such that ``Var(Z_t) = sigma_ou^2`` for the unit-scale
        stationary factor.
    """
    hv = _hurst_value(h)
    return math.sqrt(1.0 / (2.0 * math.sin(math.pi * hv)))


def gamma_reflect(x: float) -> float:
    """Gamma function valid at negative non-integer arguments.

    Uses the reflection formula ``Gamma(x) = pi / (sin(pi x) Gamma(1-x))`` so
    that quantities like ``Gamma(2H-1) < 0`` (which controls the negative
    covariance tail) are computed without cancellation.
    """
    x = float(x)
    if x > 0.0:
        return float(special.gamma(x))
    if x == math.floor(x):
        raise ValueError(f"gamma_reflect undefined at non-positive integer {x!r}")
    return math.pi / (math.sin(math.pi * x) * float(special.gamma(1.0 - x)))


def _rising(a: float, k: int) -> float:
    """Rising factorial (Pochhammer) ``(a)_k``."""
    out = 1.0
    for j in range(k):
        out *= a + j
    return out


class KernelEval:
    """Evaluator for the fOU moving-average kernel ``K`` and its integrals.

    Parameters
    ----------
    hurst : float or Hurst
        Hurst exponent in ``(0, 1/2)``.
    quad_tol : float, optional
        Absolute quadrature tolerance plumbed through all integral
        evaluations (default ``1e-9``).
    split_point : float, optional
        Switch between the small-``t`` confluent-hypergeometric form and the
        large-``t`` stable rewriting (default ``1.0``).  The two routes are
        required to agree at the split to within ``10 * quad_tol``; a
        disagreement raises at construction.

    Notes
    -----
    Three evaluation routes are used, all for the same bracket
    ``B(t) = t^(a-1) - int_0^t (t-s)^(a-1) e^(-s) ds`` with ``a = H + 1/2``:

    * ``t <= split_point`` -- Kummer form
      ``B(t) = t^(a-1) - e^(-t) t^a M(a, a+1, t)/a`` whose series has all
      positive terms (no internal cancellation),
    * ``split_point < t < 60`` -- the numerically stable rewriting
      ``B(t) = t^(a-1) e^(-t) - J(t)`` with
      ``J(t) = (t^a/a) int_0^1 [1 - w^((1-a)/a)] e^(-t(1-w^(1/a))) dw``
      (substitution ``w = ((t-v)/t)^a`` in the defining integral), evaluated
      by adaptive quadrature,
    * ``t >= 60`` -- the asymptotic series
      ``B(t) ~ -t^(a-1) sum_{k>=1} (1-a)_k t^(-k)``.
    """

    def __init__(self, hurst, quad_tol: float = 1e-9, split_point: float = 1.0):
        self.hurst = _hurst_value(hurst)
        if not (quad_tol > 0.0):
            raise ValueError(f"quad_tol must be positive; got {quad_tol!r}")
        if not (0.0 < split_point < _ASYM_SWITCH_K):
            raise ValueError(
                f"split_point must lie in (0, {_ASYM_SWITCH_K}); got {split_point!r}"
            )
        self.quad_tol = float(quad_tol)
        self.split_point = float(split_point)
        self.sigma_ou = sigma_ou(self.hurst)
        self._a = self.hurst + 0.5
        self._norm = self.sigma_ou * float(special.gamma(self._a))
        self._zero_crossing = None

        small = self.kernel_small(self.split_point)
        large = self.kernel_large(self.split_point)
        if abs(small - large) > 10.0 * self.quad_tol:
            raise ValueError(
                "kernel evaluation routes disagree at split_point "
                f"{self.split_point}: {small!r} vs {large!r}"
            )

    @property
    def sigma_H(self) -> float:
        """Scale constant of the underlying fractional noise.

        Defined through ``sigma_ou^2 = Gamma(2H+1) sigma_H^2 / 2``.
        """
        return self.sigma_ou * math.sqrt(2.0 / float(special.gamma(2.0 * self.hurst + 1.0)))

    # -- kernel values -----------------------------------------------------

    def kernel_small(self, t):
        """Small-``t`` route for ``K(t)`` (Kummer confluent-hypergeometric form)."""
        t = np.asarray(t, dtype=float)
        a = self._a
        raw = t ** (a - 1.0) - np.exp(-t) * t**a / a * special.hyp1f1(a, a + 1.0, t)
        return raw / self._norm

    def _kernel_quad_one(self, t: float) -> float:
        a = self._a

        def g(w):
            return (1.0 - w ** ((1.0 - a) / a)) * np.exp(-t * (1.0 - w ** (1.0 / a)))

        j, _ = integrate.quad(
            g, 0.0, 1.0, epsabs=0.1 * self.quad_tol, epsrel=1e-13, limit=200
        )
        bracket = t ** (a - 1.0) * math.exp(-t) - j * t**a / a
        return bracket / self._norm

    def _kernel_asym(self, t):
        t = np.asarray(t, dtype=float)
        a = self._a
        acc = np.zeros_like(t)
        term = np.ones_like(t)
        for k in range(1, _N_ASYM_TERMS + 1):
            term = term * (k - a) / t
            acc += term
        return -(t ** (a - 1.0)) * acc / self._norm

    def kernel_large(self, t):
        """Large-``t`` route for ``K(t)`` (stable rewriting / asymptotic series)."""
        t = np.asarray(t, dtype=float)
        out = np.empty_like(t)
        mid = t < _ASYM_SWITCH_K
        if np.any(mid):
            out[mid] = [self._kernel_quad_one(float(ti)) for ti in np.atleast_1d(t[mid])]
        if np.any(~mid):
            out[~mid] = self._kernel_asym(t[~mid])
        return out

    def kernel_K(self, t):
        """Kernel value ``K(t)`` for ``t > 0`` (scalar or array).

        Raises
        ------
        ValueError
            If any ``t`` is zero (the kernel diverges like ``t^(H-1/2)``;
            integrate over cells instead of evaluating at the origin) or
            negative.
        """
        arr = np.asarray(t, dtype=float)
        if np.any(arr < 0.0):
            raise ValueError("kernel_K requires t >= 0")
        if np.any(arr == 0.0):
            raise ValueError(
                "kernel is singular at the origin (t=0); integrate the cell "
                "mass via integrated_K instead of evaluating pointwise"
            )
        out = np.empty_like(arr)
        small = arr <= self.split_point
        if np.any(small):
            out[small] = self.kernel_small(arr[small])
        if np.any(~small):
            out[~small] = self.kernel_large(arr[~small])
        return out if out.ndim else float(out)

    # -- integrated kernel -------------------------------------------------

    def integrated_K(self, t):
        """Running integral ``IK(t) = int_0^t K(u) du`` (scalar or array).

        For ``t`` beyond the hypergeometric overflow range the tail series of
        ``-int_t^infty K`` is used (the total integral is exactly zero).
        """
        arr = np.asarray(t, dtype=float)
        if np.any(arr < 0.0):
            raise ValueError("integrated_K requires t >= 0")
        a = self._a
        out = np.zeros_like(arr)
        lo = (arr > 0.0) & (arr <= _ASYM_SWITCH_IK)
        hi = arr > _ASYM_SWITCH_IK
        if np.any(lo):
            tl = arr[lo]
            out[lo] = (
                tl**a / a
                - np.exp(-tl) * tl ** (a + 1.0) / (a + 1.0)
                * special.hyp1f1(a + 1.0, a + 2.0, tl) / a
            ) / self._norm
        if np.any(hi):
            th = arr[hi]
            acc = np.zeros_like(th)
            term = np.ones_like(th)
            for k in range(1, _N_ASYM_TERMS + 1):
                term = term * (k - a) / th
                acc += term * th**a / (k - a)
            out[hi] = acc / self._norm
        return out if out.ndim else float(out)

    def cell_masses(self, delta: float, count: int):
        """Cell integrals ``M_k = int_{k delta}^{(k+1) delta} K(u) du``.

        Evaluated as differences of the closed-form running integral, which
        handles the origin singularity exactly and keeps the cumulative sums
        consistent with ``integrated_K`` to machine precision.
        """
        if delta <= 0.0:
            raise ValueError(f"delta must be positive; got {delta!r}")
        if count < 1:
            raise ValueError(f"count must be >= 1; got {count!r}")
        ik = self.integrated_K(delta * np.arange(1, count + 1))
        masses = np.empty(count)
        masses[0] = ik[0]
        np.subtract(ik[1:], ik[:-1], out=masses[1:])
        return masses

    # -- squared-kernel integrals -------------------------------------------

    def ksq_first_cell(self, delta: float) -> float:
        """``int_0^delta K(u)^2 du`` with the ``u^(2H-1)`` endpoint singularity.

        Uses algebraic-weight adaptive quadrature: the integrand is written
        as ``u^(2a-2) * f(u)^2`` with ``f`` smooth and ``f(0) = 1/norm``.
        """
        if delta <= 0.0:
            raise ValueError(f"delta must be positive; got {delta!r}")
        a = self._a
        norm = self._norm

        def smooth(u):
            if u <= 0.0:
                return 1.0 / norm**2
            ratio = 1.0 - np.exp(-u) * u / a * special.hyp1f1(a, a + 1.0, u)
            return (ratio / norm) ** 2

        val, _ = integrate.quad(
            smooth,
            0.0,
            float(delta),
            weight="alg",
            wvar=(2.0 * a - 2.0, 0.0),
            epsabs=0.1 * self.quad_tol,
            epsrel=1e-13,
            limit=200,
        )
        return float(val)

    def ksq_cum(self, t: float) -> float:
        """``int_0^t K(u)^2 du`` (monotone, converging to 1)."""
        t = float(t)
        if t < 0.0:
            raise ValueError("ksq_cum requires t >= 0")
        if t == 0.0:
            return 0.0
        if t >= _ASYM_SWITCH_K:
            return 1.0 - self.ksq_tail(t)
        head = self.ksq_first_cell(min(t, 1.0))
        if t <= 1.0:
            return head
        val, _ = integrate.quad(
            lambda u: float(self.kernel_K(u)) ** 2,
            1.0,
            t,
            epsabs=0.1 * self.quad_tol,
            epsrel=1e-12,
            limit=200,
        )
        return head + float(val)

    def ksq_tail(self, t: float) -> float:
        """``int_t^infty K(u)^2 du`` (the unresolved-history variance).

        For ``t >= 60`` the square of the kernel's asymptotic series is
        integrated termwise; below that, the complement of ``ksq_cum``.
        """
        t = float(t)
        if t < 0.0:
            raise ValueError("ksq_tail requires t >= 0")
        if t < _ASYM_SWITCH_K:
            return 1.0 - self.ksq_cum(t)
        a = self._a
        one_minus_a = 1.0 - a
        coeff = [_rising(one_minus_a, k) for k in range(1, _N_ASYM_TERMS + 1)]
        total = 0.0
        for m in range(2, _N_ASYM_TERMS + 2):
            c_m = 0.0
            for k in range(1, m):
                l = m - k
                if l < 1 or l > _N_ASYM_TERMS or k > _N_ASYM_TERMS:
                    continue
                c_m += coeff[k - 1] * coeff[l - 1]
            total += c_m * t ** (2.0 * a - 1.0 - m) / (m + 1.0 - 2.0 * a)
        return total / self._norm**2

    # -- sign structure ------------------------------------------------------

    def zero_crossing(self) -> float:
        """Unique time ``t*`` where the kernel changes sign (positive before,
        negative after)."""
        if self._zero_crossing is None:
            lo, hi = 0.5, 8.0
            while self.kernel_K(hi) > 0.0:
                hi *= 2.0
                if hi > 1e3:  # pragma: no cover - defensive
                    raise RuntimeError("kernel zero crossing not bracketed")
            self._zero_crossing = float(
                optimize.brentq(lambda u: float(self.kernel_K(u)), lo, hi, xtol=1e-13)
            )
        return self._zero_crossing

    def abs_integral(self) -> float:
        """``int_0^infty |K(u)| du``.

        Since the total signed mass is exactly zero, this equals
        ``2 * IK(t*)`` at the sign change ``t*``.
        """
        return 2.0 * float(self.integrated_K(self.zero_crossing()))


def kernel_K(t, ke: KernelEval):
    """Kernel value ``K(t)``; free-function form of :meth:`KernelEval.kernel_K`."""
    return ke.kernel_K(t)


class CovarianceEval:
    """Evaluator for the normalized fOU covariance ``C_Z``.

    Parameters
    ----------
    hurst : float or Hurst
        Hurst exponent in ``(0, 1/2)``.
    repr : {"TimeDomain", "Spectral"}, optional
        Which representation :meth:`cov_CZ` uses.  ``TimeDomain`` evaluates
        the defining integral
        ``C_Z(s) = [ (1/2) int e^(-|v|) |s+v|^(2H) dv - s^(2H) ] / Gamma(2H+1)``
        with the ``|s+v|`` kink split out, each piece in closed form
        (incomplete-gamma / confluent-hypergeometric), switching to an
        asymptotic series for large ``s``.  ``Spectral`` integrates
        ``(2 sin(pi H)/pi) int_0^infty cos(s x) x^(1-2H)/(1+x^2) dx`` with
        oscillatory-tail (Filon-type cycle summation) handling.
    quad_tol : float, optional
        Absolute tolerance for the spectral quadrature (default ``1e-9``).

    Notes
    -----
    ``C_Z(0) = 1``; near zero ``1 - C_Z(s) ~ s^(2H)/Gamma(2H+1)``; at
    infinity ``C_Z(s) ~ s^(2H-2)/Gamma(2H-1)``, which is *negative* for
    ``H < 1/2``, and the total integral over the line is zero.
    """

    REPRS = ("TimeDomain", "Spectral")

    def __init__(self, hurst, repr: str = "TimeDomain", quad_tol: float = 1e-9):
        self.hurst = _hurst_value(hurst)
        if repr not in self.REPRS:
            raise ValueError(f"repr must be one of {self.REPRS}; got {repr!r}")
        if not (quad_tol > 0.0):
            raise ValueError(f"quad_tol must be positive; got {quad_tol!r}")
        self.repr = repr
        self.quad_tol = float(quad_tol)

    # -- time-domain route ----------------------------------------------------

    def _cz_td_scalar(self, s: float) -> float:
        h = self.hurst
        b = 2.0 * h + 1.0
        if s == 0.0:
            return 1.0
        if s <= _ASYM_SWITCH_CZ:
            gb = float(special.gamma(b))
            term_a = math.exp(s) * float(special.gammaincc(b, s)) * gb
            term_b = math.exp(-s) * s**b / b * float(special.hyp1f1(b, b + 1.0, s))
            term_c = math.exp(-s) * gb
            return (0.5 * (term_a + term_b + term_c) - s ** (2.0 * h)) / gb
        total = 0.5 * math.exp(-s)
        for j in range(1, 9):
            total += s ** (2.0 * h - 2.0 * j) / gamma_reflect(2.0 * h + 1.0 - 2.0 * j)
        return total

    def _cz_sp_scalar(self, s: float) -> float:
        h = self.hurst
        if s == 0.0:
            return 1.0
        val, _ = integrate.quad(
            lambda x: x ** (1.0 - 2.0 * h) / (1.0 + x * x),
            0.0,
            np.inf,
            weight="cos",
            wvar=s,
            epsabs=0.1 * self.quad_tol,
            limlst=200,
            limit=400,
        )
        return 2.0 * math.sin(math.pi * h) / math.pi * float(val)

    def cov_CZ(self, s):
        """Normalized covariance ``C_Z(|s|)`` (scalar or array)."""
        arr = np.asarray(s, dtype=float)
        if not np.all(np.isfinite(arr)):
            raise ValueError("cov_CZ requires finite s")
        fn = self._cz_td_scalar if self.repr == "TimeDomain" else self._cz_sp_scalar
        out = np.array([fn(abs(float(v))) for v in np.atleast_1d(arr).ravel()])
        out = out.reshape(np.atleast_1d(arr).shape)
        return out if arr.ndim else float(out[0])


def cov_CZ(s, ce: CovarianceEval):
    """Covariance value ``C_Z(s)``; free-function form of :meth:`CovarianceEval.cov_CZ`."""
    return ce.cov_CZ(s)


# -- bivariate Gaussian functionals ----------------------------------------


def _gh_nodes(order: int):
    if not (2 <= order <= 320):
        raise ValueError(
            "gh_order must be in [2, 320] (Gauss-Hermite weights underflow "
            f"at higher orders); got {order!r}"
        )
    nodes, weights = np.polynomial.hermite.hermgauss(int(order))
    # Physicists' Hermite: E[f(N(0,1))] = sum w_i f(sqrt(2) x_i) / sqrt(pi).
    return math.sqrt(2.0) * nodes, weights / math.sqrt(math.pi)


def gaussian_expect(fn, gh_order: int = 40):
    """``E[fn(Z)]`` for standard normal ``Z`` by Gauss--Hermite quadrature."""
    z, w = _gh_nodes(gh_order)
    return float(np.dot(w, fn(z)))


def bivariate_expect(fn1, fn2, c: float, gh_order: int = 40) -> float:
    """``E[fn1(Z) fn2(Z')]`` for standard bivariate normal with correlation ``c``.

    Uses the rotation ``Z' = c Z + sqrt(1-c^2) W`` and a tensorized
    Gauss--Hermite rule; ``|c|`` within ``1e-10`` of 1 falls back to the
    degenerate one-dimensional integral (the joint density collapses onto a
    line there).
    """
    c = float(c)
    if abs(c) > 1.0:
        raise ValueError(f"correlation must satisfy |c| <= 1; got {c!r}")
    z, w = _gh_nodes(gh_order)
    if abs(c) > 1.0 - 1e-10:
        sign = 1.0 if c > 0.0 else -1.0
        return float(np.dot(w, fn1(z) * fn2(sign * z)))
    z2 = c * z[:, None] + math.sqrt(1.0 - c * c) * z[None, :]
    inner = np.asarray(fn2(z2)) @ w
    return float(np.dot(w, fn1(z) * inner))


def psi_of_C(c: float, vol_fn, hurst, gh_order: int = 40) -> float:
    """Centered volatility-function covariance functional ``Psi(c)``.

    ``Psi(c) = E[F_c(Z) F_c(Z')]`` where ``F_c(z) = F(sigma_ou z) - <F>``
    and ``(Z, Z')`` is standard bivariate normal with correlation ``c``.
    ``Psi(1)`` is the stationary variance of the volatility and
    ``Psi(C_Z(s/eps))`` its autocovariance at lag ``s``.

    Parameters
    ----------
    c : float
        Correlation in ``[-1, 1]``.
    vol_fn : callable
        Volatility function ``F`` (see :mod:`roughvol.gaussfunc`).
    hurst : float or Hurst
        Hurst exponent (sets ``sigma_ou``).
    gh_order : int, optional
        Gauss--Hermite order (default 40).

    Raises
    ------
    ValueError
        If ``|c| > 1`` or ``gh_order < 2``.
    """
    if gh_order < 2:
        raise ValueError(f"gh_order must be >= 2; got {gh_order!r}")
    so = sigma_ou(hurst)
    mean_f = gaussian_expect(lambda z: vol_fn(so * z), gh_order)

    def centered(z):
        return vol_fn(so * z) - mean_f

    return bivariate_expect(centered, centered, c, gh_order)


def cov_sigma(s: float, mp, gh_order: int = 40) -> float:
    """Autocovariance of the volatility process at lag ``s`` (in years).

    ``Cov(sigma_t, sigma_{t+s}) = Psi(C_Z(s/eps))``; at ``s = 0`` this is the
    stationary variance ``<F^2> - <F>^2``.  ``mp`` provides ``hurst``,
    ``eps`` and ``vol_fn`` (see :class:`roughvol.simulate.ModelParams`).
    """
    s = float(s)
    if s < 0.0:
        raise ValueError("cov_sigma requires s >= 0")
    ce = CovarianceEval(mp.hurst)
    return psi_of_C(ce.cov_CZ(s / mp.eps), mp.vol_fn, mp.hurst, gh_order)


def cov_RL(t: float, s: float, ke: KernelEval) -> float:
    """Normalized covariance of the zero-started (Riemann--Liouville) factor.

    ``C0_t(s) = int_0^t K(u) K(u+s) du`` (the normalizing
    ``int_0^infty K^2`` equals 1).  Converges monotonically to ``C_Z(s)``
    as ``t`` grows; the transient is what distinguishes the zero-started
    factor from the stationary one.
    """
    t = float(t)
    s = float(s)
    if t < 0.0 or s < 0.0:
        raise ValueError("cov_RL requires t >= 0 and s >= 0")
    if t == 0.0:
        return 0.0
    if s == 0.0:
        return ke.ksq_cum(t)

    a = ke._a
    nodes, weights = np.polynomial.legendre.leggauss(24)

    def integral(lo: float, hi: float, graded: bool) -> float:
        if graded:
            # substitution u = w^(1/a) flattens the u^(a-1) origin singularity
            w_lo, w_hi = lo**a, hi**a
            edges = np.linspace(w_lo, w_hi, 17)
            total = 0.0
            for left, right in zip(edges[:-1], edges[1:]):
                mid, half = 0.5 * (left + right), 0.5 * (right - left)
                wn = mid + half * nodes
                un = wn ** (1.0 / a)
                vals = ke.kernel_K(un) * ke.kernel_K(un + s)
                jac = (1.0 / a) * wn ** (1.0 / a - 1.0)
                total += half * float(np.dot(weights, vals * jac))
            return total
        edges = np.exp(np.linspace(math.log(lo), math.log(hi), 33))
        total = 0.0
        for left, right in zip(edges[:-1], edges[1:]):
            mid, half = 0.5 * (left + right), 0.5 * (right - left)
            un = mid + half * nodes
            vals = ke.kernel_K(un) * ke.kernel_K(un + s)
            total += half * float(np.dot(weights, vals))
        return total

    out = integral(0.0, min(t, 1.0), graded=True)
    if t > 1.0:
        out += integral(1.0, t, graded=False)
    return out


def cz_matrix_cholesky(times, eps: float, ce: CovarianceEval, jitter_max: float = 1e-10):
    """Covariance matrix ``sigma_ou^2 C_Z((t_i - t_j)/eps)`` and its Cholesky factor.

    Tries an exact factorization first, then escalates a diagonal jitter up
    to ``jitter_max``; raises if the matrix is still not positive
    semidefinite at that point.

    Returns
    -------
    (cov, chol, jitter) : (ndarray, ndarray, float)
    """
    times = np.asarray(times, dtype=float)
    if eps <= 0.0:
        raise ValueError(f"eps must be positive; got {eps!r}")
    so2 = sigma_ou(ce.hurst) ** 2
    lags = np.abs(times[:, None] - times[None, :]) / eps
    unique, inverse = np.unique(lags.ravel(), return_inverse=True)
    vals = np.asarray(ce.cov_CZ(unique), dtype=float)
    cov = so2 * vals[inverse].reshape(lags.shape)
    for jitter in (0.0, 1e-14, 1e-12, jitter_max):
        if jitter > jitter_max:
            break
        try:
            chol = linalg.cholesky(cov + jitter * np.eye(cov.shape[0]), lower=True)
            return cov, chol, jitter
        except linalg.LinAlgError:
            continue
    raise RuntimeError(
        f"covariance matrix is not positive semidefinite after jitter {jitter_max}"
    )
