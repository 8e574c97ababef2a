"""Option pricing: leading order, first-order correction, implied volatility.

The corrected price is

    Q^eps(x) = Q0(x) + sqrt(eps) * rho * Q1(x),
    Q1(x)    = (T - t) * d_bar * (x d/dx (x^2 d^2/dx^2)) Q0(x),

where ``Q0`` is the zero-rate Black--Scholes price at the effective
volatility ``sigma_bar``.  The induced implied-volatility expansion is
affine in log-moneyness,

    I = sigma_bar + sqrt(eps) rho d_bar [1/(2 sigma_bar)
        + log(K/x) / (sigma_bar^3 (T-t))],

and the term-structure utilities expose the characteristic exponent
``zeta`` and the maturity factor ``A`` for the three regimes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate, optimize, special

from .kernel import _gh_nodes

__all__ = [
    "Call",
    "SmoothCustom",
    "smooth_ramp",
    "PriceResult",
    "TermStructureParams",
    "bs_price",
    "bs_operator_greeks",
    "corrected_price",
    "implied_vol_invert",
    "implied_vol_asymptotic",
    "implied_vol_general",
    "zeta_exponent",
    "term_structure_factor",
]

_GH_PRICE_ORDER = 200  # fixed rule for smooth-payoff lognormal expectations

_REGIMES = ("FastMeanReverting", "SlowMeanReverting", "SmallAmplitude")


def _norm_pdf(d):
    return np.exp(-0.5 * np.square(d)) / math.sqrt(2.0 * math.pi)


class Call:
    """European call payoff ``h(x) = max(x - strike, 0)``."""

    def __init__(self, strike: float):
        if not (strike > 0.0):
            raise ValueError(f"strike must be positive; got {strike!r}")
        self.strike = float(strike)

    def __call__(self, x):
        return np.maximum(np.asarray(x, dtype=float) - self.strike, 0.0)

    def __repr__(self):
        return f"Call(strike={self.strike})"


class SmoothCustom:
    """Smooth payoff given by ``h`` with its first two derivatives.

    The derivatives are cross-checked against central finite differences of
    ``h`` at construction; inconsistent handles raise ``ValueError``.

    Parameters
    ----------
    h, h_prime, h_double_prime : callable
        Vectorized payoff and derivatives on (0, inf).
    check_points : array_like, optional
        Spots used for the finite-difference validation (default a
        geometric sweep of (0.25, 0.5, 1, 2, 4)).
    """

    def __init__(
        self,
        h: Callable,
        h_prime: Callable,
        h_double_prime: Callable,
        check_points=None,
    ):
        self.h = h
        self.h_prime = h_prime
        self.h_double_prime = h_double_prime
        pts = np.asarray(
            [0.25, 0.5, 1.0, 2.0, 4.0] if check_points is None else check_points,
            dtype=float,
        )
        if pts.size == 0 or np.any(pts <= 0.0):
            raise ValueError("check_points must be positive and non-empty")
        scale = float(np.max(np.abs(h(pts)))) + 1.0
        for x in pts:
            step = 1e-4 * x
            fd1 = (h(x + step) - h(x - step)) / (2.0 * step)
            fd2 = (h(x + step) - 2.0 * h(x) + h(x - step)) / step**2
            if abs(h_prime(x) - fd1) > 1e-4 * (abs(fd1) + scale / x):
                raise ValueError(
                    f"h_prime inconsistent with h at x={x}: "
                    f"{h_prime(x)!r} vs finite difference {fd1!r}"
                )
            if abs(h_double_prime(x) - fd2) > 1e-3 * (abs(fd2) + scale / x**2):
                raise ValueError(
                    f"h_double_prime inconsistent with h at x={x}: "
                    f"{h_double_prime(x)!r} vs finite difference {fd2!r}"
                )

    def __call__(self, x):
        return self.h(np.asarray(x, dtype=float))


def smooth_ramp(center: float, width: float, height: float = 1.0) -> SmoothCustom:
    """Bounded C-infinity ramp payoff ``h(x) = height * expit((x-center)/width)``.

    A smooth, bounded stand-in for a digital/call-spread profile; its
    derivatives are analytic, making it the strict test case for the
    smooth-payoff pricing proposition.
    """
    if not (center > 0.0 and width > 0.0 and height > 0.0):
        raise ValueError("center, width, height must all be positive")

    def h(x):
        return height * special.expit((np.asarray(x, dtype=float) - center) / width)

    def hp(x):
        p = special.expit((np.asarray(x, dtype=float) - center) / width)
        return height * p * (1.0 - p) / width

    def hpp(x):
        p = special.expit((np.asarray(x, dtype=float) - center) / width)
        return height * p * (1.0 - p) * (1.0 - 2.0 * p) / width**2

    return SmoothCustom(h, hp, hpp, check_points=[0.5 * center, center, 2.0 * center])


@dataclass(frozen=True)
class PriceResult:
    """Corrected-price output.

    ``q_eps = q0 + sqrt(eps) * rho * q1`` exactly; the implied-volatility
    fields are filled for call payoffs with positive time to maturity and
    are ``None`` otherwise.
    """

    q0: float
    q1: float
    q_eps: float
    implied_vol_inverted: Optional[float]
    implied_vol_asymptotic: Optional[float]


@dataclass(frozen=True)
class TermStructureParams:
    """Inputs of the term-structure reporting formula.

    Attributes
    ----------
    regime : str
        One of ``FastMeanReverting``, ``SlowMeanReverting``,
        ``SmallAmplitude``.
    tau_mr : float
        Mean-reversion time (years).
    delta_sigma : float
        Smile-amplitude parameter (free reporting input).
    tau_bar : float
        Characteristic diffusion time (years).
    """

    regime: str
    tau_mr: float
    delta_sigma: float
    tau_bar: float

    def __post_init__(self):
        if self.regime not in _REGIMES:
            raise ValueError(
                f"regime must be one of {_REGIMES}; got {self.regime!r}"
            )
        if not (self.tau_mr > 0.0 and self.tau_bar > 0.0):
            raise ValueError("tau_mr and tau_bar must be positive")
        if not math.isfinite(self.delta_sigma):
            raise ValueError("delta_sigma must be finite")


def _validate_market(x, sigma: float, tau: float):
    if np.any(np.asarray(x) <= 0.0):
        raise ValueError("spot must be positive")
    if not (sigma > 0.0):
        raise ValueError(f"sigma must be positive; got {sigma!r}")
    if not (tau >= 0.0):
        raise ValueError(f"tau must be nonnegative; got {tau!r}")


def bs_price(x, payoff, sigma: float, tau: float):
    """Zero-rate Black--Scholes price of ``payoff`` (vectorized in ``x``).

    Calls use the closed formula; smooth payoffs integrate ``h`` against
    the lognormal transition density by Gauss--Hermite quadrature.
    ``tau = 0`` returns ``h(x)``.
    """
    _validate_market(x, sigma, tau)
    x_arr = np.asarray(x, dtype=float)
    scalar = x_arr.ndim == 0
    x_arr = np.atleast_1d(x_arr)
    if tau == 0.0:
        out = payoff(x_arr)
    elif isinstance(payoff, Call):
        rt = sigma * math.sqrt(tau)
        d1 = (np.log(x_arr / payoff.strike) + 0.5 * rt * rt) / rt
        out = x_arr * special.ndtr(d1) - payoff.strike * special.ndtr(d1 - rt)
    else:
        zeta, w = _gh_nodes(_GH_PRICE_ORDER)
        rt = sigma * math.sqrt(tau)
        y = np.exp(-0.5 * rt * rt + rt * zeta)
        out = payoff.h(x_arr[:, None] * y[None, :]) @ w
    return float(out[0]) if scalar else out


def bs_operator_greeks(x, payoff, sigma: float, tau: float):
    """The operator greeks ``(D2, D12)`` of the leading-order price.

    ``D2 = x^2 d^2Q0/dx^2`` and ``D12 = x d/dx (x^2 d^2Q0/dx^2)``.  Calls
    use closed forms at ``d1``; smooth payoffs differentiate under the
    lognormal integral (the third payoff derivative is eliminated by
    Gaussian integration by parts, so only ``h''`` is required).

    Raises
    ------
    ValueError
        If ``tau <= 0`` (the operators are undefined at expiry).
    """
    _validate_market(x, sigma, tau)
    if tau == 0.0:
        raise ValueError("operator greeks are undefined at expiry (tau=0)")
    x_arr = np.asarray(x, dtype=float)
    scalar = x_arr.ndim == 0
    x_arr = np.atleast_1d(x_arr)
    rt = sigma * math.sqrt(tau)
    if isinstance(payoff, Call):
        d1 = (np.log(x_arr / payoff.strike) + 0.5 * rt * rt) / rt
        d2v = x_arr * _norm_pdf(d1) / rt
        d12 = d2v * (1.0 - d1 / rt)
    else:
        zeta, w = _gh_nodes(_GH_PRICE_ORDER)
        y = np.exp(-0.5 * rt * rt + rt * zeta)
        hpp = payoff.h_double_prime(x_arr[:, None] * y[None, :])
        y2 = y * y
        d2v = x_arr**2 * ((hpp * y2[None, :]) @ w)
        # x^3 E[h'''(xY) Y^3] = x^2 E[zeta h''(xY) Y^2]/rt - 2 x^2 E[h'' Y^2]
        # (Gaussian integration by parts), so
        # D12 = 2 D2 + x^3 E[h''' Y^3] = x^2 E[zeta h''(xY) Y^2]/rt
        d12 = x_arr**2 * ((hpp * (zeta * y2)[None, :]) @ w) / rt
    if scalar:
        return float(d2v[0]), float(d12[0])
    return d2v, d12


def implied_vol_invert(price: float, x: float, strike: float, tau: float) -> float:
    """Black--Scholes implied volatility of a call price.

    Bracketing plus Newton polish; the returned volatility reprices to
    within ``1e-12 * x``.

    Raises
    ------
    ValueError
        If ``price`` is at or below the intrinsic lower bound
        ``max(x - strike, 0)`` or at or above the upper bound ``x``
        (the message names the violated bound), or if ``tau <= 0``.
    """
    if not (x > 0.0 and strike > 0.0):
        raise ValueError("spot and strike must be positive")
    if not (tau > 0.0):
        raise ValueError(f"tau must be positive to invert a price; got {tau!r}")
    lower = max(x - strike, 0.0)
    if price <= lower:
        raise ValueError(
            f"price {price!r} at or below the intrinsic lower bound {lower!r}"
        )
    if price >= x:
        raise ValueError(f"price {price!r} at or above the upper bound x={x!r}")
    payoff = Call(strike)

    def f(sig):
        return bs_price(x, payoff, sig, tau) - price

    hi = 1.0
    while f(hi) < 0.0:
        hi *= 2.0
        if hi > 1e4:  # pragma: no cover - unreachable inside the bounds
            raise RuntimeError("implied volatility bracket expansion failed")
    sig = optimize.brentq(f, 1e-12, hi, xtol=1e-14, rtol=8.9e-16)
    # Newton polish against the vega
    for _ in range(3):
        resid = f(sig)
        if abs(resid) < 1e-12 * x:
            break
        rt = sig * math.sqrt(tau)
        d1 = (math.log(x / strike) + 0.5 * rt * rt) / rt
        vega = x * float(_norm_pdf(d1)) * math.sqrt(tau)
        if vega <= 0.0:
            break
        sig -= resid / vega
    return float(sig)


def implied_vol_asymptotic(mp, gp, x, strike, t: float):
    """First-order implied-volatility expansion (affine in log-moneyness).

    ``I = sigma_bar + sqrt(eps) rho d_bar [1/(2 sigma_bar)
    + log(K/x)/(sigma_bar^3 (T-t))]``; vectorized in ``strike``.
    """
    tau = mp.maturity_T - t
    if not (tau > 0.0):
        raise ValueError(f"need t < maturity; got t={t!r}, T={mp.maturity_T!r}")
    k = np.log(np.asarray(strike, dtype=float) / x)
    sb = gp.sigma_bar
    out = sb + math.sqrt(mp.eps) * mp.rho * gp.d_bar * (
        1.0 / (2.0 * sb) + k / (sb**3 * tau)
    )
    return float(out) if np.ndim(strike) == 0 else out


def corrected_price(mp, gp, payoff, t: float) -> PriceResult:
    """First-order corrected price at time ``t`` for spot ``mp.x0``.

    ``q0`` is the Black--Scholes price at ``gp.sigma_bar``;
    ``q1 = (T-t) d_bar D12``; ``q_eps = q0 + sqrt(eps) rho q1``.  At
    ``t = T`` the payoff itself is returned with ``q1 = 0``.  For call
    payoffs with ``t < T`` both implied-volatility fields are filled.
    """
    if not (0.0 <= t <= mp.maturity_T):
        raise ValueError(
            f"t must lie in [0, {mp.maturity_T!r}]; got {t!r}"
        )
    tau = mp.maturity_T - t
    q0 = float(bs_price(mp.x0, payoff, gp.sigma_bar, tau))
    if tau == 0.0:
        return PriceResult(q0, 0.0, q0, None, None)
    _, d12 = bs_operator_greeks(mp.x0, payoff, gp.sigma_bar, tau)
    q1 = tau * gp.d_bar * float(d12)
    q_eps = q0 + math.sqrt(mp.eps) * mp.rho * q1
    iv_inv = iv_asym = None
    if isinstance(payoff, Call):
        iv_asym = float(implied_vol_asymptotic(mp, gp, mp.x0, payoff.strike, t))
        lower = max(mp.x0 - payoff.strike, 0.0)
        if lower < q_eps < mp.x0:
            iv_inv = implied_vol_invert(q_eps, mp.x0, payoff.strike, tau)
    return PriceResult(q0, q1, q_eps, iv_inv, iv_asym)


def zeta_exponent(h: float, regime: str) -> float:
    """Characteristic term-structure exponent ``zeta(H)``.

    Slow mean reversion gives ``H + 1/2``; fast gives ``max(H - 1/2, 0)``;
    small amplitude follows the short-maturity slope of the maturity
    factor, ``H + 1/2``.  Accepts the full range ``0 < h < 1`` (reporting
    covers both rough and smooth exponents).
    """
    if not (0.0 < h < 1.0):
        raise ValueError(f"h must lie in (0, 1); got {h!r}")
    if regime not in _REGIMES:
        raise ValueError(f"regime must be one of {_REGIMES}; got {regime!r}")
    if regime == "FastMeanReverting":
        return max(h - 0.5, 0.0)
    return h + 0.5


def term_structure_factor(tau: float, ts: TermStructureParams, h: float) -> float:
    """Maturity factor ``A(tau/tau_bar, tau/tau_mr)`` of the smile level.

    ``A = (tau/tau_bar)^(H+1/2) * (1 - int_0^u exp(-v) (1 - v/u)^(H+3/2) dv)``
    with ``u = tau/tau_mr``.  Interpolates between the short-maturity slope
    ``H + 1/2`` and the long-maturity slope ``H - 1/2`` on a log-log plot.
    """
    if not (tau > 0.0):
        raise ValueError(f"tau must be positive; got {tau!r}")
    if not (0.0 < h < 1.0):
        raise ValueError(f"h must lie in (0, 1); got {h!r}")
    u = tau / ts.tau_mr
    c = h + 1.5
    # integrand decays like exp(-v); beyond v=50 the contribution is < 2e-22
    upper = min(u, 50.0)
    val, _ = integrate.quad(
        lambda v: math.exp(-v) * (1.0 - v / u) ** c, 0.0, upper, limit=200
    )
    return (tau / ts.tau_bar) ** (h + 0.5) * (1.0 - val)


def implied_vol_general(x, strike, tau: float, ts: TermStructureParams,
                        h: float, sigma_level: float):
    """Term-structure reporting formula for the implied volatility.

    ``I = sigma_level + delta_sigma [ (tau/tau_bar)^zeta
    + (tau/tau_bar)^(zeta-1) log(K/x) ]`` with ``zeta`` from the regime;
    vectorized in ``strike``.  ``delta_sigma`` is a free reporting
    parameter (the within-regime constant is not pinned down here).
    """
    if not (tau > 0.0):
        raise ValueError(f"tau must be positive; got {tau!r}")
    if np.any(np.asarray(x) <= 0.0) or np.any(np.asarray(strike) <= 0.0):
        raise ValueError("spot and strike must be positive")
    zeta = zeta_exponent(h, ts.regime)
    ratio = tau / ts.tau_bar
    k = np.log(np.asarray(strike, dtype=float) / x)
    out = sigma_level + ts.delta_sigma * (ratio**zeta + ratio ** (zeta - 1.0) * k)
    return float(out) if np.ndim(strike) == 0 else out
