"""Exact reference values for the implemented noise classes and readout identities.

Everything here is deterministic and independent of any RNG:

* closed forms for the OU autocovariance and Lorentzian spectrum,
* arbitrary-order telegraph moments/cumulants by exact two-state transfer
  matrices (with closed-form shortcuts at orders 2 and 3),
* exact expectations of measurement-outcome products, either by brute-force
  enumeration over small discrete path supports or by characteristic
  functions, which also yield the exact conditional-mode estimator targets
  E[∏ sin(τ β(t_k))] for every noise class.

These are the ground truth used by the test suite and figure overlays.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import prod
from typing import Sequence

import numpy as np

from ._partitions import mobius_coefficient, set_partitions
from .errors import ParameterError
from .noise import NoiseParams, OuParams, TlfEnsembleParams, TlfParams

MAX_SUPPORT_PATHS = 10_000


@dataclass(frozen=True)
class OracleResult:
    """A reference value plus the method that produced it."""

    value: float
    method: str  # closed-form | transfer-matrix | brute-force


# ---------------------------------------------------------------------------
# Ornstein-Uhlenbeck closed forms


def ou_cumulant2(params: OuParams, lag: float) -> float:
    """Exact OU autocovariance (big_gamma/2) exp(-gamma |lag|) in MHz²."""
    return 0.5 * params.big_gamma * np.exp(-params.gamma * abs(lag))


def ou_spectrum(params: OuParams, omega) -> np.ndarray:
    """Exact OU (Lorentzian) spectrum Γγ/(γ² + ω²) in MHz²·µs."""
    omega = np.asarray(omega, dtype=float)
    return params.big_gamma * params.gamma / (params.gamma**2 + omega**2)


def ou_cumulant(params: OuParams, times: Sequence[float]) -> float:
    """Joint OU cumulant at the given times: 0 for every order except 2."""
    times = np.asarray(times, dtype=float)
    if times.size == 2:
        return float(ou_cumulant2(params, times[1] - times[0]))
    return 0.0


# ---------------------------------------------------------------------------
# Telegraph transfer matrix


def _tlf_product_expectation(params: TlfParams, times, factors) -> complex:
    """E[∏_k f_k(ξ(t_k))] for ordered times by exact two-state propagation.

    `factors` is a sequence of per-time pairs (f(+1), f(-1)), possibly
    complex.  Coincident times are handled exactly (the propagator at zero
    lag is the identity).
    """
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0):
        raise ParameterError("times must be ordered (ascending)")
    w = params.w_total
    p_plus = params.w_minus / w
    p_st = np.array([p_plus, 1.0 - p_plus])
    v = p_st.astype(complex)
    v *= np.asarray(factors[0], dtype=complex)
    for k in range(1, times.size):
        decay = np.exp(-w * (times[k] - times[k - 1]))
        # P[new, old] = p_st[new] + decay * (δ - p_st[new])
        propagated = p_st * v.sum() + decay * (v - p_st * v.sum())
        v = propagated * np.asarray(factors[k], dtype=complex)
    return complex(v.sum())


def rtn_moment(params: TlfParams, times: Sequence[float]) -> float:
    """Exact telegraph moment λⁿ E[∏ (ξ(t_k) - ξ̄)] at ordered times (MHzⁿ)."""
    times = np.asarray(times, dtype=float)
    xi_bar = params.asymmetry
    x = (params.lam * (1.0 - xi_bar), params.lam * (-1.0 - xi_bar))
    value = _tlf_product_expectation(params, times, [x] * times.size)
    return float(value.real)


def rtn_cumulant(params: TlfParams, times: Sequence[float]) -> float:
    """Connected telegraph cumulant at ordered times.

    Orders 2 and 3 use closed forms (verified against path enumeration in
    the test suite); higher orders go through the transfer matrix plus the
    partition inversion of the moments (zero-mean, so singleton blocks drop).
    """
    times = np.sort(np.asarray(times, dtype=float))
    n = times.size
    xi_bar = params.asymmetry
    w = params.w_total
    if n == 1:
        return 0.0
    if n == 2:
        return params.lam**2 * (1.0 - xi_bar**2) * float(np.exp(-w * (times[1] - times[0])))
    if n == 3:
        spread = times[2] - times[0]
        return -2.0 * xi_bar * (1.0 - xi_bar**2) * params.lam**3 * float(np.exp(-w * spread))
    total = 0.0
    for partition in set_partitions(n):
        if any(len(block) == 1 for block in partition):
            continue
        coef = mobius_coefficient(len(partition))
        total += coef * prod(rtn_moment(params, times[list(block)]) for block in partition)
    return total


def ensemble_cumulant(params, order: int, lags: Sequence[float]) -> float:
    """Cumulant of a fluctuator ensemble: additive over independent fluctuators.

    `lags` are the order-1 lag tuple (µs) relative to the first time, i.e.
    the cumulant is evaluated at times (0, *lags).
    """
    lags = np.atleast_1d(np.asarray(lags, dtype=float))
    if lags.size != order - 1:
        raise ParameterError(f"order {order} needs {order - 1} lags, got {lags.size}")
    times = np.sort(np.concatenate(([0.0], lags)))
    if isinstance(params, TlfParams):
        params = TlfEnsembleParams((params,))
    return sum(rtn_cumulant(f, times) for f in params.fluctuators)


def ensemble_spectrum(params, omega) -> np.ndarray:
    """Lorentzian-sum spectrum 2 Σ λ²W(1-ξ̄²)/(W²+ω²) of a fluctuator ensemble."""
    omega = np.asarray(omega, dtype=float)
    if isinstance(params, TlfParams):
        params = TlfEnsembleParams((params,))
    out = np.zeros_like(omega)
    for f in params.fluctuators:
        out = out + 2.0 * f.lam**2 * f.w_total * (1.0 - f.asymmetry**2) / (
            f.w_total**2 + omega**2
        )
    return out


def process_cumulant(params: NoiseParams, order: int, lags: Sequence[float]) -> float:
    """Dispatch the exact cumulant oracle for any supported noise class."""
    if isinstance(params, OuParams):
        lags = np.atleast_1d(np.asarray(lags, dtype=float))
        times = np.concatenate(([0.0], lags))
        return ou_cumulant(params, times) if order == 2 else 0.0
    return ensemble_cumulant(params, order, lags)


# ---------------------------------------------------------------------------
# Discrete path supports and brute-force measurement products


def rtn_path_support(params: TlfParams, times: Sequence[float]):
    """Enumerate all telegraph paths over the ordered times with exact probabilities.

    Returns (paths, probs): paths has shape (2^T, T) holding β values
    λ(ξ - ξ̄), probs the exact path probabilities (summing to 1).
    """
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0):
        raise ParameterError("times must be ordered (ascending)")
    n = times.size
    if 2**n > MAX_SUPPORT_PATHS:
        raise ParameterError(f"support too large: 2^{n} paths exceeds {MAX_SUPPORT_PATHS}")
    w = params.w_total
    p_plus = params.w_minus / w
    p_st = {1: p_plus, -1: 1.0 - p_plus}
    decays = np.exp(-w * np.diff(times))

    def step_prob(s_from, s_to, decay):
        return p_st[s_to] + decay * ((s_from == s_to) - p_st[s_to])

    states = list(itertools.product((1, -1), repeat=n))
    paths = np.empty((len(states), n))
    probs = np.empty(len(states))
    for i, path in enumerate(states):
        p = p_st[path[0]]
        for k in range(n - 1):
            p *= step_prob(path[k], path[k + 1], decays[k])
        probs[i] = p
        paths[i] = params.lam * (np.array(path, dtype=float) - params.asymmetry)
    return paths, probs


def ensemble_path_support(params: TlfEnsembleParams, times: Sequence[float]):
    """Joint path support of an ensemble (product space over fluctuators)."""
    supports = [rtn_path_support(f, times) for f in params.fluctuators]
    n_paths = prod(s[1].size for s in supports)
    if n_paths > MAX_SUPPORT_PATHS:
        raise ParameterError(f"support too large: {n_paths} paths exceeds {MAX_SUPPORT_PATHS}")
    paths = np.zeros((1, len(np.atleast_1d(times))))
    probs = np.ones(1)
    for sub_paths, sub_probs in supports:
        paths = (paths[:, None, :] + sub_paths[None, :, :]).reshape(-1, paths.shape[1])
        probs = (probs[:, None] * sub_probs[None, :]).reshape(-1)
    return paths, probs


def brute_force_measurement_correlation(
    paths: np.ndarray,
    probs: np.ndarray,
    tau: float,
    dphi,
    indices: Sequence[int],
    damping: float = 1.0,
) -> float:
    """Exact ⟨r_{i1} ⋯ r_{in}⟩ = Σ_paths P(path) ∏_k D cos(τ β_k + Δφ_k).

    `paths` holds β values on the support grid, `indices` selects the RIM
    cycles entering the product, and `dphi` is a scalar or one Δφ per index.
    This enumeration is independent of the sampling identity it validates.
    """
    paths = np.asarray(paths, dtype=float)
    probs = np.asarray(probs, dtype=float)
    if paths.shape[0] != probs.size:
        raise ParameterError("paths and probs must have matching length")
    if probs.size > MAX_SUPPORT_PATHS:
        raise ParameterError(f"support too large: {probs.size} paths")
    indices = list(indices)
    dphi_arr = np.broadcast_to(np.asarray(dphi, dtype=float), (len(indices),))
    product = np.ones(paths.shape[0])
    for k, idx in enumerate(indices):
        product = product * damping * np.cos(tau * paths[:, idx] + dphi_arr[k])
    return float(np.sum(probs * product))


# ---------------------------------------------------------------------------
# Characteristic functions and exact conditional-mode targets


def characteristic_function(params: NoiseParams, coeffs, times) -> complex:
    """E[exp(i Σ_k a_k β(t_k))] for real coefficient vector a.

    Gaussian closed form for OU; exact complex transfer matrices per
    fluctuator (multiplied together) for telegraph ensembles.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    times = np.asarray(times, dtype=float)
    order = np.argsort(times, kind="stable")
    times = times[order]
    coeffs = coeffs[order]
    if isinstance(params, OuParams):
        cov = 0.5 * params.big_gamma * np.exp(
            -params.gamma * np.abs(times[:, None] - times[None, :])
        )
        return complex(np.exp(-0.5 * coeffs @ cov @ coeffs))
    if isinstance(params, TlfParams):
        params = TlfEnsembleParams((params,))
    if isinstance(params, TlfEnsembleParams):
        out = 1.0 + 0.0j
        for f in params.fluctuators:
            xi_bar = f.asymmetry
            factors = [
                (
                    np.exp(1j * a * f.lam * (1.0 - xi_bar)),
                    np.exp(1j * a * f.lam * (-1.0 - xi_bar)),
                )
                for a in coeffs
            ]
            out *= _tlf_product_expectation(f, times, factors)
        return out
    raise ParameterError(f"unknown noise parameter type {type(params).__name__}")


_LIN_TERMS = ((0.5 / 1j, 1.0), (-0.5 / 1j, -1.0))  # sin(y) = Σ c e^{i s y}
_QUAD_TERMS = ((1.0, 0.0), (-0.5, 1.0), (-0.5, -1.0))  # 1 - cos(y)


def measured_product_expectation(
    params: NoiseParams, tau: float, times, kinds=None
) -> float:
    """Exact E[∏_k f_k(τ β(t_k))] with f = sin ("lin") or 1-cos ("quad").

    This is the infinite-sample target of the conditional-mode estimator's
    raw product at the given cycle times: sin for Δφ = -π/2 cycles and
    (1 - cos) = r^q + 1 for Δφ = π cycles.  Exact to machine precision for
    every supported noise class, at any τ.
    """
    times = np.asarray(times, dtype=float)
    n = times.size
    if kinds is None:
        kinds = ["lin"] * n
    if len(kinds) != n:
        raise ParameterError("kinds must align with times")
    term_sets = [_LIN_TERMS if k == "lin" else _QUAD_TERMS for k in kinds]
    total = 0.0 + 0.0j
    for choice in itertools.product(*term_sets):
        coef = prod(c for c, _ in choice)
        signs = np.array([s for _, s in choice])
        total += coef * characteristic_function(params, tau * signs, times)
    if abs(total.imag) > 1e-9 * max(1.0, abs(total.real)):
        raise ArithmeticError(f"expectation should be real, got {total}")
    return float(total.real)


def sin_moment(params: NoiseParams, tau: float, times) -> float:
    """Exact E[∏ sin(τ β(t_k))]: the conditional-mode raw moment target."""
    return measured_product_expectation(params, tau, times)


def sin_cumulant(params: NoiseParams, tau: float, times) -> float:
    """Zero-mean partition inversion of the exact sin moments.

    Matches what the estimation pipeline converges to when it converts
    measured moments to cumulants under the zero-mean assumption (the sin
    statistic has a tiny mean for asymmetric telegraph noise, which the
    pipeline, like the measurement protocol, ignores).
    """
    times = np.asarray(times, dtype=float)
    n = times.size
    if n <= 3:
        return sin_moment(params, tau, times)
    total = 0.0
    for partition in set_partitions(n):
        if any(len(block) == 1 for block in partition):
            continue
        coef = mobius_coefficient(len(partition))
        total += coef * prod(
            sin_moment(params, tau, times[list(block)]) for block in partition
        )
    return total
