"""Power- and temperature-dependent TLS quality-factor model.

The saturable two-level-system absorption gives

    Q_TLS(n, T) = Q_TLS0 * sqrt(1 + (n^b2 / (D T^b1)) th) / th,
    th = tanh(hbar w / 2 kB T)

with Q_TLS0 the linear (unsaturated) limit.  Measured internal quality
factors are modeled as 1/Q_int = 1/Q_TLS(n, T) + 1/Q_other below the
quasiparticle regime; points above the quasiparticle cutoff temperature
are excluded from fits rather than modeled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import least_squares

from .constants import HBAR, K_B
from .errors import ConvergenceError, DatasetError, InvalidInputError
from .uncert import UValue

__all__ = ["TlsParams", "QPoint", "q_tls", "fit_tls", "rescale_q_tls0", "photon_number"]

DEFAULT_QP_CUTOFF_K = 0.120


@dataclass(frozen=True)
class TlsParams:
    """Fitted parameters of the TLS quality-factor model."""

    q_tls0: UValue
    D: float = 1.0
    beta1: float = 1.0
    beta2: float = 1.0
    q_other: float = 1e9
    f0: float = 5e9  # Hz

    def __post_init__(self):
        if self.q_tls0.value <= 0 or self.q_other <= 0 or self.D <= 0:
            raise InvalidInputError("q_tls0, q_other and D must be positive")
        if self.beta2 <= 0:
            raise InvalidInputError("beta2 must be > 0 (Q_TLS increases with photon number)")


@dataclass(frozen=True)
class QPoint:
    """One measured (photon number, temperature, Q_int) point."""

    n_bar: float
    temperature: float  # K
    q_int: UValue

    def __post_init__(self):
        if self.temperature <= 0:
            raise InvalidInputError("temperature must be > 0")
        if self.n_bar < 0:
            raise InvalidInputError("n_bar must be >= 0")
        if self.q_int.value <= 0:
            raise InvalidInputError("q_int must be > 0")


def _tanh_factor(f0: float, temperature: float) -> float:
    return math.tanh(HBAR * 2.0 * math.pi * f0 / (2.0 * K_B * temperature))


def q_tls(n_bar: float, temperature: float, params: TlsParams) -> float:
    """Evaluate Q_TLS(n_bar, T) for the given parameters."""
    if temperature <= 0:
        raise InvalidInputError("temperature must be > 0")
    if n_bar < 0:
        raise InvalidInputError("n_bar must be >= 0")
    th = _tanh_factor(params.f0, temperature)
    sat = n_bar ** params.beta2 / (params.D * temperature ** params.beta1)
    return params.q_tls0.value * math.sqrt(1.0 + sat * th) / th


def rescale_q_tls0(params: TlsParams, n_bar: float, temperature: float) -> UValue:
    """Rescale the fitted Q_TLS0 to operating conditions (n_bar, T).

    The relative uncertainty of q_tls0 is carried through unchanged, since
    the rescaling factor is treated as exact.
    """
    factor = q_tls(n_bar, temperature, params) / params.q_tls0.value
    return params.q_tls0.scaled(factor)


def _model_inv_q(n, T, f0, q_tls0, D, beta1, beta2, q_other):
    th = np.tanh(HBAR * 2.0 * np.pi * f0 / (2.0 * K_B * T))
    sat = n ** beta2 / (D * T ** beta1)
    qtls = q_tls0 * np.sqrt(1.0 + sat * th) / th
    return 1.0 / qtls + 1.0 / q_other


def fit_tls(
    points: Sequence[QPoint],
    f0: float,
    init: TlsParams | None = None,
    bounds: dict | None = None,
    qp_cutoff_temperature: float = DEFAULT_QP_CUTOFF_K,
) -> tuple[TlsParams, np.ndarray]:
    """Fit the TLS model to measured Q_int(n_bar, T) points.

    Points at or above the quasiparticle cutoff temperature are dropped.
    Fits 1/Q_int residuals weighted by their sigma using bounded damped
    least squares in log-parameter space for the positive scale parameters.
    Returns the fitted parameters (q_tls0 sigma from the covariance
    diagonal) and the full 5x5 covariance matrix in the order
    (q_tls0, D, beta1, beta2, q_other).
    """
    kept = [p for p in points if p.temperature < qp_cutoff_temperature]
    if len(kept) < 5:
        raise DatasetError(
            f"need >= 5 points below {qp_cutoff_temperature} K, have {len(kept)}"
        )
    n = np.array([p.n_bar for p in kept])
    positive_n = n[n > 0]
    if positive_n.size == 0 or positive_n.max() / positive_n.min() < 100.0:
        raise DatasetError("points must span at least 2 decades in n_bar")
    T = np.array([p.temperature for p in kept])
    y = np.array([1.0 / p.q_int.value for p in kept])
    # sigma(1/Q) = sigma_Q / Q^2
    sig = np.array([max(p.q_int.sigma, 0.0) / p.q_int.value ** 2 for p in kept])
    sig[sig == 0] = np.median(sig[sig > 0]) if np.any(sig > 0) else 1.0

    if init is None:
        q_init = float(np.max([p.q_int.value for p in kept]))
        init = TlsParams(UValue(q_init), D=1.0, beta1=1.0, beta2=1.0,
                         q_other=10.0 * q_init, f0=f0)

    bounds = bounds or {}
    lo_beta1, hi_beta1 = bounds.get("beta1", (0.05, 4.0))
    lo_beta2, hi_beta2 = bounds.get("beta2", (0.05, 4.0))
    lo_logD, hi_logD = np.log(bounds.get("D", (1e-8, 1e8)))

    # theta = (log q_tls0, log D, beta1, beta2, log q_other)
    theta0 = np.array([
        np.log(init.q_tls0.value), np.log(init.D), init.beta1, init.beta2,
        np.log(init.q_other),
    ])
    lower = np.array([np.log(1.0), lo_logD, lo_beta1, lo_beta2, np.log(1.0)])
    upper = np.array([np.log(1e12), hi_logD, hi_beta1, hi_beta2, np.log(1e14)])

    def resid(theta):
        q0, D, b1, b2, qo = (np.exp(theta[0]), np.exp(theta[1]),
                             theta[2], theta[3], np.exp(theta[4]))
        return (_model_inv_q(n, T, f0, q0, D, b1, b2, qo) - y) / sig

    res = least_squares(resid, theta0, bounds=(lower, upper),
                        xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=20000)
    if not res.success:
        raise ConvergenceError("TLS fit did not converge",
                               residual=float(np.max(np.abs(res.fun))))

    q0, D, b1, b2, qo = (np.exp(res.x[0]), np.exp(res.x[1]),
                         res.x[2], res.x[3], np.exp(res.x[4]))
    # covariance in physical parameters via the log-space jacobian
    J = res.jac
    try:
        cov_theta = np.linalg.inv(J.T @ J)
    except np.linalg.LinAlgError:
        cov_theta = np.linalg.pinv(J.T @ J)
    scale = np.array([q0, D, 1.0, 1.0, qo])
    cov = cov_theta * np.outer(scale, scale)
    sigma_q0 = float(np.sqrt(max(cov[0, 0], 0.0)))
    params = TlsParams(UValue(q0, sigma_q0), D=D, beta1=b1, beta2=b2,
                       q_other=qo, f0=f0)
    return params, cov


def photon_number(power_watts: float, f0: float, q_loaded: float, q_coupling: float) -> float:
    """Convert applied input power to mean intracavity photon number.

    Standard input-line formula for a side-coupled resonator:
    n = 2 Ql^2 P / (Qc hbar w^2).  Convenience helper only; measured
    datasets normally arrive with n_bar precomputed.
    """
    omega = 2.0 * math.pi * f0
    return 2.0 * q_loaded ** 2 * power_watts / (q_coupling * HBAR * omega ** 2)
