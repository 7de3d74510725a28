"""XPS spectral analysis for oxide and contaminant thickness extraction.

Covers the full chain used on Al2p spectra: binding-energy calibration to
a reference peak, iterative Shirley background construction, constrained
multicomponent fitting with spin-orbit doublets (0.44 eV splitting, 2:1
area ratio), the Strohmeier overlayer-thickness formula, and the
piecewise linear/logarithmic oxide-growth-kinetics fit.

``synthesize_spectrum`` generates deterministic forward-model spectra and
serves as the independent oracle for the fitting routines.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.optimize import least_squares

from .errors import (
    CalibrationError,
    ConvergenceError,
    DatasetError,
    DegenerateSystemError,
    InvalidInputError,
)
from .uncert import UValue, propagate

__all__ = [
    "XpsSpectrum",
    "PeakComponent",
    "StrohmeierConstants",
    "KineticsFit",
    "FitResult",
    "load_spectrum",
    "calibrate_energy",
    "shirley_background",
    "fit_components",
    "strohmeier_thickness",
    "fit_kinetics",
    "synthesize_spectrum",
]

DOUBLET_SPLITTING_EV = 0.44
DOUBLET_AREA_RATIO = 2.0  # 3/2 component carries twice the 1/2 area

_GAUSS_NORM = math.sqrt(4.0 * math.log(2.0) / math.pi)


@dataclass(frozen=True)
class XpsSpectrum:
    """Binding-energy-indexed intensity trace."""

    binding_energy: np.ndarray  # eV, strictly ascending
    intensity: np.ndarray  # counts
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        be = np.asarray(self.binding_energy, dtype=float)
        iy = np.asarray(self.intensity, dtype=float)
        object.__setattr__(self, "binding_energy", be)
        object.__setattr__(self, "intensity", iy)
        if be.shape != iy.shape or be.ndim != 1:
            raise InvalidInputError("energy and intensity must be equal-length 1-d arrays")
        if be.size < 16:
            raise DatasetError(f"need >= 16 samples, got {be.size}")
        if not np.all(np.diff(be) > 0):
            raise InvalidInputError("binding energy must be strictly ascending")
        if np.any(iy < 0):
            raise InvalidInputError("intensity must be >= 0")


@dataclass(frozen=True)
class PeakComponent:
    """One fitted (or template) peak.

    ``doublet`` marks the 3/2 member of a spin-orbit pair; the 1/2 partner
    is generated from it (center + splitting, half the area, same shape and
    fwhm) and never fitted independently.  ``center_window`` bounds the
    center during fitting (eV, half-width).
    """

    label: str
    shape: str  # "lorentzian" | "gaussian"
    center: float  # eV
    fwhm: float  # eV
    area: float = 0.0
    doublet: bool = False
    splitting: float = DOUBLET_SPLITTING_EV
    center_window: float = 0.2

    def __post_init__(self):
        if self.shape not in ("lorentzian", "gaussian"):
            raise InvalidInputError(f"unknown lineshape {self.shape!r}")
        if self.fwhm <= 0:
            raise InvalidInputError("fwhm must be > 0")
        if self.area < 0:
            raise InvalidInputError("area must be >= 0")


@dataclass(frozen=True)
class StrohmeierConstants:
    """Material constants entering the Strohmeier thickness formula.

    The defaults are literature values for Al/AlOx at Al K-alpha excitation:
    inelastic mean free paths lambda_m = 2.6 nm, lambda_ox = 2.8 nm, and
    atom-density ratio N_m/N_ox = 1.6.  They are configuration, not ground
    truth; every reported thickness should name the constants used.
    """

    lambda_m: float = 2.6  # nm
    lambda_ox: float = 2.8  # nm
    n_m: float = 1.6
    n_ox: float = 1.0
    theta: float = 90.0  # degrees

    def __post_init__(self):
        if min(self.lambda_m, self.lambda_ox, self.n_m, self.n_ox) <= 0:
            raise InvalidInputError("Strohmeier constants must be positive")
        if not 0.0 < self.theta <= 90.0:
            raise InvalidInputError("theta must be in (0, 90] degrees")


@dataclass(frozen=True)
class KineticsFit:
    """Piecewise linear-then-logarithmic oxide growth model.

    d(t) = k_lin * t               for t <= t_break
    d(t) = log_a + log_b * ln(t)   for t >  t_break
    continuous at t_break; d_sat is the model value at the latest
    measured time.  ``degenerate_log`` flags a fit with no points past
    the breakpoint (purely linear data).
    """

    k_lin: float  # nm / hour
    t_break: float  # hours
    log_a: float
    log_b: float
    d_sat: float  # nm
    degenerate_log: bool = False

    def thickness(self, t):
        t = np.asarray(t, dtype=float)
        lin = self.k_lin * t
        if self.degenerate_log:
            return lin
        log = self.log_a + self.log_b * np.log(np.maximum(t, 1e-300))
        return np.where(t <= self.t_break, lin, log)


@dataclass(frozen=True)
class FitResult:
    """Outcome of a multicomponent fit."""

    components: tuple  # fitted PeakComponents incl. generated 1/2 partners
    covariance: np.ndarray
    area_sigmas: dict  # template label -> sigma of its total area
    boundary_active: tuple  # labels of parameters pinned at a constraint
    residual_norm: float


# ---------------------------------------------------------------------------
# lineshapes


def _lineshape(x, shape, center, fwhm, area):
    if shape == "lorentzian":
        gamma = fwhm / 2.0
        return area * gamma / (math.pi * ((x - center) ** 2 + gamma ** 2))
    return (area * _GAUSS_NORM / fwhm) * np.exp(
        -4.0 * math.log(2.0) * ((x - center) / fwhm) ** 2
    )


def _component_sum(x, components):
    total = np.zeros_like(x)
    for c in components:
        total += _lineshape(x, c.shape, c.center, c.fwhm, c.area)
        if c.doublet:
            total += _lineshape(
                x, c.shape, c.center + c.splitting, c.fwhm,
                c.area / DOUBLET_AREA_RATIO,
            )
    return total


def expand_doublets(components: Sequence[PeakComponent]) -> list[PeakComponent]:
    """Materialize the 1/2 partners of all doublet components."""
    out = []
    for c in components:
        out.append(c)
        if c.doublet:
            out.append(replace(
                c,
                label=c.label + "_1/2",
                center=c.center + c.splitting,
                area=c.area / DOUBLET_AREA_RATIO,
                doublet=False,
            ))
    return out


# ---------------------------------------------------------------------------
# ingestion and calibration


def load_spectrum(path) -> XpsSpectrum:
    """Read a two-column CSV (binding_energy_eV, counts) with header."""
    path = Path(path)
    rows = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 2:
            raise DatasetError(f"{path}: missing header row")
        try:
            float(header[0])
        except ValueError:
            pass
        else:
            raise DatasetError(f"{path}: header row required, got numeric first row")
        for row in reader:
            if not row or not row[0].strip():
                continue
            rows.append((float(row[0]), float(row[1])))
    if not rows:
        raise DatasetError(f"{path}: no data rows")
    be = np.array([r[0] for r in rows])
    iy = np.array([r[1] for r in rows])
    return XpsSpectrum(be, iy, metadata={"source_file": str(path)})


def calibrate_energy(
    spectrum: XpsSpectrum,
    reference_label: str,
    reference_energy: float,
    search_window: float = 2.0,
) -> XpsSpectrum:
    """Shift the energy axis so the reference peak maximum sits at its
    nominal binding energy.

    The reference peak is located as the intensity maximum within
    +-search_window eV of the nominal energy; it must be a genuine local
    maximum (flat spectra raise a calibration error).
    """
    be, iy = spectrum.binding_energy, spectrum.intensity
    mask = np.abs(be - reference_energy) <= search_window
    if not np.any(mask):
        raise CalibrationError(
            f"{reference_label}: window +-{search_window} eV around "
            f"{reference_energy} eV is outside the scan"
        )
    idx_window = np.flatnonzero(mask)
    peak = idx_window[np.argmax(iy[idx_window])]
    interior = 0 < peak < be.size - 1
    if not interior or not (iy[peak] > iy[peak - 1] and iy[peak] > iy[peak + 1]):
        raise CalibrationError(f"{reference_label}: no local maximum near "
                               f"{reference_energy} eV")
    shift = reference_energy - be[peak]
    meta = dict(spectrum.metadata)
    meta["energy_shift_eV"] = float(shift)
    meta["calibration_reference"] = reference_label
    return XpsSpectrum(be + shift, iy, metadata=meta)


# ---------------------------------------------------------------------------
# Shirley background


def shirley_background(
    spectrum: XpsSpectrum,
    lo: float,
    hi: float,
    tolerance: float | None = None,
    max_iterations: int = 50,
) -> np.ndarray:
    """Iterative Shirley background over [lo, hi] (binding energy, eV).

    Anchored to 3-sample endpoint averages; the background above the
    low-energy anchor at each point is proportional to the integrated
    signal-above-background on the high-kinetic-energy (lower binding
    energy) side.  Returns the background on the samples inside [lo, hi].
    """
    be, iy = spectrum.binding_energy, spectrum.intensity
    if lo < be[0] or hi > be[-1] or lo >= hi:
        raise InvalidInputError(f"[{lo}, {hi}] eV not inside scan window")
    sel = np.flatnonzero((be >= lo) & (be <= hi))
    if sel.size < 8:
        raise DatasetError("too few samples in the background window")
    x = be[sel]
    y = iy[sel]
    i_lo = float(np.mean(y[:3]))
    i_hi = float(np.mean(y[-3:]))
    span = abs(i_hi - i_lo)
    scale = max(span, abs(i_hi), abs(i_lo), 1.0)
    if tolerance is None:
        tolerance = 1e-6 * scale
    bg = np.full_like(y, i_lo)
    for _ in range(max_iterations):
        signal = y - bg
        cum = _cumtrapz(signal, x)
        total = cum[-1]
        if total <= 0:
            new_bg = np.full_like(y, i_lo)
        else:
            new_bg = i_lo + (i_hi - i_lo) * cum / total
        delta = float(np.max(np.abs(new_bg - bg)))
        bg = new_bg
        if delta < tolerance:
            return bg
    raise ConvergenceError("Shirley background did not converge", residual=delta)


def _cumtrapz(y, x):
    out = np.zeros_like(y)
    dx = np.diff(x)
    out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * dx)
    return out


# ---------------------------------------------------------------------------
# component fitting


def fit_components(
    spectrum: XpsSpectrum,
    background: np.ndarray,
    model: Sequence[PeakComponent],
    fwhm_bounds: tuple[float, float] = (0.05, 5.0),
) -> FitResult:
    """Constrained least squares of the background-subtracted spectrum.

    Fit parameters per template component: center (bounded by its
    ``center_window``), fwhm, area.  Doublet 1/2 partners are generated
    exactly (shared fwhm, +splitting, half area), never fitted.  Weights
    are Poisson-like, 1/max(I, 1).
    """
    if not model:
        raise InvalidInputError("model needs >= 1 component")
    x = spectrum.binding_energy
    y = spectrum.intensity - np.asarray(background, dtype=float)
    if y.shape != x.shape:
        raise InvalidInputError("background length must match the spectrum")
    w = np.sqrt(1.0 / np.maximum(spectrum.intensity, 1.0))

    p0, lower, upper = [], [], []
    for c in model:
        if c.center_window <= 0:
            raise InvalidInputError(f"{c.label}: empty constraint window")
        area0 = c.area if c.area > 0 else max(float(np.max(y)), 0.0) * c.fwhm
        p0 += [c.center, c.fwhm, area0]
        lower += [c.center - c.center_window, fwhm_bounds[0], 0.0]
        upper += [c.center + c.center_window, fwhm_bounds[1], np.inf]
    p0 = np.clip(p0, lower, upper)

    def unpack(p):
        return [
            replace(c, center=p[3 * i], fwhm=p[3 * i + 1], area=p[3 * i + 2])
            for i, c in enumerate(model)
        ]

    def resid(p):
        return (_component_sum(x, unpack(p)) - y) * w

    res = least_squares(resid, p0, bounds=(np.array(lower), np.array(upper)),
                        xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=20000)
    if not res.success:
        raise ConvergenceError("component fit did not converge",
                               residual=float(np.max(np.abs(res.fun))))

    fitted = unpack(res.x)
    names = []
    for c in model:
        names += [f"{c.label}.center", f"{c.label}.fwhm", f"{c.label}.area"]
    active = tuple(
        names[i]
        for i in range(len(res.x))
        if math.isclose(res.x[i], lower[i]) or math.isclose(res.x[i], upper[i])
    )
    try:
        cov = np.linalg.inv(res.jac.T @ res.jac)
    except np.linalg.LinAlgError:
        cov = np.linalg.pinv(res.jac.T @ res.jac)
    # the Poisson-like weights are not true sigmas; rescale by reduced chi2
    dof = max(x.size - res.x.size, 1)
    cov = cov * (2.0 * res.cost / dof)
    area_sigmas = {}
    for i, c in enumerate(model):
        sig = math.sqrt(max(cov[3 * i + 2, 3 * i + 2], 0.0))
        if c.doublet:
            # total area = 3/2 of the fitted 3/2-component area
            sig *= 1.0 + 1.0 / DOUBLET_AREA_RATIO
        area_sigmas[c.label] = sig
    return FitResult(
        components=tuple(expand_doublets(fitted)),
        covariance=cov,
        area_sigmas=area_sigmas,
        boundary_active=active,
        residual_norm=float(np.sqrt(2.0 * res.cost)),
    )


def component_area(result: FitResult, label: str, include_partner: bool = True) -> float:
    """Total analytic area of a labeled component (plus its 1/2 partner)."""
    area = 0.0
    for c in result.components:
        if c.label == label or (include_partner and c.label == label + "_1/2"):
            area += c.area
    return area


# ---------------------------------------------------------------------------
# thickness and kinetics


def strohmeier_thickness(
    i_ox: UValue,
    i_m: UValue,
    constants: StrohmeierConstants,
) -> UValue:
    """Overlayer thickness (nm) from the oxide/metal peak intensity ratio.

    d = lambda_ox sin(theta) ln( (N_m/N_ox)(I_ox/I_m)(lambda_m/lambda_ox) + 1 )
    """
    if i_m.value <= 0:
        raise DegenerateSystemError("metal intensity must be positive")
    if i_ox.value < 0:
        raise InvalidInputError("oxide intensity must be >= 0")
    k = constants.lambda_ox * math.sin(math.radians(constants.theta))
    pref = (constants.n_m / constants.n_ox) * (constants.lambda_m / constants.lambda_ox)

    def f(ox, m):
        return k * math.log(pref * (ox / m) + 1.0)

    return propagate(f, [i_ox, i_m])


def invert_strohmeier(d: float, constants: StrohmeierConstants) -> float:
    """Intensity ratio I_ox/I_m that yields thickness ``d`` (test oracle)."""
    k = constants.lambda_ox * math.sin(math.radians(constants.theta))
    pref = (constants.n_m / constants.n_ox) * (constants.lambda_m / constants.lambda_ox)
    return (math.exp(d / k) - 1.0) / pref


def fit_kinetics(times: Sequence[float], thicknesses: Sequence[UValue]) -> KineticsFit:
    """Fit the piecewise linear/logarithmic oxide growth model.

    The breakpoint is grid-searched over the measured time points; for each
    candidate, the continuous model d = k t (t <= tb), d = k tb + b ln(t/tb)
    (t > tb) is a weighted linear least-squares problem in (k, b).
    """
    t = np.asarray(times, dtype=float)
    if t.size < 6 or t.size != len(thicknesses):
        raise DatasetError("need >= 6 (time, thickness) points")
    if np.any(np.diff(t) <= 0) or t[0] <= 0:
        raise InvalidInputError("times must be positive and strictly ascending")
    d = np.array([v.value for v in thicknesses])
    sig = np.array([v.sigma if v.sigma > 0 else 1.0 for v in thicknesses])
    w = 1.0 / sig

    best = None
    # candidates leaving >= 2 points per regime, plus the all-linear case
    candidates = list(t[1:-2]) + [t[-1]]
    for tb in candidates:
        lin = t <= tb
        col_k = np.where(lin, t, tb)
        col_b = np.where(lin, 0.0, np.log(np.maximum(t / tb, 1e-300)))
        A = np.column_stack([col_k, col_b]) * w[:, None]
        rhs = d * w
        if np.all(lin):
            coef, *_ = np.linalg.lstsq(A[:, :1], rhs, rcond=None)
            k, b = float(coef[0]), 0.0
        else:
            coef, *_ = np.linalg.lstsq(A, rhs, rcond=None)
            k, b = float(coef[0]), float(coef[1])
        pred = k * col_k + b * col_b
        chi2 = float(np.sum(((pred - d) * w) ** 2))
        if best is None or chi2 < best[0]:
            best = (chi2, tb, k, b, np.all(lin))

    _, tb, k, b, degenerate = best
    log_a = k * tb - b * math.log(tb)
    fit = KineticsFit(
        k_lin=k,
        t_break=float(tb),
        log_a=float(log_a),
        log_b=float(b),
        d_sat=0.0,
        degenerate_log=bool(degenerate),
    )
    d_sat = float(fit.thickness(t[-1]))
    return replace(fit, d_sat=d_sat)


# ---------------------------------------------------------------------------
# synthesis oracle


def synthesize_spectrum(
    components: Sequence[PeakComponent],
    background_kind: tuple = ("flat", 0.0),
    noise_sigma: float = 0.0,
    seed: int = 0,
    energy_lo: float = 68.0,
    energy_hi: float = 82.0,
    step: float = 0.05,
) -> XpsSpectrum:
    """Deterministic forward-model spectrum: components + background + noise.

    ``background_kind`` is ("flat", level) or ("shirley", lo_level, hi_level);
    the Shirley variant builds the background from the ideal component sum,
    so the background-estimation round trip is self-consistent.
    """
    x = np.arange(energy_lo, energy_hi + step / 2, step)
    peaks = _component_sum(x, list(components))
    kind = background_kind[0]
    if kind == "flat":
        bg = np.full_like(x, float(background_kind[1]))
    elif kind == "shirley":
        b_lo, b_hi = float(background_kind[1]), float(background_kind[2])
        cum = _cumtrapz(peaks, x)
        total = cum[-1]
        bg = np.full_like(x, b_lo) if total <= 0 else b_lo + (b_hi - b_lo) * cum / total
    else:
        raise InvalidInputError(f"unknown background kind {kind!r}")
    y = peaks + bg
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        y = y + rng.normal(0.0, noise_sigma, x.size)
    y = np.maximum(y, 0.0)
    return XpsSpectrum(x, y, metadata={"synthetic": True, "seed": seed})
