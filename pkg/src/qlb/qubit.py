"""Transmon quality-factor prediction and junction-barrier budgeting.

The qubit's surface loss is the participation-weighted sum of the
capacitor-pad tangent and the junction-lead interface tangents.  The
junction barrier itself is budgeted through its share of the circuit
energy, estimated from the parallel-plate junction capacitance relative
to the shunt capacitance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .constants import EPS0
from .errors import DegenerateSystemError, InvalidInputError
from .uncert import UValue, combine_linear, propagate

__all__ = [
    "QubitGeometry",
    "JunctionDims",
    "TangentSet",
    "predict_inv_q",
    "predict_q",
    "surface_fractions",
    "junction_capacitance",
    "junction_energy_fraction",
    "solve_barrier_tangent",
    "BarrierSolve",
    "three_way_budget",
]


@dataclass(frozen=True)
class JunctionDims:
    """Parallel-plate junction dimensions (nm) and barrier permittivity."""

    width: UValue
    length: UValue
    barrier_thickness: UValue
    eps_r: float = 9.0

    def __post_init__(self):
        if min(self.width.value, self.length.value, self.barrier_thickness.value) <= 0:
            raise InvalidInputError("junction dimensions must be positive")
        if self.eps_r <= 0:
            raise InvalidInputError("eps_r must be positive")


@dataclass(frozen=True)
class QubitGeometry:
    """Participations and capacitances of the transmon layout."""

    p_capacitor: float
    p_ms_leads: float
    p_ma_leads: float
    c_shunt: float  # fF
    junction: JunctionDims

    def __post_init__(self):
        if min(self.p_capacitor, self.p_ms_leads, self.p_ma_leads) <= 0:
            raise InvalidInputError("participations must be positive")
        if self.c_shunt <= 0:
            raise InvalidInputError("c_shunt must be positive")


@dataclass(frozen=True)
class TangentSet:
    """Loss tangents feeding the qubit prediction, one per surface group."""

    tan_capacitor: UValue
    tan_alox_leads: UValue
    tan_ms_leads: UValue
    regime: str = "linear-absorption"  # or "single-photon"

    def __post_init__(self):
        if min(self.tan_capacitor.value, self.tan_alox_leads.value,
               self.tan_ms_leads.value) < 0:
            raise InvalidInputError("tangent central values must be >= 0")
        if self.regime not in ("linear-absorption", "single-photon"):
            raise InvalidInputError(f"unknown regime {self.regime!r}")


def predict_inv_q(geom: QubitGeometry, tangents: TangentSet) -> UValue:
    """Total surface loss 1/Q as a participation-weighted tangent sum."""
    return combine_linear([
        (geom.p_capacitor, tangents.tan_capacitor),
        (geom.p_ma_leads, tangents.tan_alox_leads),
        (geom.p_ms_leads, tangents.tan_ms_leads),
    ])


def predict_q(geom: QubitGeometry, tangents: TangentSet) -> UValue:
    """Surface-loss-limited quality factor, Q = 1/(1/Q)."""
    inv_q = predict_inv_q(geom, tangents)
    if inv_q.value == 0:
        raise DegenerateSystemError("zero predicted loss, Q undefined")
    rel = inv_q.sigma / inv_q.value
    return UValue(1.0 / inv_q.value, rel / inv_q.value)


def surface_fractions(geom: QubitGeometry, tangents: TangentSet) -> tuple[UValue, UValue]:
    """Percent split of surface loss between capacitor pads and junction leads."""

    def cap_frac(tc, ta, tm):
        total = (geom.p_capacitor * tc + geom.p_ma_leads * ta + geom.p_ms_leads * tm)
        return geom.p_capacitor * tc / total * 100.0

    def leads_frac(tc, ta, tm):
        total = (geom.p_capacitor * tc + geom.p_ma_leads * ta + geom.p_ms_leads * tm)
        return (geom.p_ma_leads * ta + geom.p_ms_leads * tm) / total * 100.0

    inputs = [tangents.tan_capacitor, tangents.tan_alox_leads, tangents.tan_ms_leads]
    total = predict_inv_q(geom, tangents)
    if total.value == 0:
        raise DegenerateSystemError("zero total loss")
    return propagate(cap_frac, inputs), propagate(leads_frac, inputs)


def junction_capacitance(junction: JunctionDims) -> UValue:
    """Parallel-plate junction capacitance in fF.

    C = eps0 eps_r (w l) / t.  The width and length uncertainties come
    from the same lithography/imaging step, so their contributions are
    added coherently (fully correlated); the barrier thickness is
    independent.  This reproduces the quoted uncertainty for a square
    junction, where independent lateral errors would understate it.
    """
    w, l, t = junction.width, junction.length, junction.barrier_thickness
    if t.value == 0:
        raise DegenerateSystemError("zero barrier thickness")
    value = EPS0 * junction.eps_r * (w.value * 1e-9) * (l.value * 1e-9) / (t.value * 1e-9)
    value_fF = value / 1e-15
    rel_lateral = w.sigma / w.value + l.sigma / l.value
    rel = math.hypot(rel_lateral, t.sigma / t.value)
    return UValue(value_fF, value_fF * rel)


def junction_energy_fraction(c_jj: UValue, c_shunt: float) -> UValue:
    """Fraction of circuit electric energy stored in the junction barrier."""
    if c_shunt <= 0:
        raise InvalidInputError("c_shunt must be positive")
    return propagate(lambda c: c / (c + c_shunt), [c_jj])


@dataclass(frozen=True)
class BarrierSolve:
    """Barrier tangent and its derived loss contribution."""

    tan_barrier: UValue
    scaled_contribution: UValue  # energy fraction x tan_barrier
    limiting_q: UValue


def solve_barrier_tangent(
    q_measured: UValue,
    inv_q_surfaces: UValue,
    c_jj: UValue,
    c_shunt: float,
) -> BarrierSolve:
    """Invert the capacitance-weighted loss sum for the barrier tangent.

    1/Q_meas = (Cs/(Cs+Cj)) (1/Q_surfaces) + (Cj/(Cs+Cj)) tan_barrier
    """
    if q_measured.value <= 0:
        raise InvalidInputError("measured Q must be positive")
    if c_jj.value == 0:
        raise DegenerateSystemError("zero junction capacitance")

    def barrier(qm, iqs, cj):
        return (1.0 / qm) * (c_shunt + cj) / cj - (c_shunt / cj) * iqs

    inputs = [q_measured, inv_q_surfaces, c_jj]
    tan_barrier = propagate(barrier, inputs)

    def scaled(qm, iqs, cj):
        return cj / (c_shunt + cj) * barrier(qm, iqs, cj)

    contribution = propagate(scaled, inputs)
    if contribution.value <= 0:
        raise DegenerateSystemError(
            "barrier contribution is non-positive; surfaces already exceed measured loss"
        )
    rel = contribution.sigma / contribution.value
    limiting_q = UValue(1.0 / contribution.value, rel / contribution.value)
    return BarrierSolve(tan_barrier, contribution, limiting_q)


def three_way_budget(
    geom: QubitGeometry,
    tangents: TangentSet,
    q_measured: UValue,
    c_jj: UValue,
) -> dict:
    """Percent budget {capacitor, junction_leads, barrier} of measured loss.

    Surface terms are scaled by the shunt's energy share; the barrier term
    is the residual, so central values sum to exactly 100.
    """
    cs = geom.c_shunt

    def cap_pct(tc, cj, qm):
        return (cs / (cs + cj)) * geom.p_capacitor * tc * qm * 100.0

    def leads_pct(ta, tm, cj, qm):
        return (cs / (cs + cj)) * (geom.p_ma_leads * ta + geom.p_ms_leads * tm) * qm * 100.0

    capacitor = propagate(cap_pct, [tangents.tan_capacitor, c_jj, q_measured])
    leads = propagate(
        leads_pct, [tangents.tan_alox_leads, tangents.tan_ms_leads, c_jj, q_measured]
    )

    inv_q_surf = predict_inv_q(geom, tangents)
    solve = solve_barrier_tangent(q_measured, inv_q_surf, c_jj, cs)
    barrier_central = 100.0 - capacitor.value - leads.value
    barrier_sigma = propagate(
        lambda c, qm: c * qm * 100.0, [solve.scaled_contribution, q_measured]
    ).sigma
    return {
        "capacitor": capacitor,
        "junction_leads": leads,
        "barrier": UValue(barrier_central, barrier_sigma),
    }
