"""Pulse-schedule synthesis for the three gate families.

A gate is specified by the target rotation U1(theta, phi, gamma) =
exp(-i gamma/2 n.sigma) on the {|g>,|f>} pair, with axis
n = (sin(theta)cos(phi), sin(theta)sin(phi), cos(theta)).  theta and
phi fix the bright/dark frame; the schedule then steers the {|b>,|e>}
two-level system through a loop that imprints the holonomy gamma.

Phase convention: segment phases are the rotation azimuths of the
composite-pulse construction.  The physical drive phase entering
H = (Omega/2) e^{i phi1} |b><e| + h.c. is phi1 = -phase for segmented
schedules (the composite azimuth is measured with opposite handedness
on the {b,e} Bloch sphere).  Parametric (dynamical) schedules store
phi1 directly.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import qmath

SCHEME_SR = "sr-nhqc"
SCHEME_NHQC = "nhqc"
SCHEME_DYNAMICAL = "dynamical"
SCHEMES = (SCHEME_SR, SCHEME_NHQC, SCHEME_DYNAMICAL)

DEFAULT_TAU = {SCHEME_SR: 120.0, SCHEME_NHQC: 60.0, SCHEME_DYNAMICAL: 105.0}

ENVELOPE_COSINE = "cosine"
ENVELOPE_SQUARE = "square"


@dataclass(frozen=True)
class GateSpec:
    """Target holonomic rotation angles (rad)."""

    theta: float
    phi: float
    gamma: float

    def axis(self) -> np.ndarray:
        return np.array([np.sin(self.theta) * np.cos(self.phi),
                         np.sin(self.theta) * np.sin(self.phi),
                         np.cos(self.theta)])

    def target_unitary(self) -> np.ndarray:
        """U1 = exp(-i gamma/2 n.sigma) on the ordered basis (|g>, |f>)."""
        n = self.axis()
        ns = n[0] * qmath.PAULI_X + n[1] * qmath.PAULI_Y + n[2] * qmath.PAULI_Z
        c, s = np.cos(self.gamma / 2), np.sin(self.gamma / 2)
        return c * np.eye(2) - 1j * s * ns


# The four named benchmark gates.
GATE_X = GateSpec(np.pi / 2, 0.0, np.pi)
GATE_Y = GateSpec(np.pi / 2, np.pi / 2, np.pi)
GATE_X2 = GateSpec(np.pi / 2, 0.0, np.pi / 2)
GATE_Y2 = GateSpec(np.pi / 2, np.pi / 2, np.pi / 2)
NAMED_GATES = {"X": GATE_X, "Y": GATE_Y, "X/2": GATE_X2, "Y/2": GATE_Y2}


@dataclass(frozen=True)
class PulseSegment:
    """One constant-phase rotation: area (rad), azimuth phase (rad), ns."""

    area: float
    phase: float
    duration: float
    envelope: str = ENVELOPE_COSINE


def sample_envelope(seg: PulseSegment, t: float) -> float:
    """Instantaneous Rabi amplitude Omega(t) in rad/ns, area-normalized.

    Cosine: Omega = (area/T)(1 - cos(2 pi t / T)), zero at both ends.
    """
    if t < -1e-12 or t > seg.duration + 1e-12:
        raise ValueError(f"t={t} outside segment of duration {seg.duration}")
    if seg.envelope == ENVELOPE_COSINE:
        return seg.area / seg.duration * (1.0 - np.cos(2 * np.pi * t / seg.duration))
    if seg.envelope == ENVELOPE_SQUARE:
        return seg.area / seg.duration
    raise ValueError(f"unknown envelope {seg.envelope!r}")


@dataclass(frozen=True)
class PulseSchedule:
    """Drive program for one gate: either segments or a parametric sampler.

    drive(t) returns (Omega, phi1) ready for the rotating-frame
    Hamiltonian; amp_scale carries an injected Rabi-error factor (1+eps).
    """

    scheme: str
    gate: GateSpec
    tau: float
    segments: tuple[PulseSegment, ...] = ()
    sampler: Optional[Callable[[float], tuple[float, float]]] = field(
        default=None, repr=False)
    amp_scale: float = 1.0

    def __post_init__(self):
        if self.segments:
            total = sum(s.duration for s in self.segments)
            if abs(total - self.tau) > 1e-9:
                raise ValueError("segment durations do not sum to tau")
        elif self.sampler is None:
            raise ValueError("schedule needs segments or a sampler")

    def segment_index(self, t: float) -> int:
        if not self.segments:
            return 0 if t <= self.tau / 2 else 1
        t0 = 0.0
        for i, seg in enumerate(self.segments):
            t0 += seg.duration
            if t <= t0 + 1e-12:
                return i
        return len(self.segments) - 1

    def drive(self, t: float) -> tuple[float, float]:
        """(Omega(t) in rad/ns, drive phase phi1(t) in rad)."""
        if not 0.0 <= t <= self.tau + 1e-9:
            raise ValueError(f"t={t} outside [0, {self.tau}]")
        if self.sampler is not None:
            om, phi1 = self.sampler(min(t, self.tau))
            return self.amp_scale * om, phi1
        t0 = 0.0
        for seg in self.segments:
            if t <= t0 + seg.duration + 1e-12:
                om = sample_envelope(seg, min(max(t - t0, 0.0), seg.duration))
                return self.amp_scale * om, -seg.phase
            t0 += seg.duration
        return 0.0, 0.0

    def total_area(self) -> float:
        if self.segments:
            return self.amp_scale * sum(s.area for s in self.segments)
        from scipy.integrate import quad
        val, _ = quad(lambda t: self.drive(t)[0], 0, self.tau, limit=400)
        return val


def build_sr_nhqc(gate: GateSpec, tau: float = 120.0,
                  envelope: str = ENVELOPE_COSINE) -> PulseSchedule:
    """Six-segment superrobust schedule.

    Segment (area, phase, duration/tau):
    (pi/2, gamma-pi, 1/8), (pi, gamma-pi/2, 1/4), (pi/2, gamma-pi, 1/8),
    (pi/2, 0, 1/8), (pi, pi/2, 1/4), (pi/2, 0, 1/8).
    All six accumulated drive integrals D_mn vanish, which is what buys
    the quartic error suppression.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    g = gate.gamma
    spec = [(np.pi / 2, g - np.pi, tau / 8),
            (np.pi, g - np.pi / 2, tau / 4),
            (np.pi / 2, g - np.pi, tau / 8),
            (np.pi / 2, 0.0, tau / 8),
            (np.pi, np.pi / 2, tau / 4),
            (np.pi / 2, 0.0, tau / 8)]
    segs = tuple(PulseSegment(a, p, d, envelope) for a, p, d in spec)
    return PulseSchedule(SCHEME_SR, gate, tau, segments=segs)


def build_nhqc(gate: GateSpec, tau: float = 60.0,
               envelope: str = ENVELOPE_COSINE) -> PulseSchedule:
    """Conventional two-pi-pulse (orange-slice) holonomic schedule.

    Two pi-area rotations whose azimuths differ by gamma - pi send
    |b> -> e^{i gamma}|b> while the dark state idles.  Parallel
    transport holds (d11 = d22 = 0) but the bright-ancilla cross term
    D12 does not vanish, so the robustness stays second order.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    segs = (PulseSegment(np.pi, gate.gamma - np.pi, tau / 2, envelope),
            PulseSegment(np.pi, 0.0, tau / 2, envelope))
    return PulseSchedule(SCHEME_NHQC, gate, tau, segments=segs)


def _dynamical_controls(tau: float, gamma_prime: float) -> Callable[[float], tuple[float, float]]:
    """Sampler for the two-part dynamical path.

    chi = pi sin^2(pi t/tau) on both halves; the auxiliary phase is
    varphi = -(2/3)sin^3(chi) on [0, tau/2] and (2/3)sin^3(chi) -
    gamma' on [tau/2, tau].  Controls follow from
        phi1 = atan(chi' cot(chi) / varphi') - varphi,
        Omega = -chi' / sin(phi1 + varphi).
    The 0/0 forms at chi in {0, pi} are replaced by their analytic
    limits (phi1 + varphi -> -+pi/2), and |Omega| < 1e-9 is clipped to 0.
    """

    def sampler(t: float) -> tuple[float, float]:
        chi = np.pi * np.sin(np.pi * t / tau) ** 2
        chidot = (np.pi ** 2 / tau) * np.sin(2 * np.pi * t / tau)
        s = np.sin(chi)
        first = t <= tau / 2
        sign = -1.0 if first else 1.0
        varphi = sign * (2.0 / 3.0) * s ** 3 - (0.0 if first else gamma_prime)
        varphidot = sign * 2.0 * s ** 2 * np.cos(chi) * chidot
        if abs(s) < 1e-9 or abs(varphidot) < 1e-30:
            ang = sign * np.pi / 2  # limit of atan(-+inf)
            omega = -chidot / np.sin(ang)
        else:
            ang = np.arctan(chidot / np.tan(chi) / varphidot)
            omega = -chidot / np.sin(ang)
        if abs(omega) < 1e-9:
            omega = 0.0
        if not np.isfinite(omega):
            raise FloatingPointError(f"dynamical sampler produced Omega={omega} at t={t}")
        return omega, ang - varphi

    return sampler


def build_dynamical(gate: GateSpec, tau: float = 105.0) -> PulseSchedule:
    """Purely dynamical two-segment gate along the sin^2 ramp.

    The loop applies the phase pi + gamma' to the bright state; setting
    gamma' = gamma - pi makes the computational action equal
    U1(theta, phi, gamma).
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    gamma_prime = gate.gamma - np.pi
    return PulseSchedule(SCHEME_DYNAMICAL, gate, tau,
                         sampler=_dynamical_controls(tau, gamma_prime))


def build_schedule(gate: GateSpec, scheme: str, tau: Optional[float] = None,
                   envelope: str = ENVELOPE_COSINE) -> PulseSchedule:
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}, expected one of {SCHEMES}")
    tau = DEFAULT_TAU[scheme] if tau is None else tau
    if scheme == SCHEME_SR:
        return build_sr_nhqc(gate, tau, envelope)
    if scheme == SCHEME_NHQC:
        return build_nhqc(gate, tau, envelope)
    return build_dynamical(gate, tau)


def apply_rabi_error(schedule: PulseSchedule, epsilon: float) -> PulseSchedule:
    """Scale every drive amplitude by (1 + epsilon); phases untouched."""
    if abs(epsilon) > 1.0:
        raise ValueError("|epsilon| must not exceed 1")
    return replace(schedule, amp_scale=schedule.amp_scale * (1.0 + epsilon))


def schedule_to_csv(schedule: PulseSchedule, dt: float = 0.1,
                    header_lines: tuple[str, ...] = ()) -> str:
    """CSV dump of the sampled drive: t_ns, Omega_rad_per_ns, phi1_rad, segment_index."""
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t_ns", "Omega_rad_per_ns", "phi1_rad", "segment_index"])
    n = int(round(schedule.tau / dt))
    for k in range(n + 1):
        t = min(k * dt, schedule.tau)
        om, phi1 = schedule.drive(t)
        w.writerow([f"{t:.6g}", f"{om:.12g}", f"{phi1:.12g}", schedule.segment_index(t)])
    return buf.getvalue()
