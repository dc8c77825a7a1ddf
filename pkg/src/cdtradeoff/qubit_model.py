"""Closed-form qubit machinery: Bloch parametrization of two-outcome
measurements, the sheared-ellipse law relating correlation and disturbance,
the disturbance-maximizing input state, and the convex (projector + dummy)
measurement decomposition used on hardware.

A two-outcome qubit measurement is the four-vector (b0, b) with effects
E_pm = ((1 pm b0) I pm b . sigma) / 2; positivity requires |b0| + |b| <= 1.
Scanning the angle theta between probe and target axes with the optimal
input state traces

    C = a0 b0 + |a||b| cos(theta) + delta |b| sin(theta)
    D = s |b| sin(theta)

where u_pm = sqrt((1 pm a0)^2 - |a|^2), s = 1 - (u_+ + u_-)/2 squeezes and
delta = (u_+ - u_-)/2 shears the circle that a sharp, unbiased probe would
produce.  Since the disturbance is a norm, scans are symmetric under
theta -> -theta; sin(theta) enters through its absolute value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cd_measures import CdValue
from .errors import (
    InvalidBiasError,
    InvalidMeasurementError,
    NonQubitError,
    ZeroBlochError,
)
from .quantum_core import ATOL, DensityMatrix, LuedersInstrument, Povm, _frozen

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])
ID2 = np.eye(2, dtype=complex)


def bloch_matrix(vec) -> np.ndarray:
    """v . sigma for a real 3-vector v."""
    v = np.asarray(vec, dtype=float)
    if v.shape != (3,):
        raise ZeroBlochError(f"Bloch vector must have 3 components, got {v.shape}")
    return np.einsum("i,ijk->jk", v, PAULI)


def state_from_bloch(vec) -> DensityMatrix:
    """Qubit state (I + r . sigma)/2; |r| <= 1 enforced by positivity."""
    return DensityMatrix((ID2 + bloch_matrix(vec)) / 2)


def bloch_of_state(rho: DensityMatrix) -> np.ndarray:
    if rho.dim != 2:
        raise NonQubitError(f"expected a qubit state, got dim {rho.dim}")
    return np.array(
        [np.trace(rho.matrix @ s).real for s in PAULI]
    )


def plane_axis(theta: float) -> np.ndarray:
    """Unit vector (cos theta, 0, sin theta) in the x-z measurement plane."""
    return np.array([math.cos(theta), 0.0, math.sin(theta)])


@dataclass(frozen=True, eq=False)
class QubitMeasurement:
    """Two-outcome qubit measurement parametrized by bias and Bloch vector."""

    bias: float
    bloch: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.bloch, dtype=float)
        if v.shape != (3,):
            raise InvalidMeasurementError("Bloch vector must have 3 components")
        if abs(self.bias) + np.linalg.norm(v) > 1.0 + ATOL:
            raise InvalidMeasurementError(
                f"|bias| + |bloch| = {abs(self.bias) + np.linalg.norm(v)!r} "
                "exceeds 1: effects would not be positive"
            )
        object.__setattr__(self, "bias", float(self.bias))
        object.__setattr__(self, "bloch", _frozen(v))

    @classmethod
    def from_axis(
        cls, bias: float, strength: float, axis
    ) -> "QubitMeasurement":
        a = np.asarray(axis, dtype=float)
        norm = np.linalg.norm(a)
        if norm == 0:
            raise ZeroBlochError("measurement axis has zero length")
        return cls(bias, strength * a / norm)

    @property
    def strength(self) -> float:
        """Bloch-vector length (sharpness)."""
        return float(np.linalg.norm(self.bloch))

    @property
    def axis(self) -> np.ndarray:
        n = self.strength
        if n == 0:
            raise ZeroBlochError("unsharp measurement of zero strength has no axis")
        return self.bloch / n

    def observable(self) -> np.ndarray:
        return self.bias * ID2 + bloch_matrix(self.bloch)

    def effects(self) -> tuple[np.ndarray, np.ndarray]:
        m = self.observable()
        return (ID2 + m) / 2, (ID2 - m) / 2

    def to_povm(self) -> Povm:
        return Povm(self.effects(), (1.0, -1.0))

    def to_instrument(self) -> LuedersInstrument:
        return LuedersInstrument(self.to_povm())


def measurement_from_povm(povm: Povm) -> QubitMeasurement:
    """Recover the (bias, Bloch) parametrization of a dichotomic qubit POVM."""
    if povm.dim != 2:
        raise NonQubitError(f"expected a qubit POVM, got dim {povm.dim}")
    if sorted(povm.labels) != [-1.0, 1.0]:
        raise InvalidMeasurementError("POVM labels must be +1/-1")
    plus = povm.effects[povm.labels.index(1.0)].matrix
    bias = np.trace(plus).real - 1.0
    bloch = np.array([np.trace(plus @ s).real for s in PAULI])
    return QubitMeasurement(bias, bloch)


@dataclass(frozen=True, eq=False)
class ConvexPovmSpec:
    """Hardware parametrization: with probability gamma project along the
    x-z axis at angle theta, otherwise report a biased dummy outcome."""

    theta: float
    gamma: float
    bias_b0: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise InvalidMeasurementError(f"gamma {self.gamma!r} outside [0, 1]")
        if abs(self.bias_b0) > 1.0 - self.gamma + 1e-12:
            raise InvalidBiasError(
                f"|bias| {abs(self.bias_b0)!r} exceeds 1 - gamma = "
                f"{1.0 - self.gamma!r}: dummy weights would leave [0, 1]"
            )


def convex_povm(spec: ConvexPovmSpec) -> Povm:
    """Build the two effects gamma * P_pm(theta) + (1 - gamma) * N_pm(b0).

    The result has Bloch vector gamma * (cos theta, 0, sin theta) and bias
    b0, i.e. the convex weights realize exactly the (b0, b) four-vector.
    """
    axis = plane_axis(spec.theta)
    projector_part = bloch_matrix(spec.gamma * axis)
    e_plus = ((1.0 + spec.bias_b0) * ID2 + projector_part) / 2
    e_minus = ((1.0 - spec.bias_b0) * ID2 - projector_part) / 2
    return Povm([e_plus, e_minus], (1.0, -1.0))


@dataclass(frozen=True)
class EllipseCharacter:
    """Derived probe parameters shaping the correlation-disturbance curve."""

    shift: float          # a0 * b0, displacement along the correlation axis
    scale_major: float    # |a| * |b|
    scale_minor: float    # s * |b|
    shear: float          # delta
    squeeze: float        # s
    u_plus: float
    u_minus: float
    probe_strength: float
    probe_bias: float


def ellipse_character(
    probe: QubitMeasurement, target: QubitMeasurement | None = None
) -> EllipseCharacter:
    """Squeeze and shear parameters of a probe measurement.

    ``target`` supplies the bias and strength entering the shift and scale
    fields; when omitted a sharp unbiased target is assumed, so those
    fields reduce to the probe-only quantities.
    """
    a0 = probe.bias
    na = probe.strength
    up_sq = (1.0 + a0) ** 2 - na**2
    um_sq = (1.0 - a0) ** 2 - na**2
    if min(up_sq, um_sq) < -ATOL:
        raise InvalidMeasurementError("probe violates positivity")
    u_plus = math.sqrt(max(up_sq, 0.0))
    u_minus = math.sqrt(max(um_sq, 0.0))
    s = 1.0 - (u_plus + u_minus) / 2
    delta = (u_plus - u_minus) / 2
    b0, nb = (0.0, 1.0) if target is None else (target.bias, target.strength)
    return EllipseCharacter(
        shift=a0 * b0,
        scale_major=na * nb,
        scale_minor=s * nb,
        shear=delta,
        squeeze=s,
        u_plus=u_plus,
        u_minus=u_minus,
        probe_strength=na,
        probe_bias=a0,
    )


def cd_parametric(
    probe: QubitMeasurement, target_gamma: float, target_bias: float, theta: float
) -> CdValue:
    """Closed-form correlation and disturbance at axis angle ``theta`` for
    the disturbance-maximizing input state.

    Must agree with the full density-matrix pipeline on the optimal state.
    ``theta`` is folded onto [0, pi] (the disturbance is a norm).
    """
    if abs(target_bias) + target_gamma > 1.0 + ATOL:
        raise InvalidMeasurementError("target violates positivity")
    char = ellipse_character(probe)
    sin_t = abs(math.sin(theta))
    cos_t = math.cos(theta)
    corr = (
        probe.bias * target_bias
        + char.probe_strength * target_gamma * cos_t
        + char.shear * target_gamma * sin_t
    )
    dist = char.squeeze * target_gamma * sin_t
    return CdValue(corr, dist)


def optimal_bloch(probe_axis, target_axis) -> np.ndarray:
    """Unit Bloch vector maximizing the disturbance: the component of the
    target axis perpendicular to the probe axis, normalized.

    For parallel axes the disturbance vanishes for every state; a fixed
    perpendicular direction (probe axis crossed with the first
    non-parallel basis vector) is returned for reproducibility.
    """
    a = np.asarray(probe_axis, dtype=float)
    b = np.asarray(target_axis, dtype=float)
    r = b - (a @ b) * a
    norm = np.linalg.norm(r)
    if norm < 1e-12:
        for unit in np.eye(3):
            perp = np.cross(a, unit)
            if np.linalg.norm(perp) > 1e-6:
                return perp / np.linalg.norm(perp)
    return r / norm


def optimal_state(probe: QubitMeasurement, target: QubitMeasurement) -> DensityMatrix:
    """Pure disturbance-maximizing input state for a probe/target pair."""
    return state_from_bloch(optimal_bloch(probe.axis, target.axis))


def amplitude_phase_form(
    char: EllipseCharacter, target_gamma: float
) -> tuple[float, float]:
    """Collapse the two oscillating correlation terms into one cosine:
    C - shift = R cos(theta - phi) with R = |b| sqrt(|a|^2 + delta^2) and
    tan(phi) = delta / |a|."""
    if char.probe_strength == 0:
        raise ZeroBlochError("amplitude-phase form undefined for zero strength")
    amplitude = target_gamma * math.hypot(char.probe_strength, char.shear)
    phase = math.atan2(char.shear, char.probe_strength)
    return amplitude, phase
