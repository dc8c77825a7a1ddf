"""Two-outcome randomized measurements in d-dimensional Hilbert space.

A randomized dichotomic measurement mixes a rank-one projector with white
noise: E_+ = gamma * P_+ + (1 - gamma) * I / 2.  When the probe is sharp
(gamma = 1) and the state is the top eigenvector of the disturbance
operator, correlation and disturbance depend only on the projector overlap
c^2 = tr(P_a P_b):

    C = gamma * (2 c^2 - 1),   D = 2 gamma * sqrt((1 - c^2) c^2),

so the scan lies on the circle C^2 + D^2 = gamma^2 in any dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cd_measures import CdValue
from .errors import (
    DimensionMismatchError,
    InvalidDimError,
    InvalidMeasurementError,
    ProbeNotSharpError,
)
from .quantum_core import Effect, Povm, _frozen

# Idempotency / rank-one tolerance for the projectors.
PROJECTOR_TOL = 1e-9

# Below this top eigenvalue the disturbance operator is treated as zero
# (parallel or orthogonal projectors) and the probe ket is returned.
DEGENERACY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class RandomizedDichotomic:
    """Projector-plus-noise two-outcome measurement in dimension ``dim``."""

    dim: int
    gamma: float
    projector_plus: Effect

    def __post_init__(self):
        if self.dim < 2:
            raise InvalidDimError(f"dimension {self.dim} below 2")
        if not 0.0 <= self.gamma <= 1.0:
            raise InvalidMeasurementError(f"gamma {self.gamma!r} outside [0, 1]")
        p = self.projector_plus.matrix
        if p.shape[0] != self.dim:
            raise DimensionMismatchError(
                f"projector dim {p.shape[0]} does not match {self.dim}"
            )
        if np.abs(p @ p - p).max() > PROJECTOR_TOL:
            raise InvalidMeasurementError("projector is not idempotent")
        if abs(p.trace().real - 1.0) > PROJECTOR_TOL:
            raise InvalidMeasurementError("projector must have rank one")

    @classmethod
    def from_ket(cls, ket, gamma: float) -> "RandomizedDichotomic":
        k = np.asarray(ket, dtype=complex).ravel()
        k = k / np.linalg.norm(k)
        return cls(k.size, gamma, Effect(np.outer(k, k.conj())))

    def to_povm(self) -> Povm:
        """Effects gamma * P + (1 - gamma) I/2 and its complement, labels +1/-1.

        The noise part is taken proportional to the identity; any other
        noise operator would leave the disturbance unchanged, so the
        canonical choice keeps simulations reproducible.
        """
        eye = np.eye(self.dim, dtype=complex)
        e_plus = self.gamma * self.projector_plus.matrix + (1 - self.gamma) * eye / 2
        return Povm([e_plus, eye - e_plus], (1.0, -1.0))


@dataclass(frozen=True, eq=False)
class OverlapGeometry:
    """Projector-pair geometry: overlap, disturbance spectral radius (per
    unit strength), and the disturbance-maximizing ket."""

    c_squared: float
    lam: float
    psi_plus: np.ndarray


def _phase_fixed(ket: np.ndarray) -> np.ndarray:
    idx = int(np.argmax(np.abs(ket)))
    phase = ket[idx] / abs(ket[idx])
    return _frozen(ket / phase)


def overlap(pa: RandomizedDichotomic, pb: RandomizedDichotomic) -> OverlapGeometry:
    """Overlap geometry of a sharp probe and a target projector.

    Returns c^2 = tr(P_a P_b), the spectral radius lam = 2 sqrt((1-c^2)c^2)
    of the sharp-probe disturbance operator, and its top eigenvector (the
    optimal input state).  For degenerate geometry (c^2 of 0 or 1) the
    disturbance vanishes everywhere and the probe ket is returned.
    """
    if pa.dim != pb.dim:
        raise DimensionMismatchError(f"dimension mismatch: {pa.dim} vs {pb.dim}")
    if abs(pa.gamma - 1.0) > 1e-12:
        raise ProbeNotSharpError(f"probe gamma {pa.gamma!r} is not 1")
    proj_a = pa.projector_plus.matrix
    proj_b = pb.projector_plus.matrix
    c2 = float(np.clip(np.trace(proj_a @ proj_b).real, 0.0, 1.0))
    lam = 2.0 * math.sqrt((1.0 - c2) * c2)
    # Disturbance operator of the sharp probe acting on the target
    # projector direction, up to the overall strength factor.
    ab = proj_a @ proj_b
    geom = ab + ab.conj().T - 2.0 * ab @ proj_a
    w, v = np.linalg.eigh((geom + geom.conj().T) / 2)
    if w[-1] > DEGENERACY_TOL:
        psi = v[:, -1]
    else:
        w_a, v_a = np.linalg.eigh(proj_a)
        psi = v_a[:, -1]
    return OverlapGeometry(c2, lam, _phase_fixed(psi))


def cd_highdim(pa: RandomizedDichotomic, pb: RandomizedDichotomic) -> CdValue:
    """Closed-form correlation and disturbance of a sharp probe followed by
    a randomized target, evaluated on the optimal state."""
    geom = overlap(pa, pb)
    corr = pb.gamma * (2.0 * geom.c_squared - 1.0)
    dist = pb.gamma * geom.lam
    return CdValue(corr, dist)


def bloch_length(gamma: float, dim: int) -> float:
    """Generalized Bloch length gamma * sqrt(d - 1) of a randomized
    measurement, in the basis normalization tr(sigma_i sigma_j) = d."""
    if dim < 2:
        raise InvalidDimError(f"dimension {dim} below 2")
    if not 0.0 <= gamma <= 1.0:
        raise InvalidMeasurementError(f"gamma {gamma!r} outside [0, 1]")
    return gamma * math.sqrt(dim - 1)
