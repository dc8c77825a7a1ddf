"""Binary (on-off) single-photon detector noise model and the
correlation/disturbance protocol that estimates its efficiency and dark
counts without tomography.

The detector stays silent on an n-photon input with probability
exp(-nu) * (1 - eta)^n, so its no-click effect is diagonal in photon
number.  The estimation scenario lives on the three-dimensional space
spanned by {vacuum, one H photon, one V photon}: the reference measurement
heralds polarization by a negative (no-click) detection that absorbs the V
photon, the device under test watches the V mode, and the input is the
diagonally polarized single photon.  Two reference settings - sharp, and
fully biased (every photon passed as H) - yield

    D_sharp  = exp(-nu) * eta        (correlation zero)
    C_biased = exp(-nu) * (2 - eta) - 1   (disturbance zero)

from which (eta, nu) invert in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cd_measures import CdValue, OutcomeDistribution, correlation, disturbance
from .errors import InvalidNoiseError, NotNormalizedError, OutOfDomainError
from .quantum_core import ATOL, Effect, _frozen

# Outcome labels: polarization H/V and detector off/on.  H pairs with off
# (photon routed away from the watched mode should leave the detector
# silent), so the matched pairs are (H, off) and (V, on).
LABELS_POLARIZATION = (-1.0, 1.0)  # (H, V)
LABELS_CLICK = (-1.0, 1.0)  # (off, on)

_REFERENCES = ("sharp", "fully_biased")


@dataclass(frozen=True)
class DetectorNoise:
    """Detection efficiency eta in [0, 1] and dark-count exponent nu >= 0.

    A zero-efficiency (never-clicking) detector is representable, although
    its parameters cannot be recovered by ``estimate_noise``.
    """

    eta: float
    nu: float

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise InvalidNoiseError(f"eta {self.eta!r} outside [0, 1]")
        if self.nu < 0.0:
            raise InvalidNoiseError(f"nu {self.nu!r} negative")

    @property
    def silence(self) -> float:
        """No-dark-count probability exp(-nu)."""
        return math.exp(-self.nu)


@dataclass(frozen=True, eq=False)
class DetectorPovm:
    """No-click / click effect pair on a truncated Fock space."""

    e_off: Effect
    e_on: Effect


@dataclass(frozen=True, eq=False)
class FockState:
    """Pure state on the basis (vacuum, one H photon, one V photon)."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex).ravel()
        if amp.shape != (3,):
            raise NotNormalizedError("expected 3 amplitudes (vac, 1H, 1V)")
        if abs(np.linalg.norm(amp) - 1.0) > ATOL:
            raise NotNormalizedError("amplitudes are not normalized")
        object.__setattr__(self, "amplitudes", _frozen(amp))

    @classmethod
    def diagonal_photon(cls) -> "FockState":
        """(|1H> + |1V>)/sqrt(2): the disturbance-maximizing input."""
        return cls(np.array([0.0, 1.0, 1.0]) / math.sqrt(2.0))

    def density(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


def detector_povm(noise: DetectorNoise, cutoff: int) -> DetectorPovm:
    """Single-mode on-off POVM truncated at ``cutoff`` photons:
    no-click entries exp(-nu) (1 - eta)^n for n = 0 .. cutoff."""
    if cutoff < 1:
        raise InvalidNoiseError(f"cutoff {cutoff} must be at least 1")
    n = np.arange(cutoff + 1)
    off_diag = noise.silence * (1.0 - noise.eta) ** n
    e_off = np.diag(off_diag).astype(complex)
    e_on = np.eye(cutoff + 1, dtype=complex) - e_off
    return DetectorPovm(Effect(e_off), Effect(e_on))


def scenario_distributions(
    noise: DetectorNoise, reference: str
) -> tuple[np.ndarray, np.ndarray]:
    """Joint polarization/click table and detector-alone distribution.

    Rows are reference outcomes (H, V), columns are detector outcomes
    (off, on).  Everything is computed from the truncated-space operators,
    not from the closed forms.
    """
    if reference not in _REFERENCES:
        raise ValueError(f"reference must be one of {_REFERENCES}, got {reference!r}")
    silence = noise.silence
    # No-click effect of a detector watching the V mode: photon number in
    # V is 0 on vacuum and on the H photon, 1 on the V photon.
    e_off = np.diag([silence, silence, silence * (1.0 - noise.eta)]).astype(complex)
    e_on = np.eye(3, dtype=complex) - e_off
    rho = FockState.diagonal_photon().density()
    if reference == "sharp":
        # No click on the heralding detector -> outcome H, photon passes;
        # click -> outcome V, photon absorbed, vacuum travels on.
        k_h = np.diag([1.0, 1.0, 0.0]).astype(complex)
        k_v = np.zeros((3, 3), dtype=complex)
        k_v[0, 2] = 1.0
    else:
        # Fully biased reference: every photon passes, reported as H.
        k_h = np.eye(3, dtype=complex)
        k_v = np.zeros((3, 3), dtype=complex)
    joint = np.empty((2, 2))
    for i, k in enumerate((k_h, k_v)):
        post = k @ rho @ k.conj().T
        joint[i, 0] = np.trace(post @ e_off).real
        joint[i, 1] = np.trace(post @ e_on).real
    alone = np.array(
        [np.trace(rho @ e_off).real, np.trace(rho @ e_on).real]
    )
    return joint, alone


def scenario_cd(noise: DetectorNoise, reference: str) -> CdValue:
    """Correlation and disturbance of one reference setting, from first
    principles on the truncated space."""
    joint, alone = scenario_distributions(noise, reference)
    corr = correlation(joint, LABELS_POLARIZATION, LABELS_CLICK)
    dist = disturbance(
        OutcomeDistribution(tuple(alone), LABELS_CLICK),
        OutcomeDistribution(tuple(joint.sum(axis=0)), LABELS_CLICK),
    )
    return CdValue(corr, dist)


def estimate_noise(d1: float, c2: float) -> DetectorNoise:
    """Invert the two reference readings into detector parameters.

    From d1 = exp(-nu) eta and c2 = exp(-nu)(2 - eta) - 1 the sum gives
    exp(-nu) = (c2 + d1 + 1)/2 and eta = 2 d1 / (c2 + d1 + 1); both are
    validated to lie in their physical ranges.
    """
    total = c2 + d1 + 1.0
    if total <= 0.0:
        raise OutOfDomainError(f"c2 + d1 + 1 = {total!r} is not positive")
    silence = total / 2.0
    if silence > 1.0 + 1e-12:
        raise OutOfDomainError(f"implied exp(-nu) = {silence!r} exceeds 1")
    eta = 2.0 * d1 / total
    if not 0.0 < eta <= 1.0 + 1e-12:
        raise OutOfDomainError(f"implied eta = {eta!r} outside (0, 1]")
    return DetectorNoise(min(eta, 1.0), -math.log(min(silence, 1.0)))
