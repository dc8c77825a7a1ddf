"""Seeded Monte Carlo emulation of the two-arm experiment: finite-shot
count records, plug-in estimators for correlation and disturbance, and the
three post-measurement-state policies of the probe.

Reproducibility contract: all randomness comes from the counter-based
Philox 4x64 bit generator (``numpy.random.Philox``) keyed by the 64-bit
seed, consumed as uniform doubles through the generator's native 53-bit
conversion.  Categorical draws use inverse-CDF lookup (searchsorted)
against the cumulative distribution; the joint arm is drawn before the
alone arm from the same stream.  Identical (scenario, seed) pairs yield
bit-identical records on any platform.  This algorithm is part of the
package contract and must not change silently.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import qubit_model
from .cd_measures import CdValue, OutcomeDistribution, correlation, disturbance
from .errors import (
    EmptyRecordError,
    InvalidShotsError,
    LabelMismatchError,
    NonQubitError,
)
from .quantum_core import (
    DensityMatrix,
    LuedersInstrument,
    Povm,
    _frozen,
    apply_instrument,
    joint_probabilities,
)


class InstrumentPolicy(enum.Enum):
    """Post-measurement-state conventions for the probe.

    ``LUEDERS`` applies the square-root update; ``EIGENSTATE`` re-prepares
    the projector eigenstate along the probe axis; ``MIXED`` re-prepares
    the mixed state with Bloch vector +/- gamma times the probe axis.
    """

    LUEDERS = "lueders"
    EIGENSTATE = "eigenstate"
    MIXED = "mixed"


@dataclass(frozen=True, eq=False)
class ShotRecord:
    """Counts from one joint run and one probe-off run.

    ``joint_counts[i, j]`` pairs probe outcome i with target outcome j in
    effect order; estimators match outcomes by equal index, which
    ``sample`` guarantees by requiring identical label sequences.
    """

    joint_counts: np.ndarray
    alone_counts: np.ndarray
    shots_joint: int
    shots_alone: int
    seed: int

    def __post_init__(self):
        jc = np.asarray(self.joint_counts, dtype=np.int64)
        ac = np.asarray(self.alone_counts, dtype=np.int64)
        if jc.sum() != self.shots_joint or ac.sum() != self.shots_alone:
            raise InvalidShotsError("counts do not add up to the shot totals")
        object.__setattr__(self, "joint_counts", _frozen(jc))
        object.__setattr__(self, "alone_counts", _frozen(ac))


@dataclass(frozen=True)
class CdEstimate:
    """Plug-in estimates with one-sigma statistical errors."""

    c_hat: float
    d_hat: float
    c_err: float
    d_err: float


def _stream(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


def _categorical(rng: np.random.Generator, probs, shots: int) -> np.ndarray:
    """Multinomial counts via inverse-CDF on uniform doubles."""
    p = np.clip(np.asarray(probs, dtype=float).ravel(), 0.0, None)
    p = p / p.sum()
    edges = np.cumsum(p)
    draws = np.searchsorted(edges, rng.random(shots), side="right")
    draws = np.minimum(draws, p.size - 1)
    return np.bincount(draws, minlength=p.size).astype(np.int64)


def policy_update(
    policy: InstrumentPolicy,
    probe: qubit_model.QubitMeasurement,
    rho: DensityMatrix,
    outcome: int,
) -> DensityMatrix:
    """Normalized post-measurement state for one probe outcome (index 0
    carries label +1, index 1 label -1)."""
    if rho.dim != 2:
        raise NonQubitError("post-measurement policies are defined for qubits")
    sign = 1.0 if outcome == 0 else -1.0
    if policy is InstrumentPolicy.LUEDERS:
        sub, prob = apply_instrument(probe.to_instrument(), rho, outcome)
        if prob <= 0.0:
            raise EmptyRecordError("zero-probability outcome has no post state")
        return DensityMatrix(sub / prob)
    if policy is InstrumentPolicy.EIGENSTATE:
        return qubit_model.state_from_bloch(sign * probe.axis)
    return qubit_model.state_from_bloch(sign * probe.strength * probe.axis)


def policy_joint_probabilities(
    rho: DensityMatrix,
    inst_a: LuedersInstrument,
    povm_b: Povm,
    policy: InstrumentPolicy = InstrumentPolicy.LUEDERS,
) -> np.ndarray:
    """Exact joint outcome table under the chosen post-measurement policy."""
    if policy is InstrumentPolicy.LUEDERS:
        return joint_probabilities(inst_a, povm_b, rho)
    if inst_a.dim != 2:
        raise NonQubitError("post-measurement policies are defined for qubits")
    probe = qubit_model.measurement_from_povm(inst_a.povm)
    table = np.zeros((inst_a.n_outcomes, povm_b.n_outcomes))
    for i, effect in enumerate(inst_a.povm.effects):
        p_out = float(np.trace(rho.matrix @ effect.matrix).real)
        if p_out <= 0.0:
            continue
        post = policy_update(policy, probe, rho, i)
        for j, eb in enumerate(povm_b.effects):
            table[i, j] = p_out * np.trace(post.matrix @ eb.matrix).real
    return table


def policy_cd(
    rho: DensityMatrix,
    inst_a: LuedersInstrument,
    povm_b: Povm,
    policy: InstrumentPolicy = InstrumentPolicy.LUEDERS,
) -> CdValue:
    """Exact correlation and disturbance under a post-measurement policy.

    Coincides with the plain scenario value for the square-root policy.
    """
    table = policy_joint_probabilities(rho, inst_a, povm_b, policy)
    corr = correlation(table, inst_a.povm.labels, povm_b.labels)
    alone = tuple(
        float(np.trace(rho.matrix @ e.matrix).real) for e in povm_b.effects
    )
    dist = disturbance(
        OutcomeDistribution(alone, povm_b.labels),
        OutcomeDistribution(tuple(float(x) for x in table.sum(axis=0)), povm_b.labels),
    )
    return CdValue(corr, dist)


def sample_distributions(
    joint, alone, shots_joint: int, shots_alone: int, seed: int
) -> ShotRecord:
    """Draw a shot record from explicit joint and alone distributions."""
    if shots_joint <= 0 or shots_alone <= 0:
        raise InvalidShotsError("shot counts must be positive")
    joint = np.asarray(joint, dtype=float)
    rng = _stream(seed)
    jc = _categorical(rng, joint.ravel(), shots_joint).reshape(joint.shape)
    ac = _categorical(rng, alone, shots_alone)
    return ShotRecord(jc, ac, shots_joint, shots_alone, seed)


def sample(
    rho: DensityMatrix,
    inst_a: LuedersInstrument,
    povm_b: Povm,
    shots_joint: int,
    shots_alone: int,
    seed: int,
    policy: InstrumentPolicy = InstrumentPolicy.LUEDERS,
) -> ShotRecord:
    """Simulate the two-arm experiment: ``shots_joint`` runs with the probe
    on and registered, ``shots_alone`` runs with the probe off."""
    if list(inst_a.povm.labels) != list(povm_b.labels):
        raise LabelMismatchError(
            "probe and target label sequences must be identical for matching"
        )
    joint = policy_joint_probabilities(rho, inst_a, povm_b, policy)
    alone = [float(np.trace(rho.matrix @ e.matrix).real) for e in povm_b.effects]
    return sample_distributions(joint, alone, shots_joint, shots_alone, seed)


def estimate_cd(rec: ShotRecord) -> CdEstimate:
    """Plug-in estimators from recorded intensities.

    For dichotomic records: c = 2 (I(+,+) + I(-,-)) / sum(I) - 1 and
    d = 2 |Ialone(+)/sum(Ialone) - (I(+,+) + I(-,+))/sum(I)|, with
    binomial one-sigma errors (the two arms of d are independent and add
    in quadrature).  Records with more outcomes use the rescaled
    coincidence/distance forms with delta-method errors.
    """
    n_joint = int(rec.joint_counts.sum())
    n_alone = int(rec.alone_counts.sum())
    if n_joint == 0 or n_alone == 0:
        raise EmptyRecordError("cannot estimate from empty record")
    q = rec.joint_counts / n_joint
    if q.shape[0] != q.shape[1]:
        raise LabelMismatchError("joint record is not square")
    n = q.shape[0]
    scale = n / (n - 1)
    p_match = float(np.trace(q))
    c_hat = scale * (p_match - 1.0 / n)
    c_err = scale * np.sqrt(p_match * (1.0 - p_match) / n_joint)

    p_alone = rec.alone_counts / n_alone
    p_tilde = q.sum(axis=0)
    if n == 2:
        d_hat = 2.0 * abs(p_alone[0] - p_tilde[0])
        d_err = 2.0 * np.sqrt(
            p_alone[0] * (1.0 - p_alone[0]) / n_alone
            + p_tilde[0] * (1.0 - p_tilde[0]) / n_joint
        )
    else:
        diff = p_alone - p_tilde
        norm = np.linalg.norm(diff)
        k = np.sqrt(scale)
        d_hat = k * norm
        cov_alone = (np.diag(p_alone) - np.outer(p_alone, p_alone)) / n_alone
        cov_tilde = (np.diag(p_tilde) - np.outer(p_tilde, p_tilde)) / n_joint
        if norm > 0:
            var = (diff @ (cov_alone + cov_tilde) @ diff) * (k / norm) ** 2
        else:
            var = scale * np.trace(cov_alone + cov_tilde)
        d_err = float(np.sqrt(max(var, 0.0)))
    return CdEstimate(float(c_hat), float(d_hat), float(c_err), float(d_err))
