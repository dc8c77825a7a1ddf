"""Correlation and disturbance of sequential measurements, their operator
forms, and the tradeoff between them.

For an n-outcome pair with identical label sets, the correlation is the
rescaled coincidence probability

    C = n/(n-1) * (p(a = b) - 1/n),

and the disturbance is the rescaled Euclidean distance between the target's
outcome distribution with the probe unperformed and with the probe performed
but unregistered,

    D = sqrt(n/(n-1)) * || p(b) - p~(b) ||_2.

For dichotomic measurements these reduce to C = 2 p(a=b) - 1 and
D = 2 |p(+) - p~(+)|, and C^2 + D^2 <= 1 for every state and every
minimal-back-action measurement pair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    LabelMismatchError,
    NotDichotomicError,
    NotNormalizedError,
)
from .quantum_core import (
    ATOL,
    DensityMatrix,
    LuedersInstrument,
    Povm,
    _as_square,
    _check_dims,
    dual_channel,
    joint_probabilities,
)


# Slack allowed on the exact tradeoff inequality.
INEQ_TOL = 1e-9


@dataclass(frozen=True)
class CdValue:
    """One exact correlation/disturbance pair.

    Exact values always satisfy the tradeoff C^2 + D^2 <= 1 (finite-shot
    estimates, which may fall outside the disc, live in CdEstimate).
    """

    correlation: float
    disturbance: float

    def __post_init__(self):
        if self.disturbance < 0:
            raise ValueError(f"disturbance {self.disturbance!r} is negative")
        if self.correlation**2 + self.disturbance**2 > 1.0 + INEQ_TOL:
            raise ValueError(
                f"({self.correlation!r}, {self.disturbance!r}) violates the "
                "correlation-disturbance tradeoff"
            )


@dataclass(frozen=True)
class OutcomeDistribution:
    """Probability vector with its outcome labels."""

    probs: tuple[float, ...]
    labels: tuple[float, ...]

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probs)
        labels = tuple(float(x) for x in self.labels)
        if len(probs) != len(labels):
            raise LabelMismatchError("one label per probability is required")
        if any(p < -ATOL or p > 1.0 + ATOL for p in probs):
            raise NotNormalizedError("probability outside [0, 1]")
        if abs(sum(probs) - 1.0) > ATOL:
            raise NotNormalizedError(f"probabilities sum to {sum(probs)!r}, not 1")
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "labels", labels)

    @property
    def n_outcomes(self) -> int:
        return len(self.probs)


def _matched_label_sets(labels_a, labels_b) -> None:
    la, lb = tuple(labels_a), tuple(labels_b)
    if len(set(la)) != len(la) or len(set(lb)) != len(lb):
        raise LabelMismatchError("outcome labels must be distinct")
    if set(la) != set(lb):
        raise LabelMismatchError(f"label sets differ: {sorted(la)} vs {sorted(lb)}")


def correlation(joint, labels_a, labels_b) -> float:
    """Rescaled coincidence probability of a joint outcome table.

    ``joint[i, j]`` is the probability of probe outcome ``labels_a[i]``
    followed by target outcome ``labels_b[j]``; outcomes match when their
    labels are equal.
    """
    table = np.asarray(joint, dtype=float)
    la = tuple(float(x) for x in labels_a)
    lb = tuple(float(x) for x in labels_b)
    if table.shape != (len(la), len(lb)):
        raise LabelMismatchError(
            f"table shape {table.shape} does not match label counts"
        )
    _matched_label_sets(la, lb)
    total = table.sum()
    if abs(total - 1.0) > ATOL:
        raise NotNormalizedError(f"joint table sums to {total!r}, not 1")
    n = len(la)
    p_match = sum(
        table[i, j] for i in range(n) for j in range(n) if la[i] == lb[j]
    )
    return n / (n - 1) * (p_match - 1.0 / n)


def disturbance(p_alone: OutcomeDistribution, p_tilde: OutcomeDistribution) -> float:
    """Rescaled Euclidean distance between the probe-off and probe-on
    (unregistered) target distributions."""
    if p_alone.labels != p_tilde.labels:
        raise LabelMismatchError("distributions carry different labels")
    n = p_alone.n_outcomes
    diff = np.asarray(p_alone.probs) - np.asarray(p_tilde.probs)
    return float(np.sqrt(n / (n - 1)) * np.linalg.norm(diff))


def cd_from_scenario(
    rho: DensityMatrix, inst_a: LuedersInstrument, povm_b: Povm
) -> CdValue:
    """Exact correlation and disturbance of a state/probe/target scenario."""
    joint = joint_probabilities(inst_a, povm_b, rho)
    corr = correlation(joint, inst_a.povm.labels, povm_b.labels)
    alone = tuple(
        float(np.trace(rho.matrix @ e.matrix).real) for e in povm_b.effects
    )
    tilde = tuple(float(x) for x in joint.sum(axis=0))
    dist = disturbance(
        OutcomeDistribution(alone, povm_b.labels),
        OutcomeDistribution(tilde, povm_b.labels),
    )
    return CdValue(corr, dist)


def disturbance_operator(inst_a: LuedersInstrument, observable_b) -> np.ndarray:
    """Observable shift caused by the unregistered probe:
    M_b - sum_a E_a^(1/2) M_b E_a^(1/2).

    Its expectation value is the signed disturbance; the optimal state
    (largest-eigenvalue eigenvector) makes it nonnegative.
    """
    m = _as_square(observable_b, "observable")
    _check_dims(inst_a.dim, m.shape[0])
    return m - dual_channel(inst_a, m)


def disturbance_bound(inst_a: LuedersInstrument, observable_b) -> float:
    """Largest disturbance attainable over all states: the spectral radius
    of the disturbance operator (dichotomic target labels assumed)."""
    w = np.linalg.eigvalsh(disturbance_operator(inst_a, observable_b))
    return float(np.abs(w).max())


def correlation_operator(inst_a: LuedersInstrument, observable_b) -> np.ndarray:
    """Observable whose expectation value equals the correlation, for a
    two-outcome probe with labels +1/-1:
    sum_a label_a * E_a^(1/2) M_b E_a^(1/2)."""
    m = _as_square(observable_b, "observable")
    _check_dims(inst_a.dim, m.shape[0])
    if sorted(inst_a.povm.labels) != [-1.0, 1.0]:
        raise NotDichotomicError(
            f"probe labels {inst_a.povm.labels} are not a +1/-1 pair"
        )
    out = np.zeros_like(m)
    for label, k in zip(inst_a.povm.labels, inst_a.kraus):
        out = out + label * (k @ m @ k)
    return out


def dissipator(effect_sqrt, target) -> np.ndarray:
    """Double-commutator part of the measurement back-action on an
    observable: (1/2) [E^(1/2), [E^(1/2), M]].

    Subtracting it from the anticommutator term (1/2){E, M} gives the
    square-root update E^(1/2) M E^(1/2); summed over the outcomes of a
    probe it gives the disturbance operator.
    """
    k = _as_square(effect_sqrt, "effect square root")
    m = _as_square(target, "target observable")
    _check_dims(k.shape[0], m.shape[0])
    inner = k @ m - m @ k
    return 0.5 * (k @ inner - inner @ k)
