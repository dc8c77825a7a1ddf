"""Finite-dimensional quantum states, effects, POVMs, and minimal-back-action
instruments, plus the probability rules for one probe followed by one target
measurement.

All operators are dense complex numpy arrays.  Validation happens once, at
construction of the wrapper types, so the probability operations stay cheap
inside scan loops.  Every type is immutable after construction (matrices are
stored as read-only copies) and every operation is a pure function.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidMeasurementError,
    InvalidStateError,
    NotHermitianError,
    NotPsdError,
)

# Shared absolute tolerance for Hermiticity, positivity, trace, POVM
# completeness, and probability normalization.  Double precision with
# dimensions <= 8 keeps eigendecomposition error orders of magnitude below.
ATOL = 1e-9

# Eigenvalues below this floor are treated as exact zeros when taking
# operator square roots.  Without the floor, a projector's zero eigenvalue
# computed as ~1e-16 would contribute sqrt(1e-16) = 1e-8 of noise to the
# Kraus operators, which the 1e-9 contracts elsewhere cannot absorb.
SQRT_FLOOR = 1e-12


def _as_square(matrix, what: str = "matrix") -> np.ndarray:
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"{what} must be square, got shape {m.shape}")
    return m


def _require_hermitian(m: np.ndarray, what: str = "matrix") -> None:
    if np.abs(m - m.conj().T).max() > ATOL:
        raise NotHermitianError(f"{what} is not Hermitian within {ATOL}")


def _frozen(m: np.ndarray) -> np.ndarray:
    out = m.copy()
    out.flags.writeable = False
    return out


def psd_sqrt(matrix) -> np.ndarray:
    """Hermitian square root of a positive-semidefinite matrix.

    Computed by eigendecomposition: eigenvalues in [-ATOL, SQRT_FLOOR) are
    clamped to zero before the square root, anything below -ATOL raises
    NotPsdError.  The result r is Hermitian PSD with r @ r equal to the
    input within ATOL.
    """
    m = _as_square(matrix)
    _require_hermitian(m)
    w, v = np.linalg.eigh(m)
    if w[0] < -ATOL:
        raise NotPsdError(f"eigenvalue {w[0]:.3e} below -{ATOL:g}")
    w = np.where(w < SQRT_FLOOR, 0.0, w)
    r = (v * np.sqrt(w)) @ v.conj().T
    return (r + r.conj().T) / 2


class DensityMatrix:
    """Hermitian, positive-semidefinite, unit-trace operator."""

    __slots__ = ("matrix",)

    def __init__(self, matrix):
        m = _as_square(matrix, "density matrix")
        _require_hermitian(m, "density matrix")
        w = np.linalg.eigvalsh(m)
        if w[0] < -ATOL:
            raise NotPsdError(f"density matrix eigenvalue {w[0]:.3e} below -{ATOL:g}")
        tr = m.trace().real
        if abs(tr - 1.0) > ATOL:
            raise InvalidStateError(f"trace {tr!r} differs from 1 beyond {ATOL:g}")
        self.matrix = _frozen(m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_ket(cls, ket) -> "DensityMatrix":
        """Pure state |k><k| from an (automatically normalized) ket."""
        k = np.asarray(ket, dtype=complex).ravel()
        norm = np.linalg.norm(k)
        if norm == 0:
            raise InvalidStateError("zero ket")
        k = k / norm
        return cls(np.outer(k, k.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim, dtype=complex) / dim)

    def __repr__(self) -> str:
        return f"DensityMatrix(dim={self.dim})"


class Effect:
    """POVM element: Hermitian with spectrum inside [0, 1] (within ATOL)."""

    __slots__ = ("matrix",)

    def __init__(self, matrix):
        m = _as_square(matrix, "effect")
        _require_hermitian(m, "effect")
        w = np.linalg.eigvalsh(m)
        if w[0] < -ATOL:
            raise NotPsdError(f"effect eigenvalue {w[0]:.3e} below -{ATOL:g}")
        if w[-1] > 1.0 + ATOL:
            raise InvalidMeasurementError(
                f"effect eigenvalue {w[-1]!r} exceeds 1 beyond {ATOL:g}"
            )
        self.matrix = _frozen(m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __repr__(self) -> str:
        return f"Effect(dim={self.dim})"


class Povm:
    """Ordered collection of effects summing to the identity.

    ``outcome_labels`` are the real values attached to the outcomes (the
    eigenvalue bookkeeping for the observable ``sum(label * effect)``).
    Two-outcome POVMs default to labels (+1, -1) in effect order.
    """

    __slots__ = ("effects", "labels")

    def __init__(self, effects, outcome_labels=None):
        eff = tuple(e if isinstance(e, Effect) else Effect(e) for e in effects)
        if len(eff) < 2:
            raise InvalidMeasurementError("a POVM needs at least two effects")
        dim = eff[0].dim
        if any(e.dim != dim for e in eff):
            raise DimensionMismatchError("effects have mixed dimensions")
        if outcome_labels is None:
            if len(eff) != 2:
                raise InvalidMeasurementError(
                    "outcome labels are required for more than two outcomes"
                )
            outcome_labels = (1.0, -1.0)
        labels = tuple(float(x) for x in outcome_labels)
        if len(labels) != len(eff):
            raise InvalidMeasurementError("one label per effect is required")
        total = sum(e.matrix for e in eff)
        if np.abs(total - np.eye(dim)).max() > ATOL:
            raise InvalidMeasurementError(
                f"effects do not sum to the identity within {ATOL:g}"
            )
        self.effects = eff
        self.labels = labels

    @property
    def dim(self) -> int:
        return self.effects[0].dim

    @property
    def n_outcomes(self) -> int:
        return len(self.effects)

    def observable(self) -> np.ndarray:
        """Hermitian observable sum_a label_a * E_a."""
        return sum(l * e.matrix for l, e in zip(self.labels, self.effects))

    def __repr__(self) -> str:
        return f"Povm(dim={self.dim}, outcomes={self.labels})"


class LuedersInstrument:
    """Measurement instrument with the square-root (minimal back-action)
    state update K_a = E_a^(1/2).

    The Kraus operators are Hermitian PSD by construction; arbitrary
    unitary-rotated Kraus choices are deliberately out of scope.
    """

    __slots__ = ("povm", "kraus")

    def __init__(self, povm: Povm):
        self.povm = povm
        self.kraus = tuple(_frozen(psd_sqrt(e.matrix)) for e in povm.effects)

    @property
    def dim(self) -> int:
        return self.povm.dim

    @property
    def n_outcomes(self) -> int:
        return self.povm.n_outcomes

    def __repr__(self) -> str:
        return f"LuedersInstrument({self.povm!r})"


def _check_dims(a_dim: int, b_dim: int) -> None:
    if a_dim != b_dim:
        raise DimensionMismatchError(f"dimension mismatch: {a_dim} vs {b_dim}")


def apply_instrument(
    inst: LuedersInstrument, rho: DensityMatrix, outcome: int
) -> tuple[np.ndarray, float]:
    """Post-measurement update for one outcome.

    Returns the subnormalized output ``K rho K`` (trace equals the outcome
    probability) together with that probability.
    """
    _check_dims(inst.dim, rho.dim)
    k = inst.kraus[outcome]
    out = k @ rho.matrix @ k
    return out, float(out.trace().real)


def unregistered_channel(inst: LuedersInstrument, rho: DensityMatrix) -> DensityMatrix:
    """State after the measurement is performed but its outcome discarded:
    sum_a K_a rho K_a.  Trace preserving."""
    _check_dims(inst.dim, rho.dim)
    out = np.zeros_like(rho.matrix)
    for k in inst.kraus:
        out = out + k @ rho.matrix @ k
    return DensityMatrix(out)


def joint_probabilities(
    inst_a: LuedersInstrument, povm_b: Povm, rho: DensityMatrix
) -> np.ndarray:
    """Probability table p[a, b] for probe outcome a followed by target
    outcome b: tr(K_a rho K_a E_b).

    Rows marginalize to the probe-alone distribution tr(rho E_a) (the
    later measurement cannot influence the earlier one), and the whole
    table sums to one.
    """
    _check_dims(inst_a.dim, rho.dim)
    _check_dims(inst_a.dim, povm_b.dim)
    table = np.empty((inst_a.n_outcomes, povm_b.n_outcomes))
    for i, k in enumerate(inst_a.kraus):
        post = k @ rho.matrix @ k
        for j, e in enumerate(povm_b.effects):
            table[i, j] = np.trace(post @ e.matrix).real
    return table


def dual_channel(inst_a: LuedersInstrument, op) -> np.ndarray:
    """Heisenberg-picture action of the unregistered measurement on an
    operator: sum_a E_a^(1/2) op E_a^(1/2).  Unital."""
    m = _as_square(op, "operator")
    _check_dims(inst_a.dim, m.shape[0])
    out = np.zeros_like(m)
    for k in inst_a.kraus:
        out = out + k @ m @ k
    return out
