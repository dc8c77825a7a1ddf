import numpy as np
import pytest
from numpy.testing import assert_allclose

from cdtradeoff.errors import (
    DimensionMismatchError,
    InvalidMeasurementError,
    InvalidStateError,
    NotHermitianError,
    NotPsdError,
)
from cdtradeoff.quantum_core import (
    DensityMatrix,
    Effect,
    LuedersInstrument,
    Povm,
    apply_instrument,
    dual_channel,
    joint_probabilities,
    psd_sqrt,
    unregistered_channel,
)
from cdtradeoff.qubit_model import ID2, SIGMA_X, SIGMA_Z, QubitMeasurement

from util import oracle_joint_table, random_povm, random_pure, random_unitary

KET0 = np.array([1.0, 0.0])
KET_PLUS = np.array([1.0, 1.0]) / np.sqrt(2)


def x_povm(gamma):
    return QubitMeasurement(0.0, np.array([gamma, 0.0, 0.0])).to_povm()


class TestPsdSqrt:
    def test_identity(self):
        assert_allclose(psd_sqrt(np.eye(2)), np.eye(2), atol=1e-14)

    def test_diagonal(self):
        assert_allclose(psd_sqrt(np.diag([0.25, 1.0])), np.diag([0.5, 1.0]), atol=1e-14)

    def test_effect_square_roundtrip(self):
        # unsharp x effect: the square of the root must reproduce it
        e_plus = (ID2 + 0.5 * SIGMA_X) / 2
        root = psd_sqrt(e_plus)
        assert np.abs(root @ root - e_plus).max() <= 1e-10

    def test_projector_has_exact_root(self):
        # zero eigenvalues must not leak sqrt(eps) noise into the root
        proj = np.outer(KET_PLUS, KET_PLUS)
        assert np.abs(psd_sqrt(proj) @ psd_sqrt(proj) - proj).max() <= 1e-12

    def test_not_hermitian(self):
        with pytest.raises(NotHermitianError):
            psd_sqrt(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_not_psd(self):
        with pytest.raises(NotPsdError):
            psd_sqrt(np.diag([-1e-6, 1.0]))

    def test_negative_within_tolerance_clamped(self):
        root = psd_sqrt(np.diag([-5e-10, 1.0]))
        assert_allclose(root, np.diag([0.0, 1.0]), atol=1e-12)

    def test_random_psd_square_property(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            dim = int(rng.integers(2, 7))
            u = random_unitary(rng, dim)
            m = (u * rng.uniform(0.0, 2.0, size=dim)) @ u.conj().T
            m = (m + m.conj().T) / 2
            root = psd_sqrt(m)
            assert np.abs(root @ root - m).max() <= 1e-9


class TestTypes:
    def test_density_matrix_requires_unit_trace(self):
        with pytest.raises(InvalidStateError):
            DensityMatrix(np.eye(2))

    def test_density_matrix_requires_psd(self):
        with pytest.raises(NotPsdError):
            DensityMatrix(np.diag([1.5, -0.5]))

    def test_density_matrix_requires_hermitian(self):
        m = np.array([[0.5, 0.5], [0.0, 0.5]])
        with pytest.raises(NotHermitianError):
            DensityMatrix(m)

    def test_density_matrix_frozen(self):
        rho = DensityMatrix.maximally_mixed(2)
        with pytest.raises(ValueError):
            rho.matrix[0, 0] = 2.0

    def test_effect_spectrum_bound(self):
        with pytest.raises(InvalidMeasurementError):
            Effect(np.diag([1.2, 0.0]))

    def test_povm_completeness(self):
        with pytest.raises(InvalidMeasurementError):
            Povm([np.eye(2) / 2, np.eye(2) / 4])

    def test_povm_default_labels(self):
        povm = x_povm(1.0)
        assert povm.labels == (1.0, -1.0)
        assert_allclose(povm.observable(), SIGMA_X, atol=1e-15)

    def test_povm_needs_labels_beyond_two_outcomes(self):
        thirds = [np.eye(2) / 3] * 3
        with pytest.raises(InvalidMeasurementError):
            Povm(thirds)
        assert Povm(thirds, (0.0, 1.0, 2.0)).n_outcomes == 3

    def test_instrument_kraus_reproduce_effects(self):
        inst = LuedersInstrument(x_povm(0.7))
        for k, e in zip(inst.kraus, inst.povm.effects):
            assert np.abs(k.conj().T @ k - e.matrix).max() <= 1e-9
            assert np.abs(k - k.conj().T).max() <= 1e-12  # Hermitian choice


class TestApplyInstrument:
    def test_sharp_z_on_zero(self):
        inst = LuedersInstrument(
            QubitMeasurement(0.0, np.array([0.0, 0.0, 1.0])).to_povm()
        )
        out, prob = apply_instrument(inst, DensityMatrix.from_ket(KET0), 0)
        assert prob == pytest.approx(1.0, abs=1e-12)
        assert_allclose(out, np.outer(KET0, KET0), atol=1e-12)

    def test_sharp_x_on_zero(self):
        inst = LuedersInstrument(x_povm(1.0))
        out, prob = apply_instrument(inst, DensityMatrix.from_ket(KET0), 0)
        assert prob == pytest.approx(0.5, abs=1e-12)
        assert_allclose(out, 0.5 * np.outer(KET_PLUS, KET_PLUS), atol=1e-12)

    def test_unsharp_x_against_closed_form(self):
        # closed-form root in the x eigenbasis: K = sqrt(3)/2 |+x><+x| + 1/2 |-x><-x|
        inst = LuedersInstrument(x_povm(0.5))
        rho = DensityMatrix.from_ket(KET0)
        out, prob = apply_instrument(inst, rho, 0)
        minus = np.array([1.0, -1.0]) / np.sqrt(2)
        k_oracle = (np.sqrt(0.75) * np.outer(KET_PLUS, KET_PLUS)
                    + np.sqrt(0.25) * np.outer(minus, minus))
        expected = k_oracle @ rho.matrix @ k_oracle
        assert prob == pytest.approx(0.5, abs=1e-12)
        assert_allclose(out, expected, atol=1e-12)

    def test_dimension_mismatch(self):
        inst = LuedersInstrument(x_povm(1.0))
        with pytest.raises(DimensionMismatchError):
            apply_instrument(inst, DensityMatrix.maximally_mixed(3), 0)


class TestUnregisteredChannel:
    def test_sharp_z_fixed_point(self):
        inst = LuedersInstrument(
            QubitMeasurement(0.0, np.array([0.0, 0.0, 1.0])).to_povm()
        )
        rho = DensityMatrix.maximally_mixed(2)
        assert_allclose(unregistered_channel(inst, rho).matrix, rho.matrix, atol=1e-12)

    def test_sharp_x_dephases_zero_ket(self):
        inst = LuedersInstrument(x_povm(1.0))
        out = unregistered_channel(inst, DensityMatrix.from_ket(KET0))
        assert_allclose(out.matrix, np.eye(2) / 2, atol=1e-12)

    def test_unsharp_x_shrinks_transverse_bloch(self):
        # z component survives with factor sqrt(1 - gamma^2)
        inst = LuedersInstrument(x_povm(0.5))
        out = unregistered_channel(inst, DensityMatrix.from_ket(KET0))
        z = np.trace(out.matrix @ SIGMA_Z).real
        assert z == pytest.approx(np.sqrt(0.75), abs=1e-12)
        x = np.trace(out.matrix @ SIGMA_X).real
        assert x == pytest.approx(0.0, abs=1e-12)

    def test_preserves_trace_and_psd(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            dim = int(rng.integers(2, 5))
            inst = LuedersInstrument(random_povm(rng, dim, int(rng.integers(2, 4))))
            out = unregistered_channel(inst, random_pure(rng, dim))
            # DensityMatrix construction re-validates trace and positivity
            assert out.dim == dim


class TestJointProbabilities:
    def test_repeated_sharp_z(self):
        meas = QubitMeasurement(0.0, np.array([0.0, 0.0, 1.0]))
        table = joint_probabilities(
            LuedersInstrument(meas.to_povm()), meas.to_povm(), DensityMatrix.from_ket(KET0)
        )
        assert_allclose(table, [[1.0, 0.0], [0.0, 0.0]], atol=1e-12)

    def test_mutually_unbiased_pair(self):
        z = QubitMeasurement(0.0, np.array([0.0, 0.0, 1.0]))
        table = joint_probabilities(
            LuedersInstrument(x_povm(1.0)), z.to_povm(), DensityMatrix.from_ket(KET0)
        )
        assert_allclose(table, np.full((2, 2), 0.25), atol=1e-12)

    def test_tilted_pair_against_loop_oracle(self):
        theta = np.pi / 4
        target = QubitMeasurement(0.0, np.array([np.sin(theta), 0.0, np.cos(theta)]))
        inst = LuedersInstrument(x_povm(1.0))
        rho = DensityMatrix.from_ket(KET0)
        table = joint_probabilities(inst, target.to_povm(), rho)
        oracle = oracle_joint_table(
            inst.kraus, rho.matrix, [e.matrix for e in target.to_povm().effects]
        )
        assert_allclose(table, oracle, atol=1e-12)

    def test_normalization_and_arrow_of_time(self):
        rng = np.random.default_rng(23)
        for _ in range(1000):
            dim = int(rng.integers(2, 5))
            povm_a = random_povm(rng, dim, int(rng.integers(2, 4)))
            povm_b = random_povm(rng, dim, int(rng.integers(2, 4)))
            rho = random_pure(rng, dim)
            table = joint_probabilities(LuedersInstrument(povm_a), povm_b, rho)
            assert abs(table.sum() - 1.0) <= 1e-9
            marginal = table.sum(axis=1)
            direct = [np.trace(rho.matrix @ e.matrix).real for e in povm_a.effects]
            assert np.abs(marginal - direct).max() <= 1e-9


class TestDualChannel:
    def test_unital(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            dim = int(rng.integers(2, 5))
            inst = LuedersInstrument(random_povm(rng, dim, int(rng.integers(2, 4))))
            assert np.abs(dual_channel(inst, np.eye(dim)) - np.eye(dim)).max() <= 1e-9

    def test_sharp_x_erases_z(self):
        inst = LuedersInstrument(x_povm(1.0))
        assert np.abs(dual_channel(inst, SIGMA_Z)).max() <= 1e-12

    def test_unsharp_x_shrinks_z(self):
        inst = LuedersInstrument(x_povm(0.5))
        assert_allclose(dual_channel(inst, SIGMA_Z), np.sqrt(0.75) * SIGMA_Z, atol=1e-12)

    def test_dimension_mismatch(self):
        inst = LuedersInstrument(x_povm(1.0))
        with pytest.raises(DimensionMismatchError):
            dual_channel(inst, np.eye(3))
