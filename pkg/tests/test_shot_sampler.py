import numpy as np
import pytest
from numpy.testing import assert_allclose

from cdtradeoff.cd_measures import cd_from_scenario
from cdtradeoff.errors import (
    EmptyRecordError,
    InvalidShotsError,
    LabelMismatchError,
    NonQubitError,
)
from cdtradeoff.quantum_core import DensityMatrix, LuedersInstrument
from cdtradeoff.qubit_model import (
    QubitMeasurement,
    ellipse_character,
    optimal_state,
    plane_axis,
    state_from_bloch,
)
from cdtradeoff.shot_sampler import (
    InstrumentPolicy,
    ShotRecord,
    estimate_cd,
    policy_cd,
    policy_update,
    sample,
    sample_distributions,
)

from util import scenario


def sharp(theta):
    return QubitMeasurement(0.0, plane_axis(theta))


def sharp_scenario(theta_a, theta_b, gamma_b=1.0):
    probe = sharp(theta_a)
    target = QubitMeasurement(0.0, gamma_b * plane_axis(theta_b))
    return scenario(optimal_state(probe, target), probe, target)


class TestSample:
    def test_deterministic_given_seed(self):
        args = sharp_scenario(0.0, np.pi / 3)
        rec1 = sample(*args, 5000, 5000, seed=42)
        rec2 = sample(*args, 5000, 5000, seed=42)
        assert np.array_equal(rec1.joint_counts, rec2.joint_counts)
        assert np.array_equal(rec1.alone_counts, rec2.alone_counts)
        rec3 = sample(*args, 5000, 5000, seed=43)
        assert not np.array_equal(rec1.joint_counts, rec3.joint_counts)

    def test_certain_outcome(self):
        z = QubitMeasurement(0.0, np.array([0.0, 0.0, 1.0]))
        rec = sample(
            *scenario(DensityMatrix.from_ket([1.0, 0.0]), z, z), 1000, 1000, seed=0
        )
        assert rec.joint_counts[0, 0] == 1000
        assert rec.alone_counts[0] == 1000

    def test_uniform_joint_within_multinomial_bounds(self):
        args = sharp_scenario(0.0, np.pi / 2)  # all four cells are 1/4
        rec = sample(*args, 1_000_000, 1_000_000, seed=11)
        sigma = np.sqrt(1_000_000 * 0.25 * 0.75)
        assert np.abs(rec.joint_counts - 250_000).max() <= 5 * sigma

    def test_invalid_shots(self):
        with pytest.raises(InvalidShotsError):
            sample(*sharp_scenario(0.0, 1.0), 0, 100, seed=1)

    def test_label_order_must_match(self):
        probe = sharp(0.0)
        flipped = QubitMeasurement(0.0, plane_axis(1.0)).to_povm()
        flipped = type(flipped)(
            [flipped.effects[1], flipped.effects[0]], (-1.0, 1.0)
        )
        with pytest.raises(LabelMismatchError):
            sample(
                state_from_bloch([0.0, 0.0, 1.0]),
                LuedersInstrument(probe.to_povm()),
                flipped,
                100,
                100,
                seed=1,
            )


class TestEstimateCd:
    def test_perfect_correlation_counts(self):
        rec = ShotRecord(
            np.array([[500, 0], [0, 500]]), np.array([500, 500]), 1000, 1000, 0
        )
        est = estimate_cd(rec)
        assert est.c_hat == pytest.approx(1.0)
        assert est.d_hat == pytest.approx(0.0)

    def test_uniform_counts_maximal_disturbance(self):
        rec = ShotRecord(
            np.array([[250, 250], [250, 250]]), np.array([1000, 0]), 1000, 1000, 0
        )
        est = estimate_cd(rec)
        assert est.c_hat == pytest.approx(0.0)
        assert est.d_hat == pytest.approx(1.0)

    def test_million_shot_sharp_pair(self):
        args = sharp_scenario(0.0, np.pi / 3)
        exact = cd_from_scenario(*args)
        est = estimate_cd(sample(*args, 1_000_000, 1_000_000, seed=3))
        assert abs(est.c_hat - exact.correlation) <= 5 * est.c_err
        assert abs(est.d_hat - exact.disturbance) <= 5 * est.d_err

    def test_errors_shrink_like_root_n(self):
        args = sharp_scenario(0.0, np.pi / 3)
        small = estimate_cd(sample(*args, 10_000, 10_000, seed=5))
        large = estimate_cd(sample(*args, 1_000_000, 1_000_000, seed=5))
        assert small.c_err / large.c_err == pytest.approx(10.0, rel=0.2)
        assert small.d_err / large.d_err == pytest.approx(10.0, rel=0.2)

    def test_empty_record(self):
        with pytest.raises(InvalidShotsError):
            ShotRecord(np.zeros((2, 2), int), np.zeros(2, int), 100, 100, 0)
        rec = ShotRecord(np.zeros((2, 2), int), np.zeros(2, int), 0, 0, 0)
        with pytest.raises(EmptyRecordError):
            estimate_cd(rec)

    def test_consistency_over_repetitions(self):
        args = sharp_scenario(0.0, 1.0, gamma_b=0.7)
        exact = cd_from_scenario(*args)
        hits = 0
        for rep in range(100):
            est = estimate_cd(sample(*args, 1_000_000, 1_000_000, seed=1000 + rep))
            if (
                abs(est.c_hat - exact.correlation) <= 5 * est.c_err
                and abs(est.d_hat - exact.disturbance) <= 5 * est.d_err
            ):
                hits += 1
        assert hits >= 99

    def test_sample_distributions_entry_point(self):
        rec = sample_distributions(
            np.array([[0.5, 0.0], [0.0, 0.5]]), np.array([0.5, 0.5]), 10_000, 10_000, 7
        )
        assert rec.joint_counts[0, 1] == 0
        assert rec.joint_counts.sum() == 10_000


class TestPolicies:
    def test_lueders_sharp_probe_reprepares_eigenstate(self):
        probe = sharp(0.0)
        rho = state_from_bloch([0.0, 0.0, 1.0])
        for outcome in (0, 1):
            lueders = policy_update(InstrumentPolicy.LUEDERS, probe, rho, outcome)
            eigen = policy_update(InstrumentPolicy.EIGENSTATE, probe, rho, outcome)
            assert_allclose(lueders.matrix, eigen.matrix, atol=1e-12)

    def test_mixed_policy_bloch_vector(self):
        probe = QubitMeasurement(0.0, np.array([0.5, 0.0, 0.0]))
        rho = state_from_bloch([0.0, 0.0, 1.0])
        out = policy_update(InstrumentPolicy.MIXED, probe, rho, 0)
        assert_allclose(out.matrix, (np.eye(2) + 0.5 * np.array([[0, 1], [1, 0]])) / 2,
                        atol=1e-12)
        out_minus = policy_update(InstrumentPolicy.MIXED, probe, rho, 1)
        x = np.trace(out_minus.matrix @ np.array([[0, 1], [1, 0]])).real
        assert x == pytest.approx(-0.5, abs=1e-12)

    def test_non_qubit_rejected(self):
        probe = sharp(0.0)
        with pytest.raises(NonQubitError):
            policy_update(
                InstrumentPolicy.EIGENSTATE, probe, DensityMatrix.maximally_mixed(3), 0
            )

    def test_lueders_policy_matches_plain_scenario(self):
        args = sharp_scenario(0.3, 1.2, gamma_b=0.6)
        exact = cd_from_scenario(*args)
        via_policy = policy_cd(*args, InstrumentPolicy.LUEDERS)
        assert via_policy.correlation == pytest.approx(exact.correlation, abs=1e-12)
        assert via_policy.disturbance == pytest.approx(exact.disturbance, abs=1e-12)

    def test_lueders_disturbs_less_than_eigenstate_repreparation(self):
        target = sharp(np.pi / 2)
        for gamma in (0.25, 0.5, 0.75):
            probe = QubitMeasurement(0.0, np.array([gamma, 0.0, 0.0]))
            args = scenario(optimal_state(probe, target), probe, target)
            d_lueders = policy_cd(*args, InstrumentPolicy.LUEDERS).disturbance
            d_eigen = policy_cd(*args, InstrumentPolicy.EIGENSTATE).disturbance
            squeeze = ellipse_character(probe).squeeze
            assert d_lueders == pytest.approx(squeeze, abs=1e-9)
            assert d_lueders < d_eigen

    def test_lueders_half_strength_quadrature_value(self):
        probe = QubitMeasurement(0.0, np.array([0.5, 0.0, 0.0]))
        target = sharp(np.pi / 2)
        args = scenario(optimal_state(probe, target), probe, target)
        d = policy_cd(*args, InstrumentPolicy.LUEDERS).disturbance
        assert d == pytest.approx(1.0 - np.sqrt(0.75), abs=1e-9)

    def test_policy_sampling_deterministic(self):
        probe = QubitMeasurement(0.0, np.array([0.5, 0.0, 0.0]))
        target = sharp(np.pi / 2)
        args = scenario(optimal_state(probe, target), probe, target)
        rec1 = sample(*args, 2000, 2000, seed=9, policy=InstrumentPolicy.MIXED)
        rec2 = sample(*args, 2000, 2000, seed=9, policy=InstrumentPolicy.MIXED)
        assert np.array_equal(rec1.joint_counts, rec2.joint_counts)
