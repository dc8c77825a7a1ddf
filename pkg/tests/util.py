"""Shared generators and independent oracles for the test suite."""

import numpy as np

from cdtradeoff.calibration import CdPoint, CdScan
from cdtradeoff.cd_measures import cd_from_scenario
from cdtradeoff.quantum_core import DensityMatrix, LuedersInstrument, Povm
from cdtradeoff.qubit_model import QubitMeasurement, optimal_state, plane_axis
from cdtradeoff.shot_sampler import estimate_cd, sample


def random_unitary(rng, dim):
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_pure(rng, dim) -> DensityMatrix:
    ket = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return DensityMatrix.from_ket(ket)


def random_two_outcome_povm(rng, dim) -> Povm:
    """Random dichotomic POVM with labels (+1, -1)."""
    u = random_unitary(rng, dim)
    e_plus = (u * rng.uniform(0.0, 1.0, size=dim)) @ u.conj().T
    e_plus = (e_plus + e_plus.conj().T) / 2
    return Povm([e_plus, np.eye(dim) - e_plus], (1.0, -1.0))


def random_povm(rng, dim, n_outcomes) -> Povm:
    """Random n-outcome POVM by whitening random PSD operators."""
    gs = []
    for _ in range(n_outcomes):
        a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        gs.append(a @ a.conj().T)
    total = sum(gs)
    w, v = np.linalg.eigh(total)
    whiten = (v / np.sqrt(w)) @ v.conj().T
    effects = [whiten @ g @ whiten.conj().T for g in gs]
    return Povm(effects, tuple(float(k) for k in range(n_outcomes)))


def random_axis(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def random_qubit_measurement(rng, min_strength=0.05, max_bias=0.6) -> QubitMeasurement:
    bias = rng.uniform(-max_bias, max_bias)
    strength = rng.uniform(min_strength, 1.0 - abs(bias))
    return QubitMeasurement(bias, strength * random_axis(rng))


def random_rotation(rng):
    """Haar-ish random proper rotation of Bloch space."""
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def loop_matmul(a, b):
    """Plain-Python matrix product, independent of the library code path."""
    n = a.shape[0]
    out = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            acc = 0.0 + 0.0j
            for k in range(n):
                acc += a[i, k] * b[k, j]
            out[i, j] = acc
    return out


def loop_trace(a) -> complex:
    return sum(a[i, i] for i in range(a.shape[0]))


def oracle_joint_table(kraus, rho, effects):
    """Brute-force joint probabilities tr(K rho Kdag E) via explicit loops."""
    table = np.empty((len(kraus), len(effects)))
    for i, k in enumerate(kraus):
        post = loop_matmul(loop_matmul(k, rho), k.conj().T)
        for j, e in enumerate(effects):
            table[i, j] = loop_trace(loop_matmul(post, e)).real
    return table


def scenario(rho: DensityMatrix, probe: QubitMeasurement, target: QubitMeasurement):
    return rho, LuedersInstrument(probe.to_povm()), target.to_povm()


def forward_scan(
    probe: QubitMeasurement,
    target_strength,
    target_bias,
    thetas,
    shots=None,
    seed=0,
    rotation=None,
) -> CdScan:
    """Scan points from the full pipeline on the optimal state, exact or
    finite-shot; an optional common rotation is applied to all axes."""
    points = []
    for i, theta in enumerate(thetas):
        axis_a = probe.axis
        axis_b = plane_axis(theta)
        if rotation is not None:
            axis_a, axis_b = rotation @ axis_a, rotation @ axis_b
        probe_i = QubitMeasurement(probe.bias, probe.strength * axis_a)
        target = QubitMeasurement(target_bias, target_strength * axis_b)
        args = scenario(optimal_state(probe_i, target), probe_i, target)
        if shots is None:
            value = cd_from_scenario(*args)
            points.append(CdPoint(float(theta), value.correlation, value.disturbance))
        else:
            est = estimate_cd(sample(*args, shots, shots, seed ^ i))
            points.append(
                CdPoint(float(theta), est.c_hat, est.d_hat, est.c_err, est.d_err)
            )
    return CdScan(tuple(points))
