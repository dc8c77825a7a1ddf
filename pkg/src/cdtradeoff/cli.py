"""Command-line interface: JSON scenario configs in, CSV scan data and JSON
calibration reports out.

Modes
-----
scan            theta scan of a probe/target pair (exact or finite shots)
search-optimal  scan the initial-state angle phi at fixed measurements
calibrate       fit a previously written scan file
detector        simulate and/or invert the on-off detector protocol
highdim         overlap scan of the d-dimensional circle law

All angles are radians.  CSV columns are theta,c,d,c_err,d_err,c2d2 with 9
significant digits; every scan CSV gets a JSON sidecar carrying the full
config, its SHA-256 hash, and the library version, so outputs are
byte-reproducible from config + seed alone.  Shot-mode scan point ``i``
draws from a Philox stream keyed by ``seed XOR i``.

Exit codes: 0 success, 2 config error, 3 physics/feasibility error,
4 fit failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys

import numpy as np

from . import __version__
from .calibration import (
    CdScan,
    estimate_detector,
    fit_circle_sharp_probe,
    fit_ellipse_known_theta,
    fit_ellipse_unknown_theta,
)
from .detector_model import DetectorNoise, scenario_cd, scenario_distributions
from .errors import (
    CdTradeoffError,
    ConfigError,
    FitError,
    OutOfDomainError,
    SchemaError,
)
from .highdim_model import RandomizedDichotomic, cd_highdim, overlap
from .qubit_model import QubitMeasurement, optimal_state, plane_axis, state_from_bloch
from .quantum_core import DensityMatrix, LuedersInstrument
from .shot_sampler import InstrumentPolicy, estimate_cd, sample, sample_distributions

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PHYSICS = 3
EXIT_FIT = 4

CSV_HEADER = "theta,c,d,c_err,d_err,c2d2"
SCHEMA_VERSION = 1

MODES = ("scan", "search-optimal", "calibrate", "detector", "highdim")

_TOP_KEYS = {
    "schema", "mode", "seed", "shots", "policy", "probe", "target", "state",
    "phi_grid", "scan_file", "fit", "target_strength", "bootstrap",
    "detector", "dim", "gamma", "c2", "c2_grid",
}


def _fmt(x: float) -> str:
    """9 significant digits, '.' decimal separator, no negative zero."""
    v = float(x)
    if v == 0.0:
        v = 0.0
    return f"{v:.9g}"


def _canonical(config: dict) -> str:
    return json.dumps(config, sort_keys=True, separators=(",", ":"))


def _config_hash(config: dict) -> str:
    return hashlib.sha256(_canonical(config).encode()).hexdigest()


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise SchemaError(message)


def load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            config = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    _require(isinstance(config, dict), "config must be a JSON object")
    unknown = set(config) - _TOP_KEYS
    _require(not unknown, f"unknown config keys: {sorted(unknown)}")
    _require(config.get("schema") == SCHEMA_VERSION,
             f"config schema must be {SCHEMA_VERSION}")
    _require(config.get("mode") in MODES, f"mode must be one of {MODES}")
    return config


def _grid(spec: dict, what: str) -> np.ndarray:
    _require(isinstance(spec, dict) and set(spec) <= {"start", "stop", "points"},
             f"{what} must carry start/stop/points")
    points = spec.get("points")
    _require(isinstance(points, int) and points >= 1, f"{what}.points must be >= 1")
    start = float(spec.get("start", 0.0))
    stop = float(spec.get("stop", 2 * math.pi))
    return np.linspace(start, stop, points, endpoint=False) if points > 1 else np.array([start])


def _measurement(spec: dict, what: str) -> QubitMeasurement:
    _require(isinstance(spec, dict), f"{what} must be an object")
    _require(set(spec) <= {"bias", "gamma", "theta", "bloch"},
             f"{what} keys must be bias/gamma/theta or bias/bloch")
    bias = float(spec.get("bias", 0.0))
    if "bloch" in spec:
        bloch = np.asarray(spec["bloch"], dtype=float)
        _require(bloch.shape == (3,), f"{what}.bloch must have 3 components")
        return QubitMeasurement(bias, bloch)
    gamma = float(spec.get("gamma", 1.0))
    theta = float(spec.get("theta", 0.0))
    return QubitMeasurement(bias, gamma * plane_axis(theta))


def _state(spec, probe: QubitMeasurement, target: QubitMeasurement) -> DensityMatrix:
    if spec == "optimal" or spec is None:
        return optimal_state(probe, target)
    _require(isinstance(spec, dict) and set(spec) == {"bloch"},
             "state must be \"optimal\" or {\"bloch\": [x,y,z]}")
    return state_from_bloch(np.asarray(spec["bloch"], dtype=float))


def _shots(config: dict) -> int | None:
    shots = config.get("shots", "exact")
    if shots == "exact":
        return None
    _require(isinstance(shots, int) and shots > 0, "shots must be a positive integer or \"exact\"")
    return shots


def _policy(config: dict) -> InstrumentPolicy:
    name = config.get("policy", "lueders")
    try:
        return InstrumentPolicy(name)
    except ValueError as exc:
        raise SchemaError(f"unknown policy {name!r}") from exc


def _scan_rows(config: dict, seed: int):
    """Rows (theta, c, d, c_err, d_err) for scan and search-optimal modes."""
    from .shot_sampler import policy_cd

    mode = config["mode"]
    shots = _shots(config)
    policy = _policy(config)
    # search-optimal defaults reproduce the optimal-state search setting:
    # probe axis at pi/4 in the x-z plane, target along x
    default_theta = 0.0 if mode == "scan" else math.pi / 4
    probe = _measurement(config.get("probe", {"gamma": 1.0, "theta": default_theta}), "probe")
    inst = probe.to_instrument()
    rows = []
    if mode == "scan":
        target_spec = dict(config.get("target", {}))
        _require("theta_grid" in target_spec or "theta" in target_spec,
                 "target needs theta or theta_grid")
        if "theta_grid" in target_spec:
            grid = _grid(target_spec.pop("theta_grid"), "target.theta_grid")
        else:
            grid = np.array([float(target_spec.pop("theta"))])
        settings = []
        for theta in grid:
            target = _measurement({**target_spec, "theta": float(theta)}, "target")
            rho = _state(config.get("state"), probe, target)
            settings.append((float(theta), rho, target))
    else:
        target = _measurement(config.get("target", {"gamma": 1.0, "theta": 0.0}), "target")
        grid = _grid(config.get("phi_grid", {"points": 64}), "phi_grid")
        settings = []
        for phi in grid:
            rho = state_from_bloch([math.sin(phi), 0.0, math.cos(phi)])
            settings.append((float(phi), rho, target))
    for index, (angle, rho, target) in enumerate(settings):
        povm = target.to_povm()
        if shots is None:
            value = policy_cd(rho, inst, povm, policy)
            rows.append((angle, value.correlation, value.disturbance, 0.0, 0.0))
        else:
            rec = sample(rho, inst, povm, shots, shots, seed ^ index, policy)
            est = estimate_cd(rec)
            rows.append((angle, est.c_hat, est.d_hat, est.c_err, est.d_err))
    return rows


def _highdim_rows(config: dict, seed: int):
    dim = config.get("dim", 2)
    _require(isinstance(dim, int) and dim >= 2, "dim must be an integer >= 2")
    gamma = float(config.get("gamma", 1.0))
    if "c2_grid" in config:
        grid = _grid(config["c2_grid"], "c2_grid")
    else:
        grid = np.array([float(config.get("c2", 0.5))])
    _require(bool(np.all((grid >= 0) & (grid <= 1))), "c2 values must lie in [0, 1]")
    shots = _shots(config)
    rows = []
    for index, c2 in enumerate(grid):
        ket_a = np.zeros(dim)
        ket_a[0] = 1.0
        ket_b = np.zeros(dim)
        ket_b[0] = math.sqrt(c2)
        ket_b[1] = math.sqrt(1.0 - c2)
        pa = RandomizedDichotomic.from_ket(ket_a, 1.0)
        pb = RandomizedDichotomic.from_ket(ket_b, gamma)
        angle = math.acos(min(1.0, max(-1.0, 2.0 * float(c2) - 1.0)))
        if shots is None:
            value = cd_highdim(pa, pb)
            rows.append((angle, value.correlation, value.disturbance, 0.0, 0.0))
        else:
            rho = DensityMatrix.from_ket(overlap(pa, pb).psi_plus)
            inst = LuedersInstrument(pa.to_povm())
            rec = sample(rho, inst, pb.to_povm(), shots, shots, seed ^ index)
            est = estimate_cd(rec)
            rows.append((angle, est.c_hat, est.d_hat, est.c_err, est.d_err))
    return rows


def _write_scan(out_path: str, rows, config: dict) -> None:
    lines = [CSV_HEADER]
    for theta, c, d, c_err, d_err in rows:
        lines.append(",".join(_fmt(v) for v in (theta, c, d, c_err, d_err, c * c + d * d)))
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    sidecar = {
        "schema": SCHEMA_VERSION,
        "library_version": __version__,
        "config": config,
        "config_sha256": _config_hash(config),
        "csv_header": CSV_HEADER,
        "rows": len(rows),
    }
    _write_json(_sidecar_path(out_path), sidecar)


def _sidecar_path(csv_path: str) -> str:
    # distinct suffix so the sidecar can never clobber a config file that
    # shares the CSV's stem
    return (csv_path[:-4] if csv_path.endswith(".csv") else csv_path) + ".meta.json"


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def read_scan_csv(path: str) -> CdScan:
    """Parse a scan CSV back into a calibration scan."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = [line.strip() for line in fh if line.strip()]
    except OSError as exc:
        raise ConfigError(f"cannot read scan file: {exc}") from exc
    if not lines or lines[0] != CSV_HEADER:
        raise SchemaError(f"scan file must start with header {CSV_HEADER!r}")
    theta, c, d, c_err, d_err = [], [], [], [], []
    for line in lines[1:]:
        parts = line.split(",")
        if len(parts) != 6:
            raise SchemaError(f"malformed scan row: {line!r}")
        try:
            values = [float(p) for p in parts]
        except ValueError as exc:
            raise SchemaError(f"non-numeric scan row: {line!r}") from exc
        theta.append(values[0])
        c.append(values[1])
        d.append(values[2])
        c_err.append(values[3])
        d_err.append(values[4])
    return CdScan.from_arrays(theta, c, d, c_err, d_err)


def _cmd_calibrate(config: dict, seed: int, out_path: str) -> None:
    _require("scan_file" in config, "calibrate mode needs scan_file")
    fit_kind = config.get("fit", "circle")
    _require(fit_kind in ("circle", "ellipse-known-theta", "ellipse-unknown-theta"),
             "fit must be circle, ellipse-known-theta, or ellipse-unknown-theta")
    scan = read_scan_csv(config["scan_file"])
    n_boot = config.get("bootstrap", 200)
    _require(isinstance(n_boot, int) and n_boot >= 0, "bootstrap must be a nonnegative integer")
    report = {
        "schema": SCHEMA_VERSION,
        "library_version": __version__,
        "config": config,
        "config_sha256": _config_hash(config),
        "fit": fit_kind,
        "points": len(scan),
    }
    if fit_kind == "circle":
        result = fit_circle_sharp_probe(scan, n_boot, seed)
        report["result"] = {
            "target_strength": result.strength,
            "target_strength_err": result.strength_err,
            "residual": result.residual,
        }
    else:
        if fit_kind == "ellipse-known-theta":
            strength = config.get("target_strength")
            character = fit_ellipse_known_theta(
                scan, None if strength is None else float(strength), n_boot, seed
            )
        else:
            character = fit_ellipse_unknown_theta(scan, n_boot, seed)
        report["result"] = {
            "center_shift": character.center_shift,
            "target_strength_product": character.target_strength_product,
            "shear_strength": character.shear_strength,
            "squeeze_strength": character.squeeze_strength,
            "shear_ratio": character.shear_ratio,
            "identifiability": character.identifiability,
            "probe_sharpness": character.probe_sharpness,
            "probe_bias": character.probe_bias,
            "squeeze": character.squeeze,
            "shear": character.shear,
            "residual": character.residual,
            "errors": character.errors,
        }
    _write_json(out_path, report)


def _cmd_detector(config: dict, seed: int, out_path: str) -> None:
    spec = config.get("detector")
    _require(isinstance(spec, dict), "detector mode needs a detector object")
    report = {
        "schema": SCHEMA_VERSION,
        "library_version": __version__,
        "config": config,
        "config_sha256": _config_hash(config),
    }
    if {"eta", "nu"} <= set(spec):
        _require(set(spec) <= {"eta", "nu"}, "detector simulation takes only eta and nu")
        noise = DetectorNoise(float(spec["eta"]), float(spec["nu"]))
        shots = _shots(config)
        if shots is None:
            sharp = scenario_cd(noise, "sharp")
            biased = scenario_cd(noise, "fully_biased")
            d1, c2 = sharp.disturbance, biased.correlation
            d1_err = c2_err = 0.0
            readings = {
                "c1": sharp.correlation, "d1": d1,
                "c2": c2, "d2": biased.disturbance,
            }
        else:
            joint_s, alone_s = scenario_distributions(noise, "sharp")
            joint_b, alone_b = scenario_distributions(noise, "fully_biased")
            est_s = estimate_cd(sample_distributions(joint_s, alone_s, shots, shots, seed ^ 0))
            est_b = estimate_cd(sample_distributions(joint_b, alone_b, shots, shots, seed ^ 1))
            d1, d1_err = est_s.d_hat, est_s.d_err
            c2, c2_err = est_b.c_hat, est_b.c_err
            readings = {
                "c1": est_s.c_hat, "c1_err": est_s.c_err,
                "d1": d1, "d1_err": d1_err,
                "c2": c2, "c2_err": c2_err,
                "d2": est_b.d_hat, "d2_err": est_b.d_err,
            }
        report["readings"] = readings
        report["truth"] = {"eta": noise.eta, "nu": noise.nu}
        estimate = estimate_detector(d1, c2, d1_err, c2_err)
    else:
        _require({"d1", "c2"} <= set(spec) and set(spec) <= {"d1", "c2", "d1_err", "c2_err"},
                 "detector inversion needs d1/c2 (optionally d1_err/c2_err)")
        estimate = estimate_detector(
            float(spec["d1"]), float(spec["c2"]),
            float(spec.get("d1_err", 0.0)), float(spec.get("c2_err", 0.0)),
        )
    report["estimate"] = {
        "eta": estimate.noise.eta,
        "nu": estimate.noise.nu,
        "eta_err": estimate.eta_err,
        "nu_err": estimate.nu_err,
    }
    _write_json(out_path, report)


def run(config: dict, out_path: str, seed: int) -> None:
    mode = config["mode"]
    if mode in ("scan", "search-optimal"):
        _write_scan(out_path, _scan_rows(config, seed), config)
    elif mode == "highdim":
        _write_scan(out_path, _highdim_rows(config, seed), config)
    elif mode == "calibrate":
        _cmd_calibrate(config, seed, out_path)
    else:
        _cmd_detector(config, seed, out_path)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cdtradeoff",
        description="Sequential-measurement correlation/disturbance scans and calibration.",
    )
    parser.add_argument("--config", required=True, help="JSON scenario config")
    parser.add_argument("--out", required=True, help="output CSV (scans) or JSON (reports)")
    parser.add_argument("--mode", choices=MODES, help="override the config mode")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--exact", action="store_true", help="force exact (infinite-shot) mode")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.mode:
            config["mode"] = args.mode
        if args.seed is not None:
            config["seed"] = args.seed
        if args.exact:
            config["shots"] = "exact"
        seed = config.get("seed", 0)
        _require(isinstance(seed, int) and seed >= 0, "seed must be a nonnegative integer")
        run(config, args.out, seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FitError, OutOfDomainError) as exc:
        print(f"fit error: {exc}", file=sys.stderr)
        return EXIT_FIT
    except CdTradeoffError as exc:
        print(f"physics error: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except OSError as exc:
        print(f"config error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
