"""Experiment orchestration: configs, synthetic observations, artifacts.

A twin experiment synthesizes noisy sensor readings from a known truth
configuration, runs the tempered sampler against them, compresses the
retained draws into a Gaussian mixture, and reports the PCA of the most
probable component. All file formats are plain CSV/JSON so external
tools can re-plot without this package.
"""

import csv
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import field as fieldmod, posterior, sampler
from .bayes import (BLOCK, COMPONENT_NAMES, DEFAULT_BLOCK_BOUNDS, HeaterState,
                    Observation, StateSpec, canonicalize, heaters_from,
                    make_log_posterior, pack)
from .field import SensorArray, Wall, field_grid
from .posterior import PcaReport, best_component, fit_gmm, pca
from .sampler import ChainLadder, McmcSchedule

# desk-scale production phase used when a config gives no schedule; the
# full half-million-step schedule stays available explicitly
DESK_PHASE2_STEPS = 50_000
DESK_THIN = 10

_SYNTH_STREAM = 0x5E1D
_GMM_STREAM = 0x6334


class ConfigError(ValueError):
    """Configuration parse/validation failure, with a field path."""


@dataclass(frozen=True)
class GridSpec:
    region: tuple  # (xmin, xmax, ymin, ymax)
    resolution: tuple  # (nx, ny)


@dataclass(frozen=True)
class ExperimentConfig:
    truth: list  # of HeaterState, canonical (ascending q) order
    spec: StateSpec
    sensors: SensorArray
    noise_sigma: float
    schedule: McmcSchedule
    gmm_k: int
    grid: GridSpec | None
    seed: int
    quad_n: int
    ladder_exponents: tuple
    ladder_base: float
    resolved: dict  # config as loaded, with defaults applied


@dataclass(frozen=True)
class RunReport:
    gmm: posterior.GaussianMixture
    best_index: int
    pca_of_best: PcaReport
    acceptance_rates: dict
    swap_rates: np.ndarray
    truth: np.ndarray
    best_mean: np.ndarray
    residuals: np.ndarray
    observation: Observation
    retained: int
    config: dict

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "truth": self.truth.tolist(),
            "observation": {
                "values": self.observation.values.tolist(),
                "noise_sigma": self.observation.noise_sigma,
            },
            "gmm": {
                "weights": self.gmm.weights.tolist(),
                "means": self.gmm.means.tolist(),
                "covariances": self.gmm.covariances.tolist(),
            },
            "best_index": int(self.best_index),
            "best_mean": self.best_mean.tolist(),
            "pca_of_best": {
                "eigenvalues": self.pca_of_best.eigenvalues.tolist(),
                "eigenvectors": self.pca_of_best.eigenvectors.tolist(),
                "max_uncertainty_length": self.pca_of_best.max_uncertainty_length,
                "max_direction": self.pca_of_best.max_direction.tolist(),
            },
            "residuals_best": self.residuals.tolist(),
            "acceptance_rates": {k: v.tolist() for k, v in self.acceptance_rates.items()},
            "swap_rates": self.swap_rates.tolist(),
            "retained": int(self.retained),
        }


def _err(path: str, msg: str):
    raise ConfigError(f"{path}: {msg}")


def _get_number(d: dict, key: str, path: str, default=None, positive=False,
                nonnegative=False):
    v = d.get(key, default)
    if v is None:
        _err(f"{path}.{key}", "required value missing")
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        _err(f"{path}.{key}", f"expected a number, got {v!r}")
    if positive and v <= 0:
        _err(f"{path}.{key}", f"must be positive, got {v}")
    if nonnegative and v < 0:
        _err(f"{path}.{key}", f"must be non-negative, got {v}")
    return v


def _parse_truth(raw, path="truth"):
    if not isinstance(raw, list):
        _err(path, "expected a list of heater objects")
    states = []
    for i, item in enumerate(raw):
        p = f"{path}[{i}]"
        if not isinstance(item, dict):
            _err(p, "expected an object with x0, y0, q, c1, c2")
        vals = {}
        for name in COMPONENT_NAMES:
            vals[name] = _get_number(item, name, p)
        if vals["c1"] <= 0:
            _err(f"{p}.c1", f"must be positive, got {vals['c1']}")
        states.append(HeaterState(**vals))
    return states


def _parse_sensors(raw, path="sensors"):
    if not isinstance(raw, dict):
        _err(path, "expected an object")
    wall = Wall.ADIABATIC_Y0 if raw.get("wall", False) else Wall.UNBOUNDED
    if "points" in raw:
        pts = raw["points"]
        if not isinstance(pts, list) or not pts:
            _err(f"{path}.points", "expected a non-empty list of [x, y] pairs")
        arr = []
        for i, p in enumerate(pts):
            if not (isinstance(p, list) and len(p) == 2):
                _err(f"{path}.points[{i}]", f"expected [x, y], got {p!r}")
            arr.append([float(p[0]), float(p[1])])
        arr = np.asarray(arr)
    else:
        count = int(_get_number(raw, "count", path, positive=True))
        rng = raw.get("range", [-1.0, 1.0])
        if not (isinstance(rng, list) and len(rng) == 2 and rng[0] < rng[1]):
            _err(f"{path}.range", f"expected [lo, hi] with lo < hi, got {rng!r}")
        xs = sensor_line(count, rng[0], rng[1])
        arr = np.column_stack([xs, np.zeros(count)])
    try:
        return SensorArray(arr, wall)
    except ValueError as e:
        _err(path, str(e))


def sensor_line(count: int, lo: float = -1.0, hi: float = 1.0) -> np.ndarray:
    """Equally spaced sensor x positions, endpoints included.

    A single sensor sits at the midpoint of the range.
    """
    if count < 1:
        raise ValueError("sensor count must be >= 1")
    if count == 1:
        return np.array([0.5 * (lo + hi)])
    return lo + np.arange(count) * (hi - lo) / (count - 1)


def _parse_estimator(raw, truth, path="estimator"):
    raw = raw or {}
    if not isinstance(raw, dict):
        _err(path, "expected an object")
    n_heaters = int(raw.get("n_heaters", len(truth)))
    if n_heaters < 1:
        _err(f"{path}.n_heaters", "must be >= 1")
    half_plane = bool(raw.get("half_plane", True))

    block = [list(b) for b in DEFAULT_BLOCK_BOUNDS]
    overrides = raw.get("bounds", {})
    if not isinstance(overrides, dict):
        _err(f"{path}.bounds", "expected an object of component -> [lo, hi]")
    for name, pair in overrides.items():
        if name not in COMPONENT_NAMES:
            _err(f"{path}.bounds.{name}", f"unknown component (use {COMPONENT_NAMES})")
        if not (isinstance(pair, list) and len(pair) == 2 and pair[0] < pair[1]):
            _err(f"{path}.bounds.{name}", f"expected [lo, hi] with lo < hi, got {pair!r}")
        block[COMPONENT_NAMES.index(name)] = [float(pair[0]), float(pair[1])]

    known_names = raw.get("known", [])
    if not isinstance(known_names, list):
        _err(f"{path}.known", "expected a list of component names")
    known_var = float(_get_number(raw, "known_var", path, default=1e-6, positive=True))
    known = {}
    if known_names:
        if n_heaters != len(truth):
            _err(f"{path}.known",
                 "known-by-name needs n_heaters equal to the number of truth heaters")
        truth_vec = pack(truth)
        for name in known_names:
            if name not in COMPONENT_NAMES:
                _err(f"{path}.known", f"unknown component {name!r} (use {COMPONENT_NAMES})")
            ci = COMPONENT_NAMES.index(name)
            for h in range(n_heaters):
                idx = BLOCK * h + ci
                known[idx] = (float(truth_vec[idx]), known_var)

    try:
        return StateSpec.create(n_heaters, block, known, half_plane)
    except ValueError as e:
        _err(path, str(e))


def _parse_grid(raw, path="grid"):
    if raw is None:
        return None
    if not isinstance(raw, dict):
        _err(path, "expected an object")
    region = raw.get("region")
    res = raw.get("resolution")
    if not (isinstance(region, list) and len(region) == 4):
        _err(f"{path}.region", "expected [xmin, xmax, ymin, ymax]")
    if not (isinstance(res, list) and len(res) == 2):
        _err(f"{path}.resolution", "expected [nx, ny]")
    if not (region[0] < region[1] and region[2] < region[3]):
        _err(f"{path}.region", f"empty region {region!r}")
    if int(res[0]) < 2 or int(res[1]) < 2:
        _err(f"{path}.resolution", "must be at least 2 in each direction")
    return GridSpec(tuple(float(v) for v in region), (int(res[0]), int(res[1])))


def parse_config(doc: dict) -> ExperimentConfig:
    """Validate a raw config object and apply defaults."""
    if not isinstance(doc, dict):
        raise ConfigError("config root: expected an object")
    seed = int(_get_number(doc, "seed", "config", default=0, nonnegative=True))
    noise_sigma = float(_get_number(doc, "noise_sigma", "config", default=5e-4,
                                    nonnegative=True))
    gmm_k = int(_get_number(doc, "gmm_k", "config", default=5, positive=True))
    quad_n = int(_get_number(doc, "quad_n", "config", default=256, positive=True))

    truth = _parse_truth(doc.get("truth", []))
    # canonical (ascending q) order keeps known-by-name priors aligned
    truth.sort(key=lambda s: (s.q, s.x0, s.y0))
    sensors = _parse_sensors(doc.get("sensors", {"count": 3}))
    spec = _parse_estimator(doc.get("estimator"), truth)

    sched_raw = doc.get("schedule", {})
    if not isinstance(sched_raw, dict):
        _err("schedule", "expected an object")
    try:
        schedule = McmcSchedule(
            phase1_steps=int(sched_raw.get("phase1_steps", 10_000)),
            phase1_var=float(sched_raw.get("phase1_var", 1e-4)),
            phase2_steps=int(sched_raw.get("phase2_steps", DESK_PHASE2_STEPS)),
            phase2_var=float(sched_raw.get("phase2_var", 2.5e-5)),
            burn_in_fraction=float(sched_raw.get("burn_in_fraction", 0.5)),
            thin=int(sched_raw.get("thin", DESK_THIN)),
            swap_interval=int(sched_raw.get("swap_interval", 10)),
            seed=seed,
        )
    except ValueError as e:
        _err("schedule", str(e))

    ladder_raw = doc.get("ladder", {})
    if not isinstance(ladder_raw, dict):
        _err("ladder", "expected an object")
    exponents = tuple(int(p) for p in ladder_raw.get("exponents", (-4, -3, -2, -1, 0)))
    base = float(_get_number(ladder_raw, "base", "ladder", default=5.0, positive=True))
    if not exponents or exponents[-1] != 0 or \
            any(a >= b for a, b in zip(exponents, exponents[1:])):
        _err("ladder.exponents", "must be strictly increasing and end at 0")

    grid = _parse_grid(doc.get("grid"))

    # truth must be representable by the estimator when dimensions match
    if truth and spec.n_heaters == len(truth):
        tv = pack(truth)
        if np.any(tv < spec.bounds[:, 0]) or np.any(tv > spec.bounds[:, 1]):
            _err("truth", "a truth heater lies outside the estimator bounds")
        if spec.half_plane and np.any(tv[1::BLOCK] <= 0.0):
            _err("truth", "half_plane requires every truth y0 > 0")

    resolved = {
        "seed": seed,
        "noise_sigma": noise_sigma,
        "gmm_k": gmm_k,
        "quad_n": quad_n,
        "truth": [dict(zip(COMPONENT_NAMES, s.as_array().tolist())) for s in truth],
        "sensors": {
            "points": sensors.points.tolist(),
            "wall": sensors.wall is Wall.ADIABATIC_Y0,
        },
        "estimator": {
            "n_heaters": spec.n_heaters,
            "bounds": spec.bounds.tolist(),
            "known": {str(i): list(mv) for i, mv in sorted(spec.known.items())},
            "half_plane": spec.half_plane,
        },
        "schedule": {
            "phase1_steps": schedule.phase1_steps,
            "phase1_var": schedule.phase1_var,
            "phase2_steps": schedule.phase2_steps,
            "phase2_var": schedule.phase2_var,
            "burn_in_fraction": schedule.burn_in_fraction,
            "thin": schedule.thin,
            "swap_interval": schedule.swap_interval,
        },
        "ladder": {"exponents": list(exponents), "base": base},
        "grid": None if grid is None else {
            "region": list(grid.region), "resolution": list(grid.resolution)},
    }
    return ExperimentConfig(truth, spec, sensors, noise_sigma, schedule, gmm_k,
                            grid, seed, quad_n, exponents, base, resolved)


def load_config(path: str) -> ExperimentConfig:
    """Parse and validate a JSON experiment config."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as e:
        raise ConfigError(f"config file: {e}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {path}: invalid JSON ({e})")
    return parse_config(doc)


def synthesize(config: ExperimentConfig) -> Observation:
    """Noisy twin-experiment observation y* = h(truth) + noise.

    The noise stream is seeded independently of the sampler streams, so
    re-synthesis is reproducible and does not perturb the chains.
    """
    heaters = [(s.shape(), s.q) for s in config.truth]
    clean = fieldmod.observe(heaters, config.sensors, config.quad_n).temperatures
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, _SYNTH_STREAM]))
    noise = config.noise_sigma * rng.standard_normal(len(clean))
    return Observation(clean + noise, config.noise_sigma)


def run_experiment(config: ExperimentConfig, out_dir: str | None = None,
                   progress=sys.stderr) -> RunReport:
    """Full twin experiment: synthesize, sample, fit, report.

    When out_dir is given, writes samples.csv, report.json, and (if the
    config asks for a grid) truth/best field grids. Output is atomic:
    on failure any partially written files are removed.
    """
    if not config.truth:
        raise ConfigError("truth: no heaters configured, the posterior carries no signal")
    if config.noise_sigma <= 0.0:
        raise ConfigError("noise_sigma: inference requires a positive value")

    obs = synthesize(config)
    target = make_log_posterior(obs, config.sensors, config.spec, config.quad_n)
    ladder = ChainLadder.create(config.spec.bounds, config.schedule.seed,
                                config.ladder_exponents, config.ladder_base)
    canon = None
    if config.spec.n_heaters > 1:
        canon = lambda x: canonicalize(x, config.spec)  # noqa: E731
    sample_set = sampler.run(ladder, target, config.schedule, canon=canon,
                             progress=progress)

    gmm = fit_gmm(sample_set.samples, config.gmm_k,
                  rng=np.random.default_rng(np.random.SeedSequence([config.seed, _GMM_STREAM])))
    best = best_component(gmm, target)
    pca_rep = pca(gmm.covariances[best])
    best_mean = gmm.means[best]
    fitted = fieldmod.observe(heaters_from(best_mean, config.spec.n_heaters),
                              config.sensors, config.quad_n)
    report = RunReport(
        gmm=gmm, best_index=best, pca_of_best=pca_rep,
        acceptance_rates=sample_set.acceptance_rates,
        swap_rates=sample_set.swap_rates,
        truth=pack(config.truth).reshape(len(config.truth), BLOCK),
        best_mean=best_mean,
        residuals=obs.values - fitted.temperatures,
        observation=obs,
        retained=sample_set.samples.shape[0],
        config=config.resolved,
    )

    if out_dir is not None:
        written = []
        try:
            os.makedirs(out_dir, exist_ok=True)
            p = os.path.join(out_dir, "samples.csv")
            write_samples(sample_set.samples, p)
            written.append(p)
            p = os.path.join(out_dir, "report.json")
            write_report(report, p)
            written.append(p)
            if config.grid is not None:
                for tag, states in (("truth", pack(config.truth)),
                                    ("best", best_mean)):
                    g = field_grid(heaters_from(states, config.spec.n_heaters),
                                   config.grid.region, config.grid.resolution,
                                   config.sensors.wall, config.quad_n)
                    p = os.path.join(out_dir, f"{tag}_grid.csv")
                    written.extend(write_grid(g, p))
        except BaseException:
            for p in written:
                try:
                    os.unlink(p)
                except OSError:
                    pass
            raise
    return report


def fit_samples(config: ExperimentConfig, samples: np.ndarray) -> RunReport:
    """GMM + PCA analysis of an existing sample set, no re-sampling.

    The observation is re-synthesized from the config seed, so the best
    component is scored against the same posterior the samples targeted.
    Sampler diagnostics are absent from the result.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if samples.shape[1] != config.spec.dim:
        raise ConfigError(
            f"samples: {samples.shape[1]} columns, estimator expects {config.spec.dim}")
    obs = synthesize(config)
    target = make_log_posterior(obs, config.sensors, config.spec, config.quad_n)
    gmm = fit_gmm(samples, config.gmm_k,
                  rng=np.random.default_rng(np.random.SeedSequence([config.seed, _GMM_STREAM])))
    best = best_component(gmm, target)
    best_mean = gmm.means[best]
    fitted = fieldmod.observe(heaters_from(best_mean, config.spec.n_heaters),
                              config.sensors, config.quad_n)
    return RunReport(
        gmm=gmm, best_index=best, pca_of_best=pca(gmm.covariances[best]),
        acceptance_rates={}, swap_rates=np.zeros(0),
        truth=pack(config.truth).reshape(len(config.truth), BLOCK),
        best_mean=best_mean,
        residuals=obs.values - fitted.temperatures,
        observation=obs,
        retained=samples.shape[0],
        config=config.resolved,
    )


def _component_header(n_heaters: int):
    return [f"h{h + 1}_{name}" for h in range(n_heaters) for name in COMPONENT_NAMES]


def write_samples(samples: np.ndarray, path: str) -> None:
    """Retained draws as CSV, one row per draw, full double precision."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    n_heaters = samples.shape[1] // BLOCK
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(_component_header(n_heaters))
        for row in samples:
            w.writerow([repr(float(v)) for v in row])


def read_samples(path: str) -> np.ndarray:
    """Inverse of write_samples; bitwise exact round trip."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty samples file")
    return np.asarray([[float(v) for v in row] for row in rows[1:]])


def write_grid(grid: fieldmod.FieldGrid, path_csv: str):
    """Row-major grid CSV plus a .meta.json sidecar describing it."""
    ny, nx = grid.values.shape
    with open(path_csv, "w", newline="") as fh:
        w = csv.writer(fh)
        for row in grid.values:
            w.writerow([repr(float(v)) for v in row])
    meta_path = path_csv[:-4] + ".meta.json" if path_csv.endswith(".csv") \
        else path_csv + ".meta.json"
    meta = {
        "region": list(grid.region),
        "nx": nx,
        "ny": ny,
        "wall": grid.wall is Wall.ADIABATIC_Y0,
    }
    with open(meta_path, "w") as fh:
        json.dump(meta, fh, indent=1)
    return [path_csv, meta_path]


def write_report(report: RunReport, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(report.to_dict(), fh, indent=1)


_REPORT_KEYS = {
    "config": dict, "truth": list, "observation": dict, "gmm": dict,
    "best_index": int, "best_mean": list, "pca_of_best": dict,
    "residuals_best": list, "swap_rates": list, "retained": int,
}


def validate_report(doc: dict) -> None:
    """Check a report object against the documented schema; raises on error."""
    for key, typ in _REPORT_KEYS.items():
        if key not in doc:
            raise ValueError(f"report.{key}: missing")
        if not isinstance(doc[key], typ):
            raise ValueError(f"report.{key}: expected {typ.__name__}")
    if "acceptance_rates" not in doc:
        raise ValueError("report.acceptance_rates: missing")
    gmm = doc["gmm"]
    for key in ("weights", "means", "covariances"):
        if key not in gmm:
            raise ValueError(f"report.gmm.{key}: missing")
    k = len(gmm["weights"])
    if not (len(gmm["means"]) == len(gmm["covariances"]) == k):
        raise ValueError("report.gmm: component counts disagree")
    if abs(sum(gmm["weights"]) - 1.0) > 1e-9:
        raise ValueError("report.gmm.weights: must sum to 1")
    if not (0 <= doc["best_index"] < k):
        raise ValueError("report.best_index: out of range")
    pca_d = doc["pca_of_best"]
    for key in ("eigenvalues", "eigenvectors", "max_uncertainty_length", "max_direction"):
        if key not in pca_d:
            raise ValueError(f"report.pca_of_best.{key}: missing")
    obs = doc["observation"]
    if "values" not in obs or "noise_sigma" not in obs:
        raise ValueError("report.observation: needs values and noise_sigma")
