"""Monte-Carlo NMSE experiments.

Each trial draws its own paths and a unit-variance noise realisation from
``SeedSequence([seed, trial])``. The same realisation is rescaled for every
SNR point, so curves use common random numbers and differences between SNR
points reflect the noise level only. The receive SNR is per element:
``sigma^2 = ||h||^2 10^(-snr/10) / (M N)``.

NMSE is the ratio of summed squared errors to summed channel energies over
trials; ``per_trial_mean`` switches to the mean of per-trial ratios.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__, sensing, tensorops, wavefront
from .errors import DomainError
from .estimation import (EstimationResult, NelderMeadOptions, ls_baseline, sd_omp_offgrid,
                         sd_omp_ongrid, tensor_omp_offgrid, tensor_omp_ongrid)
from .geometry import ArrayConfig
from .sensing import MeasurementMatrix, SamplingGrid
from .wavefront import PathParams

ESTIMATORS = ("sd_ongrid", "sd_offgrid", "sd_farfield", "tensor_ongrid", "tensor_offgrid", "ls")
DEFAULT_SNR_GRID = (-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0)
FARFIELD_RANGE = 1e5
SNR_DEFINITION = "per-element receive SNR: sigma^2 = ||h||^2 * 10^(-snr_db/10) / (M*N)"


@dataclass(frozen=True)
class GridParams:
    angle_resolution: float | None = None
    r_min: float = 50.0
    r_max: float = 80.0
    delta: float = 3e-4
    angle_limit: float = 0.75

    def build(self, cfg: ArrayConfig) -> SamplingGrid:
        return sensing.build_grid(cfg, self.angle_resolution, self.r_min, self.r_max,
                                  self.delta, self.angle_limit)


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything that determines an NMSE sweep."""

    cfg: ArrayConfig = field(default_factory=ArrayConfig)
    grid: GridParams = field(default_factory=GridParams)
    q_x: int = 8
    q_y: int = 8
    sparsity: int = 1
    snr_grid_db: tuple = DEFAULT_SNR_GRID
    trials: int = 200
    seed: int = 0
    estimators: tuple = ESTIMATORS
    cos_theta_range: tuple = (-0.75, 0.75)
    sin_phi_range: tuple = (-0.75, 0.75)
    r_range: tuple = (50.0, 80.0)
    nlos_attenuation_db: float = 5.0
    beta0: float = 1.0
    project_measurement: bool = True
    nm_max_iter: int = 400
    nm_tol: float = 1e-8
    per_trial_mean: bool = False

    def __post_init__(self):
        object.__setattr__(self, "snr_grid_db", tuple(float(s) for s in self.snr_grid_db))
        object.__setattr__(self, "estimators", tuple(self.estimators))
        for name in ("cos_theta_range", "sin_phi_range", "r_range"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        if self.trials < 1:
            raise DomainError("trials must be at least 1")
        if not self.snr_grid_db or not all(math.isfinite(s) for s in self.snr_grid_db):
            raise DomainError("snr_grid_db must be a nonempty list of finite values")
        unknown = [e for e in self.estimators if e not in ESTIMATORS]
        if unknown or not self.estimators:
            raise DomainError(f"unknown estimators {unknown}; valid names: {', '.join(ESTIMATORS)}")
        if self.sparsity < 1:
            raise DomainError("sparsity must be at least 1")
        if not (1 <= self.q_x <= self.cfg.n_x and 1 <= self.q_y <= self.cfg.n_y):
            raise DomainError("need 1 <= q_x <= n_x and 1 <= q_y <= n_y")
        lim = self.grid.angle_limit
        for name in ("cos_theta_range", "sin_phi_range"):
            lo, hi = getattr(self, name)
            if not -lim - 1e-12 <= lo <= hi <= lim + 1e-12:
                raise DomainError(f"{name} {(lo, hi)} outside the dictionary coverage +-{lim}")
        lo, hi = self.r_range
        if not self.grid.r_min <= lo <= hi <= self.grid.r_max:
            raise DomainError(f"r_range {(lo, hi)} outside [{self.grid.r_min}, {self.grid.r_max}]")

    @property
    def nm_options(self) -> NelderMeadOptions:
        return NelderMeadOptions(max_iter=self.nm_max_iter, tol=self.nm_tol)

    @property
    def tensor_shape(self) -> tuple[int, int, int]:
        return self.q_y, self.q_x, self.cfg.num_uavs

    def replace(self, **changes) -> "ExperimentSpec":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["cfg"] = self.cfg.to_dict()
        return d


# --- random draws ----------------------------------------------------------------------

def trial_seed(master_seed: int, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(master_seed), int(trial)])


def draw_paths(spec: ExperimentSpec, seed) -> list[PathParams]:
    """Uniform ``cos(theta)``, ``sin(phi)``, ``r``; CN(0, 1) gains.

    Paths after the first are NLoS and attenuated by ``spec.nlos_attenuation_db``.
    """
    rng = np.random.default_rng(seed)
    n = spec.sparsity
    ct = rng.uniform(*spec.cos_theta_range, size=n)
    sp = rng.uniform(*spec.sin_phi_range, size=n)
    r = rng.uniform(*spec.r_range, size=n)
    z = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / math.sqrt(2)
    z[1:] *= 10 ** (-spec.nlos_attenuation_db / 20)
    return [PathParams(float(np.arccos(ct[i])), float(np.arcsin(sp[i])), float(r[i]), complex(z[i]))
            for i in range(n)]


def noise_variance(channel_energy: float, snr_db: float, num_elements: int) -> float:
    return channel_energy * 10 ** (-snr_db / 10) / num_elements


def unit_noise(w: MeasurementMatrix, num_elements: int, seed) -> np.ndarray:
    """``W^H n`` for ``n ~ CN(0, I)`` over all elements."""
    rng = np.random.default_rng(seed)
    n = (rng.standard_normal(num_elements) + 1j * rng.standard_normal(num_elements)) / math.sqrt(2)
    return w.sense(n)


def apply_noise(clean: np.ndarray, snr_db: float, w: MeasurementMatrix, seed,
                channel_energy: float) -> np.ndarray:
    """Add combined element noise to a clean measurement ``W^H h``."""
    num_elements = w.wx.shape[0] * w.wy.shape[0] * (clean.size // (w.q_x * w.q_y))
    sigma = math.sqrt(noise_variance(channel_energy, snr_db, num_elements))
    return clean + sigma * unit_noise(w, num_elements, seed)


def nmse(h_true: np.ndarray, h_est: np.ndarray) -> float:
    h_true, h_est = np.asarray(h_true), np.asarray(h_est)
    if h_true.shape != h_est.shape:
        raise DomainError(f"shape mismatch {h_true.shape} vs {h_est.shape}")
    energy = float(np.vdot(h_true, h_true).real)
    if energy == 0:
        raise DomainError("true channel has zero norm")
    return float(np.vdot(h_true - h_est, h_true - h_est).real) / energy


def aggregate_nmse(errors: Sequence[float], energies: Sequence[float],
                   per_trial_mean: bool = False) -> tuple[float, float]:
    """``(estimate, standard error)`` from per-trial squared errors and channel energies."""
    e = np.asarray(errors, dtype=float)
    p = np.asarray(energies, dtype=float)
    n = len(e)
    if per_trial_mean:
        ratios = e / p
        se = float(ratios.std(ddof=1) / math.sqrt(n)) if n > 1 else float("nan")
        return float(ratios.mean()), se
    ratio = float(e.sum() / p.sum())
    if n < 2:
        return ratio, float("nan")
    # delta method for a ratio of means
    se = float(np.std(e - ratio * p, ddof=1) / (math.sqrt(n) * p.mean()))
    return ratio, se


# --- estimator bank --------------------------------------------------------------------

class FarFieldEstimator:
    """SD-OMP over a single far-range shell, refined over angles only."""

    def __init__(self, spec: ExperimentSpec, w: MeasurementMatrix, far_range: float = FARFIELD_RANGE):
        self.spec = spec
        self.w = w
        self.far_range = far_range
        self.grid = sensing.build_grid(spec.cfg, spec.grid.angle_resolution, far_range, far_range,
                                       spec.grid.delta, spec.grid.angle_limit)
        self.dictionary = sensing.build_sd_dictionary(spec.cfg, self.grid, spec.beta0)
        self.sensed = self.dictionary.sensed(w)

    def ongrid(self, y: np.ndarray) -> EstimationResult:
        return sd_omp_ongrid(y, self.w, self.dictionary, self.spec.sparsity, sensed=self.sensed)

    def estimate(self, y: np.ndarray) -> EstimationResult:
        return sd_omp_offgrid(self.ongrid(y), y, self.w, self.spec.cfg, self.spec.beta0,
                              self.spec.nm_options, fixed_range=self.far_range,
                              method="sd_farfield")


def farfield_baseline_adapter(spec: ExperimentSpec, w: MeasurementMatrix | None = None,
                              far_range: float = FARFIELD_RANGE) -> FarFieldEstimator:
    if w is None:
        w = experiment_measurement(spec)
    return FarFieldEstimator(spec, w, far_range)


def experiment_measurement(spec: ExperimentSpec) -> MeasurementMatrix:
    return sensing.make_measurement(spec.cfg, spec.q_x, spec.q_y, seed=[spec.seed],
                                    project=spec.project_measurement)


class EstimatorBank:
    """Dictionaries for an experiment, each built the first time it is needed."""

    def __init__(self, spec: ExperimentSpec, w: MeasurementMatrix | None = None, cache_dir=None):
        self.spec = spec
        self.w = w if w is not None else experiment_measurement(spec)
        self.cache_dir = cache_dir
        self._grid = None
        self._sd = None
        self._sd_sensed = None
        self._td = None
        self._ff = None

    @property
    def grid(self) -> SamplingGrid:
        if self._grid is None:
            self._grid = self.spec.grid.build(self.spec.cfg)
        return self._grid

    @property
    def sd(self):
        if self._sd is None:
            self._sd = sensing.cached_sd_dictionary(self.spec.cfg, self.grid, self.spec.beta0,
                                                    self.cache_dir)
            self._sd_sensed = self._sd.sensed(self.w)
        return self._sd

    @property
    def td(self):
        if self._td is None:
            self._td = sensing.build_tensor_dictionary(self.spec.cfg, self.grid, self.w,
                                                       self.spec.beta0)
        return self._td

    @property
    def farfield(self) -> FarFieldEstimator:
        if self._ff is None:
            self._ff = FarFieldEstimator(self.spec, self.w)
        return self._ff

    @property
    def built(self) -> dict[str, bool]:
        return {"sd": self._sd is not None, "tensor": self._td is not None,
                "farfield": self._ff is not None}

    def run(self, y: np.ndarray, estimators: Sequence[str] | None = None) -> dict[str, np.ndarray]:
        """Channel estimates for one measurement; off-grid variants reuse their on-grid pass."""
        spec = self.spec
        names = spec.estimators if estimators is None else tuple(estimators)
        out: dict[str, np.ndarray] = {}
        opts = spec.nm_options
        if "sd_ongrid" in names or "sd_offgrid" in names:
            on = sd_omp_ongrid(y, self.w, self.sd, spec.sparsity, sensed=self._sd_sensed)
            if "sd_ongrid" in names:
                out["sd_ongrid"] = on.channel_estimate
            if "sd_offgrid" in names:
                out["sd_offgrid"] = sd_omp_offgrid(on, y, self.w, spec.cfg, spec.beta0,
                                                   opts).channel_estimate
        if "sd_farfield" in names:
            out["sd_farfield"] = self.farfield.estimate(y).channel_estimate
        if "tensor_ongrid" in names or "tensor_offgrid" in names:
            y_t = tensorops.devec(y, spec.tensor_shape)
            on = tensor_omp_ongrid(y_t, self.td, spec.sparsity)
            if "tensor_ongrid" in names:
                out["tensor_ongrid"] = on.channel_estimate
            if "tensor_offgrid" in names:
                out["tensor_offgrid"] = tensor_omp_offgrid(on, y_t, self.w, spec.cfg, spec.beta0,
                                                           opts).channel_estimate
        if "ls" in names:
            out["ls"] = ls_baseline(y, self.w)
        return {name: out[name] for name in names}


# --- experiment loop -------------------------------------------------------------------

def run_trial(bank: EstimatorBank, trial: int) -> tuple[float, dict[tuple[float, str], float]]:
    """Channel energy and squared error per ``(snr, estimator)`` for one trial."""
    spec = bank.spec
    path_seed, noise_seed = trial_seed(spec.seed, trial).spawn(2)
    paths = draw_paths(spec, path_seed)
    h = wavefront.channel(spec.cfg, paths, "swm", spec.beta0)
    energy = float(np.vdot(h, h).real)
    clean = bank.w.sense(h)
    noise = unit_noise(bank.w, spec.cfg.num_elements, noise_seed)
    errors = {}
    for snr in spec.snr_grid_db:
        sigma = math.sqrt(noise_variance(energy, snr, spec.cfg.num_elements))
        estimates = bank.run(clean + sigma * noise)
        for name, h_est in estimates.items():
            errors[(snr, name)] = float(np.vdot(h - h_est, h - h_est).real)
    return energy, errors


_WORKER_BANK: EstimatorBank | None = None


def _worker_init(spec: ExperimentSpec, cache_dir):
    global _WORKER_BANK
    _WORKER_BANK = EstimatorBank(spec, cache_dir=cache_dir)


def _worker_trial(trial: int):
    return trial, run_trial(_WORKER_BANK, trial)


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    rows: list[dict]
    metadata: dict
    energies: np.ndarray = field(default=None, repr=False)
    errors: dict = field(default_factory=dict, repr=False)

    def trial_ratios(self, estimator: str) -> np.ndarray:
        """Per-trial NMSE, shape ``(trials, len(snr_grid))``."""
        cols = [self.errors[(snr, estimator)] for snr in self.spec.snr_grid_db]
        return np.stack(cols, axis=1) / self.energies[:, None]

    def table(self) -> dict[str, list[float]]:
        """``estimator -> NMSE per SNR point`` in grid order."""
        out: dict[str, list[float]] = {}
        for row in self.rows:
            out.setdefault(row["estimator"], []).append(row["nmse_mean"])
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow({k: (f"{v:.10g}" if isinstance(v, float) else v) for k, v in row.items()})
        return buf.getvalue()


CSV_COLUMNS = ("snr_db", "estimator", "nmse_mean", "nmse_stderr", "trials")


def run_experiment(spec: ExperimentSpec, workers: int = 1, cache_dir=None,
                   progress=None) -> ExperimentResult:
    """Loop SNR x trial x estimator and aggregate NMSE per cell.

    Trials are independent; with ``workers > 1`` they run in a process pool
    and are re-ordered by trial index before aggregation, so results do not
    depend on the worker count.
    """
    bank = EstimatorBank(spec, cache_dir=cache_dir)
    outcomes: dict[int, tuple] = {}
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers, initializer=_worker_init,
                                 initargs=(spec, cache_dir)) as pool:
            for t, res in pool.map(_worker_trial, range(spec.trials)):
                outcomes[t] = res
                if progress:
                    progress(len(outcomes), spec.trials)
    else:
        for t in range(spec.trials):
            outcomes[t] = run_trial(bank, t)
            if progress:
                progress(t + 1, spec.trials)
    energies = [outcomes[t][0] for t in range(spec.trials)]
    rows = []
    per_cell = {}
    for snr in spec.snr_grid_db:
        for name in spec.estimators:
            errs = np.array([outcomes[t][1][(snr, name)] for t in range(spec.trials)])
            per_cell[(snr, name)] = errs
            mean, se = aggregate_nmse(errs, energies, spec.per_trial_mean)
            rows.append({"snr_db": snr, "estimator": name, "nmse_mean": mean,
                         "nmse_stderr": se, "trials": spec.trials})
    return ExperimentResult(spec=spec, rows=rows, metadata=experiment_metadata(spec, bank),
                            energies=np.asarray(energies), errors=per_cell)


def experiment_metadata(spec: ExperimentSpec, bank: EstimatorBank | None = None) -> dict:
    grid = spec.grid.build(spec.cfg)
    hashes = {"grid": sensing.dictionary_key(spec.cfg, grid, [spec.seed], kind="grid")}
    if bank is not None:
        for kind, built in bank.built.items():
            if built:
                hashes[kind] = sensing.dictionary_key(spec.cfg, grid, [spec.seed], kind=kind)
    return {
        "version": __version__,
        "spec": spec.to_dict(),
        "seeds": {"master": spec.seed, "measurement": [spec.seed],
                  "trial": "SeedSequence([master, trial]).spawn(2) -> (paths, noise)"},
        "snr_definition": SNR_DEFINITION,
        "nmse_definition": "mean of per-trial ratios" if spec.per_trial_mean
        else "sum of squared errors / sum of channel energies",
        "channel_model": "swm",
        "dictionary_hashes": hashes,
        "grid_shape": list(grid.shape),
        "grid_warnings": list(grid.warnings),
    }


def write_outputs(result: ExperimentResult, csv_path, json_path=None) -> list[str]:
    """Write the CSV table and JSON sidecar (default: CSV path with ``.json``)."""
    csv_path = Path(csv_path)
    json_path = Path(json_path) if json_path else csv_path.with_suffix(".json")
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    csv_path.write_text(result.to_csv())
    json_path.write_text(json.dumps(result.metadata, indent=2, sort_keys=True) + "\n")
    return [str(csv_path), str(json_path)]


def snr_increments(result: ExperimentResult, estimator: str) -> list[tuple[float, float]]:
    """``(change, paired standard error)`` of NMSE between adjacent SNR points.

    Errors at neighbouring SNR points share paths and noise, so the standard
    error is taken over per-trial differences.
    """
    p = result.energies
    out = []
    snrs = result.spec.snr_grid_db
    for lo, hi in zip(snrs, snrs[1:]):
        d = result.errors[(hi, estimator)] - result.errors[(lo, estimator)]
        se = float(d.std(ddof=1) / (math.sqrt(len(d)) * p.mean())) if len(d) > 1 else 0.0
        out.append((float(d.sum() / p.sum()), se))
    return out


def count_inversions(result: ExperimentResult, estimator: str, z: float | None = 2.0) -> int:
    """Adjacent SNR pairs where NMSE rises; with ``z`` set, only rises above ``z`` paired SEs count."""
    return sum(diff > (0.0 if z is None else z * se) for diff, se in snr_increments(result, estimator))
