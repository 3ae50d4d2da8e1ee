"""Stream orchestration: ingestion, per-method runners, reports, checkpoints."""

from __future__ import annotations

import csv
import hashlib
import logging
import math
import pickle
import time
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable

import numpy as np

from .baselines import OnlineFixedModelSel, enumerate_bma, offline_logistic_mc3
from .errors import ConfigurationError, DataError
from .modelspace import ModelIndicator, ModelPrior
from .mpm import MpmResult, select_mpm
from .renewable import RenewableState, renew
from .sampler import SamplerConfig, run_chain
from .suffstats import BatchData, SuffStats, concat_batches

log = logging.getLogger(__name__)

METHODS = ("online_changing", "online_fixed", "offline", "oracle")
CHECKPOINT_MAGIC = b"ONLINEBMS-CKPT"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class PipelineConfig:
    method: str = "online_changing"
    access_window: int = 10
    screening_batches: int = 10
    screening_threshold: float = 0.02
    iterations: int = 12_000
    burn_in: int = 2_000
    warm_start: str = "previous_mpm"
    prior: str = "uniform"
    prior_a: float = 1.0
    prior_b: float = 1.0
    ridge: float = 0.0
    seed: int = 0
    top_k: int = 10
    standardize: bool = False

    def __post_init__(self):
        method = self.method.replace("-", "_")
        if method not in METHODS:
            raise ConfigurationError(f"method must be one of {METHODS}, got {self.method!r}")
        object.__setattr__(self, "method", method)
        if self.access_window < 1:
            raise ConfigurationError("access_window must be >= 1")
        if self.screening_batches < 1:
            raise ConfigurationError("screening_batches must be >= 1")
        if self.ridge < 0:
            raise ConfigurationError("ridge must be nonnegative")
        self.sampler  # validates iterations/burn-in/warm start
        self.model_prior

    @property
    def sampler(self) -> SamplerConfig:
        return SamplerConfig(self.iterations, self.burn_in, self.seed, self.warm_start)

    @property
    def model_prior(self) -> ModelPrior:
        return ModelPrior(self.prior, self.prior_a, self.prior_b)

    @classmethod
    def from_mapping(cls, values: dict) -> PipelineConfig:
        """Build from string values (config file or CLI), converting types."""
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            key = key.replace("-", "_")
            if key not in known:
                raise ConfigurationError(f"unknown config key {key!r}")
            default = known[key].default
            if isinstance(raw, str):
                if isinstance(default, bool):
                    raw = raw.strip().lower() in ("1", "true", "yes", "on")
                elif isinstance(default, int):
                    raw = int(raw)
                elif isinstance(default, float):
                    raw = float(raw)
                else:
                    raw = raw.strip()
            kwargs[key] = raw
        return cls(**kwargs)


def read_config_file(path) -> dict:
    """Plain ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected key=value")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


# ---------------------------------------------------------------- ingestion


def write_batch(path, batch: BatchData) -> None:
    """Write ``y`` then the predictor columns, floats at full precision."""
    p = batch.p
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["y"] + [f"x{j}" for j in range(1, p + 1)])
        for yi, row in zip(batch.y, batch.X[:, 1:]):
            w.writerow([int(yi)] + [repr(float(v)) for v in row])


def ingest_batch(path, batch_index: int = 1, p: int | None = None) -> tuple[BatchData, int]:
    """Parse a batch file; returns the batch and the number of rejected rows.

    Rows with missing, non-numeric or non-binary entries are rejected and
    counted; a malformed header is fatal.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0].strip() != "y" or len(header) < 2:
            raise DataError(f"{path}: header must start with 'y' followed by predictor columns")
        width = len(header)
        if p is not None and width - 1 != p:
            raise DataError(f"{path}: {width - 1} predictors, stream expects {p}")
        rows, ys, rejected = [], [], 0
        for rec in reader:
            if not rec:
                continue
            try:
                if len(rec) != width:
                    raise ValueError("wrong field count")
                vals = [float(v) for v in rec]
                if vals[0] not in (0.0, 1.0) or not all(math.isfinite(v) for v in vals):
                    raise ValueError("bad value")
            except ValueError:
                rejected += 1
                continue
            ys.append(vals[0])
            rows.append(vals[1:])
    if rejected:
        log.warning("%s: rejected %d malformed row(s)", path, rejected)
    if not rows:
        raise DataError(f"{path}: no valid rows")
    return BatchData.from_predictors(np.array(rows), np.array(ys), batch_index), rejected


def batch_files(directory) -> list[Path]:
    files = sorted(Path(directory).glob("batch_*.csv"))
    if not files:
        raise DataError(f"no batch_*.csv files in {directory}")
    return files


# ------------------------------------------------------------------ outputs


@dataclass
class BatchOutput:
    batch: int
    method: str
    inclusion_probs: np.ndarray
    gamma: ModelIndicator
    beta: np.ndarray
    n_seen: int
    acceptance_rate: float = math.nan
    converged: bool = True
    wall_time: float = 0.0
    top_models: list = field(default_factory=list)
    note: str = ""


def mpm_header(p: int) -> list[str]:
    return (["batch", "method", "gamma", "n_seen", "acceptance_rate", "converged", "note"]
            + [f"beta_{j}" for j in range(p + 1)] + [f"incl_{j}" for j in range(1, p + 1)])


def mpm_row(o: BatchOutput) -> list:
    return ([o.batch, o.method, str(o.gamma), o.n_seen, repr(float(o.acceptance_rate)),
             int(o.converged), o.note]
            + [repr(float(v)) for v in o.beta] + [repr(float(v)) for v in o.inclusion_probs])


SAMPLER_HEADER = ["batch", "method", "rank", "gamma", "post_prob", "bic"]
TIMING_HEADER = ["batch", "method", "wall_time"]


class ReportWriter:
    """Appends per-batch rows to ``mpm_report.csv``, ``sampler_report.csv``
    and ``timings.csv`` in ``out_dir``. Wall times live only in the timing
    file so the other two are byte-reproducible."""

    def __init__(self, out_dir, p: int, append: bool = False):
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.p = p
        self._files = {
            "mpm_report.csv": mpm_header(p),
            "sampler_report.csv": SAMPLER_HEADER,
            "timings.csv": TIMING_HEADER,
        }
        for name, header in self._files.items():
            path = self.dir / name
            if not append or not path.exists():
                with open(path, "w", newline="") as fh:
                    csv.writer(fh).writerow(header)

    def _append(self, name, rows):
        with open(self.dir / name, "a", newline="") as fh:
            csv.writer(fh).writerows(rows)

    def write(self, o: BatchOutput):
        self._append("mpm_report.csv", [mpm_row(o)])
        self._append("sampler_report.csv", [
            [o.batch, o.method, rank, str(g), repr(float(pp)), repr(float(b))]
            for rank, (g, pp, b) in enumerate(o.top_models, 1)
        ])
        self._append("timings.csv", [[o.batch, o.method, repr(o.wall_time)]])


def read_mpm_report(path) -> list[dict]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            p = sum(1 for k in row if k.startswith("incl_"))
            out.append({
                "batch": int(row["batch"]),
                "method": row["method"],
                "gamma": ModelIndicator.from_string(row["gamma"]),
                "beta": np.array([float(row[f"beta_{j}"]) for j in range(p + 1)]),
                "inclusion_probs": np.array([float(row[f"incl_{j}"]) for j in range(1, p + 1)]),
            })
    return out


# ------------------------------------------------------------------ runners


@dataclass
class StreamCheckpoint:
    """Everything a runner needs to continue a stream."""

    config: PipelineConfig
    p: int
    last_batch: int = 0
    stats: SuffStats | None = None
    renewable: RenewableState | None = None
    window: list[BatchData] = field(default_factory=list)
    raw: list[BatchData] = field(default_factory=list)
    prev_mpm: ModelIndicator | None = None
    fixed: OnlineFixedModelSel | None = None
    ridge_in_use: float = 0.0
    notes: list[str] = field(default_factory=list)
    # predictor centering/scaling frozen from the first batch (standardize=True)
    center: np.ndarray | None = None
    scale: np.ndarray | None = None

    @property
    def rng_cursor(self) -> tuple[int, int]:
        # chain streams are keyed by (seed, batch_index)
        return self.config.seed, self.last_batch


class StreamRunner:
    """Runs one method over a stream, one batch at a time."""

    def __init__(self, config: PipelineConfig, p: int, state: StreamCheckpoint | None = None):
        self.config = config
        self.p = p
        if state is None:
            state = StreamCheckpoint(config, p, ridge_in_use=config.ridge)
            if config.method in ("online_changing", "oracle"):
                state.stats = SuffStats.init(p)
            elif config.method == "online_fixed":
                state.fixed = OnlineFixedModelSel(
                    p, config.model_prior, config.sampler, config.screening_threshold,
                    config.screening_batches, config.ridge)
        self.state = state

    def process(self, batch: BatchData) -> BatchOutput:
        st = self.state
        if batch.p != self.p:
            raise DataError(f"batch has {batch.p} predictors, stream expects {self.p}")
        if self.config.standardize:
            batch = self._standardize(batch)
        if batch.batch_index != st.last_batch + 1:
            batch = BatchData(batch.X, batch.y, st.last_batch + 1)
        t0 = time.perf_counter()
        method = self.config.method
        if method in ("online_changing", "oracle"):
            out = self._changing(batch)
        elif method == "offline":
            out = self._offline(batch)
        else:
            out = self._fixed(batch)
        out.wall_time = time.perf_counter() - t0
        st.last_batch = batch.batch_index
        st.prev_mpm = out.gamma
        return out

    def _standardize(self, batch: BatchData) -> BatchData:
        st = self.state
        Z = batch.X[:, 1:]
        if st.center is None:
            st.center = Z.mean(axis=0)
            sd = Z.std(axis=0)
            st.scale = np.where(sd > 0, sd, 1.0)
        return BatchData.from_predictors((Z - st.center) / st.scale, batch.y, batch.batch_index)

    # online changing / oracle share everything except the selector
    def _changing(self, batch: BatchData) -> BatchOutput:
        st, cfg = self.state, self.config
        b = batch.batch_index
        st.stats = st.stats.update(batch)
        top = []
        acc = math.nan
        if cfg.method == "oracle":
            probs = enumerate_bma(st.stats, cfg.model_prior).inclusion_probs
        else:
            chain = run_chain(st.stats, cfg.model_prior, cfg.sampler, st.prev_mpm, b)
            probs, acc, top = chain.inclusion_probs, chain.acceptance_rate, chain.top_models(cfg.top_k)

        note = ""
        if b <= cfg.access_window:
            st.window.append(batch)
            X, y = concat_batches(st.window)
            renewable, fit = RenewableState.from_window(X, y, st.ridge_in_use)
            if not fit.converged and st.ridge_in_use == 0.0:
                st.ridge_in_use = 1.0
                note = "separation: switched to ridge=1"
                st.notes.append(f"batch {b}: {note}")
                log.warning("batch %d: full-model IRLS did not converge; using ridge=1", b)
                renewable, fit = RenewableState.from_window(X, y, st.ridge_in_use)
            st.renewable = renewable
            if b == cfg.access_window:
                st.window = []
        else:
            st.renewable = renew(st.renewable, batch)
            if not st.renewable.converged:
                note = "renewal did not converge"
        mpm = MpmResult.build(probs, st.renewable.beta)
        return BatchOutput(b, cfg.method, mpm.inclusion_probs, mpm.gamma_mpm, mpm.beta_mpm,
                           st.stats.N, acc, st.renewable.converged, top_models=top, note=note)

    def _offline(self, batch: BatchData) -> BatchOutput:
        st, cfg = self.state, self.config
        st.raw.append(batch)
        X, y = concat_batches(st.raw)
        res = offline_logistic_mc3(X, y, cfg.model_prior, cfg.sampler, st.prev_mpm,
                                   batch.batch_index, cfg.ridge)
        gamma = select_mpm(res.inclusion_probs)
        return BatchOutput(batch.batch_index, cfg.method, res.inclusion_probs, gamma, res.beta_bma,
                           X.shape[0], res.chain.acceptance_rate,
                           top_models=res.chain.top_models(cfg.top_k))

    def _fixed(self, batch: BatchData) -> BatchOutput:
        st, cfg = self.state, self.config
        res = st.fixed.step(batch)
        top = res.chain.top_models(cfg.top_k) if res.chain is not None else []
        note = "screening" if res.screening else ""
        if res.screening and not st.fixed.state.active:
            note = f"screening ended ({len(st.fixed.state.model_set)} models frozen)"
        return BatchOutput(batch.batch_index, cfg.method, res.inclusion_probs, res.gamma_mpm,
                           res.beta_bma, st.fixed.state.N, res.acceptance_rate,
                           top_models=top, note=note)

    def retains_raw_records(self) -> bool:
        st = self.state
        fixed_raw = st.fixed.state.raw if st.fixed is not None else []
        return bool(st.window or st.raw or fixed_raw)

    # ------------------------------------------------------------ checkpoint

    def save(self, path) -> None:
        save_checkpoint(self.state, path)

    @classmethod
    def restore(cls, path, config: PipelineConfig | None = None) -> StreamRunner:
        state = load_checkpoint(path)
        if config is not None and config != state.config:
            raise ConfigurationError("checkpoint was written with a different configuration")
        return cls(state.config, state.p, state)


def save_checkpoint(state: StreamCheckpoint, path) -> None:
    """Versioned binary checkpoint: magic, version, payload length, SHA-256, payload."""
    payload = pickle.dumps(state, protocol=pickle.HIGHEST_PROTOCOL)
    header = (CHECKPOINT_MAGIC + CHECKPOINT_VERSION.to_bytes(2, "big")
              + len(payload).to_bytes(8, "big") + hashlib.sha256(payload).digest())
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(header + payload)
    tmp.replace(path)


def load_checkpoint(path) -> StreamCheckpoint:
    """Load a checkpoint written by :func:`save_checkpoint`.

    Only load checkpoints you wrote yourself: the payload is a pickle.
    """
    data = Path(path).read_bytes()
    m = len(CHECKPOINT_MAGIC)
    if data[:m] != CHECKPOINT_MAGIC:
        raise ValueError(f"{path}: not a stream checkpoint")
    if len(data) < m + 42:
        raise ValueError(f"{path}: truncated checkpoint header")
    version = int.from_bytes(data[m:m + 2], "big")
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"{path}: checkpoint version {version}, this build reads "
                         f"version {CHECKPOINT_VERSION}")
    length = int.from_bytes(data[m + 2:m + 10], "big")
    digest = data[m + 10:m + 42]
    payload = data[m + 42:]
    if len(payload) != length or hashlib.sha256(payload).digest() != digest:
        raise ValueError(f"{path}: checkpoint is truncated or corrupted")
    state = pickle.loads(payload)
    if not isinstance(state, StreamCheckpoint):
        raise ValueError(f"{path}: unexpected checkpoint payload")
    return state


def run_stream(config: PipelineConfig, batches: Iterable[BatchData], p: int,
               runner: StreamRunner | None = None) -> list[BatchOutput]:
    runner = runner or StreamRunner(config, p)
    return [runner.process(b) for b in batches]


def run_online_changing(config: PipelineConfig, batches, p: int) -> list[BatchOutput]:
    return run_stream(replace(config, method="online_changing"), batches, p)
