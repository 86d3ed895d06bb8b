"""Labelled feature dataset: three ensemble efficiencies per noise-parameter draw."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig
from .control import CONDITIONS, ProtocolTiming, make_protocol
from .dynamics import IntegratorConfig, MonteCarloConfig, monte_carlo_xi
from .errors import SchemaMismatch
from .model import SystemParams, build_eigenframe
from .noise import MarkovSpec, NoiseClass, NoiseRanges, derive_rng, draw_class_params

HEADER = ["label", "class", "param_name", "param_value", "sigma", "xi_i", "xi_ii", "xi_iii",
          "stderr_i", "stderr_ii", "stderr_iii", "point_seed"]


@dataclass(frozen=True)
class ProtocolConfig:
    """Everything needed to turn one set of noise parameters into features."""

    system: SystemParams = field(default_factory=SystemParams)
    timing: ProtocolTiming = field(default_factory=ProtocolTiming)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    n_realizations: int = 500

    @classmethod
    def from_run(cls, cfg: RunConfig) -> "ProtocolConfig":
        return cls(cfg.physical, cfg.pulses, cfg.integrator, cfg.dataset.n_realizations)


@dataclass(frozen=True)
class FeatureVector:
    label: int
    xi: tuple[float, float, float]
    stderr: tuple[float, float, float]
    param_name: str
    param_value: float
    sigma: float
    point_seed: int

    @property
    def noise_class(self) -> NoiseClass:
        return NoiseClass(self.label)


@dataclass
class Dataset:
    rows: list[FeatureVector]
    meta: dict = field(default_factory=dict)

    def features(self) -> np.ndarray:
        return np.array([r.xi for r in self.rows], dtype=float).reshape(-1, 3)

    def labels(self) -> np.ndarray:
        return np.array([r.label for r in self.rows], dtype=int)

    def subset(self, idx) -> "Dataset":
        return Dataset([self.rows[i] for i in idx], dict(self.meta))

    def __len__(self):
        return len(self.rows)


def point_seed(master_seed: int, label: int, index: int) -> int:
    state = np.random.SeedSequence(int(master_seed), spawn_key=(int(label), int(index))).generate_state(2, np.uint32)
    return int(state[0]) << 32 | int(state[1])


def generate_point(cls: NoiseClass, seed: int, ranges: NoiseRanges = NoiseRanges(),
                   protocol: ProtocolConfig = ProtocolConfig()) -> FeatureVector:
    """Draw class parameters once, then average over realizations per driving condition.

    The same realization streams are reused for all three conditions.
    """
    cls = NoiseClass(cls)
    spec = draw_class_params(cls, derive_rng(seed), ranges)
    frame = build_eigenframe(protocol.system)
    mc = MonteCarloConfig(protocol.n_realizations, master_seed=seed)
    xi, err = [], []
    for cond in CONDITIONS:
        d = make_protocol(cond, protocol.timing, frame)
        m, s = monte_carlo_xi(protocol.system, d, spec, mc, protocol.integrator)
        xi.append(m)
        err.append(s)
    if isinstance(spec, MarkovSpec):
        name, value, sigma = "gamma", spec.gamma, 0.0
    elif cls is NoiseClass.QS_UNCORRELATED:
        name, value, sigma = "sigma", spec.sigma, spec.sigma
    else:
        name, value, sigma = "corr", spec.corr, spec.sigma
    return FeatureVector(int(cls), tuple(xi), tuple(err), name, float(value), float(sigma), int(seed))


def _point_job(args):
    return generate_point(*args)


def generate_dataset(cfg: RunConfig, workers: int | None = None, progress=None) -> Dataset:
    """Rows in class-major, point-index-minor order regardless of execution order."""
    cfg.validate()
    protocol = ProtocolConfig.from_run(cfg)
    jobs = [(cls, point_seed(cfg.dataset.master_seed, cls, k), cfg.noise, protocol)
            for cls in NoiseClass for k in range(cfg.dataset.per_class)]
    workers = cfg.dataset.workers if workers is None else workers
    rows = []
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            for row in ex.map(_point_job, jobs, chunksize=4):
                rows.append(row)
                if progress:
                    progress(len(rows), len(jobs))
    else:
        for job in jobs:
            rows.append(_point_job(job))
            if progress:
                progress(len(rows), len(jobs))
    recorded = cfg.to_dict()
    recorded.pop("output_dir", None)
    meta = {"config": recorded, "config_digest": cfg.digest(), "version": __version__,
            "schema": HEADER, "rows": len(rows)}
    return Dataset(rows, meta)


# ---------------------------------------------------------------- CSV


def _g(x: float) -> str:
    return format(float(x), ".17g")


def to_csv_text(d: Dataset) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for r in d.rows:
        w.writerow([r.label, NoiseClass(r.label).name, r.param_name, _g(r.param_value), _g(r.sigma),
                    *map(_g, r.xi), *map(_g, r.stderr), r.point_seed])
    return buf.getvalue()


def atomic_write(path: str | Path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def meta_path(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".meta.json")


def save_csv(d: Dataset, path: str | Path):
    atomic_write(path, to_csv_text(d))
    atomic_write(meta_path(path), json.dumps(d.meta, indent=2, sort_keys=True) + "\n")


def load_csv(path: str | Path) -> Dataset:
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != HEADER:
            raise SchemaMismatch("unexpected header %r" % (header,))
        rows = []
        for n, rec in enumerate(reader, start=2):
            if len(rec) != len(HEADER):
                raise SchemaMismatch("line %d: expected %d columns, got %d" % (n, len(HEADER), len(rec)))
            try:
                label = int(rec[0])
                if NoiseClass(label).name != rec[1]:
                    raise SchemaMismatch("line %d: label %s does not match class %s" % (n, rec[0], rec[1]))
                f = [float(x) for x in rec[3:11]]
                rows.append(FeatureVector(label, tuple(f[2:5]), tuple(f[5:8]), rec[2], f[0], f[1], int(rec[11])))
            except ValueError as exc:
                raise SchemaMismatch("line %d: %s" % (n, exc)) from exc
    mp = meta_path(path)
    meta = json.loads(mp.read_text()) if mp.exists() else {}
    return Dataset(rows, meta)
