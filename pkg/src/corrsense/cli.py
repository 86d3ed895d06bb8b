"""``corrsense`` command line: simulate, gen-data, train, eval, config.

Exit codes: 0 success, 2 configuration error, 3 I/O or file-format error,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .classifier import MlpModel, N_CLASSES, confusion_csv, evaluate, split, train
from .config import RunConfig
from .control import DrivingCondition, make_protocol
from .dataset import atomic_write, generate_dataset, load_csv, save_csv
from .dynamics import propagate_lindblad, propagate_quasistatic
from .errors import BadRange, ConfigError, CorrsenseError, SchemaMismatch, StepTooLarge
from .model import build_eigenframe
from .noise import MarkovSpec, NoiseClass, QuasistaticSpec, derive_rng, sample_quasistatic
from .svg import heatmap, line_plot

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4
BACKEND_FLAGS = {"rwa": "rotating_rwa", "lab": "lab_frame"}
CONDITION_FLAGS = {"I": DrivingCondition.COND_I, "II": DrivingCondition.COND_II, "III": DrivingCondition.COND_III}
CLASS_NAMES = [c.name for c in NoiseClass]


def resolve_config(args) -> RunConfig:
    """Config file (or defaults) with command-line overrides applied, fully validated."""
    cfg = RunConfig.load(args.config) if getattr(args, "config", None) else RunConfig()
    if getattr(args, "seed", None) is not None:
        seed = args.seed
        cfg = cfg.replace(dataset=dataclasses.replace(cfg.dataset, master_seed=seed),
                          classifier=dataclasses.replace(cfg.classifier, split_seed=seed, init_seed=seed))
    if getattr(args, "per_class", None) is not None:
        cfg = cfg.replace(dataset=dataclasses.replace(cfg.dataset, per_class=args.per_class))
    if getattr(args, "realizations", None) is not None:
        cfg = cfg.replace(dataset=dataclasses.replace(cfg.dataset, n_realizations=args.realizations))
    if getattr(args, "workers", None) is not None:
        cfg = cfg.replace(dataset=dataclasses.replace(cfg.dataset, workers=args.workers))
    if getattr(args, "backend", None) is not None:
        cfg = cfg.replace(integrator=dataclasses.replace(cfg.integrator, backend=BACKEND_FLAGS[args.backend]))
    if getattr(args, "out", None) is not None:
        cfg = cfg.replace(output_dir=args.out)
    return cfg.validate()


def _out(cfg: RunConfig) -> Path:
    return Path(cfg.output_dir)


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


# ---------------------------------------------------------------- commands


def cmd_config(args) -> int:
    cfg = RunConfig() if args.print_default else resolve_config(args)
    sys.stdout.write(cfg.to_json())
    return EXIT_OK


def _class_spec(cfg: RunConfig, name: str, param: float | None):
    if name == "none":
        return None
    cls = NoiseClass[name]
    if cls.markovian:
        gamma = cfg.noise.gamma_lo if param is None else param
        return MarkovSpec(gamma, 1 if cls is NoiseClass.MK_CORRELATED else -1)
    if cls is NoiseClass.QS_UNCORRELATED:
        return QuasistaticSpec(cfg.noise.sigma_lo if param is None else param, 0.0)
    default = 1.0 if cls is NoiseClass.QS_CORRELATED else -1.0
    return QuasistaticSpec(cfg.noise.sigma0, default if param is None else param)


def trace_table(res, t_start: float, window: float, dt_out: float) -> np.ndarray:
    """Rows (t, P0, P1, P2, P3, P_ee) on ``t_start + k*dt_out``, k = 0..floor(window/dt_out)."""
    n = int(np.floor(window / dt_out + 1e-9)) + 1
    t = t_start + dt_out * np.arange(n)
    cols = [np.interp(t, res.times, res.population_trace[:, k]) for k in range(4)]
    cols.append(np.interp(t, res.times, res.xi_trace))
    return np.column_stack([t] + cols)


def cmd_simulate(args) -> int:
    cfg = resolve_config(args)
    if not args.dt_out > 0:
        raise ConfigError("--dt-out must be positive")
    frame = build_eigenframe(cfg.physical)
    d = make_protocol(CONDITION_FLAGS[args.condition], cfg.pulses, frame)
    spec = _class_spec(cfg, args.noise_class, args.param)
    seed = cfg.dataset.master_seed
    # record at every integrator step; the table is interpolated onto the output grid
    if isinstance(spec, MarkovSpec):
        res = propagate_lindblad(cfg.physical, d, spec, cfg.integrator, dt_output=0.0)
    else:
        draw = sample_quasistatic(spec or QuasistaticSpec(0.0, 0.0), derive_rng(seed, 0))
        res = propagate_quasistatic(cfg.physical, d, draw, cfg.integrator, dt_output=0.0)
    table = trace_table(res, d.t_start, d.t_final - d.t_start, args.dt_out)
    lines = ["t,P0,P1,P2,P3,P_ee"] + [",".join(format(v, ".17g") for v in row) for row in table]
    path = _out(cfg) / (args.trace or "trace.csv")
    atomic_write(path, "\n".join(lines) + "\n")
    summary = {"condition": args.condition, "class": args.noise_class,
               "populations": [float(x) for x in res.populations], "xi": res.xi_r,
               "max_P3": float(res.population_trace[:, 3].max()), "trace": str(path)}
    print(json.dumps(summary))
    return EXIT_OK


def cmd_gen_data(args) -> int:
    cfg = resolve_config(args)

    def progress(done, n):
        if args.progress:
            print("\r%d/%d points" % (done, n), end="" if done < n else "\n", file=sys.stderr, flush=True)

    data = generate_dataset(cfg, progress=progress)
    path = _out(cfg) / "dataset.csv"
    save_csv(data, path)
    print("wrote %d rows (%d per class) to %s" % (len(data), cfg.dataset.per_class, path))
    return EXIT_OK


def _load_dataset(path):
    if not Path(path).is_file():
        raise FileNotFoundError("dataset not found: %s" % path)
    return load_csv(path)


def cmd_train(args) -> int:
    cfg = resolve_config(args)
    data = _load_dataset(args.data or _out(cfg) / "dataset.csv")
    hp = cfg.classifier
    tr, va, te = split(data.labels(), hp.fractions, hp.split_seed)
    x, y = data.features(), data.labels()
    model, report = train(hp.init_seed, x[tr], y[tr], x[va], y[va], hp, config_hash=cfg.digest())
    report.test_acc = evaluate(model, x[te], y[te]).accuracy if len(te) else None
    out = _out(cfg)
    atomic_write(out / "model.json", model.to_json())
    atomic_write(out / "train_report.csv", report.to_csv())
    epochs = np.arange(len(report.train_acc))
    atomic_write(out / "accuracy.svg", line_plot({"training": (epochs, report.train_acc),
                                                  "validation": (epochs, report.val_acc)},
                                                 "Accuracy vs epoch", "epoch", "accuracy"))
    print("trained %d epochs (best %d); test accuracy %s" % (report.epochs, report.best_epoch,
                                                             "n/a" if report.test_acc is None else
                                                             "%.4f" % report.test_acc))
    return EXIT_OK


def cmd_eval(args) -> int:
    cfg = resolve_config(args)
    model_path = Path(args.model or _out(cfg) / "model.json")
    if not model_path.is_file():
        raise FileNotFoundError("model not found: %s" % model_path)
    model = MlpModel.from_json(model_path.read_text())
    data = _load_dataset(args.data or _out(cfg) / "dataset.csv")
    x, y = data.features(), data.labels()
    if args.all_rows:
        te = np.arange(len(y))
    else:
        te = split(y, cfg.classifier.fractions, cfg.classifier.split_seed)[2]
    m = evaluate(model, x[te], y[te])
    out = _out(cfg)
    names = CLASS_NAMES[:N_CLASSES]
    atomic_write(out / "confusion.csv", confusion_csv(m.confusion, names))
    atomic_write(out / "confusion.svg", heatmap(m.confusion, names, names, "Confusion matrix"))
    print("five_class=%.4f nm_vs_mk=%.4f within_nm=%.4f within_mk=%.4f"
          % (m.accuracy, m.nm_vs_mk, m.within_nm, m.within_mk))
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON run configuration")
    common.add_argument("--seed", type=_u64, metavar="U64", help="override every seed in the configuration")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--backend", choices=sorted(BACKEND_FLAGS), help="integration backend")

    parser = argparse.ArgumentParser(prog="corrsense", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version="%(prog)s " + __version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="single run, population trace CSV")
    p.add_argument("--condition", choices=list(CONDITION_FLAGS), default="I")
    p.add_argument("--class", dest="noise_class", choices=["none"] + CLASS_NAMES, default="none")
    p.add_argument("--param", type=float, help="corr (QS correlated/anti), sigma (QS uncorrelated) or gamma (MK)")
    p.add_argument("--dt-out", type=float, default=1.0, help="trace sampling interval")
    p.add_argument("--trace", metavar="NAME", help="trace file name inside --out (default trace.csv)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gen-data", parents=[common], help="generate the labelled dataset")
    p.add_argument("--per-class", type=int, metavar="N")
    p.add_argument("--realizations", type=int, metavar="N", help="Monte-Carlo realizations per point")
    p.add_argument("--workers", type=int, metavar="N")
    p.add_argument("--progress", action="store_true")
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", parents=[common], help="train the classifier")
    p.add_argument("--data", metavar="CSV")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", parents=[common], help="confusion matrix and hierarchical accuracies")
    p.add_argument("--model", metavar="JSON")
    p.add_argument("--data", metavar="CSV")
    p.add_argument("--all-rows", action="store_true", help="score every row instead of the test split")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("config", parents=[common], help="print the (default or resolved) configuration")
    p.add_argument("--print-default", action="store_true")
    p.set_defaults(func=cmd_config)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, BadRange, StepTooLarge) as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, SchemaMismatch) as exc:
        print("i/o error: %s" % exc, file=sys.stderr)
        return EXIT_IO
    except (CorrsenseError, ArithmeticError, ValueError) as exc:
        print("numerical error: %s" % exc, file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
