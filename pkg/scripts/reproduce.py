"""End-to-end pipeline: dataset -> classifier -> confusion matrix.

    python3 scripts/reproduce.py --out runs/desk            # desk scale (500/class, N=200)
    python3 scripts/reproduce.py --out runs/quick --quick   # 40/class, N=40, about a minute

Reuses the cached desk dataset from ``build_desk_dataset.py`` when present.
"""

import argparse
import json
import shutil
import sys
from pathlib import Path

from corrsense.cli import main as cli
from corrsense.config import DatasetConfig, RunConfig
from corrsense.dataset import meta_path

ROOT = Path(__file__).resolve().parents[1]


def run(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/desk")
    ap.add_argument("--quick", action="store_true", help="small dataset for a smoke run")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args(argv)

    cfg = RunConfig.desk_scale()
    if args.quick:
        cfg = cfg.replace(dataset=DatasetConfig(per_class=40, n_realizations=40))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg = cfg.replace(output_dir=str(out))
    (out / "config.json").write_text(cfg.to_json())
    base = ["--config", str(out / "config.json")]

    cached = ROOT / "tests" / ".cache" / ("desk-" + cfg.data_digest()) / "dataset.csv"
    if cached.exists():
        print("using cached dataset", cached)
        shutil.copyfile(cached, out / "dataset.csv")
        shutil.copyfile(meta_path(cached), meta_path(out / "dataset.csv"))
    elif cli(["gen-data", *base, "--workers", str(args.workers), "--progress"]):
        return 1
    for step in (["train", *base], ["eval", *base]):
        code = cli(step)
        if code:
            return code
    print(json.dumps({"outputs": sorted(p.name for p in out.iterdir())}))
    return 0


if __name__ == "__main__":
    sys.exit(run())
