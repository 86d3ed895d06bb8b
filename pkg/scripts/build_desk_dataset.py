"""Generate (or reuse) the desk-scale dataset used by the reproduction check.

The CSV lands in ``tests/.cache/desk-<data digest>/dataset.csv`` so that the
acceptance suite can pick it up without regenerating.
"""

import sys
import time
from pathlib import Path

from corrsense.config import RunConfig
from corrsense.dataset import generate_dataset, save_csv

ROOT = Path(__file__).resolve().parents[1]


def cache_path(cfg: RunConfig) -> Path:
    return ROOT / "tests" / ".cache" / ("desk-" + cfg.data_digest()) / "dataset.csv"


def main():
    cfg = RunConfig.desk_scale()
    path = cache_path(cfg)
    if path.exists():
        print("cached:", path)
        return
    t0 = time.time()

    def progress(done, n):
        if done % 50 == 0 or done == n:
            print("%d/%d points, %.0f s" % (done, n, time.time() - t0), flush=True)

    data = generate_dataset(cfg, progress=progress)
    save_csv(data, path)
    print("wrote", path, "in %.0f s" % (time.time() - t0))


if __name__ == "__main__":
    sys.exit(main())
