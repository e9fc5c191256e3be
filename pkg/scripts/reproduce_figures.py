"""Run the bundled figure scenarios and collect their CSV/metadata outputs.

    python scripts/reproduce_figures.py --out results [--only fig2_100m fig4a] [--plot]

``--plot`` renders a PNG per scenario and needs matplotlib, which is not a
package dependency.
"""

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path

from kerrswitch.cli import main as cli_main
from kerrswitch.scenario import bundled_names

log = logging.getLogger("reproduce")


def _plot(csv_path: Path, png_path: Path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with open(csv_path) as fh:
        rows = list(csv.reader(fh))
    header, data = rows[0], [[float(v) for v in r] for r in rows[1:]]
    cols = list(zip(*data))
    fig, ax = plt.subplots(figsize=(6, 4))
    if header[0] == "signal_nm":
        for wl in sorted(set(cols[0])):
            pts = [(b, n) for s, b, n, _ in data if s == wl]
            ax.plot(*zip(*pts), label=f"{wl:g} nm")
        ax.set_xlabel("B tau_w")
        ax.set_ylabel("N_R")
        ax.legend()
    else:
        for name, y in zip(header[1:], cols[1:]):
            ax.plot(cols[0], y, label=name)
        ax.set_xlabel(header[0])
        ax.legend()
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--only", nargs="*", help="subset of bundled scenario names")
    ap.add_argument("--plot", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    names = args.only or bundled_names()
    out = Path(args.out)
    status = 0
    for name in names:
        t0 = time.perf_counter()
        code = cli_main(["simulate", name, "--out", str(out)])
        log.info("%-12s exit %d  %.1f s", name, code, time.perf_counter() - t0)
        if code:
            status = code
            continue
        meta = json.loads((out / f"{name}.meta.json").read_text())
        if "widths" in meta:
            for z, w in meta["widths"].items():
                log.info("    z = %s m: FWHM %.2f ps (multimodal %s), rms-equivalent %.2f ps",
                         z, w["fwhm_ps"], w["multimodal"], w["rms_equivalent_fwhm_ps"])
        if args.plot:
            _plot(out / f"{name}.csv", out / f"{name}.png")
    return status


if __name__ == "__main__":
    sys.exit(main())
