"""Run the bundled figure configs through the CLI and render SVG charts.

Usage: python3 demos/05_reproduce_figures.py [OUTDIR] [TRIALS]

The bundled configs use 10^4 trials per point; pass a smaller TRIALS for a
quick look (the seed stays fixed, so results are still reproducible).
"""
import json
import sys
import tempfile
from pathlib import Path

from ufsdetect.cli import main
from ufsdetect.config import BUNDLED, bundled_path

out = Path(sys.argv[1] if len(sys.argv) > 1 else "figures")
trials = int(sys.argv[2]) if len(sys.argv) > 2 else 1000
out.mkdir(parents=True, exist_ok=True)

plots = {
    "fig2": [("miss_rate", True)],
    "fig3": [("miss_rate", False)],
    "fig4": [("miss_rate", False)],
    "fig5": [("channel_mse", True)],
}

with tempfile.TemporaryDirectory() as tmp:
    for name in BUNDLED:
        doc = json.loads(bundled_path(name).read_text())
        doc["trials"] = trials
        cfg = Path(tmp) / f"{name}.json"
        cfg.write_text(json.dumps(doc))
        csv = out / f"{name}.csv"
        code = main(["simulate", "--config", str(cfg), "--out", str(csv)])
        print(f"{name}: simulate exit {code} -> {csv}")
        for metric, overlay in plots[name]:
            svg = out / f"{name}_{metric}.svg"
            args = ["plot", str(csv), "--out", str(svg), "--metric", metric, "--log-y"]
            if overlay:
                args.append("--overlay-bound")
            print(f"  plot exit {main(args)} -> {svg}")
