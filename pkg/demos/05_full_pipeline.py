"""End-to-end run at miniature scale: simulate, train, infer, diagnose.

The same six subcommands the ``ucinfer`` executable exposes, driven here
through the library so the intermediate objects can be inspected. Figures
are written via the separate ucviz package when it is installed.
"""

import json
import os
import tempfile

import numpy as np

from ucinfer.cli import main
from ucinfer.core import load_packaged_run_config

work = tempfile.mkdtemp(prefix="ucinfer-demo-")
cfg = load_packaged_run_config("desk_config.json")
cfg["train"].update({"epochs": 8, "hidden_sizes": [48, 48],
                     "n_transforms": 2, "batch_size": 32})
config = os.path.join(work, "config.json")
with open(config, "w") as fh:
    json.dump(cfg, fh)

paths = {name: os.path.join(work, name) for name in
         ("train.jsonl", "val.jsonl", "model.ckpt", "obs.json",
          "samples.csv", "corner.json", "coverage.csv", "ppc.csv")}

print("1) simulate training and validation sets")
main(["simulate", "--config", config, "--n", "192", "--out",
      paths["train.jsonl"], "--workers", "2"])
main(["simulate", "--config", config, "--n", "96", "--seed", "99", "--out",
      paths["val.jsonl"]])

print("2) train the flow")
main(["train", "--config", config, "--train", paths["train.jsonl"],
      "--val", paths["val.jsonl"], "--out", paths["model.ckpt"]])

print("3) pick one held-out observation and sample its cost posterior")
record = json.loads(open(paths["val.jsonl"]).readline())
with open(paths["obs.json"], "w") as fh:
    json.dump({"schema_version": 1, "g": record["g"],
               "demand": record["demand"], "theta_star": record["theta"]}, fh)
main(["infer", "--model", paths["model.ckpt"], "--obs", paths["obs.json"],
      "--samples", "256", "--out", paths["samples.csv"],
      "--corner-out", paths["corner.json"], "--seed", "1"])
samples = np.genfromtxt(paths["samples.csv"], delimiter=",", skip_header=1)
print("   true theta:", np.round(record["theta"], 2))
print("   posterior mean:", np.round(samples.mean(axis=0), 2))

print("4) calibration and predictive checks")
main(["coverage", "--config", config, "--model", paths["model.ckpt"],
      "--test", paths["val.jsonl"], "--samples", "128", "--out",
      paths["coverage.csv"]])
main(["ppc", "--config", config, "--model", paths["model.ckpt"],
      "--obs", paths["obs.json"], "--samples", "16", "--workers", "2",
      "--out", paths["ppc.csv"]])

try:
    from ucviz import corner as viz_corner
    from ucviz import coverage as viz_coverage

    print("5) render figures (ucviz)")
    viz_corner.main(["--in", paths["corner.json"],
                     "--out", os.path.join(work, "corner.png")])
    viz_coverage.main(["--in", paths["coverage.csv"],
                       "--out", os.path.join(work, "coverage.png")])
except ImportError:
    print("5) ucviz not installed; skipping figure rendering")

print(f"\nartifacts in {work}")
