"""Excess risk against n for three ensemble-size schedules.

m grows like log log n, log n or sqrt n.  Each grid point subsamples the
data, builds a fresh pool and scores the CA embedding against the label
kernel.  Curves and fits are written as CSV/JSON beside this script.
"""

from pathlib import Path

import numpy as np

from gpec import Dataset, Partition, excess_risk_experiment

rng = np.random.default_rng(0)
centres = np.array([[0.0, 0.0], [4.0, 0.0], [2.0, 3.46]])
y = np.repeat([0, 1, 2], 400)
data = Dataset(centres[y] + rng.normal(size=(1200, 2)), Partition(y))

grid = list(range(100, 1201, 100))
here = Path(__file__).parent
for schedule in ("loglog", "log", "sqrt"):
    curve = excess_risk_experiment(data, grid, schedule, seed=0)
    a1, a2, gap = curve.fit
    print(f"{schedule:>6}: m {curve.ms[0]}..{curve.ms[-1]}, final loss {curve.losses[-1]:.2e}, "
          f"spearman {curve.spearman():+.2f}, fit a1={a1:.3g} a2={a2:.3g} gap={gap:.3g}")
    (here / f"scaling_{schedule}.csv").write_text(curve.to_csv())
    (here / f"scaling_{schedule}.json").write_text(curve.to_json())
