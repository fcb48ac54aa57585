"""Consensus quality as the pool grows, ten repeats per size."""

import numpy as np

from gpec import Dataset, Partition
from gpec.cli import PipelineConfig, run_repeats, summarize

rng = np.random.default_rng(7)
centres = np.array([[0.0, 0.0], [4.0, 0.0], [2.0, 3.46], [6.0, 3.46]])
y = np.repeat([0, 1, 2, 3], 75)
data = Dataset(centres[y] + rng.normal(size=(300, 2)), Partition(y))

print("   m    NMI          ARI          base pool NMI")
for m in (2, 5, 10, 20, 40):
    records, _ = run_repeats(data, PipelineConfig(k=4, m=m, repeats=10, seed=0))
    s = summarize(records)
    print(f"{m:>4}   {s['nmi']['mean']:.3f}±{s['nmi']['std']:.3f}  {s['ari']['mean']:.3f}±{s['ari']['std']:.3f}"
          f"  {s['base_pool_nmi']['mean']:.3f}")
