"""Consensus clustering of three Gaussian blobs, start to finish."""

import numpy as np

from gpec import Dataset, Partition, generate_pool, nmi, run_pipeline
from gpec.metrics import format_table

rng = np.random.default_rng(0)

# three blobs on a triangle, unit variance, centres 5 apart
centres = np.array([[0.0, 0.0], [5.0, 0.0], [2.5, 4.33]])
y = np.repeat([0, 1, 2], 100)
x = centres[y] + rng.normal(size=(300, 2))
data = Dataset(x, Partition(y), "blobs")

# 20 k-means runs with k drawn from [3, 18]
pool = generate_pool(data, m=20, seed=1)
member_nmi = [nmi(p, data.truth) for p in pool]
print(f"pool: m={pool.m}, cluster counts {sorted(p.num_clusters for p in pool)}")
print(f"base clusterings: mean NMI {np.mean(member_nmi):.3f}, best {np.max(member_nmi):.3f}")

mats = {}
res = run_pipeline(pool, k=3, alpha=0.1, seed=2, truth=data.truth, matrices=mats)
print()
print(format_table(res.metrics))

# how much of the CA matrix survives the threshold
nz = np.count_nonzero(mats["h"]) / mats["h"].size
print(f"\nhigh-confidence entries kept: {100 * nz:.1f}%")

# learned weights and the optimiser trace
print(f"weights: min {res.weights.min():.4f} max {res.weights.max():.4f} entropy {res.weight_entropy:.4f}"
      f" (uniform {np.log(pool.m):.4f})")
for row in res.optimizer.trajectory:
    print(f"  iter {row['iter']:>2}  J={row['objective']:.6f}  step={row['step']:.3g}")
print(f"stopped: {res.optimizer.stop_reason}")
