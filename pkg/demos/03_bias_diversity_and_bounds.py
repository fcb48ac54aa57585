"""The bias/diversity split of the kernel error, and the two bounds."""

import numpy as np

from gpec import BoundParams, bias_diversity, excess_risk_bound, generalization_bound, generate_pool, partition_kernel
from gpec import Dataset, Partition

rng = np.random.default_rng(5)
centres = np.array([[0.0, 0.0], [5.0, 0.0], [2.5, 4.33]])
y = np.repeat([0, 1, 2], 60)
data = Dataset(centres[y] + rng.normal(size=(180, 2)), Partition(y))
kstar = partition_kernel(data.truth)

# the error of the averaged kernel is mean bias minus mean diversity
for m in (2, 5, 10, 20, 40):
    kernels = [partition_kernel(p) for p in generate_pool(data, m, seed=m)]
    r = bias_diversity(kernels, np.full(m, 1.0 / m), kstar)
    print(f"m={m:>2}  error {r.lhs:8.3f}  bias/m {r.bias / m:8.3f}  diversity/m {r.diversity / m:8.3f}"
          f"  residual {r.identity_residual:.1e}")

# non-uniform weights: the identity holds for any point on the simplex
kernels = [partition_kernel(p) for p in generate_pool(data, 8, seed=0)]
w = rng.dirichlet(np.ones(8))
r = bias_diversity(kernels, w, kstar)
print(f"\nrandom weights: error {r.lhs:.6f} = (bias - diversity)/m {r.rhs:.6f}")

print("\n      n      m   generalisation   excess risk")
for n in (100, 1000, 10000):
    for m in (10, 100, 1000):
        p = BoundParams(n=n, m=m, delta=0.1, c=1.0, c0=1.0, k=3)
        print(f"{n:>7} {m:>6}   {generalization_bound(p):14.4f}   {excess_risk_bound(p):11.4f}")
