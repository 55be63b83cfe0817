"""Corrupt one view of a synthetic dataset and watch the learned weights.

Run: python demos/outlier_weights.py
"""
import numpy as np

from rmsc import SolverConfig, SyntheticSpec, fit_rmsc, generate_synthetic, normalize_unit_l2

# three 5-dim subspaces in two 60-dim views; 20% of columns replaced in view 0 only
spec = SyntheticSpec(n_clusters=3, samples_per_cluster=20, subspace_dim=5, ambient_dims=(60, 60),
                     noise_sigma=0.05, outlier_fraction=0.2, outlier_views=(0,), seed=0)
ds, outliers = generate_synthetic(spec)
ds = normalize_unit_l2(ds)
clean = np.setdiff1d(np.arange(ds.n_samples), outliers)

reps, P, trace = fit_rmsc(ds, SolverConfig())
print(f"converged={trace.converged} after {trace.iterations_run} iterations")
print("objective:", " ".join(f"{f:.3f}" for f in trace.objective_values))

print(f"\nview 0 mean weight: outliers {P[0, outliers].mean():.3f}, clean {P[0, clean].mean():.3f}")
print(f"view 1 mean weight on the same outlier columns: {P[1, outliers].mean():.3f}")

lowest = np.argsort(P[0])[:len(outliers)]
print(f"lowest-weight columns of view 0 that are true outliers: "
      f"{len(set(lowest) & set(outliers))}/{len(outliers)}")

# the consensus leans on view 1 where view 0 is unreliable, so clusters survive
col_l1 = np.abs(reps.consensus).sum(axis=0)
print(f"consensus column l1: outliers {col_l1[outliers].mean():.3f}, clean {col_l1[clean].mean():.3f}")
