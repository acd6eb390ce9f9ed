"""Choosing a component count from the explained-variance curve.

Synthetic data with a planted low-dimensional structure: the first few
components carry most of the variance, the rest is isotropic noise. The
helper picks the smallest count whose cumulative ratio clears a threshold.
"""

import numpy as np

from policysum import choose_n_comp_by_variance, pca_fit, pca_transform

rng = np.random.default_rng(0)
n, d, signal_rank = 300, 40, 5

signal = rng.normal(size=(n, signal_rank)) @ (rng.normal(size=(signal_rank, d)) * 3.0)
noise = rng.normal(size=(n, d)) * 0.4
data = signal + noise

model = pca_fit(data, n_comp=d)

print("component  eigenvalue  ratio   cumulative")
cumulative = 0.0
for i in range(10):
    cumulative += model.explained_variance_ratio[i]
    print(f"{i + 1:9d}  {model.eigenvalues[i]:10.4f}  {model.explained_variance_ratio[i]:.4f}  {cumulative:.4f}")
print("...")

for threshold in (0.85, 0.90, 0.95):
    picked = choose_n_comp_by_variance(model, threshold)
    print(f"threshold {threshold:.2f} -> {picked} components")

reduced = pca_transform(model, data)[:, :signal_rank]
print(f"\nprojection of the full dataset onto the top {signal_rank} axes "
      f"has shape {reduced.shape}")
