"""Low-rank structure of a score matrix, and what pc1 tracks.

PCA over the models-by-benchmarks matrix: how much variance the first
principal component explains, and how its per-model scores line up with
pre-training compute (the 6 * parameters * tokens estimate).
"""

import numpy as np

from benchrank import (
    ComputeRecord,
    SyntheticConfig,
    compute_flops,
    explained_variance_share,
    fit_pca,
    generate,
    pc1_compute_correlation,
)

# A synthetic population of 15 models on 8 benchmarks. Preparation noise
# (prep_sd) gives each benchmark its own idiosyncratic opinion of models.
cfg = SyntheticConfig(
    n_models=15,
    n_benchmarks=8,
    seed=42,
    n_items=3000,
    prep_sd=0.5,
    benchmark_loading=np.linspace(0.8, 1.2, 8).tolist(),
    benchmark_bias=np.linspace(-0.3, 0.3, 8).tolist(),
)
m = generate(cfg, "direct")

result = fit_pca(m, preprocessing="center")
print("Explained variance ratios (top 5):", np.round(result.evr[:5], 3))
print("PC1 share:", round(explained_variance_share(result, 1), 3))
print("Top-5 share:", round(explained_variance_share(result, 5), 3))

# pc1 per model, against the latent compute grid the generator used.
flops = cfg.model_flops()
print("\nmodel        log10(flops)   pc1")
for mid, f, s in zip(result.model_ids, flops, result.pc1_scores):
    print(f"{mid:<12} {np.log10(f):>11.2f} {s:>9.3f}")

records = [ComputeRecord(mid, float(f)) for mid, f in zip(cfg.model_ids(), flops)]
tau = pc1_compute_correlation(result, records)
print("\nKendall tau between pc1 and log-compute:", round(tau, 3))

# The compute estimate itself, on two published-scale examples.
print("\n6ND rule:")
print("  8.03B params x 15000B tokens ->", compute_flops(8.03, 15000), "FLOPs")
print("  0.07B params x   300B tokens ->", compute_flops(0.07, 300), "FLOPs")
