"""How consistently do two benchmarks rank the same models?

Walks through the rank-agreement toolkit on a small hand-made score
matrix: plain Kendall tau, the significance-aware tau-b that treats
statistically indistinguishable scores as ties, benchmark-pair agreement
matrices, and per-benchmark / per-category averages.
"""

import numpy as np

from benchrank import (
    BenchmarkRecord,
    SignificanceConfig,
    agreement_matrix,
    bits_per_byte,
    category_agreement,
    kendall_tau,
    kendall_tau_b,
    make_score_matrix,
    mean_agreement,
    significant_difference,
)

# Five models, four benchmarks. The two QA-style benchmarks mostly agree,
# the arithmetic benchmark disagrees with everything, and the last row is
# a perplexity-style metric where LOWER is better.
models = ["gamma-1b", "gamma-3b", "delta-7b", "delta-13b", "epsilon-7b"]
scores = np.array(
    [
        [0.42, 0.55, 0.61, 0.70, 0.66],  # qa-open
        [0.40, 0.52, 0.63, 0.68, 0.64],  # qa-closed
        [0.30, 0.28, 0.45, 0.41, 0.52],  # arithmetic
        [1.31, 1.12, 0.98, 0.91, 0.95],  # wiki bits per byte
    ]
)
stderrs = np.full_like(scores, 0.015)
m = make_score_matrix(
    ["qa-open", "qa-closed", "arithmetic", "wiki-bpb"],
    models,
    scores,
    stderrs,
    n_items=[1000, 1000, 800, None],
    direction=["higher", "higher", "higher", "lower"],
)

print("Plain tau, qa-open vs qa-closed:", kendall_tau(scores[0], scores[1]))
print("Plain tau, qa-open vs arithmetic:", kendall_tau(scores[0], scores[2]))

# With standard errors in hand we can ask whether each pairwise gap is
# statistically meaningful before letting it influence the correlation.
cfg = SignificanceConfig(alpha=0.05)
print(
    "\n0.70 vs 0.66 at se 0.015 significant?",
    significant_difference(0.70, 0.015, 0.66, 0.015, cfg),
)
taub = kendall_tau_b(scores[0], stderrs[0], scores[1], stderrs[1], cfg)
print("tau-b, qa-open vs qa-closed (ties from noise):", taub)

# The full pairwise picture. Orientation is handled internally, so the
# bits-per-byte row correlates positively with accuracies when the
# underlying ranking agrees.
am = agreement_matrix(m, method="tau", cfg=cfg)
print("\nAgreement matrix (tau):")
for b, row in zip(am.benchmark_ids, am.values):
    print(f"  {b:<11}", np.round(row, 3))

means = mean_agreement(am)
print("\nMean agreement per benchmark:")
for b, v in zip(means.benchmark_ids, means.means):
    print(f"  {b:<11} {v:+.3f}")

cats = [
    BenchmarkRecord("qa-open", "QA"),
    BenchmarkRecord("qa-closed", "QA"),
    BenchmarkRecord("arithmetic", "Math"),
    BenchmarkRecord("wiki-bpb", "PPL"),
]
ca = category_agreement(am, cats)
print("\nCategory agreement (intra-QA vs QA-Math vs QA-PPL):")
print("  QA/QA  ", round(ca.entry("QA", "QA"), 3))
print("  QA/Math", round(ca.entry("QA", "Math"), 3))
print("  QA/PPL ", round(ca.entry("QA", "PPL"), 3))

# Perplexity bookkeeping: converting a summed negative log-likelihood in
# nats into the tokenizer-independent bits-per-byte used above.
print("\n1000 nats over 500 bytes =", round(bits_per_byte(1000, 500), 5), "bits/byte")
