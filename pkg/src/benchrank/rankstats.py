"""Rank-correlation statistics over benchmark score matrices.

Two correlation flavours are provided.  ``kendall_tau`` is the plain
statistic (C - D) / (n(n-1)/2) and refuses exact ties; ``kendall_tau_b``
treats a model pair as tied when the score difference fails a two-sided
z-test given the standard errors, and applies the usual tie adjustment
(C - D) / sqrt((C + D + Tx)(C + D + Ty)).  With all standard errors zero
and no exact ties the two agree bit for bit.

Undefined correlations are reported as :data:`~benchrank.core.DEGENERATE`,
never NaN, and every aggregation skips such cells and counts them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from .core import (
    CATEGORIES,
    DEGENERATE,
    BenchmarkRecord,
    Degenerate,
    DegenerateError,
    AgreementMatrix,
    ScoreMatrix,
    oriented_scores,
)


class TieError(ValueError):
    """Exact ties make plain Kendall's tau undefined; use tau-b instead."""


@dataclass(frozen=True)
class SignificanceConfig:
    """Two-sided pairwise z-test configuration.

    ``critical_z`` is derived from ``alpha`` when not given explicitly
    (1.959964 at the default alpha = 0.05).  The normal approximation is
    used because inputs are aggregate scores with externally supplied
    standard errors; degrees of freedom are not available.
    """

    alpha: float = 0.05
    critical_z: float | None = None

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.critical_z is None:
            object.__setattr__(self, "critical_z", NormalDist().inv_cdf(1.0 - self.alpha / 2.0))
        if not self.critical_z > 0:
            raise ValueError(f"critical_z must be > 0, got {self.critical_z}")


@dataclass(frozen=True, eq=False)
class CategoryAgreement:
    """Mean correlation per category pair.

    Diagonal cells average the unordered benchmark pairs inside one
    category; off-diagonal cells average every cross-category pair.
    ``undefined`` flags cells with no defined pair at all (singleton
    category on the diagonal, or all contributing cells degenerate);
    ``n_excluded`` counts degenerate benchmark pairs skipped per cell.
    """

    categories: tuple[str, ...]
    values: np.ndarray
    undefined: np.ndarray
    n_excluded: np.ndarray

    def entry(self, c1: str, c2: str) -> float:
        i = self.categories.index(c1)
        j = self.categories.index(c2)
        if self.undefined[i, j]:
            raise DegenerateError(f"category agreement ({c1}, {c2}) is undefined")
        return float(self.values[i, j])


@dataclass(frozen=True, eq=False)
class MeanAgreement:
    """Per-benchmark mean of off-diagonal agreement entries."""

    benchmark_ids: tuple[str, ...]
    means: np.ndarray
    n_excluded: np.ndarray


def _check_pair_lengths(x: np.ndarray, y: np.ndarray) -> int:
    if x.ndim != 1 or y.ndim != 1:
        raise ValueError("score vectors must be one-dimensional")
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise ValueError(f"need at least 2 entries, got {len(x)}")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise ValueError("non-finite score encountered")
    return len(x)


def kendall_tau(x, y) -> float:
    """Plain Kendall rank correlation of two score vectors.

    Counts concordant and discordant pairs over all unordered index pairs
    and divides once: (C - D) / (n(n-1)/2).  Exact ties within either
    vector raise :class:`TieError` (use :func:`kendall_tau_b` for tied or
    noisy data).  Integer counting keeps the result free of accumulation
    drift, so values are exactly reproducible.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = _check_pair_lengths(x, y)
    for name, v in (("x", x), ("y", y)):
        if len(np.unique(v)) != n:
            raise TieError(f"exact tie in {name}; plain tau is undefined under ties")
    iu, ju = np.triu_indices(n, k=1)
    sx = np.sign(x[iu] - x[ju]).astype(np.int64)
    sy = np.sign(y[iu] - y[ju]).astype(np.int64)
    c_minus_d = int(np.sum(sx * sy))
    return c_minus_d / (n * (n - 1) // 2)


def significant_difference(s1: float, se1: float, s2: float, se2: float, cfg: SignificanceConfig) -> bool:
    """Two-sided z-test: is |s1 - s2| significant given both standard errors?

    True iff |s1 - s2| / sqrt(se1^2 + se2^2) > critical_z.  When both
    standard errors are zero the test degenerates to exact inequality.
    Symmetric in its two (score, stderr) arguments.
    """
    for v in (s1, se1, s2, se2):
        if not math.isfinite(v):
            raise ValueError(f"non-finite input {v!r}")
    if se1 < 0 or se2 < 0:
        raise ValueError("standard errors must be >= 0")
    denom = math.sqrt(se1 * se1 + se2 * se2)
    if denom == 0.0:
        return s1 != s2
    return abs(s1 - s2) / denom > cfg.critical_z


def kendall_tau_b(x, se_x, y, se_y, cfg: SignificanceConfig) -> float | Degenerate:
    """Tie-adjusted Kendall correlation with significance-based ties.

    A pair is tied in a dimension when :func:`significant_difference`
    fails there.  Pairs tied only in x count toward Tx, tied only in y
    toward Ty; pairs tied in both dimensions are excluded from all four
    tallies.  Result: (C - D) / sqrt((C + D + Tx)(C + D + Ty)).

    Returns :data:`DEGENERATE` when either factor of the denominator is
    zero (every pair tied in one dimension) instead of NaN.  Tie calls are
    made pairwise and are deliberately non-transitive; no tie clustering
    is performed.
    """
    x = np.asarray(x, dtype=float)
    se_x = np.asarray(se_x, dtype=float)
    y = np.asarray(y, dtype=float)
    se_y = np.asarray(se_y, dtype=float)
    n = _check_pair_lengths(x, y)
    if len(se_x) != n or len(se_y) != n:
        raise ValueError("stderr vectors must match score vectors in length")
    c = d = tx = ty = 0
    for i in range(n - 1):
        for j in range(i + 1, n):
            tied_x = not significant_difference(x[i], se_x[i], x[j], se_x[j], cfg)
            tied_y = not significant_difference(y[i], se_y[i], y[j], se_y[j], cfg)
            if tied_x and tied_y:
                continue
            if tied_x:
                tx += 1
            elif tied_y:
                ty += 1
            elif (x[i] - x[j]) * (y[i] - y[j]) > 0:
                c += 1
            else:
                d += 1
    if c + d + tx == 0 or c + d + ty == 0:
        return DEGENERATE
    return (c - d) / math.sqrt((c + d + tx) * (c + d + ty))


def agreement_matrix(m: ScoreMatrix, method: str = "tau", cfg: SignificanceConfig | None = None) -> AgreementMatrix:
    """Pairwise rank agreement between every pair of benchmarks.

    Scores are oriented per benchmark first, so lower-is-better rows
    correlate positively with accuracy rows when rankings agree.  The
    diagonal is fixed to 1; degenerate tau-b cells are flagged, not NaN.
    """
    if method not in ("tau", "tau_b"):
        raise ValueError(f"method must be 'tau' or 'tau_b', got {method!r}")
    if m.n_benchmarks < 2:
        raise ValueError("need at least 2 benchmarks")
    if cfg is None:
        cfg = SignificanceConfig()
    oriented = [oriented_scores(m, b) for b in m.benchmark_ids]
    if method == "tau":
        for b, row in zip(m.benchmark_ids, oriented):
            if len(np.unique(row)) != len(row):
                raise TieError(f"benchmark {b!r} has exact score ties; use tau_b")
    nb = m.n_benchmarks
    values = np.zeros((nb, nb), dtype=float)
    degenerate = np.zeros((nb, nb), dtype=bool)
    np.fill_diagonal(values, 1.0)
    for a in range(nb - 1):
        for b in range(a + 1, nb):
            if method == "tau":
                cell: float | Degenerate = kendall_tau(oriented[a], oriented[b])
            else:
                cell = kendall_tau_b(oriented[a], m.stderrs[a], oriented[b], m.stderrs[b], cfg)
            if isinstance(cell, Degenerate):
                degenerate[a, b] = degenerate[b, a] = True
            else:
                values[a, b] = values[b, a] = cell
    values.setflags(write=False)
    degenerate.setflags(write=False)
    return AgreementMatrix(benchmark_ids=m.benchmark_ids, values=values, degenerate=degenerate)


def mean_agreement(am: AgreementMatrix) -> MeanAgreement:
    """Mean off-diagonal agreement per benchmark.

    Degenerate cells are excluded from the mean and counted per row; a row
    with no defined off-diagonal cell at all raises
    :class:`~benchrank.core.DegenerateError`.
    """
    nb = am.n_benchmarks
    if nb < 2:
        raise ValueError("need at least 2 benchmarks")
    means = np.zeros(nb, dtype=float)
    excluded = np.zeros(nb, dtype=np.int64)
    for i in range(nb):
        cells = [am.values[i, j] for j in range(nb) if j != i and not am.degenerate[i, j]]
        excluded[i] = sum(1 for j in range(nb) if j != i and am.degenerate[i, j])
        if not cells:
            raise DegenerateError(
                f"benchmark {am.benchmark_ids[i]!r}: every off-diagonal agreement cell is degenerate"
            )
        means[i] = float(np.mean(cells))
    means.setflags(write=False)
    excluded.setflags(write=False)
    return MeanAgreement(benchmark_ids=am.benchmark_ids, means=means, n_excluded=excluded)


def category_agreement(am: AgreementMatrix, cats: list[BenchmarkRecord]) -> CategoryAgreement:
    """Average agreement within and between benchmark categories.

    Off-diagonal entries average all pairs (a in c1, b in c2); diagonal
    entries average unordered distinct pairs inside the category
    (self-pairs excluded).  Every benchmark in the matrix must carry a
    category.  Categories appear in their canonical order.
    """
    by_benchmark = {}
    for rec in cats:
        if rec.benchmark_id in by_benchmark:
            raise ValueError(f"duplicate category record for benchmark {rec.benchmark_id!r}")
        by_benchmark[rec.benchmark_id] = rec.category
    missing = [b for b in am.benchmark_ids if b not in by_benchmark]
    if missing:
        raise ValueError(f"benchmarks without a category: {missing}")
    present = [c for c in CATEGORIES if any(by_benchmark[b] == c for b in am.benchmark_ids)]
    members = {c: [i for i, b in enumerate(am.benchmark_ids) if by_benchmark[b] == c] for c in present}
    nc = len(present)
    values = np.zeros((nc, nc), dtype=float)
    undefined = np.zeros((nc, nc), dtype=bool)
    excluded = np.zeros((nc, nc), dtype=np.int64)
    for ci in range(nc):
        for cj in range(ci, nc):
            if ci == cj:
                idx = members[present[ci]]
                pairs = [(a, b) for k, a in enumerate(idx) for b in idx[k + 1 :]]
            else:
                pairs = [(a, b) for a in members[present[ci]] for b in members[present[cj]]]
            cells = [am.values[a, b] for a, b in pairs if not am.degenerate[a, b]]
            n_skip = sum(1 for a, b in pairs if am.degenerate[a, b])
            excluded[ci, cj] = excluded[cj, ci] = n_skip
            if not cells:
                undefined[ci, cj] = undefined[cj, ci] = True
            else:
                values[ci, cj] = values[cj, ci] = float(np.mean(cells))
    for arr in (values, undefined, excluded):
        arr.setflags(write=False)
    return CategoryAgreement(
        categories=tuple(present), values=values, undefined=undefined, n_excluded=excluded
    )


def bits_per_byte(total_nll_nats: float, total_bytes: float) -> float:
    """Convert a summed negative log-likelihood in nats to bits per byte.

    BPB = total_nll_nats / (total_bytes * ln 2), a tokenizer-independent
    perplexity measure.
    """
    if total_bytes <= 0:
        raise ValueError(f"total_bytes must be > 0, got {total_bytes}")
    if total_nll_nats < 0:
        raise ValueError(f"total_nll_nats must be >= 0, got {total_nll_nats}")
    return total_nll_nats / (total_bytes * math.log(2.0))


def average_rank_vector(m: ScoreMatrix, subset: list[str]) -> np.ndarray:
    """Per-model mean oriented score over a subset of benchmarks.

    The subset must be direction-homogeneous (all accuracy-like or all
    perplexity-like): averaging raw values across mixed directions is
    meaningless.  The result feeds straight into a correlation against
    another averaged vector.  An all-constant output is a legitimate value
    here; downstream tau-b reports it as degenerate.
    """
    if not subset:
        raise ValueError("benchmark subset must be non-empty")
    idx = [m.benchmark_index(b) for b in subset]
    dirs = {m.direction[i] for i in idx}
    if len(dirs) > 1:
        raise ValueError(f"mixed directions in subset {subset}: {sorted(dirs)}")
    rows = np.stack([oriented_scores(m, b) for b in subset])
    return rows.mean(axis=0)
