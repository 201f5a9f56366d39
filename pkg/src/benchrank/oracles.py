"""Brute-force reference implementations for the test suite.

Everything here is deliberately independent of the main modules: explicit
pair loops, textbook formulas, exhaustive enumeration.  The only shared
pieces are plain data types (significance configuration, partial orders).
Runtimes are bounded by hard instance-size caps; none of this is meant to
be fast.
"""

from __future__ import annotations

import math
from typing import Hashable

import numpy as np

from .alignment import PartialOrder
from .core import DEGENERATE, Degenerate
from .rankstats import SignificanceConfig


def tau_oracle(x, y) -> float:
    """Kendall's tau by explicit double loop over all pairs. No ties allowed."""
    x = [float(v) for v in x]
    y = [float(v) for v in y]
    n = len(x)
    if n != len(y):
        raise ValueError("length mismatch")
    if not 2 <= n <= 12:
        raise ValueError(f"oracle limited to 2 <= n <= 12, got {n}")
    concordant = 0
    discordant = 0
    for i in range(n):
        for j in range(i + 1, n):
            if x[i] == x[j] or y[i] == y[j]:
                raise ValueError("tie encountered; tau oracle requires tie-free input")
            if (x[i] > x[j]) == (y[i] > y[j]):
                concordant += 1
            else:
                discordant += 1
    return (concordant - discordant) / (n * (n - 1) // 2)


def _oracle_significant(s1: float, se1: float, s2: float, se2: float, critical_z: float) -> bool:
    denom = math.sqrt(se1 * se1 + se2 * se2)
    if denom == 0.0:
        return s1 != s2
    return abs(s1 - s2) / denom > critical_z


def taub_oracle(x, se_x, y, se_y, cfg: SignificanceConfig) -> float | Degenerate:
    """Textbook tau-b from integer pair counts, significance ties included."""
    x = [float(v) for v in x]
    se_x = [float(v) for v in se_x]
    y = [float(v) for v in y]
    se_y = [float(v) for v in se_y]
    n = len(x)
    if not 2 <= n <= 12:
        raise ValueError(f"oracle limited to 2 <= n <= 12, got {n}")
    c = d = tx = ty = 0
    for i in range(n):
        for j in range(i + 1, n):
            tie_x = not _oracle_significant(x[i], se_x[i], x[j], se_x[j], cfg.critical_z)
            tie_y = not _oracle_significant(y[i], se_y[i], y[j], se_y[j], cfg.critical_z)
            if tie_x and tie_y:
                continue
            if tie_x:
                tx += 1
            elif tie_y:
                ty += 1
            elif (x[i] > x[j]) == (y[i] > y[j]):
                c += 1
            else:
                d += 1
    if c + d + tx == 0 or c + d + ty == 0:
        return DEGENERATE
    return (c - d) / math.sqrt((c + d + tx) * (c + d + ty))


def _linear_extensions(model_ids: tuple[Hashable, ...], edges) -> list[tuple[Hashable, ...]]:
    succ = {m: [] for m in model_ids}
    indeg = {m: 0 for m in model_ids}
    for a, b in edges:
        succ[a].append(b)
        indeg[b] += 1
    out: list[tuple[Hashable, ...]] = []
    prefix: list[Hashable] = []

    def recurse():
        ready = sorted(m for m, k in indeg.items() if k == 0 and m not in placed)
        if not ready and len(prefix) < len(model_ids):
            raise ValueError("cyclic graph: no linear extension exists")
        if len(prefix) == len(model_ids):
            out.append(tuple(prefix))
            return
        for m in ready:
            placed.add(m)
            prefix.append(m)
            for b in succ[m]:
                indeg[b] -= 1
            recurse()
            for b in succ[m]:
                indeg[b] += 1
            prefix.pop()
            placed.discard(m)

    placed: set[Hashable] = set()
    recurse()
    return out


_POPCOUNT = np.array([bin(i).count("1") for i in range(1 << 16)], dtype=np.uint8)


def alignment_oracle(g1: PartialOrder, g2: PartialOrder) -> int:
    """Minimum crossing count over all pairs of linear extensions.

    Enumerates every linear extension of both partial orders and takes the
    minimum number of discordantly ordered model pairs.  Refuses more than
    6 models (an empty order on 6 already has 720 extensions).
    """
    if set(g1.model_ids) != set(g2.model_ids):
        raise ValueError("partial orders must cover the same model set")
    n = g1.n_models
    if n > 6:
        raise ValueError(f"alignment oracle limited to n <= 6, got {n}")
    if n < 2:
        return 0
    models = tuple(sorted(g1.model_ids))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]

    def codes(po: PartialOrder) -> np.ndarray:
        exts = _linear_extensions(models, po.edges)
        packed = np.empty(len(exts), dtype=np.uint16)
        for e, ext in enumerate(exts):
            pos = {m: k for k, m in enumerate(ext)}
            bits = 0
            for bit, (i, j) in enumerate(pairs):
                if pos[models[i]] < pos[models[j]]:
                    bits |= 1 << bit
            packed[e] = bits
        return packed

    c1 = codes(g1)
    c2 = codes(g2)
    diff = _POPCOUNT[np.bitwise_xor(c1[:, None], c2[None, :])]
    return int(diff.min())


def eig2_oracle(cov) -> tuple[float, float]:
    """Closed-form eigenvalues of a symmetric 2x2 matrix, sorted descending."""
    cov = np.asarray(cov, dtype=float)
    if cov.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {cov.shape}")
    if cov[0, 1] != cov[1, 0]:
        raise ValueError("matrix is not symmetric")
    a, b, d = cov[0, 0], cov[0, 1], cov[1, 1]
    half_trace = (a + d) / 2.0
    radius = math.sqrt(((a - d) / 2.0) ** 2 + b * b)
    return (half_trace + radius, half_trace - radius)
