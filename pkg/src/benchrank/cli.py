"""Command-line interface.

Subcommands: ``agree`` (pairwise benchmark agreement), ``align``
(significance-aware paired rankings for one benchmark pair), ``pca``
(explained variance and first-component scores), ``flops`` (pre-training
compute accounting), ``simulate`` (synthetic score matrices), ``report``
(all figure-data tables for a direct vs train-before-test pair of score
matrices).

Exit codes: 0 success, 1 usage error, 2 input validation failure,
3 numerical degeneracy.  One machine-parsable reason line is printed to
stderr on failure, and no artifact file is written on a nonzero exit.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields as dataclass_fields
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .alignment import AlignmentError, crossing_count, rank_models
from .core import (
    DegenerateError,
    ScoreMatrix,
    ScoreMatrixError,
    make_score_matrix,
    oriented_scores,
)
from .io import (
    FORMAT_VERSION,
    LoadError,
    RunManifest,
    infer_format,
    load_benchmark_categories,
    load_model_metadata,
    load_scores,
    render_artifact,
    render_scores_csv,
    render_scores_json,
)
from .lowrank import ComputeRecord, compute_flops, explained_variance_share, fit_pca, pc1_compute_correlation
from .rankstats import (
    SignificanceConfig,
    TieError,
    agreement_matrix,
    category_agreement,
    mean_agreement,
)
from .synth import SyntheticConfig, generate

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_DEGENERATE = 3

_CLI_MODES = {"direct": "direct", "tbt": "train_before_test"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="benchrank", description=__doc__)
    parser.add_argument("--version", action="version", version=f"benchrank {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("agree", help="pairwise rank agreement between benchmarks")
    p.add_argument("--scores", required=True)
    p.add_argument("--method", choices=["tau", "tau-b"], default="tau")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_agree)

    p = sub.add_parser("align", help="aligned paired rankings for two benchmarks")
    p.add_argument("--scores-a", required=True)
    p.add_argument("--scores-b", required=True)
    p.add_argument("--benchmark-a", required=True)
    p.add_argument("--benchmark-b", required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_align)

    p = sub.add_parser("pca", help="explained variance and pc1 scores")
    p.add_argument("--scores", required=True)
    p.add_argument("--preprocess", choices=["center", "zscore"], default="center")
    p.add_argument("--top-k", type=int, default=5)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_pca)

    p = sub.add_parser("flops", help="pre-training compute per model")
    p.add_argument("--models", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_flops)

    p = sub.add_parser("simulate", help="generate a synthetic score matrix")
    p.add_argument("--config", required=True)
    p.add_argument("--mode", choices=sorted(_CLI_MODES), required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("report", help="all figure-data tables for a direct/train-before-test pair")
    p.add_argument("--scores-direct", required=True)
    p.add_argument("--scores-tbt", required=True)
    p.add_argument("--categories", required=True)
    p.add_argument("--models", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument(
        "--align-pair",
        action="append",
        default=None,
        metavar="BENCH_A:BENCH_B",
        help="benchmark pair for the alignment table (repeatable; default: first two benchmarks)",
    )
    p.set_defaults(handler=_cmd_report)
    return parser


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise UsageError(f"--alpha must be in (0, 1), got {alpha}")


def _matrix_cells(values: np.ndarray, mask: np.ndarray) -> list[list[float | None]]:
    return [
        [None if mask[i, j] else float(values[i, j]) for j in range(values.shape[1])]
        for i in range(values.shape[0])
    ]


def _payload(kind: str, manifest: RunManifest) -> dict:
    return {"format_version": FORMAT_VERSION, "kind": kind, "manifest": manifest.to_dict()}


def _cmd_agree(args) -> list[tuple[Path, str]]:
    _check_alpha(args.alpha)
    manifest = RunManifest.build(
        "agree",
        {"scores": args.scores},
        {"method": args.method, "alpha": args.alpha, "out": args.out},
        __version__,
    )
    m = load_scores(args.scores)
    cfg = SignificanceConfig(alpha=args.alpha)
    am = agreement_matrix(m, method=args.method.replace("-", "_"), cfg=cfg)
    means = mean_agreement(am)
    payload = _payload("agreement", manifest)
    payload.update(
        {
            "method": args.method,
            "alpha": args.alpha,
            "benchmark_ids": list(am.benchmark_ids),
            "values": _matrix_cells(am.values, am.degenerate),
            "n_degenerate_cells": int(am.degenerate.sum()) // 2,
            "mean_agreement": [
                {"benchmark": b, "mean": float(v), "n_excluded": int(k)}
                for b, v, k in zip(means.benchmark_ids, means.means, means.n_excluded)
            ],
        }
    )
    return [(Path(args.out), render_artifact(payload))]


def _aligned_pair_table(
    ma: ScoreMatrix, mb: ScoreMatrix, bench_a: str, bench_b: str, cfg: SignificanceConfig
) -> dict:
    """Figure-style table: parallel ranks plus raw scores for one benchmark pair."""
    if set(ma.model_ids) != set(mb.model_ids):
        raise LoadError("the two score matrices cover different model sets")
    ia = ma.benchmark_index(bench_a)
    ib = mb.benchmark_index(bench_b)
    col = [mb.model_index(mod) for mod in ma.model_ids]
    s1 = oriented_scores(ma, bench_a)
    s2 = oriented_scores(mb, bench_b)[col]
    e1 = np.asarray(ma.stderrs[ia], dtype=float)
    e2 = np.asarray(mb.stderrs[ib], dtype=float)[col]
    ranking = rank_models(s1, e1, s2, e2, cfg, model_ids=ma.model_ids)
    raw1 = ma.scores[ia]
    raw2 = mb.scores[ib][col]
    rows = []
    for mod in ranking.order1:
        j = ma.model_index(mod)
        rows.append(
            {
                "model": mod,
                "rank1": ranking.rank1[mod],
                "rank2": ranking.rank2[mod],
                "score1": float(raw1[j]),
                "stderr1": float(ma.stderrs[ia][j]),
                "score2": float(raw2[j]),
                "stderr2": float(e2[j]),
            }
        )
    return {
        "benchmark_a": bench_a,
        "benchmark_b": bench_b,
        "crossings": crossing_count(ranking),
        "models": rows,
    }


def _cmd_align(args) -> list[tuple[Path, str]]:
    _check_alpha(args.alpha)
    manifest = RunManifest.build(
        "align",
        {"scores_a": args.scores_a, "scores_b": args.scores_b},
        {
            "benchmark_a": args.benchmark_a,
            "benchmark_b": args.benchmark_b,
            "alpha": args.alpha,
            "out": args.out,
        },
        __version__,
    )
    ma = load_scores(args.scores_a)
    mb = load_scores(args.scores_b)
    cfg = SignificanceConfig(alpha=args.alpha)
    table = _aligned_pair_table(ma, mb, args.benchmark_a, args.benchmark_b, cfg)
    payload = _payload("alignment", manifest)
    payload.update({"alpha": args.alpha, "tables": [table]})
    return [(Path(args.out), render_artifact(payload))]


def _cmd_pca(args) -> list[tuple[Path, str]]:
    if args.top_k < 1:
        raise UsageError(f"--top-k must be >= 1, got {args.top_k}")
    manifest = RunManifest.build(
        "pca",
        {"scores": args.scores},
        {"preprocess": args.preprocess, "top_k": args.top_k, "out": args.out},
        __version__,
    )
    m = load_scores(args.scores)
    result = fit_pca(m, preprocessing=args.preprocess)
    if args.top_k > result.n_components:
        raise LoadError(
            f"--top-k {args.top_k} exceeds the {result.n_components} available components"
        )
    payload = _payload("pca", manifest)
    payload.update(
        {
            "preprocessing": result.preprocessing,
            "benchmark_ids": list(result.benchmark_ids),
            "eigenvalues": [float(v) for v in result.eigenvalues],
            "explained_variance_ratio": [float(v) for v in result.evr],
            "top_k": args.top_k,
            "top_k_evr": [float(v) for v in result.evr[: args.top_k]],
            "top_k_share": explained_variance_share(result, args.top_k),
            "pc1_scores": [
                {"model": mod, "pc1": float(v)} for mod, v in zip(result.model_ids, result.pc1_scores)
            ],
        }
    )
    return [(Path(args.out), render_artifact(payload))]


def _cmd_flops(args) -> list[tuple[Path, str]]:
    manifest = RunManifest.build("flops", {"models": args.models}, {"out": args.out}, __version__)
    records = load_model_metadata(args.models)
    rows = []
    excluded = []
    for rec in records:
        if rec.token_count is None:
            excluded.append(rec.model_id)
            continue
        rows.append(
            {
                "model": rec.model_id,
                "family": rec.family,
                "params_b": rec.param_count,
                "tokens_b": rec.token_count,
                "instruction_tuned": rec.instruction_tuned,
                "flops": compute_flops(rec.param_count, rec.token_count),
            }
        )
    payload = _payload("flops", manifest)
    payload.update({"models": rows, "excluded": excluded})
    return [(Path(args.out), render_artifact(payload))]


def _load_synth_config(path: str) -> SyntheticConfig:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise LoadError(f"{path}: file not found") from None
    except json.JSONDecodeError as e:
        raise LoadError(f"{path}: invalid JSON: {e}") from None
    if not isinstance(raw, dict):
        raise LoadError(f"{path}: expected a JSON object")
    raw = {k: v for k, v in raw.items() if k not in ("format_version", "kind")}
    known = {f.name for f in dataclass_fields(SyntheticConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise LoadError(f"{path}: unknown config keys {unknown}")
    if "flops_range" in raw:
        try:
            lo, hi = raw["flops_range"]
        except (TypeError, ValueError):
            raise LoadError(f"{path}: flops_range must be [min, max]") from None
        raw["flops_range"] = (float(lo), float(hi))
    try:
        return SyntheticConfig(**raw)
    except (TypeError, ValueError) as e:
        raise LoadError(f"{path}: {e}") from e


def _cmd_simulate(args) -> list[tuple[Path, str]]:
    cfg = _load_synth_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    manifest = RunManifest.build(
        "simulate",
        {"config": args.config},
        {"mode": args.mode, "seed": cfg.seed, "out": args.out},
        __version__,
    )
    m = generate(cfg, _CLI_MODES[args.mode])
    fmt = infer_format(args.out)
    if fmt == "long-csv":
        text = render_scores_csv(m, manifest)
    else:
        text = render_scores_json(m, manifest)
    return [(Path(args.out), text)]


def _reorder_like(m: ScoreMatrix, benchmark_ids, model_ids) -> ScoreMatrix:
    """Same matrix with rows/columns arranged in the given id order."""
    rows = [m.benchmark_index(b) for b in benchmark_ids]
    cols = [m.model_index(x) for x in model_ids]
    return make_score_matrix(
        benchmark_ids,
        model_ids,
        m.scores[np.ix_(rows, cols)],
        m.stderrs[np.ix_(rows, cols)],
        n_items=[m.n_items[i] for i in rows],
        direction=[m.direction[i] for i in rows],
    )


def _tie_adjusted_agreement(m: ScoreMatrix):
    """Plain tau per cell, with exact binomial ties handled by tau-b counting."""
    flat = replace(m, stderrs=np.zeros_like(m.stderrs))
    return agreement_matrix(flat, method="tau_b", cfg=SignificanceConfig())


def _offdiag_mean(am) -> float:
    cells = [
        am.values[i, j]
        for i in range(am.n_benchmarks)
        for j in range(i + 1, am.n_benchmarks)
        if not am.degenerate[i, j]
    ]
    if not cells:
        raise DegenerateError("every benchmark pair is degenerate")
    return float(np.mean(cells))


def _perplexity_block(am, ppl: list[str]) -> dict:
    """Labeled sub-table: perplexity rows against each other and against the rest."""
    ids = list(am.benchmark_ids)
    ppl_idx = [ids.index(b) for b in ppl]
    down_idx = [i for i in range(len(ids)) if i not in ppl_idx]
    pairs = []
    cross = []
    for i in ppl_idx:
        for j in down_idx:
            cell = None if am.degenerate[i, j] else float(am.values[i, j])
            pairs.append({"ppl": ids[i], "benchmark": ids[j], "tau": cell})
            if cell is not None:
                cross.append(cell)
    intra = [
        float(am.values[i, j])
        for k, i in enumerate(ppl_idx)
        for j in ppl_idx[k + 1 :]
        if not am.degenerate[i, j]
    ]
    return {
        "ppl_benchmarks": [ids[i] for i in ppl_idx],
        "ppl_vs_ppl_mean": float(np.mean(intra)) if intra else None,
        "ppl_vs_downstream_mean": float(np.mean(cross)) if cross else None,
        "pairs": pairs,
    }


def _cmd_report(args) -> list[tuple[Path, str]]:
    manifest = RunManifest.build(
        "report",
        {
            "scores_direct": args.scores_direct,
            "scores_tbt": args.scores_tbt,
            "categories": args.categories,
            "models": args.models,
        },
        {"out_dir": args.out_dir, "align_pairs": args.align_pair or []},
        __version__,
    )
    m_direct = load_scores(args.scores_direct)
    m_tbt = load_scores(args.scores_tbt)
    if set(m_direct.benchmark_ids) != set(m_tbt.benchmark_ids):
        raise LoadError("direct and train-before-test matrices cover different benchmarks")
    if set(m_direct.model_ids) != set(m_tbt.model_ids):
        raise LoadError("direct and train-before-test matrices cover different models")
    m_tbt = _reorder_like(m_tbt, m_direct.benchmark_ids, m_direct.model_ids)
    cats = load_benchmark_categories(args.categories)
    metadata = load_model_metadata(args.models)
    compute_records = [
        ComputeRecord(rec.model_id, compute_flops(rec.param_count, rec.token_count))
        for rec in metadata
        if rec.token_count is not None
    ]
    modes = {"direct": m_direct, "train_before_test": m_tbt}
    ams = {name: _tie_adjusted_agreement(m) for name, m in modes.items()}
    pcas = {name: fit_pca(m, "center") for name, m in modes.items()}
    ppl = [rec.benchmark_id for rec in cats if rec.category == "PPL" and rec.benchmark_id in m_direct.benchmark_ids]

    fig2 = _payload("mean_agreement", manifest)
    fig2["benchmark_ids"] = list(m_direct.benchmark_ids)
    fig2["modes"] = {}
    for name, am in ams.items():
        means = mean_agreement(am)
        fig2["modes"][name] = {
            "means": [float(v) for v in means.means],
            "n_excluded": [int(k) for k in means.n_excluded],
            "overall_mean": _offdiag_mean(am),
        }
    fig2["perplexity_block"] = (
        {name: _perplexity_block(am, ppl) for name, am in ams.items()} if ppl else None
    )

    fig3 = _payload("category_agreement", manifest)
    cat_results = {name: category_agreement(am, cats) for name, am in ams.items()}
    fig3["categories"] = list(next(iter(cat_results.values())).categories)
    fig3["modes"] = {
        name: {
            "values": _matrix_cells(res.values, res.undefined),
            "n_excluded": [[int(v) for v in row] for row in res.n_excluded],
        }
        for name, res in cat_results.items()
    }

    fig6 = _payload("evr", manifest)
    fig6["preprocessing"] = "center"
    fig6["modes"] = {
        name: {
            "eigenvalues": [float(v) for v in res.eigenvalues],
            "explained_variance_ratio": [float(v) for v in res.evr],
            "top5_share": explained_variance_share(res, min(5, res.n_components)),
        }
        for name, res in pcas.items()
    }

    fig7 = _payload("pc1_compute", manifest)
    flops_by_model = {rec.model_id: rec.flops for rec in compute_records}
    fig7["models"] = [
        {
            "model": mod,
            "log10_flops": float(np.log10(flops_by_model[mod])),
            "pc1_direct": float(pcas["direct"].pc1_scores[j]),
            "pc1_train_before_test": float(pcas["train_before_test"].pc1_scores[j]),
        }
        for j, mod in enumerate(m_direct.model_ids)
        if mod in flops_by_model
    ]
    taus = {}
    for name, res in pcas.items():
        tau = pc1_compute_correlation(res, compute_records)
        if not isinstance(tau, float):
            raise DegenerateError(f"pc1 vs compute correlation is degenerate for {name}")
        taus[name] = tau
    fig7["tau"] = taus

    pairs = args.align_pair or [f"{m_direct.benchmark_ids[0]}:{m_direct.benchmark_ids[1]}"]
    cfg = SignificanceConfig()
    fig1 = _payload("alignment", manifest)
    fig1["alpha"] = cfg.alpha
    fig1["tables"] = []
    for spec in pairs:
        if ":" not in spec:
            raise UsageError(f"--align-pair must look like BENCH_A:BENCH_B, got {spec!r}")
        bench_a, bench_b = spec.split(":", 1)
        for name, m in modes.items():
            table = _aligned_pair_table(m, m, bench_a, bench_b, cfg)
            table["mode"] = name
            fig1["tables"].append(table)

    out = Path(args.out_dir)
    return [
        (out / "mean_agreement.json", render_artifact(fig2)),
        (out / "category_agreement.json", render_artifact(fig3)),
        (out / "evr.json", render_artifact(fig6)),
        (out / "pc1_compute.json", render_artifact(fig7)),
        (out / "alignment.json", render_artifact(fig1)),
    ]


def run_cli(argv=None) -> int:
    """Parse argv, run one subcommand, write its artifacts. Returns the exit code."""
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"error: usage: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        return int(e.code or 0)
    try:
        writes = args.handler(args)
    except UsageError as e:
        print(f"error: usage: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (TieError, DegenerateError) as e:
        print(f"error: degenerate: {e}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (LoadError, ScoreMatrixError, AlignmentError, ValueError, KeyError, OSError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        print(f"error: input: {msg}", file=sys.stderr)
        return EXIT_INPUT
    for path, text in writes:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        print(f"wrote {path}")
    return EXIT_OK


def main() -> None:
    sys.exit(run_cli())
