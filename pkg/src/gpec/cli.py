"""Command-line entry point: ``gpec generate | ensemble | evaluate | theory``.

Every command is deterministic given ``--seed``.  JSON outputs carry a
``schema`` version and echo the effective configuration.  Files are
written through a temporary sibling and renamed into place, so a failed
run never leaves a half-written output behind.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
from joblib import Parallel, delayed

from .coassoc import save_matrix_bin, save_matrix_csv
from .confidence import DEFAULT_ALPHA
from .consensus import ABLATIONS, KMeansConfig, run_pipeline
from .metrics import NMI_VARIANTS, MetricsReport, evaluate, format_table, nmi
from .minmax import OptimizerConfig
from .partitions import (
    Dataset,
    Partition,
    Pool,
    compact,
    default_k_range,
    derive_seed,
    generate_pool,
    load_dataset,
    load_pool,
    save_pool,
    zscore,
)
from .theory import SCHEDULES, excess_risk_experiment

__all__ = ["PipelineConfig", "run_repeats", "summarize", "build_parser", "main"]

log = logging.getLogger("gpec")

SCHEMA = 1
METRIC_NAMES = ("nmi", "ari", "purity", "f_score")
DUMPED_MATRICES = ("ca", "kbar", "h", "ktilde", "kw")


@dataclass
class PipelineConfig:
    """Everything an ensemble run depends on besides the data."""

    k: int
    m: int = 20
    alpha: float = DEFAULT_ALPHA
    seed: int = 0
    repeats: int = 20
    ablation: str = "full"
    nmi_variant: str = "geometric"
    k_range: Optional[tuple] = None
    confidence_source: str = "ca"
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    kmeans: KMeansConfig = field(default_factory=KMeansConfig)

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.ablation not in ABLATIONS:
            raise ValueError(f"unknown ablation {self.ablation!r}")
        if self.nmi_variant not in NMI_VARIANTS:
            raise ValueError(f"unknown NMI variant {self.nmi_variant!r}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["k_range"] = None if self.k_range is None else list(self.k_range)
        return d


def _one_repeat(source: Union[Dataset, Pool], truth: Optional[Partition], cfg: PipelineConfig, r: int, want_matrices: bool):
    if isinstance(source, Dataset):
        k_range = cfg.k_range or default_k_range(source.n, truth.num_clusters if truth is not None else cfg.k)
        pool = generate_pool(source, cfg.m, k_range, seed=derive_seed(cfg.seed, r, 0))
    else:
        pool = source
    matrices = {} if want_matrices else None
    res = run_pipeline(
        pool,
        cfg.k,
        alpha=cfg.alpha,
        opt_cfg=cfg.optimizer,
        kmeans_cfg=cfg.kmeans,
        seed=derive_seed(cfg.seed, r, 1),
        ablation=cfg.ablation,
        truth=truth,
        nmi_variant=cfg.nmi_variant,
        confidence_source=cfg.confidence_source,
        matrices=matrices,
    )
    record = res.to_dict()
    record["repeat"] = r
    if truth is not None:
        members = [nmi(p, truth, cfg.nmi_variant) for p in pool]
        record["base_pool_nmi"] = {"mean": float(np.mean(members)), "min": float(np.min(members)), "max": float(np.max(members))}
    return record, matrices


def run_repeats(
    source: Union[Dataset, Pool],
    cfg: PipelineConfig,
    truth: Optional[Partition] = None,
    n_jobs: Optional[int] = None,
    keep_matrices: bool = False,
):
    """Run the pipeline ``cfg.repeats`` times.

    A :class:`Dataset` source gets a fresh pool per repeat; a :class:`Pool`
    is reused and only the k-means seed changes.  Repeat ``r`` derives its
    seeds from ``(cfg.seed, r)``, so results do not depend on ``n_jobs``.
    Returns ``(records, matrices)`` where ``matrices`` holds the
    intermediate matrices of repeat 0 when ``keep_matrices`` is set.
    """
    if truth is None and isinstance(source, Dataset):
        truth = source.truth
    tasks = [(source, truth, cfg, r, keep_matrices and r == 0) for r in range(cfg.repeats)]
    if n_jobs in (None, 1):
        out = [_one_repeat(*t) for t in tasks]
    else:
        out = Parallel(n_jobs=n_jobs)(delayed(_one_repeat)(*t) for t in tasks)
    return [rec for rec, _ in out], out[0][1]


def summarize(records: Sequence[dict]) -> dict:
    """Mean and standard deviation of each metric (and base-pool NMI) over repeats."""
    summary = {}
    if records and records[0].get("metrics") is not None:
        for name in METRIC_NAMES:
            vals = np.array([rec["metrics"][name] for rec in records])
            summary[name] = {"mean": float(vals.mean()), "std": float(vals.std())}
    if records and "base_pool_nmi" in records[0]:
        vals = np.array([rec["base_pool_nmi"]["mean"] for rec in records])
        summary["base_pool_nmi"] = {"mean": float(vals.mean()), "std": float(vals.std())}
    ent = np.array([rec["weight_entropy"] for rec in records])
    summary["weight_entropy"] = {"mean": float(ent.mean()), "std": float(ent.std())}
    return summary


# --- file output ---------------------------------------------------------


def _temp_for(path: Path) -> Path:
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent or ".")
    os.close(fd)
    return Path(tmp)


class _Outputs:
    """Stage several files and publish them together."""

    def __init__(self):
        self._staged: List[tuple] = []

    def stage(self, path, writer) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = _temp_for(path)
        self._staged.append((tmp, path))
        writer(tmp)

    def stage_text(self, path, text: str) -> None:
        self.stage(path, lambda p: p.write_text(text))

    def commit(self) -> None:
        for tmp, path in self._staged:
            os.replace(tmp, path)
        self._staged.clear()

    def discard(self) -> None:
        for tmp, _ in self._staged:
            tmp.unlink(missing_ok=True)
        self._staged.clear()


# --- commands ------------------------------------------------------------


def _load_data(args) -> Dataset:
    label = args.label_column
    if label is not None:
        try:
            label = int(label)
        except ValueError:
            pass
    data = load_dataset(args.data, label_column=label)
    return zscore(data) if args.normalize_features else data


def _k_range(args):
    if args.k_min is None and args.k_max is None:
        return None
    if args.k_min is None or args.k_max is None:
        raise ValueError("--k-min and --k-max must be given together")
    return (args.k_min, args.k_max)


def _read_labels(path) -> Partition:
    path = Path(path)
    cells = [c for c in path.read_text().replace(",", " ").split()]
    if not cells:
        raise ValueError(f"{path}: no labels")
    try:
        raw = [int(float(c)) for c in cells]
    except ValueError:
        _, inv = np.unique(np.array(cells, dtype=object), return_inverse=True)
        raw = inv.ravel()
    return compact(np.asarray(raw))


def cmd_generate(args) -> int:
    data = _load_data(args)
    k_range = _k_range(args)
    pool = generate_pool(data, args.m, k_range, seed=args.seed, n_jobs=args.jobs)
    out = _Outputs()
    try:
        out.stage(args.out, lambda p: save_pool(pool, p))
        out.commit()
    finally:
        out.discard()
    log.info("wrote %d x %d pool to %s", pool.n, pool.m, args.out)
    return 0


def cmd_ensemble(args) -> int:
    if (args.data is None) == (args.pool is None):
        raise ValueError("give exactly one of --data or --pool")
    truth = _read_labels(args.truth) if args.truth else None
    if args.data is not None:
        source = _load_data(args)
        truth = truth if truth is not None else source.truth
    else:
        source = load_pool(args.pool)
    if truth is not None and truth.n != source.n:
        raise ValueError(f"truth has {truth.n} labels but the data has {source.n} samples")
    k = args.k if args.k is not None else (truth.num_clusters if truth is not None else None)
    if k is None:
        raise ValueError("--k is required when no ground truth is available")

    cfg = PipelineConfig(
        k=k,
        m=args.m if args.data is not None else source.m,
        alpha=args.alpha,
        seed=args.seed,
        repeats=args.repeats,
        ablation=args.ablation,
        nmi_variant=args.nmi_variant,
        k_range=_k_range(args),
        optimizer=OptimizerConfig(max_iter=args.max_iter),
    )
    records, matrices = run_repeats(source, cfg, truth, n_jobs=args.jobs, keep_matrices=args.dump_matrices is not None)
    summary = summarize(records)
    report = {
        "schema": SCHEMA,
        "command": "ensemble",
        "config": {
            **cfg.to_dict(),
            "data": None if args.data is None else str(args.data),
            "pool": None if args.pool is None else str(args.pool),
            "normalize_features": bool(args.normalize_features),
        },
        "summary": summary,
        "repeats": records,
    }

    out = _Outputs()
    try:
        if args.dump_matrices is not None:
            dump = Path(args.dump_matrices)
            save = save_matrix_csv if args.dump_format == "csv" else save_matrix_bin
            for name in DUMPED_MATRICES:
                mat = matrices[name]
                out.stage(dump / f"{name}.{args.dump_format}", lambda p, mat=mat: save(p, mat))
        if args.out is not None:
            out.stage_text(args.out, json.dumps(report, indent=2) + "\n")
        out.commit()
    finally:
        out.discard()

    if "nmi" in summary:
        line = "  ".join(f"{name} {100 * s['mean']:.1f}±{100 * s['std']:.1f}" for name, s in summary.items() if name in METRIC_NAMES)
        print(line)
        if "base_pool_nmi" in summary:
            print(f"base pool nmi {100 * summary['base_pool_nmi']['mean']:.1f}")
    else:
        print(f"{cfg.repeats} repeats, k={cfg.k}, weight entropy {summary['weight_entropy']['mean']:.3f}")
    if args.out is None:
        json.dump(report, sys.stdout, indent=2)
        print()
    return 0


def cmd_evaluate(args) -> int:
    pred, truth = _read_labels(args.pred), _read_labels(args.truth)
    if pred.n != truth.n:
        raise ValueError(f"length mismatch: {pred.n} predicted vs {truth.n} true labels")
    report: MetricsReport = evaluate(pred, truth, args.nmi_variant)
    print(format_table(report))
    return 0


def cmd_theory(args) -> int:
    data = _load_data(args)
    if data.truth is None:
        raise ValueError("the theory command needs ground-truth labels (--label-column)")
    if args.n_step < 2:
        raise ValueError("--n-step must be >= 2")
    n_grid = list(range(args.n_step, data.n + 1, args.n_step))
    if not n_grid:
        raise ValueError(f"--n-step {args.n_step} exceeds the sample count {data.n}")
    curve = excess_risk_experiment(
        data, n_grid, args.schedule, k_range=_k_range(args), seed=args.seed, n_jobs=args.jobs, per_sample=not args.unscaled
    )
    record = curve.fit_record()
    record["config"].update(data=str(args.data), schedule=args.schedule, n_step=args.n_step)
    out_csv = Path(args.out)
    out_json = out_csv.with_suffix(".json")
    out = _Outputs()
    try:
        out.stage_text(out_csv, curve.to_csv())
        out.stage_text(out_json, json.dumps(record, indent=2) + "\n")
        out.commit()
    finally:
        out.discard()
    print(f"{len(curve.points)} grid points, spearman {record['spearman']}")
    return 0


# --- parser --------------------------------------------------------------


def _add_data_args(p, required: bool) -> None:
    p.add_argument("--data", required=required, help="feature table (CSV or whitespace separated)")
    p.add_argument("--label-column", default=None, help="index or header name of the label column")
    p.add_argument("--normalize-features", action="store_true", help="z-score features before clustering")


def _add_k_range(p) -> None:
    p.add_argument("--k-min", type=int, default=None, help="smallest cluster count of a base clustering")
    p.add_argument("--k-max", type=int, default=None, help="largest cluster count of a base clustering")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gpec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="build a pool of k-means base clusterings")
    _add_data_args(g, required=True)
    _add_k_range(g)
    g.add_argument("--m", type=int, default=20, help="pool size")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--jobs", type=int, default=None)
    g.add_argument("--out", required=True, help="pool CSV to write")
    g.set_defaults(func=cmd_generate)

    e = sub.add_parser("ensemble", help="run the consensus pipeline")
    _add_data_args(e, required=False)
    _add_k_range(e)
    e.add_argument("--pool", default=None, help="pool CSV (n rows, m columns)")
    e.add_argument("--truth", default=None, help="ground-truth label file")
    e.add_argument("--k", type=int, default=None, help="number of consensus clusters")
    e.add_argument("--m", type=int, default=20, help="pool size when generating from --data")
    e.add_argument("--alpha", type=float, default=DEFAULT_ALPHA, help="high-confidence threshold")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--repeats", type=int, default=20)
    e.add_argument("--jobs", type=int, default=None)
    e.add_argument("--ablation", choices=ABLATIONS, default="full")
    e.add_argument("--nmi-variant", choices=NMI_VARIANTS, default="geometric")
    e.add_argument("--max-iter", type=int, default=100, help="optimizer iterations (0 keeps uniform weights)")
    e.add_argument("--out", default=None, help="result JSON (stdout when omitted)")
    e.add_argument("--dump-matrices", default=None, metavar="DIR", help="write repeat-0 matrices here")
    e.add_argument("--dump-format", choices=("bin", "csv"), default="bin")
    e.set_defaults(func=cmd_ensemble)

    v = sub.add_parser("evaluate", help="score predicted labels against ground truth")
    v.add_argument("pred", help="predicted label file")
    v.add_argument("truth", help="ground-truth label file")
    v.add_argument("--nmi-variant", choices=NMI_VARIANTS, default="geometric")
    v.set_defaults(func=cmd_evaluate)

    t = sub.add_parser("theory", help="excess-risk scaling experiment")
    _add_data_args(t, required=True)
    _add_k_range(t)
    t.add_argument("--schedule", choices=SCHEDULES, default="sqrt")
    t.add_argument("--n-step", type=int, default=100)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--jobs", type=int, default=None)
    t.add_argument("--unscaled", action="store_true", help="report the subspace misfit without the 1/n factor")
    t.add_argument("--out", required=True, help="CSV to write; the fit JSON goes next to it")
    t.set_defaults(func=cmd_theory)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    level = os.environ.get("GPEC_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"gpec {args.command}: error: {exc}", file=sys.stderr)
        return 1
