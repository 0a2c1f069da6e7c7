"""
``sketch-learn`` command line.

Subcommands::

    gen         synthetic Gaussian-mixture CSV + ground-truth JSON
    sketch      stream a CSV into a sketch file (optionally privatized)
    merge       merge sketch files built with the same map
    learn       fit k-means / GMM / PCA / regression parameters from a sketch
    privatize   add Laplace or Gaussian noise to a sketch
    eval        empirical risk of a model on a CSV dataset
    kernelscan  sketch criterion and Parzen score over a 2-D grid

Exit codes: 0 ok, 2 usage, 3 format, 4 incompatible sketches, 5 sealed-sketch
violation, 6 numerical failure.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Optional

import numpy as np
import pandas as pd
from pydantic import ValidationError

from sketch_learning._logging import SketchLearningLogger
from sketch_learning.baselines import (
    count_local_maxima,
    empirical_risk,
    lloyd_kmeans,
    parzen_score,
    synth_gmm,
)
from sketch_learning.cli.config import PipelineConfig, resolve_config
from sketch_learning.core.errors import (
    InvalidArgumentError,
    SealedSketchError,
    SketchFormatError,
    SketchLearningError,
)
from sketch_learning.core.models import (
    CentroidModel,
    MapKind,
    PrivacyMechanism,
    SyntheticSpec,
    Task,
    model_from_document,
)
from sketch_learning.core.random import stream
from sketch_learning.features import FeatureMapSpec, kernel_width
from sketch_learning.privacy import privatize_gaussian, privatize_laplace
from sketch_learning.sketching import (
    CsvRowSource,
    Reservoir,
    Sketch,
    check_kind,
    load,
    merge,
    read_csv_matrix,
    save,
    sketch_dataset,
    write_csv_matrix,
)
from sketch_learning.solvers import (
    clomp_gmm,
    clomp_kmeans,
    fit_lowrank_psd,
    ls_regression,
    selection_criterion,
)

logger = SketchLearningLogger.get(__name__)

EXIT_OK = 0
EXIT_USAGE = 2


# --------------------------------------------------------------------- helpers


def _config(args: argparse.Namespace) -> PipelineConfig:
    flags = {k: v for k, v in vars(args).items() if k in PipelineConfig.model_fields}
    return resolve_config(flags, args.config)


def _write_json(doc: dict[str, Any], path: Optional[str]) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True)
    if path is None:
        sys.stdout.write(text + "\n")
    else:
        Path(path).write_text(text + "\n", encoding="utf-8")


def _require_output(cfg: PipelineConfig) -> str:
    if not cfg.output:
        raise InvalidArgumentError("an output path is required (--out)")
    return cfg.output


def _check_release(s: Sketch, cfg: PipelineConfig) -> None:
    if cfg.require_dp and not s.is_sealed:
        raise SealedSketchError("--require-dp is set; refusing to write a sketch without differential privacy")


def _privatize(s: Sketch, cfg: PipelineConfig, keep_box: bool = False) -> Sketch:
    if cfg.epsilon is None:
        raise InvalidArgumentError("privatization needs --epsilon")
    mechanism = cfg.mechanism or (PrivacyMechanism.GAUSSIAN if cfg.delta is not None else PrivacyMechanism.LAPLACE)
    if mechanism is PrivacyMechanism.LAPLACE:
        return privatize_laplace(s, cfg.epsilon, seed=cfg.seed, radius=cfg.radius, keep_box=keep_box)
    if cfg.delta is None:
        raise InvalidArgumentError("the Gaussian mechanism needs --delta")
    return privatize_gaussian(s, cfg.epsilon, cfg.delta, seed=cfg.seed, radius=cfg.radius, keep_box=keep_box)


def _restamp(s: Sketch, cfg: PipelineConfig, sources: list[Sketch]) -> Sketch:
    """Record this run's config on a derived sketch; the source configs move under ``inputs``."""
    metadata = dict(s.metadata)
    metadata["config"] = cfg.provenance()
    metadata["inputs"] = [src.metadata.get("config") for src in sources]
    return s.replace(metadata=metadata)


def auto_sigma_w(source: CsvRowSource, seed: int, capacity: int = 1000) -> float:
    """1/(2π·ŝ) with ŝ the median pairwise distance of a reservoir subsample."""
    reservoir = Reservoir(capacity, source.d, stream(seed, "reservoir"))
    for block in source.blocks():
        reservoir.add_block(block)
    spread = reservoir.median_pairwise_distance()
    if spread <= 0:
        raise InvalidArgumentError("can't pick sigma_w automatically: fewer than two distinct rows")
    return 1.0 / (2.0 * np.pi * spread)


# -------------------------------------------------------------------- commands


def cmd_gen(args: argparse.Namespace) -> int:
    cfg = _config(args)
    weights = tuple(float(w) for w in args.weights.replace(",", " ").split()) if args.weights else None
    try:
        spec = SyntheticSpec(
            k=args.k,
            d=args.d,
            n=args.n,
            separation=args.sep,
            sigma=args.sigma,
            weights=weights,
            box_half_width=args.half_width,
            seed=cfg.seed,
        )
    except ValidationError as exc:
        raise InvalidArgumentError(f"invalid synthetic spec: {exc}") from exc
    dataset = synth_gmm(spec)
    out = _require_output(cfg)
    write_csv_matrix(out, dataset.data)
    truth_path = args.truth or str(Path(out).with_suffix(".truth.json"))
    _write_json(dataset.truth.document(seed=cfg.seed, synthetic=spec.model_dump(mode="json")), truth_path)
    logger.info("gen.done: n=%d d=%d k=%d out=%s truth=%s", spec.n, spec.d, spec.k, out, truth_path)
    return EXIT_OK


def cmd_sketch(args: argparse.Namespace) -> int:
    cfg = _config(args)
    if not cfg.input:
        raise InvalidArgumentError("sketch needs an input CSV")
    out = _require_output(cfg)
    with SketchLearningLogger.timed(logger, "sketch.written", out=out) as log:
        source = CsvRowSource(cfg.input, block_rows=cfg.block_rows)
        d = source.d
        sigma_w = cfg.sigma_w
        if sigma_w == "auto":
            sigma_w = auto_sigma_w(source, cfg.seed)
            logger.info("sketch.sigma_w_auto: sigma_w=%.6g", sigma_w)
        spec = FeatureMapSpec.create(
            cfg.map_kind,
            d,
            m=cfg.resolved_m(d),
            sigma_w=float(sigma_w),
            seed=cfg.seed,
            operator_kind=cfg.operator_kind,
            dither_seed=cfg.dither_seed if cfg.map_kind is MapKind.RFF_QUANTIZED else None,
        )
        metadata = {"config": cfg.provenance(), "columns": source.columns}
        if cfg.map_kind is not MapKind.OUTER_PRODUCT:
            metadata["sigma_w"] = float(sigma_w)
        s = sketch_dataset(
            source,
            spec,
            block_rows=cfg.block_rows,
            workers=cfg.workers,
            reservoir_size=cfg.reservoir,
            seed=cfg.seed,
            metadata=metadata,
        )
        if cfg.epsilon is not None:
            s = _privatize(s, cfg)
        _check_release(s, cfg)
        save(s, out)
        log.update(n=s.n, fingerprint=s.fingerprint[:12])
    return EXIT_OK


def cmd_merge(args: argparse.Namespace) -> int:
    cfg = _config(args)
    sketches = [load(p) for p in args.inputs]
    result = sketches[0]
    for other in sketches[1:]:
        result = merge(result, other)
    result = _restamp(result, cfg, sketches)
    _check_release(result, cfg)
    out = _require_output(cfg)
    save(result, out)
    logger.info("merge.done: inputs=%d n=%d out=%s", len(sketches), result.n, out)
    return EXIT_OK


def cmd_privatize(args: argparse.Namespace) -> int:
    cfg = _config(args)
    if not cfg.input:
        raise InvalidArgumentError("privatize needs an input sketch")
    source = load(cfg.input)
    s = _restamp(_privatize(source, cfg, keep_box=args.keep_box), cfg, [source])
    save(s, _require_output(cfg))
    return EXIT_OK


_TASK_MAPS = {
    Task.KMEANS: (MapKind.RFF_COMPLEX, MapKind.RFF_QUANTIZED),
    Task.GMM: (MapKind.RFF_COMPLEX, MapKind.RFF_QUANTIZED),
    Task.PCA: (MapKind.QUADRATIC,),
    Task.REGRESS: (MapKind.OUTER_PRODUCT,),
}


def cmd_learn(args: argparse.Namespace) -> int:
    cfg = _config(args)
    if not cfg.input:
        raise InvalidArgumentError("learn needs an input sketch")
    if cfg.task is None:
        raise InvalidArgumentError("learn needs --task")
    s = load(cfg.input)
    check_kind(s, *_TASK_MAPS[cfg.task])

    if cfg.task is Task.REGRESS:
        d1 = cfg.d1 if cfg.d1 is not None else 1
        model = ls_regression(s, d1, s.spec.d - d1, ridge=cfg.ridge)
    else:
        if cfg.k is None:
            raise InvalidArgumentError(f"task {cfg.task.value} needs --k")
        opts = cfg.solver_options()
        if cfg.task is Task.KMEANS:
            model = clomp_kmeans(s, cfg.k, opts=opts)
        elif cfg.task is Task.GMM:
            model = clomp_gmm(s, cfg.k, opts=opts)
        else:
            model = fit_lowrank_psd(s, cfg.k, opts=opts)

    doc = model.document(
        seed=cfg.seed,
        fingerprint=s.fingerprint,
        sketch_n=s.n,
        privacy=s.privacy.model_dump(mode="json") if s.privacy else None,
        config=cfg.provenance(),
    )
    _write_json(doc, cfg.output)
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = _config(args)
    try:
        model = model_from_document(json.loads(Path(args.model).read_text(encoding="utf-8")))
    except (ValueError, KeyError) as exc:
        raise SketchFormatError(f"unreadable model file {args.model}: {exc}") from exc
    data = read_csv_matrix(args.data)
    if data.shape[0] == 0:
        raise InvalidArgumentError(f"{args.data} has no rows")
    metrics: dict[str, Any] = {
        "task": model.task.value,
        "n": int(data.shape[0]),
        "risk": empirical_risk(model.task, model, data),
        "config": cfg.provenance(),
    }
    if args.baseline and isinstance(model, CentroidModel):
        reference = lloyd_kmeans(data, model.k, seed=cfg.seed)
        baseline_risk = empirical_risk(Task.KMEANS, reference, data)
        metrics["baseline_risk"] = baseline_risk
        metrics["sse_ratio"] = metrics["risk"] / baseline_risk if baseline_risk > 0 else float("inf")
    _write_json(metrics, cfg.output)
    return EXIT_OK


def cmd_kernelscan(args: argparse.Namespace) -> int:
    cfg = _config(args)
    if not cfg.input:
        raise InvalidArgumentError("kernelscan needs an input sketch")
    s = load(cfg.input)
    check_kind(s, MapKind.RFF_COMPLEX, MapKind.RFF_QUANTIZED)
    if s.spec.d != 2:
        raise InvalidArgumentError(f"kernelscan works on 2-D data, sketch has d={s.spec.d}")

    axis = np.linspace(args.lo, args.hi, args.grid)
    c1, c2 = np.meshgrid(axis, axis, indexing="ij")
    points = np.column_stack([c1.ravel(), c2.ravel()])

    criterion = selection_criterion(s, points)
    frame = pd.DataFrame({"c1": points[:, 0], "c2": points[:, 1], "criterion": criterion})
    if args.data:
        frame["parzen"] = parzen_score(read_csv_matrix(args.data), points, kernel_width(s.spec.sigma_w))
    maxima = count_local_maxima(criterion.reshape(args.grid, args.grid))
    logger.info("kernelscan.done: grid=%d sigma_w=%.6g local_maxima=%d", args.grid, s.spec.sigma_w, maxima)

    provenance = {
        "config": cfg.provenance(),
        "sketch": {"fingerprint": s.fingerprint, "n": s.n, "config": s.metadata.get("config")},
        "grid": {"lo": args.lo, "hi": args.hi, "points": args.grid},
        "data": args.data,
        "local_maxima": maxima,
    }
    if cfg.output:
        frame.to_csv(cfg.output, index=False, float_format="%.17g")
        _write_json(provenance, str(scan_sidecar(cfg.output)))
    else:
        frame.to_csv(sys.stdout, index=False, float_format="%.17g")
        logger.info("kernelscan.provenance: %s", json.dumps(provenance, sort_keys=True))
    return EXIT_OK


def scan_sidecar(csv_path: str) -> Path:
    """``scan.csv`` -> ``scan.json``: config and grid of a kernel scan."""
    return Path(csv_path).with_suffix(".json")


# ---------------------------------------------------------------------- parser


def _add_map_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--map", dest="map_kind", choices=[k.value for k in MapKind])
    p.add_argument("--m", type=int)
    p.add_argument("--sigma-w", dest="sigma_w", help="frequency scale, or 'auto'")
    p.add_argument("--operator", dest="operator_kind", choices=["dense", "structured"])
    p.add_argument("--dither-seed", dest="dither_seed", type=int)
    p.add_argument("--k", type=int, help="number of components (sets the default m = 10·k·d)")


def _add_privacy_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epsilon", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--mechanism", choices=[m.value for m in PrivacyMechanism])
    p.add_argument("--radius", type=float, help="bound on ‖x‖ for quadratic/outer-product sketches")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sketch-learn", description="Compressive learning from sketches.")
    parser.add_argument("--config", help="key = value config file")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--require-dp", dest="require_dp", action="store_true")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true")
    verbosity.add_argument("-q", "--quiet", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic Gaussian mixture")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--sep", type=float, default=6.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--weights")
    p.add_argument("--half-width", dest="half_width", type=float)
    p.add_argument("--truth")
    p.add_argument("--out", dest="output", required=True)
    p.set_defaults(handler=cmd_gen)

    p = sub.add_parser("sketch", help="sketch a CSV file")
    p.add_argument("input")
    _add_map_flags(p)
    _add_privacy_flags(p)
    p.add_argument("--workers", type=int)
    p.add_argument("--block-rows", dest="block_rows", type=int)
    p.add_argument("--reservoir", type=int)
    p.add_argument("--out", dest="output", required=True)
    p.set_defaults(handler=cmd_sketch)

    p = sub.add_parser("merge", help="merge sketch files")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--out", dest="output", required=True)
    p.set_defaults(handler=cmd_merge)

    p = sub.add_parser("learn", help="fit task parameters to a sketch")
    p.add_argument("input")
    p.add_argument("--task", choices=[t.value for t in Task], required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--tolerance", type=float)
    p.add_argument("--max-refine-iterations", dest="max_refine_iterations", type=int)
    p.add_argument("--lower", help="search box lower corner, comma separated")
    p.add_argument("--upper", help="search box upper corner, comma separated")
    p.add_argument("--d1", type=int, help="regression: number of leading target coordinates")
    p.add_argument("--ridge", type=float)
    p.add_argument("--out", dest="output")
    p.set_defaults(handler=cmd_learn)

    p = sub.add_parser("privatize", help="release a differentially private sketch")
    p.add_argument("input")
    _add_privacy_flags(p)
    p.add_argument("--keep-box", dest="keep_box", action="store_true", help="keep the non-private search box")
    p.add_argument("--out", dest="output", required=True)
    p.set_defaults(handler=cmd_privatize)

    p = sub.add_parser("eval", help="empirical risk of a model on data")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--baseline", action="store_true", help="k-means: also report the SSE ratio to Lloyd")
    p.add_argument("--out", dest="output")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("kernelscan", help="grid scan of the sketch criterion")
    p.add_argument("input")
    p.add_argument("--data", help="CSV used for the Parzen score column")
    p.add_argument("--lo", type=float, default=-3.0)
    p.add_argument("--hi", type=float, default=3.0)
    p.add_argument("--grid", type=int, default=50)
    p.add_argument("--out", dest="output")
    p.set_defaults(handler=cmd_kernelscan)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE

    SketchLearningLogger.from_flags(verbose=args.verbose, quiet=args.quiet)

    try:
        return args.handler(args)
    except SketchLearningError as exc:
        logger.error("%s.failed: %s", args.command, exc)
        logger.debug("traceback", exc_info=True)
        return exc.exit_code
    except ValidationError as exc:
        logger.error("%s.failed: %s", args.command, exc)
        return EXIT_USAGE
    except OSError as exc:
        logger.error("%s.failed: %s", args.command, exc)
        return SketchFormatError.exit_code


if __name__ == "__main__":
    sys.exit(main())
