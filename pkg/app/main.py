#!/usr/bin/env python3
"""
SmoothCert command-line application.

Subcommands:
    certify    certify inputs from a score file or a synthetic model
    bounds     Lipschitz bounds of the smoothed classifier and sigma*
    curve      certified accuracy as a function of the radius
    sweep      corrected radius per map, temperature and concentration method
    tightness  Stein vs finite-difference gradient of the smoothed h-bar
"""

import argparse
import functools
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from app.certify.concentration import ConcentrationMethod
from app.certify.lipschitz_bounds import BoundCase, BoundInputs, bound_report, optimal_sigma, smoothed_lipschitz_elementwise
from app.certify.radius import RadiusRule
from app.config.config_manager import ConfigManager
from app.config.settings_schema import LogLevel, TemperatureScale
from app.errors import ConfigError, DataFormatError, DomainError, NumericalConsistencyError, SmoothCertError
from app.models.synthetic_models import ModelKind, SyntheticModel, numeric_smoothed_gradient_norm
from app.runner.batch_runner import BatchRunner
from app.runner.config_models import GridConfig
from app.runner.events import EventEmitter, Stage
from app.runner.jsonl_parser import CertificateParser, CertificateRecord, write_records
from app.runner.smoothing_engine import (
    ScoreMatrix, Stream, certified_accuracy_curve, certify_from_scores, lvm_rs_certify,
    sample_scores, temperature_sweep,
)
from app.utils.score_files import ScoreFile, load_scores, read_labels

logger = logging.getLogger("app.main")

DATA_FORMAT_EXIT = 3


def _float_list(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise DomainError(f"Expected a comma-separated list of numbers, got {text!r}") from e


def _name_list(text: str) -> List[str]:
    return [item.strip().lower() for item in text.split(",") if item.strip()]


def _add_common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", default=None,
                        help="Settings file (default: $SMOOTHCERT_CONFIG or ~/.smoothcert/settings.json)")
    parser.add_argument("--log-level", default=None, choices=[level.value for level in LogLevel],
                        help="Logging level")
    parser.add_argument("--jsonl", action="store_true",
                        help="Emit JSONL progress events on stderr instead of a progress bar")


def _add_source_arguments(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--scores", default=None, help="Pre-sampled score file (binary or CSV)")
    source.add_argument("--model", default=None, choices=[kind.value for kind in ModelKind],
                        help="Built-in synthetic classifier")
    parser.add_argument("--inputs", default=None, help="CSV of input points, one per row (model mode)")
    parser.add_argument("--x", action="append", default=None,
                        help="Comma-separated input point; repeat for several inputs (model mode)")
    parser.add_argument("--weights", default=None,
                        help="CSV weight matrix for linear_multiclass, one class per row, bias last")
    parser.add_argument("--model-lipschitz", type=float, default=1.0,
                        help="Lipschitz constant L of worst_case_hbar (default: 1)")


def _add_grid_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--sigma", type=float, default=None, help="Noise level")
    parser.add_argument("--alpha", type=float, default=None, help="Risk level (default: 1e-3)")
    parser.add_argument("--n0", type=int, default=None, help="Validation samples per input")
    parser.add_argument("--n", type=int, default=None, help="Certification samples per input")
    parser.add_argument("--maps", type=_name_list, default=None,
                        help="Comma-separated subset of hardmax,softmax,sparsemax")
    parser.add_argument("--t-lower", type=float, default=None, help="Lowest temperature")
    parser.add_argument("--t-upper", type=float, default=None, help="Highest temperature")
    parser.add_argument("--t-count", type=int, default=None, help="Number of temperatures")
    parser.add_argument("--t-scale", default=None, choices=[scale.value for scale in TemperatureScale],
                        help="Temperature spacing")
    parser.add_argument("--mass", type=float, default=None, help="Simplex mass r")
    parser.add_argument("--method", default=None, choices=["bernstein", "hoeffding", "clopper-pearson"],
                        help="Concentration method")
    parser.add_argument("--hardmax-method", default=None, choices=["bernstein", "hoeffding", "clopper-pearson"],
                        help="Concentration method for hardmax (default: --method)")
    parser.add_argument("--risk-split", default=None, choices=["paper-literal", "per-class", "bonferroni"],
                        help="How alpha is shared among the class bounds")
    parser.add_argument("--seed", type=int, default=None, help="Random seed")
    parser.add_argument("--jobs", type=int, default=None, help="Inputs certified in parallel")
    parser.add_argument("--out", default=None, help="Output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smoothcert",
                                     description="Randomized smoothing certification with learned simplex maps")
    subparsers = parser.add_subparsers(dest="command", required=True)

    certify = subparsers.add_parser("certify", help="Certify inputs")
    _add_common_arguments(certify)
    _add_source_arguments(certify)
    _add_grid_arguments(certify)
    certify.add_argument("--rule", default=None, choices=[rule.value for rule in RadiusRule],
                         help="Radius rule (default: R2)")
    certify.add_argument("--lipschitz", type=float, default=None,
                         help="Lipschitz constant of the mapped base classifier, for R1")
    certify.add_argument("--labels", default=None, help="CSV of input_id,label")
    certify.set_defaults(handler=cmd_certify)

    bounds = subparsers.add_parser("bounds", help="Lipschitz bounds of the smoothed classifier")
    _add_common_arguments(bounds)
    bounds.add_argument("--lipschitz", type=float, required=True, help="Lipschitz constant of s^r o f")
    bounds.add_argument("--mass", type=float, default=1.0, help="Simplex mass r")
    sigma_group = bounds.add_mutually_exclusive_group()
    sigma_group.add_argument("--sigma", type=float, default=None, help="Noise level")
    sigma_group.add_argument("--optimal", action="store_true", help="Evaluate at sigma*")
    bounds.add_argument("--case", default=BoundCase.VECTOR.value, choices=[case.value for case in BoundCase],
                        help="Element-wise or vector bound")
    bounds.set_defaults(handler=cmd_bounds)

    curve = subparsers.add_parser("curve", help="Certified accuracy curve")
    _add_common_arguments(curve)
    curve.add_argument("--certificates", required=True, help="Certificate JSONL file")
    curve.add_argument("--labels", default=None, help="CSV of input_id,label (default: labels in records)")
    curve.add_argument("--eps", type=_float_list, required=True, help="Comma-separated radii")
    curve.add_argument("--out", default=None, help="Output CSV (default: stdout)")
    curve.set_defaults(handler=cmd_curve)

    sweep = subparsers.add_parser("sweep", help="Corrected radius over the map/temperature grid")
    _add_common_arguments(sweep)
    _add_source_arguments(sweep)
    _add_grid_arguments(sweep)
    sweep.add_argument("--methods", type=_name_list, default=None,
                       help="Comma-separated concentration methods (default: --method)")
    sweep.set_defaults(handler=cmd_sweep)

    tightness = subparsers.add_parser("tightness", help="Check the element-wise bound on the worst-case h-bar")
    _add_common_arguments(tightness)
    tightness.add_argument("--lipschitz", type=float, default=1.0, help="Lipschitz constant L of h-bar")
    tightness.add_argument("--mass", type=float, default=1.0, help="Range r of h-bar")
    tightness.add_argument("--sigma", type=float, default=0.5, help="Noise level")
    tightness.add_argument("--dim", type=int, default=1, help="Input dimension")
    tightness.add_argument("--n-mc", type=int, default=1000000, help="Monte-Carlo samples")
    tightness.add_argument("--seed", type=int, default=0, help="Random seed")
    tightness.add_argument("--tolerance", type=float, default=0.02, help="Allowed relative error")
    tightness.set_defaults(handler=cmd_tightness)

    return parser


def setup_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def _write_output(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def _grid_from_args(args, settings: dict, **extra) -> GridConfig:
    overrides = dict(
        map_kinds=args.maps,
        t_lower=args.t_lower,
        t_upper=args.t_upper,
        t_count=args.t_count,
        t_scale=args.t_scale,
        mass=args.mass,
        n0=args.n0,
        n=args.n,
        sigma=args.sigma,
        alpha=args.alpha,
        method=args.method,
        hardmax_method=args.hardmax_method,
        risk_split=args.risk_split,
        seed=args.seed,
        rule=getattr(args, "rule", None),
        lipschitz=getattr(args, "lipschitz", None),
    )
    overrides.update(extra)
    return GridConfig.from_settings(settings, **overrides)


def _load_points(args, model: SyntheticModel) -> np.ndarray:
    if args.inputs and args.x:
        raise ConfigError("Use either --inputs or --x, not both")
    if args.inputs:
        try:
            points = np.loadtxt(args.inputs, delimiter=",", ndmin=2)
        except ValueError as e:
            raise DataFormatError(f"Cannot read input points from {args.inputs}: {e}") from e
    elif args.x:
        points = np.array([_float_list(item) for item in args.x], dtype=np.float64)
    else:
        points = np.zeros((1, model.input_dim))
    if points.ndim != 2 or points.shape[1] != model.input_dim:
        raise ConfigError(f"Input points must have dimension {model.input_dim}, got shape {points.shape}")
    if not np.all(np.isfinite(points)):
        raise DataFormatError("Input points must be finite")
    return points


def _build_model(args, mass: float) -> SyntheticModel:
    kind = ModelKind.parse(args.model)
    if kind is ModelKind.THRESHOLD_1D:
        return SyntheticModel.threshold_1d()
    if kind is ModelKind.WORST_CASE_HBAR:
        return SyntheticModel.worst_case_hbar(args.model_lipschitz, mass)
    if not args.weights:
        raise ConfigError("linear_multiclass needs --weights")
    try:
        matrix = np.loadtxt(args.weights, delimiter=",", ndmin=2)
    except ValueError as e:
        raise DataFormatError(f"Cannot read weights from {args.weights}: {e}") from e
    if matrix.shape[1] < 2:
        raise DataFormatError("Weight file needs at least one weight column and a bias column")
    return SyntheticModel.linear_multiclass(matrix[:, :-1], matrix[:, -1])


def _load_score_file(args, settings: dict) -> ScoreFile:
    scores = load_scores(args.scores)
    if scores.sigma is not None and args.sigma is not None and scores.sigma != args.sigma:
        raise ConfigError(f"--sigma {args.sigma} conflicts with sigma {scores.sigma} recorded in {args.scores}")
    if scores.sigma is None and args.sigma is None:
        raise ConfigError(f"{args.scores} records no sigma; pass --sigma")
    return scores


def _file_grid(args, settings: dict, scores: ScoreFile) -> GridConfig:
    sigma = scores.sigma if scores.sigma is not None else args.sigma
    n0 = args.n0 if args.n0 is not None else settings["certification"]["n0"]
    n = args.n if args.n is not None else scores.samples - n0
    return _grid_from_args(args, settings, sigma=sigma, n0=n0, n=n)


def _certify_block(matrix: ScoreMatrix, grid: GridConfig):
    validation, certification = matrix.split(grid.n0, grid.n)
    return certify_from_scores(validation, certification, grid)


def _jobs(args, settings: dict) -> int:
    jobs = args.jobs if args.jobs is not None else settings["advanced"]["max_concurrent_workers"]
    if jobs < 1:
        raise ConfigError(f"--jobs must be positive, got {jobs}")
    return jobs


def cmd_certify(args, config: ConfigManager, emitter: EventEmitter) -> int:
    settings = config.get_settings()
    labels = read_labels(args.labels) if args.labels else {}

    if args.scores:
        scores = _load_score_file(args, settings)
        grid = _file_grid(args, settings, scores)
        grid.require_valid()
        input_ids = scores.input_ids
        tasks = [functools.partial(_certify_block, scores.score_matrix(i), grid) for i in range(len(scores))]
    else:
        grid = _grid_from_args(args, settings)
        grid.require_valid()
        model = _build_model(args, grid.mass)
        points = _load_points(args, model)
        input_ids = list(range(points.shape[0]))
        tasks = [functools.partial(lvm_rs_certify, model, point, grid, input_id)
                 for input_id, point in zip(input_ids, points)]

    logger.info("Certifying %d inputs over %d grid candidates", len(tasks), len(grid.candidates()))
    runner = BatchRunner(emitter, max_workers=_jobs(args, settings), description="Certifying")
    batch = runner.run(tasks)

    records = [CertificateRecord.from_certificate(cert, input_id, grid.seed, labels.get(input_id))
               for input_id, cert in zip(input_ids, batch.results)]
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            write_records(records, f)
    else:
        write_records(records, sys.stdout)
        sys.stdout.flush()

    abstained = sum(record.abstained for record in records)
    if abstained:
        emitter.warning(f"{abstained} of {len(records)} inputs abstained", data={"abstained": abstained})
    emitter.result(f"Certified {len(records)} inputs", data={
        "count": len(records),
        "abstained": abstained,
        "duration_seconds": batch.duration_seconds,
    })
    return 0


def cmd_bounds(args, config: ConfigManager, emitter: EventEmitter) -> int:
    case = BoundCase.parse(args.case)
    if args.optimal:
        sigma = optimal_sigma(args.lipschitz, args.mass, case)
    elif args.sigma is not None:
        sigma = args.sigma
    else:
        raise ConfigError("bounds needs --sigma or --optimal")

    report = bound_report(BoundInputs(args.lipschitz, sigma, args.mass), case)
    rows = [
        ("case", case.value),
        ("lipschitz", f"{args.lipschitz:.10g}"),
        ("mass", f"{args.mass:.10g}"),
        ("sigma", f"{sigma:.10g}"),
        ("bound", f"{report.bound:.10g}"),
        ("gaussian_term", f"{report.gaussian_term:.10g}"),
        ("base_term", f"{report.base_term:.10g}"),
        ("optimal_sigma", f"{report.optimal_sigma:.10g}"),
        ("ratio", f"{report.ratio:.10g}"),
    ]
    _write_output("".join(f"{key}: {value}\n" for key, value in rows), None)
    emitter.result("Bounds computed", data={key: value for key, value in rows})
    return 0


def cmd_curve(args, config: ConfigManager, emitter: EventEmitter) -> int:
    if any(eps < 0 for eps in args.eps):
        raise ConfigError("Radii in --eps must be nonnegative")
    records = CertificateParser().parse_file(args.certificates)
    label_map = read_labels(args.labels) if args.labels else {}
    labels = []
    for record in records:
        label = label_map.get(record.input_id, record.label)
        if label is None:
            raise DataFormatError(f"No label for input {record.input_id}")
        labels.append(label)

    curve = certified_accuracy_curve(records, labels, args.eps)
    lines = ["eps,certified_accuracy\n"] + [f"{eps!r},{accuracy!r}\n" for eps, accuracy in curve]
    _write_output("".join(lines), args.out)
    emitter.result(f"Curve over {len(records)} certificates", data={"points": len(curve)})
    return 0


def cmd_sweep(args, config: ConfigManager, emitter: EventEmitter) -> int:
    settings = config.get_settings()
    methods = [ConcentrationMethod.parse(m) for m in args.methods] if args.methods else None

    if args.scores:
        scores = _load_score_file(args, settings)
        sigma = scores.sigma if scores.sigma is not None else args.sigma
        grid = _grid_from_args(args, settings, sigma=sigma, n=scores.samples)
        grid.require_valid()
        input_ids = scores.input_ids
        tasks = [functools.partial(temperature_sweep, scores.score_matrix(i), grid, methods)
                 for i in range(len(scores))]
    else:
        grid = _grid_from_args(args, settings)
        grid.require_valid()
        model = _build_model(args, grid.mass)
        points = _load_points(args, model)
        input_ids = list(range(points.shape[0]))

        def sweep_point(point, input_id):
            matrix = sample_scores(model, point, grid.n, grid.sigma, grid.seed, input_id,
                                   Stream.CERTIFICATION, grid.block_size)
            return temperature_sweep(matrix, grid, methods)

        tasks = [functools.partial(sweep_point, point, input_id) for input_id, point in zip(input_ids, points)]

    runner = BatchRunner(emitter, max_workers=_jobs(args, settings), description="Sweeping")
    batch = runner.run(tasks)

    lines = ["input_id,map,temperature,method,radius\n"]
    for input_id, rows in zip(input_ids, batch.results):
        lines.extend(f"{input_id},{row.map_kind.value},{row.temperature!r},{row.method.value},{row.radius!r}\n"
                     for row in rows)
    _write_output("".join(lines), args.out)
    emitter.result(f"Swept {len(input_ids)} inputs", data={"rows": len(lines) - 1})
    return 0


def cmd_tightness(args, config: ConfigManager, emitter: EventEmitter) -> int:
    if args.dim < 1:
        raise ConfigError("--dim must be positive")
    if not 0 < args.tolerance < 1:
        raise ConfigError("--tolerance must lie in (0, 1)")
    model = SyntheticModel.worst_case_hbar(args.lipschitz, args.mass)
    bound = smoothed_lipschitz_elementwise(BoundInputs(args.lipschitz, args.sigma, args.mass))
    emitter.info("Estimating smoothed gradient", data={"n_mc": args.n_mc})
    estimate = numeric_smoothed_gradient_norm(model, np.zeros(args.dim), args.sigma, args.n_mc, seed=args.seed)
    relative_error = abs(estimate.stein_norm - bound) / bound

    rows = [
        ("bound", bound),
        ("stein_norm", estimate.stein_norm),
        ("stein_stderr", estimate.stein_stderr),
        ("fd_norm", estimate.fd_norm),
        ("fd_stderr", estimate.fd_stderr),
        ("relative_error", relative_error),
    ]
    _write_output("".join(f"{key}: {value:.10g}\n" for key, value in rows), None)
    emitter.result("Tightness check finished", data={key: value for key, value in rows})
    if relative_error > args.tolerance:
        raise NumericalConsistencyError(
            f"Stein estimate {estimate.stein_norm:.6g} is {relative_error:.2%} away from the bound {bound:.6g}"
        )
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    emitter = EventEmitter(Stage(args.command), enabled=args.jsonl)
    try:
        config = ConfigManager(args.config)
        setup_logging(args.log_level or config.get_settings("advanced").get("log_level", "warning"))
        return args.handler(args, config, emitter)
    except SmoothCertError as e:
        emitter.error(str(e))
        print(f"Error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        emitter.error(str(e))
        print(f"Error: {e}", file=sys.stderr)
        return DATA_FORMAT_EXIT


if __name__ == "__main__":
    sys.exit(main())
