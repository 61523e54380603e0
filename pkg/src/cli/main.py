"""Command line entry points: basis, run, example, upscale, memcheck, stabcheck."""

import argparse
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv
from rich.console import Console
from rich.table import Table

from src.config.settings import Config, ExperimentConfig, LoggingConfig, OutputConfig
from src.experiments.examples import run_example
from src.experiments.problem import build_decomposition, build_problem, decomposition_constants
from src.memory.direct import compare_dememorized
from src.multiscale.builder import summarize
from src.multiscale.export import export_basis
from src.reporting.experiment_report import ExperimentReportGenerator, render_summary, write_snapshots, write_trace
from src.solvers.runner import run
from src.upscaling.io import load_medium, save_kernel
from src.upscaling.kernel import upscale
from src.upscaling.stability import check_continuous_stability
from src.utils.errors import MemsplitError
from src.utils.file_utils import ensure_directory, write_csv_rows
from src.utils.logging import logger

console = Console()

# LoggingConfig fields get a log- prefix on the command line
_LOGGING_FLAGS = {"level": "log_level", "file_level": "log_file_level", "log_dir": "log_dir"}


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    """One flag per config field; values stay strings and pydantic coerces them."""
    parser.add_argument("--config", type=Path, default=None, help="key = value or YAML config file")
    for model in (ExperimentConfig, OutputConfig):
        for name, info in model.model_fields.items():
            if info.annotation is bool and info.default is True:
                parser.add_argument(_flag("no_" + name), dest=name, action="store_const", const=False, default=None)
            elif info.annotation is bool:
                parser.add_argument(_flag(name), dest=name, action="store_const", const=True, default=None)
            else:
                parser.add_argument(_flag(name), dest=name, default=None, help=info.description)
    for name, dest in _LOGGING_FLAGS.items():
        parser.add_argument(_flag(dest), dest=dest, default=None)


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    values: Dict[str, Any] = {}
    for model in (ExperimentConfig, OutputConfig):
        for name in model.model_fields:
            values[name] = getattr(args, name, None)
    for name, dest in _LOGGING_FLAGS.items():
        values[name] = getattr(args, dest, None)
    return values


def _resolve(args: argparse.Namespace, example: Optional[int] = None) -> Config:
    config = Config.resolve(args.config, _overrides(args), example=example)
    _configure_logging(config.logging)
    return config


def _configure_logging(settings: LoggingConfig) -> None:
    logger.reconfigure(
        log_dir=str(settings.log_dir) if settings.log_dir else None,
        console_level=settings.level,
        file_level=settings.file_level,
    )


def _print_mapping(title: str, values: Dict[str, Any]) -> None:
    table = Table(title=title)
    table.add_column("key")
    table.add_column("value", justify="right")
    for key, value in values.items():
        table.add_row(key, f"{value:.6e}" if isinstance(value, float) else str(value))
    console.print(table)


def cmd_basis(args: argparse.Namespace) -> int:
    config = _resolve(args)
    problem = build_problem(config.experiment)
    decomposition = build_decomposition(problem)
    constants = decomposition_constants(problem, decomposition)
    print(f"dim V1 = {decomposition.dim_v1}, dim V2 = {decomposition.dim_v2}")
    if constants is not None:
        print(f"gamma = {constants.gamma!r}")
        print(f"dt_max = {constants.dt_bound!r}")
    else:
        print("gamma = n/a (V2 is empty)")

    summary = summarize(decomposition, problem.operators.stiffness[0])
    if constants is not None:
        summary.update(constants.to_dict())
    _print_mapping("Space decomposition", summary)

    if not args.no_export:
        path = args.export or ensure_directory(config.output.output_dir) / "basis.csv"
        export_basis(decomposition, problem.grid, path, metadata={"config_hash": config.hash, "units": "fine nodal values"})
        print(f"basis written to {path}")
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    config = _resolve(args)
    settings = config.experiment
    problem = build_problem(settings)
    decomposition = constants = None
    if settings.space != "fine":
        decomposition = build_decomposition(problem)
        constants = decomposition_constants(problem, decomposition)

    reference = None
    if args.reference:
        ref_config = problem.scheme_config("implicit", "fine")
        reference = run(
            ref_config, problem.space("fine", None), problem.operators,
            u0=problem.initial_value, keep_history=True, grid=problem.grid,
        ).history

    scheme_config = problem.scheme_config(settings.scheme, settings.space)
    space = problem.space(settings.space, decomposition, augment=scheme_config.augment_inflow)
    result = run(
        scheme_config, space, problem.operators, u0=problem.initial_value,
        reference=reference, constants=constants, grid=problem.grid,
    )

    name = f"{settings.scheme}_{settings.space}"
    directory = ensure_directory(config.output.output_dir / f"run_{name}")
    metadata = {"config_hash": config.hash, "run": name}
    write_trace(result, directory / f"trace_{name}.csv", metadata)
    if config.output.write_snapshots:
        write_snapshots(result, directory, name, problem.grid.fine_n, metadata)
    summary = result.to_dict()
    if constants is not None:
        summary.update({"dt_bound": constants.dt_bound, "gamma": constants.gamma})
    _print_mapping(f"Run {name}", {k: v for k, v in summary.items() if not isinstance(v, (list, tuple, dict))})
    print(f"outputs written to {directory}")
    return 0


def cmd_example(args: argparse.Namespace) -> int:
    config = _resolve(args, example=args.id)
    bundle = run_example(config, example=args.id)
    output_dir = ExperimentReportGenerator(bundle).generate_report()
    render_summary(bundle.summary_rows(), title=f"Example {args.id}", console=console)
    print(f"outputs written to {output_dir}")
    return 0


def cmd_upscale(args: argparse.Namespace) -> int:
    logger.reconfigure(console_level=args.log_level or LoggingConfig().level)
    medium = load_medium(args.medium)
    kernel = upscale(medium)
    output = args.output or ensure_directory(Path(OutputConfig().output_dir)) / "kernel.csv"
    save_kernel(kernel, output, {"source": Path(args.medium).name})

    table = Table(title=f"a_bar = {kernel.mean_velocity:.12g}, var(a) = {kernel.variance:.12g}")
    for column in ("i", "a", "u", "beta"):
        table.add_column(column, justify="right")
    for i, a in enumerate(kernel.velocities):
        node = f"{kernel.nodes[i]:.12g}" if i < kernel.nodes.size else ""
        weight = f"{kernel.weights[i]:.12g}" if i < kernel.weights.size else ""
        table.add_row(str(i + 1), f"{a:.12g}", node, weight)
    console.print(table)
    if kernel.negative_weights:
        print(f"warning: negative weights at {kernel.negative_weights}")
    print(f"kernel written to {output}")
    return 0


def cmd_memcheck(args: argparse.Namespace) -> int:
    config = _resolve(args)
    settings = config.experiment
    problem = build_problem(settings)
    if args.dts:
        dts = [float(item) for item in args.dts.split(",") if item.strip()]
    else:
        dts = [settings.dt, settings.dt / 2, settings.dt / 4]
    template = problem.scheme_config("implicit", "fine")
    report = compare_dememorized(problem.grid, problem.operators, template, dts, settings.T, problem.u0)

    rows = [
        {"dt": dt, "gap": gap, "order": report.orders[k - 1] if 0 < k <= len(report.orders) else None}
        for k, (dt, gap) in enumerate(zip(report.dts, report.gaps))
    ]
    path = write_csv_rows(
        ensure_directory(config.output.output_dir) / "memcheck.csv",
        rows,
        ["dt", "gap", "order"],
        metadata={"config_hash": config.hash, "units": "gap=relative L2 at T", "T": settings.T},
    )
    table = Table(title="Direct memory vs dememorized")
    for column in ("dt", "gap", "order"):
        table.add_column(column, justify="right")
    for row in rows:
        table.add_row(*("-" if row[c] is None else f"{row[c]:.4e}" for c in ("dt", "gap", "order")))
    console.print(table)
    print(f"observed order = {report.observed_order!r}")
    print(f"report written to {path}")
    return 0


def cmd_stabcheck(args: argparse.Namespace) -> int:
    config = _resolve(args)
    settings = config.experiment
    problem = build_problem(settings)
    report = check_continuous_stability(problem.kappa, settings.velocity_tilde, settings.beta)
    _print_mapping("Memory stability condition", report.to_dict())
    if not report.satisfied:
        shown = ", ".join(f"({r}, {c})" for r, c in report.violations[:10])
        print(f"violating cells (row, col): {shown}{' ...' if len(report.violations) > 10 else ''}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="memsplit",
        description="Multiscale splitting schemes for transport with memory",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    pb = sub.add_parser("basis", help="Build V_H^1 and V_H^2, print gamma and the step bound")
    _add_config_flags(pb)
    pb.add_argument("--export", type=Path, default=None, help="Basis CSV path (default <output-dir>/basis.csv)")
    pb.add_argument("--no-export", action="store_true")
    pb.set_defaults(func=cmd_basis)

    pr = sub.add_parser("run", help="Run one scheme on one space")
    _add_config_flags(pr)
    pr.add_argument("--reference", action="store_true", help="Also run the fine reference and record errors")
    pr.set_defaults(func=cmd_run)

    pe = sub.add_parser("example", help="Reference plus multiscale runs of an example")
    pe.add_argument("id", type=int, choices=[1, 2, 3])
    _add_config_flags(pe)
    pe.set_defaults(func=cmd_example)

    pu = sub.add_parser("upscale", help="Memory kernel of a layered medium")
    pu.add_argument("medium", type=Path, help="CSV with layer widths m and velocities a")
    pu.add_argument("--output", type=Path, default=None)
    pu.add_argument("--log-level", default=None)
    pu.set_defaults(func=cmd_upscale)

    pm = sub.add_parser("memcheck", help="Direct memory solver against the dememorized scheme")
    _add_config_flags(pm)
    pm.add_argument("--dts", default=None, help="Comma separated step sizes (default dt, dt/2, dt/4)")
    pm.set_defaults(func=cmd_memcheck)

    ps = sub.add_parser("stabcheck", help="Check beta kappa + a~ . grad kappa >= 0 on the field")
    _add_config_flags(ps)
    ps.set_defaults(func=cmd_stabcheck)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (MemsplitError, ValueError) as e:
        print(f"error: {type(e).__name__}: {_one_line(e)}", file=sys.stderr)
        return 2
    except Exception as e:
        logger.exception("Unexpected failure", extra={"command": args.cmd})
        print(f"error: {type(e).__name__}: {_one_line(e)}", file=sys.stderr)
        return 1


def _one_line(error: Exception) -> str:
    return " ".join(str(error).split())


if __name__ == "__main__":
    sys.exit(main())
