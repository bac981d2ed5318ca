#!/usr/bin/env python3
"""
Command-line entry point for the self-similar measure toolkit.
"""
import argparse
import logging
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Optional

from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.table import Table

from selfsim.config import settings
from selfsim.core import ifs_hash, load_ifs
from selfsim.core.ifs import IFS
from selfsim.dimension import similarity_dimension
from selfsim.errors import PrecisionError, SelfSimError
from selfsim.lab import continuity_sweep, modulus_report, run_invariant_suite, write_summary_csv, write_sweep_csv
from selfsim.optimize import (
    DensityResult,
    density_scan,
    hausdorff_measure_1d,
    hausdorff_upper_bound_balls,
    packing_measure,
    write_scan_csv,
)
from selfsim.report import ResultDocument, RunConfig, build_meta, load_run_config
from selfsim.separation import SeparationCert, certify_ssc
from selfsim.storage import RunStatus, save_run

# Initialize Rich console
console = Console()
logger = logging.getLogger(__name__)

EXIT_STATUS = {
    0: RunStatus.OK,
    2: RunStatus.INPUT_ERROR,
    3: RunStatus.UNCERTIFIED,
    4: RunStatus.PRECISION,
    5: RunStatus.VIOLATION,
}

# Sweep magnitudes default to (Delta / 20) * 2^-k, k = 0..7
DEFAULT_SWEEP_LEVELS = 8


@dataclass
class CommandOutcome:
    """What a command hands back to main() for emission."""

    result: dict
    s: Optional[float] = None
    cert: Optional[SeparationCert] = None
    exit_code: int = 0
    sweep_records: list = field(default_factory=list)


def configure_logging(level: Optional[str] = None) -> None:
    """Route every module logger through one RichHandler (plus a file if configured)."""
    level = (level or settings.log_level).upper()
    handlers: list[logging.Handler] = [RichHandler(rich_tracebacks=True, console=console)]
    if settings.log_file:
        settings.log_dir.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(settings.log_file)
        file_handler.setFormatter(logging.Formatter("%(asctime)s %(name)s %(levelname)s %(message)s"))
        handlers.append(file_handler)
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=handlers,
        force=True,
    )


def apply_overrides(config: RunConfig) -> None:
    """Push the command-wide knobs into the shared settings."""
    if config.threads is not None:
        settings.threads = config.threads
    if config.tol is not None:
        settings.measure_tol = config.tol
    if config.depth_cap is not None:
        settings.measure_depth_cap = config.depth_cap
        settings.separation_depth_cap = config.depth_cap


def _certify(ifs: IFS, s: float) -> SeparationCert:
    cert = certify_ssc(ifs, s, threads=settings.threads)
    console.print(f"SSC certified: [cyan]Delta >= {cert.delta_lb:.12g}[/cyan] "
                  f"(radius window [{cert.r_lo:.6g}, {cert.r_hi:.6g}])")
    return cert


def _bracket_panel(title: str, result: DensityResult) -> None:
    lines = [
        f"[bold]{title}[/bold]",
        f"Bracket: [{result.value_lo:.9g}, {result.value_hi:.9g}] (width {result.width:.2e})",
        f"Cells explored: {result.cells_explored}",
    ]
    if result.witness is not None:
        lines.append(f"Witness: {result.witness}")
    if result.objective == "hausdorff_balls":
        lines.append("[yellow]UPPER BOUND ONLY[/yellow]")
    if not result.converged:
        lines.append("[yellow]Requested precision not reached[/yellow]")
    console.print(Panel.fit("\n".join(lines), border_style="green" if result.converged else "yellow"))


def cmd_dim(config: RunConfig, ifs: IFS) -> CommandOutcome:
    dim = similarity_dimension(ifs.ratios, tol=config.tol)
    console.print(Panel.fit(
        f"[bold]Similarity dimension[/bold]\ns = {dim.s:.15g}\n"
        f"residual = {dim.residual:.3e} after {dim.iterations} iterations",
        border_style="green"
    ))
    return CommandOutcome(result=dim.to_dict(), s=dim.s)


def cmd_certify(config: RunConfig, ifs: IFS) -> CommandOutcome:
    s = similarity_dimension(ifs.ratios).s
    cert = _certify(ifs, s)
    return CommandOutcome(result=cert.to_dict(), s=s, cert=cert)


def cmd_packing(config: RunConfig, ifs: IFS) -> CommandOutcome:
    s = similarity_dimension(ifs.ratios).s
    cert = _certify(ifs, s)
    result = packing_measure(ifs, s, cert, eps=config.eps, window=config.window, threads=settings.threads)
    _bracket_panel(f"Packing measure ({config.window} window)", result)
    return CommandOutcome(result=result.to_dict(), s=s, cert=cert)


def cmd_hausdorff1d(config: RunConfig, ifs: IFS) -> CommandOutcome:
    s = similarity_dimension(ifs.ratios).s
    cert = _certify(ifs, s)
    result = hausdorff_measure_1d(ifs, s, cert, eps=config.eps, threads=settings.threads)
    _bracket_panel("Hausdorff measure (d = 1)", result)
    return CommandOutcome(result=result.to_dict(), s=s, cert=cert)


def cmd_hausdorff_balls(config: RunConfig, ifs: IFS) -> CommandOutcome:
    s = similarity_dimension(ifs.ratios).s
    cert = _certify(ifs, s)
    result = hausdorff_upper_bound_balls(ifs, s, cert, eps=config.eps, threads=settings.threads)
    _bracket_panel("Hausdorff measure over balls", result)
    return CommandOutcome(result=result.to_dict(), s=s, cert=cert)


def cmd_scan(config: RunConfig, ifs: IFS) -> CommandOutcome:
    s = similarity_dimension(ifs.ratios).s
    cert = _certify(ifs, s)
    radii = config.radii
    if radii is None:
        # Eleven evenly spaced radii across the certified window
        radii = [cert.r_lo + (cert.r_hi - cert.r_lo) * k / 10 for k in range(11)]
    records = list(density_scan(ifs, s, config.center_depth, radii, tol=config.tol))
    if config.csv is not None:
        rows = write_scan_csv(records, config.csv, ifs.dim)
        console.print(f"Wrote {rows} scan rows to {config.csv}")
    best = max(records, key=lambda r: r.density_lo, default=None)
    result = {"center_depth": config.center_depth, "radii": list(radii), "evaluations": len(records)}
    if best is not None:
        result["best"] = best.to_row()
        console.print(Panel.fit(
            f"[bold]Density scan[/bold]\n{len(records)} evaluations\n"
            f"Best density >= {best.density_lo:.9g} at x={list(best.x)}, r={best.r:.6g}",
            border_style="green"
        ))
    return CommandOutcome(result=result, s=s, cert=cert)


def cmd_verify(config: RunConfig, ifs: IFS) -> CommandOutcome:
    s = similarity_dimension(ifs.ratios).s
    cert = _certify(ifs, s)
    packing = packing_measure(ifs, s, cert, eps=config.eps, threads=settings.threads)
    _bracket_panel("Packing measure", packing)
    report = run_invariant_suite(ifs, s, cert, packing, config.samples, config.seed,
                                 blowup_cases=config.blowup_cases)

    table = Table(title="\nInvariant Suite", show_header=True, header_style="bold magenta")
    table.add_column("Check", style="cyan", width=20)
    table.add_column("Status", width=10)
    for check in report.checks:
        if check.skipped:
            status = "[yellow]skipped[/yellow]"
        elif check.passed:
            status = "[green]ok[/green]"
        else:
            status = "[red]FAILED[/red]"
        table.add_row(check.name, status)
    console.print(table)
    console.print()

    result = {"packing": packing.to_dict(), "suite": report.to_dict(), "samples": config.samples}
    return CommandOutcome(result=result, s=s, cert=cert, exit_code=0 if report.ok else 5)


def cmd_sweep(config: RunConfig, ifs: IFS) -> CommandOutcome:
    s = similarity_dimension(ifs.ratios).s
    cert = _certify(ifs, s)
    magnitudes = config.magnitudes
    if magnitudes is None:
        magnitudes = [cert.delta_lb / 20 * 2.0 ** -k for k in range(DEFAULT_SWEEP_LEVELS)]
    eps = config.eps if config.eps is not None else settings.packing_eps
    records = continuity_sweep(
        ifs, magnitudes, config.trials, eps=eps, seed=config.seed, mode=config.mode,
        measure="both" if config.include_hausdorff else "packing", threads=settings.threads,
    )
    summary = modulus_report(records)

    table = Table(title="\nContinuity Sweep", show_header=True, header_style="bold magenta")
    table.add_column("Magnitude", style="cyan", width=12)
    table.add_column("Certified", style="green", width=10)
    table.add_column("Max dev", style="yellow", width=12)
    table.add_column("Mean dev", style="blue", width=12)
    for row in summary.rows:
        table.add_row(
            f"{row.magnitude:.3e}",
            str(row.n_certified),
            f"{row.max_dev:.3e}" if row.max_dev is not None else "N/A",
            f"{row.mean_dev:.3e}" if row.mean_dev is not None else "N/A",
        )
    console.print(table)
    console.print()

    if config.csv is not None:
        write_sweep_csv(records, config.csv)
        summary_path = config.csv.with_name(f"{config.csv.stem}_summary.csv")
        write_summary_csv(summary, summary_path)
        console.print(f"Wrote {len(records)} trials to {config.csv} and the summary to {summary_path}")

    result = {
        "magnitudes": list(magnitudes),
        "trials": config.trials,
        "mode": config.mode,
        "eps": eps,
        "summary": summary.to_dict(),
        "records": [record.to_row() for record in records],
    }
    return CommandOutcome(result=result, s=s, cert=cert, sweep_records=records)


COMMAND_HANDLERS: dict[str, Callable[[RunConfig, IFS], CommandOutcome]] = {
    "dim": cmd_dim,
    "certify": cmd_certify,
    "packing": cmd_packing,
    "hausdorff1d": cmd_hausdorff1d,
    "hausdorff-balls": cmd_hausdorff_balls,
    "scan": cmd_scan,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
}


def emit(config: RunConfig, ifs: IFS, outcome: CommandOutcome, started: datetime) -> None:
    """Write (or print) the result document and store it when asked to."""
    document = ResultDocument(
        command=config.command,
        ifs_hash=ifs_hash(ifs),
        s=outcome.s,
        cert=outcome.cert.to_dict() if outcome.cert is not None else None,
        result=outcome.result,
        meta=build_meta(started, settings.threads, seed=config.seed, ifs_path=str(config.ifs_path)),
    )
    if config.out is not None:
        document.write(config.out)
    else:
        console.print_json(document.to_json())

    if config.store or settings.persist_runs:
        run_id = save_run(
            document,
            status=EXIT_STATUS.get(outcome.exit_code, RunStatus.VIOLATION),
            ifs_name=config.ifs_path.stem,
            sweep_records=outcome.sweep_records,
        )
        console.print(f"Stored as run #{run_id}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Certified packing and Hausdorff measures of self-similar sets",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Similarity dimension of the Cantor set
  python run.py dim systems/cantor.json

  # Packing measure bracket of width 1e-3
  python run.py packing systems/cantor.json --eps 1e-3 --out cantor_packing.json

  # Invariant suite with 200 seeded sample balls
  python run.py verify systems/cantor.json --samples 200 --seed 7

  # Continuity sweep with a CSV of every trial
  python run.py sweep systems/cantor_slack.json --seed 1 --eps 5e-3 --csv sweep.csv
        """
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("ifs_path", type=Path, help="Path to the IFS description (JSON)")
    common.add_argument("--eps", type=float, help="Bracket width of the optimizers")
    common.add_argument("--tol", type=float, help="Tolerance of measure evaluation (and of the Moran solve for dim)")
    common.add_argument("--depth-cap", type=int, help="Maximum cylinder depth")
    common.add_argument("--seed", type=int, help="Seed for every random draw")
    common.add_argument("--samples", type=int, help="Random sample balls (verify)")
    common.add_argument("--threads", type=int, help="Worker threads")
    common.add_argument("--out", type=Path, help="Write the result document to this file")
    common.add_argument("--csv", type=Path, help="Write the scan or sweep table to this CSV")
    common.add_argument("--config", type=Path, help="YAML file with any of the parameters above")
    common.add_argument("--store", action="store_true", default=None, help="Store the result in the database")
    common.add_argument("--log-level", help="Logging level (default from settings)")

    for name in COMMAND_HANDLERS:
        subparsers.add_parser(name, parents=[common], help=f"Run the {name} command")

    subparsers.choices["packing"].add_argument(
        "--window", choices=["compact", "full"], help="Radius window searched"
    )
    subparsers.choices["verify"].add_argument(
        "--blowup-cases", type=int, help="Random balls for the blow-up check"
    )
    scan = subparsers.choices["scan"]
    scan.add_argument("--radii", type=float, nargs="+", help="Radius grid")
    scan.add_argument("--center-depth", type=int, help="Word length of the scanned centers")
    sweep = subparsers.choices["sweep"]
    sweep.add_argument("--magnitudes", type=float, nargs="+", help="Strictly descending perturbation sizes")
    sweep.add_argument("--trials", type=int, help="Perturbed systems per magnitude")
    sweep.add_argument("--mode", choices=["translations", "ratios", "both"], help="What to perturb")
    sweep.add_argument("--include-hausdorff", action="store_true", default=None,
                       help="Bracket the Hausdorff measure as well (d = 1)")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    """Main entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)

    flags = {key: value for key, value in vars(args).items() if key not in ("config", "log_level")}
    started = datetime.now(timezone.utc)
    try:
        config = load_run_config(flags, args.config)
        apply_overrides(config)
        ifs = load_ifs(config.ifs_path)

        console.print(Panel.fit(
            f"[bold magenta]selfsim {config.command}[/bold magenta]\n{ifs}",
            border_style="magenta"
        ))

        outcome = COMMAND_HANDLERS[config.command](config, ifs)
        emit(config, ifs, outcome, started)
        if outcome.exit_code:
            console.print(f"[red]{config.command} found violations[/red]")
        return outcome.exit_code

    except PrecisionError as e:
        console.print(f"[red]Precision not reached:[/red] {e} (best bracket [{e.lo:.9g}, {e.hi:.9g}])")
        return e.exit_code
    except SelfSimError as e:
        console.print(f"[red]Error ({type(e).__name__}):[/red] {e}")
        return e.exit_code
    except KeyboardInterrupt:
        console.print("\n[yellow]Interrupted by user[/yellow]")
        return 1


if __name__ == "__main__":
    sys.exit(main())
