"""
quenchfidelity command line.

Usage:
    quenchfidelity quench -c run.ini --set model.gamma_f="0, -2"
    quenchfidelity scan -c scan.ini
    quenchfidelity modes --set model.gamma_f="-1.1, -2"
    quenchfidelity verify --seed 7
    quenchfidelity xy-demo --grid-samples 101

Exit codes: 0 success, 1 computation failure or failed verification,
2 invalid configuration (nothing is written).
"""

import logging
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv
import typer

from src.quenchfidelity.commands.command_builder import CommandBuilder
from src.quenchfidelity.config.configfile import load_run_config, parse_overrides
from src.quenchfidelity.core.errors import ConfigError, QuenchFidelityError

load_dotenv()

app = typer.Typer(
    name="quenchfidelity",
    help="Quench fidelity, Loschmidt echoes and dynamical phase diagrams of two-band models",
    add_completion=False,
    no_args_is_help=True,
)

CONFIG_HELP = "INI file layered over the packaged defaults"
SET_HELP = "Override one setting, written as section.key=value (repeatable)"


@app.callback()
def main(verbose: bool = typer.Option(False, "--verbose", "-v", help="Log debug details")):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )


def _run(name: str, config: Optional[Path], overrides: List[str], require: Optional[str] = None, **options):
    try:
        run_config = load_run_config(str(config) if config else None, parse_overrides(overrides), require)
        command = CommandBuilder(run_config, **options).setup_command(name)
    except ConfigError as e:
        typer.echo(f"configuration error: {e}", err=True)
        raise typer.Exit(code=2)

    try:
        result = command.process()
    except ConfigError as e:
        typer.echo(f"configuration error: {e}", err=True)
        raise typer.Exit(code=2)
    except QuenchFidelityError as e:
        typer.echo(f"error: {e}", err=True)
        raise typer.Exit(code=1)

    for path in result.paths:
        typer.echo(f"wrote {path}")
    if not result.passed:
        typer.echo("verification failed", err=True)
        raise typer.Exit(code=1)


@app.command()
def quench(
    config: Optional[Path] = typer.Option(None, "--config", "-c", help=CONFIG_HELP),
    overrides: List[str] = typer.Option([], "--set", "-s", help=SET_HELP),
):
    """Echo time series, per-mode table and summary of one quench."""
    _run("quench", config, overrides, require="quench")


@app.command()
def scan(
    config: Optional[Path] = typer.Option(None, "--config", "-c", help=CONFIG_HELP),
    overrides: List[str] = typer.Option([], "--set", "-s", help=SET_HELP),
):
    """Mode counts, DQPT existence and rate functions over a plane of post-quench parameters."""
    _run("scan", config, overrides, require="scan")


@app.command()
def modes(
    config: Optional[Path] = typer.Option(None, "--config", "-c", help=CONFIG_HELP),
    overrides: List[str] = typer.Option([], "--set", "-s", help=SET_HELP),
):
    """Located k_c, k_0 and k_1 modes of one quench."""
    _run("modes", config, overrides, require="quench")


@app.command()
def verify(
    config: Optional[Path] = typer.Option(None, "--config", "-c", help=CONFIG_HELP),
    overrides: List[str] = typer.Option([], "--set", "-s", help=SET_HELP),
    seed: Optional[int] = typer.Option(None, "--seed", help="Seed of the randomized property runs"),
    inject_fault: bool = typer.Option(False, "--inject-fault", hidden=True),
):
    """Run the oracle and property suite; exits 1 when any property fails."""
    if seed is not None:
        overrides = [*overrides, f"verify.seed={seed}"]
    _run("verify", config, overrides, inject_fault=inject_fault)


@app.command("xy-demo")
def xy_demo(
    config: Optional[Path] = typer.Option(None, "--config", "-c", help=CONFIG_HELP),
    overrides: List[str] = typer.Option([], "--set", "-s", help=SET_HELP),
    grid_samples: int = typer.Option(201, "--grid-samples", min=2, help="Cells per axis of the 2D diagrams"),
):
    """Phase diagrams and mode tables for the XY chain at the reference initial state."""
    _run("xy-demo", config, overrides, grid_samples=grid_samples)


if __name__ == "__main__":
    app()
