"""Shared command-line plumbing: the common option set, run settings and error mapping."""
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import click
from click.core import ParameterSource
from pydantic import ValidationError
from pydantic_settings import BaseSettings, JsonConfigSettingsSource, SettingsConfigDict

from analytic.schemas import PlotQuantity
from core.exceptions import ModelError
from model_core.schemas import Branch, CouplingParams, Sign
from model_core.service import validate_params
from normalization.schemas import Convention
from scan.schemas import OutputFormat


class RunSettings(BaseSettings):
    """Parameters of one command invocation (flags over --config file over defaults)."""

    f56: float = 0.0
    ft56: float = 0.0
    ft3: float = 0.0
    ftp: float = 0.0
    ftm: float = 0.0
    n: float = 0.0
    rho0: float = 1.0
    m: float = 0.0
    sign: Optional[Sign] = None
    branch: Optional[Branch] = None
    convention: Optional[Convention] = None
    tol: Optional[float] = None
    out: Optional[Path] = None
    format: Optional[OutputFormat] = None

    # profile
    quantity: PlotQuantity = PlotQuantity.ABS_I
    rho_min: Optional[float] = None
    rho_max: Optional[float] = None
    points: int = 100
    secular: bool = False
    normalize: bool = False

    # scan
    f56_range: Optional[Tuple[float, float, int]] = None
    ft56_range: Optional[Tuple[float, float, int]] = None
    ft3_range: Optional[Tuple[float, float, int]] = None
    ftp_range: Optional[Tuple[float, float, int]] = None
    ftm_range: Optional[Tuple[float, float, int]] = None
    n_min: Optional[int] = None
    n_max: Optional[int] = None
    verify_points: bool = False
    quad_check: bool = False
    parallel: bool = False

    model_config = SettingsConfigDict(extra="forbid", frozen=True)

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls,
        init_settings,
        env_settings,
        dotenv_settings,
        file_secret_settings,
    ):
        return (init_settings,)

    def coupling_params(self) -> CouplingParams:
        return validate_params(
            {
                "f56": self.f56, "ft56": self.ft56, "ft3": self.ft3, "ftp": self.ftp,
                "ftm": self.ftm, "n": self.n, "rho0": self.rho0,
            }
        )


def _config_values(path: Optional[str]) -> Dict[str, Any]:
    if path is None:
        return {}
    if not Path(path).is_file():
        raise click.BadParameter(f"config file {path} does not exist", param_hint="--config")
    try:
        return JsonConfigSettingsSource(RunSettings, json_file=Path(path))()
    except ValueError as exc:
        raise click.BadParameter(f"config file {path} is not a JSON object: {exc}", param_hint="--config")


def resolve_run_settings(ctx: click.Context, config: Optional[str] = None) -> RunSettings:
    """Merge defaults, the JSON config and the flags actually typed, in that order."""
    explicit = {
        name: value
        for name, value in ctx.params.items()
        if name not in ("config", "verbose")
        and ctx.get_parameter_source(name) is ParameterSource.COMMANDLINE
    }
    merged = {**_config_values(config), **explicit}
    try:
        return RunSettings(**merged)
    except ValidationError as exc:
        problems = "; ".join(
            f"{'.'.join(str(part) for part in error['loc'])}: {error['msg']}" for error in exc.errors()
        )
        raise click.UsageError(f"Invalid run settings: {problems}", ctx=ctx)


def common_options(command):
    """Flags shared by every subcommand."""
    options = [
        click.option("--f56", type=float, help="F56 strength."),
        click.option("--ft56", type=float, help="Tilde F56 strength."),
        click.option("--ft3", type=float, help="Mixing strength on the diagonal."),
        click.option("--ftp", type=float, help="Off-diagonal strength (I <- II)."),
        click.option("--ftm", type=float, help="Off-diagonal strength (II <- I)."),
        click.option("--n", type=float, help="Angular mode index."),
        click.option("--rho0", type=float, help="Disc radius scale."),
        click.option("--sign", type=click.Choice([s.value for s in Sign])),
        click.option("--branch", type=click.Choice([b.value for b in Branch])),
        click.option("--convention", type=click.Choice([c.value for c in Convention])),
        click.option("--tol", type=float, help="Tolerance for the command's main check."),
        click.option("--out", type=click.Path(dir_okay=False), help="Output file (default stdout)."),
        click.option("--format", "format", type=click.Choice([f.value for f in OutputFormat])),
        click.option("--config", type=click.Path(dir_okay=False), help="Flat JSON object of the same keys."),
    ]
    for option in reversed(options):
        command = option(command)
    return command


@contextmanager
def model_errors(ctx: click.Context):
    """Report library errors on stderr and exit with their code."""
    try:
        yield
    except ModelError as exc:
        click.echo(f"Error: {exc.detail}", err=True)
        ctx.exit(exc.exit_code)
    except ValidationError as exc:
        click.echo(f"Error: {exc.errors()[0]['msg']}", err=True)
        ctx.exit(2)


def emit(text: str, out: Optional[Path] = None):
    """Write command output to --out, or stdout when no file was given."""
    if out is None:
        click.echo(text, nl=False)
        return
    try:
        Path(out).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise click.FileError(str(out), hint=str(exc))
