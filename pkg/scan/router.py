import io

import click

from core.config import settings
from core.dependencies import common_options, emit, model_errors, resolve_run_settings
from model_core.schemas import Sign
from normalization.schemas import Convention
from scan.schemas import GridSpec, OutputFormat, ParamRange
from scan.service import adjudicate
from scan.service import scan as run_scan
from scan.service import write_records

RANGE_TYPE = (float, float, int)
AXES = ("f56", "ft56", "ft3", "ftp", "ftm")


@click.command("scan")
@common_options
@click.option("--f56-range", type=RANGE_TYPE, help="MIN MAX COUNT for F56.")
@click.option("--ft56-range", type=RANGE_TYPE, help="MIN MAX COUNT for tilde F56.")
@click.option("--ft3-range", type=RANGE_TYPE, help="MIN MAX COUNT for ft3.")
@click.option("--ftp-range", type=RANGE_TYPE, help="MIN MAX COUNT for ftp.")
@click.option("--ftm-range", type=RANGE_TYPE, help="MIN MAX COUNT for ftm.")
@click.option("--n-min", type=int, help="Smallest mode index enumerated.")
@click.option("--n-max", type=int, help="Largest mode index enumerated.")
@click.option("--verify-points", is_flag=True, help="Record the analytic residual per point.")
@click.option("--quad-check", is_flag=True, help="Reconcile every window with quadrature.")
@click.option("--parallel", is_flag=True, help="Evaluate grid points concurrently.")
@click.pass_context
def scan(ctx: click.Context, config, **_):
    """Enumerate normalizable integer modes over a grid of coupling strengths.

    Axes without a --<name>-range stay fixed at the --<name> value.
    """
    run = resolve_run_settings(ctx, config)
    fmt = run.format or OutputFormat.CSV
    if fmt is OutputFormat.PLOT_COLUMNS:
        raise click.BadParameter("scan output is csv or json", param_hint="--format")

    axes = {}
    for name in AXES:
        bounds = getattr(run, f"{name}_range")
        try:
            axes[name] = (
                ParamRange.fixed(getattr(run, name))
                if bounds is None
                else ParamRange(min=bounds[0], max=bounds[1], count=bounds[2])
            )
        except ValueError as exc:
            raise click.BadParameter(str(exc), param_hint=f"--{name}-range")

    n_min, n_max = settings.N_RANGE
    conventions = [Convention.SHIFTED_INDEX, Convention.PAPER_LITERAL]
    if run.convention:
        conventions = [run.convention] + [c for c in conventions if c is not run.convention]
    try:
        grid = GridSpec(
            **axes,
            n_range=(n_min if run.n_min is None else run.n_min, n_max if run.n_max is None else run.n_max),
            rho0=run.rho0,
            sign_set=[run.sign] if run.sign else [Sign.PLUS, Sign.MINUS],
            conventions=conventions,
            verify=run.verify_points,
            quad_check=run.quad_check,
        )
    except ValueError as exc:
        raise click.UsageError(str(exc), ctx=ctx)

    with model_errors(ctx):
        records = run_scan(grid, parallel=run.parallel)
        if grid.quad_check:
            click.echo(adjudicate(grid, records).summary(), err=True)
        buffer = io.StringIO()
        write_records(records, fmt, buffer)
    emit(buffer.getvalue(), run.out)
