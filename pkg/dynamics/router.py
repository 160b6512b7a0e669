import io
import json

import click

from core.config import settings
from core.dependencies import common_options, emit, model_errors, resolve_run_settings
from dynamics.service import verify_analytic
from model_core.schemas import Sign
from scan.schemas import OutputFormat


@click.command("verify")
@common_options
@click.option("--m", type=float, help="Mass parameter for the propagation run.")
@click.option("--secular", is_flag=True, help="Check the log-secular solution (D = 0 only).")
@click.pass_context
def verify(ctx: click.Context, config, **_):
    """Check the closed-form massless solutions against the radial equations.

    Both branches are checked by residual on the default grid and by
    propagating the full system from the first grid radius to the last.
    Exits with 1 when any check misses its tolerance.
    """
    run = resolve_run_settings(ctx, config)
    signs = [run.sign] if run.sign else [Sign.PLUS, Sign.MINUS]
    tol = settings.RESIDUAL_TOLERANCE if run.tol is None else run.tol

    with model_errors(ctx):
        params = run.coupling_params()
        reports = [verify_analytic(params, sign, tol=tol, secular=run.secular, m=run.m) for sign in signs]

    buffer = io.StringIO()
    if run.format is OutputFormat.JSON:
        json.dump([report.model_dump(mode="json") for report in reports], buffer, indent=2)
        buffer.write("\n")
    else:
        for report in reports:
            status = "PASS" if report.passed else "FAIL"
            buffer.write(
                f"{status} sign={report.sign.value} residual_A={report.residual_A:.3e} "
                f"residual_B={report.residual_B:.3e} deviation={report.propagation_deviation:.3e} "
                f"tol={report.tol:g}\n"
            )
    emit(buffer.getvalue(), run.out)

    if not all(report.passed for report in reports):
        ctx.exit(1)
