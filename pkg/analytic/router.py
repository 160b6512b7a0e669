import io

import click
import numpy as np

from analytic.schemas import PlotPoint, PlotQuantity, ProfileSpec
from analytic.service import profile_series
from core.config import settings
from core.dependencies import common_options, emit, model_errors, resolve_run_settings
from model_core.schemas import Branch, Sign
from model_core.service import eigen_mode
from normalization.service import NormalizationService, norm_integrand
from scan.schemas import OutputFormat
from scan.service import write_records


@click.command("profile")
@common_options
@click.option("--quantity", type=click.Choice([q.value for q in PlotQuantity]), help="Plotted quantity.")
@click.option("--rho-min", type=float, help="First radius (default 1e-3 rho0).")
@click.option("--rho-max", type=float, help="Last radius (default 20 rho0).")
@click.option("--points", type=int, help="Number of log-spaced radii.")
@click.option("--secular", is_flag=True, help="Log-secular solution (D = 0 only).")
@click.option("--normalize", is_flag=True, help="Rescale to unit norm using the converged quadrature.")
@click.pass_context
def profile(ctx: click.Context, config, **_):
    """Emit (rho, value) columns of one closed-form massless profile."""
    run = resolve_run_settings(ctx, config)
    branch = run.branch or Branch.A
    sign = run.sign or Sign.PLUS
    fmt = run.format or OutputFormat.PLOT_COLUMNS

    with model_errors(ctx):
        params = run.coupling_params()
        rho_min = settings.GRID_MIN_FACTOR * params.rho0 if run.rho_min is None else run.rho_min
        rho_max = settings.GRID_MAX_FACTOR * params.rho0 if run.rho_max is None else run.rho_max
        if not 0 < rho_min < rho_max or run.points < 2:
            raise click.BadParameter("need 0 < rho-min < rho-max and at least two points")
        radii = np.geomspace(rho_min, rho_max, run.points)

        spec = ProfileSpec(branch=branch, mode=eigen_mode(params, sign), params=params, secular=run.secular)
        if run.normalize:
            spec = NormalizationService().normalize(spec, run.tol)
        if run.quantity is PlotQuantity.INTEGRAND:
            values = norm_integrand(spec, radii)
            points = [PlotPoint(rho=float(r), value=float(v)) for r, v in zip(radii, values)]
        else:
            points = profile_series(spec, radii, run.quantity)

        buffer = io.StringIO()
        write_records(points, fmt, buffer)
    emit(buffer.getvalue(), run.out)
