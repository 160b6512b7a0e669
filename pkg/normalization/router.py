import io
import json
from typing import List

import click

from core.dependencies import common_options, emit, model_errors, resolve_run_settings
from model_core.schemas import Branch, CouplingParams, Sign
from normalization.schemas import Convention, Divergent, NormReport
from normalization.service import classify_mode, window_A, window_B
from scan.schemas import OutputFormat


def _verdict(flag: bool) -> str:
    return "normalizable" if flag else "not normalizable"


def _describe(value) -> str:
    if isinstance(value, Divergent):
        return f"divergent at {value.endpoint.value} ({value.test})"
    if hasattr(value, "error"):
        note = "" if value.converged else " (tolerance not met)"
        return f"{value.value:.12e} +- {value.error:.1e}{note}"
    return f"{value:.12e}"


def _render(report: NormReport, params: CouplingParams) -> List[str]:
    lines = [f"branch {report.branch.value} sign={report.sign.value} n={report.n:g} alpha={report.alpha:.12g}"]
    if report.branch is Branch.A:
        lines.append(f"  window {report.window.label()}: {_verdict(report.window_verdict)}")
    else:
        for convention, verdict in report.window_verdicts.items():
            window = window_B(params, report.sign, convention)
            lines.append(f"  window[{convention.value}] {window.label()}: {_verdict(verdict)}")
        matching = ", ".join(c.value for c in report.matching_conventions) or "none"
        used = report.convention_used.value if report.convention_used else "none"
        lines.append(f"  conventions matching quadrature: {matching} (reported: {used})")
    lines.append(f"  closed form: {_describe(report.closed_form)}")
    lines.append(f"  quadrature: {_describe(report.quadrature)}")
    lines.append(f"  agree: {'yes' if report.agree else 'no'}")
    return lines


@click.command("norm")
@common_options
@click.pass_context
def norm(ctx: click.Context, config, **_):
    """Classify normalizability of the massless modes three ways.

    Prints the window prediction (both B conventions), the closed-form
    norm and the quadrature verdict for each requested branch.
    """
    run = resolve_run_settings(ctx, config)
    signs = [run.sign] if run.sign else [Sign.PLUS, Sign.MINUS]
    branches = [run.branch] if run.branch else [Branch.A, Branch.B]

    with model_errors(ctx):
        params = run.coupling_params()
        reports = [
            report
            for sign in signs
            for report in classify_mode(params, sign, run.convention)
            if report.branch in branches
        ]

    if run.format is OutputFormat.JSON:
        text = json.dumps([report.model_dump(mode="json") for report in reports], indent=2) + "\n"
    else:
        text = "".join(line + "\n" for report in reports for line in _render(report, params))
    emit(text, run.out)


@click.command("windows")
@common_options
@click.pass_context
def windows(ctx: click.Context, config, **_):
    """Print the normalizability windows in n per branch, sign and convention."""
    run = resolve_run_settings(ctx, config)
    signs = [run.sign] if run.sign else [Sign.PLUS, Sign.MINUS]
    branches = [run.branch] if run.branch else [Branch.A, Branch.B]
    conventions = [run.convention] if run.convention else list(Convention)

    with model_errors(ctx):
        params = run.coupling_params()
        intervals = []
        for branch in branches:
            for sign in signs:
                if branch is Branch.A:
                    intervals.append(window_A(params, sign))
                else:
                    intervals.extend(window_B(params, sign, convention) for convention in conventions)

    buffer = io.StringIO()
    if run.format is OutputFormat.JSON:
        json.dump([interval.model_dump(mode="json") for interval in intervals], buffer, indent=2)
        buffer.write("\n")
    else:
        for interval in intervals:
            tag = f" {interval.convention.value}" if interval.convention else ""
            buffer.write(f"{interval.branch.value} {interval.sign.value}{tag}: {interval.label()}\n")
    emit(buffer.getvalue(), run.out)
