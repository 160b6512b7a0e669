import asyncio
import csv
import itertools
import json
import logging
from pathlib import Path
from typing import IO, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, TypeAdapter

from analytic.schemas import PlotPoint, ProfileSpec
from core.config import Settings, settings
from core.exceptions import ModelError, OutputError
from dynamics.service import max_relative_residual
from model_core.schemas import Branch, CouplingParams, Sign
from model_core.service import alpha_is_complex, eigen_mode, is_degenerate
from normalization.schemas import Convention, ConventionAdjudication, QuadratureResult, WindowInterval
from normalization.service import (
    NormalizationService,
    governing_sign,
    tally_conventions,
    window_A,
    window_B,
)
from scan.schemas import GridSpec, OutputFormat, ScanRecord

logger = logging.getLogger(__name__)

Point = Tuple[float, float, float, float, float]
Destination = Union[str, Path, IO[str]]


def format_float(value: float) -> str:
    """Positional notation with 17 significant digits: 1.0 -> 1.0000000000000000."""
    if not np.isfinite(value):
        return str(float(value))
    return np.format_float_positional(value, precision=17, unique=False, fractional=False)


class ScanService:
    def __init__(self, config: Settings = settings):
        self.config = config
        self.normalization = NormalizationService(config)

    def grid_points(self, g: GridSpec) -> List[Point]:
        return list(itertools.product(*(axis.values() for axis in g.axes)))

    def _window(self, c: CouplingParams, sign: Sign, branch: Branch, convention: Convention) -> WindowInterval:
        if branch is Branch.A:
            return window_A(c, sign)
        return window_B(c, sign, convention)

    def _quadrature_modes(self, c: CouplingParams, sign: Sign, branch: Branch, n_range: Tuple[int, int]) -> List[int]:
        mode_sign = governing_sign(branch, sign)
        finite = []
        for n in range(n_range[0], n_range[1] + 1):
            point = c.with_updates(n=float(n))
            spec = ProfileSpec(branch=branch, mode=eigen_mode(point, mode_sign), params=point)
            if isinstance(self.normalization.norm_quadrature(spec), QuadratureResult):
                finite.append(n)
        return finite

    def _record(self, g: GridSpec, c: CouplingParams, sign: Sign, branch: Branch) -> ScanRecord:
        record = ScanRecord(
            f56=c.f56, ft56=c.ft56, ft3=c.ft3, ftp=c.ftp, ftm=c.ftm, rho0=c.rho0,
            sign=sign, branch=branch,
            ftp_zero=c.ftp == 0.0, degenerate=is_degenerate(c), complex_alpha=alpha_is_complex(c),
        )
        try:
            primary = g.conventions[0] if branch is Branch.B else None
            window = self._window(c, sign, branch, primary)
            updates = {
                "convention": primary,
                "lower": window.lower,
                "upper": window.upper,
                "normalizable": window.integers(*g.n_range),
            }
            if branch is Branch.B and len(g.conventions) > 1:
                updates["alternative_normalizable"] = window_B(c, sign, g.conventions[1]).integers(*g.n_range)
            if g.quad_check:
                finite = self._quadrature_modes(c, sign, branch, g.n_range)
                updates["quadrature_normalizable"] = finite
                updates["agree"] = finite == updates["normalizable"]
            if g.verify:
                updates["max_residual"] = max_relative_residual(c, governing_sign(branch, sign))
            return record.model_copy(update=updates)
        except (ModelError, ValueError, ArithmeticError) as exc:
            logger.warning("Scan point %s (%s, %s) failed: %s", c, sign.value, branch.value, exc)
            return record.model_copy(update={"error": f"{type(exc).__name__}: {exc}"})

    def scan_point(self, g: GridSpec, point: Point) -> List[ScanRecord]:
        f56, ft56, ft3, ftp, ftm = point
        c = CouplingParams(f56=f56, ft56=ft56, ft3=ft3, ftp=ftp, ftm=ftm, n=0.0, rho0=g.rho0)
        return [self._record(g, c, sign, branch) for sign in g.sign_set for branch in (Branch.A, Branch.B)]

    async def scan_async(self, g: GridSpec, concurrency: Optional[int] = None) -> List[ScanRecord]:
        semaphore = asyncio.Semaphore(concurrency or self.config.SCAN_CONCURRENCY)

        async def run(point: Point) -> List[ScanRecord]:
            async with semaphore:
                return await asyncio.to_thread(self.scan_point, g, point)

        # gather keeps submission order, so output matches the serial scan
        chunks = await asyncio.gather(*(run(point) for point in self.grid_points(g)))
        return [record for chunk in chunks for record in chunk]

    def scan(self, g: GridSpec, parallel: bool = False) -> List[ScanRecord]:
        points = self.grid_points(g)
        logger.info("Scanning %d grid points (%s)", len(points), "parallel" if parallel else "serial")
        if parallel:
            return asyncio.run(self.scan_async(g))
        return [record for point in points for record in self.scan_point(g, point)]

    def adjudicate(self, g: GridSpec, records: Sequence[ScanRecord]) -> ConventionAdjudication:
        """Grid-level B reading: checks each (point, sign, n) of a quad-checked scan against both windows."""
        matches = []
        for record in records:
            if record.branch is not Branch.B or record.quadrature_normalizable is None:
                continue
            c = CouplingParams(
                f56=record.f56, ft56=record.ft56, ft3=record.ft3, ftp=record.ftp, ftm=record.ftm,
                n=0.0, rho0=record.rho0,
            )
            finite = set(record.quadrature_normalizable)
            listed = {conv: set(window_B(c, record.sign, conv).integers(*g.n_range)) for conv in Convention}
            for n in range(g.n_range[0], g.n_range[1] + 1):
                matches.append([conv for conv in Convention if (n in listed[conv]) == (n in finite)])
        verdict = tally_conventions(matches)
        logger.info(verdict.summary())
        return verdict


def scan(g: GridSpec, parallel: bool = False) -> List[ScanRecord]:
    return ScanService().scan(g, parallel)


def adjudicate(g: GridSpec, records: Sequence[ScanRecord]) -> ConventionAdjudication:
    return ScanService().adjudicate(g, records)


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, list):
        return ";".join(str(int(v)) for v in value)
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def _write_csv(records: Sequence[ScanRecord], stream: IO[str]):
    writer = csv.writer(stream, lineterminator="\n")
    fields = list(ScanRecord.model_fields)
    writer.writerow(fields)
    for record in records:
        writer.writerow([_csv_cell(getattr(record, name)) for name in fields])


def _write_json(records: Sequence[BaseModel], stream: IO[str]):
    stream.write(json.dumps([record.model_dump(mode="json") for record in records], indent=2))
    stream.write("\n")


def _write_plot_columns(points: Sequence[PlotPoint], stream: IO[str]):
    stream.write("# rho value\n")
    for point in points:
        stream.write(f"{format_float(point.rho)} {format_float(point.value)}\n")


def write_records(records: Sequence[BaseModel], fmt: OutputFormat, destination: Destination):
    """Serialize scan records (csv, json) or plot points (plot_columns, json)."""
    fmt = OutputFormat(fmt)
    writers = {
        OutputFormat.CSV: _write_csv,
        OutputFormat.JSON: _write_json,
        OutputFormat.PLOT_COLUMNS: _write_plot_columns,
    }
    if fmt is OutputFormat.CSV and any(not isinstance(r, ScanRecord) for r in records):
        raise OutputError("csv output holds scan records only")
    if fmt is OutputFormat.PLOT_COLUMNS and any(not isinstance(r, PlotPoint) for r in records):
        raise OutputError("plot_columns output holds (rho, value) points only")

    try:
        if isinstance(destination, (str, Path)):
            with open(destination, "w", newline="", encoding="utf-8") as stream:
                writers[fmt](records, stream)
        else:
            writers[fmt](records, destination)
    except OSError as exc:
        raise OutputError(f"Could not write {fmt.value} output to {destination}: {exc}") from exc


def read_records(source: Union[str, Path]) -> List[ScanRecord]:
    """Parse a json file written by write_records back into records."""
    try:
        payload = Path(source).read_text(encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"Could not read {source}: {exc}") from exc
    return TypeAdapter(List[ScanRecord]).validate_json(payload)
