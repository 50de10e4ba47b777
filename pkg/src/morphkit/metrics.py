"""Vulnerability metrics: FMR, FNMR, MMPMR, threshold solving, reports.

Acceptance is score >= threshold everywhere (ties accept).  Thresholds
are solved per scenario direction on that direction's zero-effort
impostor scores only; all rates stay full-precision fractions until
render time, where percentages round half away from zero to 1 decimal.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import FormatError
from .protocols import MORPHS_AS_PROBES, MORPHS_AS_REFERENCES
from .scoring import MorphGroup, ScoreSet

REPORT_CSV_HEADER = [
    "dataset", "frs", "tool",
    "mmpmr_ref", "mmpmr_probe",
    "threshold_ref", "threshold_probe",
    "fmr_ref", "fmr_probe",
    "fnmr_ref", "fnmr_probe",
]


def _as_scores(scores, what: str) -> np.ndarray:
    arr = np.asarray(list(scores), dtype=np.float64)
    if arr.size == 0:
        raise ValueError(f"{what} score list is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} scores must be finite")
    return arr


def fmr(zero_effort, t: float) -> float:
    """False match rate: fraction of impostor scores >= t."""
    arr = _as_scores(zero_effort, "zero-effort")
    return int(np.count_nonzero(arr >= t)) / arr.size


def fnmr(genuine, t: float) -> float:
    """False non-match rate: fraction of genuine scores < t."""
    arr = _as_scores(genuine, "genuine")
    return int(np.count_nonzero(arr < t)) / arr.size


def threshold_at_fmr(zero_effort, target: float = 0.001) -> float:
    """Smallest threshold whose FMR does not exceed target.

    Candidates are the observed scores plus a sentinel one ulp above
    the maximum (FMR exactly 0 there, so a solution always exists).
    With ties, stepping past a tied value drops all its copies at once,
    which is why the sentinel can win even for generous targets.
    """
    if not 0.0 < target < 1.0:
        raise ValueError(f"target FMR must be in (0, 1), got {target!r}")
    arr = np.sort(_as_scores(zero_effort, "zero-effort"))
    values = np.unique(arr)
    # |{s >= v}| for each candidate v, via the first index holding v.
    counts_ge = arr.size - np.searchsorted(arr, values, side="left")
    feasible = (counts_ge / arr.size) <= target
    idx = int(np.argmax(feasible))
    if feasible[idx]:
        return float(values[idx])
    return math.nextafter(float(values[-1]), math.inf)


def _group_pair(group) -> tuple[float, float]:
    if isinstance(group, MorphGroup):
        (_, sa), (_, sb) = group.subject_scores
        return float(sa), float(sb)
    pair = tuple(group)
    if len(pair) != 2:
        raise ValueError(f"morph group needs exactly 2 subject scores, got {len(pair)}")
    return float(pair[0]), float(pair[1])


def mmpmr(morph_groups, t: float) -> float:
    """Fraction of morphs whose weaker contributor score still passes t."""
    groups = [_group_pair(g) for g in morph_groups]
    if not groups:
        raise ValueError("mmpmr needs at least one morph group")
    successes = sum(1 for a, b in groups if min(a, b) >= t)
    return successes / len(groups)


@dataclass(frozen=True)
class DirectionMetrics:
    """Operating point of one scenario direction at the solved threshold."""

    threshold: float
    fmr: float
    fnmr: float
    mmpmr: float
    n_genuine: int
    n_zero_effort: int
    n_morphs: int

    def __post_init__(self):
        for name in ("fmr", "fnmr", "mmpmr"):
            rate = getattr(self, name)
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"{name} must be a fraction in [0, 1], got {rate!r}")
        if min(self.n_genuine, self.n_zero_effort, self.n_morphs) < 1:
            raise ValueError("trial counts must be positive")


@dataclass(frozen=True)
class ReportCell:
    """One (dataset, recognizer, tool) entry with per-direction metrics."""

    dataset: str
    frs: str
    tool: str
    references: DirectionMetrics | None = None
    probes: DirectionMetrics | None = None

    def __post_init__(self):
        if self.references is None and self.probes is None:
            raise ValueError("report cell needs at least one direction")


@dataclass(frozen=True)
class VulnerabilityReport:
    target_fmr: float
    cells: tuple[ReportCell, ...] = ()

    def __post_init__(self):
        if not 0.0 < self.target_fmr < 1.0:
            raise ValueError(f"target FMR must be in (0, 1), got {self.target_fmr!r}")
        seen = set()
        for cell in self.cells:
            key = (cell.dataset, cell.frs, cell.tool)
            if key in seen:
                raise ValueError(f"duplicate report cell {key!r}")
            seen.add(key)


def _direction_metrics(scores: ScoreSet, target: float) -> DirectionMetrics:
    t = threshold_at_fmr(scores.zero_effort, target)
    return DirectionMetrics(
        threshold=t,
        fmr=fmr(scores.zero_effort, t),
        fnmr=fnmr(scores.genuine, t),
        mmpmr=mmpmr(scores.morph_groups, t),
        n_genuine=len(scores.genuine),
        n_zero_effort=len(scores.zero_effort),
        n_morphs=len(scores.morph_groups),
    )


def evaluate(scoresets, target_fmr: float = 0.001, dataset: str = "dataset",
             frs: str = "frs", tool: str = "tool") -> VulnerabilityReport:
    """Solve each direction's threshold and assemble a one-cell report.

    scoresets maps direction constants to ScoreSets; each direction is
    thresholded independently on its own zero-effort scores.
    """
    if not scoresets:
        raise ValueError("evaluate needs at least one scenario direction")
    unknown = set(scoresets) - {MORPHS_AS_REFERENCES, MORPHS_AS_PROBES}
    if unknown:
        raise ValueError(f"unknown scenario directions: {sorted(unknown)}")
    refs = scoresets.get(MORPHS_AS_REFERENCES)
    probes = scoresets.get(MORPHS_AS_PROBES)
    cell = ReportCell(
        dataset=dataset,
        frs=frs,
        tool=tool,
        references=_direction_metrics(refs, target_fmr) if refs is not None else None,
        probes=_direction_metrics(probes, target_fmr) if probes is not None else None,
    )
    return VulnerabilityReport(target_fmr=target_fmr, cells=(cell,))


def merge_reports(reports) -> VulnerabilityReport:
    """Combine single-run reports into one table; targets must agree."""
    reports = list(reports)
    if not reports:
        raise ValueError("nothing to merge")
    targets = {r.target_fmr for r in reports}
    if len(targets) != 1:
        raise ValueError(f"reports disagree on target FMR: {sorted(targets)}")
    cells = tuple(c for r in reports for c in r.cells)
    return VulnerabilityReport(target_fmr=reports[0].target_fmr, cells=cells)


def _pct_1dp(rate: float) -> str:
    # Half away from zero at 1 decimal; rates are never negative here.
    v = rate * 100.0
    return f"{math.floor(v * 10.0 + 0.5) / 10.0:.1f}"


def _cell_text(cell: ReportCell) -> str:
    ref = _pct_1dp(cell.references.mmpmr) if cell.references else "N/A"
    prb = _pct_1dp(cell.probes.mmpmr) if cell.probes else "N/A"
    return f"{ref} | {prb}"


def render_report(report: VulnerabilityReport) -> str:
    """Aligned text table: rows (dataset, frs), one column per tool."""
    tools: list[str] = []
    rows: list[tuple[str, str]] = []
    cells: dict[tuple[str, str, str], ReportCell] = {}
    for cell in report.cells:
        if cell.tool not in tools:
            tools.append(cell.tool)
        if (cell.dataset, cell.frs) not in rows:
            rows.append((cell.dataset, cell.frs))
        cells[(cell.dataset, cell.frs, cell.tool)] = cell

    title = f"MMPMR @ FMR = {report.target_fmr * 100.0:g}% (references | probes) [%]"
    headers = ["dataset", "frs"] + tools
    table = [headers]
    for dataset, frs in rows:
        line = [dataset, frs]
        for tool in tools:
            cell = cells.get((dataset, frs, tool))
            line.append(_cell_text(cell) if cell is not None else "N/A")
        table.append(line)

    widths = [max(len(row[i]) for row in table) for i in range(len(headers))]
    lines = [title, ""]
    for row in table:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


def _csv_fields(metrics: DirectionMetrics | None) -> dict[str, str]:
    if metrics is None:
        return {"mmpmr": "", "threshold": "", "fmr": "", "fnmr": ""}
    return {
        "mmpmr": repr(metrics.mmpmr * 100.0),
        "threshold": repr(metrics.threshold),
        "fmr": repr(metrics.fmr * 100.0),
        "fnmr": repr(metrics.fnmr * 100.0),
    }


def render_report_csv(report: VulnerabilityReport) -> str:
    """Machine-readable report; percentages and thresholds in full repr."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(REPORT_CSV_HEADER)
    for cell in report.cells:
        ref = _csv_fields(cell.references)
        prb = _csv_fields(cell.probes)
        writer.writerow([
            cell.dataset, cell.frs, cell.tool,
            ref["mmpmr"], prb["mmpmr"],
            ref["threshold"], prb["threshold"],
            ref["fmr"], prb["fmr"],
            ref["fnmr"], prb["fnmr"],
        ])
    return buf.getvalue()


def _metrics_from_csv(row: dict[str, str], side: str) -> DirectionMetrics | None:
    raw = {k: row[f"{k}_{side}"].strip() for k in ("mmpmr", "threshold", "fmr", "fnmr")}
    present = [k for k, v in raw.items() if v]
    if not present:
        return None
    if len(present) != 4:
        raise FormatError(f"report row has a partial {side} side: only {present} set")
    try:
        return DirectionMetrics(
            threshold=float(raw["threshold"]),
            fmr=float(raw["fmr"]) / 100.0,
            fnmr=float(raw["fnmr"]) / 100.0,
            mmpmr=float(raw["mmpmr"]) / 100.0,
            # Counts are not serialized in the CSV; 1 marks "unknown".
            n_genuine=1, n_zero_effort=1, n_morphs=1,
        )
    except ValueError as exc:
        raise FormatError(f"bad report row: {exc}") from exc


def load_report_csv(path, target_fmr: float = 0.001) -> VulnerabilityReport:
    """Read a rendered CSV report back for merging and re-rendering."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise FormatError(f"empty report file: {path}") from None
            if header != REPORT_CSV_HEADER:
                raise FormatError(
                    f"bad report header in {path}: expected {','.join(REPORT_CSV_HEADER)}"
                )
            cells = []
            for rec in reader:
                if not rec:
                    continue
                if len(rec) != len(REPORT_CSV_HEADER):
                    raise FormatError(f"report row in {path} has {len(rec)} fields")
                row = dict(zip(REPORT_CSV_HEADER, rec))
                try:
                    cells.append(ReportCell(
                        dataset=row["dataset"], frs=row["frs"], tool=row["tool"],
                        references=_metrics_from_csv(row, "ref"),
                        probes=_metrics_from_csv(row, "probe"),
                    ))
                except ValueError as exc:
                    raise FormatError(f"bad report row in {path}: {exc}") from exc
    except OSError as exc:
        raise FormatError(f"cannot read report file {path}: {exc}") from exc
    return VulnerabilityReport(target_fmr=target_fmr, cells=tuple(cells))
