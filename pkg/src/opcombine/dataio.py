"""
Loss-data ingestion and scenario configuration.

Loss files are CSV with header ``date,cell,gross_loss,recovery`` and ISO
dates. Scenario files are JSON documents checked against
:data:`SCENARIO_SCHEMA`.
"""

from __future__ import annotations

import csv
import datetime as dt
import hashlib
import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import jsonschema
import numpy as np
from scipy import special

from .conjugate import ElicitedInterval
from .dirichlet import DirichletPrior, StepDistribution
from .distributions import LognormalParams
from .errors import DomainError, EmptyDataError
from .evidence import DempsterShaferStructure

__all__ = [
    "LossRecord",
    "IngestResult",
    "ExceedanceStatement",
    "ScenarioConfig",
    "SCENARIO_SCHEMA",
    "LOSS_HEADER",
    "ingest_losses",
    "load_scenario",
    "parse_scenario",
    "exceedance_rate",
    "exceedance_quantile_level",
    "lognormal_from_exceedances",
    "file_digest",
]

LOSS_HEADER = ("date", "cell", "gross_loss", "recovery")


@dataclass(frozen=True)
class LossRecord:
    event_date: dt.date
    cell: str
    gross_loss: float
    recovery: float | None = None

    def __post_init__(self):
        if not (self.gross_loss > 0 and math.isfinite(self.gross_loss)):
            raise DomainError(f"gross_loss must be a positive number, got {self.gross_loss}")
        if self.recovery is not None and not 0 <= self.recovery <= self.gross_loss:
            raise DomainError(f"recovery {self.recovery} must lie in [0, gross_loss]")

    @property
    def net_loss(self) -> float:
        return self.gross_loss - (self.recovery or 0.0)


@dataclass
class IngestResult:
    """
    Records at or above the threshold and per-cell annual counts.

    ``annual_counts[cell]`` lists counts for every calendar year from the
    first to the last year seen in the file (truncated rows included when
    fixing the span), zeros where a cell had no loss.
    """

    records: list[LossRecord]
    threshold: float
    years: tuple[int, ...]
    annual_counts: dict[str, tuple[int, ...]]
    truncated: int = 0
    truncated_by_cell: dict[str, int] = field(default_factory=dict)
    errors: list[tuple[int, str]] = field(default_factory=list)

    def counts_by_year(self, cell: str) -> dict[int, int]:
        return dict(zip(self.years, self.annual_counts[cell]))

    def summary(self) -> str:
        lines = [
            f"records_kept = {len(self.records)}",
            f"threshold = {self.threshold!r}",
            f"records_below_threshold = {self.truncated}",
            f"rows_with_errors = {len(self.errors)}",
        ]
        lines += [f"error line {ln}: {msg}" for ln, msg in self.errors]
        return "\n".join(lines)


def _parse_row(row):
    if len(row) not in (3, 4):
        raise ValueError(f"expected 3 or 4 fields, got {len(row)}")
    date_s, cell, gross_s = (v.strip() for v in row[:3])
    rec_s = row[3].strip() if len(row) == 4 else ""
    try:
        date = dt.date.fromisoformat(date_s)
    except ValueError:
        raise ValueError(f"unparseable date {date_s!r}") from None
    if not cell:
        raise ValueError("empty cell label")
    try:
        gross = float(gross_s)
        recovery = float(rec_s) if rec_s else None
    except ValueError as exc:
        raise ValueError(f"bad amount: {exc}") from None
    try:
        return LossRecord(date, cell, gross, recovery)
    except DomainError as exc:
        raise ValueError(str(exc)) from None


def ingest_losses(path, threshold: float) -> IngestResult:
    """
    Read a loss file, drop losses below the reporting threshold.

    Parameters
    ----------
    path : path-like
    threshold : float
        Reporting threshold on the gross loss; rows with
        ``gross_loss < threshold`` are counted as truncated, not kept.

    Returns
    -------
    IngestResult

    Raises
    ------
    EmptyDataError
        No usable row remains; the message carries the truncation and
        error summary. Malformed rows alone never abort the read.
    """
    if threshold is None or not threshold >= 0:
        raise DomainError("an explicit threshold >= 0 is required")
    text = Path(path).read_text()
    reader = csv.reader(text.splitlines())
    header = next(reader, None)
    if header is None or not any(h.strip() for h in header):
        raise EmptyDataError(f"{path}: file is empty")
    if tuple(h.strip().lower() for h in header[: len(LOSS_HEADER)]) not in (LOSS_HEADER, LOSS_HEADER[:3]):
        raise DomainError(f"{path}: header must be {','.join(LOSS_HEADER)}")

    kept, errors = [], []
    truncated = Counter()
    years_seen = set()
    for lineno, row in enumerate(reader, start=2):
        if not row or not any(v.strip() for v in row):
            continue
        try:
            rec = _parse_row(row)
        except ValueError as exc:
            errors.append((lineno, str(exc)))
            continue
        years_seen.add(rec.event_date.year)
        if rec.gross_loss < threshold:
            truncated[rec.cell] += 1
        else:
            kept.append(rec)

    result = IngestResult(kept, float(threshold), (), {}, sum(truncated.values()), dict(truncated), errors)
    if not kept:
        raise EmptyDataError(f"{path}: no usable loss records\n{result.summary()}")
    years = tuple(range(min(years_seen), max(years_seen) + 1))
    per_cell = defaultdict(Counter)
    for rec in kept:
        per_cell[rec.cell][rec.event_date.year] += 1
    result.years = years
    result.annual_counts = {c: tuple(per_cell[c][y] for y in years) for c in sorted(per_cell)}
    return result


def file_digest(*paths, extra: str = "") -> str:
    """sha256 over file contents (in the given order) and an extra string."""
    h = hashlib.sha256()
    for p in paths:
        h.update(Path(p).read_bytes())
        h.update(b"\0")
    h.update(extra.encode())
    return h.hexdigest()


# ---------------------------------------------------------------------------
# Exceedance statements
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExceedanceStatement:
    """
    A loss of ``amount`` or more is expected once every ``every_years`` years.

    ``recurrence`` says how the period was meant: ``'mean'`` (the default)
    for a mean recurrence time, ``'median'`` for a median waiting time.
    """

    amount: float
    every_years: float
    recurrence: str = "mean"

    def __post_init__(self):
        if not (self.amount > 0 and self.every_years > 0):
            raise DomainError("amount and every_years must be > 0")
        if self.recurrence not in ("mean", "median"):
            raise DomainError(f"recurrence must be 'mean' or 'median', got {self.recurrence!r}")


def exceedance_rate(s: ExceedanceStatement, recurrence: str | None = None) -> float:
    """
    Annual intensity of losses at or above ``s.amount``.

    ``recurrence='mean'`` reads the period as a mean recurrence time
    (rate ``1/d``); ``'median'`` reads it as the median waiting time of a
    Poisson process (rate ``ln 2 / d``). ``None`` uses the statement's own
    setting.
    """
    recurrence = s.recurrence if recurrence is None else recurrence
    if recurrence == "mean":
        return 1.0 / s.every_years
    if recurrence == "median":
        return math.log(2.0) / s.every_years
    raise DomainError(f"recurrence must be 'mean' or 'median', got {recurrence!r}")


def exceedance_quantile_level(s: ExceedanceStatement, intensity: float, recurrence: str | None = None) -> float:
    """Severity level ``p`` with ``F(amount) = p`` implied by an event intensity."""
    if not intensity > 0:
        raise DomainError("intensity must be > 0")
    p = 1.0 - exceedance_rate(s, recurrence) / intensity
    if not 0 < p < 1:
        raise DomainError(
            f"exceedance every {s.every_years} years is not compatible with intensity {intensity}"
        )
    return p


def lognormal_from_exceedances(statements, intensity: float, recurrence: str | None = None) -> LognormalParams:
    """
    Lognormal severity matching exceedance statements at a given event intensity.

    Each statement fixes one severity quantile through
    :func:`exceedance_quantile_level`; ``ln(amount) = mu + sigma z_p`` is then
    solved by least squares (exactly for two statements).

    Raises
    ------
    DomainError
        Fewer than two distinct levels, or the statements imply a
        non-increasing severity curve (sigma <= 0).
    """
    statements = list(statements)
    p = np.array([exceedance_quantile_level(s, intensity, recurrence) for s in statements])
    if np.unique(p).size < 2:
        raise DomainError("need at least two exceedance statements with different return periods")
    z = special.ndtri(p)
    y = np.log([s.amount for s in statements])
    a = np.column_stack([np.ones_like(z), z])
    (mu, sigma), *_ = np.linalg.lstsq(a, y, rcond=None)
    if not sigma > 0:
        raise DomainError("exceedance statements are inconsistent: larger losses would be more frequent")
    return LognormalParams(float(mu), float(sigma))


# ---------------------------------------------------------------------------
# Scenario configuration
# ---------------------------------------------------------------------------

_PROB = {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}
_POS = {"type": "number", "exclusiveMinimum": 0}
_MASS = {"anyOf": [_POS, {"type": "string", "pattern": r"^\s*\d+\s*/\s*\d+\s*$"}]}

SCENARIO_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "scenario configuration",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "elicited_intervals": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["mean", "lower", "upper", "coverage"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string"},
                    "mean": _POS,
                    "lower": _POS,
                    "upper": _POS,
                    "coverage": _PROB,
                },
            },
        },
        "exceedances": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["amount", "every_years"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string"},
                    "amount": _POS,
                    "every_years": _POS,
                    "recurrence": {"enum": ["mean", "median"]},
                },
            },
        },
        "expert_opinions": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["values"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string"},
                    "values": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                    "xi": _POS,
                },
            },
        },
        "dirichlet": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["knots", "values", "concentration"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string"},
                    "knots": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                    "values": {
                        "type": "array",
                        "items": {"type": "number", "minimum": 0, "maximum": 1},
                        "minItems": 1,
                    },
                    "concentration": _POS,
                    "interpolation": {"enum": ["linear", "step"]},
                },
            },
        },
        "ds_structures": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["elements"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string"},
                    "kind": {"enum": ["sure", "statistical"]},
                    "elements": {
                        "type": "array",
                        "minItems": 1,
                        "items": {
                            "type": "array",
                            "prefixItems": [{"type": "number"}, {"type": "number"}, _MASS],
                            "minItems": 3,
                            "maxItems": 3,
                        },
                    },
                },
            },
        },
    },
}


@dataclass
class ScenarioConfig:
    elicited_intervals: dict[str, ElicitedInterval] = field(default_factory=dict)
    exceedances: dict[str, ExceedanceStatement] = field(default_factory=dict)
    expert_opinions: dict[str, tuple[tuple[float, ...], float | None]] = field(default_factory=dict)
    dirichlet: dict[str, DirichletPrior] = field(default_factory=dict)
    ds_structures: dict[str, DempsterShaferStructure] = field(default_factory=dict)


def _mass(v):
    return Fraction(v.replace(" ", "")) if isinstance(v, str) else v


def parse_scenario(doc: dict) -> ScenarioConfig:
    """Validate a decoded scenario document and build the typed objects."""
    try:
        jsonschema.validate(doc, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise DomainError(f"scenario config invalid at {where}: {exc.message}") from None

    def named(items, prefix):
        for i, item in enumerate(items):
            yield item.get("name", f"{prefix}{i}"), item

    cfg = ScenarioConfig()
    for name, it in named(doc.get("elicited_intervals", []), "interval"):
        cfg.elicited_intervals[name] = ElicitedInterval(it["mean"], it["lower"], it["upper"], it["coverage"])
    for name, it in named(doc.get("exceedances", []), "exceedance"):
        cfg.exceedances[name] = ExceedanceStatement(it["amount"], it["every_years"], it.get("recurrence", "mean"))
    for name, it in named(doc.get("expert_opinions", []), "experts"):
        cfg.expert_opinions[name] = (tuple(float(v) for v in it["values"]), it.get("xi"))
    for name, it in named(doc.get("dirichlet", []), "dirichlet"):
        base = StepDistribution(tuple(it["knots"]), tuple(it["values"]), it.get("interpolation", "linear"))
        cfg.dirichlet[name] = DirichletPrior(base, float(it["concentration"]))
    for name, it in named(doc.get("ds_structures", []), "structure"):
        elements = [((x, y), _mass(p)) for x, y, p in it["elements"]]
        cfg.ds_structures[name] = DempsterShaferStructure.from_elements(elements, it.get("kind", "sure"))
    return cfg


def load_scenario(path) -> ScenarioConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path}: not valid JSON ({exc})") from None
    return parse_scenario(doc)
