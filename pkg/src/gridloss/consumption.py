"""Minute-resolution household consumption data and windowed power sums.

The source file has nine columns (date, time, active and reactive power in
kW, voltage, intensity, three sub-meterings) separated by ``;`` with ``?``
marking missing measurements.
"""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass, fields
from typing import Iterable, NamedTuple, TextIO

COLUMNS = (
    "Date",
    "Time",
    "Global_active_power",
    "Global_reactive_power",
    "Voltage",
    "Global_intensity",
    "Sub_metering_1",
    "Sub_metering_2",
    "Sub_metering_3",
)
MISSING_MARKERS = {"", "?", "nan", "na"}
NA = "NA"


class HeaderError(ValueError):
    def __init__(self, observed):
        self.observed = observed
        super().__init__(f"unexpected header: {observed!r}; expected {';'.join(COLUMNS)}")


@dataclass(frozen=True)
class ConsumptionRecord:
    date: dt.date
    time: dt.time
    global_active_power: float | None = None
    global_reactive_power: float | None = None
    voltage: float | None = None
    global_intensity: float | None = None
    sub_metering_1: float | None = None
    sub_metering_2: float | None = None
    sub_metering_3: float | None = None

    @property
    def timestamp(self) -> dt.datetime:
        return dt.datetime.combine(self.date, self.time)


MEASUREMENTS = tuple(f.name for f in fields(ConsumptionRecord))[2:]


class ParseResult(NamedTuple):
    records: list[ConsumptionRecord]
    skipped: int


def _measurement(text: str) -> float | None:
    text = text.strip()
    if text.lower() in MISSING_MARKERS:
        return None
    try:
        value = float(text)
    except ValueError:
        return None
    if not math.isfinite(value) or value < 0:
        return None
    return value


def _timestamp(date_text: str, time_text: str) -> tuple[dt.date, dt.time] | None:
    try:
        date = dt.datetime.strptime(date_text.strip(), "%d/%m/%Y").date()
        time = dt.time.fromisoformat(time_text.strip())
    except ValueError:
        return None
    return date, time


def parse(source: TextIO | Iterable[str], separator: str = ";") -> ParseResult:
    """Read records from ``source``.

    Rows with a bad date or time are skipped and counted. Unparseable,
    negative or missing measurements become ``None`` without dropping the row.
    """
    reader = csv.reader(source, delimiter=separator)
    try:
        header = next(reader)
    except StopIteration:
        raise HeaderError("") from None
    names = [h.strip() for h in header]
    # a leading unnamed column (pandas index) is tolerated
    if names and names[0] == "" and tuple(names[1:]) == COLUMNS:
        offset = 1
    elif tuple(names) == COLUMNS:
        offset = 0
    else:
        raise HeaderError(separator.join(header))

    records, skipped = [], 0
    for row in reader:
        if not row or all(not cell.strip() for cell in row):
            continue
        row = row[offset:]
        if len(row) < 2:
            skipped += 1
            continue
        stamp = _timestamp(row[0], row[1])
        if stamp is None:
            skipped += 1
            continue
        values = [_measurement(c) for c in row[2:len(COLUMNS)]]
        values += [None] * (len(MEASUREMENTS) - len(values))
        records.append(ConsumptionRecord(*stamp, *values))
    return ParseResult(records, skipped)


def _format_value(v: float | None) -> str:
    return "?" if v is None else repr(v)


def write_records(records: Iterable[ConsumptionRecord], out: TextIO, separator: str = ";") -> None:
    writer = csv.writer(out, delimiter=separator, lineterminator="\n")
    writer.writerow(COLUMNS)
    for r in records:
        writer.writerow([r.date.strftime("%d/%m/%Y"), r.time.strftime("%H:%M:%S")]
                        + [_format_value(getattr(r, name)) for name in MEASUREMENTS])


@dataclass(frozen=True)
class WindowMetrics:
    index: int
    clr: float
    blr: float
    ulr: float | None
    missing: int = 0

    @property
    def ulr_defined(self) -> bool:
        return self.ulr is not None


def window_metrics(records: list[ConsumptionRecord], window: int,
                   missing: str = "zero") -> list[WindowMetrics]:
    """Sums of active (``clr``) and reactive (``blr``) power over each full
    window of ``window`` consecutive records, and their ratio ``ulr``.

    ``missing="zero"`` counts absent values as 0; ``missing="skip"`` drops
    every window that contains one. Sums are correctly rounded (``fsum``).
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    if missing not in ("zero", "skip"):
        raise ValueError(f"unknown missing-value policy {missing!r}")
    active = [r.global_active_power for r in records]
    reactive = [r.global_reactive_power for r in records]
    gaps = [int(a is None or q is None) for a, q in zip(active, reactive)]
    active = [0.0 if a is None else a for a in active]
    reactive = [0.0 if q is None else q for q in reactive]

    out = []
    n_missing = sum(gaps[:window])
    for i in range(len(records) - window + 1):
        if i:
            n_missing += gaps[i + window - 1] - gaps[i - 1]
        if missing == "skip" and n_missing:
            continue
        clr = math.fsum(active[i:i + window])
        blr = math.fsum(reactive[i:i + window])
        out.append(WindowMetrics(i, clr, blr, clr / blr if blr > 0 else None, n_missing))
    return out


def write_metrics(metrics: Iterable[WindowMetrics], out: TextIO, separator: str = ",") -> None:
    writer = csv.writer(out, delimiter=separator, lineterminator="\n")
    writer.writerow(["index", "clr", "blr", "ulr"])
    for m in metrics:
        writer.writerow([m.index, repr(m.clr), repr(m.blr), NA if m.ulr is None else repr(m.ulr)])


def read_metrics(source: TextIO, separator: str = ",") -> list[WindowMetrics]:
    reader = csv.DictReader(source, delimiter=separator)
    return [WindowMetrics(int(row["index"]), float(row["clr"]), float(row["blr"]),
                          None if row["ulr"] == NA else float(row["ulr"]))
            for row in reader]
