import io
import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from gridloss.consumption import (
    COLUMNS, HeaderError, parse, read_metrics, window_metrics, write_metrics, write_records,
)

from conftest import EXCERPT, synthetic_household

HEADER = ";".join(COLUMNS)


def oracle_window_sums(path, window, column):
    """Exact windowed sums straight from the raw text, missing treated as zero."""
    values = []
    with open(path) as fh:
        next(fh)
        for line in fh:
            cell = line.rstrip("\n").split(";")[column]
            try:
                v = float(cell)
            except ValueError:
                v = math.nan
            values.append(Fraction(0) if math.isnan(v) else Fraction(v))
    return [float(sum(values[i:i + window])) for i in range(len(values) - window + 1)]


def test_first_published_row():
    with open(EXCERPT) as fh:
        records, skipped = parse(fh)
    r = records[0]
    assert skipped == 0 and len(records) == 10
    assert (r.global_active_power, r.global_reactive_power, r.voltage, r.global_intensity) == \
        (4.216, 0.418, 234.840, 18.400)
    assert (r.sub_metering_1, r.sub_metering_2, r.sub_metering_3) == (0.0, 1.0, 17.0)
    assert r.timestamp.isoformat() == "2006-12-16T17:24:00"


def test_nan_fields_missing_not_skipped():
    with open(EXCERPT) as fh:
        records, skipped = parse(fh)
    last = records[-1]
    assert skipped == 0
    assert last.voltage == 238.2
    assert last.global_intensity is None and last.sub_metering_3 is None


def test_question_mark_missing():
    text = HEADER + "\n21/12/2006;11:23:00;?;?;?;?;?;?;\n"
    (rec,), skipped = parse(io.StringIO(text))
    assert rec.global_active_power is None and rec.sub_metering_3 is None


def test_empty_body():
    assert parse(io.StringIO(HEADER + "\n")) == ([], 0)


def test_bad_timestamp_skipped():
    text = HEADER + "\n32/13/2006;17:24:00;1;1;1;1;1;1;1\n16/12/2006;xx;1;1;1;1;1;1;1\n" \
        "16/12/2006;17:24:00;1;1;1;1;1;1;1\n"
    records, skipped = parse(io.StringIO(text))
    assert len(records) == 1 and skipped == 2


def test_wrong_header_rejected():
    with pytest.raises(HeaderError) as err:
        parse(io.StringIO("a;b;c\n1;2;3\n"))
    assert "a;b;c" in str(err.value)


def test_comma_separator_and_index_column():
    text = "," + ",".join(COLUMNS) + "\n0,16/12/2006,17:24:00,4.216,0.418,234.840,18.400,0.000,1.000,17.0\n"
    (rec,), _ = parse(io.StringIO(text), separator=",")
    assert rec.global_active_power == 4.216


def _records(active, reactive):
    body = "".join(f"16/12/2006;17:{k % 60:02d}:00;{a};{q};230;1;0;0;0\n"
                   for k, (a, q) in enumerate(zip(active, reactive)))
    return parse(io.StringIO(HEADER + "\n" + body)).records


def test_constant_series():
    (m,) = window_metrics(_records([1.0] * 20, [0.5] * 20), 20)
    assert (m.clr, m.blr, m.ulr) == (20.0, 10.0, 2.0)


def test_zero_reactive_gives_undefined_ratio():
    with open(EXCERPT) as fh:
        records = parse(fh).records
    tail = window_metrics(records[6:], 4)
    assert [m.blr for m in tail] == [0.0]
    assert tail[0].ulr is None and not tail[0].ulr_defined


def test_window_larger_than_records():
    assert window_metrics(_records([1.0] * 3, [1.0] * 3), 4) == []


def test_window_one_is_identity():
    active = [0.5, 1.25, 3.0]
    assert [m.clr for m in window_metrics(_records(active, [1, 1, 1]), 1)] == active


def test_skip_policy_drops_windows_with_gaps():
    recs = _records(["1", "?", "1", "1"], ["1", "1", "1", "1"])
    assert [m.index for m in window_metrics(recs, 2, missing="skip")] == [2]
    assert [m.missing for m in window_metrics(recs, 2)] == [1, 1, 0]


def test_metrics_match_exact_oracle(tmp_path):
    path = synthetic_household(tmp_path / "h.txt", total_rows=2000)
    with open(path) as fh:
        metrics = window_metrics(parse(fh).records, 20)
    assert [m.clr for m in metrics] == oracle_window_sums(path, 20, 2)
    assert [m.blr for m in metrics] == oracle_window_sums(path, 20, 3)


@given(st.lists(st.floats(0, 10, allow_nan=False), min_size=1, max_size=60), st.integers(1, 25))
def test_sliding_consistency_and_length(values, window):
    recs = _records([repr(v) for v in values], ["0.1"] * len(values))
    metrics = window_metrics(recs, window)
    assert len(metrics) == max(0, len(values) - window + 1)
    for a, b in zip(metrics, metrics[1:]):
        expected = math.fsum([a.clr, -values[a.index], values[a.index + window]])
        assert b.clr == pytest.approx(expected, abs=1e-9)


def test_reserialize_fixed_point():
    with open(EXCERPT) as fh:
        first = parse(fh).records
    buf = io.StringIO()
    write_records(first, buf)
    second = parse(io.StringIO(buf.getvalue())).records
    assert second == first
    buf2 = io.StringIO()
    write_records(second, buf2)
    assert buf2.getvalue() == buf.getvalue()


def test_metrics_file_round_trip():
    metrics = window_metrics(_records([1, 2, 0], [1, 0, 0]), 2)
    buf = io.StringIO()
    write_metrics(metrics, buf)
    assert "NA" in buf.getvalue()
    back = read_metrics(io.StringIO(buf.getvalue()))
    assert [(m.index, m.clr, m.blr, m.ulr) for m in back] == \
        [(m.index, m.clr, m.blr, m.ulr) for m in metrics]
