"""CSV serialization of shot series and histograms.

Formats (one header row, then one row per shot)::

    count            integer counts        -> ShotSeries
    arm1,arm2        paired integer counts -> PairedShotSeries
    value            analog pulse heights  -> AnalogShotSeries

Reals are written with 17 significant digits so they round-trip exactly.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Union

import numpy as np

from .detector import AnalogShotSeries
from .errors import ParseError, ShotIOError
from .phs import Histogram
from .stats import PairedShotSeries, ShotSeries

AnySeries = Union[ShotSeries, PairedShotSeries, AnalogShotSeries]

_HEADERS = {
    "count": ShotSeries,
    "arm1,arm2": PairedShotSeries,
    "value": AnalogShotSeries,
}


def _write_text(path, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise ShotIOError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _lines(header: str, rows) -> str:
    return header + "\n" + "".join(r + "\n" for r in rows)


def write_shots(series: AnySeries, path: Union[str, os.PathLike]) -> None:
    if isinstance(series, PairedShotSeries):
        a, b = series.arm1.counts, series.arm2.counts
        text = _lines("arm1,arm2", (f"{x},{y}" for x, y in zip(a.tolist(), b.tolist())))
    elif isinstance(series, ShotSeries):
        text = _lines("count", map(str, series.counts.tolist()))
    elif isinstance(series, AnalogShotSeries):
        text = _lines("value", (f"{v:.17g}" for v in series.values.tolist()))
    else:
        raise TypeError(f"cannot serialize {type(series).__name__}")
    _write_text(path, text)


def _parse_int(token: str, lineno: int, path) -> int:
    try:
        v = int(token)
    except ValueError:
        raise ParseError(f"not an integer count: {token!r}", lineno, path) from None
    if v < 0:
        raise ParseError(f"negative count: {v}", lineno, path)
    return v


def _parse_float(token: str, lineno: int, path) -> float:
    try:
        v = float(token)
    except ValueError:
        raise ParseError(f"not a number: {token!r}", lineno, path) from None
    if not np.isfinite(v):
        raise ParseError(f"non-finite value: {token!r}", lineno, path)
    return v


def read_shots(path: Union[str, os.PathLike]) -> AnySeries:
    """Read any of the three shot formats; the header decides the type."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ShotIOError(f"cannot read {path}: {exc.strerror or exc}") from exc
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty file", 1, path)
    header = lines[0].strip().replace(" ", "")
    kind = _HEADERS.get(header)
    if kind is None:
        raise ParseError(f"unrecognised header {lines[0]!r}; expected one of {sorted(_HEADERS)}", 1, path)
    body = [(i, ln.strip()) for i, ln in enumerate(lines[1:], start=2) if ln.strip()]
    if not body:
        raise ParseError("no data rows", 2, path)

    if kind is PairedShotSeries:
        a, b = [], []
        for lineno, ln in body:
            parts = ln.split(",")
            if len(parts) != 2:
                raise ParseError(f"expected 2 columns, got {len(parts)}", lineno, path)
            a.append(_parse_int(parts[0].strip(), lineno, path))
            b.append(_parse_int(parts[1].strip(), lineno, path))
        return PairedShotSeries(ShotSeries(np.array(a, dtype=np.int64)),
                                ShotSeries(np.array(b, dtype=np.int64)))

    for lineno, ln in body:
        if "," in ln:
            raise ParseError("expected a single column", lineno, path)
    if kind is ShotSeries:
        return ShotSeries(np.array([_parse_int(ln, i, path) for i, ln in body], dtype=np.int64))
    return AnalogShotSeries(np.array([_parse_float(ln, i, path) for i, ln in body]))


def write_histogram(hist: Histogram, path) -> None:
    e, c = hist.bin_edges, hist.counts
    rows = (f"{lo:.17g},{hi:.17g},{n}" for lo, hi, n in zip(e[:-1].tolist(), e[1:].tolist(), c.tolist()))
    _write_text(path, _lines("edge_low,edge_high,count", rows))


def read_histogram(path) -> Histogram:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ShotIOError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if not lines or lines[0].replace(" ", "") != "edge_low,edge_high,count":
        raise ParseError("expected header 'edge_low,edge_high,count'", 1, path)
    lows, highs, counts = [], [], []
    for lineno, ln in enumerate(lines[1:], start=2):
        if not ln.strip():
            continue
        parts = ln.split(",")
        if len(parts) != 3:
            raise ParseError(f"expected 3 columns, got {len(parts)}", lineno, path)
        lows.append(_parse_float(parts[0], lineno, path))
        highs.append(_parse_float(parts[1], lineno, path))
        counts.append(_parse_int(parts[2].strip(), lineno, path))
    if not counts:
        raise ParseError("no data rows", 2, path)
    if any(abs(h - l2) > 0 for h, l2 in zip(highs[:-1], lows[1:])):
        raise ParseError("bins are not contiguous", None, path)
    return Histogram(np.array(lows + [highs[-1]]), np.array(counts))
