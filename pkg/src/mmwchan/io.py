"""File formats: trace JSON-lines, profile JSON, run manifests.

Trace corpora are JSON-lines, one object per capture:

    {"schema_version": 1, "location": "capture-000000", "beam_id": 0,
     "scenario": "tunnel", "beamwidth_deg": 7.0, "capture_index": 0,
     "taps": [[delay_seconds, amplitude], ...]}

with tap delays ascending.  Unknown keys are ignored on read; every field
except ``taps`` has a default, so minimal hand-written corpora stay valid.
Floats serialize through ``repr`` (shortest round-trip form), so parsed
values re-serialize byte-identically.
"""

from __future__ import annotations

import dataclasses
import datetime
import json
from pathlib import Path
from typing import Iterable, Iterator, Optional

from .profiles import ScenarioProfile, profile_from_jsonable, profile_to_jsonable
from .trace import TapSeries

TRACE_SCHEMA_VERSION = 1


class TraceFormatError(Exception):
    """A trace line failed to parse; carries the 1-based line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


def tap_series_to_jsonable(capture: TapSeries) -> dict:
    return {
        "schema_version": TRACE_SCHEMA_VERSION,
        "location": capture.location_id,
        "beam_id": capture.beam_id,
        "scenario": capture.scenario,
        "beamwidth_deg": capture.beamwidth_deg,
        "capture_index": capture.capture_index,
        "taps": [[float(d), float(a)] for d, a in zip(capture.delays, capture.amplitudes)],
    }


def write_taps_jsonl(path, captures: Iterable[TapSeries]) -> int:
    """Write captures as JSON-lines; returns the number written."""
    n = 0
    with open(path, "w") as fh:
        for capture in captures:
            fh.write(json.dumps(tap_series_to_jsonable(capture)) + "\n")
            n += 1
    return n


def _parse_trace_line(obj, line_number: int, default_index: int) -> TapSeries:
    if not isinstance(obj, dict):
        raise TraceFormatError(line_number, "capture must be a JSON object")
    taps = obj.get("taps")
    if not isinstance(taps, list) or not taps:
        raise TraceFormatError(line_number, "missing or empty 'taps' array")
    try:
        delays = [float(t[0]) for t in taps]
        amps = [float(t[1]) for t in taps]
    except (TypeError, ValueError, IndexError):
        raise TraceFormatError(line_number, "taps must be [delay, amplitude] pairs")
    try:
        return TapSeries(
            delays=delays,
            amplitudes=amps,
            location_id=str(obj.get("location", "")),
            beam_id=int(obj.get("beam_id", 0)),
            scenario=str(obj.get("scenario", "")),
            beamwidth_deg=float(obj.get("beamwidth_deg", 0.0)),
            capture_index=int(obj.get("capture_index", default_index)),
        )
    except (TypeError, ValueError) as err:
        raise TraceFormatError(line_number, str(err))


def iter_taps_jsonl(path) -> Iterator[TapSeries]:
    """Stream captures from a JSON-lines trace file.

    Raises
    ------
    TraceFormatError
        On the first malformed line, citing its line number.
    """
    with open(path) as fh:
        index = 0
        for line_number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as err:
                raise TraceFormatError(line_number, f"invalid JSON ({err.msg})")
            yield _parse_trace_line(obj, line_number, index)
            index += 1


def read_taps_jsonl(path) -> list[TapSeries]:
    return list(iter_taps_jsonl(path))


def write_profile_json(path, profile: ScenarioProfile) -> None:
    Path(path).write_text(json.dumps(profile_to_jsonable(profile), indent=2) + "\n")


def read_profile_json(path) -> ScenarioProfile:
    return profile_from_jsonable(json.loads(Path(path).read_text()))


@dataclasses.dataclass
class RunManifest:
    """Reproducibility record written beside every stochastic command's
    output.  The corpus file itself stays timestamp-free so identical seeds
    give byte-identical corpora; the wall-clock lives here."""

    command: str
    arguments: dict
    seed: Optional[int]
    outputs: list[str]
    tool_version: str
    timestamp: str = ""

    def write(self, path) -> None:
        data = dataclasses.asdict(self)
        if not data["timestamp"]:
            data["timestamp"] = (
                datetime.datetime.now(datetime.timezone.utc).isoformat()
            )
        Path(path).write_text(json.dumps(data, indent=2) + "\n")


def manifest_path_for(output_path) -> Path:
    p = Path(output_path)
    return p.with_name(p.name + ".manifest.json")
