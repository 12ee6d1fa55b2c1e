"""Line-delimited result records with a versioned schema.

One JSON object per line, serialized canonically (sorted keys, no
whitespace, no NaN) so that parse -> serialize round-trips to the exact
same bytes and record streams can be diffed.  Every record carries the
schema version, the experiment id, and enough configuration echo to be
self-describing; checkpoint records additionally carry the integration
step and the full configuration snapshot, which together with
counter-based noise keyed by absolute step make runs resumable with
bit-identical continuations.
"""

from __future__ import annotations

import dataclasses
import json
from typing import Any, Iterable, Iterator

import numpy as np

from . import __version__

__all__ = [
    "SCHEMA_VERSION",
    "jsonable",
    "make_record",
    "serialize_record",
    "append_record",
    "read_records",
    "checkpoint_record",
    "latest_checkpoint",
    "configuration_from_record",
]

SCHEMA_VERSION = 1


def jsonable(value: Any) -> Any:
    """Recursively coerce numpy scalars/arrays and dataclasses to plain
    JSON-serializable Python values.  Rejects non-finite floats."""
    if isinstance(value, (bool, str)) or value is None:
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if v != v or v in (float("inf"), float("-inf")):
            raise ValueError("non-finite value in record")
        return v
    if isinstance(value, complex):
        return {"re": jsonable(value.real), "im": jsonable(value.imag)}
    if isinstance(value, np.ndarray):
        if np.iscomplexobj(value):
            return {"re": jsonable(value.real), "im": jsonable(value.imag)}
        return [jsonable(x) for x in value.tolist()] if value.ndim else jsonable(value.item())
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return jsonable(dataclasses.asdict(value))
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    raise TypeError(f"cannot serialize {type(value)} into a record")


def make_record(kind: str, experiment_id: str, config_echo: dict, **fields: Any) -> dict:
    """Assemble a schema-stamped record; payload fields are coerced."""
    rec = {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "experiment_id": experiment_id,
        "version": __version__,
        "config": jsonable(config_echo),
    }
    for k, v in fields.items():
        rec[k] = jsonable(v)
    return rec


def serialize_record(rec: dict) -> str:
    """Canonical single-line JSON serialization."""
    return json.dumps(rec, sort_keys=True, separators=(",", ":"), allow_nan=False)


def append_record(fh, rec: dict) -> None:
    fh.write(serialize_record(rec))
    fh.write("\n")


def read_records(path: str) -> Iterator[dict]:
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)


def checkpoint_record(
    experiment_id: str,
    config_echo: dict,
    step: int,
    cfg: np.ndarray,
    seed: int,
    series: dict | None = None,
) -> dict:
    """Resumption point: absolute step index plus configuration snapshot.

    The noise stream is keyed by (seed, stream, step), so continuing
    from the recorded step reproduces the uninterrupted trajectory
    exactly.  ``series`` holds the observable measurements accumulated
    before the checkpoint; a resumed run preloads them so the final
    records match an uninterrupted run byte for byte.
    """
    return make_record(
        "checkpoint",
        experiment_id,
        config_echo,
        step=int(step),
        seed=int(seed),
        configuration=cfg,
        series={} if series is None else series,
    )


def latest_checkpoint(records: Iterable[dict]) -> dict | None:
    last = None
    for rec in records:
        if rec.get("kind") == "checkpoint":
            if last is None or rec["step"] > last["step"]:
                last = rec
    return last


def configuration_from_record(rec: dict, complex_valued: bool) -> np.ndarray:
    """Rebuild the configuration array stored in a checkpoint record."""
    payload = rec["configuration"]
    if isinstance(payload, dict):
        return np.asarray(payload["re"], dtype=float) + 1j * np.asarray(
            payload["im"], dtype=float
        )
    arr = np.asarray(payload, dtype=float)
    return arr.astype(complex) if complex_valued else arr
