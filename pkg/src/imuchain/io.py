"""File formats: JSONL sensor logs and small JSON/CSV helpers.

A log line is one reading:
    {"imu_id": "a", "t": 0.0, "gyro": [..3..], "accel": [..3..]}
Lines are interleaved in time order; each sensor's own records are strictly
increasing in t.  Floats use Python's shortest round-trip representation,
so rewriting a parsed log reproduces it byte for byte.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import InvalidInputError
from .streams import ImuStream


def write_imu_log(path, streams) -> None:
    """Write streams (dict or iterable of ImuStream) as a JSONL log."""
    if isinstance(streams, dict):
        streams = list(streams.values())
    records = []
    for s in streams:
        for k in range(len(s)):
            records.append(
                (float(s.times[k]), s.imu_id, s.gyro[k], s.accel[k])
            )
    records.sort(key=lambda r: (r[0], r[1]))
    with open(path, "w") as fh:
        for t, imu_id, gyro, accel in records:
            fh.write(json.dumps(
                {"imu_id": imu_id, "t": t,
                 "gyro": [float(v) for v in gyro],
                 "accel": [float(v) for v in accel]}
            ))
            fh.write("\n")


def read_imu_log(path) -> dict:
    """Parse a JSONL log into {imu_id: ImuStream}."""
    by_id = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                imu_id = rec["imu_id"]
                entry = (float(rec["t"]),
                         [float(v) for v in rec["gyro"]],
                         [float(v) for v in rec["accel"]])
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise InvalidInputError(
                    "bad log record at line %d: %s" % (lineno, exc)
                ) from exc
            if len(entry[1]) != 3 or len(entry[2]) != 3:
                raise InvalidInputError(
                    "bad log record at line %d: need 3-vectors" % lineno
                )
            by_id.setdefault(imu_id, []).append(entry)
    out = {}
    for imu_id, rows in by_id.items():
        times = np.array([r[0] for r in rows])
        out[imu_id] = ImuStream(
            imu_id, times,
            np.array([r[1] for r in rows]),
            np.array([r[2] for r in rows]),
        )
    return out


def write_csv(path, header, rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def load_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def save_json(path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
