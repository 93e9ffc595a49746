"""Domain types, file ingestion and serialization.

File formats
------------
Recording CSV
    header ``sample_index,h_uV,v_uV``, one row per sample in index order.
Recording manifest (JSON)
    ``{"subject_id": "s01", "fs_hz": 250.0}``
Subscore CSV
    header ``subject_id,<Subscale>...`` using the canonical subscale names.
Feature CSV
    header ``subject_id`` followed by the 44 feature columns ``<ABBR>_<h|v>``.
Event CSV
    header ``subject_id`` followed by the :class:`EventCounts` field names.
"""
from __future__ import annotations

import csv
import json
import math
from collections.abc import Iterator, Mapping
from dataclasses import asdict, dataclass, fields
from enum import Enum
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import (
    DuplicateSubject,
    LengthMismatch,
    MalformedCsv,
    MissingFeature,
    MissingValue,
    NonFiniteSample,
    TooShort,
    UnknownSubscale,
)

DEFAULT_FS_HZ = 250.0
MIN_SAMPLES = 16
RECORDING_HEADER = ("sample_index", "h_uV", "v_uV")


class Channel(str, Enum):
    Horizontal = "h"
    Vertical = "v"

    @property
    def suffix(self) -> str:
        return self.value


class Subscale(str, Enum):
    NavigationOrientation = "NavigationOrientation"
    SpatialAnxiety = "SpatialAnxiety"
    DistanceEstimation = "DistanceEstimation"
    LandmarkRecognition = "LandmarkRecognition"
    PathRoute = "PathRoute"
    PathSurvey = "PathSurvey"
    LocationAllocentric = "LocationAllocentric"

    @classmethod
    def parse(cls, name: str) -> "Subscale":
        try:
            return cls(name)
        except ValueError:
            raise UnknownSubscale(f"unknown subscale {name!r}; expected one of "
                                  f"{[s.value for s in cls]}") from None


# Order matters: it fixes the feature-table column order.
FEATURE_ABBRS = (
    "ME", "MD", "MO", "VA", "SD", "SK", "KU", "MI", "MA", "RA", "IQR",
    "RMS", "SMA", "ER", "EN", "ZCR", "AUC", "SC", "SB", "LE", "DFA", "TK",
)
FEATURE_KEYS = tuple(f"{abbr}_{ch.suffix}" for abbr in FEATURE_ABBRS for ch in Channel)


def feature_key(abbr: str, channel: Channel) -> str:
    if abbr not in FEATURE_ABBRS:
        raise KeyError(abbr)
    return f"{abbr}_{Channel(channel).suffix}"


def _frozen_array(values, name) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise LengthMismatch(f"{name} must be one-dimensional")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Recording:
    """Two-channel EOG recording.

    ``h`` and ``v`` are stored as read-only float arrays (microvolts in files).
    """

    subject_id: str
    fs_hz: float
    h: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        h = _frozen_array(self.h, "h")
        v = _frozen_array(self.v, "v")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "fs_hz", float(self.fs_hz))
        object.__setattr__(self, "subject_id", str(self.subject_id))
        if not (self.fs_hz > 0 and math.isfinite(self.fs_hz)):
            raise ValueError(f"fs_hz must be positive, got {self.fs_hz}")
        if h.size != v.size:
            raise LengthMismatch(f"{self.subject_id}: h has {h.size} samples, v has {v.size}")
        if h.size < MIN_SAMPLES:
            raise TooShort(f"{self.subject_id}: {h.size} samples < {MIN_SAMPLES}")
        for name, arr in (("h", h), ("v", v)):
            bad = np.flatnonzero(~np.isfinite(arr))
            if bad.size:
                raise NonFiniteSample(f"{self.subject_id}: non-finite {name} sample at index {bad[0]}")

    def __len__(self) -> int:
        return self.h.size

    @property
    def duration_s(self) -> float:
        return len(self) / self.fs_hz

    def channel(self, channel: Channel) -> np.ndarray:
        return self.h if Channel(channel) is Channel.Horizontal else self.v

    def replace(self, **changes) -> "Recording":
        kw = dict(subject_id=self.subject_id, fs_hz=self.fs_hz, h=self.h, v=self.v)
        kw.update(changes)
        return Recording(**kw)


@dataclass(frozen=True)
class EventCounts:
    """Ground-truth eye-movement measures for one recording.

    Durations are totals over the recording, in seconds.
    """

    blink_count: int = 0
    fixation_count: int = 0
    fixation_duration_s: float = 0.0
    saccade_count: int = 0
    saccade_duration_s: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            val = getattr(self, f.name)
            if f.name.endswith("_count"):
                if int(val) != val or val < 0:
                    raise ValueError(f"{f.name} must be a nonnegative integer, got {val}")
                object.__setattr__(self, f.name, int(val))
            elif not (val >= 0 and math.isfinite(val)):
                raise ValueError(f"{f.name} must be a nonnegative real, got {val}")


EVENT_MEASURES = tuple(f.name for f in fields(EventCounts))


class FeatureVector(Mapping):
    """Read-only mapping of the 44 feature keys to floats."""

    __slots__ = ("_values", "subject_id")

    def __init__(self, values: Mapping[str, float], subject_id: str | None = None):
        missing = [k for k in FEATURE_KEYS if k not in values]
        if missing:
            raise MissingFeature(f"feature vector lacks {missing}")
        extra = set(values) - set(FEATURE_KEYS)
        if extra:
            raise KeyError(f"unknown feature keys {sorted(extra)}")
        self._values = {k: float(values[k]) for k in FEATURE_KEYS}
        self.subject_id = subject_id

    @classmethod
    def zeros(cls, subject_id=None) -> "FeatureVector":
        return cls(dict.fromkeys(FEATURE_KEYS, 0.0), subject_id)

    def __getitem__(self, key):
        return self._values[key]

    def __iter__(self) -> Iterator[str]:
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def to_array(self) -> np.ndarray:
        return np.array([self._values[k] for k in FEATURE_KEYS])

    def __repr__(self):
        return f"FeatureVector(subject_id={self.subject_id!r}, n={len(self)})"


class SubscoreTable(Mapping):
    """Mapping ``(subject_id, Subscale) -> float``."""

    def __init__(self, values: Mapping[tuple[str, Subscale], float]):
        self._values = {}
        for (sid, sub), val in values.items():
            val = float(val)
            if not math.isfinite(val):
                raise MissingValue(f"non-finite subscore for ({sid}, {sub})")
            self._values[(str(sid), Subscale.parse(sub))] = val

    def __getitem__(self, key):
        sid, sub = key
        return self._values[(sid, Subscale.parse(sub))]

    def __iter__(self):
        return iter(self._values)

    def __len__(self):
        return len(self._values)

    @property
    def subjects(self) -> list[str]:
        return sorted({sid for sid, _ in self._values})

    @property
    def subscales(self) -> list[Subscale]:
        present = {sub for _, sub in self._values}
        return [s for s in Subscale if s in present]

    def column(self, subscale, subjects=None) -> np.ndarray:
        """Values of one subscale for ``subjects`` (default: all, sorted)."""
        subscale = Subscale.parse(subscale)
        subjects = self.subjects if subjects is None else list(subjects)
        out = np.empty(len(subjects))
        for i, sid in enumerate(subjects):
            try:
                out[i] = self._values[(sid, subscale)]
            except KeyError:
                raise MissingValue(f"no {subscale.value} value for subject {sid!r}") from None
        return out


# ---------------------------------------------------------------------------
# recordings

def load_recording(path, manifest) -> Recording:
    """Read a recording CSV and its JSON manifest."""
    meta = json.loads(Path(manifest).read_text())
    try:
        subject_id = meta["subject_id"]
        fs_hz = float(meta.get("fs_hz", DEFAULT_FS_HZ))
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedCsv(f"{manifest}: bad manifest ({exc})") from None

    h, v = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(c.strip() for c in header) != RECORDING_HEADER:
            raise MalformedCsv(f"{path}: expected header {','.join(RECORDING_HEADER)}, got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise MalformedCsv(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            try:
                idx = int(row[0])
                hv, vv = float(row[1]), float(row[2])
            except ValueError:
                raise MalformedCsv(f"{path}:{lineno}: unparsable row {row}") from None
            if idx != len(h):
                raise MalformedCsv(f"{path}:{lineno}: sample_index {idx} out of order")
            if not (math.isfinite(hv) and math.isfinite(vv)):
                raise NonFiniteSample(f"{path}:{lineno}: non-finite sample")
            h.append(hv)
            v.append(vv)
    return Recording(subject_id, fs_hz, h, v)


def save_recording(rec: Recording, path, manifest=None) -> None:
    """Write ``rec`` as CSV (and a manifest if ``manifest`` is given).

    Values are written with ``repr`` so they round-trip exactly.
    """
    with open(path, "w", newline="") as fh:
        fh.write(",".join(RECORDING_HEADER) + "\n")
        for i, (hv, vv) in enumerate(zip(rec.h.tolist(), rec.v.tolist())):
            fh.write(f"{i},{hv!r},{vv!r}\n")
    if manifest is not None:
        Path(manifest).write_text(json.dumps({"subject_id": rec.subject_id, "fs_hz": rec.fs_hz}) + "\n")


def recording_paths(directory) -> list[tuple[Path, Path]]:
    """``(csv, manifest)`` pairs in a directory, sorted by file name.

    A recording ``<stem>.csv`` is recognised by its sibling ``<stem>.manifest.json``.
    """
    directory = Path(directory)
    pairs = []
    for man in sorted(directory.glob("*.manifest.json")):
        stem = man.name[: -len(".manifest.json")]
        pairs.append((directory / f"{stem}.csv", man))
    return pairs


def load_recordings(directory) -> list[Recording]:
    recs = [load_recording(c, m) for c, m in recording_paths(directory)]
    return sorted(recs, key=lambda r: r.subject_id)


# ---------------------------------------------------------------------------
# subscores

def load_subscores(path) -> SubscoreTable:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0].strip() != "subject_id":
            raise MalformedCsv(f"{path}: first column must be subject_id")
        subscales = [Subscale.parse(name.strip()) for name in header[1:]]
        if len(set(subscales)) != len(subscales):
            raise MalformedCsv(f"{path}: repeated subscale column")
        values = {}
        seen = set()
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            sid = row[0].strip()
            if sid in seen:
                raise DuplicateSubject(f"{path}:{lineno}: duplicate subject {sid!r}")
            seen.add(sid)
            if len(row) != len(header):
                raise MissingValue(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            for sub, cell in zip(subscales, row[1:]):
                cell = cell.strip()
                try:
                    val = float(cell)
                except ValueError:
                    raise MissingValue(f"{path}:{lineno}: missing/invalid {sub.value} value {cell!r}") from None
                if not math.isfinite(val):
                    raise MissingValue(f"{path}:{lineno}: non-finite {sub.value} value")
                values[(sid, sub)] = val
    return SubscoreTable(values)


def save_subscores(table: SubscoreTable, path) -> None:
    subs = table.subscales
    with open(path, "w", newline="") as fh:
        fh.write(",".join(["subject_id"] + [s.value for s in subs]) + "\n")
        for sid in table.subjects:
            fh.write(",".join([sid] + [repr(table[(sid, s)]) for s in subs]) + "\n")


# ---------------------------------------------------------------------------
# feature and event tables (pandas, indexed by subject_id)

def feature_frame(vectors) -> pd.DataFrame:
    """Stack feature vectors into a ``subject_id x 44`` frame."""
    vectors = list(vectors)
    ids = [fv.subject_id for fv in vectors]
    data = np.array([fv.to_array() for fv in vectors]).reshape(len(vectors), len(FEATURE_KEYS))
    df = pd.DataFrame(data, index=pd.Index(ids, name="subject_id"), columns=list(FEATURE_KEYS))
    return df


def feature_vectors(frame: pd.DataFrame) -> list[FeatureVector]:
    return [FeatureVector(row.to_dict(), subject_id=sid) for sid, row in frame.iterrows()]


def save_feature_table(frame: pd.DataFrame, path) -> None:
    frame = frame[list(FEATURE_KEYS)]
    frame.to_csv(path, index_label="subject_id", float_format="%.17g", lineterminator="\n")


def load_feature_table(path) -> pd.DataFrame:
    df = pd.read_csv(path, dtype={"subject_id": str}, float_precision="round_trip")
    if df.columns[0] != "subject_id":
        raise MalformedCsv(f"{path}: first column must be subject_id")
    missing = [k for k in FEATURE_KEYS if k not in df.columns]
    if missing:
        raise MissingFeature(f"{path}: missing feature columns {missing}")
    if df["subject_id"].duplicated().any():
        raise DuplicateSubject(f"{path}: duplicate subject ids")
    df = df.set_index("subject_id")
    return df[list(FEATURE_KEYS)].astype(float)


def event_frame(events: Mapping[str, EventCounts]) -> pd.DataFrame:
    rows = {sid: asdict(ev) for sid, ev in events.items()}
    df = pd.DataFrame.from_dict(rows, orient="index", columns=list(EVENT_MEASURES))
    df.index.name = "subject_id"
    return df.sort_index()


def save_event_table(frame: pd.DataFrame, path) -> None:
    frame[list(EVENT_MEASURES)].to_csv(path, index_label="subject_id", float_format="%.17g",
                                       lineterminator="\n")


def load_event_table(path) -> pd.DataFrame:
    df = pd.read_csv(path, dtype={"subject_id": str}, float_precision="round_trip")
    missing = [m for m in ("subject_id",) + EVENT_MEASURES if m not in df.columns]
    if missing:
        raise MalformedCsv(f"{path}: missing columns {missing}")
    if df["subject_id"].duplicated().any():
        raise DuplicateSubject(f"{path}: duplicate subject ids")
    return df.set_index("subject_id")[list(EVENT_MEASURES)]
