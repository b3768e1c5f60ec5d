"""Run configuration and on-disk formats.

Profiles are written as CSV with header ``r,U,dU,V,dV`` and 17 significant
digits (exact round trip for doubles), or as JSON carrying the same columns
and a metadata block.  CSV metadata goes to a ``<path>.meta.json`` sidecar.
All writes go to a temporary file in the target directory that is then
renamed over the destination.
"""

import csv
import io as _io
import json
import math
import os
import tempfile
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from ._validation import check_positive
from .errors import GridError, IoError, ParamError
from .integrator import (
    DEFAULT_R_MAX,
    DEFAULT_TOL,
    OutcomeTag,
    RadialProfile,
    TrajectoryOutcome,
)
from .model import SystemParams
from .shooting import DEFAULT_BISECT_TOL

SCHEMA_VERSION = 1
PROFILE_COLUMNS = ("r", "U", "dU", "V", "dV")
FLOAT_FORMAT = "%.17g"
COMMANDS = ("shoot", "classify", "sweep", "verify-forms", "identities", "decay", "bootstrap", "potential")
FORMATS = ("csv", "json")
SPACINGS = ("log", "linear")


def format_float(x):
    if x is None:
        return ""
    return FLOAT_FORMAT % x


@dataclass(frozen=True)
class GridSpec:
    """``count`` points between ``lo`` and ``hi`` with log or linear spacing."""

    lo: float = 1e-4
    hi: float = 1e3
    count: int = 2048
    spacing: str = "log"

    def __post_init__(self):
        if self.spacing not in SPACINGS:
            raise GridError(f"spacing must be one of {SPACINGS}, got {self.spacing!r}")
        if int(self.count) != self.count or self.count < 2:
            raise GridError(f"grid needs at least 2 points, got {self.count!r}")
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or not self.lo < self.hi:
            raise GridError(f"grid bounds must satisfy lo < hi, got {self.lo!r}:{self.hi!r}")
        if self.spacing == "log" and self.lo <= 0:
            raise GridError("log spacing needs lo > 0")
        object.__setattr__(self, "count", int(self.count))

    @classmethod
    def parse(cls, text, spacing="log"):
        """Parse ``lo:hi:count``."""
        parts = str(text).split(":")
        if len(parts) != 3:
            raise GridError(f"grid must be lo:hi:count, got {text!r}")
        try:
            lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise GridError(f"cannot parse grid {text!r}: {exc}") from None
        return cls(lo, hi, count, spacing)

    def points(self):
        if self.spacing == "log":
            return np.geomspace(self.lo, self.hi, self.count)
        return np.linspace(self.lo, self.hi, self.count)

    def __str__(self):
        return f"{self.lo!r}:{self.hi!r}:{self.count}"


@dataclass(frozen=True)
class RunConfig:
    """Everything a CLI run depends on.

    ``grid`` is the sampling grid for closed forms and potentials, or the
    swept grid for ``sweep`` (over ``a`` or ``p`` as set by ``over``).
    """

    command: str
    n: int
    p: float
    a: Optional[float] = None
    r_max: float = DEFAULT_R_MAX
    tol: float = DEFAULT_TOL
    bisect_tol: float = DEFAULT_BISECT_TOL
    grid: GridSpec = field(default_factory=GridSpec)
    out: Optional[str] = None
    format: str = "csv"
    over: str = "a"
    j_max: int = 50

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ParamError(f"unknown command {self.command!r}; expected one of {COMMANDS}")
        if self.format not in FORMATS:
            raise ParamError(f"format must be csv or json, got {self.format!r}")
        if self.over not in ("a", "p"):
            raise ParamError(f"sweep variable must be a or p, got {self.over!r}")
        for name in ("r_max", "tol", "bisect_tol"):
            check_positive(getattr(self, name), name)
        if isinstance(self.grid, dict):
            object.__setattr__(self, "grid", GridSpec(**self.grid))

    @property
    def params(self):
        return SystemParams(self.n, self.p)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ParamError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def save(self, path):
        atomic_write(path, self.to_json() + "\n")

    @classmethod
    def load(cls, path):
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise IoError(f"cannot read config {path}: {exc}") from None
        return cls.from_json(text)

    def updated(self, **changes):
        return replace(self, **changes)


def atomic_write(path, text):
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{path.name}.", suffix=".tmp")
    except OSError as exc:
        raise IoError(f"cannot write to {directory}: {exc}") from None
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def profile_metadata(profile):
    tag = profile.outcome.tag
    return {
        "n": profile.params.n,
        "p": profile.params.p,
        "a": profile.a,
        "outcome": tag.value,
        "r_event": profile.outcome.radius if profile.outcome.vanished else None,
        "r_max": profile.r_max,
    }


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, (np.floating, np.integer)):
        return _json_safe(value.item())
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if hasattr(value, "value") and isinstance(getattr(value, "value"), str):
        return value.value
    return value


def dumps(obj):
    """Deterministic JSON: sorted keys, exact float reprs."""
    return json.dumps(_json_safe(obj), sort_keys=True, indent=2, allow_nan=False)


def profile_csv(profile):
    buf = _io.StringIO()
    buf.write(",".join(PROFILE_COLUMNS) + "\n")
    cols = np.column_stack([getattr(profile, c) for c in PROFILE_COLUMNS])
    np.savetxt(buf, cols, fmt=FLOAT_FORMAT, delimiter=",")
    return buf.getvalue()


def emit_profile(profile, fmt, path, extra=None):
    """Write a profile as CSV or JSON.

    Parameters
    ----------
    profile : RadialProfile
    fmt : {"csv", "json"}
    path : str or Path
    extra : dict, optional
        Additional metadata (for example the decay-fit window); goes into
        the JSON document or the CSV sidecar.

    Returns
    -------
    list of Path
        Files written.

    Raises
    ------
    IoError
        For an empty profile (no file is created) or an unwritable path.
    """
    if fmt not in FORMATS:
        raise ParamError(f"format must be csv or json, got {fmt!r}")
    if len(profile) == 0:
        raise IoError("refusing to write an empty profile")
    path = Path(path)
    meta = profile_metadata(profile)
    if fmt == "csv":
        atomic_write(path, profile_csv(profile))
        sidecar = path.with_name(path.name + ".meta.json")
        doc = {"schema": SCHEMA_VERSION, "metadata": meta}
        if extra:
            doc["extra"] = extra
        atomic_write(sidecar, dumps(doc) + "\n")
        return [path, sidecar]
    doc = {
        "schema": SCHEMA_VERSION,
        "metadata": meta,
        "columns": {c: getattr(profile, c).tolist() for c in PROFILE_COLUMNS},
    }
    if extra:
        doc["extra"] = extra
    atomic_write(path, dumps(doc) + "\n")
    return [path]


def _profile_from(meta, columns):
    params = SystemParams(int(meta["n"]), float(meta["p"]))
    tag = OutcomeTag(meta["outcome"])
    radius = meta["r_event"] if meta.get("r_event") is not None else meta["r_max"]
    outcome = TrajectoryOutcome(tag, float(radius))
    cols = [np.asarray(columns[c], dtype=float) for c in PROFILE_COLUMNS]
    return RadialProfile(params, float(meta["a"]), *cols, outcome)


def read_profile(path):
    """Read a profile written by :func:`emit_profile`."""
    path = Path(path)
    try:
        if path.suffix == ".json":
            doc = json.loads(path.read_text())
            _check_schema(doc, path)
            return _profile_from(doc["metadata"], doc["columns"])
        sidecar = path.with_name(path.name + ".meta.json")
        doc = json.loads(sidecar.read_text())
        _check_schema(doc, path)
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if tuple(header) != PROFILE_COLUMNS:
                raise IoError(f"{path}: unexpected header {header}")
            rows = np.array([[float(x) for x in row] for row in reader], dtype=float)
        rows = rows.reshape(-1, len(PROFILE_COLUMNS))
        return _profile_from(doc["metadata"], dict(zip(PROFILE_COLUMNS, rows.T)))
    except OSError as exc:
        raise IoError(f"cannot read profile {path}: {exc}") from None


def _check_schema(doc, path):
    if doc.get("schema") != SCHEMA_VERSION:
        raise IoError(f"{path}: unsupported schema {doc.get('schema')!r}")


def table_text(rows, columns, fmt):
    """Render a list of dicts as CSV (17-digit floats) or JSON."""
    if fmt == "json":
        return dumps({"schema": SCHEMA_VERSION, "columns": list(columns), "rows": rows}) + "\n"
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def _cell(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return format_float(v)
    if v is None:
        return ""
    return str(getattr(v, "value", v))
