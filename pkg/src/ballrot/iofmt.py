"""Field specs (YAML), zero-table cache (JSON), coefficient documents and sample exports.

Field spec schema, exactly one of ``modes`` or ``preset``::

    radius: 1.0                  # optional, default 1
    units: dimensionless         # optional free-text note
    modes:                       # mode combination
      - [curl_plus, 1, 1, 0, 1.0]    # family, n, m, k, coefficient
    preset:                      # or an analytic preset
      name: rotation             # constant | rotation | gradient
      axis: [0, 0, 1]

Preset parameters: ``constant(direction)``, ``rotation(axis, profile)`` with
profile ``rigid`` or ``parabolic``, ``gradient(axis)`` with axis 0, 1 or 2.
"""

from __future__ import annotations

import hashlib
import inspect
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import specfun
from .eigenbasis import FAMILIES
from .exceptions import ChecksumError, DomainError, FormatError

ZERO_TABLE_FORMAT = "ballrot-zero-table"
ZERO_TABLE_VERSION = 1
COEFF_FORMAT = "ballrot-coefficients"
COEFF_VERSION = 1
CACHE_ENV = "BALLROT_CACHE_DIR"

_SPEC_KEYS = {"radius", "units", "modes", "preset"}


# ------------------------------------------------------------------ field specs

@dataclass(frozen=True)
class FieldSpecDocument:
    radius: float
    modes: tuple | None = None
    preset: str | None = None
    params: dict = field(default_factory=dict)
    units: str | None = None

    @property
    def is_modes(self) -> bool:
        return self.modes is not None

    def to_field(self):
        """The input field for the solvers: ``ModeCombination`` or ``AnalyticField``."""
        from .solver import ModeCombination, make_preset

        if self.is_modes:
            return ModeCombination(self.modes, self.radius)
        params = dict(self.params)
        if self.preset == "rotation":
            params.setdefault("radius", self.radius)
        return make_preset(self.preset, **params)


def _fail(path: str, msg: str):
    raise FormatError(f"{path}: {msg}")


def _int(v, path):
    if isinstance(v, bool) or not isinstance(v, int):
        _fail(path, f"expected an integer, got {v!r}")
    return v


def _real(v, path):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        _fail(path, f"expected a finite number, got {v!r}")
    return float(v)


def _mode_row(row, path):
    if not isinstance(row, list) or len(row) != 5:
        _fail(path, "a mode is [family, n, m, k, coefficient]")
    fam, n, m, k, c = row
    if fam not in FAMILIES:
        _fail(f"{path}[0]", f"unknown family {fam!r}")
    n, m, k = _int(n, f"{path}[1]"), _int(m, f"{path}[2]"), _int(k, f"{path}[3]")
    if n < specfun.family_min_order("graddiv" if fam == "graddiv" else "curl"):
        _fail(f"{path}[1]", f"n={n} is below the smallest order of {fam}")
    if n > specfun.N_MAX_SUPPORTED:
        _fail(f"{path}[1]", f"n={n} exceeds {specfun.N_MAX_SUPPORTED}")
    if m < 1:
        _fail(f"{path}[2]", "m must be >= 1")
    if abs(k) > n:
        _fail(f"{path}[3]", f"|k| must be <= n={n}")
    return (fam, n, m, k), _real(c, f"{path}[4]")


def _preset_params(name: str, raw: dict, path: str) -> dict:
    from .solver import PRESETS

    if name not in PRESETS:
        _fail(f"{path}.name", f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    allowed = set(inspect.signature(PRESETS[name]).parameters) - {"radius"}
    params = {}
    for key, v in raw.items():
        if key not in allowed:
            _fail(f"{path}.{key}", f"unknown parameter for preset {name!r}")
        if isinstance(v, list):
            params[key] = [_real(x, f"{path}.{key}[{i}]") for i, x in enumerate(v)]
        else:
            params[key] = v
    return params


def read_field_spec(text: str) -> FieldSpecDocument:
    """Parse and validate a YAML field spec; errors carry line/column or a field path."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}: " if mark else ""
        raise FormatError(f"parse error: {where}{getattr(exc, 'problem', exc)}") from None
    if not isinstance(doc, dict):
        raise FormatError("field spec must be a mapping")
    for key in doc:
        if key not in _SPEC_KEYS:
            _fail(str(key), "unknown key")
    radius = _real(doc.get("radius", 1.0), "radius")
    if radius <= 0:
        _fail("radius", "must be > 0")
    units = doc.get("units")
    if units is not None and not isinstance(units, str):
        _fail("units", "must be a string")
    if ("modes" in doc) == ("preset" in doc):
        raise FormatError("field spec needs exactly one of 'modes' or 'preset'")
    if "modes" in doc:
        rows = doc["modes"]
        if not isinstance(rows, list) or not rows:
            _fail("modes", "must be a non-empty list")
        seen, modes = {}, []
        for i, row in enumerate(rows):
            key, c = _mode_row(row, f"modes[{i}]")
            if key in seen:
                name = ", ".join(map(str, key))
                _fail(f"modes[{i}]", f"duplicate mode ({name}) (first at modes[{seen[key]}])")
            seen[key] = i
            modes.append((key, c))
        return FieldSpecDocument(radius, modes=tuple(modes), units=units)
    preset = doc["preset"]
    if isinstance(preset, str):
        preset = {"name": preset}
    if not isinstance(preset, dict) or "name" not in preset:
        _fail("preset", "must be a mapping with a 'name'")
    raw = {k: v for k, v in preset.items() if k != "name"}
    params = _preset_params(preset["name"], raw, "preset")
    try:
        doc_ = FieldSpecDocument(radius, preset=preset["name"], params=params, units=units)
        doc_.to_field()
    except (DomainError, TypeError) as exc:
        _fail("preset", str(exc))
    return doc_


def load_field_spec(path) -> FieldSpecDocument:
    return read_field_spec(Path(path).read_text())


# ------------------------------------------------------------ zero-table cache

def _payload(table: specfun.ZeroTable) -> dict:
    return {
        "family": table.family,
        "radius": float(table.radius).hex(),
        "residual_bound": float(specfun.RESIDUAL_BOUND).hex(),
        "entries": [[e.n, e.m, float(e.zero).hex(), float(e.residual).hex()] for e in table.entries],
    }


def _digest(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def dumps_zero_table(table: specfun.ZeroTable) -> str:
    payload = _payload(table)
    doc = {"format": ZERO_TABLE_FORMAT, "version": ZERO_TABLE_VERSION,
           "payload": payload, "sha256": _digest(payload)}
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def loads_zero_table(text: str) -> specfun.ZeroTable:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"parse error: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict) or doc.get("format") != ZERO_TABLE_FORMAT:
        raise FormatError("not a zero-table document")
    if doc.get("version") != ZERO_TABLE_VERSION:
        raise FormatError(f"zero-table version {doc.get('version')!r} != {ZERO_TABLE_VERSION}")
    payload = doc.get("payload")
    if not isinstance(payload, dict) or _digest(payload) != doc.get("sha256"):
        raise ChecksumError("zero-table checksum mismatch")
    try:
        entries = tuple(specfun.ZeroEntry(int(n), int(m), float.fromhex(z), float.fromhex(r))
                        for n, m, z, r in payload["entries"])
        return specfun.ZeroTable(payload["family"], float.fromhex(payload["radius"]), entries)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed zero-table payload: {exc}") from None


def write_zero_table(table: specfun.ZeroTable, path) -> None:
    Path(path).write_text(dumps_zero_table(table))


def read_zero_table(path) -> specfun.ZeroTable:
    return loads_zero_table(Path(path).read_text())


def cache_dir() -> Path | None:
    d = os.environ.get(CACHE_ENV)
    return Path(d) if d else None


def load_or_build(family: str, n_max: int, m_max: int, radius: float = 1.0,
                  directory=None) -> tuple[specfun.ZeroTable, bool]:
    """Zero table from the cache directory when present, else built (and stored).

    Returns ``(table, cache_hit)``.  Without a directory (argument or
    ``BALLROT_CACHE_DIR``) the table is always built.
    """
    directory = Path(directory) if directory is not None else cache_dir()
    if directory is None:
        return specfun.build_zero_table(family, n_max, m_max, radius), False
    path = directory / f"zeros_{family}_n{n_max}_m{m_max}_R{float(radius).hex()}.json"
    if path.exists():
        return read_zero_table(path), True
    table = specfun.build_zero_table(family, n_max, m_max, radius)
    directory.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    write_zero_table(table, tmp)
    os.replace(tmp, path)
    return table, False


# ------------------------------------------------------- coefficient documents

def dumps_coefficients(coefficients: dict, radius: float, meta: dict | None = None) -> str:
    """``coefficients`` maps ``Mode`` to value; rows are sorted by family order then j."""
    order = {f: i for i, f in enumerate(FAMILIES)}
    rows = sorted(coefficients.items(), key=lambda kv: (order[kv[0].family], kv[0].j))
    doc = {
        "format": COEFF_FORMAT,
        "version": COEFF_VERSION,
        "radius": float(radius),
        "meta": meta or {},
        "columns": ["family", "n", "m", "k", "eigenvalue", "coefficient"],
        "rows": [[m.family, m.n, m.m, m.k, float(m.eigenvalue), float(v)] for m, v in rows],
    }
    return json.dumps(doc, indent=1) + "\n"


def loads_coefficients(text: str) -> tuple[float, list[tuple[tuple, float]], dict]:
    """Returns ``(radius, [(key, value), ...], meta)``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"parse error: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict) or doc.get("format") != COEFF_FORMAT:
        raise FormatError("not a coefficient document")
    if doc.get("version") != COEFF_VERSION:
        raise FormatError(f"coefficient document version {doc.get('version')!r} unsupported")
    out = [((f, int(n), int(m), int(k)), float(c)) for f, n, m, k, _, c in doc["rows"]]
    return float(doc["radius"]), out, doc.get("meta", {})


# ------------------------------------------------------------- sample exports

def _g17(x: float) -> str:
    return format(float(x), ".17g")


def dumps_csv(points, values) -> str:
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    vals = np.asarray(values, dtype=float).reshape(-1, 3)
    if pts.shape != vals.shape:
        raise DomainError("points and values differ in length")
    lines = ["x,y,z,ux,uy,uz"]
    lines += [",".join(_g17(v) for v in (*p, *u)) for p, u in zip(pts, vals)]
    return "\n".join(lines) + "\n"


def loads_csv(text: str) -> tuple[np.ndarray, np.ndarray]:
    lines = text.strip("\n").split("\n")
    if lines[0].strip() != "x,y,z,ux,uy,uz":
        raise FormatError("line 1: expected header x,y,z,ux,uy,uz")
    data = np.array([[float(t) for t in ln.split(",")] for ln in lines[1:]], dtype=float)
    data = data.reshape(-1, 6)
    return data[:, :3], data[:, 3:]


def dumps_vtk(points, values, name: str = "u", title: str = "ballrot samples") -> str:
    """VTK legacy ASCII POLYDATA with one vertex cell per point and a double VECTORS attribute."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    vals = np.asarray(values, dtype=float).reshape(-1, 3)
    if pts.shape != vals.shape:
        raise DomainError("points and values differ in length")
    P = len(pts)
    out = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET POLYDATA", f"POINTS {P} double"]
    out += [" ".join(_g17(v) for v in p) for p in pts]
    if P:
        out.append(f"VERTICES {P} {2 * P}")
        out += [f"1 {i}" for i in range(P)]
    out += [f"POINT_DATA {P}", f"VECTORS {name} double"]
    out += [" ".join(_g17(v) for v in u) for u in vals]
    return "\n".join(out) + "\n"


def export_samples(points, values, path, fmt: str = "csv", name: str = "u") -> None:
    if fmt == "csv":
        text = dumps_csv(points, values)
    elif fmt == "vtk":
        text = dumps_vtk(points, values, name)
    else:
        raise DomainError(f"unsupported sample format {fmt!r}")
    Path(path).write_text(text)


def read_csv_samples(path) -> tuple[np.ndarray, np.ndarray]:
    return loads_csv(Path(path).read_text())
