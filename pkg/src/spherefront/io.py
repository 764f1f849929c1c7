"""Deterministic writers for OBJ meshes, CSV tables and JSON reports.

Floats are written with Python's shortest round-trip ``repr`` after folding
``-0.0`` into ``0.0``; nothing time- or host-dependent ever reaches a data
file, so identical inputs give byte-identical outputs.
"""
from __future__ import annotations

import csv
import io as _io
import json
import math
from pathlib import Path

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .curves import SphericalCurve, from_samples
from .transforms import ProjectedMesh


def fmt(x) -> str:
    x = float(x) + 0.0
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def _clean(obj):
    """Make *obj* JSON-safe: numpy scalars/arrays to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj) + 0.0
        return x if math.isfinite(x) else fmt(x)
    if isinstance(obj, Path):
        return obj.as_posix()
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "value"):  # enums
        return obj.value
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_json(data: dict) -> str:
    return json.dumps(_clean(data), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path: Path, data: dict, metadata: dict | None = None) -> Path:
    """Write *data* with an optional separate ``metadata`` block (never timestamps)."""
    body = {"data": data}
    if metadata is not None:
        body["metadata"] = metadata
    return _write_text(path, dumps_json(body))


def _write_text(path: Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def obj_text(vertices: np.ndarray, faces: np.ndarray | None = None, polylines=()) -> str:
    """OBJ with ``v x y z`` lines, 1-based ``f i j k`` faces and ``l`` polylines."""
    out = _io.StringIO()
    verts = np.asarray(vertices, float)
    for v in verts:
        out.write("v " + " ".join(fmt(c) for c in v) + "\n")
    offset = len(verts)
    if faces is not None:
        for a, b, c in np.asarray(faces, int):
            out.write(f"f {a + 1} {b + 1} {c + 1}\n")
    for line in polylines:
        line = np.asarray(line, float)
        for v in line:
            out.write("v " + " ".join(fmt(c) for c in v) + "\n")
        out.write("l " + " ".join(str(offset + k + 1) for k in range(len(line))) + "\n")
        offset += len(line)
    return out.getvalue()


def write_obj(path: Path, vertices: np.ndarray, faces: np.ndarray | None = None, polylines=()) -> Path:
    verts = np.asarray(vertices, float)
    if verts.ndim != 2 or verts.shape[1] != 3:
        raise ValueError("OBJ vertices must be three-dimensional; project first")
    if faces is not None and len(faces) and (np.min(faces) < 0 or np.max(faces) >= len(verts)):
        raise ValueError("face references a missing vertex")
    return _write_text(path, obj_text(verts, faces, polylines))


def write_mesh(path: Path, mesh: ProjectedMesh) -> Path:
    return write_obj(path, mesh.vertices, mesh.faces)


def csv_text(header: list[str], rows) -> str:
    if not header:
        raise ValueError("CSV output needs a header row")
    out = _io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, str) else (str(v) if isinstance(v, (int, np.integer)) else fmt(v))
                    for v in row])
    return out.getvalue()


def write_csv(path: Path, header: list[str], rows) -> Path:
    return _write_text(path, csv_text(header, rows))


def write_curve_csv(path: Path, s: np.ndarray, points: np.ndarray, extra: dict | None = None) -> Path:
    """Columns ``s, x_1 .. x_N`` followed by any *extra* named columns."""
    N = points.shape[1]
    header = ["s"] + [f"x_{i + 1}" for i in range(N)] + list(extra or {})
    cols = [np.asarray(s)[:, None], np.asarray(points)] + [np.asarray(v)[:, None] for v in (extra or {}).values()]
    return write_csv(path, header, np.concatenate(cols, axis=1))


def read_curve_csv(path: Path, *, closure_tol: float = 1e-9, tol: Tolerances = DEFAULT_TOLERANCES,
                   name: str | None = None) -> SphericalCurve:
    """Read ``s, x_1 .. x_{n+2}`` samples (uniform in ``s``) into a continuous curve.

    The curve is treated as closed when the last point repeats the first;
    the duplicate is dropped.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if not header or header[0] != "s":
        raise ValueError(f"{path}: header must start with 's'")
    xcols = [i for i, h in enumerate(header) if h.startswith("x_")]
    expect = [f"x_{k + 1}" for k in range(len(xcols))]
    if [header[i] for i in xcols] != expect or xcols != list(range(1, len(xcols) + 1)):
        raise ValueError(f"{path}: expected columns s, x_1 .. x_N")
    if len(xcols) < 4:
        raise ValueError(f"{path}: need at least four coordinates (n >= 2)")
    data = np.array([[float(v) for v in r[: len(xcols) + 1]] for r in rows[1:] if r], dtype=float)
    s, pts = data[:, 0], data[:, 1:]
    norms = np.linalg.norm(pts, axis=1)
    if np.max(np.abs(norms - 1.0)) > 1e-6:
        raise ValueError(f"{path}: points are not on the unit sphere")
    pts = pts / norms[:, None]
    closed = bool(np.linalg.norm(pts[-1] - pts[0]) <= closure_tol)
    if closed:
        s, pts = s[:-1], pts[:-1]
    ds = np.diff(s)
    if np.max(np.abs(ds - ds.mean())) > 1e-9 * max(1.0, abs(s[-1])):
        raise ValueError(f"{path}: samples must be uniformly spaced in s")
    return from_samples(s - s[0], pts, closed=closed, name=name or Path(path).stem, tol=tol)
