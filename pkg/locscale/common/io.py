# locscale/common/io.py

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from locscale.geometry.surface import ParamSurface, SurfaceKind
from locscale.signal.field import BoundaryPolicy, SampledField
from .errors import InputFormatError
from .logger import get_logger

log = get_logger("io")

SPACING_RTOL = 1e-6


def format_cell(value: Any) -> str:
    """Shortest round-trip text for floats, lowercase booleans, empty for None."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])
    return path


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def write_json(path: Path, payload: Any) -> Path:
    """Sorted keys, NaN and infinities as null, trailing newline."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(payload), sort_keys=True, indent=2, allow_nan=False) + "\n",
                    encoding="utf-8")
    return path


def read_json(path: Path) -> Any:
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InputFormatError(f"{path}: file not found") from None
    except json.JSONDecodeError as e:
        raise InputFormatError(f"{path}:{e.lineno}: invalid JSON ({e.msg})") from None


def _read_table(path: Path) -> Tuple[List[str], np.ndarray]:
    path = Path(path)
    try:
        handle = path.open(newline="", encoding="utf-8")
    except FileNotFoundError:
        raise InputFormatError(f"{path}: file not found") from None
    with handle:
        reader = csv.reader(handle)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise InputFormatError(f"{path}:1: empty file, expected a header row") from None
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise InputFormatError(f"{path}:{line_no}: expected {len(header)} columns, got {len(row)}")
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                raise InputFormatError(f"{path}:{line_no}: non-numeric value in {row}") from None
    if not rows:
        raise InputFormatError(f"{path}: no data rows")
    table = np.array(rows, dtype=float)
    if not np.all(np.isfinite(table)):
        raise InputFormatError(f"{path}: values must be finite")
    return header, table


def _uniform_spacing(path: Path, axis_values: np.ndarray, what: str) -> float:
    steps = np.diff(axis_values)
    if steps.size == 0 or not np.all(steps > 0):
        raise InputFormatError(f"{path}: {what} must be strictly increasing with at least two values")
    h = float(steps[0])
    if np.max(np.abs(steps - h)) > SPACING_RTOL * h:
        raise InputFormatError(f"{path}: {what} is not uniformly spaced")
    return h


def read_field_csv(path: Path, boundary=BoundaryPolicy.PERIODIC) -> SampledField:
    """1-D field from a two-column `x,value` CSV on a uniform grid."""
    header, table = _read_table(path)
    if header != ["x", "value"]:
        raise InputFormatError(f"{path}:1: expected header 'x,value', got '{','.join(header)}'")
    h = _uniform_spacing(Path(path), table[:, 0], "x")
    return SampledField(values=table[:, 1], h=h, boundary=boundary, origin=(float(table[0, 0]),))


def write_field_csv(path: Path, field: SampledField) -> Path:
    if field.dims != 1:
        raise InputFormatError("CSV fields are one-dimensional; write 2-D fields as PGM")
    x = field.axes()[0]
    return write_csv(path, ["x", "value"], zip(x, field.values))


def read_pgm(path: Path, h: float = 1.0, boundary=BoundaryPolicy.PERIODIC) -> SampledField:
    """ASCII PGM (P2) image, gray levels rescaled to [0, 1]; rows are the first axis."""
    path = Path(path)
    try:
        text = path.read_text(encoding="ascii")
    except FileNotFoundError:
        raise InputFormatError(f"{path}: file not found") from None
    except UnicodeDecodeError:
        raise InputFormatError(f"{path}: not an ASCII PGM file") from None
    tokens = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        for tok in line.split("#", 1)[0].split():
            tokens.append((line_no, tok))
    if not tokens or tokens[0][1] != "P2":
        raise InputFormatError(f"{path}:1: expected magic 'P2'")
    try:
        width, height, maxval = (int(tok) for _, tok in tokens[1:4])
        pixels = [int(tok) for _, tok in tokens[4:]]
    except ValueError:
        line_no = next((n for n, tok in tokens[1:] if not tok.lstrip("-").isdigit()), tokens[-1][0])
        raise InputFormatError(f"{path}:{line_no}: non-integer token in PGM data") from None
    if width < 1 or height < 1 or maxval < 1:
        raise InputFormatError(f"{path}: invalid PGM dimensions {width}x{height} (maxval {maxval})")
    if len(pixels) != width * height:
        raise InputFormatError(f"{path}:{tokens[-1][0]}: expected {width * height} pixels, got {len(pixels)}")
    values = np.array(pixels, dtype=float).reshape(height, width)
    if np.any(values < 0) or np.any(values > maxval):
        raise InputFormatError(f"{path}: pixel values outside [0, {maxval}]")
    return SampledField(values=values / maxval, h=h, boundary=boundary)


def write_pgm(path: Path, field: SampledField, maxval: int = 255) -> Path:
    """Writes a 2-D field as P2, rescaling its range onto 0..maxval."""
    if field.dims != 2:
        raise InputFormatError("PGM output needs a 2-D field")
    lo, hi = float(np.min(field.values)), float(np.max(field.values))
    span = hi - lo if hi > lo else 1.0
    levels = np.rint((field.values - lo) / span * maxval).astype(int)
    height, width = levels.shape
    lines = ["P2", f"{width} {height}", str(maxval)]
    lines.extend(" ".join(str(v) for v in row) for row in levels)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="ascii")
    return path


@dataclass(frozen=True)
class SurfaceInput:
    surface: ParamSurface
    weights: Optional[np.ndarray]


def sidecar_path(path: Path) -> Path:
    return Path(path).with_suffix(".json")


def read_surface_csv(path: Path) -> SurfaceInput:
    """
    Sampled surface from `r1..rd,x1..xn[,w]` rows in lattice-major order.
    A JSON sidecar next to the file may declare d, n, closed and kind.
    """
    path = Path(path)
    header, table = _read_table(path)
    meta = read_json(sidecar_path(path)) if sidecar_path(path).exists() else {}

    r_cols = [i for i, name in enumerate(header) if name.startswith("r")]
    x_cols = [i for i, name in enumerate(header) if name.startswith("x")]
    w_col = header.index("w") if "w" in header else None
    d, n = len(r_cols), len(x_cols)
    if d < 1 or n <= d:
        raise InputFormatError(f"{path}:1: header needs r1..rd and x1..xn columns with d < n")
    if header[:d] != [f"r{i + 1}" for i in range(d)] or header[d:d + n] != [f"x{i + 1}" for i in range(n)]:
        raise InputFormatError(f"{path}:1: header must read r1..r{d},x1..x{n}[,w]")
    if meta.get("d", d) != d or meta.get("n", n) != n:
        raise InputFormatError(f"{sidecar_path(path)}: declares d={meta.get('d')}, n={meta.get('n')} "
                               f"but the CSV has d={d}, n={n}")

    axes = [np.unique(table[:, c]) for c in r_cols]
    shape = tuple(a.shape[0] for a in axes)
    if int(np.prod(shape)) != table.shape[0]:
        raise InputFormatError(f"{path}: {table.shape[0]} rows do not fill a {shape} parameter lattice")
    spacings = [_uniform_spacing(path, a, f"r{i + 1}") for i, a in enumerate(axes)]
    if max(spacings) - min(spacings) > SPACING_RTOL * max(spacings):
        raise InputFormatError(f"{path}: parameter axes must share one spacing, got {spacings}")
    expected = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    if not np.allclose(table[:, r_cols], expected, rtol=0.0, atol=SPACING_RTOL * spacings[0]):
        raise InputFormatError(f"{path}: rows are not in lattice-major order")

    samples = table[:, x_cols].reshape(shape + (n,))
    try:
        surface = ParamSurface(samples=samples, h_r=spacings[0],
                               kind=SurfaceKind.parse(meta.get("kind", "general_parametric")),
                               closed=bool(meta.get("closed", False)),
                               origin=tuple(float(a[0]) for a in axes))
    except Exception as e:
        raise InputFormatError(f"{path}: {e}") from None
    weights = table[:, w_col] if w_col is not None else None
    log.info(f"Read surface {path.name}: d={d}, n={n}, lattice {shape}")
    return SurfaceInput(surface=surface, weights=weights)


def write_surface_csv(path: Path, surface: ParamSurface, weights: Optional[Sequence[float]] = None) -> Path:
    header = [f"r{i + 1}" for i in range(surface.d)] + [f"x{i + 1}" for i in range(surface.n)]
    r = surface.param_coords()
    z = surface.flat_points()
    columns = [r, z]
    if weights is not None:
        header.append("w")
        columns.append(np.asarray(weights, dtype=float)[:, None])
    write_csv(path, header, np.hstack(columns).tolist())
    write_json(sidecar_path(path), {"d": surface.d, "n": surface.n, "closed": surface.closed,
                                    "kind": surface.kind.value})
    return Path(path)


def read_points_csv(path: Path) -> np.ndarray:
    """Point cloud from a CSV; uses the x1..xn columns when present, otherwise every column."""
    header, table = _read_table(path)
    x_cols = [i for i, name in enumerate(header) if name.startswith("x") and name[1:].isdigit()]
    return table[:, x_cols] if x_cols else table


def write_points_csv(path: Path, points: np.ndarray) -> Path:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return write_csv(path, [f"x{i + 1}" for i in range(pts.shape[1])], pts.tolist())
