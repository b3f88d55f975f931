"""File formats: binary grids, coefficient exports and run manifests.

Grid file (little-endian):
    magic b"WTFB", u8 version = 1, u32 n1, u32 n2,
    f64 x1_min, x1_max, x2_min, x2_max, f64 alpha, f64 hurst,
    u64 seed, u8 method (0 cholesky, 1 spectral, 2 other),
    then n1 * n2 f64 values, row-major (index i1 varies slowest).

Coefficient binary file:
    magic b"WTFC", u8 version = 1, u32 J, u32 n1, u32 n2,
    f64 x1_min, x1_max, x2_min, x2_max, f64 alpha, f64 hurst, u64 seed,
    f64 margin, u32 block count, then per block
    i32 j1, i32 j2, u32 d1, u32 d2, d1 * d2 f64 values row-major.

Coefficient JSON lines: one header object {"format": "wtfbf-coeffs", ...}
followed by one {"j1", "j2", "k1", "k2", "value"} record per coefficient.
Floats are written with repr so that reading them back is bit-exact.
"""
import hashlib
import json
import struct

import numpy as np

from .errors import FormatError
from .hyperbolic import HyperbolicCoeffs
from .model import FieldParams
from .synthesis import FieldRealization, GridSpec

GRID_MAGIC = b"WTFB"
COEF_MAGIC = b"WTFC"
VERSION = 1
METHOD_CODES = {"cholesky": 0, "spectral": 1}
_GRID_HEAD = struct.Struct("<4sBII6dQB")
_GRID_FIELDS = ("magic", "version", "n1", "n2", "x1_min", "x1_max", "x2_min", "x2_max",
                "alpha", "hurst", "seed", "method")
_COEF_HEAD = struct.Struct("<4sBIII6dQdI")
_COEF_FIELDS = ("magic", "version", "max_level", "n1", "n2", "x1_min", "x1_max", "x2_min",
                "x2_max", "alpha", "hurst", "seed", "margin", "blocks")
_BLOCK_HEAD = struct.Struct("<iiII")


def _method_name(code):
    for k, v in METHOD_CODES.items():
        if v == code:
            return k
    return "other"


# ---------------------------------------------------------------------------
# grids

def encode_grid(field):
    g, p = field.grid, field.params
    head = _GRID_HEAD.pack(GRID_MAGIC, VERSION, g.n1, g.n2, g.x1_min, g.x1_max, g.x2_min,
                           g.x2_max, p.alpha, p.hurst, int(field.seed) & (2**64 - 1),
                           METHOD_CODES.get(field.method, 2))
    return head + np.ascontiguousarray(field.values, dtype="<f8").tobytes()


def decode_grid(data):
    if len(data) < _GRID_HEAD.size:
        raise FormatError("grid file truncated: header is incomplete")
    h = dict(zip(_GRID_FIELDS, _GRID_HEAD.unpack_from(data)))
    if h["magic"] != GRID_MAGIC:
        raise FormatError(f"bad grid header field 'magic': {h['magic']!r}")
    if h["version"] != VERSION:
        raise FormatError(f"bad grid header field 'version': {h['version']}")
    if h["method"] not in (0, 1, 2):
        raise FormatError(f"bad grid header field 'method': {h['method']}")
    n = h["n1"] * h["n2"]
    if len(data) != _GRID_HEAD.size + 8 * n:
        raise FormatError(f"bad grid header field 'n1'/'n2': payload holds "
                          f"{(len(data) - _GRID_HEAD.size) / 8:g} values, header says {n}")
    grid, params = _grid_params(h, "grid header")
    vals = np.frombuffer(data, dtype="<f8", offset=_GRID_HEAD.size).reshape(grid.shape)
    try:
        return FieldRealization(vals.astype(float), grid, params, h["seed"], _method_name(h["method"]))
    except Exception as e:
        raise FormatError(f"bad grid payload: {e}") from None


def write_grid(path, field):
    with open(path, "wb") as f:
        f.write(encode_grid(field))


def read_grid(path):
    with open(path, "rb") as f:
        data = f.read()
    try:
        return decode_grid(data)
    except FormatError as e:
        raise FormatError(f"{path}: {e}") from None


# ---------------------------------------------------------------------------
# coefficients

def _header_values(c):
    g = c.grid
    p = c.params or FieldParams(0.0, 0.5)
    return (g.n1, g.n2, g.x1_min, g.x1_max, g.x2_min, g.x2_max, p.alpha, p.hurst,
            int(c.seed) & (2**64 - 1), float(c.margin))


def encode_coeffs(c):
    n1, n2, a, b, cc, d, al, hu, seed, margin = _header_values(c)
    parts = [_COEF_HEAD.pack(COEF_MAGIC, VERSION, c.max_level, n1, n2, a, b, cc, d, al, hu,
                             seed, margin, len(c.blocks))]
    for (j1, j2) in c.levels():
        blk = np.ascontiguousarray(c.blocks[(j1, j2)], dtype="<f8")
        parts.append(_BLOCK_HEAD.pack(j1, j2, blk.shape[0], blk.shape[1]))
        parts.append(blk.tobytes())
    return b"".join(parts)


def decode_coeffs(data):
    if len(data) < _COEF_HEAD.size:
        raise FormatError("coefficient file truncated: header is incomplete")
    h = dict(zip(_COEF_FIELDS, _COEF_HEAD.unpack_from(data)))
    if h["magic"] != COEF_MAGIC:
        raise FormatError(f"bad coefficient header field 'magic': {h['magic']!r}")
    if h["version"] != VERSION:
        raise FormatError(f"bad coefficient header field 'version': {h['version']}")
    grid, params = _grid_params(h, "coefficient header")
    off = _COEF_HEAD.size
    blocks = {}
    for i in range(h["blocks"]):
        if off + _BLOCK_HEAD.size > len(data):
            raise FormatError(f"bad coefficient header field 'blocks': block {i} is missing")
        j1, j2, d1, d2 = _BLOCK_HEAD.unpack_from(data, off)
        off += _BLOCK_HEAD.size
        end = off + 8 * d1 * d2
        if end > len(data):
            raise FormatError(f"bad block header field 'dims' at level ({j1}, {j2}): payload truncated")
        blocks[(j1, j2)] = np.frombuffer(data, "<f8", d1 * d2, off).reshape(d1, d2).astype(float)
        off = end
    if off != len(data):
        raise FormatError("bad coefficient header field 'blocks': trailing bytes after last block")
    return HyperbolicCoeffs(blocks, h["max_level"], grid, params, h["seed"], h["margin"])


def _grid_params(h, where):
    try:
        grid = GridSpec(h["n1"], h["n2"], h["x1_min"], h["x1_max"], h["x2_min"], h["x2_max"])
    except Exception as e:
        raise FormatError(f"bad {where} field 'extent': {e}") from None
    try:
        params = FieldParams(h["alpha"], h["hurst"])
    except Exception as e:
        raise FormatError(f"bad {where} field 'alpha'/'hurst': {e}") from None
    return grid, params


def coeffs_to_jsonl(c):
    n1, n2, a, b, cc, d, al, hu, seed, margin = _header_values(c)
    head = {"format": "wtfbf-coeffs", "version": VERSION, "max_level": c.max_level,
            "n1": n1, "n2": n2, "x1_min": a, "x1_max": b, "x2_min": cc, "x2_max": d,
            "alpha": al, "hurst": hu, "seed": seed, "margin": margin}
    lines = [json.dumps(head)]
    for (j1, j2) in c.levels():
        blk = c.blocks[(j1, j2)]
        for (k1, k2), v in np.ndenumerate(blk):
            lines.append(json.dumps({"j1": j1, "j2": j2, "k1": k1, "k2": k2, "value": float(v)}))
    return "\n".join(lines) + "\n"


def coeffs_from_jsonl(text):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FormatError("empty coefficient file")
    try:
        h = json.loads(lines[0])
    except json.JSONDecodeError as e:
        raise FormatError(f"bad coefficient header: {e}") from None
    if h.get("format") != "wtfbf-coeffs":
        raise FormatError(f"bad coefficient header field 'format': {h.get('format')!r}")
    if h.get("version") != VERSION:
        raise FormatError(f"bad coefficient header field 'version': {h.get('version')!r}")
    for key in ("max_level", "n1", "n2", "x1_min", "x1_max", "x2_min", "x2_max", "alpha", "hurst"):
        if key not in h:
            raise FormatError(f"bad coefficient header field {key!r}: missing")
    grid, params = _grid_params(h, "coefficient header")
    recs = {}
    for n, ln in enumerate(lines[1:], start=2):
        try:
            r = json.loads(ln)
            jb, k, v = (int(r["j1"]), int(r["j2"])), (int(r["k1"]), int(r["k2"])), float(r["value"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            raise FormatError(f"bad coefficient record on line {n}: {e}") from None
        recs.setdefault(jb, []).append((k, v))
    blocks = {}
    for jb, items in recs.items():
        d1 = max(k[0] for k, _ in items) + 1
        d2 = max(k[1] for k, _ in items) + 1
        b = np.zeros((d1, d2))
        for k, v in items:
            b[k] = v
        blocks[jb] = b
    return HyperbolicCoeffs(blocks, int(h["max_level"]), grid, params,
                            int(h.get("seed", 0)), float(h.get("margin", 0.0)))


def write_coeffs(path, c, fmt=None):
    fmt = fmt or ("jsonl" if str(path).endswith(".jsonl") else "bin")
    if fmt == "jsonl":
        with open(path, "w") as f:
            f.write(coeffs_to_jsonl(c))
    else:
        with open(path, "wb") as f:
            f.write(encode_coeffs(c))


def read_coeffs(path):
    with open(path, "rb") as f:
        data = f.read()
    try:
        if data[:4] == COEF_MAGIC:
            return decode_coeffs(data)
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError:
            raise FormatError("bad coefficient header field 'magic': "
                              "neither WTFC nor JSON lines") from None
        return coeffs_from_jsonl(text)
    except FormatError as e:
        raise FormatError(f"{path}: {e}") from None


# ---------------------------------------------------------------------------
# manifests

def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_path, command, params, seed, version, inputs=(), outputs=()):
    m = {
        "command": command,
        "params": params,
        "seed": seed,
        "version": version,
        "inputs": {str(p): sha256_file(p) for p in inputs},
        "outputs": {str(p): sha256_file(p) for p in outputs},
    }
    path = str(out_path) + ".manifest.json"
    with open(path, "w") as f:
        json.dump(m, f, indent=2, sort_keys=True)
        f.write("\n")
    return path, m
