"""Scenario files: schema-validated JSON driving every CLI command.

A scenario bundles the frequency box, the symbol specification, the
initial-data spectrum, the derivative kind and the solver parameters.
Unknown keys are rejected everywhere.  Spectrum and tabulated-symbol
grids travel either as CSV (column order documented below) or as a
binary container with a 16-byte magic header.
"""

from __future__ import annotations

import csv
import io
import json
import os
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import SchemaError, SpectrumFormatError
from .fileio import atomic_write_bytes, atomic_write_text, fmt_float
from .forward import KINDS, BandLimitedData, VectorOrder
from .inverse import Tolerances
from .symbolkit import FrequencyBox, MatrixSymbol

__all__ = [
    "SCHEMA_ID",
    "Scenario",
    "load_scenario",
    "parse_scenario",
    "example_scenario_dict",
    "write_grid_values",
    "read_grid_values",
    "write_grid_values_csv",
    "read_grid_values_csv",
]

SCHEMA_ID = "fracorder-scenario/1"
SPECTRUM_MAGIC = b"FRACORDER-SPEC-1"  # exactly 16 bytes

_TOP_KEYS = {
    "schema", "box", "symbol", "initial_data", "kind",
    "order", "beta0", "t0", "xi0", "tolerances",
}
_BOX_KEYS = {"lower", "upper", "points"}
_TOL_KEYS = {"beta_tol", "residual_tol", "det_tol", "range_slack"}
_KIND_ALIASES = {"caputo": "caputo", "rl": "riemann-liouville",
                 "riemann-liouville": "riemann-liouville"}


@dataclass
class Scenario:
    box: FrequencyBox
    symbol: MatrixSymbol
    data: BandLimitedData
    kind: str
    beta0: float
    order: VectorOrder | None = None
    t0: float | None = None
    xi0: tuple[float, ...] | None = None
    tolerances: Tolerances = field(default_factory=Tolerances)
    raw: dict = field(default_factory=dict)


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise SchemaError(message)


def _check_keys(obj: dict, allowed: set[str], where: str) -> None:
    _require(isinstance(obj, dict), f"{where}: expected an object")
    unknown = set(obj) - allowed
    _require(not unknown, f"{where}: unknown keys {sorted(unknown)}")


def _coerce_complex(v, where: str) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise SchemaError(f"{where}: coefficients must be a number or [re, im]")


def _parse_box(obj: dict) -> FrequencyBox:
    _check_keys(obj, _BOX_KEYS, "box")
    for key in _BOX_KEYS:
        _require(key in obj, f"box: missing key '{key}'")
    return FrequencyBox(tuple(obj["lower"]), tuple(obj["upper"]), tuple(obj["points"]))


def _parse_symbol(obj: dict, box: FrequencyBox, base_dir: str) -> MatrixSymbol:
    _require(isinstance(obj, dict) and "kind" in obj, "symbol: missing 'kind'")
    kind = obj["kind"]
    if kind == "builtin":
        _check_keys(obj, {"kind", "name"}, "symbol")
        name = obj.get("name", "example-sec4")
        _require(name == "example-sec4", f"symbol: unknown builtin '{name}'")
        _require(box.dim == 1, "symbol: the builtin example is one-dimensional")
        return MatrixSymbol.builtin_example(box=box)
    if kind == "polynomial":
        _check_keys(obj, {"kind", "size", "entries"}, "symbol")
        _require("size" in obj and "entries" in obj, "symbol: polynomial needs 'size' and 'entries'")
        m = int(obj["size"])
        entries: dict = {}
        for e in obj["entries"]:
            _check_keys(e, {"row", "col", "terms"}, "symbol.entries[]")
            j, k = int(e["row"]), int(e["col"])
            _require(0 <= j < m and 0 <= k < m, f"symbol: entry index ({j},{k}) out of range")
            terms = []
            for t in e["terms"]:
                _check_keys(t, {"powers", "coeff"}, "symbol.entries[].terms[]")
                powers = tuple(int(p) for p in t["powers"])
                _require(len(powers) == box.dim,
                         f"symbol: multi-index length {len(powers)} != box dimension {box.dim}")
                terms.append((powers, _coerce_complex(t["coeff"], "symbol coeff")))
            entries[(j, k)] = terms
        return MatrixSymbol.polynomial(m, box.dim, entries, box=box)
    if kind == "tabulated":
        _check_keys(obj, {"kind", "size", "path"}, "symbol")
        _require("size" in obj and "path" in obj, "symbol: tabulated needs 'size' and 'path'")
        m = int(obj["size"])
        path = os.path.join(base_dir, obj["path"])
        file_box, values = _read_grid_any(path)
        _require(file_box.shape == box.shape, "symbol: tabulated grid does not match the box")
        _require(values.shape[0] == m * m,
                 f"symbol: expected {m * m} components in {path}, got {values.shape[0]}")
        return MatrixSymbol.tabulated(box, values.reshape(m, m, *box.shape))
    raise SchemaError(f"symbol: unknown kind '{kind}'")


def _parse_data(obj: dict, box: FrequencyBox, base_dir: str) -> BandLimitedData:
    _require(isinstance(obj, dict), "initial_data: expected an object")
    if "spectrum_file" in obj:
        _check_keys(obj, {"spectrum_file"}, "initial_data")
        path = os.path.join(base_dir, obj["spectrum_file"])
        file_box, values = _read_grid_any(path)
        _require(file_box.shape == box.shape, "initial_data: spectrum grid does not match the box")
        return BandLimitedData(box=box, spectra=values, preset=None)
    _require("preset" in obj, "initial_data: needs 'preset' or 'spectrum_file'")
    preset = obj["preset"]
    if preset in ("gaussian", "raised-cosine"):
        _check_keys(obj, {"preset", "amplitudes", "center", "width"}, "initial_data")
        for key in ("amplitudes", "center", "width"):
            _require(key in obj, f"initial_data: missing '{key}'")
        builder = BandLimitedData.gaussian if preset == "gaussian" else BandLimitedData.raised_cosine
        return builder(box, [float(a) for a in obj["amplitudes"]], obj["center"], obj["width"])
    if preset == "indicator-poly":
        _check_keys(obj, {"preset", "amplitudes", "powers", "sub_lower", "sub_upper"},
                    "initial_data")
        for key in ("amplitudes", "powers", "sub_lower", "sub_upper"):
            _require(key in obj, f"initial_data: missing '{key}'")
        powers = [tuple(int(p) for p in row) for row in obj["powers"]]
        return BandLimitedData.indicator_poly(
            box, [float(a) for a in obj["amplitudes"]], powers,
            obj["sub_lower"], obj["sub_upper"],
        )
    raise SchemaError(f"initial_data: unknown preset '{preset}'")


def parse_scenario(raw: dict, base_dir: str = ".") -> Scenario:
    _check_keys(raw, _TOP_KEYS, "scenario")
    _require(raw.get("schema") == SCHEMA_ID,
             f"scenario: schema must be '{SCHEMA_ID}', got {raw.get('schema')!r}")
    for key in ("box", "symbol", "initial_data", "kind"):
        _require(key in raw, f"scenario: missing key '{key}'")
    box = _parse_box(raw["box"])
    symbol = _parse_symbol(raw["symbol"], box, base_dir)
    data = _parse_data(raw["initial_data"], box, base_dir)
    _require(data.m == symbol.m,
             f"scenario: data has {data.m} components but the symbol is {symbol.m}x{symbol.m}")
    kind_raw = raw["kind"]
    _require(kind_raw in _KIND_ALIASES, f"scenario: kind must be one of {sorted(_KIND_ALIASES)}")
    kind = _KIND_ALIASES[kind_raw]
    beta0 = float(raw.get("beta0", 0.1))
    _require(0.0 < beta0 < 1.0, f"scenario: beta0 must lie in (0, 1), got {beta0}")
    order = None
    if raw.get("order") is not None:
        betas = tuple(float(b) for b in raw["order"])
        _require(len(betas) == symbol.m,
                 f"scenario: order has {len(betas)} entries for an m = {symbol.m} system")
        try:
            order = VectorOrder(betas=betas, beta0=beta0)
        except ValueError as exc:
            raise SchemaError(f"scenario: {exc}") from exc
    t0 = float(raw["t0"]) if raw.get("t0") is not None else None
    xi0 = tuple(float(v) for v in raw["xi0"]) if raw.get("xi0") is not None else None
    if xi0 is not None:
        _require(len(xi0) == box.dim, "scenario: xi0 dimension does not match the box")
        _require(box.contains(xi0), f"scenario: xi0 = {xi0} outside the frequency box")
    tol_kwargs = {}
    if raw.get("tolerances") is not None:
        _check_keys(raw["tolerances"], _TOL_KEYS, "tolerances")
        tol_kwargs = {k: float(v) for k, v in raw["tolerances"].items()}
    return Scenario(
        box=box, symbol=symbol, data=data, kind=kind, beta0=beta0,
        order=order, t0=t0, xi0=xi0, tolerances=Tolerances(**tol_kwargs), raw=raw,
    )


def load_scenario(path: str) -> Scenario:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from exc
    return parse_scenario(raw, base_dir=os.path.dirname(os.path.abspath(path)))


def example_scenario_dict() -> dict:
    """Ready-made scenario for the bundled 2x2 example system."""
    return {
        "schema": SCHEMA_ID,
        "box": {"lower": [-4.0], "upper": [4.0], "points": [129]},
        "symbol": {"kind": "builtin", "name": "example-sec4"},
        "initial_data": {
            "preset": "raised-cosine",
            "amplitudes": [1.0, 2.0],
            "center": [2.0],
            "width": [1.5],
        },
        "kind": "caputo",
        "order": [0.4, 0.85],
        "beta0": 0.1,
        "t0": 4.0,
        "xi0": [2.0],
    }


# -------------------------------------------------------- grid-value files
#
# Binary layout: 16-byte magic, then little-endian uint32 ncomp, uint32 n,
# n x uint32 points, n x float64 lower, n x float64 upper, then
# ncomp * prod(points) complex values as (re, im) float64 pairs, components
# outermost, grid row-major.
#
# CSV layout: header xi_1..xi_n, re_c1, im_c1, ..., re_cN, im_cN; one row
# per grid node in row-major order.


def write_grid_values(path: str, box: FrequencyBox, values: np.ndarray) -> None:
    values = np.asarray(values, dtype=complex)
    ncomp = values.shape[0]
    if values.shape[1:] != box.shape:
        raise ValueError(f"values shape {values.shape} does not match the grid {box.shape}")
    out = io.BytesIO()
    out.write(SPECTRUM_MAGIC)
    out.write(struct.pack("<II", ncomp, box.dim))
    out.write(struct.pack(f"<{box.dim}I", *box.points))
    out.write(struct.pack(f"<{box.dim}d", *box.lower))
    out.write(struct.pack(f"<{box.dim}d", *box.upper))
    flat = values.reshape(ncomp, -1)
    pairs = np.empty((ncomp, flat.shape[1], 2), dtype="<f8")
    pairs[:, :, 0] = flat.real
    pairs[:, :, 1] = flat.imag
    out.write(pairs.tobytes())
    atomic_write_bytes(path, out.getvalue())


def read_grid_values(path: str) -> tuple[FrequencyBox, np.ndarray]:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 16 or blob[:16] != SPECTRUM_MAGIC:
        raise SpectrumFormatError(f"{path}: missing magic header")
    off = 16
    try:
        ncomp, n = struct.unpack_from("<II", blob, off)
        off += 8
        points = struct.unpack_from(f"<{n}I", blob, off)
        off += 4 * n
        lower = struct.unpack_from(f"<{n}d", blob, off)
        off += 8 * n
        upper = struct.unpack_from(f"<{n}d", blob, off)
        off += 8 * n
        count = ncomp * int(np.prod(points))
        pairs = np.frombuffer(blob, dtype="<f8", count=2 * count, offset=off)
    except (struct.error, ValueError) as exc:
        raise SpectrumFormatError(f"{path}: truncated spectrum file") from exc
    if pairs.size != 2 * count:
        raise SpectrumFormatError(f"{path}: truncated spectrum payload")
    box = FrequencyBox(lower, upper, points)
    values = pairs.reshape(ncomp, -1, 2)
    return box, (values[:, :, 0] + 1j * values[:, :, 1]).reshape(ncomp, *points)


def write_grid_values_csv(path: str, box: FrequencyBox, values: np.ndarray) -> None:
    values = np.asarray(values, dtype=complex)
    ncomp = values.shape[0]
    if values.shape[1:] != box.shape:
        raise ValueError(f"values shape {values.shape} does not match the grid {box.shape}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = [f"xi_{i + 1}" for i in range(box.dim)]
    for c in range(ncomp):
        header += [f"re_c{c + 1}", f"im_c{c + 1}"]
    writer.writerow(header)
    flat = values.reshape(ncomp, -1)
    for pos, (idx, xi) in enumerate(box.node_iter()):
        row = [fmt_float(v) for v in xi]
        for c in range(ncomp):
            row += [fmt_float(flat[c, pos].real), fmt_float(flat[c, pos].imag)]
        writer.writerow(row)
    atomic_write_text(path, buf.getvalue())


def read_grid_values_csv(path: str) -> tuple[FrequencyBox | None, np.ndarray]:
    """CSV grid values; the box is inferred from the node columns."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SpectrumFormatError(f"{path}: empty file")
    header = rows[0]
    n = sum(1 for c in header if c.startswith("xi_"))
    ncomp = sum(1 for c in header if c.startswith("re_c"))
    if n == 0 or ncomp == 0 or len(header) != n + 2 * ncomp:
        raise SpectrumFormatError(f"{path}: unexpected header {header}")
    body = [r for r in rows[1:] if r]
    coords = np.array([[float(v) for v in r[:n]] for r in body])
    axes = [np.unique(coords[:, i]) for i in range(n)]
    points = tuple(len(ax) for ax in axes)
    if int(np.prod(points)) != len(body):
        raise SpectrumFormatError(f"{path}: rows do not form a full grid")
    box = FrequencyBox(tuple(ax[0] for ax in axes), tuple(ax[-1] for ax in axes), points)
    values = np.zeros((ncomp, len(body)), dtype=complex)
    seen = np.zeros(len(body), dtype=bool)
    for pos, r in enumerate(body):
        multi = tuple(int(np.searchsorted(axes[i], coords[pos, i])) for i in range(n))
        flat = int(np.ravel_multi_index(multi, points))
        if seen[flat]:
            raise SpectrumFormatError(f"{path}: duplicate grid node in row {pos + 2}")
        seen[flat] = True
        vals = [float(v) for v in r[n:]]
        for c in range(ncomp):
            values[c, flat] = complex(vals[2 * c], vals[2 * c + 1])
    return box, values.reshape(ncomp, *points)


def _read_grid_any(path: str) -> tuple[FrequencyBox, np.ndarray]:
    if path.endswith(".csv"):
        box, values = read_grid_values_csv(path)
        return box, values
    return read_grid_values(path)
