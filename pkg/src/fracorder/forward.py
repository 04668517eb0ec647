"""Forward solvers in Fourier space and observation generation.

The Fourier transform of the solution decouples mode by mode:

    caputo:              u_hat_j(t, xi) = sum_l E_{b_l}(lambda_l t^{b_l}) K_{j,l}
    riemann-liouville:   u_hat_j(t, xi) = sum_l t^{b_l-1} E_{b_l,b_l}(lambda_l t^{b_l}) K_{j,l}

with projection weights K_{j,l} = V_{j,l} * (V^{-1} phi_hat)_l built from
the symbol's diagonalization.  Spatial values come from trapezoidal
quadrature of the inverse transform over the frequency box.
"""

from __future__ import annotations

import cmath
import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import mlfunc
from .errors import InvalidTime, OutOfDomain, SchemaError
from .fileio import atomic_write_text, fmt_float
from .mlfunc import DEFAULT_POLICY, MLRegimePolicy
from .symbolkit import Diagonalization, FrequencyBox, MatrixSymbol, diagonalize

__all__ = [
    "VectorOrder",
    "BandLimitedData",
    "ObservationRecord",
    "k_coeff",
    "fourier_solution_caputo",
    "fourier_solution_rl",
    "fourier_solution_point",
    "fourier_solution_grid",
    "spatial_solution",
    "observe",
    "write_observations_csv",
    "read_observations_csv",
    "write_observations_json",
    "read_observations_json",
]

KINDS = ("caputo", "riemann-liouville")


@dataclass(frozen=True)
class VectorOrder:
    """Per-equation fractional orders with their common floor beta0."""

    betas: tuple[float, ...]
    beta0: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        if not 0.0 < self.beta0 < 1.0:
            raise ValueError(f"beta0 must lie in (0, 1), got {self.beta0}")
        for b in self.betas:
            if not self.beta0 <= b <= 1.0:
                raise ValueError(
                    f"each order must lie in [beta0, 1] = [{self.beta0}, 1], got {b}"
                )

    @property
    def m(self) -> int:
        return len(self.betas)


@dataclass
class BandLimitedData:
    """Initial data given by its Fourier transform tabulated on the box grid."""

    box: FrequencyBox
    spectra: np.ndarray  # complex, shape (m, *box.shape)
    preset: str | None = None

    def __post_init__(self):
        self.spectra = np.asarray(self.spectra, dtype=complex)
        if self.spectra.ndim != self.box.dim + 1 or self.spectra.shape[1:] != self.box.shape:
            raise ValueError(
                f"spectra must have shape (m, *grid) = (m, {self.box.shape}), "
                f"got {self.spectra.shape}"
            )
        if not np.all(np.isfinite(self.spectra)):
            raise ValueError("spectra contain non-finite values")

    @property
    def m(self) -> int:
        return self.spectra.shape[0]

    @classmethod
    def from_profile(cls, box, profile, preset=None):
        """Tabulate callable profiles xi -> value, one per component."""
        grids = np.meshgrid(*box.axes, indexing="ij")
        spectra = np.stack([np.asarray(f(*grids), dtype=complex) for f in profile])
        return cls(box=box, spectra=spectra, preset=preset)

    @classmethod
    def gaussian(cls, box, amplitudes, centers, widths):
        centers = np.atleast_2d(np.asarray(centers, dtype=float))
        widths = np.atleast_2d(np.asarray(widths, dtype=float))
        if np.any(widths <= 0):
            raise ValueError("gaussian widths must be positive")

        def make(k):
            def f(*grids):
                r2 = sum(
                    ((g - c) / w) ** 2
                    for g, c, w in zip(grids, centers[min(k, len(centers) - 1)],
                                       widths[min(k, len(widths) - 1)])
                )
                return complex(amplitudes[k]) * np.exp(-0.5 * r2)
            return f

        return cls.from_profile(box, [make(k) for k in range(len(amplitudes))],
                                preset="gaussian")

    @classmethod
    def raised_cosine(cls, box, amplitudes, centers, widths):
        centers = np.atleast_2d(np.asarray(centers, dtype=float))
        widths = np.atleast_2d(np.asarray(widths, dtype=float))
        if np.any(widths <= 0):
            raise ValueError("raised-cosine widths must be positive")

        def make(k):
            def f(*grids):
                r = np.sqrt(sum(
                    ((g - c) / w) ** 2
                    for g, c, w in zip(grids, centers[min(k, len(centers) - 1)],
                                       widths[min(k, len(widths) - 1)])
                ))
                bump = np.where(r < 1.0, np.cos(0.5 * np.pi * np.minimum(r, 1.0)) ** 2, 0.0)
                return complex(amplitudes[k]) * bump
            return f

        return cls.from_profile(box, [make(k) for k in range(len(amplitudes))],
                                preset="raised-cosine")

    @classmethod
    def indicator_poly(cls, box, amplitudes, powers, sub_lower, sub_upper):
        sub_lower = np.asarray(sub_lower, dtype=float)
        sub_upper = np.asarray(sub_upper, dtype=float)

        def make(k):
            def f(*grids):
                inside = np.ones_like(grids[0], dtype=bool)
                for g, lo, hi in zip(grids, sub_lower, sub_upper):
                    inside &= (g >= lo) & (g <= hi)
                mono = np.ones_like(grids[0], dtype=float)
                for g, p in zip(grids, powers[k]):
                    mono = mono * g**p
                return complex(amplitudes[k]) * mono * inside
            return f

        return cls.from_profile(box, [make(k) for k in range(len(amplitudes))],
                                preset="indicator-poly")

    def value_at(self, xi) -> np.ndarray:
        """Multilinear interpolation of all component spectra at xi."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        if not self.box.contains(xi):
            raise OutOfDomain(f"xi = {tuple(xi)} outside the frequency box")
        base, frac = [], []
        for v, lo, h, n in zip(xi, self.box.lower, self.box.spacing, self.box.points):
            pos = (v - lo) / h
            i = int(np.floor(pos))
            i = min(max(i, 0), n - 2)
            f = pos - i
            if abs(f) < 1e-12:
                f = 0.0
            elif abs(f - 1.0) < 1e-12:
                f = 1.0
            base.append(i)
            frac.append(f)
        out = np.zeros(self.m, dtype=complex)
        for corner in np.ndindex(*(2,) * self.box.dim):
            w = 1.0
            idx = []
            for c, i, f in zip(corner, base, frac):
                w *= f if c else (1.0 - f)
                idx.append(i + c)
            if w != 0.0:
                out += w * self.spectra[(slice(None), *idx)]
        return out

    def value_at_node(self, idx: tuple[int, ...]) -> np.ndarray:
        return np.array(self.spectra[(slice(None), *idx)])


@dataclass(frozen=True)
class ObservationRecord:
    """One measurement of the solution's Fourier transform: (t0, xi0, d)."""

    t0: float
    xi0: tuple[float, ...]
    d: tuple[complex, ...]
    kind: str
    note: str = ""

    def __post_init__(self):
        object.__setattr__(self, "xi0", tuple(float(v) for v in self.xi0))
        object.__setattr__(self, "d", tuple(complex(v) for v in self.d))
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.t0 < 1.0:
            raise InvalidTime(f"observation time must satisfy t0 >= 1, got {self.t0}")

    @property
    def m(self) -> int:
        return len(self.d)


def k_coeff(diag: Diagonalization, phi_hat) -> np.ndarray:
    """Projection weights K_{j,l} = V_{j,l} (V^{-1} phi_hat)_l.

    Column l carries the l-th eigenvector scaled by the l-th modal
    coefficient of the data, so row sums reproduce phi_hat.
    """
    phi = np.asarray(phi_hat, dtype=complex)
    coeffs = diag.modal_inv @ phi
    return diag.modal * coeffs[np.newaxis, :]


def _mode_factors(kind, order, eigenvalues, t, policy):
    if kind == "caputo":
        if t == 0.0:
            return np.ones(len(eigenvalues), dtype=complex)
        factors = []
        for b, lam in zip(order.betas, eigenvalues):
            lam = complex(lam)
            if b == 1.0:
                factors.append(cmath.exp(lam * t))
            else:
                factors.append(mlfunc.ml_one(b, lam * t**b, policy))
        return np.array(factors, dtype=complex)
    if kind == "riemann-liouville":
        if t <= 0.0:
            raise InvalidTime(f"the Riemann-Liouville kernel needs t > 0, got t = {t}")
        factors = []
        for b, lam in zip(order.betas, eigenvalues):
            lam = complex(lam)
            if b == 1.0:
                factors.append(cmath.exp(lam * t))
            else:
                factors.append(t ** (b - 1.0) * mlfunc.ml_two(b, b, lam * t**b, policy))
        return np.array(factors, dtype=complex)
    raise ValueError(f"unknown derivative kind {kind!r}")


def fourier_solution_caputo(
    diag: Diagonalization,
    phi_hat,
    order: VectorOrder,
    t: float,
    policy: MLRegimePolicy = DEFAULT_POLICY,
) -> np.ndarray:
    """u_hat(t, xi) for the Caputo problem at one frequency."""
    if t < 0.0:
        raise InvalidTime(f"need t >= 0, got {t}")
    factors = _mode_factors("caputo", order, diag.eigenvalues, t, policy)
    return k_coeff(diag, phi_hat) @ factors


def fourier_solution_rl(
    diag: Diagonalization,
    phi_hat,
    order: VectorOrder,
    t: float,
    policy: MLRegimePolicy = DEFAULT_POLICY,
) -> np.ndarray:
    """u_hat(t, xi) for the Riemann-Liouville problem at one frequency."""
    factors = _mode_factors("riemann-liouville", order, diag.eigenvalues, t, policy)
    return k_coeff(diag, phi_hat) @ factors


def fourier_solution_point(
    symbol: MatrixSymbol,
    data: BandLimitedData,
    order: VectorOrder,
    t: float,
    xi,
    kind: str,
    policy: MLRegimePolicy = DEFAULT_POLICY,
) -> np.ndarray:
    diag = diagonalize(symbol, xi)
    phi = data.value_at(xi)
    if kind == "caputo":
        return fourier_solution_caputo(diag, phi, order, t, policy)
    if kind == "riemann-liouville":
        return fourier_solution_rl(diag, phi, order, t, policy)
    raise ValueError(f"unknown derivative kind {kind!r}")


def fourier_solution_grid(
    symbol: MatrixSymbol,
    data: BandLimitedData,
    order: VectorOrder,
    t: float,
    kind: str,
    policy: MLRegimePolicy = DEFAULT_POLICY,
    threads: int = 1,
) -> np.ndarray:
    """u_hat(t, .) on every grid node; shape (m, *grid)."""
    box = data.box
    out = np.zeros((data.m, *box.shape), dtype=complex)
    nodes = list(box.node_iter())

    def work(item):
        idx, xi = item
        diag = diagonalize(symbol, xi)
        phi = data.value_at_node(idx)
        factors = _mode_factors(kind, order, diag.eigenvalues, t, policy)
        return idx, k_coeff(diag, phi) @ factors

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, nodes))
    else:
        results = [work(item) for item in nodes]
    for idx, val in results:
        out[(slice(None), *idx)] = val
    return out


def _trapezoid_weights(axis: np.ndarray) -> np.ndarray:
    w = np.zeros_like(axis)
    w[1:] += 0.5 * np.diff(axis)
    w[:-1] += 0.5 * np.diff(axis)
    return w


def _quad_weights(axes) -> np.ndarray:
    w = _trapezoid_weights(axes[0])
    for ax in axes[1:]:
        w = np.multiply.outer(w, _trapezoid_weights(ax))
    return w


def spatial_solution(
    symbol: MatrixSymbol,
    data: BandLimitedData,
    order: VectorOrder,
    t: float,
    x,
    kind: str,
    policy: MLRegimePolicy = DEFAULT_POLICY,
    threads: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """u(t, x) by trapezoidal quadrature of the inverse Fourier transform.

    Returns (values, error_estimate); the estimate compares against the
    same quadrature on the every-other-node subgrid.
    """
    box = data.box
    if box.dim > 3:
        raise OutOfDomain("spatial reconstruction is capped at 3 frequency axes")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (box.dim,):
        raise OutOfDomain(f"x must be a {box.dim}-vector")
    u_hat = fourier_solution_grid(symbol, data, order, t, kind, policy, threads)
    grids = np.meshgrid(*box.axes, indexing="ij")
    phase = np.exp(1j * sum(g * xv for g, xv in zip(grids, x)))
    norm = (2.0 * np.pi) ** (-box.dim)
    weights = _quad_weights(box.axes)
    fine = norm * np.array([np.sum(u_hat[k] * phase * weights) for k in range(data.m)])

    coarse_slices = tuple(slice(None, None, 2) for _ in range(box.dim))
    coarse_axes = [ax[::2] for ax in box.axes]
    cw = _quad_weights(coarse_axes)
    coarse = norm * np.array([
        np.sum(u_hat[k][coarse_slices] * phase[coarse_slices] * cw)
        for k in range(data.m)
    ])
    return fine, np.abs(fine - coarse)


def observe(
    symbol: MatrixSymbol,
    data: BandLimitedData,
    order: VectorOrder,
    t0: float,
    xi0,
    kind: str,
    policy: MLRegimePolicy = DEFAULT_POLICY,
    note: str = "",
) -> ObservationRecord:
    """Evaluate u_hat at one (t0, xi0) and package it as a record."""
    xi0 = np.atleast_1d(np.asarray(xi0, dtype=float))
    if not data.box.contains(xi0):
        raise OutOfDomain(f"xi0 = {tuple(xi0)} outside the frequency box")
    if t0 < 1.0:
        raise InvalidTime(f"observation time must satisfy t0 >= 1, got {t0}")
    d = fourier_solution_point(symbol, data, order, t0, xi0, kind, policy)
    if not note:
        note = f"forward simulation, kind={kind}, order={list(order.betas)}"
    return ObservationRecord(t0=t0, xi0=tuple(xi0), d=tuple(d), kind=kind, note=note)


# ------------------------------------------------------------------ file IO


def _csv_header(n: int, m: int) -> list[str]:
    cols = ["t0"] + [f"xi0_{i + 1}" for i in range(n)] + ["kind"]
    for j in range(m):
        cols += [f"re_d{j + 1}", f"im_d{j + 1}"]
    return cols


def write_observations_csv(records, path: str) -> None:
    records = list(records)
    if not records:
        raise ValueError("no records to write")
    n, m = len(records[0].xi0), records[0].m
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_csv_header(n, m))
    for r in records:
        row = [fmt_float(r.t0)] + [fmt_float(v) for v in r.xi0] + [r.kind]
        for v in r.d:
            row += [fmt_float(v.real), fmt_float(v.imag)]
        writer.writerow(row)
    atomic_write_text(path, buf.getvalue())


def read_observations_csv(path: str) -> list[ObservationRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError(f"{path}: empty observation file")
    header = rows[0]
    n = sum(1 for c in header if c.startswith("xi0_"))
    m = sum(1 for c in header if c.startswith("re_d"))
    if header != _csv_header(n, m):
        raise SchemaError(f"{path}: unexpected observation CSV header {header}")
    records = []
    for row in rows[1:]:
        if not row:
            continue
        t0 = float(row[0])
        xi0 = tuple(float(v) for v in row[1:1 + n])
        kind = row[1 + n]
        vals = [float(v) for v in row[2 + n:2 + n + 2 * m]]
        d = tuple(complex(vals[2 * j], vals[2 * j + 1]) for j in range(m))
        records.append(ObservationRecord(t0=t0, xi0=xi0, d=d, kind=kind))
    return records


def _record_to_dict(r: ObservationRecord) -> dict:
    return {
        "t0": r.t0,
        "xi0": list(r.xi0),
        "kind": r.kind,
        "d": [{"re": v.real, "im": v.imag} for v in r.d],
        "note": r.note,
    }


def write_observations_json(records, path: str) -> None:
    payload = {
        "schema": "fracorder-observation/1",
        "records": [_record_to_dict(r) for r in records],
    }
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def read_observations_json(path: str) -> list[ObservationRecord]:
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("schema") != "fracorder-observation/1":
        raise SchemaError(f"{path}: missing or unknown observation schema tag")
    records = []
    for entry in payload["records"]:
        extra = set(entry) - {"t0", "xi0", "kind", "d", "note"}
        if extra:
            raise SchemaError(f"{path}: unknown observation keys {sorted(extra)}")
        records.append(
            ObservationRecord(
                t0=float(entry["t0"]),
                xi0=tuple(entry["xi0"]),
                d=tuple(complex(v["re"], v["im"]) for v in entry["d"]),
                kind=entry["kind"],
                note=entry.get("note", ""),
            )
        )
    return records
