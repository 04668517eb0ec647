"""Matrix symbols on a frequency box and their per-frequency diagonalization.

Supported symbol classes: polynomial entries (possibly complex
coefficients), the built-in 2x2 advection-diffusion example, values
tabulated on the box grid, and user-supplied closed-form factorizations
(accepted on faith, verified by reconstruction).

The diagonalization convention is A(xi) = V Lambda V^{-1} with the
eigenvectors in the columns of V, so functions of the symbol evaluate as
f(A) = V f(Lambda) V^{-1}.  Eigenvalues are ordered by descending real
part, ties by descending imaginary part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import NonSymmetric, NotDiagonalizable, OutOfDomain

__all__ = [
    "FrequencyBox",
    "MatrixSymbol",
    "Diagonalization",
    "EigenvalueCondition",
    "ConditionReport",
    "evaluate_symbol",
    "diagonalize",
    "check_conditions",
    "eigenvalue_crossings",
    "BUILTIN_EXAMPLE",
]

_SYMMETRY_TOL = 1e-12
_RECON_TOL = 1e-10
_COND_LIMIT = 1e12


@dataclass(frozen=True)
class FrequencyBox:
    """Axis-aligned box in frequency space with a uniform inclusive grid."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    points: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "lower", tuple(float(v) for v in self.lower))
        object.__setattr__(self, "upper", tuple(float(v) for v in self.upper))
        object.__setattr__(self, "points", tuple(int(v) for v in self.points))
        if not len(self.lower) == len(self.upper) == len(self.points):
            raise ValueError("lower, upper and points must have equal length")
        if len(self.lower) == 0:
            raise ValueError("box must have at least one axis")
        for lo, hi, n in zip(self.lower, self.upper, self.points):
            if not lo < hi:
                raise ValueError(f"need lower < upper per axis, got [{lo}, {hi}]")
            if n < 2:
                raise ValueError("need at least 2 points per axis")

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.points

    @cached_property
    def axes(self) -> tuple[np.ndarray, ...]:
        return tuple(
            np.linspace(lo, hi, n)
            for lo, hi, n in zip(self.lower, self.upper, self.points)
        )

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(
            (hi - lo) / (n - 1) for lo, hi, n in zip(self.lower, self.upper, self.points)
        )

    def contains(self, xi) -> bool:
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        if xi.shape != (self.dim,):
            return False
        return all(
            lo - 1e-12 <= v <= hi + 1e-12
            for v, lo, hi in zip(xi, self.lower, self.upper)
        )

    def node_index(self, xi, tol: float = 1e-9) -> tuple[int, ...]:
        """Grid multi-index of xi; raises OutOfDomain if xi is not a node."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        if not self.contains(xi):
            raise OutOfDomain(f"xi = {tuple(xi)} outside the frequency box")
        idx = []
        for v, lo, h, n in zip(xi, self.lower, self.spacing, self.points):
            i = int(round((v - lo) / h))
            if i < 0 or i >= n or abs(lo + i * h - v) > tol * max(1.0, abs(v)):
                raise OutOfDomain(f"xi = {tuple(xi)} is not a grid node")
            idx.append(i)
        return tuple(idx)

    def node(self, idx: tuple[int, ...]) -> np.ndarray:
        return np.array(
            [ax[i] for ax, i in zip(self.axes, idx)], dtype=float
        )

    def node_iter(self):
        for idx in np.ndindex(*self.points):
            yield idx, self.node(idx)


# polynomial entry: list of (powers, coeff) with len(powers) == box dim
PolyEntry = list[tuple[tuple[int, ...], complex]]

_BUILTIN_ENTRIES: dict[tuple[int, int], PolyEntry] = {
    (0, 0): [((2,), -1.0)],
    (0, 1): [((1,), -1.0)],
    (1, 0): [((1,), -1.0)],
    (1, 1): [((2,), -1.0)],
}


@dataclass
class MatrixSymbol:
    """m x m symmetric symbol; `kind` selects the evaluation backend."""

    m: int
    kind: str
    dim: int
    poly: dict[tuple[int, int], PolyEntry] | None = None
    values: np.ndarray | None = None
    box: FrequencyBox | None = None
    factor_fn: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray]] | None = None
    name: str = ""

    @classmethod
    def polynomial(cls, m, dim, entries, box=None, name="polynomial"):
        poly = {}
        for (j, k), terms in entries.items():
            poly[(int(j), int(k))] = [
                (tuple(int(p) for p in powers), complex(c)) for powers, c in terms
            ]
        return cls(m=m, kind="polynomial", dim=dim, poly=poly, box=box, name=name)

    @classmethod
    def builtin_example(cls, box=None):
        """The bundled 2x2 coupled advection-diffusion symbol in one dimension."""
        sym = cls.polynomial(2, 1, _BUILTIN_ENTRIES, box=box, name="builtin-example")
        sym.kind = "builtin"
        return sym

    @classmethod
    def tabulated(cls, box: FrequencyBox, values) -> "MatrixSymbol":
        values = np.asarray(values, dtype=complex)
        m = values.shape[0]
        if values.shape[:2] != (m, m) or values.shape[2:] != box.shape:
            raise ValueError(
                f"tabulated values must have shape (m, m, *grid), got {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("tabulated symbol contains non-finite entries")
        return cls(m=m, kind="tabulated", dim=box.dim, values=values, box=box, name="tabulated")

    @classmethod
    def factored(cls, m, dim, factor_fn, box=None, name="factored"):
        """Closed-form factorization xi -> (eigenvalues, V, V_inv), columns of V eigenvectors."""
        return cls(m=m, kind="factored", dim=dim, factor_fn=factor_fn, box=box, name=name)

    def _eval_poly(self, xi: np.ndarray) -> np.ndarray:
        a = np.zeros((self.m, self.m), dtype=complex)
        for (j, k), terms in self.poly.items():
            v = 0j
            for powers, c in terms:
                v += c * math.prod(x**p for x, p in zip(xi, powers))
            a[j, k] = v
        return a

    def evaluate(self, xi) -> np.ndarray:
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        if xi.shape != (self.dim,):
            raise OutOfDomain(f"expected a {self.dim}-vector, got shape {xi.shape}")
        if self.box is not None and not self.box.contains(xi):
            raise OutOfDomain(f"xi = {tuple(xi)} outside the frequency box")
        if self.kind in ("polynomial", "builtin"):
            a = self._eval_poly(xi)
        elif self.kind == "tabulated":
            idx = self.box.node_index(xi)
            a = np.array(self.values[(slice(None), slice(None)) + idx])
        elif self.kind == "factored":
            lam, v, vinv = self.factor_fn(xi)
            a = np.asarray(v, dtype=complex) @ np.diag(np.asarray(lam, dtype=complex)) @ np.asarray(vinv, dtype=complex)
        else:
            raise ValueError(f"unknown symbol kind {self.kind!r}")
        if not np.all(np.isfinite(a)):
            raise OutOfDomain(f"symbol is not finite at xi = {tuple(xi)}")
        scale = np.max(np.abs(a)) if a.size else 0.0
        asym = np.max(np.abs(a - a.T))
        if asym > _SYMMETRY_TOL * (1.0 + scale):
            raise NonSymmetric(
                f"symbol asymmetry {asym:.3e} at xi = {tuple(xi)} exceeds tolerance"
            )
        return a


def evaluate_symbol(symbol: MatrixSymbol, xi) -> np.ndarray:
    """Pointwise value A(xi) of the matrix symbol (symmetry checked)."""
    return symbol.evaluate(xi)


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Diagonalization:
    """A(xi) = V diag(eigenvalues) V^{-1}; arrays are read-only."""

    xi: tuple[float, ...]
    eigenvalues: np.ndarray
    modal: np.ndarray          # V, eigenvectors in columns
    modal_inv: np.ndarray      # V^{-1}
    reconstruction_error: float
    inverse_error: float

    @property
    def m(self) -> int:
        return self.eigenvalues.shape[0]


def _eigen_order(lam: np.ndarray) -> np.ndarray:
    # descending real part, ties broken by descending imaginary part
    return np.lexsort((-lam.imag, -lam.real))


def diagonalize(symbol: MatrixSymbol, xi) -> Diagonalization:
    """Eigendecomposition of A(xi) with the fixed ordering convention."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    a = evaluate_symbol(symbol, xi)
    m = symbol.m
    scale = float(np.max(np.abs(a))) if a.size else 0.0

    if symbol.kind == "factored":
        lam, v, vinv = symbol.factor_fn(xi)
        lam = np.asarray(lam, dtype=complex)
        v = np.asarray(v, dtype=complex)
        vinv = np.asarray(vinv, dtype=complex)
    elif np.max(np.abs(a - np.diag(np.diag(a)))) <= 1e-14 * (1.0 + scale):
        lam = np.diag(a).astype(complex)
        v = np.eye(m, dtype=complex)
        vinv = np.eye(m, dtype=complex)
    elif np.max(np.abs(a.imag)) <= 1e-13 * (1.0 + scale):
        w, q = np.linalg.eigh(a.real)
        lam = w.astype(complex)
        v = q.astype(complex)
        vinv = q.T.astype(complex)
    else:
        raise NotDiagonalizable(
            "complex non-diagonal symbols need a user-supplied factorization"
        )

    order = _eigen_order(lam)
    lam = lam[order]
    v = v[:, order]
    vinv = vinv[order, :]

    if np.linalg.cond(v) > _COND_LIMIT:
        raise NotDiagonalizable(
            f"eigenvector matrix at xi = {tuple(xi)} is numerically singular"
        )
    recon = float(np.max(np.abs(v @ np.diag(lam) @ vinv - a)))
    inv_err = float(np.max(np.abs(v @ vinv - np.eye(m))))
    if recon > _RECON_TOL * (1.0 + scale) or inv_err > _RECON_TOL:
        raise NotDiagonalizable(
            f"factorization fails reconstruction at xi = {tuple(xi)}: "
            f"|VLV^-1 - A| = {recon:.3e}, |VV^-1 - I| = {inv_err:.3e}"
        )
    return Diagonalization(
        xi=tuple(float(v_) for v_ in xi),
        eigenvalues=_freeze(lam),
        modal=_freeze(v),
        modal_inv=_freeze(vinv),
        reconstruction_error=recon,
        inverse_error=inv_err,
    )


@dataclass(frozen=True)
class EigenvalueCondition:
    index: int
    lam: complex
    arg: float
    spectral_ok: bool
    spectral_margin: float
    sign_ok: bool | None
    sign_margin: float

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "lambda": {"re": self.lam.real, "im": self.lam.imag},
            "arg": self.arg,
            "spectral_ok": self.spectral_ok,
            "spectral_margin": self.spectral_margin,
            "sign_ok": self.sign_ok,
            "sign_margin": self.sign_margin,
        }


@dataclass(frozen=True)
class ConditionReport:
    kind: str
    entries: tuple[EigenvalueCondition, ...]
    degenerate_pairs: tuple[tuple[int, int], ...] = field(default_factory=tuple)

    @property
    def all_ok(self) -> bool:
        ok = all(e.spectral_ok for e in self.entries) and not self.degenerate_pairs
        if self.kind == "riemann-liouville":
            ok = ok and all(e.sign_ok for e in self.entries)
        return ok

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "all_ok": self.all_ok,
            "eigenvalues": [e.to_dict() for e in self.entries],
            "degenerate_pairs": [list(p) for p in self.degenerate_pairs],
        }


def check_conditions(
    diag: Diagonalization,
    kind: str,
    spectral_margin_tol: float = 1e-12,
    sign_tol: float = 1e-9,
    degeneracy_tol: float = 1e-9,
) -> ConditionReport:
    """Per-eigenvalue sector and sign checks required by the inverse theory."""
    if kind not in ("caputo", "riemann-liouville"):
        raise ValueError(f"unknown derivative kind {kind!r}")
    entries = []
    for l, lam in enumerate(diag.eigenvalues):
        lam = complex(lam)
        arg = math.atan2(lam.imag, lam.real)
        margin = abs(arg) - 0.5 * math.pi
        sign_margin = abs(abs(lam.real) - abs(lam.imag))
        sign_ok = None
        if kind == "riemann-liouville":
            sign_ok = sign_margin > sign_tol * (1.0 + abs(lam))
        entries.append(
            EigenvalueCondition(
                index=l,
                lam=lam,
                arg=arg,
                spectral_ok=margin > spectral_margin_tol,
                spectral_margin=margin,
                sign_ok=sign_ok,
                sign_margin=sign_margin,
            )
        )
    lam = diag.eigenvalues
    scale = 1.0 + float(np.max(np.abs(lam)))
    pairs = tuple(
        (i, j)
        for i in range(len(lam))
        for j in range(i + 1, len(lam))
        if abs(lam[i] - lam[j]) <= degeneracy_tol * scale
    )
    return ConditionReport(kind=kind, entries=tuple(entries), degenerate_pairs=pairs)


def eigenvalue_crossings(
    symbol: MatrixSymbol, box: FrequencyBox, gap_tol: float = 1e-8
) -> list[tuple[int, ...]]:
    """Grid nodes where the spectral gap collapses (ordering may swap there)."""
    flagged = []
    for idx, xi in box.node_iter():
        d = diagonalize(symbol, xi)
        lam = d.eigenvalues
        scale = 1.0 + float(np.max(np.abs(lam)))
        gap = min(
            abs(lam[i] - lam[j])
            for i in range(len(lam))
            for j in range(i + 1, len(lam))
        ) if len(lam) > 1 else math.inf
        if gap <= gap_tol * scale:
            flagged.append(idx)
    return flagged


BUILTIN_EXAMPLE = MatrixSymbol.builtin_example()
