import math

import numpy as np
import pytest

import fracorder as fr
from fracorder.errors import NonSymmetric, NotDiagonalizable, OutOfDomain
from fracorder.symbolkit import check_conditions, eigenvalue_crossings


def test_box_validation():
    with pytest.raises(ValueError):
        fr.FrequencyBox((1.0,), (0.0,), (10,))
    with pytest.raises(ValueError):
        fr.FrequencyBox((0.0,), (1.0,), (1,))
    with pytest.raises(ValueError):
        fr.FrequencyBox((0.0, 1.0), (1.0,), (4, 4))


def test_box_node_index_roundtrip(box129):
    idx = box129.node_index([2.0])
    assert idx == (96,)
    assert box129.node(idx)[0] == 2.0
    with pytest.raises(OutOfDomain):
        box129.node_index([2.01])
    with pytest.raises(OutOfDomain):
        box129.node_index([9.0])


def test_builtin_symbol_value(builtin_symbol):
    a = fr.evaluate_symbol(builtin_symbol, [2.0])
    assert np.allclose(a, [[-4.0, -2.0], [-2.0, -4.0]])


def test_polynomial_symbol_zero_at_origin(builtin_symbol):
    a = fr.evaluate_symbol(builtin_symbol, [0.0])
    assert np.allclose(a, np.zeros((2, 2)))


def test_tabulated_symbol_roundtrips_grid_values(rng):
    box = fr.FrequencyBox((-1.0, -1.0), (1.0, 1.0), (5, 7))
    vals = rng.normal(size=(2, 2, 5, 7))
    vals = vals + vals.transpose(1, 0, 2, 3)  # symmetric per node
    sym = fr.MatrixSymbol.tabulated(box, vals.astype(complex))
    idx = (3, 4)
    got = fr.evaluate_symbol(sym, box.node(idx))
    assert np.allclose(got, vals[:, :, 3, 4])
    with pytest.raises(OutOfDomain):
        fr.evaluate_symbol(sym, [0.011, 0.0])  # off-node


def test_nonsymmetric_symbol_rejected():
    sym = fr.MatrixSymbol.polynomial(
        2, 1, {(0, 0): [((0,), 1.0)], (0, 1): [((1,), 1.0)],
               (1, 0): [((1,), -1.0)], (1, 1): [((0,), 1.0)]},
    )
    with pytest.raises(NonSymmetric):
        fr.evaluate_symbol(sym, [1.0])


def test_builtin_eigenvalue_formulas(builtin_symbol):
    # lambda = -xi^2 +- xi, as a set, across the range
    for xi in np.linspace(-10.0, 10.0, 81):
        sym = fr.MatrixSymbol.builtin_example()
        d = fr.diagonalize(sym, [xi])
        expected = sorted([-xi**2 + xi, -xi**2 - xi], reverse=True)
        got = sorted(d.eigenvalues.real, reverse=True)
        assert np.allclose(got, expected, atol=1e-12)
        assert np.allclose(d.eigenvalues.imag, 0.0)


def test_eigenvalue_ordering_at_two(diag_at_2):
    assert diag_at_2.eigenvalues[0] == pytest.approx(-2.0)
    assert diag_at_2.eigenvalues[1] == pytest.approx(-6.0)


def test_diagonalization_reconstruction_random_symbols(rng):
    # direct-multiplication oracle on 100 random (symbol, xi) draws
    for _ in range(100):
        c = rng.normal(size=(2, 2))
        c = c + c.T
        d0 = rng.normal(size=(2, 2))
        d0 = d0 + d0.T
        entries = {
            (j, k): [((0,), c[j, k]), ((2,), d0[j, k])]
            for j in range(2)
            for k in range(2)
        }
        sym = fr.MatrixSymbol.polynomial(2, 1, entries)
        xi = rng.uniform(-3.0, 3.0, size=1)
        d = fr.diagonalize(sym, xi)
        a = fr.evaluate_symbol(sym, xi)
        recon = d.modal @ np.diag(d.eigenvalues) @ d.modal_inv
        scale = 1.0 + np.max(np.abs(a))
        assert np.max(np.abs(recon - a)) <= 1e-10 * scale
        assert np.max(np.abs(d.modal @ d.modal_inv - np.eye(2))) <= 1e-10


def test_diagonal_complex_symbol_uses_trivial_factors():
    sym = fr.MatrixSymbol.polynomial(
        2, 1, {(0, 0): [((0,), -1 + 1j)], (1, 1): [((0,), -3 + 0j)]},
    )
    d = fr.diagonalize(sym, [0.5])
    assert set(np.round(d.eigenvalues, 12)) == {(-1 + 1j), (-3 + 0j)}
    assert np.allclose(d.modal @ d.modal_inv, np.eye(2))


def test_complex_nondiagonal_needs_factorization():
    sym = fr.MatrixSymbol.polynomial(
        2, 1, {(0, 0): [((0,), -1 + 1j)], (0, 1): [((0,), 0.5j)],
               (1, 0): [((0,), 0.5j)], (1, 1): [((0,), -3 + 0j)]},
    )
    with pytest.raises(NotDiagonalizable):
        fr.diagonalize(sym, [0.0])


def test_factored_symbol_verified_by_reconstruction():
    def factor(xi):
        lam = np.array([-(xi[0] ** 2) + xi[0], -(xi[0] ** 2) - xi[0]], dtype=complex)
        inv_sqrt2 = 1.0 / math.sqrt(2.0)
        v = np.array([[inv_sqrt2, inv_sqrt2], [-inv_sqrt2, inv_sqrt2]], dtype=complex)
        return lam, v, v.T

    sym = fr.MatrixSymbol.factored(2, 1, factor)
    d = fr.diagonalize(sym, [2.0])
    assert sorted(d.eigenvalues.real) == pytest.approx([-6.0, -2.0])

    def bad_factor(xi):
        lam, v, vinv = factor(xi)
        return lam, v, 2.0 * vinv  # not the inverse: fails V V^{-1} = I

    with pytest.raises(NotDiagonalizable):
        fr.diagonalize(fr.MatrixSymbol.factored(2, 1, bad_factor), [2.0])


def test_conditions_all_pass_at_two(diag_at_2):
    report = check_conditions(diag_at_2, "riemann-liouville")
    assert report.all_ok
    for e in report.entries:
        assert e.spectral_ok
        assert e.sign_ok
        assert abs(e.arg) == pytest.approx(math.pi)


def test_conditions_spectral_fail_at_half(builtin_symbol):
    d = fr.diagonalize(builtin_symbol, [0.5])
    report = check_conditions(d, "caputo")
    assert not report.all_ok
    assert d.eigenvalues[0].real == pytest.approx(0.25)
    assert not report.entries[0].spectral_ok
    assert report.entries[0].sign_ok is None  # not evaluated for caputo


def test_conditions_sign_boundary():
    sym = fr.MatrixSymbol.polynomial(
        2, 1, {(0, 0): [((0,), -1 + 1j)], (1, 1): [((0,), -3 + 0j)]},
    )
    d = fr.diagonalize(sym, [0.0])
    report = check_conditions(d, "riemann-liouville")
    entry = next(e for e in report.entries if abs(e.lam - (-1 + 1j)) < 1e-12)
    assert entry.sign_ok is False
    assert entry.sign_margin == 0.0
    assert not report.all_ok


def test_crossing_flagged_at_origin(builtin_symbol, box129):
    flagged = eigenvalue_crossings(builtin_symbol, box129, gap_tol=1e-8)
    origin = box129.node_index([0.0])
    assert origin in flagged
    assert len(flagged) == 1


def test_sorted_branches_continuous_away_from_crossings(builtin_symbol, box129):
    prev = None
    h = box129.spacing[0]
    origin = box129.node_index([0.0])[0]
    for i, ax in enumerate(box129.axes[0]):
        lam = fr.diagonalize(builtin_symbol, [ax]).eigenvalues
        if prev is not None and abs(i - origin) > 1:
            assert np.max(np.abs(lam - prev)) < 25.0 * h
        prev = lam
