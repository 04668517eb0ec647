import json

import numpy as np
import pytest

import fracorder as fr
from fracorder.errors import SchemaError, SpectrumFormatError
from fracorder.scenario import (
    SCHEMA_ID,
    example_scenario_dict,
    load_scenario,
    parse_scenario,
    read_grid_values,
    read_grid_values_csv,
    write_grid_values,
    write_grid_values_csv,
)


def test_example_scenario_parses():
    sc = parse_scenario(example_scenario_dict())
    assert sc.kind == "caputo"
    assert sc.symbol.m == 2
    assert sc.order.betas == (0.4, 0.85)
    assert sc.xi0 == (2.0,)
    assert sc.t0 == 4.0
    assert sc.data.value_at([2.0]) == pytest.approx([1.0, 2.0])


def test_unknown_top_level_key_rejected():
    raw = example_scenario_dict()
    raw["surprise"] = 1
    with pytest.raises(SchemaError, match="surprise"):
        parse_scenario(raw)


def test_unknown_nested_key_rejected():
    raw = example_scenario_dict()
    raw["box"]["padding"] = 3
    with pytest.raises(SchemaError, match="padding"):
        parse_scenario(raw)
    raw = example_scenario_dict()
    raw["initial_data"]["sigma"] = 1.0
    with pytest.raises(SchemaError, match="sigma"):
        parse_scenario(raw)


def test_schema_tag_required():
    raw = example_scenario_dict()
    raw["schema"] = "something/9"
    with pytest.raises(SchemaError, match="schema"):
        parse_scenario(raw)


def test_kind_alias_and_validation():
    raw = example_scenario_dict()
    raw["kind"] = "rl"
    assert parse_scenario(raw).kind == "riemann-liouville"
    raw["kind"] = "grunwald"
    with pytest.raises(SchemaError):
        parse_scenario(raw)


def test_xi0_outside_box_rejected():
    raw = example_scenario_dict()
    raw["xi0"] = [11.0]
    with pytest.raises(SchemaError, match="outside"):
        parse_scenario(raw)


def test_order_length_must_match_system():
    raw = example_scenario_dict()
    raw["order"] = [0.5]
    with pytest.raises(SchemaError):
        parse_scenario(raw)
    raw["order"] = [0.05, 0.5]  # below beta0
    with pytest.raises(SchemaError):
        parse_scenario(raw)


def test_polynomial_symbol_block():
    raw = example_scenario_dict()
    raw["symbol"] = {
        "kind": "polynomial",
        "size": 2,
        "entries": [
            {"row": 0, "col": 0, "terms": [{"powers": [2], "coeff": -1.0}]},
            {"row": 0, "col": 1, "terms": [{"powers": [1], "coeff": -1.0}]},
            {"row": 1, "col": 0, "terms": [{"powers": [1], "coeff": -1.0}]},
            {"row": 1, "col": 1, "terms": [{"powers": [2], "coeff": [-1.0, 0.0]}]},
        ],
    }
    sc = parse_scenario(raw)
    a = fr.evaluate_symbol(sc.symbol, [2.0])
    assert np.allclose(a, [[-4.0, -2.0], [-2.0, -4.0]])


def test_tolerance_overrides():
    raw = example_scenario_dict()
    raw["tolerances"] = {"beta_tol": 1e-10, "residual_tol": 1e-6}
    sc = parse_scenario(raw)
    assert sc.tolerances.beta_tol == 1e-10
    assert sc.tolerances.residual_tol == 1e-6
    raw["tolerances"] = {"beta_toll": 1e-10}
    with pytest.raises(SchemaError):
        parse_scenario(raw)


def test_binary_spectrum_roundtrip(tmp_path, rng):
    box = fr.FrequencyBox((-2.0, 0.0), (2.0, 1.0), (9, 5))
    values = rng.normal(size=(3, 9, 5)) + 1j * rng.normal(size=(3, 9, 5))
    path = str(tmp_path / "phi.bin")
    write_grid_values(path, box, values)
    box2, values2 = read_grid_values(path)
    assert box2 == box
    assert np.array_equal(values, values2)


def test_binary_spectrum_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"NOT-A-SPECTRUM-1" + b"\x00" * 64)
    with pytest.raises(SpectrumFormatError, match="magic"):
        read_grid_values(str(path))


def test_binary_spectrum_rejects_truncation(tmp_path, rng):
    box = fr.FrequencyBox((-1.0,), (1.0,), (5,))
    values = rng.normal(size=(1, 5)).astype(complex)
    path = str(tmp_path / "phi.bin")
    write_grid_values(path, box, values)
    blob = open(path, "rb").read()
    open(path, "wb").write(blob[:-16])
    with pytest.raises(SpectrumFormatError, match="truncated"):
        read_grid_values(path)


def test_csv_spectrum_roundtrip(tmp_path, rng):
    box = fr.FrequencyBox((-1.0,), (1.0,), (7,))
    values = rng.normal(size=(2, 7)) + 1j * rng.normal(size=(2, 7))
    path = str(tmp_path / "phi.csv")
    write_grid_values_csv(path, box, values)
    box2, values2 = read_grid_values_csv(path)
    assert box2.shape == box.shape
    assert np.allclose(values, values2)


def test_scenario_with_spectrum_file(tmp_path, rng):
    box = fr.FrequencyBox((-4.0,), (4.0,), (129,))
    values = np.zeros((2, 129), dtype=complex)
    values[0, 96] = 1.0
    values[1, 96] = 2.0
    spath = tmp_path / "phi.bin"
    write_grid_values(str(spath), box, values)
    raw = example_scenario_dict()
    raw["initial_data"] = {"spectrum_file": "phi.bin"}
    scenario_path = tmp_path / "scenario.json"
    scenario_path.write_text(json.dumps(raw))
    sc = load_scenario(str(scenario_path))
    assert sc.data.value_at([2.0]) == pytest.approx([1.0, 2.0])


def test_scenario_with_tabulated_symbol(tmp_path):
    box = fr.FrequencyBox((-4.0,), (4.0,), (129,))
    builtin = fr.MatrixSymbol.builtin_example(box=box)
    values = np.stack(
        [fr.evaluate_symbol(builtin, [x]) for x in box.axes[0]], axis=-1
    ).reshape(2, 2, 129)
    spath = tmp_path / "symbol.bin"
    write_grid_values(str(spath), box, values.reshape(4, 129))
    raw = example_scenario_dict()
    raw["symbol"] = {"kind": "tabulated", "size": 2, "path": "symbol.bin"}
    scenario_path = tmp_path / "scenario.json"
    scenario_path.write_text(json.dumps(raw))
    sc = load_scenario(str(scenario_path))
    assert np.allclose(fr.evaluate_symbol(sc.symbol, [2.0]), [[-4.0, -2.0], [-2.0, -4.0]])


def test_invalid_json_is_schema_error(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(SchemaError, match="invalid JSON"):
        load_scenario(str(path))
