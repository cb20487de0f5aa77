"""
Tests for JSON and CSV input/output
"""

import io
import json

import pytest

from bellrand.errors import ValidationError
from bellrand.io import (
    dumps,
    format_number,
    read_ensemble,
    read_json,
    render_csv,
    write_csv,
    write_json,
)
from bellrand.models import (
    DeterministicStrategy,
    FactorizedInputConditional,
    LhvAtom,
    LhvEnsemble,
)


class TestReadJson:
    def test_missing_file(self, tmp_path):
        with pytest.raises(ValidationError, match="cannot read"):
            read_json(tmp_path / "absent.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ValidationError, match="not valid JSON"):
            read_json(path)

    def test_stdin(self, monkeypatch):
        monkeypatch.setattr("sys.stdin", io.StringIO('{"atoms": []}'))
        assert read_json("-") == {"atoms": []}


class TestReadEnsemble:
    def test_attack_file(self, ensemble_file, general_attack):
        loaded = read_ensemble(ensemble_file)
        assert loaded == general_attack
        assert loaded.label == "analytic"
        assert loaded.extras["P"] == pytest.approx(1 / 3)

    def test_factorized_atoms(self, tmp_path):
        inputs = FactorizedInputConditional(0.5, 0.5)
        e = LhvEnsemble((LhvAtom(1.0, inputs, DeterministicStrategy(1, 0, 1, 0)),))
        path = tmp_path / "fac.json"
        write_json(path, e.to_dict())
        assert read_ensemble(path).is_factorized

    def test_error_names_file(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"atoms": [{"q": 1.0, "p": [1, 0, 0, 0]}]}))
        with pytest.raises(ValidationError, match="bad.json: ensemble atom 0"):
            read_ensemble(path)

    def test_not_an_ensemble(self, tmp_path):
        path = tmp_path / "list.json"
        path.write_text("[1, 2, 3]")
        with pytest.raises(ValidationError, match="'atoms' list"):
            read_ensemble(path)


class TestWriters:
    def test_write_json_leaves_no_temp_files(self, tmp_path):
        write_json(tmp_path / "out.json", {"value": 0.5})
        assert [p.name for p in tmp_path.iterdir()] == ["out.json"]
        assert json.loads((tmp_path / "out.json").read_text()) == {"value": 0.5}

    def test_write_json_replaces(self, tmp_path):
        path = tmp_path / "out.json"
        write_json(path, {"value": 1})
        write_json(path, {"value": 2})
        assert json.loads(path.read_text()) == {"value": 2}

    def test_failed_write_cleans_up(self, tmp_path):
        with pytest.raises(TypeError):
            write_json(tmp_path / "out.json", {"value": object()})
        assert list(tmp_path.iterdir()) == []

    def test_dumps_indented(self):
        assert dumps({"a": 1}) == '{\n  "a": 1\n}'


class TestCsv:
    def test_format_number(self):
        assert format_number(0.1 + 0.2) == "0.3"
        assert format_number(1 / 3) == "0.333333333333"
        assert format_number(None) == ""
        assert format_number("general") == "general"
        assert format_number(3) == "3"

    def test_render(self):
        text = render_csv(("condition", "P", "value"), [("general", 0.3, 1 / 3)])
        assert text == "condition,P,value\ngeneral,0.3,0.333333333333\n"

    def test_write_csv(self, tmp_path):
        path = tmp_path / "rows.csv"
        write_csv(path, ("a", "b"), [(1, None), (2, 0.5)])
        assert path.read_text() == "a,b\n1,\n2,0.5\n"
