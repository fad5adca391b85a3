"""Serialization round-trips and schema rejection."""

import json

import pytest

from carrieropt.system import build_miniature_system, validate_system
from carrieropt.system_io import (
    SchemaError,
    parse_system_files,
    serialize_system,
    system_digest,
    write_system_files,
)


@pytest.fixture(scope="module")
def mini():
    return build_miniature_system(seed=3)


class TestRoundTrip:
    def test_write_parse_identity(self, mini, tmp_path):
        write_system_files(mini, tmp_path)
        loaded = parse_system_files(tmp_path)
        assert loaded == mini

    def test_digest_stable_and_sensitive(self, mini):
        assert system_digest(mini) == system_digest(build_miniature_system(seed=3))
        assert system_digest(mini) != system_digest(build_miniature_system(seed=4))

    def test_serialized_files_present(self, mini):
        files = serialize_system(mini)
        assert {"manifest.json", "nodes.csv", "technologies.csv", "branches.csv",
                "demand_electricity.csv", "demand_hydrogen.csv", "profiles.csv",
                "inflows.csv"} <= set(files)

    def test_loaded_system_validates(self, mini, tmp_path):
        write_system_files(mini, tmp_path)
        assert validate_system(parse_system_files(tmp_path)) == []


class TestSchemaRejection:
    def test_unknown_column_rejected(self, mini, tmp_path):
        write_system_files(mini, tmp_path)
        path = tmp_path / "technologies.csv"
        lines = path.read_text().splitlines()
        lines[0] += ",surprise"
        lines[1] += ",1"
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(SchemaError, match="unknown column 'surprise'"):
            parse_system_files(tmp_path)

    def test_missing_manifest(self, mini, tmp_path):
        write_system_files(mini, tmp_path)
        (tmp_path / "manifest.json").unlink()
        with pytest.raises(SchemaError, match="manifest.json"):
            parse_system_files(tmp_path)

    def test_unsupported_units_rejected(self, mini, tmp_path):
        write_system_files(mini, tmp_path)
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        manifest["units"]["power"] = "GW"
        (tmp_path / "manifest.json").write_text(json.dumps(manifest))
        with pytest.raises(SchemaError, match="unsupported unit"):
            parse_system_files(tmp_path)

    def test_bad_number_names_cell(self, mini, tmp_path):
        write_system_files(mini, tmp_path)
        path = tmp_path / "nodes.csv"
        text = path.read_text().replace("1000.0", "not-a-number", 1)
        path.write_text(text)
        with pytest.raises(SchemaError, match="nodes.csv row"):
            parse_system_files(tmp_path)

    def test_invalid_system_rejected_with_violations(self, mini, tmp_path):
        write_system_files(mini, tmp_path)
        path = tmp_path / "branches.csv"
        text = path.read_text().replace("7e-05", "0.9", 1)
        path.write_text(text)
        with pytest.raises(SchemaError, match="loss factor"):
            parse_system_files(tmp_path)

    def test_misordered_steps_rejected(self, mini, tmp_path):
        write_system_files(mini, tmp_path)
        path = tmp_path / "profiles.csv"
        lines = path.read_text().splitlines()
        lines[1], lines[2] = lines[2], lines[1]
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(SchemaError, match="steps must run"):
            parse_system_files(tmp_path)

    def test_import_defaults_fill_empty_cells(self, mini, tmp_path):
        write_system_files(mini, tmp_path)
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        manifest["import_defaults"] = {"price": {"natural_gas": 40.0}}
        (tmp_path / "manifest.json").write_text(json.dumps(manifest))
        nodes = tmp_path / "nodes.csv"
        # blank one natural-gas price cell; the default must restore it
        lines = nodes.read_text().splitlines()
        header = lines[0].split(",")
        col = header.index("import_price_natural_gas")
        cells = lines[1].split(",")
        cells[col] = ""
        lines[1] = ",".join(cells)
        nodes.write_text("\n".join(lines) + "\n")
        loaded = parse_system_files(tmp_path)
        from carrieropt.system import Carrier
        assert loaded.node("n1").import_price[Carrier.NATURAL_GAS] == 40.0


class TestShippedFixture:
    def test_fixture_loads_validates_and_digests_stably(self):
        from pathlib import Path
        root = Path(__file__).resolve().parent.parent / "fixtures" / "miniature"
        loaded = parse_system_files(root)
        assert validate_system(loaded) == []
        assert loaded == build_miniature_system(seed=0)
        assert system_digest(loaded) == system_digest(build_miniature_system(seed=0))
