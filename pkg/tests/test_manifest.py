"""Tests for the run manifest."""

import json

import pytest

from snv_qubit import __version__
from snv_qubit.manifest import MANIFEST_NAME, RunManifest, read_manifest


def _manifest(files=()):
    return RunManifest(
        command="levels",
        config_hash="abc123",
        seed=7,
        started="2024-01-01T00:00:00+00:00",
        files=list(files),
    )


class TestRunManifest:
    def test_write_and_read(self, tmp_path):
        (tmp_path / "levels.csv").write_text("x\n")
        assert _manifest(["levels.csv"]).write(tmp_path) == MANIFEST_NAME
        data = read_manifest(tmp_path)
        assert data["command"] == "levels"
        assert data["files"] == ["levels.csv"]
        assert data["seed"] == 7
        assert data["version"] == __version__

    def test_no_temporary_files_left(self, tmp_path):
        _manifest().write(tmp_path)
        assert sorted(p.name for p in tmp_path.iterdir()) == [MANIFEST_NAME]
        json.loads((tmp_path / MANIFEST_NAME).read_text())

    def test_missing_output_rejected(self, tmp_path):
        with pytest.raises(FileNotFoundError, match="missing file rabi.csv"):
            _manifest(["rabi.csv"]).write(tmp_path)
        assert not (tmp_path / MANIFEST_NAME).exists()

    def test_rewrite_replaces(self, tmp_path):
        _manifest().write(tmp_path)
        second = _manifest()
        second.seed = 9
        second.write(tmp_path)
        assert read_manifest(tmp_path)["seed"] == 9
