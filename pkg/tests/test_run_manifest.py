import hashlib

import pytest

from src.errors import SchemaError
from src.utils.run_manifest import RunManifest, Stopwatch, file_sha256, new_run_directory, require_manifest


def test_sha256_of_file(tmp_path):
    path = tmp_path / "input.json"
    path.write_bytes(b"{}\n")
    assert file_sha256(path) == hashlib.sha256(b"{}\n").hexdigest()


def test_manifest_round_trip_and_hash_check(tmp_path):
    source = tmp_path / "network.json"
    source.write_text('{"nodes": []}')
    run_dir = tmp_path / "run"
    manifest = RunManifest(command="place", argv=["place", "--objective", "remdr"])
    manifest.add_input("network", source)
    manifest.add_output(run_dir / "solution.json", run_dir)
    manifest.arguments["objective"] = "remdr"
    with Stopwatch(manifest)("solve"):
        pass
    manifest.write(run_dir)

    loaded = RunManifest.load(run_dir)
    assert loaded == manifest
    assert loaded.outputs == ["solution.json"]
    assert "solve" in loaded.timings
    assert loaded.verify_hashes() == []

    source.write_text('{"nodes": [1]}')
    assert loaded.verify_hashes() == ["network"]
    source.unlink()
    assert loaded.verify_hashes() == ["network"]


def test_run_directories_are_unique(tmp_path):
    first = new_run_directory(tmp_path, "pareto")
    second = new_run_directory(tmp_path, "pareto")
    assert first != second
    assert first.is_dir() and second.is_dir()
    assert first.name.startswith("pareto-")


def test_missing_manifest(tmp_path):
    with pytest.raises(SchemaError):
        require_manifest(tmp_path)
