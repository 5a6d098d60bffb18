import json

import pytest

from lmgc.cli import EXIT_BRIDGE, EXIT_CONFIG, EXIT_OK, main
from lmgc.tensor_io import load_blob


@pytest.fixture()
def blob_file(tmp_path):
    path = tmp_path / "g.f32"
    assert (
        main(
            [
                "synth",
                "--layers", "4000,2000",
                "--scales", "1e-3,1e-2",
                "--sparsity", "0.05",
                "--seed", "3",
                "--out", str(path),
            ]
        )
        == EXIT_OK
    )
    return path


def test_synth_compress_decompress_cycle(tmp_path, blob_file, capsys):
    compressed = tmp_path / "g.lmgc"
    restored = tmp_path / "back.f32"
    assert main(["compress", "--in", str(blob_file), "--out", str(compressed),
                 "--scheme", "hex:space:4", "--model", "order2", "--window", "1024"]) == EXIT_OK
    assert main(["decompress", "--in", str(compressed), "--out", str(restored)]) == EXIT_OK
    assert restored.read_bytes() == blob_file.read_bytes()


def test_synth_spec_file(tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"layer_sizes": [100], "scale_per_layer": [1.0]}))
    out = tmp_path / "s.f32"
    assert main(["synth", "--spec", str(spec), "--seed", "7", "--out", str(out)]) == EXIT_OK
    assert load_blob(out).element_count == 100


def test_inspect_bitstream_and_blob(tmp_path, blob_file, capsys):
    compressed = tmp_path / "g.lmgc"
    main(["compress", "--in", str(blob_file), "--out", str(compressed)])
    capsys.readouterr()
    assert main(["inspect", "--in", str(compressed)]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["kind"] == "bitstream"
    assert doc["scheme"] == "hex:space:4"
    assert main(["inspect", "--in", str(blob_file), "--dump-text", "--limit", "8"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "blob" in out


def test_bench_config_flag_precedence(tmp_path, capsys):
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps({
        "corpus": {"synthetic": [
            {"name": "a", "spec": {"layer_sizes": [1000], "scale_per_layer": [1e-3]}, "seed": 1}
        ]},
        "schemes": ["hex:none"],
        "models": ["order0"],
        "window_sizes": [256],
    }))
    report = tmp_path / "rep.csv"
    sidecar = tmp_path / "rep.json"
    assert main(["bench", "--config", str(grid), "--out", str(report),
                 "--json", str(sidecar), "--models", "order1", "--repeats", "2"]) == EXIT_OK
    doc = json.loads(sidecar.read_text())
    assert doc["config"]["models"] == ["order1"]  # flag beat the config file
    assert doc["config"]["schemes"] == ["hex:none"]  # config beat the default
    assert report.exists()


def test_bridge_unavailable_exit_code(tmp_path, blob_file):
    out = tmp_path / "x.lmgc"
    code = main(["compress", "--in", str(blob_file), "--out", str(out),
                 "--model", "bridge", "--bridge", "127.0.0.1:1"])
    assert code == EXIT_BRIDGE


def test_config_error_exit_code(tmp_path, blob_file):
    out = tmp_path / "x.lmgc"
    assert main(["compress", "--in", str(blob_file), "--out", str(out),
                 "--scheme", "hex:bad:9"]) == EXIT_CONFIG
    assert main(["synth", "--out", str(out)]) == EXIT_CONFIG


def test_decompress_corrupt_stream(tmp_path, blob_file):
    compressed = tmp_path / "g.lmgc"
    main(["compress", "--in", str(blob_file), "--out", str(compressed)])
    data = bytearray(compressed.read_bytes())
    data[60] ^= 0x10
    (tmp_path / "bad.lmgc").write_bytes(bytes(data))
    code = main(["decompress", "--in", str(tmp_path / "bad.lmgc"), "--out", str(tmp_path / "o.f32")])
    assert code in (2, 3)  # digest mismatch or malformed stream, never success
