import numpy as np
import pytest

from modules.orchestrator.cli import EXIT_CONFIG, EXIT_FAILURE, EXIT_OK, main
from modules.statistics.ensemble import read_ensemble


def test_rmt_sample(tmp_path):
    out = tmp_path / "lue.txt"
    argv = ["rmt-sample", "--N", "4", "--count", "30", "--seed", "2", "--out", str(out)]
    assert main(argv) == EXIT_OK
    ens = read_ensemble(out)
    assert ens.spectra.shape == (30, 4)
    assert ens.metadata.seed == 2


def test_rmt_sample_fixed_trace(tmp_path):
    out = tmp_path / "ft.txt"
    argv = ["rmt-sample", "--N", "4", "--count", "10", "--fixed-trace", "--out", str(out)]
    assert main(argv) == EXIT_OK
    np.testing.assert_allclose(read_ensemble(out).spectra.sum(axis=1), 16.0)


def test_simulate_is_reproducible(tmp_path):
    outputs = []
    for name in ("a.txt", "b.txt"):
        out = tmp_path / name
        argv = [
            "simulate", "--N", "8", "--count", "3", "--burn-in", "2", "--stride", "1",
            "--seed", "5", "--out", str(out), "--entropy-out", str(tmp_path / "s.tsv"),
        ]
        assert main(argv) == EXIT_OK
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]


def test_simulate_then_analyze(tmp_path):
    ens = tmp_path / "sim.txt"
    argv = ["simulate", "--N", "8", "--count", "4", "--burn-in", "3", "--out", str(ens)]
    assert main(argv) == EXIT_OK
    table = tmp_path / "r1.tsv"
    argv = ["analyze", "--ensemble", str(ens), "--analysis", "r1", "--out", str(table)]
    assert main(argv) == EXIT_OK
    assert table.exists()


def test_entropy(tmp_path):
    out = tmp_path / "e.tsv"
    assert main(["entropy", "--N", "8", "--steps", "3", "--out", str(out)]) == EXIT_OK
    rows = [line for line in out.read_text().splitlines() if not line.startswith("#")]
    assert len(rows) == 4


def test_odd_lattice_is_config_error(tmp_path, capsys):
    code = main(["simulate", "--N", "7", "--count", "2", "--out", str(tmp_path / "x.txt")])
    assert code == EXIT_CONFIG
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1


def test_invalid_value_is_config_error(tmp_path):
    assert main(["rmt-sample", "--count", "0", "--out", str(tmp_path / "x.txt")]) == EXIT_CONFIG


def test_unknown_preset(tmp_path):
    assert main(["rmt-sample", "--preset", "nonexistent"]) == EXIT_CONFIG


def test_missing_ensemble(tmp_path, capsys):
    code = main(["analyze", "--ensemble", str(tmp_path / "missing.txt")])
    assert code == EXIT_FAILURE
    assert capsys.readouterr().err.startswith("错误")


def test_dimension_mismatch(tmp_path):
    ens = tmp_path / "lue.txt"
    main(["rmt-sample", "--N", "4", "--count", "10", "--out", str(ens)])
    assert main(["analyze", "--ensemble", str(ens), "--N", "6"]) == EXIT_FAILURE


def test_config_file_and_flag_precedence(tmp_path):
    config = tmp_path / "run.yaml"
    config.write_text("N: 4\ncount: 50\nmaster_seed: 9\n", encoding="utf-8")
    out = tmp_path / "lue.txt"
    argv = ["rmt-sample", "--config", str(config), "--count", "5", "--out", str(out)]
    assert main(argv) == EXIT_OK
    ens = read_ensemble(out)
    assert ens.spectra.shape == (5, 4)
    assert ens.metadata.seed == 9


def test_bad_burn_in_flag():
    with pytest.raises(SystemExit):
        main(["simulate", "--burn-in", "soon"])
