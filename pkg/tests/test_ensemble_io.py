import numpy as np
import pytest

from modules.statistics.ensemble import (
    EnsembleMetadata,
    SpectraEnsemble,
    ensemble_mean_entropy,
    read_ensemble,
    write_ensemble,
)
from modules.utils.errors import EnsembleFormatError

from conftest import lue_ensemble


def simulation_metadata(**kwargs) -> EnsembleMetadata:
    fields = dict(N=2, source="simulation", k1=3.0, k2=2.5, cpp=0.05, burn_in="auto", stride=10)
    fields.update(kwargs)
    return EnsembleMetadata(**fields)


def test_write_read(tmp_path):
    ens = lue_ensemble(6, 20, seed=4)
    path = write_ensemble(ens, tmp_path / "lue.txt")
    loaded = read_ensemble(path)
    assert np.array_equal(loaded.spectra, ens.spectra)
    assert loaded.metadata == ens.metadata


def test_writes_are_byte_identical(tmp_path):
    ens = lue_ensemble(4, 10, seed=1)
    a = write_ensemble(ens, tmp_path / "a.txt").read_bytes()
    b = write_ensemble(ens, tmp_path / "b.txt").read_bytes()
    assert a == b
    assert a.startswith(b"# format_version=1\n")


def test_simulation_header(tmp_path):
    ens = SpectraEnsemble(np.array([[3.0, 1.0], [2.0, 2.0]]), simulation_metadata())
    loaded = read_ensemble(write_ensemble(ens, tmp_path / "sim.txt"))
    assert loaded.metadata.burn_in == "auto"
    assert loaded.metadata.k1 == 3.0
    assert loaded.metadata.count == 2
    assert loaded.metadata.normalized


def test_count_follows_rows():
    ens = SpectraEnsemble(np.array([[3.0, 1.0]]), simulation_metadata(count=7))
    assert ens.metadata.count == 1
    assert len(ens) == 1


class TestValidation:
    def test_trace_checked_for_simulation(self):
        with pytest.raises(EnsembleFormatError):
            SpectraEnsemble(np.array([[3.0, 0.5]]), simulation_metadata())

    def test_trace_free_for_sampler(self):
        meta = EnsembleMetadata(N=2, source="lue-sampler")
        assert len(SpectraEnsemble(np.array([[3.0, 0.5]]), meta)) == 1

    def test_ascending_rejected(self):
        with pytest.raises(EnsembleFormatError):
            SpectraEnsemble(np.array([[1.0, 3.0]]), simulation_metadata())

    def test_negative_rejected(self):
        meta = EnsembleMetadata(N=2, source="lue-sampler")
        with pytest.raises(EnsembleFormatError):
            SpectraEnsemble(np.array([[1.0, -0.5]]), meta)

    def test_wrong_width(self):
        with pytest.raises(EnsembleFormatError):
            SpectraEnsemble(np.ones((2, 3)), EnsembleMetadata(N=2, source="lue-sampler"))


class TestReadErrors:
    def write(self, tmp_path, text):
        path = tmp_path / "bad.txt"
        path.write_text(text, encoding="utf-8")
        return path

    def test_missing_version(self, tmp_path):
        path = self.write(tmp_path, "# N=2\n# source=lue-sampler\n# count=1\n2.0 1.0\n")
        with pytest.raises(EnsembleFormatError):
            read_ensemble(path)

    def test_unknown_version(self, tmp_path):
        path = self.write(tmp_path, "# format_version=2\n# N=2\n# source=lue-sampler\n")
        with pytest.raises(EnsembleFormatError):
            read_ensemble(path)

    def test_short_row(self, tmp_path):
        text = "# format_version=1\n# N=2\n# source=lue-sampler\n# count=1\n2.0\n"
        with pytest.raises(EnsembleFormatError):
            read_ensemble(self.write(tmp_path, text))

    def test_count_mismatch(self, tmp_path):
        text = "# format_version=1\n# N=2\n# source=lue-sampler\n# count=3\n2.0 1.0\n"
        with pytest.raises(EnsembleFormatError):
            read_ensemble(self.write(tmp_path, text))

    def test_unknown_header_key(self, tmp_path):
        text = "# format_version=1\n# N=2\n# source=lue-sampler\n# colour=red\n# count=0\n"
        with pytest.raises(EnsembleFormatError):
            read_ensemble(self.write(tmp_path, text))

    def test_not_a_number(self, tmp_path):
        text = "# format_version=1\n# N=2\n# source=lue-sampler\n# count=1\n2.0 abc\n"
        with pytest.raises(EnsembleFormatError):
            read_ensemble(self.write(tmp_path, text))


def test_mean_entropy_of_flat_spectrum():
    N = 4
    ens = SpectraEnsemble(np.full((3, N), float(N)), simulation_metadata(N=N))
    assert ensemble_mean_entropy(ens) == pytest.approx(np.log(N))
