import numpy as np
import pytest

from modules.analytics.laguerre import LaguerreKernel
from modules.analytics.unfolding import build_unfolding
from modules.sampler.rmt import SamplerConfig, sample_lue_ensemble
from modules.statistics.ensemble import EnsembleMetadata, SpectraEnsemble


@pytest.fixture(autouse=True)
def _isolated_env(monkeypatch, tmp_path):
    monkeypatch.delenv("MLFLOW_TRACKING_URI", raising=False)
    monkeypatch.setenv("ENTANGLE_OUTPUT_DIR", str(tmp_path / "outputs"))
    monkeypatch.setenv("ENTANGLE_N_JOBS", "1")


@pytest.fixture(scope="session")
def kernel_8():
    return LaguerreKernel(8)


@pytest.fixture(scope="session")
def kernel_32():
    return LaguerreKernel(32)


@pytest.fixture(scope="session")
def unfolding_8(kernel_8):
    return build_unfolding(kernel_8)


@pytest.fixture(scope="session")
def unfolding_32(kernel_32):
    return build_unfolding(kernel_32)


def lue_ensemble(N: int, count: int, seed: int, fixed_trace: bool = False) -> SpectraEnsemble:
    cfg = SamplerConfig(N=N, seed=seed, fixed_trace=fixed_trace)
    metadata = EnsembleMetadata(
        N=N, source="lue-sampler", seed=seed, count=count, fixed_trace=fixed_trace
    )
    return SpectraEnsemble(sample_lue_ensemble(cfg, count), metadata)


@pytest.fixture(scope="session")
def lue_8():
    return lue_ensemble(8, 4000, seed=11)


@pytest.fixture(scope="session")
def lue_32():
    return lue_ensemble(32, 2000, seed=7)


def synthetic_metadata(N: int) -> EnsembleMetadata:
    return EnsembleMetadata(N=N, source="synthetic")


def ensemble_from_omegas(unfolding, omegas: np.ndarray) -> SpectraEnsemble:
    """按给定的展开位置构造系综（每行一个谱）"""
    from modules.analytics.unfolding import invert_unfold

    omegas = np.atleast_2d(omegas)
    eps = np.asarray(invert_unfold(unfolding, omegas)).reshape(omegas.shape)
    return SpectraEnsemble(-np.sort(-eps, axis=1), synthetic_metadata(unfolding.N))
