import numpy as np
import pytest
from scipy.integrate import quad

from modules.analytics.laguerre import LaguerreKernel, one_level_density
from modules.analytics.unfolding import (
    build_unfolding,
    invert_unfold,
    renormalized_cluster,
    support_edge,
    unfold,
)
from modules.utils.errors import DomainError


def test_support_edge_beyond_soft_edge():
    assert support_edge(32) > 4 * 32


def test_origin_and_monotonicity(unfolding_8):
    assert unfold(unfolding_8, 0.0) == pytest.approx(0.0, abs=1e-15)
    omega = unfold(unfolding_8, np.linspace(0.0, 60.0, 300))
    assert np.all(np.diff(omega) >= 0.0)


def test_matches_direct_integral(kernel_8, unfolding_8):
    for eps in (0.05, 5.0, 25.0):
        expected, _ = quad(lambda e: one_level_density(kernel_8, e), 0.0, eps, limit=200, epsabs=1e-13)
        assert unfold(unfolding_8, eps) == pytest.approx(expected, abs=1e-9)


@pytest.mark.parametrize("N", [8, 32])
def test_unfolded_density_is_flat(N, request):
    unfolding = request.getfixturevalue(f"unfolding_{N}")
    u, omega = unfolding.u_grid, unfolding.omega_grid
    mid = 0.5 * (u[1:] + u[:-1])
    density = one_level_density(LaguerreKernel(N), mid**2)
    # 展开后能级密度 σ_N · dε/dω 处处为 1
    flatness = 2.0 * mid * density * np.diff(u) / np.diff(omega)
    mask = density > 1e-3
    assert mask.sum() > 100
    np.testing.assert_allclose(flatness[mask], 1.0, rtol=5e-4)


def test_beyond_table_saturates_at_N(unfolding_8):
    assert unfold(unfolding_8, 10.0 * unfolding_8.eps_max) == pytest.approx(8.0, abs=1e-8)


def test_inverse(unfolding_32):
    eps = np.array([0.01, 1.0, 10.0, 50.0, 120.0])
    back = invert_unfold(unfolding_32, unfold(unfolding_32, eps))
    np.testing.assert_allclose(back, eps, rtol=1e-9)


def test_inverse_endpoints(unfolding_8):
    assert invert_unfold(unfolding_8, 0.0) == 0.0
    assert invert_unfold(unfolding_8, 8.0) > 4 * 8


@pytest.mark.parametrize("omega", [-0.1, 8.5])
def test_inverse_domain(unfolding_8, omega):
    with pytest.raises(DomainError):
        invert_unfold(unfolding_8, omega)


def test_negative_eps(unfolding_8):
    with pytest.raises(DomainError):
        unfold(unfolding_8, -1.0)


def test_table_is_read_only(unfolding_8):
    with pytest.raises(ValueError):
        unfolding_8.omega_grid[0] = 1.0


def test_renormalized_cluster_diagonal(kernel_32, unfolding_32):
    omega = np.array([0.3, 5.0, 16.0, 31.5])
    expected = one_level_density(kernel_32, invert_unfold(unfolding_32, omega))
    np.testing.assert_allclose(
        renormalized_cluster(kernel_32, unfolding_32, omega, omega), expected, rtol=1e-10
    )


def test_renormalized_cluster_decays_in_bulk(kernel_32, unfolding_32):
    near = renormalized_cluster(kernel_32, unfolding_32, 16.0, 16.05)
    far = renormalized_cluster(kernel_32, unfolding_32, 16.0, 19.0)
    assert far < 0.05 * near


def test_renormalized_cluster_checks_N(unfolding_8):
    with pytest.raises(DomainError):
        renormalized_cluster(LaguerreKernel(9), unfolding_8, 1.0, 2.0)
