import numpy as np
import pytest
import scipy.linalg as la
from hypothesis import given, settings, strategies as st

from octagasket.errors import PartialBasis
from octagasket.pde import (
    Measure,
    SpectralBasis,
    delta,
    heat_kernel,
    heat_kernel_matrix,
    heat_solve,
    solution_to_csv,
    wave_solve,
)

from conftest import full_spectrum, laplacian, lowest_spectrum


def basis(m):
    return SpectralBasis(full_spectrum(m))


def rk4_wave(lap, f0, f1, t_end, dt=1e-4):
    u, v = f0.copy(), f1.copy()
    for _ in range(int(round(t_end / dt))):
        def acc(x):
            return -(lap @ x)
        k1u, k1v = v, acc(u)
        k2u, k2v = v + dt / 2 * k1v, acc(u + dt / 2 * k1u)
        k3u, k3v = v + dt / 2 * k2v, acc(u + dt / 2 * k2u)
        k4u, k4v = v + dt * k3v, acc(u + dt * k3u)
        u = u + dt / 6 * (k1u + 2 * k2u + 2 * k3u + k4u)
        v = v + dt / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
    return u, v


def test_partial_basis_rejected():
    with pytest.raises(PartialBasis):
        SpectralBasis(lowest_spectrum(3, 40))


@pytest.mark.parametrize("m", [1, 2])
def test_heat_matches_expm(m):
    f = delta(m, 3) + 0.5 * delta(m, 0)
    times = [0.0, 0.1, 1.0, 5.0]
    sol = heat_solve(basis(m), f, times)
    lap = laplacian(m).toarray()
    for t, u in zip(times, sol.values):
        assert np.allclose(u, la.expm(-t * lap) @ f, atol=1e-9, rtol=0)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_heat_mass_and_positivity(m):
    sol = heat_solve(basis(m), delta(m, 0), np.linspace(0, 3, 7))
    assert np.allclose(sol.mass(), sol.mass()[0], atol=1e-10, rtol=0)
    # far entries at small t fall below double precision; there the check
    # is positivity up to roundoff of the largest entry
    for t in (0.01, 0.1, 0.5, 1.0, 4.0):
        h = heat_kernel_matrix(basis(m), t)
        assert h.min() > -1e-12 * h.max()
    for t in (1.0, 4.0):
        assert heat_kernel_matrix(basis(m), t).min() > 0
        assert heat_kernel(basis(m), t, 0).min() > 0


def test_heat_kernel_limits():
    b = basis(2)
    # h_t -> 1 under the probability normalisation; h_0 = identity / mu
    assert np.allclose(heat_kernel_matrix(b, 200.0), 1.0, atol=1e-10)
    assert np.allclose(heat_kernel_matrix(b, 0.0), 64 * np.eye(64), atol=1e-8)
    with pytest.raises(ValueError):
        heat_kernel(b, -1.0, 0)


def test_semigroup():
    b = basis(2)
    ht = heat_kernel_matrix(b, 0.3)
    hs = heat_kernel_matrix(b, 0.7)
    # convolution in L2(mu)
    assert np.allclose(ht @ hs / 64, heat_kernel_matrix(b, 1.0), atol=1e-10)


def test_projectors():
    b = basis(2)
    total = sum(b.projector(k) for k in range(len(b.groups())))
    assert np.allclose(total, 64 * np.eye(64), atol=1e-9)
    p = b.projector(1)
    assert np.allclose(p @ p / 64, p, atol=1e-9)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_coefficients_roundtrip(seed):
    f = np.random.default_rng(seed).standard_normal(64)
    b = basis(2)
    assert np.allclose(b.synthesize(b.coefficients(f)), f, atol=1e-10)
    # Parseval under mu
    assert np.sum(b.coefficients(f) ** 2) == pytest.approx(Measure(2).integrate(f**2), rel=1e-10)


def test_wave_matches_rk4():
    f0 = delta(1, 0)
    f1 = delta(1, 0) - delta(1, 1)
    sol = wave_solve(basis(1), f0, f1, [1.0])
    u, v = rk4_wave(laplacian(1).toarray(), f0, f1, 1.0)
    assert np.allclose(sol.values[0], u, atol=1e-6)
    assert np.allclose(sol.velocities[0], v, atol=1e-6)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_wave_energy(m):
    rng = np.random.default_rng(m)
    f0, f1 = rng.standard_normal(8**m), rng.standard_normal(8**m)
    sol = wave_solve(basis(m), f0, f1, np.linspace(0, 10, 21))
    e = sol.energy()
    assert np.allclose(e, e[0], rtol=1e-8, atol=0)


def test_wave_zero_mode_drift():
    # constant initial velocity moves the whole graph uniformly
    sol = wave_solve(basis(1), np.zeros(8), np.ones(8), [0.0, 2.0])
    assert np.allclose(sol.values[1], 2.0)
    assert np.allclose(sol.velocities[1], 1.0)


def test_solution_csv():
    text = solution_to_csv([0.0, 0.5], np.array([[1.0, 0.0], [0.25, 0.75]]))
    assert text.splitlines() == ["t,cell_index,value", "0,0,1", "0,1,0", "0.5,0,0.25", "0.5,1,0.75"]
