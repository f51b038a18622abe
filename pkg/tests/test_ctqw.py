import numpy as np
import pytest

from qwalk.ctqw import (
    ChainHamiltonian,
    SpinChainSystem,
    christandl_hamiltonian,
    ctqw_evolve,
    single_excitation_amplitudes,
    spin_hamiltonian,
    spin_oracle_evolve,
    spin_state,
    total_sz,
    uniform_chain_hamiltonian,
)
from qwalk.errors import DimensionMismatch, InvalidParameter, TooLarge


def site(n, k=0):
    v = np.zeros(n, dtype=complex)
    v[k] = 1
    return v


def test_christandl_couplings():
    np.testing.assert_allclose(christandl_hamiltonian(2, 2.0).hopping, [1.0])
    h = christandl_hamiltonian(4, 1.0)
    np.testing.assert_allclose(h.hopping, [np.sqrt(3) / 2, 1, np.sqrt(3) / 2])
    h = christandl_hamiltonian(11, 0.3).hopping
    np.testing.assert_allclose(h, h[::-1])
    with pytest.raises(InvalidParameter):
        christandl_hamiltonian(4, 0.0)


def test_matrix_is_hermitian():
    h = ChainHamiltonian([0.1, -0.2, 0.3], [1 + 2j, 0.5 - 1j])
    m = h.matrix()
    assert np.abs(m - m.conj().T).max() <= 1e-15
    assert ChainHamiltonian.from_matrix(m) == h


def test_chain_validation():
    with pytest.raises(InvalidParameter):
        ChainHamiltonian([0, 0], [1, 1])
    with pytest.raises(InvalidParameter):
        ChainHamiltonian([0, np.inf], [1])


def test_uniform_chain():
    h = uniform_chain_hamiltonian(3, 1.0)
    np.testing.assert_array_equal(h.diagonal, [2, 2, 2])
    np.testing.assert_array_equal(h.hopping, [-1, -1])
    w1 = np.linalg.eigvalsh(h.matrix())
    w0 = np.linalg.eigvalsh(h.zero_diagonal().matrix())
    np.testing.assert_allclose(w1 - w0, 2, atol=1e-12)
    with pytest.raises(InvalidParameter):
        uniform_chain_hamiltonian(3, 0.0)


def test_evolve_basics():
    h = christandl_hamiltonian(10, 0.5)
    psi = site(10)
    np.testing.assert_allclose(ctqw_evolve(h, psi, 0.0), psi)
    assert abs(ctqw_evolve(h, psi, np.pi / 0.5)[-1]) ** 2 > 1 - 1e-8
    with pytest.raises(DimensionMismatch):
        ctqw_evolve(h, site(9), 1.0)


@pytest.mark.parametrize("hamiltonian", [
    ChainHamiltonian([0, 0], [0.7]),
    uniform_chain_hamiltonian(2, 1.0),
])
def test_two_site_rabi(hamiltonian):
    j = abs(hamiltonian.hopping[0])
    out = ctqw_evolve(hamiltonian, site(2), np.pi / (2 * j))
    assert abs(out[1]) ** 2 == pytest.approx(1, abs=1e-12)


def test_periodicity_of_engineered_chain():
    lam = 0.4
    h = christandl_hamiltonian(9, lam)
    out = ctqw_evolve(h, site(9), 2 * np.pi / lam)
    assert abs(out[0]) ** 2 > 1 - 1e-8


def test_spin_system_validation():
    with pytest.raises(TooLarge):
        SpinChainSystem(15, (1.0,) * 14)
    with pytest.raises(InvalidParameter):
        SpinChainSystem(4, (1.0, 1.0))
    with pytest.raises(InvalidParameter):
        SpinChainSystem(3, (1.0, 1.0), convention="double")


def test_spin_hamiltonian_single_bond():
    # two spins: |01> <-> |10> with amplitude J under the half convention
    h = spin_hamiltonian(SpinChainSystem(2, (0.8,)))
    expected = np.zeros((4, 4))
    expected[1, 2] = expected[2, 1] = 0.8
    np.testing.assert_allclose(h, expected, atol=1e-15)
    literal = spin_hamiltonian(SpinChainSystem(2, (0.8,), convention="literal"))
    np.testing.assert_allclose(literal, 2 * expected, atol=1e-15)


def test_oracle_at_time_zero():
    system = SpinChainSystem(5, (1.0,) * 4)
    f, dist = spin_oracle_evolve(system, 0.0, 1.0, 0.0)
    assert f == pytest.approx(1.0)
    f, dist = spin_oracle_evolve(system, 0.6, 0.8, 0.0)
    np.testing.assert_allclose(dist, [0.36, 0, 0, 0, 0], atol=1e-15)
    # receiver still in |down>, so only the beta part overlaps
    assert f == pytest.approx(0.64)


def test_oracle_perfect_transfer_engineered_chain():
    lam = 0.9
    system = SpinChainSystem.from_chain(christandl_hamiltonian(8, lam))
    f, dist = spin_oracle_evolve(system, 1.0, 0.0, np.pi / lam)
    assert f == pytest.approx(1.0, abs=1e-8)
    assert dist[-1] == pytest.approx(1.0, abs=1e-8)


def test_oracle_state_fidelity_superposition():
    # the relative phase picked up in transit reduces fidelity for superpositions
    lam = 0.9
    system = SpinChainSystem.from_chain(christandl_hamiltonian(4, lam))
    a = b = 1 / np.sqrt(2)
    f, _ = spin_oracle_evolve(system, a, b, np.pi / lam)
    amp = single_excitation_amplitudes(spin_state(system, 1.0, 0.0, np.pi / lam), 4)[-1]
    phase = amp / abs(amp)
    assert f == pytest.approx(abs(0.5 + 0.5 * phase) ** 2, abs=1e-10)


@pytest.mark.parametrize("n", [4, 12])
def test_oracle_matches_chain(n, rng):
    j = rng.uniform(0.3, 1.5, n - 1)
    system = SpinChainSystem(n, tuple(j))
    for t in rng.uniform(0, 10, 5):
        spin = single_excitation_amplitudes(spin_state(system, 1.0, 0.0, t), n)
        walk = ctqw_evolve(ChainHamiltonian(np.zeros(n), j), site(n), t)
        np.testing.assert_allclose(spin, walk, atol=1e-8)


def test_sector_path_agrees_with_dense(rng):
    from qwalk import ctqw

    j = tuple(rng.uniform(0.3, 1.5, 9))
    system = SpinChainSystem(10, j)
    dense = spin_state(system, 0.6, 0.8j, 3.3)
    old = ctqw.DENSE_SPIN_LIMIT
    ctqw.DENSE_SPIN_LIMIT = 5
    try:
        sector = spin_state(system, 0.6, 0.8j, 3.3)
    finally:
        ctqw.DENSE_SPIN_LIMIT = old
    np.testing.assert_allclose(sector, dense, atol=1e-10)


def test_total_sz_conserved(rng):
    system = SpinChainSystem(6, tuple(rng.uniform(0.5, 1, 5)))
    values = [total_sz(spin_state(system, 0.6, 0.8, t), 6) for t in np.linspace(0, 9, 10)]
    np.testing.assert_allclose(values, values[0], atol=1e-10)
    assert values[0] == pytest.approx(0.36 * -4 + 0.64 * -6)


def test_invalid_amplitudes():
    with pytest.raises(InvalidParameter):
        spin_state(SpinChainSystem(3, (1, 1)), 1.0, 1.0, 0.0)
