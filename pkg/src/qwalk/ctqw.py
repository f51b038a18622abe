"""
Continuous-time walks on chains and the XX spin-chain they come from.

A chain Hamiltonian is tridiagonal: real on-site energies ``u_j`` and complex
hoppings ``H[j, j+1]`` (the lower diagonal is the conjugate).

Coupling convention
-------------------
The XX network Hamiltonian ``sum J_ij (X_i X_j + Y_i Y_j)`` taken literally
hops a single excitation with amplitude ``2 J_ij``, while the walk picture
uses ``H_ij = J_ij``. We keep ``H_ij = J_ij`` for the chain and build the
spin model with a ``J/2`` prefactor per bond so both descriptions agree
exactly. ``SpinChainSystem(convention="literal")`` gives the unscaled form.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache, reduce

import numpy as np
from numpy.typing import ArrayLike, NDArray

from qwalk.errors import DimensionMismatch, InvalidParameter, TooLarge
from qwalk.numerics import hermitian_eigendecompose, matrix_exponential_unitary

__all__ = [
    "ChainHamiltonian",
    "SpinChainSystem",
    "christandl_hamiltonian",
    "uniform_chain_hamiltonian",
    "ctqw_evolve",
    "spin_hamiltonian",
    "spin_state",
    "spin_oracle_evolve",
    "single_excitation_amplitudes",
    "total_sz",
    "MAX_SPINS",
    "DENSE_SPIN_LIMIT",
]

MAX_SPINS = 14
# up to this size the oracle exponentiates the full 2^n Hamiltonian
DENSE_SPIN_LIMIT = 10


@dataclass(frozen=True, eq=False)
class ChainHamiltonian:
    """Tridiagonal Hermitian chain Hamiltonian (sites indexed from 0)."""

    diagonal: NDArray[np.float64]
    hopping: NDArray[np.complex128]

    def __post_init__(self) -> None:
        d = np.array(self.diagonal, dtype=float).reshape(-1)
        h = np.array(self.hopping, dtype=np.complex128).reshape(-1)
        if d.size < 1 or h.size != d.size - 1:
            raise InvalidParameter(
                f"need n diagonal and n-1 hopping entries, got {d.size} and {h.size}"
            )
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(h))):
            raise InvalidParameter("Hamiltonian entries must be finite")
        d.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "diagonal", d)
        object.__setattr__(self, "hopping", h)

    @classmethod
    def from_matrix(cls, m: ArrayLike) -> "ChainHamiltonian":
        a = np.asarray(m, dtype=np.complex128)
        return cls(np.diag(a).real, np.diag(a, 1))

    @property
    def n_sites(self) -> int:
        return self.diagonal.size

    def matrix(self) -> NDArray[np.complex128]:
        m = np.diag(self.diagonal.astype(np.complex128))
        idx = np.arange(self.n_sites - 1)
        m[idx, idx + 1] = self.hopping
        m[idx + 1, idx] = self.hopping.conj()
        return m

    def zero_diagonal(self) -> "ChainHamiltonian":
        """Same hoppings with the on-site energies dropped."""
        return ChainHamiltonian(np.zeros(self.n_sites), self.hopping)

    def scaled(self, factor: float) -> "ChainHamiltonian":
        return ChainHamiltonian(factor * self.diagonal, factor * self.hopping)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ChainHamiltonian):
            return NotImplemented
        return np.array_equal(self.diagonal, other.diagonal) and np.array_equal(
            self.hopping, other.hopping
        )

    __hash__ = None  # type: ignore[assignment]


def christandl_hamiltonian(n_sites: int, lam: float) -> ChainHamiltonian:
    """Engineered chain with ``J_n = (lam/2) sqrt(n (n_sites - n))``.

    Transfers site 1 to site ``n_sites`` perfectly at ``t = pi / lam``.
    """
    if n_sites < 2:
        raise InvalidParameter(f"n_sites must be >= 2, got {n_sites}")
    if not lam > 0:
        raise InvalidParameter(f"lambda must be positive, got {lam}")
    n = np.arange(1, n_sites)
    return ChainHamiltonian(np.zeros(n_sites), lam / 2 * np.sqrt(n * (n_sites - n)))


def uniform_chain_hamiltonian(n_sites: int, J: float) -> ChainHamiltonian:
    """Discrete Laplacian chain: hopping ``-J`` and on-site energy ``2J``."""
    if n_sites < 2:
        raise InvalidParameter(f"n_sites must be >= 2, got {n_sites}")
    if J == 0 or not np.isfinite(J):
        raise InvalidParameter(f"J must be finite and non-zero, got {J}")
    return ChainHamiltonian(np.full(n_sites, 2.0 * J), np.full(n_sites - 1, -float(J)))


def ctqw_evolve(h: ChainHamiltonian, initial: ArrayLike, t: float) -> NDArray[np.complex128]:
    """``exp(-i H t) |initial>``."""
    psi = np.asarray(initial, dtype=np.complex128).reshape(-1)
    if psi.size != h.n_sites:
        raise DimensionMismatch(f"state has {psi.size} entries, chain has {h.n_sites} sites")
    if t == 0:
        return psi.copy()
    return matrix_exponential_unitary(h.matrix(), t) @ psi


@dataclass(frozen=True)
class SpinChainSystem:
    """Open XX chain of ``n_spins`` spins with bond couplings ``J_1..J_{n-1}``.

    Basis states are bitmasks with site ``j`` on bit ``j`` (1 = spin up = an
    excitation). ``convention`` is ``"half"`` (bond term ``J/2 (XX+YY)``,
    matching the chain hopping ``J``) or ``"literal"`` (bond term ``J (XX+YY)``).
    """

    n_spins: int
    couplings: tuple[float, ...]
    convention: str = "half"
    sender: int = 0
    receiver: int = -1

    def __post_init__(self) -> None:
        if self.n_spins < 2:
            raise InvalidParameter("need at least two spins")
        if self.n_spins > MAX_SPINS:
            raise TooLarge(f"n_spins={self.n_spins} exceeds the limit of {MAX_SPINS}")
        couplings = tuple(float(j) for j in self.couplings)
        if len(couplings) != self.n_spins - 1:
            raise InvalidParameter(
                f"expected {self.n_spins - 1} couplings, got {len(couplings)}"
            )
        if self.convention not in ("half", "literal"):
            raise InvalidParameter(f"unknown convention {self.convention!r}")
        object.__setattr__(self, "couplings", couplings)
        object.__setattr__(self, "sender", self.sender % self.n_spins)
        object.__setattr__(self, "receiver", self.receiver % self.n_spins)

    @classmethod
    def from_chain(cls, h: ChainHamiltonian, **kw) -> "SpinChainSystem":
        if np.any(h.diagonal != 0) or np.any(h.hopping.imag != 0):
            raise InvalidParameter("only real, zero-diagonal chains map onto an XX chain")
        return cls(h.n_sites, tuple(h.hopping.real), **kw)

    @property
    def bond_prefactor(self) -> float:
        return 0.5 if self.convention == "half" else 1.0

    def hopping_chain(self) -> ChainHamiltonian:
        """The single-excitation Hamiltonian this spin chain reduces to."""
        j = np.asarray(self.couplings) * (2 * self.bond_prefactor)
        return ChainHamiltonian(np.zeros(self.n_spins), j)


_PX = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_PY = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)


def _site_operator(op: NDArray, site: int, n: int) -> NDArray[np.complex128]:
    # kron order puts site n-1 on the most significant bit
    factors = [op if k == site else np.eye(2) for k in reversed(range(n))]
    return reduce(np.kron, factors)


def spin_hamiltonian(system: SpinChainSystem) -> NDArray[np.complex128]:
    """Full ``2^n x 2^n`` XX Hamiltonian assembled from Pauli tensor products."""
    n = system.n_spins
    if n > DENSE_SPIN_LIMIT:
        raise TooLarge(f"dense 2^n assembly is limited to {DENSE_SPIN_LIMIT} spins")
    h = np.zeros((2**n, 2**n), dtype=np.complex128)
    for j, coupling in enumerate(system.couplings):
        pref = system.bond_prefactor * coupling
        for p in (_PX, _PY):
            h += pref * (_site_operator(p, j, n) @ _site_operator(p, j + 1, n))
    return h


@lru_cache(maxsize=8)
def _dense_eigensystem(system: SpinChainSystem):
    es = hermitian_eigendecompose(spin_hamiltonian(system))
    return es.eigenvalues.real, es.eigenvectors


def _sector_hamiltonian(system: SpinChainSystem) -> NDArray[np.complex128]:
    # vacuum (index 0) plus the n single-excitation states (index k+1 <-> bit k)
    n = system.n_spins
    h = np.zeros((n + 1, n + 1), dtype=np.complex128)
    for j, coupling in enumerate(system.couplings):
        # (XX + YY) swaps |..01..> and |..10..> with amplitude 2
        h[j + 1, j + 2] = h[j + 2, j + 1] = 2 * system.bond_prefactor * coupling
    return h


def spin_state(
    system: SpinChainSystem, alpha: complex, beta: complex, t: float
) -> NDArray[np.complex128]:
    """Full ``2^n`` state at time ``t`` starting from
    ``(alpha|up> + beta|down>)_sender (x) |down ... down>``."""
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1.0) > 1e-10:
        raise InvalidParameter("|alpha|^2 + |beta|^2 must equal 1")
    n = system.n_spins
    if n <= DENSE_SPIN_LIMIT:
        psi0 = np.zeros(2**n, dtype=np.complex128)
        psi0[0] = beta
        psi0[1 << system.sender] = alpha
        w, v = _dense_eigensystem(system)
        return v @ (np.exp(-1j * w * t) * (v.conj().T @ psi0))
    c0 = np.zeros(n + 1, dtype=np.complex128)
    c0[0] = beta
    c0[system.sender + 1] = alpha
    c = matrix_exponential_unitary(_sector_hamiltonian(system), t) @ c0
    psi = np.zeros(2**n, dtype=np.complex128)
    psi[0] = c[0]
    psi[1 << np.arange(n)] = c[1:]
    return psi


def single_excitation_amplitudes(psi: ArrayLike, n_spins: int) -> NDArray[np.complex128]:
    """Amplitudes of the basis states with exactly one spin up, ordered by site."""
    psi = np.asarray(psi)
    return psi[1 << np.arange(n_spins)]


def total_sz(psi: ArrayLike, n_spins: int) -> float:
    """``<sum_j Z_j>`` with up = +1."""
    p = np.abs(np.asarray(psi)) ** 2
    b = np.arange(p.size)
    ups = np.array([bin(x).count("1") for x in b])
    return float(np.sum(p * (2 * ups - n_spins)))


def _receiver_density(psi: NDArray, n: int, r: int) -> NDArray[np.complex128]:
    # axes: (bits above r, bit r, bits below r)
    a = psi.reshape(2 ** (n - 1 - r), 2, 2**r)
    return np.einsum("aib,ajb->ij", a, a.conj())


def spin_oracle_evolve(
    system: SpinChainSystem, alpha: complex, beta: complex, t: float
) -> tuple[float, NDArray[np.float64]]:
    """State-transfer fidelity at the receiver and the excitation profile.

    Returns
    -------
    fidelity : float
        ``<phi| rho_receiver |phi>`` with ``phi = alpha|up> + beta|down>``.
    distribution : ndarray
        ``|<k|psi(t)>|^2`` for the single-excitation states; sums to ``|alpha|^2``.
    """
    psi = spin_state(system, alpha, beta, t)
    n = system.n_spins
    rho = _receiver_density(psi, n, system.receiver)
    phi = np.array([beta, alpha], dtype=np.complex128)  # basis (down, up)
    fidelity = float(np.real(phi.conj() @ rho @ phi))
    return fidelity, np.abs(single_excitation_amplitudes(psi, n)) ** 2
