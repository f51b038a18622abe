"""
Coined discrete-time quantum walks on even cycles and on square tori.

Basis conventions
-----------------
1D: amplitudes are stored as an ``(N, 2)`` array indexed ``[position, coin]``
with coin 0 = right-mover and coin 1 = left-mover. The flat operator index is
``2 * position + coin``.

2D: amplitudes are ``(side, side, 4)`` indexed ``[x, y, coin]`` with coin
order (+x, -x, +y, -y); the flat index is ``4 * (x * side + y) + coin``.

A single step is coin-then-shift, ``U = S C``. On the cycle, odd positions
stand for chain vertices (vertex k sits at position 2k - 1) and even positions
for the couplings between them; position 0 carries the reversing edge that
cuts the cycle into a finite chain. Chain dynamics are always read off after
an even number of single steps, so the natural time unit is ``U @ U``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from qwalk.errors import DimensionMismatch, InvalidParameter, NotUnitary
from qwalk.numerics import unitarity_residual

__all__ = [
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "RIGHT",
    "LEFT",
    "CoinSpec",
    "CoinProgram",
    "WalkState",
    "TorusWalkState",
    "coin_unitary",
    "vertex_position",
    "build_step_operator",
    "apply_step",
    "apply_double_step",
    "trajectory",
    "evolve",
    "grover_coin",
    "build_torus_step",
    "NAMED_COINS",
    "named_coin",
]

PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
RIGHT, LEFT = 0, 1

_R2 = 1 / np.sqrt(2)
# eigenvectors of the Pauli matrices in the (right, left) coin basis
NAMED_COINS: dict[str, tuple[complex, complex]] = {
    "right": (1.0, 0.0),
    "left": (0.0, 1.0),
    "plus-z": (1.0, 0.0),
    "minus-z": (0.0, 1.0),
    "plus-x": (_R2, _R2),
    "minus-x": (_R2, -_R2),
    "plus-y": (_R2, 1j * _R2),
    "minus-y": (_R2, -1j * _R2),
}

_AXIS_TOL = 1e-12
_NORM_TOL = 1e-10
_Y_AXIS = (0.0, 1.0, 0.0)


@dataclass(frozen=True)
class CoinSpec:
    """One position's coin, ``exp(i*phase) * exp(i*theta * n.sigma)``.

    ``theta`` is the flip angle, ``axis`` the unit rotation axis ``n`` and
    ``phase`` a scalar (potential) phase applied to both coin states.
    """

    theta: float
    axis: tuple[float, float, float] = _Y_AXIS
    phase: float = 0.0

    def __post_init__(self) -> None:
        axis = tuple(float(a) for a in self.axis)
        if len(axis) != 3:
            raise InvalidParameter(f"axis must have 3 components, got {len(axis)}")
        if abs(np.linalg.norm(axis) - 1.0) > _AXIS_TOL:
            raise InvalidParameter(f"axis {axis} is not a unit vector")
        if not (np.isfinite(self.theta) and np.isfinite(self.phase)):
            raise InvalidParameter("theta and phase must be finite")
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "phase", float(self.phase))

    @classmethod
    def identity(cls) -> "CoinSpec":
        return cls(0.0)

    @classmethod
    def reversing(cls) -> "CoinSpec":
        return cls(np.pi / 2)

    def unitary(self) -> NDArray[np.complex128]:
        return coin_unitary(self)


def coin_unitary(spec: CoinSpec) -> NDArray[np.complex128]:
    """2x2 coin matrix ``e^{i phase} (cos(theta) I + i sin(theta) n.sigma)``.

    For the y axis and zero phase this is exactly
    ``[[cos, sin], [-sin, cos]]``: a right-mover becomes
    ``cos|R> - sin|L>`` and a left-mover ``sin|R> + cos|L>``.
    """
    nx, ny, nz = spec.axis
    c, s = np.cos(spec.theta), np.sin(spec.theta)
    # i*s*(n.sigma) written out so the y-axis case has no rounding in the zeros
    m = np.array(
        [
            [c + 1j * s * nz, 1j * s * nx + s * ny],
            [1j * s * nx - s * ny, c - 1j * s * nz],
        ],
        dtype=np.complex128,
    )
    if spec.phase != 0.0:
        m = np.exp(1j * spec.phase) * m
    return m


def named_coin(name: str) -> NDArray[np.complex128]:
    """Coin vector for a name in :data:`NAMED_COINS`."""
    try:
        return np.array(NAMED_COINS[name], dtype=np.complex128)
    except KeyError:
        raise InvalidParameter(
            f"unknown coin {name!r}; choose from {sorted(NAMED_COINS)}"
        ) from None


def vertex_position(k: int) -> int:
    """Cycle position of chain vertex ``k`` (1-based)."""
    return 2 * k - 1


@dataclass(frozen=True)
class CoinProgram:
    """Per-position coins on an even cycle of ``n_positions`` sites."""

    n_positions: int
    specs: tuple[CoinSpec, ...]
    _coins: NDArray[np.complex128] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        n = self.n_positions
        if not isinstance(n, (int, np.integer)) or n < 4 or n % 2:
            raise InvalidParameter(f"n_positions must be an even integer >= 4, got {n!r}")
        specs = tuple(self.specs)
        if len(specs) != n:
            raise InvalidParameter(f"expected {n} coin specs, got {len(specs)}")
        object.__setattr__(self, "n_positions", int(n))
        object.__setattr__(self, "specs", specs)
        coins = np.stack([coin_unitary(s) for s in specs])
        coins.setflags(write=False)
        object.__setattr__(self, "_coins", coins)

    @classmethod
    def from_specs(cls, specs: Sequence[CoinSpec]) -> "CoinProgram":
        return cls(len(specs), tuple(specs))

    @property
    def coins(self) -> NDArray[np.complex128]:
        """Stacked coin matrices, shape ``(N, 2, 2)``."""
        return self._coins

    @property
    def thetas(self) -> NDArray[np.float64]:
        return np.array([s.theta for s in self.specs])

    def replace(self, position: int, spec: CoinSpec) -> "CoinProgram":
        specs = list(self.specs)
        specs[position % self.n_positions] = spec
        return CoinProgram(self.n_positions, tuple(specs))


@dataclass(frozen=True)
class WalkState:
    """Walker state on an N-cycle, amplitudes shaped ``(N, 2)``."""

    amplitudes: NDArray[np.complex128]

    def __post_init__(self) -> None:
        a = np.array(self.amplitudes, dtype=np.complex128)
        if a.ndim == 1:
            if a.size % 2:
                raise DimensionMismatch("flat amplitude vector must have even length")
            a = a.reshape(-1, 2)
        if a.ndim != 2 or a.shape[1] != 2:
            raise DimensionMismatch(f"amplitudes must have shape (N, 2), got {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("amplitudes must be finite")
        norm = float(np.sum(np.abs(a) ** 2))
        if abs(norm - 1.0) > _NORM_TOL:
            raise InvalidParameter(f"state norm {norm!r} differs from 1")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def localized(
        cls, n_positions: int, position: int, coin: ArrayLike = (1.0, 0.0)
    ) -> "WalkState":
        """``|position> (x) (alpha|R> + beta|L>)``; the coin must be normalised."""
        a = np.zeros((n_positions, 2), dtype=np.complex128)
        a[position % n_positions] = np.asarray(coin, dtype=np.complex128)
        return cls(a)

    @property
    def n_positions(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def vector(self) -> NDArray[np.complex128]:
        return self.amplitudes.reshape(-1)

    def probabilities(self) -> NDArray[np.float64]:
        """Position distribution summed over the coin."""
        return np.sum(np.abs(self.amplitudes) ** 2, axis=1)

    def coin_at(self, position: int) -> NDArray[np.complex128]:
        return self.amplitudes[position % self.n_positions].copy()


@dataclass(frozen=True)
class TorusWalkState:
    """Walker state on a ``side x side`` torus with a 4-state coin."""

    amplitudes: NDArray[np.complex128]

    def __post_init__(self) -> None:
        a = np.array(self.amplitudes, dtype=np.complex128)
        if a.ndim != 3 or a.shape[0] != a.shape[1] or a.shape[2] != 4:
            raise DimensionMismatch(f"amplitudes must have shape (L, L, 4), got {a.shape}")
        norm = float(np.sum(np.abs(a) ** 2))
        if abs(norm - 1.0) > _NORM_TOL:
            raise InvalidParameter(f"state norm {norm!r} differs from 1")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def localized(cls, side: int, x: int = 0, y: int = 0, coin: ArrayLike | None = None):
        c = np.full(4, 0.5, dtype=np.complex128) if coin is None else np.asarray(coin)
        a = np.zeros((side, side, 4), dtype=np.complex128)
        a[x % side, y % side] = c
        return cls(a)

    @property
    def side(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def vector(self) -> NDArray[np.complex128]:
        return self.amplitudes.reshape(-1)

    def probabilities(self) -> NDArray[np.float64]:
        return np.sum(np.abs(self.amplitudes) ** 2, axis=2)


def build_step_operator(program: CoinProgram) -> NDArray[np.complex128]:
    """Dense single-step operator ``U = S C`` of size ``2N x 2N``.

    ``C`` is block diagonal with the per-position coins; ``S`` sends
    ``|x, R> -> |x+1, R>`` and ``|x, L> -> |x-1, L>`` (mod N).
    """
    n = program.n_positions
    coins = program.coins
    u = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    x = np.arange(n)
    for c in (RIGHT, LEFT):
        cols = 2 * x + c
        u[2 * ((x + 1) % n) + RIGHT, cols] = coins[:, RIGHT, c]
        u[2 * ((x - 1) % n) + LEFT, cols] = coins[:, LEFT, c]
    return u


def apply_step(amplitudes: ArrayLike, program: CoinProgram) -> NDArray[np.complex128]:
    """Structured single step on an ``(N, 2)`` array: block coin, then index shift."""
    a = np.asarray(amplitudes, dtype=np.complex128)
    if a.shape != (program.n_positions, 2):
        raise DimensionMismatch(
            f"state shape {a.shape} does not match program with {program.n_positions} positions"
        )
    b = np.einsum("xij,xj->xi", program.coins, a)
    out = np.empty_like(b)
    out[:, RIGHT] = np.roll(b[:, RIGHT], 1)
    out[:, LEFT] = np.roll(b[:, LEFT], -1)
    return out


def apply_double_step(state: WalkState, u: ArrayLike) -> WalkState:
    """Return ``U^2 |state>`` for a dense single-step operator ``u``."""
    u = np.asarray(u)
    d = state.vector.size
    if u.shape != (d, d):
        raise DimensionMismatch(f"operator shape {u.shape} does not act on dimension {d}")
    v = u @ (u @ state.vector)
    return WalkState(v.reshape(-1, 2))


def trajectory(
    state: WalkState, program: CoinProgram, double_steps: int
) -> NDArray[np.complex128]:
    """States after 0..double_steps applications of ``U^2``, shape ``(T+1, N, 2)``."""
    if double_steps < 0:
        raise InvalidParameter("double_steps must be >= 0")
    if state.n_positions != program.n_positions:
        raise DimensionMismatch("state and program sizes differ")
    out = np.empty((double_steps + 1, program.n_positions, 2), dtype=np.complex128)
    a = state.amplitudes
    out[0] = a
    for t in range(1, double_steps + 1):
        a = apply_step(apply_step(a, program), program)
        out[t] = a
    return out


def evolve(
    state: WalkState,
    program: CoinProgram,
    double_steps: int,
    *,
    source: int = 1,
    target: int | None = None,
    expected_coin_map: ArrayLike | None = None,
):
    """Run the walk and summarise it as a :class:`~qwalk.trace.TransferTrace`.

    ``source``/``target`` are cycle positions (default 1 and N-1). The
    expected coin map (default identity) defines the ideal arrival state
    used for the coin fidelity column.
    """
    from qwalk.trace import transfer_metrics

    n = program.n_positions
    target = n - 1 if target is None else target
    states = trajectory(state, program, double_steps)
    return transfer_metrics(
        states,
        source=source,
        target=target,
        expected_coin_map=expected_coin_map,
        initial_coin=state.coin_at(source),
    )


def grover_coin(d: int = 4) -> NDArray[np.complex128]:
    """Grover diffusion coin ``2/d J - I``."""
    return np.full((d, d), 2.0 / d, dtype=np.complex128) - np.eye(d)


_TORUS_MOVES = ((1, 0), (-1, 0), (0, 1), (0, -1))


def build_torus_step(side: int, coin4: ArrayLike) -> NDArray[np.complex128]:
    """Dense ``4 L^2`` step operator ``S_2 (I (x) C)`` for a square torus.

    Raises
    ------
    InvalidParameter
        If ``side < 2``.
    NotUnitary
        If ``coin4`` is not a unitary 4x4 matrix (residual > 1e-12).
    """
    if side < 2:
        raise InvalidParameter(f"side must be >= 2, got {side}")
    c = np.asarray(coin4, dtype=np.complex128)
    if c.shape != (4, 4):
        raise DimensionMismatch(f"coin must be 4x4, got {c.shape}")
    res = unitarity_residual(c)
    if res > 1e-12:
        raise NotUnitary(f"coin unitarity residual {res:.3e}")
    dim = 4 * side * side
    u = np.zeros((dim, dim), dtype=np.complex128)
    xs, ys = np.meshgrid(np.arange(side), np.arange(side), indexing="ij")
    xs, ys = xs.ravel(), ys.ravel()
    for out_coin, (dx, dy) in enumerate(_TORUS_MOVES):
        rows = 4 * (((xs + dx) % side) * side + (ys + dy) % side) + out_coin
        for in_coin in range(4):
            cols = 4 * (xs * side + ys) + in_coin
            u[rows, cols] = c[out_coin, in_coin]
    return u
