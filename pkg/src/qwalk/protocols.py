"""
Coin programs for state-transfer protocols on an even cycle.

Every builder returns a :class:`~qwalk.walk.CoinProgram` whose position 0
holds the reversing coin, so the cycle behaves as an open chain whose
vertices sit at the odd positions.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from qwalk.ctqw import ChainHamiltonian
from qwalk.errors import DegenerateHoppingWarning, InvalidParameter
from qwalk.walk import CoinProgram, CoinSpec

__all__ = [
    "ConversionResult",
    "christandl_angles",
    "christandl_program",
    "weak_coupling_program",
    "ballistic_program",
    "uniform_program",
    "ctqw_to_dtqw",
    "CONVERSION_MODES",
]

CONVERSION_MODES = ("exact", "combined")
_Y = (0.0, 1.0, 0.0)


def _check_cycle(n_cycle: int, minimum: int) -> int:
    if not isinstance(n_cycle, (int, np.integer)) or n_cycle < minimum or n_cycle % 2:
        raise InvalidParameter(f"n_cycle must be an even integer >= {minimum}, got {n_cycle!r}")
    return int(n_cycle)


def christandl_angles(n_cycle: int, lam: float) -> NDArray[np.float64]:
    """Edge angles ``arctan(1 / (2 lam sqrt(k (N/2 - k))))`` for k = 1..N/2-1.

    This is ``arctan(1 / (2 J_k))`` for the engineered chain with rate ``2 lam``.
    """
    _check_cycle(n_cycle, 6)
    if not lam > 0 or not np.isfinite(lam):
        raise InvalidParameter(f"lambda must be positive and finite, got {lam}")
    k = np.arange(1, n_cycle // 2)
    return np.arctan(1.0 / (2.0 * lam * np.sqrt(k * (n_cycle / 2 - k))))


def christandl_program(n_cycle: int, lam: float, vertex_theta: float = 0.0) -> CoinProgram:
    """Engineered-coupling program: identity vertex coins, mass-like edge coins.

    ``vertex_theta`` sets a common y-rotation at every vertex instead of the
    identity (the default and the only configuration with tested guarantees).
    """
    angles = christandl_angles(n_cycle, lam)
    specs = [CoinSpec(vertex_theta) if x % 2 else CoinSpec(0.0) for x in range(n_cycle)]
    specs[0] = CoinSpec.reversing()
    for k, a in enumerate(angles, start=1):
        specs[2 * k] = CoinSpec(float(a))
    return CoinProgram(n_cycle, tuple(specs))


def weak_coupling_program(
    n_cycle: int,
    theta: float,
    epsilon: float,
    end_axis: tuple[float, float, float] = _Y,
    both_ends: bool = True,
) -> CoinProgram:
    """Uniform coins ``theta`` with nearly reflecting coins next to both ends.

    Positions 2 and N-2 get angle ``pi/2 - epsilon`` about ``end_axis``
    (with ``both_ends=False`` only position 2 uses ``end_axis``; N-2 stays on
    the y axis). ``epsilon = pi/2`` turns the end coins into identities.
    """
    n = _check_cycle(n_cycle, 8)
    if not 0 < epsilon <= np.pi / 2:
        raise InvalidParameter(f"epsilon must lie in (0, pi/2], got {epsilon}")
    if not np.isfinite(theta):
        raise InvalidParameter("theta must be finite")
    specs = [CoinSpec(theta) for _ in range(n)]
    specs[0] = CoinSpec.reversing()
    specs[2] = CoinSpec(np.pi / 2 - epsilon, end_axis)
    specs[n - 2] = CoinSpec(np.pi / 2 - epsilon, end_axis if both_ends else _Y)
    return CoinProgram(n, tuple(specs))


def uniform_program(n_cycle: int, theta: float) -> CoinProgram:
    """Same y-rotation everywhere except the reversing coin at position 0."""
    n = _check_cycle(n_cycle, 4)
    specs = [CoinSpec(theta) for _ in range(n)]
    specs[0] = CoinSpec.reversing()
    return CoinProgram(n, tuple(specs))


def ballistic_program(n_cycle: int) -> CoinProgram:
    """Massless limit: identity coins, so walkers move one site per step."""
    return uniform_program(n_cycle, 0.0)


@dataclass(frozen=True, eq=False)
class ConversionResult:
    """Coin program produced from a chain Hamiltonian, with its raw angles.

    ``mass_angles[k]``, ``vector_potential_angles[k]`` belong to the edge
    between vertices k+1 and k+2 (cycle position ``2(k+1)``);
    ``scalar_angles[j]`` belongs to vertex j+1.
    """

    program: CoinProgram
    mass_angles: NDArray[np.float64]
    vector_potential_angles: NDArray[np.float64]
    scalar_angles: NDArray[np.float64]
    degenerate_edges: tuple[int, ...] = ()
    mode: str = "exact"


def _edge_coin(mass: float, vp: float, mode: str) -> CoinSpec:
    if vp == 0.0:
        return CoinSpec(mass)
    if mode == "combined":
        # single generator  mass*sigma_y - vp*sigma_z
        angle = float(np.hypot(mass, vp))
        return CoinSpec(angle, (0.0, mass / angle, -vp / angle))
    # exp(-i vp Z) exp(i mass Y) exp(-i vp Z)
    #   = cos(mass) cos(2vp) I + i [sin(mass) Y - cos(mass) sin(2vp) Z]
    y = np.sin(mass)
    z = -np.cos(mass) * np.sin(2 * vp)
    s = float(np.hypot(y, z))
    angle = float(np.arctan2(s, np.cos(mass) * np.cos(2 * vp)))
    return CoinSpec(angle, (0.0, y / s, z / s))


def ctqw_to_dtqw(h: ChainHamiltonian, mode: str = "exact") -> ConversionResult:
    """Translate a chain Hamiltonian into a coin program on a cycle of ``2 n_sites``.

    Vertex ``j`` (position ``2j - 1``) gets the scalar phase ``arctan(H_jj)``.
    The edge between vertices ``k`` and ``k + 1`` (position ``2k``) gets a
    mass rotation about y plus a vector-potential rotation about z.

    Parameters
    ----------
    h : ChainHamiltonian
        Chain with at least three sites.
    mode : {"exact", "combined"}
        ``"exact"`` uses the mass angle ``arctan(1 / (2|H_k,k+1|))`` and the
        vector potential ``arg(H_k,k+1) / 2``, arranged as
        ``exp(-i A Z) exp(i m Y) exp(-i A Z)``. The hopping phase is then
        reproduced exactly in the small-angle limit.
        ``"combined"`` uses ``arctan(1 / (2 Re H))`` and
        ``arctan(Im H / (2 Re H))`` inside the single exponential
        ``exp(i (m Y - A Z))``. It agrees with ``"exact"`` for real positive
        hoppings but does not converge to the chain dynamics for complex ones.

    Notes
    -----
    An edge whose relevant hopping part vanishes becomes a reversing coin
    (angle pi/2, vector potential 0); its index is listed in
    ``degenerate_edges`` and a :class:`DegenerateHoppingWarning` is emitted.
    """
    if mode not in CONVERSION_MODES:
        raise InvalidParameter(f"mode must be one of {CONVERSION_MODES}, got {mode!r}")
    n_sites = h.n_sites
    if n_sites < 3:
        raise InvalidParameter("conversion needs at least three sites")
    n_cycle = 2 * n_sites
    hop = h.hopping
    scal = np.arctan(h.diagonal)

    if mode == "exact":
        size = np.abs(hop)
        degenerate = size == 0
        safe = np.where(degenerate, 1.0, size)
        mass = np.where(degenerate, np.pi / 2, np.arctan(1.0 / (2.0 * safe)))
        vp = np.where(degenerate, 0.0, 0.5 * np.angle(hop))
        vp = np.where(vp <= -np.pi / 2, np.pi / 2, vp)
    else:
        re, im = hop.real, hop.imag
        degenerate = re == 0
        safe = np.where(degenerate, 1.0, re)
        mass = np.where(degenerate, np.pi / 2, np.arctan(1.0 / (2.0 * safe)))
        vp = np.where(degenerate, 0.0, np.arctan(im / (2.0 * safe)))

    bad = tuple(int(i) for i in np.flatnonzero(degenerate))
    if bad:
        warnings.warn(
            f"edges {bad} have no usable hopping; mapped to reversing coins",
            DegenerateHoppingWarning,
            stacklevel=2,
        )

    specs: list[CoinSpec] = [CoinSpec(0.0)] * n_cycle
    specs[0] = CoinSpec.reversing()
    for j in range(n_sites):
        specs[2 * j + 1] = CoinSpec(0.0, phase=float(scal[j]))
    for k in range(n_sites - 1):
        specs[2 * k + 2] = _edge_coin(float(mass[k]), float(vp[k]), mode)

    for a in (mass, vp, scal):
        a.setflags(write=False)
    return ConversionResult(
        program=CoinProgram(n_cycle, tuple(specs)),
        mass_angles=mass,
        vector_potential_angles=vp,
        scalar_angles=scal,
        degenerate_edges=bad,
        mode=mode,
    )
