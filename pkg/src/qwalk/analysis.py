"""
Spectral and dynamical diagnostics for coined walks.

Time is counted in double steps ``U @ U`` throughout; the only exception is
the 2D Grover walk, which has no vertex/edge split and is stepped singly.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from qwalk.ctqw import ChainHamiltonian, christandl_hamiltonian
from qwalk.errors import DimensionMismatch, InvalidParameter
from qwalk.numerics import (
    DEGENERACY_TOL,
    circular_distance,
    group_phases,
    matrix_exponential_unitary,
    unitary_eigenphases,
)
from qwalk.protocols import christandl_program, ctqw_to_dtqw
from qwalk.trace import TransferTrace, first_peak_index, transfer_metrics
from qwalk.walk import (
    CoinProgram,
    WalkState,
    apply_step,
    build_step_operator,
    build_torus_step,
    grover_coin,
    trajectory,
)

__all__ = [
    "SpectrumReport",
    "SweepReport",
    "PopulationReport",
    "TransferTrace",
    "transfer_metrics",
    "double_step_operator",
    "spectrum_report",
    "band_spacing_spread",
    "default_horizon",
    "lambda_sweep",
    "eigenstate_population",
    "grover_degeneracy",
    "grid_hamiltonian",
    "grid_eigenvalue_formula",
    "sector_basis",
    "large_mass_errors",
    "large_mass_check",
    "sector_retention",
    "first_lobe_peak",
    "transfer_time",
    "conversion_error",
    "conversion_convergence",
    "TRANSITION_THRESHOLD",
]

# peak fidelity below which the sweep reports the transfer as broken
TRANSITION_THRESHOLD = 0.9


def double_step_operator(program: CoinProgram) -> NDArray[np.complex128]:
    u = build_step_operator(program)
    return u @ u


# ---------------------------------------------------------------- spectrum


def _gap_containing(levels: NDArray[np.float64], point: float, tol: float) -> float:
    """Length of the empty arc between consecutive levels that contains ``point``."""
    if levels.size == 0:
        return 2 * np.pi
    if np.any(circular_distance(levels, point) <= tol):
        return 0.0
    if levels.size == 1:
        return 2 * np.pi
    # rotate so that `point` sits at 0 and find the first level on either side
    shifted = np.sort((levels - point) % (2 * np.pi))
    return float(2 * np.pi - shifted[-1] + shifted[0])


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    """Eigenphases of a double-step operator and their gap structure."""

    phases: NDArray[np.float64]
    degeneracy_classes: tuple[tuple[int, ...], ...]
    gap_at_zero: float
    gap_at_pi: float

    @property
    def class_sizes(self) -> list[int]:
        return [len(c) for c in self.degeneracy_classes]

    @property
    def levels(self) -> NDArray[np.float64]:
        """One representative phase per degeneracy class, ascending."""
        return np.array([self.phases[c[0]] for c in self.degeneracy_classes])

    def bands(self) -> list[NDArray[np.float64]]:
        """Distinct levels split into the negative and positive half circles.

        Only meaningful when both gaps are open; each band is ascending.
        """
        lv = self.levels
        return [b for b in (lv[lv < 0], lv[lv > 0]) if b.size]

    def to_dict(self) -> dict:
        return {
            "phases": [float(p) for p in self.phases],
            "degeneracy_classes": [list(map(int, c)) for c in self.degeneracy_classes],
            "gap_at_zero": float(self.gap_at_zero),
            "gap_at_pi": float(self.gap_at_pi),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SpectrumReport":
        return cls(
            phases=np.asarray(d["phases"], dtype=float),
            degeneracy_classes=tuple(tuple(c) for c in d["degeneracy_classes"]),
            gap_at_zero=float(d["gap_at_zero"]),
            gap_at_pi=float(d["gap_at_pi"]),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SpectrumReport):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    __hash__ = None  # type: ignore[assignment]


def spectrum_report(u2: ArrayLike, tol: float = DEGENERACY_TOL) -> SpectrumReport:
    """Eigenphase analysis of a unitary (typically ``U @ U``).

    The gap at 0 (resp. pi) is the length of the eigenvalue-free arc that
    contains 0 (resp. pi); it is 0 when an eigenphase sits there and ``2 pi``
    when the spectrum is a single point elsewhere.
    """
    es = unitary_eigenphases(u2)
    phases = np.array(es.phases)
    classes = tuple(tuple(g) for g in group_phases(phases, tol))
    levels = np.array([phases[c[0]] for c in classes])
    return SpectrumReport(
        phases=phases,
        degeneracy_classes=classes,
        gap_at_zero=_gap_containing(levels, 0.0, tol),
        gap_at_pi=_gap_containing(levels, np.pi, tol),
    )


def band_spacing_spread(report: SpectrumReport) -> list[float]:
    """Per band, std / mean of the spacings between consecutive distinct levels.

    A perfectly harmonic (equally spaced) band gives 0.
    """
    out = []
    for band in report.bands():
        if band.size < 3:
            continue
        d = np.diff(band)
        out.append(float(np.std(d) / np.mean(d)))
    return out


# ---------------------------------------------------------------- sweeps


def default_horizon(n_cycle: int, lam: float, margin: float = 0.1) -> int:
    """``h = max(ceil(pi / (2 lam)), N/2)`` double steps plus ``ceil(margin h)``."""
    h = max(math.ceil(np.pi / (2 * lam)), n_cycle // 2)
    return h + math.ceil(margin * h)


@dataclass(frozen=True, eq=False)
class SweepReport:
    lambdas: NDArray[np.float64]
    peak_fidelities: NDArray[np.float64]
    peak_times: NDArray[np.int64]
    horizons: NDArray[np.int64]
    detected_transition: float  # nan when the threshold is never crossed

    def __post_init__(self) -> None:
        n = len(self.lambdas)
        if not (len(self.peak_fidelities) == len(self.peak_times) == len(self.horizons) == n):
            raise DimensionMismatch("sweep arrays must have equal length")

    def to_dict(self) -> dict:
        return {
            "lambdas": [float(x) for x in self.lambdas],
            "peak_fidelities": [float(x) for x in self.peak_fidelities],
            "peak_times": [int(x) for x in self.peak_times],
            "horizons": [int(x) for x in self.horizons],
            "detected_transition": (
                None if np.isnan(self.detected_transition) else float(self.detected_transition)
            ),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SweepReport":
        det = d["detected_transition"]
        return cls(
            lambdas=np.asarray(d["lambdas"], dtype=float),
            peak_fidelities=np.asarray(d["peak_fidelities"], dtype=float),
            peak_times=np.asarray(d["peak_times"], dtype=np.int64),
            horizons=np.asarray(d["horizons"], dtype=np.int64),
            detected_transition=float("nan") if det is None else float(det),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SweepReport):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    __hash__ = None  # type: ignore[assignment]


def _target_series(program: CoinProgram, initial: WalkState, steps: int, target: int):
    a = initial.amplitudes
    out = np.empty(steps + 1)
    out[0] = np.sum(np.abs(a[target]) ** 2)
    for t in range(1, steps + 1):
        a = apply_step(apply_step(a, program), program)
        out[t] = np.sum(np.abs(a[target]) ** 2)
    return out


def _sweep_point(n_cycle: int, lam: float, horizon: int) -> tuple[float, int]:
    program = christandl_program(n_cycle, lam)
    p = _target_series(program, WalkState.localized(n_cycle, 1), horizon, n_cycle - 1)
    i = first_peak_index(p)
    return float(p[i]), i


def lambda_sweep(
    n_cycle: int,
    lambdas: ArrayLike,
    horizon_rule: Callable[[int, float], int] = default_horizon,
    max_workers: int | None = None,
) -> SweepReport:
    """Peak transfer probability from ``|1, right>`` to position N-1 per lambda.

    Each point runs ``horizon_rule(n_cycle, lam)`` double steps. Points are
    independent; ``max_workers > 1`` evaluates them on a thread pool, with
    results kept in input order.
    """
    lams = np.asarray(lambdas, dtype=float)
    if lams.ndim != 1 or lams.size == 0:
        raise InvalidParameter("lambdas must be a non-empty 1-D array")
    if np.any(lams <= 0) or np.any(np.diff(lams) <= 0):
        raise InvalidParameter("lambdas must be positive and strictly ascending")
    horizons = [int(horizon_rule(n_cycle, float(lam))) for lam in lams]
    jobs = list(zip([n_cycle] * lams.size, lams.tolist(), horizons))
    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(lambda j: _sweep_point(*j), jobs))
    else:
        results = [_sweep_point(*j) for j in jobs]
    fid = np.array([r[0] for r in results])
    below = np.flatnonzero(fid < TRANSITION_THRESHOLD)
    return SweepReport(
        lambdas=lams,
        peak_fidelities=fid,
        peak_times=np.array([r[1] for r in results], dtype=np.int64),
        horizons=np.array(horizons, dtype=np.int64),
        detected_transition=float(lams[below[0]]) if below.size else float("nan"),
    )


# ---------------------------------------------------------------- populations


@dataclass(frozen=True, eq=False)
class PopulationReport:
    """Weight of a state in each eigenspace of a unitary, largest first.

    Degenerate eigenvalues are pooled into one eigenspace, so the weights do
    not depend on which basis the eigensolver picked inside it.
    """

    overlaps: NDArray[np.float64]
    phases: NDArray[np.float64]
    multiplicities: NDArray[np.int64]

    def support_count(self, threshold: float = 1e-3) -> int:
        return int(np.sum(self.overlaps >= threshold))

    def top_weight(self, k: int) -> float:
        return float(self.overlaps[:k].sum())

    def to_dict(self) -> dict:
        return {
            "overlaps": [float(x) for x in self.overlaps],
            "phases": [float(x) for x in self.phases],
            "multiplicities": [int(x) for x in self.multiplicities],
        }


def eigenstate_population(u2: ArrayLike, initial: WalkState | ArrayLike) -> PopulationReport:
    es = unitary_eigenphases(u2)
    vec = initial.vector if isinstance(initial, WalkState) else np.asarray(initial).reshape(-1)
    if vec.size != es.dim:
        raise DimensionMismatch(f"state of size {vec.size} vs operator of size {es.dim}")
    c = np.abs(es.eigenvectors.conj().T @ vec) ** 2
    groups = group_phases(es.phases)
    w = np.array([c[g].sum() for g in groups])
    ph = np.array([es.phases[g[0]] for g in groups])
    mult = np.array([len(g) for g in groups], dtype=np.int64)
    order = np.argsort(-w, kind="stable")
    return PopulationReport(overlaps=w[order], phases=ph[order], multiplicities=mult[order])


# ---------------------------------------------------------------- 2D walks


GROVER_SIDES = (2, 4, 8)


def grover_degeneracy(side: int, steps: int = 200, tol: float = DEGENERACY_TOL):
    """Fraction of +-1 eigenvalues of the Grover torus walk and origin trapping.

    Returns
    -------
    fraction_pm1 : float
        Share of eigenphases within ``tol`` of 0 or pi.
    time_avg_origin_prob : float
        Mean origin probability over steps 1..``steps`` from the equal coin
        superposition at the origin.
    """
    if side not in GROVER_SIDES:
        raise InvalidParameter(f"side must be one of {GROVER_SIDES}, got {side}")
    u = build_torus_step(side, grover_coin(4))
    ph = unitary_eigenphases(u).phases
    near = (circular_distance(ph, 0.0) <= tol) | (circular_distance(ph, np.pi) <= tol)
    psi = np.zeros(u.shape[0], dtype=np.complex128)
    psi[:4] = 0.5
    total = 0.0
    for _ in range(steps):
        psi = u @ psi
        total += float(np.sum(np.abs(psi[:4]) ** 2))
    return float(near.mean()), total / steps


def grid_hamiltonian(side: int, mod_j: float, phi: float, a: float) -> NDArray[np.complex128]:
    """Periodic square-grid Hamiltonian, site ``(x, y)`` at index ``x * side + y``.

    Hopping ``|J| e^{i phi}`` from each site to its +x and +y neighbour (plus
    the Hermitian conjugate) and on-site energy ``a``.
    """
    if side < 2:
        raise InvalidParameter(f"side must be >= 2, got {side}")
    n = side * side
    hop = np.zeros((n, n), dtype=np.complex128)
    x, y = np.meshgrid(np.arange(side), np.arange(side), indexing="ij")
    x, y = x.ravel(), y.ravel()
    src = x * side + y
    amp = mod_j * np.exp(1j * phi)
    np.add.at(hop, (((x + 1) % side) * side + y, src), amp)
    np.add.at(hop, (x * side + (y + 1) % side, src), amp)
    return hop + hop.conj().T + a * np.eye(n)


def grid_eigenvalue_formula(side: int, mod_j: float, phi: float, a: float) -> NDArray[np.float64]:
    """``a + 2|J| (cos(phi - 2 pi kx / L) + cos(phi - 2 pi ky / L))`` for all kx, ky."""
    if side < 2:
        raise InvalidParameter(f"side must be >= 2, got {side}")
    k = 2 * np.pi * np.arange(side) / side
    cx = np.cos(phi - k)
    return (a + 2 * mod_j * (cx[:, None] + cx[None, :])).ravel()


# ---------------------------------------------------------------- large mass


def sector_basis(n_cycle: int, sign: int) -> NDArray[np.complex128]:
    """Columns ``(|2k-1, R> + sign * i |2k-1, L>) / sqrt(2)`` for k = 1..N/2."""
    if sign not in (1, -1):
        raise InvalidParameter("sign must be +1 or -1")
    m = n_cycle // 2
    b = np.zeros((2 * n_cycle, m), dtype=np.complex128)
    x = 2 * np.arange(1, m + 1) - 1
    b[2 * x, np.arange(m)] = 1 / np.sqrt(2)
    b[2 * x + 1, np.arange(m)] = sign * 1j / np.sqrt(2)
    return b


def _sector_deviation(u2, basis, h_matrix, sign: int, steps: int, clock: float = 1.0):
    """Max deviation between the walk projected on a sector and ``(sign i)^t e^{-i sign H t}``."""
    m = basis.shape[1]
    c0 = np.zeros(m, dtype=np.complex128)
    c0[0] = 1.0
    step_ref = (sign * 1j) * matrix_exponential_unitary(h_matrix, sign * clock)
    psi = basis[:, 0].copy()
    ref = c0
    worst = 0.0
    for t in range(steps + 1):
        worst = max(worst, float(np.abs(basis.conj().T @ psi - ref).max()))
        psi = u2 @ psi
        ref = step_ref @ ref
    return worst


def large_mass_errors(n_cycle: int, lam: float, t_steps: int) -> dict[int, float]:
    """Deviation per sector between the engineered walk and the matching chain.

    The + sector follows ``i^t exp(-i H t)`` and the - sector
    ``(-i)^t exp(+i H t)``, where ``H`` is the engineered chain of
    ``N/2`` sites at rate ``2 lam`` and one double step is one unit of time.
    """
    u2 = double_step_operator(christandl_program(n_cycle, lam))
    h = christandl_hamiltonian(n_cycle // 2, 2 * lam).matrix()
    return {
        s: _sector_deviation(u2, sector_basis(n_cycle, s), h, s, t_steps) for s in (1, -1)
    }


def large_mass_check(n_cycle: int, lam: float, t_steps: int) -> float:
    """Worst amplitude deviation over both sectors; see :func:`large_mass_errors`."""
    return max(large_mass_errors(n_cycle, lam, t_steps).values())


def sector_retention(n_cycle: int, lam: float, horizon: int | None = None) -> tuple[float, int]:
    """Weight left in the + sector at the transfer peak, starting in ``phi_+(1)``.

    Returns ``(weight, peak_time)``. The default horizon is
    ``2 ceil(pi / (2 lam))`` double steps.
    """
    program = christandl_program(n_cycle, lam)
    horizon = 2 * math.ceil(np.pi / (2 * lam)) if horizon is None else horizon
    basis = sector_basis(n_cycle, 1)
    start = WalkState(basis[:, 0].reshape(-1, 2))
    states = trajectory(start, program, horizon)
    p_target = np.sum(np.abs(states[:, n_cycle - 1]) ** 2, axis=1)
    peak = first_peak_index(p_target)
    weight = float(np.sum(np.abs(basis.conj().T @ states[peak].reshape(-1)) ** 2))
    return weight, peak


# ---------------------------------------------------------------- transfer time


def first_lobe_peak(
    values: ArrayLike, rise: float = 0.9, fall: float = 0.5
) -> tuple[int, float] | None:
    """Peak of the first lobe of ``values``, with hysteresis.

    The lobe opens when ``values`` first reaches ``rise`` and closes at the
    next sample below ``fall``; the two levels keep the fast oscillation
    riding on the slow transfer envelope from splitting a lobe. Returns
    ``None`` if no lobe has closed yet.
    """
    v = np.asarray(values, dtype=float)
    opened = np.flatnonzero(v >= rise)
    if opened.size == 0:
        return None
    closed = np.flatnonzero(v[opened[0] :] < fall)
    if closed.size == 0:
        return None
    end = opened[0] + closed[0]
    i = first_peak_index(v[:end])
    return int(i), float(v[i])


def transfer_time(
    program: CoinProgram,
    initial: WalkState | None = None,
    target: int | None = None,
    max_steps: int = 100_000,
    rise: float = 0.9,
    fall: float = 0.5,
    chunk: int = 1000,
) -> tuple[int, float]:
    """Time and height of the first transfer peak at ``target``.

    See :func:`first_lobe_peak` for the lobe rule. Raises
    :class:`InvalidParameter` if no lobe closes within ``max_steps`` double
    steps.
    """
    n = program.n_positions
    target = n - 1 if target is None else target % n
    state = WalkState.localized(n, 1) if initial is None else initial
    u = build_step_operator(program)
    u2 = u @ u
    psi = state.vector
    series = [float(np.sum(np.abs(psi[2 * target : 2 * target + 2]) ** 2))]
    while len(series) <= max_steps:
        for _ in range(chunk):
            psi = u2 @ psi
            series.append(float(np.sum(np.abs(psi[2 * target : 2 * target + 2]) ** 2)))
        found = first_lobe_peak(series, rise, fall)
        if found is not None:
            return found
    raise InvalidParameter(f"no complete transfer lobe within {max_steps} double steps")


# ---------------------------------------------------------------- conversion


def conversion_error(
    h: ChainHamiltonian, delta: float, total_time: float, mode: str = "exact"
) -> float:
    """Deviation between the converted walk and the chain over ``[0, total_time]``.

    The walk is built from ``delta * H`` so each double step advances the
    chain clock by ``delta``; it runs ``round(total_time / delta)`` double
    steps. The vertex amplitudes of the - sector are compared with
    ``(-i)^t exp(+i delta H t)`` applied to site 1.
    """
    if not delta > 0:
        raise InvalidParameter("delta must be positive")
    result = ctqw_to_dtqw(h.scaled(delta), mode=mode)
    u2 = double_step_operator(result.program)
    steps = int(round(total_time / delta))
    basis = sector_basis(2 * h.n_sites, -1)
    return _sector_deviation(u2, basis, h.matrix(), -1, steps, clock=delta)


def conversion_convergence(
    h: ChainHamiltonian,
    deltas: Sequence[float],
    total_time: float,
    mode: str = "exact",
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Errors for each ``delta`` and the ratios between consecutive errors."""
    errs = np.array([conversion_error(h, d, total_time, mode) for d in deltas])
    return errs, errs[1:] / errs[:-1]
