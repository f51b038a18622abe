"""Time series of source/target occupation for a walk run."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from qwalk.errors import DimensionMismatch, InvalidParameter

__all__ = ["TransferTrace", "transfer_metrics", "first_peak_index"]

# values within this of the maximum count as the maximum (plateaus are exact ties)
PEAK_TIE_TOL = 1e-12


@dataclass(frozen=True)
class TransferTrace:
    """Per-double-step occupation of a source and target position.

    ``coin_fidelity[t]`` is ``|<target, M c0 | psi(t)>|^2``: the overlap of
    the full state with the ideal arrival state, in which the initial coin
    ``c0`` has been mapped by the expected coin map ``M``. It is bounded by
    ``p_target[t]``.
    """

    times: NDArray[np.int64]
    p_source: NDArray[np.float64]
    p_target: NDArray[np.float64]
    p_rest: NDArray[np.float64]
    coin_fidelity: NDArray[np.float64]
    peak_fidelity: float
    peak_time: int
    coin_fidelity_at_peak: float
    source: int = 1
    target: int = -1
    final_state: NDArray[np.complex128] | None = None

    def __len__(self) -> int:
        return len(self.times)

    def closure_residual(self) -> float:
        """Largest deviation of ``p_source + p_target + p_rest`` from one."""
        return float(np.abs(self.p_source + self.p_target + self.p_rest - 1.0).max())

    def to_dict(self) -> dict:
        return {
            "times": [int(t) for t in self.times],
            "p_source": [float(x) for x in self.p_source],
            "p_target": [float(x) for x in self.p_target],
            "p_rest": [float(x) for x in self.p_rest],
            "coin_fidelity": [float(x) for x in self.coin_fidelity],
            "peak_fidelity": float(self.peak_fidelity),
            "peak_time": int(self.peak_time),
            "coin_fidelity_at_peak": float(self.coin_fidelity_at_peak),
            "source": int(self.source),
            "target": int(self.target),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TransferTrace":
        return cls(
            times=np.asarray(d["times"], dtype=np.int64),
            p_source=np.asarray(d["p_source"], dtype=float),
            p_target=np.asarray(d["p_target"], dtype=float),
            p_rest=np.asarray(d["p_rest"], dtype=float),
            coin_fidelity=np.asarray(d["coin_fidelity"], dtype=float),
            peak_fidelity=float(d["peak_fidelity"]),
            peak_time=int(d["peak_time"]),
            coin_fidelity_at_peak=float(d["coin_fidelity_at_peak"]),
            source=int(d["source"]),
            target=int(d["target"]),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TransferTrace):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    __hash__ = None  # type: ignore[assignment]


def first_peak_index(values: ArrayLike, tol: float = PEAK_TIE_TOL) -> int:
    """Earliest index whose value is within ``tol`` of the maximum."""
    v = np.asarray(values, dtype=float)
    return int(np.argmax(v >= v.max() - tol))


def transfer_metrics(
    states: ArrayLike,
    source: int,
    target: int,
    expected_coin_map: ArrayLike | None = None,
    initial_coin: ArrayLike | None = None,
) -> TransferTrace:
    """Summarise a stack of walk states shaped ``(T+1, N, 2)``.

    The peak is the first double step at which the target probability is
    maximal (ties within 1e-12 resolve to the earliest step). The initial
    coin defaults to the normalised coin found at ``source`` in ``states[0]``.
    """
    s = np.asarray(states, dtype=np.complex128)
    if s.ndim != 3 or s.shape[2] != 2:
        raise DimensionMismatch(f"states must have shape (T+1, N, 2), got {s.shape}")
    n = s.shape[1]
    source %= n
    target %= n
    if source == target:
        raise InvalidParameter("source and target must differ")
    m = np.eye(2) if expected_coin_map is None else np.asarray(expected_coin_map)
    if initial_coin is None:
        initial_coin = s[0, source]
    c0 = np.asarray(initial_coin, dtype=np.complex128)
    c0 = c0 / np.linalg.norm(c0)
    ideal = m @ c0

    probs = np.sum(np.abs(s) ** 2, axis=2)
    p_source = probs[:, source]
    p_target = probs[:, target]
    mask = np.ones(n, dtype=bool)
    mask[[source, target]] = False
    p_rest = probs[:, mask].sum(axis=1)
    coin_fid = np.abs(s[:, target] @ ideal.conj()) ** 2

    peak = first_peak_index(p_target)
    return TransferTrace(
        times=np.arange(len(s), dtype=np.int64),
        p_source=p_source,
        p_target=p_target,
        p_rest=p_rest,
        coin_fidelity=coin_fid,
        peak_fidelity=float(p_target[peak]),
        peak_time=peak,
        coin_fidelity_at_peak=float(coin_fid[peak]),
        source=source,
        target=target,
        final_state=s[-1].copy(),
    )
