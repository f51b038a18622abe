"""
Dense complex linear algebra used throughout the package.

Hermitian problems go through LAPACK ``heevd`` (via :func:`numpy.linalg.eigh`).
Unitary problems go through a complex Schur decomposition: for a normal matrix
the Schur factor is diagonal and the Schur vectors are an orthonormal
eigenbasis, which keeps degenerate eigenspaces orthonormal (a general ``geev``
solve does not).

All functions are pure; inputs are never modified.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from qwalk.errors import (
    EigensolverFailure,
    Nonsquare,
    NotHermitian,
    NotUnitary,
)

__all__ = [
    "HERMITIAN_TOL",
    "UNITARY_TOL",
    "RESIDUAL_TOL",
    "DEGENERACY_TOL",
    "EigenSystem",
    "as_square",
    "hermiticity_residual",
    "unitarity_residual",
    "hermitian_eigendecompose",
    "unitary_eigenphases",
    "matrix_exponential_unitary",
    "principal_phase",
    "circular_distance",
    "group_phases",
]

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
RESIDUAL_TOL = 1e-8
# two eigenphases closer than this (on the circle) are treated as one level
DEGENERACY_TOL = 1e-8


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues with their eigenvectors stored as matrix columns.

    For a unitary input ``phases`` holds the principal arguments of the
    eigenvalues; for a Hermitian input it is ``None``.
    """

    eigenvalues: NDArray[np.complex128]
    eigenvectors: NDArray[np.complex128]
    phases: NDArray[np.float64] | None = None

    def __post_init__(self) -> None:
        for arr in (self.eigenvalues, self.eigenvectors, self.phases):
            if arr is not None:
                arr.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def residuals(self, matrix: ArrayLike) -> NDArray[np.float64]:
        """Per-pair max-norm residual ``|A v - lambda v|``."""
        a = np.asarray(matrix)
        r = a @ self.eigenvectors - self.eigenvectors * self.eigenvalues[None, :]
        return np.abs(r).max(axis=0)


def as_square(matrix: ArrayLike, name: str = "matrix") -> NDArray[np.complex128]:
    a = np.asarray(matrix, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise Nonsquare(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def hermiticity_residual(matrix: ArrayLike) -> float:
    a = np.asarray(matrix)
    return float(np.abs(a - a.conj().T).max()) if a.size else 0.0


def unitarity_residual(matrix: ArrayLike) -> float:
    """``max |U^dagger U - I|`` entrywise."""
    a = np.asarray(matrix)
    if a.size == 0:
        return 0.0
    return float(np.abs(a.conj().T @ a - np.eye(a.shape[0])).max())


def principal_phase(z: ArrayLike) -> NDArray[np.float64]:
    """Argument of ``z`` in (-pi, pi]; an exact -pi is mapped to +pi."""
    phi = np.angle(np.asarray(z, dtype=np.complex128))
    return np.where(phi <= -np.pi, np.pi, phi)


def circular_distance(a: ArrayLike, b: ArrayLike) -> NDArray[np.float64]:
    d = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)) % (2 * np.pi)
    return np.minimum(d, 2 * np.pi - d)


def group_phases(
    phases: ArrayLike, tol: float = DEGENERACY_TOL
) -> list[list[int]]:
    """Partition indices of *sorted* phases into circular degeneracy classes.

    Consecutive phases closer than ``tol`` share a class (single linkage);
    the first and last classes are merged when they meet across +-pi.
    """
    p = np.asarray(phases, dtype=float)
    if p.size == 0:
        return []
    if np.any(np.diff(p) < 0):
        raise ValueError("phases must be sorted ascending")
    groups: list[list[int]] = [[0]]
    for i in range(1, p.size):
        if p[i] - p[i - 1] <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    if len(groups) > 1 and (p[0] + 2 * np.pi - p[-1]) <= tol:
        groups[0] = groups.pop() + groups[0]
    return groups


def hermitian_eigendecompose(h: ArrayLike) -> EigenSystem:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    Raises
    ------
    Nonsquare
        If ``h`` is not a square 2-D array.
    NotHermitian
        If ``max|H - H^dagger| > 1e-12``.
    """
    a = as_square(h, "H")
    res = hermiticity_residual(a)
    if res > HERMITIAN_TOL:
        raise NotHermitian(f"max|H - H^dagger| = {res:.3e} exceeds {HERMITIAN_TOL:g}")
    # symmetrise so eigh sees exactly Hermitian input regardless of triangle used
    a = 0.5 * (a + a.conj().T)
    w, v = np.linalg.eigh(a)
    return EigenSystem(eigenvalues=w.astype(np.complex128), eigenvectors=v)


def unitary_eigenphases(u: ArrayLike) -> EigenSystem:
    """Eigendecomposition of a unitary matrix.

    Eigenvalues are returned sorted by phase (ascending, ties by original
    Schur index so the ordering is reproducible), each projected onto the
    unit circle. Eigenvectors are orthonormal even inside degenerate
    eigenspaces.

    Raises
    ------
    NotUnitary
        If ``max|U^dagger U - I| > 1e-10``.
    EigensolverFailure
        If an eigenpair residual exceeds 1e-8.
    """
    a = as_square(u, "U")
    res = unitarity_residual(a)
    if res > UNITARY_TOL:
        raise NotUnitary(f"max|U^dagger U - I| = {res:.3e} exceeds {UNITARY_TOL:g}")
    t, z = scipy.linalg.schur(a, output="complex")
    off = np.abs(np.triu(t, 1)).max() if t.shape[0] > 1 else 0.0
    if off > RESIDUAL_TOL:
        raise EigensolverFailure(f"Schur factor not diagonal (off-diagonal {off:.3e})")
    lam = np.diag(t)
    lam = lam / np.abs(lam)
    phases = principal_phase(lam)
    order = np.argsort(phases, kind="stable")
    system = EigenSystem(
        eigenvalues=np.exp(1j * phases[order]),
        eigenvectors=z[:, order],
        phases=phases[order],
    )
    worst = system.residuals(a).max() if a.size else 0.0
    if worst > RESIDUAL_TOL:
        raise EigensolverFailure(f"eigenpair residual {worst:.3e} exceeds {RESIDUAL_TOL:g}")
    return system


def matrix_exponential_unitary(h: ArrayLike, t: float) -> NDArray[np.complex128]:
    """Return ``exp(-i H t)`` for Hermitian ``H`` via its eigendecomposition."""
    es = hermitian_eigendecompose(h)
    v = es.eigenvectors
    return (v * np.exp(-1j * es.eigenvalues.real * t)[None, :]) @ v.conj().T
