"""Cyclic Jacobi eigensolver for dense real-symmetric matrices.

Rows are swept in fixed order (p < q, row by row). Each 2x2 rotation uses
the stable tangent t = sign(theta) / (|theta| + sqrt(theta^2 + 1)); the first
three sweeps skip elements below 0.2 * sum|a_pq| / n^2, and from the fifth
sweep on an element that is negligible against both diagonal entries is
zeroed without rotating. Iteration stops once the off-diagonal Frobenius
norm falls to ``tol * ||A||_F``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import sqrt

import numpy as np

from .assembly import SectorMatrix, assemble_sector
from .model import SystemSpec, validate
from .sectors import Sector, enumerate_sector, sector_range


class ConvergenceError(RuntimeError):
    def __init__(self, sweeps, off_norm, target):
        super().__init__(
            f"Jacobi iteration did not converge in {sweeps} sweeps "
            f"(off-diagonal norm {off_norm:.3e}, target {target:.3e})"
        )
        self.sweeps = sweeps
        self.off_norm = off_norm


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Ascending eigenvalues and matching orthonormal eigenvector columns.

    ``eigenvectors[l, nu]`` is the weight of basis state l in eigenstate nu.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0
    off_norm: float = 0.0

    def __len__(self):
        return len(self.eigenvalues)

    def residual(self, A) -> float:
        """||A Q - Q diag(E)||_F."""
        A = np.asarray(A, dtype=float)
        return float(np.linalg.norm(A @ self.eigenvectors - self.eigenvectors * self.eigenvalues))

    def orthonormality_error(self) -> float:
        Q = self.eigenvectors
        return float(np.abs(Q.T @ Q - np.eye(Q.shape[1])).max()) if Q.size else 0.0


def _off_norm(A):
    return sqrt(2.0 * float(np.sum(np.triu(A, 1) ** 2)))


def jacobi_eigh(A, tol: float = 1e-12, max_sweeps: int = 50) -> EigenDecomposition:
    """Diagonalize a real-symmetric matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    A : array_like, shape (n, n)
        Real-symmetric input. It is not modified.
    tol : float
        Stop when the off-diagonal Frobenius norm is at most ``tol * ||A||_F``.
    max_sweeps : int
        Raise :class:`ConvergenceError` if this many sweeps do not suffice.

    Returns
    -------
    EigenDecomposition
        Eigenvalues ascending; each eigenvector's largest-magnitude component
        (the first one, on ties) is positive. Exactly equal eigenvalues are
        ordered by lexicographic comparison of their sign-fixed vectors.
    """
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    n = A.shape[0]
    amax = float(np.abs(A).max()) if n else 0.0
    asym = float(np.abs(A - A.T).max()) if n else 0.0
    if asym > 1e-13 * amax:
        raise ValueError(f"matrix is not symmetric (max |A - A^T| = {asym:.3e})")
    A = 0.5 * (A + A.T)
    V = np.eye(n)
    target = tol * float(np.linalg.norm(A))

    sweeps = 0
    off = _off_norm(A)
    while off > target:
        if sweeps == max_sweeps:
            raise ConvergenceError(sweeps, off, target)
        sweeps += 1
        if sweeps <= 3:
            thresh = 0.2 * float(np.abs(np.triu(A, 1)).sum()) / (n * n)
        else:
            thresh = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                g = 100.0 * abs(apq)
                app, aqq = A[p, p], A[q, q]
                if sweeps > 4 and abs(app) + g == abs(app) and abs(aqq) + g == abs(aqq):
                    A[p, q] = A[q, p] = 0.0
                    continue
                if abs(apq) <= thresh:
                    continue
                h = aqq - app
                if abs(h) + g == abs(h):
                    t = apq / h
                else:
                    theta = 0.5 * h / apq
                    t = 1.0 / (abs(theta) + sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c

                ap = A[:, p].copy()
                aq = A[:, q].copy()
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                A[p, :] = A[:, p]
                A[q, :] = A[:, q]
                A[p, p] = app - t * apq
                A[q, q] = aqq + t * apq
                A[p, q] = A[q, p] = 0.0

                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
        off = _off_norm(A)

    w = np.diag(A).copy()
    for j in range(n):
        i = int(np.argmax(np.abs(V[:, j])))
        if V[i, j] < 0.0:
            V[:, j] = -V[:, j]
    order = sorted(range(n), key=lambda j: (w[j], tuple(V[:, j])))
    return EigenDecomposition(w[order], V[:, order], sweeps, off)


@dataclass(frozen=True, eq=False)
class SectorSpectrum:
    sector: Sector
    matrix: SectorMatrix
    eig: EigenDecomposition

    @property
    def N(self) -> Fraction:
        return self.sector.N

    @property
    def energies(self) -> np.ndarray:
        return self.eig.eigenvalues


def sector_spectrum(N, spec: SystemSpec, tol: float = 1e-12) -> SectorSpectrum:
    sector = enumerate_sector(N, spec)
    mat = assemble_sector(sector, spec)
    return SectorSpectrum(sector, mat, jacobi_eigh(mat.entries, tol=tol))


def spectrum(spec: SystemSpec, n_max, tol: float = 1e-12) -> list[SectorSpectrum]:
    """Eigen-decomposition of every sector from the ground sector up to ``n_max``."""
    spec = validate(spec)
    return [sector_spectrum(N, spec, tol) for N in sector_range(n_max, spec)]
