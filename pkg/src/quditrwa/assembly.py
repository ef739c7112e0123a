"""Dense Hamiltonian blocks of the RWA model, plus a truncated-Fock oracle.

Within a sector the diagonal carries the free energies

    H_aa = sum_k levels_k[m_k] + sum_p w_p (n_p + 1/2)

and the only off-diagonal entries connect states that differ by one photon
in resonator p and one level step (opposite direction) in qudit k:

    <n_p + 1, m_k - 1 | H | n_p, m_k> = sqrt(n_p + 1) * g^{pk}_{m_k - 1, m_k}.

The truncated oracle optionally adds the counter-rotating pair
-(a_p^dag S_-^{pk} + a_p S_+^{pk}), which shifts N by +-2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .model import SystemSpec, validate
from .sectors import BasisState, Sector, check_state, excitation_number, truncated_basis

DEFAULT_MAX_DIMENSION = 6000


class BasisTooLarge(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SectorMatrix:
    sector: Sector
    entries: np.ndarray

    @property
    def N(self) -> Fraction:
        return self.sector.N


@dataclass(frozen=True, eq=False)
class TruncatedFullMatrix:
    basis: tuple[BasisState, ...]
    entries: np.ndarray
    rwa: bool
    n_cut: int
    excitation: tuple[Fraction, ...]

    def complete_sectors(self, spec: SystemSpec) -> list[Fraction]:
        """Excitation numbers whose sector lies entirely inside the truncated basis."""
        top = self.n_cut - spec.total_spin
        return sorted({N for N in self.excitation if N <= top})


def free_energy(state: BasisState, spec: SystemSpec) -> float:
    e = 0.0
    for m, q in zip(state.levels, spec.qudits):
        e += q.levels[m]
    for n, r in zip(state.photons, spec.resonators):
        e += r.freq * (n + 0.5)
    return e


def _raise_photon_lower_level(state: BasisState, spec: SystemSpec):
    """Yield (target_state, amplitude) for every a_p^dag S_+^{pk} move out of ``state``."""
    for k, m in enumerate(state.levels):
        if m == 0:
            continue
        levels = state.levels[:k] + (m - 1,) + state.levels[k + 1:]
        for p, n in enumerate(state.photons):
            g = spec.rungs(p, k)[m - 1]
            if g == 0.0:
                continue
            photons = state.photons[:p] + (n + 1,) + state.photons[p + 1:]
            yield BasisState(photons, levels), g * math.sqrt(n + 1)


def _raise_photon_raise_level(state: BasisState, spec: SystemSpec):
    """Yield (target_state, amplitude) for every a_p^dag S_-^{pk} move (counter-rotating)."""
    for k, m in enumerate(state.levels):
        if m + 1 >= spec.qudits[k].dimension:
            continue
        levels = state.levels[:k] + (m + 1,) + state.levels[k + 1:]
        for p, n in enumerate(state.photons):
            g = spec.rungs(p, k)[m]
            if g == 0.0:
                continue
            photons = state.photons[:p] + (n + 1,) + state.photons[p + 1:]
            yield BasisState(photons, levels), g * math.sqrt(n + 1)


@lru_cache(maxsize=512)
def _assemble_cached(sector: Sector, spec: SystemSpec) -> np.ndarray:
    index = {s: i for i, s in enumerate(sector.states)}
    L = len(sector.states)
    H = np.zeros((L, L))
    for i, s in enumerate(sector.states):
        H[i, i] = free_energy(s, spec)
        # each coupled pair is visited once, from its lower-photon end
        for t, amp in _raise_photon_lower_level(s, spec):
            j = index.get(t)
            if j is None:
                raise ValueError(f"sector N={sector.N} is incomplete: missing {t.label}")
            H[i, j] = amp
            H[j, i] = amp
    H.setflags(write=False)
    return H


def assemble_sector(sector: Sector, spec: SystemSpec) -> SectorMatrix:
    """Real-symmetric Hamiltonian block of one sector, in the sector's basis order."""
    spec = validate(spec)
    for s in sector.states:
        check_state(s, spec)
        if excitation_number(s, spec) != sector.N:
            raise ValueError(f"state {s.label} does not belong to sector N={sector.N}")
    return SectorMatrix(sector, _assemble_cached(sector, spec))


def assemble_truncated_full(
    spec: SystemSpec, n_cut: int, rwa: bool = True, max_dimension: int = DEFAULT_MAX_DIMENSION
) -> TruncatedFullMatrix:
    """Hamiltonian on every product state with n_p <= n_cut.

    With ``rwa=False`` the counter-rotating terms are included with an overall
    minus sign. States whose partner would exceed the cutoff simply lose that
    matrix element.
    """
    if n_cut < 1:
        raise ValueError("n_cut must be at least 1")
    spec = validate(spec)
    dim = (n_cut + 1) ** spec.n_resonators * math.prod(q.dimension for q in spec.qudits)
    if dim > max_dimension:
        raise BasisTooLarge(f"truncated basis has {dim} states (limit {max_dimension})")
    basis = truncated_basis(spec, n_cut)
    index = {s: i for i, s in enumerate(basis)}
    H = np.zeros((dim, dim))
    for i, s in enumerate(basis):
        H[i, i] = free_energy(s, spec)
        for t, amp in _raise_photon_lower_level(s, spec):
            j = index.get(t)
            if j is not None:
                H[i, j] = H[j, i] = amp
        if not rwa:
            for t, amp in _raise_photon_raise_level(s, spec):
                j = index.get(t)
                if j is not None:
                    H[i, j] = H[j, i] = -amp
    H.setflags(write=False)
    exc = tuple(excitation_number(s, spec) for s in basis)
    return TruncatedFullMatrix(tuple(basis), H, rwa, n_cut, exc)


def block_diagonality_check(m: TruncatedFullMatrix, spec: SystemSpec) -> float:
    """Largest |H_ab| over pairs of basis states with different excitation number."""
    N = np.array([float(x) for x in m.excitation])
    cross = N[:, None] != N[None, :]
    if not cross.any():
        return 0.0
    return float(np.abs(m.entries[cross]).max())


def sector_index_map(m: TruncatedFullMatrix, sector: Sector) -> list[int]:
    """Positions of the sector's states inside the truncated basis."""
    index = {s: i for i, s in enumerate(m.basis)}
    return [index[s] for s in sector.states]


def to_csv_rows(mat: SectorMatrix) -> list[list[str]]:
    labels = [s.label for s in mat.sector.states]
    rows = [["state"] + labels]
    for lab, row in zip(labels, mat.entries):
        rows.append([lab] + [format(float(x), ".17g") for x in row])
    return rows

