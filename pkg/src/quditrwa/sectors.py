"""Eigenbasis of the excitation-number operator, split into finite sectors.

The excitation number of a product state |n_1..n_P; m_1..m_K> is

    N = sum_p n_p + sum_k m_k - sum_k M_k,     M_k = (D_k - 1)/2,

which is an integer or a half-integer; it is kept as an exact ``Fraction``.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction

from .model import SystemSpec


class EmptySectorError(ValueError):
    pass


@dataclass(frozen=True, order=False)
class BasisState:
    photons: tuple[int, ...]
    levels: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "photons", tuple(int(n) for n in self.photons))
        object.__setattr__(self, "levels", tuple(int(m) for m in self.levels))

    @property
    def label(self) -> str:
        ns = ",".join(map(str, self.photons))
        ms = ",".join(map(str, self.levels))
        return f"|{ns};{ms}>"

    def __str__(self):
        return self.label


_LABEL = re.compile(r"^\|?\s*([0-9,\s]*);([0-9,\s]*)>?$")


def parse_state(text: str) -> BasisState:
    """Parse ``|n1,..,nP;m1,..,mK>`` (brackets optional)."""
    mt = _LABEL.match(text.strip())
    if not mt:
        raise ValueError(f"cannot parse basis state {text!r}; expected '|n1,..;m1,..>'")

    def ints(s):
        return tuple(int(x) for x in s.replace(" ", "").split(",") if x != "")

    return BasisState(ints(mt.group(1)), ints(mt.group(2)))


def check_state(state: BasisState, spec: SystemSpec) -> None:
    if len(state.photons) != spec.n_resonators or len(state.levels) != spec.n_qudits:
        raise ValueError(
            f"state {state.label} has shape ({len(state.photons)}, {len(state.levels)}), "
            f"device has P={spec.n_resonators}, K={spec.n_qudits}"
        )
    if any(n < 0 for n in state.photons):
        raise ValueError(f"state {state.label}: negative photon number")
    for k, (m, q) in enumerate(zip(state.levels, spec.qudits)):
        if not 0 <= m < q.dimension:
            raise ValueError(f"state {state.label}: level {m} out of range for qudit {k}")


def excitation_number(state: BasisState, spec: SystemSpec) -> Fraction:
    check_state(state, spec)
    return Fraction(sum(state.photons) + sum(state.levels)) - spec.total_spin


def canonical_key(state: BasisState):
    """Sort key of the sector basis.

    More photons first (per-resonator descending); then qudit configurations
    by their sorted level multiset, smallest first, and within one multiset
    the configuration exciting earlier qudits comes first. For two qubits this
    gives |n+1;00>, |n;10>, |n;01>, |n-1;11>; for two qutrits at N = 0 it
    gives |2;00>, |1;10>, |1;01>, |0;11>, |0;20>, |0;02>.
    """
    return (
        -sum(state.photons),
        tuple(-n for n in state.photons),
        tuple(sorted(state.levels, reverse=True)),
        tuple(-m for m in state.levels),
    )


@dataclass(frozen=True)
class Sector:
    N: Fraction
    states: tuple[BasisState, ...]

    @property
    def dimension(self) -> int:
        return len(self.states)

    def index(self, state: BasisState) -> int:
        return self.states.index(state)

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        return iter(self.states)


def _compositions(total: int, parts: int):
    """All tuples of ``parts`` non-negative ints summing to ``total``."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _level_tuples(dims, budget):
    """Qudit level tuples with sum(levels) <= budget."""
    if not dims:
        yield ()
        return
    top = min(dims[0] - 1, budget)
    for m in range(top + 1):
        for rest in _level_tuples(dims[1:], budget - m):
            yield (m,) + rest


def enumerate_sector(N, spec: SystemSpec) -> Sector:
    """All product states with excitation number ``N``, canonically ordered."""
    N = Fraction(N)
    budget = N + spec.total_spin  # photons + levels
    if budget < 0:
        raise EmptySectorError(f"N = {N} is below the minimum excitation number {spec.n_min}")
    if budget.denominator != 1:
        raise EmptySectorError(
            f"N = {N} is not reachable: excitation numbers are {spec.n_min} + integer"
        )
    budget = int(budget)
    dims = [q.dimension for q in spec.qudits]
    states = []
    for levels in _level_tuples(dims, budget):
        for photons in _compositions(budget - sum(levels), spec.n_resonators):
            states.append(BasisState(photons, levels))
    states.sort(key=canonical_key)
    return Sector(N, tuple(states))


def sector_range(n_max, spec: SystemSpec) -> list[Fraction]:
    n_max = Fraction(n_max)
    if n_max < spec.n_min:
        raise EmptySectorError(f"N_max = {n_max} is below the minimum {spec.n_min}")
    count = int((n_max - spec.n_min) // 1) + 1
    return [spec.n_min + i for i in range(count)]


def sector_dimensions(n_max, spec: SystemSpec) -> list[tuple[Fraction, int]]:
    return [(N, enumerate_sector(N, spec).dimension) for N in sector_range(n_max, spec)]


def truncated_basis(spec: SystemSpec, n_cut: int) -> list[BasisState]:
    """Every product state with n_p <= n_cut, ordered by N then canonically."""
    photon_sets = itertools.product(range(n_cut + 1), repeat=spec.n_resonators)
    level_sets = list(itertools.product(*(range(q.dimension) for q in spec.qudits)))
    states = [BasisState(ns, ms) for ns in photon_sets for ms in level_sets]
    states.sort(key=lambda s: (sum(s.photons) + sum(s.levels), canonical_key(s)))
    return states
