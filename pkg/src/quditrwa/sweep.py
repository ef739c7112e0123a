"""Parameter sweeps over a device and level-crossing analysis."""
from __future__ import annotations

import copy
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import minimize_scalar

from .assembly import assemble_sector
from .eigen import jacobi_eigh
from .model import Explicit, QuditSpec, SpecError, SystemSpec, spec_from_dict, validate
from .sectors import enumerate_sector, sector_range

_TARGETS = [
    (re.compile(r"^qudit\[(\d+)\]\.uniform_shift$"), "uniform_shift"),
    (re.compile(r"^qudit\[(\d+)\]\.transmon\.EJ$"), "transmon_EJ"),
    (re.compile(r"^coupling\[(\d+)\]\[(\d+)\]\.scale$"), "coupling_scale"),
    (re.compile(r"^resonator\[(\d+)\]\.freq$"), "resonator_freq"),
]


@dataclass(frozen=True)
class SweepSpec:
    """``target`` is one of ``qudit[k].uniform_shift``, ``qudit[k].transmon.EJ``,
    ``coupling[p][k].scale`` or ``resonator[p].freq``; the grid is
    ``linspace(start, stop, steps)``.

    ``uniform_shift`` moves level m of qudit k by (m - M_k) * value, which
    detunes every transition of that qudit by ``value``.
    """

    target: str
    start: float
    stop: float
    steps: int
    kind: str = field(init=False)
    index: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        for rx, kind in _TARGETS:
            mt = rx.match(self.target)
            if mt:
                object.__setattr__(self, "kind", kind)
                object.__setattr__(self, "index", tuple(int(x) for x in mt.groups()))
                break
        else:
            raise ValueError(f"unknown sweep target {self.target!r}")
        if int(self.steps) < 2:
            raise ValueError("a sweep needs at least 2 grid points")
        if not self.stop > self.start:
            raise ValueError("sweep grid must be strictly increasing (from < to)")

    def grid(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, int(self.steps))

    @property
    def qudit_index(self):
        return self.index[0] if self.kind in ("uniform_shift", "transmon_EJ") else None


def apply_sweep(device: dict, sweep: SweepSpec, value: float) -> SystemSpec:
    """The device with the sweep target set to ``value``."""
    kind, idx = sweep.kind, sweep.index
    if kind == "transmon_EJ":
        (k,) = idx
        dev = copy.deepcopy(device)
        try:
            q = dev["qudits"][k]
        except (IndexError, KeyError):
            raise SpecError(f"sweep target qudit {k} out of range") from None
        if "transmon" not in q:
            raise SpecError(f"qudit {k} is not given as a transmon; cannot sweep EJ")
        q["transmon"]["EJ"] = float(value)
        return spec_from_dict(dev)
    if kind == "resonator_freq":
        (p,) = idx
        dev = copy.deepcopy(device)
        try:
            dev["resonators"][p]["freq"] = float(value)
        except (IndexError, KeyError):
            raise SpecError(f"sweep target resonator {p} out of range") from None
        return spec_from_dict(dev)
    spec = spec_from_dict(device)
    if kind == "uniform_shift":
        (k,) = idx
        if not 0 <= k < spec.n_qudits:
            raise SpecError(f"sweep target qudit {k} out of range")
        q = spec.qudits[k]
        M = float(q.spin)
        shifted = QuditSpec(tuple(e + (m - M) * value for m, e in enumerate(q.levels)))
        qudits = spec.qudits[:k] + (shifted,) + spec.qudits[k + 1:]
        return validate(SystemSpec(qudits, spec.resonators, spec.couplings))
    p, k = idx
    if not (0 <= p < spec.n_resonators and 0 <= k < spec.n_qudits):
        raise SpecError(f"sweep target coupling [{p}][{k}] out of range")
    rows = [list(r) for r in spec.couplings]
    rows[p][k] = Explicit(tuple(value * g for g in spec.rungs(p, k)))
    return validate(SystemSpec(spec.qudits, spec.resonators, tuple(tuple(r) for r in rows)))


def sector_levels(spec: SystemSpec, N) -> tuple[np.ndarray, np.ndarray]:
    """(sorted eigenvalues, bare diagonal energies in basis order) of one sector."""
    sec = enumerate_sector(N, spec)
    H = assemble_sector(sec, spec).entries
    return jacobi_eigh(H).eigenvalues, np.diag(H).copy()


def _point(args):
    device, sweep, value, sectors = args
    spec = apply_sweep(device, sweep, value)
    out = {}
    for N in sectors:
        out[N] = sector_levels(spec, N)
    k = sweep.qudit_index
    derived = spec.qudits[k].gaps()[0] if k is not None else None
    return out, derived


@dataclass(frozen=True, eq=False)
class SweepResult:
    sweep: SweepSpec
    values: np.ndarray
    derived: np.ndarray | None  # 0-1 transition of the swept qudit
    energies: dict  # N -> (steps, L) sorted eigenvalues
    bare: dict  # N -> (steps, L) basis-state diagonal energies
    labels: dict  # N -> basis labels


def run_sweep(device: dict, sweep: SweepSpec, n_max, jobs: int = 1) -> SweepResult:
    first = apply_sweep(device, sweep, sweep.start)
    sectors = sector_range(Fraction(n_max), first)
    values = sweep.grid()
    tasks = [(device, sweep, float(v), sectors) for v in values]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_point, tasks))
    else:
        results = [_point(t) for t in tasks]
    energies = {N: np.array([r[0][N][0] for r in results]) for N in sectors}
    bare = {N: np.array([r[0][N][1] for r in results]) for N in sectors}
    labels = {N: [s.label for s in enumerate_sector(N, first).states] for N in sectors}
    derived = np.array([r[1] for r in results]) if sweep.qudit_index is not None else None
    return SweepResult(sweep, values, derived, energies, bare, labels)


# --------------------------------------------------------------------------- #
#                              crossing analysis                              #
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class Gap:
    value: float
    gap: float
    pair: tuple[int, int]  # indices into the sorted level list


def grid_min_gap(values: np.ndarray, levels: np.ndarray) -> Gap | None:
    """Smallest adjacent spacing over the grid; None for one-level sectors."""
    if levels.shape[1] < 2:
        return None
    gaps = np.diff(levels, axis=1)
    j, i = np.unravel_index(int(np.argmin(gaps)), gaps.shape)
    return Gap(float(values[j]), float(gaps[j, i]), (int(i), int(i) + 1))


def local_gap_minima(values: np.ndarray, levels: np.ndarray) -> list[Gap]:
    """Interior grid minima of every adjacent-level spacing curve.

    A minimum must sit below its left neighbour by more than rounding noise,
    so flat (uncoupled) spacing curves do not produce spurious entries.
    """
    out = []
    gaps = np.diff(levels, axis=1)
    noise = 1e-10 * max(float(np.abs(levels).max()) if levels.size else 0.0, 1.0)
    for i in range(gaps.shape[1]):
        g = gaps[:, i]
        for j in range(1, len(g) - 1):
            if g[j] < g[j - 1] - noise and g[j] <= g[j + 1] + noise:
                out.append(Gap(float(values[j]), float(g[j]), (i, i + 1)))
    return out


def bare_intersections(values: np.ndarray, bare: np.ndarray) -> list[tuple[float, int, int]]:
    """Grid intervals where two bare (uncoupled) levels change order.

    Returns (interpolated crossing value, state a, state b).
    """
    out = []
    L = bare.shape[1]
    for a in range(L):
        for b in range(a + 1, L):
            d = bare[:, a] - bare[:, b]
            for j in range(len(d) - 1):
                if d[j] == 0.0 and 0 < j:
                    out.append((float(values[j]), a, b))
                elif d[j] * d[j + 1] < 0.0:
                    x = values[j] + (values[j + 1] - values[j]) * d[j] / (d[j] - d[j + 1])
                    out.append((float(x), a, b))
    return out


def refine_gap(device: dict, sweep: SweepSpec, N, pair: tuple[int, int], lo: float, hi: float,
               xatol: float = 1e-12) -> Gap:
    """Minimize the spacing of ``pair`` in sector N over [lo, hi]."""
    i, j = pair

    def gap(x):
        e, _ = sector_levels(apply_sweep(device, sweep, x), N)
        return float(e[j] - e[i])

    res = minimize_scalar(gap, bounds=(lo, hi), method="bounded", options={"xatol": xatol})
    return Gap(float(res.x), float(res.fun), pair)


def gap_report(device: dict, result: SweepResult, refine: bool = True) -> dict:
    """Per sector: refined minimum spacing, avoided crossings and bare intersections."""
    report = {}
    v = result.values
    for N, levels in result.energies.items():
        g = grid_min_gap(v, levels)
        if g is None:
            continue
        if refine:
            j = int(np.searchsorted(v, g.value))
            lo, hi = v[max(j - 1, 0)], v[min(j + 1, len(v) - 1)]
            r = refine_gap(device, result.sweep, N, g.pair, float(lo), float(hi))
            if r.gap < g.gap:
                g = r
        report[N] = {
            "min_gap": g,
            "avoided": local_gap_minima(v, levels),
            "bare": bare_intersections(v, result.bare[N]),
        }
    return report
