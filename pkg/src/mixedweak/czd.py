"""Calderon-Zygmund decomposition at height t with respect to v dx.

The descent is the textbook stopping-time argument on the unshifted dyadic
tree: starting from the root (whose v-average must sit below t), a cube is
selected the first time its v-average exceeds t, and siblings keep
subdividing down to single cells.  Single cells are selectable but never
split, so every cell outside the selected set was itself examined; "f <= t
off Omega" therefore holds cell-exactly here, and the floor-exception
reporting in the validator only fires on corrupted inputs.

Averages are computed with ``np.sum`` over value slices (not prefix-sum
differences) so that the v = 1 case makes bit-identical selection decisions
to a plain unweighted reference using ``np.mean``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._errors import DomainError, GridMismatchError, HeightError
from .grid import DyadicInterval, SampledFunction
from .weights import Weight

__all__ = [
    "DecompositionResult",
    "CheckResult",
    "ValidationReport",
    "cz_decompose",
    "validate_decomposition",
]


@dataclass(frozen=True, eq=False)
class DecompositionResult:
    """Stopping cubes, their heights, and the good/bad splitting of f."""

    cubes: list[DyadicInterval]
    averages: list[float]
    g: SampledFunction
    h: list[SampledFunction]
    t: float
    doubling_bound: float


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    slack: float


@dataclass(frozen=True)
class ValidationReport:
    checks: list[CheckResult] = field(default_factory=list)
    floor_exceptions: int = 0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _v_average(fv: np.ndarray, vv: np.ndarray, a: int, b: int) -> float:
    return float(np.sum(fv[a:b]) / np.sum(vv[a:b]))


def cz_decompose(f: SampledFunction, t: float, v: Weight) -> DecompositionResult:
    """Decompose f >= 0 at height t > 0 for the measure v dx.

    Raises :class:`HeightError` when the root average already exceeds t (the
    argument needs somewhere to start below the height).
    """
    if not t > 0.0:
        raise DomainError(f"decomposition height must be positive, got {t}")
    if np.any(f.values < 0.0):
        raise DomainError("decomposition needs f >= 0")
    if v.grid != f.grid:
        raise GridMismatchError("f and v must share a grid")
    grid = f.grid
    vv = v.values
    fv = f.values * vv
    root_avg = _v_average(fv, vv, 0, grid.N)
    if root_avg > t:
        raise HeightError(
            f"root v-average {root_avg:.6g} exceeds the height {t:.6g}; "
            "enlarge the domain or raise t",
            root_average=root_avg,
        )

    selected: list[tuple[int, int]] = []
    averages: list[float] = []
    stack = [(1, 0), (1, 1)] if grid.J >= 1 else []
    while stack:
        j, k = stack.pop()
        cells = grid.N >> j
        a = k * cells
        avg = _v_average(fv, vv, a, a + cells)
        if avg > t:
            selected.append((j, k))
            averages.append(avg)
        elif j < grid.J:
            stack.append((j + 1, 2 * k))
            stack.append((j + 1, 2 * k + 1))

    order = sorted(range(len(selected)), key=lambda i: selected[i])
    cubes = [DyadicInterval(grid, *selected[i]) for i in order]
    averages = [averages[i] for i in order]

    gvals = f.values.copy()
    hs: list[SampledFunction] = []
    ratio = 1.0
    for q, avg in zip(cubes, averages):
        sl = q.cell_slice
        hvals = np.zeros(grid.N, dtype=np.float64)
        hvals[sl] = f.values[sl] - avg
        hs.append(SampledFunction(grid, hvals))
        gvals[sl] = avg
        p = q.parent()
        ratio = max(ratio, float(np.sum(vv[p.cell_slice]) / np.sum(vv[sl])))
    return DecompositionResult(
        cubes=cubes,
        averages=averages,
        g=SampledFunction(grid, gvals),
        h=hs,
        t=float(t),
        doubling_bound=ratio,
    )


def validate_decomposition(
    r: DecompositionResult, f: SampledFunction, v: Weight
) -> ValidationReport:
    """Recompute every structural invariant of a decomposition from scratch.

    Off-Omega cells with f > t that sit next to a selected cube are counted
    as floor exceptions (discretization artifacts at the finest scale) and do
    not fail the report; any other violation does.
    """
    grid = f.grid
    vv = v.values
    fv = f.values * vv
    rel = 1e-12
    checks: list[CheckResult] = []

    member = np.zeros(grid.N, dtype=bool)
    overlap = 0
    for q in r.cubes:
        overlap += int(np.count_nonzero(member[q.cell_slice]))
        member[q.cell_slice] = True
    checks.append(CheckResult("disjoint", overlap == 0, float(overlap)))

    worst = 0.0
    ok = len(r.averages) == len(r.cubes)
    for q, avg in zip(r.cubes, r.averages):
        recomputed = _v_average(fv, vv, q.cell_start, q.cell_stop)
        worst = max(worst, abs(avg - recomputed) / max(abs(recomputed), 1e-300))
        if not (r.t < avg <= r.doubling_bound * r.t * (1.0 + rel)):
            ok = False
    checks.append(CheckResult("height_band", ok and worst <= rel, worst))

    total = r.g.values + sum((h.values for h in r.h), np.zeros(grid.N))
    recon = float(np.max(np.abs(total - f.values))) / max(1.0, float(np.max(np.abs(f.values))))
    checks.append(CheckResult("reconstruction", recon <= rel, recon))

    worst = 0.0
    for q, h in zip(r.cubes, r.h):
        # yardstick is the cube's f-mass (>= t mu(Q) for selected cubes), not
        # the h-mass, which is pure rounding noise for single-cell cubes
        scale = float(np.sum(fv[q.cell_slice]))
        worst = max(worst, abs(float(np.sum(h.values * vv))) / max(scale, 1e-300))
    checks.append(CheckResult("cancellation", worst <= rel, worst))

    ok = True
    for q, h in zip(r.cubes, r.h):
        outside = h.values.copy()
        outside[q.cell_slice] = 0.0
        if np.any(outside != 0.0):
            ok = False
    checks.append(CheckResult("support", ok and len(r.h) == len(r.cubes), 0.0))

    bad = np.flatnonzero(~member & (f.values > r.t * (1.0 + rel)))
    floor_exceptions = 0
    hard = 0
    for i in bad:
        neighbor = (i > 0 and member[i - 1]) or (i + 1 < grid.N and member[i + 1])
        if neighbor:
            floor_exceptions += 1
        else:
            hard += 1
    checks.append(CheckResult("off_omega", hard == 0, float(hard)))

    ok = True
    worst = 0.0
    for q in r.cubes:
        p = q
        while p.j > 0:
            p = p.parent()
            avg = _v_average(fv, vv, p.cell_start, p.cell_stop)
            worst = max(worst, avg / r.t)
            if avg > r.t * (1.0 + rel):
                ok = False
    checks.append(CheckResult("maximality", ok, worst))

    mu_omega = float(np.sum(vv[member])) * grid.h
    bound = float(np.sum(fv)) * grid.h / r.t
    checks.append(
        CheckResult("chebyshev", mu_omega <= bound * (1.0 + rel), mu_omega / max(bound, 1e-300))
    )

    on_omega = r.g.values[member]
    top = float(np.max(on_omega)) / (r.doubling_bound * r.t) if on_omega.size else 0.0
    checks.append(CheckResult("good_part_bound", top <= 1.0 + rel, top))

    return ValidationReport(checks=checks, floor_exceptions=floor_exceptions)
