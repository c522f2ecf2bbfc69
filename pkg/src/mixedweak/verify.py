"""End-to-end harness: both sides of each weak-type inequality over t sweeps.

A run instantiates the configured grid, samples the function/symbol/weight
families, computes the left side (a weighted measure of a superlevel set of
the transformed function) and the right side (a modular integral) across a
log-spaced sweep of heights t, and reports the sup of the ratio together
with the same sup on the twice-coarsened grid.  The unspecified constants in
the inequalities are never hard-coded; refinement stability of the measured
sup-ratio is the acceptance signal.

Weight-hypothesis preflight refuses runs whose estimated constants are
unstable (the run would measure noise), unless forced: forcing is exactly
how the negative controls demonstrate that the harness can tell a failed
hypothesis from a satisfied one.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from types import SimpleNamespace
from typing import NamedTuple

import numpy as np

from ._errors import (
    ConfigurationError,
    DomainError,
    GridMismatchError,
    HypothesisError,
    PreflightError,
    RangeError,
)
from .grid import THIRD_SHIFTS, DyadicScan, Grid, SampledFunction, make_grid, sample
from .maximal import hl_maximal, orlicz_maximal
from .singular import commutator, hilbert
from .weights import ConstantEstimate, Weight, bmo_norm, estimate_Ap, estimate_Ap_u, power_weight
from .young import Identity, LLogL, YoungFunction

__all__ = [
    "ExperimentConfig",
    "InequalityReport",
    "ReportRow",
    "parse_family",
    "sample_f",
    "sample_b",
    "build_weight",
    "build_theorem3_weight",
    "weak_lhs",
    "modular_rhs",
    "preflight_weights",
    "run_base_sawyer",
    "run_theorem1",
    "run_theorem2",
    "run_theorem3",
    "solve_scale_a",
    "theorem3_set_partition",
]


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a verification run needs, with desk-scale defaults."""

    L: float = 8.0
    J: int = 10
    f: str = "indicator a=0 b=1"
    b: str = "log"
    u: str = "power beta=-0.5"
    v: str = "power beta=-0.25"
    theorem: str = "thm1"
    m: int = 1
    r: float = 1.0
    delta: float = 1.0
    beta: float = -2.0
    t_min: float | None = None
    t_max: float | None = None
    steps: int = 33
    j_max: int | None = None
    shifts: tuple[float, ...] = THIRD_SHIFTS
    margin: float = 0.05
    seed: int = 0
    force: bool = False

    def __post_init__(self) -> None:
        if self.steps < 1:
            raise ConfigurationError(f"sweep needs at least one step, got {self.steps}")
        if not (0.0 <= self.margin < 0.5):
            raise ConfigurationError(f"margin must lie in [0, 0.5), got {self.margin}")
        for name in ("t_min", "t_max"):
            val = getattr(self, name)
            if val is not None and not val > 0.0:
                raise ConfigurationError(f"{name} must be positive, got {val}")
        if self.t_min is not None and self.t_max is not None and self.t_min > self.t_max:
            raise ConfigurationError("t_min must not exceed t_max")

    def scan(self) -> DyadicScan:
        return DyadicScan(j_max=self.j_max, shifts=self.shifts)


class ReportRow(NamedTuple):
    t: float
    lhs: float
    rhs: float
    ratio: float
    alt: float | None = None


@dataclass(frozen=True)
class InequalityReport:
    theorem: str
    rows: list[ReportRow]
    sup_ratio: float
    argmax_t: float
    preflight: dict[str, ConstantEstimate]
    refinement_pair: tuple[float, float]
    j_pair: tuple[int, int]
    margin: float
    runtime_s: float
    degenerate_symbol: bool = False
    extras: dict[str, float] = field(default_factory=dict)


# --- family grammar -------------------------------------------------------


def parse_family(spec: str) -> tuple[str, dict[str, str]]:
    """Split "name key=value ..." into the name and its raw parameters."""
    parts = spec.split()
    if not parts:
        raise ConfigurationError("empty family specification")
    params: dict[str, str] = {}
    for token in parts[1:]:
        if "=" not in token:
            raise ConfigurationError(f"family parameter {token!r} is not key=value")
        key, value = token.split("=", 1)
        params[key] = value
    return parts[0], params


def _floats(params: dict[str, str], key: str, default: str) -> list[float]:
    try:
        return [float(tok) for tok in params.get(key, default).split(",")]
    except ValueError as exc:
        raise ConfigurationError(f"cannot parse {key}={params[key]!r}") from exc


def _float(params: dict[str, str], key: str, default: str) -> float:
    vals = _floats(params, key, default)
    if len(vals) != 1:
        raise ConfigurationError(f"{key} takes a single value, got {vals}")
    return vals[0]


def _load_values(grid: Grid, params: dict[str, str]) -> np.ndarray:
    if "path" not in params:
        raise ConfigurationError("custom family needs path=FILE")
    vals = np.loadtxt(params["path"], dtype=np.float64).reshape(-1)
    if vals.size != grid.N:
        raise GridMismatchError(f"file holds {vals.size} samples, grid needs {grid.N}")
    return vals


def sample_f(grid: Grid, spec: str) -> SampledFunction:
    """Input-function families: indicator, bump sum, power cusp, custom file."""
    name, params = parse_family(spec)
    if name == "indicator":
        a, b = _float(params, "a", "0"), _float(params, "b", "1")
        height = _float(params, "height", "1")
        return sample(lambda x: np.where((x >= a) & (x <= b), height, 0.0), grid)
    if name == "bumps":
        centers = _floats(params, "centers", "1.5,-2.0")
        width = _float(params, "width", "8")
        return sample(
            lambda x: sum(np.exp(-width * (x - c) ** 2) for c in centers), grid
        )
    if name == "cusp":
        gamma = _float(params, "gamma", "0.25")
        a, b = _float(params, "a", "0"), _float(params, "b", "1")
        if gamma >= 1.0:
            raise ConfigurationError(f"cusp exponent must be < 1 for integrability, got {gamma}")
        return sample(
            lambda x: np.where((x >= a) & (x <= b), np.abs(x) ** -gamma, 0.0), grid
        )
    if name == "zero":
        return sample(lambda x: 0.0, grid)
    if name == "custom":
        return SampledFunction(grid, _load_values(grid, params))
    raise ConfigurationError(f"unknown f family {name!r}")


def sample_b(grid: Grid, spec: str) -> SampledFunction:
    """Symbol families: log|x|, sawtooth-log, constant, custom file."""
    name, params = parse_family(spec)
    if name == "log":
        return sample(lambda x: np.log(np.abs(x)), grid)
    if name == "sawtoothlog":
        # log of the distance to the nearest integer: BMO with a singularity
        # in every unit cell; never -inf because centers avoid the lattice
        return sample(lambda x: np.log(np.abs(x - np.round(x))), grid)
    if name == "const":
        value = _float(params, "value", "1")
        return sample(lambda x: value + 0.0 * x, grid)
    if name == "custom":
        return SampledFunction(grid, _load_values(grid, params))
    raise ConfigurationError(f"unknown b family {name!r}")


def build_weight(grid: Grid, spec: str) -> Weight:
    """Weight families: power, const, floored indicator bump, custom file."""
    name, params = parse_family(spec)
    if name == "power":
        return power_weight(grid, _float(params, "beta", "0"))
    if name == "const":
        value = _float(params, "value", "1")
        return Weight(sample(lambda x: value + 0.0 * x, grid), family=spec, expr=lambda x: value + 0.0 * x)
    if name == "chibump":
        a, b = _float(params, "a", "-1"), _float(params, "b", "1")
        floor = _float(params, "floor", "1e-3")
        if floor <= 0.0:
            raise ConfigurationError("chibump floor must be positive (weights are positive)")
        expr = lambda x: floor + np.where((x >= a) & (x <= b), 1.0, 0.0)  # noqa: E731
        return Weight(sample(expr, grid), family=spec, expr=expr)
    if name == "custom":
        return Weight(SampledFunction(grid, _load_values(grid, params)), family=spec)
    raise ConfigurationError(f"unknown weight family {name!r}")


# --- inequality sides -----------------------------------------------------


def weak_lhs(
    Tout: SampledFunction, u: Weight, v: Weight, t: float, margin: float = 0.05
) -> float:
    """uv-measure of the margin-interior part of {|Tout / v| > t}."""
    if not t > 0.0:
        raise DomainError(f"level must be positive, got {t}")
    if u.grid != Tout.grid or v.grid != Tout.grid:
        raise GridMismatchError("weak_lhs needs Tout, u, v on one grid")
    grid = Tout.grid
    mask = grid.interior_mask(margin) & (np.abs(Tout.values / v.values) > t)
    return grid.h * float(np.sum(u.values[mask] * v.values[mask]))


def modular_rhs(
    f: SampledFunction,
    phi: YoungFunction,
    u: Weight,
    v: Weight,
    t: float,
    scale: float = 1.0,
) -> float:
    """int phi(scale |f| / t) u v dx by midpoint quadrature."""
    if not t > 0.0:
        raise DomainError(f"level must be positive, got {t}")
    if u.grid != f.grid or v.grid != f.grid:
        raise GridMismatchError("modular_rhs needs f, u, v on one grid")
    args = scale * np.abs(f.values) / t
    return f.grid.h * float(np.sum(phi(args) * u.values * v.values))


def _ratio(lhs: float, rhs: float) -> float:
    if rhs > 0.0:
        return lhs / rhs
    return 0.0 if lhs == 0.0 else math.inf


def _sweep(cfg: ExperimentConfig, f: SampledFunction) -> np.ndarray:
    t_min, t_max = cfg.t_min, cfg.t_max
    if t_min is None or t_max is None:
        absf = np.abs(f.values)
        # the relative floor keeps subnormal far tails (smooth bumps never
        # hit exact zero) from dragging the sweep window off to nowhere
        sig = absf[absf > 1e-12 * float(np.max(absf, initial=0.0))]
        center = float(np.median(sig)) if sig.size else 1.0
        t_min = center * 1e-2 if t_min is None else t_min
        t_max = center * 1e2 if t_max is None else t_max
    if cfg.steps == 1:
        return np.array([t_min])
    return np.geomspace(t_min, t_max, cfg.steps)


def preflight_weights(
    u: Weight, v: Weight, scan: DyadicScan
) -> dict[str, ConstantEstimate]:
    """The membership estimates the two-weight theorems hypothesize."""
    return {
        "A1_u": estimate_Ap(u, 1.0, scan),
        "A1_v": estimate_Ap(v, 1.0, scan),
        "A2_v_wrt_u": estimate_Ap_u(v, u, 2.0, scan),
    }


def _require_hypotheses(estimates: dict[str, ConstantEstimate], force: bool) -> None:
    ok = estimates["A1_u"].stable and (
        estimates["A1_v"].stable or estimates["A2_v_wrt_u"].stable
    )
    if ok or force:
        return
    shown = ", ".join(
        f"{name}={est.value:.4g} ({'stable' if est.stable else 'unstable'})"
        for name, est in estimates.items()
    )
    raise PreflightError(
        f"weight hypotheses not met: {shown}; pass force to run a negative control",
        estimates=estimates,
    )


# --- runners --------------------------------------------------------------


def _instantiate(cfg: ExperimentConfig, J: int) -> SimpleNamespace:
    grid = make_grid(cfg.L, J)
    return SimpleNamespace(
        grid=grid,
        f=sample_f(grid, cfg.f),
        u=build_weight(grid, cfg.u),
        v=build_weight(grid, cfg.v),
        scan=cfg.scan(),
    )


def _require_headroom(cfg: ExperimentConfig) -> None:
    if cfg.J - 2 < 4:
        raise ConfigurationError(
            f"refinement comparison needs J >= 6 so the coarse grid stays valid, got J={cfg.J}"
        )


def _assemble(
    theorem: str,
    cfg: ExperimentConfig,
    rows: list[ReportRow],
    coarse_rows: list[ReportRow],
    preflight: dict[str, ConstantEstimate],
    started: float,
    degenerate: bool = False,
    extras: dict[str, float] | None = None,
) -> InequalityReport:
    sup_fine = max((r.ratio for r in rows), default=0.0)
    sup_coarse = max((r.ratio for r in coarse_rows), default=0.0)
    best = max(range(len(rows)), key=lambda i: rows[i].ratio, default=0)
    return InequalityReport(
        theorem=theorem,
        rows=rows,
        sup_ratio=sup_fine,
        argmax_t=rows[best].t if rows else math.nan,
        preflight=preflight,
        refinement_pair=(sup_coarse, sup_fine),
        j_pair=(cfg.J - 2, cfg.J),
        margin=cfg.margin,
        runtime_s=time.perf_counter() - started,
        degenerate_symbol=degenerate,
        extras=extras or {},
    )


def _base_rows(objs: SimpleNamespace, cfg: ExperimentConfig, ts: np.ndarray) -> list[ReportRow]:
    fv = objs.f * objs.v.fn
    tout = hilbert(fv)
    rows = []
    for t in ts:
        lhs = weak_lhs(tout, objs.u, objs.v, float(t), cfg.margin)
        rhs = modular_rhs(objs.f, Identity(), objs.u, objs.v, float(t))
        rows.append(ReportRow(float(t), lhs, rhs, _ratio(lhs, rhs)))
    return rows


def run_base_sawyer(cfg: ExperimentConfig) -> InequalityReport:
    """Weak (1,1)-type inequality for the plain transform: the m = 0 baseline."""
    started = time.perf_counter()
    _require_headroom(cfg)
    fine = _instantiate(cfg, cfg.J)
    estimates = preflight_weights(fine.u, fine.v, fine.scan)
    _require_hypotheses(estimates, cfg.force)
    ts = _sweep(cfg, fine.f)
    rows = _base_rows(fine, cfg, ts)
    coarse_rows = _base_rows(_instantiate(cfg, cfg.J - 2), cfg, ts)
    return _assemble("base_sawyer", cfg, rows, coarse_rows, estimates, started)


def _commutator_rows(
    objs: SimpleNamespace, cfg: ExperimentConfig, m: int, ts: np.ndarray
) -> tuple[list[ReportRow], bool]:
    b = sample_b(objs.grid, cfg.b)
    norm_b = bmo_norm(b, objs.scan)
    degenerate = norm_b == 0.0
    if degenerate:
        scale = 0.0
    else:
        # normalize the symbol per resolution so ||b||^m drops out as 1
        b = SampledFunction(objs.grid, b.values / norm_b)
        scale = 1.0
    fv = objs.f * objs.v.fn
    tout = commutator(b, fv, m)
    phi = LLogL(1.0, float(m))
    split_factor = float(phi(scale))
    rows = []
    for t in ts:
        lhs = weak_lhs(tout, objs.u, objs.v, float(t), cfg.margin)
        rhs = modular_rhs(objs.f, phi, objs.u, objs.v, float(t), scale)
        alt = split_factor * modular_rhs(objs.f, phi, objs.u, objs.v, float(t))
        rows.append(ReportRow(float(t), lhs, rhs, _ratio(lhs, rhs), alt))
    return rows, degenerate


def run_theorem2(cfg: ExperimentConfig, m: int | None = None) -> InequalityReport:
    """Mixed weak-type bound for the order-m commutator against Phi_m."""
    started = time.perf_counter()
    m = cfg.m if m is None else m
    if m not in (1, 2, 3):
        raise DomainError(f"commutator order must be 1, 2, or 3, got {m}")
    _require_headroom(cfg)
    fine = _instantiate(cfg, cfg.J)
    estimates = preflight_weights(fine.u, fine.v, fine.scan)
    _require_hypotheses(estimates, cfg.force)
    ts = _sweep(cfg, fine.f)
    rows, degenerate = _commutator_rows(fine, cfg, m, ts)
    coarse_rows, _ = _commutator_rows(_instantiate(cfg, cfg.J - 2), cfg, m, ts)
    name = "theorem1" if m == 1 else f"theorem2_m{m}"
    return _assemble(name, cfg, rows, coarse_rows, estimates, started, degenerate)


def run_theorem1(cfg: ExperimentConfig) -> InequalityReport:
    """First-order commutator bound with Phi(t) = t(1 + log+ t)."""
    return run_theorem2(cfg, 1)


def build_theorem3_weight(grid: Grid, r: float, delta: float, beta: float) -> tuple[Weight, Weight]:
    """The pair (v, w) = (|x|^beta, 1/Phi(1/v)) the third theorem is stated for.

    For Phi = Identity (r = 1, delta = 0) the reciprocal pair collapses and w
    shares v's samples exactly rather than round-tripping through 1/(1/v).
    """
    if beta >= -1.0:
        raise HypothesisError(f"theorem 3 needs beta < -1 in one dimension, got {beta}")
    if r < 1.0 or delta < 0.0:
        raise DomainError(f"Young exponents need r >= 1, delta >= 0, got r={r}, delta={delta}")
    v = power_weight(grid, beta)
    if r == 1.0 and delta == 0.0:
        return v, v
    phi = LLogL(r, delta)
    w = Weight(SampledFunction(grid, 1.0 / phi(1.0 / v.values)), family=f"reciprocal r={r} delta={delta}")
    return v, w


def _theorem3_rows(
    cfg: ExperimentConfig,
    J: int,
    r: float,
    delta: float,
    beta: float,
    ts: np.ndarray | None,
) -> tuple[list[ReportRow], np.ndarray, float]:
    grid = make_grid(cfg.L, J)
    f = sample_f(grid, cfg.f)
    u = build_weight(grid, cfg.u)
    v, w = build_theorem3_weight(grid, r, delta, beta)
    phi = LLogL(r, delta)
    fv = f * v.fn
    mphi = orlicz_maximal(fv, phi, cfg.scan())
    mu = hl_maximal(u.fn, cfg.scan()).values
    interior = grid.interior_mask(cfg.margin)
    uw = u.values * w.values
    quotient = mphi.values / v.values
    absfv = np.abs(fv.values)
    if ts is None:
        # this inequality is normalized by f*v on both sides, and for the
        # hypothesized non-integrable v the interesting heights reach the
        # resolution-limited top of the quotient, so the default window is
        # anchored at fv's median and closed off where level sets empty out
        sig = absfv[absfv > 1e-12 * float(np.max(absfv, initial=0.0))]
        center = float(np.median(sig)) if sig.size else 1.0
        t_min = center * 1e-2 if cfg.t_min is None else cfg.t_min
        top = 2.0 * float(np.max(quotient[interior], initial=0.0))
        if cfg.t_max is not None:
            t_max = cfg.t_max
        elif top > t_min:
            t_max = top
        else:
            t_max = center * 1e2
        ts = np.array([t_min]) if cfg.steps == 1 else np.geomspace(t_min, t_max, cfg.steps)
    rows = []
    for t in ts:
        t = float(t)
        lhs = grid.h * float(np.sum(uw[interior & (quotient > t)]))
        rhs = grid.h * float(np.sum(phi(absfv / t) * mu))
        psi = 1.0 / float(phi(1.0 / t))
        rows.append(ReportRow(t, lhs, rhs, _ratio(lhs, rhs), psi * lhs))
    rhs0 = grid.h * float(np.sum(phi(absfv) * mu))
    return rows, ts, rhs0


def run_theorem3(
    cfg: ExperimentConfig,
    r: float | None = None,
    delta: float | None = None,
    beta: float | None = None,
) -> InequalityReport:
    """Weak modular bound for M_Phi against the power weight |x|^beta.

    No weight preflight: the theorem takes arbitrary positive u (the maximal
    function of u on the right absorbs it); u's A1 estimate is still recorded
    for the report.
    """
    started = time.perf_counter()
    r = cfg.r if r is None else r
    delta = cfg.delta if delta is None else delta
    beta = cfg.beta if beta is None else beta
    _require_headroom(cfg)
    rows, ts, rhs0 = _theorem3_rows(cfg, cfg.J, r, delta, beta, None)
    coarse_rows, _, _ = _theorem3_rows(cfg, cfg.J - 2, r, delta, beta, ts)
    grid = make_grid(cfg.L, cfg.J)
    info = {"A1_u": estimate_Ap(build_weight(grid, cfg.u), 1.0, cfg.scan())}
    weak_orlicz_sup = max((_ratio(row.alt, rhs0) for row in rows), default=0.0)
    extras = {"weak_orlicz_rhs": rhs0, "weak_orlicz_sup": weak_orlicz_sup}
    return _assemble(
        f"theorem3_r{r:g}_d{delta:g}_b{beta:g}", cfg, rows, coarse_rows, info, started,
        extras=extras,
    )


# --- scale solver and proof-set diagnostics -------------------------------


def solve_scale_a(F: SampledFunction, gamma: float, lam: float) -> float:
    """Smallest a with a * int_{|y| <= a^gamma} F dy >= lam, to relative 1e-8.

    The discretized map is a nondecreasing step-and-ramp function of a, so
    bisection with the left-continuous convention (return the feasible end)
    finds the generalized root; quadrature jumps land on cell boundaries.
    """
    if gamma <= 0.0 or lam <= 0.0:
        raise DomainError(f"need gamma > 0 and lambda > 0, got gamma={gamma}, lambda={lam}")
    if np.any(F.values < 0.0):
        raise DomainError("scale solver needs F >= 0")
    if not np.any(F.values > 0.0):
        raise DomainError("scale solver needs F not identically zero")
    grid = F.grid
    absx = np.abs(grid.centers)
    order = np.argsort(absx)
    xs = absx[order]
    cmass = np.cumsum(F.values[order]) * grid.h

    def mass_within(s: float) -> float:
        idx = int(np.searchsorted(xs, s, side="right"))
        return float(cmass[idx - 1]) if idx else 0.0

    a_max = grid.L ** (1.0 / gamma)
    top = a_max * float(cmass[-1])
    if lam > top * (1.0 + 1e-12):
        raise RangeError(
            f"lambda={lam:.6g} unattainable: the truncated domain caps the map at {top:.6g}"
        )
    lo, hi = 0.0, a_max
    for _ in range(200):
        if hi - lo <= 1e-8 * hi:
            break
        mid = 0.5 * (lo + hi)
        if mid * mass_within(mid**gamma) >= lam:
            hi = mid
        else:
            lo = mid
    return hi


def theorem3_set_partition(x: float, k: int, a: float = 1.0, gamma: float = 1.0) -> frozenset[str]:
    """Which of the proof's annular sets contain x at scale k.

    G_k = {2^k < |x| <= 2^(k+1)} sits inside the intermediate shell I_k;
    C_k (core) and L_k (far field) are the complements.  Exactly one of
    {C, I, L} holds, plus possibly G.  The scale parameters (a, gamma) are
    accepted for signature stability with the diagnostic caller but do not
    enter membership.
    """
    del a, gamma
    ax = abs(x)
    labels = set()
    if 2.0**k < ax <= 2.0 ** (k + 1):
        labels.add("G")
    if ax <= 2.0 ** (k - 1):
        labels.add("C")
    elif ax <= 2.0 ** (k + 2):
        labels.add("I")
    else:
        labels.add("L")
    return frozenset(labels)
