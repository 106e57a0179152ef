"""Load-rate sweeps and parameter scans.

Everything here reduces to many stationary solves of the same generator
with only the load rate changing, so the hot path batches the
constrained linear solves over the whole load grid at once.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import (BoundaryMaximumError, DomainError, NumericalSolveError,
                     UndefinedEfficiencyError, VoltageUndefinedError)
from .model import (BAND_ALIGNMENTS, IDX_P55, IDX_P66, ModelParams, N_STATE,
                    POPULATION_INDICES, apply_band_alignment, build_generator)
from .observables import PhotovoltaicPoint, photovoltaic_point, supplied_power
from .steady import RESIDUAL_TOL, SteadyState, solve_steady

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class GridSpec:
    """Log-spaced load-rate grid (gamma units)."""

    n: int = 200
    gamma_min: float = 1e-6
    gamma_max: float = 1e6

    def __post_init__(self):
        if self.n < 50:
            raise DomainError("load grid needs at least 50 points")
        if not 0.0 < self.gamma_min < self.gamma_max:
            raise DomainError("need 0 < gamma_min < gamma_max")

    def values(self) -> np.ndarray:
        return np.logspace(math.log10(self.gamma_min),
                           math.log10(self.gamma_max), self.n)


@dataclass(frozen=True)
class IVCurve:
    """Current-voltage characteristic over a load grid."""

    points: tuple
    params: ModelParams
    kind: str
    alignment: str
    grid: GridSpec
    n_dropped: int = 0

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(p, name) for p in self.points])


@dataclass(frozen=True)
class MaxPowerPoint:
    Gamma_star: float
    j_mpp: float
    V_mpp: float
    P_m: float
    eta: float
    coh13: float = 0.0
    coh24: float = 0.0


@dataclass(frozen=True)
class ShortCircuitCurrent:
    value: float
    from_crossing: bool  # False: tail value, a lower bound only


@dataclass(frozen=True)
class OpenCircuitVoltage:
    value: float
    extrapolated: bool


@dataclass(frozen=True)
class CurrentGain:
    """Molecule-over-single-dot comparison at the maximum-power points."""

    delta_j: float
    delta_Pm: float
    qdm: MaxPowerPoint
    sqd: MaxPowerPoint


@dataclass(frozen=True)
class ScenarioResult:
    """One row of a parameter scan."""

    kind: str
    alignment: str = "0"
    d: float | None = None
    gamma_c: float | None = None
    gamma_v: float | None = None
    gamma_13: float = 0.0
    gamma_24: float = 0.0
    jsc: float | None = None
    Voc: float | None = None
    P_m: float | None = None
    eta: float | None = None
    delta_j: float | None = None
    delta_Pm: float | None = None
    max_coh13: float | None = None
    max_coh24: float | None = None


class _CurveSolver:
    """Stationary solves of one parameter set across many load rates.

    Builds the zero-load generator once; each load rate only perturbs two
    matrix entries, so grids are solved as one stacked linear system.
    """

    def __init__(self, params: ModelParams, kind: str):
        self.params = params
        self.kind = kind
        self.base = build_generator(params.replace(Gamma=0.0), kind)
        self.active = list(self.base.active)
        self.A0 = self.base.matrix[np.ix_(self.active, self.active)]
        self.pop_pos = [k for k, i in enumerate(self.active)
                        if i in POPULATION_INDICES]
        self.r5 = self.active.index(IDX_P55)
        self.r6 = self.active.index(IDX_P66)
        self.load = np.zeros_like(self.A0)
        self.load[self.r5, self.r5] = -1.0
        self.load[self.r6, self.r5] = 1.0
        self._validated = False

    def _validate(self, gamma: float) -> None:
        # Full checks (trace conservation, degeneracy) once per curve;
        # adding load only ever adds couplings, so one load rate stands
        # in for all of them.
        solve_steady(build_generator(self.params.replace(Gamma=gamma),
                                     self.kind))
        self._validated = True

    def states(self, gammas: np.ndarray) -> list:
        gammas = np.asarray(gammas, dtype=float)
        if not self._validated:
            self._validate(float(gammas[len(gammas) // 2]))
        A = self.A0[None, :, :] + gammas[:, None, None] * self.load[None, :, :]
        B = A.copy()
        B[:, self.pop_pos[-1], :] = 0.0
        for p in self.pop_pos:
            B[:, self.pop_pos[-1], p] = 1.0
        b = np.zeros((len(gammas), len(self.active)))
        b[:, self.pop_pos[-1]] = 1.0
        sol = np.linalg.solve(B, b[..., None])[..., 0]
        res = np.abs(np.einsum("kij,kj->ki", A, sol)).max(axis=1)
        scale = np.abs(A).reshape(len(gammas), -1).max(axis=1)
        bad = res > RESIDUAL_TOL * scale
        if bad.any():
            k = int(np.flatnonzero(bad)[0])
            raise NumericalSolveError(
                f"steady solve residual {res[k]:.3e} at Gamma = {gammas[k]:g}")
        out = []
        for k in range(len(gammas)):
            x = np.zeros(N_STATE)
            x[self.active] = sol[k]
            out.append(SteadyState(x=x, residual=float(res[k]),
                                   condition_estimate=float("nan")))
        return out

    def state(self, gamma: float) -> SteadyState:
        return self.states(np.array([gamma]))[0]

    def point(self, gamma: float) -> PhotovoltaicPoint:
        return photovoltaic_point(self.state(gamma), gamma,
                                  self.base.energies, self.params.kTc)


def iv_curve(params: ModelParams, kind: str = "qdm",
             grid: GridSpec | None = None,
             alignment: str = "0") -> IVCurve:
    """One stationary solve per load rate on a log grid.

    Points where the entropic voltage term is undefined (vanishing
    contact population) are dropped and counted in ``n_dropped``.
    """
    grid = grid or GridSpec()
    params = apply_band_alignment(params, alignment)
    solver = _CurveSolver(params, kind)
    gammas = grid.values()
    states = solver.states(gammas)
    points, dropped = [], 0
    for gamma, state in zip(gammas, states):
        try:
            points.append(photovoltaic_point(state, gamma,
                                             solver.base.energies,
                                             params.kTc))
        except VoltageUndefinedError:
            dropped += 1
    return IVCurve(points=tuple(points), params=params, kind=kind,
                   alignment=alignment, grid=grid, n_dropped=dropped)


def _golden_max(f, lo: float, hi: float, tol: float = 1e-6):
    """Golden-section maximization on [lo, hi]; returns (x, f(x))."""
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def max_power_point(params: ModelParams | None = None, kind: str = "qdm",
                    curve: IVCurve | None = None,
                    grid: GridSpec | None = None,
                    alignment: str = "0") -> MaxPowerPoint:
    """Locate the interior power maximum of the load sweep.

    The grid argmax is refined by golden-section search on log(Gamma) to
    1e-6 relative tolerance.  A maximum on the grid boundary raises; the
    grid must be widened.
    """
    if curve is None:
        if params is None:
            raise DomainError("need either params or a precomputed curve")
        curve = iv_curve(params, kind=kind, grid=grid, alignment=alignment)
    params = curve.params
    powers = curve.column("P")
    if len(powers) == 0:
        raise BoundaryMaximumError("curve has no valid points")
    k = int(powers.argmax())
    if powers[k] <= 0.0:
        raise BoundaryMaximumError("no positive power anywhere on the grid")
    if k == 0 or k == len(powers) - 1:
        raise BoundaryMaximumError(
            f"power maximum at grid edge Gamma = {curve.points[k].Gamma:g}; "
            "widen the load grid")

    solver = _CurveSolver(params, curve.kind)

    def p_of_log_gamma(u: float) -> float:
        try:
            return solver.point(math.exp(u)).P
        except VoltageUndefinedError:
            return -math.inf

    lo = math.log(curve.points[k - 1].Gamma)
    hi = math.log(curve.points[k + 1].Gamma)
    u_star, p_star = _golden_max(p_of_log_gamma, lo, hi)
    if p_star >= powers[k]:
        best = solver.point(math.exp(u_star))
    else:
        best = curve.points[k]
    eta = best.P / supplied_power(best.j, params.E12)
    return MaxPowerPoint(Gamma_star=best.Gamma, j_mpp=best.j, V_mpp=best.V,
                         P_m=best.P, eta=eta, coh13=best.coh13,
                         coh24=best.coh24)


def open_circuit_voltage(params: ModelParams,
                         kind: str = "qdm") -> OpenCircuitVoltage:
    """Voltage in the vanishing-load limit.

    Evaluated at Gamma = 1e-6 and 1e-7; if the two disagree by more than
    0.1 mV the value is extrapolated linearly in Gamma and flagged.
    """
    solver = _CurveSolver(params, kind)
    g_hi, g_lo = 1e-6, 1e-7
    v_hi = solver.point(g_hi).V
    v_lo = solver.point(g_lo).V
    if abs(v_hi - v_lo) <= 0.1:
        return OpenCircuitVoltage(value=v_hi, extrapolated=False)
    if abs(v_hi - v_lo) > 10.0:
        raise NumericalSolveError(
            f"open-circuit limit not converged: V({g_hi:g}) = {v_hi:.2f}, "
            f"V({g_lo:g}) = {v_lo:.2f}")
    slope = (v_hi - v_lo) / (g_hi - g_lo)
    return OpenCircuitVoltage(value=v_lo - slope * g_lo, extrapolated=True)


def short_circuit_current(curve: IVCurve) -> ShortCircuitCurrent:
    """Current where the voltage crosses zero.

    Linear interpolation between the bracketing grid points; if the
    curve never reaches V = 0, the current at the largest valid load is
    returned and flagged as a lower bound.
    """
    if len(curve.points) == 0:
        raise VoltageUndefinedError("empty curve: no short-circuit estimate")
    volts = curve.column("V")
    currents = curve.column("j")
    below = np.flatnonzero(volts <= 0.0)
    if len(below) == 0:
        return ShortCircuitCurrent(value=float(currents[-1]),
                                   from_crossing=False)
    k = int(below[0])
    if k == 0:
        return ShortCircuitCurrent(value=float(currents[0]),
                                   from_crossing=True)
    v0, v1 = volts[k - 1], volts[k]
    j0, j1 = currents[k - 1], currents[k]
    jsc = j0 + (j1 - j0) * (0.0 - v0) / (v1 - v0)
    return ShortCircuitCurrent(value=float(jsc), from_crossing=True)


def relative_current_gain(params: ModelParams,
                          grid: GridSpec | None = None) -> CurrentGain:
    """Gain of the molecule over its single-dot counterpart.

    Both devices are evaluated at their own maximum-power points; the
    single-dot twin shares every parameter and simply drops the second
    dot.
    """
    mpp_qdm = max_power_point(params, kind="qdm", grid=grid)
    mpp_sqd = max_power_point(params, kind="sqd", grid=grid)
    if mpp_sqd.j_mpp == 0.0:
        raise UndefinedEfficiencyError(
            "single-dot current vanishes; relative gain undefined")
    return CurrentGain(
        delta_j=(mpp_qdm.j_mpp - mpp_sqd.j_mpp) / mpp_sqd.j_mpp,
        delta_Pm=(mpp_qdm.P_m - mpp_sqd.P_m) / mpp_sqd.P_m,
        qdm=mpp_qdm, sqd=mpp_sqd)


@dataclass(frozen=True)
class GammaGridScan:
    """Relative current gain over an escape-rate grid."""

    gamma_c_values: np.ndarray
    gamma_v_values: np.ndarray
    delta_j: np.ndarray  # shape (len(gamma_v), len(gamma_c))
    zero_contour: tuple  # (gamma_c, interpolated gamma_v) pairs
    failures: tuple  # (iv, ic, message)


def _worker_count() -> int:
    cap = os.environ.get("QDM_THREADS")
    if cap is not None:
        try:
            return max(1, int(cap))
        except ValueError:
            return 1
    return max(1, os.cpu_count() or 1)


def gamma_grid_scan(params: ModelParams,
                    gamma_c_grid: np.ndarray | None = None,
                    gamma_v_grid: np.ndarray | None = None,
                    grid: GridSpec | None = None,
                    sqd_cache: dict | None = None) -> GammaGridScan:
    """Relative current gain on a log-log escape-rate grid.

    Cells are independent and evaluated concurrently (worker count
    capped by QDM_THREADS); results are ordered by cell index
    regardless of execution order.  Per-cell failures are recorded, not
    fatal.  ``sqd_cache`` (keyed by (gamma_c, gamma_v)) lets callers
    reuse single-dot results across scans that only differ in tunneling.
    """
    gc_vals = (np.logspace(0, math.log10(500.0), 40)
               if gamma_c_grid is None else np.asarray(gamma_c_grid, float))
    gv_vals = (np.logspace(-4, math.log10(20.0), 40)
               if gamma_v_grid is None else np.asarray(gamma_v_grid, float))
    grid = grid or GridSpec(n=72)
    cache = sqd_cache if sqd_cache is not None else {}

    delta = np.full((len(gv_vals), len(gc_vals)), np.nan)
    failures = []

    def cell(iv: int, ic: int):
        gv, gc = gv_vals[iv], gc_vals[ic]
        p = params.replace(gamma_c=gc, gamma_v=gv)
        try:
            key = (float(gc), float(gv))
            sqd = cache.get(key)
            if sqd is None:
                sqd = max_power_point(p, kind="sqd", grid=grid)
                cache[key] = sqd
            qdm = max_power_point(p, kind="qdm", grid=grid)
            return (qdm.j_mpp - sqd.j_mpp) / sqd.j_mpp, None
        except Exception as exc:  # recorded per cell
            return math.nan, f"{type(exc).__name__}: {exc}"

    cells = [(iv, ic) for iv in range(len(gv_vals))
             for ic in range(len(gc_vals))]
    workers = _worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(lambda c: cell(*c), cells))
    else:
        outcomes = [cell(*c) for c in cells]
    for (iv, ic), (dj, err) in zip(cells, outcomes):
        delta[iv, ic] = dj
        if err is not None:
            failures.append((iv, ic, err))

    # Zero-gain contour: for each gamma_c column, the gamma_v where the
    # gain changes sign (log-linear interpolation).
    contour = []
    for ic in range(len(gc_vals)):
        col = delta[:, ic]
        for iv in range(len(gv_vals) - 1):
            a, b = col[iv], col[iv + 1]
            if np.isfinite(a) and np.isfinite(b) and a * b < 0.0:
                la, lb = math.log(gv_vals[iv]), math.log(gv_vals[iv + 1])
                lz = la + (lb - la) * (0.0 - a) / (b - a)
                contour.append((float(gc_vals[ic]), math.exp(lz)))
                break
    return GammaGridScan(gamma_c_values=gc_vals, gamma_v_values=gv_vals,
                         delta_j=delta, zero_contour=tuple(contour),
                         failures=tuple(failures))


def efficiency_vs_distance(params: ModelParams,
                           d_grid=None, alignments=None,
                           grid: GridSpec | None = None) -> list:
    """Maximum-power efficiency versus barrier width per band alignment."""
    d_grid = list(d_grid) if d_grid is not None else list(range(2, 11))
    alignments = tuple(alignments) if alignments is not None else BAND_ALIGNMENTS
    rows = []
    for alignment in alignments:
        for d in d_grid:
            p = apply_band_alignment(params, alignment).with_distance(float(d))
            mpp = max_power_point(p, kind="qdm", grid=grid)
            rows.append(ScenarioResult(
                kind="qdm", alignment=alignment, d=float(d),
                gamma_c=p.gamma_c, gamma_v=p.gamma_v,
                P_m=mpp.P_m, eta=mpp.eta,
                max_coh13=mpp.coh13, max_coh24=mpp.coh24))
    return rows


def phonon_assisted_comparison(params: ModelParams,
                               rates=(0.001, 0.01, 0.1),
                               rate_sets=((100.0, 0.05), (50.0, 5.0)),
                               distances=(2.0, 10.0),
                               grid: GridSpec | None = None) -> list:
    """Maximum power with incoherent interdot channels, versus without.

    Rows carry the relative gain of P_m over the coherent-only baseline
    for each (escape-rate set, barrier width, assisted rate) cell.
    """
    rows = []
    for gc, gv in rate_sets:
        for d in distances:
            base_p = params.replace(gamma_c=gc, gamma_v=gv,
                                    gamma_13=0.0, gamma_24=0.0
                                    ).with_distance(float(d))
            base = max_power_point(base_p, kind="qdm", grid=grid)
            rows.append(ScenarioResult(
                kind="qdm", d=float(d), gamma_c=gc, gamma_v=gv,
                gamma_13=0.0, gamma_24=0.0, P_m=base.P_m, eta=base.eta,
                delta_Pm=0.0))
            for g_ph in rates:
                p = base_p.replace(gamma_13=g_ph, gamma_24=g_ph)
                mpp = max_power_point(p, kind="qdm", grid=grid)
                rows.append(ScenarioResult(
                    kind="qdm", d=float(d), gamma_c=gc, gamma_v=gv,
                    gamma_13=g_ph, gamma_24=g_ph, P_m=mpp.P_m, eta=mpp.eta,
                    delta_Pm=(mpp.P_m - base.P_m) / base.P_m))
    return rows
