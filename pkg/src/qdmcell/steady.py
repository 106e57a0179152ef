"""Stationary solutions of the photocell generator.

The stationary state solves M x = 0 with the populations summing to one.
A fixed-step RK4 propagator of the same linear system serves as an
independent cross-check; it is an oracle, not a production path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (DegenerateSteadyStateError, NumericalSolveError,
                     StepSizeError)
from .model import (GeneratorMatrix, IDX_IM13, IDX_IM24, IDX_RE13, IDX_RE24,
                    N_STATE, POPULATION_INDICES)

TRACE_TOL = 1e-12
DEGENERACY_TOL = 1e-12
RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class SteadyState:
    """Normalized stationary state with solver diagnostics."""

    x: np.ndarray
    residual: float
    condition_estimate: float

    def __post_init__(self):
        self.x.setflags(write=False)

    @property
    def populations(self) -> np.ndarray:
        """Level populations, with sub-tolerance negatives clamped to 0."""
        pops = self.x[list(POPULATION_INDICES)].copy()
        pops[(pops < 0.0) & (pops > -1e-10)] = 0.0
        return pops

    @property
    def rho13(self) -> complex:
        return complex(self.x[IDX_RE13], self.x[IDX_IM13])

    @property
    def rho24(self) -> complex:
        return complex(self.x[IDX_RE24], self.x[IDX_IM24])


def _check_trace_conserving(G: GeneratorMatrix) -> None:
    scale = G.max_rate
    if scale == 0.0:
        return
    col_sums = G.matrix[list(POPULATION_INDICES), :].sum(axis=0)
    if np.abs(col_sums).max() > TRACE_TOL * scale:
        raise NumericalSolveError(
            "generator is not trace conserving: population rows sum to "
            f"{np.abs(col_sums).max():.3e} (scale {scale:.3e})")


def _connected_components(A: np.ndarray) -> list:
    n = A.shape[0]
    adj = (A != 0.0) | (A.T != 0.0)
    np.fill_diagonal(adj, True)
    seen = [False] * n
    comps = []
    for start in range(n):
        if seen[start]:
            continue
        stack, comp = [start], []
        seen[start] = True
        while stack:
            i = stack.pop()
            comp.append(i)
            for j in np.flatnonzero(adj[i]):
                if not seen[j]:
                    seen[j] = True
                    stack.append(int(j))
        comps.append(sorted(comp))
    return comps


def solve_steady(G: GeneratorMatrix, block_of: int | None = None) -> SteadyState:
    """Unique stationary state of a trace-conserving generator.

    One population row is traded for the normalization constraint (the
    |6> row, a fixed choice that keeps results bit-reproducible).  Raises
    if the generator supports more than one stationary state.

    ``block_of`` opts into restricting the solve to the connected block
    containing that state index, pinning every decoupled component to
    zero; the restricted block must itself be nondegenerate.
    """
    _check_trace_conserving(G)

    active = list(G.active)
    A = G.matrix[np.ix_(active, active)]

    scale = float(np.abs(A).max()) if A.size else 0.0
    if scale == 0.0:
        raise DegenerateSteadyStateError(
            "zero generator: every state is stationary",
            blocks=[[G.active[k]] for k in range(len(active))])

    if block_of is not None:
        if block_of not in active:
            raise DegenerateSteadyStateError(
                f"state index {block_of} is not active in this generator")
        comps = _connected_components(A)
        keep = next(c for c in comps if active.index(block_of) in c)
        active = [active[k] for k in keep]
        A = G.matrix[np.ix_(active, active)]
        scale = float(np.abs(A).max())

    pop_pos = [k for k, i in enumerate(active) if i in POPULATION_INDICES]
    if not pop_pos:
        raise DegenerateSteadyStateError(
            "no population variables in the selected block")

    # The trace direction accounts for exactly one null dimension; any
    # further (near-)null dimension signals disconnected blocks.
    sv = np.linalg.svd(A, compute_uv=False)
    if len(sv) >= 2 and sv[-2] < DEGENERACY_TOL * scale:
        comps = _connected_components(A)
        blocks = [[active[k] for k in comp] for comp in comps]
        raise DegenerateSteadyStateError(
            f"multiple steady states: disconnected blocks {blocks}",
            blocks=blocks)

    B = A.copy()
    norm_row = pop_pos[-1]
    B[norm_row, :] = 0.0
    B[norm_row, pop_pos] = 1.0
    b = np.zeros(len(active))
    b[norm_row] = 1.0

    cond = float(np.linalg.cond(B))
    try:
        sol = np.linalg.solve(B, b)
    except np.linalg.LinAlgError as exc:
        raise NumericalSolveError(
            f"singular constrained system (cond ~ {cond:.3e})",
            condition_estimate=cond) from exc

    x = np.zeros(N_STATE)
    x[active] = sol
    res = residual(G, x)
    if res > RESIDUAL_TOL * scale:
        raise NumericalSolveError(
            f"steady-state residual {res:.3e} exceeds {RESIDUAL_TOL:.0e} x "
            f"largest generator entry {scale:.3e} (cond ~ {cond:.3e})",
            condition_estimate=cond)
    return SteadyState(x=x, residual=res, condition_estimate=cond)


def residual(G: GeneratorMatrix, x: np.ndarray) -> float:
    """Max-norm of M x; zero for exact stationary states."""
    return float(np.abs(G.matrix @ np.asarray(x, dtype=float)).max())


def evolve(G: GeneratorMatrix, x0: np.ndarray, t_final: float,
           dt: float) -> np.ndarray:
    """Propagate d/dt x = M x with fixed-step classical RK4.

    The generator is constant, so one RK4 step is the linear map
    I + hM + (hM)^2/2 + (hM)^3/6 + (hM)^4/24; the full evolution is that
    matrix raised to the step count (computed by repeated squaring, which
    is bit-identical to stepping).  Requires dt * max-rate <= 0.1.
    """
    if t_final <= 0.0:
        raise StepSizeError(f"t_final must be positive, got {t_final}")
    max_rate = G.max_rate
    if dt <= 0.0 or dt * max_rate > 0.1:
        raise StepSizeError(
            f"dt = {dt} too large for max rate {max_rate:.3e}: "
            "need dt * max_rate <= 0.1")

    n_steps = max(1, math.ceil(t_final / dt))
    H = dt * G.matrix
    step = np.eye(N_STATE) + H @ (np.eye(N_STATE) + H @ (
        np.eye(N_STATE) / 2.0 + H @ (np.eye(N_STATE) / 6.0 + H / 24.0)))
    return np.linalg.matrix_power(step, n_steps) @ np.asarray(x0, dtype=float)
