"""Conservative MDRKCAT stage/update cycle on a periodic uniform mesh."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cat import DivergedError, flux_time_derivatives, halfway_flux_contribution
from .fluxes import FluxModel, InadmissibleStateError, get_flux
from .problems import get_problem
from .stencils import FloatStencil, float_stencil
from .tableaux import MdrkTableau, get_tableau

logger = logging.getLogger(__name__)


class DegenerateProblemError(ValueError):
    """The wave speed vanishes everywhere, so no CFL timestep exists."""


@dataclass(frozen=True)
class Mesh1D:
    """Uniform periodic mesh with nodes x_i = a + i*dx, i = 0..M-1."""

    a: float
    b: float
    M: int

    def __post_init__(self):
        if self.M < 1 or not self.b > self.a:
            raise ValueError(f"invalid mesh [{self.a}, {self.b}] with M = {self.M}")

    @property
    def dx(self) -> float:
        return (self.b - self.a) / self.M

    @property
    def nodes(self) -> np.ndarray:
        return self.a + self.dx * np.arange(self.M)


@dataclass
class GridState:
    t: float
    values: np.ndarray  # (M, m)

    def copy(self) -> "GridState":
        return GridState(self.t, self.values.copy())


def window_indices(M: int, p: int) -> np.ndarray:
    """(M, 2p) periodic node indices i-p+1..i+p of the stencil left of interface i+1/2."""
    return (np.arange(M)[:, None] + np.arange(-p + 1, p + 1)[None, :]) % M


def max_speed(state: GridState, flux: FluxModel) -> float:
    """Largest wave speed over the grid; raises DivergedError on an inadmissible state."""
    with np.errstate(invalid="ignore", over="ignore"):
        try:
            speed = float(np.max(flux.max_wave_speed(state.values)))
        except InadmissibleStateError as exc:
            raise DivergedError(f"inadmissible solution state: {exc}", time=state.t) from exc
    if not np.isfinite(speed):
        raise DivergedError("non-finite wave speed", time=state.t)
    return speed


def compute_dt(state: GridState, flux: FluxModel, sigma: float, dx: float, t_end: float) -> float:
    """CFL timestep sigma*dx/max|lambda|, clipped so the run lands on ``t_end``."""
    speed = max_speed(state, flux)
    if speed <= 0.0:
        raise DegenerateProblemError("maximum wave speed is zero; CFL timestep undefined")
    return min(sigma * dx / speed, t_end - state.t)


def _needed_derivatives(tableau: MdrkTableau) -> list[int]:
    """Per stage, the highest derivative index any later stage or the update consumes."""
    needed = []
    for nu in range(tableau.s):
        used = np.abs(tableau.a[:, :, nu]).max(axis=1) + np.abs(tableau.b[:, nu])
        nz = np.nonzero(used)[0]
        needed.append(int(nz[-1]) + 1 if nz.size else 0)
    return needed


def interface_terms(values: np.ndarray, flux: FluxModel, stencil: FloatStencil, r: int,
                    dt: float, dx: float, windows: Optional[np.ndarray] = None) -> np.ndarray:
    """Interface reconstructions of the flux time derivatives, shape (r, M, m).

    Row k-1 holds Lambda^(0) ftilde^(k-1) at every interface i+1/2.
    """
    if windows is None:
        windows = window_indices(values.shape[0], stencil.p)
    ws = flux_time_derivatives(values[windows], flux, stencil, r, dt, dx)
    return np.stack([halfway_flux_contribution(ws, k, stencil) for k in range(1, r + 1)])


def _combine(terms: list, weights: np.ndarray, dt: float, shape) -> np.ndarray:
    # weights[k-1, nu]; terms[nu][k-1]
    F = np.zeros(shape)
    for k in range(weights.shape[0]):
        scale = dt**k
        for nu, t_nu in enumerate(terms):
            w = weights[k, nu]
            if w != 0.0:
                F += (w * scale) * t_nu[k]
    return F


def _conservative_update(base: np.ndarray, F: np.ndarray, dt: float, dx: float) -> np.ndarray:
    return base - (dt / dx) * (F - np.roll(F, 1, axis=0))


def step(state: GridState, tableau: MdrkTableau, flux: FluxModel, stencil: FloatStencil,
         dt: float, dx: float, step_index: int | None = None) -> GridState:
    """Advance ``state`` by one MDRKCAT step of size ``dt``.

    Each interface flux is built once per stage from the stencil left of
    the interface, and the left flux of cell i is the right flux of cell
    i - 1.
    """
    if dt <= 0.0:
        raise ValueError(f"timestep must be positive, got {dt}")
    if tableau.r > 2 * stencil.p:
        raise ValueError(f"{tableau.name} needs r = {tableau.r} <= 2p, but p = {stencil.p}")
    base = state.values
    M = base.shape[0]
    if M < 2 * stencil.p:
        raise ValueError(f"mesh with M = {M} cannot hold a stencil of radius {stencil.p}")
    windows = window_indices(M, stencil.p)
    needed = _needed_derivatives(tableau)
    terms = []
    stage = base
    where = "1"
    try:
        for l in range(tableau.s):
            where = str(l + 1)
            if l > 0:
                F = _combine(terms, tableau.a[:, l, :l], dt, base.shape)
                stage = _conservative_update(base, F, dt, dx)
                if not np.isfinite(stage).all():
                    raise DivergedError("non-finite stage value")
            r_l = needed[l]
            if r_l:
                terms.append(interface_terms(stage, flux, stencil, r_l, dt, dx, windows))
                # pad so every stage row is indexable by k
                if r_l < tableau.r:
                    pad = np.zeros((tableau.r - r_l,) + base.shape)
                    terms[-1] = np.concatenate([terms[-1], pad])
            else:
                terms.append(np.zeros((tableau.r,) + base.shape))
        where = "update"
        F = _combine(terms, tableau.b, dt, base.shape)
        new = _conservative_update(base, F, dt, dx)
        if not np.isfinite(new).all():
            raise DivergedError("non-finite updated value")
    except (DivergedError, InadmissibleStateError) as exc:
        raise DivergedError(
            f"diverged at step {step_index}, stage {where}, t = {state.t:.6g}: {exc}",
            step=step_index, stage=where, time=state.t,
        ) from exc
    return GridState(state.t + dt, new)


@dataclass
class SolverConfig:
    scheme: str
    problem: str
    M: int
    sigma: float = 0.5
    p: Optional[int] = None
    t_end: Optional[float] = None

    def __post_init__(self):
        if not self.sigma > 0.0:
            raise ValueError(f"CFL number must be positive, got {self.sigma}")
        if self.t_end is not None and self.t_end < 0.0:
            raise ValueError(f"final time must be non-negative, got {self.t_end}")


@dataclass
class RunResult:
    config: SolverConfig
    mesh: Mesh1D
    p: int
    state: GridState
    dts: list = field(default_factory=list)
    diverged: bool = False
    message: str = ""

    @property
    def steps(self) -> int:
        return len(self.dts)


def run(config: SolverConfig) -> RunResult:
    """Solve a preset problem to its final time.

    A diverged run is reported through ``RunResult.diverged`` with the last
    valid state, rather than raised.
    """
    problem = get_problem(config.problem)
    tableau = get_tableau(config.scheme)
    p = config.p or tableau.recommended_p
    stencil = float_stencil(p)
    flux = get_flux(problem.flux)
    mesh = Mesh1D(problem.domain[0], problem.domain[1], config.M)
    t_end = problem.t_end if config.t_end is None else config.t_end
    state = GridState(0.0, problem.initial(mesh.nodes))
    result = RunResult(config, mesh, p, state)

    while state.t < t_end:
        try:
            dt = compute_dt(state, flux, config.sigma, mesh.dx, t_end)
            new = step(state, tableau, flux, stencil, dt, mesh.dx, step_index=len(result.dts))
            max_speed(new, flux)  # the final state must be admissible too
        except DivergedError as exc:
            result.diverged = True
            result.message = str(exc)
            logger.info("%s on %s, M = %d: %s", tableau.name, problem.name, config.M, exc)
            break
        state = new
        result.dts.append(dt)
        if t_end - state.t <= 1e-14 * max(1.0, abs(t_end)):
            state.t = t_end
        result.state = state
    return result
