"""Reference solutions, the scaled l1 error and grid-refinement studies.

Scalar problems are evaluated exactly through their characteristics,
the Euler sine wave is a pure density advection, and the Euler
sine-system is compared with a fine-mesh run of the solver itself.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .fluxes import (
    buckley_leverett_derivative,
    buckley_leverett_second_derivative,
    primitive_to_conservative,
)
from .problems import TestProblem, euler_sinewave_primitive, get_problem
from .solver import SolverConfig, run

logger = logging.getLogger(__name__)

NEWTON_TOL = 1e-14
NEWTON_MAXITER = 100
BISECTION_MAXITER = 200
EXACT_FLOOR = 1e-12


class PreconditionError(ValueError):
    """The exact solution is not defined (past breaking time, or a folded map)."""


class RootFindError(ArithmeticError):
    """Newton and the bisection fallback both failed to reach the tolerance."""


def _newton_bisect(g: Callable, dg: Callable, start: np.ndarray, lo: np.ndarray, hi: np.ndarray,
                   tol: float = NEWTON_TOL) -> np.ndarray:
    """Vectorised safeguarded root finder for an increasing function ``g``.

    Plain Newton from ``start`` first; entries that have not reached
    ``|g| <= tol`` fall back to bisection on ``[lo, hi]`` (``g(lo) <= 0 <= g(hi)``),
    followed by a final Newton polish.
    """
    z = np.array(start, dtype=float, copy=True)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for _ in range(NEWTON_MAXITER):
            res = g(z)
            todo = ~(np.abs(res) <= tol)
            if not todo.any():
                return z
            z = np.where(todo, z - res / dg(z), z)
        bad = ~(np.abs(g(z)) <= tol)
        if bad.any():
            a, b = lo[bad].copy(), hi[bad].copy()
            ga = _g_sub(g, a, bad)
            gb = _g_sub(g, b, bad)
            if np.any(ga > 0) or np.any(gb < 0):
                raise RootFindError("bisection bracket does not enclose a root")
            for _ in range(BISECTION_MAXITER):
                mid = 0.5 * (a + b)
                gm = _g_sub(g, mid, bad)
                left = gm > 0
                b = np.where(left, mid, b)
                a = np.where(left, a, mid)
                if np.all(np.abs(gm) <= tol) or np.all(b - a <= 4 * np.finfo(float).eps * np.maximum(1, abs(a))):
                    break
            z[bad] = 0.5 * (a + b)
        # polish: a few Newton steps from the bracketed point
        for _ in range(5):
            res = g(z)
            todo = ~(np.abs(res) <= tol)
            if not todo.any():
                return z
            z = np.where(todo, z - res / dg(z), z)
    if not np.all(np.abs(g(z)) <= tol):
        worst = float(np.nanmax(np.abs(g(z))))
        raise RootFindError(f"characteristics root not resolved: max residual {worst:.3g}")
    return z


def _g_sub(g, values, mask):
    # evaluate g on a subset by embedding into a full-size array
    full = np.zeros(mask.shape)
    full[mask] = values
    return g(full)[mask]


def burgers_characteristics(x, t: float, w0: Callable, dw0: Callable,
                            breaking_time: Optional[float] = None) -> np.ndarray:
    """Exact Burgers solution: the root ``w`` of ``w - w0(x - w t) = 0``.

    Parameters
    ----------
    x : array_like
        Evaluation points.
    t : float
        Time, strictly below ``breaking_time`` when one is given.
    w0, dw0 : callable
        Initial profile and its derivative (vectorised).

    Raises
    ------
    PreconditionError
        If ``t`` is negative or not below the breaking time.
    """
    x = np.asarray(x, dtype=float)
    if t < 0:
        raise PreconditionError(f"time must be non-negative, got {t}")
    if breaking_time is not None and t >= breaking_time:
        raise PreconditionError(f"t = {t} is not below the breaking time {breaking_time:.6g}")
    if t == 0:
        return w0(x)

    def g(w):
        return w - w0(x - w * t)

    def dg(w):
        return 1.0 + t * dw0(x - w * t)

    # the root lies inside the range of w0, sampled over a wide window
    sample = w0(np.linspace(x.min() - 10.0, x.max() + 10.0, 20001)) if x.size else np.zeros(1)
    pad = 1e-3 * (1.0 + np.ptp(sample))
    lo = np.full(x.shape, sample.min() - pad)
    hi = np.full(x.shape, sample.max() + pad)
    return _newton_bisect(g, dg, w0(x), lo, hi)


def buckley_characteristics(x, t: float, w0: Callable, dw0: Callable,
                            period: float = 2.0) -> np.ndarray:
    """Exact Buckley-Leverett solution ``w0(x0)`` with ``x0 + f'(w0(x0)) t = x``.

    The foot of the characteristic is found by safeguarded Newton; ``w0``
    is assumed periodic with period ``period``, so ``x0`` needs no wrapping.

    Raises
    ------
    PreconditionError
        If the characteristic map has folded (characteristics crossed).
    """
    x = np.asarray(x, dtype=float)
    if t < 0:
        raise PreconditionError(f"time must be non-negative, got {t}")
    if t == 0:
        return w0(x)
    probe = np.linspace(0.0, period, 20001)
    slope = 1.0 + t * buckley_leverett_second_derivative(w0(probe)) * dw0(probe)
    if slope.min() <= 0.0:
        raise PreconditionError(
            f"characteristic map is not invertible at t = {t} (min slope {slope.min():.3g})"
        )
    speeds = buckley_leverett_derivative(w0(probe))

    def h(x0):
        return x0 + t * buckley_leverett_derivative(w0(x0)) - x

    def dh(x0):
        return 1.0 + t * buckley_leverett_second_derivative(w0(x0)) * dw0(x0)

    pad = 1e-3 * period
    lo = x - t * speeds.max() - pad
    hi = x - t * speeds.min() + pad
    x0 = _newton_bisect(h, dh, x - t * buckley_leverett_derivative(w0(x)), lo, hi)
    return w0(x0)


def characteristic_residual(x, t: float, w, w0: Callable, speed: Callable) -> np.ndarray:
    """Residual ``w - w0(x - speed(w) t)`` of the implicit characteristics relation."""
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    return w - w0(x - speed(w) * t)


def euler_advected_density(x, t: float, gamma: float = 1.4) -> np.ndarray:
    """Conservative Euler state for rho0(x - t) with u = p = 1, shape (..., 3)."""
    x = np.asarray(x, dtype=float)
    # rho0 has period 2, so the shift can be reduced modulo 4 without loss
    shifted = np.mod(x - t, 4.0)
    return primitive_to_conservative(euler_sinewave_primitive(shifted), gamma)


def l1_error(numerical, reference, dx: float) -> float:
    """Scaled l1 error ``dx * sum |numerical - reference|``, summed over components.

    ``numerical`` may be a ``GridState`` or an array of nodal values.
    """
    num = np.asarray(getattr(numerical, "values", numerical), dtype=float)
    ref = np.asarray(getattr(reference, "values", reference), dtype=float)
    if num.shape != ref.shape:
        raise ValueError(f"shape mismatch: numerical {num.shape} vs reference {ref.shape}")
    if not dx > 0:
        raise ValueError(f"dx must be positive, got {dx}")
    return float(dx * np.abs(num - ref).sum())


def exact_reference(problem: TestProblem, x, t: float) -> np.ndarray:
    """Nodal exact solution with a trailing component axis, for problems that have one."""
    if problem.reference == "characteristics":
        if problem.flux == "burgers":
            w = burgers_characteristics(x, t, problem.w0, problem.dw0, problem.breaking_time)
        elif problem.flux == "buckley-leverett":
            w = buckley_characteristics(x, t, problem.w0, problem.dw0, period=problem.length)
        else:
            raise ValueError(f"no characteristics solver for flux {problem.flux!r}")
        return w[:, None]
    if problem.reference == "advected-profile":
        return euler_advected_density(x, t)
    raise ValueError(f"problem {problem.name!r} has no exact solution ({problem.reference})")


@dataclass
class SelfReference:
    """Fine-mesh solution used as the reference for problems without an exact one."""

    problem: str
    scheme: str
    p: int
    M: int
    sigma: float
    values: np.ndarray  # (M, m)
    floor: float = 0.0  # l1 distance between this run and the half-resolution run

    def restrict(self, M: int) -> np.ndarray:
        """Values at the nodes of a coarse mesh with ``M`` cells (index subsampling)."""
        if M < 1 or self.M % M:
            raise ValueError(f"coarse M = {M} does not divide the reference M = {self.M}")
        return self.values[:: self.M // M]


def self_reference(problem: str | TestProblem, fine_M: int = 8192, scheme: str = "mdrk-3-7-3",
                   sigma: float = 0.15, p: int = 4, t_end: Optional[float] = None,
                   estimate_floor: bool = True) -> SelfReference:
    """Run a fine high-order solve to serve as the reference solution.

    With ``estimate_floor`` a second run on ``fine_M // 2`` cells is made and
    the l1 distance between the two, on the coarser nodes, is stored as
    ``floor``.  Coarse errors below it are not trustworthy.

    Raises
    ------
    RuntimeError
        If either reference run diverges.
    """
    name = problem.name if isinstance(problem, TestProblem) else problem
    prob = get_problem(name)
    res = run(SolverConfig(scheme, name, fine_M, sigma, p, t_end))
    if res.diverged:
        raise RuntimeError(f"reference run diverged: {res.message}")
    ref = SelfReference(name, scheme, p, fine_M, sigma, res.state.values)
    if estimate_floor:
        half = run(SolverConfig(scheme, name, fine_M // 2, sigma, p, t_end))
        if half.diverged:
            raise RuntimeError(f"half-resolution reference run diverged: {half.message}")
        ref.floor = l1_error(half.state.values, ref.restrict(fine_M // 2), prob.length / (fine_M // 2))
    return ref


@dataclass
class ErrorRecord:
    M: int
    dx: float
    error: float  # nan when the run diverged
    diverged: bool = False
    steps: int = 0
    order: float = float("nan")  # observed order against the previous (coarser) record
    floored: bool = False  # error at or below the reference floor


def convergence_study(problem: str | TestProblem, scheme: str, sigma: float, M_list: Sequence[int],
                      p: Optional[int] = None, reference: Optional[SelfReference] = None,
                      floor: Optional[float] = None) -> list[ErrorRecord]:
    """Errors and observed orders over a doubling sequence of meshes.

    Diverged runs are recorded (``diverged=True``, error nan) instead of raised.
    """
    name = problem.name if isinstance(problem, TestProblem) else problem
    prob = get_problem(name)
    M_list = list(M_list)
    if any(b != 2 * a for a, b in zip(M_list, M_list[1:])):
        raise ValueError(f"M_list must double at every entry, got {M_list}")
    if prob.reference == "self-reference" and reference is None:
        reference = self_reference(prob)
    if floor is None:
        floor = max(EXACT_FLOOR, reference.floor) if reference is not None else EXACT_FLOOR

    records = []
    for M in M_list:
        res = run(SolverConfig(scheme, name, M, sigma, p))
        mesh = res.mesh
        if res.diverged:
            records.append(ErrorRecord(M, mesh.dx, float("nan"), True, res.steps))
            continue
        if reference is not None:
            ref = reference.restrict(M)
        else:
            ref = exact_reference(prob, mesh.nodes, res.state.t)
        err = l1_error(res.state.values, ref, mesh.dx)
        records.append(ErrorRecord(M, mesh.dx, err, False, res.steps, floored=err <= floor))

    for prev, cur in zip(records, records[1:]):
        if not (prev.diverged or cur.diverged) and prev.error > 0 and cur.error > 0:
            cur.order = math.log2(prev.error / cur.error)
    return records


def finest_order(records: Sequence[ErrorRecord]) -> float:
    """Observed order of the finest pair of converged records that are not floored.

    Returns nan when no such pair exists.
    """
    for cur in reversed(records):
        if not (cur.diverged or cur.floored) and math.isfinite(cur.order):
            return cur.order
    return float("nan")
