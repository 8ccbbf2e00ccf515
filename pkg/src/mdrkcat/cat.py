"""Compact approximate Taylor (CAT) recursion for flux time derivatives.

Given the 2p nodal states around an interface, the recursion returns
approximations of d^k/dt^k f(w) at each of the 2p nodes using only flux
evaluations:

1. ``ftilde[0][j] = f(w_j)``;
2. for k = 2..r, a time derivative of ``w`` is recovered from the previous
   flux derivative through w_t = -f(w)_x (one-sided 2p-point stencil
   differentiated at node j),
3. the flux is evaluated on the truncated Taylor series of ``w`` at the
   2p temporal offsets rho = -p+1..p, and
4. the (k-1)-th temporal derivative at rho = 0 of those fluxes gives
   ``ftilde[k-1][j]``.

All functions broadcast over leading axes, so one call handles every
interface of the grid at once: ``window`` has shape ``(..., 2p, m)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .fluxes import FluxModel
from .stencils import FloatStencil


class DivergedError(FloatingPointError):
    """The solution left the finite (or admissible) range."""

    def __init__(self, message: str, step: int | None = None, stage: int | str | None = None,
                 time: float | None = None):
        super().__init__(message)
        self.step = step
        self.stage = stage
        self.time = time


@dataclass
class CatWorkspace:
    p: int
    r: int
    m: int
    ftilde: list  # r arrays (..., 2p, m); ftilde[k] ~ d^k/dt^k f at the window nodes
    wtilde: list  # r-1 arrays (..., 2p, m); wtilde[k-1] ~ d^k/dt^k w


def flux_time_derivatives(window, flux: FluxModel, stencil: FloatStencil, r: int,
                          dt: float, dx: float) -> CatWorkspace:
    """Run the CAT recursion on one window or a batch of windows.

    Parameters
    ----------
    window : array_like, shape (..., 2p, m)
        States at offsets -p+1..p.
    flux : FluxModel
    stencil : FloatStencil
        Coefficients for the radius p of the window.
    r : int
        Number of flux time derivatives to build (orders 0..r-1), 1 <= r <= 2p.
    dt, dx : float
        Timestep and mesh width.

    Raises
    ------
    DivergedError
        If any approximation is not finite.
    """
    p = stencil.p
    width = 2 * p
    window = np.asarray(window, dtype=float)
    if window.shape[-2] != width:
        raise ValueError(f"window needs {width} nodes for p={p}, got {window.shape[-2]}")
    if not 1 <= r <= width:
        raise ValueError(f"derivative count r must lie in 1..{width} for p={p}, got {r}")
    if dt <= 0.0 or dx <= 0.0:
        raise ValueError("dt and dx must be positive")

    d1 = stencil.gamma[1]  # [j, rho]: first derivative at node j
    rho = np.arange(-p + 1, p + 1, dtype=float)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        ftilde = [flux.auxiliary(window)]
        wtilde = []
        for k in range(2, r + 1):
            wtilde.append(-(d1 @ ftilde[k - 2]) / dx)
            # taylor[rho, order] = (rho dt)^order / order!
            taylor = np.stack([(rho * dt) ** order / factorial(order) for order in range(k)], axis=-1)
            series = np.stack([window] + wtilde, axis=-2)  # (..., j, order, m)
            shifted = taylor @ series  # (..., j, rho, m)
            taylor_flux = flux.auxiliary(shifted)
            dk = stencil.gamma[k - 1][p - 1]  # (k-1)-th derivative at rho = 0
            ftilde.append((dk @ taylor_flux) / dt ** (k - 1))
        if not np.isfinite(ftilde[-1]).all():
            raise DivergedError("non-finite flux time derivative in CAT recursion")
    return CatWorkspace(p, r, window.shape[-1], ftilde, wtilde)


def halfway_flux_contribution(ws: CatWorkspace, k: int, stencil: FloatStencil) -> np.ndarray:
    """Interface reconstruction sum_j lambda^0_j ftilde[k-1][j], shape (..., m)."""
    if not 1 <= k <= ws.r:
        raise ValueError(f"k must lie in 1..{ws.r}, got {k}")
    return stencil.lam[0] @ ws.ftilde[k - 1]
