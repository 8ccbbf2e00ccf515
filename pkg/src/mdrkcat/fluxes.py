"""Flux functions and wave-speed bounds.

Every model works on arrays whose trailing axis holds the ``m`` solution
components, so a grid state is ``(M, m)`` and a batch of CAT windows is
``(M, 2p, 2p, m)``.  Scalar laws use ``m = 1``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


class InadmissibleStateError(ArithmeticError):
    """A state outside the flux's domain (e.g. negative pressure) was evaluated."""

    def __init__(self, message: str, node=None):
        super().__init__(message)
        self.node = node


@dataclass(frozen=True)
class FluxModel:
    """A flux ``f`` plus the spectral radius of its Jacobian, both per state.

    ``max_wave_speed`` maps ``(..., m)`` to ``(...)``.  It is only used for
    timestep selection; the CAT kernel never sees a derivative of ``f``.

    ``evaluate_unchecked`` skips admissibility checks.  The CAT kernel uses
    it on Taylor-shifted auxiliary states, which are not solution values
    and may leave the physical domain while the flux formula stays finite.
    """

    name: str
    m: int
    evaluate: Callable[[np.ndarray], np.ndarray]
    max_wave_speed: Callable[[np.ndarray], np.ndarray]
    evaluate_unchecked: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def auxiliary(self, w):
        """Flux of an auxiliary (non-solution) state."""
        return (self.evaluate_unchecked or self.evaluate)(w)


def advection_flux(alpha: float = 1.0) -> FluxModel:
    alpha = float(alpha)
    return FluxModel(
        "advection",
        1,
        lambda w: alpha * w,
        lambda w: np.full(np.shape(w)[:-1], abs(alpha)),
    )


def burgers_flux() -> FluxModel:
    return FluxModel("burgers", 1, lambda w: 0.5 * w * w, lambda w: np.abs(w[..., 0]))


def _bl_flux(w):
    w2 = w * w
    return 4.0 * w2 / (4.0 * w2 + (1.0 - w) ** 2)


def buckley_leverett_derivative(w):
    """Analytic f'(w) of the Buckley-Leverett flux (CFL control and exact solutions only)."""
    d = 4.0 * w * w + (1.0 - w) ** 2
    return 8.0 * w * (1.0 - w) / (d * d)


def buckley_leverett_second_derivative(w):
    d = 5.0 * w * w - 2.0 * w + 1.0
    return 8.0 * ((1.0 - 2.0 * w) * d - 2.0 * w * (1.0 - w) * (10.0 * w - 2.0)) / d**3


def buckley_leverett_flux() -> FluxModel:
    return FluxModel(
        "buckley-leverett",
        1,
        _bl_flux,
        lambda w: np.abs(buckley_leverett_derivative(w[..., 0])),
    )


def conservative_to_primitive(w, gamma: float = 1.4):
    """(rho, rho u, E) -> (rho, u, pressure) along the trailing axis."""
    w = np.asarray(w, dtype=float)
    rho = w[..., 0]
    u = w[..., 1] / rho
    pressure = (gamma - 1.0) * (w[..., 2] - 0.5 * rho * u * u)
    return np.stack([rho, u, pressure], axis=-1)


def primitive_to_conservative(prim, gamma: float = 1.4):
    prim = np.asarray(prim, dtype=float)
    rho, u, pressure = prim[..., 0], prim[..., 1], prim[..., 2]
    return np.stack([rho, rho * u, pressure / (gamma - 1.0) + 0.5 * rho * u * u], axis=-1)


def _first_bad(mask) -> tuple:
    return tuple(int(i) for i in np.argwhere(mask)[0])


def euler_flux(gamma: float = 1.4) -> FluxModel:
    gm1 = gamma - 1.0

    def _split(w):
        # component-major copy: strided access along the last axis is slow
        rho, mom, energy = np.moveaxis(w.reshape(-1, 3), -1, 0).copy()
        u = mom / rho
        pressure = gm1 * (energy - 0.5 * mom * u)
        if not (rho.min(initial=1.0) > 0.0 and pressure.min(initial=1.0) > 0.0):
            bad = ~((rho > 0.0) & (pressure > 0.0)).reshape(w.shape[:-1])
            idx = _first_bad(bad)
            flat = np.ravel_multi_index(idx, bad.shape) if bad.ndim else 0
            raise InadmissibleStateError(
                f"non-positive density or pressure at node {idx}: "
                f"rho = {rho[flat]:.6g}, pressure = {pressure[flat]:.6g}",
                node=idx,
            )
        return rho, mom, energy, u, pressure

    def _flux(rho, mom, energy, shape):
        u = mom / rho
        pressure = gm1 * (energy - 0.5 * mom * u)
        out = np.empty((3, mom.size))
        out[0] = mom
        np.multiply(mom, u, out=out[1])
        out[1] += pressure
        np.add(energy, pressure, out=out[2])
        out[2] *= u
        return out.T.reshape(shape)

    def evaluate(w):
        w = np.asarray(w, dtype=float)
        rho, mom, energy, _, _ = _split(w)
        return _flux(rho, mom, energy, w.shape)

    def evaluate_unchecked(w):
        w = np.asarray(w, dtype=float)
        rho, mom, energy = np.moveaxis(w.reshape(-1, 3), -1, 0).copy()
        return _flux(rho, mom, energy, w.shape)

    def max_wave_speed(w):
        w = np.asarray(w, dtype=float)
        rho, _, _, u, pressure = _split(w)
        return (np.abs(u) + np.sqrt(gamma * pressure / rho)).reshape(w.shape[:-1])

    return FluxModel("euler", 3, evaluate, max_wave_speed, evaluate_unchecked)


FLUX_NAMES = ("advection", "burgers", "buckley-leverett", "euler")


def get_flux(name: str, **params) -> FluxModel:
    if name == "advection":
        return advection_flux(params.get("alpha", 1.0))
    if name == "burgers":
        return burgers_flux()
    if name == "buckley-leverett":
        return buckley_leverett_flux()
    if name == "euler":
        return euler_flux(params.get("gamma", 1.4))
    raise ValueError(f"unknown flux {name!r}; valid fluxes: {', '.join(FLUX_NAMES)}")
