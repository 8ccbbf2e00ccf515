"""Von Neumann analysis of MDRKCAT schemes for linear advection.

For f(w) = alpha*w the scheme reduces to a multistage Lax-Wendroff method
built from the centered operators P^(k), whose Fourier symbols are

    Psym_k(kappa) = sum_{j=-p}^{p} delta^k_{p,j} exp(i j kappa)      (dx = 1).

A Fourier mode then obeys the stage recurrence

    g_l = 1 + sum_k (-sigma)^k Psym_k sum_{nu<l} a[k-1][l, nu] g_nu
    g   = 1 + sum_k (-sigma)^k Psym_k sum_l     b[k-1][l]     g_l .
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .stencils import float_stencil
from .tableaux import MdrkTableau, get_tableau

N_KAPPA_CELLS = 1000
STABLE_TOL = 1e-12


class BracketError(ValueError):
    """The CFL bisection bracket does not straddle the stability boundary."""


def fourier_symbol(p: int, k: int, kappa):
    """Symbol of the centered k-th derivative stencil of radius ``p``."""
    if not 0 <= k <= 2 * p:
        raise ValueError(f"k must lie in 0..{2 * p} for p={p}, got {k}")
    kappa = np.asarray(kappa, dtype=float)
    offsets = np.arange(-p, p + 1)
    phases = np.exp(1j * np.multiply.outer(kappa, offsets))
    return phases @ float_stencil(p).delta[k]


def kappa_grid(n_cells: int = N_KAPPA_CELLS) -> np.ndarray:
    """Uniform grid on [-pi, pi] with both endpoints (n_cells + 1 points)."""
    return np.linspace(-np.pi, np.pi, n_cells + 1)


def amplification(tableau: MdrkTableau, p: int, sigma, kappa):
    """Amplification factor g(kappa); broadcasts over ``sigma`` and ``kappa``."""
    if tableau.r > 2 * p:
        raise ValueError(f"{tableau.name} needs r = {tableau.r} <= 2p, but p = {p}")
    sigma = np.asarray(sigma, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    if np.any(sigma < 0):
        raise ValueError("CFL number must be non-negative")
    # factor[k-1] = (-sigma)^k Psym_k(kappa)
    factor = [(-sigma) ** k * fourier_symbol(p, k, kappa) for k in range(1, tableau.r + 1)]
    shape = np.broadcast(sigma, kappa).shape
    stages = []
    for l in range(tableau.s):
        g = np.ones(shape, dtype=complex)
        for k in range(tableau.r):
            terms = [tableau.a[k, l, nu] * stages[nu] for nu in range(l) if tableau.a[k, l, nu]]
            if terms:
                g = g + factor[k] * sum(terms)
        stages.append(g)
    g = np.ones(shape, dtype=complex)
    for k in range(tableau.r):
        terms = [tableau.b[k, l] * stages[l] for l in range(tableau.s) if tableau.b[k, l]]
        if terms:
            g = g + factor[k] * sum(terms)
    return g[()] if g.ndim == 0 else g


def max_amplification(tableau: MdrkTableau, p: int, sigma: float,
                      n_cells: int = N_KAPPA_CELLS) -> float:
    return float(np.abs(amplification(tableau, p, sigma, kappa_grid(n_cells))).max())


def is_stable(tableau: MdrkTableau, p: int, sigma: float, n_cells: int = N_KAPPA_CELLS) -> bool:
    return max_amplification(tableau, p, sigma, n_cells) <= 1.0 + STABLE_TOL


def critical_cfl(tableau: MdrkTableau, p: int | None = None, upper: float = 3.0,
                 width: float = 1e-6, n_cells: int = N_KAPPA_CELLS) -> float:
    """Largest stable CFL number, by bisection on ``[0, upper]``.

    Returns the lower (stable) end of the final bracket.
    """
    p = tableau.recommended_p if p is None else p
    if is_stable(tableau, p, upper, n_cells):
        raise BracketError(
            f"{tableau.name} with p = {p} is still stable at sigma = {upper} "
            f"(max|g| = {max_amplification(tableau, p, upper, n_cells):.6g}); raise the upper bound"
        )
    lo, hi = 0.0, upper
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if is_stable(tableau, p, mid, n_cells):
            lo = mid
        else:
            hi = mid
    return lo


@dataclass
class StabilityReport:
    scheme_id: str
    p: int
    n_cells: int
    critical_cfl: float
    sweep: list = field(default_factory=list)  # (sigma, max|g|)


def analyse(scheme_id: str, p: int | None = None, sweep=None,
            n_cells: int = N_KAPPA_CELLS) -> StabilityReport:
    tableau = get_tableau(scheme_id)
    p = tableau.recommended_p if p is None else p
    try:
        sigma_star = critical_cfl(tableau, p, n_cells=n_cells)
    except BracketError:
        sigma_star = float("nan")
    rows = [(float(s), max_amplification(tableau, p, s, n_cells)) for s in (sweep if sweep is not None else [])]
    return StabilityReport(tableau.name, p, n_cells, sigma_star, rows)


# published critical CFL numbers: scheme -> (p, sigma*)
PUBLISHED_CFL = {
    "mdrk-2-3-2": (2, 1.2954),
    "mdrk-2-4-2": (2, 1.4718),
    "mdrk-2-5-3": (3, 1.0619),
    "mdrk-3-5-2": (3, 0.4275),
    "mdrk-3-7-3": (4, 0.2300),
    "mdrk-4-6-2": (3, 0.8563),
}
