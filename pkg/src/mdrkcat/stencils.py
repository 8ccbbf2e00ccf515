"""Exact Lagrangian finite-difference coefficients.

Three coefficient families live here, all generated in rational arithmetic
and converted to doubles once:

* ``delta[k][j]``  -- k-th derivative at 0 of the centered (2p+1)-point
  Lagrange basis on nodes -p..p,
* ``gamma[k][m][j]`` -- k-th derivative at m of the 2p-point Lagrange basis
  on nodes -p+1..p,
* ``lam[k-1][j]``  -- half-way coefficients that split ``delta[k]`` into a
  difference of two interface reconstructions.

Index conventions: every coefficient vector is stored left to right, so the
entry for offset ``j`` of a centered vector sits at position ``j + p`` and
the entry for offset ``j`` of a 2p-point vector sits at ``j + p - 1``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Sequence

import numpy as np

MAX_RADIUS = 8

Poly = list  # ascending coefficients, Fraction entries


class StencilInvariantError(RuntimeError):
    """A defining relation of the coefficient tables failed to hold."""


def _check_radius(p: int) -> None:
    if not isinstance(p, (int, np.integer)) or not 1 <= p <= MAX_RADIUS:
        raise ValueError(f"stencil radius p must be an integer in 1..{MAX_RADIUS}, got {p!r}")


def _poly_mul_linear(poly: Poly, root: int, scale: Fraction) -> Poly:
    # poly * (w - root) * scale
    out = [Fraction(0)] * (len(poly) + 1)
    for i, c in enumerate(poly):
        out[i + 1] += c * scale
        out[i] -= c * root * scale
    return out


def _lagrange_basis(nodes: Sequence[int], j: int) -> Poly:
    poly: Poly = [Fraction(1)]
    for r in nodes:
        if r != j:
            poly = _poly_mul_linear(poly, r, Fraction(1, j - r))
    return poly


def _derivative_at(poly: Poly, k: int, x: int) -> Fraction:
    """k-th derivative of ``poly`` evaluated at integer ``x``."""
    total = Fraction(0)
    for n in range(k, len(poly)):
        total += poly[n] * (factorial(n) // factorial(n - k)) * Fraction(x) ** (n - k)
    return total


def central_derivative_coeffs(p: int, k: int) -> tuple[Fraction, ...]:
    """Centered coefficients ``delta^k_{p,j}`` for j = -p..p.

    Examples
    --------
    >>> [str(c) for c in central_derivative_coeffs(1, 1)]
    ['-1/2', '0', '1/2']
    """
    _check_radius(p)
    if not 0 <= k <= 2 * p:
        raise ValueError(f"derivative order k must lie in 0..{2 * p} for p={p}, got {k}")
    return _central_table(p)[k]


def offset_derivative_coeffs(p: int, k: int, m: int) -> tuple[Fraction, ...]:
    """Non-centered coefficients ``gamma^{k,m}_{p,j}`` for j = -p+1..p."""
    _check_radius(p)
    if not 0 <= k <= 2 * p - 1:
        raise ValueError(f"derivative order k must lie in 0..{2 * p - 1} for p={p}, got {k}")
    if not -p + 1 <= m <= p:
        raise ValueError(f"evaluation offset m must lie in {-p + 1}..{p}, got {m}")
    return _offset_table(p)[k][m + p - 1]


def halfway_coeffs(p: int, k: int) -> tuple[Fraction, ...]:
    """Half-way coefficients ``lambda^{k-1}_{p,j}`` for j = -p+1..p.

    Obtained by back-substitution from the right end of ``delta^k``; the
    leftover left-end relation is checked rather than used.
    """
    _check_radius(p)
    if not 1 <= k <= 2 * p:
        raise ValueError(f"derivative order k must lie in 1..{2 * p} for p={p}, got {k}")
    return _halfway_table(p)[k - 1]


@lru_cache(maxsize=None)
def _central_table(p: int) -> tuple[tuple[Fraction, ...], ...]:
    nodes = range(-p, p + 1)
    basis = [_lagrange_basis(nodes, j) for j in nodes]
    return tuple(tuple(_derivative_at(b, k, 0) for b in basis) for k in range(2 * p + 1))


@lru_cache(maxsize=None)
def _offset_table(p: int) -> tuple[tuple[tuple[Fraction, ...], ...], ...]:
    nodes = range(-p + 1, p + 1)
    basis = [_lagrange_basis(nodes, j) for j in nodes]
    return tuple(
        tuple(tuple(_derivative_at(b, k, m) for b in basis) for m in nodes)
        for k in range(2 * p)
    )


@lru_cache(maxsize=None)
def _halfway_table(p: int) -> tuple[tuple[Fraction, ...], ...]:
    rows = []
    for k in range(1, 2 * p + 1):
        delta = _central_table(p)[k]  # position j + p
        lam = [Fraction(0)] * (2 * p)  # position j + p - 1
        lam[-1] = delta[-1]
        for j in range(p - 1, -p, -1):
            lam[j + p - 1] = delta[j + p] + lam[j + p]
        if delta[0] != -lam[0]:
            raise StencilInvariantError(
                f"half-way relation delta^{k}_{{{p},{-p}}} = -lambda_{{{p},{-p + 1}}} violated"
            )
        rows.append(tuple(lam))
    return tuple(rows)


@dataclass(frozen=True)
class StencilCoefficients:
    """Exact coefficient tables for one stencil radius ``p``.

    ``delta[k]`` has 2p+1 entries (k = 0..2p), ``gamma[k][m + p - 1]`` has
    2p entries (k = 0..2p-1, m = -p+1..p) and ``lam[k - 1]`` has 2p entries
    (k = 1..2p).
    """

    p: int
    delta: tuple[tuple[Fraction, ...], ...]
    gamma: tuple[tuple[tuple[Fraction, ...], ...], ...]
    lam: tuple[tuple[Fraction, ...], ...]

    def gamma_at(self, k: int, m: int) -> tuple[Fraction, ...]:
        return self.gamma[k][m + self.p - 1]


@dataclass(frozen=True)
class FloatStencil:
    """Double-precision copy of :class:`StencilCoefficients`.

    Arrays are read-only: ``delta`` is (2p+1, 2p+1) indexed [k, j+p],
    ``gamma`` is (2p, 2p, 2p) indexed [k, m+p-1, j+p-1] and ``lam`` is
    (2p, 2p) indexed [k-1, j+p-1].
    """

    p: int
    delta: np.ndarray
    gamma: np.ndarray
    lam: np.ndarray


@lru_cache(maxsize=None)
def stencil_coefficients(p: int) -> StencilCoefficients:
    _check_radius(p)
    return StencilCoefficients(p, _central_table(p), _offset_table(p), _halfway_table(p))


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=object).astype(float)
    arr.setflags(write=False)
    return arr


def to_float(coeffs: StencilCoefficients) -> FloatStencil:
    """Round every rational to the nearest double."""
    return FloatStencil(coeffs.p, _frozen(coeffs.delta), _frozen(coeffs.gamma), _frozen(coeffs.lam))


@lru_cache(maxsize=None)
def float_stencil(p: int) -> FloatStencil:
    return to_float(stencil_coefficients(p))


def format_table(p: int, kind: str = "delta") -> str:
    """Text dump of one coefficient family, one row per derivative order."""
    coeffs = stencil_coefficients(p)
    lines = [f"# {kind} coefficients, p = {p}"]
    if kind == "delta":
        for k, row in enumerate(coeffs.delta):
            lines.append(f"# k = {k}")
            lines.append(" ".join(_fmt(c) for c in row))
    elif kind == "gamma":
        for k, block in enumerate(coeffs.gamma):
            for m_idx, row in enumerate(block):
                lines.append(f"# k = {k}, m = {m_idx - p + 1}")
                lines.append(" ".join(_fmt(c) for c in row))
    elif kind == "lambda":
        for k, row in enumerate(coeffs.lam, start=1):
            lines.append(f"# k = {k} (lambda^{k - 1})")
            lines.append(" ".join(_fmt(c) for c in row))
    else:
        raise ValueError(f"unknown coefficient kind {kind!r}; expected delta, gamma or lambda")
    return "\n".join(lines) + "\n"


def _fmt(c: Fraction) -> str:
    return f"{c.numerator}/{c.denominator}"
