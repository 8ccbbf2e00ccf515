"""Periodic test problems: Burgers, Buckley-Leverett and 1D Euler."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .fluxes import primitive_to_conservative

PI = math.pi


@dataclass(frozen=True)
class TestProblem:
    """A periodic initial-value problem on ``[a, b]``.

    ``initial`` maps node positions ``(M,)`` to states ``(M, m)``.  Scalar
    problems also expose the profile ``w0`` and its derivative ``dw0`` for
    the characteristics solvers.  ``reference`` is one of
    ``"characteristics"``, ``"advected-profile"`` or ``"self-reference"``.
    """

    __test__ = False  # not a pytest class

    name: str
    domain: tuple[float, float]
    flux: str
    t_end: float
    initial: Callable[[np.ndarray], np.ndarray]
    reference: str
    w0: Optional[Callable] = None
    dw0: Optional[Callable] = None
    breaking_time: Optional[float] = None

    @property
    def length(self) -> float:
        return self.domain[1] - self.domain[0]


def _scalar(w0):
    return lambda x: w0(np.asarray(x, dtype=float))[:, None]


def _cosine(x):
    return 0.25 * np.cos(PI * x)


def _cosine_dx(x):
    return -0.25 * PI * np.sin(PI * x)


def _expcossin(x):
    return 0.25 * np.exp(np.cos(PI * x) + np.sin(PI * x))


def _expcossin_dx(x):
    return 0.25 * PI * (np.cos(PI * x) - np.sin(PI * x)) * np.exp(np.cos(PI * x) + np.sin(PI * x))


def _downpulse(x):
    return 1.0 - 0.75 * np.cos(0.5 * PI * x) ** 2


def _downpulse_dx(x):
    return 0.75 * PI * np.cos(0.5 * PI * x) * np.sin(0.5 * PI * x)


def euler_sinewave_primitive(x):
    x = np.asarray(x, dtype=float)
    return np.stack([1.0 + 0.3 * np.sin(PI * x), np.ones_like(x), np.ones_like(x)], axis=-1)


def _euler_sinewave(x):
    return primitive_to_conservative(euler_sinewave_primitive(x))


def _euler_sine_system(x):
    x = np.asarray(x, dtype=float)
    base = np.array([0.75, 0.25, 0.75])
    return base + 0.5 * np.sin(PI * x)[:, None] * np.ones(3)


PROBLEMS = {
    "burgers-cosine": TestProblem(
        "burgers-cosine", (0.0, 2.0), "burgers", 0.8, _scalar(_cosine), "characteristics",
        _cosine, _cosine_dx, 4.0 / PI,
    ),
    "burgers-expcossin": TestProblem(
        "burgers-expcossin", (0.0, 2.0), "burgers", 0.3, _scalar(_expcossin), "characteristics",
        _expcossin, _expcossin_dx, 4.0 / (PI * math.e),
    ),
    "buckley-downpulse": TestProblem(
        "buckley-downpulse", (-1.0, 1.0), "buckley-leverett", 0.1, _scalar(_downpulse),
        "characteristics", _downpulse, _downpulse_dx,
    ),
    "euler-sinewave": TestProblem(
        "euler-sinewave", (0.0, 4.0), "euler", 0.8, _euler_sinewave, "advected-profile",
    ),
    "euler-sine-system": TestProblem(
        "euler-sine-system", (0.0, 2.0), "euler", 0.2, _euler_sine_system, "self-reference",
    ),
}

PROBLEM_IDS = tuple(PROBLEMS)


def get_problem(name: str) -> TestProblem:
    try:
        return PROBLEMS[name]
    except KeyError:
        raise ValueError(f"unknown problem {name!r}; valid problems: {', '.join(PROBLEM_IDS)}") from None
