"""Extended Butcher tableaux of explicit multiderivative Runge-Kutta schemes.

A tableau with ``r`` derivatives and ``s`` stages advances y' = Phi(y) by

    y^{n,l} = y^n + sum_k dt^k sum_{nu<l} a[k-1][l, nu] Phi^{(k-1)}(y^{n,nu})
    y^{n+1} = y^n + sum_k dt^k sum_l     b[k-1][l]     Phi^{(k-1)}(y^{n,l})

Taylor methods are the one-stage special case with b[k-1] = 1/k!.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction as Fr

import numpy as np

SQRT2 = math.sqrt(2.0)
MAX_TAYLOR = 16  # 2p for the largest stencil radius


class TableauValidationError(ValueError):
    """Raised when a tableau violates one of its structural conditions."""


@dataclass(frozen=True)
class MdrkTableau:
    name: str
    r: int
    s: int
    q: int
    c: np.ndarray  # (s,)
    a: np.ndarray  # (r, s, s), a[k-1] strictly lower triangular
    b: np.ndarray  # (r, s)

    @property
    def recommended_p(self) -> int:
        return math.ceil(self.q / 2)


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=object).astype(float)
    arr.setflags(write=False)
    return arr


def _build(name, q, c, a_blocks, b_rows) -> MdrkTableau:
    return MdrkTableau(name, len(b_rows), len(c), q, _frozen(c), _frozen(a_blocks), _frozen(b_rows))


def _mdrk_2_3_2():
    return _build(
        "mdrk-2-3-2", 3, [0, 1],
        [[[0, 0], [1, 0]], [[0, 0], [Fr(1, 2), 0]]],
        [[Fr(2, 3), Fr(1, 3)], [Fr(1, 6), 0]],
    )


def _mdrk_2_4_2():
    return _build(
        "mdrk-2-4-2", 4, [0, Fr(1, 2)],
        [[[0, 0], [Fr(1, 2), 0]], [[0, 0], [Fr(1, 8), 0]]],
        [[1, 0], [Fr(1, 6), Fr(1, 3)]],
    )


def _mdrk_2_5_3():
    return _build(
        "mdrk-2-5-3", 5, [0, Fr(2, 5), 1],
        [
            [[0, 0, 0], [Fr(2, 5), 0, 0], [1, 0, 0]],
            [[0, 0, 0], [Fr(2, 25), 0, 0], [Fr(-1, 4), Fr(3, 4), 0]],
        ],
        [[1, 0, 0], [Fr(1, 8), Fr(25, 72), Fr(1, 36)]],
    )


def _mdrk_3_5_2():
    return _build(
        "mdrk-3-5-2", 5, [0, Fr(2, 5)],
        [
            [[0, 0], [Fr(2, 5), 0]],
            [[0, 0], [Fr(2, 25), 0]],
            [[0, 0], [Fr(4, 375), 0]],
        ],
        [[1, 0], [Fr(1, 2), 0], [Fr(1, 16), Fr(5, 48)]],
    )


def _mdrk_3_7_3():
    c2 = (3.0 - SQRT2) / 7.0
    c3 = (3.0 + SQRT2) / 7.0
    a32 = (122.0 + 71.0 * SQRT2) / 7203.0
    b3 = [1.0 / 30.0, 1.0 / 15.0 + 13.0 * SQRT2 / 480.0, 1.0 / 15.0 - 13.0 * SQRT2 / 480.0]
    return _build(
        "mdrk-3-7-3", 7, [0.0, c2, c3],
        [
            [[0, 0, 0], [c2, 0, 0], [c3, 0, 0]],
            [[0, 0, 0], [c2**2 / 2, 0, 0], [c3**2 / 2, 0, 0]],
            # third-derivative stage row sums to c_3^3/6
            [[0, 0, 0], [c2**3 / 6, 0, 0], [c3**3 / 6 - a32, a32, 0]],
        ],
        [[1, 0, 0], [0.5, 0, 0], b3],
    )


def _mdrk_4_6_2():
    return _build(
        "mdrk-4-6-2", 6, [0, Fr(1, 3)],
        [
            [[0, 0], [Fr(1, 3), 0]],
            [[0, 0], [Fr(1, 18), 0]],
            [[0, 0], [Fr(1, 162), 0]],
            [[0, 0], [Fr(1, 1944), 0]],
        ],
        [[1, 0], [Fr(1, 2), 0], [Fr(1, 6), 0], [Fr(1, 60), Fr(1, 40)]],
    )


def taylor(r: int) -> MdrkTableau:
    """Order-r Taylor method written as a one-stage MDRK scheme."""
    if not 1 <= r <= MAX_TAYLOR:
        raise ValueError(f"Taylor derivative count must lie in 1..{MAX_TAYLOR}, got {r}")
    return _build(
        f"taylor-{r}", r, [0],
        [[[0]] for _ in range(r)],
        [[Fr(1, math.factorial(k))] for k in range(1, r + 1)],
    )


_MDRK = {
    "mdrk-2-3-2": _mdrk_2_3_2,
    "mdrk-2-4-2": _mdrk_2_4_2,
    "mdrk-2-5-3": _mdrk_2_5_3,
    "mdrk-3-5-2": _mdrk_3_5_2,
    "mdrk-3-7-3": _mdrk_3_7_3,
    "mdrk-4-6-2": _mdrk_4_6_2,
}

MDRK_SCHEMES = tuple(_MDRK)
TAYLOR_SCHEMES = tuple(f"taylor-{r}" for r in range(1, MAX_TAYLOR + 1))
SCHEME_IDS = MDRK_SCHEMES + TAYLOR_SCHEMES

_ALIAS = re.compile(r"^\s*(mdrk|taylor)[\s_(-]*([\d,\s-]+?)\)?\s*$", re.IGNORECASE)


def canonical_scheme_id(scheme_id: str) -> str:
    """Normalise spellings such as ``MDRK(2,4,2)`` or ``Taylor(3)``."""
    m = _ALIAS.match(scheme_id)
    if not m:
        return scheme_id
    digits = re.findall(r"\d+", m.group(2))
    return f"{m.group(1).lower()}-" + "-".join(digits)


def get_tableau(scheme_id: str) -> MdrkTableau:
    key = canonical_scheme_id(scheme_id)
    if key in _MDRK:
        return _MDRK[key]()
    if key in TAYLOR_SCHEMES:
        return taylor(int(key.split("-")[1]))
    raise ValueError(f"unknown scheme {scheme_id!r}; valid schemes: {', '.join(SCHEME_IDS)}")


def stability_polynomial(tableau: MdrkTableau, z):
    """Evaluate R(z), the one-step multiplier for y' = y.

    Works elementwise on arrays of ``z``.
    """
    z = np.asarray(z, dtype=complex)
    zk = [z**k for k in range(1, tableau.r + 1)]
    stages = []
    for l in range(tableau.s):
        g = np.ones_like(z)
        for k in range(tableau.r):
            for nu in range(l):
                if tableau.a[k, l, nu] != 0.0:
                    g = g + zk[k] * tableau.a[k, l, nu] * stages[nu]
        stages.append(g)
    out = np.ones_like(z)
    for k in range(tableau.r):
        for l in range(tableau.s):
            if tableau.b[k, l] != 0.0:
                out = out + zk[k] * tableau.b[k, l] * stages[l]
    return out[()] if out.ndim == 0 else out


def stability_coefficients(tableau: MdrkTableau, n_points: int = 64) -> np.ndarray:
    """Taylor coefficients of R(z), recovered by a DFT on the unit circle.

    R is a polynomial of degree at most r*s, so any ``n_points`` above that
    degree recovers its coefficients without aliasing.
    """
    degree = tableau.r * tableau.s
    if n_points <= degree:
        raise ValueError(f"need more than {degree} sample points, got {n_points}")
    roots = np.exp(2j * np.pi * np.arange(n_points) / n_points)
    coeffs = np.fft.fft(stability_polynomial(tableau, roots)) / n_points
    return coeffs[: degree + 1].real


@dataclass
class ValidationReport:
    name: str
    checks: dict[str, bool]
    stability_coefficients: np.ndarray

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def validate_tableau(tableau: MdrkTableau, tol: float = 1e-12) -> ValidationReport:
    """Check explicitness, c_1 = 0, first-order consistency and R(z) = exp(z) + O(z^{q+1})."""
    coeffs = stability_coefficients(tableau)
    checks = {
        "strictly lower triangular": bool(
            all(np.all(np.triu(tableau.a[k]) == 0.0) for k in range(tableau.r))
        ),
        "first abscissa zero": tableau.c[0] == 0.0,
        "first-order condition": abs(tableau.b[0].sum() - 1.0) <= tol,
        "linear order condition": bool(
            all(abs(coeffs[k] - 1.0 / math.factorial(k)) <= tol for k in range(tableau.q + 1))
        ),
    }
    report = ValidationReport(tableau.name, checks, coeffs)
    failed = [name for name, ok in checks.items() if not ok]
    if failed:
        raise TableauValidationError(f"tableau {tableau.name}: failed {', '.join(failed)}")
    return report


def format_tableau(tableau: MdrkTableau) -> str:
    """Extended Butcher tableau, one row per stage then the weight row."""
    lines = [
        f"# {tableau.name}: r = {tableau.r}, q = {tableau.q}, s = {tableau.s}, "
        f"recommended p = {tableau.recommended_p}",
        "# c | a^(1) | a^(2) | ...",
    ]
    for l in range(tableau.s):
        blocks = [" ".join(f"{v:.17g}" for v in tableau.a[k, l]) for k in range(tableau.r)]
        lines.append(f"{tableau.c[l]:.17g} | " + " | ".join(blocks))
    blocks = [" ".join(f"{v:.17g}" for v in tableau.b[k]) for k in range(tableau.r)]
    lines.append("b | " + " | ".join(blocks))
    return "\n".join(lines) + "\n"
