"""Independent reference implementations used by several test modules."""
import numpy as np

from mdrkcat.stencils import central_derivative_coeffs


def central_operator(values, p, k):
    """P^(k) w_j = sum_r delta^k_{p,r} w_{j+r} on a periodic grid (1D array)."""
    delta = [float(c) for c in central_derivative_coeffs(p, k)]
    return sum(d * np.roll(values, -r) for d, r in zip(delta, range(-p, p + 1)))


def mdrk_lax_wendroff_step(values, tableau, p, alpha, dt, dx):
    """One linear MDRK-LW step for w_t + alpha w_x = 0, coded from the delta operators."""
    sigma = alpha * dt / dx
    stages = []
    for l in range(tableau.s):
        w = values.copy()
        for k in range(1, tableau.r + 1):
            for nu in range(l):
                coeff = tableau.a[k - 1, l, nu]
                if coeff:
                    w = w + (-sigma) ** k * coeff * central_operator(stages[nu], p, k)
        stages.append(w)
    new = values.copy()
    for k in range(1, tableau.r + 1):
        for l in range(tableau.s):
            coeff = tableau.b[k - 1, l]
            if coeff:
                new = new + (-sigma) ** k * coeff * central_operator(stages[l], p, k)
    return new


def smooth_random_field(M, rng, modes=5):
    """Random periodic trigonometric polynomial sampled on M nodes."""
    x = 2 * np.pi * np.arange(M) / M
    out = np.full(M, rng.normal())
    for n in range(1, modes + 1):
        out += rng.normal() / n * np.cos(n * x) + rng.normal() / n * np.sin(n * x)
    return out
