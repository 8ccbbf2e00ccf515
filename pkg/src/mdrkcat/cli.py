"""Command-line front end: ``mdrkcat <subcommand> ...``.

Exit codes: 0 success, 1 solver divergence, 2 usage error, 3 I/O failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .problems import PROBLEM_IDS, get_problem
from .reference import (
    SelfReference,
    convergence_study,
    exact_reference,
    finest_order,
    l1_error,
    self_reference,
)
from .solver import SolverConfig, run
from .stability import PUBLISHED_CFL, analyse
from .stencils import MAX_RADIUS, format_table
from .tableaux import MDRK_SCHEMES, SCHEME_IDS, format_tableau, get_tableau

EXIT_OK, EXIT_DIVERGED, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

logger = logging.getLogger(__name__)

# figure id -> (problem, sigma, schemes as (scheme, p) pairs)
_CAT_CURVES = [(f"taylor-{2 * p}", p) for p in range(1, 7)]
_MDRK_CURVES = [(s, None) for s in MDRK_SCHEMES]
FIGURES = {
    "fig2": ("burgers-cosine", 0.5, _CAT_CURVES + _MDRK_CURVES),
    "fig3": ("burgers-expcossin", 0.5, _MDRK_CURVES),
    "fig4": ("buckley-downpulse", 0.5, _MDRK_CURVES),
    "fig5": ("euler-sinewave", 0.5, _MDRK_CURVES),
    "fig6": ("euler-sine-system", 0.15, _MDRK_CURVES),
}
REPRODUCIBLE = tuple(FIGURES) + ("table2",)


class UsageError(Exception):
    pass


@dataclass
class RunManifest:
    subcommand: str
    scheme: Optional[str] = None
    p: Optional[int] = None
    sigma: float = 0.5
    M_list: list = field(default_factory=list)
    problem: Optional[str] = None
    out: Optional[str] = None
    t_end: Optional[float] = None
    kind: str = "delta"
    sweep: Optional[tuple] = None
    target: Optional[str] = None
    ref_M: int = 8192


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _scheme(text: str) -> str:
    try:
        return get_tableau(text).name
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"unknown scheme {text!r}; valid schemes: {', '.join(SCHEME_IDS)}"
        ) from None


def _problem(text: str) -> str:
    if text not in PROBLEM_IDS:
        raise argparse.ArgumentTypeError(
            f"unknown problem {text!r}; valid problems: {', '.join(PROBLEM_IDS)}"
        )
    return text


def parse_M(text: str) -> list[int]:
    """``"256"`` -> [256]; ``"8:1024"`` -> [8, 16, ..., 1024]."""
    try:
        if ":" in text:
            lo, hi = (int(v) for v in text.split(":"))
            if lo < 1 or hi < lo:
                raise ValueError
            out = [lo]
            while out[-1] * 2 <= hi:
                out.append(out[-1] * 2)
            if out[-1] != hi:
                raise ValueError
            return out
        M = int(text)
        if M < 1:
            raise ValueError
        return [M]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"invalid mesh size {text!r}; expected N or lo:hi with hi = lo * 2^k"
        ) from None


def _sweep(text: str) -> tuple:
    try:
        lo, hi, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid sweep {text!r}; expected min:max:step") from None
    if step <= 0 or hi < lo or lo < 0:
        raise argparse.ArgumentTypeError(f"invalid sweep {text!r}")
    return lo, hi, step


def _positive(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return value


def _radius(text: str) -> int:
    value = int(text)
    if not 1 <= value <= MAX_RADIUS:
        raise argparse.ArgumentTypeError(f"stencil radius must lie in 1..{MAX_RADIUS}, got {text!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mdrkcat", description="Multiderivative Runge-Kutta CAT solver for 1D conservation laws.")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def run_flags(p, need_problem=True):
        p.add_argument("--problem", type=_problem, required=need_problem, help="preset test problem")
        p.add_argument("--scheme", type=_scheme, required=True, help="time integrator id")
        p.add_argument("--p", type=_radius, default=None, help="stencil radius (default ceil(q/2))")
        p.add_argument("--sigma", type=_positive, default=0.5, help="CFL number")
        p.add_argument("--t-end", type=float, default=None, help="override the final time")
        p.add_argument("--out", default=None, help="output directory")

    solve = sub.add_parser("solve", help="run one mesh and dump the final solution")
    run_flags(solve)
    solve.add_argument("--M", type=parse_M, required=True, help="number of cells")

    conv = sub.add_parser("convergence", help="grid refinement study")
    run_flags(conv)
    conv.add_argument("--M", type=parse_M, required=True, help="lo:hi doubling range")
    conv.add_argument("--ref-M", type=int, default=8192, help="cells of the self-reference run")

    stab = sub.add_parser("stability", help="von Neumann analysis and critical CFL")
    stab.add_argument("--scheme", type=_scheme, default=None, help="omit for the six MDRK schemes")
    stab.add_argument("--p", type=_radius, default=None)
    stab.add_argument("--sweep", type=_sweep, default=None, help="sigma_min:sigma_max:step")

    coef = sub.add_parser("coefficients", help="exact stencil coefficient tables")
    coef.add_argument("--p", type=_radius, required=True)
    coef.add_argument("--kind", choices=("delta", "gamma", "lambda"), default="delta")

    tab = sub.add_parser("tableaux", help="extended Butcher tableaux")
    tab.add_argument("--scheme", type=_scheme, default=None, help="omit for all MDRK schemes")

    rep = sub.add_parser("reproduce", help="run the scheme x mesh matrix behind a figure or table")
    rep.add_argument("target", choices=REPRODUCIBLE)
    rep.add_argument("--out", default="results")
    rep.add_argument("--M", type=parse_M, default=None, help="mesh range (default 8:1024)")
    rep.add_argument("--ref-M", type=int, default=8192, help="cells of the self-reference run")
    return parser


def parse_args(argv=None) -> RunManifest:
    ns = build_parser().parse_args(argv)
    man = RunManifest(ns.subcommand)
    for name in ("scheme", "p", "sigma", "problem", "out", "t_end", "kind", "sweep", "target", "ref_M"):
        if hasattr(ns, name) and getattr(ns, name) is not None:
            setattr(man, name, getattr(ns, name))
    if getattr(ns, "M", None):
        man.M_list = ns.M
    if man.subcommand == "solve" and len(man.M_list) != 1:
        raise UsageError("solve takes a single --M value")
    if man.p is not None and man.scheme is not None:
        r = get_tableau(man.scheme).r
        if r > 2 * man.p:
            raise UsageError(f"{man.scheme} has r = {r} and needs p >= {(r + 1) // 2}")
    return man


def _write(path: str, text: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        fh.write(text)


def solution_text(x, values, header: list[str]) -> str:
    cols = ["x"] + [f"w{j + 1}" for j in range(values.shape[1])]
    lines = [f"# {h}" for h in header] + ["# " + " ".join(cols)]
    for xi, row in zip(x, values):
        lines.append(" ".join(f"{v:.17g}" for v in (xi, *row)))
    return "\n".join(lines) + "\n"


def convergence_text(records, header: list[str]) -> str:
    lines = [f"# {h}" for h in header] + ["# dx l1_error"]
    for rec in records:
        if rec.diverged:
            lines.append(f"# diverged: M = {rec.M}, dx = {rec.dx:.17g}")
        else:
            lines.append(f"{rec.dx:.17g} {rec.error:.17g}")
    return "\n".join(lines) + "\n"


def _tag(man: RunManifest) -> str:
    return f"{man.scheme}_{man.problem}_sigma{man.sigma:g}"


def _cmd_solve(man: RunManifest) -> int:
    M = man.M_list[0]
    problem = get_problem(man.problem)
    res = run(SolverConfig(man.scheme, man.problem, M, man.sigma, man.p, man.t_end))
    state = res.state
    summary = f"{man.scheme} p={res.p} {man.problem} M={M}: t={state.t:.6g} steps={res.steps}"
    if res.dts:
        summary += f" dt_min={min(res.dts):.6g} dt_max={max(res.dts):.6g}"
    if not res.diverged and problem.reference != "self-reference":
        ref = exact_reference(problem, res.mesh.nodes, state.t)
        summary += f" l1_error={l1_error(state, ref, res.mesh.dx):.6e}"
    if res.diverged:
        summary += f" DIVERGED ({res.message})"
    print(summary)
    if man.out:
        header = [f"scheme {man.scheme} p {res.p} problem {man.problem} M {M} sigma {man.sigma:g}",
                  f"t {state.t:.17g} steps {res.steps}"]
        if res.diverged:
            header.append(f"diverged: last valid state shown; {res.message}")
        _write(os.path.join(man.out, f"solution_{_tag(man)}_M{M}.dat"),
               solution_text(res.mesh.nodes, state.values, header))
    return EXIT_DIVERGED if res.diverged else EXIT_OK


def _reference_for(problem: str, ref_M: int, cache: dict) -> Optional[SelfReference]:
    if get_problem(problem).reference != "self-reference":
        return None
    if problem not in cache:
        logger.info("computing self-reference on %d cells", ref_M)
        cache[problem] = self_reference(problem, fine_M=ref_M)
    return cache[problem]


def _study(scheme, p, problem, sigma, M_list, ref_M, cache):
    ref = _reference_for(problem, ref_M, cache)
    if ref is not None:
        bad = [M for M in M_list if ref_M % M]
        if bad:
            raise UsageError(f"--ref-M {ref_M} is not a multiple of M = {bad}")
    return convergence_study(problem, scheme, sigma, M_list, p=p, reference=ref)


def _print_records(records) -> None:
    print(f"{'M':>6} {'dx':>12} {'l1_error':>12} {'order':>6}")
    for rec in records:
        err = "diverged" if rec.diverged else f"{rec.error:.4e}"
        order = "" if rec.order != rec.order else f"{rec.order:.2f}"
        flag = " (floor)" if rec.floored else ""
        print(f"{rec.M:>6} {rec.dx:>12.4e} {err:>12} {order:>6}{flag}")


def _cmd_convergence(man: RunManifest) -> int:
    records = _study(man.scheme, man.p, man.problem, man.sigma, man.M_list, man.ref_M, {})
    _print_records(records)
    if man.out:
        header = [f"scheme {man.scheme} problem {man.problem} sigma {man.sigma:g}"]
        _write(os.path.join(man.out, f"convergence_{_tag(man)}.dat"), convergence_text(records, header))
    return EXIT_DIVERGED if any(r.diverged for r in records) else EXIT_OK


def _cmd_stability(man: RunManifest) -> int:
    if man.scheme is None:
        rows = [(s, PUBLISHED_CFL[s][0]) for s in MDRK_SCHEMES]
    else:
        rows = [(man.scheme, man.p)]
    sweep = None
    if man.sweep:
        lo, hi, step = man.sweep
        sweep = np.arange(lo, hi + 0.5 * step, step)
    for scheme, p in rows:
        rep = analyse(scheme, p, sweep)
        print(f"{rep.scheme_id} p={rep.p} sigma*={rep.critical_cfl:.4f}")
        if rep.sweep:
            print("# sigma max_g")
            for s, g in rep.sweep:
                print(f"{s:.17g} {g:.17g}")
    return EXIT_OK


def _cmd_reproduce(man: RunManifest) -> int:
    M_list = man.M_list or [8 * 2**k for k in range(8)]
    out = man.out or "results"
    manifest = {"target": man.target, "files": [], "diverged": []}
    if man.target == "table2":
        lines = ["# scheme p sigma_star published"]
        for scheme in MDRK_SCHEMES:
            p, published = PUBLISHED_CFL[scheme]
            rep = analyse(scheme, p)
            lines.append(f"{scheme} {p} {rep.critical_cfl:.17g} {published}")
            print(f"{scheme} p={p} sigma*={rep.critical_cfl:.4f} (published {published})")
        path = os.path.join(out, "table2.dat")
        _write(path, "\n".join(lines) + "\n")
        manifest["files"].append(path)
    else:
        problem, sigma, curves = FIGURES[man.target]
        cache = {}
        for scheme, p in curves:
            tab = get_tableau(scheme)
            p_eff = p or tab.recommended_p
            records = _study(scheme, p_eff, problem, sigma, M_list, man.ref_M, cache)
            label = f"cat-{p_eff}" if scheme.startswith("taylor") else scheme
            path = os.path.join(out, man.target, f"{label}.dat")
            header = [f"scheme {scheme} p {p_eff} problem {problem} sigma {sigma:g}"]
            _write(path, convergence_text(records, header))
            expected = 2 * p_eff if scheme.startswith("taylor") else min(2 * p_eff, tab.q)
            order = finest_order(records)
            manifest["files"].append({"file": path, "expected_slope": expected,
                                      "observed_slope": None if order != order else order})
            manifest["diverged"] += [{"curve": label, "M": r.M} for r in records if r.diverged]
            print(f"{label}: expected slope {expected}, observed {order:.2f}")
    _write(os.path.join(out, f"{man.target}_manifest.json"), json.dumps(manifest, indent=2) + "\n")
    return EXIT_OK


def execute(man: RunManifest) -> int:
    if man.subcommand == "solve":
        return _cmd_solve(man)
    if man.subcommand == "convergence":
        return _cmd_convergence(man)
    if man.subcommand == "stability":
        return _cmd_stability(man)
    if man.subcommand == "coefficients":
        sys.stdout.write(format_table(man.p, man.kind))
        return EXIT_OK
    if man.subcommand == "tableaux":
        for scheme in [man.scheme] if man.scheme else MDRK_SCHEMES:
            sys.stdout.write(format_tableau(get_tableau(scheme)))
        return EXIT_OK
    if man.subcommand == "reproduce":
        return _cmd_reproduce(man)
    raise UsageError(f"unknown subcommand {man.subcommand!r}")


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        man = parse_args(argv)
        return execute(man)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"mdrkcat: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
