"""Command-line entry point: ``liediam <subcommand> [options]``.

Every subcommand writes one JSON document (to stdout or ``--out``) carrying
the toolkit version, the seed and the budgets used.  Wall-clock timings live
under a ``"timing"`` key and are the only part that varies between runs.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .commutators import commutator_sequence, construct_witness_pair, witness_angle
from .constants import BETA, solve_beta
from .errors import DomainError, NumericalError, ValidationError
from .groups import (
    distance,
    exp_map,
    log_map,
    make_algebra_vector,
    op_norm_algebra,
    op_norm_group,
    op_norm_group_eigenphases,
    parse_kind,
    rot_x,
    rot_z,
    so,
)
from .quotient import (
    diagonal_quotient_estimate,
    diameter_lower_estimate,
    icosahedral_group,
    so3_grid_diameter,
)
from .serialization import (
    element_from_json,
    element_to_json,
    gate_set_from_json,
    kind_from_json,
    load_json,
    subgroup_from_json,
    subspace_from_json,
    subspace_to_json,
)
from .subspaces import (
    LargeAngleNotFound,
    adjoint_representation,
    angle_between,
    defining_representation,
    find_large_angle,
    random_subspace,
    schur_average,
)
from .universality import UniversalityConfig, icosahedral_gate_set, test_universality, two_rotations_gate_set

EXIT_OK, EXIT_FAIL, EXIT_BAD_INPUT = 0, 1, 2


class BadInput(Exception):
    pass


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _load_element(path):
    return element_from_json(load_json(path))


# --------------------------------------------------------------------------
# subcommands; each returns (result dict, budgets dict)


def cmd_beta(args):
    sol = solve_beta(args.tol or 1e-12)
    return {
        "alpha": sol.alpha,
        "beta": sol.beta,
        "residual": sol.residual,
        "solver_tolerance": sol.solver_tolerance,
    }, {}


def cmd_norm(args):
    g = _load_element(args.matrix)
    return {"norm": op_norm_group(g), "norm_eigenphases": op_norm_group_eigenphases(g)}, {}


def cmd_dist(args):
    g, h = _load_element(args.a), _load_element(args.b)
    return {"distance": distance(g, h)}, {}


def cmd_explog(args):
    obj = load_json(args.matrix)
    if args.algebra:
        kind = kind_from_json(obj)
        m = np.array(obj["re"], dtype=float) + 1j * np.array(obj.get("im", 0.0), dtype=float)
        x = make_algebra_vector(m if not kind.is_real else m.real, kind)
        g = exp_map(x)
        return {
            "exp": element_to_json(g),
            "algebra_norm": op_norm_algebra(x),
            "group_norm": op_norm_group(g),
        }, {}
    g = element_from_json(obj)
    x = log_map(g)
    back = exp_map(x)
    out = {"re": np.real(x.matrix).tolist()}
    if not g.kind.is_real:
        out["im"] = np.imag(x.matrix).tolist()
    return {
        "log": out,
        "algebra_norm": op_norm_algebra(x),
        "group_norm": op_norm_group(g),
        # equal up to a central element, so compare the norms of the ratio
        "roundtrip_distance": distance(back, g),
    }, {}


def cmd_witness(args):
    sol = solve_beta(1e-12)
    h, k, v = construct_witness_pair(sol)
    angle = witness_angle(h, k, v)
    tol = args.tol or 1e-6
    return {
        "h": element_to_json(h),
        "k": element_to_json(k),
        "v": v.tolist(),
        "angle": angle,
        "four_beta": 4 * sol.beta,
        "gap": abs(angle - 4 * sol.beta),
        "ok": abs(angle - 4 * sol.beta) <= tol,
    }, {}


def cmd_contract(args):
    if (args.h is None) != (args.k is None):
        raise BadInput("give both H and K matrix files, or neither for the built-in pair")
    if args.h is None:
        h, k = rot_z(1.5), rot_x(0.4)
    else:
        h, k = _load_element(args.h), _load_element(args.k)
    tr = commutator_sequence(h, k, max_iter=args.max_iter)
    return {
        "norms": tr.norms,
        "contraction_ratios": tr.contraction_ratios,
        "contraction_constant": tr.contraction,
        "converged": tr.converged,
        "decay_violations": tr.decay_violations(1e-12),
    }, {"max_iter": args.max_iter}


def cmd_angle(args):
    U = subspace_from_json(load_json(args.u))
    W = subspace_from_json(load_json(args.w))
    return {"angle": angle_between(U, W)}, {}


def _representation(args):
    kind = parse_kind(args.group)
    if args.rep == "adjoint":
        return adjoint_representation(kind)
    return defining_representation(kind)


def cmd_schur(args):
    rep = _representation(args)
    rng = np.random.default_rng(args.seed)
    if args.subspace:
        W = subspace_from_json(load_json(args.subspace))
    else:
        if not 1 <= args.dim < rep.dim:
            raise BadInput(f"--dim must be in [1, {rep.dim - 1}]")
        # the adjoint action is real; the defining one is complex for SU(d)
        W = random_subspace(rep.dim, args.dim, rng, complex_=args.rep == "defining" and not rep.kind.is_real)
    samples = args.budget_probes or 20_000
    _, deviation = schur_average(rep, W, samples, args.seed)
    result = {"subspace": subspace_to_json(W), "deviation": deviation, "expected_scale": W.dim / rep.dim}
    if args.large_angle:
        g, a = find_large_angle(rep, W, args.budget_probes or 5000, rng, require=False)
        result["large_angle"] = {"element": element_to_json(g), "angle": a, "reached": a >= math.pi / 4 - 1e-3}
    return result, {"samples": samples}


def cmd_diameter(args):
    probes = args.budget_probes or 2000
    if args.builtin == "diagonal-so3":
        est = diagonal_quotient_estimate(so(3), probes, args.seed)
        return {"subgroup": "diagonal-so3", "estimate": est, "lower_bound_hint": math.pi / 2}, {"probes": probes}
    if args.builtin == "icosahedral":
        H = icosahedral_group()
    elif args.subgroup:
        H = subgroup_from_json(load_json(args.subgroup))
    else:
        raise BadInput("give a subgroup file or --builtin")
    result = {
        "subgroup": H.name or str(args.subgroup),
        "order": len(H),
        "exact": H.exact,
        "estimate": diameter_lower_estimate(H.kind, H, probes, args.seed),
        # only an actual lower bound when the subgroup list is complete
        "is_lower_bound": H.exact,
    }
    if args.grid is not None:
        result["grid_estimate"] = so3_grid_diameter(H, args.grid)
    return result, {"probes": probes, "grid": args.grid}


def cmd_universality(args):
    if args.builtin == "two-rotations":
        gates = two_rotations_gate_set()
    elif args.builtin == "icosahedral":
        gates = icosahedral_gate_set()
    elif args.gates:
        gates = gate_set_from_json(load_json(args.gates))
    else:
        raise BadInput("give a gate-set file or --builtin")
    defaults = UniversalityConfig()
    cfg = UniversalityConfig(
        max_length=args.budget_words or defaults.max_length,
        spacing=args.spacing or defaults.spacing,
        dedup_tol=args.tol or defaults.dedup_tol,
        spot_checks=args.spot_checks,
        seed=args.seed,
    )
    report = test_universality(gates, cfg, BETA).to_json()
    return report, {"max_word_length": cfg.max_length, "spacing": cfg.spacing, "spot_checks": cfg.spot_checks}


def cmd_verify(args):
    from .verification import ACCEPTANCE, INVARIANTS, run_checks

    checks = ACCEPTANCE + INVARIANTS
    if args.only:
        checks = [c for c in checks if any(s in c.__name__ for s in args.only)]
        if not checks:
            raise BadInput(f"no check matches {args.only}")
    results = run_checks(checks, args.seed, echo=lambda s: print(s, file=sys.stderr))
    table = [{"name": r.name, "passed": r.passed, "measured": r.measured} for r in results]
    return {"checks": table, "all_passed": all(r.passed for r in results)}, {}


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    common.add_argument("--out", type=Path, help="write JSON here instead of stdout")
    common.add_argument("--tol", type=float, help="tolerance override for the subcommand")

    p = argparse.ArgumentParser(prog="liediam", description="Operator-norm geometry of compact Lie groups.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    add("beta", cmd_beta, "solve for beta (--tol sets the solver tolerance)")
    add("norm", cmd_norm, "|g|_G of a matrix file").add_argument("matrix")
    sp = add("dist", cmd_dist, "d_G between two matrix files")
    sp.add_argument("a")
    sp.add_argument("b")
    sp = add("explog", cmd_explog, "log of a group element, or exp with --algebra")
    sp.add_argument("matrix")
    sp.add_argument("--algebra", action="store_true", help="input is an algebra element")
    add("witness", cmd_witness, "witness pair and the 4 beta angle check")
    sp = add("contract", cmd_contract, "iterated commutator trace")
    sp.add_argument("h", nargs="?")
    sp.add_argument("k", nargs="?")
    sp.add_argument("--max-iter", type=int, default=200)
    sp = add("angle", cmd_angle, "angle between two subspace files")
    sp.add_argument("u")
    sp.add_argument("w")
    sp = add("schur", cmd_schur, "Haar average of projections onto gW")
    sp.add_argument("subspace", nargs="?")
    sp.add_argument("--group", default="su2", help="e.g. su2, so3, so3xso3")
    sp.add_argument("--rep", choices=("adjoint", "defining"), default="adjoint")
    sp.add_argument("--dim", type=int, default=1, help="dimension of a random subspace")
    sp.add_argument("--budget-probes", type=int)
    sp.add_argument("--large-angle", action="store_true", help="also search for g with angle >= pi/4")
    sp = add("diameter", cmd_diameter, "lower estimate of diam(G/H)")
    sp.add_argument("subgroup", nargs="?")
    sp.add_argument("--builtin", choices=("icosahedral", "diagonal-so3"))
    sp.add_argument("--budget-probes", type=int)
    sp.add_argument("--grid", type=float, help="also brute-force an SO(3) Euler grid at this resolution")
    sp = add("universality", cmd_universality, "word enumeration and ball coverage")
    sp.add_argument("gates", nargs="?")
    sp.add_argument("--builtin", choices=("two-rotations", "icosahedral"))
    sp.add_argument("--budget-words", type=int, help="maximum word length")
    sp.add_argument("--spacing", type=float)
    sp.add_argument("--spot-checks", type=int, default=1000)
    sp = add("verify", cmd_verify, "run the property suite; exit 1 on any failure")
    sp.add_argument("--only", nargs="+", help="run checks whose function name contains one of these")
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    t0 = time.perf_counter()
    try:
        result, budgets = args.func(args)
    except (BadInput, ValidationError, DomainError, LargeAngleNotFound, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"liediam {args.command}: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except NumericalError as exc:
        print(f"liediam {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    timing = result.pop("timing", {})
    timing["total_s"] = time.perf_counter() - t0
    doc = {
        "command": args.command,
        "version": __version__,
        "seed": args.seed,
        "budgets": budgets,
        "result": result,
        "timing": timing,
    }
    text = json.dumps(doc, indent=2, sort_keys=True, default=_jsonable) + "\n"
    if args.out:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    if args.command == "verify" and not result["all_passed"]:
        return EXIT_FAIL
    return EXIT_OK


def main() -> None:
    sys.exit(run())
