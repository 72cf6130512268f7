"""Command-line entry point: verify / divergence / entropy / bound / scan /
simulate / diqkd.

All structured output is JSON with sorted keys (byte-identical across runs
with the same seed); scans emit CSV.  Exit codes: 0 pass, 1 property or
value failure, 2 usage error.  The environment variable ``ONE_SHOT_SEED``
overrides the seed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from oneshot import bounds as bd
from oneshot import divergences as dv
from oneshot import entropies as en
from oneshot import serialize as io_
from oneshot import simulate as sm
from oneshot import verify as vf
from oneshot.diqkd import DiqkdSpec, chsh_rate_function, diqkd_keyrate_bound, required_omega

DEFAULT_SEED = 20230817


def _emit(obj, out: str | None) -> None:
    text = json.dumps(obj, sort_keys=True, indent=2, default=_json_default) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serialisable: {type(obj)}")


def _seed(args) -> int:
    env = os.environ.get("ONE_SHOT_SEED")
    if env is not None:
        return int(env)
    return args.seed


def cmd_verify(args) -> int:
    results = vf.run_suite(args.suite, seed=_seed(args), scale=args.scale)
    passed = all(r["passed"] for r in results.values())
    summary = {
        "suite": args.suite,
        "seed": _seed(args),
        "passed": passed,
        "properties": results,
    }
    _emit(summary, args.out)
    return 0 if passed else 1


def cmd_divergence(args) -> int:
    p = io_.load_state_or_classical(args.p)
    q = io_.load_state_or_classical(args.q)
    family = args.family
    if family == "relative":
        res = dv.relative_entropy(p, q)
    elif family == "max":
        res = dv.max_relative_entropy(p, q)
    elif family == "petz":
        res = dv.petz_renyi(p, q, args.alpha)
    elif family == "sandwiched":
        alpha = math.inf if args.alpha in (None, math.inf) else args.alpha
        res = dv.sandwiched_renyi(p, q, alpha)
    elif family == "geometric":
        res = dv.geometric_renyi(p, q, args.alpha)
    elif family == "sharp_upper":
        res, _ = dv.sharp_upper_bound(p, q, args.alpha)
    else:  # pragma: no cover - argparse restricts choices
        raise AssertionError(family)
    _emit({"value": res.value, "finite": res.finite, "family": family, "alpha": res.alpha}, args.out)
    return 0


def cmd_entropy(args) -> int:
    rho = io_.load_state_or_classical(args.state)
    a = args.A.split(",")
    b = args.B.split(",") if args.B else []
    if args.kind == "vn":
        res = en.vn_conditional(rho, a, b)
    elif args.kind == "hdown":
        res = en.h_down_alpha(rho, a, b, args.alpha, args.family)
    elif args.kind == "hup":
        alpha = math.inf if args.alpha is None else args.alpha
        res = en.h_up_alpha(rho, a, b, alpha, args.family)
    elif args.kind == "hmin":
        res = en.h_min(rho, a, b)
    else:  # pragma: no cover
        raise AssertionError(args.kind)
    optimizer_path = None
    if res.optimizer_sigma is not None:
        optimizer_path = args.optimizer_out or (
            str(Path(args.state).with_suffix("")) + ".optimizer.json"
        )
        io_.save_state(res.optimizer_sigma, optimizer_path)
    _emit(
        {
            "value": res.value,
            "alpha": res.alpha,
            "arrow": res.arrow,
            "family": res.family,
            "converged": res.converged,
            "optimizer_path": optimizer_path,
        },
        args.out,
    )
    return 0


def _load_hk(args, n: int):
    if args.hk_file:
        values = [float(x) for x in Path(args.hk_file).read_text().replace(",", " ").split()]
        if len(values) != n:
            raise ValueError(f"hk file holds {len(values)} values, expected n={n}")
        return values
    return args.hk


def _spec_from_args(args) -> bd.ScenarioSpec:
    return bd.ScenarioSpec(
        n=int(float(args.n)),
        dim_a=args.dimA,
        dim_b=args.dimB,
        eps=args.eps,
        per_round_entropy=args.hk if not args.hk_file else None,
        per_round_entropies=None if not args.hk_file else _load_hk(args, int(float(args.n))),
    )


def cmd_bound(args) -> int:
    spec = _spec_from_args(args)
    theorem = args.theorem
    if theorem == "approx-indep":
        report = bd.approx_indep_bound(spec)
    elif theorem == "approx-indep-trace":
        report = bd.approx_indep_from_trace(spec)
    elif theorem == "weak-aep":
        report = bd.weak_aep_bound(spec)
    elif theorem == "approx-eat":
        hk = _load_hk(args, spec.n)
        if args.optimize:
            report = bd.approx_eat_optimize(spec, hk, total_smoothing=args.smoothing)
        else:
            params = bd.BoundParams(
                alpha=args.alpha or 1.1,
                beta=args.beta,
                delta=args.delta if spec.eps > 0 else 0.0,
                eps1=args.smoothing / 2,
                eps2=args.smoothing / 2,
            )
            report = bd.approx_eat_bound(spec, hk, params)
    elif theorem == "classical-eat":
        hk = _load_hk(args, spec.n)
        alpha = args.alpha or bd.classical_eat_optimal_alpha(spec, args.smoothing)
        report = bd.classical_eat_bound(spec, hk, alpha, args.smoothing)
    else:  # pragma: no cover
        raise AssertionError(theorem)
    _emit(report.to_dict(), args.out)
    return 0


def cmd_scan(args) -> int:
    spec = bd.ScenarioSpec(
        n=2, dim_a=args.dimA, dim_b=args.dimB, eps=0.0, per_round_entropy=args.hk
    )
    evaluators = {
        "approx-indep": bd.approx_indep_bound,
        "approx-indep-trace": bd.approx_indep_from_trace,
        "weak-aep": bd.weak_aep_bound,
    }
    if args.theorem in evaluators:
        evaluator = evaluators[args.theorem]
    elif args.theorem == "classical-eat":

        def evaluator(s: bd.ScenarioSpec):
            alpha = bd.classical_eat_optimal_alpha(s, args.smoothing)
            return bd.classical_eat_bound(s, args.hk, alpha, args.smoothing)

    elif args.theorem == "approx-eat":

        def evaluator(s: bd.ScenarioSpec):
            return bd.approx_eat_optimize(s, args.hk, total_smoothing=args.smoothing)

    else:  # pragma: no cover
        raise AssertionError(args.theorem)
    n_values = [int(float(x)) for x in args.n_grid.split(",")]
    eps_values = [float(x) for x in args.eps_grid.split(",")]
    csv_text = bd.param_scan(evaluator, n_values, eps_values, spec)
    if args.out:
        Path(args.out).write_text(csv_text)
    else:
        sys.stdout.write(csv_text)
    return 0


def cmd_simulate(args) -> int:
    if args.scenario == "side-info":
        report = sm.counterexample_side_info(args.n, args.eps, args.epsp)
    elif args.scenario == "triangle":
        report = sm.counterexample_triangle(args.n, args.eps)
    elif args.scenario == "eat-smoke":
        report = sm.quantum_eat_smoke(n=min(args.n, 3), eps=args.eps, seed=_seed(args))
    else:  # pragma: no cover
        raise AssertionError(args.scenario)
    _emit(report, args.out)
    return 0


def cmd_diqkd(args) -> int:
    spec = DiqkdSpec(
        n=float(args.n),
        omega_exp=args.omega if args.omega is not None else required_omega(args.eps, args.delta_w),
        delta_w=args.delta_w,
        eps_target=args.eps,
    )
    report = diqkd_keyrate_bound(spec)
    payload = {
        "rate_total": report.value,
        "rate_per_round": report.extras["rate_per_round"],
        "n_star": report.extras["n_star"],
        "omega_required": report.extras["omega_required"],
        "asymptotic_rate": report.extras["asymptotic_rate"],
        "smoothing": report.smoothing,
        "decomposition": report.decomposition,
        "tsirelson_rate": chsh_rate_function((2 + math.sqrt(2)) / 4),
    }
    _emit(payload, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oneshot",
        description="Entropy-bound toolkit: divergences, conditional entropies, "
        "accumulation bounds and process simulators (all values in bits).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run a randomised property suite")
    p.add_argument("suite", choices=list(vf.SUITE_NAMES) + ["all"])
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--scale", type=float, default=1.0, help="sample-count multiplier")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("divergence", help="evaluate a divergence between two state files")
    p.add_argument("--family", required=True,
                   choices=["relative", "max", "petz", "sandwiched", "geometric", "sharp_upper"])
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_divergence)

    p = sub.add_parser("entropy", help="evaluate a conditional entropy of a state file")
    p.add_argument("--kind", required=True, choices=["vn", "hup", "hdown", "hmin"])
    p.add_argument("--state", required=True)
    p.add_argument("--A", required=True, help="comma-separated conditioned labels")
    p.add_argument("--B", default="", help="comma-separated conditioning labels")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--family", default="sandwiched", choices=["sandwiched", "petz", "vn"])
    p.add_argument("--optimizer-out")
    p.add_argument("--out")
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("bound", help="evaluate a theorem-level lower bound")
    p.add_argument("--theorem", required=True,
                   choices=["approx-indep", "approx-indep-trace", "weak-aep",
                            "approx-eat", "classical-eat"])
    p.add_argument("--n", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--dimA", type=int, default=2)
    p.add_argument("--dimB", type=int, default=2)
    p.add_argument("--hk", type=float, default=1.0, help="uniform per-round entropy")
    p.add_argument("--hk-file", help="file with n per-round entropies")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=2.0)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--smoothing", type=float, default=0.02)
    p.add_argument("--optimize", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("scan", help="grid scan of a bound, CSV output")
    p.add_argument("--theorem", required=True,
                   choices=["approx-indep", "approx-indep-trace", "weak-aep",
                            "approx-eat", "classical-eat"])
    p.add_argument("--n-grid", required=True, help="comma-separated round counts")
    p.add_argument("--eps-grid", required=True, help="comma-separated approximation levels")
    p.add_argument("--dimA", type=int, default=2)
    p.add_argument("--dimB", type=int, default=2)
    p.add_argument("--hk", type=float, default=1.0)
    p.add_argument("--smoothing", type=float, default=0.02)
    p.add_argument("--out")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("simulate", help="run a counterexample or smoke scenario")
    p.add_argument("--scenario", required=True, choices=["side-info", "triangle", "eat-smoke"])
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--epsp", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("diqkd", help="sequential device-independent key rate")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--n", required=True)
    p.add_argument("--omega", type=float, default=None)
    p.add_argument("--delta-w", type=float, default=1e-9)
    p.add_argument("--out")
    p.set_defaults(func=cmd_diqkd)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError, ArithmeticError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
