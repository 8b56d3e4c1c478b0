"""Command-line front end.

Subcommands::

    affine-energy verify --scenario FILE [--out FILE] [--format json|csv]
                         [--threads N] [--seed N] [--tolerance-scale X]
    affine-energy energy --function SPEC --lambda L --p P [--sphere-grid SPEC]
    affine-energy body   --body SPEC --op NAME [--params JSON] [--sphere-grid SPEC]

SPEC arguments take inline JSON or a path to a JSON file.  Exit codes:
0 all checks pass, 1 a check failed, 2 scenario/spec parse error,
3 numerical-domain failure (the offending job is named on stderr).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import AffineEnergyError, ConfigurationError, DomainError
from . import specs
from .spherequad import build_sphere_grid

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_PARSE = 2
EXIT_NUMERIC = 3


def _load_json_arg(text: str):
    if os.path.exists(text):
        with open(text) as fh:
            return json.load(fh)
    return json.loads(text)


def _default_grid(spec_json):
    if spec_json:
        return specs.parse_sphere_grid(_load_json_arg(spec_json))
    return build_sphere_grid(2, 512, "uniform-angle")


def cmd_verify(args) -> int:
    try:
        with open(args.scenario) as fh:
            text = fh.read()
        scenario = json.loads(text)
    except OSError as exc:
        print(f"cannot read scenario: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except json.JSONDecodeError as exc:
        print(
            f"scenario parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}",
            file=sys.stderr,
        )
        return EXIT_PARSE

    try:
        reports = specs.run_scenario(
            scenario,
            text,
            global_seed=args.seed,
            threads=args.threads,
            tolerance_scale=args.tolerance_scale,
        )
    except ConfigurationError as exc:
        print(f"scenario configuration error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (DomainError, AffineEnergyError) as exc:
        print(f"numerical-domain failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    payload = (
        specs.reports_to_csv(reports)
        if args.format == "csv"
        else specs.reports_to_json(reports)
    )
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)
    n_fail = sum(1 for r in reports if not r["passed"])
    for r in reports:
        status = "PASS" if r["passed"] else "FAIL"
        print(f"[{status}] {r['id']} deficit={r['deficit']:.3e}", file=sys.stderr)
    return EXIT_OK if n_fail == 0 else EXIT_FAILED


def cmd_energy(args) -> int:
    from .energy import EnergyContext, affine_energy, energy_profile, polya_szego_gap
    from .funcspace import sobolev_grad_norm

    try:
        f = specs.parse_function(_load_json_arg(args.function))
        grid = _default_grid(args.sphere_grid)
        ctx = EnergyContext(args.lam, args.p, grid, f)
    except json.JSONDecodeError as exc:
        print(f"spec parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (DomainError, AffineEnergyError) as exc:
        print(f"numerical-domain failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    gap = polya_szego_gap(ctx)
    record = {
        "energy": affine_energy(ctx),
        "grad_norm": sobolev_grad_norm(f, args.p),
        "rearranged_energy": gap.rearranged_energy,
        "gap": gap.gap,
        "lambda": args.lam,
        "p": args.p,
    }
    if args.lambda_sweep:
        lams = [k / (args.lambda_sweep - 1) for k in range(args.lambda_sweep)]
        record["lambda_sweep"] = dict(zip(
            [f"{lam:.4f}" for lam in lams],
            energy_profile(ctx, lams).tolist(),
        ))
    print(json.dumps(record, sort_keys=True, indent=2))
    return EXIT_OK


_BODY_OPS = (
    "petty_product",
    "busemann_petty_deficit",
    "banach_mazur_estimate",
    "polar_volume",
    "body_volume",
)


def cmd_body(args) -> int:
    from . import bodies

    try:
        body = specs.parse_body(_load_json_arg(args.body))
        params = json.loads(args.params) if args.params else {}
        grid = _default_grid(args.sphere_grid)
        if args.op == "petty_product":
            value = bodies.petty_product(body, grid)
        elif args.op == "busemann_petty_deficit":
            value = bodies.busemann_petty_deficit(
                body,
                float(params.get("lambda", 0.5)),
                float(params.get("p", 2.0)),
                grid,
                mc_samples=int(params.get("mc_samples", 200_000)),
                seed=args.seed,
            )
        elif args.op == "banach_mazur_estimate":
            other = (
                specs.parse_body(params["other"])
                if "other" in params
                else bodies.Ball(1.0, body.dimension)
            )
            value = bodies.banach_mazur_estimate(
                body, other, restarts=int(params.get("restarts", 8)),
                seed=args.seed, grid=grid,
            )
        elif args.op == "polar_volume":
            value = bodies.polar_volume(body, grid)
        elif args.op == "body_volume":
            value = bodies.body_volume(body, grid)
        else:
            print(f"unknown op {args.op!r}; choose from {_BODY_OPS}", file=sys.stderr)
            return EXIT_PARSE
    except json.JSONDecodeError as exc:
        print(f"spec parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (DomainError, AffineEnergyError) as exc:
        print(f"numerical-domain failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(json.dumps({"op": args.op, "value": value, "params": params},
                     sort_keys=True, indent=2))
    return EXIT_OK


def _threads_default() -> int:
    env = os.environ.get("AFFINE_ENERGY_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="affine-energy",
        description="Convex-geometry energies, bodies, and inequality verification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    pv = sub.add_parser("verify", help="run a scenario of inequality checks")
    pv.add_argument("--scenario", required=True)
    pv.add_argument("--out", default=None)
    pv.add_argument("--format", choices=("json", "csv"), default="json")
    pv.add_argument("--threads", type=int, default=_threads_default())
    pv.add_argument("--seed", type=int, default=0)
    pv.add_argument("--tolerance-scale", type=float, default=1.0,
                    dest="tolerance_scale")
    pv.set_defaults(func=cmd_verify)

    pe = sub.add_parser("energy", help="energy of a function spec")
    pe.add_argument("--function", required=True, help="inline JSON or path")
    pe.add_argument("--lambda", type=float, default=0.5, dest="lam")
    pe.add_argument("--p", type=float, default=2.0)
    pe.add_argument("--lambda-sweep", type=int, default=0, dest="lambda_sweep",
                    help="also print the energy at K evenly spaced lambda values")
    pe.add_argument("--sphere-grid", default=None, dest="sphere_grid")
    pe.set_defaults(func=cmd_energy)

    pb = sub.add_parser("body", help="body operation on a body spec")
    pb.add_argument("--body", required=True, help="inline JSON or path")
    pb.add_argument("--op", required=True)
    pb.add_argument("--params", default=None, help="inline JSON parameters")
    pb.add_argument("--sphere-grid", default=None, dest="sphere_grid")
    pb.add_argument("--seed", type=int, default=0)
    pb.set_defaults(func=cmd_body)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
