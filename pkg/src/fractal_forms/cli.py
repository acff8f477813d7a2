"""Command-line interface: ``fractal-forms list|solve|resist|extend|verify|export``.

Exit codes: 0 success, 1 invalid input or schema, 2 no convergence,
3 singular interior, 4 verification mismatch.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from pathlib import Path

from . import catalog, verify
from .network import (
    NetworkError,
    ResistorNetwork,
    SingularInteriorError,
    effective_resistance,
    energy,
    from_json,
    harmonic_extension,
    laplacian_of,
    read_edgelist,
    to_dot,
    to_edgelist,
    to_json,
)
from .solver import ConvergenceError, SolverError, SolverOptions, power_iterate
from .structure import CellSchema, SchemaError, build_level, renormalize, replicate

EXIT_OK, EXIT_INPUT, EXIT_CONVERGENCE, EXIT_SINGULAR, EXIT_MISMATCH = 0, 1, 2, 3, 4

log = logging.getLogger("fractal_forms")


class InputError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    # usage errors share exit code 1 with invalid input; argparse's 2 means non-convergence here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _fingerprint(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def _parse_pairs(items, what: str) -> dict:
    out = {}
    for item in items or ():
        for part in item.split(","):
            if not part.strip():
                continue
            name, sep, value = part.partition("=")
            if not sep:
                raise InputError(f"{what} {part!r} is not NAME=VALUE")
            try:
                out[name.strip()] = float(value)
            except ValueError:
                raise InputError(f"{what} {part!r} has a non-numeric value") from None
    return out


def load_schema(args) -> tuple[CellSchema, str]:
    if getattr(args, "input", None):
        text = Path(args.input).read_text()
        schema = CellSchema.from_json(text)
    else:
        schema = catalog.builtin(args.builtin or "fractalina")
    overrides = _parse_pairs(getattr(args, "class_value", None), "class value")
    if overrides:
        unknown = set(overrides) - set(schema.class_values)
        if unknown:
            raise InputError(f"unknown edge classes {sorted(unknown)}")
        schema = schema.with_class_values(overrides)
    return schema, _fingerprint(schema.to_json())


# --- commands ------------------------------------------------------------------


def cmd_list(args) -> dict:
    rows = []
    for name in catalog.BUILTINS:
        s = catalog.builtin(name)
        rows.append({"name": name, "V0": len(s.v0), "V1": len(s.v1), "N": s.n_cells})
    return {"builtins": rows}


def _closed_form_route(schema: CellSchema, lam: float) -> dict | None:
    if schema.name == "fractalina":
        k, r1 = catalog.fractalina_solve()
        return {"route": "fractalina resistance ratios", "lambda": k, "R1": r1, "agreement": abs(lam - k)}
    if schema.name == "pillow":
        params, rho = catalog.pillow_solve()
        return {
            "route": "pillow configuration ratios", "lambda": 1.0 / rho, "rho": rho,
            "C2": params.C2, "C3": params.C3, "agreement": abs(lam - 1.0 / rho),
        }
    if schema.name == "gasket":
        unit = schema.base_form()
        image = renormalize(schema, 1.0, unit)
        ratio = image.conductance("p1", "p2") / unit.conductance("p1", "p2")
        return {"route": "gasket Schur trace", "lambda": ratio, "agreement": abs(lam - ratio)}
    return None


def cmd_solve(args) -> dict:
    schema, fp = load_schema(args)
    opts = SolverOptions(
        tol=args.tol, max_iter=args.max_iter, damping=args.damping,
        symmetrize=not args.no_symmetrize, seed=args.seed,
    )
    start = schema.base_form() if args.start == "base" else None
    report = power_iterate(schema, start, opts)
    result = report.to_dict()
    result["class_conductances"] = report.class_conductances(schema)
    if not args.input:
        result["closed_form_route"] = _closed_form_route(schema, report.lam)
    return {"schema": schema.name, "fingerprint": fp, "result": result}


def _load_network(path: str) -> tuple[ResistorNetwork, str]:
    text = Path(path).read_text()
    net = from_json(text) if text.lstrip().startswith("{") else read_edgelist(text)
    return net, _fingerprint(text)


def cmd_resist(args) -> dict:
    if args.network:
        net, fp = _load_network(args.network)
        nodes = {p: p for p in args.pair}
        name = args.network
    else:
        schema, fp = load_schema(args)
        graph = build_level(schema, None, args.level)
        net, nodes, name = graph.network, graph.boundary, schema.name
    p, q = args.pair
    for x in (p, q):
        if x not in nodes:
            raise InputError(f"{x!r} is not a boundary label")
    r = effective_resistance(laplacian_of(net), nodes[p], nodes[q])
    return {
        "schema": name, "fingerprint": fp,
        "result": {"level": args.level, "pair": [p, q], "nodes": len(net.nodes), "resistance": r},
    }


def cmd_extend(args) -> dict:
    schema, fp = load_schema(args)
    values = _parse_pairs(args.values, "assignment")
    missing = [a for a in schema.v0 if a not in values]
    extra = [a for a in values if a not in schema.v0]
    if missing or extra:
        raise InputError(f"assignments must cover exactly {list(schema.v0)} (missing {missing}, unknown {extra})")
    coarse = schema.base_form()
    fine = replicate(schema, 1.0, coarse)
    ext = harmonic_extension(fine, values)
    e0, e1 = energy(coarse, values), energy(fine, ext)
    return {
        "schema": schema.name, "fingerprint": fp,
        "result": {
            "interior": {p: ext[p] for p in fine.nodes if p not in values},
            "energy_level0": e0,
            "energy_level1": e1,
            "ratio": e0 / e1 if e1 > 0 else None,
        },
    }


def cmd_verify(args) -> dict:
    checks = verify.run_all(args.tol)
    return {
        "result": {
            "checks": [
                {"criterion": c.criterion, "name": c.name, "passed": c.passed, "detail": c.detail} for c in checks
            ],
            "passed": all(c.passed for c in checks),
        }
    }


def cmd_export(args) -> dict:
    schema, fp = load_schema(args)
    if args.format == "schema":
        text = schema.to_json()
    else:
        net = build_level(schema, None, args.level).network
        text = {"dot": to_dot, "edgelist": to_edgelist, "json": to_json}[args.format](net)
    if args.out:
        Path(args.out).write_text(text)
    return {"schema": schema.name, "fingerprint": fp, "text": text, "out": args.out}


# --- output --------------------------------------------------------------------


def render_text(command: str, report: dict) -> str:
    res = report.get("result", {})
    lines = []
    if command == "list":
        lines.append(f"{'name':<12} {'|V0|':>5} {'|V1|':>5} {'N':>3}")
        for row in report["builtins"]:
            lines.append(f"{row['name']:<12} {row['V0']:>5} {row['V1']:>5} {row['N']:>3}")
    elif command == "solve":
        lines.append(f"schema             {report['schema']}")
        lines.append(f"lambda             {_fmt(res['lambda'])}")
        lines.append(f"rho = 1/lambda     {_fmt(res['rho'])}")
        lines.append(f"resistance growth  {_fmt(res['resistance_growth'])}")
        lines.append(f"residual           {_fmt(res['residual'])}")
        lines.append(f"iterations         {res['iterations']}")
        lines.append("conductances")
        for e in res["conductances"]:
            lines.append(f"  {e['u']} -- {e['v']}  {_fmt(e['c'])}")
        route = res.get("closed_form_route")
        if route:
            lines.append(f"closed-form route  {route['route']}: lambda {_fmt(route['lambda'])}, "
                         f"agreement {_fmt(route['agreement'])}")
    elif command == "resist":
        lines.append(f"R_eff({res['pair'][0]}, {res['pair'][1]}) at level {res['level']} "
                     f"({res['nodes']} nodes) = {_fmt(res['resistance'])}")
    elif command == "extend":
        for p, v in res["interior"].items():
            lines.append(f"{p:<8} {_fmt(v)}")
        lines.append(f"E0 = {_fmt(res['energy_level0'])}, E1 = {_fmt(res['energy_level1'])}, "
                     f"E0/E1 = {_fmt(res['ratio']) if res['ratio'] is not None else 'undefined'}")
    elif command == "verify":
        for c in res["checks"]:
            lines.append(f"[{'PASS' if c['passed'] else 'FAIL'}] {c['criterion']}. {c['name']}: {c['detail']}")
        lines.append("all criteria pass" if res["passed"] else "VERIFICATION FAILED")
    return "\n".join(lines) + "\n"


COMMANDS = {
    "list": cmd_list, "solve": cmd_solve, "resist": cmd_resist,
    "extend": cmd_extend, "verify": cmd_verify, "export": cmd_export,
}


def _add_source(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--builtin", choices=sorted(catalog.BUILTINS), help="built-in structure (default fractalina)")
    src.add_argument("--input", metavar="FILE", help="schema JSON file")
    p.add_argument("--class-value", action="append", metavar="NAME=VALUE", help="override an edge-class conductance")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fractal-forms", description=__doc__.splitlines()[0])
    parser.add_argument("--output", choices=["text", "json"], default="text")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="list built-in structures")

    p = sub.add_parser("solve", help="find the self-similar fixed point by power iteration")
    _add_source(p)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--max-iter", type=int, default=100_000)
    p.add_argument("--damping", type=float, default=0.0)
    p.add_argument("--no-symmetrize", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--start", choices=["random", "base"], default="random",
                   help="random conductances from --seed, or the schema's class values")

    p = sub.add_parser("resist", help="effective resistance between two boundary nodes of a level graph")
    _add_source(p)
    p.add_argument("--network", metavar="FILE", help="edge-list or JSON network instead of a schema")
    p.add_argument("--level", type=int, default=0)
    p.add_argument("--pair", nargs=2, required=True, metavar=("P", "Q"))

    p = sub.add_parser("extend", help="harmonic extension of boundary values to level 1")
    _add_source(p)
    p.add_argument("values", nargs="+", metavar="NODE=VALUE")

    p = sub.add_parser("verify", help="run the acceptance table")
    p.add_argument("--tol", type=float, default=None, help="use this tolerance for every criterion")

    p = sub.add_parser("export", help="write a level graph or the schema")
    _add_source(p)
    p.add_argument("--level", type=int, default=0)
    p.add_argument("--format", choices=["dot", "edgelist", "json", "schema"], default="edgelist")
    p.add_argument("--out", metavar="FILE")

    for action in sub.choices.values():
        action.add_argument("--output", choices=["text", "json"], default=argparse.SUPPRESS)
    return parser


def _configure_logging() -> None:
    level = os.environ.get("FRACTAL_FORMS_LOG", "").upper()
    if level in ("DEBUG", "INFO"):
        logging.basicConfig(stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        report = COMMANDS[args.command](args)
    except (SchemaError, InputError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConvergenceError as exc:
        print(f"error: {exc}; try --damping 0.5", file=sys.stderr)
        return EXIT_CONVERGENCE
    except SingularInteriorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except (NetworkError, SolverError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    if args.command == "export":
        if not report["out"]:
            sys.stdout.write(report["text"])
        return EXIT_OK

    report["command"] = ["fractal-forms", *argv]
    report["wall_time"] = time.perf_counter() - start
    if args.output == "json":
        sys.stdout.write(json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n")
    else:
        sys.stdout.write(render_text(args.command, report))
    if args.command == "verify" and not report["result"]["passed"]:
        return EXIT_MISMATCH
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
