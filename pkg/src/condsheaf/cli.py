"""Command-line front end.

Exit codes: 0 everything passed, 1 an axiom or claim failed, 2 the input
could not be used (missing file, bad JSON, unknown name, size guard).
"""

from __future__ import annotations

import argparse
import hashlib
import itertools
import json
import random
import sys
import time

from .boolean_algebra import make_algebra
from .category_f import (
    ArrowError, bounded_universe, compose, default_atom_names, hom_set, is_monic, limits_report,
    separating_arrow,
)
from .conditional_set import roundtrip_report
from .errors import AxiomError, SizeGuardError, StructureError, ValidationError, Violation
from .modelfile import ModelError, as_jsonable, load_model
from .subobject_lattice import SubLattice, sublattice_report, verify_boolean_algebra
from .topos_checks import classifier_square, generator_report, no_classifier_report

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
CLAIMS = ("roundtrip", "sublattice-boolean", "classifier", "generator", "limits")
MAX_ATOMS = 3
MAX_STALK = 3


class UsageError(Exception):
    pass


# -- output -----------------------------------------------------------------


def emit(report: dict, fmt: str, out=None) -> None:
    out = out or sys.stdout
    if fmt == "json":
        out.write(json.dumps(as_jsonable(report), sort_keys=True, indent=2) + "\n")
    else:
        out.write(render_text(report))


def render_text(report: dict) -> str:
    lines = []

    def walk(value, indent):
        pad = "  " * indent
        if isinstance(value, dict):
            for k in sorted(value):
                v = value[k]
                if isinstance(v, (dict, list)) and v:
                    lines.append(f"{pad}{k}:")
                    walk(v, indent + 1)
                else:
                    lines.append(f"{pad}{k}: {_scalar(v)}")
        elif isinstance(value, list):
            for v in value:
                if isinstance(v, (dict, list)) and v:
                    lines.append(f"{pad}-")
                    walk(v, indent + 1)
                else:
                    lines.append(f"{pad}- {_scalar(v)}")

    head = report.get("command", "report")
    verdict = "PASS" if report.get("passed") else "FAIL"
    lines.append(f"{head}: {verdict}")
    walk({k: v for k, v in as_jsonable(report).items() if k not in ("command", "passed")}, 1)
    return "\n".join(lines) + "\n"


def _scalar(v) -> str:
    if v is None:
        return "-"
    if v == [] or v == {}:
        return "none"
    return str(v)


def _violations(vs) -> list[dict]:
    return [{"axiom": v.axiom, "message": v.message, "witness": v.witness} for v in vs]


# -- check ------------------------------------------------------------------


def cmd_check(args) -> tuple[int, dict]:
    model = load_model(args.model)
    section = {"sheaf": "sheaves", "condset": "condsets", "farrow": "farrows"}[args.what]
    checker = {"sheaf": model.check_sheaf, "condset": model.check_condset,
               "farrow": model.check_farrow}[args.what]
    names = args.name or model.names(section)
    if not names:
        raise ModelError(f"{model.source} defines no {section}")
    results = {}
    worst = EXIT_OK
    for name in names:
        problems, violations = checker(name)
        if problems:
            code = EXIT_INPUT
        elif violations:
            code = EXIT_FAIL
        else:
            code = EXIT_OK
        if args.what == "sheaf" and code == EXIT_OK:
            X = model.sheaf(name)
            w = X.surjectivity_witness()
            surjective = w is None
        else:
            surjective = None
        entry = {"passed": code == EXIT_OK, "problems": problems,
                 "violations": _violations(violations)}
        if surjective is not None:
            entry["surjective"] = surjective
            if not surjective:
                a, b, y = w
                entry["surjectivity_witness"] = {
                    "from": model.algebra.fmt(b), "to": model.algebra.fmt(a), "missed": y}
        results[name] = entry
        worst = max(worst, code)
    report = {
        "command": f"check {args.what}",
        "input": {"path": model.source, "sha256": model.digest},
        "results": results,
        "passed": worst == EXIT_OK,
    }
    return worst, report


# -- verify -----------------------------------------------------------------


def _parse_claims(raw) -> list[str]:
    if not raw:
        return list(CLAIMS)
    claims = []
    for chunk in raw:
        for c in chunk.split(","):
            c = c.strip()
            if not c:
                continue
            if c == "all":
                claims.extend(CLAIMS)
            elif c not in CLAIMS:
                raise UsageError(f"unknown claim {c!r}; choose from {', '.join(CLAIMS)}")
            else:
                claims.append(c)
    return sorted(set(claims), key=CLAIMS.index)


RUNNERS = {
    "roundtrip": roundtrip_report,
    "sublattice-boolean": sublattice_report,
    "classifier": no_classifier_report,
    "generator": generator_report,
    "limits": limits_report,
}


def _guard(args) -> None:
    if args.atoms < 0 or args.max_stalk < 1:
        raise UsageError("need --atoms >= 0 and --max-stalk >= 1")
    if (args.atoms > MAX_ATOMS or args.max_stalk > MAX_STALK) and not args.unsafe_large:
        raise SizeGuardError(
            f"--atoms {args.atoms} --max-stalk {args.max_stalk} exceeds the guard "
            f"({MAX_ATOMS} atoms, stalks of size {MAX_STALK}); pass --unsafe-large to override"
        )


def cmd_verify(args) -> tuple[int, dict]:
    claims = _parse_claims(args.claims)
    _guard(args)
    order = list(claims)
    if args.seed is not None:
        # claims are independent; shuffling only changes the run order
        random.Random(args.seed).shuffle(order)
    results = {}
    timings = {}
    for claim in order:
        t0 = time.perf_counter()
        results[claim] = RUNNERS[claim](args.atoms, args.max_stalk)
        timings[claim] = round(time.perf_counter() - t0, 3)
    inputs = {"atoms": args.atoms, "max_stalk": args.max_stalk, "claims": claims}
    digest = hashlib.sha256(json.dumps(inputs, sort_keys=True).encode()).hexdigest()
    report = {
        "command": "verify",
        "inputs": inputs,
        "inputs_sha256": digest,
        "claims": {c: {"passed": results[c]["passed"], "details": results[c]} for c in claims},
        "passed": all(results[c]["passed"] for c in claims),
    }
    if args.timing:
        report["timing_seconds"] = timings
    return (EXIT_OK if report["passed"] else EXIT_FAIL), report


# -- sublattice ---------------------------------------------------------------


def cmd_sublattice(args) -> tuple[int, dict]:
    model = load_model(args.model)
    obj = model.fobject(args.object)
    lat = SubLattice(obj)
    rep = verify_boolean_algebra(lat)
    report = {
        "command": "sublattice",
        "input": {"path": model.source, "sha256": model.digest, "object": args.object},
        "ambient": str(obj),
        "size": rep.size,
        "expected_size": rep.expected_size,
        "lattice_atoms": rep.atoms,
        "checks": {c.name: {"passed": c.passed, "cases": c.cases,
                            "counterexample": c.counterexample} for c in rep.checks},
        "passed": rep.passed,
    }
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(lat.to_dot())
        report["dot"] = args.dot
    return (EXIT_OK if rep.passed else EXIT_FAIL), report


# -- classifier and generator demos -------------------------------------------


def _square_report(sq) -> dict:
    P = sq.canonical.apex
    back = hom_set(P, sq.monic.source)
    return {
        "monic": str(sq.monic),
        "a": str(sq.a),
        "b": str(sq.b),
        "square": {
            "top": str(sq.to_terminal),
            "right": str(sq.true),
            "left": str(sq.monic),
            "bottom": str(sq.eta),
        },
        "commutes": sq.commutes,
        "canonical_pullback": {"apex": str(P), "legs": [str(l) for l in sq.canonical.legs]},
        "mediating_square_to_pullback": str(sq.comparison),
        "mediating_pullback_to_square": [str(u) for u in back] or "none: no arrow exists",
        "is_pullback": sq.is_pullback,
        "witness": sq.witness,
    }


def cmd_classifier_demo(args) -> tuple[int, dict]:
    if args.model:
        if not args.arrow:
            raise UsageError("--arrow NAME is required with a model file")
        model = load_model(args.model)
        m = model.farrow(args.arrow)
        chk = is_monic(m)
        if not chk:
            raise AxiomError([Violation(
                "monic", f"{args.arrow} identifies two elements at an atom",
                {"atom": m.source.algebra.atoms[chk.atom], "pair": list(chk.pair)},
            )])
        squares = {d: _square_report(classifier_square(m, d)) for d in ("top", "bottom")}
        report = {
            "command": "classifier-demo",
            "input": {"path": model.source, "sha256": model.digest, "arrow": args.arrow},
            "default_used": args.default,
            "square": squares[args.default],
            "other_default": squares["bottom" if args.default == "top" else "top"],
            "passed": squares[args.default]["is_pullback"] == (
                m.source.support == m.target.support),
        }
        return (EXIT_OK if report["passed"] else EXIT_FAIL), report
    _guard(args)
    rep = no_classifier_report(args.atoms, args.max_stalk)
    report = {"command": "classifier-demo", **rep}
    return (EXIT_OK if rep["passed"] else EXIT_FAIL), report


def cmd_generator_demo(args) -> tuple[int, dict]:
    _guard(args)
    rep = generator_report(args.atoms, args.max_stalk)
    universe = bounded_universe(make_algebra(default_atom_names(args.atoms)), args.max_stalk)
    example = None
    for A, B in itertools.product(universe, repeat=2):
        arrows = hom_set(A, B)
        if len(arrows) >= 2:
            f, g = arrows[0], arrows[1]
            u = separating_arrow(f, g)
            example = {"f": str(f), "g": str(g), "separator": str(u),
                       "f_after_u": str(compose(f, u)), "g_after_u": str(compose(g, u))}
            break
    report = {"command": "generator-demo", **rep, "example": example}
    return (EXIT_OK if rep["passed"] else EXIT_FAIL), report


# -- entry point ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--seed", type=int, default=None,
                        help="shuffle the order of independent checks (results do not depend on it)")

    parser = argparse.ArgumentParser(
        prog="condsheaf",
        description="Check conditional sets, sheaves on finite Boolean algebras and the category F.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="validate entries of a model file")
    p.add_argument("model")
    p.add_argument("what", choices=("sheaf", "condset", "farrow"))
    p.add_argument("--name", action="append", help="entry to check (repeatable; default: all)")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("verify", parents=[common], help="exhaustive checks over generated models")
    p.add_argument("--atoms", type=int, default=2)
    p.add_argument("--max-stalk", type=int, default=2)
    p.add_argument("--claims", action="append",
                   help=f"comma separated subset of {', '.join(CLAIMS)} (default: all)")
    p.add_argument("--unsafe-large", action="store_true",
                   help=f"allow more than {MAX_ATOMS} atoms or stalks above {MAX_STALK}")
    p.add_argument("--timing", action="store_true",
                   help="add wall-clock seconds per claim (makes output non-reproducible)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sublattice", parents=[common], help="Sub(a, X) of a named object")
    p.add_argument("model")
    p.add_argument("object")
    p.add_argument("--dot", metavar="FILE", help="write the Hasse diagram as DOT")
    p.set_defaults(func=cmd_sublattice)

    p = sub.add_parser("classifier-demo", parents=[common],
                       help="the characteristic square of monics and its pullback verdict")
    p.add_argument("model", nargs="?")
    p.add_argument("--arrow", help="monic arrow in the model file")
    p.add_argument("--default", choices=("top", "bottom"), default="top",
                   help="extension of the characteristic map outside the source support")
    p.add_argument("--atoms", type=int, default=2)
    p.add_argument("--max-stalk", type=int, default=2)
    p.add_argument("--unsafe-large", action="store_true")
    p.set_defaults(func=cmd_classifier_demo)

    p = sub.add_parser("generator-demo", parents=[common],
                       help="separate parallel arrows by arrows out of subterminals")
    p.add_argument("--atoms", type=int, default=2)
    p.add_argument("--max-stalk", type=int, default=2)
    p.add_argument("--unsafe-large", action="store_true")
    p.set_defaults(func=cmd_generator_demo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    fmt = getattr(args, "format", "text")
    try:
        code, report = args.func(args)
    except (ModelError, StructureError, SizeGuardError, UsageError, OSError) as exc:
        emit({"command": args.command, "error": str(exc), "passed": False}, fmt)
        return EXIT_INPUT
    except AxiomError as exc:
        emit({"command": args.command, "error": str(exc),
              "violations": _violations(exc.violations), "passed": False}, fmt)
        return EXIT_FAIL
    except (ArrowError, ValidationError) as exc:
        emit({"command": args.command, "error": str(exc), "passed": False}, fmt)
        return EXIT_INPUT
    emit(report, fmt)
    return code


if __name__ == "__main__":
    sys.exit(main())
