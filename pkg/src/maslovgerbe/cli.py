"""Command-line interface: ``maslov <subcommand>``.

Exit codes: 0 success, 1 failed verification or other error, 2 malformed
input, 3 complex loop where a real one is required, 4 the two gerbe routes
disagree.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bundles, cech, charts, symplectic
from .errors import FieldMismatchError, MaslovError, ShapeError, StructuralError
from .gerbe import giraud_cocycle, sqrt_gerbe_isos
from .verification import SAMPLES, jsonable, run_suite

EXIT_FAIL, EXIT_INPUT, EXIT_FIELD, EXIT_MISMATCH = 1, 2, 3, 4


class CLIError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _read_json(path: str) -> dict:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
        return json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise CLIError(f"cannot read JSON from {path}: {exc}", EXIT_INPUT) from exc


def _load_loop(path: str) -> symplectic.LagrangianLoop:
    doc = _read_json(path)
    try:
        loop = symplectic.loop_from_json(doc)
    except (ShapeError, FieldMismatchError) as exc:
        raise CLIError(f"malformed loop file: {exc}", EXIT_INPUT) from exc
    except MaslovError as exc:
        raise CLIError(f"invalid loop: {exc}", EXIT_INPUT) from exc
    if loop.space.field != "real":
        raise CLIError("loop lives in a complex space; the Maslov index needs a real one", EXIT_FIELD)
    return loop


def _emit(args, payload: dict, text: str):
    if args.json:
        print(json.dumps(jsonable(payload), indent=2, sort_keys=True))
    else:
        print(text)


def cmd_loop(args) -> int:
    if args.kind == "rotation":
        loop = symplectic.rotation_line_loop(args.k, args.samples)
    elif args.kind == "sp-graph":
        loop = symplectic.sp_graph_loop(args.samples)
    else:
        rng = np.random.default_rng(args.seed)
        fixed = symplectic.random_lagrangian(args.fixed_n, rng)
        loop = symplectic.direct_sum_loop(symplectic.rotation_line_loop(args.k, args.samples), fixed)
    print(json.dumps(symplectic.loop_to_json(loop)))
    return 0


def cmd_index(args) -> int:
    loop = _load_loop(args.loop)
    idx = charts.maslov_index(loop)
    _emit(args, {"index": idx, "n": loop.space.n, "samples": len(loop)}, str(idx))
    return 0


def cmd_holonomy(args) -> int:
    try:
        convention = bundles.BranchConvention.parse(args.branch)
    except MaslovError as exc:
        raise CLIError(str(exc), EXIT_INPUT) from exc
    loop = _load_loop(args.loop)
    res = bundles.maslov_holonomy_general(loop, convention)
    _emit(args, {"branch": args.branch, **res.to_json()}, res.name)
    return 0


def cmd_section(args) -> int:
    try:
        L = symplectic.frame_from_json(_read_json(args.frame))
        L0 = symplectic.frame_from_json(_read_json(args.base))
        phi = None
        if args.phi:
            raw = np.asarray(_read_json(args.phi)["phi"], dtype=float)
            phi = raw[..., 0] + 1j * raw[..., 1] if raw.ndim == 3 else raw
    except (ShapeError, FieldMismatchError, KeyError) as exc:
        raise CLIError(f"malformed frame file: {exc}", EXIT_INPUT) from exc
    sec = charts.maslov_section(L, L0, phi)
    defect = charts.transversality_defect(L, L0)
    v = complex(sec.value)
    payload = {"value": [v.real, v.imag], "scale": sec.scale, "vanishes": sec.vanishes(), "defect": defect}
    _emit(args, payload, f"{v.real:.12g}" if L.space.field == "real" else f"{v:.12g}")
    return 0


def _transition(args) -> cech.TransitionData:
    if getattr(args, "input", None):
        doc = _read_json(args.input)
        try:
            nerve = cech.nerve_from_json(doc["nerve"])
            return cech.transition_from_json(doc["transition"], nerve)
        except (KeyError, StructuralError) as exc:
            raise CLIError(f"malformed cover file: {exc}", EXIT_INPUT) from exc
    return bundles.build_cp1_cover(args.degree, args.samples).transition


def cmd_chern(args) -> int:
    t = _transition(args)
    report = cech.check_transition_cocycle(t)
    if not report.passed:
        _emit(args, {"cocycle": report.to_json()}, f"cocycle check failed: {report.to_json()}")
        return EXIT_FAIL
    c = cech.chern_cocycle(cech.lift_logs(t))
    payload = {"cocycle": report.to_json(), "chern_cocycle": c.table()}
    text = "no fundamental cycle"
    if t.nerve.faces:
        payload["evaluation"] = cech.evaluate_fundamental(c)
        text = str(payload["evaluation"])
    _emit(args, payload, text)
    return 0


def cmd_giraud(args) -> int:
    t = _transition(args)
    g = giraud_cocycle(sqrt_gerbe_isos(cech.lift_logs(t)), t.nerve)
    payload = {"giraud_cocycle": g.table()}
    text = "no fundamental cycle"
    if t.nerve.faces:
        value = cech.evaluate_fundamental(g)
        payload["evaluation"] = [value.real, value.imag]
        text = str(int(value.real))
    _emit(args, payload, text)
    return 0


def cmd_gerbe(args) -> int:
    report = bundles.maslov_gerbe_class(args.degree, args.samples)
    payload = report.to_json()
    expected = (-1) ** (args.degree % 2)
    payload["expected"] = [float(expected), 0.0]
    if args.json:
        print(json.dumps(jsonable(payload), indent=2, sort_keys=True))
    else:
        print(json.dumps(jsonable(payload), sort_keys=True))
    if not report.equal:
        return EXIT_MISMATCH
    return 0 if report.value == expected else EXIT_FAIL


def cmd_verify(args) -> int:
    reports = run_suite(args.seed, args.only)
    if args.json:
        print(json.dumps([r.to_json() for r in reports], indent=2))
    else:
        for r in reports:
            print(f"{r.status.upper():7s} {r.check_id:24s} {r.runtime:7.3f}s  {r.title}")
    return 0 if all(r.status != "fail" for r in reports) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="maslov", description="Maslov indices, Maslov line bundle and Maslov gerbe.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--samples", type=int, default=SAMPLES, help="samples on generated loops and the equator")
    common.add_argument("--seed", type=int, default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("loop", parents=[common], help="write a loop JSON file to stdout")
    p.add_argument("kind", choices=["rotation", "sp-graph", "direct-sum"])
    p.add_argument("--k", type=int, default=1, help="half-turns of the rotating line")
    p.add_argument("--fixed-n", type=int, default=1, help="half-dimension of the fixed summand")
    p.set_defaults(func=cmd_loop)

    p = sub.add_parser("index", parents=[common], help="Maslov index of a closed real loop")
    p.add_argument("loop", help="loop JSON file, or - for stdin")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("holonomy", parents=[common], help="Z4 holonomy of the Maslov line bundle")
    p.add_argument("loop")
    p.add_argument("--branch", default="+i", help="square root of arg(a) for a < 0: +i or -i")
    p.set_defaults(func=cmd_holonomy)

    p = sub.add_parser("section", parents=[common], help="determinant section at L relative to L0")
    p.add_argument("frame")
    p.add_argument("base")
    p.add_argument("--phi", help="JSON file {\"phi\": n x 2n matrix}")
    p.set_defaults(func=cmd_section)

    for name, func, text in (("chern", cmd_chern, "Chern cocycle and its evaluation"),
                             ("giraud", cmd_giraud, "Giraud cocycle of the square-root gerbe")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--degree", type=int, default=1, help="power of eta* on the CP1 cover")
        p.add_argument("--input", help="JSON file {\"nerve\": ..., \"transition\": ...}")
        p.set_defaults(func=func)

    p = sub.add_parser("gerbe", parents=[common], help="Maslov gerbe class by both routes")
    p.add_argument("--degree", type=int, default=1)
    p.set_defaults(func=cmd_gerbe)

    p = sub.add_parser("verify", parents=[common], help="run the verification suite")
    p.add_argument("--only", nargs="*", help="check ids or leading tokens (C1, P, ...)")
    p.set_defaults(func=cmd_verify)
    return parser


def _join_branch(argv: list) -> list:
    # "--branch -i" would otherwise read -i as an option
    out, it = [], iter(argv)
    for a in it:
        if a == "--branch":
            out.append(f"--branch={next(it, '')}")
        else:
            out.append(a)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(_join_branch(list(sys.argv[1:] if argv is None else argv)))
    try:
        return args.func(args)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except FieldMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FIELD
    except MaslovError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
