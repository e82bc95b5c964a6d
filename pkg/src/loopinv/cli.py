"""Command-line front end.

Three modes over a program file (or ``-`` for stdin):

* ``discover`` — derive a putative invariant for every loop, search for
  witnesses instantiating its generalisation variables, and report the
  bounded-check verdict;
* ``verify`` — for a program whose loops already carry ``{invariant}``
  annotations, check the classical conditions by bounded enumeration:
  the global condition pre ⇒ wlp(program, post) plus, for each loop on
  the top-level statement spine, establishment / preservation /
  sufficiency relative to the straight-line entry context;
* ``trace`` — print the numbered sequence of approximations the
  discovery engine walked through for each loop.

Exit codes: 0 all checks passed; 1 a bounded check found a
counterexample; 2 discovery or witness search failed (or the input was
rejected before checking); 3 the program did not parse or sort-check.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .engine import EngineConfig, LoopDiscovery, annotate_program
from .evaluator import holds
from .parser import ParseError, parse_program, pretty
from .simplifier import RULE_NAMES, SimpConfig
from .solver import (
    Failed,
    SolverConfig,
    SolverFailure,
    VerifiedUpToBound,
    diagnose_lost_variables,
    solve,
)
from .terms import Expr, Op, Seq, Skip, Stmt, Triple, While, free_vars, program_vars
from .wlp import LOOP_MODES, WlpError, entry_context, vcs_for_loop, wlp

import itertools

EXIT_OK = 0
EXIT_REFUTED = 1
EXIT_NO_INVARIANT = 2
EXIT_BAD_INPUT = 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="loopinv",
        description="discover and check loop invariants for a small imperative language",
    )
    p.add_argument("mode", choices=("discover", "verify", "trace"))
    p.add_argument("file", help="program file, or - to read from stdin")
    p.add_argument(
        "--bound",
        type=int,
        default=6,
        help="test stores over naturals up to this value (default 6)",
    )
    p.add_argument(
        "--max-iter",
        type=int,
        default=64,
        help="iteration budget for the discovery engine (default 64)",
    )
    p.add_argument(
        "--refutation-bound",
        type=int,
        default=8,
        help="store bound for the simplifier's refutation checks (default 8)",
    )
    p.add_argument(
        "--no-rule",
        action="append",
        choices=RULE_NAMES,
        default=[],
        metavar="RULE",
        help="disable a simplification rule (repeatable; R1..R6)",
    )
    p.add_argument(
        "--wlp-loop-rule",
        choices=LOOP_MODES,
        default="substitute",
        help="how weakest liberal preconditions pass through annotated loops "
        "(default: substitute the loop's summary equation)",
    )
    p.add_argument("--format", choices=("text", "json"), default="text")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if os.environ.get("LOOPINV_SEED") is not None:
        print(
            "error: LOOPINV_SEED is set, but discovery and witness search are "
            "deterministic; unset it to proceed",
            file=sys.stderr,
        )
        return EXIT_NO_INVARIANT
    try:
        if args.file == "-":
            text = sys.stdin.read()
        else:
            with open(args.file, encoding="utf-8") as fh:
                text = fh.read()
    except OSError as err:
        print(f"error: cannot read {args.file}: {err}", file=sys.stderr)
        return EXIT_BAD_INPUT
    try:
        triple = parse_program(text)
    except ParseError as err:
        print(f"parse error: {err}", file=sys.stderr)
        return EXIT_BAD_INPUT
    if args.mode == "discover":
        return _discover(triple, args)
    if args.mode == "verify":
        return _verify(triple, args)
    return _trace(triple, args)


def _engine_config(args: argparse.Namespace) -> EngineConfig:
    return EngineConfig(
        max_iterations=args.max_iter,
        wlp_loop_mode=args.wlp_loop_rule,
        simp=SimpConfig(
            refutation_bound=args.refutation_bound,
            disabled_rules=frozenset(args.no_rule),
        ),
    )


def _trace_json(d: LoopDiscovery) -> list[dict]:
    if d.trace is None:
        return []
    return [
        {"kind": s.kind, "formula": pretty(s.formula), "note": s.note}
        for s in d.trace.steps
    ]


def _location(d: LoopDiscovery) -> str:
    return f"line {d.line}" if d.line is not None else "unknown line"


def _discover(triple: Triple, args: argparse.Namespace) -> int:
    annotated, discoveries = annotate_program(triple, _engine_config(args))
    solver_cfg = SolverConfig(domain_bound=args.bound)
    loops: list[dict] = []
    warnings: list[str] = []
    code = EXIT_OK
    for d in discoveries:
        info: dict = {
            "location": d.line,
            "invariant": pretty(d.putative) if d.putative is not None else None,
            "genvars": list(d.genvars),
            "assignment": None,
            "verdict": None,
            "trace": _trace_json(d),
        }
        loops.append(info)
        if d.failure is not None or d.putative is None or d.post is None:
            failure = d.failure
            info["error"] = (
                f"{failure.kind}: {failure.message}" if failure else "no postcondition"
            )
            code = max(code, EXIT_NO_INVARIANT)
            continue
        try:
            report = solve(annotated, d.node, d.putative, d.genvars, d.post, solver_cfg)
        except SolverFailure as err:
            info["error"] = f"no witnesses (requirement {err.requirement}): {err.detail}"
            for v in diagnose_lost_variables(d.putative, d.node.body):
                warnings.append(
                    f"variable '{v}' is updated in the loop body but absent from "
                    "the invariant; its updates were generalised away"
                )
            code = max(code, EXIT_NO_INVARIANT)
            continue
        assert report.assignment is not None
        info["assignment"] = {
            part: {g: pretty(e) for g, e in getattr(report.assignment, part).items()}
            for part in ("initial", "step", "final")
        }
        if isinstance(report.verdict, VerifiedUpToBound):
            info["verdict"] = {"kind": "VerifiedUpToBound", "bound": report.verdict.bound}
        else:
            assert isinstance(report.verdict, Failed)
            info["verdict"] = {
                "kind": "Failed",
                "requirement": report.verdict.requirement,
                "counterexample": dict(report.verdict.counterexample),
            }
            code = max(code, EXIT_REFUTED)

    if args.format == "json":
        print(json.dumps({"loops": loops, "warnings": warnings}, ensure_ascii=False, indent=2))
        return code
    for d, info in zip(discoveries, loops):
        print(f"loop at {_location(d)}:")
        if info["invariant"] is not None:
            print(f"  invariant: {info['invariant']}")
        if info.get("error"):
            print(f"  error: {info['error']}")
            continue
        if info["genvars"]:
            print(f"  generalisation variables: {', '.join(info['genvars'])}")
            for g in info["genvars"]:
                a = info["assignment"]
                print(
                    f"    {g}: initial {a['initial'][g]}, step {a['step'][g]}, "
                    f"final {a['final'][g]}"
                )
        v = info["verdict"]
        if v["kind"] == "VerifiedUpToBound":
            print(f"  verdict: verified up to bound {v['bound']}")
        else:
            ce = " ".join(f"{k}={n}" for k, n in sorted(v["counterexample"].items()))
            print(f"  verdict: requirement {v['requirement']} fails at {ce}")
    for w in warnings:
        print(f"warning: {w}")
    return code


def _flatten(st: Stmt) -> list[Stmt]:
    match st:
        case Seq(a, b):
            return _flatten(a) + _flatten(b)
        case _:
            return [st]


def _reseq(stmts: list[Stmt]) -> Stmt:
    if not stmts:
        return Skip()
    out = stmts[-1]
    for st in reversed(stmts[:-1]):
        out = Seq(st, out)
    return out


def _all_loops(st: Stmt) -> list[While]:
    from .terms import Assign, Block, If

    match st:
        case While(_, body) as loop:
            return [loop] + _all_loops(body)
        case Seq(a, b):
            return _all_loops(a) + _all_loops(b)
        case If(_, t, e):
            return _all_loops(t) + _all_loops(e)
        case Block(_, inner):
            return _all_loops(inner)
        case _:
            return []


def _counterexample(formula: Expr, bound: int) -> dict[str, int] | None:
    names = sorted(free_vars(formula))
    for values in itertools.product(range(bound + 1), repeat=len(names)):
        store = dict(zip(names, values))
        if not holds(formula, store):
            return store
    return None


def _verify(triple: Triple, args: argparse.Namespace) -> int:
    known = program_vars(triple)
    for loop in _all_loops(triple.program):
        where = f"line {loop.line}" if loop.line is not None else "unknown line"
        if loop.invariant is None:
            print(
                f"error: loop at {where} has no {{invariant}} annotation; "
                "run discover first",
                file=sys.stderr,
            )
            return EXIT_NO_INVARIANT
        strange = sorted(free_vars(loop.invariant) - known)
        if strange:
            print(
                f"error: invariant at {where} mentions {', '.join(strange)}, "
                "which no program variable binds; generalisation variables must "
                "be instantiated before verification",
                file=sys.stderr,
            )
            return EXIT_NO_INVARIANT
    try:
        condition = Op("⇒", (triple.pre, wlp(triple.program, triple.post, "invariant")))
    except WlpError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NO_INVARIANT

    report: dict = {"bound": args.bound, "global": None, "loops": []}
    code = EXIT_OK
    ce = _counterexample(condition, args.bound)
    report["global"] = {"holds": ce is None, "counterexample": ce}
    if ce is not None:
        code = EXIT_REFUTED

    flat = _flatten(triple.program)
    for i, st in enumerate(flat):
        if not isinstance(st, While):
            continue
        ctx = entry_context(triple.pre, _reseq(flat[:i]))
        loop_post = wlp(_reseq(flat[i + 1 :]), triple.post, "invariant")
        vcs = vcs_for_loop(ctx, st, loop_post)
        entry: dict = {"location": st.line, "conditions": {}}
        for name, formula in (
            ("establishment", vcs.establishment),
            ("preservation", vcs.preservation),
            ("sufficiency", vcs.sufficiency),
        ):
            ce = _counterexample(formula, args.bound)
            entry["conditions"][name] = {"holds": ce is None, "counterexample": ce}
            if ce is not None:
                code = EXIT_REFUTED
        report["loops"].append(entry)

    if args.format == "json":
        print(json.dumps(report, ensure_ascii=False, indent=2))
        return code
    g = report["global"]
    if g["holds"]:
        print(f"global condition: holds on all stores with values <= {args.bound}")
    else:
        ce = " ".join(f"{k}={v}" for k, v in sorted(g["counterexample"].items()))
        print(f"global condition: fails at {ce}")
    for entry in report["loops"]:
        where = entry["location"]
        for name, res in entry["conditions"].items():
            if res["holds"]:
                print(f"loop at line {where}: {name} holds")
            else:
                ce = " ".join(f"{k}={v}" for k, v in sorted(res["counterexample"].items()))
                print(f"loop at line {where}: {name} fails at {ce}")
    return code


def _trace(triple: Triple, args: argparse.Namespace) -> int:
    _, discoveries = annotate_program(triple, _engine_config(args))
    code = EXIT_OK
    if args.format == "json":
        loops = []
        for d in discoveries:
            info = {"location": d.line, "trace": _trace_json(d)}
            if d.failure is not None:
                info["error"] = f"{d.failure.kind}: {d.failure.message}"
                code = max(code, EXIT_NO_INVARIANT)
            loops.append(info)
        print(json.dumps({"loops": loops}, ensure_ascii=False, indent=2))
        return code
    for d in discoveries:
        print(f"loop at {_location(d)}:")
        if d.trace is not None:
            for i, step in enumerate(d.trace.steps, start=1):
                note = f"  -- {step.note}" if step.note else ""
                print(f"  {i}. [{step.kind}] {pretty(step.formula)}{note}")
        if d.failure is not None:
            print(f"  error: {d.failure.kind}: {d.failure.message}")
            code = max(code, EXIT_NO_INVARIANT)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
