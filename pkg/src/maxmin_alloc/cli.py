"""Command-line driver: ``maxmin {solve,exact,lp,certify,gen,check}``.

Exit codes: 0 success, 2 usage or parse error, 3 unsupported combination,
4 enumeration budget exceeded, 5 verification failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Any, Dict, List, Optional

from . import configlp, exact, fileformat, greedy, instances
from .valuation import check_submodular_monotone, parse_value, render_value

EXIT_OK, EXIT_USAGE, EXIT_UNSUPPORTED, EXIT_BUDGET, EXIT_INVALID = 0, 2, 3, 4, 5


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _value_arg(text: str) -> Fraction:
    try:
        return parse_value(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _read_instance(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return fileformat.load_instance(fh.read())
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_USAGE) from exc
    except ValueError as exc:
        raise CliError(f"{path}: {exc}", EXIT_USAGE) from exc


def _emit(args, data: Dict[str, Any], lines: List[str]) -> None:
    if args.json:
        print(json.dumps(data, indent=1, sort_keys=True))
    else:
        print("\n".join(lines))


# ------------------------------------------------------------------ commands

def cmd_solve(args) -> int:
    inst = _read_instance(args.instance)
    if inst.matroids:
        raise CliError("greedy does not support matroids", EXIT_UNSUPPORTED)
    policy: greedy.TieBreakPolicy = greedy.LEXICOGRAPHIC
    if args.tiebreak != "lex":
        try:
            with open(args.tiebreak, encoding="utf-8") as fh:
                policy = fileformat.load_policy(fh.read(), inst)
        except OSError as exc:
            raise CliError(f"cannot read {args.tiebreak}: {exc.strerror}", EXIT_USAGE) from exc
        except ValueError as exc:
            raise CliError(f"{args.tiebreak}: {exc}", EXIT_USAGE) from exc

    if args.threshold is not None:
        if args.threshold < 0:
            raise CliError("threshold must be non-negative", EXIT_USAGE)
        if inst.cardinality_cap is not None:
            alloc, trace = greedy.greedy_cardinality(inst, args.threshold, policy)
        else:
            alloc, trace = greedy.greedy_with_threshold(inst, args.threshold, policy)
        achieved, guessed, used = alloc.min_value(inst.valuation), None, args.threshold
    else:
        if not 0 < args.alpha <= 1:
            raise CliError("alpha must lie in (0, 1]", EXIT_USAGE)
        res = greedy.solve_approx(inst, args.alpha, policy)
        alloc, trace = res.allocation, res.trace
        achieved, guessed, used = res.achieved_min, res.guessed_opt, res.threshold

    data = {
        "min": render_value(achieved),
        "threshold": render_value(used),
        "guessed_opt": None if guessed is None else render_value(guessed),
        "allocation": fileformat.allocation_to_dict(inst, alloc),
    }
    lines = [f"min {render_value(achieved)}", f"threshold {render_value(used)}"]
    if guessed is not None:
        lines.append(f"guessed_opt {render_value(guessed)}")
    lines.append(fileformat.render_allocation(inst, alloc))
    if args.trace:
        text = fileformat.render_trace(inst, trace)
        data["trace"] = text.splitlines()
        lines += ["trace:", text]
    _emit(args, data, lines)
    return EXIT_OK


def cmd_exact(args) -> int:
    inst = _read_instance(args.instance)
    opt, alloc = exact.opt_maxmin(inst, args.budget)
    data = {"opt": render_value(opt), "allocation": fileformat.allocation_to_dict(inst, alloc)}
    _emit(args, data, [f"opt {render_value(opt)}", fileformat.render_allocation(inst, alloc)])
    return EXIT_OK


def cmd_lp(args) -> int:
    inst = _read_instance(args.instance)
    if args.scan:
        value = configlp.lp_opt(inst)
        data: Dict[str, Any] = {"lp_opt": render_value(value)}
        lines = [f"lp_opt {render_value(value)}"]
        try:
            opt, _ = exact.opt_maxmin(inst, args.budget)
        except exact.BudgetExceeded:
            opt = None
        if opt is not None:
            data["opt"] = render_value(opt)
            lines.append(f"opt {render_value(opt)}")
            if opt > 0:
                data["gap"] = render_value(value / opt)
                lines.append(f"gap {render_value(value / opt)}")
        _emit(args, data, lines)
        return EXIT_OK

    verdict = configlp.decide_configuration_lp(inst, args.threshold)
    if verdict.feasible:
        problems = configlp.verify_primal_witness(inst, verdict.witness)
        text = fileformat.render_witness(inst, verdict.witness)
        data = {"verdict": "FEASIBLE", "witness": text.splitlines(), "problems": problems}
        _emit(args, data, ["verdict FEASIBLE", text])
        return EXIT_INVALID if problems else EXIT_OK
    check = configlp.verify_certificate(inst, verdict.certificate)
    text = fileformat.render_certificate(inst, verdict.certificate, check)
    data = {"verdict": "INFEASIBLE", "certificate": text.splitlines()}
    _emit(args, data, ["verdict INFEASIBLE", text])
    return EXIT_OK if check.ok else EXIT_INVALID


def cmd_certify(args) -> int:
    inst = _read_instance(args.instance)
    if args.theorem == 3:
        if inst.matroids:
            raise CliError("--theorem 3 is for instances without matroids", EXIT_USAGE)
        build = configlp.build_certificate_thm3
    else:
        if not inst.matroids:
            raise CliError("--theorem 8 needs at least one matroid", EXIT_USAGE)
        build = configlp.build_certificate_thm8
    try:
        cert = build(inst, budget=args.budget)
        code = EXIT_OK
    except configlp.CertificateInvalid as exc:
        cert, code = exc.certificate, EXIT_INVALID
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE) from exc
    check = configlp.verify_certificate(inst, cert)
    text = fileformat.render_certificate(inst, cert, check)
    _emit(args, {"certificate": text.splitlines(), "verified": check.ok}, [text])
    return code if check.ok else EXIT_INVALID


def cmd_gen(args) -> int:
    try:
        return _gen(args)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE) from exc


def _gen(args) -> int:
    policy = None
    if args.family == "gap":
        inst = instances.gen_gap_instance()
    elif args.family == "random":
        inst = instances.gen_random(args.kind, args.n, args.m, args.seed, args.bound)
        if args.matroids:
            inst = inst.replace(matroids=instances.random_matroids(inst.n, args.seed))
    elif args.family == "sylvester":
        fam = instances.gen_sylvester_additive(args.N)
        inst, policy = fam.instance, fam.policy
    else:
        fam = instances.gen_sylvester_additive(args.N)
        lifted = instances.lift_to_submodular(
            fam.instance, fam.unallocated_item, fam.delta,
            partial=fam.partial_reference, policy=fam.policy)
        inst, policy = lifted.instance, lifted.policy
    text = fileformat.dump_instance(inst)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.policy_out:
        if policy is None:
            raise CliError("this family has no tie-break policy", EXIT_USAGE)
        with open(args.policy_out, "w", encoding="utf-8") as fh:
            fh.write(fileformat.dump_policy(policy, inst))
    return EXIT_OK


def cmd_check(args) -> int:
    inst = _read_instance(args.instance)
    try:
        report = check_submodular_monotone(inst.valuation, args.samples, args.seed)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE) from exc

    def names(items):
        return sorted(inst.labels[j] for j in items)

    data: Dict[str, Any] = {"mode": report.mode, "checked": report.checked,
                            "submodular": report.submodular, "monotone": report.monotone}
    lines = [f"mode {report.mode} ({report.checked} checks)",
             f"submodular {str(report.submodular).lower()}",
             f"monotone {str(report.monotone).lower()}"]
    if report.witness is not None:
        j, s, t = report.witness
        data["witness"] = {"item": inst.labels[j], "S": names(s), "T": names(t)}
        lines.append(f"witness item {inst.labels[j]} S {{{', '.join(names(s))}}} "
                     f"T {{{', '.join(names(t))}}}")
    if report.monotone_witness is not None:
        s, t = report.monotone_witness
        data["monotone_witness"] = {"S": names(s), "T": names(t)}
        lines.append(f"monotonicity fails for S {{{', '.join(names(s))}}} "
                     f"T {{{', '.join(names(t))}}}")
    _emit(args, data, lines)
    return EXIT_OK


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="maxmin", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, func, help_text, instance=True):
        p = sub.add_parser(name, help=help_text)
        if instance:
            p.add_argument("instance", help="instance JSON file")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.set_defaults(func=func)
        return p

    p = command("solve", cmd_solve, "truncated max-sum greedy with threshold search")
    p.add_argument("--alpha", type=_value_arg, default=Fraction(2, 5))
    p.add_argument("--threshold", type=_value_arg, default=None,
                   help="run a single greedy pass at this threshold instead of searching")
    p.add_argument("--tiebreak", default="lex", help="'lex' or a policy JSON file")
    p.add_argument("--trace", action="store_true")

    p = command("exact", cmd_exact, "brute-force optimum")
    p.add_argument("--budget", type=int, default=None)

    p = command("lp", cmd_lp, "configuration LP at one threshold, or its optimum")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--threshold", type=_value_arg)
    group.add_argument("--scan", action="store_true")
    p.add_argument("--budget", type=int, default=None)

    p = command("certify", cmd_certify, "build and verify a dual certificate")
    p.add_argument("--theorem", type=int, choices=(3, 8), required=True)
    p.add_argument("--budget", type=int, default=None)

    p = command("gen", cmd_gen, "write a generated instance", instance=False)
    p.add_argument("family", choices=("gap", "random", "sylvester", "lifted"))
    p.add_argument("--kind", choices=("additive", "coverage"), default="coverage")
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bound", type=int, default=5)
    p.add_argument("--matroids", action="store_true", help="attach random matroids")
    p.add_argument("--N", type=int, default=3)
    p.add_argument("--out")
    p.add_argument("--policy-out")

    p = command("check", cmd_check, "check submodularity and monotonicity")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except exact.BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
