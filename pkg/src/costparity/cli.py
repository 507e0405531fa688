"""Batch command-line front-end.

Exit protocol: 0 for a clean validate / ACHIEVABLE solve, 1 for
NOT-ACHIEVABLE, 2 on any error (one machine-parsable line
``error: <code>: <msg>`` on stderr; budget exhaustion uses code
``budget``).
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import core, generators, semantics, solver, streett


class CliError(Exception):
    def __init__(self, code: str, msg: str):
        super().__init__(msg)
        self.code = code


def _load_game(path: str):
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise CliError("io", f"cannot read {path}: {exc}") from exc
    try:
        if p.suffix == ".cst":
            return streett.parse_cst(text)
        return core.parse_cpg(text)
    except (core.FormatError, ValueError) as exc:
        raise CliError("format", f"{path}: {exc}") from exc


def _write(path: Path, text: str, out) -> None:
    path.write_text(text)
    print(f"wrote {path}", file=out)


def _fmt_cost(value) -> str:
    return "inf" if value == math.inf else str(int(value))


def cmd_validate(args, out) -> int:
    game = _load_game(args.file)
    if isinstance(game, streett.CostStreettGame):
        report = streett.validate_streett_game(game)
    else:
        report = core.validate_game(game)
    for line in report:
        print(line, file=out)
    if not report:
        print("ok", file=out)
    return 0 if not report else 2


def cmd_solve(args, out) -> int:
    game = _load_game(args.file)
    if isinstance(game, streett.CostStreettGame):
        res = streett.decide_bounded_cost_streett(game, args.bound,
                                                  budget=args.product_budget)
    elif args.engine == "finite-duration":
        fd = solver.decide_bounded_cost_finite_duration(game, args.bound,
                                                        node_budget=args.budget)
        if fd.exhausted:
            raise CliError("budget", f"node budget {args.budget} exhausted")
        print("ACHIEVABLE" if fd.achievable else "NOT-ACHIEVABLE", file=out)
        return 0 if fd.achievable else 1
    else:
        res = solver.decide_bounded_cost(game, args.bound,
                                         product_budget=args.product_budget)
    print("ACHIEVABLE" if res.achievable else "NOT-ACHIEVABLE", file=out)
    target = Path(args.output) if args.output else Path(args.file).with_suffix(".strat")
    _write(target, core.format_strat(res.certificate), out)
    return 0 if res.achievable else 1


def cmd_optimal(args, out) -> int:
    game = _load_game(args.file)
    if isinstance(game, streett.CostStreettGame):
        res = streett.optimal_cost_streett(game, budget=args.product_budget)
        if res.cap_hit:
            raise CliError("budget",
                           f"not achievable up to the practical cap {res.searched_up_to}")
        value, witness = res.value, res.witness
    else:
        res = solver.optimal_cost(game, product_budget=args.product_budget)
        value, witness = res.value, res.witness
    print(f"optimal {_fmt_cost(value)}", file=out)
    if witness is not None:
        target = Path(args.output) if args.output else Path(args.file).with_suffix(".strat")
        _write(target, core.format_strat(witness), out)
    return 0


def cmd_verify(args, out) -> int:
    game = _load_game(args.file)
    try:
        strat = core.parse_strat(Path(args.strategy).read_text())
    except OSError as exc:
        raise CliError("io", f"cannot read {args.strategy}: {exc}") from exc
    except core.FormatError as exc:
        raise CliError("format", f"{args.strategy}: {exc}") from exc
    try:
        if isinstance(game, streett.CostStreettGame):
            fn = (streett.streett_strategy_cost if strat.player == 0
                  else streett.streett_spoiler_cost)
        else:
            fn = semantics.strategy_cost if strat.player == 0 else semantics.spoiler_cost
        value = fn(game, strat)
    except ValueError as exc:
        raise CliError("strategy", str(exc)) from exc
    print(f"cost {_fmt_cost(value)}", file=out)
    return 0


_FAMILIES = {
    "qbf": None,
    "p0mem": generators.p0_memory_family,
    "p1mem": generators.p1_memory_family,
    "p1trade": generators.p1_tradeoff_family,
    "bintrade": generators.binary_tradeoff_family,
    "streett": generators.streett_counter_family,
}


def cmd_generate(args, out) -> int:
    if args.family == "qbf":
        if not args.qdimacs:
            raise CliError("usage", "generate qbf requires --qdimacs")
        try:
            phi = generators.parse_qdimacs(Path(args.qdimacs).read_text())
        except OSError as exc:
            raise CliError("io", f"cannot read {args.qdimacs}: {exc}") from exc
        except core.FormatError as exc:
            raise CliError("format", f"{args.qdimacs}: {exc}") from exc
        inst = generators.qbf_to_game(phi)
    else:
        try:
            inst = _FAMILIES[args.family](args.d)
        except ValueError as exc:
            raise CliError("usage", str(exc)) from exc
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    base = f"{inst.family}-d{inst.d}"
    if isinstance(inst.game, streett.CostStreettGame):
        _write(outdir / f"{base}.cst", streett.format_cst(inst.game), out)
    else:
        _write(outdir / f"{base}.cpg", core.format_cpg(inst.game), out)
    for ref in inst.reference_strategies:
        _write(outdir / f"{base}.{ref.name}.strat",
               core.format_strat(ref.strategy), out)
    _write(outdir / f"{base}.manifest", inst.manifest(), out)
    return 0


def cmd_convert(args, out) -> int:
    if not args.subdivide:
        raise CliError("usage", "convert requires --subdivide")
    game = _load_game(args.file)
    if isinstance(game, streett.CostStreettGame):
        raise CliError("usage", "convert --subdivide applies to .cpg games only")
    converted = core.subdivide_costs(game)
    target = Path(args.output) if args.output else \
        Path(args.file).with_name(Path(args.file).stem + ".unary.cpg")
    _write(target, core.format_cpg(converted), out)
    return 0


def cmd_export(args, out) -> int:
    if not args.dot:
        raise CliError("usage", "export requires --dot")
    game = _load_game(args.file)
    if isinstance(game, streett.CostStreettGame):
        raise CliError("usage", "export --dot applies to .cpg games only")
    text = core.export_dot(game)
    if args.output:
        _write(Path(args.output), text, out)
    else:
        out.write(text)
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("usage", message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="costparity",
                 description="parity and Streett games with costs")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a game file's invariants")
    p.add_argument("file")

    p = sub.add_parser("solve", help="decide bounded-cost strategy existence")
    p.add_argument("--bound", "-b", type=int, required=True)
    p.add_argument("--engine", choices=["explicit", "finite-duration"],
                   default="explicit")
    p.add_argument("--budget", type=int, default=solver.DEFAULT_NODE_BUDGET,
                   help="node budget for the finite-duration engine")
    p.add_argument("--product-budget", type=int,
                   default=solver.DEFAULT_PRODUCT_BUDGET)
    p.add_argument("--output", "-o")
    p.add_argument("file")

    p = sub.add_parser("optimal", help="compute the optimal strategy cost")
    p.add_argument("--product-budget", type=int,
                   default=solver.DEFAULT_PRODUCT_BUDGET)
    p.add_argument("--output", "-o")
    p.add_argument("file")

    p = sub.add_parser("verify", help="exact cost of a finite-state strategy")
    p.add_argument("--strategy", "-s", required=True)
    p.add_argument("file")

    p = sub.add_parser("generate", help="emit a lower-bound instance family")
    p.add_argument("family", choices=sorted(_FAMILIES))
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--qdimacs", help="formula file for the qbf family")
    p.add_argument("--outdir", default=".")

    p = sub.add_parser("convert", help="re-encode a game")
    p.add_argument("--subdivide", action="store_true",
                   help="unary encoding via edge subdivision")
    p.add_argument("--output", "-o")
    p.add_argument("file")

    p = sub.add_parser("export", help="export to DOT")
    p.add_argument("--dot", action="store_true")
    p.add_argument("--output", "-o")
    p.add_argument("file")

    return ap


_COMMANDS = {
    "validate": cmd_validate,
    "solve": cmd_solve,
    "optimal": cmd_optimal,
    "verify": cmd_verify,
    "generate": cmd_generate,
    "convert": cmd_convert,
    "export": cmd_export,
}


def run(argv: list[str], out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    ap = build_parser()
    try:
        try:
            args = ap.parse_args(argv)
        except SystemExit as exc:  # --help
            return 0 if not exc.code else 2
        return _COMMANDS[args.command](args, out)
    except CliError as exc:
        print(f"error: {exc.code}: {exc}", file=err)
        return 2
    except core.BudgetExceededError as exc:
        print(f"error: budget: {exc}", file=err)
        return 2
    except (ValueError, core.FormatError) as exc:
        print(f"error: invalid: {exc}", file=err)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))
