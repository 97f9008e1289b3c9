r"""Command-line interface: certify, solve, enumerate, generate, compare.

Usage::

    $ python -m avecert check --example gavme-2x2
    $ python -m avecert solve instance.json -o X.json
    $ python -m avecert oracle --example sylvester-scalar
    $ python -m avecert gen --n 2 --rho 0.5 --seed 7 -o generated.json
    $ python -m avecert compare --n 3 --rho 0.9 --trials 1000
    $ python -m avecert examples

Exit codes: 0 success (check: a sound condition certified), 1 I/O, parse or
usage error, 2 nothing certified / violations found / golden check failed,
3 every condition inapplicable, 4 solver did not converge, 5 singular
hypothesis matrix.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from avecert.core.config import settings
from avecert.core.errors import AveError, NonConvergence, SingularMatrix
from avecert.models.instances import Instance
from avecert.models.schemas import INFINITE, Certificate, EquationClass, GenSpec, SolveOptions, Verdict
from avecert.services.certify import any_certified, certify_instance
from avecert.services.harness import compare_conditions, gen_instance, run_reference_examples
from avecert.services.instances import parse_instance, write_instance, write_matrix
from avecert.services.reference_cases import REFERENCE_CASES, get_case
from avecert.services.solve import gavme_solution_count, oracle_instance, solve_instance

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_CERTIFIED = 2
EXIT_INAPPLICABLE = 3
EXIT_NONCONVERGENCE = 4
EXIT_SINGULAR = 5


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        Path(output).write_text(text + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text + "\n")


def _load(args) -> Instance:
    if args.example:
        return get_case(args.example).instance
    equation_class = EquationClass(args.type) if args.type else None
    if args.input is None:
        return parse_instance(sys.stdin, equation_class=equation_class)
    return parse_instance(args.input, args.format, equation_class)


def _format_certificate(cert: Certificate) -> str:
    witnesses = ", ".join(f"{k}={v:.6g}" for k, v in cert.witnesses.items())
    line = f"{cert.condition_id.value:<26}{cert.verdict.value:<26}{witnesses}"
    return f"{line}  [{cert.notes}]" if cert.notes else line


def cmd_check(args) -> int:
    inst = _load(args)
    certs = certify_instance(
        inst,
        enum_cap=args.cap_enum,
        kron_cap=args.cap_kron,
        decision_tol=args.tol_decision,
        probe_seed=args.seed,
    )
    if args.json:
        _emit(json.dumps([c.model_dump(mode="json") for c in certs], indent=2), args.output)
    else:
        _emit("\n".join(_format_certificate(c) for c in certs), args.output)
    for cert in certs:
        if cert.verdict == Verdict.UNSOUND_CONDITION_HOLDS:
            sys.stderr.write(f"warning: {cert.condition_id.value} holds but is not a valid certificate: {cert.notes}\n")

    if any_certified(certs):
        return EXIT_OK
    if all(c.verdict == Verdict.INAPPLICABLE for c in certs):
        return EXIT_INAPPLICABLE
    return EXIT_NOT_CERTIFIED


def cmd_solve(args) -> int:
    inst = _load(args)
    opts = SolveOptions.from_settings(
        max_iterations=args.max_iter,
        step_tolerance=args.tol_step,
        residual_tolerance=args.tol_residual,
    )
    result = solve_instance(inst, opts)

    uniqueness = "certified" if result.certificate_used else "unknown"
    if result.certificate_used is None and inst.order <= settings.ORACLE_FALLBACK_MAX_ORDER:
        count = gavme_solution_count(oracle_instance(inst, cap=args.cap_enum))
        uniqueness = "unique" if count == 1 else f"non-unique ({count} solutions)"
        if count != 1:
            logger.warning(f"Oracle counts {count} solutions; the returned one is not unique")

    if args.output:
        output_format = args.format or ("mtx" if args.input and Path(args.input).is_dir() else "json")
        write_matrix(result.solution, args.output, output_format)
    if args.json:
        payload = result.model_dump(mode="json", exclude={"solution"} if args.output else None)
        payload["uniqueness"] = uniqueness
        sys.stdout.write(json.dumps(payload, indent=2) + "\n")
    else:
        lines = [
            f"converged: {result.converged}",
            f"iterations: {result.iterations}",
            f"residual: {result.final_residual:.3e}",
            f"certificate: {result.certificate_used.value if result.certificate_used else 'none'}",
            f"uniqueness: {uniqueness}",
        ]
        if result.oracle_columns:
            lines.append(f"oracle columns: {result.oracle_columns}")
        if not args.output:
            lines.append(f"solution: {json.dumps(result.solution.tolist())}")
        sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK if result.converged else EXIT_NONCONVERGENCE


def cmd_oracle(args) -> int:
    inst = _load(args)
    reports = oracle_instance(inst, cap=args.cap_enum)
    if args.json:
        _emit(json.dumps([r.model_dump(mode="json") for r in reports], indent=2), args.output)
        return EXIT_OK

    lines = []
    for j, report in enumerate(reports):
        if report.solution_count == INFINITE:
            lines.append(f"column {j}: infinitely many solutions")
            continue
        rendered = "; ".join(", ".join(f"{v:.6g}" for v in s) for s in report.solutions)
        lines.append(f"column {j}: {report.solution_count} solutions" + (f": {rendered}" if rendered else ""))
        if report.degenerate_patterns:
            lines.append(f"  singular pattern systems: {report.degenerate_patterns}")
    if len(reports) > 1:
        lines.append(f"total: {gavme_solution_count(reports)}")
    _emit("\n".join(lines), args.output)
    return EXIT_OK


def _gen_spec(args) -> GenSpec:
    return GenSpec(
        n=args.n,
        m=args.m,
        equation_class=EquationClass(args.equation_class),
        target_rho=args.rho,
        entry_distribution=args.dist,
        seed=args.seed if args.seed is not None else 0,
    )


def cmd_gen(args) -> int:
    generated = gen_instance(_gen_spec(args))
    extra = {"ground_truth": generated.ground_truth}
    if args.output:
        write_instance(generated.instance, args.output, args.format or "json", extra)
    else:
        bundle = generated.instance.model_dump(mode="json", exclude_none=True)
        bundle["ground_truth"] = generated.ground_truth.tolist()
        sys.stdout.write(json.dumps(bundle, indent=2) + "\n")
    logger.info(f"realized rho = {generated.realized_rho}")
    return EXIT_OK


def cmd_compare(args) -> int:
    table = compare_conditions(_gen_spec(args), args.trials, args.oracle_rhs, enum_cap=args.cap_enum)
    _emit(table.model_dump_json(indent=2) if args.json else table.to_text(), args.output)
    return EXIT_OK if table.clean else EXIT_NOT_CERTIFIED


def cmd_examples(args) -> int:
    report = run_reference_examples(args.tolerance)
    _emit(report.model_dump_json(indent=2) if args.json else report.to_text(), args.output)
    return EXIT_OK if report.all_passed else EXIT_NOT_CERTIFIED


def _add_output(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--output", "-o", help="write the result here instead of stdout")
    parser.add_argument("--json", action="store_true", default=False, help="machine-readable JSON output")


def _add_input(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("input", nargs="?", help="JSON bundle or MatrixMarket directory (default: JSON on stdin)")
    parser.add_argument("--example", choices=sorted(REFERENCE_CASES), help="use an embedded instance")
    parser.add_argument("--format", choices=("json", "mtx"), help="input format (inferred from the path)")
    parser.add_argument("--type", choices=[c.value for c in EquationClass], help="equation class override")
    parser.add_argument("--cap-enum", type=int, help="enumeration cap (default settings.ENUM_CAP)")


def _add_generation(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n", type=int, required=True, help="order of the coefficient matrices")
    parser.add_argument("--m", type=int, default=1, help="columns of F")
    parser.add_argument("--class", dest="equation_class", default="GAVE",
                        choices=[c.value for c in EquationClass])
    parser.add_argument("--rho", type=float, help="target rho(|A^-1 B|)")
    parser.add_argument("--dist", choices=("uniform", "integer"), default="uniform")
    parser.add_argument("--seed", type=int, help="seed of every random draw")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="python -m avecert",
        description="Certify and solve absolute value (matrix) equations.",
    )
    parser.add_argument("--verbose", "-v", action="store_true", default=False, help="debug logging")
    commands = parser.add_subparsers(dest="command", required=True)

    check = commands.add_parser("check", help="evaluate every sufficient condition")
    _add_input(check)
    _add_output(check)
    check.add_argument("--cap-kron", type=int, help="Kronecker lift cap")
    check.add_argument("--tol-decision", type=float, help="decision band around certificate thresholds")
    check.add_argument("--seed", type=int, help="seed of the invertibility probe")
    check.set_defaults(handler=cmd_check)

    solve = commands.add_parser("solve", help="solve an instance with a right-hand side")
    _add_input(solve)
    _add_output(solve)
    solve.add_argument("--max-iter", type=int, help="Picard iteration cap")
    solve.add_argument("--tol-step", type=float, help="fixed-point step tolerance")
    solve.add_argument("--tol-residual", type=float, help="residual tolerance")
    solve.set_defaults(handler=cmd_solve)

    oracle = commands.add_parser("oracle", help="enumerate every solution of a small instance")
    _add_input(oracle)
    _add_output(oracle)
    oracle.set_defaults(handler=cmd_oracle)

    gen = commands.add_parser("gen", help="generate a random instance")
    _add_generation(gen)
    gen.add_argument("--format", choices=("json", "mtx"), help="output format")
    gen.add_argument("--output", "-o", help="JSON file or MatrixMarket directory")
    gen.set_defaults(handler=cmd_gen)

    compare = commands.add_parser("compare", help="compare conditions on generated instances")
    _add_generation(compare)
    _add_output(compare)
    compare.add_argument("--trials", type=int, default=100)
    compare.add_argument("--oracle-rhs", type=int, default=0, help="random right-hand sides checked by the oracle")
    compare.add_argument("--cap-enum", type=int, help="enumeration cap")
    compare.set_defaults(handler=cmd_compare)

    examples = commands.add_parser("examples", help="run the reference regression suite")
    _add_output(examples)
    examples.add_argument("--tolerance", type=float, help="replace every per-value tolerance")
    examples.set_defaults(handler=cmd_examples)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else settings.log_level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    try:
        return args.handler(args)
    except SingularMatrix as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_SINGULAR if args.command == "solve" else EXIT_ERROR
    except NonConvergence as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_NONCONVERGENCE
    except (AveError, OSError, ValueError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_ERROR
