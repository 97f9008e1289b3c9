"""
Solvers: the exhaustive sign-pattern oracle, Picard fixed-point iteration and
the column-wise / reduction-based drivers for the matrix equations.
"""
import itertools
import logging
from typing import List, Optional, Union

import numpy as np

from avecert.core.config import settings
from avecert.core.errors import DimensionMismatch, DimensionOverflow, MissingRightHandSide, NonConvergence, SingularMatrix
from avecert.models.instances import GaveInstance, GavmeInstance, Instance, NgavmeInstance, SylvesterAveInstance
from avecert.models.schemas import INFINITE, ConditionId, OracleReport, SolveOptions, SolveResult, Verdict
from avecert.services.certify import check_gavme_classic, check_gavme_spectral
from avecert.services.instances import gavme_columns, reduce_ngavme, scalar_sylvester_as_gave
from avecert.services.matcore import abs_elementwise, as_matrix, invert, norm_inf, solve_linear

logger = logging.getLogger(__name__)

# certificate of the reduced GAVME AC^-1 Y + B|Y| = F -> the NGAVME condition it is
NGAVME_EQUIVALENT = {
    ConditionId.GAVME_SPECTRAL: ConditionId.NGAVME_RHO,
    ConditionId.CLASSIC_I: ConditionId.NGAVME_I,
    ConditionId.CLASSIC_II: ConditionId.NGAVME_II,
    ConditionId.CLASSIC_III: ConditionId.NGAVME_III,
    ConditionId.CLASSIC_IV: ConditionId.NGAVME_IV,
}


def _gave_residual(A: np.ndarray, B: np.ndarray, x: np.ndarray, f: np.ndarray) -> float:
    return norm_inf(A @ x + B @ abs_elementwise(x) - f)


def oracle_gave(A: np.ndarray, B: np.ndarray, f: np.ndarray, *, cap: Optional[int] = None) -> OracleReport:
    """
    Every solution of Ax + B|x| = f by enumeration of the 2^n sign patterns.

    For each d in {+1, -1}^n (lexicographic, +1 first) the linear system
    (A + B diag(d)) x = f is solved and x is kept when d_i x_i >= -slack for
    every i. Solutions closer than the dedup tolerance are merged. A singular
    pattern system that is consistent makes the count INFINITE.

    Raises:
        DimensionOverflow: 2^n exceeds the enumeration cap
    """
    cap = settings.ENUM_CAP if cap is None else cap
    n = A.shape[0]
    if n >= 63 or 2 ** n > cap:
        raise DimensionOverflow("oracle sign patterns 2^n", 2 ** min(n, 63), cap)
    if n > settings.ORACLE_WARN_ORDER:
        logger.warning(f"Oracle on order {n}: {2 ** n} linear solves")
    f = np.asarray(f, dtype=np.float64).reshape(-1)

    solutions: List[np.ndarray] = []
    patterns: List[List[int]] = []
    degenerate: List[List[int]] = []
    consistent_singular = False
    scanned = 0
    for signs in itertools.product((1, -1), repeat=n):
        scanned += 1
        d = np.asarray(signs, dtype=np.float64)
        M = A + B * d[None, :]
        try:
            x = solve_linear(M, f, name=f"A + B diag{signs}")
        except SingularMatrix:
            degenerate.append(list(signs))
            least_squares = np.linalg.lstsq(M, f, rcond=None)[0]
            scale = max(1.0, norm_inf(f), norm_inf(M) * norm_inf(least_squares))
            if norm_inf(M @ least_squares - f) <= settings.RESIDUAL_TOLERANCE * scale:
                consistent_singular = True
                logger.warning(f"Pattern {signs} gives a singular consistent system")
            continue
        if np.all(d * x >= -settings.SIGN_SLACK * (1.0 + norm_inf(x))):
            if not any(norm_inf(x - s) < settings.DEDUP_TOL for s in solutions):
                solutions.append(x)
                patterns.append(list(signs))
                logger.debug(f"Pattern {signs} yields a solution")

    if degenerate and not consistent_singular:
        logger.warning(f"{len(degenerate)} singular pattern systems, all inconsistent")
    count: Union[int, str] = INFINITE if consistent_singular else len(solutions)
    return OracleReport(
        solution_count=count,
        solutions=[s.tolist() for s in solutions],
        solution_patterns=patterns,
        degenerate_patterns=degenerate,
        consistent_singular=consistent_singular,
        scanned=scanned,
    )


def solve_gave_picard(
    A: np.ndarray,
    B: np.ndarray,
    f: np.ndarray,
    opts: Optional[SolveOptions] = None,
    *,
    column: Optional[int] = None,
) -> SolveResult:
    """
    Picard iteration x <- A^-1 (f - B|x|).

    The loop stops as soon as the next step is within
    ``step_tolerance * max(1, |x|)``; ``iterations`` counts applied updates.
    A result is converged when the step test passed and the residual meets
    ``residual_tolerance``.

    Raises:
        SingularMatrix: A is not invertible
        NonConvergence: Only with ``opts.strict``
    """
    opts = opts or SolveOptions.from_settings()
    a_inverse = invert(A, name="A")
    f = np.asarray(f, dtype=np.float64).reshape(-1)
    x = np.zeros_like(f) if opts.initial_point is None else np.array(opts.initial_point, dtype=np.float64)
    if x.shape != f.shape:
        raise DimensionMismatch(f"initial point has length {x.size}, expected {f.size}")

    iterations = 0
    settled = False
    while True:
        x_next = a_inverse @ (f - B @ abs_elementwise(x))
        if not np.all(np.isfinite(x_next)):
            logger.debug("Picard iterate left the floating point range")
            break
        if norm_inf(x_next - x) <= opts.step_tolerance * max(1.0, norm_inf(x)):
            settled = True
            break
        if iterations == opts.max_iterations:
            break
        x = x_next
        iterations += 1

    final_residual = _gave_residual(A, B, x, f)
    converged = settled and final_residual <= opts.residual_tolerance
    if not converged:
        message = f"Picard stopped after {iterations} updates with residual {final_residual:.3e}"
        if opts.strict:
            raise NonConvergence(message, last_iterate=x, residual=final_residual, iterations=iterations, column=column)
        logger.debug(message)
    return SolveResult(
        solution=x,
        iterations=iterations,
        final_residual=final_residual,
        converged=converged,
        column_iterations=[iterations],
    )


def uniqueness_certificate(A: np.ndarray, B: np.ndarray) -> Optional[ConditionId]:
    """First analytic GAVE condition that certifies unique solvability, if any."""
    for cert in [check_gavme_spectral(A, B)] + check_gavme_classic(A, B):
        if cert.verdict == Verdict.CERTIFIED:
            return cert.condition_id
    return None


def _oracle_pick(A: np.ndarray, B: np.ndarray, f: np.ndarray, column: int) -> Optional[np.ndarray]:
    report = oracle_gave(A, B, f)
    if report.solution_count == INFINITE or report.solution_count == 0:
        logger.warning(f"Column {column}: oracle found {report.solution_count} solutions")
        return None
    if report.solution_count > 1:
        logger.warning(f"Column {column}: oracle found {report.solution_count} solutions, returning the first")
    return np.asarray(report.solutions[0])


def _solve_column(
    A: np.ndarray,
    B: np.ndarray,
    f: np.ndarray,
    opts: SolveOptions,
    certificate: Optional[ConditionId],
    column: int,
) -> SolveResult:
    result = solve_gave_picard(A, B, f, opts.model_copy(update={"strict": False}), column=column)
    if result.converged:
        return result

    if opts.oracle_fallback and A.shape[0] <= settings.ORACLE_FALLBACK_MAX_ORDER:
        x = _oracle_pick(A, B, f, column)
        if x is not None:
            final_residual = _gave_residual(A, B, x, f)
            logger.info(f"Column {column}: Picard failed, oracle fallback residual {final_residual:.3e}")
            return SolveResult(
                solution=x,
                iterations=result.iterations,
                final_residual=final_residual,
                converged=final_residual <= opts.residual_tolerance,
                column_iterations=[result.iterations],
                oracle_columns=[column],
            )

    if certificate is not None:
        logger.error(f"Column {column}: Picard did not converge although {certificate.value} certifies uniqueness")
    if opts.strict:
        raise NonConvergence(
            f"Picard stopped after {result.iterations} updates with residual {result.final_residual:.3e}",
            last_iterate=result.solution,
            residual=result.final_residual,
            iterations=result.iterations,
            column=column,
        )
    return result


def solve_gave(A: np.ndarray, B: np.ndarray, f: np.ndarray, opts: Optional[SolveOptions] = None) -> SolveResult:
    """
    Solve Ax + B|x| = f by Picard, falling back to the oracle on small orders.

    Raises:
        SingularMatrix: A is not invertible
        NonConvergence: Only with ``opts.strict``
    """
    opts = opts or SolveOptions.from_settings()
    invert(A, name="A")
    certificate = uniqueness_certificate(A, B)
    result = _solve_column(A, B, np.asarray(f, dtype=np.float64).reshape(-1), opts, certificate, 0)
    logger.info(f"GAVE order {A.shape[0]} solved: residual {result.final_residual:.3e}, converged {result.converged}")
    return result.model_copy(update={"certificate_used": certificate})


def solve_gavme(A: np.ndarray, B: np.ndarray, F: np.ndarray, opts: Optional[SolveOptions] = None) -> SolveResult:
    """
    Solve AX + B|X| = F one column at a time.

    Raises:
        SingularMatrix: A is not invertible
        NonConvergence: Only with ``opts.strict``; carries the failing column
    """
    opts = opts or SolveOptions.from_settings()
    F = np.asarray(F, dtype=np.float64)
    if F.ndim != 2 or F.shape[0] != A.shape[0]:
        raise DimensionMismatch(f"F must have {A.shape[0]} rows, got shape {F.shape}")
    invert(A, name="A")
    certificate = uniqueness_certificate(A, B)

    split = gavme_columns(GavmeInstance(A=A, B=B, F=F))
    columns = [_solve_column(A, B, column.f, opts, certificate, j) for j, column in enumerate(split)]
    X = np.column_stack([c.solution for c in columns])
    final_residual = norm_inf(A @ X + B @ abs_elementwise(X) - F)
    result = SolveResult(
        solution=X,
        iterations=sum(c.iterations for c in columns),
        final_residual=final_residual,
        converged=all(c.converged for c in columns) and final_residual <= opts.residual_tolerance,
        certificate_used=certificate,
        column_iterations=[c.iterations for c in columns],
        oracle_columns=[j for c in columns for j in c.oracle_columns],
    )
    logger.info(
        f"GAVME {A.shape[0]}x{F.shape[1]} solved: residual {final_residual:.3e}, "
        f"converged {result.converged}, certificate {certificate.value if certificate else 'none'}"
    )
    return result


def solve_ngavme(
    A: np.ndarray, B: np.ndarray, C: np.ndarray, F: np.ndarray, opts: Optional[SolveOptions] = None
) -> SolveResult:
    """
    Solve AX + B|CX| = F through the GAVME AC^-1 Y + B|Y| = F and X = C^-1 Y.

    Raises:
        SingularMatrix: C or A is not invertible (named in the error)
    """
    reduced, back_map = reduce_ngavme(NgavmeInstance(A=A, B=B, C=C, F=F))
    invert(A, name="A")
    inner = solve_gavme(reduced.A, reduced.B, reduced.F, opts)
    X = back_map(inner.solution)
    final_residual = norm_inf(A @ X + B @ abs_elementwise(C @ X) - np.asarray(F, dtype=np.float64))
    tolerance = (opts or SolveOptions.from_settings()).residual_tolerance
    certificate = NGAVME_EQUIVALENT.get(inner.certificate_used) if inner.certificate_used else None
    return inner.model_copy(update={
        "solution": X,
        "final_residual": final_residual,
        "converged": inner.converged and final_residual <= tolerance,
        "certificate_used": certificate,
    })


def oracle_gavme(A: np.ndarray, B: np.ndarray, F: np.ndarray, *, cap: Optional[int] = None) -> List[OracleReport]:
    """One :class:`OracleReport` per column of F."""
    F = np.asarray(F, dtype=np.float64)
    if F.ndim == 1:
        F = F.reshape(-1, 1)
    return [oracle_gave(A, B, column.f, cap=cap) for column in gavme_columns(GavmeInstance(A=A, B=B, F=F))]


def gavme_solution_count(reports: List[OracleReport]) -> Union[int, str]:
    """Solution count of a GAVME from its column reports: 0 dominates, then INFINITE, else the product."""
    counts = [r.solution_count for r in reports]
    if any(c == 0 for c in counts):
        return 0
    if any(c == INFINITE for c in counts):
        return INFINITE
    return int(np.prod(counts)) if counts else 1


def oracle_instance(inst: Instance, *, cap: Optional[int] = None) -> List[OracleReport]:
    """
    Oracle reports of any instance with a right-hand side. NGAVME solutions are
    mapped back through C^-1; only the scalar Sylvester-like AVE is supported.

    Raises:
        MissingRightHandSide: No F / f
        SingularMatrix: C of an NGAVME is not invertible
        DimensionMismatch: Non-scalar Sylvester-like AVE
    """
    if inst.rhs is None:
        raise MissingRightHandSide(f"{inst.type} instance has no right-hand side")
    if isinstance(inst, GaveInstance):
        return [oracle_gave(inst.A, inst.B, inst.f, cap=cap)]
    if isinstance(inst, GavmeInstance):
        return oracle_gavme(inst.A, inst.B, inst.F, cap=cap)
    if isinstance(inst, NgavmeInstance):
        reduced, back_map = reduce_ngavme(inst)
        return [
            report.model_copy(update={"solutions": [back_map(np.asarray(y)).tolist() for y in report.solutions]})
            for report in oracle_gavme(reduced.A, reduced.B, reduced.F, cap=cap)
        ]
    if isinstance(inst, SylvesterAveInstance):
        gave = scalar_sylvester_as_gave(inst)
        return [oracle_gave(gave.A, gave.B, gave.f, cap=cap)]
    raise DimensionMismatch(f"unsupported instance type {type(inst).__name__}")


def solve_instance(inst: Instance, opts: Optional[SolveOptions] = None) -> SolveResult:
    """
    Dispatch to the solver of the instance's class.

    Raises:
        MissingRightHandSide: No F / f
        DimensionMismatch: Non-scalar Sylvester-like AVE
    """
    if inst.rhs is None:
        raise MissingRightHandSide(f"{inst.type} instance has no right-hand side")
    if isinstance(inst, GaveInstance):
        return solve_gave(inst.A, inst.B, inst.f, opts)
    if isinstance(inst, GavmeInstance):
        return solve_gavme(inst.A, inst.B, inst.F, opts)
    if isinstance(inst, NgavmeInstance):
        return solve_ngavme(inst.A, inst.B, inst.C, inst.F, opts)
    gave = scalar_sylvester_as_gave(inst)
    result = solve_gave(gave.A, gave.B, gave.f, opts)
    return result.model_copy(update={"solution": as_matrix(result.solution)})
