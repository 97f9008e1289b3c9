"""
Random instance generation, condition-strength comparison runs and the
regression suite over the embedded reference cases.
"""
import logging
from typing import Dict, List, Optional, Tuple

import numpy as np

from avecert.core.config import settings
from avecert.core.errors import GenerationFailure, SingularMatrix
from avecert.models.instances import (
    GaveInstance,
    GavmeInstance,
    GeneratedInstance,
    Instance,
    NgavmeInstance,
    SylvesterAveInstance,
)
from avecert.models.schemas import (
    INFINITE,
    ComparisonTable,
    ConditionCounter,
    ConditionId,
    EquationClass,
    ExampleReport,
    GenSpec,
    GoldenCheck,
    Verdict,
)
from avecert.services.certify import any_certified, certify_instance
from avecert.services.matcore import abs_elementwise, invert, invert_with_rcond, norm_inf, spectral_radius
from avecert.services.reference_cases import REFERENCE_CASES, SYLVESTER_SCALAR_NEGATIVE, ReferenceCase
from avecert.services.solve import oracle_gave, oracle_instance, solve_instance

logger = logging.getLogger(__name__)

IMPLICATIONS: List[Tuple[ConditionId, ConditionId]] = [
    (ConditionId.CLASSIC_III, ConditionId.GAVME_SPECTRAL),
    (ConditionId.CLASSIC_IV, ConditionId.INTERVAL_SPECTRAL),
    (ConditionId.NGAVME_III, ConditionId.NGAVME_RHO),
    (ConditionId.NGAVME_SIGMA, ConditionId.NGAVME_INTERVAL_SPECTRAL),
]

# (smaller witness, larger witness) pairs that must stay ordered
DOMINANCES: List[Tuple[str, str]] = [
    ("rho_abs_AinvB", "rho_absAinv_absB"),
    ("rho_abs_CAinvB", "rho_absCAinv_absB"),
]
DOMINANCE_SLACK = 1e-9

SOUNDNESS_MAX_ORDER = 3


def _draw(rng: np.random.Generator, distribution: str, shape) -> np.ndarray:
    if distribution == "integer":
        return rng.integers(-5, 6, size=shape).astype(np.float64)
    return rng.uniform(-1.0, 1.0, size=shape)


def _well_conditioned(M: np.ndarray) -> Optional[np.ndarray]:
    try:
        inversion = invert_with_rcond(M)
    except SingularMatrix:
        return None
    if inversion.rcond < settings.GENERATION_MIN_RCOND:
        return None
    return inversion.inverse


def gen_instance(gen_spec: GenSpec, trial: Optional[int] = None) -> GeneratedInstance:
    """
    Draw a random instance together with the ground truth its right-hand side
    is built from.

    A (and C, K where present) are resampled until invertible with a condition
    estimate above ``GENERATION_MIN_RCOND``. With ``target_rho`` set, B is
    rescaled so rho(|A^-1 B|) (rho(|CA^-1 B|) for an NGAVME) hits the target;
    ``target_rho = 0`` gives B = 0. Each trial draws from its own stream
    seeded by (seed, trial).

    Raises:
        GenerationFailure: No acceptable draw within ``GENERATION_ATTEMPTS``
    """
    rng = np.random.default_rng(gen_spec.seed if trial is None else [gen_spec.seed, trial])
    n, m, dist = gen_spec.n, gen_spec.m, gen_spec.entry_distribution
    cls = gen_spec.equation_class
    reason = "no draw attempted"

    for attempt in range(1, settings.GENERATION_ATTEMPTS + 1):
        A = _draw(rng, dist, (n, n))
        B = _draw(rng, dist, (n, n))
        C = _draw(rng, dist, (n, n)) if cls == EquationClass.NGAVME else None
        K = _draw(rng, dist, (n, n)) if cls == EquationClass.SYLVESTER else None
        L = _draw(rng, dist, (n, n)) if cls == EquationClass.SYLVESTER else None

        a_inverse = _well_conditioned(A)
        if a_inverse is None:
            reason = "A ill-conditioned"
            continue
        if C is not None and _well_conditioned(C) is None:
            reason = "C ill-conditioned"
            continue
        if K is not None and _well_conditioned(K) is None:
            reason = "K ill-conditioned"
            continue

        lead = C @ a_inverse if C is not None else a_inverse
        rho = spectral_radius(abs_elementwise(lead @ B))
        if gen_spec.target_rho is not None:
            if gen_spec.target_rho == 0:
                B = np.zeros_like(B)
            elif rho == 0:
                reason = "B drew zero"
                continue
            else:
                B = B * (gen_spec.target_rho / rho)
            rho = spectral_radius(abs_elementwise(lead @ B))
            if abs(rho - gen_spec.target_rho) > 1e-6 * max(1.0, gen_spec.target_rho):
                reason = f"rescaled rho {rho:.9g} missed target {gen_spec.target_rho}"
                continue
        break
    else:
        raise GenerationFailure(settings.GENERATION_ATTEMPTS, reason)

    if cls == EquationClass.GAVE:
        x0 = _draw(rng, dist, (n,))
        instance: Instance = GaveInstance(A=A, B=B, f=A @ x0 + B @ abs_elementwise(x0))
    elif cls == EquationClass.GAVME:
        x0 = _draw(rng, dist, (n, m))
        instance = GavmeInstance(A=A, B=B, F=A @ x0 + B @ abs_elementwise(x0))
    elif cls == EquationClass.NGAVME:
        x0 = _draw(rng, dist, (n, m))
        instance = NgavmeInstance(A=A, B=B, C=C, F=A @ x0 + B @ abs_elementwise(C @ x0))
    else:
        x0 = _draw(rng, dist, (n, n))
        instance = SylvesterAveInstance(A=A, B=B, K=K, L=L, F=A @ x0 @ K + B @ abs_elementwise(x0) @ L)

    logger.debug(f"Generated {cls.value} n={n} after {attempt} attempts, rho={rho:.6g}")
    return GeneratedInstance(instance=instance, ground_truth=x0, realized_rho=rho)


def _oracle_pair(inst: Instance) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """The GAVE pair whose unique solvability the sound certificates of ``inst`` assert."""
    if inst.order > SOUNDNESS_MAX_ORDER:
        return None
    if isinstance(inst, (GaveInstance, GavmeInstance)):
        return inst.A, inst.B
    if isinstance(inst, NgavmeInstance):
        try:
            return inst.A @ invert(inst.C, name="C"), inst.B
        except SingularMatrix:
            return None
    if isinstance(inst, SylvesterAveInstance) and inst.order == 1:
        return inst.A * inst.K, inst.B * inst.L
    return None


def _count(table_counters: Dict[str, ConditionCounter], condition_id: ConditionId, verdict: Verdict) -> None:
    counter = table_counters.setdefault(condition_id.value, ConditionCounter())
    if verdict == Verdict.CERTIFIED:
        counter.certified += 1
    elif verdict == Verdict.NOT_CERTIFIED:
        counter.not_certified += 1
    elif verdict == Verdict.INAPPLICABLE:
        counter.inapplicable += 1
    else:
        counter.unsound_holds += 1


def compare_conditions(
    gen_spec: GenSpec,
    trials: int,
    oracle_rhs: int = 0,
    *,
    enum_cap: Optional[int] = None,
    first_trial: int = 0,
) -> ComparisonTable:
    """
    Run every applicable certifier on ``trials`` generated instances.

    Counts verdicts per condition, checks the proven implications and witness
    dominances, and with ``oracle_rhs > 0`` cross-checks every sound
    certificate against the oracle on that many random right-hand sides per
    trial (orders up to 3). ``first_trial`` offsets the per-trial streams so
    that partial runs merge into the table of a single run.
    """
    counters: Dict[str, ConditionCounter] = {}
    violations: Dict[str, int] = {f"{a.value}=>{b.value}": 0 for a, b in IMPLICATIONS}
    violations.update({f"{low}<={high}": 0 for low, high in DOMINANCES})
    soundness = 0

    for trial in range(first_trial, first_trial + trials):
        generated = gen_instance(gen_spec, trial)
        certs = certify_instance(generated.instance, enum_cap=enum_cap)
        verdicts = {c.condition_id: c.verdict for c in certs}
        witnesses: Dict[str, float] = {}
        for cert in certs:
            _count(counters, cert.condition_id, cert.verdict)
            for name, value in cert.witnesses.items():
                witnesses.setdefault(name, value)

        for premise, conclusion in IMPLICATIONS:
            if verdicts.get(premise) == Verdict.CERTIFIED and verdicts.get(conclusion) == Verdict.NOT_CERTIFIED:
                violations[f"{premise.value}=>{conclusion.value}"] += 1
                logger.error(f"Trial {trial}: {premise.value} certified but {conclusion.value} not")
        for low, high in DOMINANCES:
            if low in witnesses and high in witnesses and witnesses[low] > witnesses[high] + DOMINANCE_SLACK:
                violations[f"{low}<={high}"] += 1
                logger.error(f"Trial {trial}: {low} = {witnesses[low]:.12g} exceeds {high} = {witnesses[high]:.12g}")

        pair = _oracle_pair(generated.instance) if oracle_rhs and any_certified(certs) else None
        if pair is not None:
            rng = np.random.default_rng([gen_spec.seed, trial, 1])
            for _ in range(oracle_rhs):
                f = _draw(rng, gen_spec.entry_distribution, (pair[0].shape[0],))
                count = oracle_gave(pair[0], pair[1], f).solution_count
                if count != 1:
                    soundness += 1
                    certified = [c.condition_id.value for c in certs if c.verdict == Verdict.CERTIFIED]
                    logger.error(f"Trial {trial}: certified by {certified} yet the oracle counts {count} solutions")

    table = ComparisonTable(
        sample_size=trials,
        seed=gen_spec.seed,
        counters=counters,
        implication_violations=violations,
        soundness_violations=soundness,
    )
    logger.info(f"Compared conditions on {trials} trials: clean={table.clean}")
    return table


def _resolution(decimals: Optional[int]) -> float:
    return 0.0 if decimals is None else 0.5 * 10.0 ** -decimals


def _check(name: str, expected: float, computed: Optional[float], tolerance: float, resolution: float = 0.0) -> GoldenCheck:
    passed = computed is not None and abs(computed - expected) <= tolerance
    note = ""
    if computed is None:
        note = "value not computed"
    elif not passed and tolerance < resolution:
        note = "tolerance below printed precision"
    return GoldenCheck(
        name=name,
        expected=expected,
        computed=computed,
        tolerance=tolerance,
        resolution=resolution,
        passed=passed,
        note=note,
    )


def _case_checks(case: ReferenceCase, tolerance: Optional[float]) -> List[GoldenCheck]:
    certs = certify_instance(case.instance)
    by_id = {c.condition_id: c for c in certs}
    checks = []

    for golden in case.golden:
        pool = [by_id[golden.condition]] if golden.condition in by_id else certs
        computed = next((c.witnesses[golden.name] for c in pool if golden.name in c.witnesses), None)
        checks.append(_check(
            f"{case.name}: {golden.name}",
            golden.expected,
            computed,
            golden.tolerance if tolerance is None else tolerance,
            _resolution(golden.decimals),
        ))

    for condition_id, verdict in (case.verdicts or {}).items():
        cert = by_id.get(condition_id)
        check = _check(f"{case.name}: {condition_id.value} is {verdict.value}", 1.0,
                       None if cert is None else float(cert.verdict == verdict), 0.0)
        if cert is not None and not check.passed:
            check = check.model_copy(update={"note": f"got {cert.verdict.value}"})
        checks.append(check)

    if case.solution is not None:
        result = solve_instance(case.instance)
        error = norm_inf(np.asarray(result.solution) - case.solution)
        checks.append(_check(f"{case.name}: solution error", 0.0, error, 1e-8 if tolerance is None else tolerance))
        checks.append(_check(f"{case.name}: residual", 0.0, result.final_residual,
                             1e-8 if tolerance is None else tolerance))

    if case.oracle_counts is not None:
        reports = oracle_instance(case.instance)
        for j, (report, expected) in enumerate(zip(reports, case.oracle_counts)):
            count = None if report.solution_count == INFINITE else float(report.solution_count)
            checks.append(_check(f"{case.name}: oracle count, column {j}", float(expected), count, 0.0))
    return checks


def _counterexample_checks(tolerance: Optional[float]) -> List[GoldenCheck]:
    tol = 1e-12 if tolerance is None else tolerance
    positive = oracle_instance(REFERENCE_CASES["sylvester-scalar"].instance)[0]
    negative = oracle_instance(SYLVESTER_SCALAR_NEGATIVE)[0]
    solutions = sorted(s[0] for s in positive.solutions)
    checks = [_check("sylvester-scalar: oracle count for f = -1", 0.0, float(negative.solution_count), 0.0)]
    if len(solutions) == 2:
        checks.append(_check("sylvester-scalar: solution -1", -1.0, solutions[0], tol))
        checks.append(_check("sylvester-scalar: solution 1/3", 1.0 / 3.0, solutions[1], tol))
    return checks


def run_reference_examples(tolerance: Optional[float] = None) -> ExampleReport:
    """
    Recompute every published value, verdict, solution and solution count of
    the embedded cases. ``tolerance`` replaces every per-value tolerance.
    """
    checks: List[GoldenCheck] = []
    for case in REFERENCE_CASES.values():
        checks.extend(_case_checks(case, tolerance))
    checks.extend(_counterexample_checks(tolerance))
    report = ExampleReport(checks=checks)
    failed = [c.name for c in checks if not c.passed]
    if failed:
        logger.warning(f"{len(failed)} reference checks failed: {failed}")
    else:
        logger.info(f"All {len(checks)} reference checks passed")
    return report
