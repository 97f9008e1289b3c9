"""
Combinatorial unique-solvability machinery.

Column representatives of a matrix pair, the column W-property, the P-matrix
test and column diagonal dominance, plus the Kronecker-lifted GAVME / NGAVME
checks built on them. Every scan walks its search space in lexicographic
order and stops at the first violation, so reports are deterministic.
"""
import itertools
import logging
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import csgraph

from avecert.core.config import settings
from avecert.core.errors import DimensionMismatch, DimensionOverflow, SingularMatrix
from avecert.models.schemas import Certificate, CombinatorialReport, ConditionId, Verdict
from avecert.services.matcore import abs_elementwise, invert, lift_identity, signed_determinant

logger = logging.getLogger(__name__)

Selector = Tuple[bool, ...]

GAVME_W_IDS = (ConditionId.W_I, ConditionId.W_II, ConditionId.W_III, ConditionId.W_IV)
GAVME_DD_IDS = (ConditionId.DD_I, ConditionId.DD_II)
NGAVME_W_IDS = (ConditionId.NGAVME_W_I, ConditionId.NGAVME_W_II, ConditionId.NGAVME_W_III, ConditionId.NGAVME_W_IV)
NGAVME_DD_IDS = (ConditionId.NGAVME_DD_I, ConditionId.NGAVME_DD_II)

PROBE_NOTE = "probe only; full quantification is equivalent to the column W-property of {Q+P, -Q+P}"


def _guard_enumeration(order: int, cap: Optional[int], what: str) -> None:
    cap = settings.ENUM_CAP if cap is None else cap
    if order >= 63 or 2 ** order > cap:
        raise DimensionOverflow(what, 2 ** min(order, 63), cap)


def _require_pair(M1: np.ndarray, M2: np.ndarray) -> int:
    if M1.ndim != 2 or M1.shape[0] != M1.shape[1] or M1.shape != M2.shape:
        raise DimensionMismatch(f"representatives need two square matrices of equal order, got {M1.shape} and {M2.shape}")
    return M1.shape[0]


def column_representatives(
    M1: np.ndarray, M2: np.ndarray, *, cap: Optional[int] = None
) -> Iterator[Tuple[Selector, np.ndarray]]:
    """
    Yield all 2^n column representatives of {M1, M2}.

    Selector bit j is False when column j comes from M1 and True when it comes
    from M2; selectors run in lexicographic order (all False first).

    Raises:
        DimensionOverflow: 2^n exceeds the enumeration cap
    """
    n = _require_pair(M1, M2)
    _guard_enumeration(n, cap, "column representatives 2^n")
    for selector in itertools.product((False, True), repeat=n):
        yield selector, np.where(np.asarray(selector)[None, :], M2, M1)


def row_representatives(
    M1: np.ndarray, M2: np.ndarray, *, cap: Optional[int] = None
) -> Iterator[Tuple[Selector, np.ndarray]]:
    """Row variant of :func:`column_representatives`; bit i picks row i."""
    for selector, R in column_representatives(M1.T, M2.T, cap=cap):
        yield selector, R.T


def _w_property(
    property_id: str,
    representatives: Iterator[Tuple[Selector, np.ndarray]],
    rtol: Optional[float],
) -> CombinatorialReport:
    smallest = None
    scanned = 0
    for selector, R in representatives:
        scanned += 1
        det, indeterminate = signed_determinant(R, rtol=rtol)
        if indeterminate or det <= 0:
            notes = "near-singular representative, determinant sign indeterminate" if indeterminate else ""
            logger.debug(f"{property_id} fails at selector {selector}: det = {det:.6g}")
            return CombinatorialReport(
                property_id=property_id,
                holds=False,
                counterexample_selector=list(selector),
                determinant_or_minor=det,
                scanned=scanned,
                notes=notes,
            )
        smallest = det if smallest is None else min(smallest, det)
    return CombinatorialReport(property_id=property_id, holds=True, determinant_or_minor=smallest, scanned=scanned)


def has_column_w_property(
    M1: np.ndarray, M2: np.ndarray, *, cap: Optional[int] = None, rtol: Optional[float] = None
) -> CombinatorialReport:
    """
    Whether every column representative of {M1, M2} has a positive determinant.

    Determinants whose sign is within the indeterminate band count as failures.

    Raises:
        DimensionOverflow: 2^n exceeds the enumeration cap
    """
    return _w_property("column_w", column_representatives(M1, M2, cap=cap), rtol)


def has_row_w_property(
    M1: np.ndarray, M2: np.ndarray, *, cap: Optional[int] = None, rtol: Optional[float] = None
) -> CombinatorialReport:
    """Row W-property; see :func:`has_column_w_property`."""
    return _w_property("row_w", row_representatives(M1, M2, cap=cap), rtol)


def is_p_matrix(M: np.ndarray, *, cap: Optional[int] = None, rtol: Optional[float] = None) -> CombinatorialReport:
    """
    Whether every principal minor of M is positive.

    Index sets are scanned by size, then lexicographically; the first
    non-positive (or sign-indeterminate) minor is reported with 0-based indices.

    Raises:
        DimensionOverflow: 2^n - 1 exceeds the enumeration cap
    """
    n = _require_pair(M, M)
    _guard_enumeration(n, None if cap is None else cap + 1, "principal minors 2^n - 1")
    smallest = None
    scanned = 0
    for size in range(1, n + 1):
        for indices in itertools.combinations(range(n), size):
            scanned += 1
            minor, indeterminate = signed_determinant(M[np.ix_(indices, indices)], rtol=rtol)
            if indeterminate or minor <= 0:
                return CombinatorialReport(
                    property_id="p_matrix",
                    holds=False,
                    counterexample_indices=list(indices),
                    determinant_or_minor=minor,
                    scanned=scanned,
                    notes="near-singular principal minor" if indeterminate else "",
                )
            smallest = minor if smallest is None else min(smallest, minor)
    return CombinatorialReport(property_id="p_matrix", holds=True, determinant_or_minor=smallest, scanned=scanned)


def _column_gaps(M: np.ndarray) -> np.ndarray:
    """|m_jj| - sum_{i != j} |m_ij| per column."""
    absolute = abs_elementwise(M)
    diagonal = np.diag(absolute)
    return diagonal - (absolute.sum(axis=0) - diagonal)


def is_sdd_columns(M: np.ndarray) -> CombinatorialReport:
    """Strict diagonal dominance by columns: |m_jj| > sum_{i != j} |m_ij| for every j."""
    n = _require_pair(M, M)
    gaps = _column_gaps(M)
    failing = np.flatnonzero(gaps <= 0)
    if failing.size:
        j = int(failing[0])
        return CombinatorialReport(
            property_id="sdd_columns",
            holds=False,
            counterexample_indices=[j],
            determinant_or_minor=float(gaps[j]),
            scanned=j + 1,
        )
    return CombinatorialReport(property_id="sdd_columns", holds=True, determinant_or_minor=float(gaps.min()), scanned=n)


def is_irreducible(M: np.ndarray) -> Tuple[bool, List[int]]:
    """
    Strong connectivity of the graph with an edge i -> j for every nonzero
    off-diagonal m_ij. Returns the verdict and the component holding index 0.
    """
    n = M.shape[0]
    if n == 1:
        return True, [0]
    adjacency = (M != 0).astype(np.int8)
    np.fill_diagonal(adjacency, 0)
    count, labels = csgraph.connected_components(adjacency, directed=True, connection="strong")
    return count == 1, [int(i) for i in np.flatnonzero(labels == labels[0])]


def is_irreducibly_dd_columns(M: np.ndarray) -> CombinatorialReport:
    """
    Irreducible diagonal dominance by columns: M irreducible, |m_jj| >= the
    off-diagonal column sum everywhere and strictly in at least one column.
    """
    n = _require_pair(M, M)
    irreducible, component = is_irreducible(M)
    if not irreducible:
        return CombinatorialReport(
            property_id="irreducibly_dd_columns",
            holds=False,
            counterexample_indices=component,
            scanned=n,
            notes="reducible: indices form a closed class",
        )
    gaps = _column_gaps(M)
    weak_failures = np.flatnonzero(gaps < 0)
    if weak_failures.size:
        j = int(weak_failures[0])
        return CombinatorialReport(
            property_id="irreducibly_dd_columns",
            holds=False,
            counterexample_indices=[j],
            determinant_or_minor=float(gaps[j]),
            scanned=n,
            notes="column not diagonally dominant",
        )
    if not np.any(gaps > 0):
        return CombinatorialReport(
            property_id="irreducibly_dd_columns",
            holds=False,
            counterexample_indices=list(range(n)),
            determinant_or_minor=float(gaps.max()),
            scanned=n,
            notes="no strictly dominant column",
        )
    return CombinatorialReport(
        property_id="irreducibly_dd_columns", holds=True, determinant_or_minor=float(gaps.max()), scanned=n
    )


def _describe_failure(report: CombinatorialReport) -> str:
    if report.holds:
        return report.notes
    if report.counterexample_selector is not None:
        picks = "".join("2" if bit else "1" for bit in report.counterexample_selector)
        where = f"representative with columns from M{{{picks}}}"
    else:
        where = f"indices {report.counterexample_indices}"
    value = "" if report.determinant_or_minor is None else f" (value {report.determinant_or_minor:.6g})"
    detail = f"{report.property_id} fails at {where}{value}"
    return f"{detail}; {report.notes}" if report.notes else detail


def _from_report(condition_id: ConditionId, report: CombinatorialReport, notes: str = "") -> Certificate:
    witnesses = {"scanned": float(report.scanned)}
    if report.determinant_or_minor is not None:
        witnesses["determinant_or_minor"] = report.determinant_or_minor
    text = "; ".join(part for part in (_describe_failure(report), notes) if part)
    return Certificate(
        condition_id=condition_id,
        verdict=Verdict.CERTIFIED if report.holds else Verdict.NOT_CERTIFIED,
        witnesses=witnesses,
        margin=report.determinant_or_minor,
        notes=text,
    )


def _probe_invertibility(
    condition_id: ConditionId,
    plus: np.ndarray,
    minus: np.ndarray,
    w_certified: bool,
    samples: Optional[int],
    seed: Optional[int],
) -> Certificate:
    """
    Randomized probe of (Q+P) F1 + (-Q+P) F2 over F1 = diag(t), F2 = diag(1 - t).

    The first two samples are (I, 0) and (0, I); every fourth sample snaps t to
    {0, 1}, so vertices of the box are visited as well as interior points.
    """
    samples = settings.PROBE_SAMPLES if samples is None else samples
    seed = settings.PROBE_SEED if seed is None else seed
    rng = np.random.default_rng(seed)
    N = plus.shape[0]
    smallest = None
    for s in range(samples):
        if s == 0:
            t = np.ones(N)
        elif s == 1:
            t = np.zeros(N)
        else:
            t = rng.uniform(0.0, 1.0, N)
            if s % 4 == 0:
                t = np.round(t)
        det, indeterminate = signed_determinant(plus * t[None, :] + minus * (1.0 - t)[None, :])
        if indeterminate:
            logger.debug(f"{condition_id.value} probe {s} found a singular combination")
            return Certificate(
                condition_id=condition_id,
                verdict=Verdict.NOT_CERTIFIED,
                witnesses={"failing_sample": float(s), "determinant": det},
                margin=det,
                notes=f"singular pair F1 = diag(t), F2 = diag(1 - t) with t = {np.round(t, 6).tolist()}",
            )
        smallest = abs(det) if smallest is None else min(smallest, abs(det))
    witnesses = {"samples": float(samples), "min_abs_determinant": smallest if smallest is not None else 0.0}
    if w_certified:
        return Certificate(condition_id=condition_id, verdict=Verdict.CERTIFIED, witnesses=witnesses,
                           margin=smallest, notes=PROBE_NOTE)
    return Certificate(
        condition_id=condition_id,
        verdict=Verdict.NOT_CERTIFIED,
        witnesses=witnesses,
        margin=smallest,
        notes=f"{PROBE_NOTE}; the probe found no singular pair but the W-property scan failed",
    )


def _w_conditions(
    P: np.ndarray,
    Q: np.ndarray,
    ids: Sequence[ConditionId],
    *,
    enum_cap: Optional[int],
    samples: Optional[int],
    seed: Optional[int],
) -> List[Certificate]:
    _guard_enumeration(P.shape[0], enum_cap, "W-property scan 2^(n*m)")
    plus, minus = Q + P, -Q + P

    first = _from_report(ids[0], has_column_w_property(plus, minus, cap=enum_cap))
    certs = [first]
    try:
        M = invert(plus, name="Q+P") @ minus
    except SingularMatrix as e:
        reason = f"Q+P is singular: {e}"
        certs.append(Certificate(condition_id=ids[1], verdict=Verdict.INAPPLICABLE, notes=reason))
        certs.append(Certificate(condition_id=ids[2], verdict=Verdict.INAPPLICABLE, notes=reason))
    else:
        certs.append(_from_report(ids[1], has_column_w_property(np.eye(M.shape[0]), M, cap=enum_cap)))
        certs.append(_from_report(ids[2], is_p_matrix(M, cap=enum_cap)))
    certs.append(_probe_invertibility(ids[3], plus, minus, first.certified, samples, seed))

    if first.certified and certs[2].verdict == Verdict.NOT_CERTIFIED:
        logger.warning(f"{ids[0].value} holds while {ids[2].value} fails on the same pair")
    return certs


def _dd_conditions(
    P: np.ndarray,
    Q: np.ndarray,
    ids: Sequence[ConditionId],
    m: int,
    *,
    enum_cap: Optional[int],
) -> List[Certificate]:
    plus, minus = P + Q, P - Q
    d_plus, d_minus = np.diag(plus), np.diag(minus)
    for i, (a, b) in enumerate(zip(d_plus, d_minus)):
        if a == 0 or b == 0:
            which = "P+Q" if a == 0 else "P-Q"
            reason = f"diagonal entry {i + 1} of {which} is zero"
        elif np.sign(a) != np.sign(b):
            reason = f"diagonal entry {i + 1} differs in sign: P+Q has {a:.6g}, P-Q has {b:.6g}"
        else:
            continue
        return [Certificate(condition_id=cid, verdict=Verdict.INAPPLICABLE, notes=reason) for cid in ids]

    sdd_plus, sdd_minus = is_sdd_columns(plus), is_sdd_columns(minus)
    if not sdd_plus.holds:
        first = _from_report(ids[0], sdd_plus, "failing matrix: P+Q")
    elif not sdd_minus.holds:
        first = _from_report(ids[0], sdd_minus, "failing matrix: P-Q")
    else:
        smallest = min(sdd_plus.determinant_or_minor, sdd_minus.determinant_or_minor)
        first = Certificate(
            condition_id=ids[0],
            verdict=Verdict.CERTIFIED,
            witnesses={"scanned": float(sdd_plus.scanned + sdd_minus.scanned), "determinant_or_minor": smallest},
            margin=smallest,
        )

    failure = None
    scanned = 0
    for selector, R in column_representatives(plus, minus, cap=enum_cap):
        scanned += 1
        report = is_irreducibly_dd_columns(R)
        if not report.holds:
            failure = (selector, report)
            break
    lift_note = "the lift I_m ⊗ M is reducible for m > 1" if m > 1 else ""
    if failure is None:
        second = Certificate(condition_id=ids[1], verdict=Verdict.CERTIFIED, witnesses={"scanned": float(scanned)})
    else:
        selector, report = failure
        picks = "".join("2" if bit else "1" for bit in selector)
        notes = f"representative with columns from M{{{picks}}}: {_describe_failure(report)}"
        second = Certificate(
            condition_id=ids[1],
            verdict=Verdict.NOT_CERTIFIED,
            witnesses={"scanned": float(scanned)},
            margin=report.determinant_or_minor,
            notes=f"{notes}; {lift_note}" if lift_note else notes,
        )
    return [first, second]


def _lift_pair(first: np.ndarray, second: np.ndarray, m: int, kron_cap: Optional[int]) -> Tuple[np.ndarray, np.ndarray]:
    return lift_identity(first, m, cap=kron_cap), lift_identity(second, m, cap=kron_cap)


def check_gavme_w_conditions(
    A: np.ndarray,
    B: np.ndarray,
    m: int = 1,
    *,
    enum_cap: Optional[int] = None,
    kron_cap: Optional[int] = None,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
) -> List[Certificate]:
    """
    W_I .. W_IV on P = I_m ⊗ A, Q = I_m ⊗ B.

    W_I: column W-property of {Q+P, -Q+P}. W_II: column W-property of
    {I, (Q+P)^-1 (-Q+P)}. W_III: that matrix is a P-matrix. W_IV: seeded probe
    of the invertibility of (Q+P) F1 + (-Q+P) F2.

    Raises:
        DimensionOverflow: 2^(n*m) or n*m exceeds its cap
    """
    P, Q = _lift_pair(A, B, m, kron_cap)
    return _w_conditions(P, Q, GAVME_W_IDS, enum_cap=enum_cap, samples=samples, seed=seed)


def check_gavme_dd_conditions(
    A: np.ndarray,
    B: np.ndarray,
    m: int = 1,
    *,
    enum_cap: Optional[int] = None,
    kron_cap: Optional[int] = None,
) -> List[Certificate]:
    """
    DD_I and DD_II on P = I_m ⊗ A, Q = I_m ⊗ B.

    Both need every diagonal entry of P+Q to share the (nonzero) sign of the
    matching entry of P-Q; otherwise both are INAPPLICABLE. DD_I: P+Q and P-Q
    strictly dominant by columns. DD_II: every column representative of
    {P+Q, P-Q} irreducibly dominant by columns.

    Raises:
        DimensionOverflow: 2^(n*m) or n*m exceeds its cap
    """
    P, Q = _lift_pair(A, B, m, kron_cap)
    return _dd_conditions(P, Q, GAVME_DD_IDS, m, enum_cap=enum_cap)


def check_ngavme_combinatorial(
    A: np.ndarray,
    B: np.ndarray,
    C: np.ndarray,
    m: int = 1,
    *,
    enum_cap: Optional[int] = None,
    kron_cap: Optional[int] = None,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
) -> List[Certificate]:
    """
    NGAVME_W_I .. NGAVME_W_IV and NGAVME_DD_I, NGAVME_DD_II on R = I_m ⊗ AC^-1,
    S = I_m ⊗ B. With C = I the verdicts equal the GAVME checks.

    Raises:
        SingularMatrix: C is not invertible
        DimensionOverflow: 2^(n*m) or n*m exceeds its cap
    """
    R, S = _lift_pair(A @ invert(C, name="C"), B, m, kron_cap)
    certs = _w_conditions(R, S, NGAVME_W_IDS, enum_cap=enum_cap, samples=samples, seed=seed)
    certs += _dd_conditions(R, S, NGAVME_DD_IDS, m, enum_cap=enum_cap)
    return certs
