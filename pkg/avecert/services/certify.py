"""
Analytic unique-solvability certifiers.

Each checker evaluates one family of sufficient conditions from spectral radii
and extreme singular values and returns :class:`Certificate` values. Witnesses
are reported even when a condition fails, so near misses stay visible.
"""
import itertools
import logging
from typing import Dict, List, Optional, Tuple

import numpy as np

from avecert.core.config import settings
from avecert.core.errors import AveError, DimensionOverflow, SingularMatrix
from avecert.models.instances import (
    GaveInstance,
    GavmeInstance,
    Instance,
    NgavmeInstance,
    SylvesterAveInstance,
)
from avecert.models.schemas import UNSOUND_CONDITIONS, Certificate, ConditionId, Verdict
from avecert.services.matcore import abs_elementwise, invert, sigma_max, sigma_min, spectral_radius

logger = logging.getLogger(__name__)

FLAWED_SYLVESTER_NOTE = (
    "condition sigma_min(LK^-1) sigma_min(A^-1 B) > 1 does not imply uniqueness: "
    "A=K=L=1, B=2 satisfies it with value 2, yet x + 2|x| = 1 has two solutions and x + 2|x| = -1 has none"
)


def _band(threshold: float, decision_tol: Optional[float]) -> float:
    decision_tol = settings.DECISION_TOL if decision_tol is None else decision_tol
    return max(decision_tol, settings.BOUNDARY_RTOL * max(1.0, abs(threshold)))


def _below(value: float, threshold: float, decision_tol: Optional[float]) -> Tuple[bool, float]:
    """Strict ``value < threshold`` with the decision band; returns (holds, margin)."""
    margin = threshold - value
    return margin > _band(threshold, decision_tol), margin


def _above(value: float, threshold: float, decision_tol: Optional[float]) -> Tuple[bool, float]:
    """Strict ``value > threshold`` with the decision band; returns (holds, margin)."""
    margin = value - threshold
    return margin > _band(threshold, decision_tol), margin


def _verdict(
    condition_id: ConditionId,
    holds: bool,
    margin: float,
    witnesses: Dict[str, float],
    notes: str = "",
) -> Certificate:
    if not holds and margin > 0:
        notes = (notes + "; " if notes else "") + "inequality holds only within the decision band"
    return Certificate(
        condition_id=condition_id,
        verdict=Verdict.CERTIFIED if holds else Verdict.NOT_CERTIFIED,
        witnesses=witnesses,
        margin=margin,
        notes=notes,
    )


def inapplicable(condition_id: ConditionId, reason: str, witnesses: Optional[Dict[str, float]] = None) -> Certificate:
    """Certificate for a condition whose hypothesis failed."""
    return Certificate(
        condition_id=condition_id,
        verdict=Verdict.INAPPLICABLE,
        witnesses=witnesses or {},
        margin=None,
        notes=reason,
    )


def _try_invert(M: np.ndarray, name: str) -> Optional[np.ndarray]:
    try:
        return invert(M, name=name)
    except SingularMatrix:
        return None


def is_sound(cert: Certificate) -> bool:
    """Whether the condition behind ``cert`` is a proven sufficient condition."""
    return cert.condition_id not in UNSOUND_CONDITIONS


def any_certified(certs: List[Certificate]) -> bool:
    return any(is_sound(c) and c.verdict == Verdict.CERTIFIED for c in certs)


def check_gavme_spectral(A: np.ndarray, B: np.ndarray, *, decision_tol: Optional[float] = None) -> Certificate:
    """
    rho(|A^-1 B|) < 1: unique solvability of the GAVE for every f, hence of the
    GAVME for every F (solved column by column).
    """
    a_inverse = _try_invert(A, "A")
    if a_inverse is None:
        return inapplicable(ConditionId.GAVME_SPECTRAL, "A is singular")
    rho = spectral_radius(abs_elementwise(a_inverse @ B))
    holds, margin = _below(rho, 1.0, decision_tol)
    logger.debug(f"rho(|A^-1 B|) = {rho:.6g}")
    return _verdict(ConditionId.GAVME_SPECTRAL, holds, margin, {"rho_abs_AinvB": rho})


def check_gavme_classic(A: np.ndarray, B: np.ndarray, *, decision_tol: Optional[float] = None) -> List[Certificate]:
    """The four classical GAVME conditions, CLASSIC_I .. CLASSIC_IV."""
    sigma_min_A = sigma_min(A)
    sigma_max_abs_B = sigma_max(abs_elementwise(B))
    sigma_max_B = sigma_max(B)

    holds, margin = _below(sigma_max_abs_B, sigma_min_A, decision_tol)
    certs = [_verdict(ConditionId.CLASSIC_I, holds, margin,
                      {"sigma_max_abs_B": sigma_max_abs_B, "sigma_min_A": sigma_min_A})]
    holds, margin = _below(sigma_max_B, sigma_min_A, decision_tol)
    certs.append(_verdict(ConditionId.CLASSIC_II, holds, margin,
                          {"sigma_max_B": sigma_max_B, "sigma_min_A": sigma_min_A}))

    a_inverse = _try_invert(A, "A")
    if a_inverse is None:
        certs.append(inapplicable(ConditionId.CLASSIC_III, "A is singular"))
        certs.append(inapplicable(ConditionId.CLASSIC_IV, "A is singular"))
        return certs

    rho = spectral_radius(abs_elementwise(a_inverse) @ abs_elementwise(B))
    holds, margin = _below(rho, 1.0, decision_tol)
    certs.append(_verdict(ConditionId.CLASSIC_III, holds, margin, {"rho_absAinv_absB": rho}))

    sigma = sigma_max(a_inverse @ B)
    holds, margin = _below(sigma, 1.0, decision_tol)
    certs.append(_verdict(ConditionId.CLASSIC_IV, holds, margin, {"sigma_max_AinvB": sigma}))
    return certs


def check_ngavme(
    A: np.ndarray, B: np.ndarray, C: np.ndarray, *, decision_tol: Optional[float] = None
) -> List[Certificate]:
    """
    NGAVME conditions obtained through the reduction AC^-1 Y + B|Y| = F, Y = CX.

    NGAVME_I and II need C invertible, III, IV, RHO and SIGMA need A invertible,
    CORO needs B and C invertible.
    """
    a_inverse = _try_invert(A, "A")
    b_inverse = _try_invert(B, "B")
    c_inverse = _try_invert(C, "C")
    certs: List[Certificate] = []

    if c_inverse is None:
        certs.append(inapplicable(ConditionId.NGAVME_I, "C is singular"))
        certs.append(inapplicable(ConditionId.NGAVME_II, "C is singular"))
    else:
        sigma_min_ACinv = sigma_min(A @ c_inverse)
        sigma_max_abs_B = sigma_max(abs_elementwise(B))
        sigma_max_B = sigma_max(B)
        holds, margin = _below(sigma_max_abs_B, sigma_min_ACinv, decision_tol)
        certs.append(_verdict(ConditionId.NGAVME_I, holds, margin,
                              {"sigma_max_abs_B": sigma_max_abs_B, "sigma_min_ACinv": sigma_min_ACinv}))
        holds, margin = _below(sigma_max_B, sigma_min_ACinv, decision_tol)
        certs.append(_verdict(ConditionId.NGAVME_II, holds, margin,
                              {"sigma_max_B": sigma_max_B, "sigma_min_ACinv": sigma_min_ACinv}))

    if a_inverse is None:
        for cid in (ConditionId.NGAVME_III, ConditionId.NGAVME_IV, ConditionId.NGAVME_RHO, ConditionId.NGAVME_SIGMA):
            certs.append(inapplicable(cid, "A is singular"))
    else:
        CAinv = C @ a_inverse
        CAinvB = CAinv @ B
        rho_product = spectral_radius(abs_elementwise(CAinv) @ abs_elementwise(B))
        holds, margin = _below(rho_product, 1.0, decision_tol)
        certs.append(_verdict(ConditionId.NGAVME_III, holds, margin, {"rho_absCAinv_absB": rho_product}))

        sigma = sigma_max(CAinvB)
        holds, margin = _below(sigma, 1.0, decision_tol)
        certs.append(_verdict(ConditionId.NGAVME_IV, holds, margin, {"sigma_max_CAinvB": sigma}))

        rho = spectral_radius(abs_elementwise(CAinvB))
        holds, margin = _below(rho, 1.0, decision_tol)
        certs.append(_verdict(ConditionId.NGAVME_RHO, holds, margin, {"rho_abs_CAinvB": rho}))

        holds, margin = _below(sigma, 1.0, decision_tol)
        certs.append(_verdict(ConditionId.NGAVME_SIGMA, holds, margin, {"sigma_max_CAinvB": sigma}))

    if b_inverse is None or c_inverse is None:
        missing = " and ".join(name for name, inv in (("B", b_inverse), ("C", c_inverse)) if inv is None)
        certs.append(inapplicable(ConditionId.NGAVME_CORO, f"{missing} singular"))
    else:
        sigma = sigma_min(b_inverse @ A @ c_inverse)
        holds, margin = _above(sigma, 1.0, decision_tol)
        certs.append(_verdict(ConditionId.NGAVME_CORO, holds, margin, {"sigma_min_BinvACinv": sigma}))
    return certs


def check_sylvester_max(
    A: np.ndarray, B: np.ndarray, K: np.ndarray, L: np.ndarray, *, decision_tol: Optional[float] = None
) -> Certificate:
    """sigma_max(LK^-1) sigma_max(A^-1 B) < 1 with A and K invertible."""
    a_inverse = _try_invert(A, "A")
    k_inverse = _try_invert(K, "K")
    if a_inverse is None or k_inverse is None:
        missing = " and ".join(name for name, inv in (("A", a_inverse), ("K", k_inverse)) if inv is None)
        return inapplicable(ConditionId.SYLVESTER_MAX, f"{missing} singular")
    left = sigma_max(L @ k_inverse)
    right = sigma_max(a_inverse @ B)
    product = left * right
    holds, margin = _below(product, 1.0, decision_tol)
    return _verdict(ConditionId.SYLVESTER_MAX, holds, margin, {
        "sigma_max_LKinv": left,
        "sigma_max_AinvB": right,
        "product": product,
    })


def check_sylvester_min_corrected(
    A: np.ndarray, B: np.ndarray, K: np.ndarray, L: np.ndarray, *, decision_tol: Optional[float] = None
) -> Certificate:
    """sigma_min(KL^-1) sigma_min(B^-1 A) > 1 with B and L invertible."""
    b_inverse = _try_invert(B, "B")
    l_inverse = _try_invert(L, "L")
    if b_inverse is None or l_inverse is None:
        missing = " and ".join(name for name, inv in (("B", b_inverse), ("L", l_inverse)) if inv is None)
        return inapplicable(ConditionId.SYLVESTER_MIN_CORRECTED, f"{missing} singular")
    left = sigma_min(K @ l_inverse)
    right = sigma_min(b_inverse @ A)
    product = left * right
    holds, margin = _above(product, 1.0, decision_tol)
    return _verdict(ConditionId.SYLVESTER_MIN_CORRECTED, holds, margin, {
        "sigma_min_KLinv": left,
        "sigma_min_BinvA": right,
        "product": product,
    })


def check_sylvester_min_flawed(
    A: np.ndarray, B: np.ndarray, K: np.ndarray, L: np.ndarray, *, decision_tol: Optional[float] = None
) -> Certificate:
    """
    sigma_min(LK^-1) sigma_min(A^-1 B) > 1, a published condition that is not
    sufficient. Never CERTIFIED: when it holds the verdict is
    UNSOUND_CONDITION_HOLDS.
    """
    a_inverse = _try_invert(A, "A")
    k_inverse = _try_invert(K, "K")
    if a_inverse is None or k_inverse is None:
        missing = " and ".join(name for name, inv in (("A", a_inverse), ("K", k_inverse)) if inv is None)
        return inapplicable(ConditionId.SYLVESTER_MIN_FLAWED, f"{missing} singular")
    left = sigma_min(L @ k_inverse)
    right = sigma_min(a_inverse @ B)
    product = left * right
    holds, margin = _above(product, 1.0, decision_tol)
    witnesses = {"sigma_min_LKinv": left, "sigma_min_AinvB": right, "product": product}
    if not holds:
        return _verdict(ConditionId.SYLVESTER_MIN_FLAWED, False, margin, witnesses)
    logger.warning(f"Unsound Sylvester condition holds (value {product:.6g}); it certifies nothing")
    return Certificate(
        condition_id=ConditionId.SYLVESTER_MIN_FLAWED,
        verdict=Verdict.UNSOUND_CONDITION_HOLDS,
        witnesses=witnesses,
        margin=margin,
        notes=FLAWED_SYLVESTER_NOTE,
    )


def _vertex_maximum(G: np.ndarray) -> float:
    """max over d in {-1,1}^n of rho(G diag(d))."""
    n = G.shape[0]
    best = 0.0
    for signs in itertools.product((1.0, -1.0), repeat=n):
        best = max(best, spectral_radius(G * np.asarray(signs)[None, :]))
    return best


def _interval_certificate(
    condition_id: ConditionId,
    G: np.ndarray,
    m: int,
    label: str,
    cap: Optional[int],
    decision_tol: Optional[float],
) -> Certificate:
    cap = settings.ENUM_CAP if cap is None else cap
    order = G.shape[0] * m
    if order >= 63 or 2 ** order > cap:
        raise DimensionOverflow("interval vertex scan 2^(n*m)", 2 ** min(order, 63), cap)

    surrogate = sigma_max(G)
    # I_m ⊗ G is block diagonal, so every vertex of the lifted scan is a vertex of one block
    vertex = _vertex_maximum(G)
    witnesses = {f"sigma_max_{label}": surrogate, "vertex_max_rho": vertex}
    holds, margin = _below(surrogate, 1.0, decision_tol)
    if holds:
        return _verdict(condition_id, True, margin, witnesses)
    if vertex >= 1.0:
        return _verdict(condition_id, False, margin, witnesses, f"vertex with rho(({label})D) = {vertex:.6g} >= 1")
    return _verdict(condition_id, False, margin, witnesses, "vertex scan passed; interval max not established")


def check_interval_spectral(
    A: np.ndarray,
    B: np.ndarray,
    m: int = 1,
    *,
    cap: Optional[int] = None,
    decision_tol: Optional[float] = None,
) -> Certificate:
    """
    rho((I ⊗ A^-1 B) D) < 1 for every diagonal D with entries in [-1, 1].

    Certified through the proven surrogate sigma_max(A^-1 B) < 1; the maximum
    over the {-1, 1} vertices is reported as a witness but never certifies on
    its own.

    Raises:
        DimensionOverflow: 2^(n*m) exceeds the enumeration cap
    """
    a_inverse = _try_invert(A, "A")
    if a_inverse is None:
        return inapplicable(ConditionId.INTERVAL_SPECTRAL, "A is singular")
    return _interval_certificate(ConditionId.INTERVAL_SPECTRAL, a_inverse @ B, m, "AinvB", cap, decision_tol)


def check_ngavme_interval_spectral(
    A: np.ndarray,
    B: np.ndarray,
    C: np.ndarray,
    m: int = 1,
    *,
    cap: Optional[int] = None,
    decision_tol: Optional[float] = None,
) -> Certificate:
    """rho((I ⊗ CA^-1 B) D) < 1 for every diagonal D with entries in [-1, 1]; see :func:`check_interval_spectral`."""
    a_inverse = _try_invert(A, "A")
    c_inverse = _try_invert(C, "C")
    if a_inverse is None or c_inverse is None:
        missing = " and ".join(name for name, inv in (("A", a_inverse), ("C", c_inverse)) if inv is None)
        return inapplicable(ConditionId.NGAVME_INTERVAL_SPECTRAL, f"{missing} singular")
    return _interval_certificate(
        ConditionId.NGAVME_INTERVAL_SPECTRAL, C @ a_inverse @ B, m, "CAinvB", cap, decision_tol
    )


def _guarded(condition_ids: List[ConditionId], thunk) -> List[Certificate]:
    """Run a checker; enumeration overflow or a failed reduction becomes INAPPLICABLE."""
    try:
        result = thunk()
    except (DimensionOverflow, SingularMatrix) as e:
        logger.info(f"Skipping {', '.join(c.value for c in condition_ids)}: {e}")
        return [inapplicable(cid, str(e)) for cid in condition_ids]
    return result if isinstance(result, list) else [result]


def certify_instance(
    inst: Instance,
    *,
    enum_cap: Optional[int] = None,
    kron_cap: Optional[int] = None,
    decision_tol: Optional[float] = None,
    probe_seed: Optional[int] = None,
) -> List[Certificate]:
    """
    Every applicable analytic and combinatorial certificate for an instance.
    ``probe_seed`` seeds the randomized invertibility probe of the W conditions.

    Hypothesis failures and enumeration overflows are reported as
    INAPPLICABLE certificates, never raised.
    """
    from avecert.services import combinat
    from avecert.services.instances import column_count

    m = column_count(inst)
    tol = {"decision_tol": decision_tol}
    caps = {"enum_cap": enum_cap, "kron_cap": kron_cap}
    probe = {**caps, "seed": probe_seed}

    if isinstance(inst, (GaveInstance, GavmeInstance)):
        A, B = inst.A, inst.B
        certs = [check_gavme_spectral(A, B, **tol)]
        certs += check_gavme_classic(A, B, **tol)
        certs += _guarded([ConditionId.INTERVAL_SPECTRAL],
                          lambda: check_interval_spectral(A, B, m, cap=enum_cap, **tol))
        certs += _guarded([ConditionId.W_I, ConditionId.W_II, ConditionId.W_III, ConditionId.W_IV],
                          lambda: combinat.check_gavme_w_conditions(A, B, m, **probe))
        certs += _guarded([ConditionId.DD_I, ConditionId.DD_II],
                          lambda: combinat.check_gavme_dd_conditions(A, B, m, **caps))
    elif isinstance(inst, NgavmeInstance):
        A, B, C = inst.A, inst.B, inst.C
        certs = check_ngavme(A, B, C, **tol)
        certs += _guarded([ConditionId.NGAVME_INTERVAL_SPECTRAL],
                          lambda: check_ngavme_interval_spectral(A, B, C, m, cap=enum_cap, **tol))
        certs += _guarded(
            [ConditionId.NGAVME_W_I, ConditionId.NGAVME_W_II, ConditionId.NGAVME_W_III, ConditionId.NGAVME_W_IV,
             ConditionId.NGAVME_DD_I, ConditionId.NGAVME_DD_II],
            lambda: combinat.check_ngavme_combinatorial(A, B, C, m, **probe),
        )
    elif isinstance(inst, SylvesterAveInstance):
        args = (inst.A, inst.B, inst.K, inst.L)
        certs = [
            check_sylvester_max(*args, **tol),
            check_sylvester_min_corrected(*args, **tol),
            check_sylvester_min_flawed(*args, **tol),
        ]
    else:
        raise AveError(f"unsupported instance type {type(inst).__name__}")

    certified = [c.condition_id.value for c in certs if c.verdict == Verdict.CERTIFIED]
    logger.info(f"{inst.type} order {inst.order}: {len(certs)} conditions, certified by {certified or 'none'}")
    return certs
