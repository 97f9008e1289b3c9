"""Published instances embedded as constants, used by the regression suite and ``--example``."""
from typing import Dict, List, NamedTuple, Optional

import numpy as np

from avecert.core.errors import ParseError
from avecert.models.instances import GavmeInstance, Instance, NgavmeInstance, SylvesterAveInstance
from avecert.models.schemas import ConditionId, Verdict


class GoldenValue(NamedTuple):
    """
    A printed reference value.

    ``name`` is a certificate witness, looked up in ``condition`` when given and
    otherwise in the first certificate reporting it. ``decimals`` is the
    printed precision (None for exact values).
    """
    name: str
    expected: float
    tolerance: float
    decimals: Optional[int] = None
    condition: Optional[ConditionId] = None


class ReferenceCase(NamedTuple):
    name: str
    description: str
    instance: Instance
    solution: Optional[np.ndarray]
    golden: List[GoldenValue]
    verdicts: Optional[Dict[ConditionId, Verdict]] = None
    oracle_counts: Optional[List[int]] = None


GAVME_2X2 = GavmeInstance(
    A=[[5.0, -1.0], [-4.0, 4.0]],
    B=[[-0.5, 1.0], [0.5, -2.0]],
)

GAVME_3X3 = GavmeInstance(
    A=[[2.0, -4.0, 0.0], [0.0, 1.2, 1.1], [-2.0, 0.8, 0.0]],
    B=[[1.0, -1.0, 0.0], [0.0, 1.0, 1.0], [-1.0, 0.0, 0.0]],
    F=[[-5.5, 9.0, 1.0], [0.8, 3.8, 1.8], [3.4, -4.6, -5.2]],
)
GAVME_3X3_SOLUTION = np.array([[-3.0, 1.0, 2.0], [0.5, -2.0, 1.0], [-3.0, 2.0, -4.0]])

NGAVME_3X3 = NgavmeInstance(
    A=[[-5.0, 2.0, 8.0], [1.0, 2.0, 3.0], [7.0, -5.0, 0.0]],
    B=[[1.0, 2.0, 0.0], [0.0, 1.0, -1.0], [-1.0, 2.0, 0.0]],
    C=[[2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]],
    F=[[14.0, -7.0, 19.0], [12.0, 4.0, 3.0], [1.0, 39.0, -12.0]],
)
NGAVME_3X3_SOLUTION = np.array([[2.0, 5.0, -1.0], [3.0, -2.0, 1.0], [1.0, 1.0, 1.0]])

# x + 2|x| = 1 has the two solutions 1/3 and -1; x + 2|x| = -1 has none
SYLVESTER_SCALAR = SylvesterAveInstance(A=[[1.0]], B=[[2.0]], K=[[1.0]], L=[[1.0]], F=[[1.0]])
SYLVESTER_SCALAR_NEGATIVE = SylvesterAveInstance(A=[[1.0]], B=[[2.0]], K=[[1.0]], L=[[1.0]], F=[[-1.0]])

REFERENCE_CASES: Dict[str, ReferenceCase] = {
    "gavme-2x2": ReferenceCase(
        name="gavme-2x2",
        description="2x2 GAVME certified by rho(|A^-1 B|) where the classical bounds stall",
        instance=GAVME_2X2,
        solution=None,
        golden=[
            GoldenValue("rho_abs_AinvB", 0.38826, 1e-4, 5),
            GoldenValue("rho_absAinv_absB", 1.0, 1e-4, 4),
            GoldenValue("sigma_max_B", 2.3354, 1e-3, 4),
            GoldenValue("sigma_max_abs_B", 2.3354, 1e-3, 4),
            GoldenValue("sigma_min_A", 2.1939, 1e-3, 4),
        ],
        verdicts={
            ConditionId.GAVME_SPECTRAL: Verdict.CERTIFIED,
            ConditionId.CLASSIC_I: Verdict.NOT_CERTIFIED,
            ConditionId.CLASSIC_II: Verdict.NOT_CERTIFIED,
            ConditionId.CLASSIC_III: Verdict.NOT_CERTIFIED,
            ConditionId.CLASSIC_IV: Verdict.CERTIFIED,
        },
    ),
    "gavme-3x3": ReferenceCase(
        name="gavme-3x3",
        description="3x3 GAVME with a printed unique solution",
        instance=GAVME_3X3,
        solution=GAVME_3X3_SOLUTION,
        golden=[
            GoldenValue("rho_abs_AinvB", 0.9091, 1e-4, 4),
            GoldenValue("sigma_max_AinvB", 1.0885, 1e-3, 4),
            GoldenValue("sigma_max_abs_B", 1.8019, 1e-3, 4),
            GoldenValue("sigma_max_B", 1.8019, 1e-3, 4),
            GoldenValue("sigma_min_A", 0.9038, 1e-3, 4),
        ],
        verdicts={
            ConditionId.GAVME_SPECTRAL: Verdict.CERTIFIED,
            ConditionId.CLASSIC_I: Verdict.NOT_CERTIFIED,
            ConditionId.CLASSIC_II: Verdict.NOT_CERTIFIED,
            ConditionId.CLASSIC_III: Verdict.CERTIFIED,
            ConditionId.CLASSIC_IV: Verdict.NOT_CERTIFIED,
        },
        oracle_counts=[1, 1, 1],
    ),
    "ngavme-3x3": ReferenceCase(
        name="ngavme-3x3",
        description="3x3 NGAVME AX + B|CX| = F with a printed unique solution",
        instance=NGAVME_3X3,
        solution=NGAVME_3X3_SOLUTION,
        golden=[
            GoldenValue("sigma_max_CAinvB", 0.90873, 1e-3, 5),
            GoldenValue("rho_abs_CAinvB", 0.70285, 1e-3, 5),
            GoldenValue("sigma_min_BinvACinv", 1.1004, 1e-3, 4),
        ],
        verdicts={
            ConditionId.NGAVME_IV: Verdict.CERTIFIED,
            ConditionId.NGAVME_RHO: Verdict.CERTIFIED,
            ConditionId.NGAVME_CORO: Verdict.CERTIFIED,
        },
        oracle_counts=[1, 1, 1],
    ),
    "sylvester-scalar": ReferenceCase(
        name="sylvester-scalar",
        description="scalar Sylvester-like AVE x + 2|x| = 1 that defeats the unsound minimum condition",
        instance=SYLVESTER_SCALAR,
        solution=None,
        golden=[
            GoldenValue("product", 2.0, 1e-12, condition=ConditionId.SYLVESTER_MIN_FLAWED),
            GoldenValue("product", 0.5, 1e-12, condition=ConditionId.SYLVESTER_MIN_CORRECTED),
        ],
        verdicts={
            ConditionId.SYLVESTER_MIN_FLAWED: Verdict.UNSOUND_CONDITION_HOLDS,
            ConditionId.SYLVESTER_MIN_CORRECTED: Verdict.NOT_CERTIFIED,
        },
        oracle_counts=[2],
    ),
}


def get_case(name: str) -> ReferenceCase:
    """
    Look up an embedded case by name.

    Raises:
        ParseError: Unknown name
    """
    try:
        return REFERENCE_CASES[name]
    except KeyError:
        raise ParseError(f"unknown example {name!r}; choose from {', '.join(REFERENCE_CASES)}") from None
