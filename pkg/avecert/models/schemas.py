"""Pydantic models for certificates, reports, solver options and results."""
from enum import Enum
from typing import Annotated, Dict, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, PlainSerializer, WithJsonSchema, model_validator

from avecert.services.matcore import as_matrix, as_vector


def _to_nested_list(array: np.ndarray) -> list:
    return array.tolist()


MatrixField = Annotated[
    np.ndarray,
    BeforeValidator(as_matrix),
    PlainSerializer(_to_nested_list, return_type=list),
    WithJsonSchema({"type": "array", "items": {"type": "array", "items": {"type": "number"}}}),
]

VectorField = Annotated[
    np.ndarray,
    BeforeValidator(as_vector),
    PlainSerializer(_to_nested_list, return_type=list),
    WithJsonSchema({"type": "array", "items": {"type": "number"}}),
]

# A solution is a vector for a GAVE and a matrix for the matrix equations.
SolutionField = Annotated[
    np.ndarray,
    PlainSerializer(_to_nested_list, return_type=list),
    WithJsonSchema({"type": "array"}),
]

INFINITE = "INFINITE"


class EquationClass(str, Enum):
    """Equation class tag of an instance."""
    GAVE = "GAVE"
    GAVME = "GAVME"
    NGAVME = "NGAVME"
    SYLVESTER = "SYLVESTER"


class Verdict(str, Enum):
    """Outcome of one sufficient condition."""
    CERTIFIED = "CERTIFIED"
    NOT_CERTIFIED = "NOT_CERTIFIED"
    INAPPLICABLE = "INAPPLICABLE"
    UNSOUND_CONDITION_HOLDS = "UNSOUND_CONDITION_HOLDS"


class ConditionId(str, Enum):
    """Identifier of every sufficient condition avecert evaluates."""
    GAVME_SPECTRAL = "GAVME_SPECTRAL"
    CLASSIC_I = "CLASSIC_I"
    CLASSIC_II = "CLASSIC_II"
    CLASSIC_III = "CLASSIC_III"
    CLASSIC_IV = "CLASSIC_IV"
    INTERVAL_SPECTRAL = "INTERVAL_SPECTRAL"
    W_I = "W_I"
    W_II = "W_II"
    W_III = "W_III"
    W_IV = "W_IV"
    DD_I = "DD_I"
    DD_II = "DD_II"
    NGAVME_I = "NGAVME_I"
    NGAVME_II = "NGAVME_II"
    NGAVME_III = "NGAVME_III"
    NGAVME_IV = "NGAVME_IV"
    NGAVME_RHO = "NGAVME_RHO"
    NGAVME_SIGMA = "NGAVME_SIGMA"
    NGAVME_CORO = "NGAVME_CORO"
    NGAVME_INTERVAL_SPECTRAL = "NGAVME_INTERVAL_SPECTRAL"
    NGAVME_W_I = "NGAVME_W_I"
    NGAVME_W_II = "NGAVME_W_II"
    NGAVME_W_III = "NGAVME_W_III"
    NGAVME_W_IV = "NGAVME_W_IV"
    NGAVME_DD_I = "NGAVME_DD_I"
    NGAVME_DD_II = "NGAVME_DD_II"
    SYLVESTER_MAX = "SYLVESTER_MAX"
    SYLVESTER_MIN_CORRECTED = "SYLVESTER_MIN_CORRECTED"
    SYLVESTER_MIN_FLAWED = "SYLVESTER_MIN_FLAWED"


UNSOUND_CONDITIONS = frozenset({ConditionId.SYLVESTER_MIN_FLAWED})


class Certificate(BaseModel):
    """Verdict of one sufficient condition with every computed witness."""
    model_config = ConfigDict(frozen=True)

    condition_id: ConditionId = Field(..., description="Which sufficient condition was evaluated")
    verdict: Verdict = Field(..., description="Outcome of the evaluation")
    witnesses: Dict[str, float] = Field(default_factory=dict, description="Computed scalars the verdict rests on")
    margin: Optional[float] = Field(None, description="Signed distance from the threshold; positive when the inequality holds")
    notes: str = Field("", description="Failed hypothesis, probe caveats or warnings")

    @property
    def certified(self) -> bool:
        return self.verdict == Verdict.CERTIFIED


class CombinatorialReport(BaseModel):
    """Outcome of one exhaustive combinatorial property scan."""
    model_config = ConfigDict(frozen=True)

    property_id: str = Field(..., description="Which property was scanned")
    holds: bool = Field(..., description="Whether the property holds")
    counterexample_selector: Optional[List[bool]] = Field(None, description="First violating representative (True = column from M2)")
    counterexample_indices: Optional[List[int]] = Field(None, description="First violating principal index set or column")
    determinant_or_minor: Optional[float] = Field(None, description="Offending determinant, minor or dominance gap; on success the smallest one seen")
    scanned: int = Field(0, ge=0, description="Number of matrices or columns examined")
    notes: str = Field("", description="Near-singular or structural remarks")

    @model_validator(mode="after")
    def _counterexample_on_failure(self):
        if not self.holds and self.counterexample_selector is None and self.counterexample_indices is None:
            raise ValueError("a failing report must carry a counterexample")
        return self


class SolveOptions(BaseModel):
    """Options of the Picard-based solvers."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    max_iterations: int = Field(10000, ge=1, description="Iteration cap")
    step_tolerance: float = Field(1e-12, gt=0, description="Stop when the fixed-point step is below this (relative to max(1, |x|))")
    residual_tolerance: float = Field(1e-10, gt=0, description="Residual a converged result must meet")
    initial_point: Optional[VectorField] = Field(None, description="Starting vector (default 0)")
    strict: bool = Field(False, description="Raise NonConvergence instead of returning converged=False")
    oracle_fallback: bool = Field(True, description="Retry failed columns with the enumeration oracle on small orders")

    @classmethod
    def from_settings(cls, **overrides) -> "SolveOptions":
        from avecert.core.config import settings

        values = {
            "max_iterations": settings.MAX_ITERATIONS,
            "step_tolerance": settings.STEP_TOLERANCE,
            "residual_tolerance": settings.RESIDUAL_TOLERANCE,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


class SolveResult(BaseModel):
    """Solution with iteration and residual diagnostics."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    solution: SolutionField = Field(..., description="Solution vector (GAVE) or matrix (GAVME/NGAVME)")
    iterations: int = Field(..., ge=0, description="Total Picard updates over all columns")
    final_residual: float = Field(..., description="Infinity-norm residual against the defining equation")
    converged: bool = Field(..., description="Whether every column met both tolerances")
    certificate_used: Optional[ConditionId] = Field(None, description="Certificate guaranteeing uniqueness, if any")
    column_iterations: List[int] = Field(default_factory=list, description="Picard updates per column")
    oracle_columns: List[int] = Field(default_factory=list, description="Columns solved by the enumeration fallback")


class OracleReport(BaseModel):
    """Exhaustive sign-pattern census of a small GAVE."""

    solution_count: Union[int, Literal["INFINITE"]] = Field(..., description="Number of solutions or INFINITE")
    solutions: List[List[float]] = Field(default_factory=list, description="Deduplicated solutions in sign-pattern order")
    solution_patterns: List[List[int]] = Field(default_factory=list, description="Sign pattern each solution was found under")
    degenerate_patterns: List[List[int]] = Field(default_factory=list, description="Patterns whose system A + B diag(d) was singular")
    consistent_singular: bool = Field(False, description="A singular pattern system was consistent")
    scanned: int = Field(0, ge=0, description="Number of sign patterns examined")

    @property
    def unique(self) -> bool:
        return self.solution_count == 1


class GenSpec(BaseModel):
    """Recipe for a random instance."""
    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=1, description="Order of the coefficient matrices")
    m: int = Field(1, ge=1, description="Columns of F and X")
    equation_class: EquationClass = Field(EquationClass.GAVE, description="Which equation to generate")
    target_rho: Optional[float] = Field(None, ge=0, description="Desired rho(|A^-1 B|) (rho(|CA^-1 B|) for NGAVME)")
    entry_distribution: Literal["uniform", "integer"] = Field("uniform", description="uniform(-1,1) or integer(-5..5)")
    seed: int = Field(0, description="Seed of every random draw")


class ConditionCounter(BaseModel):
    """Verdict frequencies of one condition over a comparison run."""
    certified: int = 0
    not_certified: int = 0
    inapplicable: int = 0
    unsound_holds: int = 0

    @property
    def total(self) -> int:
        return self.certified + self.not_certified + self.inapplicable + self.unsound_holds


class ComparisonTable(BaseModel):
    """Per-condition verdict counts plus implication and soundness violations."""

    sample_size: int = Field(0, ge=0)
    seed: int = Field(0)
    counters: Dict[str, ConditionCounter] = Field(default_factory=dict)
    implication_violations: Dict[str, int] = Field(default_factory=dict)
    soundness_violations: int = Field(0, ge=0)

    @property
    def clean(self) -> bool:
        return self.soundness_violations == 0 and not any(self.implication_violations.values())

    def merge(self, other: "ComparisonTable") -> "ComparisonTable":
        """Combine two partial tables; counts add, the seed of ``self`` is kept."""
        counters = {name: counter.model_copy() for name, counter in self.counters.items()}
        for name, counter in other.counters.items():
            mine = counters.get(name, ConditionCounter())
            counters[name] = ConditionCounter(
                certified=mine.certified + counter.certified,
                not_certified=mine.not_certified + counter.not_certified,
                inapplicable=mine.inapplicable + counter.inapplicable,
                unsound_holds=mine.unsound_holds + counter.unsound_holds,
            )
        violations = dict(self.implication_violations)
        for name, count in other.implication_violations.items():
            violations[name] = violations.get(name, 0) + count
        return ComparisonTable(
            sample_size=self.sample_size + other.sample_size,
            seed=self.seed,
            counters=counters,
            implication_violations=violations,
            soundness_violations=self.soundness_violations + other.soundness_violations,
        )

    def to_text(self) -> str:
        lines = [
            f"trials: {self.sample_size}  seed: {self.seed}",
            f"{'condition':<28}{'certified':>10}{'not':>8}{'n/a':>8}{'unsound':>9}",
        ]
        for name, c in self.counters.items():
            lines.append(f"{name:<28}{c.certified:>10}{c.not_certified:>8}{c.inapplicable:>8}{c.unsound_holds:>9}")
        for name, count in self.implication_violations.items():
            lines.append(f"violations of {name}: {count}")
        lines.append(f"soundness violations: {self.soundness_violations}")
        return "\n".join(lines)


class GoldenCheck(BaseModel):
    """One regression value compared against its published reference."""
    name: str
    expected: float
    computed: Optional[float] = None
    tolerance: float
    resolution: float = Field(0.0, description="Half a unit in the last printed digit of the reference")
    passed: bool = False
    note: str = ""


class ExampleReport(BaseModel):
    """Result of the embedded regression suite."""
    checks: List[GoldenCheck] = Field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def to_text(self) -> str:
        lines = []
        for check in self.checks:
            computed = "n/a" if check.computed is None else f"{check.computed:.6g}"
            status = "PASS" if check.passed else "FAIL"
            note = f"  ({check.note})" if check.note else ""
            lines.append(f"{status}  {check.name:<48} expected {check.expected:.6g}  computed {computed}{note}")
        lines.append(f"{sum(c.passed for c in self.checks)}/{len(self.checks)} checks passed")
        return "\n".join(lines)
