"""Pydantic models for the four equation classes."""
from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from avecert.core.errors import DimensionMismatch
from avecert.models.schemas import EquationClass, MatrixField, SolutionField, VectorField

_INSTANCE_CONFIG = ConfigDict(arbitrary_types_allowed=True, frozen=True, extra="ignore")


def _square(name: str, M, n: int) -> None:
    if M.shape != (n, n):
        raise DimensionMismatch(f"{name} must be {n}x{n}, got {M.shape[0]}x{M.shape[1]}")


class GaveInstance(BaseModel):
    """Ax + B|x| = f."""
    model_config = _INSTANCE_CONFIG

    type: Literal["GAVE"] = "GAVE"
    A: MatrixField
    B: MatrixField
    f: Optional[VectorField] = None

    @model_validator(mode="after")
    def _check_dimensions(self):
        n = self.A.shape[0]
        _square("A", self.A, n)
        _square("B", self.B, n)
        if self.f is not None and self.f.shape[0] != n:
            raise DimensionMismatch(f"f must have length {n}, got {self.f.shape[0]}")
        return self

    @property
    def order(self) -> int:
        return self.A.shape[0]

    @property
    def equation_class(self) -> EquationClass:
        return EquationClass.GAVE

    @property
    def rhs(self):
        return self.f


class GavmeInstance(BaseModel):
    """AX + B|X| = F with F of shape n x m."""
    model_config = _INSTANCE_CONFIG

    type: Literal["GAVME"] = "GAVME"
    A: MatrixField
    B: MatrixField
    F: Optional[MatrixField] = None

    @model_validator(mode="after")
    def _check_dimensions(self):
        n = self.A.shape[0]
        _square("A", self.A, n)
        _square("B", self.B, n)
        if self.F is not None and self.F.shape[0] != n:
            raise DimensionMismatch(f"F must have {n} rows, got {self.F.shape[0]}")
        return self

    @property
    def order(self) -> int:
        return self.A.shape[0]

    @property
    def equation_class(self) -> EquationClass:
        return EquationClass.GAVME

    @property
    def rhs(self):
        return self.F


class NgavmeInstance(BaseModel):
    """AX + B|CX| = F with F of shape n x m."""
    model_config = _INSTANCE_CONFIG

    type: Literal["NGAVME"] = "NGAVME"
    A: MatrixField
    B: MatrixField
    C: MatrixField
    F: Optional[MatrixField] = None

    @model_validator(mode="after")
    def _check_dimensions(self):
        n = self.A.shape[0]
        for name in ("A", "B", "C"):
            _square(name, getattr(self, name), n)
        if self.F is not None and self.F.shape[0] != n:
            raise DimensionMismatch(f"F must have {n} rows, got {self.F.shape[0]}")
        return self

    @property
    def order(self) -> int:
        return self.A.shape[0]

    @property
    def equation_class(self) -> EquationClass:
        return EquationClass.NGAVME

    @property
    def rhs(self):
        return self.F


class SylvesterAveInstance(BaseModel):
    """AXK + B|X|L = F, all n x n."""
    model_config = _INSTANCE_CONFIG

    type: Literal["SYLVESTER"] = "SYLVESTER"
    A: MatrixField
    B: MatrixField
    K: MatrixField
    L: MatrixField
    F: Optional[MatrixField] = None

    @model_validator(mode="after")
    def _check_dimensions(self):
        n = self.A.shape[0]
        for name in ("A", "B", "K", "L"):
            _square(name, getattr(self, name), n)
        if self.F is not None:
            _square("F", self.F, n)
        return self

    @property
    def order(self) -> int:
        return self.A.shape[0]

    @property
    def equation_class(self) -> EquationClass:
        return EquationClass.SYLVESTER

    @property
    def rhs(self):
        return self.F


Instance = Annotated[
    Union[GaveInstance, GavmeInstance, NgavmeInstance, SylvesterAveInstance],
    Field(discriminator="type"),
]


class GeneratedInstance(BaseModel):
    """Generated instance with the ground truth its right-hand side was built from."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    instance: Instance
    ground_truth: SolutionField = Field(..., description="x0 (GAVE) or X0 used to build the right-hand side")
    realized_rho: Optional[float] = Field(None, description="rho(|A^-1 B|), or rho(|CA^-1 B|) for NGAVME")
