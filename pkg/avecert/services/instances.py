"""Instance I/O, residual evaluation and the structural reductions between equation classes."""
import json
import logging
from pathlib import Path
from typing import IO, Any, Callable, Dict, List, Mapping, Optional, Tuple, Union

import numpy as np
from pydantic import TypeAdapter, ValidationError
from scipy import io as sio
from scipy import sparse

from avecert.core.errors import DimensionMismatch, MissingRightHandSide, ParseError
from avecert.models.instances import (
    GaveInstance,
    GavmeInstance,
    Instance,
    NgavmeInstance,
    SylvesterAveInstance,
)
from avecert.models.schemas import EquationClass
from avecert.services.matcore import abs_elementwise, invert, lift_identity, norm_inf, unvec, vec

logger = logging.getLogger(__name__)

_instance_adapter = TypeAdapter(Instance)

MATRIX_MARKET_NAMES = ("A", "B", "C", "K", "L", "F", "f")

PathOrStream = Union[str, Path, IO[str]]


def parse_instance_data(data: Mapping[str, Any], equation_class: Optional[EquationClass] = None) -> Instance:
    """
    Validate an already decoded JSON bundle.

    Args:
        data: Mapping with a "type" tag and matrix fields as arrays of rows
        equation_class: Overrides (or supplies) the "type" tag

    Raises:
        ParseError: Missing or malformed fields
        DimensionMismatch: Inconsistent block sizes
    """
    if not isinstance(data, Mapping):
        raise ParseError("instance bundle must be a JSON object")
    payload = dict(data)
    if equation_class is not None:
        payload["type"] = EquationClass(equation_class).value
    elif isinstance(payload.get("type"), str):
        payload["type"] = payload["type"].upper()
    try:
        return _instance_adapter.validate_python(payload)
    except ValidationError as e:
        raise ParseError(f"invalid instance bundle: {e}") from e


def _read_json(source: PathOrStream) -> Dict[str, Any]:
    try:
        if isinstance(source, (str, Path)):
            with open(source, encoding="utf-8") as handle:
                return json.load(handle)
        return json.load(source)
    except json.JSONDecodeError as e:
        raise ParseError(f"malformed JSON: {e}") from e


def _read_matrix_market(path: Path) -> np.ndarray:
    try:
        data = sio.mmread(str(path))
    except (ValueError, OSError) as e:
        raise ParseError(f"malformed MatrixMarket file {path.name}: {e}") from e
    if sparse.issparse(data):
        data = data.toarray()
    return np.asarray(data, dtype=np.float64)


def _infer_class(names) -> EquationClass:
    if "K" in names or "L" in names:
        return EquationClass.SYLVESTER
    if "C" in names:
        return EquationClass.NGAVME
    if "f" in names:
        return EquationClass.GAVE
    return EquationClass.GAVME


def _read_matrix_market_directory(directory: Path, equation_class: Optional[EquationClass]) -> Instance:
    payload: Dict[str, Any] = {}
    # exact listing match: f.mtx and F.mtx collide on case-insensitive file systems
    present = {p.name for p in directory.iterdir() if p.is_file()}
    for name in MATRIX_MARKET_NAMES:
        if f"{name}.mtx" in present:
            payload[name] = _read_matrix_market(directory / f"{name}.mtx")
    if "A" not in payload or "B" not in payload:
        raise ParseError(f"{directory} must contain A.mtx and B.mtx")
    equation_class = equation_class or _infer_class(payload)
    logger.debug(f"MatrixMarket directory {directory} read as {equation_class.value}: {sorted(payload)}")
    return parse_instance_data(payload, equation_class)


def parse_instance(
    source: PathOrStream,
    format: Optional[str] = None,
    equation_class: Optional[EquationClass] = None,
) -> Instance:
    """
    Read an instance from a JSON bundle or a MatrixMarket directory.

    Args:
        source: Path to a ``.json`` file or a directory of ``.mtx`` files, or a text stream holding JSON
        format: "json" or "mtx"; inferred from the path when omitted
        equation_class: Overrides the type tag (JSON) or the inferred class (MatrixMarket)

    Returns:
        A validated Instance

    Raises:
        ParseError: Missing or malformed input
        DimensionMismatch: Inconsistent block sizes
    """
    if not isinstance(source, (str, Path)):
        return parse_instance_data(_read_json(source), equation_class)

    path = Path(source)
    if not path.exists():
        raise ParseError(f"{path} does not exist")
    if format is None:
        format = "mtx" if path.is_dir() else "json"
    if format == "mtx":
        if not path.is_dir():
            raise ParseError(f"MatrixMarket input must be a directory, got {path}")
        return _read_matrix_market_directory(path, equation_class)
    if format == "json":
        return parse_instance_data(_read_json(path), equation_class)
    raise ParseError(f"unknown instance format {format!r}")


def write_matrix(X: np.ndarray, path: Union[str, Path], format: str = "json") -> None:
    """Write a single matrix (or vector) as a JSON array or a MatrixMarket array file."""
    path = Path(path)
    if format == "mtx":
        sio.mmwrite(str(path), np.atleast_2d(X).T if X.ndim == 1 else np.asarray(X))
    else:
        path.write_text(json.dumps(np.asarray(X).tolist()) + "\n", encoding="utf-8")


def write_instance(
    inst: Instance,
    path: Union[str, Path],
    format: str = "json",
    extra: Optional[Mapping[str, Any]] = None,
) -> None:
    """
    Write an instance as a JSON bundle or a MatrixMarket directory.

    ``extra`` keys (for example ``ground_truth``) are added to the JSON bundle
    or written as additional ``.mtx`` files; the parser ignores them.
    """
    path = Path(path)
    bundle = inst.model_dump(mode="json", exclude_none=True)
    extra = dict(extra or {})
    if format == "mtx":
        path.mkdir(parents=True, exist_ok=True)
        for name in MATRIX_MARKET_NAMES:
            value = getattr(inst, name, None)
            if value is not None:
                write_matrix(value, path / f"{name}.mtx", "mtx")
        for name, value in extra.items():
            write_matrix(np.asarray(value, dtype=np.float64), path / f"{name}.mtx", "mtx")
        return
    for name, value in extra.items():
        bundle[name] = np.asarray(value).tolist() if isinstance(value, np.ndarray) else value
    path.write_text(json.dumps(bundle, indent=2) + "\n", encoding="utf-8")


def column_count(inst: Instance) -> int:
    """Number of columns of F (1 for a GAVE or when F is omitted)."""
    if isinstance(inst, GaveInstance) or inst.rhs is None:
        return 1
    return inst.rhs.shape[1]


def _require_rhs(inst: Instance):
    if inst.rhs is None:
        raise MissingRightHandSide(f"{inst.type} instance has no right-hand side")
    return inst.rhs


def residual(inst: Instance, X: np.ndarray) -> float:
    """
    Largest absolute entry of LHS(X) - RHS.

    Raises:
        MissingRightHandSide: The instance carries no F / f
        DimensionMismatch: X does not fit the instance
    """
    rhs = _require_rhs(inst)
    X = np.asarray(X, dtype=np.float64)
    if isinstance(inst, GaveInstance) and X.ndim == 2 and 1 in X.shape:
        X = X.reshape(-1)
    if X.shape != rhs.shape:
        raise DimensionMismatch(f"solution has shape {X.shape}, expected {rhs.shape}")

    if isinstance(inst, (GaveInstance, GavmeInstance)):
        lhs = inst.A @ X + inst.B @ abs_elementwise(X)
    elif isinstance(inst, NgavmeInstance):
        lhs = inst.A @ X + inst.B @ abs_elementwise(inst.C @ X)
    else:
        lhs = inst.A @ X @ inst.K + inst.B @ abs_elementwise(X) @ inst.L
    return norm_inf(lhs - rhs)


def reduce_ngavme(inst: NgavmeInstance) -> Tuple[GavmeInstance, Callable[[np.ndarray], np.ndarray]]:
    """
    Rewrite AX + B|CX| = F as the GAVME AC^-1 Y + B|Y| = F with Y = CX.

    Returns:
        The reduced GAVME and the back map Y -> C^-1 Y

    Raises:
        SingularMatrix: C is not invertible
    """
    c_inverse = invert(inst.C, name="C")
    reduced = GavmeInstance(A=inst.A @ c_inverse, B=inst.B, F=inst.F)

    def back_map(Y: np.ndarray) -> np.ndarray:
        return c_inverse @ np.asarray(Y, dtype=np.float64)

    return reduced, back_map


def gavme_columns(inst: GavmeInstance) -> List[GaveInstance]:
    """Split AX + B|X| = F into one GAVE per column of F."""
    F = _require_rhs(inst)
    return [GaveInstance(A=inst.A, B=inst.B, f=F[:, j]) for j in range(F.shape[1])]


def lift_gavme(inst: GavmeInstance, columns: Optional[int] = None, *, cap: Optional[int] = None) -> GaveInstance:
    """
    Kronecker lift of a GAVME to a GAVE of order n*m.

    The lift is (I_m ⊗ A) x + (I_m ⊗ B)|x| = vec(F); x solves it iff unvec(x)
    solves the GAVME. ``columns`` gives m when F is omitted.

    Raises:
        DimensionOverflow: n*m exceeds the Kronecker cap
    """
    m = columns if columns is not None else column_count(inst)
    f = vec(inst.F) if inst.F is not None else None
    if f is not None and inst.F.shape[1] != m:
        raise DimensionMismatch(f"F has {inst.F.shape[1]} columns, lift requested {m}")
    return GaveInstance(
        A=lift_identity(inst.A, m, cap=cap),
        B=lift_identity(inst.B, m, cap=cap),
        f=f,
    )


def unlift_solution(x: np.ndarray, inst: GavmeInstance, columns: Optional[int] = None) -> np.ndarray:
    """Map a solution of :func:`lift_gavme` back to an n x m matrix."""
    m = columns if columns is not None else column_count(inst)
    return unvec(np.asarray(x), inst.order, m)


def scalar_sylvester_as_gave(inst: SylvesterAveInstance) -> GaveInstance:
    """
    The scalar Sylvester-like AVE a x k + b |x| l = f as the GAVE (ak) x + (bl)|x| = f.

    Raises:
        DimensionMismatch: The instance is not 1 x 1
    """
    if inst.order != 1:
        raise DimensionMismatch("only the scalar Sylvester-like AVE reduces to a GAVE here")
    f = inst.F.reshape(-1) if inst.F is not None else None
    return GaveInstance(A=inst.A * inst.K, B=inst.B * inst.L, f=f)
