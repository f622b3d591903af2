import math
from typing import Any, Dict, Optional

import numpy as np

from pluriperiod.core.errors import PluriperiodError


def json_safe(value: Any) -> Any:
    """Complex -> [re, im], non-finite floats -> None, numpy scalars and arrays unwrapped."""
    if isinstance(value, np.ndarray):
        return [json_safe(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, bool) or value is None or isinstance(value, (str, int)):
        return value
    if isinstance(value, complex):
        return [json_safe(value.real), json_safe(value.imag)]
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {str(k): json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    return str(value)


def check_record(
    check_id: str,
    params: Dict[str, Any],
    lhs: Any = None,
    rhs: Any = None,
    abs_err: Optional[float] = None,
    rel_err: Optional[float] = None,
    budget: Optional[float] = None,
    passed: bool = False,
    extra: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    record = {
        "check_id": check_id,
        "params": json_safe(params),
        "lhs": json_safe(lhs),
        "rhs": json_safe(rhs),
        "abs_err": json_safe(abs_err),
        "rel_err": json_safe(rel_err),
        "budget": json_safe(budget),
        "pass": bool(passed),
        "error": None,
    }

    if extra:
        record["extra"] = json_safe(extra)

    return record


def comparison_record(check_id: str, params: Dict[str, Any], comparison, extra: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    merged = dict(comparison.extra)
    merged.update(extra or {})
    return check_record(
        check_id,
        params,
        lhs=comparison.lhs,
        rhs=comparison.rhs,
        abs_err=comparison.abs_err,
        rel_err=comparison.rel_err,
        budget=comparison.budget,
        passed=comparison.passed,
        extra=merged or None,
    )


def error_record(check_id: str, params: Dict[str, Any], exc: Exception) -> Dict[str, Any]:
    record = check_record(check_id, params)

    if isinstance(exc, PluriperiodError):
        record["error"] = json_safe(exc.to_dict())
    else:
        record["error"] = {"error": type(exc).__name__, "message": str(exc)}

    return record
