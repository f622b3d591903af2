import json
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, validator

from pluriperiod.core.config import settings


class CheckRecord(BaseModel):
    check_id: str
    params: Dict[str, Any] = Field(default_factory=dict)
    lhs: Any = None
    rhs: Any = None
    abs_err: Optional[float] = None
    rel_err: Optional[float] = None
    budget: Optional[float] = None
    passed: bool = Field(False, alias="pass")
    error: Optional[Dict[str, Any]] = None
    extra: Optional[Dict[str, Any]] = None

    class Config:
        populate_by_name = True


class CohomologyRecord(BaseModel):
    g: int
    m: int
    dimM: int
    dimZ1: int
    dimB1: int
    dimH1: int
    dimInvariants: int
    sv_gap: Optional[float] = None


class ClassicalRecord(BaseModel):
    branch_points: List[float]
    period_matrix: List[List[List[float]]]
    rel1_residual: float
    rel2_min_eig: float
    orientation_flipped: bool


class Report(BaseModel):
    schema_version: int = Field(default_factory=lambda: settings.REPORT_SCHEMA_VERSION)
    tool_version: str = Field(default_factory=lambda: settings.APP_VERSION)
    suite: str
    config: Dict[str, Any]
    checks: List[CheckRecord] = Field(default_factory=list)
    passed: bool = Field(False, alias="pass")
    wall_clock_seconds: float = 0.0

    class Config:
        populate_by_name = True

    @validator("checks")
    def validate_unique_ids(cls, v):
        seen = set()
        for record in v:
            if record.check_id in seen:
                raise ValueError(f"duplicate check id {record.check_id}")
            seen.add(record.check_id)
        return v

    def to_dict(self) -> Dict[str, Any]:
        return self.model_dump(by_alias=True, exclude_none=False)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)
