from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, validator

from pluriperiod.core.config import settings

SuiteId = Literal[
    "bol",
    "antiderivative",
    "periods",
    "cocycle",
    "cohomology",
    "bilinear",
    "edge-moments",
    "cross-weight",
    "classical",
    "all",
]

POINCARE_SUITES = {"cocycle", "bilinear", "edge-moments", "cross-weight", "all"}
TWO_WEIGHT_SUITES = {"cross-weight", "all"}


class RunConfig(BaseModel):
    suite: SuiteId = "all"
    m: int = Field(default_factory=lambda: settings.DEFAULT_M)
    n: int = -2
    radius: float = Field(default_factory=lambda: settings.DEFAULT_RADIUS, ge=0.0)
    seeds: List[int] = Field(default_factory=lambda: list(settings.DEFAULT_SEEDS), min_length=1)
    tol: float = Field(default_factory=lambda: settings.TOL_POINCARE, gt=0.0)
    tau1: Optional[Tuple[float, float]] = None
    lam: float = Field(default_factory=lambda: settings.DEFAULT_LAMBDA, gt=1.0)
    genus: int = Field(2, ge=2)
    element_cap: int = Field(default_factory=lambda: settings.ELEMENT_CAP, gt=0)
    threads: int = Field(default_factory=lambda: settings.MAX_THREADS, ge=1)
    out: Optional[str] = None

    @validator("m")
    def validate_m(cls, v, values):
        if v > 0:
            raise ValueError("m must be <= 0")
        if -2 * v > settings.MAX_NEG_TWO_M:
            raise ValueError(f"-2m must not exceed {settings.MAX_NEG_TWO_M}")
        if values.get("suite") in POINCARE_SUITES and v > -1:
            raise ValueError("Poincare suites need m <= -1")
        return v

    @validator("n")
    def validate_n(cls, v, values):
        if values.get("suite") in TWO_WEIGHT_SUITES and "m" in values and not v < values["m"]:
            raise ValueError("cross-weight suites need n < m")
        if -2 * v > settings.MAX_NEG_TWO_M:
            raise ValueError(f"-2n must not exceed {settings.MAX_NEG_TWO_M}")
        return v

    @validator("seeds")
    def validate_seeds(cls, v):
        if any(s < 0 for s in v):
            raise ValueError("seed exponents must be nonnegative")
        return v

    @validator("tau1")
    def validate_tau1(cls, v):
        if v is not None and not v[1] > 0:
            raise ValueError("tau1 must lie in the upper half-plane")
        return v

    @property
    def tau1_complex(self) -> Optional[complex]:
        return None if self.tau1 is None else complex(self.tau1[0], self.tau1[1])
