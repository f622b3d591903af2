
from typing import List

from pydantic_settings import BaseSettings


class Settings(BaseSettings):


    APP_NAME: str = "pluriperiod"
    APP_VERSION: str = "1.0.0"
    REPORT_SCHEMA_VERSION: int = 1
    LOG_LEVEL: str = "INFO"
    MAX_THREADS: int = 1


    QUAD_NODES: int = 32
    QUAD_CHECK_NODES: int = 48
    QUAD_MAX_DEPTH: int = 20
    TOL_EXACT: float = 1e-10
    TOL_POINCARE: float = 1e-8
    CAUCHY_MIN_NODES: int = 64


    FIT_CENTER_IM: float = 2.0
    FIT_RADIUS: float = 0.5
    VANDERMONDE_COND_MAX: float = 1e8
    PERIOD_FLOOR: float = 1e-8
    PERIOD_DEFECT_FACTOR: float = 10.0
    MAX_NEG_TWO_M: int = 20


    RANK_REL_THRESHOLD: float = 1e-8
    RANK_GAP_MIN: float = 1e4
    COBOUNDARY_REL_TOL: float = 1e-6


    ELEMENT_CAP: int = 1_000_000
    EXPLORED_NODE_CAP: int = 20_000_000
    ENUMERATION_MARGIN_FACTOR: float = 2.0
    ELEMENT_KEY_SCALE: float = 1e-8
    EVAL_CHUNK: int = 256
    DEFAULT_RADIUS: float = 8.0
    DEFECT_SAFETY: float = 2.0
    DEFECT_MAX: float = 1e-3


    BUDGET_DIRECT: float = 10.0
    BUDGET_CANCELLATION: float = 1e3
    BUDGET_STOKES: float = 50.0


    DEFAULT_M: int = -1
    DEFAULT_SEEDS: List[int] = [0, 2]
    DEFAULT_LAMBDA: float = 2.0

    class Config:
        env_file = ".env"
        case_sensitive = True



settings = Settings()
