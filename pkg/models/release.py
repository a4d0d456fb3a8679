from enum import Enum
from typing import Any

from pydantic import BaseModel, Field, computed_field


class Mechanism(str, Enum):
    M_U = "M_U"
    M_SS = "M_SS"


class RunMetadata(BaseModel):
    """모든 출력에 포함되는 재현 정보"""
    version: str
    command: str
    seed: int | None = None
    streams: int = 1
    flags: dict[str, Any] = Field(default_factory=dict)


class MeanRelease(BaseModel):
    """평균 공개 결과 (n~, m~)"""
    n_tilde: float
    m_tilde: float
    mechanism: Mechanism
    seed: int
    stream_id: int
    eps1: float
    eps2: float

    @computed_field
    @property
    def total_epsilon(self) -> float:
        return self.eps1 + self.eps2


class PolicyEntry(BaseModel):
    """기록 값 c 에 대한 프라이버시 손실 P"""
    c: float
    P: float


class PrdpRelease(BaseModel):
    """기록별 DP 합 공개 결과. 참값은 포함하지 않습니다."""
    v_tilde: float
    S_tilde: float
    transform: str
    a: float
    b: float
    seed: int
    stream_id: int
    policy_table: list[PolicyEntry] = Field(default_factory=list)


class ReleaseRecord(BaseModel):
    """CLI 가 기록하는 공개 결과 봉투 (메타데이터 + 결과)"""
    metadata: RunMetadata
    result: dict[str, Any]
