from pydantic import BaseModel, Field

from core.errors import ValidationError
from core.extension_optimizer import PriorMeasure
from core.function_model import SmoothFunction, builtin


def _parse_floats(text: str, what: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"{what} 의 숫자 형식이 올바르지 않습니다: {text}")


class FunctionSpec(BaseModel):
    """
    CLI 함수 표기 "이름[:파라미터,...]" (예: "power:3", "cos:0.5", "poly:1,0,2")
    """
    name: str
    params: list[float] = Field(default_factory=list)

    @classmethod
    def parse(cls, text: str) -> "FunctionSpec":
        name, _, rest = text.strip().partition(":")
        if not name:
            raise ValidationError(f"함수 표기가 비어 있습니다: {text!r}")
        return cls(name=name, params=_parse_floats(rest, "함수 파라미터") if rest else [])

    def build(self) -> SmoothFunction:
        return builtin(self.name, self.params)


class PriorSpec(BaseModel):
    """
    CLI 사전분포 표기.

    - "uniform:lo:hi"
    - "point:q" (한 점)
    - "discrete:q1=w1,q2=w2"
    """
    kind: str
    atoms: list[tuple[float, float]] = Field(default_factory=list)
    lo: float | None = None
    hi: float | None = None

    @classmethod
    def parse(cls, text: str) -> "PriorSpec":
        kind, _, rest = text.strip().partition(":")
        try:
            if kind == "uniform":
                lo, hi = rest.split(":")
                return cls(kind=kind, lo=float(lo), hi=float(hi))
            if kind == "point":
                return cls(kind="discrete", atoms=[(float(rest), 1.0)])
            if kind == "discrete":
                atoms = []
                for item in rest.split(","):
                    q, _, w = item.partition("=")
                    atoms.append((float(q), float(w) if w else 1.0))
                return cls(kind=kind, atoms=atoms)
        except ValueError:
            raise ValidationError(f"사전분포 표기 형식이 올바르지 않습니다: {text}")
        raise ValidationError(f"알 수 없는 사전분포 종류입니다: {kind} (uniform, point, discrete)")

    def build(self) -> PriorMeasure:
        if self.kind == "uniform":
            return PriorMeasure.uniform(self.lo, self.hi)
        return PriorMeasure.discrete(self.atoms)
