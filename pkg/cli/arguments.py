"""argparse type 변환 함수. 형식 오류는 ArgumentTypeError 로 바꿔 종료 코드 2 로 끝납니다."""
import argparse

from core.errors import ValidationError
from models.specs import FunctionSpec, PriorSpec


def float_list(text: str) -> list[float]:
    """"0,0.5,1" -> [0.0, 0.5, 1.0]"""
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"숫자 목록 형식이 올바르지 않습니다: {text}")
    if not values:
        raise argparse.ArgumentTypeError(f"빈 목록입니다: {text!r}")
    return values


def int_grid(text: str) -> list[int]:
    """
    정수 격자.

    "1:300" (양 끝 포함), "1:300:5" (간격 5), "1,5,50" (목록)
    """
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) not in (2, 3):
                raise ValueError
            start, stop = parts[0], parts[1]
            step = parts[2] if len(parts) == 3 else 1
            if step < 1 or stop < start:
                raise ValueError
            return list(range(start, stop + 1, step))
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"정수 격자 형식이 올바르지 않습니다: {text} (예: 1:300, 1:300:5, 1,5,50)"
        )


def function_spec(text: str) -> FunctionSpec:
    try:
        spec = FunctionSpec.parse(text)
        spec.build()
    except ValidationError as e:
        raise argparse.ArgumentTypeError(str(e))
    return spec


def prior_spec(text: str) -> PriorSpec:
    try:
        spec = PriorSpec.parse(text)
        spec.build()
    except ValidationError as e:
        raise argparse.ArgumentTypeError(str(e))
    return spec


def positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"숫자가 아닙니다: {text}")
    if not value > 0:
        raise argparse.ArgumentTypeError(f"양수여야 합니다: {text}")
    return value
