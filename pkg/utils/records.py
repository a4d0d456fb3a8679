import csv
import math

from core.errors import ValidationError


def read_records(path: str) -> list[float]:
    """
    한 줄에 0 이상의 값 하나가 있는 CSV 를 읽습니다.

    빈 줄과 '#' 주석은 건너뛰고, 첫 줄이 숫자가 아니면 헤더로 봅니다.

    Raises:
        ValidationError: 파일이 없거나 값이 음수, 무한대 또는 숫자가 아닌 경우
    """
    try:
        with open(path, newline="", encoding="utf-8") as f:
            rows = [row for row in csv.reader(f) if row and not row[0].lstrip().startswith("#")]
    except FileNotFoundError:
        raise ValidationError(f"레코드 파일을 찾을 수 없습니다: {path}")

    values = []
    for line_no, row in enumerate(rows, start=1):
        if len(row) != 1:
            raise ValidationError(f"{path}:{line_no} 한 줄에 값 하나만 있어야 합니다: {row}")
        try:
            value = float(row[0])
        except ValueError:
            if line_no == 1:
                continue
            raise ValidationError(f"{path}:{line_no} 숫자가 아닙니다: {row[0]}")
        if not (math.isfinite(value) and value >= 0):
            raise ValidationError(f"{path}:{line_no} 값은 0 이상의 유한한 수여야 합니다: {value}")
        values.append(value)
    return values
