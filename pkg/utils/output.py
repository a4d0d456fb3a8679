"""
출력 파일 작성

모든 출력은 같은 디렉토리의 임시 파일에 쓴 뒤 os.replace 로 교체합니다.
실행 도중 실패해도 부분적으로 쓰인 파일이 남지 않습니다.
"""
import csv
import io
import json
import logging
import os
import tempfile
from typing import Any, Iterable, Sequence

from models.release import ReleaseRecord, RunMetadata

logger = logging.getLogger(__name__)


def atomic_write_text(path: str, text: str):
    """임시 파일에 쓴 뒤 원자적으로 교체합니다."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
    logger.info(f"출력 저장: {path}")


def format_value(value: Any) -> Any:
    """float 는 repr 로 고정해 실행 간 바이트 단위로 같은 출력을 만듭니다."""
    if isinstance(value, float):
        return repr(value)
    return value


def metadata_lines(metadata: RunMetadata) -> list[str]:
    return [
        f"version={metadata.version}",
        f"command={metadata.command}",
        f"seed={metadata.seed if metadata.seed is not None else ''}",
        f"streams={metadata.streams}",
        f"flags={json.dumps(metadata.flags, sort_keys=True, default=str)}",
    ]


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]], metadata: RunMetadata) -> str:
    """
    '#' 주석으로 메타데이터를 적고 그 다음 줄에 헤더를 적은 CSV 문자열을 만듭니다.

    Args:
        header: 열 이름
        rows: 행 목록
        metadata: 실행 메타데이터

    Returns:
        CSV 문자열
    """
    buffer = io.StringIO()
    for line in metadata_lines(metadata):
        buffer.write(f"# {line}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buffer.getvalue()


def render_json(result: dict[str, Any], metadata: RunMetadata) -> str:
    record = ReleaseRecord(metadata=metadata, result=result)
    return record.model_dump_json(indent=2) + "\n"
