from dataclasses import dataclass, field
from typing import Any, Callable


@dataclass(frozen=True)
class Argument:
    """argparse add_argument 인자 묶음"""
    flags: tuple[str, ...]
    options: dict[str, Any]


def arg(*flags: str, **options: Any) -> Argument:
    return Argument(flags, options)


@dataclass
class CommandOutput:
    """
    명령 실행 결과.

    header/rows 가 있으면 표 (기본 CSV), 없으면 result 를 JSON 으로 출력합니다.
    attachments 는 추가로 기록할 파일 (경로 -> 내용) 입니다.
    """
    result: dict[str, Any] = field(default_factory=dict)
    header: list[str] | None = None
    rows: list[list[Any]] | None = None
    attachments: dict[str, str] = field(default_factory=dict)

    @property
    def is_table(self) -> bool:
        return self.header is not None


@dataclass(frozen=True)
class Command:
    name: str
    help: str
    arguments: tuple[Argument, ...]
    handler: Callable[..., CommandOutput]
    randomized: bool
    tags: tuple[str, ...]


class CommandRouter:
    """
    하위 명령 묶음. 모듈마다 router 를 만들고 데코레이터로 명령을 등록한 뒤
    CliApp.include_router 로 연결합니다.
    """

    def __init__(self, tags: list[str] | None = None):
        self.tags = tuple(tags or ())
        self.commands: list[Command] = []

    def command(
        self,
        name: str,
        help: str,
        arguments: list[Argument] | None = None,
        randomized: bool = False,
    ):
        def decorator(handler: Callable[..., CommandOutput]):
            self.commands.append(
                Command(name, help, tuple(arguments or ()), handler, randomized, self.tags)
            )
            return handler

        return decorator
