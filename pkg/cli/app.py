import argparse
import logging
import sys
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from cli.router import Command, CommandOutput, CommandRouter
from core.config import DEFAULT_SEED, DEFAULT_STREAMS, N_JOBS
from core.errors import DebiasError, ValidationError
from core.noise import RngStream
from models.release import RunMetadata
from utils.output import atomic_write_text, render_csv, render_json

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


@dataclass(frozen=True)
class RunContext:
    """명령 핸들러에 전달되는 실행 정보"""
    seed: int | None
    streams: int
    n_jobs: int
    metadata: RunMetadata

    def rng(self, stream_id: int = 0) -> RngStream:
        if self.seed is None:
            raise ValidationError("이 명령에는 시드가 필요합니다")
        return RngStream(self.seed, stream_id)


def _generate_seed() -> int:
    return int(np.random.SeedSequence().entropy % 2**63)


class CliApp:
    """하위 명령 디스패처. 라우터를 등록하고 run(argv) 로 실행합니다."""

    def __init__(self, prog: str, description: str, version: str):
        self.prog = prog
        self.description = description
        self.version = version
        self.commands: dict[str, Command] = {}

    def include_router(self, router: CommandRouter):
        for command in router.commands:
            if command.name in self.commands:
                raise ValueError(f"중복된 명령 이름입니다: {command.name}")
            self.commands[command.name] = command

    def _common_options(self) -> argparse.ArgumentParser:
        common = argparse.ArgumentParser(add_help=False)
        common.add_argument("--seed", type=int, default=None, help="난수 시드 (없으면 생성 후 기록)")
        common.add_argument("--streams", type=int, default=DEFAULT_STREAMS, help="몬테카를로 난수 스트림 수")
        common.add_argument("--n-jobs", type=int, default=N_JOBS, help="joblib 워커 수")
        common.add_argument("--out", default=None, help="출력 파일 경로 (없으면 표준출력)")
        common.add_argument("--format", choices=["csv", "json"], default=None, help="출력 형식")
        common.add_argument("--log-level", default=None, help="로그 레벨 (DEBUG, INFO, WARNING)")
        return common

    def build_parser(self) -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(
            prog=self.prog,
            description=self.description,
            formatter_class=argparse.RawDescriptionHelpFormatter,
            epilog="""
사용 예시:
  %(prog)s estimate --function power:3 --b 0.5 --x 2
  %(prog)s optimize --function inverse --L 1 --k 10 --b 2 --prior uniform:1:200
  %(prog)s mean-sweep --eps1 0.5 --eps2 0.5 --m 0.5 --k 10 --L 1 --n 1:300 --out sweep.csv
  %(prog)s prdp-sum --records data.csv --k 2 --a 0 --b 1 --seed 7 --out release.json
            """,
        )
        parser.add_argument("--version", action="version", version=f"%(prog)s {self.version}")
        subparsers = parser.add_subparsers(dest="command", required=True)
        common = self._common_options()
        for command in self.commands.values():
            sub = subparsers.add_parser(command.name, help=command.help, description=command.help,
                                        parents=[common])
            for argument in command.arguments:
                sub.add_argument(*argument.flags, **argument.options)
            sub.set_defaults(_command=command)
        return parser

    def _render(self, output: CommandOutput, fmt: str | None, metadata: RunMetadata) -> str:
        if output.is_table and fmt != "json":
            return render_csv(output.header, output.rows, metadata)
        if fmt == "csv":
            raise ValidationError(f"{metadata.command} 결과는 CSV 로 출력할 수 없습니다")
        result = dict(output.result)
        if output.is_table:
            result["rows"] = [dict(zip(output.header, row)) for row in output.rows]
        return render_json(result, metadata)

    def run(self, argv: Sequence[str] | None = None) -> int:
        """
        명령을 실행하고 종료 코드를 반환합니다.

        Returns:
            0 성공, 1 계산 실패, 2 입력 오류
        """
        parser = self.build_parser()
        try:
            args = parser.parse_args(argv)
        except SystemExit as e:
            return int(e.code) if isinstance(e.code, int) else EXIT_USAGE

        if args.log_level:
            logging.getLogger().setLevel(args.log_level.upper())

        command: Command = args._command
        seed = args.seed if args.seed is not None else DEFAULT_SEED
        if command.randomized and seed is None:
            seed = _generate_seed()
            logger.warning(f"시드가 지정되지 않아 생성했습니다: seed={seed}")

        flags = {
            key: value.model_dump() if hasattr(value, "model_dump") else value
            for key, value in sorted(vars(args).items())
            if not key.startswith("_") and key != "command"
        }
        metadata = RunMetadata(
            version=self.version,
            command=command.name,
            seed=seed if command.randomized else None,
            streams=args.streams,
            flags=flags,
        )
        context = RunContext(seed=seed, streams=args.streams, n_jobs=args.n_jobs, metadata=metadata)

        logger.info(f"=== {command.name} 시작 ===")
        try:
            output = command.handler(args, context)
            text = self._render(output, args.format, metadata)
            for path, content in output.attachments.items():
                atomic_write_text(path, content)
            if args.out:
                atomic_write_text(args.out, text)
            else:
                sys.stdout.write(text)
        except ValueError as e:
            # ValidationError 포함
            print(f"입력 오류: {e}", file=sys.stderr)
            return EXIT_USAGE
        except DebiasError as e:
            print(f"계산 실패: {e}", file=sys.stderr)
            return EXIT_FAILURE
        except OSError as e:
            print(f"파일 쓰기 실패: {e}", file=sys.stderr)
            return EXIT_FAILURE

        logger.info(f"=== {command.name} 완료 ===")
        return EXIT_OK
