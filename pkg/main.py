import logging
import sys

from dotenv import load_dotenv

load_dotenv()

from cli.app import CliApp
from cli.commands import extension, laplace, mc_check, mean, poly, prdp
from core.config import LOG_LEVEL, VERSION

app = CliApp(
    prog="debias",
    description="차분 프라이버시 공개값의 불편 후처리 도구",
    version=VERSION,
)

# 라우터 등록
app.include_router(laplace.router)
app.include_router(extension.router)
app.include_router(mean.router)
app.include_router(prdp.router)
app.include_router(poly.router)
app.include_router(mc_check.router)


def main(argv: list[str] | None = None) -> int:
    # 로그는 stderr 로 보내 표준출력에는 결과만 남김
    logging.basicConfig(
        level=LOG_LEVEL,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    return app.run(argv)


if __name__ == "__main__":
    sys.exit(main())
