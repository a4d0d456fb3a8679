import os
from dotenv import load_dotenv

load_dotenv()

VERSION = "1.0.0"

# 난수 설정 (시드가 없으면 실행 시 생성 후 메타데이터에 기록)
_seed = os.environ.get("DEBIAS_SEED")
DEFAULT_SEED = int(_seed) if _seed else None
DEFAULT_STREAMS = int(os.environ.get("DEBIAS_STREAMS", "1"))

# joblib 워커 수 (1이면 순차 실행)
N_JOBS = int(os.environ.get("DEBIAS_N_JOBS", "1"))

# 수치 적분 상대 허용오차
QUAD_EPSREL = float(os.environ.get("DEBIAS_QUAD_EPSREL", "1e-10"))

# 몬테카를로 검증 허용 범위 (표준오차 배수)
MC_TOLERANCE_SE = float(os.environ.get("DEBIAS_MC_TOLERANCE_SE", "4.0"))

LOG_LEVEL = os.environ.get("DEBIAS_LOG_LEVEL", "INFO")

# 수치 안정성 한계
MAX_EXTENSION_DEGREE = 30
MAX_MOMENT_DEGREE = 16
