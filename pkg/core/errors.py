class DebiasError(Exception):
    """디바이어싱 라이브러리 공통 예외"""


class ValidationError(DebiasError, ValueError):
    """입력 전제 조건 위반"""


class QuadratureError(DebiasError, RuntimeError):
    """수치 적분이 허용오차 안에 수렴하지 않음"""

    def __init__(self, message: str, error_estimate: float):
        super().__init__(f"{message} (오차 추정치: {error_estimate:.3e})")
        self.error_estimate = error_estimate
