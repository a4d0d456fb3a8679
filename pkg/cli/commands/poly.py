import argparse

from cli.app import RunContext
from cli.arguments import float_list, positive_float
from cli.router import CommandOutput, CommandRouter, arg
from core.errors import ValidationError
from core.function_model import Polynomial
from core.general_noise import debias_coeffs, moment_matrix
from core.noise import NoiseModel

router = CommandRouter(tags=["general-noise"])


def _noise_moments(args: argparse.Namespace, degree: int):
    given = [args.moments is not None, args.laplace is not None, args.gaussian is not None]
    if sum(given) != 1:
        raise ValidationError("--moments, --laplace, --gaussian 중 정확히 하나를 지정해야 합니다")
    if args.laplace is not None:
        return NoiseModel.laplace(args.laplace).moment_vector(degree)
    if args.gaussian is not None:
        return NoiseModel.gaussian(args.gaussian).moment_vector(degree)
    return args.moments


@router.command(
    "poly-debias",
    help="임의 노이즈 모멘트로 다항식 f 의 불편 추정 다항식 계산",
    arguments=[
        arg("--coeffs", type=float_list, required=True, help="f 계수 (상수항부터, 예: 0,0,1 = q^2)"),
        arg("--moments", type=float_list, default=None, help="노이즈 원점 모멘트 (1,0,mu_2,...)"),
        arg("--laplace", type=positive_float, default=None, help="라플라스 스케일 b"),
        arg("--gaussian", type=positive_float, default=None, help="가우시안 표준편차"),
        arg("--x", type=float_list, default=None, help="추정량을 계산할 관측값"),
    ],
)
def run_poly_debias(args: argparse.Namespace, context: RunContext) -> CommandOutput:
    target = Polynomial(tuple(args.coeffs))
    moments = _noise_moments(args, target.degree)
    g = debias_coeffs(target, moments)
    result = {
        "target": list(target.coeffs),
        "coeffs": list(g.coeffs),
        "condition_number": moment_matrix(moments, target.degree).condition_number,
    }
    if args.x:
        result["x_tilde"] = args.x
        result["values"] = [g(x) for x in args.x]
    return CommandOutput(result=result)
