import argparse

from cli.app import RunContext
from cli.arguments import float_list, function_spec, positive_float
from cli.router import CommandOutput, CommandRouter, arg
from core.laplace_debias import (
    LaplaceEstimator,
    affine_self_estimator,
    estimate,
    plug_in_bias_abs,
    plug_in_bias_mc,
    plug_in_bias_quad,
)

router = CommandRouter(tags=["laplace"])

BIAS_CHECK_HEADER = ["q", "b", "analytic_bias", "mc_bias", "mc_se"]


@router.command(
    "estimate",
    help="라플라스 노이즈 관측값에서 f(q) 의 불편 추정값 f(x) - b^2 f''(x) 계산",
    arguments=[
        arg("--function", type=function_spec, required=True, help="함수 (예: power:3, cos:0.5)"),
        arg("--b", type=positive_float, required=True, help="라플라스 스케일"),
        arg("--x", type=float_list, required=True, help="노이즈 관측값 (쉼표 구분)"),
    ],
)
def run_estimate(args: argparse.Namespace, context: RunContext) -> CommandOutput:
    f = args.function.build()
    estimator = LaplaceEstimator(f, args.b)
    values = [estimate(estimator, x) for x in args.x]
    result = {
        "function": f.label,
        "b": args.b,
        "x_tilde": args.x if len(args.x) > 1 else args.x[0],
        "estimate": values if len(values) > 1 else values[0],
    }
    affine = affine_self_estimator(f, args.b)
    if affine is not None:
        result["affine_form"] = {"alpha": affine[0], "beta": affine[1]}
    return CommandOutput(result=result)


@router.command(
    "bias-check",
    help="플러그인 추정 f(q + Z) 의 편향: 해석값과 몬테카를로 비교",
    arguments=[
        arg("--function", type=function_spec, required=True, help="함수 (예: abs, power:2)"),
        arg("--q", type=float_list, required=True, help="참값 목록"),
        arg("--b", type=float_list, required=True, help="라플라스 스케일 목록"),
        arg("--samples", type=int, default=10**6, help="몬테카를로 표본 수"),
    ],
    randomized=True,
)
def run_bias_check(args: argparse.Namespace, context: RunContext) -> CommandOutput:
    f = args.function.build()
    rows = []
    for b in args.b:
        for q in args.q:
            if f.name == "abs":
                analytic = plug_in_bias_abs(q, b)
            elif f.twice_differentiable:
                analytic = plug_in_bias_quad(f, q, b)
            else:
                analytic = ""
            mc_bias, mc_se = plug_in_bias_mc(f, q, b, args.samples, context.rng(len(rows)))
            rows.append([q, b, analytic, mc_bias, mc_se])
    return CommandOutput(
        header=BIAS_CHECK_HEADER,
        rows=rows,
    )
