import argparse

from cli.app import RunContext
from cli.arguments import float_list, function_spec, positive_float, prior_spec
from cli.router import CommandOutput, CommandRouter, arg
from core.errors import ValidationError
from core.extension_optimizer import (
    ExtensionProblem,
    estimator_expectation,
    estimator_variance,
    solve,
    solve_upper,
)
from models.specs import FunctionSpec, PriorSpec
from utils.output import render_csv

router = CommandRouter(tags=["extension"])

TABLE_HEADER = ["q", "E[g]", "Var[g]"]


@router.command(
    "optimize",
    help="하한 L 아래로 f 를 차수 k 다항식으로 확장하고 최적 불편 추정량 계산",
    arguments=[
        arg("--function", type=function_spec, default=FunctionSpec(name="inverse"), help="함수 (기본 inverse)"),
        arg("--L", type=float, required=True, help="하한 (--upper 이면 상한)"),
        arg("--k", type=int, default=10, help="확장 다항식 차수"),
        arg("--b", type=positive_float, required=True, help="라플라스 스케일"),
        arg("--prior", type=prior_spec, default=None, help="사전분포 (uniform:lo:hi, point:q, discrete:q=w,...)"),
        arg("--upper", action="store_true", help="q <= L (상한) 인 경우"),
        arg("--q-grid", type=float_list, default=None, help="기댓값/분산 표를 계산할 q 목록"),
        arg("--table-out", default=None, help="(q, E[g], Var[g]) CSV 경로 (--q-grid 필요)"),
    ],
)
def run_optimize(args: argparse.Namespace, context: RunContext) -> CommandOutput:
    f = args.function.build()
    prior = (args.prior or PriorSpec(kind="discrete", atoms=[(args.L, 1.0)])).build()
    if args.upper:
        solution = solve_upper(f, args.L, args.k, args.b, prior)
    else:
        solution = solve(ExtensionProblem(f=f, L=args.L, k=args.k, b=args.b, prior=prior))

    result = {
        "function": f.label,
        "L": args.L,
        "k": args.k,
        "b": args.b,
        "upper": args.upper,
        "a": list(solution.g.coeffs),
        "h": list(solution.h.coeffs),
        "laguerre": list(solution.laguerre),
        "objective": solution.objective,
        "taylor_objective": solution.taylor_objective,
        "grad_norm": solution.grad_norm,
        "condition_number": solution.condition_number,
        "singular": solution.singular,
        "constraint_residuals": list(solution.constraint_residuals()),
    }
    if args.table_out and not args.q_grid:
        raise ValidationError("--table-out 에는 --q-grid 가 필요합니다")

    attachments = {}
    if args.q_grid:
        rows = [[q, estimator_expectation(solution, q), estimator_variance(solution, q)] for q in args.q_grid]
        result["table"] = [{"q": q, "expectation": e, "variance": v} for q, e, v in rows]
        if args.table_out:
            attachments[args.table_out] = render_csv(TABLE_HEADER, rows, context.metadata)
    return CommandOutput(result=result, attachments=attachments)
