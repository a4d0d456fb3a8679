import argparse

from cli.app import RunContext
from cli.arguments import float_list, positive_float
from cli.router import CommandOutput, CommandRouter, arg
from core.prdp import TransformSpec, policy_table, transform_release
from utils.records import read_records

router = CommandRouter(tags=["prdp"])


@router.command(
    "prdp-sum",
    help="레코드 합을 k제곱근 변환 메커니즘으로 공개 (기록별 DP)",
    arguments=[
        arg("--records", required=True, help="한 줄에 0 이상의 값 하나인 CSV"),
        arg("--k", type=int, default=2, help="변환 f(x) = x^(1/k) 의 k (1 이면 항등)"),
        arg("--a", type=float, default=0.0, help="오프셋 a"),
        arg("--b", type=positive_float, default=1.0, help="라플라스 스케일"),
        arg("--policy-c", type=float_list, default=[1.0, 10.0, 100.0], help="정책 표를 계산할 기록 값"),
    ],
    randomized=True,
)
def run_prdp_sum(args: argparse.Namespace, context: RunContext) -> CommandOutput:
    values = read_records(args.records)
    spec = TransformSpec.kth_root(args.k, args.a, args.b)
    release = transform_release(sum(values), spec, context.rng())
    release.policy_table = policy_table(spec, args.policy_c)
    return CommandOutput(result=release.model_dump(mode="json"))
