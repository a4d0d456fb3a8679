import argparse

from cli.app import RunContext
from cli.arguments import int_grid, positive_float, prior_spec
from cli.router import CommandOutput, CommandRouter, arg
from core.errors import ValidationError
from core.mean_mechanisms import (
    Dataset,
    MssParams,
    MuParams,
    crossover,
    run_mss,
    run_mu,
    sd_sweep,
)
from models.release import Mechanism
from utils.plotting import render_sweep_svg

router = CommandRouter(tags=["mean"])

_BUDGET_ARGUMENTS = [
    arg("--eps1", type=positive_float, required=True, help="표본 크기 예산"),
    arg("--eps2", type=positive_float, required=True, help="평균 예산"),
    arg("--k", type=int, default=10, help="1/n 확장 차수"),
    arg("--L", type=float, default=1.0, help="표본 크기 하한"),
    arg("--beta", type=positive_float, default=None, help="M_SS beta (기본 eps2/12)"),
    arg("--tau", type=positive_float, default=None, help="M_SS tau (기본 sqrt(3)/eps2)"),
]


def _mss_params(args: argparse.Namespace) -> MssParams:
    if args.beta is None and args.tau is None:
        return MssParams.from_budget(args.eps1, args.eps2)
    if args.beta is None or args.tau is None:
        raise ValidationError("--beta 와 --tau 는 함께 지정해야 합니다")
    return MssParams(eps1=args.eps1, eps2=args.eps2, beta=args.beta, tau=args.tau)


@router.command(
    "mean-sweep",
    help="n 격자에서 M_U 와 M_SS 의 표준편차 비교 (n, sd_mu, sd_mss, ratio)",
    arguments=[
        *_BUDGET_ARGUMENTS,
        arg("--m", type=float, default=0.5, help="고정 평균"),
        arg("--n", type=int_grid, default=list(range(1, 301)), help="n 격자 (예: 1:300)"),
        arg("--prior", type=prior_spec, default=None, help="확장 사전분포 (최적해에는 영향 없음)"),
        arg("--plot", default=None, help="SVG 그래프 경로"),
    ],
)
def run_mean_sweep(args: argparse.Namespace, context: RunContext) -> CommandOutput:
    mu = MuParams.build(args.eps1, args.eps2, k=args.k, L=args.L,
                        prior=args.prior.build() if args.prior else None)
    mss = _mss_params(args)
    rows = sd_sweep(args.n, args.m, mu, mss, n_jobs=context.n_jobs)

    attachments = {args.plot: render_sweep_svg(rows)} if args.plot else {}
    return CommandOutput(
        result={"crossover": crossover(rows)},
        header=["n", "sd_mu", "sd_mss", "ratio"],
        rows=[[r.n, r.sd_mu, r.sd_mss, r.ratio] for r in rows],
        attachments=attachments,
    )


@router.command(
    "mean-release",
    help="데이터셋 (n, s) 에 M_U 또는 M_SS 를 적용해 (n~, m~) 공개",
    arguments=[
        *_BUDGET_ARGUMENTS,
        arg("--records", type=int, required=True, help="레코드 수 n"),
        arg("--sum", type=float, required=True, help="속성 합 s (각 값은 [0, 1])"),
        arg("--mechanism", choices=[m.value for m in Mechanism], default=Mechanism.M_U.value),
    ],
    randomized=True,
)
def run_mean_release(args: argparse.Namespace, context: RunContext) -> CommandOutput:
    d = Dataset(n=args.records, s=args.sum)
    if args.mechanism == Mechanism.M_U.value:
        params = MuParams.build(args.eps1, args.eps2, k=args.k, L=args.L)
        release = run_mu(d, params, context.rng())
    else:
        params = _mss_params(args)
        release = run_mss(d, params, context.rng())
    # 분산은 참값 n, s 에 의존하므로 공개 결과에 넣지 않음
    return CommandOutput(result=release.model_dump(mode="json"))
