import argparse

from cli.app import RunContext
from cli.arguments import float_list, function_spec, int_grid, positive_float
from cli.router import CommandOutput, CommandRouter, arg
from core.config import MC_TOLERANCE_SE
from core.errors import ValidationError
from core.extension_optimizer import ExtensionProblem, PriorMeasure, g_full, solve
from core.laplace_debias import LaplaceEstimator
from core.mean_mechanisms import Dataset, MssParams, MuParams, run_mss_many, run_mu_many
from core.montecarlo import mc_mean, within_tolerance
from core.noise import NoiseModel, sample_many
from core.prdp import TransformSpec, transform_release_many
from models.specs import FunctionSpec

router = CommandRouter(tags=["monte-carlo"])

CHECKS = ["laplace", "extension", "mu", "mss", "prdp"]

MC_CHECK_HEADER = ["check", "param", "target", "mc_mean", "mc_se", "z", "passed"]


def _require(args: argparse.Namespace, *names: str):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise ValidationError(f"{args.check} 검사에 필요한 인자가 없습니다: {', '.join(missing)}")


def _cases(args: argparse.Namespace):
    """(파라미터 값, 목표값, draw) 목록"""
    if args.check == "laplace":
        _require(args, "b", "q")
        estimator = LaplaceEstimator(args.function.build(), args.b)
        noise = NoiseModel.laplace(args.b)
        return [
            (q, estimator.f.value_at(q), lambda rng, n, q=q: estimator(q + sample_many(noise, rng, n)))
            for q in args.q
        ]

    if args.check == "extension":
        _require(args, "b", "q", "L")
        f = args.function.build()
        problem = ExtensionProblem(f=f, L=args.L, k=args.k, b=args.b,
                                   prior=PriorMeasure.discrete([(args.L, 1.0)]))
        solution = solve(problem)
        noise = NoiseModel.laplace(args.b)
        return [
            (q, f.value_at(q), lambda rng, n, q=q: g_full(solution, q + sample_many(noise, rng, n)))
            for q in args.q
        ]

    if args.check in ("mu", "mss"):
        _require(args, "eps1", "eps2", "n")
        if args.check == "mu":
            params = MuParams.build(args.eps1, args.eps2, k=args.k, L=args.L or 1.0)
            runner = run_mu_many
        else:
            params = MssParams.from_budget(args.eps1, args.eps2)
            runner = run_mss_many
        cases = []
        for n in args.n:
            d = Dataset(n=n, s=args.m * n)
            cases.append((n, args.m, lambda rng, size, d=d: runner(d, params, rng, size)[1]))
        return cases

    _require(args, "b", "q")
    spec = TransformSpec.kth_root(args.root, args.a, args.b)
    return [(q, q, lambda rng, n, q=q: transform_release_many(q, spec, rng, n)) for q in args.q]


@router.command(
    "mc-check",
    help="추정량/메커니즘의 불편성을 몬테카를로로 검사 (check, param, target, mc_mean, mc_se, z, passed)",
    arguments=[
        arg("--check", choices=CHECKS, required=True, help="검사 대상"),
        arg("--function", type=function_spec, default=FunctionSpec(name="inverse"), help="laplace/extension 함수"),
        arg("--b", type=positive_float, default=None, help="라플라스 스케일"),
        arg("--q", type=float_list, default=None, help="참값 목록"),
        arg("--L", type=float, default=None, help="extension/mu 하한"),
        arg("--k", type=int, default=10, help="확장 차수"),
        arg("--eps1", type=positive_float, default=None),
        arg("--eps2", type=positive_float, default=None),
        arg("--n", type=int_grid, default=None, help="레코드 수 목록 (mu/mss)"),
        arg("--m", type=float, default=0.5, help="고정 평균 (mu/mss)"),
        arg("--root", type=int, default=2, help="prdp 변환 x^(1/root)"),
        arg("--a", type=float, default=0.0, help="prdp 오프셋"),
        arg("--samples", type=int, default=10**6, help="검사당 표본 수"),
    ],
    randomized=True,
)
def run_mc_check(args: argparse.Namespace, context: RunContext) -> CommandOutput:
    rows = []
    for i, (param, target, draw) in enumerate(_cases(args)):
        estimate = mc_mean(
            draw,
            args.samples,
            context.seed,
            streams=context.streams,
            n_jobs=context.n_jobs,
            stream_offset=i * context.streams,
        )
        rows.append([
            args.check,
            param,
            target,
            estimate.mean,
            estimate.std_err,
            estimate.z_score(target),
            within_tolerance(estimate, target, MC_TOLERANCE_SE),
        ])
    return CommandOutput(
        header=MC_CHECK_HEADER,
        rows=rows,
    )
