import os
import sys
import json
import logging
import argparse
from typing import Any, Dict, List, Optional

from concentration_mc import run_from_config
from config_loader import ConfigLoader, ExperimentConfig
from errors import WorkbenchError
from experiment_runner import ExperimentRunner

# 로그 디렉토리 생성
os.makedirs("logs", exist_ok=True)

# 로깅 설정
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    handlers=[
        logging.FileHandler("logs/main.log"),
        logging.StreamHandler()
    ]
)
logger = logging.getLogger("main")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVALID = 2


def show_status(config: ExperimentConfig, command: str, output_dir: str) -> None:
    """실행 설정 요약 출력"""
    logger.info("=" * 60)
    logger.info(f"충격파 간섭 오차 추정 워크벤치: {command}")
    logger.info("=" * 60)
    logger.info(f"사례: {config.case}, M={config.mach}, gamma={config.gamma}")
    logger.info(f"격자: {config.nx}x{config.ny}, 마스크 여백 {config.mask_margin}, 변수 {config.error_variables}")
    logger.info(f"스킴: {', '.join(s.label for s in config.schemes)}")
    logger.info(f"출력 디렉토리: {output_dir}")
    logger.info("=" * 60)


def parse_arguments(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """
    명령줄 인자 파싱

    Returns:
        argparse.Namespace: 파싱된 인자
    """
    parser = argparse.ArgumentParser(description='정상 오일러 해 앙상블의 오차 추정 워크벤치')
    parser.add_argument('--init', action='store_true', help='기본 설정 파일 생성 후 종료')
    parser.add_argument('--config-dir', default='config', help='설정 디렉토리')

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='실험 설정 JSON 경로')
    common.add_argument('--out', help='출력 디렉토리 (설정의 output_dir 대신)')
    common.add_argument('--jobs', type=int, help='작업자 수')

    sub = parser.add_subparsers(dest='command')
    sub.add_parser('solve', parents=[common], help='정확해 확인 후 앙상블 계산, 해 파일 저장')
    sub.add_parser('analyze', parents=[common], help='저장된 해로 오차, 각도, 추정기 계산')
    sub.add_parser('report', parents=[common], help='estimators.json 에서 효율 지수 재계산 후 검사')
    sub.add_parser('validate', parents=[common], help='솔버 없이 정확해 영역 표와 잔차 출력')
    sub.add_parser('run', parents=[common], help='solve + analyze 전체 실행')
    mc = sub.add_parser('mc-orthogonality', parents=[common], help='고차원 직교성 몬테카를로 검증')
    mc.add_argument('--dims', type=int, nargs='+', help='차원 N 목록')
    mc.add_argument('--deltas', type=float, nargs='+', help='delta 목록')
    mc.add_argument('--samples', type=int, help='표본 수')
    mc.add_argument('--seed', type=int, help='난수 시드')
    return parser.parse_args(argv)


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    values = {"output_dir": args.out, "jobs": args.jobs}
    if args.command == 'mc-orthogonality':
        values.update({"mc_dims": args.dims, "mc_deltas": args.deltas,
                       "mc_samples": args.samples, "seed": args.seed})
    return values


def run_command(args: argparse.Namespace, config: ExperimentConfig) -> int:
    """하위 명령 실행, 종료 코드 반환"""
    if args.command == 'mc-orthogonality':
        table = run_from_config(config.mc_dims, config.mc_deltas, config.mc_samples, config.seed,
                                config.output_dir, config.jobs)
        logger.info("\n" + table[["N", "delta", "empirical", "bound", "within_3sigma"]].to_string(index=False))
        return EXIT_OK if table["within_3sigma"].all() else EXIT_FAILED

    runner = ExperimentRunner(config)
    if args.command == 'validate':
        result = runner.validate_only()
        logger.info(json.dumps({k: v for k, v in result["summary"].items() if k != "regions"},
                               indent=2, ensure_ascii=False, default=str))
        return EXIT_OK
    if args.command == 'solve':
        runner.validate_only()
        statuses = runner.solve_ensemble()
        return EXIT_OK if any(s["status"] == "success" for s in statuses) else EXIT_FAILED
    if args.command == 'analyze':
        report = runner.analyze()
    elif args.command == 'run':
        report = runner.run_experiment()
    else:
        result = runner.report()
        logger.info(result["message"])
        return EXIT_OK if result["status"] == "success" else EXIT_FAILED

    stats = report.angle_statistics()
    logger.info(f"beta 평균 {stats['beta']['mean']:.2f}°, alpha 평균 {stats.get('alpha', {}).get('mean', float('nan')):.2f}°")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """메인 실행 함수"""
    # 명령줄 인자 파싱
    args = parse_arguments(argv)
    loader = ConfigLoader(args.config_dir)

    # 초기화 모드 처리
    if args.init:
        created = loader.create_default_configs()
        logger.info(f"기본 설정 파일이 생성되었습니다: {', '.join(created)}")
        return EXIT_OK

    if not args.command:
        logger.error("하위 명령이 필요합니다: solve, analyze, report, validate, run, mc-orthogonality")
        return EXIT_INVALID

    try:
        config = loader.load_experiment_config(args.config, _overrides(args))
        show_status(config, args.command, config.output_dir)
        return run_command(args, config)
    except (WorkbenchError, ValueError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_INVALID
    except KeyboardInterrupt:
        logger.info("사용자에 의한 프로그램 종료")
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
