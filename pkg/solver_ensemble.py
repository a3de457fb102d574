import os
import math
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from analytic_reference import ReferenceField, SmoothStreamField, project_to_grid
from errors import ConfigError, NonPhysicalState, NotConverged
from euler_schemes import NOMINAL_ORDERS, STEPPERS, BoundaryPadding, stable_time_step
from flow_field import ConservedField, GridSpec

# 로그 디렉토리 생성
os.makedirs("logs", exist_ok=True)

# 로깅 설정
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    handlers=[
        logging.FileHandler("logs/solver_ensemble.log"),
        logging.StreamHandler()
    ]
)
logger = logging.getLogger("solver_ensemble")

AV_KINDS = ("none", "second", "fourth")


@dataclass(frozen=True)
class SchemeConfig:
    """
    앙상블 구성원 하나의 설정

    Args:
        scheme_id: cir1 | maccormack | lax_wendroff2 | muscl_hllc2 | weno3
        nominal_order: 공칭 근사 차수 (없으면 스킴 기본값)
        av_kind: none | second | fourth
        av_mu: 인공 점성 계수
        limiter: minmod | vanleer (MUSCL 전용)
        cfl: 쿠랑 수
        conv_tol: 상대 잔차 수렴 기준
        max_iters: 최대 반복 수
        name: 보고서용 이름 (없으면 자동 생성)
    """
    scheme_id: str
    nominal_order: Optional[int] = None
    av_kind: str = "none"
    av_mu: float = 0.0
    limiter: str = "minmod"
    cfl: float = 0.4
    conv_tol: float = 1e-8
    max_iters: int = 200000
    name: Optional[str] = None

    def __post_init__(self):
        if self.scheme_id not in STEPPERS:
            raise ConfigError(f"지원하지 않는 스킴입니다: {self.scheme_id}")
        if self.av_kind not in AV_KINDS:
            raise ConfigError(f"알 수 없는 인공 점성 종류: {self.av_kind}")
        if self.av_mu < 0.0:
            raise ConfigError(f"인공 점성 계수는 0 이상이어야 합니다: {self.av_mu}")
        if self.limiter not in ("minmod", "vanleer"):
            raise ConfigError(f"알 수 없는 제한자: {self.limiter}")
        if not 0.0 < self.cfl <= 1.0:
            raise ConfigError(f"CFL은 (0, 1] 범위여야 합니다: {self.cfl}")
        if not self.conv_tol > 0.0:
            raise ConfigError(f"수렴 기준은 양수여야 합니다: {self.conv_tol}")
        if self.max_iters < 1:
            raise ConfigError(f"최대 반복 수는 1 이상이어야 합니다: {self.max_iters}")

    @property
    def order(self) -> int:
        return self.nominal_order if self.nominal_order is not None else NOMINAL_ORDERS[self.scheme_id]

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        parts = [self.scheme_id]
        if self.scheme_id == "muscl_hllc2":
            parts.append(self.limiter)
        if self.av_kind != "none" and self.av_mu > 0.0:
            parts.append(f"av{2 if self.av_kind == 'second' else 4}_mu{self.av_mu:g}")
        return "_".join(parts)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SchemeConfig":
        known = {k: v for k, v in data.items() if k in cls.__dataclass_fields__}
        unknown = set(data) - set(known)
        if unknown:
            logger.warning(f"스킴 설정의 알 수 없는 키 무시: {sorted(unknown)}")
        if "scheme_id" not in known:
            raise ConfigError(f"스킴 설정에 scheme_id가 없습니다: {data}")
        return cls(**known)

    def as_dict(self) -> Dict[str, Any]:
        info = asdict(self)
        info["label"] = self.label
        info["nominal_order"] = self.order
        return info

    def replace(self, **changes) -> "SchemeConfig":
        info = asdict(self)
        info.update(changes)
        return SchemeConfig(**info)


@dataclass
class SolveResult:
    """정상 해 계산 결과"""
    scheme: SchemeConfig
    field: ConservedField
    iters: int
    residual_history: List[float] = field(default_factory=list)
    converged: bool = False

    @property
    def final_relative_residual(self) -> float:
        if not self.residual_history or self.residual_history[0] == 0.0:
            return 0.0
        return self.residual_history[-1] / self.residual_history[0]

    def as_dict(self) -> Dict[str, Any]:
        return {
            "scheme": self.scheme.as_dict(),
            "iters": self.iters,
            "converged": self.converged,
            "final_relative_residual": self.final_relative_residual,
        }


def default_ensemble(max_iters: int = 200000) -> List[SchemeConfig]:
    """
    기본 앙상블 7개 구성원

    구조가 다른 다섯 가지 커널에 MacCormack 인공 점성과 MUSCL 제한자 변형을 더함
    """
    return [
        SchemeConfig("cir1", cfl=0.5, max_iters=max_iters),
        SchemeConfig("maccormack", av_kind="second", av_mu=0.01, cfl=0.4, max_iters=max_iters),
        SchemeConfig("maccormack", av_kind="fourth", av_mu=0.01, cfl=0.4, max_iters=max_iters),
        SchemeConfig("lax_wendroff2", av_kind="second", av_mu=0.01, cfl=0.4, max_iters=max_iters),
        SchemeConfig("muscl_hllc2", limiter="minmod", cfl=0.4, max_iters=max_iters),
        SchemeConfig("muscl_hllc2", limiter="vanleer", cfl=0.4, max_iters=max_iters),
        SchemeConfig("weno3", cfl=0.4, max_iters=max_iters),
    ]


def _first_bad_node(q: np.ndarray, gamma: float):
    rho = q[..., 0]
    with np.errstate(invalid="ignore", divide="ignore"):
        p = (gamma - 1.0) * (q[..., 3] - 0.5 * (q[..., 1] ** 2 + q[..., 2] ** 2) / rho)
        good = np.isfinite(q).all(axis=-1) & (rho > 0.0) & (p > 0.0)
    if good.all():
        return None
    i, j = np.argwhere(~good)[0]
    return int(i), int(j)


def solve_steady(cfg: SchemeConfig, case: ReferenceField, grid: GridSpec,
                 outflow: str = "extrapolate", log_interval: int = 1000,
                 step_observer: Optional[Callable[[int, np.ndarray, np.ndarray, float, np.ndarray], None]] = None
                 ) -> SolveResult:
    """
    균일 초기 조건에서 의사 시간 전진으로 정상 해 계산

    밀도 시간 미분의 L2 노름이 첫 반복 값 대비 conv_tol 이하가 되거나
    max_iters에 도달하면 종료

    Args:
        cfg: 스킴 설정
        case: 경계 조건을 주는 정확해
        grid: 격자
        outflow: 오른쪽 경계 처리 ("extrapolate" 또는 "dirichlet")
        log_interval: 진행 로그 간격 (반복 수)
        step_observer: 각 단계 후 (반복, q_old, q_new, dt, 경계 순유출) 를 받는 콜백

    Returns:
        SolveResult (수렴하지 못해도 반환, converged=False)

    Raises:
        NonPhysicalState: 해가 발산해 비물리적 상태가 된 노드
    """
    gamma = case.freestream.gamma
    boundary = BoundaryPadding(grid, case, gamma, outflow)
    stepper = STEPPERS[cfg.scheme_id]
    q = ConservedField.uniform(grid, case.freestream).data

    history: List[float] = []
    converged = False
    iters = 0
    for iters in range(1, cfg.max_iters + 1):
        dt = stable_time_step(boundary.pad(q), grid, gamma, cfg.cfl)
        q_new, net_flux = stepper(q, boundary, dt, cfg)

        bad = _first_bad_node(q_new, gamma)
        if bad is not None:
            raise NonPhysicalState(f"{cfg.label}: 반복 {iters}에서 해가 발산했습니다", node=bad)
        if step_observer is not None:
            step_observer(iters, q, q_new, dt, net_flux)

        residual = float(np.sqrt(np.mean(((q_new[..., 0] - q[..., 0]) / dt) ** 2)))
        history.append(residual)
        q = q_new

        relative = residual / history[0] if history[0] > 0.0 else 0.0
        if log_interval and iters % log_interval == 0:
            logger.info(f"{cfg.label}: 반복 {iters}, 상대 잔차 {relative:.3e}")
        if relative <= cfg.conv_tol:
            converged = True
            break

    if converged:
        logger.info(f"{cfg.label}: {iters}회 반복 후 수렴")
    else:
        logger.warning(f"{cfg.label}: 최대 반복 {cfg.max_iters}회 내에 수렴하지 못했습니다 "
                       f"(상대 잔차 {history[-1] / history[0] if history[0] else 0.0:.3e})")
    return SolveResult(cfg, ConservedField(grid, q, gamma), iters, history, converged)


@dataclass
class OrderResult:
    """격자 수열 수렴 차수 측정 결과"""
    scheme: SchemeConfig
    spacings: List[float]
    errors: List[float]
    observed_order: float
    skipped: bool = False

    def as_dict(self) -> Dict[str, Any]:
        return {
            "scheme": self.scheme.label,
            "nominal_order": self.scheme.order,
            "spacings": self.spacings,
            "errors": self.errors,
            "observed_order": self.observed_order,
            "skipped": self.skipped,
        }


def verify_order(cfg: SchemeConfig, smooth_case: Optional[ReferenceField] = None,
                 sizes: Sequence[int] = (21, 41, 81),
                 solver: Callable[..., SolveResult] = solve_steady) -> OrderResult:
    """
    매끄러운 정확해에서 격자 수열 (h, h/2, h/4)로 관측 수렴 차수 측정

    네 경계 모두 정확해로 고정하고, 밀도 RMS 오차의 log-log 기울기를 반환.
    오차가 0이면 (정확해를 해로 넣은 경우) 측정을 건너뜀.

    Raises:
        NotConverged: 격자 하나라도 수렴하지 못했을 때
    """
    case = smooth_case if smooth_case is not None else SmoothStreamField()
    spacings: List[float] = []
    errors: List[float] = []
    for n in sizes:
        grid = GridSpec(n, n)
        result = solver(cfg, case, grid, outflow="dirichlet", log_interval=0)
        if not result.converged:
            raise NotConverged(f"{cfg.label}: {n}x{n} 격자에서 수렴하지 못했습니다")
        exact = project_to_grid(case, grid)
        error = float(np.sqrt(np.mean((result.field.density - exact.density) ** 2)))
        spacings.append(grid.hx)
        errors.append(error)
        logger.info(f"{cfg.label}: {n}x{n}, 밀도 RMS 오차 {error:.4e}")

    if not all(e > 0.0 for e in errors):
        logger.info(f"{cfg.label}: 오차가 0이라 차수 측정을 건너뜁니다")
        return OrderResult(cfg, spacings, errors, math.nan, skipped=True)
    slope = float(np.polyfit(np.log(spacings), np.log(errors), 1)[0])
    logger.info(f"{cfg.label}: 관측 차수 {slope:.3f} (공칭 {cfg.order})")
    return OrderResult(cfg, spacings, errors, slope)


def _run_member(cfg: SchemeConfig, case: ReferenceField, grid: GridSpec,
                outflow: str, log_interval: int) -> Dict[str, Any]:
    try:
        result = solve_steady(cfg, case, grid, outflow=outflow, log_interval=log_interval)
        return {"label": cfg.label, "status": "success", "message": "", "result": result}
    except NonPhysicalState as e:
        logger.warning(f"{cfg.label} 발산으로 앙상블에서 제외: {e}")
        return {"label": cfg.label, "status": "error", "message": str(e), "result": None}
    except Exception as e:
        logger.exception(f"{cfg.label} 계산 중 오류 발생: {e}")
        return {"label": cfg.label, "status": "error", "message": str(e), "result": None}


def run_ensemble(configs: Sequence[SchemeConfig], case: ReferenceField, grid: GridSpec,
                 jobs: int = 1, outflow: str = "extrapolate", log_interval: int = 1000) -> List[Dict[str, Any]]:
    """
    앙상블 구성원을 작업자 풀에서 독립적으로 계산

    Args:
        configs: 스킴 설정 목록
        case: 정확해 (경계 조건)
        grid: 격자
        jobs: 작업자 수
        outflow: 오른쪽 경계 처리
        log_interval: 진행 로그 간격

    Returns:
        설정 순서대로 {"label", "status", "message", "result"} 목록
    """
    jobs = max(1, int(jobs))
    logger.info(f"앙상블 계산 시작: 구성원 {len(configs)}개, 격자 {grid.nx}x{grid.ny}, 작업자 {jobs}")
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(_run_member, cfg, case, grid, outflow, log_interval) for cfg in configs]
        statuses = [f.result() for f in futures]

    failed = [s["label"] for s in statuses if s["status"] != "success"]
    if failed:
        logger.warning(f"실패한 구성원 {len(failed)}개: {failed}")
    logger.info(f"앙상블 계산 완료: 성공 {len(statuses) - len(failed)}/{len(statuses)}")
    return statuses
