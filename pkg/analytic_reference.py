import math
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from errors import NoRegularSolution
from flow_field import ConservedField, GridSpec
from gas_dynamics import (
    DEFAULT_GAMMA,
    ExpansionSolution,
    FlowState,
    Wave,
    fan_state_on_ray,
    jump_residuals,
    oblique_shock_downstream,
    shock_polar_match,
    theta_beta_m,
)

logger = logging.getLogger("analytic_reference")

# 기본 단일 충격파 앵커 (왼쪽 경계)
DEFAULT_OBLIQUE_ANCHOR = (0.0, 0.2)


def _direction(angle_deg: float) -> Tuple[float, float]:
    """단위 방향 벡터, 축 방향 각은 정확한 0/±1로 맞춤"""
    rad = math.radians(angle_deg)
    c, s = math.cos(rad), math.sin(rad)
    if abs(c) < 1e-12:
        c = 0.0
    if abs(s) < 1e-12:
        s = 0.0
    return c, s


@dataclass(frozen=True)
class Region:
    """
    꼭짓점에서 start_deg부터 반시계 방향으로 end_deg까지의 닫힌 부채꼴 영역

    state가 있으면 균일 상태, fan이 있으면 팽창 부채꼴 내부 자기상사 상태.
    full=True 이면 평면 전체.
    """
    name: str
    apex: Tuple[float, float]
    start_deg: float = 0.0
    end_deg: float = 360.0
    state: Optional[FlowState] = None
    fan: Optional[ExpansionSolution] = None
    full: bool = False

    @property
    def width_deg(self) -> float:
        width = (self.end_deg - self.start_deg) % 360.0
        return 360.0 if width == 0.0 else width

    def contains(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if self.full:
            return np.ones(np.broadcast(x, y).shape, dtype=bool)
        rx = x - self.apex[0]
        ry = y - self.apex[1]
        ax, ay = _direction(self.start_deg)
        bx, by = _direction(self.end_deg)
        after_start = ax * ry - ay * rx >= 0.0
        before_end = rx * by - ry * bx >= 0.0
        if self.width_deg <= 180.0:
            return after_start & before_end
        return after_start | before_end

    def primitive_values(self, x: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, ...]:
        """주어진 점들에서 (rho, u, v, p)"""
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if self.fan is None:
            s = self.state
            return tuple(np.full(x.shape, value) for value in (s.rho, s.u, s.v, s.p))

        head = self.fan.head_angle_deg
        out = np.empty((4,) + x.shape)
        for idx in np.ndindex(x.shape):
            ray = math.degrees(math.atan2(y[idx] - self.apex[1], x[idx] - self.apex[0]))
            ray = head + ((ray - head + 180.0) % 360.0 - 180.0)
            s = fan_state_on_ray(self.fan, ray)
            out[(slice(None),) + idx] = (s.rho, s.u, s.v, s.p)
        return tuple(out)

    def as_dict(self) -> Dict[str, Any]:
        info: Dict[str, Any] = {"name": self.name}
        if self.state is not None:
            info.update(self.state.as_dict())
            info["entropy"] = self.state.entropy
        if self.fan is not None:
            info["fan_head_deg"] = self.fan.head_angle_deg
            info["fan_tail_deg"] = self.fan.tail_angle_deg
        if not self.full:
            info["sector_deg"] = [self.start_deg, self.end_deg]
        return info


@dataclass(frozen=True)
class Discontinuity:
    """
    꼭짓점에서 나가는 불연속 반직선 (shock | slip | expansion)

    expansion은 head/tail 두 마하선 사이의 부채꼴
    """
    kind: str
    origin: Tuple[float, float]
    angle_deg: float
    upstream_region: str
    downstream_region: str
    upstream: FlowState
    downstream: FlowState
    tail_deg: Optional[float] = None

    def residuals(self) -> Dict[str, float]:
        if self.kind == "shock":
            return jump_residuals(self.upstream, self.downstream, self.angle_deg)
        if self.kind == "slip":
            return slip_residuals(self.upstream, self.downstream)
        return {}

    def as_dict(self) -> Dict[str, Any]:
        info = {
            "kind": self.kind,
            "origin": list(self.origin),
            "angle_deg": self.angle_deg,
            "between": [self.upstream_region, self.downstream_region],
            "residuals": self.residuals(),
        }
        if self.tail_deg is not None:
            info["tail_deg"] = self.tail_deg
        return info


def slip_residuals(lower: FlowState, upper: FlowState) -> Dict[str, float]:
    """슬립라인 압력 상대 차이와 유동 방향 차이 (rad)"""
    return {
        "pressure": abs(upper.p - lower.p) / lower.p,
        "flow_angle_rad": abs(math.atan2(upper.v, upper.u) - math.atan2(lower.v, lower.u)),
        "density_jump": upper.rho / lower.rho - 1.0,
    }


class ReferenceField:
    """노드 좌표에서 원시 변수를 돌려주는 정확해 공통 인터페이스"""

    case: str
    freestream: FlowState

    def primitive_arrays(self, x: np.ndarray, y: np.ndarray) -> Dict[str, np.ndarray]:
        raise NotImplementedError

    def state_at(self, x: float, y: float) -> FlowState:
        prim = self.primitive_arrays(np.array([x]), np.array([y]))
        return FlowState(float(prim["rho"][0]), float(prim["u"][0]), float(prim["v"][0]),
                         float(prim["p"][0]), self.freestream.gamma)

    def summary(self) -> Dict[str, Any]:
        return {"case": self.case, "freestream": self.freestream.as_dict()}


@dataclass
class AnalyticField(ReferenceField):
    """
    구간별 균일 정확해

    regions는 순서가 있는 목록이고, 경계 위의 점은 목록에서 먼저 나오는
    영역 (불연속의 하류 쪽)에 배정됨
    """
    case: str
    freestream: FlowState
    regions: List[Region]
    discontinuities: List[Discontinuity] = field(default_factory=list)
    parameters: Dict[str, Any] = field(default_factory=dict)
    interaction_point: Optional[Tuple[float, float]] = None

    def region_index(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """각 점이 속한 영역 인덱스 (목록 순서 우선)"""
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        index = np.full(np.broadcast(x, y).shape, -1, dtype=np.int64)
        for k, region in enumerate(self.regions):
            hit = (index < 0) & region.contains(x, y)
            index[hit] = k
        if (index < 0).any():
            logger.debug(f"{int((index < 0).sum())}개 점이 어느 영역에도 속하지 않아 마지막 영역으로 배정")
            index[index < 0] = len(self.regions) - 1
        return index

    def region_of(self, x: float, y: float) -> str:
        return self.regions[int(self.region_index(np.array([x]), np.array([y]))[0])].name

    def primitive_arrays(self, x: np.ndarray, y: np.ndarray) -> Dict[str, np.ndarray]:
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        index = self.region_index(x, y)
        out = {name: np.empty(index.shape) for name in ("rho", "u", "v", "p")}
        for k, region in enumerate(self.regions):
            hit = index == k
            if not hit.any():
                continue
            values = region.primitive_values(x[hit], y[hit])
            for name, value in zip(("rho", "u", "v", "p"), values):
                out[name][hit] = value
        return out

    def uniform_states(self) -> Dict[str, FlowState]:
        return {r.name: r.state for r in self.regions if r.state is not None}

    def summary(self) -> Dict[str, Any]:
        """영역 표, 파 각도, 정합 잔차"""
        info = {
            "case": self.case,
            "parameters": dict(self.parameters),
            "interaction_point": list(self.interaction_point) if self.interaction_point else None,
            "num_regions": len(self.uniform_states()),
            "regions": [r.as_dict() for r in self.regions],
            "discontinuities": [d.as_dict() for d in self.discontinuities],
        }
        info.update(analytic_invariants(self))
        return info


@dataclass
class SmoothStreamField(ReferenceField):
    """
    매끄러운 정상 오일러 정확해

    속도와 압력이 균일하고 밀도가 유선을 가로질러서만 변함:
    rho = 1 + a*eta + b*sin(2*pi*eta), eta = -x sin(phi) + y cos(phi)
    """
    mach: float = 2.5
    angle_deg: float = 30.0
    gamma: float = DEFAULT_GAMMA
    slope: float = 0.3
    wiggle: float = 0.04
    case: str = "smooth"

    def __post_init__(self):
        self.freestream = FlowState.freestream(self.mach, self.gamma, self.angle_deg)

    def density(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        phi = math.radians(self.angle_deg)
        eta = -np.asarray(x) * math.sin(phi) + np.asarray(y) * math.cos(phi)
        return 1.0 + self.slope * eta + self.wiggle * np.sin(2.0 * math.pi * eta)

    def primitive_arrays(self, x: np.ndarray, y: np.ndarray) -> Dict[str, np.ndarray]:
        rho = self.density(x, y)
        s = self.freestream
        return {
            "rho": rho,
            "u": np.full(rho.shape, s.u),
            "v": np.full(rho.shape, s.v),
            "p": np.full(rho.shape, s.p),
        }

    def summary(self) -> Dict[str, Any]:
        return {
            "case": self.case,
            "parameters": {"mach": self.mach, "angle_deg": self.angle_deg, "gamma": self.gamma,
                           "slope": self.slope, "wiggle": self.wiggle},
            "freestream": self.freestream.as_dict(),
        }


def _center(geometry: Optional[GridSpec]) -> Tuple[float, float]:
    if geometry is None:
        return 0.5, 0.5
    return geometry.x0 + 0.5 * geometry.lx, geometry.y0 + 0.5 * geometry.ly


def build_oblique_case(mach: float, theta_deg: float, geometry: Optional[GridSpec] = None,
                       gamma: float = DEFAULT_GAMMA,
                       anchor: Tuple[float, float] = DEFAULT_OBLIQUE_ANCHOR) -> AnalyticField:
    """
    단일 경사 충격파 정확해

    충격파는 anchor를 지나는 직선으로 x축과 beta 각을 이룸. 직선 아래쪽이 충격파 후방.

    Args:
        mach: 자유류 마하수
        theta_deg: 유동 편향각 (도)
        geometry: 격자 (영역 정보용, 사용하지 않아도 됨)
        gamma: 비열비
        anchor: 충격파가 지나는 점

    Returns:
        AnalyticField (theta = 0 이면 균일장)

    Raises:
        DetachedShock: theta_deg >= theta_max(mach)
    """
    free = FlowState.freestream(mach, gamma)
    params = {"mach": mach, "theta_deg": theta_deg, "gamma": gamma, "anchor": list(anchor)}
    anchor = (float(anchor[0]), float(anchor[1]))
    freestream_region = Region("freestream", anchor, state=free, full=True)
    if theta_deg == 0.0:
        return AnalyticField("oblique", free, [freestream_region], [], params, anchor)

    beta = theta_beta_m(mach, theta_deg, "weak", gamma)
    shock = oblique_shock_downstream(free, beta, 1)
    sigma = shock.wave_angle_deg
    post = Region("post_shock", anchor, sigma - 180.0, sigma, state=shock.downstream)
    record = Discontinuity("shock", anchor, sigma, "freestream", "post_shock", free, shock.downstream)
    params["shock_angle_deg"] = beta
    logger.info(f"단일 충격파 정확해: M={mach}, theta={theta_deg}°, beta={beta:.6f}°")
    return AnalyticField("oblique", free, [post, freestream_region], [record], params, anchor)


def _wave_rays(wave: Wave) -> Tuple[float, float]:
    """
    파가 차지하는 각 구간 (반시계 방향 시작, 끝)

    충격파는 한 반직선이라 두 값이 같음
    """
    if wave.kind == "shock":
        angle = wave.shock.wave_angle_deg
        return angle, angle
    head = wave.expansion.head_angle_deg
    tail = wave.expansion.tail_angle_deg
    return (head, tail) if wave.family == -1 else (tail, head)


def _lower_side(apex, wave: Wave, before: str, after: str, fan_name: str,
                start_deg: float, slip_deg: float):
    """
    슬립라인 아래쪽 family -1 파 주변 영역과 불연속 기록

    Returns:
        (하류 우선 순서의 영역 목록, 상류 영역, 불연속 목록)
    """
    ray_a, ray_b = _wave_rays(wave)
    upstream = Region(before, apex, start_deg, ray_a, state=wave.upstream)
    downstream = Region(after, apex, ray_b, slip_deg, state=wave.downstream)
    if wave.kind == "shock":
        record = Discontinuity("shock", apex, ray_a, before, after, wave.upstream, wave.downstream)
        return [downstream], upstream, [record]
    fan = Region(fan_name, apex, ray_a, ray_b, fan=wave.expansion)
    record = Discontinuity("expansion", apex, ray_a, before, after, wave.upstream, wave.downstream, ray_b)
    return [downstream, fan], upstream, [record]


def _upper_side(apex, wave: Wave, before: str, after: str, fan_name: str,
                slip_deg: float, end_deg: float):
    """슬립라인 위쪽 family +1 파 주변 영역과 불연속 기록"""
    ray_a, ray_b = _wave_rays(wave)
    downstream = Region(after, apex, slip_deg, ray_a, state=wave.downstream)
    upstream = Region(before, apex, ray_b, end_deg, state=wave.upstream)
    if wave.kind == "shock":
        record = Discontinuity("shock", apex, ray_a, before, after, wave.upstream, wave.downstream)
        return [downstream], upstream, [record]
    fan = Region(fan_name, apex, ray_a, ray_b, fan=wave.expansion)
    record = Discontinuity("expansion", apex, ray_b, before, after, wave.upstream, wave.downstream, ray_a)
    return [downstream, fan], upstream, [record]


def build_edney1(mach: float, alpha_lower_deg: float, alpha_upper_deg: float,
                 geometry: Optional[GridSpec] = None, gamma: float = DEFAULT_GAMMA) -> AnalyticField:
    """
    서로 다른 계열의 두 경사 충격파가 교차하는 Edney I형 정확해

    영역 중심에서 아래쪽 입사 충격파 (유동 +alpha_lower)와 위쪽 입사 충격파
    (유동 -alpha_upper)가 교차하고, 굴절파 두 개와 슬립라인이 나감.
    균일 상태는 자유류, 입사 충격파 후방 2개, 굴절파 후방 2개의 다섯 개.

    Args:
        mach: 자유류 마하수
        alpha_lower_deg: 아래쪽 편향각 (도, > 0)
        alpha_upper_deg: 위쪽 편향각 (도, > 0)
        geometry: 격자 (교차점 = 영역 중심)
        gamma: 비열비

    Returns:
        AnalyticField

    Raises:
        DetachedShock: 입사 충격파가 부착될 수 없을 때
        NoRegularSolution: 정규 교차 해가 없을 때
    """
    if alpha_lower_deg <= 0.0 or alpha_upper_deg <= 0.0:
        raise ValueError(f"Edney I 편향각은 양수여야 합니다: {alpha_lower_deg}, {alpha_upper_deg}")

    apex = _center(geometry)
    free = FlowState.freestream(mach, gamma)
    lower = oblique_shock_downstream(free, theta_beta_m(mach, alpha_lower_deg, "weak", gamma), 1)
    upper = oblique_shock_downstream(free, theta_beta_m(mach, alpha_upper_deg, "weak", gamma), -1)
    match = shock_polar_match(lower.downstream, upper.downstream)

    lower_back = 180.0 + lower.wave_angle_deg
    upper_back = 180.0 + upper.wave_angle_deg
    slip = match.slip_angle_deg

    low_regions, region2, low_records = _lower_side(
        apex, match.lower, "post_lower_incident", "post_lower_refracted", "lower_refracted_fan",
        lower_back, slip)
    up_regions, region3, up_records = _upper_side(
        apex, match.upper, "post_upper_incident", "post_upper_refracted", "upper_refracted_fan",
        slip, upper_back)
    region1 = Region("freestream", apex, upper_back, lower_back, state=free)

    regions = low_regions + up_regions + [region2, region3, region1]
    records = [
        Discontinuity("shock", apex, lower_back, "freestream", "post_lower_incident", free, lower.downstream),
        Discontinuity("shock", apex, upper_back, "freestream", "post_upper_incident", free, upper.downstream),
        *low_records,
        *up_records,
        Discontinuity("slip", apex, slip, "post_lower_refracted", "post_upper_refracted",
                      match.lower.downstream, match.upper.downstream),
    ]
    params = {
        "mach": mach,
        "alpha_lower_deg": alpha_lower_deg,
        "alpha_upper_deg": alpha_upper_deg,
        "gamma": gamma,
        "lower_shock_angle_deg": lower.shock_angle_deg,
        "upper_shock_angle_deg": upper.shock_angle_deg,
        "matching": match.as_dict(),
    }
    logger.info(f"Edney I 정확해: M={mach}, {alpha_lower_deg}°/{alpha_upper_deg}°, "
                f"슬립라인 {slip:.8f}°, 압력 잔차 {match.pressure_residual:.2e}")
    return AnalyticField("edney1", free, regions, records, params, apex)


def build_edney6(mach: float, alpha1_deg: float, alpha2_deg: float,
                 geometry: Optional[GridSpec] = None, gamma: float = DEFAULT_GAMMA,
                 angle_convention: str = "absolute") -> AnalyticField:
    """
    같은 계열의 두 충격파가 합쳐지는 Edney VI형 정확해

    두 램프 충격파가 영역 중심에서 합쳐져 하나의 강한 충격파가 되고,
    아래쪽으로 반사파 (팽창 부채꼴 또는 약한 충격파)와 슬립라인이 나감.
    반사파 종류는 압력 불일치 함수의 근에서 자동으로 정해짐.

    Args:
        mach: 자유류 마하수
        alpha1_deg: 첫 번째 램프 편향각 (도)
        alpha2_deg: 두 번째 램프 각 (absolute: 자유류 기준 / relative: 첫 램프 기준 추가 편향)
        geometry: 격자
        gamma: 비열비
        angle_convention: "absolute" 또는 "relative"

    Returns:
        AnalyticField (추가 편향이 0이면 단일 충격파 장)
    """
    if angle_convention not in ("absolute", "relative"):
        raise ValueError(f"알 수 없는 각도 규약: {angle_convention}")
    apex = _center(geometry)
    extra = alpha2_deg if angle_convention == "relative" else alpha2_deg - alpha1_deg
    if alpha2_deg == 0.0 or extra == 0.0:
        logger.info("두 번째 램프 편향이 0이라 단일 충격파 장으로 축퇴")
        degenerate = build_oblique_case(mach, alpha1_deg, geometry, gamma, anchor=apex)
        degenerate.parameters["degenerate_from"] = "edney6"
        return degenerate
    if extra < 0.0:
        raise ValueError(f"두 번째 램프의 추가 편향이 음수입니다: {extra}°")

    free = FlowState.freestream(mach, gamma)
    shock1 = oblique_shock_downstream(free, theta_beta_m(mach, alpha1_deg, "weak", gamma), 1)
    region2_state = shock1.downstream
    shock2 = oblique_shock_downstream(
        region2_state, theta_beta_m(region2_state.mach, extra, "weak", gamma), 1)
    region3_state = shock2.downstream

    match = shock_polar_match(region3_state, free)
    if match.upper.kind != "shock":
        raise NoRegularSolution("합쳐진 충격파가 압축파가 아닙니다")
    merged = match.upper.shock

    back1 = 180.0 + shock1.wave_angle_deg
    back2 = 180.0 + shock2.wave_angle_deg
    slip = match.slip_angle_deg

    low_regions, region3, low_records = _lower_side(
        apex, match.lower, "post_shock2", "post_reflected_wave", "reflected_fan", back2, slip)
    region4 = Region("post_merged_shock", apex, slip, merged.wave_angle_deg, state=merged.downstream)
    region1 = Region("freestream", apex, merged.wave_angle_deg, back1, state=free)
    region2 = Region("post_shock1", apex, back1, back2, state=region2_state)

    regions = [region4] + low_regions + [region3, region2, region1]
    records = [
        Discontinuity("shock", apex, back1, "freestream", "post_shock1", free, region2_state),
        Discontinuity("shock", apex, back2, "post_shock1", "post_shock2", region2_state, region3_state),
        Discontinuity("shock", apex, merged.wave_angle_deg, "freestream", "post_merged_shock",
                      free, merged.downstream),
        *low_records,
        Discontinuity("slip", apex, slip, "post_reflected_wave", "post_merged_shock",
                      match.lower.downstream, match.upper.downstream),
    ]
    params = {
        "mach": mach,
        "alpha1_deg": alpha1_deg,
        "alpha2_deg": alpha2_deg,
        "angle_convention": angle_convention,
        "second_ramp_extra_deg": extra,
        "gamma": gamma,
        "reflected_wave": match.lower.kind,
        "entropy_merged": merged.downstream.entropy,
        "entropy_two_shocks": region3_state.entropy,
        "matching": match.as_dict(),
    }
    logger.info(f"Edney VI 정확해: M={mach}, {alpha1_deg}°/{alpha2_deg}° ({angle_convention}), "
                f"반사파={match.lower.kind}, 슬립라인 {slip:.8f}°")
    return AnalyticField("edney6", free, regions, records, params, apex)


def analytic_invariants(reference: AnalyticField) -> Dict[str, Any]:
    """
    모든 충격파와 슬립라인의 보존 관계 재확인

    Returns:
        max_shock_residual, max_slip_pressure_residual, max_slip_angle_residual_rad,
        entropy_nondecreasing
    """
    shock_res = 0.0
    slip_p = 0.0
    slip_angle = 0.0
    entropy_ok = True
    for record in reference.discontinuities:
        res = record.residuals()
        if record.kind == "shock":
            shock_res = max(shock_res, *(res[k] for k in
                                         ("mass", "normal_momentum", "tangential_velocity", "total_enthalpy")))
            entropy_ok = entropy_ok and res["entropy_jump"] >= -1e-12
        elif record.kind == "slip":
            slip_p = max(slip_p, res["pressure"])
            slip_angle = max(slip_angle, res["flow_angle_rad"])
    return {
        "max_shock_residual": shock_res,
        "max_slip_pressure_residual": slip_p,
        "max_slip_angle_residual_rad": slip_angle,
        "entropy_nondecreasing": entropy_ok,
    }


def project_to_grid(reference: ReferenceField, grid: GridSpec) -> ConservedField:
    """
    정확해를 격자 노드에서 점 샘플링해 보존 변수로 변환

    Args:
        reference: 정확해
        grid: 격자

    Returns:
        ConservedField
    """
    x, y = grid.nodes()
    return primitive_to_field(reference.primitive_arrays(x, y), grid, reference.freestream.gamma)


def primitive_to_field(prim: Dict[str, np.ndarray], grid: GridSpec, gamma: float) -> ConservedField:
    rho, u, v, p = prim["rho"], prim["u"], prim["v"], prim["p"]
    data = np.stack(
        [rho, rho * u, rho * v, p / (gamma - 1.0) + 0.5 * rho * (u * u + v * v)], axis=-1)
    return ConservedField(grid, data, gamma)


def build_case(case: str, mach: float, geometry: Optional[GridSpec] = None, gamma: float = DEFAULT_GAMMA,
               theta_deg: float = 20.0, alpha1_deg: float = 20.0, alpha2_deg: float = 15.0,
               angle_convention: str = "absolute",
               anchor: Tuple[float, float] = DEFAULT_OBLIQUE_ANCHOR) -> ReferenceField:
    """설정 값으로 사례별 정확해 생성"""
    if case == "oblique":
        return build_oblique_case(mach, theta_deg, geometry, gamma, anchor)
    if case == "edney1":
        return build_edney1(mach, alpha1_deg, alpha2_deg, geometry, gamma)
    if case == "edney6":
        return build_edney6(mach, alpha1_deg, alpha2_deg, geometry, gamma, angle_convention)
    if case == "smooth":
        return SmoothStreamField(mach=mach, gamma=gamma)
    raise ValueError(f"알 수 없는 사례: {case}")


# 기본 사용 예시
if __name__ == "__main__":
    import json

    grid = GridSpec(100, 100)
    for ref in (build_edney1(4.0, 20.0, 15.0, grid), build_edney6(3.5, 15.0, 25.0, grid)):
        print(json.dumps(analytic_invariants(ref), indent=2))
        print(ref.parameters["matching"]["slip_angle_deg"])
