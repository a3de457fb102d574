import math
import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

from scipy.optimize import brentq

from errors import (
    DetachedShock,
    NoRegularSolution,
    NonPhysicalState,
    SubsonicInput,
    SubsonicNormalMach,
)

logger = logging.getLogger("gas_dynamics")

DEFAULT_GAMMA = 1.4

# 근 탐색 공통 설정
ROOT_RTOL = 4.0 * 2.220446049250313e-16
ROOT_XTOL = 1e-13
ROOT_MAXITER = 200

# 부착 한계에서 떼어두는 여유 (도)
DETACHMENT_MARGIN_DEG = 1e-9


@dataclass(frozen=True)
class FlowState:
    """
    비점성 완전기체의 원시 변수 상태

    무차원화: 자유류 rho = 1, p = 1/gamma (음속 1, 속도 = 마하수)
    """
    rho: float
    u: float
    v: float
    p: float
    gamma: float = DEFAULT_GAMMA

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError(f"gamma는 1보다 커야 합니다: {self.gamma}")
        if not self.rho > 0.0:
            raise NonPhysicalState(f"밀도가 양수가 아닙니다: rho={self.rho}")
        if not self.p > 0.0:
            raise NonPhysicalState(f"압력이 양수가 아닙니다: p={self.p}")

    @classmethod
    def freestream(cls, mach: float, gamma: float = DEFAULT_GAMMA, angle_deg: float = 0.0) -> "FlowState":
        """
        무차원 자유류 상태 생성

        Args:
            mach: 자유류 마하수
            gamma: 비열비
            angle_deg: 유동 방향 (x축 기준, 도)

        Returns:
            rho = 1, p = 1/gamma, |V| = mach 인 상태
        """
        angle = math.radians(angle_deg)
        return cls(1.0, mach * math.cos(angle), mach * math.sin(angle), 1.0 / gamma, gamma)

    @classmethod
    def from_mach(cls, mach: float, angle_deg: float, rho: float, p: float,
                  gamma: float = DEFAULT_GAMMA) -> "FlowState":
        """마하수와 유동각, 밀도, 압력으로 상태 생성"""
        a = math.sqrt(gamma * p / rho)
        angle = math.radians(angle_deg)
        return cls(rho, mach * a * math.cos(angle), mach * a * math.sin(angle), p, gamma)

    @property
    def sound_speed(self) -> float:
        return math.sqrt(self.gamma * self.p / self.rho)

    @property
    def speed(self) -> float:
        return math.hypot(self.u, self.v)

    @property
    def mach(self) -> float:
        return self.speed / self.sound_speed

    @property
    def flow_angle_deg(self) -> float:
        return math.degrees(math.atan2(self.v, self.u))

    @property
    def internal_energy(self) -> float:
        return self.p / (self.rho * (self.gamma - 1.0))

    @property
    def total_energy(self) -> float:
        return self.internal_energy + 0.5 * (self.u ** 2 + self.v ** 2)

    @property
    def enthalpy(self) -> float:
        return self.gamma / (self.gamma - 1.0) * self.p / self.rho

    @property
    def total_enthalpy(self) -> float:
        return self.enthalpy + 0.5 * (self.u ** 2 + self.v ** 2)

    @property
    def entropy(self) -> float:
        """엔트로피 함수 p / rho^gamma"""
        return self.p / self.rho ** self.gamma

    def as_dict(self) -> Dict[str, float]:
        return {
            "rho": self.rho,
            "u": self.u,
            "v": self.v,
            "p": self.p,
            "gamma": self.gamma,
            "mach": self.mach,
            "flow_angle_deg": self.flow_angle_deg,
        }


@dataclass(frozen=True)
class ObliqueShockSolution:
    """
    경사 충격파 해

    family = +1 이면 충격파가 유동 방향에서 반시계 방향으로 기울어져 있고
    유동을 반시계 방향으로 꺾음 (아래쪽 램프의 충격파), -1 이면 그 반대
    """
    upstream: FlowState
    deflection_deg: float
    shock_angle_deg: float
    downstream: FlowState
    family: int = 1

    @property
    def wave_angle_deg(self) -> float:
        """x축 기준 충격파 선의 방향 (도)"""
        return self.upstream.flow_angle_deg + self.family * self.shock_angle_deg

    def jump_residuals(self) -> Dict[str, float]:
        return jump_residuals(self.upstream, self.downstream, self.wave_angle_deg)


@dataclass(frozen=True)
class ExpansionSolution:
    """프란틀-마이어 팽창파 해 (중심 팽창 부채꼴)"""
    upstream: FlowState
    turn_deg: float
    family: int
    downstream: FlowState

    @property
    def head_angle_deg(self) -> float:
        """첫 번째 마하선 방향 (x축 기준, 도)"""
        return self.upstream.flow_angle_deg + self.family * math.degrees(math.asin(1.0 / self.upstream.mach))

    @property
    def tail_angle_deg(self) -> float:
        """마지막 마하선 방향 (x축 기준, 도)"""
        return self.downstream.flow_angle_deg + self.family * math.degrees(math.asin(1.0 / self.downstream.mach))


@dataclass(frozen=True)
class Wave:
    """
    유동을 꺾는 단일 파 (충격파 또는 팽창파)

    turn_deg는 부호가 있는 유동 회전각 (반시계 방향 양수)
    """
    kind: str
    family: int
    turn_deg: float
    upstream: FlowState
    downstream: FlowState
    shock: Optional[ObliqueShockSolution] = None
    expansion: Optional[ExpansionSolution] = None

    def as_dict(self) -> Dict[str, object]:
        info: Dict[str, object] = {
            "kind": self.kind,
            "family": self.family,
            "turn_deg": self.turn_deg,
        }
        if self.shock is not None:
            info["shock_angle_deg"] = self.shock.shock_angle_deg
            info["wave_angle_deg"] = self.shock.wave_angle_deg
        if self.expansion is not None:
            info["head_angle_deg"] = self.expansion.head_angle_deg
            info["tail_angle_deg"] = self.expansion.tail_angle_deg
        return info


@dataclass(frozen=True)
class SlipLineMatch:
    """슬립라인 정합 결과"""
    slip_angle_deg: float
    lower: Wave
    upper: Wave
    pressure_residual: float
    angle_residual_rad: float

    def as_dict(self) -> Dict[str, object]:
        return {
            "slip_angle_deg": self.slip_angle_deg,
            "lower_wave": self.lower.as_dict(),
            "upper_wave": self.upper.as_dict(),
            "pressure_residual": self.pressure_residual,
            "angle_residual_rad": self.angle_residual_rad,
        }


def primitive_to_conserved(s: FlowState) -> Tuple[float, float, float, float]:
    """
    원시 변수를 보존 변수로 변환

    Args:
        s: 유동 상태

    Returns:
        (rho, rho*u, rho*v, rho*E), E = p/(rho(gamma-1)) + (u^2+v^2)/2
    """
    kinetic = 0.5 * s.rho * (s.u * s.u + s.v * s.v)
    return (s.rho, s.rho * s.u, s.rho * s.v, s.p / (s.gamma - 1.0) + kinetic)


def conserved_to_primitive(q, gamma: float = DEFAULT_GAMMA) -> FlowState:
    """
    보존 변수를 원시 변수로 변환

    Args:
        q: (rho, rho*u, rho*v, rho*E)
        gamma: 비열비

    Returns:
        FlowState

    Raises:
        NonPhysicalState: 밀도 또는 복원된 압력이 양수가 아닐 때
    """
    rho, mx, my, energy = (float(c) for c in q)
    if not rho > 0.0:
        raise NonPhysicalState(f"밀도가 양수가 아닙니다: rho={rho}")
    u = mx / rho
    v = my / rho
    p = (gamma - 1.0) * (energy - 0.5 * (mx * u + my * v))
    if not p > 0.0:
        raise NonPhysicalState(f"복원된 압력이 양수가 아닙니다: p={p}")
    return FlowState(rho, u, v, p, gamma)


def _require_supersonic(mach: float) -> None:
    if not mach > 1.0:
        raise SubsonicInput(f"초음속 마하수가 필요합니다: M={mach}")


def deflection_from_shock_angle(mach: float, beta_rad: float, gamma: float = DEFAULT_GAMMA) -> float:
    """theta-beta-M 관계식으로 충격파 각(rad)에서 유동 편향각(rad) 계산"""
    num = 2.0 / math.tan(beta_rad) * (mach * mach * math.sin(beta_rad) ** 2 - 1.0)
    den = mach * mach * (gamma + math.cos(2.0 * beta_rad)) + 2.0
    return math.atan(num / den)


def theta_beta_residual(mach: float, theta_deg: float, beta_deg: float, gamma: float = DEFAULT_GAMMA) -> float:
    """tan(theta) - 2 cot(beta)(M^2 sin^2 beta - 1)/(M^2 (gamma + cos 2beta) + 2)"""
    beta = math.radians(beta_deg)
    rhs = 2.0 / math.tan(beta) * (mach * mach * math.sin(beta) ** 2 - 1.0) / (
        mach * mach * (gamma + math.cos(2.0 * beta)) + 2.0)
    return math.tan(math.radians(theta_deg)) - rhs


def max_deflection_shock_angle(mach: float, gamma: float = DEFAULT_GAMMA) -> float:
    """
    최대 편향각을 주는 충격파 각 (rad)

    약한/강한 해 분기점. 닫힌 형태의 sin^2(beta*) 식 사용
    """
    _require_supersonic(mach)
    m2 = mach * mach
    root = math.sqrt((gamma + 1.0) * (1.0 + 0.5 * (gamma - 1.0) * m2 + (gamma + 1.0) * m2 * m2 / 16.0))
    sin2 = ((gamma + 1.0) * m2 / 4.0 - 1.0 + root) / (gamma * m2)
    return math.asin(math.sqrt(min(sin2, 1.0)))


def detachment_angle(mach: float, gamma: float = DEFAULT_GAMMA) -> float:
    """
    부착 경사 충격파가 가능한 최대 편향각 theta_max (도)

    Args:
        mach: 상류 마하수
        gamma: 비열비

    Returns:
        theta_max (도)
    """
    beta_star = max_deflection_shock_angle(mach, gamma)
    return math.degrees(deflection_from_shock_angle(mach, beta_star, gamma))


def theta_beta_m(mach: float, theta_deg: float, branch: str = "weak", gamma: float = DEFAULT_GAMMA) -> float:
    """
    theta-beta-M 관계식의 역산: 편향각에서 충격파 각 계산

    Args:
        mach: 상류 마하수 (> 1)
        theta_deg: 유동 편향각 (도, 0 이상)
        branch: "weak" (작은 근, 기본값) 또는 "strong"
        gamma: 비열비

    Returns:
        충격파 각 beta (도)

    Raises:
        DetachedShock: theta_deg >= theta_max(mach)
    """
    _require_supersonic(mach)
    if theta_deg < 0.0:
        raise ValueError(f"편향각은 0 이상이어야 합니다: {theta_deg}")
    if branch not in ("weak", "strong"):
        raise ValueError(f"알 수 없는 분기: {branch}")

    mach_angle = math.asin(1.0 / mach)
    if theta_deg == 0.0:
        return math.degrees(mach_angle) if branch == "weak" else 90.0

    theta_max = detachment_angle(mach, gamma)
    if theta_deg >= theta_max:
        raise DetachedShock(
            f"편향각 {theta_deg:.6f}°가 M={mach:.4f}의 최대 편향각 {theta_max:.6f}° 이상입니다 (분리 충격파)"
        )

    theta = math.radians(theta_deg)
    beta_star = max_deflection_shock_angle(mach, gamma)

    def residual(beta: float) -> float:
        return deflection_from_shock_angle(mach, beta, gamma) - theta

    # 브래킷 안에서 brentq (이분법 + 보간)
    if branch == "weak":
        lo, hi = mach_angle, beta_star
    else:
        lo, hi = beta_star, 0.5 * math.pi
    beta = brentq(residual, lo, hi, xtol=1e-15, rtol=ROOT_RTOL, maxiter=ROOT_MAXITER)
    return math.degrees(beta)


def normal_shock_ratios(mn: float, gamma: float = DEFAULT_GAMMA) -> Tuple[float, float]:
    """
    수직 충격파 관계식

    Returns:
        (밀도비 rho2/rho1, 압력비 p2/p1)
    """
    m2 = mn * mn
    density_ratio = (gamma + 1.0) * m2 / ((gamma - 1.0) * m2 + 2.0)
    pressure_ratio = 1.0 + 2.0 * gamma / (gamma + 1.0) * (m2 - 1.0)
    return density_ratio, pressure_ratio


def oblique_shock_downstream(upstream: FlowState, shock_angle_deg: float, family: int = 1) -> ObliqueShockSolution:
    """
    정확한 점프 관계식으로 경사 충격파 하류 상태 계산

    Args:
        upstream: 상류 상태
        shock_angle_deg: 상류 유동 방향 기준 충격파 각 beta (도)
        family: +1 (유동을 반시계 방향으로 꺾음) 또는 -1

    Returns:
        ObliqueShockSolution

    Raises:
        SubsonicNormalMach: M sin(beta) <= 1
    """
    if family not in (1, -1):
        raise ValueError(f"family는 +1 또는 -1 이어야 합니다: {family}")

    gamma = upstream.gamma
    phi1 = math.atan2(upstream.v, upstream.u)
    sigma = phi1 + family * math.radians(shock_angle_deg)
    tx, ty = math.cos(sigma), math.sin(sigma)
    nx, ny = ty, -tx

    un = upstream.u * nx + upstream.v * ny
    if un < 0.0:
        nx, ny, un = -nx, -ny, -un
    ut = upstream.u * tx + upstream.v * ty

    mn = un / upstream.sound_speed
    if not mn > 1.0:
        raise SubsonicNormalMach(f"수직 마하수가 1 이하입니다: Mn={mn}")

    density_ratio, pressure_ratio = normal_shock_ratios(mn, gamma)
    un2 = un / density_ratio
    downstream = FlowState(
        upstream.rho * density_ratio,
        ut * tx + un2 * nx,
        ut * ty + un2 * ny,
        upstream.p * pressure_ratio,
        gamma,
    )
    turn = math.degrees(math.atan2(downstream.v, downstream.u) - phi1)
    turn = (turn + 180.0) % 360.0 - 180.0
    return ObliqueShockSolution(upstream, abs(turn), shock_angle_deg, downstream, family)


def jump_residuals(up: FlowState, down: FlowState, wave_angle_deg: float) -> Dict[str, float]:
    """
    불연속 선을 가로지르는 보존 관계 잔차 (상대값)

    Args:
        up: 상류 상태
        down: 하류 상태
        wave_angle_deg: x축 기준 불연속 선 방향 (도)

    Returns:
        mass, normal_momentum, tangential_velocity, total_enthalpy 잔차와
        엔트로피 변화 entropy_jump (s2/s1 - 1)
    """
    sigma = math.radians(wave_angle_deg)
    tx, ty = math.cos(sigma), math.sin(sigma)
    nx, ny = ty, -tx
    un1 = up.u * nx + up.v * ny
    un2 = down.u * nx + down.v * ny
    ut1 = up.u * tx + up.v * ty
    ut2 = down.u * tx + down.v * ty

    mass1 = up.rho * un1
    mom1 = up.rho * un1 * un1 + up.p
    scale_mass = max(abs(mass1), up.rho * up.sound_speed)
    return {
        "mass": abs(mass1 - down.rho * un2) / scale_mass,
        "normal_momentum": abs(mom1 - (down.rho * un2 * un2 + down.p)) / abs(mom1),
        "tangential_velocity": abs(ut1 - ut2) / max(up.speed, up.sound_speed),
        "total_enthalpy": abs(up.total_enthalpy - down.total_enthalpy) / up.total_enthalpy,
        "entropy_jump": down.entropy / up.entropy - 1.0,
    }


def prandtl_meyer_nu(mach: float, gamma: float = DEFAULT_GAMMA) -> float:
    """
    프란틀-마이어 함수 nu(M) (도)

    Raises:
        SubsonicInput: mach < 1
    """
    if not mach >= 1.0:
        raise SubsonicInput(f"프란틀-마이어 함수는 M >= 1 에서만 정의됩니다: M={mach}")
    k = math.sqrt((gamma + 1.0) / (gamma - 1.0))
    if math.isinf(mach):
        return math.degrees(0.5 * math.pi * (k - 1.0))
    m2 = mach * mach - 1.0
    return math.degrees(k * math.atan(math.sqrt(m2) / k) - math.atan(math.sqrt(m2)))


def prandtl_meyer_max(gamma: float = DEFAULT_GAMMA) -> float:
    """nu(M -> inf) (도)"""
    return prandtl_meyer_nu(math.inf, gamma)


def inverse_prandtl_meyer(nu_deg: float, gamma: float = DEFAULT_GAMMA) -> float:
    """
    nu(M) = nu_deg 를 만족하는 마하수

    Args:
        nu_deg: 프란틀-마이어 각 (도)
        gamma: 비열비

    Returns:
        마하수 (>= 1)
    """
    if nu_deg < 0.0:
        raise ValueError(f"프란틀-마이어 각은 0 이상이어야 합니다: {nu_deg}")
    if nu_deg == 0.0:
        return 1.0
    if nu_deg >= prandtl_meyer_max(gamma):
        raise ValueError(f"프란틀-마이어 각이 최대값 이상입니다: {nu_deg}")

    hi = 2.0
    while prandtl_meyer_nu(hi, gamma) < nu_deg:
        hi *= 2.0
        if hi > 1e15:
            raise ValueError(f"마하수 브래킷 실패: nu={nu_deg}")
    return brentq(lambda m: prandtl_meyer_nu(m, gamma) - nu_deg, 1.0, hi,
                  xtol=1e-14, rtol=ROOT_RTOL, maxiter=ROOT_MAXITER)


def isentropic_state(upstream: FlowState, mach: float, angle_deg: float) -> FlowState:
    """정체 조건을 유지한 채 마하수와 방향만 바뀐 등엔트로피 상태"""
    gamma = upstream.gamma
    m1 = upstream.mach
    temperature_ratio = (1.0 + 0.5 * (gamma - 1.0) * m1 * m1) / (1.0 + 0.5 * (gamma - 1.0) * mach * mach)
    p = upstream.p * temperature_ratio ** (gamma / (gamma - 1.0))
    rho = upstream.rho * temperature_ratio ** (1.0 / (gamma - 1.0))
    return FlowState.from_mach(mach, angle_deg, rho, p, gamma)


def prandtl_meyer_expansion(upstream: FlowState, turn_deg: float, family: int) -> ExpansionSolution:
    """
    중심 팽창파로 유동을 turn_deg 만큼 꺾음

    family = +1 팽창은 유동을 시계 방향으로, -1 팽창은 반시계 방향으로 꺾음

    Args:
        upstream: 상류 상태 (초음속)
        turn_deg: 회전각 크기 (도, 0 이상)
        family: 파 계열 (+1 / -1)

    Returns:
        ExpansionSolution
    """
    if turn_deg < 0.0:
        raise ValueError(f"팽창 회전각은 0 이상이어야 합니다: {turn_deg}")
    _require_supersonic(upstream.mach)
    nu2 = prandtl_meyer_nu(upstream.mach, upstream.gamma) + turn_deg
    try:
        mach2 = inverse_prandtl_meyer(nu2, upstream.gamma)
    except ValueError as e:
        raise NoRegularSolution(f"팽창 회전각이 진공 한계를 넘습니다: {e}") from e
    angle2 = upstream.flow_angle_deg - family * turn_deg
    return ExpansionSolution(upstream, turn_deg, family, isentropic_state(upstream, mach2, angle2))


def fan_state_on_ray(expansion: ExpansionSolution, ray_angle_deg: float) -> FlowState:
    """
    팽창 부채꼴 내부의 자기상사 상태

    Args:
        expansion: 팽창파 해
        ray_angle_deg: 부채꼴 중심에서 본 광선 방향 (도)

    Returns:
        해당 광선 위의 상태
    """
    up = expansion.upstream
    family = expansion.family
    nu1 = prandtl_meyer_nu(up.mach, up.gamma)
    phi1 = up.flow_angle_deg

    def ray_of(tau: float) -> float:
        mach = inverse_prandtl_meyer(nu1 + tau, up.gamma)
        return phi1 - family * tau + family * math.degrees(math.asin(1.0 / mach))

    f_lo = ray_of(0.0) - ray_angle_deg
    f_hi = ray_of(expansion.turn_deg) - ray_angle_deg
    if f_lo == 0.0:
        tau = 0.0
    elif f_hi == 0.0 or f_lo * f_hi > 0.0:
        # 부채꼴 경계 밖의 광선은 가까운 경계 상태로
        tau = 0.0 if abs(f_lo) < abs(f_hi) else expansion.turn_deg
    else:
        tau = brentq(lambda t: ray_of(t) - ray_angle_deg, 0.0, expansion.turn_deg,
                     xtol=1e-13, rtol=ROOT_RTOL, maxiter=ROOT_MAXITER)
    mach = inverse_prandtl_meyer(nu1 + tau, up.gamma)
    return isentropic_state(up, mach, phi1 - family * tau)


def turn_flow(state: FlowState, turn_deg: float, family: int) -> Wave:
    """
    주어진 계열의 단일 파로 유동을 turn_deg (반시계 양수) 만큼 꺾음

    family * turn_deg > 0 이면 압축 (약한 경사 충격파), 아니면 팽창
    """
    if turn_deg == 0.0:
        return Wave("none", family, 0.0, state, state)
    if family * turn_deg > 0.0:
        beta = theta_beta_m(state.mach, abs(turn_deg), "weak", state.gamma)
        shock = oblique_shock_downstream(state, beta, family)
        return Wave("shock", family, turn_deg, state, shock.downstream, shock=shock)
    expansion = prandtl_meyer_expansion(state, abs(turn_deg), family)
    return Wave("expansion", family, turn_deg, state, expansion.downstream, expansion=expansion)


def _direction_limits(state: FlowState, family: int) -> Tuple[float, float]:
    """family 파 하나로 도달 가능한 하류 유동 방향 범위 (도)"""
    phi = state.flow_angle_deg
    compression = detachment_angle(state.mach, state.gamma) - DETACHMENT_MARGIN_DEG
    remaining = (prandtl_meyer_max(state.gamma) - prandtl_meyer_nu(state.mach, state.gamma)) * (1.0 - 1e-6)
    if family == 1:
        return phi - remaining, phi + compression
    return phi - compression, phi + remaining


def shock_polar_match(state_a: FlowState, state_b: FlowState,
                      total_deflections: Optional[Tuple[float, float]] = None) -> SlipLineMatch:
    """
    슬립라인 양쪽 압력과 유동 방향을 맞추는 파 조합 탐색

    state_a는 슬립라인 아래쪽 상태로 family -1 파를, state_b는 위쪽 상태로
    family +1 파를 지남. 압력 불일치 p_upper(phi) - p_lower(phi)는 슬립라인
    방향 phi에 대해 단조 증가하므로 브래킷 후 brentq로 근을 구함.

    Args:
        state_a: 아래쪽 입력 상태
        state_b: 위쪽 입력 상태
        total_deflections: 슬립라인 방향 탐색 구간 (도), 없으면 부착/진공 한계에서 결정

    Returns:
        SlipLineMatch

    Raises:
        NoRegularSolution: 압력 불일치 함수의 부호 변화가 없을 때
    """
    for s in (state_a, state_b):
        if not s.mach > 1.0:
            raise SubsonicInput(f"정합 입력 상태는 초음속이어야 합니다: M={s.mach}")

    a_lo, a_hi = _direction_limits(state_a, -1)
    b_lo, b_hi = _direction_limits(state_b, 1)
    lo, hi = max(a_lo, b_lo), min(a_hi, b_hi)
    if total_deflections is not None:
        lo, hi = max(lo, total_deflections[0]), min(hi, total_deflections[1])
    if not lo < hi:
        raise NoRegularSolution(
            f"부착 파로 도달 가능한 공통 유동 방향이 없습니다 (구간 [{lo:.4f}, {hi:.4f}])"
        )

    phi_a = state_a.flow_angle_deg
    phi_b = state_b.flow_angle_deg

    def mismatch(phi: float) -> float:
        upper = turn_flow(state_b, phi - phi_b, 1).downstream.p
        lower = turn_flow(state_a, phi - phi_a, -1).downstream.p
        return upper - lower

    f_lo, f_hi = mismatch(lo), mismatch(hi)
    if f_lo == 0.0:
        phi = lo
    elif f_hi == 0.0:
        phi = hi
    elif f_lo * f_hi > 0.0:
        raise NoRegularSolution(
            f"압력 불일치 함수가 구간 [{lo:.4f}°, {hi:.4f}°]에서 부호를 바꾸지 않습니다 (정규 해 없음)"
        )
    else:
        phi = brentq(mismatch, lo, hi, xtol=ROOT_XTOL, rtol=ROOT_RTOL, maxiter=ROOT_MAXITER)

    upper = turn_flow(state_b, phi - phi_b, 1)
    lower = turn_flow(state_a, phi - phi_a, -1)
    p_res = abs(upper.downstream.p - lower.downstream.p) / lower.downstream.p
    angle_res = abs(math.atan2(upper.downstream.v, upper.downstream.u)
                    - math.atan2(lower.downstream.v, lower.downstream.u))
    logger.debug(f"슬립라인 정합: phi={phi:.10f}°, 압력 잔차={p_res:.3e}, 각도 잔차={angle_res:.3e}")
    return SlipLineMatch(phi, lower, upper, p_res, angle_res)


# 기본 사용 예시
if __name__ == "__main__":
    beta = theta_beta_m(4.0, 20.0)
    shock = oblique_shock_downstream(FlowState.freestream(4.0), beta)
    print(f"M=4, theta=20°: beta={beta:.6f}°, p2/p1={shock.downstream.p * 1.4:.6f}")
    print(f"theta_max(3.5) = {detachment_angle(3.5):.4f}°")
    print(f"nu(2) = {prandtl_meyer_nu(2.0):.6f}°")
