import logging
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from flow_field import GridSpec
from gas_dynamics import DEFAULT_GAMMA

logger = logging.getLogger("euler_schemes")

# 경계 유령 노드 층 수 (가장 넓은 스텐실 기준)
GHOST = 3
WENO_EPS = 1e-6
# 이 값 이상의 압력 2차 차분 비율에서 2차 인공 점성이 전체 계수로 작동
SHOCK_SENSOR_SATURATION = 0.05

NOMINAL_ORDERS = {
    "cir1": 1,
    "maccormack": 2,
    "lax_wendroff2": 2,
    "muscl_hllc2": 2,
    "weno3": 3,
}

SWAP = [0, 2, 1, 3]


def primitive_components(q: np.ndarray, gamma: float) -> Tuple[np.ndarray, ...]:
    """보존 변수 배열 (..., 4)에서 (rho, u, v, p, a)"""
    rho = q[..., 0]
    u = q[..., 1] / rho
    v = q[..., 2] / rho
    p = (gamma - 1.0) * (q[..., 3] - 0.5 * (q[..., 1] * u + q[..., 2] * v))
    with np.errstate(invalid="ignore"):
        a = np.sqrt(gamma * p / rho)
    return rho, u, v, p, a


def physical_flux(q: np.ndarray, gamma: float) -> np.ndarray:
    """x 방향 물리 플럭스 F(q)"""
    rho, u, v, p, _ = primitive_components(q, gamma)
    flux = np.empty_like(q)
    flux[..., 0] = q[..., 1]
    flux[..., 1] = q[..., 1] * u + p
    flux[..., 2] = q[..., 2] * u
    flux[..., 3] = (q[..., 3] + p) * u
    return flux


def swap_xy(a: np.ndarray) -> np.ndarray:
    """x/y 축과 운동량 성분을 맞바꿈 (두 번 적용하면 항등)"""
    return a.transpose(1, 0, 2)[..., SWAP]


def window(q: np.ndarray, offset: int, dj: int = 0) -> np.ndarray:
    """
    x 경계면 k = 0..nx 의 왼쪽 노드 기준 offset 만큼 떨어진 노드 값

    결과 모양 (nx+1, ny, 4), 내부 y 행만
    """
    n = q.shape[0] - 2 * GHOST
    start = GHOST - 1 + offset
    return q[start:start + n + 1, GHOST + dj:q.shape[1] - GHOST + dj]


def both_directions(kernel: Callable[..., np.ndarray], arrays: Sequence[np.ndarray],
                    kw_x: Optional[Dict] = None, kw_y: Optional[Dict] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    x 경계면 플럭스 커널을 x와 y 두 방향에 적용

    y 방향은 축과 운동량 성분을 맞바꾼 배열에 같은 커널을 적용

    Returns:
        (Fh (nx+1, ny, 4), Gh (nx, ny+1, 4))
    """
    fh = kernel(*arrays, **(kw_x or {}))
    gh = swap_xy(kernel(*[swap_xy(a) for a in arrays], **(kw_y or kw_x or {})))
    return fh, gh


def divergence(fh: np.ndarray, gh: np.ndarray, hx: float, hy: float) -> np.ndarray:
    """-(dF/dx + dG/dy), 플럭스 형태"""
    return -(fh[1:] - fh[:-1]) / hx - (gh[:, 1:] - gh[:, :-1]) / hy


def boundary_flux(fh: np.ndarray, gh: np.ndarray, hx: float, hy: float) -> np.ndarray:
    """영역 경계를 통한 순 유출 플럭스 (성분별)"""
    return hy * (fh[-1] - fh[0]).sum(axis=0) + hx * (gh[:, -1] - gh[:, 0]).sum(axis=0)


class BoundaryPadding:
    """
    유령 노드 경계 조건

    왼쪽/위/아래 유령 노드는 정확해로 고정 (초음속 유입), 오른쪽은
    outflow="extrapolate" 이면 0차 외삽, "dirichlet" 이면 정확해 고정
    """

    def __init__(self, grid: GridSpec, reference, gamma: float = DEFAULT_GAMMA, outflow: str = "extrapolate"):
        if outflow not in ("extrapolate", "dirichlet"):
            raise ValueError(f"알 수 없는 유출 경계: {outflow}")
        self.grid = grid
        self.gamma = gamma
        self.outflow = outflow

        g = GHOST
        xs = grid.x0 + grid.hx * (np.arange(grid.nx + 2 * g) - g)
        ys = grid.y0 + grid.hy * (np.arange(grid.ny + 2 * g) - g)
        x, y = np.meshgrid(xs, ys, indexing="ij")
        prim = reference.primitive_arrays(x, y)
        rho, u, v, p = prim["rho"], prim["u"], prim["v"], prim["p"]
        self.padded_reference = np.stack(
            [rho, rho * u, rho * v, p / (gamma - 1.0) + 0.5 * rho * (u * u + v * v)], axis=-1)

    def pad(self, q: np.ndarray) -> np.ndarray:
        g = GHOST
        nx = self.grid.nx
        padded = self.padded_reference.copy()
        padded[g:g + nx, g:-g] = q
        if self.outflow == "extrapolate":
            padded[g + nx:, :] = padded[g + nx - 1:g + nx, :]
        return padded


def stable_time_step(q: np.ndarray, grid: GridSpec, gamma: float, cfl: float) -> float:
    """전역 시간 간격 dt = cfl * min(hx, hy) / max(|u| + |v| + a)"""
    _, u, v, _, a = primitive_components(q, gamma)
    speed = float(np.max(np.abs(u) + np.abs(v) + a))
    return cfl * min(grid.hx, grid.hy) / speed


def steger_warming_split(q: np.ndarray, gamma: float, sign: int) -> np.ndarray:
    """Steger-Warming 플럭스 벡터 분할 F+ (sign=+1) 또는 F- (sign=-1)"""
    rho, u, v, p, a = primitive_components(q, gamma)

    def part(lam):
        return 0.5 * (lam + sign * np.abs(lam))

    l1, l2, l4 = part(u - a), part(u), part(u + a)
    alpha = 2.0 * (gamma - 1.0) * l2 + l1 + l4
    coef = rho / (2.0 * gamma)
    flux = np.empty_like(q)
    flux[..., 0] = coef * alpha
    flux[..., 1] = coef * (alpha * u + a * (l4 - l1))
    flux[..., 2] = coef * alpha * v
    flux[..., 3] = coef * (0.5 * alpha * (u * u + v * v) + u * a * (l4 - l1)
                           + a * a / (gamma - 1.0) * (l1 + l4))
    return flux


def cir_flux(q: np.ndarray, gamma: float) -> np.ndarray:
    return steger_warming_split(window(q, 0), gamma, 1) + steger_warming_split(window(q, 1), gamma, -1)


def maccormack_predictor_flux(q: np.ndarray, gamma: float) -> np.ndarray:
    """전진 차분 예측자: 경계면 플럭스 = F(q_{i+1})"""
    return physical_flux(window(q, 1), gamma)


def maccormack_corrector_flux(q: np.ndarray, q_pred: np.ndarray, gamma: float) -> np.ndarray:
    """후진 차분 수정자의 보존형: (F(q^n_{i+1}) + F(q*_i)) / 2"""
    return 0.5 * (physical_flux(window(q, 1), gamma) + physical_flux(window(q_pred, 0), gamma))


def lax_wendroff_flux(q: np.ndarray, gamma: float, dt_h: float, dt_h_transverse: float) -> np.ndarray:
    """
    Richtmyer 2단계 Lax-Wendroff 경계면 플럭스

    경계면 예측 상태에 횡방향 플럭스 미분을 포함
    """
    left, right = window(q, 0), window(q, 1)

    def transverse_flux(s):
        return physical_flux(s[..., SWAP], gamma)[..., SWAP]

    d_transverse = 0.25 * (transverse_flux(window(q, 0, 1)) - transverse_flux(window(q, 0, -1))
                           + transverse_flux(window(q, 1, 1)) - transverse_flux(window(q, 1, -1)))
    half = (0.5 * (left + right)
            - 0.5 * dt_h * (physical_flux(right, gamma) - physical_flux(left, gamma))
            - 0.5 * dt_h_transverse * d_transverse)
    return physical_flux(half, gamma)


def pressure_switch(q: np.ndarray, gamma: float) -> np.ndarray:
    """
    경계면 압력 감지자 min(1, max(nu_i, nu_{i+1}) / SHOCK_SENSOR_SATURATION)

    nu_i = |p_{i+1} - 2p_i + p_{i-1}| / (p_{i+1} + 2p_i + p_{i-1})
    """
    p = [primitive_components(window(q, k), gamma)[3] for k in (-1, 0, 1, 2)]

    def nu(pm, pc, pp):
        return np.abs(pp - 2.0 * pc + pm) / (pp + 2.0 * pc + pm)

    sensor = np.maximum(nu(p[0], p[1], p[2]), nu(p[1], p[2], p[3]))
    return np.minimum(1.0, sensor / SHOCK_SENSOR_SATURATION)


def artificial_viscosity_flux(q: np.ndarray, gamma: float, kind: str, mu: float) -> np.ndarray:
    """
    인공 점성 경계면 플럭스

    second: -mu*s*lam*(q_{i+1} - q_i)            (mu*s*h*laplacian 에 해당)
    fourth: +mu*lam*(q_{i+2} - 3q_{i+1} + 3q_i - q_{i-1})  (-mu*h^3*d4 에 해당)
    lam은 이웃 두 노드의 최대 |u| + a
    s는 압력 충격파 감지자 (매끄러운 영역에서 O(h^2), 충격파에서 1)
    """
    q0, q1 = window(q, 0), window(q, 1)
    _, u0, _, _, a0 = primitive_components(q0, gamma)
    _, u1, _, _, a1 = primitive_components(q1, gamma)
    lam = np.maximum(np.abs(u0) + a0, np.abs(u1) + a1)[..., None]
    if kind == "second":
        return -mu * pressure_switch(q, gamma)[..., None] * lam * (q1 - q0)
    if kind == "fourth":
        return mu * lam * (window(q, 2) - 3.0 * q1 + 3.0 * q0 - window(q, -1))
    raise ValueError(f"알 수 없는 인공 점성 종류: {kind}")


def minmod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.where(a * b > 0.0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


def van_leer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = a * b
    denom = np.where(ab > 0.0, a + b, 1.0)
    return np.where(ab > 0.0, 2.0 * ab / denom, 0.0)


LIMITERS = {"minmod": minmod, "vanleer": van_leer}


def hllc_flux(wl: np.ndarray, wr: np.ndarray, gamma: float) -> np.ndarray:
    """
    HLLC 근사 리만 해법 (Davis 파속 추정)

    Args:
        wl, wr: 경계면 왼쪽/오른쪽 원시 변수 (..., 4) = (rho, u, v, p)

    Returns:
        x 방향 플럭스 (..., 4)
    """
    rl, ul, vl, pl = (wl[..., k] for k in range(4))
    rr, ur, vr, pr = (wr[..., k] for k in range(4))
    al = np.sqrt(gamma * pl / rl)
    ar = np.sqrt(gamma * pr / rr)
    el = pl / (gamma - 1.0) + 0.5 * rl * (ul * ul + vl * vl)
    er = pr / (gamma - 1.0) + 0.5 * rr * (ur * ur + vr * vr)

    sl = np.minimum(ul - al, ur - ar)
    sr = np.maximum(ul + al, ur + ar)
    s_star = (pr - pl + rl * ul * (sl - ul) - rr * ur * (sr - ur)) / (rl * (sl - ul) - rr * (sr - ur))

    def conserved(r, u, v, e):
        return np.stack([r, r * u, r * v, e], axis=-1)

    def flux(r, u, v, p, e):
        return np.stack([r * u, r * u * u + p, r * v * u, (e + p) * u], axis=-1)

    def star(r, u, v, p, e, s):
        fac = r * (s - u) / (s - s_star)
        energy = e / r + (s_star - u) * (s_star + p / (r * (s - u)))
        return np.stack([fac, fac * s_star, fac * v, fac * energy], axis=-1)

    ql, qr = conserved(rl, ul, vl, el), conserved(rr, ur, vr, er)
    fl, fr = flux(rl, ul, vl, pl, el), flux(rr, ur, vr, pr, er)
    with np.errstate(divide="ignore", invalid="ignore"):
        fl_star = fl + sl[..., None] * (star(rl, ul, vl, pl, el, sl) - ql)
        fr_star = fr + sr[..., None] * (star(rr, ur, vr, pr, er, sr) - qr)

    sl, sr, s_star = sl[..., None], sr[..., None], s_star[..., None]
    return np.where(sl >= 0.0, fl,
                    np.where(s_star >= 0.0, fl_star,
                             np.where(sr > 0.0, fr_star, fr)))


def muscl_hllc_flux(q: np.ndarray, gamma: float, limiter: str) -> np.ndarray:
    """원시 변수 MUSCL 재구성 + HLLC"""
    limit = LIMITERS[limiter]
    rho, u, v, p, _ = primitive_components(q, gamma)
    w = np.stack([rho, u, v, p], axis=-1)
    wm1, w0, w1, w2 = (window(w, m) for m in (-1, 0, 1, 2))
    wl = w0 + 0.5 * limit(w0 - wm1, w1 - w0)
    wr = w1 - 0.5 * limit(w1 - w0, w2 - w1)

    # 재구성 값이 비물리적이면 1차로 되돌림
    bad_l = (wl[..., 0] <= 0.0) | (wl[..., 3] <= 0.0)
    bad_r = (wr[..., 0] <= 0.0) | (wr[..., 3] <= 0.0)
    wl = np.where(bad_l[..., None], w0, wl)
    wr = np.where(bad_r[..., None], w1, wr)
    return hllc_flux(wl, wr, gamma)


def weno3_reconstruct(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """노드 a, b, c (바람 방향 순서)에서 b와 c 사이 경계면 값, WENO-JS 3차"""
    p0 = -0.5 * a + 1.5 * b
    p1 = 0.5 * b + 0.5 * c
    w0 = (1.0 / 3.0) / (WENO_EPS + (b - a) ** 2) ** 2
    w1 = (2.0 / 3.0) / (WENO_EPS + (c - b) ** 2) ** 2
    return (w0 * p0 + w1 * p1) / (w0 + w1)


def weno3_flux(q: np.ndarray, gamma: float) -> np.ndarray:
    """국소 Lax-Friedrichs 플럭스 분할 + 성분별 WENO3 재구성"""
    flux = physical_flux(q, gamma)
    _, u, _, _, a = primitive_components(q, gamma)
    lam = np.abs(u) + a
    alpha = np.max(np.stack([window(lam[..., None], m)[..., 0] for m in (-1, 0, 1, 2)]), axis=0)[..., None]

    f = {m: window(flux, m) for m in (-1, 0, 1, 2)}
    s = {m: window(q, m) for m in (-1, 0, 1, 2)}
    plus = {m: 0.5 * (f[m] + alpha * s[m]) for m in (-1, 0, 1)}
    minus = {m: 0.5 * (f[m] - alpha * s[m]) for m in (0, 1, 2)}
    return (weno3_reconstruct(plus[-1], plus[0], plus[1])
            + weno3_reconstruct(minus[2], minus[1], minus[0]))


def _with_viscosity(fh, gh, padded, gamma, options):
    if options.av_kind == "none" or options.av_mu == 0.0:
        return fh, gh
    fa, ga = both_directions(artificial_viscosity_flux, [padded],
                             {"gamma": gamma, "kind": options.av_kind, "mu": options.av_mu})
    return fh + fa, gh + ga


def step_cir1(q, boundary: BoundaryPadding, dt: float, options):
    """1차 풍상 (Steger-Warming) + 전진 오일러"""
    grid, gamma = boundary.grid, boundary.gamma
    fh, gh = both_directions(cir_flux, [boundary.pad(q)], {"gamma": gamma})
    return q + dt * divergence(fh, gh, grid.hx, grid.hy), boundary_flux(fh, gh, grid.hx, grid.hy)


def step_maccormack(q, boundary: BoundaryPadding, dt: float, options):
    """MacCormack 예측자-수정자 (수정자를 보존형 경계면 플럭스로)"""
    grid, gamma = boundary.grid, boundary.gamma
    padded = boundary.pad(q)
    fp, gp = both_directions(maccormack_predictor_flux, [padded], {"gamma": gamma})
    predicted = q + dt * divergence(fp, gp, grid.hx, grid.hy)
    fh, gh = both_directions(maccormack_corrector_flux, [padded, boundary.pad(predicted)], {"gamma": gamma})
    fh, gh = _with_viscosity(fh, gh, padded, gamma, options)
    return q + dt * divergence(fh, gh, grid.hx, grid.hy), boundary_flux(fh, gh, grid.hx, grid.hy)


def step_lax_wendroff2(q, boundary: BoundaryPadding, dt: float, options):
    grid, gamma = boundary.grid, boundary.gamma
    padded = boundary.pad(q)
    fh, gh = both_directions(
        lax_wendroff_flux, [padded],
        {"gamma": gamma, "dt_h": dt / grid.hx, "dt_h_transverse": dt / grid.hy},
        {"gamma": gamma, "dt_h": dt / grid.hy, "dt_h_transverse": dt / grid.hx},
    )
    fh, gh = _with_viscosity(fh, gh, padded, gamma, options)
    return q + dt * divergence(fh, gh, grid.hx, grid.hy), boundary_flux(fh, gh, grid.hx, grid.hy)


def _operator(kernel, boundary: BoundaryPadding, kw: Dict):
    grid = boundary.grid

    def apply(q):
        fh, gh = both_directions(kernel, [boundary.pad(q)], kw)
        return divergence(fh, gh, grid.hx, grid.hy), boundary_flux(fh, gh, grid.hx, grid.hy)

    return apply


def step_muscl_hllc2(q, boundary: BoundaryPadding, dt: float, options):
    """MUSCL-HLLC + SSP-RK2"""
    apply = _operator(muscl_hllc_flux, boundary, {"gamma": boundary.gamma, "limiter": options.limiter})
    l0, b0 = apply(q)
    l1, b1 = apply(q + dt * l0)
    return q + 0.5 * dt * (l0 + l1), 0.5 * (b0 + b1)


def step_weno3(q, boundary: BoundaryPadding, dt: float, options):
    """WENO3-LLF + SSP-RK3 (증분형)"""
    apply = _operator(weno3_flux, boundary, {"gamma": boundary.gamma})
    l0, b0 = apply(q)
    l1, b1 = apply(q + dt * l0)
    l2, b2 = apply(q + 0.25 * dt * (l0 + l1))
    return q + dt / 6.0 * (l0 + l1 + 4.0 * l2), (b0 + b1 + 4.0 * b2) / 6.0


STEPPERS = {
    "cir1": step_cir1,
    "maccormack": step_maccormack,
    "lax_wendroff2": step_lax_wendroff2,
    "muscl_hllc2": step_muscl_hllc2,
    "weno3": step_weno3,
}
