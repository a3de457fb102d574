import math
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from errors import DegenerateAngle, ZeroTrueError
from error_geometry import angle_summary, alpha_beta_relation, norm
from truncation_postprocessor import GridVector

logger = logging.getLogger("estimators")

# phi_max = arctan(2): cos + 2 sin = sqrt(5)
EXACT_ANGLE_CONSTANT = math.sqrt(5.0) / 2.0
ROUNDED_ANGLE_CONSTANT = 1.1
TRIANGLE_TOLERANCE = 1e-9
ORTHOGONALITY_THRESHOLD_DEG = 60.0


def distance_matrix(solutions: Sequence[GridVector], weighted: bool = False) -> np.ndarray:
    """
    해 사이 쌍별 L2 거리 행렬

    Args:
        solutions: 같은 배치의 해 벡터 목록
        weighted: 셀 면적 가중 여부

    Returns:
        K x K 대칭 행렬, 대각 0

    Raises:
        MetadataMismatch: 배치가 다른 벡터가 섞였을 때
    """
    k = len(solutions)
    d = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            solutions[i].require_same_layout(solutions[j])
            diff = GridVector(solutions[i].values - solutions[j].values, solutions[i].mask,
                              solutions[i].variables, solutions[i].normalization, solutions[i].grid)
            d[i, j] = d[j, i] = norm(diff, weighted)
    return d


def triangle_violation(d: np.ndarray) -> float:
    """max_{i,j,k} d_ij - (d_ik + d_kj), 0 이하이면 삼각 부등식 성립"""
    d = np.asarray(d, dtype=np.float64)
    if d.shape[0] < 3:
        return 0.0
    # excess[i, j, k] = d_ij - (d_ik + d_kj)
    excess = d[:, :, None] - (d[:, None, :] + d.T[None, :, :])
    return float(max(0.0, excess.max()))


def pair_bound(d12: float) -> float:
    """두 해 모두의 오차 노름 상한으로서의 거리 d_12 (오차가 거의 직교할 때 유효)"""
    if d12 < 0:
        raise ValueError(f"거리는 음수가 될 수 없습니다: {d12}")
    return float(d12)


def hypercircle_estimate(u1: GridVector, u2: GridVector) -> float:
    """중점 (u1+u2)/2 의 오차 추정 d_12 / 2 (직교 오차에서 정확)"""
    u1.require_same_layout(u2)
    return 0.5 * float(np.linalg.norm(u1.values - u2.values))


def midpoint_error(e1: GridVector, e2: GridVector) -> float:
    """검증용: 두 오차 벡터로부터 중점 해의 실제 오차 노름"""
    e1.require_same_layout(e2)
    return float(np.linalg.norm(0.5 * (e1.values + e2.values)))


def dk_max(d: np.ndarray, k: int) -> float:
    d = np.asarray(d)
    if d.shape[0] < 2:
        raise ValueError("d_k,max 에는 해가 2개 이상 필요합니다")
    return float(np.max(d[k]))


def ensemble_width(d: np.ndarray) -> float:
    d = np.asarray(d)
    if d.shape[0] < 2:
        raise ValueError("앙상블 폭에는 해가 2개 이상 필요합니다")
    return float(np.max(d))


def angle_bound(d12: float, alpha_deg: float, rounded: bool = False) -> float:
    """
    오차 벡터 사이 각도 alpha 로부터 오차 노름 상한

    (d / (2 sin(alpha/2))) * (cos phi_max + 2 sin phi_max), phi_max = arctan 2

    Args:
        d12: 두 해 사이 거리
        alpha_deg: 오차 벡터 사이 각도 (0, 180]
        rounded: True 이면 반올림 계수 1.1 사용

    Raises:
        DegenerateAngle: alpha 가 (0, 180] 밖이거나 NaN
    """
    if not (0.0 < alpha_deg <= 180.0):
        raise DegenerateAngle(f"각도가 (0, 180] 범위 밖입니다: {alpha_deg}")
    constant = ROUNDED_ANGLE_CONSTANT if rounded else EXACT_ANGLE_CONSTANT
    return constant * d12 / math.sin(math.radians(alpha_deg) / 2.0)


def alpha_from_beta(beta_deg: float) -> float:
    """절단 오차 각도 beta 로부터 보수적 alpha 추정 beta/3"""
    if not (0.0 < beta_deg <= 180.0):
        raise DegenerateAngle(f"beta 가 (0, 180] 범위 밖입니다: {beta_deg}")
    return beta_deg / 3.0


def effectivity(estimate_norm: float, true_norm: float) -> float:
    """
    효율 지수 추정 노름 / 실제 노름

    Raises:
        ZeroTrueError: 실제 오차 노름이 0
    """
    if not true_norm > 0.0:
        raise ZeroTrueError(f"실제 오차 노름이 0 입니다: {true_norm}")
    return estimate_norm / true_norm


def _safe_angle_bound(d12: float, alpha_deg: float, rounded: bool = False) -> Optional[float]:
    try:
        return angle_bound(d12, alpha_deg, rounded)
    except DegenerateAngle:
        return None


def _safe_alpha_from_beta(beta_deg: float) -> Optional[float]:
    try:
        return alpha_from_beta(beta_deg)
    except DegenerateAngle:
        return None


def _json_number(value):
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


def _matrix(m: np.ndarray) -> List[List[Optional[float]]]:
    return [[_json_number(x) for x in row] for row in np.asarray(m)]


def json_safe(value):
    """중첩 dict/list 의 NaN, inf 를 None 으로, numpy 스칼라를 파이썬 값으로"""
    if isinstance(value, dict):
        return {k: json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return _json_number(value)
    return value


def mask_degenerate(angles: Optional[np.ndarray], d: np.ndarray) -> Optional[np.ndarray]:
    """거리 0 인 쌍의 각도는 정의되지 않음 (NaN)"""
    if angles is None:
        return None
    angles = np.array(angles, dtype=np.float64)
    zero = (np.asarray(d) == 0.0) & ~np.eye(d.shape[0], dtype=bool)
    angles[zero] = np.nan
    return angles


def _pair_entry(i: int, j: int, labels: Sequence[str], d: np.ndarray, alpha: np.ndarray,
                beta: np.ndarray, errors: Optional[Sequence[GridVector]],
                true_norms: Optional[Sequence[float]]) -> Dict[str, Any]:
    d_ij = float(d[i, j])
    alpha_ij = float(alpha[i, j]) if alpha is not None else math.nan
    beta_ij = float(beta[i, j])
    alpha_est = _safe_alpha_from_beta(beta_ij)
    entry = {
        "k": labels[i],
        "m": labels[j],
        "distance": d_ij,
        "degenerate": d_ij == 0.0,
        "alpha_deg": _json_number(alpha_ij),
        "beta_deg": _json_number(beta_ij),
        "alpha_from_beta_deg": alpha_est,
        "near_orthogonal": bool(alpha_ij >= ORTHOGONALITY_THRESHOLD_DEG),
        "pair_bound": pair_bound(d_ij),
        "hypercircle_estimate": 0.5 * d_ij,
        "angle_bound_direct": _safe_angle_bound(d_ij, alpha_ij),
        "angle_bound_direct_rounded": _safe_angle_bound(d_ij, alpha_ij, rounded=True),
        "angle_bound_beta": None if alpha_est is None else _safe_angle_bound(d_ij, alpha_est),
        "angle_bound_beta_rounded": None if alpha_est is None else _safe_angle_bound(d_ij, alpha_est, rounded=True),
    }
    if errors is not None:
        entry["midpoint_error"] = midpoint_error(errors[i], errors[j])
    if true_norms is not None:
        r_i, r_j = float(true_norms[i]), float(true_norms[j])
        precise = i if r_i <= r_j else j
        entry.update({
            "true_norm_k": r_i,
            "true_norm_m": r_j,
            # d_km 이 각 오차 노름 이상인지 (직교에 가까울 때 기대)
            "pair_bound_holds_k": d_ij >= r_i,
            "pair_bound_holds_m": d_ij >= r_j,
            "more_precise": labels[precise],
            "more_precise_bound_holds": d_ij >= min(r_i, r_j),
        })
        if not (entry["pair_bound_holds_k"] and entry["pair_bound_holds_m"]):
            logger.warning(f"쌍 ({labels[i]}, {labels[j]}): d={d_ij:.3e} 가 오차 노름 "
                           f"({r_i:.3e}, {r_j:.3e}) 중 하나보다 작습니다 (alpha={alpha_ij:.1f})")
    return entry


def _best_bound(pairs: List[Dict[str, Any]], label: str, key: str) -> Optional[float]:
    values = [p[key] for p in pairs if label in (p["k"], p["m"]) and p[key] is not None]
    return min(values) if values else None


@dataclass
class EnsembleReport:
    """
    한 실험의 앙상블 추정 결과

    distances 는 대칭, 대각 0 이며 삼각 부등식을 1e-9 안에서 만족
    """
    labels: List[str]
    distances: np.ndarray
    alpha: Optional[np.ndarray]
    beta: np.ndarray
    true_norms: Optional[List[float]] = None
    pairs: List[Dict[str, Any]] = field(default_factory=list)
    solutions: List[Dict[str, Any]] = field(default_factory=list)
    triangle_violation: float = 0.0
    config: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "labels": list(self.labels),
            "distances": _matrix(self.distances),
            "alpha_deg": None if self.alpha is None else _matrix(self.alpha),
            "beta_deg": _matrix(self.beta),
            "triangle_violation": self.triangle_violation,
            "ensemble_width": ensemble_width(self.distances),
            "solutions": self.solutions,
            "pairs": self.pairs,
            "config": self.config,
        }
        data = json_safe(data)
        data["effectivity_ranges"] = effectivity_ranges(data)
        return data

    def angle_statistics(self) -> Dict[str, Any]:
        stats = {"beta": angle_summary(self.beta)}
        if self.alpha is not None:
            stats["alpha"] = angle_summary(self.alpha)
            stats["relation"] = alpha_beta_relation(self.alpha, self.beta)
        return stats


def build_report(labels: Sequence[str], solutions: Sequence[GridVector], beta: np.ndarray,
                 errors: Optional[Sequence[GridVector]] = None, alpha: Optional[np.ndarray] = None,
                 config: Optional[Dict[str, Any]] = None, weighted: bool = False) -> EnsembleReport:
    """
    앙상블 전체 추정기 계산

    Args:
        labels: 해 이름
        solutions: 해 벡터 (거리 계산용)
        beta: 절단 오차 사이 각도 행렬
        errors: 근사 오차 벡터 (검증 모드, 정확해가 있을 때)
        alpha: 근사 오차 사이 각도 행렬 (검증 모드)
        config: 보고서에 그대로 기록할 설정
        weighted: 셀 면적 가중 노름 사용 여부

    Returns:
        EnsembleReport
    """
    labels = list(labels)
    if len(labels) < 2:
        raise ValueError(f"앙상블 추정에는 해가 2개 이상 필요합니다: {len(labels)}")
    d = distance_matrix(solutions, weighted)
    violation = triangle_violation(d)
    if violation > TRIANGLE_TOLERANCE:
        logger.warning(f"거리 행렬이 삼각 부등식을 {violation:.3e} 만큼 위반합니다")
    alpha = mask_degenerate(alpha, d)
    beta = mask_degenerate(beta, d)

    true_norms = None if errors is None else [norm(e, weighted) for e in errors]
    pairs = []
    for i in range(len(labels)):
        for j in range(i + 1, len(labels)):
            entry = _pair_entry(i, j, labels, d, alpha, beta, errors, true_norms)
            if entry["degenerate"]:
                logger.warning(f"쌍 ({labels[i]}, {labels[j]}) 거리가 0: 퇴화 쌍으로 기록")
            pairs.append(entry)

    width = ensemble_width(d)
    per_solution = []
    for k, label in enumerate(labels):
        direct = _best_bound(pairs, label, "angle_bound_direct")
        from_beta = _best_bound(pairs, label, "angle_bound_beta")
        d_k = dk_max(d, k)
        candidates = [("dk_max", d_k)] + ([("angle_bound_beta", from_beta)] if from_beta is not None else [])
        source, value = min(candidates, key=lambda c: c[1])
        per_solution.append({
            "label": label,
            "true_norm": None if true_norms is None else true_norms[k],
            "pair_bounds": {labels[m]: float(d[k, m]) for m in range(len(labels)) if m != k},
            "dk_max": d_k,
            "ensemble_width": width,
            "angle_bound_direct": direct,
            "angle_bound_beta": from_beta,
            "combined": {"value": value, "source": source},
        })
        if true_norms is not None and d_k < true_norms[k]:
            logger.warning(f"{label}: d_k,max={d_k:.3e} 가 실제 오차 {true_norms[k]:.3e} 보다 작습니다")

    report = EnsembleReport(labels, d, alpha, np.asarray(beta), true_norms, pairs, per_solution,
                            violation, dict(config or {}))
    for entry in per_solution:
        entry["effectivity"] = solution_effectivities(entry)
    return report


def solution_effectivities(entry: Dict[str, Any]) -> Dict[str, Optional[float]]:
    """해 하나의 저장된 추정값과 실제 노름으로 효율 지수 계산"""
    true_norm = entry.get("true_norm")
    keys = ("dk_max", "ensemble_width", "angle_bound_direct", "angle_bound_beta")
    result = {}
    for key in keys:
        value = entry.get(key)
        result[key] = _ratio(value, true_norm)
    result["combined"] = _ratio(entry.get("combined", {}).get("value"), true_norm)
    return result


def _ratio(estimate: Optional[float], true_norm: Optional[float]) -> Optional[float]:
    if estimate is None or true_norm is None:
        return None
    try:
        return effectivity(estimate, true_norm)
    except ZeroTrueError:
        return None


def _span(values: List[Optional[float]]) -> Optional[List[float]]:
    values = [v for v in values if v is not None and math.isfinite(v)]
    return [min(values), max(values)] if values else None


def effectivity_ranges(data: Dict[str, Any]) -> Dict[str, Optional[List[float]]]:
    """
    estimators.json 형식의 자료에서 추정기별 효율 지수 [최소, 최대] 재계산

    쌍 상한 d_km / |du_k|, 해별 d_k,max / |du_k|, 앙상블 폭 d_max / |du_k|,
    각도 상한 (직접 alpha 와 beta/3) / max(|du_k|, |du_m|)
    """
    solutions = data.get("solutions", [])
    pairs = data.get("pairs", [])
    pair_ratios, direct_ratios, beta_ratios = [], [], []
    for p in pairs:
        if p.get("true_norm_k") is None:
            continue
        pair_ratios += [_ratio(p["distance"], p["true_norm_k"]), _ratio(p["distance"], p["true_norm_m"])]
        larger = max(p["true_norm_k"], p["true_norm_m"])
        direct_ratios.append(_ratio(p.get("angle_bound_direct"), larger))
        beta_ratios.append(_ratio(p.get("angle_bound_beta"), larger))

    def per_solution(key):
        return _span([_ratio(s.get(key), s.get("true_norm")) for s in solutions])

    return {
        "pair_bound": _span(pair_ratios),
        "dk_max": per_solution("dk_max"),
        "ensemble_width": per_solution("ensemble_width"),
        "angle_bound_direct": _span(direct_ratios),
        "angle_bound_beta": _span(beta_ratios),
        "combined": _span([_ratio(s.get("combined", {}).get("value"), s.get("true_norm")) for s in solutions]),
    }
