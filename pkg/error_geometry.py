import os
import math
import logging
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from errors import GridMismatch, ZeroVector
from flow_field import ConservedField
from truncation_postprocessor import (
    DEFAULT_NORMALIZATION,
    GridVector,
    InteriorMask,
    resolve_variables,
)

logger = logging.getLogger("error_geometry")


def _check_mask(field: ConservedField, mask: InteriorMask) -> None:
    if (mask.nx, mask.ny) != field.grid.shape:
        raise GridMismatch(f"마스크 ({mask.nx}, {mask.ny})가 격자 {field.grid.shape}와 다릅니다")


def error_vector(numerical: ConservedField, exact: ConservedField, mask: Optional[InteriorMask] = None,
                 variables: Union[str, Sequence[int]] = "all",
                 normalization: Tuple[float, ...] = DEFAULT_NORMALIZATION) -> GridVector:
    """
    근사 오차 벡터 u_h - u_exact

    Args:
        numerical: 수치해
        exact: 격자에 투영한 정확해
        mask: 내부 마스크 (없으면 여백 3)
        variables: 'all' | 'density' | 인덱스 목록
        normalization: 변수별 정규화 계수

    Returns:
        GridVector

    Raises:
        GridMismatch: 두 장의 격자가 다를 때
    """
    numerical.grid.require_same(exact.grid)
    mask = mask or InteriorMask.for_grid(numerical.grid)
    _check_mask(numerical, mask)
    return GridVector.from_node_array(numerical.data - exact.data, mask, resolve_variables(variables),
                                      normalization, numerical.grid)


def solution_vector(field: ConservedField, mask: Optional[InteriorMask] = None,
                    variables: Union[str, Sequence[int]] = "all",
                    normalization: Tuple[float, ...] = DEFAULT_NORMALIZATION) -> GridVector:
    """수치해 자체를 오차 벡터와 같은 배치로 펼침 (해 사이 거리 계산용)"""
    mask = mask or InteriorMask.for_grid(field.grid)
    _check_mask(field, mask)
    return GridVector.from_node_array(field.data, mask, resolve_variables(variables), normalization, field.grid)


def inner_product(a: GridVector, b: GridVector) -> float:
    """
    유클리드 내적

    Raises:
        MetadataMismatch: 마스크, 변수, 정규화가 다를 때
    """
    a.require_same_layout(b)
    return float(np.dot(a.values, b.values))


def norm(a: GridVector, weighted: bool = False) -> float:
    """L2 노름, weighted=True 이면 셀 면적 sqrt(hx*hy) 를 곱함"""
    value = math.sqrt(inner_product(a, a))
    if weighted:
        if a.grid is None:
            raise GridMismatch("가중 노름에는 격자 정보가 필요합니다")
        value *= math.sqrt(a.grid.hx * a.grid.hy)
    return value


def angle_between(a: GridVector, b: GridVector, centered: bool = False) -> float:
    """
    두 벡터 사이 각도 (도)

    중심화하지 않은 코사인 (a, b) / (|a| |b|) 을 [-1, 1]로 자른 뒤 arccos.
    centered=True 이면 평균을 뺀 통계적 Pearson 계수 사용.

    Raises:
        ZeroVector: 어느 한 벡터의 노름이 0
    """
    a.require_same_layout(b)
    x, y = a.values, b.values
    if centered:
        x = x - x.mean()
        y = y - y.mean()
    xx = float(np.dot(x, x))
    yy = float(np.dot(y, y))
    if xx == 0.0 or yy == 0.0:
        raise ZeroVector("영벡터와의 각도는 정의되지 않습니다")
    cosine = float(np.dot(x, y)) / math.sqrt(xx * yy)
    return math.degrees(math.acos(min(1.0, max(-1.0, cosine))))


def pairwise_angles(vectors: Sequence[GridVector], centered: bool = False, on_zero: str = "raise") -> np.ndarray:
    """
    K x K 대칭 각도 행렬 (도), 대각은 0

    Args:
        vectors: 같은 배치의 GridVector K개 (K >= 2)
        centered: 평균 중심화 여부
        on_zero: 영벡터 쌍 처리 ("raise" 또는 "nan")
    """
    k = len(vectors)
    if k < 2:
        raise ValueError(f"각도 행렬에는 벡터가 2개 이상 필요합니다: {k}")
    angles = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            try:
                angles[i, j] = angle_between(vectors[i], vectors[j], centered)
            except ZeroVector:
                if on_zero != "nan":
                    raise
                logger.warning(f"영벡터 쌍 ({i}, {j}): 각도를 정의할 수 없어 NaN으로 기록")
                angles[i, j] = np.nan
            angles[j, i] = angles[i, j]
    return angles


def upper_pairs(matrix: np.ndarray) -> np.ndarray:
    """대각 위 K(K-1)/2 개 항목"""
    i, j = np.triu_indices(matrix.shape[0], k=1)
    return matrix[i, j]


def angle_summary(matrix: np.ndarray) -> Dict[str, float]:
    """
    대각 위 항목의 평균, 최소, 최대 (정의되지 않은 쌍 제외)

    Returns:
        {"mean", "min", "max", "pairs", "defined_pairs"}
    """
    values = upper_pairs(np.asarray(matrix, dtype=np.float64))
    defined = values[np.isfinite(values)]
    if defined.size == 0:
        return {"mean": math.nan, "min": math.nan, "max": math.nan,
                "pairs": int(values.size), "defined_pairs": 0}
    return {
        "mean": float(np.mean(defined)),
        "min": float(np.min(defined)),
        "max": float(np.max(defined)),
        "pairs": int(values.size),
        "defined_pairs": int(defined.size),
    }


def alpha_beta_relation(alpha: np.ndarray, beta: np.ndarray) -> Dict[str, float]:
    """
    쌍별 alpha >= beta/3 과 beta > alpha 가 성립하는 비율
    """
    a, b = upper_pairs(alpha), upper_pairs(beta)
    ok = np.isfinite(a) & np.isfinite(b)
    if not ok.any():
        return {"alpha_ge_beta_over_3": math.nan, "beta_gt_alpha": math.nan, "pairs": 0}
    a, b = a[ok], b[ok]
    return {
        "alpha_ge_beta_over_3": float(np.mean(a >= b / 3.0)),
        "beta_gt_alpha": float(np.mean(b > a)),
        "pairs": int(a.size),
    }


def matrix_frame(matrix: np.ndarray, labels: Sequence[str]) -> pd.DataFrame:
    return pd.DataFrame(np.asarray(matrix), index=list(labels), columns=list(labels))


def write_matrix_csv(path: str, matrix: np.ndarray, labels: Sequence[str]) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    matrix_frame(matrix, labels).to_csv(path, index_label="solution", float_format="%.17g")


def scatter_frame(alpha: np.ndarray, beta: np.ndarray) -> pd.DataFrame:
    """(beta_km, alpha_km) 두 열 산점도 자료"""
    return pd.DataFrame({"beta_deg": upper_pairs(beta), "alpha_deg": upper_pairs(alpha)})


def write_scatter_csv(path: str, alpha: np.ndarray, beta: np.ndarray) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    scatter_frame(alpha, beta).to_csv(path, index=False, float_format="%.17g")


def pair_labels(labels: Sequence[str]) -> List[Tuple[str, str]]:
    i, j = np.triu_indices(len(labels), k=1)
    return [(labels[a], labels[b]) for a, b in zip(i, j)]
