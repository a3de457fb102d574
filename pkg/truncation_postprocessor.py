import os
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from errors import MetadataMismatch, StencilOutOfRange
from euler_schemes import physical_flux, swap_xy
from flow_field import VARIABLE_NAMES, ConservedField, GridSpec, write_vtk_arrays

logger = logging.getLogger("truncation_postprocessor")

STENCIL_HALF_WIDTH = 3
DEFAULT_NORMALIZATION = (1.0, 1.0, 1.0, 1.0)
ALL_VARIABLES = (0, 1, 2, 3)


def freestream_normalization(rho: float = 1.0, sound_speed: float = 1.0) -> Tuple[float, float, float, float]:
    """자유류 크기 (rho, rho*a, rho*a, rho*a^2), 무차원화에서는 모두 1"""
    return (rho, rho * sound_speed, rho * sound_speed, rho * sound_speed ** 2)


def resolve_variables(selection: Union[str, Sequence[int]]) -> Tuple[int, ...]:
    """'all' | 'density' | 인덱스 목록을 변수 인덱스 튜플로"""
    if isinstance(selection, str):
        if selection == "all":
            return ALL_VARIABLES
        if selection == "density":
            return (0,)
        raise ValueError(f"알 수 없는 변수 선택: {selection}")
    variables = tuple(int(k) for k in selection)
    if not variables or any(k not in ALL_VARIABLES for k in variables):
        raise ValueError(f"변수 인덱스가 유효하지 않습니다: {selection}")
    return variables


@dataclass(frozen=True)
class InteriorMask:
    """경계에서 margin 노드를 뺀 내부 노드 집합"""
    nx: int
    ny: int
    margin: int = STENCIL_HALF_WIDTH

    def __post_init__(self):
        if self.margin < 0 or 2 * self.margin >= min(self.nx, self.ny):
            raise ValueError(f"마스크 여백이 격자에 비해 너무 큽니다: margin={self.margin}")

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.nx - 2 * self.margin, self.ny - 2 * self.margin)

    @property
    def count(self) -> int:
        return self.shape[0] * self.shape[1]

    @property
    def slices(self) -> Tuple[slice, slice]:
        m = self.margin
        return slice(m, self.nx - m), slice(m, self.ny - m)

    def node_indices(self) -> Tuple[np.ndarray, np.ndarray]:
        """마스크 노드의 전체 격자 인덱스 (i, j), C 순서"""
        i, j = np.meshgrid(np.arange(self.margin, self.nx - self.margin),
                           np.arange(self.margin, self.ny - self.margin), indexing="ij")
        return i.ravel(), j.ravel()

    @classmethod
    def for_grid(cls, grid: GridSpec, margin: int = STENCIL_HALF_WIDTH) -> "InteriorMask":
        return cls(grid.nx, grid.ny, margin)


@dataclass
class GridVector:
    """
    R^N 으로 펼친 격자 함수 (오차 또는 절단 오차)

    values는 (마스크 노드, 변수) 순서로 펼쳐진 길이 N = |mask| * |variables| 배열
    """
    values: np.ndarray
    mask: InteriorMask
    variables: Tuple[int, ...] = ALL_VARIABLES
    normalization: Tuple[float, ...] = DEFAULT_NORMALIZATION
    grid: Optional[GridSpec] = field(default=None, compare=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64).ravel()
        self.variables = tuple(self.variables)
        self.normalization = tuple(float(s) for s in self.normalization)
        if self.values.size != self.mask.count * len(self.variables):
            raise MetadataMismatch(
                f"값 개수 {self.values.size}가 |mask|*|variables| = "
                f"{self.mask.count}*{len(self.variables)}와 다릅니다")
        if not np.isfinite(self.values).all():
            raise ValueError("GridVector 값에 유한하지 않은 항목이 있습니다")

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "GridVector":
        """
        합성 벡터 생성 (단위 테스트, 추정기 검증용)

        길이 N 벡터를 1 x N 노드의 단일 변수 벡터로 취급
        """
        values = np.asarray(values, dtype=np.float64).ravel()
        return cls(values, InteriorMask(1, values.size, 0), (0,), (1.0,))

    @classmethod
    def from_node_array(cls, array: np.ndarray, mask: InteriorMask,
                        variables: Tuple[int, ...] = ALL_VARIABLES,
                        normalization: Tuple[float, ...] = DEFAULT_NORMALIZATION,
                        grid: Optional[GridSpec] = None) -> "GridVector":
        """
        전체 격자 배열 (nx, ny, 4) 에서 마스크와 변수 선택, 정규화 적용
        """
        si, sj = mask.slices
        scale = np.asarray([normalization[k] for k in variables])
        selected = array[si, sj][..., list(variables)] / scale
        return cls(selected.ravel(), mask, variables, normalization, grid)

    @property
    def size(self) -> int:
        return self.values.size

    def layout(self) -> Tuple:
        return (self.mask, self.variables, self.normalization)

    def require_same_layout(self, other: "GridVector") -> None:
        if self.layout() != other.layout():
            raise MetadataMismatch(
                f"GridVector 메타데이터가 다릅니다: {self.layout()} vs {other.layout()}")

    def to_node_array(self) -> np.ndarray:
        """(마스크 nx, 마스크 ny, 변수 수) 모양으로 복원"""
        return self.values.reshape(self.mask.shape + (len(self.variables),))

    def to_frame(self) -> pd.DataFrame:
        """노드 i, j, 변수, 값 표"""
        i, j = self.mask.node_indices()
        nv = len(self.variables)
        names = [VARIABLE_NAMES[k] for k in self.variables]
        return pd.DataFrame({
            "i": np.repeat(i, nv),
            "j": np.repeat(j, nv),
            "variable": np.tile(names, i.size),
            "value": self.values,
        })

    def to_csv(self, path: str) -> None:
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        self.to_frame().to_csv(path, index=False)

    def write_vtk(self, path: str, prefix: str = "") -> None:
        """마스크 밖은 NaN 으로 채운 전체 격자 VTK 필드"""
        if self.grid is None:
            raise MetadataMismatch("격자 정보가 없는 GridVector는 VTK로 저장할 수 없습니다")
        nodes = self.to_node_array()
        si, sj = self.mask.slices
        arrays = {}
        for n, k in enumerate(self.variables):
            full = np.full(self.grid.shape, np.nan)
            full[si, sj] = nodes[..., n]
            arrays[f"{prefix}{VARIABLE_NAMES[k]}"] = full
        write_vtk_arrays(path, self.grid, arrays)


def stencil_d1_sixth(values: Sequence[float], k: int, h: float) -> float:
    """
    6차 정확도 중심 1계 도함수 (+d/dx 방향)

    (45(f[k+1]-f[k-1]) - 9(f[k+2]-f[k-2]) + (f[k+3]-f[k-3])) / (60h)

    Args:
        values: 등간격 1차원 샘플
        k: 도함수를 구할 인덱스 (양 끝에서 3 이상)
        h: 간격

    Raises:
        StencilOutOfRange: k가 끝에서 3 노드 이내일 때
    """
    f = np.asarray(values, dtype=np.float64)
    if k < STENCIL_HALF_WIDTH or k > f.size - 1 - STENCIL_HALF_WIDTH:
        raise StencilOutOfRange(f"스텐실이 범위를 벗어납니다: k={k}, 길이={f.size}")
    return float((45.0 * (f[k + 1] - f[k - 1]) - 9.0 * (f[k + 2] - f[k - 2])
                  + (f[k + 3] - f[k - 3])) / (60.0 * h))


def sixth_order_derivative(f: np.ndarray, h: float, axis: int = 0) -> np.ndarray:
    """
    축 방향 6차 중심 도함수, 양 끝 3 노드를 뺀 범위에서 계산

    결과의 해당 축 길이는 n - 6
    """
    f = np.moveaxis(np.asarray(f, dtype=np.float64), axis, 0)
    n = f.shape[0]
    if n < 2 * STENCIL_HALF_WIDTH + 1:
        raise StencilOutOfRange(f"도함수 축 길이가 7보다 작습니다: {n}")

    def shifted(m):
        return f[STENCIL_HALF_WIDTH + m:n - STENCIL_HALF_WIDTH + m]

    d = (45.0 * (shifted(1) - shifted(-1)) - 9.0 * (shifted(2) - shifted(-2))
         + (shifted(3) - shifted(-3))) / (60.0 * h)
    return np.moveaxis(d, 0, axis)


def flux_divergence(field: ConservedField) -> np.ndarray:
    """
    6차 스텐실로 계산한 정상 오일러 플럭스 발산 dF/dx + dG/dy

    Returns:
        (nx-6, ny-6, 4) 배열 (경계 3 노드 제외)
    """
    s = STENCIL_HALF_WIDTH
    flux_x = physical_flux(field.data, field.gamma)
    flux_y = swap_xy(physical_flux(swap_xy(field.data), field.gamma))
    dfdx = sixth_order_derivative(flux_x[:, s:-s], field.grid.hx, axis=0)
    dgdy = sixth_order_derivative(flux_y[s:-s, :], field.grid.hy, axis=1)
    return dfdx + dgdy


def high_order_residual(field: ConservedField, margin: int = STENCIL_HALF_WIDTH,
                        variables: Union[str, Sequence[int]] = "all",
                        normalization: Tuple[float, ...] = DEFAULT_NORMALIZATION) -> GridVector:
    """
    계산된 정상 해에 고차 이산 연산자를 적용해 절단 오차 추정

    Args:
        field: 정상 해
        margin: 내부 마스크 여백 (3 이상)
        variables: 포함할 보존 변수
        normalization: 변수별 정규화 계수

    Returns:
        절단 오차 GridVector

    Raises:
        StencilOutOfRange: margin < 3
    """
    if margin < STENCIL_HALF_WIDTH:
        raise StencilOutOfRange(f"마스크 여백은 {STENCIL_HALF_WIDTH} 이상이어야 합니다: {margin}")
    mask = InteriorMask.for_grid(field.grid, margin)
    full = np.zeros(field.data.shape)
    s = STENCIL_HALF_WIDTH
    full[s:-s, s:-s] = flux_divergence(field)
    return GridVector.from_node_array(full, mask, resolve_variables(variables), normalization, field.grid)
