import os
import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from errors import GridMismatch, NonPhysicalState
from gas_dynamics import DEFAULT_GAMMA, FlowState, primitive_to_conserved

logger = logging.getLogger("flow_field")

# 원시 이진 형식: int64 헤더 (nx, ny, 4) + little-endian float64 (C 순서)
RAW_HEADER_DTYPE = np.dtype("<i8")
RAW_DATA_DTYPE = np.dtype("<f8")
NUM_VARIABLES = 4
VARIABLE_NAMES = ("rho", "rho_u", "rho_v", "rho_E")


@dataclass(frozen=True)
class GridSpec:
    """
    균일 구조 격자

    Args:
        nx, ny: 노드 수 (8 이상)
        x0, y0: 영역 원점
        lx, ly: 영역 크기
    """
    nx: int
    ny: int
    x0: float = 0.0
    y0: float = 0.0
    lx: float = 1.0
    ly: float = 1.0

    def __post_init__(self):
        if self.nx < 8 or self.ny < 8:
            raise ValueError(f"격자 노드 수는 8 이상이어야 합니다: nx={self.nx}, ny={self.ny}")
        if not (self.lx > 0.0 and self.ly > 0.0):
            raise ValueError(f"영역 크기는 양수여야 합니다: lx={self.lx}, ly={self.ly}")

    @property
    def hx(self) -> float:
        return self.lx / (self.nx - 1)

    @property
    def hy(self) -> float:
        return self.ly / (self.ny - 1)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.nx, self.ny)

    def x(self) -> np.ndarray:
        return self.x0 + self.hx * np.arange(self.nx)

    def y(self) -> np.ndarray:
        return self.y0 + self.hy * np.arange(self.ny)

    def nodes(self) -> Tuple[np.ndarray, np.ndarray]:
        """노드 좌표 (X, Y), 배열 모양 (nx, ny)"""
        return np.meshgrid(self.x(), self.y(), indexing="ij")

    def as_dict(self) -> Dict[str, float]:
        return {"nx": self.nx, "ny": self.ny, "x0": self.x0, "y0": self.y0, "lx": self.lx, "ly": self.ly}

    def require_same(self, other: "GridSpec") -> None:
        if self != other:
            raise GridMismatch(f"격자가 일치하지 않습니다: {self.as_dict()} vs {other.as_dict()}")


@dataclass
class ConservedField:
    """
    보존 변수 (rho, rho*u, rho*v, rho*E) 격자 함수

    data 배열 모양은 (nx, ny, 4), 첫 번째 인덱스가 x 방향
    """
    grid: GridSpec
    data: np.ndarray
    gamma: float = DEFAULT_GAMMA

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        expected = (self.grid.nx, self.grid.ny, NUM_VARIABLES)
        if self.data.shape != expected:
            raise GridMismatch(f"데이터 모양 {self.data.shape}이 격자 {expected}와 다릅니다")

    @classmethod
    def uniform(cls, grid: GridSpec, state: FlowState) -> "ConservedField":
        data = np.empty((grid.nx, grid.ny, NUM_VARIABLES))
        data[...] = primitive_to_conserved(state)
        return cls(grid, data, state.gamma)

    def copy(self) -> "ConservedField":
        return ConservedField(self.grid, self.data.copy(), self.gamma)

    @property
    def density(self) -> np.ndarray:
        return self.data[..., 0]

    def primitives(self) -> Dict[str, np.ndarray]:
        """노드별 원시 변수 배열 (rho, u, v, p)"""
        rho = self.data[..., 0]
        u = self.data[..., 1] / rho
        v = self.data[..., 2] / rho
        p = (self.gamma - 1.0) * (self.data[..., 3] - 0.5 * rho * (u * u + v * v))
        return {"rho": rho, "u": u, "v": v, "p": p}

    def check_physical(self) -> None:
        """
        모든 노드가 유효한 상태인지 확인

        Raises:
            NonPhysicalState: 밀도 또는 압력이 양수가 아니거나 유한하지 않은 첫 노드
        """
        prim = self.primitives()
        bad = ~(np.isfinite(self.data).all(axis=-1) & (prim["rho"] > 0.0) & (prim["p"] > 0.0))
        if bad.any():
            i, j = (int(k) for k in np.argwhere(bad)[0])
            raise NonPhysicalState(
                f"비물리적 상태: rho={prim['rho'][i, j]:.6g}, p={prim['p'][i, j]:.6g}", node=(i, j)
            )

    def write_raw(self, path: str) -> None:
        """헤더 (nx, ny, 4) 와 float64 데이터를 원시 이진 파일로 저장"""
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        header = np.array([self.grid.nx, self.grid.ny, NUM_VARIABLES], dtype=RAW_HEADER_DTYPE)
        with open(path, "wb") as file:
            file.write(header.tobytes())
            file.write(np.ascontiguousarray(self.data, dtype=RAW_DATA_DTYPE).tobytes(order="C"))

    @classmethod
    def read_raw(cls, path: str, grid: Optional[GridSpec] = None, gamma: float = DEFAULT_GAMMA) -> "ConservedField":
        """
        원시 이진 파일 로드

        Args:
            path: 파일 경로
            grid: 영역 정보, 없으면 단위 정사각형
            gamma: 비열비

        Returns:
            ConservedField (저장 값과 비트 단위로 동일)
        """
        with open(path, "rb") as file:
            header = np.frombuffer(file.read(3 * RAW_HEADER_DTYPE.itemsize), dtype=RAW_HEADER_DTYPE)
            nx, ny, nvar = (int(k) for k in header)
            data = np.frombuffer(file.read(), dtype=RAW_DATA_DTYPE)
        if nvar != NUM_VARIABLES or data.size != nx * ny * nvar:
            raise GridMismatch(f"원시 파일 헤더와 데이터 크기가 맞지 않습니다: {path}")
        if grid is None:
            grid = GridSpec(nx, ny)
        elif grid.shape != (nx, ny):
            raise GridMismatch(f"원시 파일 격자 ({nx}, {ny})가 {grid.shape}와 다릅니다")
        return cls(grid, data.reshape(nx, ny, nvar).copy(), gamma)

    def write_vtk(self, path: str) -> None:
        """보존 변수와 원시 변수를 legacy VTK structured points 파일로 저장"""
        arrays = {name: self.data[..., k] for k, name in enumerate(VARIABLE_NAMES)}
        arrays.update({f"prim_{k}": v for k, v in self.primitives().items() if k != "rho"})
        write_vtk_arrays(path, self.grid, arrays)


def write_vtk_arrays(path: str, grid: GridSpec, arrays: Dict[str, np.ndarray], active: Optional[str] = None) -> None:
    """
    (nx, ny) 노드 배열들을 legacy VTK structured points 형식으로 저장

    Args:
        path: 출력 파일 경로
        grid: 격자
        arrays: 이름 -> (nx, ny) 배열
        active: 활성 스칼라 이름, 없으면 첫 번째 배열
    """
    import vtk
    from vtk.util import numpy_support

    dataset = vtk.vtkStructuredPoints()
    dataset.SetDimensions(grid.nx, grid.ny, 1)
    dataset.SetOrigin(grid.x0, grid.y0, 0.0)
    dataset.SetSpacing(grid.hx, grid.hy, 1.0)

    for name, values in arrays.items():
        values = np.asarray(values, dtype=np.float64)
        if values.shape != grid.shape:
            raise GridMismatch(f"VTK 배열 {name}의 모양 {values.shape}이 격자 {grid.shape}와 다릅니다")
        # VTK 점 순서는 x 인덱스가 가장 빠름
        vtk_array = numpy_support.numpy_to_vtk(np.ascontiguousarray(values.ravel(order="F")), deep=True)
        vtk_array.SetNumberOfComponents(1)
        vtk_array.SetName(name)
        dataset.GetPointData().AddArray(vtk_array)
    if arrays:
        dataset.GetPointData().SetActiveScalars(active or next(iter(arrays)))

    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    writer = vtk.vtkStructuredPointsWriter()
    writer.SetFileName(path)
    writer.SetFileVersion(42)
    writer.SetInputData(dataset)
    writer.Write()
    logger.debug(f"VTK 저장: {path}")
