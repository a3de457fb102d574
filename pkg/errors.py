from typing import Optional, Tuple


class WorkbenchError(Exception):
    """검증 워크벤치 공통 예외"""


class ConfigError(WorkbenchError):
    """실험 설정 값이 유효하지 않음"""


class NonPhysicalState(WorkbenchError):
    """
    밀도 또는 압력이 양수가 아닌 상태 (솔버 발산 신호)

    Args:
        message: 오류 메시지
        node: 문제가 된 격자 노드 인덱스 (i, j), 알 수 없으면 None
    """

    def __init__(self, message: str, node: Optional[Tuple[int, int]] = None):
        if node is not None:
            message = f"{message} (node i={node[0]}, j={node[1]})"
        super().__init__(message)
        self.node = node


class DetachedShock(WorkbenchError):
    """편향각이 부착 충격파의 최대 편향각 이상"""


class SubsonicNormalMach(WorkbenchError):
    """충격파 수직 마하수가 1 이하"""


class SubsonicInput(WorkbenchError):
    """초음속 입력이 필요한 관계식에 아음속 마하수 입력"""


class NoRegularSolution(WorkbenchError):
    """슬립라인 방향 탐색이 근을 감싸지 못함 (마하 반사 영역)"""


class StencilOutOfRange(WorkbenchError):
    """고차 스텐실이 격자 범위를 벗어남"""


class GridMismatch(WorkbenchError):
    """두 격자 함수의 GridSpec 불일치"""


class MetadataMismatch(WorkbenchError):
    """GridVector 마스크/변수/정규화 메타데이터 불일치"""


class ZeroVector(WorkbenchError):
    """영벡터와의 각도는 정의되지 않음"""


class DegenerateAngle(WorkbenchError):
    """각도가 허용 범위 (0°, 180°] 밖"""


class ZeroTrueError(WorkbenchError):
    """참 오차 노름이 0이라 유효도 지수를 계산할 수 없음"""


class InvalidParams(WorkbenchError):
    """몬테카를로 파라미터가 유효하지 않음"""


class NotConverged(WorkbenchError):
    """의사시간 반복이 수렴 기준에 도달하지 못함"""
