import json
import os
import logging
from dataclasses import asdict, dataclass, field, fields
from typing import Dict, Any, List, Optional

from errors import ConfigError
from solver_ensemble import SchemeConfig, default_ensemble

CASES = ("oblique", "edney1", "edney6")
ANGLE_CONVENTIONS = ("absolute", "relative")
ERROR_VARIABLES = ("all", "density")


@dataclass
class ExperimentConfig:
    """
    실험 하나의 전체 설정 (모든 기본값 포함, summary.json 에 그대로 기록)
    """
    case: str = "edney1"
    mach: float = 4.0
    theta_deg: float = 20.0
    alpha1_deg: float = 20.0
    alpha2_deg: float = 15.0
    edney6_angle_convention: str = "absolute"
    gamma: float = 1.4
    nx: int = 100
    ny: int = 100
    anchor_x: float = 0.0
    anchor_y: float = 0.2
    schemes: List[SchemeConfig] = field(default_factory=default_ensemble)
    error_variables: str = "all"
    mask_margin: int = 3
    centered_angles: bool = False
    output_dir: str = "output/edney1"
    jobs: int = 1
    seed: int = 12345
    write_vtk: bool = True
    log_interval: int = 1000
    mc_dims: List[int] = field(default_factory=lambda: [100, 1000, 10000])
    mc_deltas: List[float] = field(default_factory=lambda: [0.01, 0.05, 0.1])
    mc_samples: int = 1000000

    def __post_init__(self):
        self.schemes = [s if isinstance(s, SchemeConfig) else SchemeConfig.from_dict(s) for s in self.schemes]
        self.validate()

    def validate(self) -> None:
        """
        값 범위 검사

        Raises:
            ConfigError: 잘못된 값
        """
        if self.case not in CASES:
            raise ConfigError(f"case 는 {CASES} 중 하나여야 합니다: {self.case}")
        if not self.mach > 1.0:
            raise ConfigError(f"자유류 마하수는 1보다 커야 합니다: {self.mach}")
        if not self.gamma > 1.0:
            raise ConfigError(f"비열비는 1보다 커야 합니다: {self.gamma}")
        if self.edney6_angle_convention not in ANGLE_CONVENTIONS:
            raise ConfigError(f"알 수 없는 각도 규약: {self.edney6_angle_convention}")
        if self.nx < 8 or self.ny < 8:
            raise ConfigError(f"격자는 8x8 이상이어야 합니다: {self.nx}x{self.ny}")
        if self.error_variables not in ERROR_VARIABLES:
            raise ConfigError(f"error_variables 는 all 또는 density: {self.error_variables}")
        if self.mask_margin < 3 or 2 * self.mask_margin >= min(self.nx, self.ny):
            raise ConfigError(f"mask_margin 은 3 이상이고 격자보다 작아야 합니다: {self.mask_margin}")
        if len(self.schemes) < 2:
            raise ConfigError(f"앙상블 분석에는 스킴이 2개 이상 필요합니다: {len(self.schemes)}")
        if self.jobs < 1 or self.log_interval < 1:
            raise ConfigError("jobs 와 log_interval 은 1 이상이어야 합니다")
        if self.mc_samples < 1 or any(n < 2 for n in self.mc_dims):
            raise ConfigError("mc_samples >= 1, mc_dims 의 각 값 >= 2 이어야 합니다")
        if any(not 0.0 < d < 1.0 for d in self.mc_deltas):
            raise ConfigError(f"mc_deltas 는 (0, 1) 범위여야 합니다: {self.mc_deltas}")

    @property
    def anchor(self):
        return (self.anchor_x, self.anchor_y)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["schemes"] = [asdict(s) for s in self.schemes]
        return data

    def replace(self, **changes) -> "ExperimentConfig":
        data = self.to_dict()
        data.update(changes)
        return ExperimentConfig(**data)


class ConfigLoader:
    """
    설정 파일을 로드하는 유틸리티 클래스
    """
    def __init__(self, config_dir: str = "config"):
        """
        ConfigLoader 초기화

        Args:
            config_dir: 설정 파일이 저장된 디렉토리 경로
        """
        self.config_dir = config_dir

        # 로거 설정
        self.logger = logging.getLogger("config_loader")

        # 설정 디렉토리가 없으면 생성
        if not os.path.exists(config_dir):
            os.makedirs(config_dir)

    def resolve_path(self, path: str) -> str:
        """경로 그대로 없으면 config_dir 기준으로 찾음"""
        if os.path.exists(path):
            return path
        return os.path.join(self.config_dir, path)

    def load_experiment_config(self, path: Optional[str] = None,
                               overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
        """
        실험 설정 로드 (파일 값을 기본값 위에 덮어씀)

        Args:
            path: JSON 파일 경로 (없으면 기본값만 사용)
            overrides: 명령행 등에서 온 추가 덮어쓰기 값

        Returns:
            ExperimentConfig

        Raises:
            ConfigError: 파일이 없거나, JSON 이 잘못됐거나, 값이 유효하지 않을 때
        """
        data: Dict[str, Any] = {}
        if path:
            filepath = self.resolve_path(path)
            if not os.path.exists(filepath):
                raise ConfigError(f"설정 파일이 없습니다: {path}")
            data = self._load_json(filepath)
            if not isinstance(data, dict):
                raise ConfigError(f"설정 파일 최상위는 객체여야 합니다: {path}")

        known = {f.name for f in fields(ExperimentConfig)}
        unknown = sorted(set(data) - known)
        if unknown:
            self.logger.warning(f"알 수 없는 설정 키 무시: {unknown}")
        values = {k: v for k, v in data.items() if k in known}
        values.update({k: v for k, v in (overrides or {}).items() if v is not None})
        try:
            return ExperimentConfig(**values)
        except ConfigError:
            raise
        except (TypeError, ValueError) as e:
            raise ConfigError(f"설정 값이 올바르지 않습니다: {e}") from e

    def save_config(self, filename: str, data: Dict[str, Any]) -> bool:
        """
        설정 파일 저장

        Args:
            filename: 설정 파일 이름
            data: 저장할 데이터

        Returns:
            저장 성공 여부
        """
        path = os.path.join(self.config_dir, filename)
        return self._save_json(path, data)

    def _load_json(self, filepath: str) -> Dict[str, Any]:
        """
        JSON 파일을 로드

        Args:
            filepath: JSON 파일 경로

        Returns:
            JSON 내용을 담은 딕셔너리

        Raises:
            ConfigError: 읽기 또는 파싱 실패
        """
        try:
            with open(filepath, 'r', encoding='utf-8') as file:
                return json.load(file)
        except Exception as e:
            self.logger.error(f"Error loading {filepath}: {e}")
            raise ConfigError(f"{filepath} 읽기 실패: {e}") from e

    def _save_json(self, filepath: str, data: Dict[str, Any]) -> bool:
        """
        JSON 파일 저장

        Args:
            filepath: 저장할 경로
            data: 저장할 데이터

        Returns:
            저장 성공 여부
        """
        try:
            with open(filepath, 'w', encoding='utf-8') as file:
                json.dump(data, file, indent=4, ensure_ascii=False)
            return True
        except Exception as e:
            self.logger.error(f"Error saving {filepath}: {e}")
            return False

    def create_default_configs(self) -> List[str]:
        """
        기본 실험 설정 파일 생성

        Returns:
            생성한 파일 이름 목록
        """
        experiments = {
            # 반대 계열 두 경사 충격파의 정규 교차
            "experiment_edney1.json": ExperimentConfig(),
            # 연속 경사면의 같은 계열 충격파 합류
            "experiment_edney6.json": ExperimentConfig(
                case="edney6", mach=3.5, alpha1_deg=15.0, alpha2_deg=25.0, output_dir="output/edney6"),
            "experiment_oblique.json": ExperimentConfig(
                case="oblique", mach=2.5, theta_deg=15.0, output_dir="output/oblique"),
        }
        for filename, config in experiments.items():
            self.save_config(filename, config.to_dict())
        return list(experiments)


# 기본 사용 예시
if __name__ == "__main__":
    config = ConfigLoader()

    # 기본 설정 파일이 없으면 생성
    if not os.path.exists(os.path.join(config.config_dir, "experiment_edney1.json")):
        config.create_default_configs()
        print("기본 설정 파일이 생성되었습니다. config/experiment_*.json 파일을 수정하세요.")

    experiment = config.load_experiment_config("experiment_edney1.json")
    print(f"사례: {experiment.case}, M={experiment.mach}, 격자 {experiment.nx}x{experiment.ny}")
    print(f"스킴: {[s.label for s in experiment.schemes]}")
