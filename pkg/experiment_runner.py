import json
import logging
import os
from typing import Any, Dict, List, Optional, Tuple

from analytic_reference import analytic_invariants, build_case, project_to_grid
from config_loader import ExperimentConfig
from errors import ConfigError, WorkbenchError
from error_geometry import (
    error_vector,
    pair_labels,
    pairwise_angles,
    solution_vector,
    upper_pairs,
    write_matrix_csv,
    write_scatter_csv,
)
from estimators import EnsembleReport, build_report, effectivity_ranges, json_safe
from flow_field import ConservedField, GridSpec
from solver_ensemble import SchemeConfig, run_ensemble
from truncation_postprocessor import InteriorMask, high_order_residual

# 로그 디렉토리 생성
os.makedirs("logs", exist_ok=True)

# 로깅 설정
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    handlers=[
        logging.FileHandler("logs/experiment_runner.log"),
        logging.StreamHandler()
    ]
)
logger = logging.getLogger("experiment_runner")

MANIFEST_FILE = "solve_manifest.json"


def _write_json(path: str, data: Dict[str, Any]) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, 'w', encoding='utf-8') as file:
        json.dump(data, file, indent=4, ensure_ascii=False, allow_nan=False)


def _read_json(path: str) -> Dict[str, Any]:
    if not os.path.exists(path):
        raise ConfigError(f"파일이 없습니다: {path}")
    with open(path, 'r', encoding='utf-8') as file:
        return json.load(file)


def unique_schemes(schemes: List[SchemeConfig]) -> List[SchemeConfig]:
    """같은 이름의 구성원에 _2, _3 ... 을 붙여 구분"""
    seen: Dict[str, int] = {}
    result = []
    for cfg in schemes:
        label = cfg.label
        seen[label] = seen.get(label, 0) + 1
        if seen[label] > 1:
            cfg = cfg.replace(name=f"{label}_{seen[label]}")
            logger.warning(f"중복 스킴 이름 {label} -> {cfg.label}")
        result.append(cfg)
    return result


class ExperimentRunner:
    """
    실험 파이프라인 관리 클래스

    정확해 생성, 앙상블 계산, 오차와 절단 오차 계산, 각도와 추정기,
    효율 지수 보고서 작성까지 설정 하나로 수행합니다.
    """

    def __init__(self, config: ExperimentConfig, output_dir: Optional[str] = None, jobs: Optional[int] = None):
        """
        ExperimentRunner 초기화

        Args:
            config: 실험 설정
            output_dir: 출력 디렉토리 (없으면 설정 값)
            jobs: 작업자 수 (없으면 설정 값)
        """
        self.config = config
        self.output_dir = output_dir or config.output_dir
        self.jobs = int(jobs or config.jobs)
        self.grid = GridSpec(config.nx, config.ny)
        self.mask = InteriorMask.for_grid(self.grid, config.mask_margin)
        self.schemes = unique_schemes(config.schemes)
        self._reference = None

    @property
    def reference(self):
        """설정으로 만든 정확해 (처음 접근할 때 생성)"""
        if self._reference is None:
            c = self.config
            self._reference = build_case(c.case, c.mach, self.grid, c.gamma, theta_deg=c.theta_deg,
                                         alpha1_deg=c.alpha1_deg, alpha2_deg=c.alpha2_deg,
                                         angle_convention=c.edney6_angle_convention, anchor=c.anchor)
        return self._reference

    def path(self, *parts: str) -> str:
        return os.path.join(self.output_dir, *parts)

    def validate_only(self) -> Dict[str, Any]:
        """
        솔버 없이 정확해만 만들어 영역 표와 정합 잔차 보고

        Returns:
            {"status", "message", "summary"}

        Raises:
            DetachedShock, NoRegularSolution 등 정확해 생성 오류
        """
        summary = self.reference.summary()
        invariants = analytic_invariants(self.reference)
        worst = max(invariants["max_shock_residual"], invariants["max_slip_pressure_residual"],
                    invariants["max_slip_angle_residual_rad"])
        _write_json(self.path("analytic_reference.json"), summary)
        logger.info(f"{self.config.case} 정확해: 영역 {summary['num_regions']}개, 최대 정합 잔차 {worst:.3e}")
        return {"status": "success", "message": f"최대 정합 잔차 {worst:.3e}", "summary": summary}

    def solve_ensemble(self) -> List[Dict[str, Any]]:
        """
        앙상블 계산 후 해 파일과 목록 파일 저장

        Returns:
            구성원별 {"label", "status", "message", "result"}
        """
        statuses = run_ensemble(self.schemes, self.reference, self.grid, jobs=self.jobs,
                                log_interval=self.config.log_interval)
        members = []
        for status in statuses:
            entry = {"label": status["label"], "status": status["status"], "message": status["message"]}
            result = status["result"]
            if result is not None:
                raw_path = self.path("solutions", f"{status['label']}.bin")
                os.makedirs(os.path.dirname(raw_path), exist_ok=True)
                result.field.write_raw(raw_path)
                if self.config.write_vtk:
                    result.field.write_vtk(self.path("solutions", f"{status['label']}.vtk"))
                entry.update(result.as_dict())
                entry["file"] = os.path.relpath(raw_path, self.output_dir)
            members.append(entry)
        _write_json(self.path(MANIFEST_FILE), {"grid": self.grid.as_dict(), "members": members})
        return statuses

    def load_solutions(self) -> Tuple[List[Tuple[str, ConservedField]], List[Dict[str, Any]]]:
        """solve 가 저장한 해 파일 다시 읽기"""
        manifest = _read_json(self.path(MANIFEST_FILE))
        fields = []
        for member in manifest["members"]:
            if member["status"] == "success":
                data = ConservedField.read_raw(self.path(member["file"]), self.grid, self.config.gamma)
                fields.append((member["label"], data))
        return fields, manifest["members"]

    def analyze(self, statuses: Optional[List[Dict[str, Any]]] = None) -> EnsembleReport:
        """
        오차, 절단 오차, 각도, 추정기 계산 후 결과 파일 저장

        Args:
            statuses: solve_ensemble 결과 (없으면 저장된 해 파일 사용)

        Returns:
            EnsembleReport

        Raises:
            ConfigError: 성공한 구성원이 2개 미만일 때
        """
        if statuses is None:
            solutions, members = self.load_solutions()
        else:
            solutions = [(s["label"], s["result"].field) for s in statuses if s["status"] == "success"]
            members = [{"label": s["label"], "status": s["status"], "message": s["message"],
                        **(s["result"].as_dict() if s["result"] is not None else {})} for s in statuses]
        excluded = [m["label"] for m in members if m["status"] != "success"]
        if excluded:
            logger.warning(f"분석에서 제외된 구성원: {excluded}")
        if len(solutions) < 2:
            raise ConfigError(f"성공한 구성원이 2개 미만이라 앙상블 분석을 할 수 없습니다: {len(solutions)}")

        c = self.config
        exact = project_to_grid(self.reference, self.grid)
        labels = [label for label, _ in solutions]
        errors, truncations, vectors = [], [], []
        for label, data in solutions:
            err = error_vector(data, exact, self.mask, c.error_variables)
            trunc = high_order_residual(data, c.mask_margin, c.error_variables)
            errors.append(err)
            truncations.append(trunc)
            vectors.append(solution_vector(data, self.mask, c.error_variables))
            err.to_csv(self.path("errors", f"{label}_error.csv"))
            trunc.to_csv(self.path("truncation", f"{label}_truncation.csv"))
            if c.write_vtk:
                err.write_vtk(self.path("errors", f"{label}_error.vtk"), prefix="error_")
                trunc.write_vtk(self.path("truncation", f"{label}_truncation.vtk"), prefix="truncation_")

        alpha = pairwise_angles(errors, c.centered_angles, on_zero="nan")
        beta = pairwise_angles(truncations, c.centered_angles, on_zero="nan")
        report = build_report(labels, vectors, beta, errors=errors, alpha=alpha, config=c.to_dict())

        write_matrix_csv(self.path("angles_alpha.csv"), report.alpha, labels)
        write_matrix_csv(self.path("angles_beta.csv"), report.beta, labels)
        write_matrix_csv(self.path("distances.csv"), report.distances, labels)
        write_scatter_csv(self.path("fig4_scatter.csv"), report.alpha, report.beta)

        data = report.to_dict()
        _write_json(self.path("estimators.json"), data)
        _write_json(self.path("summary.json"), self._summary(report, data, members, excluded))
        logger.info(f"분석 완료: 해 {len(labels)}개, 각도 쌍 {upper_pairs(report.beta).size}개")
        return report

    def _summary(self, report: EnsembleReport, data: Dict[str, Any], members: List[Dict[str, Any]],
                 excluded: List[str]) -> Dict[str, Any]:
        degenerate = [list(p) for p, entry in zip(pair_labels(report.labels), report.pairs) if entry["degenerate"]]
        dk_valid = [s["true_norm"] is None or s["dk_max"] >= s["true_norm"] for s in report.solutions]
        stats = report.angle_statistics()
        return {
            "case": self.config.case,
            "grid": self.grid.as_dict(),
            "members": members,
            "excluded": excluded,
            "num_solutions": len(report.labels),
            "num_pairs": len(report.pairs),
            "degenerate_pairs": degenerate,
            "angles": json_safe(stats),
            "ensemble_width": data["ensemble_width"],
            "triangle_violation": report.triangle_violation,
            "dk_max_bounds_all": all(dk_valid),
            "effectivity_ranges": data["effectivity_ranges"],
            "config": self.config.to_dict(),
        }

    def report(self) -> Dict[str, Any]:
        """
        estimators.json 에서 효율 지수를 다시 계산해 summary.json 과 비교

        Returns:
            {"status": "success" | "error", "message", "effectivity_ranges"}
        """
        estimators = _read_json(self.path("estimators.json"))
        summary = _read_json(self.path("summary.json"))
        recomputed = effectivity_ranges(estimators)
        mismatched = [k for k, v in recomputed.items() if summary["effectivity_ranges"].get(k) != v]
        for key, span in recomputed.items():
            logger.info(f"효율 지수 {key}: {span}")
        if mismatched:
            logger.warning(f"summary.json 과 재계산 값이 다름: {mismatched}")
            return {"status": "error", "message": f"불일치 항목: {mismatched}", "effectivity_ranges": recomputed}
        return {"status": "success", "message": "summary.json 과 일치", "effectivity_ranges": recomputed}

    def run_experiment(self) -> EnsembleReport:
        """정확해 검증, 앙상블 계산, 분석 전체 실행"""
        logger.info(f"실험 시작: {self.config.case}, M={self.config.mach}, 격자 {self.grid.nx}x{self.grid.ny}")
        self.validate_only()
        statuses = self.solve_ensemble()
        try:
            return self.analyze(statuses)
        except WorkbenchError:
            logger.exception("앙상블 분석 실패")
            raise
