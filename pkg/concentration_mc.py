import os
import math
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Sequence

import numpy as np
import pandas as pd

from errors import InvalidParams

logger = logging.getLogger("concentration_mc")

BATCH_SIZE = 50_000
# N*S 가 이 값 이하이면 정규분포 벡터 쌍을 직접 뽑음
EXPLICIT_WORK_LIMIT = 50_000_000
MAX_BATCH_ELEMENTS = 4_000_000
SIGMA_LEVEL = 3.0


def orthogonality_bound(dim: int, delta: float) -> float:
    """두 무작위 단위 벡터의 코사인이 delta 를 넘을 확률의 상한 sqrt(pi/2) exp(-delta^2 N / 2)"""
    return math.sqrt(math.pi / 2.0) * math.exp(-delta * delta * dim / 2.0)


def _validate(dim: int, samples: int, deltas: Sequence[float]) -> None:
    if int(dim) != dim or dim < 2:
        raise InvalidParams(f"차원 N 은 2 이상의 정수여야 합니다: {dim}")
    if int(samples) != samples or samples < 1:
        raise InvalidParams(f"표본 수 S 는 1 이상의 정수여야 합니다: {samples}")
    for delta in deltas:
        if not (0.0 < delta < 1.0):
            raise InvalidParams(f"delta 는 (0, 1) 범위여야 합니다: {delta}")


def _batch_sizes(samples: int, dim: int, method: str) -> List[int]:
    size = BATCH_SIZE
    if method == "explicit":
        size = max(1, min(BATCH_SIZE, MAX_BATCH_ELEMENTS // dim))
    full, rest = divmod(samples, size)
    return [size] * full + ([rest] if rest else [])


def _explicit_cosines(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    """등방 정규분포를 정규화한 단위 벡터 쌍의 코사인"""
    x = rng.standard_normal((count, dim))
    y = rng.standard_normal((count, dim))
    dots = np.einsum("ij,ij->i", x, y)
    return dots / np.sqrt(np.einsum("ij,ij->i", x, x) * np.einsum("ij,ij->i", y, y))


def _reduced_cosines(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    """회전 불변성: 코사인은 z / sqrt(z^2 + chi^2_{N-1}) 와 같은 분포"""
    z = rng.standard_normal(count)
    chi2 = rng.chisquare(dim - 1, count)
    return z / np.sqrt(z * z + chi2)


def sample_cosines(dim: int, samples: int, seed: int = 0, method: str = "auto", jobs: int = 1) -> np.ndarray:
    """
    균일 분포 단위 벡터 쌍 S 개의 코사인

    배치마다 SeedSequence 에서 분기한 독립 생성기를 쓰므로 결과는 jobs 와 무관하게 동일

    Args:
        dim: 차원 N
        samples: 표본 수 S
        seed: 기본 시드
        method: "explicit" | "reduced" | "auto"
        jobs: 배치 병렬 스레드 수
    """
    _validate(dim, samples, [])
    if method == "auto":
        method = "explicit" if dim * samples <= EXPLICIT_WORK_LIMIT else "reduced"
    if method not in ("explicit", "reduced"):
        raise InvalidParams(f"알 수 없는 표본 방식: {method}")

    sizes = _batch_sizes(samples, dim, method)
    streams = np.random.SeedSequence(seed, spawn_key=(dim,)).spawn(len(sizes))
    draw = _explicit_cosines if method == "explicit" else _reduced_cosines

    def run_batch(args):
        stream, count = args
        return draw(np.random.default_rng(stream), count, dim)

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        batches = list(pool.map(run_batch, zip(streams, sizes)))
    logger.debug(f"N={dim}: {samples} 표본, {len(sizes)} 배치, 방식={method}")
    return np.concatenate(batches)


def exceedance_check(cosines: np.ndarray, dim: int, delta: float) -> Dict[str, Any]:
    """코사인 표본의 delta 초과 비율과 상한 비교 (이항 표준편차 3배 허용)"""
    samples = cosines.size
    count = int(np.count_nonzero(cosines > delta))
    empirical = count / samples
    bound = orthogonality_bound(dim, delta)
    p = min(bound, 1.0)
    sigma = math.sqrt(p * (1.0 - p) / samples)
    within = empirical <= p + SIGMA_LEVEL * sigma
    if not within:
        logger.warning(f"N={dim}, delta={delta}: 경험 확률 {empirical:.3e} 가 상한 {bound:.3e} + 3sigma 를 넘습니다")
    return {
        "N": dim,
        "delta": delta,
        "samples": samples,
        "exceedances": count,
        "empirical": empirical,
        "bound": bound,
        "sigma": sigma,
        "within_3sigma": bool(within),
    }


def mc_orthogonality(dim: int, samples: int, delta: float, seed: int = 0,
                     method: str = "auto", jobs: int = 1) -> Dict[str, Any]:
    """
    고차원 단위 벡터 쌍의 직교성 몬테카를로 검증

    Returns:
        {"N", "delta", "samples", "exceedances", "empirical", "bound", "sigma",
         "within_3sigma", "mean_cosine"}

    Raises:
        InvalidParams: N < 2, S < 1, delta 가 (0, 1) 밖
    """
    _validate(dim, samples, [delta])
    cosines = sample_cosines(dim, samples, seed, method, jobs)
    result = exceedance_check(cosines, dim, delta)
    result["mean_cosine"] = float(np.mean(cosines))
    return result


def mc_sweep(dims: Sequence[int], deltas: Sequence[float], samples: int, seed: int = 0,
             method: str = "auto", jobs: int = 1) -> pd.DataFrame:
    """
    (N, delta) 격자 전체 실행, 차원마다 한 번 뽑은 표본을 모든 delta 에 사용

    Returns:
        N, delta, samples, exceedances, empirical, bound, sigma, within_3sigma, mean_cosine 열의 표
    """
    rows = []
    for dim in dims:
        _validate(dim, samples, deltas)
        cosines = sample_cosines(int(dim), samples, seed, method, jobs)
        mean_cosine = float(np.mean(cosines))
        for delta in deltas:
            row = exceedance_check(cosines, int(dim), float(delta))
            row["mean_cosine"] = mean_cosine
            rows.append(row)
        logger.info(f"N={dim} 완료: 평균 코사인 {mean_cosine:.3e}")
    return pd.DataFrame(rows)


def write_sweep_csv(path: str, table: pd.DataFrame) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    table.to_csv(path, index=False, float_format="%.17g")


def run_from_config(dims: Sequence[int], deltas: Sequence[float], samples: int, seed: int,
                    output_dir: str, jobs: int = 1) -> pd.DataFrame:
    """설정 값으로 스윕을 실행하고 mc_orthogonality.csv 저장"""
    table = mc_sweep(dims, deltas, samples, seed, jobs=jobs)
    write_sweep_csv(os.path.join(output_dir, "mc_orthogonality.csv"), table)
    failed = table[~table["within_3sigma"]]
    if len(failed):
        logger.warning(f"상한 검사 실패 {len(failed)}건")
    return table
