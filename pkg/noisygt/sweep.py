# noisygt/sweep.py
"""Monte-Carlo sweeps: plant, encode, corrupt, decode, tally."""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

from .condense import SchemeParams, build_scheme, plan_extractor_style, plan_lossless_style
from .config import GridPoint, SweepConfig
from .decode import threshold_decode
from .errors import ParameterRangeError
from .gtcore import BitMatrix, encode, random_support
from .noise import apply_random_noise
from .serializer import read_matrix, write_sweep_csv
from .utils import derive_rng

logger = logging.getLogger("noisygt")

ProgressCallback = Callable[[int, int], None]


@dataclass(frozen=True)
class SweepDesign:
    matrix: BitMatrix
    T: int
    nu_over_gamma: Fraction
    K: int
    params: Optional[SchemeParams] = None


@dataclass(frozen=True)
class GridSummary:
    label: str
    e0: int
    e1: int
    trials: int
    successes: int
    false_negative_trials: int

    @property
    def success_rate(self) -> Fraction:
        return Fraction(self.successes, self.trials)


@dataclass(frozen=True)
class SweepResult:
    design: SweepDesign
    rows: Tuple[Dict[str, int], ...]
    summaries: Tuple[GridSummary, ...]

    @property
    def success_rate(self) -> Fraction:
        return Fraction(sum(r["success"] for r in self.rows), len(self.rows)) if self.rows else Fraction(0)


def build_design(cfg: SweepConfig) -> SweepDesign:
    if cfg.matrix_path is not None:
        matrix = read_matrix(cfg.matrix_path)
        return SweepDesign(matrix, cfg.T, cfg.nu_over_gamma, cfg.K if cfg.K is not None else matrix.cols)
    if cfg.style == "lossless":
        params = plan_lossless_style(cfg.sparsity, cfg.universe, cfg.delta, cfg.t_bits, cfg.limits)
    else:
        params = plan_extractor_style(cfg.sparsity, cfg.universe, cfg.p, cfg.nu, cfg.t_bits, cfg.limits)
    scheme = build_scheme(params, cfg.seed, cfg.limits)
    return SweepDesign(scheme.matrix, params.T, params.nu_over_gamma, params.K, params)


def run_trial(design: SweepDesign, cfg: SweepConfig, grid_index: int, point: GridPoint, trial: int) -> Dict[str, int]:
    rng = derive_rng(cfg.seed, grid_index, trial)
    budget = point.to_budget(design.matrix.rows, cfg.sparsity)
    x = random_support(design.matrix.cols, cfg.sparsity, rng)
    noisy = apply_random_noise(encode(design.matrix, x), budget, rng)
    decoded = threshold_decode(design.matrix, noisy.observation, design.T, design.nu_over_gamma, design.params).support
    false_neg = len(set(x.indices) - set(decoded.indices))
    return {
        "trial": grid_index * cfg.trials + trial,
        "e0_applied": noisy.false_positives,
        "e1_applied": noisy.false_negatives,
        "decoded_weight": decoded.weight,
        "false_pos": len(set(decoded.indices) - set(x.indices)),
        "false_neg": false_neg,
        "success": int(false_neg == 0 and decoded.weight < design.K),
    }


def run_sweep(cfg: SweepConfig, progress_callback: Optional[ProgressCallback] = None) -> SweepResult:
    """One CSV row per (grid point, trial), in trial order whatever the completion order."""
    start = time.monotonic()
    design = build_design(cfg)
    if cfg.sparsity > design.matrix.cols:
        raise ParameterRangeError(f"Sparsity {cfg.sparsity} exceeds the {design.matrix.cols} columns")
    logger.info(
        f"Sweep on a {design.matrix.rows}x{design.matrix.cols} design: D={cfg.sparsity}, "
        f"{len(cfg.grid)} grid points x {cfg.trials} trials"
    )
    total = len(cfg.grid) * cfg.trials
    done = 0
    rows: List[Dict[str, int]] = []
    summaries: List[GridSummary] = []
    with ThreadPoolExecutor(max_workers=cfg.max_workers) as executor:
        for g, point in enumerate(cfg.grid):
            budget = point.to_budget(design.matrix.rows, cfg.sparsity)
            logger.debug(f"Grid point {point.label()} -> budget ({budget.e0}, {budget.e1})")
            point_rows = []
            for row in executor.map(lambda t: run_trial(design, cfg, g, point, t), range(cfg.trials)):
                point_rows.append(row)
                done += 1
                if progress_callback is not None:
                    progress_callback(done, total)
            summary = GridSummary(
                label=point.label(),
                e0=budget.e0,
                e1=budget.e1,
                trials=cfg.trials,
                successes=sum(r["success"] for r in point_rows),
                false_negative_trials=sum(1 for r in point_rows if r["false_neg"]),
            )
            logger.info(f"Grid point {summary.label}: success rate {float(summary.success_rate):.4f}")
            rows.extend(point_rows)
            summaries.append(summary)

    if cfg.output is not None:
        write_sweep_csv(rows, cfg.output)
    logger.info(f"Sweep finished in {time.monotonic() - start:.2f}s")
    return SweepResult(design, tuple(rows), tuple(summaries))
