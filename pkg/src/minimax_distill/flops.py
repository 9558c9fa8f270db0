"""Cost model for augmented training: vanilla vs minimax FLOPs per epoch.

Per augmented example and epoch, vanilla training pays a forward and a
backward for each of the k1 retrieved neighbours. Minimax selection pays a
forward for each of the k2 retrieved neighbours, a sort, and a backward
for only the n selected; an implementation that re-feeds the selected
examples pays n extra forwards.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ConfigError, InputError


@dataclass(frozen=True)
class CostParams:
    """Per-pass costs and neighbour counts entering the cost model.

    F and B are FLOPs for one forward/backward pass of a single example,
    S the cost of sorting one candidate list. ``reforward_selected``
    models the implementation variant that feeds selected examples to
    the student a second time before the backward pass.
    """

    F: float
    B: float
    S: float
    k1: int
    k2: int
    n: int
    reforward_selected: bool = False

    def __post_init__(self) -> None:
        if self.F < 0 or self.B < 0 or self.S < 0:
            raise ConfigError("per-pass costs must be >= 0")
        if self.k1 < 0 or self.k2 < 0 or self.n < 0:
            raise ConfigError("neighbour counts must be >= 0")
        if self.n > self.k2:
            raise ConfigError(f"n ({self.n}) cannot exceed k2 ({self.k2})")

    @property
    def sort_cost_negligible(self) -> bool:
        """Whether the S << F assumption behind the approximate delta holds."""
        return self.F == 0.0 or self.S < 0.01 * self.F


def vanilla_flops(p: CostParams) -> float:
    """Extra FLOPs per epoch for vanilla augmentation: k1 forwards + k1 backwards."""
    return p.k1 * p.F + p.k1 * p.B


def minimax_flops(p: CostParams) -> float:
    """Extra FLOPs per epoch for minimax augmentation: k2 forwards, a sort, n backwards."""
    total = p.k2 * p.F + p.S + p.n * p.B
    if p.reforward_selected:
        total += p.n * p.F
    return total


def delta_flops(p: CostParams) -> tuple[float, float]:
    """Vanilla minus minimax cost: the exact difference and the B=F, S=0 approximation."""
    exact = vanilla_flops(p) - minimax_flops(p)
    extra_n = 2 * p.n if p.reforward_selected else p.n
    approx = (2 * p.k1 - p.k2 - extra_n) * p.F
    return exact, approx


def efficiency_condition(p: CostParams) -> bool:
    """Whether minimax beats vanilla under the approximate model.

    k2 + n < 2*k1 in theory; k2 + 2n < 2*k1 when selected examples are
    re-fed for the backward pass.
    """
    extra_n = 2 * p.n if p.reforward_selected else p.n
    return p.k2 + extra_n < 2 * p.k1


def forward_flops(layer_dims: list[int]) -> float:
    """Analytic FLOPs of one forward pass: 2 multiply-accumulates per weight."""
    return float(2 * sum(a * b for a, b in zip(layer_dims[:-1], layer_dims[1:])))


def backward_flops(layer_dims: list[int]) -> float:
    """Analytic FLOPs of one backward pass, ~2x the forward's multiply-accumulates."""
    return 2.0 * forward_flops(layer_dims)


def sort_flops(num_candidates: int) -> float:
    """Comparison count of sorting one candidate list, weighted 1 FLOP each."""
    if num_candidates < 2:
        return 0.0
    return float(num_candidates) * math.log2(num_candidates)


@dataclass
class FlopsReport:
    """Predicted and measured cost of an instrumented run against a baseline."""

    run_forward_passes: int
    run_backward_passes: int
    baseline_forward_passes: int
    baseline_backward_passes: int
    predicted_run_flops: float
    predicted_baseline_flops: float
    run_epoch_seconds: float
    baseline_epoch_seconds: float
    predicted_speedup: float
    measured_speedup: float
    agreement_ratio: float
    per_epoch: list[dict] = field(default_factory=list)

    def summary_lines(self) -> list[str]:
        return [
            f"forward passes: run={self.run_forward_passes} baseline={self.baseline_forward_passes}",
            f"backward passes: run={self.run_backward_passes} baseline={self.baseline_backward_passes}",
            f"predicted FLOPs/epoch: run={self.predicted_run_flops:.3e} baseline={self.predicted_baseline_flops:.3e}",
            f"epoch seconds: run={self.run_epoch_seconds:.4f} baseline={self.baseline_epoch_seconds:.4f}",
            f"speed-up: predicted={self.predicted_speedup:.3f} measured={self.measured_speedup:.3f}"
            f" agreement={self.agreement_ratio:.3f}",
        ]

    def table_rows(self) -> list[tuple[int, float, float]]:
        """Plot-ready (epoch, predicted FLOPs, measured seconds) rows."""
        return [
            (row["epoch"], row["predicted_flops"], row["wall_time"]) for row in self.per_epoch
        ]


def measure_run(run_records: list, baseline_records: list, params: CostParams) -> FlopsReport:
    """Bind instrumented pass counts to the cost model and compare to a baseline.

    Records are trainer ``EpochRecord`` rows. The prediction prices each
    counted pass at F or B FLOPs plus one candidate sort per scored list;
    the measured side averages wall time per epoch.
    """
    if not baseline_records:
        raise InputError("baseline run records are required for comparison")
    if not run_records:
        raise InputError("run records are empty")

    def totals(records: list) -> tuple[int, int, float]:
        fwd = sum(r.forward_pass_count for r in records)
        bwd = sum(r.backward_pass_count for r in records)
        seconds = sum(r.wall_time for r in records)
        return fwd, bwd, seconds

    run_fwd, run_bwd, run_seconds = totals(run_records)
    base_fwd, base_bwd, base_seconds = totals(baseline_records)

    def predicted(records: list) -> float:
        total = 0.0
        for r in records:
            total += r.forward_pass_count * params.F + r.backward_pass_count * params.B
            total += getattr(r, "selection_sorts", 0) * params.S
        return total / len(records)

    predicted_run = predicted(run_records)
    predicted_base = predicted(baseline_records)
    run_epoch_seconds = run_seconds / len(run_records)
    base_epoch_seconds = base_seconds / len(baseline_records)

    predicted_speedup = predicted_base / predicted_run if predicted_run > 0 else float("inf")
    measured_speedup = (
        base_epoch_seconds / run_epoch_seconds if run_epoch_seconds > 0 else float("inf")
    )
    agreement = (
        predicted_speedup / measured_speedup
        if measured_speedup not in (0.0, float("inf"))
        else float("nan")
    )

    per_epoch = [
        {
            "epoch": r.epoch,
            "predicted_flops": r.forward_pass_count * params.F
            + r.backward_pass_count * params.B
            + getattr(r, "selection_sorts", 0) * params.S,
            "wall_time": r.wall_time,
        }
        for r in run_records
    ]
    return FlopsReport(
        run_forward_passes=run_fwd,
        run_backward_passes=run_bwd,
        baseline_forward_passes=base_fwd,
        baseline_backward_passes=base_bwd,
        predicted_run_flops=predicted_run,
        predicted_baseline_flops=predicted_base,
        run_epoch_seconds=run_epoch_seconds,
        baseline_epoch_seconds=base_epoch_seconds,
        predicted_speedup=predicted_speedup,
        measured_speedup=measured_speedup,
        agreement_ratio=agreement,
        per_epoch=per_epoch,
    )
