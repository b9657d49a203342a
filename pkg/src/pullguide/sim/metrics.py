"""Run metrics and the paired sign test."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .trace import EmptyTrace, Trace


@dataclass(frozen=True)
class Metrics:
    mean_py: float
    max_py: float
    exceedance: float
    completion_s: float | None
    path_length: float
    tracking_loss_ticks: int
    ticks: int
    valid_ticks: int
    base_violations: int
    footprint_half_width: float

    def to_json(self, path=None) -> str:
        # NaN (no valid human estimate) is written as null to keep the file strict JSON
        d = {k: (None if isinstance(v, float) and math.isnan(v) else v)
             for k, v in asdict(self).items()}
        text = json.dumps(d, indent=2, sort_keys=True, allow_nan=False) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def metrics(trace: Trace, footprint_half_width: float = 0.35) -> Metrics:
    """Deviation statistics over ticks with a valid human estimate."""
    if len(trace) == 0:
        raise EmptyTrace("trace has no ticks")
    valid = trace["h_valid"] > 0.5
    py = np.abs(trace["p_y"][valid])
    if py.size:
        mean_py, max_py = float(py.mean()), float(py.max())
        exceed = float(np.count_nonzero(py > footprint_half_width)) / py.size
    else:
        mean_py = max_py = exceed = math.nan
    reached = np.flatnonzero(trace["goal_reached"] > 0.5)
    t = trace["t"]
    completion = float(t[reached[0]]) if reached.size else None
    bx, by = trace["base_x"], trace["base_y"]
    path_length = float(np.hypot(np.diff(bx), np.diff(by)).sum())
    return Metrics(mean_py, max_py, exceed, completion, path_length,
                   int(np.count_nonzero(~valid)), len(trace), int(valid.sum()),
                   int(np.count_nonzero(trace["base_violation"] > 0.5)),
                   float(footprint_half_width))


@dataclass(frozen=True)
class SignTest:
    wins: int
    losses: int
    ties: int
    p_value: float
    underpowered: bool


def sign_test(adaptive, baseline, alpha: float = 0.05) -> SignTest:
    """Exact one-sided sign test that ``adaptive`` is smaller than ``baseline``.

    Ties are dropped. ``p = P(X >= wins)`` with ``X ~ Binomial(n, 1/2)``.
    ``underpowered`` flags sample sizes whose best possible p exceeds ``alpha``.
    """
    a = np.asarray(adaptive, dtype=float)
    b = np.asarray(baseline, dtype=float)
    if a.shape != b.shape:
        raise ValueError("paired samples must have equal length")
    wins = int(np.count_nonzero(a < b))
    losses = int(np.count_nonzero(a > b))
    n = wins + losses
    tail = sum(math.comb(n, k) for k in range(wins, n + 1))
    p = tail / 2 ** n if n else 1.0
    return SignTest(wins, losses, int(a.size - n), p, 0.5 ** n > alpha)
