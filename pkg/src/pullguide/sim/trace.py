"""Per-tick trace with a fixed CSV column order."""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

# Column order of trace.csv; documented in the README.
COLUMNS = (
    "t",
    "base_x", "base_y", "base_theta",
    "cmd_vx", "cmd_vy", "cmd_omega",
    "target_x", "target_y", "target_index",
    "ee_des_x", "ee_des_y", "ee_des_z", "ee_des_yaw",
    "ee_hat_x", "ee_hat_y", "ee_hat_z", "ee_hat_yaw",
    "ee_x", "ee_y", "ee_z",
    "h_des_x", "h_des_y", "h_des_theta",
    "h_est_x", "h_est_y", "h_valid",
    "h_true_x", "h_true_y",
    "p_x", "p_y", "p_sat_x", "p_sat_y",
    "alpha_b", "y_adaptive", "k_y_hat",
    "tau_vir_fx", "tau_vir_fy", "tau_vir_mz",
    "tau_ext_fx", "tau_ext_fy",
    "wrench_fx", "wrench_fy", "wrench_fz",
    "arm_fx", "arm_fy",
    "scan_points", "scan_clusters", "n_tracks",
    "warmup", "base_violation", "goal_reached",
)

_INDEX = {c: i for i, c in enumerate(COLUMNS)}


class EmptyTrace(ValueError):
    pass


class Trace:
    """Row store of per-tick records; columns come back as float arrays."""

    def __init__(self, rows=None):
        self.rows: list[tuple] = list(rows or [])

    def append(self, row) -> None:
        if len(row) != len(COLUMNS):
            raise ValueError(f"expected {len(COLUMNS)} values, got {len(row)}")
        self.rows.append(tuple(float(v) for v in row))

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        i = _INDEX[name]
        return np.array([r[i] for r in self.rows], dtype=float)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.column(name)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in self.rows:
            w.writerow([repr(v) for v in r])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path) -> "Trace":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = tuple(next(reader))
            if header != COLUMNS:
                raise ValueError("trace.csv header does not match the expected columns")
            return cls(tuple(float(v) for v in row) for row in reader)
