"""Conservation ledger and convergence-order measurement.

The ledger accumulates per-step fluid totals, solid exchange increments and
domain-boundary fluxes, and exposes per-step and cumulative conservation
residuals.  Residuals are normalized by the per-component activity scale
(gross content plus gross boundary/exchange throughput), which stays
meaningful for components whose signed total starts at zero; the floor of
1e-30 guards the all-zero case.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import List

import numpy as np

COMPONENTS = ("mass", "mom_x", "mom_y", "energy")


def fluid_totals(w, alpha, cell_area):
    """Per-component fluid content: sum (1-alpha) w dA in fixed order."""
    return ((1.0 - np.asarray(alpha))[..., None] * np.asarray(w)).sum(
        axis=(0, 1)
    ) * cell_area


@dataclass
class ConservationLedger:
    """Append-only per-step conservation records for one run."""

    initial_totals: np.ndarray = None
    steps: List[int] = field(default_factory=list)
    times: List[float] = field(default_factory=list)
    dts: List[float] = field(default_factory=list)
    totals: List[np.ndarray] = field(default_factory=list)
    solid_increments: List[np.ndarray] = field(default_factory=list)
    boundary_in: List[np.ndarray] = field(default_factory=list)
    residuals: List[np.ndarray] = field(default_factory=list)
    mix_counts: List[int] = field(default_factory=list)

    def record(self, report):
        if self.initial_totals is None:
            self.initial_totals = report.totals_before.copy()
        self.steps.append(report.step)
        self.times.append(report.t + report.dt)
        self.dts.append(report.dt)
        self.totals.append(report.totals_after.copy())
        solid4 = np.array(
            [0.0, report.solid_dp[0], report.solid_dp[1], report.solid_de]
        )
        self.solid_increments.append(solid4)
        self.boundary_in.append(report.boundary_in.copy())
        self.residuals.append(report.residuals.copy())
        self.mix_counts.append(report.mix_count)

    def max_residuals(self):
        if not self.residuals:
            return np.zeros(4)
        return np.max(np.abs(np.array(self.residuals)), axis=0)

    def cumulative_drift(self):
        """Closed-system defect accumulated since the start, relative.

        (fluid totals now + summed solid increments - initial totals
        - summed boundary inflow), normalized by the activity scale.
        """
        if not self.totals:
            return np.zeros(4)
        solid = np.sum(self.solid_increments, axis=0)
        b = np.sum(self.boundary_in, axis=0)
        defect = self.totals[-1] + solid - self.initial_totals - b
        scale = np.maximum(
            np.abs(self.initial_totals) + np.abs(b) + np.abs(solid), 1e-30
        )
        scale = np.maximum(scale, np.max(np.abs(self.initial_totals)))
        return np.abs(defect) / scale

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(
                ["step", "t", "dt"]
                + [f"total_{c}" for c in COMPONENTS]
                + [f"solid_d{c}" for c in ("px", "py", "e")]
                + [f"boundary_in_{c}" for c in COMPONENTS]
                + [f"residual_{c}" for c in COMPONENTS]
                + ["mix_count"]
            )
            for k in range(len(self.steps)):
                row = [self.steps[k], repr(self.times[k]), repr(self.dts[k])]
                row += [repr(v) for v in self.totals[k]]
                row += [repr(v) for v in self.solid_increments[k][1:]]
                row += [repr(v) for v in self.boundary_in[k]]
                row += [repr(v) for v in self.residuals[k]]
                row += [self.mix_counts[k]]
                wr.writerow(row)


def coupled_residuals(ledger: ConservationLedger, k: int):
    """Per-step residual vector of record k (as stored by the coupling)."""
    return ledger.residuals[k]


def convergence_order(errors, spacings):
    """Least-squares slope of log(error) against log(h)."""
    errors = np.asarray(errors, dtype=float)
    spacings = np.asarray(spacings, dtype=float)
    if len(errors) < 2 or len(errors) != len(spacings):
        raise ValueError("need matching error/spacing lists of length >= 2")
    if np.any(errors <= 0.0):
        raise ValueError("errors must be positive")
    return float(np.polyfit(np.log(spacings), np.log(errors), 1)[0])
