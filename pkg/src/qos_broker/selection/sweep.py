"""Sensitivity sweep: aggregate utility as one uniform beta varies."""

import csv
import io
import math
from collections.abc import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict

from qos_broker.errors import ProfileError, SubjectCollisionError, SweepGridError
from qos_broker.qos.attributes import QoSVector
from qos_broker.qos.profiles import RequirementProfile
from qos_broker.selection.utility import CONSUMER_SUBJECT, aggregate_utility

CSV_HEADER = ("beta", "subject", "utility")


class SweepRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    beta: float
    subject: str
    utility: float


class SweepTable(BaseModel):
    """Utility of every subject (offerings and the consumer minima) per grid point."""

    model_config = ConfigDict(frozen=True)

    grid: tuple[float, ...]
    rows: tuple[SweepRow, ...]

    @property
    def subjects(self) -> list[str]:
        return sorted({row.subject for row in self.rows})

    def curve(self, subject: str) -> list[float]:
        """Utilities of one subject in grid order."""
        return [row.utility for row in self.rows if row.subject == subject]


def beta_grid(beta_min: float, beta_max: float, beta_step: float) -> list[float]:
    """Inclusive uniform grid; points are rounded to 10 decimals to drop float drift."""
    if beta_step <= 0:
        raise SweepGridError(f"beta step must be positive, got {beta_step}")
    if beta_max < beta_min:
        raise SweepGridError(f"beta max {beta_max} is below beta min {beta_min}")
    count = int(math.floor((beta_max - beta_min) / beta_step + 1e-9)) + 1
    points = np.round(beta_min + beta_step * np.arange(count), 10)
    return [float(p) for p in points]


def sensitivity_sweep(
    offerings: Sequence[tuple[str, QoSVector]],
    profile: RequirementProfile,
    grid: Sequence[float],
) -> SweepTable:
    """Evaluate every subject with all sensitivities replaced by each grid value.

    Args:
        offerings: (provider id, QoS vector) pairs.
        profile: Requirement profile whose weights and minima are kept.
        grid: Uniform beta values, each >= 0.

    Returns:
        SweepTable ordered by beta, then subject id.
    """
    if not grid:
        raise SweepGridError("beta grid must not be empty")
    for beta in grid:
        if not math.isfinite(beta) or beta < 0:
            raise ProfileError(f"sensitivity {beta} in sweep grid is negative")

    subjects = [(provider_id, qos) for provider_id, qos in offerings]
    if any(provider_id == CONSUMER_SUBJECT for provider_id, _ in subjects):
        raise SubjectCollisionError(
            f"Offering id {CONSUMER_SUBJECT!r} is reserved for the consumer minima curve"
        )
    subjects.append((CONSUMER_SUBJECT, profile.minima))
    subjects.sort(key=lambda item: item[0])

    rows = []
    for beta in grid:
        uniform = profile.with_uniform_sensitivity(beta)
        for subject, qos in subjects:
            score = aggregate_utility(qos, uniform, subject)
            rows.append(SweepRow(beta=beta, subject=subject, utility=score.utility))

    return SweepTable(grid=tuple(grid), rows=tuple(rows))


def sweep_to_csv(table: SweepTable) -> str:
    """Render ``beta,subject,utility`` CSV with six-decimal utilities."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in table.rows:
        writer.writerow((repr(row.beta), row.subject, f"{row.utility:.6f}"))
    return buffer.getvalue()
