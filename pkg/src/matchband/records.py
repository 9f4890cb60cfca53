"""Run output record shared by algorithms and the harness."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional


@dataclass(frozen=True)
class RunRecord:
    """Seeded trajectory output of one algorithm run."""

    algo: str
    instance_digest: str
    mode: str  # "regret" | "explore"
    run_id: int = 0
    seed: int = 0
    checkpoints: tuple[tuple[int, float], ...] = ()
    tau: Optional[int] = None
    correct: Optional[bool] = None
    recommendation: Optional[tuple] = None

    def final_regret(self) -> float:
        if not self.checkpoints:
            return 0.0
        return self.checkpoints[-1][1]
