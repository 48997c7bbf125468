"""
Journal d'entraînement (courbe de perte)
"""

from dataclasses import dataclass, field
from typing import List

import pandas as pd

from utils.exceptions import DataError


@dataclass(frozen=True)
class TrainLogEntry:
    """Une ligne du journal"""
    iteration: int
    loss: float
    learning_rate: float
    wall_clock: float


@dataclass
class TrainLog:
    """Journal ordonné par itération strictement croissante"""
    entries: List[TrainLogEntry] = field(default_factory=list)

    def append(self, iteration: int, loss: float, learning_rate: float, wall_clock: float) -> None:
        if self.entries and iteration <= self.entries[-1].iteration:
            raise DataError(
                f"itération {iteration} non croissante (dernière: {self.entries[-1].iteration})"
            )
        self.entries.append(TrainLogEntry(iteration, loss, learning_rate, wall_clock))

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def losses(self) -> List[float]:
        return [e.loss for e in self.entries]

    def window_mean(self, start: int, size: int) -> float:
        """Perte moyenne sur une fenêtre d'entrées (start négatif = depuis la fin)"""
        losses = self.losses
        window = losses[start:start + size] if start >= 0 else losses[start:][:size]
        return sum(window) / len(window) if window else float("nan")

    def to_dataframe(self) -> pd.DataFrame:
        """Colonnes persistées : iteration, loss, lr (le temps mural n'est pas persisté)"""
        return pd.DataFrame({
            "iteration": [e.iteration for e in self.entries],
            "loss": [e.loss for e in self.entries],
            "lr": [e.learning_rate for e in self.entries],
        })
