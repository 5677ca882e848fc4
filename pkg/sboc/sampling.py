"""
Sobol-Folgen für Anfangsdesigns.

Direction Numbers: die in scipy.stats.qmc eingebettete Joe-Kuo-Tabelle
(new-joe-kuo-6.21201), unverwürfelt, Gray-Code-Reihenfolge.
"""

import logging
import warnings
from typing import Optional

import numpy as np
from scipy.stats import qmc

from .core import DimensionUnsupported, InvalidConfig

logger = logging.getLogger(__name__)

# Größe der eingebetteten Direction-Number-Tabelle
MAX_DIMENSION = 21201


class SobolSequence:
    def __init__(self, dimension: int, skip: int = 1):
        """
        Deterministische, unverwürfelte Sobol-Folge.

        Args:
            dimension: Anzahl Koordinaten
            skip: Anzahl führender Punkte, die übersprungen werden (1 = Ursprung weglassen)
        """
        if dimension < 1:
            raise InvalidConfig(f"Dimension muss >= 1 sein, nicht {dimension}")
        if dimension > MAX_DIMENSION:
            raise DimensionUnsupported(
                f"Sobol-Tabelle unterstützt höchstens {MAX_DIMENSION} Dimensionen, angefragt: {dimension}"
            )
        if skip < 0:
            raise InvalidConfig(f"skip muss >= 0 sein, nicht {skip}")

        self.dimension = int(dimension)
        self._engine = qmc.Sobol(d=self.dimension, scramble=False)
        self.next_index = 0
        self.advance(skip)

    def advance(self, count: int):
        if count > 0:
            self._engine.fast_forward(count)
            self.next_index += count

    def draw(self, count: int) -> np.ndarray:
        """Liefert die nächsten ``count`` Punkte als (count, N)-Matrix."""
        if count < 1:
            return np.empty((0, self.dimension))
        with warnings.catch_warnings():
            # scipy warnt bei Blockgrößen, die keine Zweierpotenz sind
            warnings.simplefilter("ignore", UserWarning)
            points = self._engine.random(count)
        self.next_index += count
        return points


def sobol_points(dimension: int, count: int, skip: int = 1, sequence: Optional[SobolSequence] = None) -> np.ndarray:
    """
    Punkte skip+1 .. skip+count der Sobol-Folge.

    Ist ``sequence`` gesetzt, wird diese fortgesetzt und ``skip`` ignoriert.
    """
    if count < 1:
        raise InvalidConfig(f"count muss >= 1 sein, nicht {count}")
    if sequence is None:
        sequence = SobolSequence(dimension, skip=skip)
    points = sequence.draw(count)
    logger.debug(f"{count} Sobol-Punkte in {dimension}D erzeugt (nächster Index {sequence.next_index})")
    return points
