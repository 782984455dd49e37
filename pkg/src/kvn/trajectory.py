"""
Column-oriented time series recorded by the evolution drivers.
"""

from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from src.kvn.errors import ParameterError


class Trajectory:
    """
    Rows of named float columns, one row per saved time.

    The first column is always ``t`` and must be strictly increasing.
    """

    def __init__(self, columns: Sequence[str], csv_columns: Optional[Sequence[str]] = None):
        if not columns or columns[0] != "t":
            raise ParameterError("the first trajectory column must be 't'")
        self.columns = list(columns)
        self.csv_columns = list(csv_columns) if csv_columns else list(columns)
        self._rows: List[List[float]] = []

    def append(self, **values: float) -> None:
        missing = set(self.columns) - set(values)
        if missing:
            raise ParameterError(f"trajectory row is missing columns {sorted(missing)}")
        if self._rows and not values["t"] > self._rows[-1][0]:
            raise ParameterError(f"trajectory times must increase: {values['t']} after {self._rows[-1][0]}")
        self._rows.append([float(values[name]) for name in self.columns])

    def __len__(self) -> int:
        return len(self._rows)

    @property
    def times(self) -> np.ndarray:
        return self.column("t")

    def column(self, name: str) -> np.ndarray:
        try:
            index = self.columns.index(name)
        except ValueError:
            raise ParameterError(f"unknown trajectory column '{name}'")
        return np.array([row[index] for row in self._rows])

    def last(self) -> Dict[str, float]:
        if not self._rows:
            raise ParameterError("empty trajectory")
        return dict(zip(self.columns, self._rows[-1]))

    def rows(self, columns: Optional[Iterable[str]] = None) -> List[List[float]]:
        columns = list(columns) if columns is not None else self.columns
        indices = [self.columns.index(name) for name in columns]
        return [[row[i] for i in indices] for row in self._rows]

    def as_dict(self) -> Dict[str, np.ndarray]:
        return {name: self.column(name) for name in self.columns}
