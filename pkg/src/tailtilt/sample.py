from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np
import numpy.typing as npt

from .errors import DomainError


@dataclass(frozen=True, eq=False)
class Sample:
    """Immutable, sorted vector of finite observations.

    ``source`` is free-form provenance (file path, distribution, seed).
    """

    values: np.ndarray
    source: str = field(default="")

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, copy=True).ravel()
        if not np.all(np.isfinite(v)):
            raise DomainError("sample contains non-finite values")
        v.sort()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    @property
    def n(self) -> int:
        return self.values.size

    def above(self, t: float) -> np.ndarray:
        """Values strictly greater than ``t`` (sorted)."""
        return self.values[np.searchsorted(self.values, t, side="right"):]

    def at_most(self, t: float) -> np.ndarray:
        """Values less than or equal to ``t`` (sorted)."""
        return self.values[:np.searchsorted(self.values, t, side="right")]

    def count_above(self, t: float) -> int:
        return self.n - int(np.searchsorted(self.values, t, side="right"))

    def excesses(self, t: float) -> Sample:
        """Excesses ``Y - t`` of the values strictly above ``t``."""
        return Sample._trusted(self.above(t) - t, f"excesses>{t:g}({self.source})")

    def scaled(self, c: float) -> Sample:
        return Sample._trusted(self.values * c, self.source)

    def negated(self) -> Sample:
        return Sample(-self.values, f"-({self.source})")

    @classmethod
    def _trusted(cls, sorted_values: np.ndarray, source: str = "") -> Sample:
        # caller guarantees finite, sorted float64
        obj = object.__new__(cls)
        v = np.asarray(sorted_values, dtype=np.float64)
        if v.flags.writeable:
            v = v.copy()
            v.flags.writeable = False
        object.__setattr__(obj, "values", v)
        object.__setattr__(obj, "source", source)
        return obj


SampleLike = Union[Sample, npt.ArrayLike]


def as_sample(x: SampleLike, source: str = "") -> Sample:
    if isinstance(x, Sample):
        return x
    return Sample(np.asarray(x, dtype=np.float64), source)
