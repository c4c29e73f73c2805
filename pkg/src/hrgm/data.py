from dataclasses import dataclass

import numpy as np

MARGINS = ("raw", "exponential", "pareto")


@dataclass(frozen=True)
class ExceedanceSample:
    """Observation matrix plus a tag saying which margins it lives on.

    ``raw``: original measurements. ``exponential``: rank-transformed to
    standard exponential margins. ``pareto``: exact multivariate Pareto draws
    on the exponential scale (every row has a positive coordinate).
    """

    values: np.ndarray
    margin: str = "raw"
    columns: tuple = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise ValueError(f"expected an (n, d) array, got shape {v.shape}")
        if self.margin not in MARGINS:
            raise ValueError(f"margin must be one of {MARGINS}, got {self.margin!r}")
        object.__setattr__(self, "values", v)

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def d(self):
        return self.values.shape[1]

    def subset(self, cols):
        cols = list(cols)
        names = None if self.columns is None else tuple(self.columns[c] for c in cols)
        return ExceedanceSample(self.values[:, cols], self.margin, names)


def as_sample(x, margin="exponential"):
    return x if isinstance(x, ExceedanceSample) else ExceedanceSample(np.asarray(x, dtype=float), margin)
