"""CSV ingestion, centering and Gram precomputation."""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .graph import MAX_VARS, bits, default_names


class DataError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Dataset:
    """Centered observations plus their Gram matrix.

    ``gram[i, j]`` is the inner product of centered columns ``i`` and ``j``;
    every regression the scorer runs is solved from it, so a score costs the
    same whatever ``n_obs`` is.
    """

    names: tuple[str, ...]
    columns: np.ndarray  # shape (n_obs, p), centered
    gram: np.ndarray = field(repr=False)
    zero_variance: tuple[bool, ...] = field(repr=False)

    @property
    def p(self) -> int:
        return len(self.names)

    @property
    def n_obs(self) -> int:
        return self.columns.shape[0]

    @classmethod
    def from_array(cls, data, names: Sequence[str] | None = None) -> "Dataset":
        x = np.array(data, dtype=np.float64)
        if x.ndim != 2:
            raise DataError("data must be a 2-D array (observations x variables)")
        n, p = x.shape
        if n == 0:
            raise DataError("dataset has no observations")
        if p > MAX_VARS:
            raise DataError(f"at most {MAX_VARS} variables are supported, got {p}")
        if not np.all(np.isfinite(x)):
            raise DataError("data contains non-finite values")
        names = tuple(default_names(p) if names is None else (str(s) for s in names))
        if len(names) != p:
            raise DataError(f"expected {p} names, got {len(names)}")
        if len(set(names)) != p:
            raise DataError("variable names must be unique")
        x = x - x.mean(axis=0)
        gram = x.T @ x
        gram = (gram + gram.T) / 2
        x.flags.writeable = False
        gram.flags.writeable = False
        zero = tuple(bool(v) for v in np.diag(gram) <= 0.0)
        if n < p + 2:
            warnings.warn(f"only {n} observations for {p} variables; "
                          "large parent sets will be singular", stacklevel=2)
        return cls(names, x, gram, zero)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name!r}") from None


def parse_csv(text: str, delimiter: str = ",") -> Dataset:
    rows = list(csv.reader(io.StringIO(text), delimiter=delimiter))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise DataError("missing header row")
    header = [h.strip() for h in rows[0]]
    if any(not h for h in header):
        raise DataError("empty column name in header")
    seen = set()
    for h in header:
        if h in seen:
            raise DataError(f"duplicate column name {h!r}")
        seen.add(h)
    if len(header) > MAX_VARS:
        raise DataError(f"at most {MAX_VARS} variables are supported, got {len(header)}")
    body = rows[1:]
    if not body:
        raise DataError("dataset has no observations")
    x = np.empty((len(body), len(header)))
    for r, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise DataError(f"row {r}: expected {len(header)} fields, got {len(row)}")
        for c, cell in enumerate(row):
            try:
                v = float(cell)
            except ValueError:
                v = math.nan
            if not math.isfinite(v):
                raise DataError(f"row {r}, column {header[c]!r}: not a finite number: {cell!r}")
            x[r - 2, c] = v
    return Dataset.from_array(x, header)


def load_csv(path, delimiter: str = ",") -> Dataset:
    return parse_csv(Path(path).read_text(encoding="utf-8"), delimiter)


def write_csv(path, data: np.ndarray, names: Sequence[str]) -> None:
    # repr() round-trips float64 exactly, so the bytes are a pure function of the data
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(names) + "\n")
        for row in np.asarray(data, dtype=np.float64):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def gram_submatrix(dataset: Dataset, subset_mask: int, target: int):
    """Return ``(G_SS, c_S, s_tt)`` for regressing ``target`` on ``subset_mask``."""
    if subset_mask >> target & 1:
        raise ValueError("target must not be in its own regressor set")
    idx = bits(subset_mask)
    g = dataset.gram
    return g[np.ix_(idx, idx)], g[idx, target], float(g[target, target])
