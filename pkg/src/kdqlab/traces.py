"""Sampling grids and characteristic-function traces, plus their CSV form."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import GridTooSmall, NonUniformGrid

MIN_SAMPLES = 8
UNIFORM_RTOL = 1e-12
SOURCES = ("analytic", "circuit", "pulse", "file", "mixture", "noisy")


@dataclass(frozen=True)
class UGrid:
    """``n`` equally spaced gate durations from 0 to ``u_max``.

    With ``endpoint=True`` (default) the last sample sits at ``u_max``; the
    spacing is then u_max/(n-1). With ``endpoint=False`` the spacing is
    u_max/n, so u_max itself is one step past the last sample.
    """

    n: int = 128
    u_max: float = 16 * math.pi / 2.0
    endpoint: bool = True

    def __post_init__(self):
        if self.n < MIN_SAMPLES:
            raise GridTooSmall(f"need at least {MIN_SAMPLES} samples, got {self.n}")
        if not (np.isfinite(self.u_max) and self.u_max > 0):
            raise GridTooSmall("u_max must be positive and finite")

    @classmethod
    def default_for(cls, omega: float, n: int = 128, periods: float = 8.0,
                    endpoint: bool = True) -> "UGrid":
        """Grid spanning ``periods`` cycles of the top transition frequency omega."""
        return cls(n, periods * 2 * math.pi / omega, endpoint)

    @property
    def step(self) -> float:
        return self.u_max / (self.n - 1 if self.endpoint else self.n)

    @property
    def values(self) -> np.ndarray:
        return np.arange(self.n) * self.step

    @property
    def resolution(self) -> float:
        """Work-axis bin width 2 pi / (n du)."""
        return 2 * math.pi / (self.n * self.step)

    def refined(self, factor: int = 2) -> "UGrid":
        """Grid with ``factor`` times the extent and ``factor`` times the sample density."""
        if self.endpoint:
            n = (self.n - 1) * factor * factor + 1
        else:
            n = self.n * factor * factor
        return UGrid(n, self.u_max * factor, self.endpoint)


@dataclass(frozen=True)
class CharFnTrace:
    u_values: np.ndarray
    values: np.ndarray
    source: str = "analytic"

    def __post_init__(self):
        u = np.asarray(self.u_values, dtype=float)
        g = np.asarray(self.values, dtype=complex)
        if u.ndim != 1 or u.shape != g.shape:
            raise ValueError("u_values and values must be 1-d and equally long")
        if len(u) < MIN_SAMPLES:
            raise GridTooSmall(f"need at least {MIN_SAMPLES} samples, got {len(u)}")
        u.setflags(write=False)
        g.setflags(write=False)
        object.__setattr__(self, "u_values", u)
        object.__setattr__(self, "values", g)

    def __len__(self):
        return len(self.u_values)

    @property
    def step(self) -> float:
        d = np.diff(self.u_values)
        step = float(np.mean(d))
        span = abs(self.u_values[-1] - self.u_values[0])
        # rounding of k*du grows with k, so compare against the grid extent
        if step <= 0 or np.max(np.abs(d - step)) > UNIFORM_RTOL * span:
            raise NonUniformGrid("u-grid is not uniformly spaced")
        return step

    def is_uniform(self) -> bool:
        try:
            self.step
        except NonUniformGrid:
            return False
        return True

    def with_values(self, values, source=None) -> "CharFnTrace":
        return CharFnTrace(self.u_values, values, source or self.source)


def _cell(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_csv_rows(path_or_buf, header, rows):
    """Write rows of floats with round-trip precision; returns the text."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    text = buf.getvalue()
    if path_or_buf is not None:
        if hasattr(path_or_buf, "write"):
            path_or_buf.write(text)
        else:
            with open(path_or_buf, "w", newline="") as fh:
                fh.write(text)
    return text


def trace_to_csv(trace: CharFnTrace, path=None) -> str:
    rows = zip(trace.u_values, trace.values.real, trace.values.imag)
    return write_csv_rows(path, ["u", "re_g", "im_g"], rows)


def trace_from_csv(path_or_text) -> CharFnTrace:
    if isinstance(path_or_text, str) and "\n" in path_or_text:
        fh = io.StringIO(path_or_text)
    else:
        fh = open(path_or_text, newline="")
    with fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["u", "re_g", "im_g"]:
            raise ValueError(f"expected header u,re_g,im_g, got {reader.fieldnames}")
        rows = [(float(r["u"]), float(r["re_g"]), float(r["im_g"])) for r in reader]
    arr = np.array(rows)
    return CharFnTrace(arr[:, 0], arr[:, 1] + 1j * arr[:, 2], "file")
