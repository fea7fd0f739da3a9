"""From a sampled characteristic function back to quasiprobabilities.

Pipeline: sample G(u) on a uniform grid, Fourier transform with kernel
exp(-i u W) to a spectrum P(W) on the bins W_m = 2 pi m / (N du), then sum a
window of bins around each allowed work value. Noise can be injected into the
trace in between, and results scored with a reduced chi-squared.

A trace that stops at a finite u_max, or whose modes fall between bins,
leaks weight out of the windows. :func:`self_consistency_report` measures
that leakage for noiseless traces.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import LengthMismatch, NonPositiveSigma, ValidationError, WOutOfRange
from .interferometer import circuit_trace
from .kdq import char_function_analytic, kdq_table, work_distribution
from .protocol import DriveParams, InitialState, WorkProtocol, make_protocol
from .traces import CharFnTrace, UGrid, write_csv_rows

SOURCES = ("analytic", "circuit", "pulse")


def _u_values(grid) -> np.ndarray:
    return grid.values if isinstance(grid, UGrid) else np.asarray(grid, dtype=float)


def sample_trace(source: str, proto: WorkProtocol, rho: InitialState, grid,
                 nv=None) -> CharFnTrace:
    """G(u) on ``grid`` from the analytic table, the gate circuit or the pulse model.

    The pulse source needs ``nv`` (an :class:`~kdqlab.nvmodel.NvParams`) and a
    protocol from the rotating drive family with the same Rabi frequency and
    detuning.
    """
    u = _u_values(grid)
    if source == "analytic":
        return CharFnTrace(u, char_function_analytic(kdq_table(rho, proto), u), "analytic")
    if source == "circuit":
        return circuit_trace(proto, rho, u)
    if source == "pulse":
        from .nvmodel import pulse_readout
        if nv is None:
            raise ValidationError("pulse source needs NV parameters", field="nv")
        ref = make_protocol(nv.drive, proto.time)
        if np.linalg.norm(ref.u_t - proto.u_t) > 1e-10:
            raise ValidationError("protocol does not match the NV drive", field="nv")
        vals = [pulse_readout(float(x), proto.time, nv, rho).g for x in u]
        return CharFnTrace(u, np.array(vals), "pulse")
    raise ValidationError(f"source must be one of {SOURCES}, got {source!r}", field="source")


@dataclass(frozen=True)
class WorkSpectrum:
    w_values: np.ndarray
    weights: np.ndarray
    resolution: float
    sigma: float | None = None  # per-bin error bar, when the trace had one

    def __len__(self):
        return len(self.w_values)

    def resum(self, u) -> np.ndarray:
        """sum_m P(W_m) exp(i u W_m), the inverse transform."""
        u = np.asarray(u, dtype=float)
        return np.exp(1j * np.multiply.outer(u, self.w_values)) @ self.weights

    def parseval_gap(self, trace: CharFnTrace) -> float:
        """|sum |P|^2 - mean |G|^2| (zero for the unwindowed transform)."""
        return float(abs(np.sum(np.abs(self.weights) ** 2)
                         - np.mean(np.abs(trace.values) ** 2)))


def hann_half(n: int) -> np.ndarray:
    """Half of a Hann window: 1 at u = 0 falling to 0 one step past the last sample."""
    return 0.5 * (1 + np.cos(np.pi * np.arange(n) / n))


def transform_to_work(trace: CharFnTrace, hann: bool = False,
                      g_sigma: float | None = None) -> WorkSpectrum:
    """P(W_m) = (1/N) sum_k G(u_k) exp(-i u_k W_m) on a zero-centred W axis.

    The u grid is taken relative to its first sample. ``g_sigma`` is an error
    bar on G(u), the same for every sample; it is carried to the bins as
    g_sigma / sqrt(N) assuming independent samples.
    """
    du = trace.step
    n = len(trace)
    g = np.asarray(trace.values)
    if hann:
        g = g * hann_half(n)
    w = 2 * np.pi * np.fft.fftshift(np.fft.fftfreq(n, du))
    p = np.fft.fftshift(np.fft.fft(g)) / n
    if trace.u_values[0] != 0:
        p = p * np.exp(-1j * trace.u_values[0] * w)
    sigma = None if g_sigma is None else g_sigma / math.sqrt(n)
    return WorkSpectrum(w, p, 2 * np.pi / (n * du), sigma)


def integrate_peaks(spec: WorkSpectrum, expected_w, window: int = 7) -> dict[float, complex]:
    """Sum of ``window`` bins centred on the bin nearest each expected W."""
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be odd and >= 1")
    half = window // 2
    out = {}
    for w0 in expected_w:
        w0 = float(w0)
        if not (spec.w_values[0] - spec.resolution / 2 <= w0 <= spec.w_values[-1] + spec.resolution / 2):
            raise WOutOfRange(f"W={w0:g} is outside [{spec.w_values[0]:g}, {spec.w_values[-1]:g}]")
        k = int(np.argmin(np.abs(spec.w_values - w0)))
        if k - half < 0 or k + half >= len(spec):
            raise WOutOfRange(f"a {window}-bin window around W={w0:g} runs off the spectrum")
        out[w0] = complex(np.sum(spec.weights[k - half:k + half + 1]))
    return out


def window_sigma(spec: WorkSpectrum, window: int = 7) -> float | None:
    """Error bar of a windowed sum, adding bin errors in quadrature (bins treated as independent)."""
    return None if spec.sigma is None else spec.sigma * math.sqrt(window)


@dataclass(frozen=True)
class NoiseModel:
    """Per-trace amplitude and offset errors plus optional per-point shot noise."""

    amplitude_range: tuple[float, float] = (0.95, 1.05)
    offset_bound: float = 0.05
    shot_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.amplitude_range
        if not (0 < lo <= hi < 2):
            raise ValidationError("amplitude_range must lie inside (0, 2)", field="amplitude_range")
        if not (0 <= self.offset_bound < 1):
            raise ValidationError("offset_bound must lie in [0, 1)", field="offset_bound")
        if not (self.shot_sigma >= 0):
            raise ValidationError("shot_sigma must be >= 0", field="shot_sigma")

    @classmethod
    def none(cls, seed: int = 0) -> "NoiseModel":
        return cls((1.0, 1.0), 0.0, 0.0, seed)


def inject_noise(trace: CharFnTrace, model: NoiseModel) -> CharFnTrace:
    """Scale, offset and jitter a trace; deterministic for a given seed.

    One amplitude factor and one complex offset are drawn for the whole trace
    (a normalisation error is shared by every point of a run). All draws are
    made even for zero-width models, so a model with no widths is the identity.
    """
    rng = np.random.default_rng(model.seed)
    amp = rng.uniform(*model.amplitude_range)
    off = rng.uniform(-model.offset_bound, model.offset_bound, size=2)
    shot = rng.normal(size=(2, len(trace)))
    g = amp * trace.values + complex(off[0], off[1])
    g = g + model.shot_sigma * (shot[0] + 1j * shot[1])
    return trace.with_values(g, "noisy")


def reduced_chi_squared(data, sim, sigma) -> float:
    """(1/n) sum (x_i - s_i)^2 / sigma_i^2."""
    x = np.asarray(data, dtype=float)
    s = np.asarray(sim, dtype=float)
    e = np.asarray(sigma, dtype=float)
    if not (x.shape == s.shape == e.shape) or x.ndim != 1:
        raise LengthMismatch("data, sim and sigma must be 1-d and equally long")
    if len(x) == 0:
        raise LengthMismatch("need at least one point")
    if np.any(e <= 0):
        raise NonPositiveSigma("every sigma must be > 0")
    return float(np.mean((x - s) ** 2 / e ** 2))


def oracle_atoms(proto: WorkProtocol, rho) -> list[tuple[float, complex]]:
    """Merged (W, q) atoms of the exact quasiprobability distribution."""
    return work_distribution(kdq_table(rho, proto), merged=True)


def recover_q(trace: CharFnTrace, expected_w, window: int = 7, hann: bool = False):
    return integrate_peaks(transform_to_work(trace, hann), expected_w, window)


@dataclass(frozen=True)
class SelfConsistency:
    w_targets: np.ndarray
    oracle: np.ndarray
    recovered: np.ndarray
    window: int = 7
    errors: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "errors", np.abs(self.recovered - self.oracle))

    @property
    def tau(self) -> float:
        return float(self.errors.max())

    @property
    def total_recovered(self) -> complex:
        return complex(self.recovered.sum())


def self_consistency_report(proto: WorkProtocol, rho, grid, window: int = 7,
                            hann: bool = False) -> SelfConsistency:
    """Exact q at each allowed W against the noiseless pipeline estimate."""
    atoms = oracle_atoms(proto, rho)
    w = np.array([a[0] for a in atoms])
    q = np.array([a[1] for a in atoms])
    r = rho if isinstance(rho, InitialState) else InitialState(rho)
    trace = sample_trace("analytic", proto, r, grid)
    rec = recover_q(trace, w, window, hann)
    return SelfConsistency(w, q, np.array([rec[float(x)] for x in w]), window)


def pipeline_tau(drive: DriveParams, t_values, rho_fn, grid, window: int = 7) -> float:
    """max over t of the self-consistency error; ``rho_fn(t)`` gives the state."""
    return max(self_consistency_report(make_protocol(drive, t), rho_fn(t), grid, window).tau
               for t in t_values)


def spectrum_to_csv(spec: WorkSpectrum, path=None) -> str:
    rows = zip(spec.w_values, spec.weights.real, spec.weights.imag)
    return write_csv_rows(path, ["w", "re_p", "im_p"], rows)


def recovered_to_csv(recovered: dict, window: int, path=None) -> str:
    rows = [(w, q.real, q.imag, window) for w, q in recovered.items()]
    return write_csv_rows(path, ["w_target", "re_q", "im_q", "window"], rows)
