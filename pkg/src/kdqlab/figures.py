"""Tables behind each experiment and each figure preset.

Every function returns ``(header, rows)`` with plain floats, ready for
:func:`kdqlab.traces.write_csv_rows`. Times ``t`` are physical (units of 1/Omega
for the dimensionless preset, microseconds for the ``paper`` preset).
"""
from __future__ import annotations

import math

import numpy as np

from .interferometer import tpm_via_mixture
from .kdq import (
    correlation_report, kdq_table, rsur_scale, rsur_sides, tpm_table, work_distribution,
    work_moments,
)
from .protocol import DriveParams, make_initial_state, make_protocol
from .recon import (
    NoiseModel, inject_noise, integrate_peaks, recover_q, sample_trace,
    transform_to_work,
)
from .traces import UGrid

KDQ_HEADER = ["t", "i", "f", "w", "re_q", "im_q"]
MOMENT_HEADER = ["t", "re_mean", "im_mean", "re_var", "im_var"]


def lattice(omega_rabi: float, k_max: int = 12, denom: int = 6) -> np.ndarray:
    """t with Omega t = k pi / denom for k = 0..k_max."""
    return np.arange(k_max + 1) * math.pi / denom / omega_rabi


def allowed_w(drive: DriveParams) -> list[float]:
    return [-drive.omega, 0.0, drive.omega]


def charfn_trace(drive, state, t, grid, source="analytic", nv=None, noise=None):
    proto = make_protocol(drive, t)
    trace = sample_trace(source, proto, state, grid, nv=nv)
    if noise is not None:
        trace = inject_noise(trace, noise)
    return trace


def kdq_rows(drive, state, t_values):
    rows = []
    for t in t_values:
        tab = kdq_table(state, make_protocol(drive, t))
        w = tab.work
        for i in range(w.shape[0]):
            for f in range(w.shape[1]):
                q = tab.entries[i, f]
                rows.append((t, i, f, w[i, f], q.real, q.imag))
    return KDQ_HEADER, rows


def recovered_rows(drive, state, t_values, grid, window=7, hann=False):
    rows = []
    for t in t_values:
        proto = make_protocol(drive, t)
        trace = sample_trace("analytic", proto, state, grid)
        for w, q in recover_q(trace, allowed_w(drive), window, hann).items():
            rows.append((t, w, q.real, q.imag, window))
    return ["t", "w_target", "re_q", "im_q", "window"], rows


def spectra_rows(drive, state, t_values, grid, hann=False):
    rows = []
    for t in t_values:
        trace = sample_trace("analytic", make_protocol(drive, t), state, grid)
        spec = transform_to_work(trace, hann)
        rows += [(t, w, p.real, p.imag) for w, p in zip(spec.w_values, spec.weights)]
    return ["t", "w", "re_p", "im_p"], rows


def moment_rows(drive, state, t_values, kind="kdq", second=False):
    rows = []
    for t in t_values:
        proto = make_protocol(drive, t)
        tab = kdq_table(state, proto) if kind == "kdq" else tpm_table(state, proto)
        m = work_moments(tab)
        row = [t, m.mean.real, m.mean.imag, m.variance.real, m.variance.imag]
        if second:
            row[3:3] = [m.second_moment.real, m.second_moment.imag]
        rows.append(tuple(row))
    header = list(MOMENT_HEADER)
    if second:
        header[3:3] = ["re_second", "im_second"]
    return header, rows


def correlation_rows(drive, state, t_values):
    rows = []
    for t in t_values:
        r = correlation_report(state, make_protocol(drive, t))
        rows.append((t, r.corr.real, r.corr.imag, r.covariance, r.commutator_expect))
    return ["t", "re_corr", "im_corr", "covariance", "commutator_expect"], rows


def rsur_rows(drive, omega_t, p_values):
    """p sweep of rho_p = p|+><+| + (1-p)|-><-| at one time.

    ``mean_norm`` is the mean work over omega; ``lhs_norm`` and ``rhs_norm``
    are divided by (omega/2)^4, the largest value either side can take.
    """
    t = omega_t / drive.omega_rabi
    proto = make_protocol(drive, t)
    scale = rsur_scale(proto)
    rows = []
    for p in p_values:
        rho = make_initial_state(drive, "mixture", float(p))
        lhs, rhs = rsur_sides(rho, proto)
        mean = work_moments(kdq_table(rho, proto)).mean.real
        rows.append((float(p), t, mean / drive.omega, lhs / scale, rhs / scale))
    return ["p", "t", "mean_norm", "lhs_norm", "rhs_norm"], rows


def tpm_compare_rows(drive, state, t_values, grid, window=7):
    """Exact KDQ and TPM atoms, plus the TPM atoms recovered from the |+>/|-> mixture runs."""
    rows = []
    for t in t_values:
        proto = make_protocol(drive, t)
        kd = dict(work_distribution(kdq_table(state, proto)))
        tp = dict(work_distribution(tpm_table(state, proto)))
        mix = tpm_via_mixture(proto, grid.values)
        rec = integrate_peaks(transform_to_work(mix), list(kd), window)
        for w in kd:
            q = kd[w]
            rows.append((t, w, q.real, q.imag, tp.get(w, 0).real, rec[w].real, rec[w].imag))
    return ["t", "w", "re_q_kdq", "im_q_kdq", "q_tpm", "re_q_mixture", "im_q_mixture"], rows


def noise_study(drive, state, t_values, grid, model: NoiseModel, n_seeds: int,
                base_seed: int = 0, window: int = 7):
    """Recovered q for ``n_seeds`` noisy copies of each trace.

    Seeds are base_seed, base_seed + 1, ...; each run owns its generator.
    Returns (per-seed rows, summary rows) with their headers.
    """
    per_seed, summary = [], []
    for t in t_values:
        proto = make_protocol(drive, t)
        trace = sample_trace("analytic", proto, state, grid)
        ws = allowed_w(drive)
        clean = recover_q(trace, ws, window)
        recs = []
        for k in range(n_seeds):
            m = NoiseModel(model.amplitude_range, model.offset_bound, model.shot_sigma,
                           base_seed + k)
            r = recover_q(inject_noise(trace, m), ws, window)
            recs.append([r[w] for w in ws])
            per_seed += [(base_seed + k, t, w, r[w].real, r[w].imag) for w in ws]
        recs = np.array(recs)
        for j, w in enumerate(ws):
            c = clean[w]
            sd_re, sd_im = recs[:, j].real.std(), recs[:, j].imag.std()
            within = np.mean((np.abs(recs[:, j].real - c.real) <= 2 * sd_re)
                             & (np.abs(recs[:, j].imag - c.imag) <= 2 * sd_im))
            summary.append((t, w, c.real, c.imag, sd_re, sd_im, within))
    return (["seed", "t", "w_target", "re_q", "im_q"], per_seed,
            ["t", "w_target", "re_clean", "im_clean", "sd_re", "sd_im", "frac_within_2sd"], summary)


def figure_tables(drive: DriveParams, state, grid: UGrid, t_list, dense_points: int = 61,
                  p_values=None, rsur_omega_t=11 * math.pi / 15, window=7):
    """Data for every figure preset, keyed by file stem.

    The single-trace example is taken at Omega t = 7 pi/6; smooth curves use
    ``dense_points`` times over one period 2 pi/Omega; the p sweep sits at
    ``rsur_omega_t``.
    """
    t3 = 7 * math.pi / 6 / drive.omega_rabi
    dense = np.linspace(0, 2 * math.pi / drive.omega_rabi, dense_points)
    if p_values is None:
        p_values = np.linspace(0, 1, 11)
    trace = sample_trace("analytic", make_protocol(drive, t3), state, grid)
    spec = transform_to_work(trace)
    out = {
        "example_charfn": (["u", "re_g", "im_g"],
                        list(zip(trace.u_values, trace.values.real, trace.values.imag))),
        "example_spectrum": (["w", "re_p", "im_p"],
                          list(zip(spec.w_values, spec.weights.real, spec.weights.imag))),
        "spectra_vs_t": spectra_rows(drive, state, t_list, grid),
        "kdq_vs_t": kdq_rows(drive, state, dense),
        "recovered_vs_t": recovered_rows(drive, state, t_list, grid, window),
        "correlation_vs_t": correlation_rows(drive, state, dense),
        "moments_kdq_vs_t": moment_rows(drive, state, dense, "kdq", second=True),
        "moments_tpm_vs_t": moment_rows(drive, state, dense, "tpm", second=True),
        "rsur_p_sweep": rsur_rows(drive, rsur_omega_t, p_values),
    }
    return out

