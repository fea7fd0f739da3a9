"""Command-line front end.

    kdqlab <subcommand> [--config FILE] [--out DIR] [--seed N] [--preset NAME] [--KEY VALUE ...]

The config file is a flat list of ``key = value`` lines (``#`` starts a
comment). Every key can also be given as a flag, e.g. ``--t-list 0,1.2``;
flags win over the file. Times in ``t_list`` and ``rsur_omega_t`` are given as
Omega t. Each run writes CSV files plus ``manifest.json`` into the output
directory.

Exit codes: 0 success, 1 other library error, 2 configuration error,
3 numerical invariant violation.
"""
from __future__ import annotations

import argparse
import configparser
import json
import math
import platform
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import figures as fg
from .errors import ConfigError, InvariantViolation, KdqError, ParseError, ValidationError
from .nvmodel import (
    NvParams, compile_sequence, export_pulses, pulse_readout, selective_block_residual,
    verify_g1_decomposition, verify_gB_decomposition,
)
from .interferometer import CircuitSpec, run_circuit
from .protocol import DriveParams, make_initial_state, make_protocol
from .recon import NoiseModel, integrate_peaks, recovered_to_csv, spectrum_to_csv, transform_to_work
from .traces import UGrid, trace_to_csv, write_csv_rows

SUBCOMMANDS = ("charfn", "spectrum", "kdq", "moments", "correlation", "rsur", "tpm-compare",
               "nv-verify", "noise-study", "figures")
NV_TOL = 1e-10
PULSE_TOL = 1e-6

_DEFAULT_T = ",".join(repr(k * math.pi / 6) for k in range(13))
_DEFAULT_P = ",".join(repr(k / 10) for k in range(11))

# key -> (kind, default). Kinds: str, float, int, bool, floats, choice:<a|b>
SCHEMA = {
    "preset": ("choice:dimensionless|paper", "dimensionless"),
    "omega_rabi": ("float", None),
    "delta": ("float", None),
    "state": ("choice:plus|minus|mixture", "plus"),
    "p": ("float", None),
    "t_list": ("floats", _DEFAULT_T),
    "n": ("int", "128"),
    "u_max": ("float", None),
    "endpoint": ("bool", "true"),
    "window": ("int", "7"),
    "hann": ("bool", "false"),
    "source": ("choice:analytic|circuit|pulse", "analytic"),
    "noise": ("bool", "false"),
    "amplitude_lo": ("float", "0.95"),
    "amplitude_hi": ("float", "1.05"),
    "offset_bound": ("float", "0.05"),
    "shot_sigma": ("float", "0.02"),
    "n_seeds": ("int", "200"),
    "seed": ("int", "0"),
    "outputs": ("str", "kdqlab_out"),
    "p_list": ("floats", _DEFAULT_P),
    "rsur_omega_t": ("float", repr(11 * math.pi / 15)),
    "figure_points": ("int", "61"),
    "nv_hyperfine": ("float", None),
    "nv_rabi_n": ("float", None),
    "nv_u_points": ("int", "9"),
}


@dataclass(frozen=True)
class RunConfig:
    preset: str = "dimensionless"
    drive: DriveParams = field(default_factory=DriveParams.dimensionless)
    state: str = "plus"
    p: float | None = None
    t_list: tuple = tuple(k * math.pi / 6 for k in range(13))
    n: int = 128
    u_max: float = 16 * math.pi / 2.0
    endpoint: bool = True
    window: int = 7
    hann: bool = False
    source: str = "analytic"
    noise: NoiseModel | None = None
    study_noise: NoiseModel = field(default_factory=lambda: NoiseModel(shot_sigma=0.02))
    n_seeds: int = 200
    seed: int = 0
    outputs: str = "kdqlab_out"
    p_list: tuple = tuple(k / 10 for k in range(11))
    rsur_omega_t: float = 11 * math.pi / 15
    figure_points: int = 61
    nv_hyperfine: float | None = None
    nv_rabi_n: float | None = None
    nv_u_points: int = 9
    raw: dict = field(default_factory=dict, compare=False)

    @property
    def grid(self) -> UGrid:
        return UGrid(self.n, self.u_max, self.endpoint)

    @property
    def times(self) -> np.ndarray:
        """Physical times from the Omega t list."""
        return np.asarray(self.t_list) / self.drive.omega_rabi

    def initial_state(self):
        return make_initial_state(self.drive, self.state, self.p)

    def nv(self) -> NvParams:
        return NvParams.from_drive(self.drive, self.nv_hyperfine, self.nv_rabi_n)


def _convert(key: str, kind: str, text: str):
    text = text.strip()
    try:
        if kind == "str":
            return text
        if kind == "float":
            v = float(text)
            if not math.isfinite(v):
                raise ValueError
            return v
        if kind == "int":
            return int(text)
        if kind == "bool":
            states = configparser.ConfigParser.BOOLEAN_STATES
            if text.lower() not in states:
                raise ValueError
            return states[text.lower()]
        if kind == "floats":
            vals = tuple(float(x) for x in text.split(",") if x.strip())
            if not all(math.isfinite(v) for v in vals):
                raise ValueError
            return vals
        if kind.startswith("choice:"):
            opts = kind.split(":", 1)[1].split("|")
            if text not in opts:
                raise ValidationError(f"{key} must be one of {opts}, got {text!r}", field=key)
            return text
    except ValueError:
        raise ValidationError(f"{key}: cannot read {text!r} as {kind}", field=key) from None
    raise AssertionError(kind)


def parse_config(text: str = "", overrides: dict | None = None) -> RunConfig:
    """Validated :class:`RunConfig` from a ``key = value`` document plus overrides."""
    cp = configparser.ConfigParser(interpolation=None, comment_prefixes=("#",),
                                   inline_comment_prefixes=("#",), delimiters=("=",))
    cp.optionxform = str
    try:
        cp.read_string("[run]\n" + (text or ""))
    except configparser.DuplicateOptionError as e:
        raise ParseError(f"duplicate key {e.option!r}", line=e.lineno - 1, key=e.option) from None
    except configparser.MissingSectionHeaderError as e:
        raise ParseError("malformed document", line=e.lineno - 1) from None
    except configparser.ParsingError as e:
        lineno = e.errors[0][0] - 1
        raise ParseError(f"line {lineno} is not a key = value pair", line=lineno) from None
    if len(cp.sections()) != 1:
        raise ParseError("section headers are not allowed", key=cp.sections()[1])
    given = dict(cp["run"])
    for k, v in (overrides or {}).items():
        if v is not None:
            given[k] = str(v)
    for k in given:
        if k not in SCHEMA:
            raise ValidationError(f"unknown key {k!r}", field=k)

    vals = {}
    for k, (kind, default) in SCHEMA.items():
        src = given.get(k, default)
        vals[k] = None if src is None else _convert(k, kind, src)
    return _build(vals, given)


def _build(v: dict, given: dict) -> RunConfig:
    base = DriveParams.preset(v["preset"])
    om = v["omega_rabi"] if v["omega_rabi"] is not None else base.omega_rabi
    if om <= 0:
        raise ValidationError("omega_rabi must be positive", field="omega_rabi")
    delta = v["delta"] if v["delta"] is not None else (
        math.sqrt(3) * om if v["omega_rabi"] is not None else base.delta)
    drive = DriveParams(om, delta)
    if v["state"] == "mixture":
        if v["p"] is None or not 0 <= v["p"] <= 1:
            raise ValidationError("state = mixture needs p in [0, 1]", field="p")
    elif v["p"] is not None:
        raise ValidationError("p only applies to state = mixture", field="p")
    if not v["t_list"]:
        raise ValidationError("t_list must not be empty", field="t_list")
    if any(t < 0 for t in v["t_list"]):
        raise ValidationError("t_list entries must be >= 0", field="t_list")
    n = v["n"]
    if n < 8 or n & (n - 1):
        raise ValidationError("n must be a power of two and >= 8", field="n")
    u_max = v["u_max"] if v["u_max"] is not None else 16 * math.pi / drive.omega
    if u_max <= 0:
        raise ValidationError("u_max must be positive", field="u_max")
    if v["window"] < 1 or v["window"] % 2 == 0:
        raise ValidationError("window must be odd and >= 1", field="window")
    if v["n_seeds"] < 1:
        raise ValidationError("n_seeds must be >= 1", field="n_seeds")
    if v["figure_points"] < 2 or v["nv_u_points"] < 2:
        raise ValidationError("point counts must be >= 2",
                              field="figure_points" if v["figure_points"] < 2 else "nv_u_points")
    if any(not 0 <= p <= 1 for p in v["p_list"]) or not v["p_list"]:
        raise ValidationError("p_list entries must lie in [0, 1]", field="p_list")
    study = NoiseModel((v["amplitude_lo"], v["amplitude_hi"]), v["offset_bound"],
                       v["shot_sigma"], v["seed"])
    return RunConfig(
        preset=v["preset"], drive=drive, state=v["state"], p=v["p"], t_list=v["t_list"],
        n=n, u_max=u_max, endpoint=v["endpoint"], window=v["window"], hann=v["hann"],
        source=v["source"], noise=study if v["noise"] else None, study_noise=study,
        n_seeds=v["n_seeds"], seed=v["seed"], outputs=v["outputs"], p_list=v["p_list"],
        rsur_omega_t=v["rsur_omega_t"], figure_points=v["figure_points"],
        nv_hyperfine=v["nv_hyperfine"], nv_rabi_n=v["nv_rabi_n"], nv_u_points=v["nv_u_points"],
        raw={k: given[k] for k in sorted(given)},
    )


# --- subcommands ----------------------------------------------------------

def _write(out: Path, name: str, header, rows, written: list):
    write_csv_rows(out / name, header, rows)
    written.append(name)


def cmd_charfn(cfg: RunConfig, out: Path, written: list):
    state = cfg.initial_state()
    nv = cfg.nv() if cfg.source == "pulse" else None
    for k, t in enumerate(cfg.times):
        noise = None if cfg.noise is None else NoiseModel(
            cfg.noise.amplitude_range, cfg.noise.offset_bound, cfg.noise.shot_sigma, cfg.seed + k)
        trace = fg.charfn_trace(cfg.drive, state, t, cfg.grid, cfg.source, nv, noise)
        name = f"charfn_t{k:02d}.csv"
        trace_to_csv(trace, out / name)
        written.append(name)


def cmd_spectrum(cfg: RunConfig, out: Path, written: list):
    state = cfg.initial_state()
    nv = cfg.nv() if cfg.source == "pulse" else None
    for k, t in enumerate(cfg.times):
        noise = None if cfg.noise is None else NoiseModel(
            cfg.noise.amplitude_range, cfg.noise.offset_bound, cfg.noise.shot_sigma, cfg.seed + k)
        trace = fg.charfn_trace(cfg.drive, state, t, cfg.grid, cfg.source, nv, noise)
        spec = transform_to_work(trace, cfg.hann)
        spectrum_to_csv(spec, out / f"spectrum_t{k:02d}.csv")
        rec = integrate_peaks(spec, fg.allowed_w(cfg.drive), cfg.window)
        recovered_to_csv(rec, cfg.window, out / f"recovered_t{k:02d}.csv")
        written += [f"spectrum_t{k:02d}.csv", f"recovered_t{k:02d}.csv"]


def cmd_kdq(cfg, out, written):
    _write(out, "kdq.csv", *fg.kdq_rows(cfg.drive, cfg.initial_state(), cfg.times), written)


def cmd_moments(cfg, out, written):
    state = cfg.initial_state()
    _write(out, "moments_kdq.csv", *fg.moment_rows(cfg.drive, state, cfg.times, "kdq"), written)
    _write(out, "moments_tpm.csv", *fg.moment_rows(cfg.drive, state, cfg.times, "tpm"), written)


def cmd_correlation(cfg, out, written):
    _write(out, "correlation.csv",
           *fg.correlation_rows(cfg.drive, cfg.initial_state(), cfg.times), written)


def cmd_rsur(cfg, out, written):
    header, rows = fg.rsur_rows(cfg.drive, cfg.rsur_omega_t, cfg.p_list)
    _write(out, "rsur.csv", header, rows, written)
    for r in rows:
        if r[3] < r[4] - 1e-10:
            raise InvariantViolation(f"uncertainty relation violated at p={r[0]}")


def cmd_tpm_compare(cfg, out, written):
    _write(out, "tpm_compare.csv",
           *fg.tpm_compare_rows(cfg.drive, cfg.initial_state(), cfg.times, cfg.grid, cfg.window),
           written)


def cmd_nv_verify(cfg, out, written):
    nv = cfg.nv()
    d = cfg.drive
    us = np.linspace(0, 4 * math.pi / d.omega, cfg.nv_u_points)
    rows = []
    for u in us:
        chk = verify_gB_decomposition(u, nv)
        rows.append((u, verify_g1_decomposition(u, nv), chk.distance, chk.reduced_state_gap))
    _write(out, "nv_decomposition.csv", ["u", "g1_distance", "gB_distance", "gB_reduced_gap"],
           rows, written)
    state = cfg.initial_state()
    prow = []
    for t in cfg.times:
        proto = make_protocol(d, t)
        for u in us:
            ideal = run_circuit(CircuitSpec(float(u), proto, state)).g
            got = pulse_readout(float(u), float(t), nv, state).g
            prow.append((t, u, got.real, got.imag, abs(got - ideal)))
    _write(out, "nv_pulse_vs_circuit.csv", ["t", "u", "sx", "sy", "error"], prow, written)
    seq = compile_sequence(float(us[len(us) // 2]), float(cfg.times[len(cfg.times) // 2]), nv)
    export_pulses(seq, out / "nv_sequence.txt")
    written.append("nv_sequence.txt")
    g1 = max(r[1] for r in rows)
    gb = max(r[2] for r in rows)
    gap = max(r[3] for r in rows)
    perr = max(r[4] for r in prow)
    sel = selective_block_residual(nv)
    print(f"max g1 distance      {g1:.3e}")
    print(f"max gB distance      {gb:.3e}")
    print(f"max gB reduced gap   {gap:.3e}")
    print(f"max pulse error      {perr:.3e}")
    print(f"selective residual   {sel:.3e}")
    if max(g1, gb) > NV_TOL or perr > PULSE_TOL or sel > 1e-12 or gap > 1e-12:
        raise InvariantViolation("NV model check above tolerance")


def cmd_noise_study(cfg, out, written):
    h1, per_seed, h2, summary = fg.noise_study(cfg.drive, cfg.initial_state(), cfg.times,
                                               cfg.grid, cfg.study_noise, cfg.n_seeds,
                                               cfg.seed, cfg.window)
    _write(out, "noise_runs.csv", h1, per_seed, written)
    _write(out, "noise_summary.csv", h2, summary, written)


def cmd_figures(cfg, out, written):
    tables = fg.figure_tables(cfg.drive, cfg.initial_state(), cfg.grid, cfg.times,
                              cfg.figure_points, cfg.p_list, cfg.rsur_omega_t, cfg.window)
    for stem, (header, rows) in tables.items():
        _write(out, f"{stem}.csv", header, rows, written)


COMMANDS = {
    "charfn": cmd_charfn, "spectrum": cmd_spectrum, "kdq": cmd_kdq, "moments": cmd_moments,
    "correlation": cmd_correlation, "rsur": cmd_rsur, "tpm-compare": cmd_tpm_compare,
    "nv-verify": cmd_nv_verify, "noise-study": cmd_noise_study, "figures": cmd_figures,
}


def run_subcommand(name: str, cfg: RunConfig, argv=None) -> list[str]:
    """Run one subcommand; returns the files written (manifest last)."""
    if name not in COMMANDS:
        raise ValidationError(f"unknown subcommand {name!r}", field="subcommand")
    out = Path(cfg.outputs)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ValidationError(f"cannot create {out}: {e}", field="outputs") from None
    written: list[str] = []
    start = time.perf_counter()
    COMMANDS[name](cfg, out, written)
    manifest = {
        "subcommand": name,
        "argv": list(argv) if argv is not None else None,
        "config": cfg.raw,
        "resolved": _resolved(cfg),
        "seed": cfg.seed,
        "versions": {"kdqlab": __version__, "numpy": np.__version__,
                     "python": platform.python_version()},
        "wall_time_s": round(time.perf_counter() - start, 6),
        "outputs": written,
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return written + ["manifest.json"]


def _resolved(cfg: RunConfig) -> dict:
    d = asdict(cfg)
    d.pop("raw")
    d["drive"] = {"omega_rabi": cfg.drive.omega_rabi, "delta": cfg.drive.delta}
    return json.loads(json.dumps(d, default=float))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kdqlab", description="Kirkwood-Dirac work statistics toolkit")
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config", help="key = value configuration file")
    ap.add_argument("--out", dest="outputs", help="output directory")
    for key in SCHEMA:
        if key == "outputs":
            continue
        ap.add_argument("--" + key.replace("_", "-"), dest=key, metavar=key.upper())
    return ap


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    overrides = {k: getattr(args, k) for k in SCHEMA}
    try:
        text = Path(args.config).read_text() if args.config else ""
    except OSError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    try:
        cfg = parse_config(text, overrides)
        written = run_subcommand(args.subcommand, cfg, argv)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except InvariantViolation as e:
        print(f"invariant violation: {e}", file=sys.stderr)
        return 3
    except KdqError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    print(f"wrote {len(written)} files to {cfg.outputs}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
