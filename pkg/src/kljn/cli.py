"""Batch command-line front end.

Subcommands:
    levels   theoretical vs calibrated mean-square channel levels
    sweep    error-rate sweep over gamma: analytic column vs Monte Carlo
    session  full key-exchange session report (JSON) plus extracted keys
    spectra  empirical vs theoretical spectrum of the squared channel current

Exit codes: 0 success, 2 configuration/usage error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import io
import json
import sys

import numpy as np

from . import analytic
from .circuit import LoopState, channel_waveforms, generator_psd
from .config import ConfigError, SystemConfig, load_config, with_overrides
from .decision import EmptySecureBandError
from .estimator import squared_noise_psd_theory
from .noise import NoiseSpec, Waveform, periodogram, rng_for_period, synth_band_limited
from .protocol import extract_key, key_to_hex, run_session

_MODE_SHORT = {"voltage_only": "voltage", "current_only": "current", "combined": "combined"}


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def _emit(text: str, out_path):
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load(args) -> SystemConfig:
    config = load_config(args.config) if args.config else SystemConfig()
    return with_overrides(config, master_seed=args.seed)


def cmd_levels(args) -> int:
    config = _load(args)
    consts = config.constants
    levels = config.levels()
    n_cal = args.samples
    rng = rng_for_period(config.master_seed, 0)
    lines = []
    lines.append(f"# config_hash={config.config_hash()}")
    lines.append(f"k = {_fmt(consts.k)} J/K   T_eff = {_fmt(consts.t_eff)} K   4kT_eff = {_fmt(consts.four_kt)}")
    lines.append(
        f"note: 11 current level under the (1+alpha)R loop-resistance convention "
        f"would be {_fmt(levels.i_11_alt_convention)} (we use R_loop = R_A + R_B)"
    )
    lines.append("state  theory_v       empirical_v    rel_err_v  theory_i       empirical_i    rel_err_i")
    for state, bits in (("00", (0, 0)), ("0110", (0, 1)), ("11", (1, 1))):
        loop = LoopState.from_bits(*bits, config.resistors)
        emp = {}
        for label, r in (("a", loop.r_alice), ("b", loop.r_bob)):
            spec = NoiseSpec(
                psd_level=generator_psd(r, consts),
                bandwidth=config.b_kljn,
                sample_rate=config.sample_rate,
                n_samples=n_cal,
            )
            emp[label] = synth_band_limited(spec, rng)
        u_c, i_c = channel_waveforms(emp["a"], emp["b"], loop)
        emp_v = float(np.mean(np.square(u_c.samples)))
        emp_i = float(np.mean(np.square(i_c.samples)))
        th_v = levels.voltage_for(state)
        th_i = levels.current_for(state)
        lines.append(
            f"{state:<6} {_fmt(th_v):<14} {_fmt(emp_v):<14} {emp_v / th_v - 1:<+10.2e} "
            f"{_fmt(th_i):<14} {_fmt(emp_i):<14} {emp_i / th_i - 1:<+10.2e}"
        )
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_sweep(args) -> int:
    config = _load(args)
    mode = args.mode or _MODE_SHORT[config.mode]
    force_state = args.force_state or "11"
    if force_state not in ("00", "11"):
        raise ConfigError("sweep requires --force-state 00 or 11")
    gammas = _parse_gammas(args.gammas)
    buf = io.StringIO()
    buf.write(f"# config_hash={config.config_hash()} mode={mode} force_state={force_state}\n")
    buf.write("gamma,eps_analytic,eps_mc,ci_low,ci_high,n_errors,n_trials\n")
    for gamma in gammas:
        cfg = with_overrides(config, gamma=gamma)
        eps_th = analytic.epsilon_analytic(mode, force_state, cfg.fractions, gamma)
        report = run_session(
            cfg, cfg.n_periods, cfg.master_seed, force_state=force_state, workers=args.workers
        )
        est = {
            ("voltage", "00"): report.eps_hat_v_00,
            ("voltage", "11"): report.eps_hat_v_11,
            ("current", "00"): report.eps_hat_i_00,
            ("current", "11"): report.eps_hat_i_11,
            ("combined", "00"): report.eps_hat_combined_00,
            ("combined", "11"): report.eps_hat_combined_11,
        }[(mode, force_state)]
        buf.write(
            ",".join(
                _fmt(x)
                for x in (gamma, eps_th, est.p, est.ci_low, est.ci_high, est.k, est.n)
            )
            + "\n"
        )
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_session(args) -> int:
    config = _load(args)
    if config.n_periods < 1:
        raise ConfigError("session requires n_periods >= 1")
    report, records = run_session(
        config,
        config.n_periods,
        config.master_seed,
        force_state=args.force_state,
        workers=args.workers,
        keep_records=True,
    )
    alice, bob = extract_key(records)
    payload = report.to_dict()
    payload["key_bits"] = len(alice)
    payload["alice_key_hex"] = key_to_hex(alice)
    payload["bob_key_hex"] = key_to_hex(bob)
    _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
    return 0


def cmd_spectra(args) -> int:
    config = _load(args)
    loop = LoopState.from_bits(1, 1, config.resistors)
    psd = generator_psd(loop.r_alice, config.constants)
    spec = NoiseSpec(
        psd_level=psd,
        bandwidth=config.b_kljn,
        sample_rate=config.sample_rate,
        n_samples=args.samples,
    )
    rng = rng_for_period(config.master_seed, 0)
    u_a = synth_band_limited(spec, rng)
    u_b = synth_band_limited(spec, rng)
    _, i_c = channel_waveforms(u_a, u_b, loop)
    squared = np.square(i_c.samples)
    squared -= squared.mean()  # theory describes only the AC part
    freqs, emp = periodogram(Waveform(squared, config.sample_rate), args.bins)
    s_level = config.constants.four_kt / loop.r_loop
    theory = squared_noise_psd_theory(freqs, s_level, config.b_kljn)
    buf = io.StringIO()
    buf.write(f"# config_hash={config.config_hash()} state=11 samples={args.samples}\n")
    buf.write("f,empirical_psd,theory_psd\n")
    for f, e, t in zip(freqs, emp, theory):
        buf.write(f"{_fmt(float(f))},{_fmt(float(e))},{_fmt(float(t))}\n")
    _emit(buf.getvalue(), args.out)
    return 0


def _parse_gammas(text: str) -> list[float]:
    if not text or not text.strip():
        raise ConfigError("--gammas must be a non-empty comma-separated list")
    try:
        gammas = [float(g) for g in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad --gammas list: {exc}") from exc
    if any(b <= a for a, b in zip(gammas, gammas[1:])):
        raise ConfigError("--gammas must be strictly ascending")
    return gammas


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kljn", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="path to a key = value config file")
        p.add_argument("--seed", type=int, default=None, help="override master seed")
        p.add_argument("--out", default=None, help="write output to this file instead of stdout")

    p = sub.add_parser("levels", help="theoretical vs calibrated mean-square levels")
    common(p)
    p.add_argument("--samples", type=int, default=2**20, help="calibration samples per state")
    p.set_defaults(func=cmd_levels)

    p = sub.add_parser("sweep", help="error-rate sweep over gamma")
    common(p)
    p.add_argument("--gammas", required=True, help="comma-separated ascending gamma values")
    p.add_argument("--mode", choices=("voltage", "current", "combined"), default=None)
    p.add_argument("--force-state", choices=("00", "11", "0110"), default=None)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("session", help="full session report and extracted keys")
    common(p)
    p.add_argument("--force-state", choices=("00", "11", "0110"), default=None)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_session)

    p = sub.add_parser("spectra", help="squared-current spectrum vs theory (11 state)")
    common(p)
    p.add_argument("--samples", type=int, default=2**22)
    p.add_argument("--bins", type=int, default=512)
    p.set_defaults(func=cmd_spectra)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (EmptySecureBandError, ValueError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
