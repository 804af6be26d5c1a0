"""Command-line front end.

Subcommands: design, sweep, limits, simulate, check-condition,
critical-sigma, crb-curve. Machine-readable outputs are CSV/JSON; report
paths also render PNG figures next to the delimited files (disable with
--no-plot).

Exit codes: 0 success, 1 usage or parse error, 2 optimization failure,
3 inadmissible model.

Option values resolve as flags > config file > built-in defaults. The
config file (--config, or ./qdesign.toml when present) holds flat
key = value lines; section headers and comments are ignored.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .crb import (
    DegenerateProbability,
    OptimizationFailure,
    critical_sigma,
    default_grid_size,
    max_crb,
    sine_high_snr_limit,
    sine_limit_from_one_sided_mean,
)
from .design import DesignOptions, design, g_curve_csv, shape_csv
from .noise import NoDensity, NotDifferentiable, parse_noise_spec, threshold_condition_witness
from .quantizers import dithered, parse_quantizer_spec, sine, threshold
from .simulate import CSV_HEADER, Inadmissible, SimConfig, csv_row, run


def _load_config(path: str | None) -> dict:
    candidates = [path] if path else ["qdesign.toml"]
    for cand in candidates:
        if cand and os.path.exists(cand):
            out = {}
            with open(cand, "r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.split("#", 1)[0].strip()
                    if not line or line.startswith("["):
                        continue
                    if "=" not in line:
                        continue
                    key, val = (s.strip() for s in line.split("=", 1))
                    out[key] = val.strip("\"'")
            return out
    return {}


def _resolve(args, config, key, cast, default):
    """flags > config > defaults for one option."""
    val = getattr(args, key, None)
    if val is not None:
        return val
    if key in config:
        raw = config[key]
        if cast is bool:
            return raw.lower() in ("1", "true", "yes", "on")
        return cast(raw)
    return default


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("QDESIGN_THREADS", "1")))
    except ValueError:
        return 1


def _write(path: str, text: str):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _maybe_plot(enabled: bool):
    if not enabled:
        return None
    from . import plotting

    return plotting


# -- subcommands ---------------------------------------------------------------

def cmd_design(args, config) -> int:
    d = parse_noise_spec(args.noise)
    if not d.has_density:
        raise NoDensity("design needs a noise density; pointmass has none")
    K = _resolve(args, config, "K", int, None)
    L = _resolve(args, config, "L", int, None)
    seed = _resolve(args, config, "seed", int, 0)
    opts = DesignOptions(seed=seed, random_starts=args.random_starts or 0)
    result = design(d, K=K, L=L, options=opts)

    out = Path(args.out)
    _write(str(out), json.dumps(result.to_dict(), indent=2) + "\n")
    stem = str(out.with_suffix(""))
    shape_path = args.shape_csv or stem + "_shape.csv"
    g_path = args.g_csv or stem + "_g.csv"
    q = result.quantizer()
    _write(shape_path, shape_csv(q))
    _write(g_path, g_curve_csv(result.profile))

    plotting = _maybe_plot(_resolve(args, config, "plot", bool, True))
    if plotting:
        xs = np.linspace(-1.5, 1.5, 1000)
        plotting.save_shape_figure(stem + "_shape.png", xs, q.evaluate(xs))
        th = result.profile.thetas
        gs = result.profile.g_values
        full_t = np.concatenate([th, -th[:-1][::-1]])
        full_g = np.concatenate([gs, 1.0 - gs[:-1][::-1]])
        plotting.save_g_figure(stem + "_g.png", full_t, full_g)

    print(
        f"designed K={result.K} L={result.profile.L} phi={result.phi!r} "
        f"(start {result.start_label}, converged={result.converged}, "
        f"iterations={result.iterations})"
    )
    print(f"wrote {out}, {shape_path}, {g_path}")
    return 0 if result.converged else 2


def _phi_for(name: str, d, sigma_crit, L: int) -> float:
    if name == "threshold":
        return max_crb(threshold(), d, L).phi
    if name == "sine":
        return max_crb(sine(), d, L).phi
    if name == "dither":
        pad = sigma_crit * sigma_crit - d.sigma2
        if pad <= 0.0:
            return max_crb(threshold(), d, L).phi
        from .noise import generalized_gaussian

        q = dithered(generalized_gaussian(d.beta, pad))
        return max_crb(q, d, L).phi
    if name == "aupl":
        return design(d).phi
    raise ValueError(f"unknown quantizer name {name!r} in sweep")


def cmd_sweep(args, config) -> int:
    family = parse_noise_spec(args.noise, require_sigma=False)
    if not family.has_density:
        raise NoDensity("sweep needs a density family")
    lo = _resolve(args, config, "sigma_min", float, 0.05)
    hi = _resolve(args, config, "sigma_max", float, 8.0)
    npts = _resolve(args, config, "points", int, 40)
    if lo <= 0 or hi <= lo:
        raise ValueError(f"need 0 < sigma_min < sigma_max, got [{lo}, {hi}]")
    names = [s.strip() for s in args.quantizers.split(",") if s.strip()]
    sigmas = np.geomspace(lo, hi, npts)

    sigma_crit = critical_sigma(family.beta) if "dither" in names else math.nan

    from .noise import generalized_gaussian

    def point(sigma: float):
        d = generalized_gaussian(family.beta, sigma * sigma)
        L = default_grid_size(d)
        return [(float(sigma), name, _phi_for(name, d, sigma_crit, L)) for name in names]

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(point, sigmas))  # ordered by sigma regardless of scheduling

    rows = []
    for group in results:
        for sigma, name, phi in group:
            rows.append((sigma, name, 1.0 / phi, phi))
    lines = ["sigma,quantizer,min_fisher_info,phi"]
    lines += [f"{s!r},{n},{m!r},{p!r}" for s, n, m, p in rows]
    _write(args.out, "\n".join(lines) + "\n")

    plotting = _maybe_plot(_resolve(args, config, "plot", bool, True))
    if plotting:
        plotting.save_sweep_figure(str(Path(args.out).with_suffix("")) + ".png", rows)
    print(f"wrote {args.out} ({len(rows)} rows)")
    return 0


def cmd_limits(args, config) -> int:
    d = parse_noise_spec(args.noise, require_sigma=False)
    if not d.has_density:
        raise NoDensity("limits are defined for density families only")
    mu1 = d.normalized_one_sided_mean()
    via_mean = sine_limit_from_one_sided_mean(d)
    closed = sine_high_snr_limit(d.beta)
    print(f"normalized one-sided mean mu1 = {mu1!r}")
    print(f"high-SNR boundary CRB of the half-sine rule:")
    print(f"  via mu1:        {via_mean!r}")
    print(f"  closed form:    {closed!r}")
    print(f"  agreement:      {abs(via_mean - closed)!r}")
    print(f"  zero-noise optimum 4/pi^2 = {4.0 / math.pi ** 2!r} (floor 8/pi^2 = {8.0 / math.pi ** 2!r})")
    return 0


def cmd_simulate(args, config) -> int:
    d = parse_noise_spec(args.noise)
    q = parse_quantizer_spec(args.quantizer, ambient=d)
    cfg = SimConfig(
        theta_true=args.theta,
        N=_resolve(args, config, "N", int, 1000),
        trials=_resolve(args, config, "trials", int, 1000),
        seed=_resolve(args, config, "seed", int, 0),
        quantizer=q,
        noise=d,
    )
    report = run(cfg)
    print(report.to_json())
    if args.out:
        new = not os.path.exists(args.out)
        with open(args.out, "a", encoding="utf-8", newline="\n") as fh:
            if new:
                fh.write(CSV_HEADER + "\n")
            fh.write(csv_row(cfg, report) + "\n")
        print(f"appended to {args.out}")
    return 0


def cmd_check_condition(args, config) -> int:
    d = parse_noise_spec(args.noise)
    step = _resolve(args, config, "grid_step", float, 1e-3)
    witness = threshold_condition_witness(d, step)
    if witness is None:
        print("true")
    else:
        w, z, val = witness
        print("false")
        print(f"violated at w={w!r}, z={z!r}: f'(w-z)+f'(w+z) = {val!r} > 0")
    return 0


def cmd_critical_sigma(args, config) -> int:
    d = parse_noise_spec(args.noise, require_sigma=False)
    if not d.has_density:
        raise NoDensity("critical sigma is defined for density families only")
    sigma = critical_sigma(d.beta)
    from .noise import generalized_gaussian

    phi = max_crb(threshold(), generalized_gaussian(d.beta, sigma * sigma), 200).phi
    print(f"critical sigma = {sigma!r}")
    print(f"phi at critical sigma = {phi!r}")
    return 0


def cmd_crb_curve(args, config) -> int:
    d = parse_noise_spec(args.noise)
    q = parse_quantizer_spec(args.quantizer, ambient=d)
    L = _resolve(args, config, "L", int, None) or default_grid_size(d)
    profile = max_crb(q, d, L)
    _write(args.out, profile.to_csv())
    sidecar = str(Path(args.out).with_suffix("")) + ".json"
    _write(sidecar, json.dumps(profile.sidecar(), indent=2) + "\n")
    plotting = _maybe_plot(_resolve(args, config, "plot", bool, True))
    if plotting:
        plotting.save_crb_figure(
            str(Path(args.out).with_suffix("")) + ".png",
            profile.thetas,
            profile.crb_values,
            profile.phi,
        )
    print(f"wrote {args.out} (phi = {profile.phi!r} at theta = {profile.argmax_theta!r})")
    return 0


# -- parser ---------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="qdesign",
        description="Design and evaluate one-bit probabilistic quantizers for distributed estimation.",
    )
    p.add_argument("--config", help="key=value config file (default ./qdesign.toml if present)")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("design", help="solve the minimax slope problem for one noise model")
    d.add_argument("--noise", required=True, help="gg:beta=<f>,sigma=<f>")
    d.add_argument("--out", required=True, help="result JSON path")
    d.add_argument("--K", type=int)
    d.add_argument("--L", type=int)
    d.add_argument("--seed", type=int)
    d.add_argument("--random-starts", type=int, default=0)
    d.add_argument("--shape-csv")
    d.add_argument("--g-csv")
    _add_plot_flags(d)
    d.set_defaults(func=cmd_design)

    s = sub.add_parser("sweep", help="phi and its inverse across a log-spaced sigma range")
    s.add_argument("--noise", required=True, help="family spec, e.g. gg:beta=2")
    s.add_argument("--out", required=True, help="CSV path")
    s.add_argument("--quantizers", default="threshold,sine,dither,aupl")
    s.add_argument("--sigma-min", dest="sigma_min", type=float)
    s.add_argument("--sigma-max", dest="sigma_max", type=float)
    s.add_argument("--points", type=int)
    _add_plot_flags(s)
    s.set_defaults(func=cmd_sweep)

    li = sub.add_parser("limits", help="high-SNR boundary limits of the half-sine rule")
    li.add_argument("--noise", required=True)
    li.set_defaults(func=cmd_limits)

    si = sub.add_parser("simulate", help="Monte Carlo estimation run")
    si.add_argument("--noise", required=True)
    si.add_argument("--quantizer", required=True)
    si.add_argument("--theta", type=float, required=True)
    si.add_argument("--N", type=int)
    si.add_argument("--trials", type=int)
    si.add_argument("--seed", type=int)
    si.add_argument("--out", help="CSV to append a summary row to")
    si.set_defaults(func=cmd_simulate)

    cc = sub.add_parser("check-condition", help="test the threshold-optimality derivative condition")
    cc.add_argument("--noise", required=True)
    cc.add_argument("--grid-step", dest="grid_step", type=float)
    cc.set_defaults(func=cmd_check_condition)

    cs = sub.add_parser("critical-sigma", help="noise scale minimizing the threshold rule's phi")
    cs.add_argument("--noise", required=True)
    cs.set_defaults(func=cmd_critical_sigma)

    cv = sub.add_parser("crb-curve", help="CRB(theta) profile for one quantizer/noise pair")
    cv.add_argument("--noise", required=True)
    cv.add_argument("--quantizer", required=True)
    cv.add_argument("--L", type=int)
    cv.add_argument("--out", required=True, help="CSV path")
    _add_plot_flags(cv)
    cv.set_defaults(func=cmd_crb_curve)
    return p


def _add_plot_flags(parser):
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--plot", dest="plot", action="store_true", default=None)
    group.add_argument("--no-plot", dest="plot", action="store_false")


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses its own codes; map usage errors to 1
        return 0 if exc.code == 0 else 1
    config = _load_config(args.config)
    try:
        return args.func(args, config)
    except (ValueError, NoDensity, NotDifferentiable, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OptimizationFailure as exc:
        print(f"optimization failure: {exc}", file=sys.stderr)
        return 2
    except (Inadmissible, DegenerateProbability) as exc:
        print(f"inadmissible model: {exc}", file=sys.stderr)
        return 3


def console_main():
    sys.exit(main())


if __name__ == "__main__":
    console_main()
