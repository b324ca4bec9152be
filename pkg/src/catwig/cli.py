"""Command-line interface: ``catwig <subcommand> [options]``.

Exit codes: 0 success, 2 validation or configuration error, 3 numerical
non-convergence, 4 model domain error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .catalog import DEFAULT_WAVELENGTH, load_catalog, rank_devices
from .constants import SILICON_NUCLEAR_MASS, constants_hash
from .cooling import CoolingConfig, sweep
from .decoherence import DecoherenceParams, dimensionless_params, envelope, revival_visibility, tau_dec, wigner_decohered
from .dynamics import entropy_from_visibility, evolve_amplitudes, visibility_classical, visibility_pure, visibility_thermal
from .errors import CatwigError, ConfigurationError
from .gravity import NUCLEAR_RADIUS, collapse_report
from .montecarlo import TimeBins, VisibilityModel, bin_table, simulate_run
from .params import PhysicalParams, coupling, mean_phonon
from .wigner import GridSpec, converged_negativity, default_thermal_grid, project_photon, wigner_thermal


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _jsonable(value):
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    return value


def render_table(columns, rows, fmt):
    if fmt == "json":
        data = [{c: _jsonable(v) for c, v in zip(columns, row)} for row in rows]
        return json.dumps(data, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _emit(text, out):
    if out is None or out == "-":
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            sys.stderr.close()
    else:
        Path(out).write_text(text)


def _params(args, required=True):
    if args.config is None:
        if required:
            raise ConfigurationError("this subcommand needs --config")
        return None
    return PhysicalParams.from_json(args.config)


def _floats(text):
    return [float(eval_phase(t)) for t in text.split(",") if t.strip()]


def eval_phase(token):
    """Parse a number that may be written as a multiple of pi, e.g. ``2pi``."""
    token = token.strip().lower()
    if token.endswith("pi"):
        head = token[:-2].rstrip("*")
        return (float(head) if head not in ("", "+") else 1.0) * math.pi
    return float(token)


def cmd_visibility(args):
    params = _params(args)
    kappa = coupling(params)
    temp = params.mode_temp or 0.0
    nbar = mean_phonon(temp, params.omega_c)
    phases = np.linspace(eval_phase(args.phase_min), eval_phase(args.phase_max), args.points)
    v_th = visibility_thermal(kappa, nbar, phases)
    rows = zip(
        phases,
        visibility_pure(kappa, phases),
        v_th,
        visibility_classical(params, temp, phases),
        entropy_from_visibility(v_th),
    )
    return render_table(["omega_c_t", "v_pure", "v_thermal", "v_classical", "entropy_bits"], list(rows), args.format)


def _kappa(args):
    if args.kappa is not None:
        return args.kappa
    params = _params(args, required=False)
    if params is None:
        raise ConfigurationError("give --kappa or a --config to derive it from")
    return coupling(params)


def render_grid(grid, meta, fmt):
    x, p = grid.x, grid.p
    if fmt == "json":
        data = {
            "x_min": float(x[0]), "x_max": float(x[-1]), "x_count": len(x),
            "p_min": float(p[0]), "p_max": float(p[-1]), "p_count": len(p),
            **{k: _jsonable(v) for k, v in meta.items()},
            "values": [[float(v) for v in row] for row in grid.values],
        }
        return json.dumps(data) + "\n"
    lines = [
        "# catwig wigner grid; rows run over x, columns over p",
        f"# x_min={_fmt(float(x[0]))},x_max={_fmt(float(x[-1]))},x_count={len(x)}",
        f"# p_min={_fmt(float(p[0]))},p_max={_fmt(float(p[-1]))},p_count={len(p)}",
        "# " + ",".join(f"{k}={_fmt(float(v))}" for k, v in meta.items()),
    ]
    body = "\n".join(",".join(repr(float(v)) for v in row) for row in grid.values)
    return "\n".join(lines) + "\n" + body + "\n"


def read_grid(text):
    """Parse a CSV grid file written by ``catwig wigner`` into (header, x, p, values)."""
    header = {}
    rows = []
    for line in text.splitlines():
        if line.startswith("#"):
            for item in line[1:].split(","):
                if "=" in item:
                    k, v = item.split("=", 1)
                    header[k.strip()] = float(v)
        elif line.strip():
            rows.append([float(v) for v in line.split(",")])
    x = np.linspace(header["x_min"], header["x_max"], int(header["x_count"]))
    p = np.linspace(header["p_min"], header["p_max"], int(header["p_count"]))
    return header, x, p, np.array(rows)


def cmd_wigner(args):
    kappa = _kappa(args)
    phase = eval_phase(args.phase)
    nbar = args.nbar
    if nbar is None:
        params = _params(args, required=False)
        nbar = 0.0 if params is None or params.mode_temp is None else mean_phonon(params.mode_temp, params.omega_c)
    if args.half_width is not None:
        grid = GridSpec.square(args.half_width, args.points)
    else:
        grid = default_thermal_grid(kappa, phase, nbar, args.points)
    meta = {"kappa": kappa, "omega_c_t": phase, "theta": args.theta, "nbar": nbar}
    if args.tb_over_teid is not None:
        if nbar != 0:
            raise ConfigurationError("decohered Wigner functions are only defined for nbar = 0")
        state = project_photon(evolve_amplitudes(kappa, 0.0, phase), args.theta)
        dp = dimensionless_params(kappa, args.tb_over_teid, args.chi)
        grid_out = wigner_decohered(state, dp, phase, grid)
        meta["tb_over_teid"] = args.tb_over_teid
    else:
        grid_out = wigner_thermal(kappa, phase, args.theta, nbar, grid, order=args.order)
    return render_grid(grid_out, meta, args.format)


def cmd_negativity(args):
    kappas = _floats(args.kappa) if args.kappa else [_kappa(argparse.Namespace(kappa=None, config=args.config))]
    rows = []
    for kappa in kappas:
        for nbar in _floats(args.nbar):
            for phase in _floats(args.phase):
                value, _ = converged_negativity(kappa, phase, args.theta, nbar, args.points)
                rows.append((kappa, nbar, phase, value))
    return render_table(["kappa", "nbar", "omega_c_t", "negativity"], rows, args.format)


def _decoherence_params(params, chi):
    if params.q_factor is None or params.bath_temp is None:
        raise ConfigurationError("decoherence needs q_factor and bath_temp_k in the config")
    return DecoherenceParams(params.q_factor, params.bath_temp, coupling(params), params.omega_c, chi, params.mass)


def cmd_decoherence(args):
    params = _params(args)
    dp = _decoherence_params(params, args.chi)
    nbar = mean_phonon(params.mode_temp or 0.0, params.omega_c)
    period = 2.0 * math.pi / params.omega_c
    times = np.linspace(0.0, args.periods * period, args.points)
    tau = tau_dec(dp)
    env = envelope(dp, times)
    total = revival_visibility(dp.kappa, nbar, dp, times)
    rows = [(t, e, v, tau, dp.t_eid) for t, e, v in zip(times, env, total)]
    return render_table(["t", "v_envelope", "v_total", "tau_dec", "T_EID"], rows, args.format)


def cmd_gravity(args):
    params = _params(args)
    kappa = args.kappa if args.kappa is not None else coupling(params)
    rows = collapse_report(params.mass, params.omega_c, kappa, args.radius, args.constituent_mass)
    cols = ["model", "delta_E_J", "tau_G_s", "tau_over_period"]
    return render_table(cols, [tuple(r[c] for c in cols) for r in rows], args.format)


def cmd_cooling(args):
    params = _params(args)
    if args.nth is not None:
        nth = args.nth
    elif params.bath_temp is not None:
        nth = mean_phonon(params.bath_temp, params.omega_c)
    else:
        raise ConfigurationError("cooling needs bath_temp_k in the config or --nth")
    if params.q_factor is None:
        raise ConfigurationError("cooling needs q_factor in the config for the mechanical damping")
    cfg = CoolingConfig(
        alpha=0.0,
        omega_c=params.omega_c,
        gamma_a=args.gamma_a_ratio * params.omega_c,
        gamma_m=params.omega_c / params.q_factor,
        nth=nth,
        rate_scale=args.rate_scale,
    )
    alphas = np.linspace(0.0, args.alpha_max, args.points)
    return render_table(["alpha", "n_phonon", "ratio", "ratio_over_lowfield"], sweep(cfg, alphas), args.format)


def cmd_montecarlo(args):
    params = _params(args)
    if params.finesse is None:
        raise ConfigurationError("montecarlo needs finesse in the config")
    kappa = coupling(params)
    nbar = mean_phonon(params.mode_temp or 0.0, params.omega_c)
    if args.model == "pure":
        model = VisibilityModel("pure", kappa)
    elif args.model == "thermal":
        model = VisibilityModel("thermal", kappa, nbar)
    else:
        model = VisibilityModel.from_decoherence(kappa, nbar, _decoherence_params(params, args.chi))
    bins = TimeBins(args.bins_per_period)
    records = simulate_run(
        args.seed, args.photons, model, params.finesse, params.n_round_trips,
        theta_points=args.theta_points, bins=bins, workers=args.workers,
    )
    cols = ["bin", "omega_c_t", "count", "v_hat", "stderr", "mean_survival", "v_model"]
    table = [row + (float(model.visibility(row[1])),) for row in bin_table(records)]
    estimates = render_table(cols, table, args.format)
    if args.format == "json":
        clicks = json.dumps([r.__dict__ for r in records]) + "\n"
    else:
        clicks = records.to_csv()
    est_path = args.estimates
    if est_path is None and args.out not in (None, "-"):
        out = Path(args.out)
        est_path = str(out.with_name(out.stem + ".bins" + (out.suffix or ".csv")))
    if est_path is None:
        return clicks + "\n" + estimates
    Path(est_path).write_text(estimates)
    return clicks


def cmd_devices(args):
    records = load_catalog(args.catalog, args.wavelength)
    rows = rank_devices(records, args.wavelength)
    cols = ["label", "kappa", "distinguishable", "t_eid_k", "x0_m", "finesse"]
    return render_table(cols, [tuple(r[c] for c in cols) for r in rows], args.format)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="catwig",
        description="Micro-optomechanical superposition simulator.",
        formatter_class=argparse.RawDescriptionHelpFormatter,  # keeps the version line unwrapped
    )
    parser.add_argument("--version", action="version", version=f"catwig {__version__} constants-sha256 {constants_hash()}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON file with SI device parameters")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.set_defaults(func=func)
        return p

    p = add("visibility", cmd_visibility, "visibility and photon entropy versus omega_c t")
    p.add_argument("--phase-min", default="0")
    p.add_argument("--phase-max", default="4pi")
    p.add_argument("--points", type=int, default=201)

    p = add("wigner", cmd_wigner, "projected cantilever Wigner grid (dimensionless units)")
    p.add_argument("--kappa", type=float)
    p.add_argument("--phase", default="pi", help="omega_c t, e.g. 'pi' or '0.5pi'")
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--nbar", type=float)
    p.add_argument("--points", type=int, default=512)
    p.add_argument("--half-width", type=float)
    p.add_argument("--order", type=int, help="Gauss-Hermite order per axis")
    p.add_argument("--tb-over-teid", type=float, help="bath temperature / T_EID for a decohered pure cat")
    p.add_argument("--chi", type=float, default=1.0)

    p = add("negativity", cmd_negativity, "Wigner negativity over kappa, nbar and omega_c t")
    p.add_argument("--kappa", help="comma-separated list")
    p.add_argument("--nbar", default="0")
    p.add_argument("--phase", default="pi", help="comma-separated omega_c t values")
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--points", type=int, default=512)

    p = add("decoherence", cmd_decoherence, "decoherence envelope and damped visibility")
    p.add_argument("--chi", type=float, default=1.0)
    p.add_argument("--periods", type=float, default=2.0)
    p.add_argument("--points", type=int, default=201)

    p = add("gravity", cmd_gravity, "gravitational collapse timescales")
    p.add_argument("--kappa", type=float)
    p.add_argument("--radius", type=float, default=NUCLEAR_RADIUS)
    p.add_argument("--constituent-mass", type=float, default=SILICON_NUCLEAR_MASS)

    p = add("cooling", cmd_cooling, "passive cooling sweep and sideband thermometry")
    p.add_argument("--gamma-a-ratio", type=float, default=1.0, help="gamma_a / omega_c")
    p.add_argument("--nth", type=float)
    p.add_argument("--alpha-max", type=float, default=1.0)
    p.add_argument("--points", type=int, default=101)
    p.add_argument("--rate-scale", type=float, default=1.0)

    p = add("montecarlo", cmd_montecarlo, "photon-counting emulator")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--photons", type=int, default=100000)
    p.add_argument("--model", choices=("pure", "thermal", "decohered"), default="pure")
    p.add_argument("--theta-points", type=int, default=16)
    p.add_argument("--bins-per-period", type=int, default=32)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--chi", type=float, default=1.0)
    p.add_argument("--estimates", help="path for the per-bin visibility CSV")

    p = add("devices", cmd_devices, "rank catalog devices by coupling")
    p.add_argument("--catalog", help="catalog JSON (default: shipped list)")
    p.add_argument("--lambda", dest="wavelength", type=float, default=DEFAULT_WAVELENGTH)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text = args.func(args)
    except CatwigError as exc:
        print(f"catwig {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError) as exc:
        print(f"catwig {args.command}: {exc}", file=sys.stderr)
        return 2
    _emit(text, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
