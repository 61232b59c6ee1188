"""Command-line experiment orchestration.

    eulerstat run <config-or-preset> [--force] [--workers W] [--large]
    eulerstat diagnose <snapshots...> [--structure] [--spectrum GAMMA]
              [--wasserstein K] [--cauchy] [--mean-variance]
              [--time-regularity L] [--out DIR]
    eulerstat presets

`run` evolves the configured ensembles for every resolution and writes
snapshot files (*.euss), a resolved manifest per resolution and an energy
CSV. `diagnose` turns snapshot files into diagnostic CSV tables. Snapshot
and CSV outputs are byte-deterministic for a fixed config, regardless of
worker count. The environment variable EULER_STAT_SEED overrides the
configured base seed.

Exit codes: 0 success, 2 configuration/usage error, 3 solver blow-up.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from .config import ConfigError, ExperimentConfig, canonical_manifest_text, parse_config
from .diagnostics import (
    compensated_spectrum,
    default_fit_range,
    energy_spectrum,
    fit_exponent,
    structure_function,
    time_regularity_ratio,
    write_curve_csv,
)
from .ensemble import (
    RunManifest,
    fnv1a64,
    mean_field,
    read_snapshot,
    run_ensemble,
    variance_field,
    write_snapshot,
)
from .errors import BlowUpError
from .initial import PRNG_ID
from .spectral import sample_at_grid
from .transport import marginal_w1, write_report_csv
from .diagnostics import cauchy_rate

MAX_DESK_N = 256
MAX_DESK_M = 64

PRESETS = {
    "taylor_green_check": """\
[experiment]
name = taylor_green_check
base_seed = 0
output_dir = out/taylor_green_check

[initial]
family = taylor_green

[run]
resolutions = 32
samples = 1
output_times = 0 1

[diagnostics]
structure = on
spectrum = 0
""",
    "flat_sheet_smooth": """\
[experiment]
name = flat_sheet_smooth
base_seed = 1234
output_dir = out/flat_sheet_smooth

[initial]
family = flat_sheet
rho = 0.1
delta = 0.025

[run]
resolutions = 64 128
samples = N
output_times = 0 0.4

[diagnostics]
structure = on
spectrum = 3
wasserstein = 1
cauchy = on
mean_variance = on
""",
    "flat_sheet_discontinuous": """\
[experiment]
name = flat_sheet_discontinuous
base_seed = 1234
output_dir = out/flat_sheet_discontinuous

[initial]
family = flat_sheet
rho = 0
delta = 0.025

[run]
resolutions = 64 128
samples = N
output_times = 0 0.4

[diagnostics]
structure = on
spectrum = 2
wasserstein = 1
""",
    "sinusoidal_sheet": """\
[experiment]
name = sinusoidal_sheet
base_seed = 1234
output_dir = out/sinusoidal_sheet

[initial]
family = sinusoidal_sheet
rho = 5/N
delta = 0.003125
d = 0.2
quadrature_points = 400

[solver]
eps = 0.01

[run]
resolutions = 64 128
samples = N
output_times = 0 0.6 1.2

[diagnostics]
structure = on
spectrum = 2.2
wasserstein = 1
cauchy = on
mean_variance = on
""",
    "fbm_h015": """\
[experiment]
name = fbm_h015
base_seed = 1234
output_dir = out/fbm_h015

[initial]
family = fbm
hurst = 0.15

[run]
resolutions = 64 128
samples = N
output_times = 0 1

[diagnostics]
structure = on
spectrum = 1.3
wasserstein = 1
""",
    "fbm_h05": """\
[experiment]
name = fbm_h05
base_seed = 1234
output_dir = out/fbm_h05

[initial]
family = fbm
hurst = 0.5

[run]
resolutions = 64 128
samples = N
output_times = 0 1

[diagnostics]
structure = on
spectrum = 2.0
wasserstein = 1
""",
    "fbm_h075": """\
[experiment]
name = fbm_h075
base_seed = 1234
output_dir = out/fbm_h075

[initial]
family = fbm
hurst = 0.75

[run]
resolutions = 64 128
samples = N
output_times = 0 1

[diagnostics]
structure = on
spectrum = 2.5
wasserstein = 1
""",
}

# Perturbation-amplitude sweep: delta = 0.05 / 2^j on the rough sheet.
for _j in range(6):
    _delta = 0.05 / 2 ** _j
    PRESETS[f"flat_sheet_delta_sweep{_j}"] = f"""\
[experiment]
name = flat_sheet_delta_sweep{_j}
base_seed = 1234
output_dir = out/flat_sheet_delta_sweep{_j}

[initial]
family = flat_sheet
rho = 0
delta = {_delta!r}

[run]
resolutions = 64
samples = N
output_times = 0 0.4

[diagnostics]
structure = on
spectrum = 2
wasserstein = 1
"""


def _err(msg: str) -> None:
    print(f"eulerstat: {msg}", file=sys.stderr)


def _snapshot_paths(cfg: ExperimentConfig, N: int):
    base = os.path.join(cfg.output_dir, f"{cfg.name}_N{N:04d}")
    snaps = [f"{base}_t{j:02d}.euss" for j in range(len(cfg.output_times))]
    return snaps, f"{base}.manifest", f"{base}_energy.csv"


def cmd_run(args) -> int:
    if os.path.isfile(args.config):
        with open(args.config, "r", encoding="utf-8") as fh:
            text = fh.read()
    elif args.config in PRESETS:
        text = PRESETS[args.config]
    else:
        _err(f"config {args.config!r} is neither a file nor a preset name")
        return 2
    try:
        cfg = parse_config(text)
    except ConfigError as exc:
        _err(f"{args.config}: {exc}")
        return 2

    env_seed = os.environ.get("EULER_STAT_SEED")
    if env_seed is not None:
        try:
            cfg.base_seed = int(env_seed)
        except ValueError:
            _err(f"EULER_STAT_SEED must be an integer, got {env_seed!r}")
            return 2

    if not args.large:
        over = [N for N in cfg.resolutions if N > MAX_DESK_N]
        over_m = [cfg.samples(N) for N in cfg.resolutions if cfg.samples(N) > MAX_DESK_M]
        if over or over_m:
            _err(
                f"desk-scale caps N <= {MAX_DESK_N}, m <= {MAX_DESK_M} exceeded; "
                "pass --large to override"
            )
            return 2

    try:
        os.makedirs(cfg.output_dir, exist_ok=True)
        probe = os.path.join(cfg.output_dir, ".write_probe")
        with open(probe, "w"):
            pass
        os.remove(probe)
    except OSError as exc:
        _err(f"output_dir {cfg.output_dir!r} is not writable: {exc}")
        return 2

    for N in cfg.resolutions:
        snap_paths, manifest_path, energy_path = _snapshot_paths(cfg, N)
        existing = [p for p in snap_paths + [manifest_path] if os.path.exists(p)]
        if existing and not args.force:
            _err(f"artifacts exist for N={N} (e.g. {existing[0]}); use --force to overwrite")
            return 2

        manifest_text = canonical_manifest_text(cfg, N, PRNG_ID, __version__)
        mhash = fnv1a64(manifest_text.encode("utf-8"))
        manifest = RunManifest(
            spec=cfg.initial_spec(N),
            m=cfg.samples(N),
            output_times=cfg.output_times,
            solver=cfg.solver_params(N),
        )
        energy_out = {}
        try:
            snapshots = run_ensemble(
                manifest,
                workers=args.workers,
                tolerate_failures=cfg.tolerate_failures,
                manifest_hash=mhash,
                energy_out=energy_out,
            )
        except BlowUpError as exc:
            _err(f"N={N}: {exc} (sample {exc.sample_index}, t={exc.time})")
            return 3
        for path, snap in zip(snap_paths, snapshots):
            write_snapshot(path, snap)
            print(f"wrote {path}")
        with open(manifest_path, "w", encoding="utf-8") as fh:
            fh.write(manifest_text)
        first = min(energy_out)
        with open(energy_path, "w", encoding="utf-8") as fh:
            fh.write(f"# energy,{cfg.output_times[-1]:.17g},{N},{manifest.m}\n")
            for t, e, d in energy_out[first]:
                fh.write(f"{t:.17g},{e:.17g},{d:.17g}\n")
        print(f"wrote {manifest_path}")
        print(f"wrote {energy_path}")
    return 0


def _load_snapshots(paths):
    loaded = []
    for p in paths:
        loaded.append((p, read_snapshot(p)))
    return loaded


def _stem(path: str) -> str:
    base = os.path.basename(path)
    return base[:-5] if base.endswith(".euss") else base


def cmd_diagnose(args) -> int:
    try:
        loaded = _load_snapshots(args.snapshots)
    except (OSError, ValueError) as exc:
        _err(str(exc))
        return 2
    out_dir = args.out or os.path.dirname(os.path.abspath(args.snapshots[0]))
    os.makedirs(out_dir, exist_ok=True)
    wrote_any = False
    summary_rows = []

    def emit(path):
        nonlocal wrote_any
        wrote_any = True
        print(f"wrote {path}")

    if args.structure:
        for path, snap in loaded:
            curve = structure_function(snap)
            dest = os.path.join(out_dir, f"{_stem(path)}_structure.csv")
            write_curve_csv(curve, dest)
            emit(dest)
            try:
                fit = fit_exponent(curve, *default_fit_range(snap.N))
                summary_rows.append(
                    f"{_stem(path)},structure_exponent,{fit.exponent:.17g},"
                    f"{fit.intercept:.17g},{fit.residual:.17g},"
                    f"{fit.fit_range[0]:.17g},{fit.fit_range[1]:.17g}"
                )
            except ValueError:
                summary_rows.append(f"{_stem(path)},structure_exponent,nan,nan,nan,nan,nan")

    if args.spectrum is not None:
        for path, snap in loaded:
            curve = energy_spectrum(snap)
            if args.spectrum != 0.0:
                curve = compensated_spectrum(curve, args.spectrum)
            dest = os.path.join(out_dir, f"{_stem(path)}_spectrum.csv")
            write_curve_csv(curve, dest)
            emit(dest)

    pairs = []
    if args.wasserstein is not None or args.cauchy:
        for pa, sa in loaded:
            for pb, sb in loaded:
                if sb.N == 2 * sa.N and abs(sa.time - sb.time) <= 1e-12 * max(1.0, sa.time):
                    pairs.append((pa, sa, pb, sb))
        if not pairs:
            _err("no (N, 2N) snapshot pair at a common time among the inputs")
            return 2

    if args.wasserstein is not None:
        for pa, sa, pb, sb in pairs:
            if sa.m != sb.m:
                _err(f"{pa} and {pb} have different sample counts")
                return 2
            report = marginal_w1(sa, sb, args.wasserstein)
            dest = os.path.join(out_dir, f"{_stem(pa)}__{_stem(pb)}_wass{args.wasserstein}.csv")
            write_report_csv(report, dest)
            emit(dest)

    if args.cauchy:
        for pa, sa, pb, sb in pairs:
            dest = os.path.join(out_dir, f"{_stem(pa)}__{_stem(pb)}_cauchy.csv")
            with open(dest, "w", encoding="utf-8") as fh:
                fh.write(f"# cauchy,{sa.time:.17g},{sa.N},{sa.m}\n")
                fh.write(f"mean,{cauchy_rate(sa, sb, 'mean'):.17g}\n")
                if sa.m == sb.m:
                    fh.write(f"variance,{cauchy_rate(sa, sb, 'variance'):.17g}\n")
            emit(dest)

    if args.mean_variance:
        for path, snap in loaded:
            mean_grid = sample_at_grid(mean_field(snap), 3 * snap.N)
            var_grid = variance_field(snap)
            for tag, grid in (("mean_u1", mean_grid[:, :, 0]), ("variance", var_grid)):
                dest = os.path.join(out_dir, f"{_stem(path)}_{tag}.csv")
                with open(dest, "w", encoding="utf-8") as fh:
                    fh.write(f"# {tag},{snap.time:.17g},{snap.N},{snap.m}\n")
                    for row in grid:
                        fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
                emit(dest)

    if args.time_regularity is not None:
        by_n = {}
        for path, snap in loaded:
            by_n.setdefault(snap.N, []).append(snap)
        for N, snaps in sorted(by_n.items()):
            if len(snaps) < 2:
                continue
            snaps.sort(key=lambda s: s.time)
            common = min(s.m for s in snaps)
            dest = os.path.join(out_dir, f"time_regularity_N{N:04d}.csv")
            with open(dest, "w", encoding="utf-8") as fh:
                fh.write(f"# time_regularity_L{args.time_regularity:g},{snaps[-1].time:.17g},{N},{common}\n")
                for j in range(common):
                    traj = [(s.time, s.fields[j]) for s in snaps]
                    ratio = time_regularity_ratio(traj, L=args.time_regularity)
                    fh.write(f"{snaps[0].sample_seeds[j]},{ratio:.17g}\n")
            emit(dest)
        if not any(len(s) >= 2 for s in by_n.values()):
            _err("time regularity needs >= 2 snapshots of the same resolution")
            return 2

    if summary_rows:
        dest = os.path.join(out_dir, "summary.csv")
        with open(dest, "w", encoding="utf-8") as fh:
            fh.write("# file,quantity,exponent,intercept,residual,r_min,r_max\n")
            for row in summary_rows:
                fh.write(row + "\n")
        emit(dest)

    if not wrote_any:
        _err("no diagnostic selected; pass --structure, --spectrum, ... (see --help)")
        return 2
    return 0


def cmd_presets(_args) -> int:
    for name in sorted(PRESETS):
        cfg = parse_config(PRESETS[name])
        kind, x = cfg.rho_rule
        rho = f"{x:g}/N" if kind == "over_n" else f"{x:g}"
        samples = "N" if cfg.samples_rule[0] == "match_n" else str(cfg.samples_rule[1])
        extras = ""
        if cfg.family == "fbm":
            extras = f" hurst={cfg.hurst:g}"
        if cfg.family == "sinusoidal_sheet":
            extras = f" d={cfg.d:g} Q={cfg.quad_points}"
        print(
            f"{name}: family={cfg.family} rho={rho} delta={cfg.delta:g}{extras} "
            f"eps={cfg.eps:g} N={','.join(str(n) for n in cfg.resolutions)} "
            f"m={samples} times={','.join(f'{t:g}' for t in cfg.output_times)}"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eulerstat",
        description="Monte Carlo statistical solutions of the 2D incompressible Euler equations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config or preset")
    p_run.add_argument("config", help="config file path or preset name")
    p_run.add_argument("--force", action="store_true", help="overwrite existing artifacts")
    p_run.add_argument("--workers", type=int, default=1, help="parallel sample workers")
    p_run.add_argument("--large", action="store_true", help="lift desk-scale N/m caps")
    p_run.set_defaults(func=cmd_run)

    p_diag = sub.add_parser("diagnose", help="compute diagnostics from snapshot files")
    p_diag.add_argument("snapshots", nargs="+", help="*.euss snapshot files")
    p_diag.add_argument("--structure", action="store_true", help="structure function curves")
    p_diag.add_argument("--spectrum", type=float, default=None, metavar="GAMMA",
                        help="energy spectrum compensated by K^GAMMA (0 = raw)")
    p_diag.add_argument("--wasserstein", type=int, default=None, metavar="K",
                        help="marginal W1 of order K between (N, 2N) snapshot pairs")
    p_diag.add_argument("--cauchy", action="store_true",
                        help="mean/variance Cauchy rates between (N, 2N) pairs")
    p_diag.add_argument("--mean-variance", action="store_true", help="mean and variance grids")
    p_diag.add_argument("--time-regularity", type=float, default=None, metavar="L",
                        help="negative-Sobolev time regularity ratios with exponent L")
    p_diag.add_argument("--out", default=None, help="output directory for CSV files")
    p_diag.set_defaults(func=cmd_diagnose)

    p_pre = sub.add_parser("presets", help="list built-in experiment presets")
    p_pre.set_defaults(func=cmd_presets)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
