"""Command-line experiment runner.

Every subcommand writes CSV (header line first, floats with 17 significant
digits) to ``--out`` or stdout. Output depends only on the arguments, so a
fixed ``--seed`` gives byte-identical files for any ``--threads``. The one
exception is the ``runtime_ns`` column of ``mse-curve``, which is only filled
in when ``--timing`` is given.

Exit codes: 0 success, 2 usage/configuration error, 3 data/parse error,
4 numerical precondition failure.
"""

import argparse
import csv
import io
import logging
import math
import statistics
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import binembed, simulate
from .datasets import Format, SynthKind, format_dataset, load_dataset, synth_dataset
from .errors import (ConfigurationError, DimensionError, InputError, NumericalError,
                     OrthoFeaturesError)
from .feature_maps import Kind, TransformSpec, build, project
from .kernel_eval import make_pairs, mse_estimate, select_sigma
from .seeding import STREAM_ORTHO, STREAM_PAIRS, child_rng, child_seed

log = logging.getLogger("orthofeatures")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4

TIMING_WARMUP = 10
TIMING_REPEATS = 100


@dataclass
class ExperimentConfig:
    subcommand: str
    kinds: list = field(default_factory=list)
    d: list = field(default_factory=lambda: [64])
    D: list = field(default_factory=list)
    z: list = field(default_factory=list)
    sigma: object = "auto"
    seeds: int = 20
    trials: int = simulate.DEFAULT_TRIALS
    seed: int = 0
    input: str | None = None
    format: Format = Format.DENSE_CSV
    out: str | None = None
    threads: int = 1
    synth: SynthKind = SynthKind.SPHERE
    n_points: int = 1000
    pairs: int = 500
    timing: bool = False
    fixed_direction: bool = False
    t: list = field(default_factory=lambda: [0.1, 0.25, 0.5])
    theta: float = math.pi / 3
    k: int = 50
    n_sample: int = 1000

    def __post_init__(self):
        for name in ("d", "D", "z", "t"):
            if name in self._required_grids() and not getattr(self, name):
                raise ConfigurationError(f"--{name} grid is empty")
        if self.subcommand in ("mse-curve", "bias-variance", "angle-sim") and not self.kinds:
            raise ConfigurationError("--kind list is empty")
        if self.seed < 0:
            raise ConfigurationError("--seed must be non-negative")
        for name in ("seeds", "trials", "threads", "n_points", "pairs"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"--{name.replace('_', '-')} must be >= 1")

    def _required_grids(self):
        return {
            "mse-curve": ("d", "D"),
            "bias-variance": ("d", "z"),
            "ortho-check": ("d", "z", "t"),
            "angle-sim": ("d", "D"),
        }.get(self.subcommand, ())


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    if value is None:
        return ""
    if isinstance(value, Kind):
        return value.cli_name
    return str(value)


def render_csv(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------- runners

def _dataset_for(config, d, stream):
    if config.input is not None:
        ds = load_dataset(config.input, config.format)
        if config.subcommand != "sigma" and ds.d != d:
            raise ConfigurationError(f"--d {d} does not match input dimension {ds.d}")
        return ds
    return synth_dataset(config.synth, config.n_points, d, child_seed(config.seed, stream, d))


def _resolve_sigma(config, ds):
    if config.sigma != "auto":
        return float(config.sigma)
    sigma = select_sigma(ds, k=config.k, n_sample=config.n_sample, seed=config.seed)
    if not sigma > 0:
        raise NumericalError("automatic sigma is zero (duplicate points?); pass --sigma explicitly")
    log.info("sigma(auto, k=%d) = %.6g", config.k, sigma)
    return sigma


def sample_pairs(points, n_pairs, seed):
    """Index pairs ``(i, j)``, disjoint when there are at least ``2 n_pairs`` points."""
    n = points.shape[0]
    rng = child_rng(seed, STREAM_PAIRS)
    if n >= 2 * n_pairs:
        perm = rng.permutation(n)
        return perm[:n_pairs], perm[n_pairs:2 * n_pairs]
    if n < 2:
        raise InputError("need at least two points to form pairs")
    i = rng.integers(0, n, n_pairs)
    j = (i + rng.integers(1, n, n_pairs)) % n
    return i, j


def time_projection(fmap, x, repeats=TIMING_REPEATS, warmup=TIMING_WARMUP):
    """Median wall-clock nanoseconds of one ``project`` call."""
    for _ in range(warmup):
        project(fmap, x)
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter_ns()
        project(fmap, x)
        samples.append(time.perf_counter_ns() - t0)
    return int(statistics.median(samples))


def run_mse_curve(config):
    header = ["kind", "d", "D", "mse", "stderr", "runtime_ns"]
    rows = []
    for d in config.d:
        ds = _dataset_for(config, d, STREAM_PAIRS)
        sigma = _resolve_sigma(config, ds)
        i, j = sample_pairs(ds.points, config.pairs, config.seed)
        pairs = make_pairs(ds.points[i], ds.points[j], sigma)
        for kind in config.kinds:
            for D in config.D:
                spec = TransformSpec(kind, ds.d, D, sigma, config.seed)
                report = mse_estimate(spec, pairs, config.seeds, workers=config.threads)
                runtime = time_projection(build(spec), ds.points[0]) if config.timing else None
                rows.append([kind, ds.d, D, report.mse, report.stderr, runtime])
    return header, rows


def run_bias_variance(config):
    header = ["kind", "d", "D", "z", "bias", "bias_stderr", "var_ratio", "var_ratio_stderr",
              "trials"]
    rows = []
    for d in config.d:
        for D in (config.D or [d]):
            for kind in config.kinds:
                rep = simulate.mc_bias_variance(kind, d, D, config.z, config.trials, config.seed,
                                                fixed_direction=config.fixed_direction,
                                                workers=config.threads)
                for i, z in enumerate(rep.z_grid):
                    rows.append([kind, d, D, float(z), rep.bias[i], rep.bias_stderr[i],
                                 rep.var_ratio[i], rep.var_ratio_stderr[i], rep.trials])
    return header, rows


def run_ortho_check(config):
    header = ["d", "z_norm", "t", "exceed_fraction", "median_max_inner", "max_row_norm_dev",
              "max_recon_err", "trials"]
    rows = []
    for d in config.d:
        direction = child_rng(config.seed, STREAM_ORTHO, 1 << 20, d).standard_normal(d)
        direction /= np.linalg.norm(direction)
        for zi, znorm in enumerate(config.z):
            if znorm <= 0:
                raise ConfigurationError("ortho-check needs positive --z values")
            rep = simulate.near_orthogonality_stats(d, znorm * direction, config.trials, config.t,
                                                    child_seed(config.seed, STREAM_ORTHO, d, zi),
                                                    workers=config.threads)
            for ti, t in enumerate(rep.t_grid):
                rows.append([d, float(znorm), float(t), rep.exceed_fraction[ti],
                             rep.median_max_inner, rep.max_row_norm_deviation,
                             rep.max_reconstruction_error, rep.trials])
    return header, rows


def run_angle_sim(config):
    header = ["kind", "d", "D", "theta", "mean_estimate", "bias", "angular_mse", "mse_stderr",
              "trials"]
    rows = []
    for d in config.d:
        for D in config.D:
            for kind in config.kinds:
                est = binembed.angle_trials(kind, d, D, config.theta, config.trials, config.seed)
                sq = (est - config.theta) ** 2
                se = float(np.std(sq, ddof=1) / math.sqrt(len(sq))) if len(sq) > 1 else 0.0
                rows.append([kind, d, D, config.theta, float(est.mean()),
                             float(est.mean() - config.theta), float(sq.mean()), se, len(est)])
    return header, rows


def run_sigma(config):
    d = config.d[0] if config.d else 64
    ds = _dataset_for(config, d, STREAM_PAIRS)
    sigma = select_sigma(ds, k=config.k, n_sample=config.n_sample, seed=config.seed)
    return ["sigma", "k", "n_sample", "n", "d"], [[sigma, config.k, min(config.n_sample, ds.n),
                                                   ds.n, ds.d]]


RUNNERS = {
    "mse-curve": run_mse_curve,
    "bias-variance": run_bias_variance,
    "ortho-check": run_ortho_check,
    "angle-sim": run_angle_sim,
    "sigma": run_sigma,
}


# ---------------------------------------------------------------- parsing

def _grid(cast):
    def parse(text):
        items = [s for s in (p.strip() for p in text.split(",")) if s]
        try:
            return [cast(s) for s in items]
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid grid {text!r}") from None
    return parse


def _pi_float(text):
    t = text.strip().lower().replace(" ", "")
    if "pi" in t:
        num, _, den = t.replace("pi", "1").partition("/")
        return math.pi * float(num.replace("*", "") or 1) / float(den or 1)
    return float(t)


def _kinds(text):
    return [Kind.parse(s) for s in (p.strip() for p in text.split(",")) if s]


def _sigma(text):
    if text.strip().lower() == "auto":
        return "auto"
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError("sigma must be positive or 'auto'")
    return value


DEFAULTS = {
    "mse-curve": {"kind": "rff,orf,sorf", "D": "64,128,256", "d": "64"},
    "bias-variance": {"kind": "rff,orf,orf-prime,sorf", "z": "0.5,1,1.5,2,3", "d": "64"},
    "ortho-check": {"d": "64,256,1024", "z": "1", "trials": 1000},
    "angle-sim": {"kind": "rff,sorf", "D": "256,1024,4096", "d": "256", "trials": 50},
    "sigma": {},
    "synth": {"d": "64"},
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="orthofeatures",
        description="Orthogonal random feature experiments (CSV output).")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, name):
        defaults = DEFAULTS[name]
        p.add_argument("--seed", type=int, default=0, help="root seed (default 0)")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--d", type=_grid(int), default=_grid(int)(defaults.get("d", "64")),
                       help="input dimension(s), comma separated")
        p.add_argument("--input", default=None, help="dataset file instead of synthetic data")
        p.add_argument("--format", choices=[f.value for f in Format], default=Format.DENSE_CSV.value)
        p.add_argument("--synth", choices=[k.value for k in SynthKind],
                       default=SynthKind.SPHERE.value, help="synthetic data kind")
        p.add_argument("--n-points", type=int, default=1000, dest="n_points")
        p.add_argument("--threads", type=int, default=1)
        if name == "synth":
            return
        p.add_argument("--kind", type=_kinds, default=_kinds(defaults.get("kind", "rff")),
                       help="transform kinds: rff, orf, orf-prime, sorf, hdhd, hd")
        p.add_argument("--D", type=_grid(int), default=_grid(int)(defaults.get("D", "")),
                       help="number of features, comma separated")
        p.add_argument("--z", type=_grid(float), default=_grid(float)(defaults.get("z", "1")),
                       help="normalized distances, comma separated")
        p.add_argument("--sigma", type=_sigma, default="auto", help="bandwidth or 'auto'")
        p.add_argument("--seeds", type=int, default=20, help="independent maps per MSE point")
        p.add_argument("--trials", type=int, default=defaults.get("trials", simulate.DEFAULT_TRIALS))

    p = sub.add_parser("mse-curve", help="kernel approximation MSE per kind and D")
    common(p, "mse-curve")
    p.add_argument("--pairs", type=int, default=500)
    p.add_argument("--timing", action="store_true",
                   help="fill runtime_ns (median of 100 projections; not reproducible)")

    p = sub.add_parser("bias-variance", help="Monte-Carlo bias and variance ratio over z")
    common(p, "bias-variance")
    p.add_argument("--fixed-direction", action="store_true", dest="fixed_direction",
                   help="use x - y along e1 instead of a random direction per trial")

    p = sub.add_parser("ortho-check", help="near-orthogonality diagnostics of the HD chain")
    common(p, "ortho-check")
    p.add_argument("--t", type=_grid(float), default=[0.1, 0.25, 0.5])

    p = sub.add_parser("angle-sim", help="sign-code angle estimation")
    common(p, "angle-sim")
    p.add_argument("--theta", type=_pi_float, default=math.pi / 3, help="true angle, e.g. pi/3")

    p = sub.add_parser("sigma", help="k-th nearest neighbour bandwidth")
    common(p, "sigma")
    p.add_argument("--k", type=int, default=50)
    p.add_argument("--n-sample", type=int, default=1000, dest="n_sample")

    p = sub.add_parser("synth", help="write a synthetic dataset")
    common(p, "synth")
    return parser


def config_from_args(args):
    values = {"subcommand": args.subcommand}
    for name in ExperimentConfig.__dataclass_fields__:
        if name == "kinds":
            if hasattr(args, "kind"):
                values["kinds"] = args.kind
        elif name != "subcommand" and hasattr(args, name):
            values[name] = getattr(args, name)
    return ExperimentConfig(**values)


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        config = config_from_args(args)
        if config.subcommand == "synth":
            if len(config.d) != 1:
                raise ConfigurationError("synth takes a single --d")
            ds = synth_dataset(config.synth, config.n_points, config.d[0], config.seed)
            _emit(format_dataset(ds.points, config.format), config.out)
            return EXIT_OK
        header, rows = RUNNERS[config.subcommand](config)
        _emit(render_csv(header, rows), config.out)
        return EXIT_OK
    except (ConfigurationError, DimensionError) as exc:
        print(f"orthofeatures: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InputError, OSError) as exc:
        print(f"orthofeatures: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"orthofeatures: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OrthoFeaturesError as exc:
        print(f"orthofeatures: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
