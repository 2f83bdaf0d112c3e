"""Command-line entry points.

Subcommands: ``dtw``, ``search``, ``embed``, ``calibrate``, ``identify``,
``bench``. Configuration precedence is built-in defaults, then a flat
``key = value`` config file, then explicit flags. All randomness flows
from the single ``--seed`` value.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .backends import active_backend
from .bayesopt import OptimizerConfig
from .dtw import SakoeChibaBand, dtw_distance, accumulate_cost, best_path, Mode
from .embedding import generate_basis, feature_map, load_basis, save_basis
from .exceptions import (
    BandError,
    BoundsError,
    DimensionError,
    FeasibilityError,
    NotCalibratedError,
    ParseError,
)
from .identify import (
    IdentificationMatrix,
    Method,
    accuracy,
    build_identification_matrix,
    extract_reference,
    write_heatmap_pgm,
    write_matrix_csv,
)
from .instrumentation import counters
from .kernel import fit_kernel_model, load_model, save_model
from .series import Dataset, load_series_file, znormalize
from .subsequence import find_repetitions


@dataclass
class RunConfig:
    """Experiment knobs; defaults follow the walking-activity benchmark."""

    R: int = 64
    lmin: int = 20
    lmax: int = 30
    nu: float = 0.5
    sigma2: float = 0.4
    tau: float = 0.0
    window: int = 200
    seed: int = 0
    budget: int = 100
    init_design: int = 10
    exhaustive_threshold: int = 500
    exclusion_radius: int | None = None
    band: int | None = None
    jobs: int = 1
    znorm: bool = False

    def optimizer_config(self) -> OptimizerConfig:
        return OptimizerConfig(
            budget=self.budget,
            init_design=self.init_design,
            seed=self.seed,
            exhaustive_threshold=self.exhaustive_threshold,
        )


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def _parse_config_file(path: Path) -> dict:
    values: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError(f"{path}:{lineno}: expected 'key = value'")
            key, raw = (part.strip() for part in line.split("=", 1))
            if key not in _FIELD_TYPES:
                raise ParseError(f"{path}:{lineno}: unknown config key {key!r}")
            values[key] = _coerce(key, raw)
    return values


def _coerce(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    if kind in ("bool", bool):
        return raw.lower() in {"1", "true", "yes", "on"}
    if kind in ("float", float):
        return float(raw)
    return int(raw)


def make_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig()
    if getattr(args, "config", None):
        for key, value in _parse_config_file(Path(args.config)).items():
            setattr(config, key, value)
    for name in _FIELD_TYPES:
        value = getattr(args, name, None)
        if value is not None and value is not False:
            setattr(config, name, value)
    return config


def _load_series(path: str, config: RunConfig):
    series = load_series_file(path)
    return znormalize(series) if config.znorm else series


def _band(config: RunConfig) -> SakoeChibaBand | None:
    return None if config.band is None else SakoeChibaBand(config.band)


def cmd_dtw(args: argparse.Namespace) -> int:
    config = make_config(args)
    x = _load_series(args.series_a, config)
    y = _load_series(args.series_b, config)
    band = _band(config)
    print(repr(dtw_distance(x, y, band=band)))
    if args.path:
        matrix = accumulate_cost(x, y, mode=Mode.GLOBAL, band=band)
        path = best_path(matrix)
        with open(args.path, "w", encoding="utf-8", newline="") as fh:
            fh.write("l,i,j\n")
            for l, (i, j) in enumerate(path, start=1):
                fh.write(f"{l},{i},{j}\n")
    return 0


def cmd_search(args: argparse.Namespace) -> int:
    config = make_config(args)
    pattern = _load_series(args.pattern, config)
    stream = _load_series(args.stream, config)
    matches = find_repetitions(
        pattern, stream, threshold=config.tau, exclusion_radius=config.exclusion_radius
    )
    lines = ["rank,a,b,distance"]
    lines += [
        f"{rank},{m.start},{m.end},{m.distance!r}"
        for rank, m in enumerate(matches, start=1)
    ]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_embed(args: argparse.Namespace) -> int:
    config = make_config(args)
    if args.series:
        channels = load_series_file(args.series).n_channels
    else:
        channels = args.channels
    basis = generate_basis(
        size=config.R,
        n_channels=channels,
        length_min=config.lmin,
        length_max=config.lmax,
        sigma2=config.sigma2,
        seed=config.seed,
    )
    save_basis(basis, args.out)
    if args.series:
        series = _load_series(args.series, config)
        vector = feature_map(series, basis, n_jobs=config.jobs)
        print(",".join(repr(float(v)) for v in vector))
    return 0


def _load_window_offsets(path: str | None) -> dict[str, int]:
    if not path:
        return {}
    offsets: dict[str, int] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ParseError(f"{path}:{lineno}: expected '<stream-label> <start>'")
            offsets[parts[0]] = int(parts[1])
    return offsets


def _load_experiment(args: argparse.Namespace, config: RunConfig):
    dataset = Dataset.from_dir(args.dataset_dir)
    streams = [znormalize(s) if config.znorm else s for s in dataset.streams]
    offsets = _load_window_offsets(getattr(args, "window_offsets", None))
    patterns = [
        extract_reference(s, start=offsets.get(s.label or "", None), window=config.window)
        for s in streams
    ]
    return patterns, streams


def _calibrate(patterns, config: RunConfig, out_dir: Path):
    basis = generate_basis(
        size=config.R,
        n_channels=patterns[0].n_channels,
        length_min=config.lmin,
        length_max=config.lmax,
        sigma2=config.sigma2,
        seed=config.seed,
    )
    model = fit_kernel_model(patterns, basis, n_jobs=config.jobs)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_basis(basis, out_dir / "basis.txt")
    save_model(model, out_dir / "model.txt", "basis.txt")
    return model


def _obtain_model(patterns, config: RunConfig, out_dir: Path):
    model_path = out_dir / "model.txt"
    if model_path.exists():
        model = load_model(model_path)
        if model.basis.size == config.R and model.n_patterns == len(patterns):
            return model
    return _calibrate(patterns, config, out_dir)


def cmd_calibrate(args: argparse.Namespace) -> int:
    config = make_config(args)
    patterns, _ = _load_experiment(args, config)
    _calibrate(patterns, config, Path(args.out))
    print(f"calibrated {len(patterns)} patterns -> {args.out}")
    return 0


def _run_method(
    method: Method, patterns, streams, config: RunConfig, out_dir: Path
) -> tuple[IdentificationMatrix, tuple[int, int, float], dict, float]:
    model = None
    if method is Method.KERNEL:
        model = _obtain_model(patterns, config, out_dir)
    counters.reset()
    started = time.perf_counter()
    matrix = build_identification_matrix(
        patterns,
        streams,
        method=method,
        model=model,
        length_tolerance=config.nu,
        config=config.optimizer_config(),
        n_jobs=config.jobs,
    )
    wall_ms = (time.perf_counter() - started) * 1000.0
    work = counters.snapshot()
    truth = list(range(1, len(streams) + 1))
    return matrix, accuracy(matrix, truth), work, wall_ms


def _write_outputs(
    matrix: IdentificationMatrix, out_dir: Path, csv_only: bool
) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    write_matrix_csv(matrix, out_dir / f"matrix_{matrix.method.value}.csv")
    if not csv_only:
        write_heatmap_pgm(matrix, out_dir / f"heatmap_{matrix.method.value}.pgm")


def _log_lines(config: RunConfig, entries: list[tuple[str, object]]) -> list[str]:
    lines = [f"backend = {active_backend()}", f"version = {__version__}"]
    lines += [f"{f.name} = {getattr(config, f.name)}" for f in dataclasses.fields(RunConfig)]
    lines += [f"{key} = {value}" for key, value in entries]
    return lines


def cmd_identify(args: argparse.Namespace) -> int:
    config = make_config(args)
    out_dir = Path(args.out)
    patterns, streams = _load_experiment(args, config)
    method = Method(args.method)
    matrix, (correct, total, fraction), work, wall_ms = _run_method(
        method, patterns, streams, config, out_dir
    )
    _write_outputs(matrix, out_dir, args.csv_only)
    summary = [
        ("method", method.value),
        ("accuracy", f"{correct}/{total} ({fraction:.4f})"),
        ("cost_evals", work["cost_evals"]),
        ("kernel_ops", work["kernel_ops"]),
        ("objective_evals", work["objective_evals"]),
        ("wall_ms", f"{wall_ms:.1f}"),
    ]
    (out_dir / "run.log").write_text(
        "\n".join(_log_lines(config, summary)) + "\n", encoding="utf-8"
    )
    print(f"{method.value} accuracy: {correct}/{total} ({fraction:.4f})")
    print(f"cost_evals: {work['cost_evals']}  wall_ms: {wall_ms:.1f}")
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    config = make_config(args)
    out_dir = Path(args.out)
    patterns, streams = _load_experiment(args, config)
    rows = ["method,accuracy,cost_evals,wall_ms"]
    log_entries: list[tuple[str, object]] = []
    for method in (Method.EXACT_DTW, Method.KERNEL):
        matrix, (correct, total, fraction), work, wall_ms = _run_method(
            method, patterns, streams, config, out_dir
        )
        _write_outputs(matrix, out_dir, args.csv_only)
        rows.append(f"{method.value},{fraction!r},{work['cost_evals']},{wall_ms:.3f}")
        log_entries += [
            (f"{method.value}_accuracy", f"{correct}/{total}"),
            (f"{method.value}_cost_evals", work["cost_evals"]),
            (f"{method.value}_kernel_ops", work["kernel_ops"]),
            (f"{method.value}_wall_ms", f"{wall_ms:.1f}"),
        ]
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "bench.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    (out_dir / "run.log").write_text(
        "\n".join(_log_lines(config, log_entries)) + "\n", encoding="utf-8"
    )
    print("\n".join(rows))
    return 0


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--R", type=int, default=None, help="number of basis series")
    parser.add_argument("--lmin", type=int, default=None, help="minimum basis length")
    parser.add_argument("--lmax", type=int, default=None, help="maximum basis length")
    parser.add_argument("--nu", type=float, default=None, help="admitted window-length deviation")
    parser.add_argument("--sigma2", type=float, default=None, help="basis value variance")
    parser.add_argument("--tau", type=float, default=None, help="repetition acceptance threshold")
    parser.add_argument("--window", type=int, default=None, help="reference window length")
    parser.add_argument("--seed", type=int, default=None, help="master random seed")
    parser.add_argument("--budget", type=int, default=None, help="optimizer evaluation budget")
    parser.add_argument("--init-design", dest="init_design", type=int, default=None)
    parser.add_argument(
        "--exhaustive-threshold", dest="exhaustive_threshold", type=int, default=None
    )
    parser.add_argument(
        "--exclusion-radius", dest="exclusion_radius", type=int, default=None
    )
    parser.add_argument("--band", type=int, default=None, help="Sakoe-Chiba band width")
    parser.add_argument("--jobs", type=int, default=None, help="worker threads")
    parser.add_argument("--znorm", action="store_true", default=False,
                        help="z-normalize channels before any distance")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="warpquery",
        description="Pattern queries on multivariate time series: exact alignment, "
        "subsequence search, and a kernel surrogate.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dtw", help="distance between two series files")
    p.add_argument("series_a")
    p.add_argument("series_b")
    p.add_argument("--path", help="write the warping path CSV here")
    _add_config_flags(p)
    p.set_defaults(func=cmd_dtw)

    p = sub.add_parser("search", help="find repetitions of a pattern in a stream")
    p.add_argument("pattern")
    p.add_argument("stream")
    p.add_argument("--out", help="write the match CSV here instead of stdout")
    _add_config_flags(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("embed", help="generate a basis set; optionally embed a series")
    p.add_argument("--out", required=True, help="basis file to write")
    p.add_argument("--series", help="series to embed and print")
    p.add_argument("--channels", type=int, default=3, help="basis channel count")
    _add_config_flags(p)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("calibrate", help="fit the kernel model on a dataset's windows")
    p.add_argument("dataset_dir")
    p.add_argument("--out", required=True, help="directory for model.txt and basis.txt")
    p.add_argument("--window-offsets", dest="window_offsets",
                   help="file of '<stream-label> <start>' overrides")
    _add_config_flags(p)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("identify", help="streams-by-patterns identification run")
    p.add_argument("dataset_dir")
    p.add_argument("--method", choices=[m.value for m in Method], required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--csv-only", dest="csv_only", action="store_true", default=False)
    p.add_argument("--window-offsets", dest="window_offsets",
                   help="file of '<stream-label> <start>' overrides")
    _add_config_flags(p)
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("bench", help="compare both methods on one dataset")
    p.add_argument("dataset_dir")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--csv-only", dest="csv_only", action="store_true", default=False)
    p.add_argument("--window-offsets", dest="window_offsets",
                   help="file of '<stream-label> <start>' overrides")
    _add_config_flags(p)
    p.set_defaults(func=cmd_bench)

    return parser


_KNOWN_ERRORS = (
    BandError,
    BoundsError,
    DimensionError,
    FeasibilityError,
    NotCalibratedError,
    ParseError,
    ValueError,
    OSError,
)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _KNOWN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
