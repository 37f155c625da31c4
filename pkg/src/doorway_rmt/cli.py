"""Configuration-driven experiment runner and verification entry point.

Subcommands: ``simulate`` (Monte Carlo vs closed form, CSV outputs),
``analytic`` (closed-form curve tables), ``compare`` (KS of a stored
sample file against a closed form), ``afactors`` (coupling-law first
moments), ``verify`` (self-check suite).

Exit codes: 0 success, 1 usage error, 2 numeric failure, 3 verification
failure.  The DOORWAY_RMT_THREADS environment variable overrides any
configured worker count.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__, analytic, verify
from .doorway import fidelity_values_multi, max_overlap_values, resolve_workers
from .ensembles import EnsembleSpec, Interaction, a_factor, mean_spacing
from .errors import (
    DegenerateDrawError,
    EigensolverError,
    InvalidSpecError,
    QuadratureError,
    UsageError,
)
from .stats import EmpiricalDistribution, histogram, ks_distance

DEFAULT_LAMBDAS = (0.05, 0.1, 0.5, 2.0)
DEFAULT_SEED = 20090306
DEFAULT_GRID = 513
CURVE_EPS = 1e-6

_SPEC_FIELDS = {"background", "n_levels", "w", "interaction", "beta", "v", "seed"}
_CONFIG_FIELDS = {
    "spec",
    "lambdas",
    "n_samples",
    "route",
    "output_path",
    "n_bins",
    "workers",
}


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: an ensemble, a coupling-strength grid, sampling sizes."""

    spec: EnsembleSpec
    lambdas: tuple[float, ...]
    n_samples: int
    route: str = "fidelity"
    output_path: str = "out"
    n_bins: int = 100
    workers: int = 1

    def __post_init__(self):
        if not self.lambdas or any(lam <= 0 for lam in self.lambdas):
            raise InvalidSpecError("lambdas must be a nonempty list of positive reals")
        if self.n_samples < 100:
            raise InvalidSpecError("n_samples must be >= 100 for KS reporting")
        if self.route not in ("fidelity", "max_overlap", "both"):
            raise InvalidSpecError("route must be fidelity, max_overlap, or both")
        if self.n_bins < 1 or self.workers < 1:
            raise InvalidSpecError("n_bins and workers must be >= 1")

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        unknown = set(raw) - _CONFIG_FIELDS
        if unknown:
            raise UsageError(f"unknown config fields: {sorted(unknown)}")
        if "spec" not in raw or "n_samples" not in raw:
            raise UsageError("config requires 'spec' and 'n_samples'")
        spec_raw = dict(raw["spec"])
        unknown = set(spec_raw) - _SPEC_FIELDS
        if unknown:
            raise UsageError(f"unknown spec fields: {sorted(unknown)}")
        spec_raw.setdefault("v", 0.0)
        spec_raw.setdefault("seed", DEFAULT_SEED)
        spec_raw.setdefault("w", 1.0)
        try:
            spec = EnsembleSpec(**spec_raw)
        except TypeError as exc:
            raise UsageError(f"bad spec: {exc}") from exc
        kwargs = {k: v for k, v in raw.items() if k != "spec"}
        if "lambdas" in kwargs:
            kwargs["lambdas"] = tuple(float(x) for x in kwargs["lambdas"])
        else:
            kwargs["lambdas"] = DEFAULT_LAMBDAS
        try:
            return cls(spec=spec, **kwargs)
        except TypeError as exc:
            raise UsageError(f"bad config: {exc}") from exc

    def to_dict(self) -> dict:
        out = asdict(self)
        out["spec"]["background"] = self.spec.background.value
        out["spec"]["interaction"] = self.spec.interaction.value
        out["lambdas"] = list(self.lambdas)
        return out

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except FileNotFoundError as exc:
            raise UsageError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(raw)

    def sha256(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()


@dataclass(frozen=True)
class RunRecord:
    lam: float
    route: str
    family: str
    a: float | None
    ks_to_analytic: float
    n_resampled: int
    wall_time: float


@dataclass(frozen=True)
class RunReport:
    """Per-(lambda, route) KS results plus provenance.

    wall_time attributes shared multi-lambda sampling equally to its
    records and is the one field exempt from byte-level determinism.
    """

    records: tuple[RunRecord, ...]
    seed: int
    config_sha256: str
    version: str

    def to_dict(self) -> dict:
        records = []
        for r in self.records:
            rec = asdict(r)
            rec["lambda"] = rec.pop("lam")
            records.append(rec)
        return {
            "records": records,
            "provenance": {
                "seed": self.seed,
                "config_sha256": self.config_sha256,
                "version": self.version,
            },
        }


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(x) for x in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def _lam_tag(lam: float) -> str:
    return f"lam{lam:g}"


def _check_outdir(path: str | Path) -> Path:
    outdir = Path(path)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        probe = outdir / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise UsageError(f"output path not writable: {outdir}") from exc
    return outdir


def tabulate_analytic(
    family: analytic.Family,
    lambdas: Sequence[float],
    grid_size: int,
    out_dir: str | Path,
    a: float | None = None,
) -> list[Path]:
    """Write one c,pdf,cdf curve file per coupling strength."""
    if grid_size < 2:
        raise InvalidSpecError("grid_size must be >= 2")
    outdir = _check_outdir(out_dir)
    grid = np.linspace(0.0, 1.0 - CURVE_EPS, grid_size)
    paths = []
    for lam in lambdas:
        dist = analytic.AnalyticDistribution(family, lam, a)
        rows = zip(grid, dist.pdf(grid), dist.cdf(grid))
        path = outdir / f"curve_{dist.family.value}_{_lam_tag(lam)}.csv"
        _write_csv(path, ("c", "pdf", "cdf"), rows)
        paths.append(path)
    return paths


def _emit_route_outputs(
    outdir: Path,
    config: ExperimentConfig,
    sample_set,
    dist: analytic.AnalyticDistribution,
    emit_samples: bool,
) -> float:
    tag = f"{sample_set.route.value}_{_lam_tag(sample_set.lam)}"
    empirical = EmpiricalDistribution.from_samples(sample_set.values)
    ks = ks_distance(empirical, dist.cdf)
    hist = histogram(empirical, config.n_bins)
    _write_csv(
        outdir / f"hist_{tag}.csv",
        ("bin_left", "bin_right", "density"),
        zip(hist.bin_edges[:-1], hist.bin_edges[1:], hist.densities),
    )
    if emit_samples:
        _write_csv(
            outdir / f"samples_{tag}.csv", ("c",), ((v,) for v in sample_set.values)
        )
    return ks


def run(config: ExperimentConfig, emit_samples: bool = False) -> RunReport:
    """Run the configured experiment and write CSV outputs plus report.json.

    For each coupling strength, v = lambda * D is derived from the
    ensemble's band-center spacing, the requested sampler(s) run, and the
    samples are compared against the matching closed form.  Outputs are
    byte-identical for a fixed (config, seed) regardless of worker count.
    """
    outdir = _check_outdir(config.output_path)
    spec = config.spec
    d = mean_spacing(spec)
    workers = resolve_workers(config.workers)
    records: list[RunRecord] = []

    route_sets = []
    if config.route in ("fidelity", "both"):
        start = time.perf_counter()
        sets, _ = fidelity_values_multi(
            spec, [lam * d for lam in config.lambdas], config.n_samples, workers
        )
        shared = (time.perf_counter() - start) / len(config.lambdas)
        route_sets.extend((s, shared) for s in sets)
    if config.route in ("max_overlap", "both"):
        for lam in config.lambdas:
            start = time.perf_counter()
            sample_set = max_overlap_values(
                replace(spec, v=lam * d), config.n_samples, workers
            )
            route_sets.append((sample_set, time.perf_counter() - start))

    for sample_set, seconds in route_sets:
        dist = analytic.AnalyticDistribution.for_spec(spec, sample_set.lam)
        start = time.perf_counter()
        ks = _emit_route_outputs(outdir, config, sample_set, dist, emit_samples)
        records.append(
            RunRecord(
                lam=sample_set.lam,
                route=sample_set.route.value,
                family=dist.family.value,
                a=dist.a,
                ks_to_analytic=ks,
                n_resampled=sample_set.n_resampled,
                wall_time=seconds + (time.perf_counter() - start),
            )
        )

    for lam in config.lambdas:
        dist = analytic.AnalyticDistribution.for_spec(spec, lam)
        tabulate_analytic(dist.family, [lam], DEFAULT_GRID, outdir, dist.a)

    report = RunReport(
        records=tuple(records),
        seed=spec.seed,
        config_sha256=config.sha256(),
        version=__version__,
    )
    (outdir / "report.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    return report


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with code 2
        raise UsageError(message)


def _family_args(value: str) -> list[analytic.Family]:
    if value == "all":
        return list(analytic.Family)
    try:
        return [analytic.Family(name) for name in value.split(",")]
    except ValueError as exc:
        raise UsageError(f"unknown family in {value!r}") from exc


def _lambda_args(value: str) -> list[float]:
    try:
        lams = [float(x) for x in value.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad lambda list {value!r}") from exc
    if not lams or any(lam <= 0 for lam in lams):
        raise UsageError("lambdas must be positive")
    return lams


def _build_parser() -> _Parser:
    parser = _Parser(prog="doorway-rmt", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="Monte Carlo run against closed forms")
    sim.add_argument("--config", required=True, help="JSON experiment config")
    sim.add_argument("--seed", type=int, default=None, help="override the spec seed")
    sim.add_argument("--workers", type=int, default=None, help="worker processes")
    sim.add_argument("--out", default=None, help="override the output directory")
    sim.add_argument("--emit-samples", action="store_true", help="write raw samples")

    ana = sub.add_parser("analytic", help="tabulate closed-form curves")
    ana.add_argument("--families", type=_family_args, default=list(analytic.Family))
    ana.add_argument("--lambdas", type=_lambda_args, default=list(DEFAULT_LAMBDAS))
    ana.add_argument("--grid", type=int, default=DEFAULT_GRID)
    ana.add_argument("--interaction", default="gaussian",
                     choices=[k.value for k in Interaction],
                     help="coupling law fixing a for the regular families")
    ana.add_argument("--out", default="out")

    cmp_ = sub.add_parser("compare", help="KS of a stored sample file vs a closed form")
    cmp_.add_argument("--samples", required=True, help="CSV with a 'c' column")
    cmp_.add_argument("--family", required=True,
                      choices=[f.value for f in analytic.Family])
    cmp_.add_argument("--lam", type=float, required=True)
    cmp_.add_argument("--interaction", default="gaussian",
                      choices=[k.value for k in Interaction])

    sub.add_parser("afactors", help="print the coupling-law first-moment table")

    ver = sub.add_parser("verify", help="run the self-check suite")
    ver.add_argument("--level", default="fast", choices=["fast", "full"])

    return parser


def _cmd_simulate(args) -> int:
    config = ExperimentConfig.from_json(args.config)
    if args.seed is not None:
        config = replace(config, spec=replace(config.spec, seed=args.seed))
    if args.workers is not None:
        config = replace(config, workers=args.workers)
    if args.out is not None:
        config = replace(config, output_path=args.out)
    print(f"seed {config.spec.seed}, workers {resolve_workers(config.workers)}")
    report = run(config, emit_samples=args.emit_samples)
    for r in report.records:
        print(
            f"lambda={r.lam:g} route={r.route} family={r.family} "
            f"ks={r.ks_to_analytic:.5f} resampled={r.n_resampled} "
            f"({r.wall_time:.1f}s)"
        )
    print(f"outputs in {config.output_path}")
    return 0


def _cmd_analytic(args) -> int:
    for family in args.families:
        a = None
        if family in (analytic.Family.REGULAR_BETA1, analytic.Family.REGULAR_BETA2):
            beta = 1 if family is analytic.Family.REGULAR_BETA1 else 2
            a = a_factor(Interaction(args.interaction), beta)
        paths = tabulate_analytic(family, args.lambdas, args.grid, args.out, a)
        for path in paths:
            print(path)
    return 0


def _cmd_compare(args) -> int:
    path = Path(args.samples)
    if not path.exists():
        raise UsageError(f"sample file not found: {path}")
    header, *rows = path.read_text().strip().splitlines()
    cols = header.split(",")
    if "c" not in cols:
        raise UsageError(f"{path} has no 'c' column")
    idx = cols.index("c")
    values = np.array([float(line.split(",")[idx]) for line in rows])
    family = analytic.Family(args.family)
    a = None
    if family in (analytic.Family.REGULAR_BETA1, analytic.Family.REGULAR_BETA2):
        beta = 1 if family is analytic.Family.REGULAR_BETA1 else 2
        a = a_factor(Interaction(args.interaction), beta)
    dist = analytic.AnalyticDistribution(family, args.lam, a)
    ks = ks_distance(EmpiricalDistribution.from_samples(values), dist.cdf)
    print(f"ks={ks!r} n={len(values)} family={family.value} lambda={args.lam:g}")
    return 0


def _cmd_afactors() -> int:
    print("interaction  beta  a = E|V|/v")
    for kind in Interaction:
        for beta in (1, 2):
            print(f"{kind.value:<12} {beta}     {a_factor(kind, beta):.6f}")
    return 0


def _cmd_verify(args) -> int:
    results = verify.run_checks(args.level)
    failed = 0
    for res in results:
        status = "PASS" if res.ok else "FAIL"
        print(f"{status} {res.name}: {res.detail} ({res.seconds:.1f}s)")
        failed += not res.ok
    if failed:
        print(f"{failed} of {len(results)} checks failed")
        return 3
    print(f"all {len(results)} checks passed")
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "analytic":
            return _cmd_analytic(args)
        if args.command == "compare":
            return _cmd_compare(args)
        if args.command == "afactors":
            return _cmd_afactors()
        return _cmd_verify(args)
    except (UsageError, InvalidSpecError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (EigensolverError, QuadratureError, DegenerateDrawError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
