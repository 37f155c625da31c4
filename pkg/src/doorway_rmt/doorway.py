"""Doorway Hamiltonian assembly and Monte Carlo overlap sampling.

A single doorway level at energy 0 is coupled to N background levels
through a vector V, giving the (N+1) x (N+1) bordered matrix

    [[0,      V^dag],
     [V, diag(E_nu)]]

in the basis {doorway, background eigenstates}.  The overlap of the n-th
exact eigenstate with the doorway state is the first component of the
n-th eigenvector; at an exact eigenvalue E_n it equals

    |c_n|^2 = (1 + sum_nu |V_nu|^2 / (E_n - E_nu)^2)^-1.

Two sampled observables are provided: the fidelity statistic
c = (1 + sum |V_nu|^2 / E_nu^2)^(-1/2), obtained by evaluating the overlap
at the unperturbed doorway energy 0, and the maximum overlap
c_max = max_n |c_n| from full diagonalization.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from typing import Sequence

import numpy as np

from .ensembles import (
    BackgroundDraw,
    CouplingDraw,
    EnsembleSpec,
    mean_spacing,
    sample_background,
    sample_coupling,
    substream,
)
from .errors import DegenerateDrawError, EigensolverError, InvalidSpecError

log = logging.getLogger(__name__)

WORKERS_ENV_VAR = "DOORWAY_RMT_THREADS"

# Degenerate-draw policy: spectra with an exact zero level or a level gap
# below this are redrawn from the next retry substream.
DEGENERACY_TOL = 1e-14
TIE_TOL = 1e-14
MAX_REDRAWS = 64
MAX_DENSE_LEVELS = 5000


class Route(str, Enum):
    FIDELITY = "fidelity"
    MAX_OVERLAP = "max_overlap"


@dataclass(frozen=True)
class DoorwayModel:
    """One realization: background spectrum, coupling vector, doorway at 0."""

    background: BackgroundDraw
    coupling: CouplingDraw
    doorway_energy: float = 0.0

    def __post_init__(self):
        if len(self.background.energies) != len(self.coupling.entries):
            raise InvalidSpecError("background and coupling dimensions differ")
        if self.doorway_energy != 0.0:
            raise InvalidSpecError("the doorway level is fixed at energy 0")


@dataclass(frozen=True)
class OverlapSample:
    """One Monte Carlo overlap value c in [0, 1]."""

    c: float
    route: Route
    lam: float


@dataclass(frozen=True)
class SampleSet:
    """Array of overlap values plus degeneracy bookkeeping."""

    values: np.ndarray
    route: Route
    lam: float
    n_resampled: int = 0
    n_ties: int = 0


def build_full_matrix(model: DoorwayModel) -> np.ndarray:
    """Assemble the bordered (N+1) x (N+1) doorway Hamiltonian."""
    e = model.background.energies
    v = model.coupling.entries
    n = len(e)
    dtype = np.complex128 if np.iscomplexobj(v) else np.float64
    h = np.zeros((n + 1, n + 1), dtype=dtype)
    h[1:, 0] = v
    h[0, 1:] = np.conj(v)
    h[np.arange(1, n + 1), np.arange(1, n + 1)] = e
    return h


def full_spectrum(model: DoorwayModel) -> tuple[np.ndarray, np.ndarray]:
    """Exact eigenvalues and doorway overlaps |c_n| of the full Hamiltonian.

    Returns
    -------
    (eigenvalues, overlaps)
        Both of length N+1, consistently indexed, eigenvalues ascending.
    """
    h = build_full_matrix(model)
    try:
        eigenvalues, vectors = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(
            f"eigendecomposition failed for a bordered matrix of size {h.shape[0]}"
        ) from exc
    return eigenvalues, np.abs(vectors[0, :])


def overlap_sq(e_n: float, background: BackgroundDraw, coupling: CouplingDraw) -> float:
    """Squared doorway overlap |c_n|^2 evaluated at energy e_n.

    Exact when e_n is an exact eigenvalue of the full Hamiltonian.  Raises
    if e_n coincides with a background level, where a term diverges.
    """
    diff = e_n - background.energies
    if np.any(diff == 0.0):
        raise ZeroDivisionError(
            "overlap formula evaluated exactly at a background level"
        )
    s = np.sum(np.abs(coupling.entries) ** 2 / diff**2)
    return 1.0 / (1.0 + s)


def resolve_workers(requested: int | None = None) -> int:
    """Worker count: the environment variable, when set, overrides the request."""
    env = os.environ.get(WORKERS_ENV_VAR)
    if env is not None:
        try:
            value = int(env)
        except ValueError as exc:
            raise InvalidSpecError(
                f"{WORKERS_ENV_VAR} must be an integer, got {env!r}"
            ) from exc
        if value < 1:
            raise InvalidSpecError(f"{WORKERS_ENV_VAR} must be >= 1")
        return value
    if requested is None:
        return 1
    if requested < 1:
        raise InvalidSpecError("workers must be >= 1")
    return requested


def _is_degenerate(energies: np.ndarray) -> bool:
    if np.any(energies == 0.0):
        return True
    return bool(np.any(np.diff(energies) < DEGENERACY_TOL))


def _draw_realization(
    spec: EnsembleSpec, index: int
) -> tuple[BackgroundDraw, np.ndarray, int]:
    """Background plus unit-strength coupling for one sample, with redraws.

    Returns the draw, the unit coupling entries, and the number of redraws.
    """
    for retry in range(MAX_REDRAWS + 1):
        rng = substream(spec.seed, index, retry)
        try:
            background = sample_background(spec, rng)
        except EigensolverError as exc:
            raise EigensolverError(
                f"{exc} (seed {spec.seed}, sample {index}, retry {retry})"
            ) from exc
        unit = sample_coupling(replace(spec, v=1.0), rng).entries
        if not _is_degenerate(background.energies):
            return background, unit, retry
    raise DegenerateDrawError(
        f"sample {index} of seed {spec.seed} stayed degenerate after "
        f"{MAX_REDRAWS} redraws"
    )


def _fidelity_chunk(args) -> tuple[int, np.ndarray, int]:
    spec, start, stop = args
    base = np.empty(stop - start)
    resampled = 0
    for i in range(start, stop):
        background, unit, retries = _draw_realization(spec, i)
        resampled += retries
        base[i - start] = np.sum(np.abs(unit) ** 2 / background.energies**2)
    return start, base, resampled


def _max_overlap_chunk(args) -> tuple[int, np.ndarray, int, int]:
    spec, start, stop = args
    values = np.empty(stop - start)
    resampled = 0
    ties = 0
    for i in range(start, stop):
        background, unit, retries = _draw_realization(spec, i)
        resampled += retries
        model = DoorwayModel(background, CouplingDraw(spec.v * unit))
        try:
            _, overlaps = full_spectrum(model)
        except EigensolverError as exc:
            raise EigensolverError(f"{exc} (seed {spec.seed}, sample {i})") from exc
        best = int(np.argmax(overlaps))  # ties break at the lowest index
        if overlaps.size > 1:
            runner_up = np.partition(overlaps, -2)[-2]
            if overlaps[best] - runner_up <= TIE_TOL:
                ties += 1
        values[i - start] = overlaps[best]
    return start, values, resampled, ties


def _run_chunks(worker, spec: EnsembleSpec, n_samples: int, workers: int):
    """Map a chunk worker over the sample range, in index order."""
    if n_samples < 1:
        raise InvalidSpecError("n_samples must be >= 1")
    workers = min(workers, n_samples)
    n_chunks = 1 if workers == 1 else min(n_samples, workers * 4)
    bounds = np.linspace(0, n_samples, n_chunks + 1).astype(int)
    tasks = [(spec, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    if workers == 1:
        return [worker(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, tasks))


def fidelity_base_sums(
    spec: EnsembleSpec, n_samples: int, workers: int | None = None
) -> tuple[np.ndarray, int]:
    """Per-sample values of sum |V_nu|^2 / E_nu^2 at unit coupling strength.

    The fidelity statistic for any v is then c = (1 + v^2 base)^(-1/2);
    sharing the base across coupling strengths reuses each spectrum draw.
    """
    results = _run_chunks(_fidelity_chunk, spec, n_samples, resolve_workers(workers))
    base = np.empty(n_samples)
    resampled = 0
    for start, chunk, chunk_resampled in results:
        base[start : start + len(chunk)] = chunk
        resampled += chunk_resampled
    return base, resampled


def fidelity_values(
    spec: EnsembleSpec, n_samples: int, workers: int | None = None
) -> SampleSet:
    """Monte Carlo fidelity samples c = (1 + sum |V|^2/E^2)^(-1/2)."""
    base, resampled = fidelity_base_sums(spec, n_samples, workers)
    values = 1.0 / np.sqrt(1.0 + spec.v**2 * base)
    return SampleSet(
        values=values,
        route=Route.FIDELITY,
        lam=spec.coupling_ratio,
        n_resampled=resampled,
    )


def fidelity_values_multi(
    spec: EnsembleSpec,
    vs: Sequence[float],
    n_samples: int,
    workers: int | None = None,
) -> tuple[list[SampleSet], int]:
    """Fidelity samples for several coupling strengths from shared draws."""
    base, resampled = fidelity_base_sums(spec, n_samples, workers)
    d = mean_spacing(spec)
    sets = []
    for v in vs:
        if v < 0:
            raise InvalidSpecError("coupling strengths must be nonnegative")
        values = 1.0 / np.sqrt(1.0 + v**2 * base)
        sets.append(
            SampleSet(
                values=values,
                route=Route.FIDELITY,
                lam=v / d,
                n_resampled=resampled,
            )
        )
    return sets, resampled


def max_overlap_values(
    spec: EnsembleSpec, n_samples: int, workers: int | None = None
) -> SampleSet:
    """Monte Carlo samples of c_max = max_n |c_n| via full diagonalization."""
    if spec.n_levels > MAX_DENSE_LEVELS:
        raise InvalidSpecError(
            f"max-overlap sampling is guarded to n_levels <= {MAX_DENSE_LEVELS}"
        )
    results = _run_chunks(
        _max_overlap_chunk, spec, n_samples, resolve_workers(workers)
    )
    values = np.empty(n_samples)
    resampled = 0
    ties = 0
    for start, chunk, chunk_resampled, chunk_ties in results:
        values[start : start + len(chunk)] = chunk
        resampled += chunk_resampled
        ties += chunk_ties
    if ties:
        log.info("max-overlap sampling hit %d ties within %.0e", ties, TIE_TOL)
    return SampleSet(
        values=values,
        route=Route.MAX_OVERLAP,
        lam=spec.coupling_ratio,
        n_resampled=resampled,
        n_ties=ties,
    )


def _to_samples(sample_set: SampleSet) -> list[OverlapSample]:
    return [
        OverlapSample(c=float(c), route=sample_set.route, lam=sample_set.lam)
        for c in sample_set.values
    ]


def sample_fidelity(
    spec: EnsembleSpec, n_samples: int, workers: int | None = None
) -> list[OverlapSample]:
    """Fidelity-route overlap samples as individual records."""
    return _to_samples(fidelity_values(spec, n_samples, workers))


def sample_max_overlap(
    spec: EnsembleSpec, n_samples: int, workers: int | None = None
) -> list[OverlapSample]:
    """Max-overlap-route samples as individual records."""
    return _to_samples(max_overlap_values(spec, n_samples, workers))
