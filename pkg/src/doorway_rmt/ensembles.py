"""Background spectra and coupling vectors for the doorway model.

Conventions
-----------
Chaotic backgrounds are drawn from the Gaussian orthogonal (beta=1) or
Gaussian unitary (beta=2) ensemble with matrix weight exp(-tr H^2 / 2 w^2),
i.e. diagonal entries of variance w^2 and independent off-diagonal
components of variance w^2/2.  The mean level spacing at the band center
is then D = sqrt(beta pi^2 w^2 / (2 N)).

The regular background draws N independent levels from a flat box of
density 1/sqrt(N) on [-sqrt(N)/2, sqrt(N)/2], so D = 1/sqrt(N).

Coupling vectors have i.i.d. entries, real for beta=1 and complex with a
U(1)-invariant modulus law for beta=2, always calibrated to E|V|^2 = v^2
so that the dimensionless coupling lambda = v/D is beta-independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import EigensolverError, InvalidSpecError


class Background(str, Enum):
    REGULAR = "regular"
    GOE = "goe"
    GUE = "gue"


class Interaction(str, Enum):
    GAUSSIAN = "gaussian"
    UNIFORM = "uniform"
    SEMICIRCLE = "semicircle"


@dataclass(frozen=True)
class EnsembleSpec:
    """Parameters of one (background, coupling) ensemble.

    Attributes
    ----------
    background : Background
        Level statistics of the background Hamiltonian.
    n_levels : int
        Number of background levels N.
    w : float
        Scale of the Gaussian matrix weight exp(-tr H^2 / 2 w^2).
    interaction : Interaction
        Shape of the coupling-entry law.
    beta : int
        1 for real couplings (orthogonal class), 2 for complex (unitary).
    v : float
        Root-mean-square coupling entry, E|V|^2 = v^2.
    seed : int
        Base seed of the counter-based sample streams (64-bit unsigned).
    """

    background: Background
    n_levels: int
    w: float
    interaction: Interaction
    beta: int
    v: float
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "background", Background(self.background))
        object.__setattr__(self, "interaction", Interaction(self.interaction))
        if self.n_levels < 1:
            raise InvalidSpecError("n_levels must be a positive integer")
        if not self.w > 0:
            raise InvalidSpecError("w must be positive")
        if self.beta not in (1, 2):
            raise InvalidSpecError("beta must be 1 or 2")
        if self.v < 0:
            raise InvalidSpecError("v must be nonnegative")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidSpecError("seed must fit in an unsigned 64-bit integer")
        # Chaotic classes pair with a fixed beta; only the regular
        # background admits both real and complex couplings.
        if self.background is Background.GOE and self.beta != 1:
            raise InvalidSpecError("a GOE background requires beta = 1")
        if self.background is Background.GUE and self.beta != 2:
            raise InvalidSpecError("a GUE background requires beta = 2")

    @property
    def coupling_ratio(self) -> float:
        """Dimensionless coupling lambda = v / D."""
        return self.v / mean_spacing(self)


@dataclass(frozen=True)
class BackgroundDraw:
    """One sampled background spectrum, sorted ascending."""

    energies: np.ndarray
    mean_spacing: float


@dataclass(frozen=True)
class CouplingDraw:
    """One sampled coupling vector (real for beta=1, complex for beta=2)."""

    entries: np.ndarray


def mean_spacing(spec: EnsembleSpec) -> float:
    """Mean level spacing D at the band center for the given ensemble."""
    if spec.background is Background.REGULAR:
        return 1.0 / math.sqrt(spec.n_levels)
    return math.sqrt(spec.beta * math.pi**2 * spec.w**2 / (2 * spec.n_levels))


def substream(seed: int, index: int, retry: int = 0) -> np.random.Generator:
    """Counter-based random stream keyed by (seed, sample index, retry).

    Each Monte Carlo sample owns its own Philox stream, so results are
    bit-identical regardless of how samples are partitioned over workers.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index), int(retry)))
    return np.random.Generator(np.random.Philox(ss))


def goe_matrix(n: int, w: float, rng: np.random.Generator) -> np.ndarray:
    """Real symmetric matrix with weight exp(-tr H^2 / 2 w^2), exactly symmetric."""
    upper = np.triu(rng.standard_normal((n, n)), 1) * (w / math.sqrt(2))
    h = upper + upper.T
    h[np.diag_indices(n)] = rng.standard_normal(n) * w
    return h


def gue_matrix(n: int, w: float, rng: np.random.Generator) -> np.ndarray:
    """Complex Hermitian matrix with weight exp(-tr H^2 / 2 w^2), exactly Hermitian."""
    s = w / math.sqrt(2)
    re = np.triu(rng.standard_normal((n, n)), 1) * s
    im = np.triu(rng.standard_normal((n, n)), 1) * s
    h = (re + 1j * im).astype(np.complex128)
    h = h + h.conj().T
    h[np.diag_indices(n)] = rng.standard_normal(n) * w
    return h


def sample_background(spec: EnsembleSpec, rng: np.random.Generator) -> BackgroundDraw:
    """Draw one background spectrum, sorted ascending.

    Regular backgrounds draw levels directly from the flat box; chaotic
    backgrounds build the full matrix and return its exact eigenvalues.
    """
    n = spec.n_levels
    if spec.background is Background.REGULAR:
        half = math.sqrt(n) / 2
        energies = np.sort(rng.uniform(-half, half, n))
    else:
        if spec.background is Background.GOE:
            h = goe_matrix(n, spec.w, rng)
        else:
            h = gue_matrix(n, spec.w, rng)
        try:
            energies = np.linalg.eigvalsh(h)
        except np.linalg.LinAlgError as exc:
            raise EigensolverError(
                f"eigendecomposition failed for a {spec.background.value} "
                f"matrix of size {n}"
            ) from exc
    return BackgroundDraw(energies=energies, mean_spacing=mean_spacing(spec))


def _unit_coupling(spec: EnsembleSpec, rng: np.random.Generator) -> np.ndarray:
    """Coupling entries at v = 1; scaling by v is exact by construction."""
    n = spec.n_levels
    kind = spec.interaction
    if spec.beta == 1:
        if kind is Interaction.GAUSSIAN:
            return rng.standard_normal(n)
        if kind is Interaction.UNIFORM:
            return math.sqrt(3) * rng.uniform(-1.0, 1.0, n)
        # Semicircle of radius 2: 2B-1 with B ~ Beta(3/2, 3/2) has
        # density proportional to sqrt(1 - x^2).
        return 2.0 * (2.0 * rng.beta(1.5, 1.5, n) - 1.0)
    phase = np.exp(2j * math.pi * rng.uniform(0.0, 1.0, n))
    if kind is Interaction.GAUSSIAN:
        radius = np.sqrt(rng.exponential(1.0, n))
        return radius * phase
    if kind is Interaction.UNIFORM:
        # Uniform on the disk of radius sqrt(2).
        radius = math.sqrt(2) * np.sqrt(rng.uniform(0.0, 1.0, n))
        return radius * phase
    # Disk density proportional to sqrt(R^2 - |z|^2) with R = sqrt(5/2):
    # the squared radius has density proportional to sqrt(R^2 - s).
    rsq = 2.5 * (1.0 - (1.0 - rng.uniform(0.0, 1.0, n)) ** (2.0 / 3.0))
    return np.sqrt(rsq) * phase


def sample_coupling(spec: EnsembleSpec, rng: np.random.Generator) -> CouplingDraw:
    """Draw one coupling vector with E|V|^2 = v^2."""
    return CouplingDraw(entries=spec.v * _unit_coupling(spec, rng))


def a_factor(interaction: Interaction, beta: int) -> float:
    """First absolute moment of the coupling law divided by v, E|V|/v.

    This is the only way the coupling law enters the regular-background
    overlap distribution.
    """
    interaction = Interaction(interaction)
    if beta not in (1, 2):
        raise InvalidSpecError("beta must be 1 or 2")
    if beta == 1:
        return {
            Interaction.GAUSSIAN: math.sqrt(2 / math.pi),
            Interaction.UNIFORM: math.sqrt(3) / 2,
            Interaction.SEMICIRCLE: 8 / (3 * math.pi),
        }[interaction]
    return {
        Interaction.GAUSSIAN: math.sqrt(math.pi) / 2,
        Interaction.UNIFORM: 2 * math.sqrt(2) / 3,
        Interaction.SEMICIRCLE: 3 * math.pi * math.sqrt(2.5) / 16,
    }[interaction]
