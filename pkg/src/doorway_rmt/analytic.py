"""Closed-form overlap distributions for regular and chaotic backgrounds.

All densities are for the fidelity overlap c in [0, 1) at dimensionless
coupling lam = v/D; the companion u-densities describe u = 1/c^2 on
(1, inf).  The regular-background family depends on the coupling law only
through a = E|V|/v; the chaotic families (orthogonal and unitary class)
are parameterized by lam alone.

Boundary policy: densities return 0 for c > 1 - 1e-12; the orthogonal
class returns its finite analytic limit 4*lam/sqrt(2 pi) below c = 1e-12,
where the Bessel evaluation degenerates to 0 * inf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator
from scipy.special import erf, erfc, erfcx, k0e, k1e

from .ensembles import EnsembleSpec, Background, a_factor
from .errors import InvalidSpecError

C_UPPER = 1.0 - 1e-12
C_LOWER = 1e-12


def _check_domain(c: np.ndarray):
    if np.any(c < 0.0) or np.any(c > 1.0):
        raise ValueError("overlap values must lie in [0, 1]")


def fidelity_pdf_regular(c, lam: float, a: float):
    """Density 2 a lam (1-c^2)^(-3/2) exp(-pi (a lam)^2 c^2/(1-c^2))."""
    c = np.asarray(c, dtype=float)
    _check_domain(c)
    inside = c <= C_UPPER
    cc = np.where(inside, c, 0.5)
    t = cc * cc / (1.0 - cc * cc)
    out = 2.0 * a * lam * (1.0 - cc * cc) ** -1.5 * np.exp(-math.pi * (a * lam) ** 2 * t)
    out = np.where(inside, out, 0.0)
    return out if out.ndim else float(out)


def fidelity_cdf_regular(c, lam: float, a: float):
    """Closed-form CDF erf(sqrt(pi) a lam s) with s = c/sqrt(1-c^2)."""
    c = np.asarray(c, dtype=float)
    _check_domain(c)
    inside = c <= C_UPPER
    cc = np.where(inside, c, 0.5)
    s = cc / np.sqrt(1.0 - cc * cc)
    out = np.where(inside, erf(math.sqrt(math.pi) * a * lam * s), 1.0)
    return out if out.ndim else float(out)


def fidelity_pdf_gue(c, lam: float):
    """Unitary-class density sqrt(pi lam^2/(1-c^2)^3) e^-t (1 + 2t), t = pi^2 lam^2 c^2/(1-c^2)."""
    c = np.asarray(c, dtype=float)
    _check_domain(c)
    inside = c <= C_UPPER
    cc = np.where(inside, c, 0.5)
    t = math.pi**2 * lam**2 * cc * cc / (1.0 - cc * cc)
    out = np.sqrt(math.pi * lam**2 / (1.0 - cc * cc) ** 3) * np.exp(-t) * (1.0 + 2.0 * t)
    out = np.where(inside, out, 0.0)
    return out if out.ndim else float(out)


def fidelity_cdf_gue(c, lam: float):
    """Closed-form CDF erf(pi lam s) - sqrt(pi) lam s exp(-(pi lam s)^2)."""
    c = np.asarray(c, dtype=float)
    _check_domain(c)
    inside = c <= C_UPPER
    cc = np.where(inside, c, 0.5)
    s = cc / np.sqrt(1.0 - cc * cc)
    z = math.pi * lam * s
    out = np.where(inside, erf(z) - math.sqrt(math.pi) * lam * s * np.exp(-z * z), 1.0)
    return out if out.ndim else float(out)


def fidelity_pdf_goe(c, lam: float):
    """Orthogonal-class density with modified Bessel functions K0, K1.

    sqrt(pi^3 lam^6 c^4 / 2(1-c^2)^5) e^-xi [K0(xi) + K1(xi)],
    xi = pi^2 lam^2 c^2 / 4(1-c^2); evaluated with exponentially scaled
    Bessel functions so large xi cannot overflow.
    """
    c = np.asarray(c, dtype=float)
    _check_domain(c)
    tiny = c < C_LOWER
    inside = (c <= C_UPPER) & ~tiny
    cc = np.where(inside, c, 0.5)
    omc = 1.0 - cc * cc
    xi = math.pi**2 * lam**2 * cc * cc / (4.0 * omc)
    pref = np.sqrt(math.pi**3 * lam**6 * cc**4 / (2.0 * omc**5))
    out = pref * np.exp(-2.0 * xi) * (k0e(xi) + k1e(xi))
    out = np.where(inside, out, 0.0)
    out = np.where(tiny, 4.0 * lam / math.sqrt(2.0 * math.pi), out)
    return out if out.ndim else float(out)


def u_pdf_regular(u, lam: float, a: float):
    """Density of u = 1/c^2: a lam (u-1)^(-3/2) exp(-pi (a lam)^2/(u-1))."""
    u = np.asarray(u, dtype=float)
    if np.any(u <= 1.0):
        raise ValueError("u must exceed 1")
    x = u - 1.0
    out = a * lam * x**-1.5 * np.exp(-math.pi * (a * lam) ** 2 / x)
    return out if out.ndim else float(out)


def u_pdf_gue(u, lam: float):
    """Unitary-class u-density sqrt(pi lam^2/4x^3) e^(-pi^2 lam^2/x) (1 + 2 pi^2 lam^2/x)."""
    u = np.asarray(u, dtype=float)
    if np.any(u <= 1.0):
        raise ValueError("u must exceed 1")
    x = u - 1.0
    t = math.pi**2 * lam**2 / x
    out = np.sqrt(math.pi * lam**2 / (4.0 * x**3)) * np.exp(-t) * (1.0 + 2.0 * t)
    return out if out.ndim else float(out)


def u_pdf_goe(u, lam: float):
    """Orthogonal-class u-density sqrt(pi^3 lam^6/8x^5) e^-xi [K0(xi) + K1(xi)], xi = pi^2 lam^2/4x."""
    u = np.asarray(u, dtype=float)
    if np.any(u <= 1.0):
        raise ValueError("u must exceed 1")
    x = u - 1.0
    xi = math.pi**2 * lam**2 / (4.0 * x)
    out = np.sqrt(math.pi**3 * lam**6 / (8.0 * x**5)) * np.exp(-2.0 * xi) * (k0e(xi) + k1e(xi))
    return out if out.ndim else float(out)


def characteristic_regular(k, lam: float, a: float):
    """Characteristic function exp(-2 a lam sqrt(i pi k)), principal branch."""
    k = np.asarray(k, dtype=float)
    out = np.exp(-2.0 * a * lam * np.sqrt(1j * math.pi * k))
    return out if out.ndim else complex(out)


def chaotic_block_finite_n(g: float, n: int, beta: int, w: float) -> float:
    """Large-N building block of the chaotic u-densities at finite N.

    sqrt(2 pi w^2/(g D^2)) (2/(1+g))^(beta N/2)
        [1 + (beta/2) sqrt(pi g/(beta N)) e^(beta N/g) erfc(sqrt(beta N/g))],
    with D the band-center spacing.  The power is evaluated in log space;
    a result below the double-precision floor degrades to 0.
    """
    if g < 1.0 or n < 1:
        raise ValueError("requires g >= 1 and n >= 1")
    d_sq = beta * math.pi**2 * w**2 / (2 * n)
    ratio = beta * n / g
    bracket = 1.0 + (beta / 2.0) * math.sqrt(math.pi * g / (beta * n)) * erfcx(
        math.sqrt(ratio)
    )
    log_value = (
        0.5 * math.log(2.0 * math.pi * w**2 / (g * d_sq))
        + (beta * n / 2.0) * (math.log(2.0) - math.log1p(g))
        + math.log(bracket)
    )
    return math.exp(log_value) if log_value > -745.0 else 0.0


def chaotic_block_rescaled(x: float, n: int, beta: int, lam: float) -> float:
    """Finite-N value of (beta x w^2/2v^2)^(beta N/2) times the block at g = 1 + beta x w^2/v^2.

    With v = lam D the matrix scale w cancels; evaluated jointly in log
    space since the two factors overflow and underflow separately.
    """
    if x <= 0.0 or n < 1:
        raise ValueError("requires x > 0 and n >= 1")
    g = 1.0 + 2.0 * n * x / (math.pi**2 * lam**2)
    ratio = beta * n / g
    bracket = 1.0 + (beta / 2.0) * math.sqrt(math.pi * g / (beta * n)) * erfcx(
        math.sqrt(ratio)
    )
    log_value = (
        (beta * n / 2.0) * (math.log(g - 1.0) - math.log1p(g))
        + 0.5 * (math.log(4.0 * n) - math.log(beta * math.pi * g))
        + math.log(bracket)
    )
    return math.exp(log_value)


def chaotic_block_limit(x: float, beta: int, lam: float) -> float:
    """N -> infinity limit of the rescaled block.

    sqrt(2 pi lam^2/(beta x)) exp(-mu) + erfc(sqrt(mu)),
    mu = beta (pi lam)^2 / (2x).
    """
    if x <= 0.0:
        raise ValueError("requires x > 0")
    mu = beta * (math.pi * lam) ** 2 / (2.0 * x)
    return math.sqrt(2.0 * math.pi * lam**2 / (beta * x)) * math.exp(-mu) + erfc(
        math.sqrt(mu)
    )


def u_pdf_gue_from_block(u: float, lam: float, n: int | None = None, step: float = 1e-6) -> float:
    """Unitary-class u-density as the u-derivative of the building block.

    Differentiates the scaling-limit block (or the finite-N rescaled block
    when n is given) by central difference; agrees with u_pdf_gue in the
    large-N limit.
    """
    x = u - 1.0
    if x <= step:
        raise ValueError("u - 1 must exceed the differentiation step")
    if n is None:
        f = lambda t: chaotic_block_limit(t, 2, lam)
    else:
        f = lambda t: chaotic_block_rescaled(t, n, 2, lam)
    return (f(x + step) - f(x - step)) / (2.0 * step)


def grid_cdf(pdf, lo: float = 0.0, hi: float = C_UPPER, n_panels: int = 4096):
    """Monotone interpolated CDF of a density via composite Gauss-Legendre.

    The pdf callable must accept numpy arrays.  Returns a PCHIP
    interpolant of the cumulative integral on [lo, hi]; the panel rule is
    8-point Gauss-Legendre, ample for the smooth densities used here.
    """
    nodes, weights = np.polynomial.legendre.leggauss(8)
    edges = np.linspace(lo, hi, n_panels + 1)
    half = np.diff(edges) / 2.0
    mid = (edges[:-1] + edges[1:]) / 2.0
    points = mid[:, None] + half[:, None] * nodes[None, :]
    values = pdf(points.ravel()).reshape(points.shape)
    panel = (values * weights[None, :]).sum(axis=1) * half
    cumulative = np.concatenate([[0.0], np.cumsum(panel)])
    return PchipInterpolator(edges, cumulative, extrapolate=False)


class Family(str, Enum):
    REGULAR_BETA1 = "regular_beta1"
    REGULAR_BETA2 = "regular_beta2"
    GOE = "goe"
    GUE = "gue"


@dataclass(frozen=True)
class AnalyticDistribution:
    """One closed-form overlap distribution: family, coupling, a-factor.

    The regular families require the coupling-law factor a = E|V|/v; the
    chaotic families ignore it.  ``cdf`` is closed-form for the regular
    and unitary families and a cached quadrature grid for the orthogonal
    family.
    """

    family: Family
    lam: float
    a: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if not self.lam > 0:
            raise InvalidSpecError("lam must be positive")
        if self.family in (Family.REGULAR_BETA1, Family.REGULAR_BETA2):
            if self.a is None or not 0.0 < self.a <= 1.0:
                raise InvalidSpecError("regular families need a in (0, 1]")

    @classmethod
    def for_spec(cls, spec: EnsembleSpec, lam: float) -> "AnalyticDistribution":
        """The family matching an ensemble specification."""
        if spec.background is Background.GOE:
            return cls(Family.GOE, lam)
        if spec.background is Background.GUE:
            return cls(Family.GUE, lam)
        family = Family.REGULAR_BETA1 if spec.beta == 1 else Family.REGULAR_BETA2
        return cls(family, lam, a_factor(spec.interaction, spec.beta))

    def pdf(self, c):
        if self.family is Family.GOE:
            return fidelity_pdf_goe(c, self.lam)
        if self.family is Family.GUE:
            return fidelity_pdf_gue(c, self.lam)
        return fidelity_pdf_regular(c, self.lam, self.a)

    def u_pdf(self, u):
        if self.family is Family.GOE:
            return u_pdf_goe(u, self.lam)
        if self.family is Family.GUE:
            return u_pdf_gue(u, self.lam)
        return u_pdf_regular(u, self.lam, self.a)

    @cached_property
    def _goe_cdf_grid(self):
        # Integrate in phi = atanh(c): the near-1 peak becomes an O(1)
        # feature at every coupling, so the interpolant holds ~1e-9.
        phi_max = math.atanh(C_UPPER)
        pdf = lambda phi: fidelity_pdf_goe(np.tanh(phi), self.lam) / np.cosh(phi) ** 2
        return grid_cdf(pdf, 0.0, phi_max, n_panels=8192)

    def cdf(self, c):
        if self.family is not Family.GOE:
            if self.family is Family.GUE:
                return fidelity_cdf_gue(c, self.lam)
            return fidelity_cdf_regular(c, self.lam, self.a)
        c = np.asarray(c, dtype=float)
        _check_domain(c)
        phi = np.arctanh(np.clip(c, 0.0, C_UPPER))
        out = np.where(c >= C_UPPER, 1.0, self._goe_cdf_grid(phi))
        return out if out.ndim else float(out)

    def normalization(self, tol: float = 1e-10) -> float:
        """Integral of the pdf over [0, 1] by adaptive quadrature."""
        value, _ = quad(lambda c: float(self.pdf(c)), 0.0, 1.0, epsabs=tol, limit=200)
        return value
