"""Finite-size exact results and brute-force verifiers.

Everything here is for desk-scale cross-checking of the large-N closed
forms: the band-center kernel K_N(0,0), the tilted determinant average
behind the exact unitary-class u-density at finite N, that exact density
itself, and a determinant-ratio identity relating size-N and size-(N+1)
Gaussian ensemble averages, verified by low-dimensional quadrature.

The tilted average is

    F_N(g') = < det H^2 * exp(-(g'-1) (H^2)_11 / 2w^2) >_N

over the unitary Gaussian ensemble with weight exp(-tr H^2/2w^2), where
g' = 1 + 2(u-1) w^2/v^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.integrate import nquad, quad
from scipy.special import gamma

from .ensembles import gue_matrix, substream
from .errors import InvalidSpecError, QuadratureError


@dataclass(frozen=True)
class FiniteNContext:
    """Finite-size evaluation context; g' = 1 + 2(u-1) w^2/v^2."""

    n: int
    w: float
    v: float
    beta: int = 2

    def __post_init__(self):
        if self.n < 1 or self.w <= 0 or self.v <= 0 or self.beta not in (1, 2):
            raise InvalidSpecError("need n >= 1, w > 0, v > 0, beta in {1, 2}")

    def g_prime(self, u: float) -> float:
        if u <= 1.0:
            raise ValueError("u must exceed 1")
        return 1.0 + 2.0 * (u - 1.0) * self.w**2 / self.v**2

    def u_from_g(self, g_prime: float) -> float:
        if g_prime <= 1.0:
            raise ValueError("g_prime must exceed 1")
        return 1.0 + (g_prime - 1.0) * self.v**2 / (2.0 * self.w**2)


@lru_cache(maxsize=None)
def kernel_at_zero(n: int) -> float:
    """Band-center kernel K_N(0,0), the inverse local spacing scale.

    Closed form (1/sqrt(pi)) (2M+1) C(2M, M) / 4^M with M = floor((N-1)/2),
    evaluated in exact integer arithmetic; K_N(0,0)/sqrt(2N) -> 1/pi.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    m = (n - 1) // 2
    return float(Fraction((2 * m + 1) * math.comb(2 * m, m), 4**m)) / math.sqrt(math.pi)


def kernel_at_zero_series(n: int) -> float:
    """K_N(0,0) summed term by term over oscillator wave functions.

    Adds phi_k(0)^2 = (2m)! / (4^m (m!)^2 sqrt(pi)) for even k = 2m (odd
    oscillator functions vanish at the origin); the independent check for
    the closed form above.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    total = 0.0
    term = 1.0 / math.sqrt(math.pi)
    for m in range((n + 1) // 2):
        if m > 0:
            term *= (2 * m - 1) / (2 * m)
        total += term
    return total


def f_n_closed_form(g_prime: float, ctx: FiniteNContext, c_n_mode: str = "even_odd") -> float:
    """Published-convention closed form of the tilted average F_N(g').

    (2 w^2)^N N! K_{N+1}(0,0) sqrt(pi/g') (2/(g'+1))^(N+1)
        ((g'-1)^2/(4 g' N) + c_N),
    with c_N = 1 for odd N and 1 + 1/N for even N in ``even_odd`` mode, or
    c_N = 1 in ``large_n`` mode.  This convention overshoots the defining
    average by a measured constant (see ``det_sq_tilted_average`` for the
    calibrated form); it is kept verbatim so the offset stays observable.
    """
    if ctx.beta != 2:
        raise InvalidSpecError("the closed form exists only for beta = 2")
    if g_prime < 1.0:
        raise ValueError("g_prime must be >= 1")
    n = ctx.n
    if c_n_mode == "even_odd":
        c_n = 1.0 if n % 2 else 1.0 + 1.0 / n
    elif c_n_mode == "large_n":
        c_n = 1.0
    else:
        raise ValueError("c_n_mode must be 'even_odd' or 'large_n'")
    xi = (g_prime - 1.0) ** 2 / (4.0 * g_prime)
    return (
        (2.0 * ctx.w**2) ** n
        * math.factorial(n)
        * kernel_at_zero(n + 1)
        * math.sqrt(math.pi / g_prime)
        * (2.0 / (g_prime + 1.0)) ** (n + 1)
        * (xi / n + c_n)
    )


def det_sq_tilted_average(g_prime: float, n: int, w: float) -> float:
    """Exact tilted average <det H^2 exp(-(g'-1)(H^2)_11/2w^2)> for beta = 2.

    w^(2N) (N-1)! sqrt(pi/g') (2/(g'+1))^(N+1)
        [N K_{N+1}(0,0) + ((g'-1)^2/4g') K_N(0,0)];
    matches the defining average with no calibration constant (verified by
    quadrature at N=1 and reweighted Monte Carlo at N=2).
    """
    if g_prime < 1.0 or n < 1:
        raise ValueError("requires g_prime >= 1 and n >= 1")
    xi = (g_prime - 1.0) ** 2 / (4.0 * g_prime)
    bracket = n * kernel_at_zero(n + 1) + xi * kernel_at_zero(n)
    return (
        w ** (2 * n)
        * math.factorial(n - 1)
        * math.sqrt(math.pi / g_prime)
        * (2.0 / (g_prime + 1.0)) ** (n + 1)
        * bracket
    )


def det_sq_tilted_quadrature(g_prime: float, w: float) -> float:
    """Defining tilted average at N = 1 by direct quadrature.

    A size-1 unitary-class matrix is a real Gaussian of variance w^2, so
    the average is int h^2 e^(-g' h^2/2w^2) dh / sqrt(2 pi w^2).
    """
    if g_prime < 1.0:
        raise ValueError("g_prime must be >= 1")
    value, err = quad(
        lambda h: h * h * math.exp(-g_prime * h * h / (2.0 * w**2)),
        -40.0 * w,
        40.0 * w,
        epsabs=1e-14,
        epsrel=1e-13,
        limit=200,
    )
    if err > 1e-10 * max(abs(value), 1.0):
        raise QuadratureError(f"tilted-average quadrature error {err:.2e}")
    return value / math.sqrt(2.0 * math.pi * w**2)


def det_sq_tilted_mc(
    g_prime: float, n: int, w: float, n_draws: int, seed: int
) -> tuple[float, float]:
    """Reweighted Monte Carlo estimate of the tilted average, with its standard error."""
    if g_prime < 1.0 or n < 1 or n_draws < 2:
        raise ValueError("requires g_prime >= 1, n >= 1, n_draws >= 2")
    rng = substream(seed, 0)
    vals = np.empty(n_draws)
    a = (g_prime - 1.0) / (2.0 * w**2)
    for i in range(n_draws):
        h = gue_matrix(n, w, rng)
        hsq_11 = float(np.real(h[0, :] @ h[:, 0]))
        vals[i] = abs(np.linalg.det(h)) ** 2 * math.exp(-a * hsq_11)
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(n_draws))


def u_pdf_gue_finite(u, ctx: FiniteNContext):
    """Exact finite-size density of u = 1/c^2 for a unitary-class background.

    (w^2/v^2)^N (u-1)^(N-1) sqrt(pi/g') (2/(g'+1))^(N+1)
        [N K_{N+1}(0,0) + ((g'-1)^2/4g') K_N(0,0)];
    evaluated in log space.  Integrates to 1 for every N and converges to
    u_pdf_gue as N grows with lam = v/D fixed.
    """
    if ctx.beta != 2:
        raise InvalidSpecError("the exact finite-size density exists only for beta = 2")
    u = np.asarray(u, dtype=float)
    if np.any(u <= 1.0):
        raise ValueError("u must exceed 1")
    n, w, v = ctx.n, ctx.w, ctx.v
    x = u - 1.0
    gp = 1.0 + 2.0 * x * w**2 / v**2
    xi = (gp - 1.0) ** 2 / (4.0 * gp)
    log_value = (
        n * math.log(w**2 / v**2)
        + (n - 1) * np.log(x)
        + 0.5 * (math.log(math.pi) - np.log(gp))
        + (n + 1) * (math.log(2.0) - np.log1p(gp))
    )
    bracket = n * kernel_at_zero(n + 1) + xi * kernel_at_zero(n)
    out = np.exp(log_value) * bracket
    return out if out.ndim else float(out)


def c_pdf_gue_finite(c, ctx: FiniteNContext):
    """The finite-size u-density mapped to the overlap c = 1/sqrt(u)."""
    c = np.asarray(c, dtype=float)
    if np.any(c <= 0.0) or np.any(c >= 1.0):
        raise ValueError("c must lie strictly inside (0, 1)")
    out = 2.0 * u_pdf_gue_finite(1.0 / c**2, ctx) / c**3
    return out if out.ndim else float(out)


def f_tilde_exact_gue(g_prime: float, n: int, w: float) -> float:
    """Exact finite-size block F~_{N+1}(g') for the unitary class.

    sqrt(pi/g') (2/(g'+1))^N K_{N+1}(0,0)
        [1 + sqrt(g') ((g'+1)/(g'-1))^N
             int_1^g' x^(-1/2) (x-1)^N (x+1)^(-(N+1)) dx];
    the closed solution of the first-order relation tying the block to the
    exact finite-size u-density.
    """
    if g_prime <= 1.0 or n < 1:
        raise ValueError("requires g_prime > 1 and n >= 1")
    # Ratio form: (x-1)^n (x+1)^-(n+1) written so no factor overflows.
    integrand = lambda x: ((x - 1.0) / (x + 1.0)) ** n / (math.sqrt(x) * (x + 1.0))
    integral, err = quad(integrand, 1.0, g_prime, epsabs=1e-14, epsrel=1e-12, limit=400)
    if err > max(1e-8 * abs(integral), 1e-15):
        raise QuadratureError(f"block quadrature error {err:.2e}")
    bracket = 1.0 + math.sqrt(g_prime) * ((g_prime + 1.0) / (g_prime - 1.0)) ** n * integral
    return (
        math.sqrt(math.pi / g_prime)
        * (2.0 / (g_prime + 1.0)) ** n
        * kernel_at_zero(n + 1)
        * bracket
    )


def block_consistency_residual(
    n: int, g_prime: float, step: float = 5e-4
) -> tuple[float, float, float]:
    """Check (N + (g'-1) d/dg') F~ against the exact-density source term.

    Left side by central differencing of ``f_tilde_exact_gue``; right side
    sqrt(pi/g') (2/(g'+1))^(N+1) [N K_{N+1}(0,0) + ((g'-1)^2/4g') K_N(0,0)].
    Returns (lhs, rhs, relative error).
    """
    deriv = (
        f_tilde_exact_gue(g_prime + step, n, 1.0)
        - f_tilde_exact_gue(g_prime - step, n, 1.0)
    ) / (2.0 * step)
    lhs = n * f_tilde_exact_gue(g_prime, n, 1.0) + (g_prime - 1.0) * deriv
    xi = (g_prime - 1.0) ** 2 / (4.0 * g_prime)
    rhs = (
        math.sqrt(math.pi / g_prime)
        * (2.0 / (g_prime + 1.0)) ** (n + 1)
        * (n * kernel_at_zero(n + 1) + xi * kernel_at_zero(n))
    )
    return lhs, rhs, abs(lhs - rhs) / abs(rhs)


def l_constant(n: int, beta: int) -> float:
    """Combinatorial constant of the size-lifting determinant identity.

    2 Gamma(1 + (N+1)/2) / (sqrt(pi) (N+1)) for beta = 1, N! for beta = 2.
    """
    if n < 1 or beta not in (1, 2):
        raise InvalidSpecError("need n >= 1 and beta in {1, 2}")
    if beta == 1:
        return 2.0 * gamma(1.0 + (n + 1) / 2.0) / (math.sqrt(math.pi) * (n + 1))
    return float(math.factorial(n))


@dataclass(frozen=True)
class IdentityCheck:
    lhs: complex
    rhs: complex
    rel_err: float


def _abs_vandermonde(lams, beta: int) -> float:
    out = 1.0
    for i in range(len(lams)):
        for j in range(i + 1, len(lams)):
            out *= abs(lams[j] - lams[i]) ** beta
    return out


def _gaussian_weight(lams, w: float) -> float:
    return math.exp(-sum(x * x for x in lams) / (2.0 * w * w))


def _ordered_ranges(n: int, cutoff: float):
    """Integration ranges for one ordered sector of n eigenvalues.

    Variable i runs over (x_{i+1}, cutoff), so the sector is
    x_{n-1} < ... < x_1 < x_0; the sector count n! multiplies the result.
    """
    ranges = [lambda *outer: (outer[0], cutoff) for _ in range(n - 1)]
    ranges.append((-cutoff, cutoff))
    return ranges


def _eigen_integral(f, n: int, beta: int, w: float, cutoff: float = 12.0) -> float:
    """Integrate f(lams) against |Vandermonde|^beta e^(-sum/2w^2) over R^n.

    Restricting to the ordered sector keeps the beta = 1 integrand smooth
    (no absolute-value kinks); the n! accounts for the sector count.
    """
    scale = cutoff * w

    def integrand(*lams):
        return f(lams) * _abs_vandermonde(lams, beta) * _gaussian_weight(lams, w)

    if n == 1:
        value, err = quad(lambda x: integrand(x), -scale, scale, epsabs=1e-12)
    else:
        value, err = nquad(
            integrand,
            _ordered_ranges(n, scale),
            opts={"epsabs": 1e-11, "epsrel": 1e-10},
        )
        value *= math.factorial(n)
        err *= math.factorial(n)
    if err > 1e-6 * max(abs(value), 1e-12):
        raise QuadratureError(f"eigenvalue quadrature error {err:.2e}")
    return value


def _complex_eigen_integral(f, n: int, beta: int, w: float, real_only: bool) -> complex:
    re = _eigen_integral(lambda lams: f(lams).real, n, beta, w)
    if real_only:
        return complex(re, 0.0)
    im = _eigen_integral(lambda lams: f(lams).imag, n, beta, w)
    return complex(re, im)


def appendix_identity_check(
    n: int, beta: int, z: complex, w: float = 1.0
) -> IdentityCheck:
    """Verify the size-lifting determinant identity by quadrature.

    Left side: <det(H^2 + z)^(-beta/2) |det H|^beta> over the size-N
    Gaussian ensemble, in eigenvalue coordinates with the |Vandermonde|^beta
    weight and a numerically fixed normalization.

    Right side: L_{N,beta} w^(beta N) sqrt(2 pi w^2) z^(beta/2)
    <tr delta(H) det(H^2 + z)^(-beta/2)> over the size-(N+1) ensemble, with
    one eigenvalue pinned at 0 analytically; its normalization is an
    independent (N+1)-dimensional quadrature.

    Feasible for n <= 3; the spectral-average content is checked per z.
    """
    if n > 3:
        raise InvalidSpecError("eigenvalue quadrature is guarded to n <= 3")
    z = complex(z)
    if z.real <= 0.0:
        raise InvalidSpecError("z must have positive real part")

    def lhs_f(lams):
        out = 1.0 + 0.0j
        for x in lams:
            out *= (x * x + z) ** (-beta / 2.0) * abs(x) ** beta
        return out

    def rhs_pinned_f(lams):
        # One eigenvalue of the size-(N+1) matrix pinned at 0: the pinned
        # level contributes z^(-beta/2), and |x_j - 0|^beta from the
        # Vandermonde attaches |x_j|^beta to each remaining level.
        out = z ** (-beta / 2.0)
        for x in lams:
            out *= (x * x + z) ** (-beta / 2.0) * abs(x) ** beta
        return out

    real_only = z.imag == 0.0
    z_n = _eigen_integral(lambda lams: 1.0, n, beta, w)
    z_np1 = _eigen_integral(lambda lams: 1.0, n + 1, beta, w)
    lhs = _complex_eigen_integral(lhs_f, n, beta, w, real_only) / z_n
    pinned = _complex_eigen_integral(rhs_pinned_f, n, beta, w, real_only)
    prefactor = l_constant(n, beta) * w ** (beta * n) * math.sqrt(2.0 * math.pi * w**2)
    rhs = prefactor * z ** (beta / 2.0) * (n + 1) * pinned / z_np1
    rel = abs(lhs - rhs) / abs(lhs)
    return IdentityCheck(lhs=lhs, rhs=rhs, rel_err=rel)
