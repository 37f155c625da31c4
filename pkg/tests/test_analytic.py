import math

import numpy as np
import pytest
from scipy.integrate import quad

from doorway_rmt.analytic import (
    AnalyticDistribution,
    Family,
    characteristic_regular,
    chaotic_block_finite_n,
    chaotic_block_limit,
    chaotic_block_rescaled,
    fidelity_cdf_gue,
    fidelity_cdf_regular,
    fidelity_pdf_goe,
    fidelity_pdf_gue,
    fidelity_pdf_regular,
    u_pdf_goe,
    u_pdf_gue,
    u_pdf_gue_from_block,
    u_pdf_regular,
)
from doorway_rmt.ensembles import Background, EnsembleSpec, Interaction, a_factor
from doorway_rmt.errors import InvalidSpecError

A1 = a_factor(Interaction.GAUSSIAN, 1)
A2 = a_factor(Interaction.GAUSSIAN, 2)


class TestPdfValues:
    def test_regular_at_zero(self):
        # 2 a lam at c = 0.
        assert fidelity_pdf_regular(0.0, 0.1, A1) == pytest.approx(2 * A1 * 0.1, rel=1e-14)
        assert fidelity_pdf_regular(0.0, 0.1, A1) == pytest.approx(0.1596, abs=2e-4)

    def test_gue_at_zero(self):
        assert fidelity_pdf_gue(0.0, 0.5) == pytest.approx(math.sqrt(math.pi) * 0.5, rel=1e-14)
        assert fidelity_pdf_gue(0.0, 0.5) == pytest.approx(0.8862, abs=1e-4)

    def test_goe_small_c_limit(self):
        # K1(x) ~ 1/x turns the prefactor into 4 lam / sqrt(2 pi).
        for lam in (0.1, 0.7, 2.0):
            limit = 4 * lam / math.sqrt(2 * math.pi)
            assert fidelity_pdf_goe(0.0, lam) == pytest.approx(limit, rel=1e-14)
            assert fidelity_pdf_goe(1e-4, lam) == pytest.approx(limit, rel=1e-5)
        assert fidelity_pdf_goe(0.0, 1.0) == pytest.approx(1.596, abs=1e-3)

    def test_domain_errors(self):
        for fn in (lambda c: fidelity_pdf_regular(c, 0.5, A1),
                   lambda c: fidelity_pdf_gue(c, 0.5),
                   lambda c: fidelity_pdf_goe(c, 0.5)):
            with pytest.raises(ValueError):
                fn(-0.1)
            with pytest.raises(ValueError):
                fn(1.1)

    def test_boundary_policy(self):
        for fn in (lambda c: fidelity_pdf_regular(c, 0.5, A1),
                   lambda c: fidelity_pdf_gue(c, 0.5),
                   lambda c: fidelity_pdf_goe(c, 0.5)):
            assert fn(1.0) == 0.0
            assert fn(1.0 - 5e-13) == 0.0

    def test_u_domain(self):
        for fn in (lambda u: u_pdf_regular(u, 0.5, A1),
                   lambda u: u_pdf_gue(u, 0.5),
                   lambda u: u_pdf_goe(u, 0.5)):
            with pytest.raises(ValueError):
                fn(1.0)

    def test_u_pdf_matches_c_pdf(self):
        # p(c) = 2 Q(1/c^2) / c^3.
        for c in (0.3, 0.6, 0.9):
            u = 1 / c**2
            assert fidelity_pdf_gue(c, 0.5) == pytest.approx(2 * u_pdf_gue(u, 0.5) / c**3, rel=1e-12)
            assert fidelity_pdf_goe(c, 0.5) == pytest.approx(2 * u_pdf_goe(u, 0.5) / c**3, rel=1e-12)
            assert fidelity_pdf_regular(c, 0.5, A1) == pytest.approx(
                2 * u_pdf_regular(u, 0.5, A1) / c**3, rel=1e-12)


class TestCdfs:
    @pytest.mark.parametrize("lam", [0.1, 2.0])
    def test_regular_closed_form_vs_quadrature(self, lam):
        for a in (A1, A2):
            for x in (0.2, 0.5, 0.9):
                numeric = quad(lambda c: fidelity_pdf_regular(c, lam, a), 0, x, epsabs=1e-12)[0]
                assert abs(fidelity_cdf_regular(x, lam, a) - numeric) < 1e-8

    @pytest.mark.parametrize("lam", [0.1, 2.0])
    def test_gue_closed_form_vs_quadrature(self, lam):
        for x in (0.2, 0.5, 0.9):
            numeric = quad(lambda c: fidelity_pdf_gue(c, lam), 0, x, epsabs=1e-12)[0]
            assert abs(fidelity_cdf_gue(x, lam) - numeric) < 1e-8

    @pytest.mark.parametrize("lam", [0.1, 0.5, 2.0])
    def test_goe_grid_cdf_vs_quadrature(self, lam):
        dist = AnalyticDistribution(Family.GOE, lam)
        for x in (0.15, 0.5, 0.85, 0.99):
            numeric = quad(lambda c: fidelity_pdf_goe(c, lam), 0, x, epsabs=1e-12, limit=200)[0]
            assert abs(float(dist.cdf(x)) - numeric) < 1e-8

    def test_monotone_zero_to_one(self):
        grid = np.linspace(0.0, 1.0, 1001)
        for dist in (AnalyticDistribution(Family.REGULAR_BETA1, 0.5, A1),
                     AnalyticDistribution(Family.REGULAR_BETA2, 0.5, A2),
                     AnalyticDistribution(Family.GOE, 0.5),
                     AnalyticDistribution(Family.GUE, 0.5)):
            values = np.asarray(dist.cdf(grid))
            assert np.all(np.diff(values) >= -1e-12)
            assert values[0] == pytest.approx(0.0, abs=1e-12)
            assert values[-1] == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.parametrize("lam", [0.05, 0.1, 0.5, 2.0])
    def test_normalization(self, lam):
        for dist in (AnalyticDistribution(Family.REGULAR_BETA1, lam, A1),
                     AnalyticDistribution(Family.GUE, lam),
                     AnalyticDistribution(Family.GOE, lam)):
            assert abs(dist.normalization() - 1.0) < 1e-6


class TestGoeIntegralForm:
    def test_bessel_form_equals_single_integral(self):
        # The closed form against the one-dimensional integral
        # representation, substituting x = 1 - t^2 to remove the endpoint
        # singularity.
        lam = 0.5
        for du in (0.1, 1.0, 10.0):
            s = math.pi**2 * lam**2 / (2 * du)
            inner = quad(lambda t: 2 * (1 - t * t) ** -2 * math.exp(-s / (1 - t * t)),
                         0, 1, epsabs=1e-14, limit=200)[0]
            integral = math.sqrt(math.pi**3 * lam**6 / (2 * du**5)) * inner
            assert abs(u_pdf_goe(1 + du, lam) / integral - 1) < 1e-8


class TestCharacteristicFunction:
    def test_normalized_at_zero(self):
        assert characteristic_regular(0.0, 0.5, A1) == pytest.approx(1.0 + 0j, abs=1e-15)

    @pytest.mark.parametrize("k", [-20.0, -0.3, 0.3, 7.0])
    def test_modulus(self, k):
        lam = 0.3
        value = characteristic_regular(k, lam, A1)
        expected = math.exp(-2 * A1 * lam * math.sqrt(math.pi * abs(k) / 2))
        assert abs(value) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("k", [0.5, 3.0])
    def test_conjugate_symmetry(self, k):
        assert characteristic_regular(-k, 0.7, A2) == pytest.approx(
            characteristic_regular(k, 0.7, A2).conjugate(), rel=1e-14)

    def test_fourier_inversion_matches_u_density(self):
        # 1/(2 pi) int e^(ikx) R(k) dk against the closed-form u-density,
        # by oscillatory quadrature of the decaying real/imag parts.
        lam, a = 0.1, A1
        b = 2 * a * lam * math.sqrt(math.pi / 2)
        re = lambda k: math.exp(-b * math.sqrt(k)) * math.cos(b * math.sqrt(k))
        im = lambda k: -math.exp(-b * math.sqrt(k)) * math.sin(b * math.sqrt(k))
        for x in (0.05, 0.5, 5.0):
            cos_part = quad(re, 0, np.inf, weight="cos", wvar=x, limit=400)[0]
            sin_part = quad(im, 0, np.inf, weight="sin", wvar=x, limit=400)[0]
            numeric = (cos_part - sin_part) / math.pi
            assert abs(numeric / u_pdf_regular(1 + x, lam, a) - 1) < 1e-4


class TestChaoticBlock:
    def test_erfc_flat_regime(self):
        # At huge g the scaled-erfc bracket is 1 + (beta/2) sqrt(pi g / beta N)
        # up to O(sqrt(N/g)).
        g, w = 1e10, 1.0
        for beta, n in ((1, 5), (2, 5)):
            d_sq = beta * math.pi**2 * w**2 / (2 * n)
            expected = (math.sqrt(2 * math.pi * w**2 / (g * d_sq))
                        * (2 / (1 + g)) ** (beta * n / 2)
                        * (1 + (beta / 2) * math.sqrt(math.pi * g / (beta * n))))
            assert chaotic_block_finite_n(g, n, beta, w) == pytest.approx(expected, rel=1e-4)

    def test_rescaled_convergence_to_limit(self):
        # Verified finite-size errors at N = 1e4, lambda = 0.5; the x = 0.1
        # point is the slowest (left-edge corrections ~ N (lam pi)^4 / x^2).
        lam = 0.5
        bounds = {0.1: 4e-2, 1.0: 5e-4, 10.0: 1e-5}
        for x, bound in bounds.items():
            rel = abs(chaotic_block_rescaled(x, 10_000, 2, lam)
                      / chaotic_block_limit(x, 2, lam) - 1)
            assert rel < bound

    def test_rescaled_error_shrinks_with_n(self):
        lam, x = 0.5, 0.1
        err_small = abs(chaotic_block_rescaled(x, 10_000, 2, lam) / chaotic_block_limit(x, 2, lam) - 1)
        err_large = abs(chaotic_block_rescaled(x, 40_000, 2, lam) / chaotic_block_limit(x, 2, lam) - 1)
        assert err_large < err_small / 2

    def test_composition_reproduces_unitary_density(self):
        lam = 0.5
        for u in (1.3, 2.0, 4.0):
            assert abs(u_pdf_gue_from_block(u, lam) / u_pdf_gue(u, lam) - 1) < 1e-3
            assert abs(u_pdf_gue_from_block(u, lam, n=10_000) / u_pdf_gue(u, lam) - 1) < 1e-2

    def test_underflow_degrades_to_zero(self):
        # Far outside scaling, the log-space power underflows gracefully.
        assert chaotic_block_finite_n(50.0, 5000, 2, 1.0) == 0.0

    def test_domain(self):
        with pytest.raises(ValueError):
            chaotic_block_finite_n(0.5, 5, 2, 1.0)
        with pytest.raises(ValueError):
            chaotic_block_rescaled(0.0, 5, 2, 0.5)
        with pytest.raises(ValueError):
            chaotic_block_limit(-1.0, 2, 0.5)


class TestFamilyStructure:
    def test_regular_beta_enters_only_through_a(self):
        # Families with the same a are the same function of c.
        grid = np.linspace(0.0, 0.999, 200)
        d1 = AnalyticDistribution(Family.REGULAR_BETA1, 0.7, 0.85)
        d2 = AnalyticDistribution(Family.REGULAR_BETA2, 0.7, 0.85)
        assert np.array_equal(d1.pdf(grid), d2.pdf(grid))
        assert np.array_equal(d1.cdf(grid), d2.cdf(grid))

    def test_for_spec_mapping(self):
        goe = EnsembleSpec(Background.GOE, 10, 1.0, Interaction.GAUSSIAN, 1, 0.1, 0)
        assert AnalyticDistribution.for_spec(goe, 0.5).family is Family.GOE
        reg = EnsembleSpec(Background.REGULAR, 10, 1.0, Interaction.UNIFORM, 2, 0.1, 0)
        dist = AnalyticDistribution.for_spec(reg, 0.5)
        assert dist.family is Family.REGULAR_BETA2
        assert dist.a == pytest.approx(a_factor(Interaction.UNIFORM, 2), abs=1e-15)

    def test_validation(self):
        with pytest.raises(InvalidSpecError):
            AnalyticDistribution(Family.REGULAR_BETA1, 0.5)  # missing a
        with pytest.raises(InvalidSpecError):
            AnalyticDistribution(Family.GUE, -0.5)

    def test_orthogonal_unitary_gap_is_scale_invariant(self):
        # Both chaotic families are scale families in u - 1 = lambda^2 y, so
        # their mutual KS distance is the same at every coupling; the
        # verified value quantifies the "minor difference" between classes.
        grid = np.linspace(0.0, 1.0 - 1e-9, 20001)
        gaps = []
        for lam in (0.05, 0.5, 2.0):
            goe = AnalyticDistribution(Family.GOE, lam)
            gue = AnalyticDistribution(Family.GUE, lam)
            gaps.append(np.abs(np.asarray(goe.cdf(grid)) - np.asarray(gue.cdf(grid))).max())
        assert gaps == pytest.approx([0.1108] * 3, abs=2e-3)
        # Peak-normalized pointwise pdf gap at lambda = 0.05 (frozen value;
        # the gap concentrates in the narrow peak near c = 1).
        pg = fidelity_pdf_goe(grid, 0.05)
        pu = fidelity_pdf_gue(grid, 0.05)
        assert np.abs(pg - pu).max() / max(pg.max(), pu.max()) == pytest.approx(0.634, abs=0.01)
