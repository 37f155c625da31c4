import math

import numpy as np
import pytest

from doorway_rmt import (
    Background,
    EnsembleSpec,
    Interaction,
    a_factor,
    mean_spacing,
    sample_background,
    sample_coupling,
    substream,
)
from doorway_rmt.ensembles import goe_matrix, gue_matrix
from doorway_rmt.errors import InvalidSpecError
from doorway_rmt.stats import ks_two_sample_arrays
from scipy.integrate import quad


def make_spec(background=Background.REGULAR, n=50, beta=1, kind=Interaction.GAUSSIAN,
              v=0.3, w=1.0, seed=7):
    return EnsembleSpec(background, n, w, kind, beta, v, seed)


class TestSpecValidation:
    def test_zero_levels_rejected(self):
        with pytest.raises(InvalidSpecError):
            make_spec(n=0)

    @pytest.mark.parametrize("background,beta", [(Background.GOE, 2), (Background.GUE, 1)])
    def test_chaotic_beta_pairing(self, background, beta):
        with pytest.raises(InvalidSpecError):
            make_spec(background=background, beta=beta)

    def test_regular_admits_both_betas(self):
        make_spec(beta=1)
        make_spec(beta=2)

    @pytest.mark.parametrize("kwargs", [dict(w=0.0), dict(v=-1.0), dict(beta=3), dict(seed=-1)])
    def test_bad_parameters(self, kwargs):
        with pytest.raises(InvalidSpecError):
            make_spec(**kwargs)


class TestBackground:
    def test_regular_support_bound(self):
        # N = 4: every level inside [-1, 1] since sqrt(N)/2 = 1.
        spec = make_spec(n=4)
        for i in range(200):
            draw = sample_background(spec, substream(spec.seed, i))
            assert np.all(np.abs(draw.energies) <= 1.0)
            assert np.all(np.diff(draw.energies) >= 0)
        assert draw.mean_spacing == 0.5

    def test_gue_mean_spacing(self):
        spec = make_spec(Background.GUE, n=100, beta=2)
        assert mean_spacing(spec) == pytest.approx(math.pi / 10, abs=1e-12)

    def test_goe_mean_spacing(self):
        spec = make_spec(Background.GOE, n=200, beta=1)
        assert mean_spacing(spec) == pytest.approx(math.pi / 20, abs=1e-12)

    def test_bitwise_self_adjoint(self):
        rng = substream(3, 0)
        h = goe_matrix(60, 1.3, rng)
        assert np.array_equal(h, h.T)
        g = gue_matrix(60, 1.3, rng)
        assert np.array_equal(g, g.conj().T)
        assert np.all(g.diagonal().imag == 0.0)

    def test_entry_moments(self):
        # Diagonal variance w^2; independent off-diagonal components w^2/2.
        w = 1.0
        rng = substream(11, 0)
        diag, off_goe, re_gue, im_gue = [], [], [], []
        for _ in range(120):
            h = goe_matrix(100, w, rng)
            diag.append(h.diagonal().copy())
            off_goe.append(h[np.triu_indices(100, 1)])
            g = gue_matrix(100, w, rng)
            re_gue.append(g[np.triu_indices(100, 1)].real)
            im_gue.append(g[np.triu_indices(100, 1)].imag)
        diag = np.concatenate(diag)
        assert abs(diag.var() / w**2 - 1.0) < 5 * math.sqrt(2 / len(diag))
        for arr in (off_goe, re_gue, im_gue):
            arr = np.concatenate(arr)
            assert abs(arr.var() / (w**2 / 2) - 1.0) < 5 * math.sqrt(2 / len(arr))

    @pytest.mark.parametrize("background,beta", [(Background.GOE, 1), (Background.GUE, 2)])
    def test_spectrum_sign_symmetry(self, background, beta):
        # The sign-flipped spectrum of a draw is a valid draw.
        spec = make_spec(background, n=100, beta=beta, seed=5)
        pooled = np.concatenate(
            [sample_background(spec, substream(spec.seed, i)).energies for i in range(200)]
        )
        assert ks_two_sample_arrays(pooled, -pooled) < 0.03

    def test_goe_2x2_spacing_vs_brute_force(self):
        # Nearest spacing of sampled N=2 spectra against the analytic
        # spacing of entrywise-constructed 2x2 matrices.
        spec = make_spec(Background.GOE, n=2, beta=1, seed=17)
        n_draws = 40_000
        spacings = np.empty(n_draws)
        for i in range(n_draws):
            e = sample_background(spec, substream(spec.seed, i)).energies
            spacings[i] = e[1] - e[0]
        rng = substream(99, 0)
        a = rng.standard_normal(n_draws)
        c = rng.standard_normal(n_draws)
        b = rng.standard_normal(n_draws) / math.sqrt(2)
        brute = np.sqrt((a - c) ** 2 + 4 * b**2)
        assert ks_two_sample_arrays(spacings, brute) < 0.02

    def test_reproducible_streams(self):
        spec = make_spec(Background.GUE, n=30, beta=2, seed=123)
        a = sample_background(spec, substream(spec.seed, 4)).energies
        b = sample_background(spec, substream(spec.seed, 4)).energies
        assert np.array_equal(a, b)
        c = sample_background(spec, substream(spec.seed, 4, retry=1)).energies
        assert not np.array_equal(a, c)

    @pytest.mark.parametrize("background,beta", [(Background.GOE, 1), (Background.GUE, 2)])
    def test_eigensolver_residual_contract(self, background, beta):
        # || H x - E x || <= 100 N eps ||H|| per eigenpair.
        n, w = 120, 0.8
        rng = substream(21, 0)
        h = goe_matrix(n, w, rng) if background is Background.GOE else gue_matrix(n, w, rng)
        evals, vecs = np.linalg.eigh(h)
        residual = np.linalg.norm(h @ vecs - vecs * evals, axis=0)
        bound = 100 * n * np.finfo(float).eps * np.abs(evals).max()
        assert np.all(residual <= bound)


class TestCoupling:
    def test_zero_strength(self):
        spec = make_spec(v=0.0)
        entries = sample_coupling(spec, substream(0, 0)).entries
        assert np.all(entries == 0.0)

    @pytest.mark.parametrize("kind", list(Interaction))
    @pytest.mark.parametrize("beta", [1, 2])
    def test_second_moment_calibration(self, kind, beta):
        spec = make_spec(n=1_000_000, kind=kind, beta=beta, v=0.7, seed=31)
        entries = sample_coupling(spec, substream(spec.seed, 0)).entries
        assert np.iscomplexobj(entries) == (beta == 2)
        assert abs(np.mean(np.abs(entries) ** 2) / spec.v**2 - 1.0) < 0.01

    def test_mean_abs_gaussian_real(self):
        spec = make_spec(n=1_000_000, v=0.5, seed=41)
        entries = sample_coupling(spec, substream(spec.seed, 0)).entries
        assert np.mean(np.abs(entries)) / spec.v == pytest.approx(math.sqrt(2 / math.pi), abs=0.01)

    def test_mean_abs_uniform_disk(self):
        spec = make_spec(n=1_000_000, kind=Interaction.UNIFORM, beta=2, v=0.5, seed=43)
        entries = sample_coupling(spec, substream(spec.seed, 0)).entries
        assert np.mean(np.abs(entries)) / spec.v == pytest.approx(math.sqrt(8) / 3, abs=0.01)


def _abs_moment_quadrature(kind: Interaction, beta: int) -> float:
    # Independent oracle: integrate |V| against the calibrated entry law.
    if beta == 1:
        if kind is Interaction.GAUSSIAN:
            return quad(lambda x: 2 * x * math.exp(-x * x / 2) / math.sqrt(2 * math.pi), 0, 40)[0]
        if kind is Interaction.UNIFORM:
            r = math.sqrt(3)
            return quad(lambda x: 2 * x / (2 * r), 0, r)[0]
        return quad(lambda x: 2 * x * 2 * math.sqrt(4 - x * x) / (4 * math.pi), 0, 2)[0]
    if kind is Interaction.GAUSSIAN:
        return quad(lambda r: r * 2 * r * math.exp(-r * r), 0, 40)[0]
    if kind is Interaction.UNIFORM:
        rr = math.sqrt(2)
        return quad(lambda r: r * 2 * r / rr**2, 0, rr)[0]
    rr = math.sqrt(2.5)
    return quad(lambda r: r * 3 * r * math.sqrt(rr**2 - r * r) / rr**3, 0, rr)[0]


class TestAFactor:
    REFERENCE_TABLE = {
        (Interaction.GAUSSIAN, 1): 0.80,
        (Interaction.GAUSSIAN, 2): 0.89,
        (Interaction.UNIFORM, 1): 0.87,
        (Interaction.UNIFORM, 2): 0.94,
        (Interaction.SEMICIRCLE, 1): 0.85,
        (Interaction.SEMICIRCLE, 2): 0.93,
    }

    @pytest.mark.parametrize("kind", list(Interaction))
    @pytest.mark.parametrize("beta", [1, 2])
    def test_closed_form_vs_quadrature(self, kind, beta):
        assert abs(a_factor(kind, beta) / _abs_moment_quadrature(kind, beta) - 1) < 1e-10

    @pytest.mark.parametrize("kind", list(Interaction))
    @pytest.mark.parametrize("beta", [1, 2])
    def test_two_decimal_reference_values(self, kind, beta):
        assert round(a_factor(kind, beta), 2) == self.REFERENCE_TABLE[(kind, beta)]

    def test_known_closed_forms(self):
        assert a_factor(Interaction.GAUSSIAN, 1) == pytest.approx(math.sqrt(2 / math.pi), abs=1e-15)
        assert a_factor(Interaction.GAUSSIAN, 2) == pytest.approx(math.sqrt(math.pi / 4), abs=1e-15)
        assert a_factor(Interaction.UNIFORM, 1) == pytest.approx(math.sqrt(3) / 2, abs=1e-15)
        assert a_factor(Interaction.UNIFORM, 2) == pytest.approx(math.sqrt(8) / 3, abs=1e-15)
