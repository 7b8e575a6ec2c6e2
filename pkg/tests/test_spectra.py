"""Spectra: energies, eigenfunctions, sgn matrix elements vs oracles."""

import json
from fractions import Fraction
from math import pi, sqrt

import mpmath
import numpy as np
import pytest
import scipy.integrate as spi
import scipy.special as sps

from dyncert import models, spectra
from dyncert.classical import EnergyWindow, energy_window
from dyncert.errors import DomainError, EmptySliceError
from conftest import sgn_overlap_oracle


class TestEnergies:
    def test_harmonic(self):
        assert spectra.kerr_energy(0.0, 3) == 3.5

    def test_kerr_window_example(self):
        # tau = 1, alpha = 0.02: seven levels retained
        w = energy_window(models.kerr(0.02), 1.0)
        ns, es = spectra.levels(models.kerr(0.02), w)
        assert list(ns)[0] == 0
        assert all(w.e_min - 1e-12 <= e <= w.e_max + 1e-12 for e in es)

    def test_morse_levels(self):
        lam = 10.0
        assert spectra.morse_level_count(lam) == 10
        es = spectra.morse_energy(lam, np.arange(10))
        assert np.all(np.diff(es) > 0)
        assert es[-1] <= lam / 2.0  # all below dissociation

    def test_pendulum_energy_vs_scipy(self):
        mdl = models.pendulum(-0.05)
        q = -1.0 / (4.0 * mdl.alpha) ** 2
        for n, (kind, order) in enumerate([("a", 0), ("b", 2), ("a", 2),
                                           ("b", 4)]):
            ref = (sps.mathieu_a(order, q) if kind == "a"
                   else sps.mathieu_b(order, q)) * abs(mdl.alpha)
            assert abs(spectra.pendulum_energy(mdl, n) - ref) < 1e-10

    def test_well_truncation_strict(self):
        w = energy_window(models.infinite_well(), 1.0)
        ns, _ = spectra.levels(models.infinite_well(), w)
        assert list(ns) == [2]

    def test_empty_slice(self):
        with pytest.raises(EmptySliceError):
            spectra.levels(models.infinite_well(), EnergyWindow(0.26, 0.27))


class TestEigenfunctions:
    @pytest.mark.parametrize("mdl,domain", [
        (models.harmonic(), (-12.0, 12.0)),
        (models.kerr(0.05), (-12.0, 12.0)),
        (models.pendulum(-0.05), (-np.pi, np.pi)),
        (models.morse(8.0), (-10.0, 4.0)),
        (models.infinite_well(), (-0.5, 0.5)),
    ])
    def test_normalization(self, mdl, domain):
        qs = np.linspace(domain[0], domain[1], 40001)
        n0 = 1 if mdl.kind == models.WELL else 0
        for n in range(n0, n0 + 5):
            v = spectra.eigenfunction_grid(mdl, n, qs)
            assert abs(np.trapezoid(v * v, qs) - 1.0) < 1e-7

    def test_harmonic_values_vs_scipy(self):
        xs = np.linspace(-4, 4, 9)
        for n in (0, 3, 6):
            ref = (sps.eval_hermite(n, xs) * np.exp(-xs * xs / 2)
                   / sqrt(2.0 ** n * sps.factorial(n) * sqrt(pi)))
            got = spectra.eigenfunction_grid(models.harmonic(), n, xs)
            assert np.max(np.abs(got - ref)) < 1e-12

    def test_morse_values_vs_mpmath(self):
        lam, n = 8.0, 3
        a = 2 * lam - 2 * n - 1
        norm = mpmath.sqrt(mpmath.factorial(n) * a / mpmath.gamma(2 * lam - n))
        for x in (-2.0, -0.5, 0.0, 1.0):
            z = 2 * lam * mpmath.e ** x
            ref = float(norm * z ** (lam - n - 0.5) * mpmath.e ** (-z / 2)
                        * mpmath.laguerre(n, a, z))
            got, _ = spectra.eigenfunction(models.morse(lam), n, x)
            assert abs(got - abs(ref) * np.sign(ref)) < 1e-10 * max(1, abs(ref))

    @pytest.mark.parametrize("mdl,n,x", [
        (models.pendulum(-0.05), 2, 0.7),
        (models.morse(8.0), 2, -0.4),
        (models.harmonic(), 4, 0.9),
        (models.infinite_well(), 3, 0.2),
    ])
    def test_derivative_finite_difference(self, mdl, n, x):
        h = 1e-5
        _, d = spectra.eigenfunction(mdl, n, x)
        vp, _ = spectra.eigenfunction(mdl, n, x + h)
        vm, _ = spectra.eigenfunction(mdl, n, x - h)
        assert abs(d - (vp - vm) / (2 * h)) < 1e-7 * max(1.0, abs(d))


class TestMorsePolynomials:
    @pytest.mark.parametrize("lam", [5.0, 10.0, 20.0])
    def test_diag_closed_form_vs_mpmath(self, lam):
        # Pr[x > 0] = N^2 int_{2 lam}^inf z^(a-1) e^-z L_n^(a)(z)^2 dz with
        # z = 2 lam e^x; evaluated in high precision, this pins the
        # polynomial-path diagonal to ~1e-12.
        mdl = models.morse(lam)
        count = spectra.morse_level_count(lam)
        idx = np.arange(min(8, count))
        s = spectra.sgn_matrix(mdl, idx, check=False)
        with mpmath.workdps(40):
            for n in idx:
                n = int(n)
                a = 2 * lam - 2 * n - 1
                norm2 = (mpmath.factorial(n) * a
                         / mpmath.gamma(2 * lam - n))
                tail = mpmath.quad(
                    lambda z: z ** (a - 1) * mpmath.e ** (-z)
                    * mpmath.laguerre(n, a, z) ** 2,
                    [2 * lam, mpmath.inf])
                ref = float(2 * norm2 * tail - 1)
                assert abs(s[n, n] - ref) < 1e-11

    def test_domain(self):
        with pytest.raises(DomainError):
            spectra.morse_diag_polynomial(8, 10.0)


class TestSgn:
    def test_harmonic_vs_mpmath_quadrature(self):
        s = spectra.sgn_matrix(models.harmonic(), np.arange(8), check=False)

        def psi(n, x):
            norm = mpmath.sqrt(2 ** n * mpmath.factorial(n)
                               * mpmath.sqrt(mpmath.pi))
            return mpmath.hermite(n, x) * mpmath.e ** (-x * x / 2) / norm

        for n, m in [(0, 1), (0, 3), (2, 5), (3, 6), (1, 6)]:
            ref = float(2 * mpmath.quad(lambda x: psi(n, x) * psi(m, x),
                                        [0, mpmath.inf]))
            assert abs(s[n, m] - ref) < 1e-12

    def test_even_models_zero_diagonal(self):
        for mdl in (models.harmonic(), models.pendulum(-0.05),
                    models.infinite_well()):
            idx = (np.arange(1, 6) if mdl.kind == models.WELL
                   else np.arange(5))
            s = spectra.sgn_matrix(mdl, idx, check=False)
            assert np.max(np.abs(np.diag(s))) < 1e-12

    def test_morse_diag_vs_quadrature(self):
        for lam in (5.0, 10.0, 20.0):
            mdl = models.morse(lam)
            count = spectra.morse_level_count(lam)
            idx = np.arange(min(8, count))
            s = spectra.sgn_matrix(mdl, idx, check=False)
            for n in idx:
                ref = sgn_overlap_oracle(mdl, int(n), int(n))
                assert abs(s[n, n] - ref) < 1e-8

    @pytest.mark.parametrize("mdl,pairs", [
        (models.pendulum(-0.05), [(0, 1), (1, 2), (0, 3), (2, 3)]),
        (models.morse(8.0), [(0, 1), (1, 3), (2, 4), (0, 5)]),
        (models.infinite_well(), [(1, 2), (2, 3), (1, 4), (3, 4)]),
        (models.kerr(0.05), [(0, 1), (1, 2), (2, 5), (0, 3)]),
    ])
    def test_offdiag_vs_quadrature(self, mdl, pairs):
        nmax = max(max(p) for p in pairs)
        idx = (np.arange(1, nmax + 1) if mdl.kind == models.WELL
               else np.arange(nmax + 1))
        s = spectra.sgn_matrix(mdl, idx, check=False)
        pos_of = {int(n): i for i, n in enumerate(idx)}
        for n, m in pairs:
            ref = sgn_overlap_oracle(mdl, n, m)
            assert abs(s[pos_of[n], pos_of[m]] - ref) < 1e-8

    def test_builtin_check_passes(self):
        spectra.sgn_matrix(models.morse(8.0), np.arange(6), check=True)


class TestSpectrumSlice:
    def test_roundtrip(self, tmp_path):
        mdl = models.kerr(0.02)
        w = energy_window(mdl, 1.0)
        slc = spectra.spectrum_slice(mdl, w, check=False)
        path = tmp_path / "slice.json"
        slc.save(path)
        loaded = spectra.SpectrumSlice.load(path, mdl)
        assert loaded.indices == slc.indices
        assert np.allclose(loaded.energies, slc.energies)
        assert np.allclose(loaded.sgn, slc.sgn)

    def test_model_mismatch(self, tmp_path):
        mdl = models.kerr(0.02)
        slc = spectra.spectrum_slice(mdl, energy_window(mdl, 1.0),
                                     check=False)
        path = tmp_path / "slice.json"
        slc.save(path)
        with pytest.raises(DomainError):
            spectra.SpectrumSlice.load(path, models.kerr(0.03))

    def test_cache_key_distinct(self):
        w1 = EnergyWindow(0.0, 7.0)
        w2 = EnergyWindow(0.0, 7.5)
        k1 = spectra.slice_cache_key(models.harmonic(), w1)
        k2 = spectra.slice_cache_key(models.harmonic(), w2)
        assert k1 != k2

    def test_invariants_enforced(self):
        with pytest.raises(DomainError):
            spectra.SpectrumSlice(models.harmonic(), (0, 1),
                                  np.array([0.5, 1.5]),
                                  np.array([[0.0, 2.0], [2.0, 0.0]]))
