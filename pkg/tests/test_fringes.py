import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from triquart import (
    FockState,
    closed_form,
    closed_form_check,
    enumerate_basis,
    fringe_probabilities,
    fringe_scan,
    n_fold_visibility,
    outcome_classes,
    quarter_mz,
    tabulated_outcomes,
    tritter_mz,
)
from triquart.fringes import FringePattern

TRITTER_IN = FockState([1, 1, 1])
QUARTER_IN = FockState([1, 1, 1, 1])


def signature_permutations(sig):
    return sorted(set(itertools.permutations(sig)))


class TestFringeProbabilities:
    def test_tritter_210_peak(self):
        p = fringe_probabilities(
            tritter_mz(), TRITTER_IN, FockState([2, 1, 0]), np.array([np.pi / 3])
        )
        assert p[0] == pytest.approx(8 / 81, abs=1e-12)

    def test_tritter_111_at_zero(self):
        p = fringe_probabilities(
            tritter_mz(), TRITTER_IN, FockState([1, 1, 1]), np.array([0.0])
        )
        assert p[0] == pytest.approx(1 / 3, abs=1e-12)

    def test_quarter_1111_at_zero(self):
        p = fringe_probabilities(
            quarter_mz(), QUARTER_IN, FockState([1, 1, 1, 1]), np.array([0.0])
        )
        assert p[0] == pytest.approx(1.0, abs=1e-12)

    def test_quarter_3100_quarter_wave(self):
        p = fringe_probabilities(
            quarter_mz(), QUARTER_IN, FockState([3, 1, 0, 0]), np.array([np.pi / 2])
        )
        assert p[0] == pytest.approx(3 / 128, abs=1e-12)

    def test_photon_mismatch_rejected(self):
        with pytest.raises(ValueError, match="photon"):
            fringe_probabilities(
                tritter_mz(), TRITTER_IN, FockState([1, 1, 0]), np.array([0.0])
            )

    def test_feedback_acts_as_phase_shift(self, rng):
        phis = rng.uniform(0, 2 * np.pi, size=5)
        psi = 0.83
        shifted = fringe_probabilities(
            tritter_mz(), TRITTER_IN, FockState([2, 1, 0]), phis, psi=psi
        )
        direct = fringe_probabilities(
            tritter_mz(), TRITTER_IN, FockState([2, 1, 0]), phis + psi
        )
        np.testing.assert_allclose(shifted, direct, atol=1e-12)

    @given(st.floats(-10.0, 10.0))
    def test_probability_range(self, phi):
        p = fringe_probabilities(
            tritter_mz(), TRITTER_IN, FockState([3, 0, 0]), np.array([phi])
        )
        assert -1e-12 <= p[0] <= 1 + 1e-12


class TestNormalization:
    @pytest.mark.parametrize(
        "spec, input_state", [(tritter_mz(), TRITTER_IN), (quarter_mz(), QUARTER_IN)]
    )
    def test_unit_total_probability(self, spec, input_state):
        phis = np.linspace(0, 2 * np.pi, 73, endpoint=False)
        total = np.zeros_like(phis)
        for out in enumerate_basis(spec.mode_count, input_state.total):
            total += fringe_probabilities(spec, input_state, out, phis)
        np.testing.assert_allclose(total, 1.0, atol=1e-10)


class TestFringeScan:
    def test_reconstruction_matches_samples(self):
        for spec, input_state in ((tritter_mz(), TRITTER_IN), (quarter_mz(), QUARTER_IN)):
            for out in enumerate_basis(spec.mode_count, input_state.total):
                pattern = fringe_scan(spec, input_state, out)
                phis, probs = zip(*pattern.samples)
                rebuilt = pattern.reconstruct(np.array(phis))
                np.testing.assert_allclose(rebuilt, probs, atol=1e-9)

    def test_harmonic_cutoff(self):
        """No Fourier mass above the photon number, checked on the raw DFT."""
        for spec, input_state in ((tritter_mz(), TRITTER_IN), (quarter_mz(), QUARTER_IN)):
            N = input_state.total
            for out in enumerate_basis(spec.mode_count, N):
                pattern = fringe_scan(spec, input_state, out, n_points=64)
                probs = np.array([p for _, p in pattern.samples])
                spectrum = np.abs(np.fft.rfft(probs)) / len(probs)
                assert spectrum[N + 1 :].max() < 1e-10

    def test_fourier_exactness_210(self):
        pattern = fringe_scan(tritter_mz(), TRITTER_IN, FockState([2, 1, 0]))
        assert pattern.amplitude(0) == pytest.approx(4 / 81, abs=1e-12)
        assert pattern.amplitude(3) == pytest.approx(4 / 81, abs=1e-12)
        assert abs(pattern.amplitude(1)) < 1e-12
        assert abs(pattern.amplitude(2)) < 1e-12

    def test_fourier_convention(self):
        """A_k >= 0 and delta_k in [0, 2pi) for every reported harmonic."""
        pattern = fringe_scan(tritter_mz(), TRITTER_IN, FockState([1, 1, 1]))
        for k, amp, delta in pattern.fourier:
            assert amp >= 0.0
            assert 0.0 <= delta < 2 * np.pi

    def test_grid_too_coarse_rejected(self):
        with pytest.raises(ValueError, match="points"):
            fringe_scan(tritter_mz(), TRITTER_IN, FockState([2, 1, 0]), n_points=6)

    def test_probabilities_are_positive(self):
        pattern = fringe_scan(quarter_mz(), QUARTER_IN, FockState([4, 0, 0, 0]))
        assert pattern.probabilities.min() > -1e-12


class TestClosedForms:
    @pytest.mark.parametrize("sig", [(3, 0, 0), (2, 1, 0), (1, 1, 1)])
    def test_tritter_formulas(self, sig):
        assert closed_form_check(FockState(sig), tritter_mz()) < 1e-9

    @pytest.mark.parametrize(
        "sig", [(4, 0, 0, 0), (3, 1, 0, 0), (2, 2, 0, 0), (2, 1, 1, 0), (1, 1, 1, 1)]
    )
    def test_quarter_formulas(self, sig):
        assert closed_form_check(FockState(sig), quarter_mz()) < 1e-9

    def test_permuted_outcome_same_deviation(self):
        ref = closed_form_check(FockState([3, 0, 0]), tritter_mz())
        for perm in signature_permutations((3, 0, 0)):
            assert closed_form_check(FockState(perm), tritter_mz()) == pytest.approx(
                ref, abs=1e-12
            )

    def test_output_index_exchange_symmetry(self):
        """All members of an outcome class share one fringe pointwise."""
        phis = np.linspace(0, 2 * np.pi, 37, endpoint=False)
        for spec, input_state in ((tritter_mz(), TRITTER_IN), (quarter_mz(), QUARTER_IN)):
            for rep, _ in outcome_classes(spec.mode_count, input_state.total):
                base = fringe_probabilities(spec, input_state, rep, phis)
                for perm in signature_permutations(rep.occupations):
                    other = fringe_probabilities(spec, input_state, FockState(perm), phis)
                    np.testing.assert_allclose(other, base, atol=1e-12)

    def test_tabulated_outcomes_listing(self):
        assert tabulated_outcomes("tritter") == ((3, 0, 0), (2, 1, 0), (1, 1, 1))
        assert len(tabulated_outcomes("quarter")) == 5

    def test_untabulated_outcome_rejected(self):
        with pytest.raises(ValueError, match="tabulated"):
            closed_form(tritter_mz(), FockState([2, 0, 0]))

    def test_specific_formula_values(self):
        p2200 = closed_form(quarter_mz(), FockState([2, 2, 0, 0]))
        phi = 1.1
        expected = (
            (47 + 60 * math.cos(phi) + 21 * math.cos(2 * phi))
            * math.sin(phi / 2) ** 4
            / 128
        )
        assert p2200(np.array([phi]))[0] == pytest.approx(expected, abs=1e-15)


class TestVisibilityExtraction:
    def test_210_unit_visibility(self):
        report = n_fold_visibility(fringe_scan(tritter_mz(), TRITTER_IN, FockState([2, 1, 0])))
        assert report.n_fold_visibility == pytest.approx(1.0, abs=1e-12)
        assert report.classical_bound is None
        assert report.nonclassical is None

    def test_111_visibility(self):
        report = n_fold_visibility(fringe_scan(tritter_mz(), TRITTER_IN, FockState([1, 1, 1])))
        assert report.n_fold_visibility == pytest.approx(16 / 29, abs=1e-12)

    def test_300_visibility(self):
        report = n_fold_visibility(fringe_scan(tritter_mz(), TRITTER_IN, FockState([3, 0, 0])))
        assert report.n_fold_visibility == pytest.approx(2 / 7, abs=1e-12)

    @pytest.mark.parametrize(
        "sig, vis",
        [
            ((1, 1, 1, 1), 45 / 167),
            ((2, 2, 0, 0), 1 / 3),
            ((2, 1, 1, 0), 15 / 19),
            ((3, 1, 0, 0), 1 / 3),
            ((4, 0, 0, 0), 3 / 55),
        ],
    )
    def test_quarter_visibilities(self, sig, vis):
        report = n_fold_visibility(fringe_scan(quarter_mz(), QUARTER_IN, FockState(sig)))
        assert report.n_fold_visibility == pytest.approx(vis, abs=1e-12)

    def test_constant_pattern_zero_visibility(self):
        phis = np.linspace(0, 2 * np.pi, 16, endpoint=False)
        pattern = FringePattern(
            FockState([2, 0, 0]),
            phis,
            np.full(16, 0.25),
            fourier=((0, 0.25, 0.0),),
        )
        assert n_fold_visibility(pattern).n_fold_visibility == 0.0

    def test_zero_dc_amplitude_rejected(self):
        phis = np.linspace(0, 2 * np.pi, 16, endpoint=False)
        pattern = FringePattern(
            FockState([1, 0, 0]), phis, np.zeros(16), fourier=((0, 0.0, 0.0),)
        )
        with pytest.raises(ValueError, match="degenerate"):
            n_fold_visibility(pattern)


class TestOutcomeClasses:
    def test_tritter_classes(self):
        classes = outcome_classes(3, 3)
        assert [(rep.occupations, mult) for rep, mult in classes] == [
            ((3, 0, 0), 3),
            ((2, 1, 0), 6),
            ((1, 1, 1), 1),
        ]

    def test_quarter_classes(self):
        classes = outcome_classes(4, 4)
        assert [(rep.occupations, mult) for rep, mult in classes] == [
            ((4, 0, 0, 0), 4),
            ((3, 1, 0, 0), 12),
            ((2, 2, 0, 0), 6),
            ((2, 1, 1, 0), 12),
            ((1, 1, 1, 1), 1),
        ]

    def test_multiplicities_cover_basis(self):
        for m, n in ((3, 3), (4, 4), (4, 2)):
            total = sum(mult for _, mult in outcome_classes(m, n))
            assert total == len(enumerate_basis(m, n))
