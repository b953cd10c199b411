import math

import numpy as np
import pytest
from scipy import integrate, stats as st

from crmgraph.measures import (AtomicMeasure, BetaProcessParams, ParameterError,
                               StickBreakingConfig, _round_atoms, rate_density,
                               read_measure_csv, sample_three_param_bp, sorted_view,
                               write_measure_csv)

STD_PARAMS = BetaProcessParams(concentration=1.0, discount=0.1, mass=3.0)


def cfg(rounds, floor=0.0, seed=0):
    return StickBreakingConfig(rounds=rounds, weight_floor=floor, seed=seed)


class TestParameterValidation:
    @pytest.mark.parametrize("kwargs", [
        dict(concentration=0.0, discount=0.1, mass=3.0),
        dict(concentration=-1.0, discount=0.1, mass=3.0),
        dict(concentration=1.0, discount=-0.01, mass=3.0),
        dict(concentration=1.0, discount=1.0, mass=3.0),
        dict(concentration=1.0, discount=0.1, mass=0.0),
        dict(concentration=1.0, discount=0.1, mass=-2.0),
        dict(concentration=1.0, discount=0.1, mass=150.0),  # memory guard
    ])
    def test_bad_params(self, kwargs):
        with pytest.raises(ParameterError):
            BetaProcessParams(**kwargs)

    @pytest.mark.parametrize("kwargs", [
        dict(rounds=0), dict(rounds=-3),
        dict(rounds=1, weight_floor=-0.1), dict(rounds=1, weight_floor=1.0),
        dict(rounds=1, seed=-1), dict(rounds=1, seed=2 ** 64),
    ])
    def test_bad_config(self, kwargs):
        with pytest.raises(ParameterError):
            StickBreakingConfig(**kwargs)

    def test_alpha_zero_allowed(self):
        BetaProcessParams(concentration=2.0, discount=0.0, mass=1.0)


class TestRateDensity:
    def test_plain_beta_process_value(self):
        # c * w^-1 * (1-w)^(c-1) at c=1, w=0.5 is exactly 2
        params = BetaProcessParams(concentration=1.0, discount=0.0, mass=1.0)
        assert rate_density(params, 0.5) == pytest.approx(2.0, rel=1e-12)

    def test_three_param_hand_value(self):
        # Gamma(2)/(Gamma(.5)Gamma(1.5)) * 0.5^-1.5 * 0.5^0.5 = 4/pi
        params = BetaProcessParams(concentration=1.0, discount=0.5, mass=1.0)
        assert rate_density(params, 0.5) == pytest.approx(4.0 / math.pi, rel=1e-12)

    def test_finite_near_boundary(self):
        value = rate_density(STD_PARAMS, 0.999)
        assert math.isfinite(value) and value > 0.0

    @pytest.mark.parametrize("w", [0.0, 1.0, -0.2, 1.5])
    def test_domain_error(self, w):
        with pytest.raises(ParameterError):
            rate_density(STD_PARAMS, w)

    @pytest.mark.parametrize("theta", [0.3, 1.0, 4.7])
    def test_discount_zero_matches_plain_formula(self, theta):
        params = BetaProcessParams(concentration=theta, discount=0.0, mass=2.5)
        for w in np.linspace(0.01, 0.99, 23):
            plain = 2.5 * theta * w ** -1.0 * (1.0 - w) ** (theta - 1.0)
            assert rate_density(params, w) == pytest.approx(plain, rel=1e-12)

    def test_large_concentration_no_overflow(self):
        params = BetaProcessParams(concentration=500.0, discount=0.3, mass=1.0)
        assert math.isfinite(rate_density(params, 0.5))

    def test_first_moment_quadrature_equals_mass(self):
        # the analytic identity behind the mass oracle: E[sum w] = mass
        for params in (STD_PARAMS,
                       BetaProcessParams(concentration=2.0, discount=0.4, mass=7.0)):
            value, _ = integrate.quad(lambda w: w * rate_density(params, w), 0.0, 1.0)
            assert value == pytest.approx(params.mass, rel=1e-6)


class TestSampler:
    def test_deterministic_and_seed_sensitive(self):
        a = sample_three_param_bp(STD_PARAMS, cfg(50, seed=3))
        b = sample_three_param_bp(STD_PARAMS, cfg(50, seed=3))
        c = sample_three_param_bp(STD_PARAMS, cfg(50, seed=4))
        assert np.array_equal(a.weights, b.weights)
        assert np.array_equal(a.labels, b.labels)
        assert not np.array_equal(a.weights, c.weights)

    def test_provenance_recorded(self):
        config = cfg(10, seed=1)
        m = sample_three_param_bp(STD_PARAMS, config)
        assert m.params == STD_PARAMS
        assert m.config == config

    def test_weights_strictly_inside_unit_interval(self):
        m = sample_three_param_bp(STD_PARAMS, cfg(400, seed=11))
        assert len(m) > 0
        assert np.all(m.weights > 0.0) and np.all(m.weights < 1.0)
        assert np.unique(m.labels).size == len(m)

    def test_empty_when_first_round_count_is_zero(self):
        # seed 8 draws Poisson(3) = 0 in round 1
        m = sample_three_param_bp(STD_PARAMS, cfg(1, seed=8))
        assert len(m) == 0
        assert m.total_mass() == 0.0

    def test_candidate_atom_count_near_poisson_mean(self):
        # with no floor the atom count is a sum over rounds of Poisson(mass)
        # draws; at the 5000-round truncation that is ~Poisson(3) * 5000
        rounds = 5000
        m = sample_three_param_bp(STD_PARAMS, cfg(rounds, floor=0.0, seed=21))
        mean = STD_PARAMS.mass * rounds
        assert abs(len(m) - mean) < 5.0 * math.sqrt(mean)

    def test_floor_drops_only_light_atoms(self):
        full = sample_three_param_bp(STD_PARAMS, cfg(200, floor=0.0, seed=5))
        floored = sample_three_param_bp(STD_PARAMS, cfg(200, floor=1e-6, seed=5))
        kept = full.weights[full.weights >= 1e-6]
        assert np.array_equal(np.sort(kept), np.sort(floored.weights))

    def test_mean_total_mass_tracks_mass_parameter(self):
        # cheap module-level version of the mass oracle; the 2000-seed
        # acceptance run lives in test_acceptance.py
        totals = [sample_three_param_bp(STD_PARAMS, cfg(200, seed=s)).total_mass()
                  for s in range(300)]
        assert np.mean(totals) == pytest.approx(3.0, abs=0.3)

    def test_first_round_weights_are_beta_distributed(self):
        # R=1 weights are iid Beta(1 - discount, concentration + discount);
        # Kolmogorov-Smirnov must not reject at the 1% level
        params = BetaProcessParams(concentration=1.0, discount=0.1, mass=100.0)
        weights = np.concatenate([
            sample_three_param_bp(params, cfg(1, seed=s)).weights for s in range(120)])
        result = st.kstest(weights[:10_000], st.beta(0.9, 1.1).cdf)
        assert result.pvalue > 0.01

    def test_chunk_crossing_round_mass_matches_analytic_mean(self):
        # round 140 needs two stick chunks; its expected mass has a closed
        # form from the independent beta means
        i, t, a, g = 140, 1.0, 0.1, 3.0
        expected = g * (1 - a) / (1 + t + i * a - a)
        for ell in range(1, i):
            expected *= (t + ell * a) / (1 + t + ell * a - a)
        vals = np.array([
            _round_atoms(STD_PARAMS, cfg(i, seed=s), i)[0].sum()
            for s in range(4000)])
        se = vals.std() / math.sqrt(len(vals))
        assert abs(vals.mean() - expected) < 4.0 * se


class TestAtomicMeasure:
    def test_mismatched_lengths_rejected(self):
        with pytest.raises(ParameterError):
            AtomicMeasure(np.array([0.5]), np.array([0.1, 0.2]))

    @pytest.mark.parametrize("w", [0.0, 1.0, -0.5, 1.5])
    def test_out_of_range_weight_rejected(self, w):
        with pytest.raises(ParameterError):
            AtomicMeasure(np.array([w]), np.array([0.3]))

    def test_duplicate_labels_rejected(self):
        with pytest.raises(ParameterError):
            AtomicMeasure(np.array([0.2, 0.3]), np.array([0.7, 0.7]))

    def test_arrays_are_immutable(self):
        m = AtomicMeasure(np.array([0.2, 0.3]), np.array([0.6, 0.7]))
        with pytest.raises(ValueError):
            m.weights[0] = 0.9


class TestSortedView:
    def test_sorts_descending(self):
        m = AtomicMeasure(np.array([0.2, 0.7, 0.5]), np.array([0.1, 0.2, 0.3]))
        s = sorted_view(m)
        assert s.weights.tolist() == [0.7, 0.5, 0.2]
        assert s.labels.tolist() == [0.2, 0.3, 0.1]  # labels travel with weights

    def test_empty(self):
        m = AtomicMeasure(np.empty(0), np.empty(0))
        assert len(sorted_view(m)) == 0

    def test_permutation_preserves_mass_exactly(self):
        m = sample_three_param_bp(STD_PARAMS, cfg(100, seed=9))
        s = sorted_view(m)
        assert s.weights.sum() == m.weights.sum()
        assert sorted(map(tuple, zip(m.weights, m.labels))) \
            == sorted(map(tuple, zip(s.weights, s.labels)))
        assert s.params == m.params and s.config == m.config


class TestMeasureCsv:
    def test_round_trip_is_lossless(self, tmp_path):
        m = sample_three_param_bp(STD_PARAMS, cfg(100, seed=13))
        path = tmp_path / "w.csv"
        write_measure_csv(m, path)
        back = read_measure_csv(path)
        assert np.array_equal(back.weights, m.weights)
        assert np.array_equal(back.labels, m.labels)

    def test_empty_round_trip(self, tmp_path):
        path = tmp_path / "w.csv"
        write_measure_csv(AtomicMeasure(np.empty(0), np.empty(0)), path)
        assert len(read_measure_csv(path)) == 0

    def test_header_present(self, tmp_path):
        path = tmp_path / "w.csv"
        write_measure_csv(AtomicMeasure(np.array([0.5]), np.array([0.25])), path)
        assert path.read_text().splitlines()[0] == "atom_id,weight,label"

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "w.csv"
        path.write_text("a,b,c\n0,0.5,0.5\n")
        with pytest.raises(ParameterError):
            read_measure_csv(path)
