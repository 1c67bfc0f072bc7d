import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from greenghz.measure import (
    GHZ_THETAS,
    CountRecord,
    MeasurementSetting,
    M_tensor3,
    basis_key,
    born_probabilities,
    coherence_C,
    coherence_operator,
    correlation_from_counts,
    equatorial,
    expected_counts,
    ghz_fidelity,
    ghz_suite_bootstrap,
    ghz_suite_exact,
    ghz_suite_from_counts,
    ghz_suite_settings,
    observable_M,
    parse_token,
    population_P,
    population_from_counts,
    sample_counts,
    sign_in_basis,
    token_ket,
    witness_report,
)
from greenghz.qcore import (
    SIGMA_X,
    SIGMA_Y,
    DensityMatrix,
    fidelity_pure,
    ghz_state,
    ket,
    maximally_mixed,
    random_density,
)

S2 = 1 / math.sqrt(2)


def hhh_vvv_coherence():
    m = np.zeros((8, 8))
    m[0, 7] = m[7, 0] = 1
    return m


class TestTokens:
    def test_fixed_kets(self):
        assert_allclose(token_ket("D"), [S2, S2])
        assert_allclose(token_ket("D", -1), token_ket("A"))
        assert_allclose(token_ket("R", -1), token_ket("L"))
        assert_allclose(token_ket("H", -1), token_ket("V"))

    def test_equatorial_ket(self):
        theta = 1.1
        assert_allclose(token_ket(equatorial(theta)), [S2, S2 * np.exp(1j * theta)])
        assert_allclose(token_ket(equatorial(theta), -1), [S2, -S2 * np.exp(1j * theta)])

    def test_equatorial_round_trip(self):
        for theta in (0.0, math.pi / 3, 2 * math.pi / 3, 5.9):
            kind, back = parse_token(equatorial(theta))
            assert kind == "E" and back == theta

    def test_equatorial_wraps(self):
        assert parse_token(equatorial(-0.5))[1] == pytest.approx(2 * math.pi - 0.5)

    def test_equatorial_zero_is_d(self):
        assert_allclose(token_ket(equatorial(0)), token_ket("D"))

    def test_basis_key_groups_partners(self):
        assert basis_key("H") == basis_key("V")
        assert basis_key("D") == basis_key("A") != basis_key("R")
        assert basis_key(equatorial(0.4)) == basis_key(equatorial(0.4 + math.pi))

    def test_sign_in_basis(self):
        assert sign_in_basis("H", 1) == 1 and sign_in_basis("V", 1) == -1
        # E(theta + pi) with sign + is the minus member of E(theta)
        t = equatorial(0.4 + math.pi)
        assert_allclose(token_ket(t), token_ket(equatorial(0.4), sign_in_basis(t, 1)), atol=1e-15)

    @pytest.mark.parametrize("bad", ["X", "E", "Efoo", "Enan", ""])
    def test_bad_tokens(self, bad):
        with pytest.raises(ValueError):
            parse_token(bad)


class TestSettings:
    def test_all_outcomes_by_default(self):
        s = MeasurementSetting(("H", "D"))
        assert len(s.recorded()) == 4
        assert s.descriptor() == "H;D"

    def test_projector_ket(self):
        s = MeasurementSetting(("H", "V"))
        assert_allclose(s.projector_ket((1, 1)), ket("HV").amplitudes)
        assert_allclose(s.projector_ket((-1, 1)), ket("VV").amplitudes)

    def test_bad_outcome(self):
        with pytest.raises(ValueError):
            MeasurementSetting(("H",), outcomes=((1, 1),))

    def test_count_record_validation(self):
        s = MeasurementSetting(("H",))
        with pytest.raises(ValueError):
            CountRecord(s, {(1,): -1})
        with pytest.raises(ValueError):
            CountRecord(s, {(1,): 2.5})
        assert CountRecord(s, {(1,): 2.5}, expected=True).total == 2.5


class TestObservableM:
    def test_zero_is_sigma_x(self):
        assert_allclose(observable_M(0).matrix, SIGMA_X)

    def test_half_pi_is_sigma_y(self):
        assert_allclose(observable_M(math.pi / 2).matrix, SIGMA_Y, atol=1e-15)

    def test_eigenvectors(self):
        for theta in np.linspace(0, 2 * math.pi, 13):
            m = observable_M(theta).matrix
            for sign in (1, -1):
                v = np.array([S2, sign * S2 * np.exp(1j * theta)])
                assert_allclose(m @ v, sign * v, atol=1e-15)

    def test_pi_over_three(self):
        v = np.array([S2, S2 * np.exp(1j * math.pi / 3)])
        assert_allclose(observable_M(math.pi / 3).matrix @ v, v, atol=1e-15)


class TestGhzEstimators:
    def test_operator_identity(self):
        assert np.abs(coherence_operator() - hhh_vvv_coherence()).max() < 1e-12

    def test_cos_three_theta(self):
        g = ghz_state().to_density().matrix
        for theta in np.linspace(0, 2 * math.pi, 100):
            val = np.trace(g @ M_tensor3(theta)).real
            assert abs(val - math.cos(3 * theta)) < 1e-12

    def test_ideal(self):
        g = ghz_state()
        assert coherence_C(g) == pytest.approx(1, abs=1e-14)
        assert population_P(g) == pytest.approx(1, abs=1e-14)
        assert ghz_fidelity(g) == pytest.approx(1, abs=1e-14)

    def test_maximally_mixed(self):
        mm = maximally_mixed(3)
        assert coherence_C(mm) == pytest.approx(0, abs=1e-15)
        assert population_P(mm) == pytest.approx(0.25)
        assert ghz_fidelity(mm) == pytest.approx(0.125)

    def test_classical_mixture(self):
        rho = DensityMatrix(0.5 * (ket("HHH").to_density().matrix + ket("VVV").to_density().matrix))
        assert coherence_C(rho) == pytest.approx(0, abs=1e-15)
        assert population_P(rho) == pytest.approx(1)

    def test_orthogonal_population(self):
        assert population_P(ket("HHV")) == 0

    def test_fidelity_from_p_plus_c(self):
        # P + C = 1.19 gives F = 0.595
        p = (0.595 - 0.125) / 0.875
        rho = DensityMatrix(p * ghz_state().to_density().matrix + (1 - p) * np.eye(8) / 8)
        assert population_P(rho) + coherence_C(rho) == pytest.approx(1.19, abs=1e-12)
        assert ghz_fidelity(rho) == pytest.approx(0.595, abs=1e-12)

    def test_equals_fidelity_pure(self, rng):
        for _ in range(100):
            rho = random_density(3, rng)
            assert abs(ghz_fidelity(rho) - fidelity_pure(rho, ghz_state())) < 1e-10

    def test_wrong_dimension(self):
        with pytest.raises(ValueError):
            coherence_C(maximally_mixed(2))
        with pytest.raises(ValueError):
            population_P(maximally_mixed(2))


class TestWitness:
    def test_reported_numbers(self):
        w = witness_report(0.595, 0.023)
        assert w.witness_value == pytest.approx(-0.095)
        assert abs(w.significance_sigmas - 4.13) < 0.005
        assert w.entangled

    def test_threshold(self):
        w = witness_report(0.5, 0.3)
        assert w == (0.0, 0.0, False)

    def test_ideal(self):
        w = witness_report(1.0, 0.01)
        assert w.witness_value == -0.5
        assert w.significance_sigmas == pytest.approx(50)
        assert w.entangled

    @pytest.mark.parametrize("sigma", [0.0, -0.1])
    def test_bad_sigma(self, sigma):
        with pytest.raises(ValueError):
            witness_report(0.6, sigma)


class TestSampling:
    def test_zero_total(self):
        rec = sample_counts(ghz_state(), MeasurementSetting(("H",) * 3), 0, seed=1)
        assert all(c == 0 for c in rec.counts.values())

    def test_negative_total(self):
        with pytest.raises(ValueError):
            sample_counts(ghz_state(), MeasurementSetting(("H",) * 3), -1, seed=1)

    def test_deterministic(self):
        s = MeasurementSetting(("D", "R", "H"))
        rho = random_density(3, np.random.default_rng(3))
        assert sample_counts(rho, s, 500, 9).counts == sample_counts(rho, s, 500, 9).counts

    def test_hhh_only(self):
        s = MeasurementSetting(("H",) * 3)
        rho = ket("HHH")
        counts = []
        for seed in range(2000):
            rec = sample_counts(rho, s, 1000, seed)
            assert sum(v for k, v in rec.counts.items() if k != (1, 1, 1)) == 0
            counts.append(rec.counts[(1, 1, 1)])
        counts = np.array(counts)
        assert np.all(np.abs(counts - 1000) < 5 * math.sqrt(1000))
        assert abs(counts.mean() - 1000) < 5 * math.sqrt(1000 / len(counts))
        assert counts.var(ddof=1) == pytest.approx(1000, rel=0.15)

    def test_ghz_m0_correlation(self):
        s = MeasurementSetting((equatorial(0),) * 3)
        rec = sample_counts(ghz_state(), s, 1e5, seed=4)
        assert abs(correlation_from_counts(rec) - 1) < 0.02

    def test_born_sums_to_one(self, rng):
        for _ in range(20):
            rho = random_density(3, rng)
            toks = tuple(rng.choice(list("HVDARL"), size=3))
            probs = born_probabilities(rho, MeasurementSetting(toks))
            assert abs(sum(probs.values()) - 1) < 1e-12

    def test_born_rejects_size_mismatch(self):
        with pytest.raises(ValueError):
            born_probabilities(ghz_state(), MeasurementSetting(("H", "H")))

    def test_frequencies_converge(self):
        rho = random_density(2, np.random.default_rng(11))
        s = MeasurementSetting(("D", "R"))
        probs = born_probabilities(rho, s)
        n = 10_000
        ok = 0
        for seed in range(200):
            rec = sample_counts(rho, s, n, seed)
            tot = rec.total
            dev = max(
                abs(rec.counts[k] / tot - p) / math.sqrt(p * (1 - p) / n) for k, p in probs.items()
            )
            ok += dev < 5
        assert ok / 200 >= 0.99


class TestSuite:
    def test_settings(self):
        s = ghz_suite_settings()
        assert [x.per_photon[0] for x in s] == [equatorial(t) for t in GHZ_THETAS] + ["H"]

    def test_exact_pattern(self):
        res = ghz_suite_exact(ghz_state())
        assert_allclose(res.M_expectations, [1, -1, 1], atol=1e-12)
        assert (res.P, res.C, res.F) == pytest.approx((1, 1, 1))
        assert res.witness == pytest.approx(-0.5)

    def test_expected_counts_match_exact(self, rng):
        rho = random_density(3, rng)
        recs = [expected_counts(rho, s, 1000) for s in ghz_suite_settings()]
        a, b = ghz_suite_from_counts(recs), ghz_suite_exact(rho)
        assert_allclose(a.M_expectations, b.M_expectations, atol=1e-12)
        assert a.F == pytest.approx(b.F, abs=1e-12)
        assert a.F == pytest.approx(0.5 * (a.P + a.C), abs=1e-12)

    def test_population_from_counts(self):
        s = MeasurementSetting(("H",) * 3)
        rec = CountRecord(s, {(1, 1, 1): 30, (-1, -1, -1): 50, (1, -1, 1): 20})
        assert population_from_counts(rec) == pytest.approx(0.8)

    def test_bootstrap(self):
        p = 0.5371
        rho = DensityMatrix(p * ghz_state().to_density().matrix + (1 - p) * np.eye(8) / 8)
        recs = [sample_counts(rho, s, 1e4, i) for i, s in enumerate(ghz_suite_settings())]
        res = ghz_suite_bootstrap(recs, 200, seed=5)
        assert res.sigma > 0
        assert res.significance == pytest.approx((res.F - 0.5) / res.sigma)
        assert abs(res.F - 0.595) < 5 * res.sigma
        assert set(res.summary()) == {"M_expectations", "P", "C", "F", "sigma", "witness", "significance"}
