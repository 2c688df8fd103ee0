import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shapaudit import dgp
from shapaudit import value_functions as vf
from shapaudit.game import InvalidArgument, NumericError, exact_shapley, is_monotonic, to_mask


def mask(*names, order=("X1", "X2", "X3", "Z")):
    return to_mask(order.index(n) for n in names)


@pytest.fixture(scope="module")
def gm_data():
    return dgp.sample_gauss_markov(10**6, seed=42)


@pytest.fixture(scope="module")
def r2_pop():
    return vf.r2_game_population(dgp.population_gauss_markov())


class TestR2:
    def test_closed_form_worths(self, r2_pop):
        # Z alone explains 12^2/(16*16); the true parents explain 12/16
        assert r2_pop(mask("Z")) == pytest.approx(0.5625, abs=1e-12)
        assert r2_pop(mask("X1", "X2", "X3")) == pytest.approx(0.75, abs=1e-12)
        assert r2_pop(r2_pop.grand) == pytest.approx(0.75, abs=1e-12)
        assert r2_pop(mask("X1")) == pytest.approx(0.25, abs=1e-12)

    def test_population_shapley(self, r2_pop):
        phi = exact_shapley(r2_pop).phi
        np.testing.assert_allclose(phi, [0.16, 0.16, 0.16, 0.26], atol=0.005)
        assert phi.sum() == pytest.approx(0.75, abs=1e-12)
        assert int(np.argmax(phi)) == 3

    def test_empirical_tracks_population(self, gm_data, r2_pop):
        emp = vf.r2_game_empirical(gm_data)
        np.testing.assert_allclose(emp.values, r2_pop.values, atol=0.01)
        np.testing.assert_allclose(exact_shapley(emp).phi, exact_shapley(r2_pop).phi, atol=0.01)

    def test_constant_response(self):
        data = dgp.sample_gauss_markov(100, 1)
        flat = dgp.Dataset(data.x, np.full(100, 3.0), data.names, data.spec)
        assert np.all(vf.r2_game_empirical(flat).values == 0)

    def test_too_few_rows(self):
        data = dgp.sample_gauss_markov(5, 1)
        with pytest.raises(InvalidArgument):
            vf.r2_game_empirical(data)

    def test_requires_covariance(self):
        with pytest.raises(InvalidArgument):
            vf.r2_game_population(dgp.joint_discrete_markov(0.2))

    def test_monotone(self, r2_pop):
        assert is_monotonic(r2_pop).monotone


def _bayes_oracle(ell, S):
    """m(S) by summing the joint table cell by cell with itertools."""
    joint = dgp.joint_discrete_markov(ell).joint_table
    cells = {}
    for x1, x2, x3, y in itertools.product(range(4), range(2), range(2), range(2)):
        key = tuple(v for k, v in enumerate((x1, x2, x3)) if S >> k & 1)
        cells.setdefault(key, [0.0, 0.0])[y] += joint[x1, x2, x3, y]
    return sum(max(p) for p in cells.values())


class TestBayesAccuracy:
    @pytest.mark.parametrize("ell", [0.05, 0.25, 0.5, 0.9])
    def test_against_oracle(self, ell):
        raw = vf.bayes_accuracy_raw(dgp.joint_discrete_markov(ell))
        for S in range(8):
            assert raw[S] == pytest.approx(_bayes_oracle(ell, S), abs=1e-12)

    def test_known_worths(self):
        g = vf.bayes_accuracy_game(dgp.joint_discrete_markov(0.05))
        assert g.offset == pytest.approx(0.5, abs=1e-12)
        assert g(0b110) == pytest.approx(0.4, abs=1e-12)
        assert g(0b111) == pytest.approx(0.4, abs=1e-12)

    def test_shapley_at_ell_005(self):
        g = vf.bayes_accuracy_game(dgp.joint_discrete_markov(0.05))
        phi = exact_shapley(g).phi
        np.testing.assert_allclose(phi, [0.22, 0.09, 0.09], atol=0.005)
        assert phi.sum() == pytest.approx(0.4, abs=1e-9)

    def test_center_has_no_pathology(self):
        phi = exact_shapley(vf.bayes_accuracy_game(dgp.joint_discrete_markov(0.5))).phi
        assert phi[0] == pytest.approx(0.0, abs=1e-12)
        assert phi[0] < phi[1]

    def test_requires_table(self):
        with pytest.raises(InvalidArgument):
            vf.bayes_accuracy_raw(dgp.population_gauss_markov())

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0.01, 0.99))
    def test_monotone_and_bounded(self, ell):
        raw = vf.bayes_accuracy_raw(dgp.joint_discrete_markov(ell))
        assert np.all(raw >= 0.5 - 1e-12) and np.all(raw <= 1 + 1e-12)
        g = vf.bayes_accuracy_game(dgp.joint_discrete_markov(ell))
        assert is_monotonic(g).monotone


def _loglik_population(t1, t2, S):
    # X ~ N(0, I), terms X2, X3, X1X2, X1X3 are uncorrelated with unit variance
    coefs = {0b010: t1, 0b100: t1, 0b011: t2, 0b101: t2}
    total = sum(b * b for b in coefs.values()) + 1.0
    explained = sum(b * b for t, b in coefs.items() if t & S == t)
    return 0.5 * math.log(total / (total - explained))


class TestLoglik:
    def test_population_limit(self):
        data = dgp.sample_secret(2, 2.2, 10**5, seed=5)
        g = vf.loglik_game(data, dgp.SecretInteraction(2, 2.2))
        for S in range(8):
            assert g(S) == pytest.approx(_loglik_population(2, 2.2, S), abs=0.02)

    def test_secret_holder_shape_in_population(self):
        # at (2, 2.2) the population game has the secret-holder inequalities
        c = [_loglik_population(2, 2.2, S) for S in range(8)]
        assert c[0b011] > c[0b110] and c[0b101] > c[0b110]
        assert c[0b001] == 0.0

    def test_zero_truth_gives_zero_game(self):
        data = dgp.sample_secret(0, 0, 500, seed=1)
        g = vf.loglik_game(data, dgp.SecretInteraction(0, 0))
        assert np.all(g.values == 0)

    def test_nonnegative_and_monotone(self):
        for seed in range(5):
            data = dgp.sample_secret(1.0, -0.7, 1000, seed)
            g = vf.loglik_game(data, dgp.SecretInteraction(1.0, -0.7))
            assert g.values.min() >= -0.02
            # nested least-squares fits can only lower the RSS
            assert is_monotonic(g, slack=1e-12).monotone

    def test_zero_variance(self):
        data = dgp.sample_secret(1, 1, 50, seed=1)
        flat = dgp.Dataset(data.x, np.zeros(50), data.names, data.spec)
        with pytest.raises(NumericError):
            vf.loglik_game(flat, dgp.SecretInteraction(1, 1))


class TestMseSkill:
    def test_structure(self):
        data = dgp.sample_taxicab_max((5, 10, 20), 10**4, seed=2)
        g = vf.mse_skill_game(data)
        full = g(0b111)
        # X3 is almost surely the maximum, so it matches the full predictor
        assert g(0b100) == full and g(0b101) == full and g(0b110) == full
        assert 0 < g(0b001) < g(0b010) < g(0b100)
        resid = data.y - data.x.max(axis=1)
        assert full == pytest.approx(np.mean(data.y ** 2) - np.mean(resid ** 2), abs=1e-9)

    def test_handmade(self):
        x = np.array([[1.0, 2.0], [3.0, 0.0]])
        y = np.array([2.0, 3.0])
        data = dgp.Dataset(x, y, ("a", "b"))
        g = vf.mse_skill_game(data)
        base = (4 + 9) / 2
        assert g(0b01) == pytest.approx(base - (1 + 0) / 2)
        assert g(0b10) == pytest.approx(base - (0 + 9) / 2)
        assert g(0b11) == pytest.approx(base)


class TestFitting:
    def test_fit_linear_recovers_truth(self, gm_data):
        m = vf.fit_linear(gm_data)
        np.testing.assert_allclose(m.coef, [1, 1, 1, 0], atol=0.01)
        assert abs(m.intercept) < 0.01

    def test_fit_prob_table(self):
        data = dgp.sample_discrete_markov(0.05, 10**6, seed=4)
        m = vf.fit_prob_table(data)
        assert m.prob.shape == (4, 2, 2)
        # Y depends on (X2, X3) only
        assert m.prob[2, 0, 0] == pytest.approx(0.9, abs=0.005)
        assert m.prob[0, 1, 1] == pytest.approx(0.9, abs=0.02)
        assert not m.empty.any()

    def test_empty_cell_smoothed(self):
        x = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]])
        data = dgp.Dataset(x, np.array([1.0, 0.0, 1.0]), ("a", "b"))
        m = vf.fit_prob_table(data)
        assert m.empty[1, 1]
        assert m.prob[1, 1] == 0.5
        assert m.prob[0, 0] == 1.0

    def test_prob_table_needs_binary(self, gm_data):
        with pytest.raises(InvalidArgument):
            vf.fit_prob_table(gm_data)

    def test_unseen_level(self):
        data = dgp.sample_discrete_markov(0.3, 200, 1)
        m = vf.fit_prob_table(data)
        bad = data.x.copy()
        bad[0, 0] = 7.0
        with pytest.raises(InvalidArgument):
            m.cell_index(bad)

    def test_rank_deficient(self):
        x = np.column_stack([np.arange(10.0), 2 * np.arange(10.0)])
        with pytest.raises(NumericError):
            vf.fit_linear(dgp.Dataset(x, np.arange(10.0), ("a", "b")))


class TestLossSpec:
    def test_values(self):
        assert vf.SQUARED_ERROR(np.array([1.0]), 3.0)[0] == 4.0
        ce = vf.CROSS_ENTROPY(np.array([0.25]), 1.0)[0]
        assert ce == pytest.approx(-math.log(0.25))
        assert vf.LossSpec("zero_one")(np.array([0.7, 0.2]), np.array([1.0, 1.0])).tolist() == [0.0, 1.0]

    def test_clipping(self):
        assert np.isfinite(vf.CROSS_ENTROPY(np.array([0.0, 1.0]), np.array([1.0, 0.0]))).all()

    @pytest.mark.parametrize("kind,clip", [("hinge", 1e-6), ("cross_entropy", 0.0), ("cross_entropy", 0.5)])
    def test_invalid(self, kind, clip):
        with pytest.raises(InvalidArgument):
            vf.LossSpec(kind, clip)


class TestInterventional:
    def test_linear_markov1(self, gm_data):
        m = vf.fit_linear(gm_data)
        g = vf.interventional_loss_game(m, gm_data, vf.SQUARED_ERROR)
        phi = exact_shapley(g).phi
        np.testing.assert_allclose(phi[:3], 4, atol=0.2)
        assert phi[3] <= 0.1
        assert int(np.argmin(phi)) == 3

    def test_zero_coefficient_is_null(self, gm_data):
        m = vf.fit_linear(gm_data)
        m0 = vf.LinearModel(np.array([1.0, 1.0, 1.0, 0.0]), 0.0, m.feature_means, m.names)
        g = vf.interventional_loss_game(m0, gm_data, vf.SQUARED_ERROR)
        assert np.abs(g.values[0b1000:] - g.values[:0b1000]).max() == 0.0

    def test_linear_rejects_cross_entropy(self, gm_data):
        m = vf.fit_linear(gm_data)
        with pytest.raises(InvalidArgument):
            vf.interventional_loss_game(m, gm_data, vf.CROSS_ENTROPY)

    def test_table_ranks_x1_last(self):
        data = dgp.sample_discrete_markov(0.05, 10**5, seed=6)
        g = vf.interventional_loss_game(vf.fit_prob_table(data), data, vf.CROSS_ENTROPY)
        phi = exact_shapley(g).phi
        assert int(np.argmin(phi)) == 0
        assert abs(phi[0]) < 0.01

    def test_table_full_coalition_is_plain_loss(self):
        data = dgp.sample_discrete_markov(0.3, 5000, seed=2)
        m = vf.fit_prob_table(data)
        g = vf.interventional_loss_game(m, data, vf.CROSS_ENTROPY)
        p = m.prob[m.cell_index(data.x)]
        full_loss = np.mean(vf.CROSS_ENTROPY(p, data.y))
        p0 = np.full(data.n, data.y.mean())
        empty_loss = np.mean(vf.CROSS_ENTROPY(p0, data.y))
        assert g(g.grand) == pytest.approx(empty_loss - full_loss, abs=1e-10)

    def test_name_mismatch(self, gm_data):
        data = dgp.sample_secret(1, 1, 100, 1)
        with pytest.raises(InvalidArgument):
            vf.interventional_loss_game(vf.fit_linear(gm_data), data, vf.SQUARED_ERROR)


def test_mean_abs_linear_shap(gm_data):
    m = vf.fit_linear(gm_data)
    shap = vf.mean_abs_linear_shap(m, gm_data)
    # E|N(0, 2^2)| = 2 sqrt(2/pi)
    np.testing.assert_allclose(shap[:3], 2 * math.sqrt(2 / math.pi), atol=0.02)
    assert shap[3] <= 0.01


def test_mean_abs_linear_shap_needs_linear():
    data = dgp.sample_discrete_markov(0.3, 100, 1)
    with pytest.raises(InvalidArgument):
        vf.mean_abs_linear_shap(vf.fit_prob_table(data), data)
