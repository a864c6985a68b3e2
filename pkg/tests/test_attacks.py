"""Attack tests: step/projection arithmetic, PGD against the closed-form
linear oracle, NES estimator quality, and the label-only random-sign attack."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from advgame import attacks, nn
from advgame.errors import ShapeMismatchError

from helpers import RecordingOracle, linear_attack_oracle, linear_model


class TestSignStep:
    def test_mixed_signs(self):
        out = attacks.sign_step(np.array([0.5, 0.5]), np.array([0.3, -0.2]), 2 / 255)
        assert np.allclose(out, [0.5 + 2 / 255, 0.5 - 2 / 255], atol=1e-15)

    def test_zero_gradient_is_identity(self):
        x = np.array([0.1, 0.9, 0.4])
        assert np.array_equal(attacks.sign_step(x, np.zeros(3), 0.05), x)

    def test_all_positive_gradient_adds_alpha_everywhere(self):
        x = np.full(4, 0.5)
        out = attacks.sign_step(x, np.full(4, 1e-9), 0.03)
        assert np.allclose(out, 0.53, atol=1e-15)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            attacks.sign_step(np.zeros(3), np.zeros(4), 0.1)


class TestProject:
    def test_clamps_to_ball(self):
        out = attacks.project(np.array([0.6]), np.array([0.5]), 8 / 255)
        assert out[0] == pytest.approx(0.5 + 8 / 255, abs=1e-15)

    def test_inside_ball_unchanged(self):
        x = np.array([0.52, 0.48])
        assert np.array_equal(attacks.project(x, np.full(2, 0.5), 0.1), x)

    def test_box_dominates(self):
        out = attacks.project(np.array([-0.2]), np.array([0.01]), 0.1)
        assert out[0] == 0.0


class TestPgdRoundStep:
    def _state(self, d=4):
        x0 = np.full(d, 0.5)
        return attacks.AttackState(x0, x0.copy(), true_label=0)

    def test_zero_gradient_only_counts_step(self):
        state = self._state()
        cfg = attacks.AttackConfig(eps=0.1, alpha=0.02)
        nxt = attacks.pgd_round_step(state, np.zeros(4), cfg)
        assert np.array_equal(nxt.x_t, state.x_t)
        assert nxt.steps_taken == 1

    def test_constant_sign_field_reaches_ball_surface(self):
        cfg = attacks.AttackConfig(eps=0.1, alpha=0.03)
        state = self._state()
        grad = np.array([1.0, -2.0, 3.0, -4.0])
        for _ in range(int(np.ceil(cfg.eps / cfg.alpha))):
            state = attacks.pgd_round_step(state, grad, cfg)
        expected = attacks.project(state.x0 + cfg.eps * np.sign(grad), state.x0, cfg.eps)
        assert np.allclose(state.x_t, expected, atol=1e-15)

    @settings(max_examples=50, deadline=None)
    @given(
        grads=st.lists(
            hnp.arrays(np.float64, 6, elements=st.floats(-10, 10)),
            min_size=1,
            max_size=25,
        )
    )
    def test_invariants_hold_after_any_gradient_sequence(self, grads):
        cfg = attacks.AttackConfig(eps=0.07, alpha=0.03)
        x0 = np.linspace(0.02, 0.98, 6)
        state = attacks.AttackState(x0, x0.copy(), 0)
        for g in grads:
            state = attacks.pgd_round_step(state, g, cfg)
            assert state.within_budget(cfg.eps)


class TestPgdFull:
    @staticmethod
    def _oracle_for(params, true_label):
        def oracle(x):
            return nn.input_gradient(params, x, true_label), nn.predict(params, x)

        return oracle

    def test_matches_linear_closed_form(self):
        rng = np.random.default_rng(424242)
        mismatch = 0
        for _ in range(250):
            W = rng.normal(0, 1.0, (2, 8))
            b = rng.normal(0, 0.3, 2)
            x0 = rng.uniform(0.3, 0.7, 8)
            eps = float(rng.uniform(0.02, 0.2))
            alpha = float(rng.uniform(0.005, eps))
            label = int(rng.integers(2))
            model = linear_model(W, b)
            cfg = attacks.AttackConfig(eps=eps, alpha=alpha, max_steps=int(np.ceil(eps / alpha)) + 2)
            _, success, steps = attacks.pgd_full(self._oracle_for(model, label), x0, label, cfg)
            want_success, want_steps = linear_attack_oracle(W, b, x0, label, eps, alpha)
            mismatch += success != want_success
            if want_success:
                assert steps == want_steps
        assert mismatch == 0

    def test_zero_eps_reports_existing_misclassification(self):
        model = linear_model([[1.0, 0.0], [0.0, 1.0]], [0.0, 0.0])
        cfg = attacks.AttackConfig(eps=0.0, alpha=0.01, max_steps=3)
        x = np.array([0.2, 0.8])  # predicted class 1
        x_adv, success, steps = attacks.pgd_full(self._oracle_for(model, 0), x, 0, cfg)
        assert success and steps == 0 and np.array_equal(x_adv, x)
        x_adv, success, steps = attacks.pgd_full(self._oracle_for(model, 1), x, 1, cfg)
        assert not success and np.array_equal(x_adv, x)

    def test_adversarially_trained_model_resists_more(self, blob64):
        cfg = attacks.AttackConfig(eps=0.1, alpha=0.025, max_steps=10)
        wins = {"nat": 0, "adv": 0}
        X, y = blob64.test_ds.inputs[:60], blob64.test_ds.labels[:60]
        for params, key in ((blob64.natural, "nat"), (blob64.adversarial, "adv")):
            for x0, label in zip(X, y):
                if nn.predict(params, x0) != label:
                    continue
                _, success, _ = attacks.pgd_full(self._oracle_for(params, int(label)), x0, int(label), cfg)
                wins[key] += success
        assert wins["adv"] < wins["nat"]

    def test_random_start_stays_in_ball(self):
        model = linear_model(np.zeros((2, 5)), np.zeros(2))
        cfg = attacks.AttackConfig(eps=0.08, alpha=0.02, max_steps=4, random_start=True)
        x0 = np.full(5, 0.5)
        x_adv, _, _ = attacks.pgd_full(
            self._oracle_for(model, 0), x0, 0, cfg, rng=np.random.default_rng(3)
        )
        assert np.max(np.abs(x_adv - x0)) <= cfg.eps + 1e-12


class TestPgdAttackBatch:
    def test_stays_in_ball_and_box(self):
        rng = np.random.default_rng(62)
        from helpers import random_net

        params = random_net(rng, depth=3, max_width=10)
        d = params.spec.input_dim
        X = rng.uniform(0, 1, (32, d))  # includes points near the box walls
        y = rng.integers(0, params.spec.num_classes, 32)
        for eps, use_rs in ((0.1, False), (0.25, True)):
            X_adv = attacks.pgd_attack_batch(
                params, X, y, eps=eps, alpha=eps / 4, steps=10,
                rng=np.random.default_rng(1), use_random_start=use_rs,
            )
            assert float(np.max(np.abs(X_adv - X))) <= eps + 1e-12
            assert X_adv.min() >= 0.0 and X_adv.max() <= 1.0

    def test_zero_eps_is_identity(self):
        rng = np.random.default_rng(63)
        from helpers import random_net

        params = random_net(rng, depth=2, max_width=6)
        X = rng.uniform(0, 1, (8, params.spec.input_dim))
        y = rng.integers(0, params.spec.num_classes, 8)
        X_adv = attacks.pgd_attack_batch(params, X, y, eps=0.0, alpha=0.01, steps=5)
        assert np.array_equal(X_adv, X)


class TestNesEstimate:
    def test_quadratic_surrogate_aligns_with_analytic_gradient(self):
        # probs = [exp(-|x|^2), 1-exp(-|x|^2)] makes L(x) = |x|^2 exactly
        def prob_oracle(q):
            p = np.exp(-float(q @ q))
            return np.array([p, 1.0 - p])

        rng = np.random.default_rng(5)
        x = rng.uniform(-0.3, 0.3, 16)
        est = attacks.nes_gradient_estimate(prob_oracle, x, 0, sigma=1e-4, n_samples=2000, rng=rng)
        analytic = 2 * x
        cos = float(est @ analytic / (np.linalg.norm(est) * np.linalg.norm(analytic)))
        assert cos > 0.9

    def test_constant_loss_cancels_exactly(self):
        oracle = RecordingOracle(lambda q: np.array([0.25, 0.75]))
        est = attacks.nes_gradient_estimate(
            oracle, np.full(6, 0.5), 0, sigma=1e-3, n_samples=50, rng=np.random.default_rng(1)
        )
        assert np.array_equal(est, np.zeros(6))

    def test_uses_exactly_two_n_queries(self):
        oracle = RecordingOracle(lambda q: np.array([0.5, 0.5]))
        attacks.nes_gradient_estimate(
            oracle, np.zeros(3), 0, sigma=0.1, n_samples=17, rng=np.random.default_rng(0)
        )
        assert oracle.calls == 34

    def test_seeded_estimate_is_bit_identical(self):
        def prob_oracle(q):
            p = 1.0 / (1.0 + np.exp(-q.sum()))
            return np.array([p, 1.0 - p])

        x = np.full(4, 0.2)
        a = attacks.nes_gradient_estimate(prob_oracle, x, 0, 1e-3, 64, np.random.default_rng(77))
        b = attacks.nes_gradient_estimate(prob_oracle, x, 0, 1e-3, 64, np.random.default_rng(77))
        assert np.array_equal(a, b)

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            attacks.nes_gradient_estimate(lambda q: q, np.zeros(2), 0, 0.0, 5, np.random.default_rng(0))
        with pytest.raises(ValueError):
            attacks.nes_gradient_estimate(lambda q: q, np.zeros(2), 0, 0.1, 0, np.random.default_rng(0))


class TestRandomSignStep:
    def _state(self):
        x0 = np.full(5, 0.5)
        return attacks.AttackState(x0, x0.copy(), true_label=1)

    def test_stubborn_oracle_never_moves_kept_state(self):
        cfg = attacks.AttackConfig(eps=0.1, alpha=0.02)
        state = self._state()
        for _ in range(10):
            state = attacks.random_sign_step(lambda q: 1, state, cfg, np.random.default_rng(4))
        assert np.array_equal(state.x_t, state.x0)
        assert state.steps_taken == 10

    def test_always_flipping_oracle_keeps_first_proposal(self):
        cfg = attacks.AttackConfig(eps=0.1, alpha=0.02)
        state = attacks.random_sign_step(lambda q: 0, self._state(), cfg, np.random.default_rng(4))
        assert not np.array_equal(state.x_t, state.x0)
        assert state.within_budget(cfg.eps)
        assert state.steps_taken == 1

    def test_seeded_trajectory_deterministic(self):
        cfg = attacks.AttackConfig(eps=0.1, alpha=0.02)
        oracle = lambda q: int(q.sum() > 2.55)  # flips depending on the proposal
        runs = []
        for _ in range(2):
            state = self._state()
            rng = np.random.default_rng(123)
            for _ in range(8):
                state = attacks.random_sign_step(oracle, state, cfg, rng)
            runs.append(state.x_t.copy())
        assert np.array_equal(runs[0], runs[1])


class TestAttackConfig:
    def test_alpha_beyond_twice_eps_warns(self):
        with pytest.warns(UserWarning, match="alpha"):
            attacks.AttackConfig(eps=0.01, alpha=0.05)

    def test_rejects_invalid(self):
        with pytest.raises(ValueError):
            attacks.AttackConfig(eps=-0.1, alpha=0.01)
        with pytest.raises(ValueError):
            attacks.AttackConfig(eps=0.1, alpha=0.0)
        with pytest.raises(ValueError):
            attacks.AttackConfig(eps=0.1, alpha=0.01, max_steps=0)
        with pytest.raises(ValueError):
            attacks.AttackConfig(eps=0.1, alpha=0.01, norm="l2")

    def test_policy_validation(self):
        with pytest.raises(ValueError):
            attacks.AttackerPolicy("teleport")
        with pytest.raises(ValueError):
            attacks.AttackerPolicy("nes_softbox", sigma=0.0)
