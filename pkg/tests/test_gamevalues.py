import numpy as np
import pytest

from conicgames import catalog
from conicgames.conicsolve import Cone, ConicProgram, solve, verify_certificate
from conicgames.errors import CapExceededError
from conicgames.gamecore import (Game, Scenario, deterministic_correlation,
                                 game_from_dict, game_to_dict, j_constraints,
                                 symmetric_cost, win_probability)
from conicgames.gamevalues import (ValueChain, dual_value_dnn, perfect_strategy,
                                   value_chain, value_classical, value_dnn,
                                   value_nosignaling, value_sdp1,
                                   value_unrestricted, _value_program)

CHSH_VALUE = np.cos(np.pi / 8) ** 2


def zero_game():
    return Game(Scenario(2, 2, 2, 2), np.full((2, 2), 0.25),
                np.zeros((2, 2, 2, 2), dtype=int))


def dead_pair_game():
    # one question pair of mass 1/4 cannot be won; the rest always can:
    # the unrestricted value is 3/4 by the closed-form sum
    V = np.ones((2, 2, 2, 2), dtype=int)
    V[:, :, 1, 1] = 0
    return Game(Scenario(2, 2, 2, 2), np.full((2, 2), 0.25), V)


class TestUnrestricted:
    def test_chsh(self, chsh):
        assert value_unrestricted(chsh).value == 1.0

    def test_zero_game(self):
        assert value_unrestricted(zero_game()).value == 0.0

    def test_dead_pair(self):
        assert value_unrestricted(dead_pair_game()).value == pytest.approx(0.75, abs=1e-15)

    def test_optimizer_attains_value(self, rng):
        for _ in range(5):
            g = catalog.random_game(Scenario(2, 2, 2, 2), rng)
            rep = value_unrestricted(g)
            assert win_probability(g, rep.optimizer) == pytest.approx(rep.value, abs=1e-12)

    def test_matches_conic_solve(self, rng):
        # closed form against the solver over the nonnegative cone
        for _ in range(3):
            g = catalog.random_game(Scenario(2, 2, 2, 2), rng)
            result = solve(_value_program(g, Cone.NONNEG))
            assert abs(result.value - value_unrestricted(g).value) <= 1e-6


class TestClassical:
    def test_chsh(self, chsh):
        rep = value_classical(chsh)
        assert rep.value == pytest.approx(0.75, abs=1e-15)

    def test_all_win(self):
        assert value_classical(catalog.allwin_game()).value == pytest.approx(1.0)

    def test_single_question_identity(self):
        V = np.eye(2, dtype=int).reshape(2, 2, 1, 1)
        g = Game(Scenario(1, 1, 2, 2), np.array([[1.0]]), V)
        rep = value_classical(g)
        assert rep.value == pytest.approx(1.0)
        alpha, beta = rep.optimizer
        assert alpha[0] == beta[0]

    def test_matches_pair_enumeration(self, rng):
        # oracle identity: the maximum of win_probability over all
        # deterministic pairs
        from conicgames.corrsets import enumerate_deterministic
        for _ in range(5):
            g = catalog.random_game(Scenario(2, 2, 2, 2), rng)
            brute = max(win_probability(g, deterministic_correlation(g.scenario, a, b))
                        for a, b in enumerate_deterministic(g.scenario))
            rep = value_classical(g)
            assert rep.value == pytest.approx(brute, abs=1e-12)
            alpha, beta = rep.optimizer
            attained = win_probability(g, deterministic_correlation(g.scenario, alpha, beta))
            assert attained == pytest.approx(rep.value, abs=1e-12)

    def test_cap(self):
        g = catalog.allwin_game(Scenario(13, 1, 2, 2))
        with pytest.raises(CapExceededError):
            value_classical(g)


class TestNoSignaling:
    def test_chsh_is_one(self, chsh):
        rep = value_nosignaling(chsh)
        assert rep.status == "OPTIMAL"
        assert rep.value == pytest.approx(1.0, abs=1e-5)

    def test_zero_game(self):
        assert value_nosignaling(zero_game()).value == pytest.approx(0.0, abs=1e-6)

    def test_dominates_classical_on_random_games(self, rng):
        for _ in range(5):
            g = catalog.random_game(Scenario(2, 2, 2, 2), rng)
            assert value_nosignaling(g).value >= value_classical(g).value - 1e-6

    def test_optimizer_is_nosignaling_correlation(self, chsh):
        from conicgames.corrsets import is_correlation, is_nosignaling
        p = value_nosignaling(chsh).optimizer
        assert is_correlation(np.maximum(p, 0) / p.sum(axis=(0, 1), keepdims=True))
        assert is_nosignaling(p, atol=1e-5)


class TestDnn:
    def test_chsh(self, chsh):
        rep = value_dnn(chsh)
        assert rep.status == "OPTIMAL"
        assert rep.value == pytest.approx(CHSH_VALUE, abs=1e-4)

    def test_all_win(self):
        assert value_dnn(catalog.allwin_game()).value == pytest.approx(1.0, abs=1e-5)

    def test_between_classical_and_nosignaling(self, rng):
        for _ in range(5):
            g = catalog.random_game(Scenario(2, 2, 2, 2), rng)
            w = value_dnn(g).value
            assert value_classical(g).value - 1e-6 <= w
            assert w <= value_nosignaling(g).value + 1e-6

    def test_certificate_verifies(self, chsh):
        rep = value_dnn(chsh)
        prog = _value_program(chsh, Cone.DNN)
        ok, bound = verify_certificate(rep.certificate, prog, tol=1e-6)
        assert ok
        assert bound >= rep.value - 1e-6


class TestSdp1:
    def test_chsh(self, chsh):
        # the first-level relaxation is tight for this game; cross-check
        # against the doubly nonnegative value as well
        rep = value_sdp1(chsh)
        assert rep.value == pytest.approx(CHSH_VALUE, abs=1e-4)
        assert rep.value >= value_dnn(chsh).value - 1e-5

    def test_all_win(self):
        assert value_sdp1(catalog.allwin_game()).value == pytest.approx(1.0, abs=1e-5)

    def test_dominates_dnn(self, rng):
        for _ in range(5):
            g = catalog.random_game(Scenario(2, 2, 2, 2), rng)
            assert value_sdp1(g).value >= value_dnn(g).value - 1e-6


class TestDualValue:
    def test_zero_game_zero_certificate(self):
        bound, cert = dual_value_dnn(zero_game())
        assert abs(bound) <= 1e-6
        assert np.abs(cert.v).max() <= 1e-5

    def test_chsh_bound(self, chsh):
        bound, cert = dual_value_dnn(chsh)
        assert bound == pytest.approx(CHSH_VALUE, abs=1e-4)

    def test_weak_duality_sweep(self, rng):
        for _ in range(5):
            g = catalog.random_game(Scenario(2, 2, 2, 2), rng)
            bound, _ = dual_value_dnn(g)
            assert bound >= value_dnn(g).value - 1e-5


class TestPerfectStrategy:
    def test_all_win_every_cone(self):
        g = catalog.allwin_game()
        for cone in (Cone.CLASSICAL, Cone.NONNEG, Cone.NSO, Cone.DNN):
            assert perfect_strategy(g, cone).status == "IN"

    def test_chsh_nso_feasible(self, chsh):
        # the extremal box wins with certainty, so a perfect no-signaling
        # strategy exists
        assert perfect_strategy(chsh, Cone.NSO).status == "IN"

    def test_chsh_dnn_infeasible(self, chsh):
        v = perfect_strategy(chsh, Cone.DNN)
        assert v.status == "OUT"
        assert v.distance > 1e-4

    def test_classical_iff_value_one(self, rng):
        for _ in range(10):
            g = catalog.random_game(Scenario(2, 2, 2, 2), rng)
            is_perfect = perfect_strategy(g, Cone.CLASSICAL).status == "IN"
            assert is_perfect == (value_classical(g).value == 1.0)


class TestValueChain:
    def test_chsh(self, chsh):
        chain = value_chain(chsh)
        assert chain.wC == pytest.approx(0.75, abs=1e-12)
        assert chain.wDNN == pytest.approx(CHSH_VALUE, abs=1e-4)
        assert chain.wSDP1 == pytest.approx(CHSH_VALUE, abs=1e-4)
        assert chain.wNS == pytest.approx(1.0, abs=1e-5)
        assert chain.wP == 1.0

    def test_all_win(self):
        chain = value_chain(catalog.allwin_game())
        for value in (chain.wC, chain.wDNN, chain.wSDP1, chain.wNS, chain.wP):
            assert value == pytest.approx(1.0, abs=1e-5)

    def test_inequality_rows(self, chsh):
        rows = value_chain(chsh).inequalities()
        assert len(rows) == 4
        assert all(ok for _, _, _, ok in rows)

    def test_violated_chain_raises(self):
        chain = ValueChain(wC=0.9, wDNN=0.5, wSDP1=0.5, wNS=0.5, wP=1.0)
        rows = chain.inequalities()
        assert not rows[0][3]

    def test_pi_rescaling_is_invariant(self, chsh):
        # scale pi, let the loader renormalize: every value must agree
        data = game_to_dict(chsh)
        data["pi"] = (np.array(data["pi"]) * (1 + 9e-10)).tolist()
        g2 = game_from_dict(data)
        a = value_chain(chsh, check=False)
        b = value_chain(g2, check=False)
        for name in ("wC", "wDNN", "wSDP1", "wNS", "wP"):
            assert abs(getattr(a, name) - getattr(b, name)) <= 1e-9
