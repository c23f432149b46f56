import itertools

import numpy as np
import pytest

from conicgames import catalog
from conicgames.conicsolve import Cone
from conicgames.errors import ParseError, PreconditionError
from conicgames.gamecore import Scenario, deterministic_correlation, win_probability
from conicgames.syncgraph import (CSP, CSPConstraint, Graph, SyncMatrix,
                                  chromatic_number, classical_homomorphism,
                                  complement, csp_binarize, csp_from_dict,
                                  csp_game, csp_satisfiable, csp_to_dict,
                                  graph_from_dict, homomorphism_game,
                                  independence_number, is_synchronous,
                                  quantum_graph_bounds,
                                  quantum_homomorphism_relaxation, sync_matrix,
                                  sync_membership, sync_perfect, sync_value)


class TestIsSynchronous:
    def test_equal_deterministic_strategies(self):
        p = deterministic_correlation(Scenario(2, 2, 2, 2), [0, 1], [0, 1])
        assert is_synchronous(p)

    def test_unequal_deterministic_strategies(self):
        p = deterministic_correlation(Scenario(2, 2, 2, 2), [0, 1], [0, 0])
        assert not is_synchronous(p)

    def test_uniform_not_synchronous(self):
        assert not is_synchronous(np.full((2, 2, 2, 2), 0.25))

    def test_asymmetric_scenario_rejected(self):
        with pytest.raises(PreconditionError, match="identical question"):
            is_synchronous(np.full((2, 3, 2, 2), 1 / 6))


class TestSyncMembership:
    def test_constant_function_in_both(self):
        p = deterministic_correlation(Scenario(2, 2, 2, 2), [0, 0], [0, 0])
        P = sync_matrix(p)
        assert sync_membership(P, Cone.DNN).status == "IN"
        assert sync_membership(P, Cone.CLASSICAL).status == "IN"

    def test_uniform_function_mixture_classical(self, rng):
        sc = Scenario(2, 2, 2, 2)
        fs = list(itertools.product(range(2), repeat=2))
        p = sum(deterministic_correlation(sc, f, f) for f in fs) / len(fs)
        P = sync_matrix(p)
        assert sync_membership(P, Cone.CLASSICAL).status == "IN"

    def test_synchronous_quantum_diagonal_in_dnn(self, rng):
        # diagonal strategies with identical tables on both sides are
        # synchronous; their correlation matrix sits in the DNN slice
        w = rng.dirichlet(np.ones(3))
        tables = rng.dirichlet(np.ones(2), size=(2, 3)).transpose(0, 2, 1)
        det_tables = (tables == tables.max(axis=1, keepdims=True)).astype(float)
        q = catalog.diagonal_strategy(det_tables, det_tables, w)
        from conicgames.gamecore import evaluate_quantum_strategy
        p = evaluate_quantum_strategy(q)
        assert is_synchronous(p)
        assert sync_membership(sync_matrix(p), Cone.DNN).status == "IN"

    def test_sync_matrix_rejects_nonsynchronous(self):
        with pytest.raises(PreconditionError, match="not synchronous"):
            sync_matrix(np.full((2, 2, 2, 2), 0.25))


class TestSyncValue:
    def test_chsh_classical(self, chsh):
        assert sync_value(chsh, Cone.CLASSICAL).value == pytest.approx(0.75, abs=1e-12)

    def test_chsh_dnn_collapses_to_classical(self, chsh):
        # four (question, answer) pairs: the doubly nonnegative slice is the
        # classical one, so the relaxation cannot beat 3/4
        rep = sync_value(chsh, Cone.DNN)
        assert rep.value == pytest.approx(0.75, abs=1e-5)

    def test_all_win(self):
        g = catalog.allwin_game()
        assert sync_value(g, Cone.CLASSICAL).value == pytest.approx(1.0)
        assert sync_value(g, Cone.DNN).value == pytest.approx(1.0, abs=1e-5)

    def test_small_scenario_collapse_random(self, rng):
        for _ in range(3):
            g = catalog.random_game(Scenario(2, 2, 2, 2), rng)
            classical = sync_value(g, Cone.CLASSICAL).value
            relaxed = sync_value(g, Cone.DNN).value
            assert relaxed == pytest.approx(classical, abs=1e-5)


class TestSyncPerfect:
    def test_trivially_winnable(self):
        V = np.ones((2, 2, 2, 2), dtype=int)
        for s in range(2):
            V[0, 1, s, s] = V[1, 0, s, s] = 0
        g = catalog.allwin_game()
        g = type(g)(g.scenario, g.pi, V)
        assert sync_perfect(g, Cone.CLASSICAL).status == "IN"
        assert sync_perfect(g, Cone.DNN).status == "IN"

    def test_k2_one_coloring_infeasible_everywhere(self):
        g = homomorphism_game(catalog.complete_graph(2), catalog.complete_graph(1))
        assert sync_perfect(g, Cone.CLASSICAL).status == "OUT"
        v = sync_perfect(g, Cone.DNN)
        assert v.status == "OUT"
        assert v.distance > 1e-4

    def test_k3_three_coloring_feasible(self):
        g = homomorphism_game(catalog.complete_graph(3), catalog.complete_graph(3))
        assert sync_perfect(g, Cone.CLASSICAL).status == "IN"
        assert sync_perfect(g, Cone.DNN).status == "IN"

    def test_rejects_non_synchronous_game(self):
        V = np.ones((2, 2, 2, 2), dtype=int)  # allows disagreeing answers
        g = catalog.allwin_game()
        with pytest.raises(PreconditionError, match="distinct answers"):
            sync_perfect(type(g)(g.scenario, g.pi, V), Cone.CLASSICAL)


class TestHomomorphismGame:
    def test_k2_k2_perfect_strategies_are_proper_colorings(self):
        g = homomorphism_game(catalog.complete_graph(2), catalog.complete_graph(2))
        winners = []
        for f in itertools.product(range(2), repeat=2):
            p = deterministic_correlation(g.scenario, f, f)
            if win_probability(g, p) == pytest.approx(1.0, abs=1e-12):
                winners.append(f)
        assert sorted(winners) == [(0, 1), (1, 0)]

    def test_k3_to_k2_has_no_perfect_function(self):
        g = homomorphism_game(catalog.complete_graph(3), catalog.complete_graph(2))
        for f in itertools.product(range(2), repeat=3):
            p = deterministic_correlation(g.scenario, f, f)
            assert win_probability(g, p) < 1.0 - 1e-9

    def test_single_vertex_any_constant_wins(self):
        g = homomorphism_game(Graph(1, frozenset()), catalog.complete_graph(3))
        for a in range(3):
            p = deterministic_correlation(g.scenario, [a], [a])
            assert win_probability(g, p) == pytest.approx(1.0)


class TestClassicalHomomorphism:
    def test_c5_to_k3(self):
        assert classical_homomorphism(catalog.cycle_graph(5), catalog.complete_graph(3))

    def test_c5_to_k2(self):
        assert not classical_homomorphism(catalog.cycle_graph(5), catalog.complete_graph(2))

    def test_identity(self):
        G = catalog.cycle_graph(6)
        assert classical_homomorphism(G, G)

    def test_matches_brute_force_enumeration(self):
        # independent oracle: enumerate all maps for small pairs
        H, G = catalog.cycle_graph(5), catalog.complete_graph(3)
        brute = any(all(G.adjacent(f[u], f[v]) for u, v in H.edges)
                    for f in itertools.product(range(G.n), repeat=H.n))
        assert classical_homomorphism(H, G) == brute
        H2, G2 = catalog.cycle_graph(5), catalog.complete_graph(2)
        brute2 = any(all(G2.adjacent(f[u], f[v]) for u, v in H2.edges)
                     for f in itertools.product(range(G2.n), repeat=H2.n))
        assert classical_homomorphism(H2, G2) == brute2

    def test_agrees_with_game_search(self):
        for H, G in ((catalog.cycle_graph(5), catalog.complete_graph(3)),
                     (catalog.complete_graph(3), catalog.complete_graph(2)),
                     (catalog.path_graph(3), catalog.complete_graph(2))):
            game_verdict = sync_perfect(homomorphism_game(H, G), Cone.CLASSICAL)
            assert (game_verdict.status == "IN") == classical_homomorphism(H, G)


class TestQuantumHomomorphism:
    def test_classical_witness_embeds(self):
        assert quantum_homomorphism_relaxation(
            catalog.cycle_graph(5), catalog.complete_graph(3)).status == "IN"

    def test_edge_to_point_infeasible(self):
        v = quantum_homomorphism_relaxation(catalog.complete_graph(2),
                                            catalog.complete_graph(1))
        assert v.status == "OUT"

    def test_c5_to_k2_infeasible(self):
        # recorded relaxation verdict: the solver certifies infeasibility
        v = quantum_homomorphism_relaxation(catalog.cycle_graph(5),
                                            catalog.complete_graph(2))
        assert v.status == "OUT"
        assert v.distance > 1e-4


class TestGraphParameters:
    def test_c5(self):
        assert chromatic_number(catalog.cycle_graph(5)) == 3
        assert independence_number(catalog.cycle_graph(5)) == 2

    def test_k4(self):
        assert chromatic_number(catalog.complete_graph(4)) == 4
        assert independence_number(catalog.complete_graph(4)) == 1

    def test_empty_graph(self):
        assert chromatic_number(catalog.empty_graph(3)) == 1
        assert independence_number(catalog.empty_graph(3)) == 3

    def test_qbound_chromatic_c5(self):
        assert quantum_graph_bounds(catalog.cycle_graph(5), "CHROMATIC", 3).status == "IN"

    def test_qbound_k2_k1_infeasible(self):
        assert quantum_graph_bounds(catalog.complete_graph(2), "CHROMATIC", 1).status == "OUT"

    def test_qbound_monotone_in_k(self):
        seen_feasible = False
        for k in range(1, 6):
            status = quantum_graph_bounds(catalog.cycle_graph(5), "CHROMATIC", k).status
            if status == "IN":
                seen_feasible = True
            else:
                assert not seen_feasible, f"feasibility regressed at k={k}"
        assert seen_feasible

    def test_qbound_independence(self):
        # alpha(C5) = 2: the relaxation must accept k = 2 at least
        assert quantum_graph_bounds(catalog.cycle_graph(5), "INDEPENDENCE", 2).status == "IN"
        assert quantum_graph_bounds(catalog.complete_graph(2), "INDEPENDENCE", 2).status == "OUT"


class TestCsp:
    def test_triangle_two_coloring_unsat(self):
        assert not csp_satisfiable(catalog.triangle_two_coloring_csp())

    def test_path_two_coloring_sat(self):
        differ = ((0, 1), (1, 0))
        c = CSP(domains=(2, 2, 2),
                constraints=(CSPConstraint((0, 1), differ),
                             CSPConstraint((1, 2), differ)))
        assert csp_satisfiable(c)

    def test_empty_constraints_sat(self):
        assert csp_satisfiable(CSP(domains=(2, 2), constraints=()))

    def test_binarize_single_constraint(self):
        c = CSP(domains=(2, 2, 2),
                constraints=(CSPConstraint((0, 1, 2), ((0, 0, 0), (1, 1, 0))),))
        b = csp_binarize(c)
        assert b.variables == 1
        assert b.domains == (2,)
        assert not b.constraints
        assert csp_satisfiable(b)

    def test_binarize_empty_allowed_unsat(self):
        c = CSP(domains=(2,), constraints=(CSPConstraint((0,), ()),))
        b = csp_binarize(c)
        assert b.domains == (0,)
        assert not csp_satisfiable(b)

    def test_binarize_parity_with_pins(self):
        # x ^ y ^ z = 0 plus unary pins; enumerate all 8 assignments as the
        # oracle on the original instance
        parity = tuple(t for t in itertools.product(range(2), repeat=3)
                       if (t[0] ^ t[1] ^ t[2]) == 0)
        for pin_x, pin_y, want in (((0,), (0,), True), ((1,), (0,), True),
                                   ((0,), (1,), True)):
            c = CSP(domains=(2, 2, 2),
                    constraints=(CSPConstraint((0, 1, 2), parity),
                                 CSPConstraint((0,), (pin_x,)),
                                 CSPConstraint((1,), (pin_y,))))
            brute = any((t[0] ^ t[1] ^ t[2]) == 0 and (t[0],) == pin_x and (t[1],) == pin_y
                        for t in itertools.product(range(2), repeat=3))
            assert brute == want
            assert csp_satisfiable(c) == brute
            assert csp_satisfiable(csp_binarize(c)) == brute

    def test_binarize_preserves_satisfiability_on_already_binary(self, rng):
        for _ in range(10):
            c = catalog.random_binary_csp(rng)
            assert csp_satisfiable(csp_binarize(c)) == csp_satisfiable(c)

    def test_binarize_preserves_satisfiability_random(self, rng):
        for _ in range(10):
            c = catalog.random_csp(rng)
            assert csp_satisfiable(csp_binarize(c)) == csp_satisfiable(c)


class TestCspGame:
    def test_triangle_game_has_no_perfect_classical(self):
        g = csp_game(catalog.triangle_two_coloring_csp())
        assert sync_perfect(g, Cone.CLASSICAL).status == "OUT"

    def test_single_variable_single_value(self):
        c = CSP(domains=(1,), constraints=())
        g = csp_game(c)
        assert sync_perfect(g, Cone.CLASSICAL).status == "IN"

    def test_out_of_domain_answers_lose(self):
        c = CSP(domains=(1, 2), constraints=())
        g = csp_game(c)
        # answer 1 is outside variable 0's domain
        p = deterministic_correlation(g.scenario, [1, 1], [1, 1])
        assert win_probability(g, p) < 1.0

    def test_equivalence_on_random_binary_csps(self, rng):
        for _ in range(15):
            c = catalog.random_binary_csp(rng)
            game_sat = sync_perfect(csp_game(c), Cone.CLASSICAL).status == "IN"
            assert game_sat == csp_satisfiable(c)

    def test_rejects_nonbinary(self):
        c = CSP(domains=(2, 2, 2),
                constraints=(CSPConstraint((0, 1, 2), ((0, 0, 0),)),))
        with pytest.raises(PreconditionError, match="binary"):
            csp_game(c)

    def test_perfect_strategies_are_synchronous(self, rng):
        # a perfect strategy of a synchronous game never disagrees on a
        # repeated question
        for _ in range(10):
            c = catalog.random_binary_csp(rng)
            g = csp_game(c)
            verdict = sync_perfect(g, Cone.CLASSICAL)
            if verdict.status != "IN":
                continue
            n = g.scenario.nS * g.scenario.nA
            P = verdict.witness
            p = np.transpose(P.reshape(g.scenario.nS, g.scenario.nA,
                                       g.scenario.nS, g.scenario.nA), (1, 3, 0, 2))
            assert is_synchronous(p)
            assert win_probability(g, p) == pytest.approx(1.0, abs=1e-12)


class TestGraphFiles:
    def test_round_trip(self):
        G = catalog.cycle_graph(5)
        assert graph_from_dict({"n": 5, "edges": [list(e) for e in sorted(G.edges)]}) == G

    def test_loop_rejected(self):
        with pytest.raises(ParseError, match="loop"):
            graph_from_dict({"n": 2, "edges": [[0, 0]]})

    def test_csp_round_trip(self):
        c = catalog.triangle_two_coloring_csp()
        assert csp_from_dict(csp_to_dict(c)) == c
