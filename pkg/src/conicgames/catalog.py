"""Built-in example games, correlations, strategies, graphs, and CSPs.

These back the CLI's `examples` subcommand and the test/property suites, so
acceptance runs need no external fixtures.
"""

from __future__ import annotations

import numpy as np

from .gamecore import Game, QuantumStrategy, Scenario, save_game
from .syncgraph import CSP, CSPConstraint, Graph, save_csp, save_graph
from .corrsets import save_correlation

__all__ = [
    "allwin_game",
    "chsh_game",
    "chsh_optimal_strategy",
    "complete_graph",
    "cycle_graph",
    "diagonal_strategy",
    "empty_graph",
    "path_graph",
    "pr_box",
    "random_binary_csp",
    "random_csp",
    "random_game",
    "triangle_two_coloring_csp",
    "write_example_files",
]


def chsh_game() -> Game:
    """Binary questions and answers, uniform questions, win iff a xor b = s and t."""
    V = np.zeros((2, 2, 2, 2), dtype=np.uint8)
    for a in range(2):
        for b in range(2):
            for s in range(2):
                for t in range(2):
                    V[a, b, s, t] = 1 if (a ^ b) == (s & t) else 0
    return Game(Scenario(2, 2, 2, 2), np.full((2, 2), 0.25), V)


def allwin_game(scenario: Scenario = Scenario(2, 2, 2, 2)) -> Game:
    """Every answer wins every question pair."""
    sc = scenario
    pi = np.full((sc.nS, sc.nT), 1.0 / (sc.nS * sc.nT))
    V = np.ones((sc.nA, sc.nB, sc.nS, sc.nT), dtype=np.uint8)
    return Game(sc, pi, V)


def pr_box() -> np.ndarray:
    """The extremal no-signaling box winning the CHSH predicate with certainty."""
    p = np.zeros((2, 2, 2, 2))
    for s in range(2):
        for t in range(2):
            for a in range(2):
                p[a, a ^ (s & t), s, t] = 0.5
    return p


def _projector(angle: float) -> np.ndarray:
    v = np.array([np.cos(angle), np.sin(angle)])
    return np.outer(v, v)


def chsh_optimal_strategy() -> QuantumStrategy:
    """The canonical optimal CHSH strategy in shared-root form.

    Measurement bases at angles (0, pi/4) for Alice and (pi/8, -pi/8) for
    Bob, conjugated by the square root of K = I/sqrt(2); wins with
    probability cos^2(pi/8).
    """
    K = np.eye(2, dtype=complex) / np.sqrt(2)
    alice_angles = [0.0, np.pi / 4]
    bob_angles = [np.pi / 8, -np.pi / 8]
    Xops = np.zeros((2, 2, 2, 2), dtype=complex)
    Yops = np.zeros((2, 2, 2, 2), dtype=complex)
    for s, base in enumerate(alice_angles):
        for a in range(2):
            Xops[s, a] = _projector(base + a * np.pi / 2) / np.sqrt(2)
    for t, base in enumerate(bob_angles):
        for b in range(2):
            Yops[t, b] = _projector(base + b * np.pi / 2) / np.sqrt(2)
    return QuantumStrategy(K=K, Xops=Xops, Yops=Yops)


def diagonal_strategy(x_tables: np.ndarray, y_tables: np.ndarray,
                      weights: np.ndarray) -> QuantumStrategy:
    """Classical (shared-randomness) strategy as diagonal operators.

    ``weights[i]`` is the probability of shared sample i, ``x_tables[s, a, i]``
    and ``y_tables[t, b, i]`` the local response distributions given i. The
    resulting correlation is the classical mixture sum_i w_i x^s_a,i y^t_b,i.
    """
    weights = np.asarray(weights, dtype=float)
    x_tables = np.asarray(x_tables, dtype=float)
    y_tables = np.asarray(y_tables, dtype=float)
    d = weights.size
    K = np.diag(np.sqrt(weights)).astype(complex)
    nS, nA = x_tables.shape[:2]
    nT, nB = y_tables.shape[:2]
    Xops = np.zeros((nS, nA, d, d), dtype=complex)
    Yops = np.zeros((nT, nB, d, d), dtype=complex)
    for s in range(nS):
        for a in range(nA):
            Xops[s, a] = np.diag(np.sqrt(weights) * x_tables[s, a])
    for t in range(nT):
        for b in range(nB):
            Yops[t, b] = np.diag(np.sqrt(weights) * y_tables[t, b])
    return QuantumStrategy(K=K, Xops=Xops, Yops=Yops)


def random_game(scenario: Scenario, rng: np.random.Generator) -> Game:
    """Random question distribution and 0/1 predicate."""
    sc = scenario
    pi = rng.random((sc.nS, sc.nT)) + 0.05
    pi /= pi.sum()
    V = rng.integers(0, 2, size=(sc.nA, sc.nB, sc.nS, sc.nT)).astype(np.uint8)
    return Game(sc, pi, V)


def cycle_graph(n: int) -> Graph:
    return Graph(n, frozenset((i, (i + 1) % n) for i in range(n))) if n >= 3 else path_graph(n)


def path_graph(n: int) -> Graph:
    return Graph(n, frozenset((i, i + 1) for i in range(n - 1)))


def complete_graph(n: int) -> Graph:
    return Graph(n, frozenset((i, j) for i in range(n) for j in range(i + 1, n)))


def empty_graph(n: int) -> Graph:
    return Graph(n, frozenset())


def triangle_two_coloring_csp() -> CSP:
    """Three variables on two values, all pairs must differ: unsatisfiable."""
    differ = ((0, 1), (1, 0))
    return CSP(domains=(2, 2, 2),
               constraints=tuple(CSPConstraint(scope=pair, allowed=differ)
                                 for pair in ((0, 1), (1, 2), (0, 2))))


def random_binary_csp(rng: np.random.Generator, max_vars: int = 3,
                      max_domain: int = 3) -> CSP:
    """Random binary CSP within the given sizes (at least two variables)."""
    n = int(rng.integers(2, max_vars + 1))
    domains = tuple(int(rng.integers(1, max_domain + 1)) for _ in range(n))
    constraints = []
    n_cons = int(rng.integers(1, n * (n - 1) // 2 + 2))
    for _ in range(n_cons):
        u = int(rng.integers(0, n))
        v = int(rng.integers(0, n))
        if u == v:
            continue
        full = [(a, b) for a in range(domains[u]) for b in range(domains[v])]
        keep = [t for t in full if rng.random() < 0.55]
        constraints.append(CSPConstraint(scope=(u, v), allowed=tuple(keep)))
    return CSP(domains=domains, constraints=tuple(constraints))


def random_csp(rng: np.random.Generator, max_vars: int = 3,
               max_domain: int = 3, max_arity: int = 3) -> CSP:
    """Random CSP with arities up to ``max_arity`` (not necessarily binary)."""
    n = int(rng.integers(1, max_vars + 1))
    domains = tuple(int(rng.integers(1, max_domain + 1)) for _ in range(n))
    constraints = []
    for _ in range(int(rng.integers(1, 4))):
        arity = int(rng.integers(1, min(max_arity, n) + 1))
        scope = tuple(int(v) for v in rng.choice(n, size=arity, replace=False))
        full = list(np.ndindex(*(domains[v] for v in scope)))
        keep = [tuple(int(x) for x in t) for t in full if rng.random() < 0.6]
        constraints.append(CSPConstraint(scope=scope, allowed=tuple(keep)))
    return CSP(domains=domains, constraints=tuple(constraints))


def write_example_files(directory) -> list:
    """Write the bundled example inputs; returns the created paths."""
    from pathlib import Path

    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    created = []
    for name, writer, obj in (
            ("chsh.json", save_game, chsh_game()),
            ("allwin.json", save_game, allwin_game()),
            ("prbox.json", save_correlation, pr_box()),
            ("c5.json", save_graph, cycle_graph(5)),
            ("k2.json", save_graph, complete_graph(2)),
            ("triangle2col.json", save_csp, triangle_two_coloring_csp()),
    ):
        path = out / name
        writer(obj, path)
        created.append(path)
    return created
