"""Synchronous correlations and values, graph games, and the CSP compiler.

For scenarios with shared question and answer sets, synchronous correlations
(same question forces same answer) live in matrices indexed by
(question, answer) pairs alone: same-question diagonal blocks must be
diagonal, and block sums are all 1. Perfect-strategy questions for
synchronous games, graph homomorphism / coloring / independence problems,
and binary constraint satisfaction all reduce to feasibility over these
smaller matrix spaces. Exact classical answers come from backtracking
search; the quantum-side checks are relaxations over the doubly nonnegative
cone and certify only the infeasible direction (no oracle for the exact
quantum cone exists).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from math import prod
from typing import Optional

import numpy as np

from .conicsolve import (Cone, ConicProgram, DEFAULT_EPS_FEAS, DEFAULT_MAX_ITER,
                         DEFAULT_TOL, feasibility_distance, program_violation,
                         simplex_fit, solve)
from .corrsets import (ENUMERATION_CAP, MembershipVerdict, classify_distance,
                       scenario_of)
from .errors import CapExceededError, ParseError, PreconditionError
from .gamecore import Game, Scenario, cost_matrix, entry_matrix
from .gamevalues import ValueReport

__all__ = [
    "CSP",
    "CSPConstraint",
    "GRAPH_SEARCH_CAP",
    "Graph",
    "SyncMatrix",
    "chromatic_number",
    "classical_homomorphism",
    "complement",
    "csp_binarize",
    "csp_from_dict",
    "csp_game",
    "csp_satisfiable",
    "csp_to_dict",
    "graph_from_dict",
    "graph_to_dict",
    "homomorphism_game",
    "independence_number",
    "is_synchronous",
    "load_csp",
    "load_graph",
    "quantum_graph_bounds",
    "quantum_homomorphism_relaxation",
    "save_csp",
    "save_graph",
    "sync_matrix",
    "sync_membership",
    "sync_perfect",
    "sync_value",
]

GRAPH_SEARCH_CAP = 12  # vertex-count limit for the exact backtracking parameters
CSP_SEARCH_CAP = 1 << 20  # assignment-space limit for the backtracking oracle

_PI_POSITIVE = 1e-12
_SYNC_TOL = 1e-9


# ---------------------------------------------------------------------------
# synchronous correlations

def _require_symmetric(sc: Scenario) -> None:
    if sc.nS != sc.nT or sc.nA != sc.nB:
        raise PreconditionError(
            "synchronous analysis needs identical question and answer sets "
            f"(got {sc.nS}x{sc.nT} questions, {sc.nA}x{sc.nB} answers)")


def is_synchronous(p: np.ndarray) -> bool:
    """Same question forces same answer: p(a, a'|s, s) vanishes for a != a'."""
    sc = scenario_of(p)
    _require_symmetric(sc)
    p = np.asarray(p, dtype=float)
    worst = 0.0
    for s in range(sc.nS):
        block = p[:, :, s, s]
        off = block - np.diag(np.diag(block))
        worst = max(worst, float(np.abs(off).max()))
    return worst <= _SYNC_TOL


@dataclass(frozen=True)
class SyncMatrix:
    """A synchronous correlation arranged as the matrix P[(s,a),(s',a')].

    Rows are (question, answer) pairs in question-major order. The matrix is
    symmetric and its same-question diagonal blocks are diagonal.
    """

    questions: int
    answers: int
    P: np.ndarray

    def __post_init__(self):
        n = self.questions * self.answers
        P = np.asarray(self.P, dtype=float)
        if P.shape != (n, n):
            raise ValueError(f"P must have side {n}, got {P.shape}")
        if np.abs(P - P.T).max() > _SYNC_TOL:
            raise PreconditionError("synchronous matrix must be symmetric")
        for s in range(self.questions):
            blk = slice(s * self.answers, (s + 1) * self.answers)
            block = P[blk, blk]
            if np.abs(block - np.diag(np.diag(block))).max() > _SYNC_TOL:
                raise PreconditionError(
                    f"same-question block {s} has off-diagonal mass")
        sym = (P + P.T) / 2
        sym.flags.writeable = False
        object.__setattr__(self, "P", sym)


def sync_matrix(p: np.ndarray) -> SyncMatrix:
    """Arrange a synchronous correlation tensor as a SyncMatrix."""
    sc = scenario_of(p)
    _require_symmetric(sc)
    if not is_synchronous(p):
        raise PreconditionError("correlation is not synchronous")
    n = sc.nS * sc.nA
    P = np.transpose(np.asarray(p, dtype=float), (2, 0, 3, 1)).reshape(n, n)
    if np.abs(P - P.T).max() > _SYNC_TOL:
        raise PreconditionError("correlation is not exchange-symmetric")
    return SyncMatrix(questions=sc.nS, answers=sc.nA, P=P)


def _sync_j_constraints(nQ: int, nA: int) -> list:
    n = nQ * nA
    out = []
    for s in range(nQ):
        for s2 in range(s, nQ):
            A = np.zeros((n, n))
            rows = slice(s * nA, (s + 1) * nA)
            cols = slice(s2 * nA, (s2 + 1) * nA)
            if s == s2:
                A[rows, cols] = 1.0
            else:
                A[rows, cols] = 0.5
                A[cols, rows] = 0.5
            out.append((A, 1.0))
    return out


def _sync_diag_zeros(nQ: int, nA: int) -> list:
    n = nQ * nA
    out = []
    for s in range(nQ):
        for a in range(nA):
            for a2 in range(a + 1, nA):
                out.append((entry_matrix(n, s * nA + a, s * nA + a2), 0.0))
    return out


def _functions(nQ: int, nA: int):
    count = nA ** nQ
    if count > ENUMERATION_CAP:
        raise CapExceededError(
            f"function enumeration needs {count} > {ENUMERATION_CAP} candidates")
    return itertools.product(range(nA), repeat=nQ)


def _function_matrix(f, nQ: int, nA: int) -> np.ndarray:
    v = np.zeros(nQ * nA)
    for s, a in enumerate(f):
        v[s * nA + a] = 1.0
    return np.outer(v, v)


def sync_membership(P: SyncMatrix, cone: Cone,
                    eps_feas: float = DEFAULT_EPS_FEAS) -> MembershipVerdict:
    """Is P a synchronous correlation of the given kind?

    DNN: all block sums must be 1, diagonal blocks diagonal, and P itself
    doubly nonnegative; the matrix is fully pinned, so the verdict measures
    P's own violation of that system. CLASSICAL: P must be a convex
    combination of the rank-one 0/1 matrices of functions from questions to
    answers (solved over the mixture simplex).
    """
    nQ, nA = P.questions, P.answers
    if cone is Cone.DNN:
        constraints = _sync_j_constraints(nQ, nA) + _sync_diag_zeros(nQ, nA)
        prog = ConicProgram(dim=nQ * nA, objective=np.zeros_like(P.P),
                            constraints=tuple(constraints), cone=Cone.DNN)
        distance = program_violation(prog, P.P)
        return MembershipVerdict(classify_distance(distance, eps_feas), distance, P.P)
    if cone is Cone.CLASSICAL:
        columns = np.stack([_function_matrix(f, nQ, nA).ravel()
                            for f in _functions(nQ, nA)], axis=1)
        distance, weights = simplex_fit(columns, P.P.ravel(), stop=eps_feas / 10)
        return MembershipVerdict(classify_distance(distance, eps_feas), distance, weights)
    raise ValueError(f"sync_membership supports DNN and CLASSICAL; got {cone}")


def _sync_cost(g: Game) -> np.ndarray:
    C = cost_matrix(g)
    return (C + C.T) / 2


def sync_value(g: Game, cone: Cone, tol: float = DEFAULT_TOL,
               max_iter: int = DEFAULT_MAX_ITER) -> ValueReport:
    """Best winning probability using synchronous strategies only.

    DNN: maximize <(C + C^T)/2, X> over doubly nonnegative X with all block
    sums 1 and diagonal same-question blocks. CLASSICAL: exact maximum over
    functions f from questions to answers. For scenarios with at most 4
    (question, answer) pairs the two agree, the DNN slice being exactly the
    synchronous classical set there.
    """
    sc = g.scenario
    _require_symmetric(sc)
    nQ, nA = sc.nS, sc.nA
    if cone is Cone.DNN:
        constraints = _sync_j_constraints(nQ, nA) + _sync_diag_zeros(nQ, nA)
        prog = ConicProgram(dim=nQ * nA, objective=_sync_cost(g),
                            constraints=tuple(constraints), cone=Cone.DNN)
        result = solve(prog, tol=tol, max_iter=max_iter)
        return ValueReport(value=result.value, optimizer=result.X,
                           residuals=result.residuals, status=result.status)
    if cone is Cone.CLASSICAL:
        Vf = g.V.astype(float)
        best, best_f = -1.0, None
        for f in _functions(nQ, nA):
            value = sum(float(g.pi[s, s2]) * float(Vf[f[s], f[s2], s, s2])
                        for s in range(nQ) for s2 in range(nQ))
            if value > best:
                best, best_f = value, f
        return ValueReport(value=best, optimizer=best_f)
    raise ValueError(f"sync_value supports DNN and CLASSICAL; got {cone}")


def _require_synchronous_game(g: Game) -> None:
    sc = g.scenario
    _require_symmetric(sc)
    for s in range(sc.nS):
        if g.pi[s, s] <= _PI_POSITIVE:
            raise PreconditionError(f"pi({s},{s}) must be positive in a synchronous game")
        block = g.V[:, :, s, s]
        if (block - np.diag(np.diag(block)) != 0).any():
            raise PreconditionError(
                f"V allows distinct answers on the repeated question {s}")


def sync_perfect(g: Game, cone: Cone,
                 eps_feas: float = DEFAULT_EPS_FEAS) -> MembershipVerdict:
    """Does the synchronous game g admit a perfect strategy of the given kind?

    DNN: feasibility of block sums 1, diagonal same-question blocks, and
    zeros wherever a positively-weighted question pair would lose.
    CLASSICAL: exhaustive search over functions winning with certainty.
    """
    _require_synchronous_game(g)
    sc = g.scenario
    nQ, nA = sc.nS, sc.nA
    losing = (g.pi[None, None, :, :] > _PI_POSITIVE) & (g.V == 0)
    if cone is Cone.CLASSICAL:
        for f in _functions(nQ, nA):
            if not any(losing[f[s], f[s2], s, s2]
                       for s in range(nQ) for s2 in range(nQ)):
                return MembershipVerdict("IN", 0.0, _function_matrix(f, nQ, nA))
        return MembershipVerdict("OUT", 1.0, None)
    if cone is Cone.DNN:
        constraints = _sync_j_constraints(nQ, nA) + _sync_diag_zeros(nQ, nA)
        for s in range(nQ):
            for s2 in range(nQ):
                if g.pi[s, s2] <= _PI_POSITIVE:
                    continue
                for a in range(nA):
                    for a2 in range(nA):
                        if g.V[a, a2, s, s2] == 0 and (s != s2 or a != a2):
                            constraints.append((entry_matrix(
                                nQ * nA, s * nA + a, s2 * nA + a2), 0.0))
        prog = ConicProgram(dim=nQ * nA, objective=np.zeros((nQ * nA, nQ * nA)),
                            constraints=tuple(constraints), cone=Cone.DNN)
        distance, X = feasibility_distance(prog, target=eps_feas / 10)
        return MembershipVerdict(classify_distance(distance, eps_feas), distance, X)
    raise ValueError(f"sync_perfect supports DNN and CLASSICAL; got {cone}")


# ---------------------------------------------------------------------------
# graphs and graph games

@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices 0..n-1; edges as sorted pairs."""

    n: int
    edges: frozenset

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("vertex count must be nonnegative")
        norm = set()
        for e in self.edges:
            i, j = e
            if i == j:
                raise ValueError(f"loop at vertex {i} not allowed")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge {e} out of range")
            norm.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", frozenset(norm))

    def adjacent(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.edges


def complement(G: Graph) -> Graph:
    edges = {(i, j) for i in range(G.n) for j in range(i + 1, G.n)
             if not G.adjacent(i, j)}
    return Graph(G.n, frozenset(edges))


def homomorphism_game(H: Graph, G: Graph) -> Game:
    """The synchronous game whose perfect classical strategies are exactly
    the graph homomorphisms H -> G.

    Questions are vertices of H, answers vertices of G; the referee asks
    uniformly over repeated vertices and ordered adjacent pairs. Players
    lose on a repeated question with distinct answers, and on adjacent
    questions whose answers are equal or non-adjacent in G.
    """
    if H.n < 1:
        raise PreconditionError("H needs at least one vertex")
    if G.n < 1:
        raise PreconditionError("G needs at least one vertex")
    nQ, nA = H.n, G.n
    support = [(h, h) for h in range(nQ)]
    support += [(h, h2) for h in range(nQ) for h2 in range(nQ)
                if h != h2 and H.adjacent(h, h2)]
    pi = np.zeros((nQ, nQ))
    for h, h2 in support:
        pi[h, h2] = 1.0 / len(support)
    V = np.ones((nA, nA, nQ, nQ), dtype=np.uint8)
    for h in range(nQ):
        for g in range(nA):
            for g2 in range(nA):
                if g != g2:
                    V[g, g2, h, h] = 0
    for h in range(nQ):
        for h2 in range(nQ):
            if h != h2 and H.adjacent(h, h2):
                for g in range(nA):
                    for g2 in range(nA):
                        if g == g2 or not G.adjacent(g, g2):
                            V[g, g2, h, h2] = 0
    return Game(Scenario(nQ, nQ, nA, nA), pi, V)


def classical_homomorphism(H: Graph, G: Graph) -> bool:
    """Backtracking search for an adjacency-preserving map H -> G."""
    assignment = [-1] * H.n

    def extend(v: int) -> bool:
        if v == H.n:
            return True
        for image in range(G.n):
            if all(not H.adjacent(v, u) or G.adjacent(image, assignment[u])
                   for u in range(v)):
                assignment[v] = image
                if extend(v + 1):
                    return True
                assignment[v] = -1
        return False

    if H.n == 0:
        return True
    if G.n == 0:
        return False
    return extend(0)


def quantum_homomorphism_relaxation(H: Graph, G: Graph,
                                    eps_feas: float = DEFAULT_EPS_FEAS) -> MembershipVerdict:
    """Relaxed feasibility test for a quantum homomorphism H -> G.

    Feasibility of the perfect-strategy system of the homomorphism game over
    the doubly nonnegative cone. OUT certifies that no quantum homomorphism
    exists; IN is only the necessary-condition direction.
    """
    return sync_perfect(homomorphism_game(H, G), Cone.DNN, eps_feas=eps_feas)


def _complete_graph(k: int) -> Graph:
    return Graph(k, frozenset((i, j) for i in range(k) for j in range(i + 1, k)))


def chromatic_number(G: Graph) -> int:
    """Smallest k for which G maps homomorphically into the complete graph K_k."""
    if G.n > GRAPH_SEARCH_CAP:
        raise CapExceededError(f"graph exact search capped at {GRAPH_SEARCH_CAP} vertices")
    if G.n == 0:
        return 0
    for k in range(1, G.n + 1):
        if classical_homomorphism(G, _complete_graph(k)):
            return k
    return G.n


def independence_number(G: Graph) -> int:
    """Largest k for which K_k maps homomorphically into the complement of G."""
    if G.n > GRAPH_SEARCH_CAP:
        raise CapExceededError(f"graph exact search capped at {GRAPH_SEARCH_CAP} vertices")
    co = complement(G)
    best = 0
    for k in range(1, G.n + 1):
        if classical_homomorphism(_complete_graph(k), co):
            best = k
        else:
            break
    return best


def quantum_graph_bounds(G: Graph, parameter: str, k: int,
                         eps_feas: float = DEFAULT_EPS_FEAS) -> MembershipVerdict:
    """Relaxed feasibility of the bordered k-coloring / k-independence system.

    parameter is "CHROMATIC" or "INDEPENDENCE". The system lives on a
    bordered matrix over the doubly nonnegative cone: [0,0] = 1, each
    vertex/color group has block sum and border sum 1, and the structural
    zeros of the parameter. INFEASIBLE at k bounds the quantum parameter
    (chromatic > k, independence < k); FEASIBLE is necessary-only. For the
    chromatic side feasibility is monotone nondecreasing in k.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    parameter = parameter.upper()
    if parameter not in ("CHROMATIC", "INDEPENDENCE"):
        raise ValueError(f"parameter must be CHROMATIC or INDEPENDENCE, got {parameter!r}")
    if parameter == "CHROMATIC":
        groups, width = G.n, k  # rows (vertex, color), vertex-major
        def zero(g, i, g2, i2):
            return (g == g2 and i != i2) or (i == i2 and g != g2 and G.adjacent(g, g2))
    else:
        groups, width = k, G.n  # rows (color, vertex), color-major
        def zero(i, g, i2, g2):
            return (i == i2 and g != g2) or (i != i2 and (g == g2 or G.adjacent(g, g2)))
    n = groups * width + 1
    row = lambda grp, pos: 1 + grp * width + pos
    constraints = [(entry_matrix(n, 0, 0), 1.0)]
    for grp in range(groups):
        A = np.zeros((n, n))
        A[row(grp, 0):row(grp, width - 1) + 1, row(grp, 0):row(grp, width - 1) + 1] = 1.0
        constraints.append((A, 1.0))
        A = np.zeros((n, n))
        A[0, row(grp, 0):row(grp, width - 1) + 1] = 0.5
        A[row(grp, 0):row(grp, width - 1) + 1, 0] = 0.5
        constraints.append((A, 1.0))
    for grp in range(groups):
        for pos in range(width):
            for grp2 in range(grp, groups):
                for pos2 in range(width):
                    if grp == grp2 and pos2 <= pos:
                        continue
                    if zero(grp, pos, grp2, pos2):
                        constraints.append(
                            (entry_matrix(n, row(grp, pos), row(grp2, pos2)), 0.0))
    prog = ConicProgram(dim=n, objective=np.zeros((n, n)),
                        constraints=tuple(constraints), cone=Cone.DNN)
    distance, X = feasibility_distance(prog, target=eps_feas / 10)
    return MembershipVerdict(classify_distance(distance, eps_feas), distance, X)


# ---------------------------------------------------------------------------
# constraint satisfaction

@dataclass(frozen=True)
class CSPConstraint:
    """One relation: the variables in ``scope`` must take a tuple in ``allowed``."""

    scope: tuple
    allowed: tuple

    def __post_init__(self):
        scope = tuple(int(v) for v in self.scope)
        allowed = tuple(sorted(tuple(int(x) for x in t) for t in self.allowed))
        if len(set(scope)) != len(scope):
            raise ValueError(f"scope {scope} repeats a variable")
        for t in allowed:
            if len(t) != len(scope):
                raise ValueError(f"allowed tuple {t} does not match scope arity {len(scope)}")
        object.__setattr__(self, "scope", scope)
        object.__setattr__(self, "allowed", allowed)


@dataclass(frozen=True)
class CSP:
    """Finite-domain constraint satisfaction instance.

    ``domains[i]`` is the size of variable i's domain {0, ..., d_i - 1};
    a size of 0 makes the instance trivially unsatisfiable.
    """

    domains: tuple
    constraints: tuple

    def __post_init__(self):
        domains = tuple(int(d) for d in self.domains)
        if any(d < 0 for d in domains):
            raise ValueError("domain sizes must be nonnegative")
        constraints = tuple(self.constraints)
        for c in constraints:
            for v in c.scope:
                if not (0 <= v < len(domains)):
                    raise ValueError(f"constraint scope variable {v} out of range")
            for t in c.allowed:
                for v, x in zip(c.scope, t):
                    if not (0 <= x < domains[v]):
                        raise ValueError(
                            f"allowed value {x} outside domain of variable {v}")
        object.__setattr__(self, "domains", domains)
        object.__setattr__(self, "constraints", constraints)

    @property
    def variables(self) -> int:
        return len(self.domains)


def csp_satisfiable(c: CSP) -> bool:
    """Backtracking decision, checking each constraint once fully assigned."""
    if any(d == 0 for d in c.domains):
        return False
    space = prod(c.domains) if c.domains else 1
    if space > CSP_SEARCH_CAP:
        raise CapExceededError(
            f"assignment space {space} exceeds the search cap {CSP_SEARCH_CAP}")
    by_last = {}
    for cons in c.constraints:
        if not cons.allowed:
            return False
        last = max(cons.scope) if cons.scope else 0
        by_last.setdefault(last, []).append((cons.scope, set(cons.allowed)))
    assignment = [0] * c.variables

    def extend(v: int) -> bool:
        if v == c.variables:
            return True
        for x in range(c.domains[v]):
            assignment[v] = x
            ok = all(tuple(assignment[u] for u in scope) in allowed
                     for scope, allowed in by_last.get(v, []))
            if ok and extend(v + 1):
                return True
        return False

    # empty-scope constraints are vacuous beyond the allowed-nonempty check
    return extend(0)


def csp_binarize(c: CSP) -> CSP:
    """Dual-encode an arbitrary CSP as a binary one.

    One new variable per original constraint whose domain enumerates that
    constraint's allowed tuples; a binary compatibility constraint between
    every two originals sharing a variable keeps the shared value equal.
    Satisfiability is preserved; an empty allowed set yields an empty domain.
    """
    domains = tuple(len(cons.allowed) for cons in c.constraints)
    new_constraints = []
    for i, ci in enumerate(c.constraints):
        for j in range(i + 1, len(c.constraints)):
            cj = c.constraints[j]
            shared = set(ci.scope) & set(cj.scope)
            if not shared:
                continue
            pairs = []
            for di, ti in enumerate(ci.allowed):
                for dj, tj in enumerate(cj.allowed):
                    if all(ti[ci.scope.index(v)] == tj[cj.scope.index(v)]
                           for v in shared):
                        pairs.append((di, dj))
            new_constraints.append(CSPConstraint(scope=(i, j), allowed=tuple(pairs)))
    return CSP(domains=domains, constraints=tuple(new_constraints))


def csp_game(c: CSP) -> Game:
    """The synchronous game of a binary CSP.

    Questions are variables (uniform over ordered pairs), answers come from
    the union domain; answering outside the variable's own domain loses, a
    repeated variable demands identical answers, and answers to a
    constrained pair must satisfy every constraint on that pair.
    """
    if c.variables < 1:
        raise PreconditionError("csp_game needs at least one variable")
    for cons in c.constraints:
        if len(cons.scope) != 2:
            raise PreconditionError(
                f"csp_game needs a binary CSP; constraint scope {cons.scope} "
                f"has arity {len(cons.scope)}")
    nQ = c.variables
    nA = max(c.domains) if c.domains else 1
    if nA == 0:
        nA = 1  # all domains empty: every answer is out-of-domain and loses
    pi = np.full((nQ, nQ), 1.0 / (nQ * nQ))
    V = np.ones((nA, nA, nQ, nQ), dtype=np.uint8)
    for i in range(nQ):
        for a in range(nA):
            for b in range(nA):
                if a >= c.domains[i]:
                    V[a, b, i, :] = 0
                    V[b, a, :, i] = 0
    for i in range(nQ):
        for a in range(nA):
            for b in range(nA):
                if a != b:
                    V[a, b, i, i] = 0
    for cons in c.constraints:
        u, v = cons.scope
        allowed = set(cons.allowed)
        for a in range(c.domains[u]):
            for b in range(c.domains[v]):
                if (a, b) not in allowed:
                    V[a, b, u, v] = 0
                    V[b, a, v, u] = 0
    return Game(Scenario(nQ, nQ, nA, nA), pi, V)


# ---------------------------------------------------------------------------
# file formats

def graph_to_dict(G: Graph) -> dict:
    return {"n": G.n, "edges": [list(e) for e in sorted(G.edges)]}


def graph_from_dict(data: dict) -> Graph:
    if not isinstance(data, dict):
        raise ParseError("graph file must be a JSON object")
    n = data.get("n")
    if not isinstance(n, int) or n < 0:
        raise ParseError("field 'n' must be a nonnegative integer")
    edges = data.get("edges")
    if not isinstance(edges, list):
        raise ParseError("field 'edges' must be a list of pairs")
    pairs = set()
    for e in edges:
        if (not isinstance(e, list)) or len(e) != 2 or not all(isinstance(v, int) for v in e):
            raise ParseError(f"edge {e!r} must be a pair of integers")
        i, j = e
        if i == j:
            raise ParseError(f"edge {e!r} is a loop; loops are not allowed")
        if not (0 <= i < n and 0 <= j < n):
            raise ParseError(f"edge {e!r} out of range for n={n}")
        pairs.add((min(i, j), max(i, j)))
    return Graph(n, frozenset(pairs))


def load_graph(path) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON in {path}: {exc}") from None
    return graph_from_dict(data)


def save_graph(G: Graph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(graph_to_dict(G), fh, indent=1)
        fh.write("\n")


def csp_to_dict(c: CSP) -> dict:
    return {"domains": list(c.domains),
            "constraints": [{"scope": list(cons.scope),
                             "allowed": [list(t) for t in cons.allowed]}
                            for cons in c.constraints]}


def csp_from_dict(data: dict) -> CSP:
    if not isinstance(data, dict):
        raise ParseError("CSP file must be a JSON object")
    domains = data.get("domains")
    if not isinstance(domains, list) or not all(isinstance(d, int) for d in domains):
        raise ParseError("field 'domains' must be a list of integers")
    raw = data.get("constraints")
    if not isinstance(raw, list):
        raise ParseError("field 'constraints' must be a list")
    constraints = []
    for idx, item in enumerate(raw):
        if not isinstance(item, dict) or "scope" not in item or "allowed" not in item:
            raise ParseError(f"constraint {idx} must carry 'scope' and 'allowed'")
        try:
            constraints.append(CSPConstraint(scope=tuple(item["scope"]),
                                             allowed=tuple(map(tuple, item["allowed"]))))
        except (TypeError, ValueError) as exc:
            raise ParseError(f"constraint {idx} malformed: {exc}") from None
    try:
        return CSP(domains=tuple(domains), constraints=tuple(constraints))
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def load_csp(path) -> CSP:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON in {path}: {exc}") from None
    return csp_from_dict(data)


def save_csp(c: CSP, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(csp_to_dict(c), fh, indent=1)
        fh.write("\n")
