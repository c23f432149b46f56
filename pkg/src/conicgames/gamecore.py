"""Bell scenarios, nonlocal games, block-indexed matrices, and strategies.

Index layout, fixed across the whole package and all file formats: rows of a
game-level N x N matrix (N = nS*nA + nT*nB) are the pairs (s, a) in s-major
order followed by the pairs (t, b) in t-major order. Lifted matrices have one
extra leading row/column indexed 0. Correlations are arrays p[a, b, s, t];
game files store the predicate as V[s][t][a][b].

All value types are immutable after construction and all operations are pure,
so everything here is safe for unrestricted concurrent use.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ParseError, PreconditionError

__all__ = [
    "BlockIndex",
    "Game",
    "QuantumStrategy",
    "Scenario",
    "cost_matrix",
    "deterministic_correlation",
    "entry_matrix",
    "evaluate_quantum_strategy",
    "game_from_dict",
    "game_to_dict",
    "j_apply",
    "j_constraints",
    "j_matrix",
    "load_game",
    "nso_constraints",
    "question_keys",
    "save_game",
    "st_pins",
    "symmetric_cost",
    "win_probability",
]


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Scenario:
    """Question/answer set sizes of a two-party Bell scenario."""

    nS: int
    nT: int
    nA: int
    nB: int

    def __post_init__(self):
        if min(self.nS, self.nT, self.nA, self.nB) < 1:
            raise ValueError("all set sizes must be >= 1")

    @property
    def N(self) -> int:
        """Row count of game-level block matrices: nS*nA + nT*nB."""
        return self.nS * self.nA + self.nT * self.nB

    def row(self, side: str, question: int, answer: int, lifted: bool = False) -> int:
        """Flat row index of (side, question, answer)."""
        off = 1 if lifted else 0
        if side == "S":
            if not (0 <= question < self.nS and 0 <= answer < self.nA):
                raise IndexError("S index out of range")
            return off + question * self.nA + answer
        if side == "T":
            if not (0 <= question < self.nT and 0 <= answer < self.nB):
                raise IndexError("T index out of range")
            return off + self.nS * self.nA + question * self.nB + answer
        raise ValueError(f"side must be 'S' or 'T', got {side!r}")

    def block(self, side: str, question: int, lifted: bool = False) -> slice:
        """Row range of one question block."""
        start = self.row(side, question, 0, lifted)
        width = self.nA if side == "S" else self.nB
        return slice(start, start + width)


@dataclass(frozen=True)
class BlockIndex:
    """Row address (side, question, answer); side '0' is the lifted border row."""

    side: str  # "S" | "T" | "0"
    question: int = 0
    answer: int = 0

    def __post_init__(self):
        if self.side not in ("S", "T", "0"):
            raise ValueError(f"side must be 'S', 'T' or '0', got {self.side!r}")


def question_keys(scenario: Scenario) -> list:
    """All question labels ("S", s) then ("T", t), in flattening order."""
    return [("S", s) for s in range(scenario.nS)] + [("T", t) for t in range(scenario.nT)]


@dataclass(frozen=True)
class Game:
    """A two-player one-round game: question distribution pi and predicate V.

    ``pi`` has shape (nS, nT) and sums to 1; ``V[a, b, s, t]`` is 0/1.
    """

    scenario: Scenario
    pi: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        sc = self.scenario
        pi = np.asarray(self.pi, dtype=float)
        V = np.asarray(self.V)
        if pi.shape != (sc.nS, sc.nT):
            raise ValueError(f"pi must have shape {(sc.nS, sc.nT)}, got {pi.shape}")
        if V.shape != (sc.nA, sc.nB, sc.nS, sc.nT):
            raise ValueError(f"V must have shape {(sc.nA, sc.nB, sc.nS, sc.nT)}, got {V.shape}")
        if pi.min() < 0:
            raise ValueError("pi entries must be nonnegative")
        if abs(pi.sum() - 1.0) > 1e-12:
            raise ValueError("pi must sum to 1")
        if not np.isin(V, (0, 1)).all():
            raise ValueError("V entries must be 0 or 1")
        object.__setattr__(self, "pi", _freeze(pi))
        object.__setattr__(self, "V", _freeze(V.astype(np.uint8)))


def cost_matrix(g: Game) -> np.ndarray:
    """(nS*nA) x (nT*nB) matrix with entry [(s,a),(t,b)] = pi(s,t) V(a,b|s,t)."""
    sc = g.scenario
    # C[(s,a),(t,b)] laid out s-major / t-major
    C = np.einsum("st,abst->satb", g.pi, g.V.astype(float))
    return C.reshape(sc.nS * sc.nA, sc.nT * sc.nB)


def symmetric_cost(g: Game) -> np.ndarray:
    """N x N symmetric cost (1/2)[[0, C], [C^T, 0]] in the fixed block order."""
    sc = g.scenario
    C = cost_matrix(g)
    Chat = np.zeros((sc.N, sc.N))
    na = sc.nS * sc.nA
    Chat[:na, na:] = C / 2
    Chat[na:, :na] = C.T / 2
    return Chat


def _as_question(i) -> tuple:
    if isinstance(i, BlockIndex):
        return (i.side, i.question)
    side, *rest = i
    return (side, rest[0] if rest else 0)


def j_apply(scenario: Scenario, X: np.ndarray, i, j) -> float:
    """Sum of the (i, j) question block of X.

    ``i`` and ``j`` are BlockIndex values or ("S", s) / ("T", t) / ("0",)
    tuples. X may be game-level (N x N) or lifted ((1+N) x (1+N)); for
    lifted matrices ("0", j) sums the row-0 segment of block j and
    ("0", "0") reads the [0, 0] entry.
    """
    X = np.asarray(X)
    if X.shape == (scenario.N, scenario.N):
        lifted = False
    elif X.shape == (scenario.N + 1, scenario.N + 1):
        lifted = True
    else:
        raise ValueError(f"X has side {X.shape[0]}, expected {scenario.N} or {scenario.N + 1}")
    side_i, qi = _as_question(i)
    side_j, qj = _as_question(j)
    if "0" in (side_i, side_j) and not lifted:
        raise IndexError("row-0 block index on an unlifted matrix")
    if side_i == "0" and side_j == "0":
        return float(X[0, 0])
    if side_i == "0" or side_j == "0":
        side, q = (side_j, qj) if side_i == "0" else (side_i, qi)
        return float(X[0, scenario.block(side, q, lifted=True)].sum())
    rows = scenario.block(side_i, qi, lifted)
    cols = scenario.block(side_j, qj, lifted)
    return float(X[rows, cols].sum())


def j_matrix(scenario: Scenario, i, j, lifted: bool = False) -> np.ndarray:
    """Symmetric matrix J with <J, X> = j_apply(X, i, j) for symmetric X."""
    n = scenario.N + (1 if lifted else 0)
    J = np.zeros((n, n))
    side_i, qi = _as_question(i)
    side_j, qj = _as_question(j)
    if side_i == "0" and side_j == "0":
        J[0, 0] = 1.0
        return J
    if side_i == "0" or side_j == "0":
        side, q = (side_j, qj) if side_i == "0" else (side_i, qi)
        blk = scenario.block(side, q, lifted=True)
        J[0, blk] = 0.5
        J[blk, 0] = 0.5
        return J
    rows = scenario.block(side_i, qi, lifted)
    cols = scenario.block(side_j, qj, lifted)
    if (side_i, qi) == (side_j, qj):
        J[rows, cols] = 1.0
    else:
        J[rows, cols] = 0.5
        J[cols, rows] = 0.5
    return J


def entry_matrix(n: int, r: int, c: int) -> np.ndarray:
    """Symmetric matrix E with <E, X> = X[r, c] for symmetric X."""
    E = np.zeros((n, n))
    if r == c:
        E[r, c] = 1.0
    else:
        E[r, c] = 0.5
        E[c, r] = 0.5
    return E


def j_constraints(scenario: Scenario, lifted: bool = False) -> list:
    """Block-sum-one constraints (J, 1.0) over all unordered question pairs."""
    keys = question_keys(scenario)
    if lifted:
        keys = [("0", 0)] + keys
    out = []
    for idx, i in enumerate(keys):
        for j in keys[idx:]:
            out.append((j_matrix(scenario, i, j, lifted=lifted), 1.0))
    return out


def st_pins(scenario: Scenario, p: np.ndarray, lifted: bool = False) -> list:
    """Constraints pinning the S x T block of a matrix to the correlation p."""
    sc = scenario
    n = sc.N + (1 if lifted else 0)
    out = []
    for s in range(sc.nS):
        for a in range(sc.nA):
            r = sc.row("S", s, a, lifted)
            for t in range(sc.nT):
                for b in range(sc.nB):
                    c = sc.row("T", t, b, lifted)
                    out.append((entry_matrix(n, r, c), float(p[a, b, s, t])))
    return out


def nso_constraints(scenario: Scenario) -> list:
    """No-signaling equalities on the S x T rectangle.

    Row sums of each (s, t) block must not depend on s, column sums not on
    t; consecutive question pairs suffice.
    """
    sc = scenario
    out = []
    for s in range(sc.nS - 1):
        for t in range(sc.nT):
            for b in range(sc.nB):
                c = sc.row("T", t, b)
                A = np.zeros((sc.N, sc.N))
                for a in range(sc.nA):
                    A += entry_matrix(sc.N, sc.row("S", s, a), c)
                    A -= entry_matrix(sc.N, sc.row("S", s + 1, a), c)
                out.append((A, 0.0))
    for t in range(sc.nT - 1):
        for s in range(sc.nS):
            for a in range(sc.nA):
                r = sc.row("S", s, a)
                A = np.zeros((sc.N, sc.N))
                for b in range(sc.nB):
                    A += entry_matrix(sc.N, r, sc.row("T", t, b))
                    A -= entry_matrix(sc.N, r, sc.row("T", t + 1, b))
                out.append((A, 0.0))
    return out


def deterministic_correlation(scenario: Scenario, alpha: Sequence[int],
                              beta: Sequence[int]) -> np.ndarray:
    """Correlation of the deterministic strategy (alpha: S->A, beta: T->B)."""
    sc = scenario
    alpha = list(alpha)
    beta = list(beta)
    if len(alpha) != sc.nS or len(beta) != sc.nT:
        raise ValueError("alpha/beta must assign an answer to every question")
    p = np.zeros((sc.nA, sc.nB, sc.nS, sc.nT))
    for s, a in enumerate(alpha):
        for t, b in enumerate(beta):
            p[a, b, s, t] = 1.0
    return p


def win_probability(g: Game, p: np.ndarray) -> float:
    """Probability of winning g when playing the correlation p."""
    sc = g.scenario
    p = np.asarray(p, dtype=float)
    if p.shape != (sc.nA, sc.nB, sc.nS, sc.nT):
        raise ValueError(f"correlation shape {p.shape} does not match the game")
    return float(np.einsum("st,abst,abst->", g.pi, g.V.astype(float), p))


@dataclass(frozen=True)
class QuantumStrategy:
    """Measurement operators in the normalized form with a shared psd root K.

    ``K`` is d x d Hermitian psd with <K, K> = 1; ``Xops[s, a]`` and
    ``Yops[t, b]`` are Hermitian psd with sum_a Xops[s, a] == K for every s
    and sum_b Yops[t, b] == K for every t. The generated correlation is
    p(a,b|s,t) = <Xops[s,a], Yops[t,b]>.
    """

    K: np.ndarray
    Xops: np.ndarray  # shape (nS, nA, d, d), complex
    Yops: np.ndarray  # shape (nT, nB, d, d), complex

    def __post_init__(self):
        K = np.asarray(self.K, dtype=complex)
        X = np.asarray(self.Xops, dtype=complex)
        Y = np.asarray(self.Yops, dtype=complex)
        if K.ndim != 2 or K.shape[0] != K.shape[1]:
            raise ValueError("K must be a square matrix")
        d = K.shape[0]
        if X.ndim != 4 or X.shape[2:] != (d, d) or Y.ndim != 4 or Y.shape[2:] != (d, d):
            raise ValueError("operator families must have shape (questions, answers, d, d)")
        object.__setattr__(self, "K", _freeze(K))
        object.__setattr__(self, "Xops", _freeze(X))
        object.__setattr__(self, "Yops", _freeze(Y))

    @property
    def d(self) -> int:
        return self.K.shape[0]

    @property
    def scenario(self) -> Scenario:
        return Scenario(nS=self.Xops.shape[0], nT=self.Yops.shape[0],
                        nA=self.Xops.shape[1], nB=self.Yops.shape[1])

    def validate(self, atol: float = 1e-9) -> None:
        """Raise PreconditionError naming the first violated invariant."""
        norm = float(np.vdot(self.K, self.K).real)
        if abs(norm - 1.0) > atol:
            raise PreconditionError(f"<K, K> = {norm!r}, expected 1")
        for name, ops in (("K", self.K[None, None]), ("X", self.Xops), ("Y", self.Yops)):
            flat = ops.reshape(-1, self.d, self.d)
            for idx, op in enumerate(flat):
                if np.abs(op - op.conj().T).max() > atol:
                    raise PreconditionError(f"{name} operator {idx} is not Hermitian")
                if float(np.linalg.eigvalsh(op)[0]) < -atol:
                    raise PreconditionError(f"{name} operator {idx} is not psd")
        for s in range(self.Xops.shape[0]):
            dev = float(np.abs(self.Xops[s].sum(axis=0) - self.K).max())
            if dev > atol:
                raise PreconditionError(f"sum_a X[s={s}] deviates from K by {dev:.3e}")
        for t in range(self.Yops.shape[0]):
            dev = float(np.abs(self.Yops[t].sum(axis=0) - self.K).max())
            if dev > atol:
                raise PreconditionError(f"sum_b Y[t={t}] deviates from K by {dev:.3e}")


def evaluate_quantum_strategy(q: QuantumStrategy, atol: float = 1e-9) -> np.ndarray:
    """Correlation p(a,b|s,t) = <Xops[s,a], Yops[t,b]> of a quantum strategy.

    Validates the strategy invariants first; the trace inner products must be
    real to 1e-10 (they are, for genuinely Hermitian operators).
    """
    q.validate(atol=atol)
    sc = q.scenario
    flat_x = q.Xops.reshape(sc.nS * sc.nA, -1)
    flat_y = q.Yops.reshape(sc.nT * sc.nB, -1)
    G = flat_x.conj() @ flat_y.T
    if np.abs(G.imag).max() > 1e-10:
        raise PreconditionError("strategy produced non-real probabilities")
    p = G.real.reshape(sc.nS, sc.nA, sc.nT, sc.nB)
    return np.ascontiguousarray(np.transpose(p, (1, 3, 0, 2)))


def game_to_dict(g: Game) -> dict:
    """Plain-JSON form of a game, predicate stored as V[s][t][a][b]."""
    sc = g.scenario
    Vfile = np.transpose(g.V, (2, 3, 0, 1))
    return {
        "nS": sc.nS, "nT": sc.nT, "nA": sc.nA, "nB": sc.nB,
        "pi": g.pi.tolist(),
        "V": Vfile.astype(int).tolist(),
    }


def game_from_dict(data: dict) -> Game:
    """Parse a game from its JSON dict; ParseError names the offending field.

    The question distribution is renormalized when |sum(pi) - 1| <= 1e-9 and
    rejected otherwise.
    """
    if not isinstance(data, dict):
        raise ParseError("game file must be a JSON object")
    sizes = {}
    for key in ("nS", "nT", "nA", "nB"):
        value = data.get(key)
        if not isinstance(value, int) or value < 1:
            raise ParseError(f"field {key!r} must be a positive integer")
        sizes[key] = value
    sc = Scenario(**sizes)
    try:
        pi = np.array(data["pi"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"field 'pi' is missing or non-numeric: {exc}") from None
    if pi.shape != (sc.nS, sc.nT):
        raise ParseError(f"field 'pi' must be a {sc.nS}x{sc.nT} array, got shape {pi.shape}")
    if pi.min() < 0:
        raise ParseError("field 'pi' has a negative entry")
    total = pi.sum()
    if abs(total - 1.0) > 1e-9:
        raise ParseError(f"field 'pi' sums to {total!r}, not 1")
    pi = pi / total
    try:
        Vfile = np.array(data["V"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"field 'V' is missing or malformed: {exc}") from None
    if Vfile.shape != (sc.nS, sc.nT, sc.nA, sc.nB):
        raise ParseError(
            f"field 'V' must be indexed [s][t][a][b] with shape "
            f"{(sc.nS, sc.nT, sc.nA, sc.nB)}, got {Vfile.shape}")
    if not np.isin(Vfile, (0, 1)).all():
        raise ParseError("field 'V' must contain only 0/1 entries")
    return Game(sc, pi, np.transpose(Vfile, (2, 3, 0, 1)))


def load_game(path) -> Game:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON in {path}: {exc}") from None
    return game_from_dict(data)


def save_game(g: Game, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(game_to_dict(g), fh, indent=1)
        fh.write("\n")
