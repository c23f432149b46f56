"""Membership oracles for two-party correlation sets.

Implements tests for: the probability simplex conditions, no-signaling,
membership in the cone-correlation sets over the nonnegative / no-signaling /
doubly-nonnegative cones, the first-level moment relaxation of the quantum
set, and the classical polytope (by vertex enumeration). Quantum membership
itself is deliberately NOT offered as a decision: no oracle for the
completely-positive-semidefinite cone exists, so the API exposes the sandwich
classical <= [quantum] <= DNN-correlations <= first-level relaxation together
with explicit witnesses built from quantum strategies.

Verdicts carry a guard band: distances at most eps_feas are IN, distances
above 10 * eps_feas are OUT, anything in between is UNDECIDED.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import conicsolve
from .conicsolve import (Cone, ConicProgram, DEFAULT_EPS_FEAS, UNDECIDED_BAND,
                         feasibility_distance, program_violation, simplex_fit)
from .errors import CapExceededError, ParseError, PreconditionError
from .gamecore import (QuantumStrategy, Scenario, deterministic_correlation,
                       entry_matrix, evaluate_quantum_strategy, j_constraints,
                       j_matrix, nso_constraints, question_keys, st_pins)
from .numkernel import gram, realify

__all__ = [
    "ENUMERATION_CAP",
    "Marginals",
    "MembershipVerdict",
    "classical_membership",
    "classify_distance",
    "corr_membership",
    "correlation_from_dict",
    "correlation_to_dict",
    "cs_witness_check",
    "dnn_to_npa1_witness",
    "enumerate_deterministic",
    "is_correlation",
    "is_nosignaling",
    "lift_with_marginals",
    "load_correlation",
    "marginals",
    "npa1_membership",
    "random_correlation",
    "random_ns_correlation",
    "random_signaling_correlation",
    "save_correlation",
    "scenario_of",
    "signaling_violation",
]

ENUMERATION_CAP = 4096

_ENTRY_TOL = 1e-12
_SUM_TOL = 1e-9


def scenario_of(p: np.ndarray) -> Scenario:
    """Scenario implied by the shape of a correlation array p[a, b, s, t]."""
    p = np.asarray(p)
    if p.ndim != 4:
        raise ValueError(f"correlation must be a 4-index array, got shape {p.shape}")
    return Scenario(nS=p.shape[2], nT=p.shape[3], nA=p.shape[0], nB=p.shape[1])


def is_correlation(p: np.ndarray) -> bool:
    """Entries >= -1e-12 and every (s, t) slice sums to 1 within 1e-9."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 4:
        return False
    if p.min() < -_ENTRY_TOL:
        return False
    slice_sums = p.sum(axis=(0, 1))
    return bool(np.abs(slice_sums - 1.0).max() <= _SUM_TOL)


def signaling_violation(p: np.ndarray) -> float:
    """Largest marginal inconsistency across the two no-signaling conditions."""
    p = np.asarray(p, dtype=float)
    # Alice's marginals p_A(a|s) as functions of t, and Bob's of s
    pa_by_t = p.sum(axis=1)  # (a, s, t)
    pb_by_s = p.sum(axis=0)  # (b, s, t)
    va = np.abs(pa_by_t - pa_by_t[:, :, :1]).max() if p.shape[3] > 1 else 0.0
    vb = np.abs(pb_by_s - pb_by_s[:, :1, :]).max() if p.shape[2] > 1 else 0.0
    return float(max(va, vb))


def is_nosignaling(p: np.ndarray, atol: float = _SUM_TOL) -> bool:
    """Both marginal-consistency conditions hold within atol."""
    return signaling_violation(p) <= atol


@dataclass(frozen=True)
class Marginals:
    """Local marginal tables pA[s, a] and pB[t, b] of a no-signaling correlation."""

    pA: np.ndarray
    pB: np.ndarray


def marginals(p: np.ndarray, atol: float = _SUM_TOL) -> Marginals:
    """Marginal tables of a no-signaling correlation.

    Computed from the first column/row of the other party's questions and
    verified consistent across all of them; signaling input is an error.
    """
    p = np.asarray(p, dtype=float)
    scenario_of(p)
    violation = signaling_violation(p)
    if violation > atol:
        raise PreconditionError(
            f"marginals undefined: correlation signals (violation {violation:.3e})")
    pA = p.sum(axis=1)[:, :, 0].T  # (s, a)
    pB = p.sum(axis=0)[:, 0, :].T  # (t, b)
    return Marginals(pA=pA, pB=pB)


@dataclass
class MembershipVerdict:
    """Outcome of a set-membership test.

    IN requires distance <= eps_feas, OUT requires distance above the guard
    band 10 * eps_feas; in between the test is UNDECIDED. ``witness`` is the
    feasible (or best-found) point backing the verdict, when one exists.
    """

    status: str  # IN | OUT | UNDECIDED
    distance: float
    witness: Optional[np.ndarray] = None


def classify_distance(distance: float, eps_feas: float = DEFAULT_EPS_FEAS) -> str:
    if distance <= eps_feas:
        return "IN"
    if distance > UNDECIDED_BAND * eps_feas:
        return "OUT"
    return "UNDECIDED"


def _corr_program(p: np.ndarray, cone: Cone) -> ConicProgram:
    sc = scenario_of(p)
    constraints = j_constraints(sc) + st_pins(sc, p)
    solver_cone = cone
    if cone is Cone.NSO:
        constraints += nso_constraints(sc)
        solver_cone = Cone.NONNEG
    return ConicProgram(dim=sc.N, objective=np.zeros((sc.N, sc.N)),
                        constraints=tuple(constraints), cone=solver_cone)


def corr_membership(p: np.ndarray, cone: Cone,
                    eps_feas: float = DEFAULT_EPS_FEAS,
                    max_iter: int = conicsolve.DYKSTRA_MAX_ITER,
                    witness: Optional[np.ndarray] = None) -> MembershipVerdict:
    """Is p the S x T block of a matrix in the cone with all block sums 1?

    ``cone`` is NONNEG, DNN, or NSO (nonnegative plus no-signaling block
    equalities). When ``witness`` is given its constraint violation is
    measured directly instead of running the projection solver.
    """
    if cone not in (Cone.NONNEG, Cone.DNN, Cone.NSO):
        raise ValueError(f"corr_membership supports NONNEG, DNN, NSO; got {cone}")
    if not is_correlation(p):
        raise PreconditionError("input is not a correlation")
    prog = _corr_program(np.asarray(p, dtype=float), cone)
    if witness is not None:
        distance = program_violation(prog, witness)
        return MembershipVerdict(classify_distance(distance, eps_feas), distance,
                                 np.asarray(witness, dtype=float))
    distance, X = feasibility_distance(prog, max_iter=max_iter, target=eps_feas / 10)
    return MembershipVerdict(classify_distance(distance, eps_feas), distance, X)


def enumerate_deterministic(scenario: Scenario) -> list:
    """All deterministic strategy pairs (alpha, beta), subject to the cap."""
    count = scenario.nA ** scenario.nS * scenario.nB ** scenario.nT
    if count > ENUMERATION_CAP:
        raise CapExceededError(
            f"scenario too large for vertex enumeration "
            f"({count} > {ENUMERATION_CAP} deterministic strategies)")
    alphas = itertools.product(range(scenario.nA), repeat=scenario.nS)
    pairs = itertools.product(alphas, itertools.product(range(scenario.nB), repeat=scenario.nT))
    return [(tuple(a), tuple(b)) for a, b in pairs]


def classical_membership(p: np.ndarray,
                         eps_feas: float = DEFAULT_EPS_FEAS) -> MembershipVerdict:
    """Is p a convex combination of deterministic correlations?

    Solves the vertex-mixture feasibility problem over the simplex with the
    same projection machinery and verdict bands as the matrix oracles. The
    witness is the mixture weight vector, indexed like
    `enumerate_deterministic`.
    """
    if not is_correlation(p):
        raise PreconditionError("input is not a correlation")
    sc = scenario_of(p)
    pairs = enumerate_deterministic(sc)
    columns = np.stack(
        [deterministic_correlation(sc, a, b).ravel() for a, b in pairs], axis=1)
    distance, weights = simplex_fit(columns, np.asarray(p, dtype=float).ravel(),
                                    stop=eps_feas / 10)
    return MembershipVerdict(classify_distance(distance, eps_feas), distance, weights)


def lift_with_marginals(p: np.ndarray, X: np.ndarray,
                        eps_feas: float = DEFAULT_EPS_FEAS) -> np.ndarray:
    """Border a DNN membership witness with 1 and the marginal vectors.

    The output has [0, 0] = 1 and row/column 0 equal to (pA, pB) in the
    flattening order; every lifted block-sum constraint then holds within
    tolerance. X must be feasible for corr_membership(p, DNN) within
    eps_feas, else this raises.
    """
    p = np.asarray(p, dtype=float)
    sc = scenario_of(p)
    X = np.asarray(X, dtype=float)
    violation = program_violation(_corr_program(p, Cone.DNN), X)
    if violation > eps_feas:
        raise PreconditionError(
            f"X is not a DNN witness for p (violation {violation:.3e})")
    marg = marginals(p)
    border = np.concatenate([marg.pA.ravel(), marg.pB.ravel()])
    lifted = np.zeros((sc.N + 1, sc.N + 1))
    lifted[0, 0] = 1.0
    lifted[0, 1:] = border
    lifted[1:, 0] = border
    lifted[1:, 1:] = (X + X.T) / 2
    return lifted


def _validate_lifted_dnn(Xlift: np.ndarray, scenario: Scenario, tol: float) -> None:
    sc = scenario
    if Xlift.shape != (sc.N + 1, sc.N + 1):
        raise ValueError(f"lifted witness must have side {sc.N + 1}")
    if float(np.linalg.eigvalsh((Xlift + Xlift.T) / 2)[0]) < -tol:
        raise PreconditionError("lifted witness is not psd within tolerance")
    if float(Xlift.min()) < -tol:
        raise PreconditionError("lifted witness has negative entries")
    keys = [("0", 0)] + question_keys(sc)
    for idx, i in enumerate(keys):
        for j in keys[idx:]:
            total = float(np.vdot(j_matrix(sc, i, j, lifted=True), Xlift))
            if abs(total - 1.0) > max(tol, 1e-7) * 10:
                raise PreconditionError(
                    f"lifted block sum {i},{j} is {total!r}, expected 1")


def dnn_to_npa1_witness(Xlift: np.ndarray, scenario: Scenario,
                        tol: float = DEFAULT_EPS_FEAS) -> np.ndarray:
    """Repair a lifted DNN witness into a first-level moment witness.

    For every same-question off-diagonal entry (s,a),(s,a') the entry value
    times the psd pattern {+1 on the two diagonal positions, -1 on the two
    off-diagonal positions} is added, moving the off-diagonal mass onto the
    diagonal. Each step keeps the matrix psd (the added term is a nonnegative
    multiple of a psd matrix), keeps every block sum (the pattern sums to
    zero inside one block), and leaves the S x T blocks untouched; the
    resulting diagonal carries the marginals.
    """
    sc = scenario
    Z = np.asarray(Xlift, dtype=float).copy()
    _validate_lifted_dnn(Z, sc, tol)
    for side, count, width in (("S", sc.nS, sc.nA), ("T", sc.nT, sc.nB)):
        for q in range(count):
            for a in range(width):
                for a2 in range(a + 1, width):
                    r = sc.row(side, q, a, lifted=True)
                    c = sc.row(side, q, a2, lifted=True)
                    value = (Z[r, c] + Z[c, r]) / 2
                    Z[r, r] += value
                    Z[c, c] += value
                    Z[r, c] = 0.0
                    Z[c, r] = 0.0
    return Z


def _npa1_program(p: np.ndarray) -> ConicProgram:
    """Feasibility form of the first-level moment matrix: psd, bordered by
    the marginals, S x T block pinned to p, same-question diagonal blocks
    equal to diag(marginals); other-question diagonal blocks stay free."""
    sc = scenario_of(p)
    marg = marginals(p)
    n = sc.N + 1
    constraints = [(entry_matrix(n, 0, 0), 1.0)]
    for s in range(sc.nS):
        for a in range(sc.nA):
            constraints.append(
                (entry_matrix(n, 0, sc.row("S", s, a, lifted=True)), float(marg.pA[s, a])))
    for t in range(sc.nT):
        for b in range(sc.nB):
            constraints.append(
                (entry_matrix(n, 0, sc.row("T", t, b, lifted=True)), float(marg.pB[t, b])))
    constraints += st_pins(sc, p, lifted=True)
    for side, count, width, table in (("S", sc.nS, sc.nA, marg.pA),
                                      ("T", sc.nT, sc.nB, marg.pB)):
        for q in range(count):
            for a in range(width):
                r = sc.row(side, q, a, lifted=True)
                constraints.append((entry_matrix(n, r, r), float(table[q, a])))
                for a2 in range(a + 1, width):
                    c = sc.row(side, q, a2, lifted=True)
                    constraints.append((entry_matrix(n, r, c), 0.0))
    return ConicProgram(dim=n, objective=np.zeros((n, n)),
                        constraints=tuple(constraints), cone=Cone.PSD)


def npa1_membership(p: np.ndarray, eps_feas: float = DEFAULT_EPS_FEAS,
                    max_iter: int = conicsolve.DYKSTRA_MAX_ITER,
                    witness: Optional[np.ndarray] = None) -> MembershipVerdict:
    """Membership in the first level of the moment-matrix hierarchy.

    Requires a no-signaling correlation (the border needs well-defined
    marginals); signaling input is an error. With an explicit ``witness``
    the verdict reports that matrix's own constraint violation.
    """
    p = np.asarray(p, dtype=float)
    prog = _npa1_program(p)  # raises PreconditionError when p signals
    if witness is not None:
        distance = program_violation(prog, witness)
        return MembershipVerdict(classify_distance(distance, eps_feas), distance,
                                 np.asarray(witness, dtype=float))
    distance, X = feasibility_distance(prog, max_iter=max_iter, target=eps_feas / 10)
    return MembershipVerdict(classify_distance(distance, eps_feas), distance, X)


def cs_witness_check(q: QuantumStrategy) -> np.ndarray:
    """Explicit DNN-correlation witness from a quantum strategy.

    Returns the Gram matrix of the doubled (real symmetric) measurement
    operator family {X^s_a} + {Y^t_b}: psd by construction, entrywise
    nonnegative because trace inner products of psd matrices are, with all
    block sums 1 and the S x T block equal to the strategy's correlation.
    Checked here to 1e-8 / 1e-10 before returning.
    """
    p = evaluate_quantum_strategy(q)
    sc = q.scenario
    ops = [realify(q.Xops[s, a]) for s in range(sc.nS) for a in range(sc.nA)]
    ops += [realify(q.Yops[t, b]) for t in range(sc.nT) for b in range(sc.nB)]
    G = gram(ops)
    keys = question_keys(sc)
    for idx, i in enumerate(keys):
        for j in keys[idx:]:
            total = float(np.vdot(j_matrix(sc, i, j), G))
            if abs(total - 1.0) > 1e-8:
                raise PreconditionError(f"witness block sum {i},{j} is {total!r}")
    na = sc.nS * sc.nA
    st_block = G[:na, na:].reshape(sc.nS, sc.nA, sc.nT, sc.nB)
    dev = float(np.abs(np.transpose(st_block, (1, 3, 0, 2)) - p).max())
    if dev > 1e-10:
        raise PreconditionError(f"witness S x T block deviates from p by {dev:.3e}")
    return G


def random_correlation(scenario: Scenario, rng: np.random.Generator) -> np.ndarray:
    """Random correlation: iid positive entries, normalized per (s, t)."""
    sc = scenario
    p = rng.random((sc.nA, sc.nB, sc.nS, sc.nT)) + 1e-3
    return p / p.sum(axis=(0, 1), keepdims=True)


def random_ns_correlation(scenario: Scenario, rng: np.random.Generator,
                          components: int = 6) -> np.ndarray:
    """Random no-signaling correlation for property suites.

    A Dirichlet mixture of deterministic correlations, plus (in the 2x2x2x2
    scenario) an extremal box that wins the XOR predicate with certainty.
    Mixtures of no-signaling points are no-signaling; the construction is
    checked before returning.
    """
    sc = scenario
    parts = []
    for _ in range(components):
        alpha = rng.integers(0, sc.nA, size=sc.nS)
        beta = rng.integers(0, sc.nB, size=sc.nT)
        parts.append(deterministic_correlation(sc, alpha, beta))
    if (sc.nS, sc.nT, sc.nA, sc.nB) == (2, 2, 2, 2) and rng.random() < 0.5:
        box = np.zeros((2, 2, 2, 2))
        for s in range(2):
            for t in range(2):
                for a in range(2):
                    box[a, a ^ (s & t), s, t] = 0.5
        parts.append(box)
    weights = rng.dirichlet(np.ones(len(parts)))
    p = sum(w * part for w, part in zip(weights, parts))
    if not is_nosignaling(p):
        raise RuntimeError("no-signaling mixture failed its own check")
    return p


def random_signaling_correlation(scenario: Scenario, rng: np.random.Generator,
                                 min_violation: float = 1e-2) -> np.ndarray:
    """Random correlation rejected until it clearly signals."""
    for _ in range(1000):
        p = random_correlation(scenario, rng)
        if signaling_violation(p) >= min_violation:
            return p
    raise RuntimeError("could not sample a signaling correlation")


def correlation_to_dict(p: np.ndarray) -> dict:
    sc = scenario_of(p)
    pfile = np.transpose(np.asarray(p, dtype=float), (2, 3, 0, 1))
    return {"nS": sc.nS, "nT": sc.nT, "nA": sc.nA, "nB": sc.nB,
            "p": pfile.tolist()}


def correlation_from_dict(data: dict) -> np.ndarray:
    if not isinstance(data, dict):
        raise ParseError("correlation file must be a JSON object")
    sizes = {}
    for key in ("nS", "nT", "nA", "nB"):
        value = data.get(key)
        if not isinstance(value, int) or value < 1:
            raise ParseError(f"field {key!r} must be a positive integer")
        sizes[key] = value
    try:
        pfile = np.array(data["p"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"field 'p' is missing or non-numeric: {exc}") from None
    expected = (sizes["nS"], sizes["nT"], sizes["nA"], sizes["nB"])
    if pfile.shape != expected:
        raise ParseError(
            f"field 'p' must be indexed [s][t][a][b] with shape {expected}, "
            f"got {pfile.shape}")
    return np.ascontiguousarray(np.transpose(pfile, (2, 3, 0, 1)))


def load_correlation(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON in {path}: {exc}") from None
    return correlation_from_dict(data)


def save_correlation(p: np.ndarray, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(correlation_to_dict(p), fh, indent=1)
        fh.write("\n")
