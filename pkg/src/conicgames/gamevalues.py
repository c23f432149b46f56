"""Game values over the correlation-set hierarchy, duals, perfect strategies.

Five values are computed per game: classical (vertex enumeration),
doubly-nonnegative relaxation (the Feige-Lovasz SDP, an upper bound on the
quantum value), the first-level moment relaxation, no-signaling, and
unrestricted (closed form). The exact quantum value is intentionally not
offered: optimizing over the completely-positive-semidefinite cone has no
known algorithm, so the quantum value is only sandwiched between the
classical value and the DNN bound, whose dual certificate is exported.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .conicsolve import (Cone, ConicProgram, DEFAULT_EPS_FEAS, DEFAULT_MAX_ITER,
                         DEFAULT_TOL, DualCertificateDNN, feasibility_distance,
                         solve, solve_with_cone_duals, split_psd_nonneg,
                         verify_certificate)
from .corrsets import ENUMERATION_CAP, MembershipVerdict, classify_distance
from .errors import CapExceededError
from .gamecore import (Game, entry_matrix, j_constraints, nso_constraints,
                       symmetric_cost)

__all__ = [
    "ValueChain",
    "ValueReport",
    "dual_value_dnn",
    "perfect_strategy",
    "value_chain",
    "value_classical",
    "value_dnn",
    "value_nosignaling",
    "value_sdp1",
    "value_unrestricted",
]

_PI_POSITIVE = 1e-12  # float-safe reading of "pi(s,t) > 0"


@dataclass
class ValueReport:
    """A computed game value with its optimizer and solver diagnostics.

    ``optimizer`` is the witnessing object: a correlation array, a
    deterministic strategy pair (alpha, beta), or the optimal matrix of a
    relaxation. ``certificate``, present for the DNN value, upper-bounds the
    value by weak duality.
    """

    value: float
    optimizer: object
    certificate: Optional[DualCertificateDNN] = None
    residuals: Optional[tuple] = None
    status: str = "OPTIMAL"


@dataclass
class ValueChain:
    """The five values of one game, ordered by the correlation-set sandwich."""

    wC: float
    wDNN: float
    wSDP1: float
    wNS: float
    wP: float

    def inequalities(self, tol: float = 1e-5) -> list:
        """The chain inequalities as (label, lhs, rhs, ok) rows."""
        rows = [
            ("classical <= dnn", self.wC, self.wDNN),
            ("dnn <= sdp1", self.wDNN, self.wSDP1),
            ("dnn <= nosignaling", self.wDNN, self.wNS),
            ("nosignaling <= unrestricted", self.wNS, self.wP),
        ]
        return [(label, lhs, rhs, lhs <= rhs + tol) for label, lhs, rhs in rows]


def _value_program(g: Game, cone: Cone, extra_constraints=(),
                   nonneg_mask: Optional[np.ndarray] = None) -> ConicProgram:
    sc = g.scenario
    constraints = j_constraints(sc) + list(extra_constraints)
    return ConicProgram(dim=sc.N, objective=symmetric_cost(g),
                        constraints=tuple(constraints), cone=cone,
                        nonneg_mask=nonneg_mask)


def _st_block_correlation(g: Game, X: np.ndarray) -> np.ndarray:
    sc = g.scenario
    na = sc.nS * sc.nA
    block = X[:na, na:].reshape(sc.nS, sc.nA, sc.nT, sc.nB)
    return np.ascontiguousarray(np.transpose(block, (1, 3, 0, 2)))


def value_unrestricted(g: Game) -> ValueReport:
    """sum_(s,t) pi(s,t) max_(a,b) V(a,b|s,t), with the obvious optimizer.

    Over unconstrained correlations each (s, t) slice is a free distribution,
    so the best play puts all mass on one winning answer pair per question
    pair. Equals the conic value over the nonnegative cone.
    """
    sc = g.scenario
    p = np.zeros((sc.nA, sc.nB, sc.nS, sc.nT))
    total = 0.0
    for s in range(sc.nS):
        for t in range(sc.nT):
            slice_v = g.V[:, :, s, t]
            a, b = np.unravel_index(int(slice_v.argmax()), slice_v.shape)
            p[a, b, s, t] = 1.0
            total += float(g.pi[s, t]) * float(slice_v[a, b])
    return ValueReport(value=total, optimizer=p)


def value_classical(g: Game) -> ValueReport:
    """Exact classical value by enumerating Alice's deterministic strategies.

    For each alpha: S -> A, Bob's best reply decomposes per question t, so
    the cost is nA^nS * (nT * nB * nS) instead of enumerating both sides.
    """
    sc = g.scenario
    count = sc.nA ** sc.nS
    if count > ENUMERATION_CAP:
        raise CapExceededError(
            f"classical value needs {count} > {ENUMERATION_CAP} strategy enumerations")
    Vf = g.V.astype(float)
    best = -1.0
    best_pair = None
    for alpha in itertools.product(range(sc.nA), repeat=sc.nS):
        # score[b, t] = sum_s pi(s, t) V(alpha(s), b | s, t)
        score = np.zeros((sc.nB, sc.nT))
        for s, a in enumerate(alpha):
            score += g.pi[s, :] * Vf[a, :, s, :]
        beta = score.argmax(axis=0)
        value = float(score[beta, np.arange(sc.nT)].sum())
        if value > best:
            best = value
            best_pair = (alpha, tuple(int(b) for b in beta))
    return ValueReport(value=best, optimizer=best_pair)


def value_nosignaling(g: Game, tol: float = DEFAULT_TOL,
                      max_iter: int = DEFAULT_MAX_ITER) -> ValueReport:
    """Conic value over the nonnegative cone with no-signaling block equalities."""
    prog = _value_program(g, Cone.NONNEG, extra_constraints=nso_constraints(g.scenario))
    result = solve(prog, tol=tol, max_iter=max_iter)
    return ValueReport(value=result.value, optimizer=_st_block_correlation(g, result.X),
                       residuals=result.residuals, status=result.status)


def _assemble_certificate(prog: ConicProgram, dual: np.ndarray,
                          cone_duals: list) -> DualCertificateDNN:
    S = np.tensordot(dual, np.stack([A for A, _ in prog.constraints]), axes=1)
    S = S - prog.objective
    P0 = cone_duals[0] if cone_duals else None
    P, Npart = split_psd_nonneg(S, P0=P0)
    return DualCertificateDNN(v=dual, P=P, Npart=Npart)


def value_dnn(g: Game, tol: float = DEFAULT_TOL,
              max_iter: int = DEFAULT_MAX_ITER) -> ValueReport:
    """The doubly-nonnegative relaxation value (Feige-Lovasz bound).

    Upper bounds the quantum value and never exceeds the no-signaling value.
    The report carries a dual certificate assembled from the solver's
    multipliers: sum v_ij J_ij - Chat split into psd + nonnegative parts.
    """
    prog = _value_program(g, Cone.DNN)
    result, cone_duals = solve_with_cone_duals(prog, tol=tol, max_iter=max_iter)
    certificate = _assemble_certificate(prog, result.dual, cone_duals)
    return ValueReport(value=result.value, optimizer=result.X,
                       certificate=certificate, residuals=result.residuals,
                       status=result.status)


def value_sdp1(g: Game, tol: float = DEFAULT_TOL,
               max_iter: int = DEFAULT_MAX_ITER) -> ValueReport:
    """Value over the first level of the moment-matrix hierarchy.

    psd matrix with all block sums 1, zero same-question off-diagonal
    entries, and entrywise nonnegativity imposed only on the S x T blocks
    (that partial nonnegativity is exactly what separates this relaxation
    from the DNN one).
    """
    sc = g.scenario
    zeros = []
    for side, count, width in (("S", sc.nS, sc.nA), ("T", sc.nT, sc.nB)):
        for q in range(count):
            for a in range(width):
                for a2 in range(a + 1, width):
                    zeros.append((entry_matrix(
                        sc.N, sc.row(side, q, a), sc.row(side, q, a2)), 0.0))
    na = sc.nS * sc.nA
    mask = np.zeros((sc.N, sc.N), dtype=bool)
    mask[:na, na:] = True
    mask[na:, :na] = True
    prog = _value_program(g, Cone.PSD, extra_constraints=zeros, nonneg_mask=mask)
    result = solve(prog, tol=tol, max_iter=max_iter)
    return ValueReport(value=result.value, optimizer=result.X,
                       residuals=result.residuals, status=result.status)


def dual_value_dnn(g: Game, tol: float = DEFAULT_TOL,
                   max_iter: int = DEFAULT_MAX_ITER,
                   cert_tol: float = DEFAULT_EPS_FEAS):
    """Verified dual bound for the DNN value: returns (bound, certificate).

    The multipliers come from the solver, the psd + nonnegative split is
    refined by alternating projection, and the certificate must pass
    `verify_certificate`; a split that does not verify raises.
    """
    prog = _value_program(g, Cone.DNN)
    result, cone_duals = solve_with_cone_duals(prog, tol=tol, max_iter=max_iter)
    certificate = _assemble_certificate(prog, result.dual, cone_duals)
    ok, bound = verify_certificate(certificate, prog, tol=cert_tol)
    if not ok:
        raise RuntimeError("certificate extraction failed")
    return bound, certificate


def perfect_strategy(g: Game, cone: Cone,
                     eps_feas: float = DEFAULT_EPS_FEAS) -> MembershipVerdict:
    """Does g admit a strategy in the given set that wins with certainty?

    A perfect strategy exists exactly when the block-sum-one system with
    zeros at every losing, positively-weighted entry is feasible over the
    cone. CLASSICAL searches deterministic strategies exhaustively (a
    perfect classical strategy may be taken deterministic); NONNEG, NSO and
    DNN run the feasibility oracle, so IN means feasible and OUT infeasible.
    """
    sc = g.scenario
    if cone is Cone.CLASSICAL:
        count = sc.nA ** sc.nS
        if count > ENUMERATION_CAP:
            raise CapExceededError(
                f"perfect-strategy search needs {count} > {ENUMERATION_CAP} enumerations")
        losing = (g.pi[None, None, :, :] > _PI_POSITIVE) & (g.V == 0)
        for alpha in itertools.product(range(sc.nA), repeat=sc.nS):
            # per t, some b must win against every s with positive weight
            def b_ok(t):
                return any(not losing[[*alpha], b, range(sc.nS), t].any()
                           for b in range(sc.nB))
            if all(b_ok(t) for t in range(sc.nT)):
                return MembershipVerdict("IN", 0.0, None)
        return MembershipVerdict("OUT", 1.0, None)
    if cone not in (Cone.NONNEG, Cone.NSO, Cone.DNN):
        raise ValueError(f"perfect_strategy supports NONNEG, NSO, DNN, CLASSICAL; got {cone}")
    constraints = []
    for s in range(sc.nS):
        for t in range(sc.nT):
            if g.pi[s, t] <= _PI_POSITIVE:
                continue
            for a in range(sc.nA):
                for b in range(sc.nB):
                    if g.V[a, b, s, t] == 0:
                        constraints.append((entry_matrix(
                            sc.N, sc.row("S", s, a), sc.row("T", t, b)), 0.0))
    solver_cone = cone
    if cone is Cone.NSO:
        constraints += nso_constraints(sc)
        solver_cone = Cone.NONNEG
    prog = ConicProgram(dim=sc.N, objective=np.zeros((sc.N, sc.N)),
                        constraints=tuple(j_constraints(sc)) + tuple(constraints),
                        cone=solver_cone)
    distance, X = feasibility_distance(prog, target=eps_feas / 10)
    return MembershipVerdict(classify_distance(distance, eps_feas), distance, X)


def value_chain(g: Game, tol: float = DEFAULT_TOL,
                max_iter: int = DEFAULT_MAX_ITER,
                check: bool = True, check_tol: float = 1e-5) -> ValueChain:
    """All five values of one game.

    With ``check`` enabled the chain inequalities are verified at
    ``check_tol`` and a violation raises; pass ``check=False`` to obtain the
    raw chain regardless (the CLI does, to display per-inequality marks).
    """
    chain = ValueChain(
        wC=value_classical(g).value,
        wDNN=value_dnn(g, tol=tol, max_iter=max_iter).value,
        wSDP1=value_sdp1(g, tol=tol, max_iter=max_iter).value,
        wNS=value_nosignaling(g, tol=tol, max_iter=max_iter).value,
        wP=value_unrestricted(g).value,
    )
    if check:
        for label, lhs, rhs, ok in chain.inequalities(check_tol):
            if not ok:
                raise RuntimeError(
                    f"value chain violated: {label} ({lhs!r} > {rhs!r})")
    return chain
