"""First-order solver for small dense linear conic programs.

Solves  maximize <C, X>  subject to  <A_i, X> = b_i  and  X in K,  for
K one of the entrywise-nonnegative cone, the psd cone, or their
intersection (doubly nonnegative), via consensus operator splitting:
one block projects onto the affine constraint set (absorbing the linear
objective), and one block per cone factor projects onto that factor.
The same machinery provides a Dykstra alternating-projection feasibility
oracle and explicit verification of dual certificates.

Every problem in this package is a dense matrix of side <= ~60, so the
affine projector is built once per program from the pseudo-inverse of the
constraint Gram matrix and all cone projections are full
eigendecompositions.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .numkernel import project_nonneg, project_psd, symmetrize

__all__ = [
    "Cone",
    "ConicProgram",
    "DualCertificateDNN",
    "SolveResult",
    "DEFAULT_EPS_FEAS",
    "DEFAULT_MAX_ITER",
    "DEFAULT_TOL",
    "DEFAULT_TOL_GAP",
    "DYKSTRA_MAX_ITER",
    "UNDECIDED_BAND",
    "feasibility_distance",
    "program_violation",
    "simplex_fit",
    "solve",
    "solve_with_cone_duals",
    "split_psd_nonneg",
    "verify_certificate",
]

DEFAULT_TOL = 1e-7
DEFAULT_TOL_GAP = 1e-6
DEFAULT_MAX_ITER = 200_000
DEFAULT_EPS_FEAS = 1e-6
DYKSTRA_MAX_ITER = 100_000

# guard band: distances above UNDECIDED_BAND * eps_feas are classified
# infeasible, distances in between stay undecided
UNDECIDED_BAND = 10.0

_RHO = 1.0
_OVER_RELAX = 1.6
_CHECK_EVERY = 25


class Cone(enum.Enum):
    """Cones understood by the package.

    The solver itself accepts NONNEG, PSD and DNN. NSO (nonnegative plus
    no-signaling block equalities) and CLASSICAL are game-level labels:
    callers lower NSO to NONNEG plus affine constraints, and CLASSICAL to
    vertex enumeration.
    """

    NONNEG = "NONNEG"
    PSD = "PSD"
    DNN = "DNN"
    NSO = "NSO"
    CLASSICAL = "CLASSICAL"


_SOLVER_CONES = (Cone.NONNEG, Cone.PSD, Cone.DNN)


@dataclass(frozen=True)
class ConicProgram:
    """maximize <objective, X> s.t. <A_i, X> = b_i for each constraint, X in cone.

    ``constraints`` is a sequence of (A_i, b_i) pairs with symmetric A_i of
    side ``dim``. ``nonneg_mask``, when given, additionally requires
    X[mask] >= 0; it is how partial entrywise nonnegativity (e.g. on
    off-diagonal question blocks only) is imposed on top of a PSD cone.
    """

    dim: int
    objective: np.ndarray
    constraints: tuple
    cone: Cone
    nonneg_mask: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.cone not in _SOLVER_CONES:
            raise ValueError(f"solver cone must be one of {_SOLVER_CONES}, got {self.cone}")
        C = symmetrize(self.objective)
        if C.shape != (self.dim, self.dim):
            raise ValueError("objective dimension mismatch")
        object.__setattr__(self, "objective", C)
        object.__setattr__(self, "constraints", tuple(self.constraints))
        for A, _ in self.constraints:
            if np.shape(A) != (self.dim, self.dim):
                raise ValueError("constraint dimension mismatch")
        if self.nonneg_mask is not None and np.shape(self.nonneg_mask) != (self.dim, self.dim):
            raise ValueError("nonneg_mask dimension mismatch")


@dataclass
class SolveResult:
    status: str  # OPTIMAL | INFEASIBLE | MAX_ITER
    value: float
    X: np.ndarray
    dual: np.ndarray  # one multiplier per constraint
    residuals: tuple  # (primal_res, dual_res, gap), all scale-normalized


@dataclass
class DualCertificateDNN:
    """Multipliers v with sum_i v_i A_i - C decomposed as psd + nonnegative.

    Any such decomposition certifies, by weak duality, that sum_i v_i b_i
    upper bounds the optimal value of the DNN program.
    """

    v: np.ndarray
    P: np.ndarray
    Npart: np.ndarray


class _Workspace:
    """Precomputed constraint data for one program: stacked constraint
    matrices, right-hand side, and the least-squares affine projector."""

    def __init__(self, prog: ConicProgram):
        self.n = prog.dim
        self.C = prog.objective
        self.As = np.stack([symmetrize(A) for A, _ in prog.constraints])
        self.b = np.array([float(b) for _, b in prog.constraints])
        self.m = len(self.b)
        self.A_flat = self.As.reshape(self.m, -1)
        self.gram_pinv = np.linalg.pinv(self.A_flat @ self.A_flat.T)
        self.b_scale = 1.0 + np.linalg.norm(self.b)
        self.c_scale = 1.0 + np.linalg.norm(self.C)
        # consistency of the affine system alone: b must lie in range(A)
        ls_gap = np.linalg.norm(self.A_flat @ (self.A_flat.T @ (self.gram_pinv @ self.b)) - self.b)
        self.affine_consistent = ls_gap <= 1e-9 * self.b_scale

    def project_affine(self, V: np.ndarray):
        """Least-squares projection onto {X : <A_i,X> = b_i}; also returns
        the multipliers of the projection (the dual iterate)."""
        w = self.gram_pinv @ (self.A_flat @ V.ravel() - self.b)
        return V - np.tensordot(w, self.As, axes=1), w

    def affine_residual(self, X: np.ndarray) -> float:
        return float(np.linalg.norm(self.A_flat @ X.ravel() - self.b)) / self.b_scale


def _cone_projectors(prog: ConicProgram):
    kinds = []
    if prog.cone in (Cone.PSD, Cone.DNN):
        kinds.append("psd")
    if prog.cone in (Cone.NONNEG, Cone.DNN):
        kinds.append("nonneg")
    if prog.nonneg_mask is not None:
        kinds.append("mask")
    mask = None if prog.nonneg_mask is None else np.asarray(prog.nonneg_mask, dtype=bool)

    def apply(kind: str, V: np.ndarray) -> np.ndarray:
        if kind == "psd":
            return project_psd(V)
        if kind == "nonneg":
            return project_nonneg(V)
        out = V.copy()
        np.maximum(out, 0.0, where=mask, out=out)
        return out

    return kinds, mask, apply


def _cone_violation(prog: ConicProgram, X: np.ndarray, mask) -> float:
    viol = 0.0
    if prog.cone in (Cone.PSD, Cone.DNN):
        viol = max(viol, max(0.0, -float(np.linalg.eigvalsh(X)[0])))
    if prog.cone in (Cone.NONNEG, Cone.DNN):
        viol = max(viol, max(0.0, -float(X.min())))
    if mask is not None and mask.any():
        viol = max(viol, max(0.0, -float(X[mask].min())))
    return viol


def _dual_residual(prog: ConicProgram, ws: _Workspace, y: np.ndarray,
                   cone_duals: list, kinds: list, mask) -> float:
    """Distance of S := sum_i y_i A_i - C from the dual cone, measured through
    the candidate decomposition carried by the consensus dual iterates."""
    S = np.tensordot(y, ws.As, axes=1) - ws.C
    if not cone_duals:
        return float(np.linalg.norm(np.minimum(S, 0.0))) / ws.c_scale
    res = np.linalg.norm(S - sum(cone_duals)) / ws.c_scale
    for kind, D in zip(kinds, cone_duals):
        if kind == "psd":
            res = max(res, max(0.0, -float(np.linalg.eigvalsh(symmetrize(D))[0])))
        elif kind == "nonneg":
            res = max(res, max(0.0, -float(D.min())))
        else:
            if mask.any():
                res = max(res, max(0.0, -float(D[mask].min())))
            off = ~mask
            if off.any():
                res = max(res, float(np.abs(D[off]).max()) / ws.c_scale)
    return float(res)


def _consensus(prog: ConicProgram, tol: float, max_iter: int, tol_gap: float):
    if not prog.constraints:
        raise ValueError("program needs at least one constraint")
    if tol <= 0:
        raise ValueError("tol must be positive")
    ws = _Workspace(prog)
    if not ws.affine_consistent:
        empty = np.zeros((ws.n, ws.n))
        return (SolveResult("INFEASIBLE", float("nan"), empty, np.zeros(ws.m),
                            (float("inf"), float("inf"), float("inf"))), [])

    kinds, mask, project = _cone_projectors(prog)
    nblocks = 1 + len(kinds)
    z = np.zeros((ws.n, ws.n))
    us = [np.zeros((ws.n, ws.n)) for _ in range(nblocks)]
    y = np.zeros(ws.m)
    status = "MAX_ITER"
    residuals = (float("inf"), float("inf"), float("inf"))

    for it in range(1, max_iter + 1):
        x0, w = ws.project_affine(z - us[0] + ws.C / _RHO)
        xs = [x0]
        for k, kind in enumerate(kinds, start=1):
            xs.append(project(kind, z - us[k]))
        xhat = [_OVER_RELAX * x + (1.0 - _OVER_RELAX) * z for x in xs]
        z = sum(xhat[k] + us[k] for k in range(nblocks)) / nblocks
        z = symmetrize(z)
        for k in range(nblocks):
            us[k] = us[k] + xhat[k] - z

        if it % _CHECK_EVERY == 0 or it == max_iter:
            y = _RHO * w
            primal_res = max(ws.affine_residual(z), _cone_violation(prog, z, mask))
            cone_duals = [_RHO * us[k] for k in range(1, nblocks)]
            dual_res = _dual_residual(prog, ws, y, cone_duals, kinds, mask)
            pval = float(np.vdot(ws.C, z))
            dval = float(y @ ws.b)
            gap = abs(pval - dval)  # absolute, so weak duality holds at tol_gap
            residuals = (primal_res, dual_res, gap)
            if primal_res <= tol and dual_res <= tol and gap <= tol_gap:
                status = "OPTIMAL"
                break

    value = float(np.vdot(ws.C, z))
    return (SolveResult(status, value, z, y, residuals),
            [_RHO * u for u in us[1:]])


def solve(prog: ConicProgram, tol: float = DEFAULT_TOL,
          max_iter: int = DEFAULT_MAX_ITER,
          tol_gap: float = DEFAULT_TOL_GAP) -> SolveResult:
    """Solve the program by consensus splitting.

    One consensus block handles the affine constraints together with the
    linear objective; each cone factor is a further block; the consensus
    variable is the block average. Fixed step 1.0 with over-relaxation 1.6.
    On OPTIMAL the returned X satisfies the affine constraints and cone
    membership within ``tol`` (scale-normalized) and the dual vector
    satisfies weak duality up to ``tol_gap``. On MAX_ITER the achieved
    residuals are reported and the caller decides; INFEASIBLE is returned
    only when the affine system alone is inconsistent. The iteration is
    deterministic: identical inputs produce identical iterates.
    """
    return _consensus(prog, tol, max_iter, tol_gap)[0]


def solve_with_cone_duals(prog: ConicProgram, tol: float = DEFAULT_TOL,
                          max_iter: int = DEFAULT_MAX_ITER,
                          tol_gap: float = DEFAULT_TOL_GAP):
    """`solve`, but also return the per-cone dual iterates.

    For a DNN program the two extra matrices are the candidate psd and
    nonnegative parts of sum_i y_i A_i - C: the raw material of a
    DualCertificateDNN, to be refined with `split_psd_nonneg`.
    """
    return _consensus(prog, tol, max_iter, tol_gap)


_DYKSTRA_PHASE_CAP = 4000
_FALLBACK_THRESHOLD = 1e-2
_FALLBACK_MAX_ITER = 50_000


def feasibility_distance(prog: ConicProgram, max_iter: int = DYKSTRA_MAX_ITER,
                         target: float = DEFAULT_EPS_FEAS / 10,
                         x0: Optional[np.ndarray] = None):
    """Distance of the affine slice from the cone; the objective is ignored.

    Dykstra alternating projections run first between the affine subspace
    and the cone factors. None of these programs is strictly feasible (every
    feasible point is singular), and on such degenerate but feasible
    instances pure alternating projections can stall at ~1e-5; when that
    happens within a plausibly-feasible band, the consensus splitting with a
    zero objective finishes the job and the better of the two points is
    kept. Returns ``(distance, X)`` with distance the maximum of the
    scale-normalized affine residual and the cone violation at X; a distance
    at the accuracy floor means feasible, and callers classify against their
    epsilon with a guard band.
    """
    ws = _Workspace(prog)
    kinds, mask, project = _cone_projectors(prog)
    projections = ["affine"] + kinds
    x = np.zeros((ws.n, ws.n)) if x0 is None else symmetrize(x0)
    increments = [np.zeros((ws.n, ws.n)) for _ in projections]

    def measure(X: np.ndarray) -> float:
        return max(ws.affine_residual(X), _cone_violation(prog, X, mask))

    last = float("inf")
    for it in range(1, min(max_iter, _DYKSTRA_PHASE_CAP) + 1):
        for k, kind in enumerate(projections):
            shifted = x + increments[k]
            x = ws.project_affine(shifted)[0] if kind == "affine" else project(kind, shifted)
            x = symmetrize(x)
            increments[k] = shifted - x
        if it % 20 == 0 or it == max_iter:
            distance = measure(x)
            if distance <= target or abs(distance - last) <= 1e-12 * (1.0 + distance):
                break
            last = distance
    distance = float(measure(x))
    if target < distance <= _FALLBACK_THRESHOLD:
        feas = replace(prog, objective=np.zeros((ws.n, ws.n)))
        result, _ = _consensus(feas, tol=target,
                               max_iter=min(max_iter, _FALLBACK_MAX_ITER),
                               tol_gap=DEFAULT_TOL_GAP)
        if result.status != "INFEASIBLE":
            refined = float(measure(result.X))
            if refined < distance:
                distance, x = refined, result.X
    return distance, x


def program_violation(prog: ConicProgram, X: np.ndarray) -> float:
    """How far an explicit candidate X is from satisfying ``prog``.

    The same metric `feasibility_distance` reports: max of the normalized
    affine residual and the cone violation. Used to check witnesses directly
    instead of re-solving.
    """
    ws = _Workspace(prog)
    _, mask, _ = _cone_projectors(prog)
    X = symmetrize(X)
    return max(ws.affine_residual(X), _cone_violation(prog, X, mask))


def split_psd_nonneg(M: np.ndarray, iters: int = 200,
                     P0: Optional[np.ndarray] = None):
    """Decompose M as P + N with P psd and N entrywise nonnegative, by
    alternating projections in the two coordinates.

    Converges when M genuinely lies in the (closed) sum of the two cones.
    The final P is exactly psd and N = M - P, so the additive identity is
    exact and any residual shows up as small negative entries of N.
    """
    M = symmetrize(M)
    N = project_nonneg(M if P0 is None else M - symmetrize(P0))
    for _ in range(iters):
        P = project_psd(M - N)
        N = project_nonneg(M - P)
    P = project_psd(M - N)
    return P, M - P


def verify_certificate(cert: DualCertificateDNN, prog: ConicProgram,
                       tol: float = DEFAULT_EPS_FEAS):
    """Check a DNN dual certificate and return ``(ok, bound)``.

    ok means: sum_i v_i A_i - C equals P + Npart within ``tol`` entrywise,
    P is psd within ``tol``, and Npart >= -tol entrywise. When ok, weak
    duality makes ``bound`` (= sum_i v_i b_i) an upper bound on the optimal
    value of ``prog`` up to ``tol`` effects.
    """
    if prog.cone is not Cone.DNN:
        raise ValueError("certificate verification is defined for DNN programs")
    ws = _Workspace(prog)
    v = np.asarray(cert.v, dtype=float)
    if v.shape != (ws.m,):
        raise ValueError("certificate multiplier count does not match the constraints")
    P = symmetrize(cert.P)
    Npart = np.asarray(cert.Npart, dtype=float)
    if P.shape != (ws.n, ws.n) or Npart.shape != (ws.n, ws.n):
        raise ValueError("certificate part dimension mismatch")
    S = np.tensordot(v, ws.As, axes=1) - ws.C
    equation_ok = float(np.abs(S - P - Npart).max()) <= tol
    psd_ok = float(np.linalg.eigvalsh(P)[0]) >= -tol
    nonneg_ok = float(Npart.min()) >= -tol
    bound = float(v @ ws.b)
    return bool(equation_ok and psd_ok and nonneg_ok), bound


def simplex_fit(columns: np.ndarray, target: np.ndarray,
                max_iter: int = DYKSTRA_MAX_ITER,
                stop: float = DEFAULT_EPS_FEAS / 10):
    """Feasibility of  columns @ w == target,  sum(w) == 1,  w >= 0.

    Dykstra alternating projections between the affine set and the
    nonnegative orthant, in the weight space. Returns ``(distance, w)``
    with the distance normalized like `feasibility_distance`; a distance at
    the accuracy floor means ``target`` is a convex combination of the
    columns.
    """
    D = np.asarray(columns, dtype=float)
    t = np.asarray(target, dtype=float).ravel()
    if D.ndim != 2 or D.shape[0] != t.size:
        raise ValueError("columns/target shape mismatch")
    A = np.vstack([D, np.ones((1, D.shape[1]))])
    b = np.concatenate([t, [1.0]])
    gram_pinv = np.linalg.pinv(A @ A.T)
    b_scale = 1.0 + np.linalg.norm(b)

    w = np.zeros(D.shape[1])
    inc_aff = np.zeros_like(w)
    inc_orth = np.zeros_like(w)

    def measure(u: np.ndarray) -> float:
        aff = float(np.linalg.norm(A @ u - b)) / b_scale
        return max(aff, max(0.0, -float(u.min())))

    last = float("inf")
    for it in range(1, max_iter + 1):
        shifted = w + inc_aff
        w = shifted - A.T @ (gram_pinv @ (A @ shifted - b))
        inc_aff = shifted - w
        shifted = w + inc_orth
        w = np.maximum(shifted, 0.0)
        inc_orth = shifted - w
        if it % 20 == 0 or it == max_iter:
            distance = measure(w)
            if distance <= stop or abs(distance - last) <= 1e-12 * (1.0 + distance):
                break
            last = distance
    return measure(w), w
