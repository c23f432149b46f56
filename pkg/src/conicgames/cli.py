"""Command-line front end.

Subcommands: ``value`` (game values and the full chain), ``member``
(correlation-set membership), ``graph`` (exact and relaxed graph
parameters), ``csp`` (satisfiability, binarization, game compilation), and
``examples`` (write the bundled example inputs). Reports are JSON (floats at
17 significant digits, deterministic layout, run configuration embedded) or
aligned text tables (floats at 6 significant digits).

Exit codes: 0 success, 2 parse error, 3 size cap exceeded, 4 precondition
violated, 5 solver hit its iteration limit without reaching a verdict.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

import numpy as np

from . import catalog, corrsets, gamevalues, syncgraph
from .conicsolve import Cone
from .errors import CapExceededError, ParseError, PreconditionError
from .gamecore import game_to_dict, load_game
from .syncgraph import load_csp, load_graph

__all__ = ["RunConfig", "main"]

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_CAP = 3
EXIT_PRECONDITION = 4
EXIT_NO_VERDICT = 5


class SolverNoVerdict(RuntimeError):
    """The iteration limit was reached with residuals too large to report a result."""


@dataclass(frozen=True)
class RunConfig:
    tol: float = 1e-7
    max_iter: int = 200_000
    eps_feas: float = 1e-6
    seed: int = 42
    output: str = ""  # empty = stdout
    format: str = "json"

    def __post_init__(self):
        if self.tol <= 0:
            raise ParseError("--tol must be positive")
        if self.eps_feas < self.tol:
            raise ParseError("--eps-feas must be at least --tol")
        if self.format not in ("json", "table"):
            raise ParseError("--format must be json or table")

    def as_dict(self) -> dict:
        return {"tol": self.tol, "max_iter": self.max_iter,
                "eps_feas": self.eps_feas, "seed": self.seed,
                "format": self.format}


# ---------------------------------------------------------------------------
# deterministic JSON with floats at 17 significant digits

def _format_float(x: float) -> str:
    if x != x or x in (float("inf"), float("-inf")):
        return "null"
    return f"{x:.17g}"


def dumps(obj, indent: int = 0) -> str:
    pad = " " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        rows = [f'{pad} "{k}": {dumps(v, indent + 1).lstrip()}' for k, v in obj.items()]
        return "{\n" + ",\n".join(rows) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        seq = list(obj)
        if not seq:
            return "[]"
        flat = all(isinstance(v, (int, float, np.integer, np.floating)) for v in seq)
        if flat:
            return "[" + ", ".join(dumps(v) for v in seq) + "]"
        rows = [pad + " " + dumps(v, indent + 1).lstrip() for v in seq]
        return "[\n" + ",\n".join(rows) + f"\n{pad}]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if obj is None:
        return "null"
    if isinstance(obj, str):
        import json as _json
        return _json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist(), indent)
    raise TypeError(f"cannot serialize {type(obj)}")


def _emit(text: str, cfg: RunConfig) -> None:
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _table(rows) -> str:
    rows = [[str(c) for c in row] for row in rows]
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip()
                     for row in rows)


def _fmt6(x: float) -> str:
    return f"{x:.6g}"


# ---------------------------------------------------------------------------
# subcommands

_VALUE_SETS = ("classical", "nosignaling", "unrestricted", "dnn", "sdp1", "all")


def _check_solved(report, cfg: RunConfig, name: str):
    if report.status == "MAX_ITER" and report.residuals is not None:
        if report.residuals[0] > cfg.eps_feas:
            raise SolverNoVerdict(
                f"{name}: iteration limit reached with primal residual "
                f"{report.residuals[0]:.3e}")
    return report


def cmd_value(path: str, which: str, cfg: RunConfig) -> int:
    g = load_game(path)
    values: dict = {}
    residuals: dict = {}
    certificate = None
    solver_kw = {"tol": cfg.tol, "max_iter": cfg.max_iter}

    def run(name):
        if name == "classical":
            rep = gamevalues.value_classical(g)
        elif name == "nosignaling":
            rep = _check_solved(gamevalues.value_nosignaling(g, **solver_kw), cfg, name)
        elif name == "unrestricted":
            rep = gamevalues.value_unrestricted(g)
        elif name == "dnn":
            rep = _check_solved(gamevalues.value_dnn(g, **solver_kw), cfg, name)
        elif name == "sdp1":
            rep = _check_solved(gamevalues.value_sdp1(g, **solver_kw), cfg, name)
        else:
            raise ParseError(f"unknown value set {name!r}")
        values[name] = rep.value
        if rep.residuals is not None:
            residuals[name] = list(rep.residuals)
        return rep

    names = ["classical", "dnn", "sdp1", "nosignaling", "unrestricted"] \
        if which == "all" else [which]
    for name in names:
        rep = run(name)
        if name == "dnn" and rep.certificate is not None:
            from .conicsolve import verify_certificate
            prog = gamevalues._value_program(g, Cone.DNN)
            ok, bound = verify_certificate(rep.certificate, prog, tol=cfg.eps_feas)
            certificate = {"v": list(rep.certificate.v), "bound": bound, "verified": ok}

    report = {"config": cfg.as_dict(), "game": game_to_dict(g), "values": values,
              "residuals": residuals}
    if certificate is not None:
        report["certificate"] = certificate
    if which == "all":
        chain = gamevalues.ValueChain(
            wC=values["classical"], wDNN=values["dnn"], wSDP1=values["sdp1"],
            wNS=values["nosignaling"], wP=values["unrestricted"])
        report["chain"] = [{"check": label, "lhs": lhs, "rhs": rhs, "ok": ok}
                           for label, lhs, rhs, ok in chain.inequalities()]
    if cfg.format == "json":
        _emit(dumps(report), cfg)
    else:
        rows = [["set", "value"]]
        rows += [[name, _fmt6(values[name])] for name in names]
        lines = [_table(rows)]
        if which == "all":
            checks = [["check", "", "verdict"]]
            checks += [[c["check"], f'{_fmt6(c["lhs"])} vs {_fmt6(c["rhs"])}',
                        "OK" if c["ok"] else "VIOLATED"] for c in report["chain"]]
            lines.append(_table(checks))
        if certificate is not None:
            lines.append(f"dual bound {_fmt6(certificate['bound'])} "
                         f"({'verified' if certificate['verified'] else 'UNVERIFIED'})")
        _emit("\n\n".join(lines), cfg)
    return EXIT_OK


_MEMBER_SETS = ("probability", "nosignaling", "classical", "dnn", "npa1")


def cmd_member(path: str, which: str, cfg: RunConfig, witness_path: str = "") -> int:
    p = corrsets.load_correlation(path)
    witness = None
    if which == "probability":
        ok = corrsets.is_correlation(p)
        slack = max(0.0, -float(np.asarray(p).min()))
        norm = float(np.abs(np.asarray(p).sum(axis=(0, 1)) - 1.0).max())
        verdict = corrsets.MembershipVerdict("IN" if ok else "OUT", max(slack, norm))
    elif which == "nosignaling":
        ok = corrsets.is_correlation(p) and corrsets.is_nosignaling(p)
        verdict = corrsets.MembershipVerdict("IN" if ok else "OUT",
                                             corrsets.signaling_violation(p))
    elif which == "classical":
        verdict = corrsets.classical_membership(p, eps_feas=cfg.eps_feas)
    elif which == "dnn":
        verdict = corrsets.corr_membership(p, Cone.DNN, eps_feas=cfg.eps_feas)
        witness = verdict.witness
    elif which == "npa1":
        verdict = corrsets.npa1_membership(p, eps_feas=cfg.eps_feas)
        witness = verdict.witness
    else:
        raise ParseError(f"unknown membership set {which!r}")

    report = {"config": cfg.as_dict(), "set": which, "status": verdict.status,
              "distance": verdict.distance}
    if witness_path and witness is not None:
        with open(witness_path, "w", encoding="utf-8") as fh:
            fh.write(dumps({"n": witness.shape[0], "X": witness}) + "\n")
        report["witness"] = witness_path
    if cfg.format == "json":
        _emit(dumps(report), cfg)
    else:
        extra = f"  witness={witness_path}" if witness_path and witness is not None else ""
        _emit(f"{which}: {verdict.status} (distance {verdict.distance:.3e}){extra}", cfg)
    return EXIT_OK


def cmd_graph(path: str, task: str, cfg: RunConfig, k=None, parameter: str = "chromatic") -> int:
    G = load_graph(path)
    report = {"config": cfg.as_dict(), "task": task}
    if task == "chromatic":
        report["chromatic_number"] = syncgraph.chromatic_number(G)
        line = f"chromatic number: {report['chromatic_number']}"
    elif task == "independence":
        report["independence_number"] = syncgraph.independence_number(G)
        line = f"independence number: {report['independence_number']}"
    elif task == "qbound":
        param = parameter.upper()
        if k is not None:
            verdict = syncgraph.quantum_graph_bounds(G, param, k, eps_feas=cfg.eps_feas)
            status = {"IN": "FEASIBLE", "OUT": "INFEASIBLE"}.get(verdict.status, "UNDECIDED")
            report.update({"parameter": parameter, "k": k, "verdict": status,
                           "distance": verdict.distance})
            line = f"{parameter} relaxation at k={k}: {status} (distance {verdict.distance:.3e})"
        else:
            sweep = []
            found = None
            for kk in range(1, G.n + 1):
                verdict = syncgraph.quantum_graph_bounds(G, param, kk, eps_feas=cfg.eps_feas)
                status = {"IN": "FEASIBLE", "OUT": "INFEASIBLE"}.get(verdict.status, "UNDECIDED")
                sweep.append({"k": kk, "verdict": status, "distance": verdict.distance})
                if param == "CHROMATIC" and status == "FEASIBLE":
                    found = kk
                    break
                if param == "INDEPENDENCE":
                    if status == "FEASIBLE":
                        found = kk
                    else:
                        break
            report.update({"parameter": parameter, "sweep": sweep, "k": found})
            line = f"{parameter} relaxation: k = {found} (sweep of {len(sweep)})"
    else:
        raise ParseError(f"unknown graph task {task!r}")
    _emit(dumps(report) if cfg.format == "json" else line, cfg)
    return EXIT_OK


def cmd_csp(path: str, task: str, cfg: RunConfig, out: str = "") -> int:
    c = load_csp(path)
    report = {"config": cfg.as_dict(), "task": task}
    if task == "sat":
        sat = syncgraph.csp_satisfiable(c)
        report["satisfiable"] = sat
        line = "SAT" if sat else "UNSAT"
    elif task == "binarize":
        binary = syncgraph.csp_binarize(c)
        payload = syncgraph.csp_to_dict(binary)
        if out:
            syncgraph.save_csp(binary, out)
            report["written"] = out
            line = f"binarized CSP written to {out}"
        else:
            report["csp"] = payload
            line = dumps(payload)
    elif task == "compile":
        binary = c if all(len(x.scope) == 2 for x in c.constraints) else syncgraph.csp_binarize(c)
        game = syncgraph.csp_game(binary)
        payload = game_to_dict(game)
        if out:
            from .gamecore import save_game
            save_game(game, out)
            report["written"] = out
            line = f"compiled game written to {out}"
        else:
            report["game"] = payload
            line = dumps(payload)
    elif task == "game-sat":
        binary = c if all(len(x.scope) == 2 for x in c.constraints) else syncgraph.csp_binarize(c)
        sat = syncgraph.csp_satisfiable(c)
        if binary.variables == 0:
            game_sat = sat  # no variables: nothing to compile, decision is direct
        else:
            verdict = syncgraph.sync_perfect(syncgraph.csp_game(binary), Cone.CLASSICAL)
            game_sat = verdict.status == "IN"
        report.update({"satisfiable": sat, "game_satisfiable": game_sat,
                       "cross_check": "OK" if sat == game_sat else "MISMATCH"})
        line = (f"{'SAT' if game_sat else 'UNSAT'}, cross-check "
                f"{'OK' if sat == game_sat else 'MISMATCH'}")
    else:
        raise ParseError(f"unknown csp task {task!r}")
    _emit(dumps(report) if cfg.format == "json" else line, cfg)
    return EXIT_OK


def cmd_examples(directory: str, cfg: RunConfig) -> int:
    created = catalog.write_example_files(directory)
    report = {"config": cfg.as_dict(), "written": [str(p) for p in created]}
    if cfg.format == "json":
        _emit(dumps(report), cfg)
    else:
        _emit("\n".join(str(p) for p in created), cfg)
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conicgames",
        description="Values and correlation-set oracles for two-player nonlocal games.")
    parser.add_argument("--tol", type=float, default=1e-7,
                        help="solver residual tolerance (default 1e-7)")
    parser.add_argument("--max-iter", type=int, default=200_000,
                        help="solver iteration limit (default 200000)")
    parser.add_argument("--eps-feas", type=float, default=1e-6,
                        help="feasibility epsilon for verdicts (default 1e-6)")
    parser.add_argument("--seed", type=int, default=42, help="seed recorded in reports")
    parser.add_argument("--output", default="", help="write the report here instead of stdout")
    parser.add_argument("--format", default="json", choices=("json", "table"))
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("value", help="compute game values")
    p.add_argument("game", help="game JSON file")
    p.add_argument("set", choices=_VALUE_SETS)

    p = sub.add_parser("member", help="correlation-set membership")
    p.add_argument("correlation", help="correlation JSON file")
    p.add_argument("set", choices=_MEMBER_SETS)
    p.add_argument("--witness", default="", help="write the witness matrix here")

    p = sub.add_parser("graph", help="graph parameters")
    p.add_argument("graph", help="graph JSON file")
    p.add_argument("task", choices=("chromatic", "independence", "qbound"))
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--parameter", default="chromatic",
                   choices=("chromatic", "independence"),
                   help="which relaxation qbound tests (default chromatic)")

    p = sub.add_parser("csp", help="constraint-satisfaction pipeline")
    p.add_argument("csp", help="CSP JSON file")
    p.add_argument("task", choices=("sat", "binarize", "compile", "game-sat"))
    p.add_argument("--out", default="", help="output file for binarize/compile")

    p = sub.add_parser("examples", help="write bundled example inputs")
    p.add_argument("--dir", default="conicgames-examples")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(tol=args.tol, max_iter=args.max_iter, eps_feas=args.eps_feas,
                        seed=args.seed, output=args.output, format=args.format)
        if args.command == "value":
            return cmd_value(args.game, args.set, cfg)
        if args.command == "member":
            return cmd_member(args.correlation, args.set, cfg, witness_path=args.witness)
        if args.command == "graph":
            return cmd_graph(args.graph, args.task, cfg, k=args.k, parameter=args.parameter)
        if args.command == "csp":
            return cmd_csp(args.csp, args.task, cfg, out=args.out)
        if args.command == "examples":
            return cmd_examples(args.dir, cfg)
        raise ParseError(f"unknown command {args.command!r}")
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except SolverNoVerdict as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_VERDICT


if __name__ == "__main__":
    sys.exit(main())
