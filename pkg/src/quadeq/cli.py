"""Command-line front end.

Exit codes: 0 success, 1 usage or configuration error, 2 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import counterexample as cx
from .mathieu import DEFAULT_M, char_value_b2, find_qstar, se2_coefficients, se2_eval
from .quadratic import BilinearMap, nondegeneracy_probe

COMMANDS = ("b2-table", "find-qstar", "se2-table", "verify", "probe", "export")
EXIT_OK, EXIT_USAGE, EXIT_FAILED = 0, 1, 2

PROBE_FORMS = {
    "dot": lambda: BilinearMap.from_matrix(np.eye(2)),
    "square": lambda: BilinearMap(np.ones((1, 1, 1))),
    "complex": lambda: BilinearMap(np.array(
        [[[1.0, 0.0], [0.0, 1.0]], [[0.0, 1.0], [-1.0, 0.0]]])),
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    q_min: float = 0.0
    q_max: float = 20.0
    q_step: float = 1.0
    grid_n: int = cx.DEFAULT_N
    truncation_M: int = DEFAULT_M
    tol: float = 1e-8
    seed: int = 0
    output_path: str | None = None
    format: str = "json"
    form: str = "dot"
    trials: int = 16

    def validate(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if not (self.tol > 0 and math.isfinite(self.tol)):
            raise UsageError("--tol must be positive")
        if self.grid_n < 5:
            raise UsageError("--grid-n must be >= 5")
        if self.truncation_M < 8:
            raise UsageError("--truncation-M must be >= 8")
        if self.format not in ("csv", "json"):
            raise UsageError("--format must be csv or json")
        if self.command == "b2-table":
            if not self.q_step > 0:
                raise UsageError("--q-step must be positive")
            if self.q_max < self.q_min:
                raise UsageError("--q-max must not be below --q-min")
        if self.command == "probe" and self.form not in PROBE_FORMS:
            raise UsageError(f"--form must be one of {sorted(PROBE_FORMS)}")


def _fmt(x: float) -> str:
    return format(x, ".17g")


def _q_values(cfg: RunConfig) -> list[float]:
    count = int(math.floor((cfg.q_max - cfg.q_min) / cfg.q_step + 1e-9)) + 1
    return [cfg.q_min + i * cfg.q_step for i in range(count)]


def _write_table(header: Sequence[str], rows: list[Sequence[float]], fmt: str) -> str:
    if fmt == "json":
        records = [dict(zip(header, row)) for row in rows]
        return json.dumps(records, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(x) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit(cfg: RunConfig, text: str, out):
    if cfg.output_path:
        try:
            with open(cfg.output_path, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise UsageError(f"cannot write {cfg.output_path}: {exc}") from exc
    else:
        out.write(text)


def _qstar(cfg: RunConfig) -> float:
    return find_qstar(0.0, 20.0, tol=min(cfg.tol, 1e-10), M=cfg.truncation_M)


def cmd_b2_table(cfg: RunConfig, out) -> int:
    rows = [(q, char_value_b2(q, cfg.truncation_M)) for q in _q_values(cfg)]
    for q, b in rows:
        print(f"{q:g}, {b!r}", file=out)
    if cfg.output_path:
        _emit(cfg, _write_table(("q", "b2"), rows, cfg.format), out)
    return EXIT_OK


def cmd_find_qstar(cfg: RunConfig, out) -> int:
    q = find_qstar(0.0, 20.0, tol=cfg.tol, M=cfg.truncation_M)
    gap = abs(char_value_b2(q, cfg.truncation_M) + 1.0)
    print(f"q* = {q!r}", file=out)
    print(f"|b2(q*) + 1| = {gap:.3e}", file=out)
    if cfg.output_path:
        _emit(cfg, _write_table(("qstar", "b2_gap"), [(q, gap)], cfg.format), out)
    return EXIT_OK


def cmd_se2_table(cfg: RunConfig, out) -> int:
    q = _qstar(cfg)
    plus = se2_coefficients(q, cfg.truncation_M)
    minus = se2_coefficients(-q, cfg.truncation_M)
    x = cx.Grid2D(cfg.grid_n).nodes
    rows = list(zip(x.tolist(), se2_eval(plus, x).tolist(), se2_eval(minus, x).tolist()))
    text = _write_table(("x", "se2_plus", "se2_minus"), rows, cfg.format)
    print(f"se2(x, +-q*) at q* = {q!r}, {len(rows)} points", file=out)
    if cfg.output_path:
        _emit(cfg, text, out)
    else:
        out.write(text)
    return EXIT_OK


def verification_report(cfg: RunConfig) -> dict:
    q = _qstar(cfg)
    ce = cx.build(q, M=cfg.truncation_M, n=cfg.grid_n)
    a, b, la, lb = ce.collision()
    fa, fb, fla, flb = ce.collision(fd=True)
    fd_u, fd_v = cx.fd_laplacian(ce.u), cx.fd_laplacian(ce.v)
    return {
        "qstar": q,
        "b2_qstar": char_value_b2(q, cfg.truncation_M),
        "grid_n": cfg.grid_n,
        "truncation_M": cfg.truncation_M,
        "tol": cfg.tol,
        "annihilation": cx.verify_bilinear_annihilation(
            ce.u, ce.v, ce.lap_u, ce.lap_v, cfg.tol).to_dict(),
        "equal_rhs": cx.verify_equal_rhs(a, b, la, lb, cfg.tol).to_dict(),
        # the stencil route is O(h^2) and is reported, not gated on tol
        "fd_annihilation": cx.verify_bilinear_annihilation(
            ce.u, ce.v, fd_u, fd_v, cfg.tol).to_dict(),
        "fd_equal_rhs": cx.verify_equal_rhs(fa, fb, fla, flb, cfg.tol).to_dict(),
    }


def cmd_verify(cfg: RunConfig, out) -> int:
    rep = verification_report(cfg)
    ann, eq = rep["annihilation"], rep["equal_rhs"]
    print(f"q* = {rep['qstar']!r}  b2(q*) = {rep['b2_qstar']!r}", file=out)
    print(f"analytic  max|u Lap v + v Lap u| = {ann['max_abs']:.3e}", file=out)
    print(f"analytic  max|a Lap a - b Lap b| = {eq['max_abs']:.3e}", file=out)
    print(f"stencil   max|u Lap v + v Lap u| = {rep['fd_annihilation']['max_abs']:.3e}", file=out)
    print(f"stencil   max|a Lap a - b Lap b| = {rep['fd_equal_rhs']['max_abs']:.3e}", file=out)
    print(f"distinctness |a - b| = {eq['dist_minus']:.6g}, |a + b| = {eq['dist_plus']:.6g}", file=out)
    ok = ann["passed"] and eq["passed"]
    print("PASS" if ok else "FAIL", file=out)
    _emit(cfg, _dump_json(rep), out)
    return EXIT_OK if ok else EXIT_FAILED


def cmd_probe(cfg: RunConfig, out) -> int:
    B = PROBE_FORMS[cfg.form]()
    verdict = nondegeneracy_probe(B, trials=cfg.trials, tol=cfg.tol, seed=cfg.seed)
    rec = {
        "form": cfg.form,
        "kind": verdict.kind,
        "trials": verdict.confidence.trials,
        "evaluations": verdict.confidence.evaluations,
        "min_gap": verdict.confidence.min_gap,
        "witness": None if verdict.witness is None else [w.tolist() for w in verdict.witness],
    }
    print(f"{cfg.form}: {verdict.kind} (min gap {verdict.confidence.min_gap:.3e})", file=out)
    if cfg.output_path:
        _emit(cfg, _dump_json(rec), out)
    return EXIT_OK


def export_grid(cfg: RunConfig) -> str:
    q = _qstar(cfg)
    ce = cx.build(q, M=cfg.truncation_M, n=cfg.grid_n)
    X, Y = ce.grid.mesh()
    u, v, lu, lv = ce.u.values, ce.v.values, ce.lap_u.values, ce.lap_v.values
    res = u * lv + v * lu
    cols = ("x", "y", "u", "v", "lap_u", "lap_v", "residual")
    arrays = [arr.ravel() for arr in (X, Y, u, v, lu, lv, res)]
    if cfg.format == "json":
        return _dump_json({c: a.tolist() for c, a in zip(cols, arrays)})
    lines = [",".join(cols)]
    for row in zip(*arrays):
        lines.append(",".join(_fmt(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def cmd_export(cfg: RunConfig, out) -> int:
    text = export_grid(cfg)
    if cfg.output_path:
        _emit(cfg, text, out)
        print(f"wrote {cfg.grid_n}x{cfg.grid_n} grid to {cfg.output_path}", file=out)
    else:
        out.write(text)
    return EXIT_OK


HANDLERS = {
    "b2-table": cmd_b2_table,
    "find-qstar": cmd_find_qstar,
    "se2-table": cmd_se2_table,
    "verify": cmd_verify,
    "probe": cmd_probe,
    "export": cmd_export,
}


def run(config: RunConfig, out=None) -> int:
    out = out or sys.stdout
    try:
        config.validate()
        return HANDLERS[config.command](config, out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="quadeq", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--q-min", type=float, default=0.0)
    parser.add_argument("--q-max", type=float, default=20.0)
    parser.add_argument("--q-step", type=float, default=1.0)
    parser.add_argument("--grid-n", type=int, default=cx.DEFAULT_N)
    parser.add_argument("--truncation-M", type=int, default=DEFAULT_M)
    parser.add_argument("--tol", type=float, default=1e-8)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--output-path", default=None)
    parser.add_argument("--format", choices=("csv", "json"), default="json")
    parser.add_argument("--form", default="dot", help="probe: one of dot, square, complex")
    parser.add_argument("--trials", type=int, default=16)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    try:
        ns = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run(RunConfig(**vars(ns)))


if __name__ == "__main__":
    sys.exit(main())
