"""Verification command line: runs the suites and writes machine-readable
reports.

    triprod theorem31 --d 3 --tol 1e-3 --out report.json
    triprod orbit --d 2
    triprod all --d 3 --seed 1 --format csv --out report.csv

Exit status is 0 when every suite passed, 1 on a suite failure (the
report is still written), 2 on usage errors.  Reports are deterministic
for a fixed config and seed apart from the timestamp and wall-time
fields.  Numbers are serialized as decimals with 17 significant digits.
The TRIPROD_THREADS environment variable caps the worker threads used to
evaluate independent suite points (default: available parallelism).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import List, Optional

import numpy as np

from . import __version__
from .config import TOLERANCES
from .gammafn import SpectralTriple, gamma_ratio
from .lorentz import Dimension, a_power, embed_k, iwasawa, j_metric, \
    make_a, make_n, random_element, reassemble
from .orbits import open_orbit_count
from .triple import (AbcParams, IdentityReport, asymptotic_slope_test,
                     lemma12_check, recursion_suite, t_st_closed_ratio_test,
                     t_st_numeric)

COMMANDS = ("iwasawa-check", "orbit", "lemma12", "triple-eval",
            "recursions", "theorem31", "asymptotics", "all")


@dataclass
class RunConfig:
    command: str
    d: int = 3
    tol: float = TOLERANCES.ratio_spread
    seed: int = 1
    output_path: Optional[str] = None
    format: str = "json"
    lam: complex = 0.5
    mu: complex = 0.5
    nu: complex = 0.5

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.d < 2:
            raise ValueError("d must be >= 2")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.format not in ("json", "csv"):
            raise ValueError("format must be json or csv")


def _threads() -> int:
    env = os.environ.get("TRIPROD_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------

def _suite_iwasawa(cfg: RunConfig, n_elems: int = 1000) -> IdentityReport:
    """Group invariants + factorization round trip on random elements."""
    dim = Dimension(cfg.d)
    rng = np.random.default_rng(cfg.seed)
    j = j_metric(dim)
    worst_metric = worst_round = worst_entry = 0.0
    for _ in range(n_elems):
        g = random_element(dim, rng)
        worst_metric = max(worst_metric, np.abs(g.m.T @ j @ g.m - j).max())
        fac = iwasawa(g)
        back = reassemble(fac, dim)
        worst_round = max(worst_round, np.abs(back.m - g.m).max())
        b = g.m[:, dim.d]
        et = (b[dim.d] + b[dim.d - 1]) / (1.0 + (b[: dim.d - 1] ** 2).sum())
        worst_entry = max(worst_entry,
                          abs(a_power(g, dim.rho)
                              - et ** dim.rho) / et ** dim.rho)
    rep = IdentityReport(identity_name="iwasawa-roundtrip",
                         tol=TOLERANCES.iwasawa_roundtrip)
    rep.points = [{"n_elements": n_elems,
                   "worst_metric_residual": worst_metric,
                   "worst_roundtrip": worst_round,
                   "worst_entry_formula": worst_entry}]
    rep.residuals = [worst_round, worst_entry,
                     worst_metric * (TOLERANCES.iwasawa_roundtrip
                                     / TOLERANCES.metric)]
    rep.max_residual = max(rep.residuals)
    rep.passed = (worst_metric < TOLERANCES.metric
                  and worst_round < TOLERANCES.iwasawa_roundtrip
                  and worst_entry < TOLERANCES.entry_formula)
    return rep


def _suite_orbit(cfg: RunConfig) -> IdentityReport:
    rep = IdentityReport(identity_name="open-orbit-count", tol=1.0)
    r = open_orbit_count(cfg.d)
    expected = 2 if cfg.d == 2 else 1
    ok = (r.open_orbit_count == expected and r.open_orbit_exists
          and r.tangent_rank == cfg.d - 1)
    rep.points = [{"d": r.d, "tangent_rank": r.tangent_rank,
                   "dim_n": r.dim_n, "open_orbit_exists": r.open_orbit_exists,
                   "open_orbit_count": r.open_orbit_count,
                   "expected_count": expected}]
    rep.residuals = [0.0 if ok else 1.0]
    rep.max_residual = rep.residuals[0]
    rep.passed = ok
    return rep


def _suite_lemma12(cfg: RunConfig, n_y: int = 5,
                   n_samples: int = 100_000) -> List[IdentityReport]:
    dim = Dimension(cfg.d)
    rng = np.random.default_rng(cfg.seed)

    def f(ks):
        return ks[..., 0, 0] ** 2

    reports = []
    for i in range(n_y):
        y = random_element(dim, rng)
        rep = lemma12_check(cfg.d, y, f, n_samples,
                            np.random.default_rng(cfg.seed + 1000 + i))
        rep.identity_name = f"k-integral-identity-y{i}"
        reports.append(rep)
    return reports


def _suite_triple_eval(cfg: RunConfig) -> IdentityReport:
    dim = Dimension(cfg.d)
    st = SpectralTriple(cfg.lam, cfg.mu, cfg.nu, dim)
    q = t_st_numeric(st, min(cfg.tol * 1e-2, 1e-6))
    rep = IdentityReport(identity_name="triple-eval", tol=cfg.tol)
    point = {"lam": st.lam, "mu": st.mu, "nu": st.nu,
             "value": q.value, "abs_err": q.abs_err, "evals": q.evals}
    try:
        closed = gamma_ratio(st)
        point["closed_form"] = closed
        point["numeric_over_closed"] = q.value / closed
    except Exception as exc:  # poles are fine for a bare evaluation
        point["closed_form_error"] = str(exc)
    rep.points = [point]
    rep.residuals = [q.abs_err / max(abs(q.value), 1e-300)]
    rep.max_residual = rep.residuals[0]
    rep.passed = rep.max_residual < cfg.tol
    return rep


def _recursion_points(n: int) -> List[AbcParams]:
    """Real parameter points with comfortable convergence margins."""
    raw = [(1.5, 1.5, 1.5), (2.0, 2.0, 1.5), (1.3, 1.3, 1.45),
           (1.5, 1.75, 1.6), (1.8, 2.1, 1.7), (2.25, 2.0, 1.75)]
    return [AbcParams(a, b, c, n) for a, b, c in raw]


def _suite_recursions(cfg: RunConfig) -> List[IdentityReport]:
    n = max(cfg.d - 1, 2)
    return recursion_suite(n, _recursion_points(n),
                           TOLERANCES.recursion_residual, quad_tol=1e-6)


def _suite_theorem31(cfg: RunConfig) -> IdentityReport:
    dim = Dimension(cfg.d)
    lams = (0.5j, 1j, 1.5j, 2j, 3j)
    pts = [SpectralTriple(lam, 0.7j, 0.3j, dim) for lam in lams]
    return t_st_closed_ratio_test(pts, cfg.tol)


def _suite_asymptotics(cfg: RunConfig) -> IdentityReport:
    return asymptotic_slope_test(cfg.d, 0.7j, 0.3j, [8.0, 16.0, 32.0],
                                 tol=0.7)


def _run_suites(cfg: RunConfig) -> List[IdentityReport]:
    tasks = {
        "iwasawa-check": lambda: [_suite_iwasawa(cfg)],
        "orbit": lambda: [_suite_orbit(cfg)],
        "lemma12": lambda: _suite_lemma12(cfg),
        "triple-eval": lambda: [_suite_triple_eval(cfg)],
        "recursions": lambda: _suite_recursions(cfg),
        "theorem31": lambda: [_suite_theorem31(cfg)],
        "asymptotics": lambda: [_suite_asymptotics(cfg)],
    }
    if cfg.command != "all":
        return tasks[cfg.command]()
    order = ["iwasawa-check", "orbit", "lemma12", "recursions",
             "theorem31", "asymptotics"]
    n_workers = min(_threads(), len(order))
    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            chunks = list(pool.map(lambda k: tasks[k](), order))
    else:
        chunks = [tasks[k]() for k in order]
    return [rep for chunk in chunks for rep in chunk]


# ---------------------------------------------------------------------------
# Report serialization (17 significant digits)
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    return format(float(x), ".17g")


def _jsonable(obj):
    if isinstance(obj, complex):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


class _Enc(json.JSONEncoder):
    """JSON encoder printing every float with 17 significant digits."""

    def iterencode(self, o, _one_shot=False):
        def floatstr(x):
            if x != x or x in (float("inf"), float("-inf")):
                return '"%s"' % x
            return _fmt(x)

        walker = json.encoder._make_iterencode(
            {}, self.default, json.encoder.encode_basestring_ascii,
            self.indent, floatstr, self.key_separator, self.item_separator,
            self.sort_keys, self.skipkeys, _one_shot)
        return walker(o, 0)


def _encode_json(payload) -> str:
    return json.dumps(payload, cls=_Enc, indent=1)


def _report_payload(cfg: RunConfig, reports: List[IdentityReport],
                    wall: float) -> dict:
    return {
        "meta": {
            "tool": "triprod",
            "version": __version__,
            "command": cfg.command,
            "d": cfg.d,
            "tol": cfg.tol,
            "seed": cfg.seed,
            "timestamp_utc": datetime.now(timezone.utc).isoformat(),
            "wall_time_s": wall,
        },
        "suites": [
            {
                "name": r.identity_name,
                "points": _jsonable(r.points),
                "max_residual": float(r.max_residual),
                "tol": float(r.tol),
                "pass": bool(r.passed),
            }
            for r in reports
        ],
    }


def _write_csv(payload: dict, stream) -> None:
    w = csv.writer(stream)
    w.writerow(["suite", "point_index", "key", "value"])
    for suite in payload["suites"]:
        for i, pt in enumerate(suite["points"]):
            for k, v in pt.items():
                if isinstance(v, dict) and set(v) == {"re", "im"}:
                    w.writerow([suite["name"], i, k + "_re", _fmt(v["re"])])
                    w.writerow([suite["name"], i, k + "_im", _fmt(v["im"])])
                elif isinstance(v, float):
                    w.writerow([suite["name"], i, k, _fmt(v)])
                else:
                    w.writerow([suite["name"], i, k, v])
        w.writerow([suite["name"], "", "max_residual",
                    _fmt(suite["max_residual"])])
        w.writerow([suite["name"], "", "pass", suite["pass"]])


def run(cfg: RunConfig) -> int:
    """Execute the configured suite(s), write the report, return status."""
    t0 = time.time()
    reports = _run_suites(cfg)
    wall = time.time() - t0
    payload = _report_payload(cfg, reports, wall)

    if cfg.format == "json":
        text = _encode_json(payload)
    else:
        buf = io.StringIO()
        _write_csv(payload, buf)
        text = buf.getvalue()

    if cfg.output_path:
        with open(cfg.output_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text + ("\n" if not text.endswith("\n") else ""))

    ok = all(r.passed for r in reports)
    for r in reports:
        status = "PASS" if r.passed else "FAIL"
        print(f"[{status}] {r.identity_name}: max residual "
              f"{r.max_residual:.3e} (tol {r.tol:g})", file=sys.stderr)
    return 0 if ok else 1


def _parse_complex(text: str) -> complex:
    return complex(text.replace(" ", ""))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="triprod",
        description="Numerical verification of invariant triple products "
                    "on SO(d,1).")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--d", type=int, default=3, help="dimension d >= 2")
    ap.add_argument("--tol", type=float, default=TOLERANCES.ratio_spread)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out", dest="output_path", default=None,
                    help="report file (default: stdout)")
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    ap.add_argument("--lam", type=_parse_complex, default=0.5,
                    help="lambda for triple-eval (complex, e.g. 0.5 or 2j)")
    ap.add_argument("--mu", type=_parse_complex, default=0.5)
    ap.add_argument("--nu", type=_parse_complex, default=0.5)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(command=args.command, d=args.d, tol=args.tol,
                        seed=args.seed, output_path=args.output_path,
                        format=args.format, lam=args.lam, mu=args.mu,
                        nu=args.nu)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
