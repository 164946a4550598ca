"""Deterministic verification suites and report serialization.

Each suite maps a name to a tree of standalone JSON reports plus a flat
CSV summary.  Output bytes depend only on the configuration and seed:
keys are sorted, floats use repr, no timestamps are embedded, and all
computation is sequential regardless of the requested thread count.
"""

from __future__ import annotations

import csv
import io
import json
import math
import subprocess
from pathlib import Path

import numpy as np

from . import SCHEMA_VERSION, __version__
from .errors import ConfigError
from .spaces import NormedSpace
from .verify import (
    dalpha_operator, dalpha_set, degenerate_fixture, rotated_decay_set,
    run_example_dalpha, step3_fixture, trace_proof_31, verify_thm31,
    verify_thm32, verify_cor35_and_thm2n,
)
from .widths import diagonal_width_upper

__all__ = ["SUITES", "run_suite", "write_reports", "build_identifier",
           "sanitize", "summary_csv", "exit_code_for"]

SUITES = ["thm31", "thm32", "cor35", "thm2n", "example", "trace31", "all"]


def build_identifier() -> str:
    """git-describe-style build id; falls back to the package version."""
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            capture_output=True, text=True, timeout=10,
            cwd=Path(__file__).resolve().parent)
        if out.returncode == 0:
            return out.stdout.strip()
    except OSError:
        pass
    return f"v{__version__}"


def sanitize(obj):
    """Recursively convert numpy scalars/arrays for stable JSON output."""
    if isinstance(obj, dict):
        return {str(k): sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return sanitize(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, float) and (math.isnan(obj) or math.isinf(obj)):
        return repr(obj)
    return obj


def _stamp(d, build):
    d = sanitize(d)
    d["schema_version"] = SCHEMA_VERSION
    d["build"] = build
    return d


# ---------------------------------------------------------------------------
# Suite bodies: each returns {relative_name: report_dict}
# ---------------------------------------------------------------------------


def _suite_example(cfg):
    out = {}
    alphas = cfg.get("alphas", [0.5, 1.0, 1.5])
    qs = cfg.get("qs", [3.0, 4.0, 8.0])
    m = int(cfg.get("m", 64))
    n_max = int(cfg.get("n_max", m))
    for alpha in alphas:
        for q in qs:
            rep = run_example_dalpha(alpha, q, m, n_max)
            name = f"example_a{alpha:g}_q{q:g}.json"
            out[name] = rep.to_json_dict()
    return out


def _suite_thm31(cfg):
    out = {}
    seed = int(cfg.get("seed", 7))
    log_base = cfg.get("log_base", "e")
    m = int(cfg.get("m", 64))
    alpha = float(cfg.get("alpha", 1.5))
    q = float(cfg.get("q", 4.0))
    n_hi = int(cfg.get("n_hi", 32))

    cset, space = dalpha_set(alpha, q, m)
    wu = [diagonal_width_upper(alpha, q, n, m) for n in range(n_hi + 1)]
    mu = abs(0.5 - 1.0 / q)
    rep = verify_thm31(cset, space, s=alpha, C0=1.0, mu=mu, C1=1.0,
                       n_range=range(2, n_hi + 1), width_uppers=wu,
                       log_base=log_base)
    out["thm31_dalpha.json"] = rep.to_json_dict()

    cset2, space2 = rotated_decay_set(max(40, n_hi + 2), 1.5, seed=seed)
    rep2 = verify_thm31(cset2, space2, s=1.5, C0=1.0, mu=0.0, C1=1.0,
                        n_range=range(2, n_hi + 1), log_base=log_base,
                        theorem_id="thm31")
    out["thm31_hilbert.json"] = rep2.to_json_dict()

    # the Lebesgue-space corollary shape: mu determined by the exponent
    rep3 = verify_thm31(cset, space, s=alpha, C0=1.0, mu=mu, C1=1.0,
                        n_range=range(2, n_hi + 1), width_uppers=wu,
                        log_base=log_base, theorem_id="cor_lp")
    out["cor_lp_dalpha.json"] = rep3.to_json_dict()
    return out


def _suite_trace31(cfg):
    out = {}
    seed = int(cfg.get("seed", 7))
    log_base = cfg.get("log_base", "e")
    n = int(cfg.get("n", 3))

    cset, space = rotated_decay_set(12, 1.0, seed=seed)
    tr = trace_proof_31(cset, space, s=1.0, n=n, seed=seed,
                        log_base=log_base)
    out["trace31_hilbert.json"] = tr.to_json_dict()

    csetd, spaced = dalpha_set(1.0, 4.0, 12)
    trd = trace_proof_31(csetd, spaced, s=1.0, n=n, seed=seed,
                         log_base=log_base)
    out["trace31_dalpha.json"] = trd.to_json_dict()

    cset3, space3, subs = step3_fixture(n=n)
    tr3 = trace_proof_31(cset3, space3, s=1.0, n=n, subspaces=subs,
                         seed=seed, log_base=log_base)
    out["trace31_step3.json"] = tr3.to_json_dict()

    csetg, spaceg = degenerate_fixture()
    trg = trace_proof_31(csetg, spaceg, s=1.0, n=n, seed=seed,
                         log_base=log_base)
    out["trace31_degenerate.json"] = trg.to_json_dict()
    return out


def _suite_thm32(cfg):
    out = {}
    seed = int(cfg.get("seed", 7))
    samples = int(cfg.get("sphere_samples", 1024))
    rng = np.random.default_rng(seed)
    for i in range(int(cfg.get("operators", 3))):
        T = rng.normal(size=(12, 12)) / 4.0
        E = NormedSpace.lp(12, 2)
        X = NormedSpace.lp(12, 2)
        for n in (1, 2):
            rep = verify_thm32(T, E, X, n, sphere_samples=samples,
                               seed=seed + i)
            out[f"thm32_hilbert_{i}_n{n}.json"] = rep.to_json_dict()
        repg = verify_thm32(T, E, X, 2, sphere_samples=samples,
                            seed=seed + i, widths_kind="gelfand")
        out[f"thm32_gelfand_{i}.json"] = repg.to_json_dict()

    Td = dalpha_operator(1.0, 16)
    X4 = NormedSpace.lp(16, 4.0)
    E2 = NormedSpace.lp(16, 2)
    wu = [diagonal_width_upper(1.0, 4.0, k, 16) for k in range(2)]
    repd = verify_thm32(Td, E2, X4, 2, sphere_samples=samples, seed=seed,
                        width_uppers=wu)
    out["thm32_dalpha.json"] = repd.to_json_dict()
    return out


def _suite_cor35(cfg, want="cor35"):
    out = {}
    seed = int(cfg.get("seed", 7))
    samples = int(cfg.get("sphere_samples", 1024))
    rng = np.random.default_rng(seed)
    T = rng.normal(size=(8, 8)) / 3.0
    X = NormedSpace.lp(8, 2)
    for n in (1, 2, 3, 4):
        r35, r2n = verify_cor35_and_thm2n(T, X, n, sphere_samples=samples,
                                          seed=seed)
        rep = r35 if want == "cor35" else r2n
        out[f"{want}_hilbert_n{n}.json"] = rep.to_json_dict()

    Td = dalpha_operator(1.0, 16)
    X4 = NormedSpace.lp(16, 4.0)
    wu = [diagonal_width_upper(1.0, 4.0, k, 16) for k in range(2)]
    r35, r2n = verify_cor35_and_thm2n(Td, X4, 2, sphere_samples=samples,
                                      seed=seed, width_uppers=wu,
                                      premise=(1.0, 1.0 + 0.5 - 0.25))
    rep = r35 if want == "cor35" else r2n
    out[f"{want}_dalpha.json"] = rep.to_json_dict()
    return out


def run_suite(suite: str, cfg: dict | None = None) -> dict:
    """Run one named suite; returns {relative_filename: report_dict}."""
    cfg = dict(cfg or {})
    build = build_identifier()
    bodies = {
        "example": _suite_example,
        "thm31": _suite_thm31,
        "trace31": _suite_trace31,
        "thm32": _suite_thm32,
        "cor35": lambda c: _suite_cor35(c, "cor35"),
        "thm2n": lambda c: _suite_cor35(c, "thm_2n"),
    }
    if suite == "all":
        out = {}
        for name in ["example", "thm31", "trace31", "thm32", "cor35",
                     "thm2n"]:
            sub = bodies[name](cfg)
            for fname, d in sub.items():
                out[f"{name}/{fname}"] = _stamp(d, build)
        return out
    if suite not in bodies:
        raise ConfigError(f"unknown suite {suite!r}; choose from {SUITES}")
    return {fname: _stamp(d, build)
            for fname, d in bodies[suite](cfg).items()}


def summary_rows(reports: dict) -> list[dict]:
    """Flat summary table rows (theorem_id, n, lhs, rhs, slack, pass)."""
    rows = []
    for fname in sorted(reports):
        d = reports[fname]
        if "steps" in d:  # proof trace: one row per tagged step
            for st in d["steps"]:
                rows.append({
                    "theorem_id": "proof_trace_31",
                    "n": d["n"],
                    "lhs": st["lhs"],
                    "rhs": st["rhs"],
                    "slack": st["slack"],
                    "pass": st["pass"],
                })
            continue
        n = d.get("details", {}).get("n",
                                     d.get("details", {}).get("worst_n", ""))
        rows.append({
            "theorem_id": d.get("theorem_id", ""),
            "n": n,
            "lhs": d.get("lhs", ""),
            "rhs": d.get("rhs", ""),
            "slack": d.get("slack", ""),
            "pass": d.get("pass", ""),
        })
    return rows


def summary_csv(reports: dict) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["theorem_id", "n", "lhs", "rhs",
                                        "slack", "pass"], lineterminator="\n")
    w.writeheader()
    for row in summary_rows(reports):
        w.writerow(row)
    return buf.getvalue()


def write_reports(reports: dict, out_dir, fmt="json") -> Path:
    """Write the report tree plus a summary.csv; returns the directory."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for fname, d in reports.items():
        path = out / fname
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(d, sort_keys=True, indent=2) + "\n")
    # the flat summary table is written in every format mode
    (out / "summary.csv").write_text(summary_csv(reports))
    return out


def exit_code_for(reports: dict) -> int:
    """0 when no certified failure is present, else 1."""
    for d in reports.values():
        if "steps" in d:
            if not d.get("pass", True) and not d.get("exhausted", False):
                return 1
            continue
        if d.get("status") == "fail":
            return 1
    return 0
