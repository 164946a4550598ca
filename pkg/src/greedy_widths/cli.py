"""Command-line interface.

Subcommands: greedy, widths, gamma, bm-bound, verify, plot.  Exit codes:
0 for success (including inconclusive verification), 1 for a certified
inequality failure, 2 for configuration or I/O errors.  All outputs are
deterministic for a fixed seed: sorted keys, no timestamps, sequential
computation regardless of the requested thread count.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import SCHEMA_VERSION
from .errors import ConfigError, GreedyWidthsError
from .geometry import john_ellipsoid
from .greedy import GreedyTrace, run_greedy
from .grothendieck import gamma_n
from .spaces import CompactSet, NormedSpace
from .subspaces import Subspace
from .suites import (SUITES, build_identifier, exit_code_for, run_suite,
                     sanitize, summary_csv, write_reports)
from .widths import gelfand_width, hilbert_widths, kolmogorov_width

__all__ = ["main", "emit_plots", "RunConfig"]


# ---------------------------------------------------------------------------
# Config handling
# ---------------------------------------------------------------------------

# flags that every subcommand accepts; config files may set any of them
COMMON_KEYS = {"seed", "threads", "tol", "out", "format", "log_base"}
COMMAND_KEYS = {
    "greedy": {"set", "p", "n", "polish"},
    "widths": {"op", "domain_p", "target_p", "n", "method"},
    "gamma": {"op", "domain_p", "target_p", "n", "budget"},
    "bm-bound": {"subspace", "samples"},
    "verify": {"suite", "config", "alpha", "alphas", "q", "qs", "m",
               "n_max", "n_hi", "n", "sphere_samples", "operators"},
    "plot": {"reports"},
}


class RunConfig:
    """Validated parameter set for one command.

    Values come from an optional JSON config file, overridden by any
    explicitly given command-line flags; unknown fields are rejected.
    Round-trips byte-identically through ``to_json``.
    """

    def __init__(self, command: str, values: dict):
        allowed = COMMON_KEYS | COMMAND_KEYS.get(command, set())
        unknown = set(values) - allowed - {"schema_version"}
        if unknown:
            raise ConfigError(
                f"unknown config fields for {command!r}: {sorted(unknown)}")
        self.command = command
        self.values = dict(values)

    def get(self, key, default=None):
        return self.values.get(key, default)

    def to_json_dict(self):
        d = dict(sorted(self.values.items()))
        d["schema_version"] = SCHEMA_VERSION
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def load(cls, command: str, path, overrides: dict) -> "RunConfig":
        base = {}
        if path is not None:
            base = json.loads(Path(path).read_text())
            if not isinstance(base, dict):
                raise ConfigError("config file must hold a JSON object")
            base.pop("schema_version", None)
        base.update({k: v for k, v in overrides.items() if v is not None})
        return cls(command, base)


def _load_json(path):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read JSON from {path}: {exc}") from exc


def _load_matrix(path):
    d = _load_json(path)
    if isinstance(d, dict):
        if "matrix" not in d:
            raise ConfigError(f"{path}: expected a 'matrix' field")
        d = d["matrix"]
    T = np.asarray(d, dtype=float)
    if T.ndim != 2:
        raise ConfigError(f"{path}: operator must be a 2-d array")
    return T


def _parse_p(text):
    if text in ("inf", "Infinity"):
        return np.inf
    p = float(text)
    if p < 1:
        raise ConfigError(f"exponent p={p} must be >= 1 (or 'inf')")
    return p


def _parse_n_range(text):
    """'a..b' inclusive range or a single integer."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        lo, hi = int(lo), int(hi)
        if hi < lo:
            raise ConfigError(f"empty range {text!r}")
        return list(range(lo, hi + 1))
    return [int(text)]


def _write_or_print(text, out):
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _stamped_json(d):
    d = sanitize(d)
    d["schema_version"] = SCHEMA_VERSION
    d["build"] = build_identifier()
    return json.dumps(d, sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------------------
# Subcommand bodies
# ---------------------------------------------------------------------------


def _cmd_greedy(cfg: RunConfig) -> int:
    set_path = cfg.get("set")
    if set_path is None:
        raise ConfigError("greedy run requires --set")
    cset = CompactSet.from_json_dict(_load_json(set_path))
    p = _parse_p(str(cfg.get("p", 2)))
    space = NormedSpace.lp(cset.target_dim, p)
    n = int(cfg.get("n", 8))
    trace = run_greedy(cset, space, n, polish=bool(cfg.get("polish", False)))
    _write_or_print(_stamped_json(trace.to_json_dict()), cfg.get("out"))
    return 0


def _cmd_widths(cfg: RunConfig) -> int:
    op_path = cfg.get("op")
    if op_path is None:
        raise ConfigError("widths requires --op")
    T = _load_matrix(op_path)
    dom = NormedSpace.lp(T.shape[1], _parse_p(str(cfg.get("domain_p", 2))))
    tgt = NormedSpace.lp(T.shape[0], _parse_p(str(cfg.get("target_p", 2))))
    ns = _parse_n_range(str(cfg.get("n", "0..8")))
    method = cfg.get("method", "auto")
    seed = int(cfg.get("seed", 0))

    rows = []
    hw = None
    for n in ns:
        if method in ("auto", "svd") and dom.is_inner_product \
                and tgt.is_inner_product:
            hw = hw or hilbert_widths(T)
            est = hw[min(n, len(hw) - 1)]
            est = est if est.n == n else type(est)(n, est.value, est.kind,
                                                   est.method)
        elif method == "gelfand":
            est = gelfand_width(T, dom, tgt, n, seed=seed)
        else:
            est = kolmogorov_width(T, dom, tgt, n, seed=seed)
        rows.append(est)

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "value", "kind", "method"])
    for est in rows:
        w.writerow([est.n, repr(est.value), est.kind, est.method])
    _write_or_print(buf.getvalue(), cfg.get("out"))
    return 0


def _cmd_gamma(cfg: RunConfig) -> int:
    op_path = cfg.get("op")
    if op_path is None:
        raise ConfigError("gamma requires --op")
    T = _load_matrix(op_path)
    dom = NormedSpace.lp(T.shape[1], _parse_p(str(cfg.get("domain_p", 2))))
    tgt = NormedSpace.lp(T.shape[0], _parse_p(str(cfg.get("target_p", 2))))
    n = int(cfg.get("n", 1))
    est = gamma_n(T, dom, tgt, n, budget=int(cfg.get("budget", 2000)),
                  seed=int(cfg.get("seed", 0)))
    out = {
        "n": est.n,
        "value": est.value,
        "kind": est.kind,
        "witness_x": est.witness_x,
        "witness_b": est.witness_b,
        "domain": dom.descriptor(),
        "target": tgt.descriptor(),
    }
    _write_or_print(_stamped_json(out), cfg.get("out"))
    return 0


def _cmd_bm_bound(cfg: RunConfig) -> int:
    sub_path = cfg.get("subspace")
    if sub_path is None:
        raise ConfigError("bm-bound requires --subspace")
    d = _load_json(sub_path)
    if not isinstance(d, dict) or "basis" not in d:
        raise ConfigError(f"{sub_path}: expected fields 'basis' and 'space'")
    basis = np.asarray(d["basis"], dtype=float)
    if basis.ndim != 2:
        raise ConfigError("basis must be a 2-d array (vectors as columns)")
    if "space" in d:
        space = NormedSpace.from_descriptor(d["space"])
    else:
        space = NormedSpace.lp(basis.shape[0], _parse_p(str(d.get("p", 2))))
    V = Subspace(basis, space)
    sw = john_ellipsoid(V, samples=int(cfg.get("samples", 300)),
                        seed=int(cfg.get("seed", 0)))
    out = sw.to_json_dict()
    out["space"] = space.descriptor()
    out["k"] = V.k
    out["sqrt_k"] = float(np.sqrt(V.k))
    _write_or_print(_stamped_json(out), cfg.get("out"))
    return 0


def _cmd_verify(cfg: RunConfig) -> int:
    suite = cfg.get("suite")
    if suite is None:
        raise ConfigError(f"verify requires --suite (one of {SUITES})")
    suite_cfg = {k: v for k, v in cfg.values.items()
                 if k in {"seed", "log_base", "alpha", "alphas", "q", "qs",
                          "m", "n_max", "n_hi", "n", "sphere_samples",
                          "operators"} and v is not None}
    if "alpha" in suite_cfg:
        suite_cfg["alphas"] = [float(suite_cfg.pop("alpha"))]
    if "q" in suite_cfg:
        suite_cfg["qs"] = [float(suite_cfg.pop("q"))]
    reports = run_suite(suite, suite_cfg)
    out_dir = cfg.get("out", "reports")
    write_reports(reports, out_dir, fmt=cfg.get("format", "json"))
    if cfg.get("format") == "csv":
        sys.stdout.write(summary_csv(reports))
    return exit_code_for(reports)


def emit_plots(reports_dir, out_dir) -> list[Path]:
    """One SVG per suite directory plus its CSV data; empty input -> no-op."""
    reports_dir = Path(reports_dir)
    out = Path(out_dir)
    written = []
    json_files = sorted(reports_dir.rglob("*.json")) \
        if reports_dir.is_dir() else []
    if not json_files:
        return written

    import matplotlib
    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "greedy-widths"
    import matplotlib.pyplot as plt

    groups: dict[str, list[tuple[str, dict]]] = {}
    for f in json_files:
        rel = f.relative_to(reports_dir)
        suite = rel.parts[0] if len(rel.parts) > 1 else "reports"
        groups.setdefault(suite, []).append((f.stem, json.loads(f.read_text())))

    out.mkdir(parents=True, exist_ok=True)
    for suite in sorted(groups):
        fig, ax = plt.subplots(figsize=(7, 4.5))
        rows = []
        for name, d in sorted(groups[suite]):
            if "steps" in d:  # proof trace: plot per-step slack
                xs = list(range(len(d["steps"])))
                ys = [st["slack"] for st in d["steps"]]
                ax.plot(xs, ys, marker="o", label=name)
                rows += [(name, st["tag"], st["lhs"], st["rhs"], st["slack"])
                         for st in d["steps"]]
                ax.set_xlabel("proof step")
                ax.set_ylabel("slack")
            elif "per_n" in d.get("details", {}):
                per = d["details"]["per_n"]
                xs = [r["n"] for r in per]
                ax.plot(xs, [r["lhs"] for r in per], marker=".",
                        label=f"{name} lhs")
                ax.plot(xs, [r["rhs"] for r in per], linestyle="--",
                        label=f"{name} rhs")
                rows += [(name, r["n"], r["lhs"], r["rhs"],
                          r["rhs"] - r["lhs"]) for r in per]
                ax.set_xlabel("n")
                ax.set_yscale("log")
            elif "sigmas" in d.get("details", {}):
                ys = d["details"]["sigmas"]
                ax.plot(range(len(ys)), ys, marker=".", label=name)
                rows += [(name, k, y, "", "") for k, y in enumerate(ys)]
                ax.set_xlabel("n")
                ax.set_yscale("log")
            else:
                rows.append((name, d.get("details", {}).get("n", ""),
                             d.get("lhs", ""), d.get("rhs", ""),
                             d.get("slack", "")))
        ax.set_title(suite)
        if ax.get_legend_handles_labels()[0]:
            ax.legend(fontsize=7)
        svg = out / f"{suite}.svg"
        fig.savefig(svg, format="svg", metadata={"Date": None})
        plt.close(fig)
        written.append(svg)

        csv_path = out / f"{suite}.csv"
        with csv_path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["report", "x", "lhs", "rhs", "slack"])
            for r in rows:
                w.writerow(r)
        written.append(csv_path)
    return written


def _cmd_plot(cfg: RunConfig) -> int:
    reports = cfg.get("reports", "reports")
    out = cfg.get("out", "plots")
    emit_plots(reports, out)
    return 0


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _add_common(sp):
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--threads", type=int, default=None,
                    help="accepted for interface stability; execution is "
                         "sequential and results do not depend on it")
    sp.add_argument("--tol", type=float, default=None)
    sp.add_argument("--out", default=None)
    sp.add_argument("--format", choices=["json", "csv"], default=None)
    sp.add_argument("--log-base", dest="log_base", choices=["e", "2"],
                    default=None)
    sp.add_argument("--json-errors", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="greedy-widths",
        description="Greedy subspace selection and numeric certification "
                    "of width-comparison inequalities.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("greedy", help="run the greedy selection on a set")
    g.add_argument("action", nargs="?", default="run", choices=["run"])
    g.add_argument("--set", dest="set", help="JSON compact-set file")
    g.add_argument("--p", default=None, help="ambient l_p exponent")
    g.add_argument("--n", type=int, default=None, help="number of steps")
    g.add_argument("--polish", action="store_true", default=None)
    _add_common(g)

    w = sub.add_parser("widths", help="width sequence of an operator")
    w.add_argument("--op", help="JSON operator matrix file")
    w.add_argument("--domain-p", dest="domain_p", default=None)
    w.add_argument("--target-p", dest="target_p", default=None)
    w.add_argument("--n", default=None, help="single n or inclusive a..b")
    w.add_argument("--method", default=None,
                   choices=["auto", "svd", "kolmogorov", "gelfand"])
    _add_common(w)

    ga = sub.add_parser("gamma", help="determinant-based degree-n number")
    ga.add_argument("--op", help="JSON operator matrix file")
    ga.add_argument("--domain-p", dest="domain_p", default=None)
    ga.add_argument("--target-p", dest="target_p", default=None)
    ga.add_argument("--n", type=int, default=None)
    ga.add_argument("--budget", type=int, default=None)
    _add_common(ga)

    b = sub.add_parser("bm-bound",
                       help="inscribed-ellipsoid distance bound to l2^k")
    b.add_argument("--subspace", help="JSON file with basis (and space)")
    b.add_argument("--samples", type=int, default=None)
    _add_common(b)

    v = sub.add_parser("verify", help="run a named verification suite")
    v.add_argument("--suite", choices=SUITES)
    v.add_argument("--config", default=None, help="JSON config file")
    v.add_argument("--alpha", type=float, default=None)
    v.add_argument("--q", type=float, default=None)
    v.add_argument("--m", type=int, default=None)
    v.add_argument("--n-hi", dest="n_hi", type=int, default=None)
    v.add_argument("--sphere-samples", dest="sphere_samples", type=int,
                   default=None)
    _add_common(v)

    p = sub.add_parser("plot", help="render SVG+CSV summaries of reports")
    p.add_argument("--reports", default=None, help="directory of reports")
    _add_common(p)
    return ap


_BODIES = {
    "greedy": _cmd_greedy,
    "widths": _cmd_widths,
    "gamma": _cmd_gamma,
    "bm-bound": _cmd_bm_bound,
    "verify": _cmd_verify,
    "plot": _cmd_plot,
}


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, matching our contract
        return int(exc.code or 0)
    json_errors = getattr(args, "json_errors", False)
    overrides = {k: v for k, v in vars(args).items()
                 if k not in {"command", "action", "config", "json_errors"}}
    try:
        cfg = RunConfig.load(args.command, getattr(args, "config", None),
                             overrides)
        return _BODIES[args.command](cfg)
    except GreedyWidthsError as exc:
        _report_error(exc, json_errors)
        return 2
    except OSError as exc:
        _report_error(exc, json_errors)
        return 2


def _report_error(exc, json_errors):
    if json_errors:
        sys.stderr.write(json.dumps(
            {"error": type(exc).__name__, "message": str(exc),
             "schema_version": SCHEMA_VERSION}, sort_keys=True) + "\n")
    else:
        sys.stderr.write(f"error: {exc}\n")


if __name__ == "__main__":
    sys.exit(main())
