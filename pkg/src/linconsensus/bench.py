"""Command-line harness for the simulation experiments.

Usage::

    bench <consensus|median|spectrum|formation|leader> --graph line --sizes 8,16,32
          [--u-mode exact|factor:k] [--eps 0.01] [--t-mult 4] [--seed 0]
          [--schedule default|grid:c] [--out results.csv] ...

Output is UTF-8 CSV: ``#``-prefixed lines echoing the configuration (one
``key=<json>`` per field), a column-header row, then one row per size. The
last column group (``wall_s``) is timing and is the only non-deterministic
part of the file.

Exit codes: 0 success, 2 configuration error, 3 a theorem bound was
violated, 4 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import graphs as G
from .consensus import momentum_default, momentum_grid, run_consensus, theorem_round_bound
from .errors import ConsensusError, InvalidConfigError
from .multiagent import (LeaderConfig, formation_from_points, load_formation, run_formation,
                         run_leader_follow, target_formation)
from .optimize import AbsoluteLoss, QuadraticLoss, median_instance, run_baseline, run_optimize
from .rng import SplitMix64, derive_seed

SUBCOMMANDS = ("consensus", "median", "spectrum", "formation", "leader")
FAMILIES = ("line", "lollipop", "grid", "complete", "star", "cycle", "geometric", "random")
NONDET_COLUMNS = ("wall_s",)
SLACK = 1e-9

EXIT_OK, EXIT_CONFIG, EXIT_BOUND, EXIT_IO = 0, 2, 3, 4


@dataclass
class ExperimentConfig:
    subcommand: str
    graph: str = "line"
    sizes: list = field(default_factory=lambda: [8, 16, 32])
    u_mode: str = "exact"
    eps: float = 0.01
    t_mult: float = 4.0
    seed: int = 0
    schedule: str = "default"
    max_iter: int = 10**6
    objective: str = "abs"
    formation: Optional[str] = None
    start: str = "random"
    dim: int = 2
    leaders: list = field(default_factory=lambda: [1])
    v: list = field(default_factory=lambda: [0.0])
    out: Optional[str] = None
    trace_out: Optional[str] = None

    def validate(self) -> None:
        def bad(name, msg):
            raise InvalidConfigError(f"--{name.replace('_', '-')}: {msg}")

        if self.subcommand not in SUBCOMMANDS:
            bad("subcommand", f"unknown subcommand {self.subcommand!r}")
        family, _ = split_family(self.graph)
        if family not in FAMILIES:
            bad("graph", f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
        if not self.sizes and self.formation is None:
            bad("sizes", "need at least one size")
        if any(int(n) != n or n < 1 for n in self.sizes):
            bad("sizes", "sizes must be positive integers")
        u_factor(self.u_mode)
        if not (isinstance(self.eps, (int, float)) and self.eps > 0 and math.isfinite(self.eps)):
            bad("eps", f"must be a positive number, got {self.eps}")
        if not self.t_mult > 0:
            bad("t_mult", f"must be positive, got {self.t_mult}")
        if self.max_iter < 1:
            bad("max_iter", "must be >= 1")
        schedule_constant(self.schedule)
        if self.subcommand == "median" and any(n % 2 for n in self.sizes):
            bad("sizes", "the median experiment needs even sizes")
        if self.subcommand == "leader":
            if not self.leaders:
                bad("leaders", "need at least one leader")
            if any(i < 1 for i in self.leaders):
                bad("leaders", "leader indices are 1-based")
            if any(i > n for i in self.leaders for n in self.sizes):
                bad("leaders", "leader index exceeds a graph size")
        if self.start not in ("random", "origin", "target"):
            bad("start", "must be random, origin or target")
        if self.dim < 1:
            bad("dim", "must be >= 1")

    def header_lines(self) -> list[str]:
        # output destinations are not part of the experiment, so they are not echoed
        return [f"# {k}={json.dumps(v)}" for k, v in dataclasses.asdict(self).items()
                if k not in ("out", "trace_out")]

    @classmethod
    def from_header_lines(cls, lines) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        values = {}
        for line in lines:
            if not line.startswith("# ") or "=" not in line:
                continue
            key, raw = line[2:].rstrip("\n").split("=", 1)
            if key in names:
                values[key] = json.loads(raw)
        return cls(**values)


@dataclass
class RunRecord:
    config: ExperimentConfig
    columns: list
    rows: list = field(default_factory=list)
    wall: list = field(default_factory=list)
    violations: list = field(default_factory=list)
    traces: list = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("# linconsensus bench\n")
        for line in self.config.header_lines():
            buf.write(line + "\n")
        buf.write(f"# nondeterministic_columns={','.join(NONDET_COLUMNS)}\n")
        buf.write(",".join(self.columns + list(NONDET_COLUMNS)) + "\n")
        for row, wall in zip(self.rows, self.wall):
            buf.write(",".join(_fmt(v) for v in row) + f",{wall:.6f}\n")
        return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return repr(v)
    return str(v)


def deterministic_part(csv_text: str) -> str:
    """Drop the trailing non-deterministic column(s) from every data line."""
    out = []
    k = len(NONDET_COLUMNS)
    for line in csv_text.splitlines():
        out.append(line if line.startswith("#") else ",".join(line.split(",")[:-k]))
    return "\n".join(out)


# --- parsing helpers ---------------------------------------------------------------

def split_family(spec: str) -> tuple[str, Optional[float]]:
    name, _, param = spec.partition(":")
    if not param:
        return name, None
    try:
        return name, float(param)
    except ValueError:
        raise InvalidConfigError(f"--graph: bad parameter in {spec!r}") from None


def u_factor(mode: str) -> float:
    if mode == "exact":
        return 1.0
    if mode.startswith("factor:"):
        try:
            k = float(mode.split(":", 1)[1])
        except ValueError:
            k = float("nan")
        if k > 0:
            return k
    raise InvalidConfigError(f"--u-mode: expected 'exact' or 'factor:k' with k > 0, got {mode!r}")


def schedule_constant(schedule: str) -> Optional[float]:
    if schedule == "default":
        return None
    if schedule.startswith("grid:"):
        try:
            c = float(schedule.split(":", 1)[1])
        except ValueError:
            c = float("nan")
        if c > 0:
            return c
    raise InvalidConfigError(f"--schedule: expected 'default' or 'grid:c' with c > 0, got {schedule!r}")


def parse_sizes(text: str) -> list[int]:
    """``8,16,32`` or ``8..64:8`` (inclusive range with step) or a mix."""
    sizes = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if ".." in part:
                rng, _, step = part.partition(":")
                lo, hi = (int(v) for v in rng.split(".."))
                sizes.extend(range(lo, hi + 1, int(step) if step else 1))
            else:
                sizes.append(int(part))
        except ValueError:
            raise InvalidConfigError(f"--sizes: cannot parse {part!r}") from None
    return sizes


def parse_floats(text: str, sep: str = ",") -> list[float]:
    try:
        return [float(v) for v in text.split(sep) if v.strip()]
    except ValueError:
        raise InvalidConfigError(f"cannot parse number list {text!r}") from None


def build_objective(spec: str, n: int):
    """``abs`` | ``abs:w=a;b;..`` | ``quad:w=a;b;..,box=lo;hi``; w defaults to the median instance."""
    name, _, rest = spec.partition(":")
    opts = {}
    for item in filter(None, rest.split(",")):
        key, eq, val = item.partition("=")
        if not eq:
            raise InvalidConfigError(f"--objective: expected key=value, got {item!r}")
        opts[key.strip()] = parse_floats(val, ";")
    w = np.array(opts["w"]) if "w" in opts else median_instance(n)
    if w.shape[0] != n:
        raise InvalidConfigError(f"--objective: w has {w.shape[0]} entries but n={n}")
    if name == "abs":
        return AbsoluteLoss(w)
    if name == "quad":
        box = opts.get("box", [-10.0, 10.0])
        if len(box) != 2:
            raise InvalidConfigError("--objective: box needs two numbers lo;hi")
        return QuadraticLoss(w, tuple(box))
    raise InvalidConfigError(f"--objective: unknown objective {name!r}")


def build_graph(family_spec: str, n: int, seed: int) -> G.Graph:
    family, param = split_family(family_spec)
    try:
        if family == "line":
            return G.line_graph(n)
        if family == "lollipop":
            return G.lollipop_graph(n)
        if family == "grid":
            k = math.isqrt(n)
            if k * k != n:
                raise InvalidConfigError(f"--sizes: grid sizes must be perfect squares, got {n}")
            return G.grid_2d(k)
        if family == "complete":
            return G.complete_graph(n)
        if family == "star":
            return G.star_graph(n)
        if family == "cycle":
            return G.cycle_graph(n)
        if family == "geometric":
            r = G.connectivity_radius(n, param if param is not None else 2.0)
            for attempt in range(1000):
                g = G.geometric_random_graph(n, r, derive_seed(seed, n, attempt))
                if g.connected:
                    return g
            raise InvalidConfigError(f"--graph: no connected geometric draw for n={n}")
        if family == "random":
            return G.random_connected_graph(n, param if param is not None else 0.1, derive_seed(seed, n))
    except ConsensusError as exc:
        if isinstance(exc, InvalidConfigError):
            raise
        raise InvalidConfigError(f"--graph {family_spec} with n={n}: {exc}") from None
    raise InvalidConfigError(f"--graph: unknown family {family!r}")


def _params(cfg, U):
    c = schedule_constant(cfg.schedule)
    return momentum_default(U) if c is None else momentum_grid(U, c)


# --- subcommands -------------------------------------------------------------------

def cmd_consensus(cfg: ExperimentConfig) -> RunRecord:
    rec = RunRecord(cfg, ["n", "U", "rounds", "converged", "theorem_round_bound", "bound_checked"])
    for n in cfg.sizes:
        start = time.perf_counter()
        g = build_graph(cfg.graph, n, cfg.seed)
        U = u_factor(cfg.u_mode) * n
        p = _params(cfg, U)
        x1 = np.zeros(n)
        x1[0] = 1.0
        rep = run_consensus(g, x1, p, cfg.eps, "inf", cfg.max_iter)
        tb = theorem_round_bound(float(rep.l2sq[0]), p, cfg.eps)
        checked = U >= n and cfg.schedule == "default"
        if checked and (not rep.bound_holds(SLACK) or not rep.converged or rep.rounds > tb):
            rec.violations.append(f"n={n}: rounds={rep.rounds} vs bound {tb}")
        rec.rows.append((n, U, rep.rounds, rep.converged, tb, checked))
        rec.traces.append((n, rep))
        rec.wall.append(time.perf_counter() - start)
    return rec


def cmd_median(cfg: ExperimentConfig) -> RunRecord:
    rec = RunRecord(cfg, ["n", "T", "avg_abs_dev", "disp", "bound_disp", "err", "bound_err",
                          "baseline_avg_abs_dev", "bound_checked"])
    for n in cfg.sizes:
        start = time.perf_counter()
        g = build_graph(cfg.graph, n, cfg.seed)
        U = u_factor(cfg.u_mode) * n
        T = max(1, int(round(cfg.t_mult * n)))
        obj = build_objective(cfg.objective, n)
        x1 = obj.w
        rep = run_optimize(g, x1, obj, U, T, params=_params(cfg, U))
        base = run_baseline(g, x1, obj, T)
        checked = rep.bounds_apply
        if checked and (rep.disp > rep.bound_disp + SLACK or rep.err > rep.bound_err + SLACK):
            rec.violations.append(f"n={n}: disp={rep.disp} err={rep.err}")
        rec.rows.append((n, T, rep.avg_abs_dev, rep.disp, rep.bound_disp, rep.err, rep.bound_err,
                         base.avg_abs_dev, checked))
        rec.wall.append(time.perf_counter() - start)
    return rec


def cmd_spectrum(cfg: ExperimentConfig) -> RunRecord:
    rec = RunRecord(cfg, ["n", "lambda2", "lemma1_bound", "margin"])
    for n in cfg.sizes:
        start = time.perf_counter()
        g = build_graph(cfg.graph, n, cfg.seed)
        rep = G.spectral_report(G.lazy_metropolis(g))
        if not rep.margin > 0:
            rec.violations.append(f"n={n}: lambda2={rep.lambda2} >= {rep.gap_bound}")
        rec.rows.append((n, float(rep.lambda2), rep.gap_bound, rep.margin))
        rec.wall.append(time.perf_counter() - start)
    return rec


def _positions(gen: SplitMix64, n: int, d: int, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
    return np.array([[gen.uniform(lo, hi) for _ in range(d)] for _ in range(n)])


def _bound_row(rec, n, U, rep, checked):
    ratio = float(np.max(rep.l2sq / np.where(rep.bound > 0, rep.bound, np.inf))) if rep.rounds else 0.0
    if checked and not rep.bound_holds(SLACK):
        rec.violations.append(f"n={n}: trace exceeds the bound")
    rec.rows.append((n, U, rep.rounds, rep.converged, ratio, checked))
    rec.traces.append((n, rep))


def cmd_formation(cfg: ExperimentConfig) -> RunRecord:
    rec = RunRecord(cfg, ["n", "U", "rounds", "converged", "max_actual_over_bound", "bound_checked"])
    if cfg.formation is not None:
        cases = [load_formation(cfg.formation)]
    else:
        cases = []
        for n in cfg.sizes:
            g = build_graph(cfg.graph, n, cfg.seed)
            gen = SplitMix64(derive_seed(cfg.seed, n, 1))
            cases.append((g, formation_from_points(g, _positions(gen, n, cfg.dim))))
    for g, spec in cases:
        start = time.perf_counter()
        n = g.n
        U = u_factor(cfg.u_mode) * n
        gen = SplitMix64(derive_seed(cfg.seed, n, 2))
        if cfg.start == "origin":
            p1 = np.zeros((n, spec.d))
        else:
            p1 = _positions(gen, n, spec.d)
            if cfg.start == "target":
                p1 = target_formation(g, spec, p1)
        rep = run_formation(g, spec, p1, U, cfg.eps, cfg.max_iter)
        _bound_row(rec, n, U, rep, U >= n)
        rec.wall.append(time.perf_counter() - start)
    return rec


def cmd_leader(cfg: ExperimentConfig) -> RunRecord:
    rec = RunRecord(cfg, ["n", "U", "rounds", "converged", "max_actual_over_bound", "bound_checked"])
    for n in cfg.sizes:
        start = time.perf_counter()
        g = build_graph(cfg.graph, n, cfg.seed)
        U = u_factor(cfg.u_mode) * n
        lc = LeaderConfig([i - 1 for i in cfg.leaders], cfg.v, U)
        gen = SplitMix64(derive_seed(cfg.seed, n, 3))
        x1 = _positions(gen, n, lc.v.shape[0], -1.0, 1.0)
        rep = run_leader_follow(g, lc, x1, cfg.eps, cfg.max_iter)
        _bound_row(rec, n, U, rep, U >= n)
        rec.wall.append(time.perf_counter() - start)
    return rec


COMMANDS = {"consensus": cmd_consensus, "median": cmd_median, "spectrum": cmd_spectrum,
            "formation": cmd_formation, "leader": cmd_leader}


def write_traces(rec: RunRecord, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("n,t,l2sq_dev,linf_dev,theorem_bound\n")
        for n, rep in rec.traces:
            for k in range(rep.rounds):
                fh.write(f"{n},{k + 1},{rep.l2sq[k]!r},{rep.linf[k]!r},{rep.bound[k]!r}\n")


def run(cfg: ExperimentConfig) -> RunRecord:
    cfg.validate()
    return COMMANDS[cfg.subcommand](cfg)


# --- entry point ---------------------------------------------------------------------

def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bench", description="Accelerated consensus experiments.")
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--graph", default="line", help="family[:param], e.g. line, lollipop, geometric:2")
    ap.add_argument("--sizes", default="8,16,32", help="comma list and/or ranges a..b:step")
    ap.add_argument("--u-mode", default="exact", help="exact (U=n) or factor:k (U=k*n)")
    ap.add_argument("--eps", type=float, default=0.01)
    ap.add_argument("--t-mult", type=float, default=4.0, help="median: T = t_mult * n")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--schedule", default="default", help="default or grid:c")
    ap.add_argument("--max-iter", type=int, default=10**6)
    ap.add_argument("--objective", default="abs", help="abs[:w=..] or quad[:w=..,box=lo;hi]")
    ap.add_argument("--formation", default=None, help="formation file (1-based 'i j r1 .. rd')")
    ap.add_argument("--start", default="random", help="formation start: random, origin or target")
    ap.add_argument("--dim", type=int, default=2, help="formation dimension for generated offsets")
    ap.add_argument("--leaders", default="1", help="1-based leader indices, comma separated")
    ap.add_argument("--v", default="0", help="leader value, comma separated components")
    ap.add_argument("--out", default=None, help="output CSV (stdout if omitted)")
    ap.add_argument("--trace-out", default=None, help="optional per-round trace CSV")
    return ap


def config_from_args(ns) -> ExperimentConfig:
    try:
        leaders = [int(v) for v in ns.leaders.split(",") if v.strip()]
    except ValueError:
        raise InvalidConfigError(f"--leaders: cannot parse {ns.leaders!r}") from None
    return ExperimentConfig(
        subcommand=ns.subcommand, graph=ns.graph, sizes=parse_sizes(ns.sizes), u_mode=ns.u_mode,
        eps=ns.eps, t_mult=ns.t_mult, seed=ns.seed, schedule=ns.schedule, max_iter=ns.max_iter,
        objective=ns.objective, formation=ns.formation, start=ns.start, dim=ns.dim,
        leaders=leaders, v=parse_floats(ns.v), out=ns.out, trace_out=ns.trace_out)


def main(argv=None) -> int:
    ns = make_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
        rec = run(cfg)
    except OSError as exc:
        print(f"bench: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConsensusError as exc:
        print(f"bench: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = rec.to_csv()
    try:
        if cfg.out:
            with open(cfg.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        if cfg.trace_out:
            write_traces(rec, cfg.trace_out)
    except OSError as exc:
        print(f"bench: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    if rec.violations:
        for v in rec.violations:
            print(f"bench: bound violated: {v}", file=sys.stderr)
        return EXIT_BOUND
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
