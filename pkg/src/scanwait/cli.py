"""Command-line front end.

Six subcommands cover the analytic, oracle, and optimisation layers:

    patterns   enumerate an ending-pattern family
    stats      moments + pattern distribution for one (w, s, p)
    sweep      CSV curve of E(tau) and its spread along w or p
    threshold  window / probability thresholds for the unlimited-window
               approximation (cheap bounds and exact variants)
    simulate   seeded Monte Carlo batch
    bqc        test-round error, feasibility boundaries, and rate sweeps
               for a scenario file

Every emitted file embeds a manifest (tool version, subcommand, parameters,
seed) and is byte-stable across runs: floats are serialised with 17
significant digits, JSON keys are sorted, line endings are LF.  Domain
errors exit with code 1 and a machine-readable JSON object on stderr.
"""

from __future__ import annotations

import json
import math
import os
from typing import Optional

import click
import numpy as np

from . import __version__
from .approx import ApproxReport, epsilon, p_star, true_p_star, true_w_star, w_star
from .bqc import BqcScenario, DEFAULT_W_CAP, average_error, feasibility_threshold, optimize_rate, p_max, w_max
from .closed_forms import (
    expectation_infinite,
    expectation_s2,
    pattern_dist_s2,
    variance_infinite,
    variance_s2,
)
from .errors import InvalidParameterError, ScanwaitError
from .patterns import enumerate_patterns
from .sim import SimConfig, run_batch
from .solver import WindowStats, solve_first_moment, solve_second_moment, std_dev

_ENV_THREADS = "SCANWAIT_THREADS"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _manifest(subcommand: str, params: dict, seed: Optional[int] = None,
              outputs: Optional[list[str]] = None) -> dict:
    return {
        "tool": "scanwait",
        "version": __version__,
        "subcommand": subcommand,
        "params": params,
        "seed": seed,
        "outputs": outputs,
    }


def _emit_json(payload: dict, output: Optional[str]) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if output:
        with open(output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _emit_lines(lines: list[str], output: Optional[str]) -> None:
    text = "\n".join(lines) + "\n"
    if output:
        with open(output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _csv_lines(manifest: dict, header: list[str], rows: list[list[str]]) -> list[str]:
    lines = ["# manifest: " + json.dumps(manifest, sort_keys=True)]
    lines.append(",".join(header))
    lines.extend(",".join(row) for row in rows)
    return lines


def _apply_thread_cap(threads: Optional[int]) -> None:
    if threads is None:
        env = os.environ.get(_ENV_THREADS, "").strip()
        if not env:
            return
        threads = int(env)
    try:
        import threadpoolctl

        threadpoolctl.threadpool_limits(limits=threads)
    except ImportError:  # best effort: BLAS pools stay at their defaults
        pass


def _parse_window(value: str) -> Optional[int]:
    """'inf' selects the unlimited-window closed forms; otherwise an int."""
    if value.strip().lower() in ("inf", "infinity", "oo"):
        return None
    try:
        return int(value)
    except ValueError:
        raise InvalidParameterError(f"--w must be an integer or 'inf', got {value!r}")


class _Fail(click.ClickException):
    """Carries a domain error; rendered as JSON on stderr."""

    def __init__(self, exc: ScanwaitError):
        super().__init__(str(exc))
        self.exc = exc

    def show(self, file=None) -> None:
        payload = {"error": type(self.exc).__name__, "message": str(self.exc)}
        click.echo(json.dumps(payload, sort_keys=True), err=True)


def _wrap(fn):
    """Convert ScanwaitError into the JSON-on-stderr exit path."""

    def inner(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ScanwaitError as exc:
            raise _Fail(exc) from exc

    inner.__name__ = fn.__name__
    inner.__doc__ = fn.__doc__
    return inner


@click.group()
@click.version_option(version=__version__, prog_name="scanwait")
@click.option("--threads", type=int, default=None,
              help=f"Cap BLAS thread pools (default: ${_ENV_THREADS} if set).")
def main(threads: Optional[int]) -> None:
    """Statistics of s successes within a sliding window of w Bernoulli trials."""
    _apply_thread_cap(threads)


@main.command("patterns")
@click.option("--w", "w", required=True, type=int, help="Window size.")
@click.option("--s", "s", required=True, type=int, help="Required successes.")
@click.option("--json", "as_json", is_flag=True, help="Emit JSON instead of one pattern per line.")
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None)
@_wrap
def cmd_patterns(w: int, s: int, as_json: bool, output: Optional[str]) -> None:
    """List the ending-pattern family for (w, s) in canonical order."""
    ps = enumerate_patterns(w, s)
    if as_json:
        payload = {
            "w": w,
            "s": s,
            "count": len(ps),
            "patterns": ps.strings(),
            "manifest": _manifest("patterns", {"w": w, "s": s}, outputs=[output] if output else None),
        }
        _emit_json(payload, output)
    else:
        _emit_lines(ps.strings(), output)


def _stats_payload(w: Optional[int], s: int, p: float, second_moment: bool,
                   force_solver: bool) -> dict:
    if w is None:
        if force_solver:
            raise InvalidParameterError("--force-solver cannot be combined with --w inf")
        out = {
            "w": "inf",
            "s": s,
            "p": p,
            "expectation": expectation_infinite(s, p),
            "variance": variance_infinite(s, p),
        }
        return out
    if s == 2 and not force_solver:
        ps = enumerate_patterns(w, s)
        dist = pattern_dist_s2(w, p)
        stats = WindowStats(
            w=w, s=s, p=p,
            expectation=expectation_s2(w, p),
            distribution=dist,
            pattern_set=ps,
            variance=variance_s2(w, p) if second_moment else None,
            second_moment=(variance_s2(w, p) + expectation_s2(w, p) ** 2) if second_moment else None,
            method="closed-form",
        )
        return stats.to_dict()
    stats = solve_second_moment(w, s, p) if second_moment else solve_first_moment(w, s, p)
    return stats.to_dict()


@main.command("stats")
@click.option("--w", "w_text", required=True, help="Window size, or 'inf'.")
@click.option("--s", "s", required=True, type=int)
@click.option("--p", "p", required=True, type=float)
@click.option("--second-moment", is_flag=True, help="Also compute E(tau^2) and the variance.")
@click.option("--force-solver", is_flag=True, help="Skip the closed-form fast paths.")
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None)
@_wrap
def cmd_stats(w_text: str, s: int, p: float, second_moment: bool, force_solver: bool,
              output: Optional[str]) -> None:
    """Waiting-time moments and the ending-pattern distribution."""
    w = _parse_window(w_text)
    payload = _stats_payload(w, s, p, second_moment, force_solver)
    payload["manifest"] = _manifest(
        "stats",
        {"w": w_text, "s": s, "p": p, "second_moment": second_moment,
         "force_solver": force_solver},
        outputs=[output] if output else None,
    )
    _emit_json(payload, output)


@main.command("sweep")
@click.option("--vary", type=click.Choice(["w", "p"]), required=True)
@click.option("--from", "lo", required=True, type=float, help="Start of the range (inclusive).")
@click.option("--to", "hi", required=True, type=float, help="End of the range (inclusive).")
@click.option("--points", type=int, default=100, show_default=True,
              help="Grid size for p sweeps (w sweeps step by --step).")
@click.option("--step", type=int, default=1, show_default=True, help="Step for w sweeps.")
@click.option("--s", "s", required=True, type=int)
@click.option("--p", "p", type=float, default=None, help="Fixed p (for w sweeps).")
@click.option("--w", "w", type=int, default=None, help="Fixed w (for p sweeps).")
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None)
@_wrap
def cmd_sweep(vary: str, lo: float, hi: float, points: int, step: int, s: int,
              p: Optional[float], w: Optional[int], output: Optional[str]) -> None:
    """CSV curve of E(tau), its standard deviation, and the s/p lower bound."""
    rows: list[list[str]] = []
    if vary == "w":
        if p is None:
            raise InvalidParameterError("a w sweep needs a fixed --p")
        grid = range(int(lo), int(hi) + 1, step)
        for wv in grid:
            if s == 2:
                e, v = expectation_s2(wv, p), variance_s2(wv, p)
            else:
                st = solve_second_moment(wv, s, p)
                e, v = st.expectation, st.variance
            rows.append([str(wv), _fmt(e), _fmt(math.sqrt(v)), _fmt(s / p)])
        header = ["w", "expectation", "std_dev", "infinite_bound"]
        params = {"vary": "w", "from": int(lo), "to": int(hi), "step": step, "s": s, "p": p}
    else:
        if w is None:
            raise InvalidParameterError("a p sweep needs a fixed --w")
        grid = np.linspace(lo, hi, points)
        for pv in grid:
            pv = float(pv)
            if s == 2:
                e, v = expectation_s2(w, pv), variance_s2(w, pv)
            else:
                st = solve_second_moment(w, s, pv)
                e, v = st.expectation, st.variance
            rows.append([_fmt(pv), _fmt(e), _fmt(math.sqrt(v)), _fmt(s / pv)])
        header = ["p", "expectation", "std_dev", "infinite_bound"]
        params = {"vary": "p", "from": lo, "to": hi, "points": points, "s": s, "w": w}
    manifest = _manifest("sweep", params, outputs=[output] if output else None)
    _emit_lines(_csv_lines(manifest, header, rows), output)


@main.command("threshold")
@click.option("--kind", type=click.Choice(["w_star", "p_star", "true_w_star", "true_p_star"]),
              required=True)
@click.option("--s", "s", required=True, type=int)
@click.option("--p", "p", type=float, default=None, help="Fixed p (for the w-threshold kinds).")
@click.option("--w", "w", type=int, default=None, help="Fixed w (for the p-threshold kinds).")
@click.option("--delta", required=True, type=float, help="Requested approximation error.")
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None)
@_wrap
def cmd_threshold(kind: str, s: int, p: Optional[float], w: Optional[int], delta: float,
                  output: Optional[str]) -> None:
    """Window / probability thresholds for the unlimited-window approximation."""
    if kind in ("w_star", "true_w_star"):
        if p is None:
            raise InvalidParameterError(f"{kind} needs --p")
        thr = w_star(s, p, delta) if kind == "w_star" else true_w_star(s, p, delta)
        eps = epsilon(thr, s, p)
    else:
        if w is None:
            raise InvalidParameterError(f"{kind} needs --w")
        thr = p_star(w, s, delta) if kind == "p_star" else true_p_star(w, s, delta)
        eps = epsilon(w, s, thr)
    report = ApproxReport(kind=kind, threshold=thr, delta=delta, epsilon=eps)
    payload = report.to_dict()
    payload["manifest"] = _manifest(
        "threshold", {"kind": kind, "s": s, "p": p, "w": w, "delta": delta},
        outputs=[output] if output else None,
    )
    _emit_json(payload, output)


@main.command("simulate")
@click.option("--w", "w", required=True, type=int)
@click.option("--s", "s", required=True, type=int)
@click.option("--p", "p", required=True, type=float)
@click.option("--runs", required=True, type=int)
@click.option("--seed", required=True, type=int)
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None,
              help="Also dump raw samples (run_index, tau, pattern) as CSV.")
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None)
@_wrap
def cmd_simulate(w: int, s: int, p: float, runs: int, seed: int,
                 csv_path: Optional[str], output: Optional[str]) -> None:
    """Seeded Monte Carlo batch; identical flags give identical bytes."""
    result = run_batch(SimConfig(w=w, s=s, p=p, runs=runs, seed=seed))
    outputs = [x for x in (output, csv_path) if x]
    manifest = _manifest(
        "simulate", {"w": w, "s": s, "p": p, "runs": runs}, seed=seed,
        outputs=outputs or None,
    )
    payload = result.to_dict()
    payload["manifest"] = manifest
    if csv_path:
        rows = [
            [str(i), str(int(t)), str(result.pattern_set[int(k)])]
            for i, (t, k) in enumerate(zip(result.taus, result.pattern_indices))
        ]
        _emit_lines(_csv_lines(manifest, ["run_index", "tau", "pattern"], rows), csv_path)
    _emit_json(payload, output)


@main.command("bqc")
@click.option("--scenario", "scenario_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", type=click.Choice(["pav", "wmax", "pmax", "optimize"]), required=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
              show_default=True)
@click.option("--w-cap", type=int, default=DEFAULT_W_CAP, show_default=True,
              help="Scan ceiling for w_max searches.")
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None)
@_wrap
def cmd_bqc(scenario_path: str, mode: str, fmt: str, w_cap: int,
            output: Optional[str]) -> None:
    """Feasibility analysis and rate optimisation for a scenario file.

    The scenario JSON holds {vertices, edges, coloring, lambda, T, gamma,
    p?, w?, grid?}; ``grid`` is {"vary": "p"|"w", "from", "to", "points"}
    and is required by mode=optimize.  Infeasible points are data, not
    errors.
    """
    with open(scenario_path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    scenario = BqcScenario.from_dict(data)
    graph, noise = scenario.graph, scenario.noise
    threshold = feasibility_threshold(graph.k, noise.gamma)
    manifest = _manifest(
        "bqc", {"scenario": os.path.basename(scenario_path), "mode": mode, "w_cap": w_cap},
        outputs=[output] if output else None,
    )

    if mode == "pav":
        if scenario.p is None or scenario.w is None:
            raise InvalidParameterError("mode=pav needs both p and w in the scenario")
        pav = average_error(graph, noise, scenario.w, scenario.p)
        payload = {"mode": "pav", "p_av": pav, "threshold": threshold,
                   "feasible": bool(pav < threshold), "manifest": manifest}
        _emit_json(payload, output)
        return
    if mode == "wmax":
        if scenario.p is None:
            raise InvalidParameterError("mode=wmax needs p in the scenario")
        res = w_max(graph, noise, scenario.p, w_cap=w_cap)
        payload = {
            "mode": "wmax", "threshold": threshold,
            "value": None if res.value is None else int(res.value),
            "status": res.status, "feasible": res.feasible,
            "expected_time": res.expectation, "manifest": manifest,
        }
        if res.p_av is not None:
            payload["p_av"] = res.p_av
        _emit_json(payload, output)
        return
    if mode == "pmax":
        if scenario.w is None:
            raise InvalidParameterError("mode=pmax needs w in the scenario")
        res = p_max(graph, noise, scenario.w)
        payload = {
            "mode": "pmax", "threshold": threshold,
            "value": None if res.value is None else float(res.value),
            "status": res.status, "feasible": res.feasible,
            "expected_time": res.expectation, "manifest": manifest,
        }
        if res.p_av is not None:
            payload["p_av"] = res.p_av
        _emit_json(payload, output)
        return

    grid = data.get("grid")
    if not grid:
        raise InvalidParameterError("mode=optimize needs a grid in the scenario")
    try:
        vary = grid["vary"]
        lo, hi = float(grid["from"]), float(grid["to"])
        points = int(grid.get("points", 100))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidParameterError(f"bad grid: {exc}")
    if vary == "w":
        values = list(range(int(lo), int(hi) + 1))
    else:
        values = [float(x) for x in np.linspace(lo, hi, points)]
    rows = optimize_rate(graph, noise, vary=vary, values=values, w_cap=w_cap)
    if fmt == "csv":
        varied = "p" if vary == "p" else "w"
        partner = "w_max" if vary == "p" else "p_max"
        header = [varied, partner, "expected_time", "p_av", "feasible"]
        csv_rows = []
        for r in rows:
            varied_val = r.p if vary == "p" else r.w
            partner_val = r.w if vary == "p" else r.p
            csv_rows.append([
                _fmt(varied_val) if vary == "p" else str(varied_val),
                ("" if partner_val is None else
                 (str(partner_val) if vary == "p" else _fmt(partner_val))),
                "" if r.expected_time is None else _fmt(r.expected_time),
                "" if r.p_av is None else _fmt(r.p_av),
                "true" if r.feasible else "false",
            ])
        _emit_lines(_csv_lines(manifest, header, csv_rows), output)
    else:
        payload = {
            "mode": "optimize", "threshold": threshold,
            "rows": [r.to_dict() for r in rows], "manifest": manifest,
        }
        _emit_json(payload, output)


if __name__ == "__main__":
    main()
