"""Command-line front end: outage sweeps, analytic-vs-simulation checks, scheme constants.

Scenario files are INI documents::

    [system]
    N_T = 2
    M_R = 2
    M_T = 2
    N_R = 2
    c_SR = 1
    c_RD = 1
    c_RR = 0.05
    R_0 = 2

    [power]
    P_S_dB = 0, 50, 10        ; start, stop, step (inclusive)
    alpha = 1                 ; number, "auto", or "MM: auto, PR: 0.9, ..."
    # P_R_dB = 20             ; fixed relay power instead of alpha

    [run]
    schemes = OP, MM, PR, LI
    methods = exact, montecarlo
    trials = 1000000
    seed = 0
    output = curves.csv

Exit codes: 0 success, 2 bad input, 3 unsupported scheme or configuration,
4 numerical failure, 5 validation mismatch.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import math
import sys
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

from .channel import SystemConfig
from .errors import ConvergenceError, DomainError, ResourceError, UnsupportedConfigError
from .montecarlo import DEFAULT_TRIALS, OutageEstimate, sweep_outage, z_score
from .outage import (
    ALL_SCHEMES,
    AS_SCHEMES,
    ZF_DESIGNS,
    OutagePoint,
    diversity_order,
    op_as_asymptotic_bounds,
    optimal_alpha,
    outage_asymptotic,
    outage_exact,
    selection_complexity,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_UNSUPPORTED = 3
EXIT_NUMERIC = 4
EXIT_MISMATCH = 5

CSV_HEADER = ("scheme", "method", "P_S_dB", "p_out", "stderr")
METHODS = ("exact", "asymptotic", "montecarlo")
Z_LIMIT = 3.0

_KEYS = {
    "system": ("N_T", "M_R", "M_T", "N_R", "c_SR", "c_RD", "c_RR", "R_0"),
    "power": ("P_S_dB", "alpha", "P_R_dB"),
    "run": ("schemes", "methods", "trials", "seed", "output", "workers"),
}
_REQUIRED = {"system": ("N_T", "M_R", "M_T", "N_R"), "power": ("P_S_dB",), "run": ("schemes",)}


class ScenarioError(ValueError):
    """Malformed scenario file; the message carries the offending line."""


@dataclass(frozen=True)
class Scenario:
    config: SystemConfig
    grid_dB: tuple
    schemes: tuple
    methods: tuple = ("montecarlo",)
    alpha: dict = field(default_factory=dict)  # scheme -> float or "auto"
    P_R_dB: Optional[float] = None
    trials: int = DEFAULT_TRIALS
    seed: int = 0
    output: Optional[str] = None
    workers: int = 1

    def scheme_config(self, scheme: str) -> SystemConfig:
        """Config with the relay power rule resolved for one scheme."""
        if self.P_R_dB is not None:
            return replace(self.config, alpha=None, P_R=10.0 ** (self.P_R_dB / 10.0))
        a = self.alpha.get(scheme, self.alpha.get("*", 1.0))
        if a == "auto":
            a = 1.0 if scheme in ZF_DESIGNS else float(optimal_alpha(scheme, self.config))
        return replace(self.config, alpha=float(a), P_R=None)


# --- scenario parsing ---------------------------------------------------

def _line_index(text):
    """(section, key) -> 1-based line number, plus section header lines."""
    where, section = {}, None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            where.setdefault((section, None), no)
        elif section is not None:
            for sep in ("=", ":"):
                if sep in line:
                    where.setdefault((section, line.split(sep, 1)[0].strip()), no)
                    break
    return where


def _fail(where, section, key, msg):
    no = where.get((section, key)) or where.get((section, None))
    prefix = f"line {no}: " if no else ""
    raise ScenarioError(f"{prefix}[{section}] {key + ': ' if key else ''}{msg}")


def _number(where, section, key, raw, kind=float):
    try:
        v = kind(raw)
    except ValueError:
        _fail(where, section, key, f"expected a number, got {raw!r}")
    if kind is float and not math.isfinite(v):
        _fail(where, section, key, f"value must be finite, got {raw!r}")
    return v


def _list(raw):
    return tuple(s.strip() for s in raw.split(",") if s.strip())


def _grid(where, raw):
    parts = _list(raw)
    if len(parts) != 3:
        _fail(where, "power", "P_S_dB", "expected 'start, stop, step'")
    start, stop, step = (_number(where, "power", "P_S_dB", p) for p in parts)
    if step <= 0 or stop < start:
        _fail(where, "power", "P_S_dB", "need step > 0 and stop >= start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(float(start + i * step) for i in range(count))


def _alpha(where, raw):
    raw = raw.strip()
    if ":" not in raw:
        spec = {"*": raw}
    else:
        spec = {}
        for item in _list(raw):
            if ":" not in item:
                _fail(where, "power", "alpha", f"expected 'scheme: value', got {item!r}")
            name, val = (s.strip() for s in item.split(":", 1))
            if name not in ALL_SCHEMES:
                _fail(where, "power", "alpha", f"unknown scheme {name!r}")
            spec[name] = val
    out = {}
    for name, val in spec.items():
        if val == "auto":
            out[name] = "auto"
        else:
            v = _number(where, "power", "alpha", val)
            if not 0 < v <= 1:
                _fail(where, "power", "alpha", f"alpha must lie in (0, 1], got {v}")
            out[name] = v
    return out


def parse_scenario(text: str) -> Scenario:
    """Parse scenario text; raises ScenarioError with a line number on bad input."""
    where = _line_index(text)
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ScenarioError(str(exc).replace("\n", " ")) from None

    for section in parser.sections():
        if section not in _KEYS:
            _fail(where, section, None, "unknown section")
        for key in parser[section]:
            if key not in _KEYS[section]:
                _fail(where, section, key, "unknown key")
    for section, keys in _REQUIRED.items():
        if not parser.has_section(section):
            raise ScenarioError(f"missing section [{section}]")
        for key in keys:
            if not parser[section].get(key, "").strip():
                _fail(where, section, key if key in parser[section] else None,
                      f"missing or empty required key {key!r}")

    sys_sec, pow_sec, run_sec = parser["system"], parser["power"], parser["run"]
    kw = {}
    for key in ("N_T", "M_R", "M_T", "N_R"):
        kw[key] = _number(where, "system", key, sys_sec[key], int)
    for key in ("c_SR", "c_RD", "c_RR", "R_0"):
        if key in sys_sec:
            kw[key] = _number(where, "system", key, sys_sec[key])
    try:
        config = SystemConfig(**kw)
    except DomainError as exc:
        _fail(where, "system", None, str(exc))

    grid = _grid(where, pow_sec["P_S_dB"])
    if "alpha" in pow_sec and "P_R_dB" in pow_sec:
        _fail(where, "power", "P_R_dB", "give either alpha or P_R_dB, not both")
    alpha = _alpha(where, pow_sec["alpha"]) if "alpha" in pow_sec else {"*": 1.0}
    P_R_dB = _number(where, "power", "P_R_dB", pow_sec["P_R_dB"]) if "P_R_dB" in pow_sec else None

    schemes = _list(run_sec["schemes"])
    if not schemes:
        _fail(where, "run", "schemes", "missing or empty required key 'schemes'")
    for s in schemes:
        if s not in ALL_SCHEMES:
            _fail(where, "run", "schemes", f"unknown scheme {s!r} (choose from {', '.join(ALL_SCHEMES)})")
    methods = _list(run_sec.get("methods", "montecarlo"))
    if not methods:
        _fail(where, "run", "methods", "empty list")
    for m in methods:
        if m not in METHODS:
            _fail(where, "run", "methods", f"unknown method {m!r}")
    trials = _number(where, "run", "trials", run_sec.get("trials", str(DEFAULT_TRIALS)), int)
    seed = _number(where, "run", "seed", run_sec.get("seed", "0"), int)
    workers = _number(where, "run", "workers", run_sec.get("workers", "1"), int)
    if trials < 1:
        _fail(where, "run", "trials", "must be >= 1")
    if not 0 <= seed < 2 ** 64:
        _fail(where, "run", "seed", "must be an unsigned 64-bit integer")
    if workers < 1:
        _fail(where, "run", "workers", "must be >= 1")

    return Scenario(config, grid, schemes, methods, alpha, P_R_dB, trials, seed,
                    run_sec.get("output") or None, workers)


def format_scenario(sc: Scenario) -> str:
    """Render a scenario as text that :func:`parse_scenario` reads back."""
    c = sc.config
    step = sc.grid_dB[1] - sc.grid_dB[0] if len(sc.grid_dB) > 1 else 1.0
    lines = ["[system]"]
    lines += [f"{k} = {getattr(c, k)!r}" for k in _KEYS["system"]]
    lines += ["", "[power]", f"P_S_dB = {sc.grid_dB[0]!r}, {sc.grid_dB[-1]!r}, {step!r}"]
    if sc.P_R_dB is not None:
        lines.append(f"P_R_dB = {sc.P_R_dB!r}")
    elif list(sc.alpha) == ["*"]:
        lines.append(f"alpha = {sc.alpha['*']}")
    else:
        lines.append("alpha = " + ", ".join(f"{k}: {v}" for k, v in sc.alpha.items()))
    lines += ["", "[run]", "schemes = " + ", ".join(sc.schemes),
              "methods = " + ", ".join(sc.methods),
              f"trials = {sc.trials}", f"seed = {sc.seed}", f"workers = {sc.workers}"]
    if sc.output:
        lines.append(f"output = {sc.output}")
    return "\n".join(lines) + "\n"


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario: {exc}") from None
    return parse_scenario(text)


# --- CSV ----------------------------------------------------------------

def _g(x):
    return "" if x is None else format(float(x), ".12g")


def write_curves(points, fh):
    rows = sorted(points, key=lambda p: (p.scheme, p.method, p.P_S_dB))
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for p in rows:
        w.writerow((p.scheme, p.method, _g(p.P_S_dB), _g(p.p_out), _g(p.stderr)))


def curves_csv(points) -> str:
    buf = io.StringIO()
    write_curves(points, buf)
    return buf.getvalue()


# --- commands -----------------------------------------------------------

def _apply_overrides(sc: Scenario, args) -> Scenario:
    upd = {}
    if getattr(args, "trials", None) is not None:
        if args.trials < 1:
            raise ScenarioError("--trials must be >= 1")
        upd["trials"] = args.trials
    if getattr(args, "seed", None) is not None:
        if not 0 <= args.seed < 2 ** 64:
            raise ScenarioError("--seed must be an unsigned 64-bit integer")
        upd["seed"] = args.seed
    if getattr(args, "schemes", None):
        schemes = _list(args.schemes)
        bad = [s for s in schemes if s not in ALL_SCHEMES]
        if not schemes or bad:
            raise ScenarioError(f"--schemes: unknown or empty scheme list {args.schemes!r}")
        upd["schemes"] = schemes
    if getattr(args, "workers", None) is not None:
        upd["workers"] = max(1, args.workers)
    return replace(sc, **upd) if upd else sc


def _check_applicable(sc: Scenario):
    for s in sc.schemes:
        diversity_order(s, sc.scheme_config(s))


def _montecarlo(sc: Scenario, schemes):
    configs = {s: sc.scheme_config(s) for s in schemes}
    return sweep_outage(list(schemes), sc.config, list(sc.grid_dB), sc.trials, sc.seed,
                        configs=configs, workers=sc.workers)


def run_sweep(sc: Scenario, log=None) -> list:
    """All requested (scheme, method) curves of a scenario as OutagePoints."""
    log = log or sys.stderr
    _check_applicable(sc)
    points = []
    for method in sc.methods:
        if method == "montecarlo":
            points += _montecarlo(sc, sc.schemes)
            continue
        for s in sc.schemes:
            if s == "OP" and method == "exact":
                print("note: OP has no exact outage expression; skipping OP/exact", file=log)
                continue
            fn = outage_exact if method == "exact" else outage_asymptotic
            cfg = sc.scheme_config(s)
            for d in sc.grid_dB:
                points.append(OutagePoint(s, method, d, fn(s, cfg.with_power_db(d))))
    return points


def cmd_sweep(args) -> int:
    sc = _apply_overrides(load_scenario(args.scenario), args)
    out = args.out or sc.output
    points = run_sweep(sc)
    text = curves_csv(points)
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        try:
            with open(out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise ScenarioError(f"cannot write output: {exc}") from None
    return EXIT_OK


def _estimate(point, trials):
    return OutageEstimate.from_counts(round(point.p_out * trials), trials)


def validate_scenario(sc: Scenario):
    """Compare analytic outage with Monte Carlo at every grid point.

    Returns (report lines, all_ok).
    """
    _check_applicable(sc)
    mc = {(p.scheme, p.P_S_dB): p for p in _montecarlo(sc, sc.schemes)}
    mm_ref = None
    if "OP" in sc.schemes:
        op_cfg = sc.scheme_config("OP")
        mm_ref = {d: outage_exact("MM", op_cfg.with_power_db(d)) for d in sc.grid_dB}
    lines = [f"{'scheme':<12}{'P_S_dB':>8}{'p_exact':>14}{'p_hat':>14}{'stderr':>12}{'z':>8}  status"]
    ok = True
    for s in sc.schemes:
        cfg = sc.scheme_config(s)
        if s == "OP":
            lines.append("OP: MC + bounds only (checks p_hat against the exact MM outage, "
                         "which upper-bounds OP)")
        for d in sc.grid_dB:
            p = mc[(s, d)]
            if s == "OP":
                upper = mm_ref[d]
                excess = max(0.0, p.p_out - upper)
                z = z_score(upper, _estimate(p, sc.trials)) if excess else 0.0
                passed = z <= Z_LIMIT
                extra = ""
                if cfg.alpha is not None and 0 < cfg.alpha < 1:
                    lo, hi = op_as_asymptotic_bounds(cfg.with_power_db(d))
                    extra = f"  high-SNR bracket [{lo:.3e}, {hi:.3e}]"
                lines.append(f"{s:<12}{d:>8g}{upper:>14.6e}{p.p_out:>14.6e}{p.stderr:>12.3e}"
                             f"{z:>8.2f}  {'ok' if passed else 'FAIL'} (bound){extra}")
            else:
                ref = outage_exact(s, cfg.with_power_db(d))
                z = z_score(ref, _estimate(p, sc.trials))
                passed = z <= Z_LIMIT
                lines.append(f"{s:<12}{d:>8g}{ref:>14.6e}{p.p_out:>14.6e}{p.stderr:>12.3e}"
                             f"{z:>8.2f}  {'ok' if passed else 'FAIL'}")
            ok &= passed
    lines.append("all points within 3 standard errors" if ok else "validation FAILED")
    return lines, ok


def cmd_validate(args) -> int:
    sc = _apply_overrides(load_scenario(args.scenario), args)
    lines, ok = validate_scenario(sc)
    print("\n".join(lines))
    return EXIT_OK if ok else EXIT_MISMATCH


def _fmt_fraction(f: Optional[Fraction]) -> str:
    if f is None:
        return "-"
    if f.denominator == 1:
        return str(f.numerator)
    return f"{float(f):.3g} ({f})"


def constants_table(config: SystemConfig) -> list:
    """Rows (scheme, alpha_opt, diversity, complexity) as display strings."""
    rows = []
    for s in AS_SCHEMES + ZF_DESIGNS:
        alpha = optimal_alpha(s, config) if s in AS_SCHEMES else Fraction(1)
        try:
            div = _fmt_fraction(diversity_order(s, config))
        except UnsupportedConfigError:
            div = "n/a"
        comp = str(selection_complexity(s, config)) if s in AS_SCHEMES else "-"
        rows.append((s, _fmt_fraction(alpha), div, comp))
    return rows


def _parse_antennas(raw: str):
    parts = _list(raw)
    if len(parts) != 4:
        raise ScenarioError("--antennas expects N_T,M_R,M_T,N_R")
    try:
        vals = [int(p) for p in parts]
    except ValueError:
        raise ScenarioError(f"--antennas: not integers: {raw!r}") from None
    try:
        return SystemConfig(*vals)
    except DomainError as exc:
        raise ScenarioError(f"--antennas: {exc}") from None


def cmd_constants(args) -> int:
    if args.antennas:
        config = _parse_antennas(args.antennas)
    elif args.scenario:
        config = load_scenario(args.scenario).config
    else:
        raise ScenarioError("constants needs --antennas or --scenario")
    print(f"antennas (N_T, M_R, M_T, N_R) = {config.antennas}")
    print(f"{'scheme':<12}{'alpha_opt':>14}{'diversity':>14}{'complexity':>12}")
    for s, a, d, c in constants_table(config):
        print(f"{s:<12}{a:>14}{d:>14}{c:>12}")
    return EXIT_OK


# --- entry point --------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fdrelay", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def run_flags(p):
        p.add_argument("--scenario", required=True, help="scenario INI file")
        p.add_argument("--trials", type=int, help="Monte Carlo trials (overrides scenario)")
        p.add_argument("--seed", type=int, help="base seed (overrides scenario)")
        p.add_argument("--schemes", help="comma-separated scheme list (overrides scenario)")
        p.add_argument("--workers", type=int, help="worker threads for Monte Carlo")

    p = sub.add_parser("sweep", help="write outage curves as CSV")
    run_flags(p)
    p.add_argument("--out", help="output CSV path ('-' for stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="compare analytic outage with Monte Carlo")
    run_flags(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("constants", help="optimal alpha, diversity and complexity table")
    p.add_argument("--antennas", help="N_T,M_R,M_T,N_R")
    p.add_argument("--scenario", help="take antenna counts from a scenario file")
    p.set_defaults(func=cmd_constants)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (UnsupportedConfigError, DomainError) as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except (ConvergenceError, ResourceError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
