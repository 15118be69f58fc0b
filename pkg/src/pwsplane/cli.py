"""Command-line front end.

Subcommands: classify, portrait, poincare, cycles, pseudohopf, verify.
Exit codes: 0 success, 1 scientific assertion failure, 2 configuration
error, 3 precondition failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import bifurcate, fields, output, poincare, spectral
from .integrate import (IntegratorConfig, NoReturn, integrate_piecewise)

EXIT_OK = 0
EXIT_ASSERTION = 1
EXIT_CONFIG = 2
EXIT_PRECONDITION = 3


class ConfigError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


# ---------------------------------------------------------------------------
# field construction from options

_CATALOGS = ("normal-form", "z0", "prop52", "prop53", "linear",
             "zstar", "zstar-linear")


def _add_field_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("field source")
    g.add_argument("--catalog", choices=_CATALOGS,
                   help="named field family")
    g.add_argument("--label", help="portrait label for --catalog normal-form")
    g.add_argument("--a", type=float, help="family parameter a")
    g.add_argument("--b", type=float, help="family parameter b")
    g.add_argument("--m", type=int, help="cycle count parameter m")
    g.add_argument("--eps", type=float, help="perturbation size")
    g.add_argument("--aplus", help="upper Jacobian a11,a12,a21,a22")
    g.add_argument("--aminus", help="lower Jacobian a11,a12,a21,a22")
    g.add_argument("--upper", help="inline upper field 'f1; f2'")
    g.add_argument("--lower", help="inline lower field 'f1; f2'")
    g.add_argument("--param", action="append", default=[],
                   metavar="NAME=VALUE",
                   help="parameter binding for inline expressions")
    g.add_argument("--halfwidth", type=float, default=1.0,
                   help="working-box half width")


def _add_common_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value config file; flags override")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--formats", default="csv,svg,report",
                   help="comma list from csv,svg,report")
    g = p.add_argument_group("integrator")
    g.add_argument("--rel-tol", type=float, default=1e-9)
    g.add_argument("--abs-tol", type=float, default=1e-12)
    g.add_argument("--event-tol", type=float, default=1e-11)
    g.add_argument("--max-time", type=float, default=200.0)
    g.add_argument("--min-amplitude", type=float, default=1e-8)


def _matrix(spec: str):
    try:
        vals = [float(v) for v in spec.split(",")]
    except ValueError as e:
        raise ConfigError(f"bad matrix spec {spec!r}: {e}")
    if len(vals) != 4:
        raise ConfigError(f"matrix spec needs 4 entries, got {len(vals)}")
    return [[vals[0], vals[1]], [vals[2], vals[3]]]


def _require(ns, names, where):
    missing = [n for n in names if getattr(ns, n) is None]
    if missing:
        raise ConfigError(f"{where} requires --" + ", --".join(missing))


def build_field(ns) -> fields.PiecewiseField:
    inline = ns.upper is not None or ns.lower is not None
    if (ns.catalog is None) == (not inline):
        raise ConfigError("give exactly one field source: --catalog or "
                          "--upper/--lower")
    try:
        if inline:
            if ns.upper is None or ns.lower is None:
                raise ConfigError("inline fields need both --upper and --lower")
            params = {}
            for item in ns.param:
                if "=" not in item:
                    raise ConfigError(f"bad --param {item!r}")
                k, v = item.split("=", 1)
                params[k.strip()] = float(v)

            def split2(s, which):
                parts = [p.strip() for p in s.split(";")]
                if len(parts) != 2:
                    raise ConfigError(f"--{which} must be 'f1; f2'")
                return parts
            u1, u2 = split2(ns.upper, "upper")
            l1, l2 = split2(ns.lower, "lower")
            return fields.PiecewiseField(
                fields.planar_field(u1, u2, params),
                fields.planar_field(l1, l2, params),
                ns.halfwidth, name="inline")
        if ns.catalog == "normal-form":
            _require(ns, ["label"], "normal-form")
            return fields.make_normal_form(ns.label, ns.halfwidth)
        if ns.catalog == "z0":
            _require(ns, ["a", "b"], "z0")
            return fields.make_z0(ns.a, ns.b, ns.halfwidth)
        if ns.catalog == "prop52":
            _require(ns, ["a", "b", "m", "eps"], "prop52")
            return fields.make_prop52(ns.a, ns.b, ns.m, ns.eps, ns.halfwidth)
        if ns.catalog == "prop53":
            _require(ns, ["a", "b", "eps"], "prop53")
            return fields.make_prop53(ns.a, ns.b, ns.eps, ns.halfwidth)
        if ns.catalog == "linear":
            _require(ns, ["aplus", "aminus"], "linear")
            return fields.make_linear(_matrix(ns.aplus), _matrix(ns.aminus),
                                      ns.halfwidth)
        if ns.catalog == "zstar":
            return fields.make_counterexample_zstar(False)
        if ns.catalog == "zstar-linear":
            return fields.make_counterexample_zstar(True)
    except (fields.FieldError, ValueError) as e:
        raise ConfigError(str(e))
    raise ConfigError(f"unknown catalog {ns.catalog!r}")


def _integrator_config(ns) -> IntegratorConfig:
    try:
        return IntegratorConfig(rel_tol=ns.rel_tol, abs_tol=ns.abs_tol,
                                event_tol=ns.event_tol, max_time=ns.max_time,
                                min_amplitude=ns.min_amplitude)
    except ValueError as e:
        raise ConfigError(str(e))


def _outdir(ns) -> Path:
    d = Path(ns.out)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _formats(ns) -> set:
    fmts = {f.strip() for f in ns.formats.split(",") if f.strip()}
    bad = fmts - {"csv", "svg", "report"}
    if bad:
        raise ConfigError(f"unknown formats: {', '.join(sorted(bad))}")
    return fmts


# ---------------------------------------------------------------------------
# subcommands

def cmd_classify(ns) -> int:
    Z = build_field(ns)
    c = spectral.classify_local(Z)
    text = output.classification_report(c, Z.name)
    print(text, end="")
    if "report" in _formats(ns):
        (_outdir(ns) / "classify.txt").write_text(text)
    return EXIT_OK if c.in_omega0 else EXIT_PRECONDITION


def _parse_seeds(spec: str):
    seeds = []
    if not spec:
        return seeds
    for part in spec.split(";"):
        part = part.strip()
        if not part:
            continue
        xy = part.split(",")
        if len(xy) != 2:
            raise ConfigError(f"bad seed {part!r}; want 'x,y'")
        seeds.append((float(xy[0]), float(xy[1])))
    return seeds


def cmd_portrait(ns) -> int:
    Z = build_field(ns)
    cfg = _integrator_config(ns)
    seeds = _parse_seeds(ns.seeds)
    out = _outdir(ns)
    fmts = _formats(ns)
    traces, failures = [], []
    for i, (sx, sy) in enumerate(seeds):
        for direction, W in (("fwd", Z), ("bwd", Z.reversed_time())):
            try:
                tr = integrate_piecewise(W, (sx, sy), ns.tmax, cfg)
            except Exception as e:     # annotate, keep going
                failures.append((sx, sy, direction, str(e)))
                continue
            if direction == "bwd":
                tr.samples = [(-t, x, y, r) for t, x, y, r in tr.samples]
                tr.events = [(-t, x, k) for t, x, k in tr.events]
            traces.append(tr)
            if "csv" in fmts:
                output.write_trace_csv(tr, out / f"trace_{i:02d}_{direction}.csv")
                output.write_events_csv(tr, out / f"events_{i:02d}_{direction}.csv")
    if "svg" in fmts:
        output.portrait_svg(Z, traces, out / "portrait.svg", title=Z.name)
    for f in failures:
        print(f"seed {f[0]:g},{f[1]:g} ({f[2]}): {f[3]}", file=sys.stderr)
    if seeds and not traces:
        return EXIT_ASSERTION
    return EXIT_OK


def cmd_poincare(ns) -> int:
    Z = build_field(ns)
    cfg = _integrator_config(ns)
    try:
        lo, hi, n = ns.x0_range.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise ConfigError(f"bad --x0-range {ns.x0_range!r}; want lo:hi:n")
    if n < 1 or not (hi >= lo > 0.0):
        raise ConfigError("need 0 < lo <= hi and n >= 1")
    samples = []
    for k in range(n):
        x0 = lo if n == 1 else lo + (hi - lo) * k / (n - 1)
        samples.append(poincare.full_map(Z, x0, cfg))
    ok = [s for s in samples if s.ok]
    for s in samples:
        if s.ok:
            print(f"{s.x0:.12g} -> {s.value:.12g}  (t={s.flight_time:.6g})")
        else:
            print(f"{s.x0:.12g} -> no return ({s.fail_reason})")
    if "csv" in _formats(ns):
        output.write_return_map_csv(samples, _outdir(ns) / "return_map.csv")
    return EXIT_OK if ok else EXIT_PRECONDITION


def cmd_cycles(ns) -> int:
    Z = build_field(ns)
    cfg = _integrator_config(ns)
    try:
        scan = poincare.scan_fixed_points(Z, ns.lo, ns.hi, ns.grid, cfg)
    except (poincare.EmptyInterval, ValueError) as e:
        raise PreconditionError(str(e))
    if scan.degenerate:
        print("degenerate: the map is the identity on this interval "
              "(center band); no isolated cycles")
    for c in scan.cycles:
        print(f"cycle: x*={c.x_star:.12g} period={c.period:.6g} "
              f"multiplier={c.multiplier:.12g} {c.stability}")
    if not scan.cycles and not scan.degenerate:
        print("no cycles found")
    if "report" in _formats(ns):
        lines = [f"x*={c.x_star!r} period={c.period!r} "
                 f"multiplier={c.multiplier!r} {c.stability}"
                 for c in scan.cycles]
        (_outdir(ns) / "cycles.txt").write_text("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_pseudohopf(ns) -> int:
    Z = build_field(ns)
    cfg = _integrator_config(ns)
    try:
        deltas = [float(v) for v in ns.deltas.split(",")]
    except ValueError:
        raise ConfigError(f"bad --deltas {ns.deltas!r}")
    try:
        rep = bifurcate.pseudo_hopf_scan(Z, deltas, cfg)
    except bifurcate.PreconditionFoldFold as e:
        print(str(e), file=sys.stderr)
        return EXIT_PRECONDITION
    text = output.scenario_report_text(rep)
    print(text, end="")
    if "report" in _formats(ns):
        (_outdir(ns) / "pseudohopf.txt").write_text(text)
    return EXIT_OK if rep.passed else EXIT_ASSERTION


def cmd_verify(ns) -> int:
    cfg = _integrator_config(ns)
    name = ns.scenario
    try:
        if name == "prop52":
            scn = bifurcate.Prop52Scenario(ns.a if ns.a is not None else -0.25,
                                           ns.b if ns.b is not None else -0.25,
                                           ns.m if ns.m is not None else 3,
                                           ns.eps if ns.eps is not None else 0.05)
            rep = bifurcate.run_prop52(scn, cfg)
        elif name == "prop53":
            scn = bifurcate.Prop53Scenario(ns.a if ns.a is not None else -0.25,
                                           ns.b if ns.b is not None else -0.25,
                                           ns.eps if ns.eps is not None else 0.05,
                                           ns.imax)
            rep = bifurcate.run_prop53(scn, cfg)
        elif name == "pseudohopf":
            base = fields.make_theorem13_perturbation(
                fields.make_normal_form("FF-1"), ns.eps1, 0.0, 0.0)
            rep = bifurcate.pseudo_hopf_scan(
                base, [-abs(ns.delta), abs(ns.delta)], cfg,
                window=(cfg.min_amplitude, 1.0))
        elif name == "theorem13":
            base = fields.make_z0(-1.0, -1.0)
            rep = bifurcate.theorem13_cycle_demo(base, ns.eps1, ns.eps2,
                                                 ns.eps3, cfg)
        elif name == "ell-ff":
            rep = bifurcate.ell_ff_report(ns.re_up, ns.re_down, cfg)
        elif name == "counterexample":
            rep = bifurcate.counterexample_report(cfg)
        else:
            raise ConfigError(f"unknown scenario {name!r}")
    except (ValueError, bifurcate.BracketFailure) as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(str(e))
    except bifurcate.NoCycleFound as e:
        print(f"[FAIL] {e}")
        return EXIT_ASSERTION
    text = output.scenario_report_text(rep)
    print(text, end="")
    if "report" in _formats(ns):
        (_outdir(ns) / f"verify_{name.replace('-', '_')}.txt").write_text(text)
    return EXIT_OK if rep.passed else EXIT_ASSERTION


# ---------------------------------------------------------------------------
# parser assembly and config-file handling

def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="pwsplane",
        description="Planar piecewise-smooth vector fields split by y=0: "
                    "classification, event-driven integration, return maps, "
                    "and crossing-limit-cycle scenarios.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="local classification at the origin")
    _add_field_args(p)
    _add_common_args(p)
    p.set_defaults(fn=cmd_classify)

    p = sub.add_parser("portrait", help="integrate seeds and render a portrait")
    _add_field_args(p)
    _add_common_args(p)
    p.add_argument("--seeds", default="", help="semicolon list of x,y seeds")
    p.add_argument("--tmax", type=float, default=20.0)
    p.set_defaults(fn=cmd_portrait)

    p = sub.add_parser("poincare", help="tabulate the full return map")
    _add_field_args(p)
    _add_common_args(p)
    p.add_argument("--x0-range", required=True, metavar="LO:HI:N")
    p.set_defaults(fn=cmd_poincare)

    p = sub.add_parser("cycles", help="scan an interval for limit cycles")
    _add_field_args(p)
    _add_common_args(p)
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--grid", type=int, default=200)
    p.set_defaults(fn=cmd_cycles)

    p = sub.add_parser("pseudohopf", help="one-parameter shift scan")
    _add_field_args(p)
    _add_common_args(p)
    p.add_argument("--deltas", required=True, help="comma list of shifts")
    p.set_defaults(fn=cmd_pseudohopf)

    p = sub.add_parser("verify", help="run a named oracle scenario")
    p.add_argument("scenario", choices=("prop52", "prop53", "pseudohopf",
                                        "theorem13", "ell-ff",
                                        "counterexample"))
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--m", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--imax", type=int, default=4)
    p.add_argument("--eps1", type=float, default=0.1)
    p.add_argument("--eps2", type=float, default=0.1)
    p.add_argument("--eps3", type=float, default=0.005)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--re-up", type=float, default=0.2)
    p.add_argument("--re-down", type=float, default=-0.5)
    _add_common_args(p)
    p.set_defaults(fn=cmd_verify)
    return ap


def _load_config_file(path: str) -> dict:
    values = {}
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {path}")
    for lineno, raw in enumerate(p.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        k, v = line.split("=", 1)
        values[k.strip().replace("-", "_")] = v.strip().strip('"')
    return values


def _apply_config_file(ap: argparse.ArgumentParser, argv):
    """Pre-scan for --config and fold its values in as defaults."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        raise ConfigError("--config needs a file path")
    values = _load_config_file(argv[idx + 1])
    # find the subparser to set typed defaults on
    cmd = argv[0] if argv and not argv[0].startswith("-") else None
    for action in ap._actions:
        if isinstance(action, argparse._SubParsersAction) and cmd:
            sp = action.choices.get(cmd)
            if sp is None:
                continue
            typed = {}
            for a in sp._actions:
                key = a.dest
                if key in values:
                    raw = values[key]
                    typed[key] = a.type(raw) if a.type else raw
            unknown = set(values) - {a.dest for a in sp._actions}
            if unknown:
                raise ConfigError(
                    f"unknown config keys: {', '.join(sorted(unknown))}")
            sp.set_defaults(**typed)
    return argv


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = _build_parser()
    try:
        argv = _apply_config_file(ap, argv)
        ns = ap.parse_args(argv)
        return ns.fn(ns)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except PreconditionError as e:
        print(f"precondition failure: {e}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (NoReturn, bifurcate.PreconditionFoldFold) as e:
        print(f"precondition failure: {e}", file=sys.stderr)
        return EXIT_PRECONDITION
    except bifurcate.MismatchReport as e:
        print(str(e), file=sys.stderr)
        return EXIT_ASSERTION


if __name__ == "__main__":
    sys.exit(main())
