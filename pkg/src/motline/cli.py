"""Command-line front end.

Every command prints one canonical JSON report on stdout. Exit codes: 0 on
success, 1 when a scenario check fails, 2 for invalid input, 3 when the
marginals are not in convex order (or the LP is infeasible), 4 when a +inf
reward sits on a chargeable pair.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

from .errors import MotError, NotInOrder, ParseError, PropertyViolation, SplitInfeasible, UnboundedReward
from .harness import SCENARIOS, build_example, run_refinement_study, verify_example_properties
from .integrals import ConcaveFunction, concave_integral_i2, concave_integral_i3
from .measures import DiscreteMeasure, check_convex_order, decompose, make_measure
from .mot import FORMULATIONS, REWARD_KINDS, RewardSpec, is_polar, martingale_coupling, solve_primal_dual
from .scalars import EXACT, MODES, canonical, to_scalar

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INVALID = 2
EXIT_ORDER = 3
EXIT_UNBOUNDED = 4


# ---------------------------------------------------------------- parsing


def _load_json(source):
    """JSON from a path or from literal text starting with ``{`` or ``[``."""
    if isinstance(source, (dict, list)):
        return source
    text = str(source)
    if not text.lstrip().startswith(("{", "[")):
        try:
            text = Path(text).read_text()
        except OSError as exc:
            raise ParseError(f"cannot read {source}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}: {exc.msg}") from exc


def _scalar(value, mode, where):
    if not isinstance(value, (str, int, float)) or isinstance(value, bool):
        raise ParseError(f"{where}: expected a number or string, got {value!r}")
    try:
        return to_scalar(value, mode)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"{where}: cannot parse {value!r}") from exc


def parse_measure_file(source, mode: str | None = None) -> DiscreteMeasure:
    """Read ``{"atoms": [{"x": .., "w": ..}], "mode": ..}`` from a path or text.

    ``mode`` overrides the file's mode; the default is exact.
    """
    data = _load_json(source)
    if not isinstance(data, dict) or not isinstance(data.get("atoms"), list):
        raise ParseError("field 'atoms': expected a list of {x, w} objects")
    mode = mode or data.get("mode", EXACT)
    if mode not in MODES:
        raise ParseError(f"field 'mode': expected one of {MODES}, got {mode!r}")
    raw = []
    for i, atom in enumerate(data["atoms"]):
        if not isinstance(atom, dict) or "x" not in atom or "w" not in atom:
            raise ParseError(f"atoms[{i}]: expected an object with 'x' and 'w'")
        x = _scalar(atom["x"], mode, f"atoms[{i}].x")
        w = _scalar(atom["w"], mode, f"atoms[{i}].w")
        if isinstance(x, float) and math.isinf(x) or isinstance(w, float) and math.isinf(w):
            raise ParseError(f"atoms[{i}]: infinite values are not allowed")
        raw.append((x, w))
    return make_measure(raw, mode)


def measure_to_json(m: DiscreteMeasure) -> dict:
    return {"atoms": [{"x": canonical(x), "w": canonical(w)} for x, w in m], "mode": m.mode}


def parse_reward(source, mode: str = EXACT) -> RewardSpec:
    data = _load_json(source)
    if not isinstance(data, dict) or data.get("kind") not in REWARD_KINDS:
        raise ParseError(f"field 'kind': expected one of {REWARD_KINDS}")
    kind = data["kind"]
    if kind == "table":
        table = {}
        for i, e in enumerate(data.get("entries", [])):
            try:
                key = (_scalar(e["x"], mode, f"entries[{i}].x"), _scalar(e["y"], mode, f"entries[{i}].y"))
                table[key] = _scalar(e["f"], mode, f"entries[{i}].f")
            except (KeyError, TypeError) as exc:
                raise ParseError(f"entries[{i}]: expected an object with 'x', 'y' and 'f'") from exc
        default = data.get("default")
        if default is not None:
            default = _scalar(default, mode, "default")
        return RewardSpec.from_table(table, default)
    params = {k: _scalar(v, mode, k) for k, v in data.items() if k != "kind"}
    return RewardSpec.of(kind, **params)


def parse_points(source, mode: str = EXACT):
    data = _load_json(source)
    if isinstance(data, dict):
        data = data.get("points")
    if not isinstance(data, list):
        raise ParseError("field 'points': expected a list")
    out = []
    for i, p in enumerate(data):
        if isinstance(p, dict):
            p = (p.get("x"), p.get("y"))
        if not isinstance(p, (list, tuple)) or len(p) != 2:
            raise ParseError(f"points[{i}]: expected [x, y] or {{x, y}}")
        out.append((_scalar(p[0], mode, f"points[{i}].x"), _scalar(p[1], mode, f"points[{i}].y")))
    return out


def parse_chi(source, mode: str = EXACT) -> ConcaveFunction:
    """``{"breakpoints": [{"x", "v"}], "jumps": [{"x", "jump"}], "left_slope", "right_slope"}``."""
    data = _load_json(source)
    if not isinstance(data, dict) or not isinstance(data.get("breakpoints"), list):
        raise ParseError("field 'breakpoints': expected a list of {x, v} objects")
    pts = []
    for i, b in enumerate(data["breakpoints"]):
        if not isinstance(b, dict) or "x" not in b or "v" not in b:
            raise ParseError(f"breakpoints[{i}]: expected an object with 'x' and 'v'")
        pts.append((_scalar(b["x"], mode, f"breakpoints[{i}].x"), _scalar(b["v"], mode, f"breakpoints[{i}].v")))
    jumps = {}
    for i, j in enumerate(data.get("jumps", [])):
        jumps[_scalar(j["x"], mode, f"jumps[{i}].x")] = _scalar(j["jump"], mode, f"jumps[{i}].jump")
    slopes = {k: _scalar(data[k], mode, k) for k in ("left_slope", "right_slope") if k in data}
    return ConcaveFunction(tuple(pts), jumps, **slopes)


# ---------------------------------------------------------------- reports


def _plain(obj):
    if isinstance(obj, (bool, int, str)) or obj is None:
        return obj
    if isinstance(obj, (float, Fraction)):
        return canonical(obj)
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = [_plain(v) for v in obj]
        return sorted(items, key=json.dumps) if isinstance(obj, (set, frozenset)) else items
    if isinstance(obj, DiscreteMeasure):
        return measure_to_json(obj)
    return canonical(obj)


def emit_report(report: dict) -> str:
    """Canonical JSON: sorted keys, rationals as reduced ``p/q`` strings."""
    body = dict(report)
    body.setdefault("schema_version", SCHEMA_VERSION)
    return json.dumps(_plain(body), sort_keys=True, indent=2) + "\n"


def digest(m: DiscreteMeasure) -> str:
    text = json.dumps(measure_to_json(m), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _pairs(pairs):
    return [[x, y] for x, y in pairs]


def _fn(d):
    return [[k, v] for k, v in sorted(d.items())]


def _component_json(c):
    return {
        "index": c.index,
        "l": c.l,
        "r": c.r,
        "left_closed": c.left_closed,
        "right_closed": c.right_closed,
        "mu": measure_to_json(c.mu),
        "nu": measure_to_json(c.nu),
    }


# ---------------------------------------------------------------- commands


def _marginals(args, mode=None):
    mu = parse_measure_file(args.mu, mode)
    nu = parse_measure_file(args.nu, mode or mu.mode)
    return mu, nu


def _instance(mu, nu):
    return {"mu": digest(mu), "nu": digest(nu)}


def cmd_order(args):
    mu, nu = _marginals(args)
    rep = check_convex_order(mu, nu)
    out = {"ordered": rep.ordered, "reason": rep.reason, "touch_points": list(rep.touch_points)}
    return (EXIT_OK if rep.ordered else EXIT_ORDER), out, _instance(mu, nu)


def cmd_decompose(args):
    mu, nu = _marginals(args)
    dec = decompose(mu, nu)
    out = {
        "components": [_component_json(c) for c in dec.components],
        "stationary": measure_to_json(dec.stationary),
        "identity_coupling_mass": dec.identity_coupling_mass,
    }
    return EXIT_OK, out, _instance(mu, nu)


def cmd_solve(args):
    mu, nu = _marginals(args, args.mode)
    f = parse_reward(args.reward, mu.mode)
    sol = solve_primal_dual(mu, nu, f, args.formulation, emit_gamma=args.emit_gamma)
    out = {"formulation": args.formulation, "mode": mu.mode, "value": sol.primal_value, "notes": list(sol.notes)}
    if sol.primal_value == math.inf:
        return EXIT_UNBOUNDED, out, _instance(mu, nu)
    cert = sol.certificate
    out.update(
        dual_value=cert.value,
        coupling=[[x, y, p] for (x, y), p in sol.coupling.entries.items()],
        certificate={"phi": _fn(cert.phi), "psi": _fn(cert.psi), "h": _fn(cert.h)},
        verified=all(r.ok for r in sol.verifications),
        gaps=[r.gap for r in sol.verifications],
    )
    if sol.component_values:
        out["component_values"] = list(sol.component_values)
        out["stationary_value"] = sol.stationary_value
    if args.emit_gamma:
        out["gamma"] = _pairs(sol.gamma)
    return EXIT_OK, out, _instance(mu, nu)


def cmd_polar(args):
    mu, nu = _marginals(args)
    points = parse_points(args.points, mu.mode)
    dec = decompose(mu, nu)
    out = {"points": [{"x": v.point[0], "y": v.point[1], "polar": v.polar, "reason": v.reason} for v in is_polar(dec, points)]}
    return EXIT_OK, out, _instance(mu, nu)


def cmd_integral(args):
    mu, nu = _marginals(args)
    chi = parse_chi(args.chi, mu.mode)
    dec = decompose(mu, nu)
    comp = dec.components[0] if len(dec.components) == 1 and dec.stationary.mass == 0 else None
    out = {"method": args.method}
    if args.method in ("i2", "both"):
        out["i2"] = concave_integral_i2(chi, mu, nu, comp)
    if args.method in ("i3", "both"):
        coupling = martingale_coupling(mu, nu)
        out["i3"] = concave_integral_i3(chi, mu, nu, coupling)
    if args.method == "both":
        out["agree"] = out["i2"] == out["i3"]
    return EXIT_OK, out, _instance(mu, nu)


def _scenario_params(name, n, delta):
    params = {}
    if n is not None:
        if name.startswith("integrability"):
            params["N"] = n
        elif name == "no-lower-bound":
            params["step"] = Fraction(1, n)
        else:
            params["n"] = n
    if delta is not None and name == "no-lower-bound":
        params["delta"] = Fraction(delta)
    return params


def cmd_harness(args):
    name = args.name
    if args.levels:
        try:
            levels = [int(v) for v in args.levels.split(",")]
        except ValueError as exc:
            raise ParseError(f"--levels: expected integers, got {args.levels!r}") from exc
        rep = run_refinement_study(name, levels)
        return EXIT_OK, {"scenario": name, "records": rep.records, "verdicts": rep.verdicts}, {}
    sc = build_example(name, _scenario_params(name, args.n, args.delta))
    rep = verify_example_properties(sc)
    out = {
        "scenario": name,
        "params": sc.params,
        "checks": [{"clause": c, "passed": ok, "detail": d} for c, ok, d in rep.checks],
        "values": rep.values,
    }
    return EXIT_OK, out, _instance(sc.mu, sc.nu)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="motline", description="Discrete martingale optimal transport on the line.")
    sub = p.add_subparsers(dest="command", required=True)

    def marg(sp):
        sp.add_argument("--mu", required=True, help="measure file for mu")
        sp.add_argument("--nu", required=True, help="measure file for nu")

    sp = sub.add_parser("order", help="check convex order")
    marg(sp)
    sp.set_defaults(func=cmd_order)

    sp = sub.add_parser("decompose", help="irreducible decomposition")
    marg(sp)
    sp.set_defaults(func=cmd_decompose)

    sp = sub.add_parser("solve", help="solve the transport LP and its dual")
    marg(sp)
    sp.add_argument("--reward", required=True)
    sp.add_argument("--formulation", choices=FORMULATIONS, default="quasisure")
    sp.add_argument("--mode", choices=MODES, default=None)
    sp.add_argument("--emit-gamma", action="store_true")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("polar", help="decide polarity of support pairs")
    marg(sp)
    sp.add_argument("--points", required=True)
    sp.set_defaults(func=cmd_polar)

    sp = sub.add_parser("integral", help="generalized integral of a concave function")
    marg(sp)
    sp.add_argument("--chi", required=True)
    sp.add_argument("--method", choices=("i2", "i3", "both"), default="both")
    sp.set_defaults(func=cmd_integral)

    sp = sub.add_parser("harness", help="scenario checks and refinement studies")
    sp.add_argument("name", choices=SCENARIOS)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--delta", default=None)
    sp.add_argument("--levels", default=None, help="comma-separated levels for a refinement study")
    sp.set_defaults(func=cmd_harness)
    return p


def run_command(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if not exc.code:
            return EXIT_OK
        argv_list = list(argv) if argv is not None else sys.argv[1:]
        stdout.write(emit_report({"command": None, "argv": argv_list, "error": "invalid arguments", "exit_code": EXIT_INVALID}))
        return EXIT_INVALID
    report = {"command": args.command, "argv": list(argv) if argv is not None else sys.argv[1:]}
    try:
        code, body, instance = args.func(args)
    except UnboundedReward as exc:
        print(f"error: {exc}", file=stderr)
        code, body, instance = EXIT_UNBOUNDED, {"error": str(exc), "value": math.inf}, {}
    except PropertyViolation as exc:
        print(f"check failed: {exc}", file=stderr)
        code, body, instance = EXIT_CHECK_FAILED, {"error": str(exc), "clause": exc.clause}, {}
    except (NotInOrder, SplitInfeasible) as exc:
        print(f"error: {exc}", file=stderr)
        code, body, instance = EXIT_ORDER, {"error": str(exc)}, {}
    except (MotError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=stderr)
        code, body, instance = EXIT_INVALID, {"error": str(exc)}, {}
    report.update(body)
    report["instance"] = instance
    report["exit_code"] = code
    stdout.write(emit_report(report))
    return code


def main():
    sys.exit(run_command())


if __name__ == "__main__":
    main()
