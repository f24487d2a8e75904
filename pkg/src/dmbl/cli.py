"""Batch command-line front end.

Exit codes: 0 for success or a true verdict, 1 for a false verdict, 2 for
any error (bad flags, parse failures, resource caps).  ``--json`` switches
every report to a stable JSON rendering.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import __version__
from .config import ConfigError, EngineConfig, build_measure, build_state, load_config
from .evaluator import assign, decide, diagnose_b6, independent, lewis_escape
from .formula import FormulaError, atoms_of, expand, is_box_free, parse, to_text
from .model import ModelError, ModelState
from .probability import BayesResult, MeasureError, bayes_check, init_measure, prob
from .proofs import ProofError, check, load_derivation

_EXPECTED_LEVEL1 = [["a", "c"], ["b", "c"], ["c", "a"], ["c", "b"]]
_EXPECTED_WEIGHTS = ["1/5", "3/10", "1/5", "3/10"]


def _common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="engine config file (JSON)")
    sub.add_argument("--atoms", help="comma-separated atom names")
    sub.add_argument("--schedule", choices=["demand", "canonical"])
    sub.add_argument("--max-levels", type=int)
    sub.add_argument("--max-worlds", type=int)
    sub.add_argument("--json", action="store_true", help="emit a JSON report")


def _make_config(args) -> EngineConfig:
    cfg = load_config(args.config) if args.config else EngineConfig()
    if args.atoms:
        cfg.atoms = [a.strip() for a in args.atoms.split(",") if a.strip()]
        cfg.worlds = None
    if args.schedule:
        cfg.schedule = args.schedule
    if args.max_levels:
        cfg.max_levels = args.max_levels
    if args.max_worlds:
        cfg.max_worlds = args.max_worlds
    if args.json:
        cfg.output = "json"
    return cfg


def _emit(cfg: EngineConfig, report: dict, text_lines) -> None:
    if cfg.output == "json":
        print(json.dumps(report, indent=2, sort_keys=False))
    else:
        for line in text_lines:
            print(line)


def _parse_formula(text: str, state: ModelState):
    return parse(text, state.atoms or None)


def _fraction_fields(x: Fraction) -> dict:
    return {"rational": f"{x.numerator}/{x.denominator}", "decimal": float(x)}


def cmd_parse(cfg, args) -> int:
    state = build_state(cfg)
    f = _parse_formula(args.formula, state)
    report = {
        "command": "parse",
        "formula": to_text(f),
        "expanded": to_text(expand(f)),
        "box_free": is_box_free(f),
        "atoms": sorted(atoms_of(f)),
    }
    _emit(cfg, report, [report["formula"],
                        f"expanded: {report['expanded']}",
                        f"box-free: {report['box_free']}"])
    return 0


def cmd_decide(cfg, args) -> int:
    state = build_state(cfg)
    f = _parse_formula(args.formula, state)
    d = decide(state, f)
    report = {
        "command": "decide",
        "formula": to_text(f),
        "verdict": d.verdict,
        "valid": d.valid,
        "box_free": d.box_free,
        "caveat": d.caveat,
        "levels_built": state.num_levels,
    }
    lines = [f"{report['formula']}: {d.verdict}"]
    if d.caveat:
        lines.append(f"note: {d.caveat}")
    _emit(cfg, report, lines)
    return 0 if d.valid else 1


def cmd_eval(cfg, args) -> int:
    state = build_state(cfg)
    f = _parse_formula(args.formula, state)
    v = assign(state, f)
    report = {
        "command": "eval",
        "formula": to_text(f),
        "level": v.level,
        "level_width": state.width(v.level),
        "worlds": v.value.indices(),
        "cardinality": v.value.cardinality(),
        "full": v.value.is_full,
        "empty": v.value.is_empty,
    }
    _emit(cfg, report, [
        f"{report['formula']} @ level {v.level} "
        f"({report['cardinality']}/{report['level_width']} worlds)",
        "worlds: " + ",".join(map(str, report["worlds"])),
    ])
    return 0


def cmd_indep(cfg, args) -> int:
    state = build_state(cfg)
    phi = _parse_formula(args.phi, state)
    psi = _parse_formula(args.psi, state)
    res = independent(state, phi, psi)
    report = {"command": "indep", "phi": to_text(phi), "psi": to_text(psi),
              "independent": res}
    _emit(cfg, report, [f"{to_text(psi)} * {to_text(phi)}: "
                        f"{'independent' if res else 'not independent'}"])
    return 0 if res else 1


def cmd_prob(cfg, args) -> int:
    state = build_state(cfg)
    f = _parse_formula(args.formula, state)
    m = init_measure(state, build_measure(cfg, state))
    value = prob(state, m, f)
    report = {"command": "prob", "formula": to_text(f), **_fraction_fields(value)}
    _emit(cfg, report, [f"P({to_text(f)}) = {value} = {float(value)}"])
    return 0


def cmd_bayes(cfg, args) -> int:
    state = build_state(cfg)
    phi = _parse_formula(args.phi, state)
    psi = _parse_formula(args.psi, state)
    m = init_measure(state, build_measure(cfg, state))
    res: BayesResult = bayes_check(state, m, phi, psi)
    report = {
        "command": "bayes",
        "phi": to_text(phi),
        "psi": to_text(psi),
        "lhs": _fraction_fields(res.lhs),
        "rhs": _fraction_fields(res.rhs),
        "equal": res.equal,
    }
    _emit(cfg, report, [
        f"P(({to_text(psi)}|{to_text(phi)})) * P({to_text(phi)}) = {res.lhs}",
        f"P({to_text(phi)} /\\ {to_text(psi)}) = {res.rhs}",
        "equal" if res.equal else "NOT EQUAL",
    ])
    return 0 if res.equal else 1


def cmd_lewis_demo(cfg, args) -> int:
    state = build_state(cfg)
    n = state.width(0)
    cases = []
    all_good = True
    for a_mask in range(1, (1 << n) - 1):
        for b_mask in range(1, 1 << n):
            if b_mask == a_mask or b_mask & ~a_mask:
                continue
            local = build_state(cfg)
            a = local.from_indices(0, [i for i in range(n) if a_mask >> i & 1])
            b = local.from_indices(0, [i for i in range(n) if b_mask >> i & 1])
            escaped = lewis_escape(local, a, b)
            all_good &= escaped
            cases.append({"a": a.indices(), "b": b.indices(), "escapes": escaped})
    report = {"command": "lewis-demo", "cases": cases, "all_escape": all_good}
    lines = [f"a={c['a']} b={c['b']}: {'escapes' if c['escapes'] else 'STAYS'}"
             for c in cases]
    lines.append(f"all {len(cases)} strict pairs escape the base algebra: {all_good}")
    _emit(cfg, report, lines)
    return 0 if all_good else 1


def cmd_b6_diag(cfg, args) -> int:
    state = build_state(cfg)
    phi = _parse_formula(args.phi, state)
    psi = _parse_formula(args.psi, state)
    eta = _parse_formula(args.eta, state) if args.eta else None
    rep = diagnose_b6(state, phi, psi, eta)
    report = {
        "command": "b6-diag",
        "phi": to_text(phi),
        "psi": to_text(psi),
        "forward": rep.forward,
        "backward": rep.backward,
        "symmetric": rep.symmetric,
    }
    lines = [
        f"{to_text(psi)} * {to_text(phi)}: {rep.forward}",
        f"{to_text(phi)} * {to_text(psi)}: {rep.backward}",
        f"symmetric: {rep.symmetric}",
    ]
    if eta is not None:
        report["eta"] = to_text(eta)
        report["nesting_equal"] = rep.star_equal
        report["nested_value"] = rep.star_left
        report["conjunction_value"] = rep.star_right
        lines.append(f"(({to_text(eta)}|{to_text(psi)})|{to_text(phi)}) == "
                     f"({to_text(eta)}|{to_text(phi)} /\\ {to_text(psi)}): "
                     f"{rep.star_equal}")
    _emit(cfg, report, lines)
    return 0


def cmd_check_proof(cfg, args) -> int:
    d = load_derivation(args.file)
    verdict = check(d)
    report = {
        "command": "check-proof",
        "file": args.file,
        "name": d.name,
        "logic": d.logic,
        "target": to_text(d.target),
        "accepted": verdict.ok,
        "failing_line": verdict.line,
        "reason": verdict.reason,
    }
    if verdict.ok:
        lines = [f"{d.name or args.file}: accepted ({len(d.lines)} lines, {d.logic})"]
    else:
        lines = [f"{d.name or args.file}: REJECTED at line {verdict.line}: "
                 f"{verdict.reason}"]
    _emit(cfg, report, lines)
    return 0 if verdict.ok else 1


def cmd_dump_model(cfg, args) -> int:
    state = build_state(cfg)
    for text in args.step or []:
        f = _parse_formula(text, state)
        v = assign(state, f)
        state.step(v.value)
    report = state.to_json()
    _emit(cfg, report, [json.dumps(report, indent=2, sort_keys=False)])
    return 0


def cmd_fixtures(cfg, args) -> int:
    state = ModelState.from_worlds(
        ["a", "b", "c"], schedule="canonical",
        task_list=[0b011, 0b100, 0b110, 0b001, 0b101, 0b010])
    from .probability import BaseMeasure, MeasureState

    measure = MeasureState(state, BaseMeasure.from_weights(
        [Fraction(1, 5), Fraction(3, 10), Fraction(1, 2)]))
    state.step()
    measure.extend_to(state, 1)

    lvl = state.level(1)
    labels = state.base_labels
    pairs = [[labels[l], labels[r]] for l, r in lvl.pairs]
    weights = [f"{w.numerator}/{w.denominator}" for w in measure.level_weights(1)]

    a = state.from_indices(0, [0])
    b = state.from_indices(0, [1])
    c = state.from_indices(0, [2])
    ab = state.from_indices(0, [0, 1])
    f_a_ab = state.f_eval(state.lift(a, 1), state.lift(ab, 1)).indices()
    f_b_ab = state.f_eval(state.lift(b, 1), state.lift(ab, 1)).indices()
    f_c_c = state.f_eval(state.lift(c, 1), state.lift(c, 1)).indices()

    checks = {
        "level1_pairs": (pairs, _EXPECTED_LEVEL1),
        "weights": (weights, _EXPECTED_WEIGHTS),
        "f(a,{a,b})": (f_a_ab, [0, 2]),
        "f(b,{a,b})": (f_b_ab, [1, 3]),
        "f(c,c)": (f_c_c, [0, 1, 2, 3]),
    }
    ok = True
    lines = []
    results = {}
    for name, (got, want) in checks.items():
        match = got == want
        ok &= match
        results[name] = {"got": got, "want": want, "match": match}
        lines.append(f"{name}: {got} {'==' if match else '!='} {want}")
    lines.append("golden scenario: " + ("PASS" if ok else "FAIL"))
    report = {"command": "fixtures", "checks": results, "pass": ok}
    _emit(cfg, report, lines)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="dmbl",
        description="conditional-logic engine: model construction, decisions, "
                    "probabilities, proof checking")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse a formula and show its expansion")
    p.add_argument("formula")
    _common(p)
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("decide", help="decide box-free theoremhood")
    p.add_argument("formula")
    _common(p)
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("eval", help="dump a formula's world set")
    p.add_argument("formula")
    _common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("indep", help="test logical independence psi * phi")
    p.add_argument("phi")
    p.add_argument("psi")
    _common(p)
    p.set_defaults(func=cmd_indep)

    p = sub.add_parser("prob", help="exact probability of a formula")
    p.add_argument("formula")
    _common(p)
    p.set_defaults(func=cmd_prob)

    p = sub.add_parser("bayes", help="check P((psi|phi))P(phi) = P(phi/\\psi)")
    p.add_argument("phi")
    p.add_argument("psi")
    _common(p)
    p.set_defaults(func=cmd_bayes)

    p = sub.add_parser("lewis-demo",
                       help="show conditionals escaping the base algebra")
    _common(p)
    p.set_defaults(func=cmd_lewis_demo)

    p = sub.add_parser("b6-diag", help="independence symmetry diagnostics")
    p.add_argument("phi")
    p.add_argument("psi")
    p.add_argument("eta", nargs="?")
    _common(p)
    p.set_defaults(func=cmd_b6_diag)

    p = sub.add_parser("check-proof", help="check a derivation script")
    p.add_argument("file")
    _common(p)
    p.set_defaults(func=cmd_check_proof)

    p = sub.add_parser("dump-model", help="dump the model as JSON")
    p.add_argument("--step", action="append",
                   help="process this formula's world set before dumping")
    _common(p)
    p.set_defaults(func=cmd_dump_model)

    p = sub.add_parser("fixtures", help="run the three-world golden scenario")
    _common(p)
    p.set_defaults(func=cmd_fixtures)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = _make_config(args)
        return args.func(cfg, args)
    except FormulaError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except MeasureError as exc:
        print(f"measure error: {exc}", file=sys.stderr)
        return 2
    except ProofError as exc:
        print(f"proof error: {exc}", file=sys.stderr)
        return 2
    except ModelError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
