"""Command-line front end: ``torus-limsup <command> [options]``.

Exit codes: 0 success, 2 invalid input (including unknown commands),
3 when a ``verify`` suite fails.  Every output embeds the resolved config.
"""
import argparse
import csv
import io
import json
import sys
from fractions import Fraction

import jsonschema

from . import approx_sets, independence, montecarlo, psi, targets, verify
from .errors import DomainError, SingularityError, UnsupportedError, UnsupportedExact

EXIT_OK, EXIT_INVALID, EXIT_VERIFY = 0, 2, 3

_RATIONAL = {"oneOf": [{"type": "integer"}, {"type": "string", "pattern": r"^\s*-?\d+(\s*/\s*\d+)?\s*$"}]}
_INTVEC = {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1}
_WINDOWS = {"type": "array", "items": {"type": "array", "items": {"type": "integer", "minimum": 1},
                                       "minItems": 2, "maxItems": 2}, "minItems": 1}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "family": {"type": "object", "required": ["kind"]},
        "psi": {"type": "object"},
        "n": {"type": "integer", "minimum": 1},
        "m": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "samples": {"type": "integer", "minimum": 1},
        "workers": {"type": "integer", "minimum": 1},
        "Q": {"type": "integer", "minimum": 1},
        "Q_list": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "d_values": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "kind": {"enum": list(psi.SERIES_KINDS)},
        "limit": {"type": "integer", "minimum": 0},
        "D": {"type": "integer", "minimum": 1},
        "H": {"type": "integer", "minimum": 1},
        "D_grid": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "Q0": {"type": "integer", "minimum": 1},
        "Q1": {"type": "integer", "minimum": 1},
        "windows": _WINDOWS,
        "factors": {"type": "array", "items": _RATIONAL, "minItems": 1},
        "q": _INTVEC,
        "radius": _RATIONAL,
        "q2": _INTVEC,
        "radius2": _RATIONAL,
        "qia_D": {"type": "integer", "minimum": 1},
        "qia_H": {"type": "integer", "minimum": 1},
    },
}

DEFAULT_FAMILY = {"kind": "full_lattice", "m": 1}

# Preset scenarios: positive/copositive to full, positive/copositive to
# positive/copositive, and full to positive/copositive.
EXAMPLES = {
    "postofull": {
        "command": "bootstrap",
        "family": {"kind": "half_cube", "m": 1},
        "psi": {"kind": "univariate", "n": 2, "rule": {"type": "power", "coef": "1/2", "tau": 1}},
        "n": 2, "m": 1, "Q_list": [1, 2], "windows": [[1, 40], [10, 40], [20, 40]],
        "qia_D": 4, "qia_H": 8, "samples": 20000, "seed": 0,
    },
    "postopos": {
        "command": "profile",
        "family": {"kind": "half_cube", "m": 1},
        "psi": {"kind": "ray", "n": 2, "direction": [1, 0],
                "rule": {"type": "power", "coef": "1/20", "tau": 0}},
        "n": 2, "m": 1, "windows": [[1, 150], [11, 150], [26, 150], [51, 150]],
        "samples": 100000, "seed": 0,
    },
    "fulltopos": {
        "command": "profile",
        "family": {"kind": "alternating_half", "m": 1},
        "psi": {"kind": "sum", "n": 2, "parts": [
            {"kind": "ray", "n": 2, "direction": [1, 0],
             "rule": {"type": "residue", "modulus": 2, "residue": 1,
                      "base": {"type": "power", "coef": "1/20", "tau": 0}}},
            {"kind": "ray", "n": 2, "direction": [0, 1],
             "rule": {"type": "residue", "modulus": 2, "residue": 0,
                      "base": {"type": "power", "coef": "1/20", "tau": 0}}},
        ]},
        "n": 2, "m": 1, "windows": [[1, 150], [11, 150], [26, 150], [51, 150]],
        "samples": 100000, "seed": 0,
    },
}


class CliError(Exception):
    pass


# ---------------------------------------------------------------- helpers


def _enc(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, tuple):
        return [_enc(x) for x in v]
    if isinstance(v, list):
        return [_enc(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _enc(x) for k, x in v.items()}
    return v


def _family_from(obj):
    obj = dict(obj)
    kind = obj.pop("kind")
    if kind == "custom":
        return targets.TargetFamily.from_json({"m": obj.get("m", 1), "table": obj["table"]})
    return targets.TargetFamily(kind, m=int(obj.pop("m", 1)), shift=tuple(obj.pop("shift", ())),
                                residue=tuple(obj.pop("residue", ())), modulus=int(obj.pop("modulus", 1)))


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise CliError("config must be a JSON object")
    if "psi" not in cfg and ("entries" in cfg or cfg.get("kind") in psi.FUNCTION_KINDS):
        cfg = {"psi": cfg}
    return cfg


def _resolve(args, cfg):
    """Merge command-line overrides into the config and validate it."""
    cfg = dict(cfg)
    for key in ("seed", "samples", "workers", "Q", "kind", "limit", "D", "H", "Q0", "Q1", "n", "m",
                "qia_D", "qia_H"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    for key in ("D_grid", "Q_list", "d_values", "q", "q2"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = [int(x) for x in val.split(",")]
    for key in ("radius", "radius2"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if getattr(args, "factors", None):
        cfg["factors"] = args.factors.split(",")
    if getattr(args, "windows", None):
        cfg["windows"] = [[int(x) for x in w.split(":")] for w in args.windows.split(",")]
    cfg.setdefault("seed", 0)
    cfg.setdefault("samples", 100_000)
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise CliError(f"invalid config: {exc.message}") from exc
    return cfg


def _need(cfg, *keys):
    missing = [k for k in keys if k not in cfg]
    if missing:
        raise CliError(f"missing parameter(s): {', '.join(missing)}")


def _psi(cfg):
    _need(cfg, "psi")
    return psi.psi_from_dict(cfg["psi"])


def _setup(cfg):
    f = _psi(cfg)
    fam = _family_from(cfg.get("family", DEFAULT_FAMILY))
    cfg.setdefault("n", f.n)
    cfg.setdefault("m", fam.m)
    return f, fam


def _windows(cfg):
    if "windows" in cfg:
        return [tuple(w) for w in cfg["windows"]]
    _need(cfg, "Q0", "Q1")
    return [(cfg["Q0"], cfg["Q1"])]


# ---------------------------------------------------------------- commands


def cmd_series(cfg, args):
    _need(cfg, "kind", "limit")
    res = psi.series_partial_sum(cfg["kind"], _psi(cfg), cfg.get("m", 1), cfg["limit"])
    return [res.to_dict()]


def cmd_transform(cfg, args):
    f = _psi(cfg)
    res = psi.psi_transform(f, cfg.get("m", 1), cfg.get("Q", 1), cfg.get("d_values"))
    return list(res.rows())


def _sets(cfg, fam):
    _need(cfg, "q", "radius")
    A1 = approx_sets.ApproxSet(tuple(cfg["q"]), cfg["radius"], fam)
    A2 = None
    if "q2" in cfg:
        A2 = approx_sets.ApproxSet(tuple(cfg["q2"]), cfg.get("radius2", cfg["radius"]), fam)
    return A1, A2


def _mc_sets(sets, cfg):
    kernels = [approx_sets.membership_kernel(A) for A in sets]
    n, m = sets[0].n, sets[0].m

    def hits(u):
        X = u.reshape(len(u), n, m)
        out = kernels[0](X)
        for k in kernels[1:]:
            out &= k(X)
        return out

    return montecarlo.estimate_fraction(hits, n * m, cfg["samples"], cfg["seed"], cfg.get("workers", 1))


def cmd_measure(cfg, args):
    fam = _family_from(cfg.get("family", DEFAULT_FAMILY))
    A, _ = _sets(cfg, fam)
    if args.mc:
        return [{"q": list(A.q), "radius": A.radius, **_mc_sets([A], cfg).to_dict()}]
    return [{"q": list(A.q), "radius": A.radius, "d": A.d, "measure": approx_sets.set_measure(A),
             "disjoint_balls": approx_sets.eq11_holds(A)}]


def cmd_intersect(cfg, args):
    fam = _family_from(cfg.get("family", DEFAULT_FAMILY))
    A1, A2 = _sets(cfg, fam)
    if A2 is None:
        raise CliError("intersect needs q2")
    if args.mc:
        return [{"q": list(A1.q), "q2": list(A2.q), **_mc_sets([A1, A2], cfg).to_dict()}]
    value, tag = approx_sets.pair_intersection_measure(A1, A2)
    return [{"q": list(A1.q), "q2": list(A2.q), "measure": value, "pair_kind": tag}]


def cmd_qia(cfg, args):
    f, fam = _setup(cfg)
    _need(cfg, "D", "H")
    rep = independence.qia_scan(f, fam, cfg["n"], cfg["m"], cfg["D"], cfg["H"], cfg.get("D_grid"),
                                mc_samples=min(cfg["samples"], 50_000), seed=cfg["seed"])
    return [{k: v for k, v in row.items()} for row in rep.rows]


def cmd_tailmc(cfg, args):
    f, fam = _setup(cfg)
    _need(cfg, "Q0", "Q1")
    est = montecarlo.tail_union_estimate(f, fam, cfg["n"], cfg["m"], cfg["Q0"], cfg["Q1"],
                                         cfg["samples"], cfg["seed"], cfg.get("workers", 1))
    return [{"Q0": cfg["Q0"], "Q1": cfg["Q1"], **est.to_dict()}]


def cmd_profile(cfg, args):
    f, fam = _setup(cfg)
    prof = montecarlo.limsup_profile(f, fam, cfg["n"], cfg["m"], _windows(cfg), cfg["samples"],
                                     cfg["seed"], cfg.get("workers", 1))
    return prof.to_dict()


def cmd_cassels(cfg, args):
    f, fam = _setup(cfg)
    factors = cfg.get("factors", ["1/2", "1", "2"])
    rep = montecarlo.cassels_scaling_probe(f, fam, cfg["n"], cfg["m"], [Fraction(c) for c in factors],
                                           _windows(cfg), cfg["samples"], cfg["seed"],
                                           cfg.get("workers", 1))
    rows = []
    for c, prof in rep.profiles.items():
        for row in prof.to_dict():
            rows.append({"factor": c, **row})
    return rows


def cmd_bootstrap(cfg, args):
    f, fam = _setup(cfg)
    rep = montecarlo.bootstrap_demo(f, fam, cfg["n"], cfg["m"], cfg.get("Q_list", [1]), _windows(cfg),
                                    cfg["samples"], cfg["seed"], cfg.get("qia_D"), cfg.get("qia_H"),
                                    cfg.get("workers", 1))
    return rep.table()


COMMANDS = {
    "series": cmd_series, "transform": cmd_transform, "measure": cmd_measure,
    "intersect": cmd_intersect, "qia": cmd_qia, "tailmc": cmd_tailmc, "profile": cmd_profile,
    "cassels": cmd_cassels, "bootstrap": cmd_bootstrap,
}


# ---------------------------------------------------------------- output


def render(command, cfg, rows, fmt):
    rows = [_enc(r) for r in rows]
    if fmt == "json":
        return json.dumps({"command": command, "config": _enc(cfg), "seed": cfg.get("seed"),
                           "rows": rows}, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(_enc(cfg), sort_keys=True) + "\n")
    if rows:
        cols = list(rows[0])
        for r in rows[1:]:
            cols += [c for c in r if c not in cols]
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow(["" if r.get(c) is None else (repr(r[c]) if isinstance(r[c], float)
                                                      else json.dumps(r[c]) if isinstance(r[c], (list, dict))
                                                      else r[c]) for c in cols])
    return buf.getvalue()


def build_parser():
    parser = argparse.ArgumentParser(prog="torus-limsup", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (or a bare psi file)")
    common.add_argument("--seed", type=int, help="64-bit seed for Monte Carlo")
    common.add_argument("--samples", type=int, help="Monte Carlo sample count")
    common.add_argument("--workers", type=int, help="threads for Monte Carlo (results do not change)")
    common.add_argument("--out", choices=("json", "csv"), default="json")
    common.add_argument("--output", help="write to this file instead of stdout")
    mode = common.add_mutually_exclusive_group()
    mode.add_argument("--exact", dest="mc", action="store_false", help="exact computation (default)")
    mode.add_argument("--mc", dest="mc", action="store_true", help="Monte Carlo estimate")
    common.set_defaults(mc=False)

    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    p = sub.add_parser("series", parents=[common], help="partial sums of classical series")
    p.add_argument("--kind", choices=psi.SERIES_KINDS)
    p.add_argument("--limit", type=int)
    p.add_argument("--m", type=int)
    p = sub.add_parser("transform", parents=[common], help="the Psi_Q transform")
    p.add_argument("--Q", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--d-values", dest="d_values")
    for name, hlp in (("measure", "measure of one approximation set"),
                      ("intersect", "measure of the intersection of two sets")):
        p = sub.add_parser(name, parents=[common], help=hlp)
        p.add_argument("--q")
        p.add_argument("--radius")
        if name == "intersect":
            p.add_argument("--q2")
            p.add_argument("--radius2")
    p = sub.add_parser("qia", parents=[common], help="pair-sum decomposition report")
    p.add_argument("--D", type=int)
    p.add_argument("--H", type=int)
    p.add_argument("--D-grid", dest="D_grid")
    p = sub.add_parser("tailmc", parents=[common], help="Monte Carlo tail-union estimate")
    p.add_argument("--Q0", type=int)
    p.add_argument("--Q1", type=int)
    for name, hlp in (("profile", "nested tail-union profile"), ("cassels", "scaling probe"),
                      ("bootstrap", "1-by-m next to n-by-m profiles")):
        p = sub.add_parser(name, parents=[common], help=hlp)
        p.add_argument("--windows", help="comma list of Q0:Q1")
        if name == "cassels":
            p.add_argument("--factors", help="comma list of rationals")
        if name == "bootstrap":
            p.add_argument("--Q-list", dest="Q_list")
    p = sub.add_parser("verify", parents=[common], help="randomised property-check suites")
    p.add_argument("--suite", choices=list(verify.SUITES) + ["all"], default="all")
    p = sub.add_parser("example", parents=[common], help="preset scenarios")
    p.add_argument("name", choices=sorted(EXAMPLES))
    return parser


def _emit(text, args):
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run_command(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            seed = args.seed if args.seed is not None else 2024
            results = verify.run_suites([args.suite], seed=seed)
            for r in results:
                print(r.line())
            if args.output:
                with open(args.output, "w") as fh:
                    json.dump({"seed": seed, "suites": [r.to_dict() for r in results]}, fh, indent=2,
                              default=str)
            return EXIT_OK if all(r.ok for r in results) else EXIT_VERIFY
        if args.command == "example":
            preset = dict(EXAMPLES[args.name])
            command = preset.pop("command")
            cfg = _resolve(args, {**preset, **_load_config(args.config)})
        else:
            command = args.command
            cfg = _resolve(args, _load_config(args.config))
        rows = COMMANDS[command](cfg, args)
        _emit(render(command, cfg, rows, args.out), args)
        return EXIT_OK
    except (CliError, DomainError, UnsupportedExact, UnsupportedError, SingularityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main(argv=None):
    sys.exit(run_command(argv))


if __name__ == "__main__":
    main()
