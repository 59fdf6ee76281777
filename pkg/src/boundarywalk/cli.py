"""Command-line front end: configured experiments, deterministic CSV/JSON output.

Subcommands:

* ``transform`` -- compute the transformed measure for a configured rule and
  write it as a CSV table plus a JSON summary.
* ``verify``    -- run a named check bundle and write a machine-readable report.
* ``compare``   -- total-variation distance between two result files.
* ``entropy``   -- entropies of convolution powers as a CSV table.

Config is a single JSON document; element literals are compact strings per
group kind ("3,-1" for Z^2, "ab^-1a" for F_2, "p=2;L=0,1" for the
lamplighter).  Exact weights are "num/den" strings.  Identical configs
(including seed) produce byte-identical output files for any worker count.

Exit codes: 0 success, 1 internal error / comparison failure, 2 config or
usage error, 3 transform truncated beyond epsilon (results still written).
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from fractions import Fraction
from pathlib import Path

from . import _backend
from .extension import (
    AuxFirstCoordinateRule,
    BetaFlagRule,
    DiscreteAux,
    IntervalAux,
    project_transform,
)
from .groups import Cyclic, FreeGroup, Group, IntLattice, Lamplighter
from .measures import (
    EXACT,
    FLOAT,
    FiniteMeasure,
    split_by_fraction,
    total_variation,
    warn_if_not_generating,
)
from .paths import SeededStream
from .stopping import (
    ConstantRule,
    DEFAULT_MAX_HORIZON,
    FirstIncrementRule,
    FirstVisitRule,
    exact_transform,
    monte_carlo_transform,
    sequential_compose,
)
from .suites import run_bundle
from .verify import entropy_diagnostic

OUT_ENV = "BOUNDARY_WALK_OUT"


class ConfigError(ValueError):
    """Invalid experiment configuration (exit code 2)."""


# ---------------------------------------------------------------------------
# element literals


def format_element(group: Group, g) -> str:
    if isinstance(group, IntLattice):
        return ",".join(str(x) for x in g)
    if isinstance(group, Cyclic):
        return str(g)
    if isinstance(group, FreeGroup):
        if not g:
            return "e"
        return "".join(
            chr(ord("a") + abs(i) - 1) + ("^-1" if i < 0 else "") for i in g
        )
    if isinstance(group, Lamplighter):
        pos, lamps = g
        out = "p=" + ",".join(str(x) for x in pos)
        if lamps:
            if group.rank == 1:
                out += ";L=" + ",".join(str(site[0]) for site in lamps)
            else:
                out += ";L=" + "".join(
                    "(" + ",".join(str(x) for x in site) + ")" for site in lamps
                )
        return out
    raise ConfigError(f"no literal syntax for group {group!r}")


def _parse_ints(text: str, count: int, what: str):
    parts = [p for p in text.split(",") if p != ""]
    try:
        vals = tuple(int(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"bad integer in {what}: {text!r}") from exc
    if len(vals) != count:
        raise ConfigError(f"{what} needs {count} components, got {len(vals)}: {text!r}")
    return vals


_FREE_TOKEN = re.compile(r"([a-z])(\^-1)?")


def parse_element(group: Group, text: str):
    text = text.strip()
    if isinstance(group, IntLattice):
        return group.canonicalize(_parse_ints(text, group.rank, "lattice element"))
    if isinstance(group, Cyclic):
        try:
            return group.canonicalize(int(text))
        except ValueError as exc:
            raise ConfigError(f"bad cyclic element: {text!r}") from exc
    if isinstance(group, FreeGroup):
        if text in ("", "e"):
            return ()
        word = []
        pos = 0
        for m in _FREE_TOKEN.finditer(text):
            if m.start() != pos:
                raise ConfigError(f"bad free-group literal at column {pos}: {text!r}")
            idx = ord(m.group(1)) - ord("a") + 1
            if idx > group.rank:
                raise ConfigError(f"generator {m.group(1)!r} beyond rank {group.rank}")
            word.append(-idx if m.group(2) else idx)
            pos = m.end()
        if pos != len(text):
            raise ConfigError(f"bad free-group literal at column {pos}: {text!r}")
        return group.canonicalize(word)
    if isinstance(group, Lamplighter):
        parts = text.split(";")
        if not parts or not parts[0].startswith("p="):
            raise ConfigError(f"lamplighter literal must start with 'p=': {text!r}")
        pos = _parse_ints(parts[0][2:], group.rank, "lamplighter position")
        sites = []
        if len(parts) > 1:
            if not parts[1].startswith("L="):
                raise ConfigError(f"expected 'L=' section: {text!r}")
            body = parts[1][2:]
            if body:
                if group.rank == 1:
                    sites = [(x,) for x in _parse_ints(body, len(body.split(",")), "lamp sites")]
                else:
                    chunks = re.findall(r"\(([^)]*)\)", body)
                    if "".join(f"({c})" for c in chunks) != body:
                        raise ConfigError(f"bad lamp site list: {body!r}")
                    sites = [_parse_ints(c, group.rank, "lamp site") for c in chunks]
        return group.canonicalize((pos, sites))
    raise ConfigError(f"no literal syntax for group {group!r}")


# ---------------------------------------------------------------------------
# config parsing


def parse_group(spec) -> Group:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError(f"group spec must be an object with 'kind': {spec!r}")
    kind = spec["kind"]
    try:
        if kind == "lattice":
            return IntLattice(int(spec.get("rank", 1)))
        if kind == "cyclic":
            return Cyclic(int(spec.get("modulus", 2)))
        if kind == "free":
            return FreeGroup(int(spec.get("rank", 2)))
        if kind == "lamplighter":
            return Lamplighter(int(spec.get("rank", 1)))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad group parameters: {spec!r}") from exc
    raise ConfigError(f"unknown group kind {kind!r}")


def parse_scalar(value, mode: str):
    """Weight/epsilon literal: number, or 'num/den' string in exact mode."""
    try:
        if mode == EXACT:
            return Fraction(value) if not isinstance(value, float) else Fraction(value)
        return float(Fraction(value)) if isinstance(value, str) else float(value)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise ConfigError(f"bad weight literal: {value!r}") from exc


def parse_measure(group: Group, table, mode: str) -> FiniteMeasure:
    if not isinstance(table, dict) or not table:
        raise ConfigError("measure table must be a nonempty object")
    weights = {}
    for literal, w in table.items():
        weights[parse_element(group, literal)] = parse_scalar(w, mode)
    try:
        return FiniteMeasure(group, weights, mode)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def format_scalar(w, mode: str) -> str:
    if mode == EXACT:
        f = Fraction(w)
        return f"{f.numerator}/{f.denominator}" if f.denominator != 1 else str(f.numerator)
    return repr(float(w))


def build_rule(group: Group, mu: FiniteMeasure, spec):
    """Returns (plain_rule, None) or (extended_rule, aux)."""
    if not isinstance(spec, dict) or "type" not in spec:
        raise ConfigError(f"rule spec must be an object with 'type': {spec!r}")
    kind = spec["type"]
    if kind == "constant":
        try:
            return ConstantRule(int(spec["n"])), None
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad constant rule: {spec!r}") from exc
    if kind == "first-visit":
        elems = [parse_element(group, s) for s in spec.get("set", [])]
        if not elems:
            raise ConfigError("first-visit rule needs a nonempty 'set'")
        return FirstVisitRule(group, elems), None
    if kind == "first-increment":
        elems = [parse_element(group, s) for s in spec.get("set", [])]
        if not elems:
            raise ConfigError("first-increment rule needs a nonempty 'set'")
        return FirstIncrementRule(group, elems), None
    if kind == "sequential":
        subs = spec.get("rules", [])
        if len(subs) < 2:
            raise ConfigError("sequential rule needs at least two sub-rules")
        rules = []
        for sub in subs:
            r, aux = build_rule(group, mu, sub)
            if aux is not None:
                raise ConfigError("sequential composition of extended rules is not supported")
            rules.append(r)
        out = rules[0]
        for r in rules[1:]:
            out = sequential_compose(out, r)
        return out, None
    if kind == "aux-convex":
        points = spec.get("points", [])
        weights = [parse_scalar(w, mu.mode) for w in spec.get("weights", [])]
        try:
            aux = DiscreteAux([int(b) for b in points], weights, mu.mode)
            return AuxFirstCoordinateRule(aux), aux
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if kind == "beta-flag":
        frac_table = spec.get("fraction")
        if not isinstance(frac_table, dict):
            raise ConfigError("beta-flag rule needs a 'fraction' table")
        fraction = {
            parse_element(group, lit): parse_scalar(v, mu.mode)
            for lit, v in frac_table.items()
        }
        try:
            split = split_by_fraction(mu, fraction)
            aux = IntervalAux(mu, split)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return BetaFlagRule(aux, coupled=bool(spec.get("coupled", True))), aux
    raise ConfigError(f"unknown rule type {kind!r}")


def load_config(path: str, overrides) -> dict:
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        cfg = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    for key in ("seed", "mode"):
        if getattr(overrides, key, None) is not None:
            cfg[key] = getattr(overrides, key)
    return cfg


# ---------------------------------------------------------------------------
# output


def _out_dir(args) -> Path:
    out = args.out or os.environ.get(OUT_ENV) or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_measure_csv(path: Path, group: Group, measure: FiniteMeasure):
    lines = ["element,weight,weight_decimal,cumulative"]
    cum = 0.0
    for g, w in measure.items_sorted():
        cum += float(w)
        lines.append(
            f"{format_element(group, g)},{format_scalar(w, measure.mode)},"
            f"{float(w)!r},{cum!r}"
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_result(path: str):
    """Load a transform result written by cmd_transform (JSON or its CSV twin)."""
    p = Path(path)
    if p.suffix == ".csv":
        p = p.with_suffix(".json")
    try:
        summary = json.loads(p.read_text(encoding="utf-8"))
        group = parse_group(summary["group"])
        mode = summary["mode"]
        csv_path = p.parent / summary["table"]
        rows = csv_path.read_text(encoding="utf-8").splitlines()
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise ConfigError(f"cannot read result {path}: {exc}") from exc
    if not rows or rows[0] != "element,weight,weight_decimal,cumulative":
        raise ConfigError(f"bad result table header in {csv_path}")
    weights = {}
    for row in rows[1:]:
        element, weight, _, _ = _split_row(row)
        weights[parse_element(group, element)] = parse_scalar(weight, mode)
    return group, FiniteMeasure(group, weights, mode)


def _split_row(row: str):
    # element literals may contain commas; the last three fields never do
    parts = row.rsplit(",", 3)
    if len(parts) != 4:
        raise ConfigError(f"bad result row: {row!r}")
    return parts


# ---------------------------------------------------------------------------
# subcommands


def cmd_transform(args) -> int:
    cfg = load_config(args.config, args)
    group = parse_group(cfg.get("group"))
    mode = cfg.get("mode", EXACT)
    if mode not in (EXACT, FLOAT):
        raise ConfigError(f"unknown mode {mode!r}")
    mu = parse_measure(group, cfg.get("measure"), mode)
    warn_if_not_generating(mu)
    rule, aux = build_rule(group, mu, cfg.get("rule"))
    epsilon = parse_scalar(cfg["epsilon"], mode) if "epsilon" in cfg else None
    max_horizon = int(cfg.get("maxHorizon", DEFAULT_MAX_HORIZON))
    samples = int(cfg.get("samples", 0))
    seed = int(cfg.get("seed", 0))
    workers = args.workers
    stream = SeededStream(seed)

    if aux is not None:
        if samples > 0:
            result = project_transform(
                mu, aux, rule, mode="montecarlo", samples=samples,
                horizon_cap=max_horizon, stream=stream, workers=workers,
            )
        else:
            result = project_transform(
                mu, aux, rule, mode="exact", epsilon=epsilon, max_horizon=max_horizon
            )
    elif samples > 0:
        result = monte_carlo_transform(
            mu, rule, samples, horizon_cap=max_horizon, stream=stream, workers=workers
        )
    else:
        result = exact_transform(mu, rule, epsilon=epsilon, max_horizon=max_horizon)

    out = _out_dir(args)
    csv_name = "transform.csv"
    write_measure_csv(out / csv_name, group, result.measure)
    summary = {
        "group": cfg.get("group"),
        "mode": mode,
        "mass": format_scalar(result.measure.mass, mode),
        "mass_deficit": format_scalar(result.mass_deficit, mode),
        "mean_stopping_time": result.mean_stopping_time,
        "horizon": result.horizon,
        "truncated": result.truncated,
        "seed": seed,
        "samples": samples,
        "table": csv_name,
    }
    (out / "transform.json").write_text(
        json.dumps(summary, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
        newline="\n",
    )
    print(f"wrote {out / csv_name} (mass deficit {summary['mass_deficit']})")
    return 3 if result.truncated and samples == 0 else 0


def cmd_verify(args) -> int:
    try:
        reports = run_bundle(args.bundle, seed=args.seed or 0, samples=args.samples)
    except KeyError:
        print(f"unknown bundle {args.bundle!r}", file=sys.stderr)
        return 2
    out = _out_dir(args)
    records = [
        {
            "name": r.check_name,
            "residual": r.max_residual,
            "tolerance": r.tolerance,
            "pass": r.passed,
            "points": r.points_tested,
            "note": r.note,
        }
        for r in reports
    ]
    (out / "report.json").write_text(
        json.dumps(records, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
        newline="\n",
    )
    for r in reports:
        print(r.line())
    ok = all(r.passed for r in reports)
    print(f"{sum(r.passed for r in reports)}/{len(reports)} checks passed")
    return 0 if ok else 1


def cmd_compare(args) -> int:
    group_a, mu_a = read_result(args.path_a)
    group_b, mu_b = read_result(args.path_b)
    if group_a != group_b:
        print(f"group mismatch: {group_a!r} vs {group_b!r}", file=sys.stderr)
        return 2
    tv = float(total_variation(mu_a.as_float(), mu_b.as_float()))
    print(f"TV = {tv!r}")
    return 0 if tv <= args.tolerance else 1


def cmd_entropy(args) -> int:
    cfg = load_config(args.config, args)
    group = parse_group(cfg.get("group"))
    mode = cfg.get("mode", EXACT)
    mu = parse_measure(group, cfg.get("measure"), mode)
    max_n = int(cfg.get("maxN", 6))
    table = entropy_diagnostic(mu, max_n)
    out = _out_dir(args)
    lines = ["n,entropy"] + [f"{n},{h!r}" for n, h in table]
    (out / "entropy.csv").write_text(
        "\n".join(lines) + "\n", encoding="utf-8", newline="\n"
    )
    for n, h in table:
        print(f"H(mu^*{n}) = {h!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="boundarywalk",
        description="stopping-time transforms of random walks on groups "
        f"(sampling backend: {_backend.BACKEND})",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--workers", type=int, default=1, help="Monte Carlo lanes")
        p.add_argument("--out", default=None, help=f"output dir (default ${OUT_ENV} or .)")
        p.add_argument("--mode", choices=[EXACT, FLOAT], default=None)

    p = sub.add_parser("transform", help="compute the transformed measure")
    p.add_argument("--config", required=True)
    common(p)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("verify", help="run a check bundle")
    p.add_argument("--bundle", default="all", help="identities | doob | transfer | all")
    p.add_argument("--samples", type=int, default=100_000)
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("compare", help="TV distance between two result files")
    p.add_argument("path_a")
    p.add_argument("path_b")
    p.add_argument("--tolerance", type=float, default=0.0)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("entropy", help="entropies of convolution powers")
    p.add_argument("--config", required=True)
    common(p)
    p.set_defaults(func=cmd_entropy)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
