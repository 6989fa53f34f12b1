"""Command-line entry point.

Every output starts with the run configuration (horizon, mesh, budget,
seed, format) so identical invocations produce byte-identical artifacts.
Exit codes: 0 success, 1 usage, 2 failed check or precondition, 3 I/O.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from . import __version__
from .calculus import (
    Affine,
    GridFn,
    OdeBoundError,
    euler_ode,
    exp_partial,
    exp_product,
    gronwall_check,
    log_search,
    mean_value_solve,
    power_general,
    root_search,
    taylor_residual,
)
from .checks import CHAPTERS, run_chapter
from .continuum import (
    GridInterval,
    MeshContinuum,
    Product,
    WeightedGraph,
    build_graph_metric,
    build_grid,
    continuum_from_json,
    merge_grids,
)
from .scale import ScaleContext, decimal_preview, format_rational
from .topology import accumulation_report, compactness_profile, connected_components, sorites_path
from .words import TREE_KINDS, gen_associahedron, gen_free_group_ball, word_continuum

EXIT_OK, EXIT_USAGE, EXIT_CHECK, EXIT_IO = 0, 1, 2, 3
FORMATS = ("json", "csv", "dot", "table")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")


def rational_list(text: str) -> list[Fraction]:
    return [rational(t) for t in text.split(",") if t.strip()]


@dataclass
class RunConfig:
    command: str
    horizon: int
    mesh: Fraction
    budget: int
    seed: int
    format: str
    digits: int = 12

    @classmethod
    def from_ctx(cls, command: str, ctx: ScaleContext, seed: int, fmt: str, digits: int) -> "RunConfig":
        return cls(command, ctx.horizon, ctx.mesh, ctx.compact_budget, seed, fmt, digits)

    def header(self) -> dict:
        return {
            "tool": "sorites",
            "version": __version__,
            "command": self.command,
            "horizon": self.horizon,
            "mesh": format_rational(self.mesh),
            "budget": self.budget,
            "seed": self.seed,
            "format": self.format,
        }

    def comment(self, prefix: str) -> str:
        h = self.header()
        body = " ".join(f"{k}={v}" for k, v in h.items() if k not in ("tool", "command"))
        return f"{prefix} sorites {self.command} | {body}\n"


@dataclass
class Output:
    """One result in every format the command can render."""

    json: dict | None = None
    csv: str | None = None
    dot: str | None = None
    table: list[tuple[str, str]] | None = None
    failures: list[str] = field(default_factory=list)

    def render(self, cfg: RunConfig) -> str:
        fmt = cfg.format
        if fmt == "json" and self.json is not None:
            return json.dumps({"config": cfg.header(), "result": self.json}, indent=2) + "\n"
        if fmt == "csv" and self.csv is not None:
            return cfg.comment("#") + self.csv
        if fmt == "dot" and self.dot is not None:
            return cfg.comment("//") + self.dot
        if fmt == "table" and self.table is not None:
            width = max((len(k) for k, _ in self.table), default=0)
            rows = "".join(f"{k.ljust(width)}  {v}\n" for k, v in self.table)
            return cfg.comment("#") + rows
        raise UsageError(f"format {fmt!r} is not available for '{cfg.command}'")


def _preview(r: Fraction, digits: int) -> str:
    return f"~{decimal_preview(r, digits)} (approximate)"


def _value_rows(label: str, r: Fraction, digits: int) -> list[tuple[str, str]]:
    return [(label, format_rational(r)), ("approx", _preview(r, digits))]


# grid functions selectable on the command line
FUNCTIONS: dict[str, Callable[[Fraction], Fraction]] = {
    "identity": lambda x: x,
    "square": lambda x: x * x,
    "cube": lambda x: x**3,
    "cubic": lambda x: x**3 + x,
    "tent": lambda x: abs(x - Fraction(1, 2)),
}


def parse_function(spec: str) -> Callable[[Fraction], Fraction]:
    """A named function or ``poly:c0,c1,...`` for ``c0 + c1 x + ...``."""
    if spec in FUNCTIONS:
        return FUNCTIONS[spec]
    if spec.startswith("poly:"):
        try:
            cs = rational_list(spec[5:])
        except argparse.ArgumentTypeError as e:
            raise UsageError(str(e))

        def poly(x: Fraction) -> Fraction:
            acc = Fraction(0)
            for c in reversed(cs):
                acc = acc * x + c
            return acc

        return poly
    raise UsageError(f"unknown function {spec!r}; use one of {', '.join(FUNCTIONS)} or poly:c0,c1,...")


def _read_json(path: str) -> dict:
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as e:
        raise OSError(f"{path}: not valid JSON ({e})")


def _load_continuum(path: str) -> MeshContinuum:
    data = _read_json(path)
    if "result" in data and "config" in data:
        data = data["result"]
    try:
        return continuum_from_json(data)
    except (KeyError, TypeError) as e:
        raise OSError(f"{path}: not a continuum artifact ({e})")


def _ctx(args, base: ScaleContext | None = None) -> ScaleContext:
    horizon = args.horizon if args.horizon is not None else (base.horizon if base else 100)
    if args.mesh is not None:
        mesh = args.mesh
    elif base is not None and args.horizon is None:
        mesh = base.mesh
    else:
        mesh = None
    if args.budget is not None:
        budget = args.budget
    elif base is not None and args.horizon is None:
        budget = base.compact_budget
    else:
        budget = None
    try:
        return ScaleContext(horizon, mesh, budget)
    except (TypeError, ValueError) as e:
        raise UsageError(str(e))


# ---- continuum ------------------------------------------------------------

def cmd_continuum(args, ctx: ScaleContext) -> tuple[Output, ScaleContext]:
    kind = args.source
    if kind == "grid":
        C = build_grid(args.a, args.b, args.eps, ctx)
    elif kind == "graph":
        C = build_graph_metric(WeightedGraph.from_json(_read_json(args.input)), ctx)
    elif kind == "merge":
        parts = [_load_continuum(p) for p in args.input]
        if not all(isinstance(p.source, GridInterval) for p in parts):
            raise UsageError("merge takes grid artifacts only")
        C = merge_grids([p.source for p in parts], ctx)
    elif kind == "product":
        parts = [_load_continuum(p) for p in args.input]
        C = MeshContinuum(Product([p.source for p in parts]), ctx, "product")
    else:
        if args.kind == "associahedron":
            C = build_graph_metric(gen_associahedron(args.n), ctx, f"associahedron-{args.n}")
        elif args.kind == "freegroup":
            C = build_graph_metric(gen_free_group_ball(args.n), ctx, f"free-group-ball-{args.n}")
        else:
            if args.omega is None:
                raise UsageError("--omega is required for word continua")
            C = word_continuum(args.kind, args.omega, ctx, args.carrier, args.weight)
    out = Output(json=C.to_json(include_table=args.table))
    try:
        out.dot = C.to_dot()
    except ValueError:
        pass
    out.table = [("name", C.name), ("points", str(C.n)), ("kind", C.source.kind)]
    return out, ctx


# ---- topology -------------------------------------------------------------

def _label_index(C: MeshContinuum, label: str) -> int:
    labels = C.labels()
    try:
        return labels.index(label)
    except ValueError:
        raise UsageError(f"no carrier point labelled {label!r}")


def cmd_topology(args, ctx: ScaleContext) -> tuple[Output, ScaleContext]:
    C0 = _load_continuum(args.input)
    ctx = _ctx(args, C0.ctx)
    C = MeshContinuum(C0.source, ctx, C0.name)
    if args.components:
        comp = connected_components(C)
        sizes = [len(p) for p in comp.parts]
        body = {"components": comp.count, "sizes": sizes}
        rows = [("components", str(comp.count)), ("sizes", " ".join(map(str, sizes)))]
        csv = "component,size\n" + "".join(f"{i},{s}\n" for i, s in enumerate(sizes))
        return Output(json=body, csv=csv, table=rows), ctx
    if args.sorites:
        x, y = (_label_index(C, s) for s in args.sorites)
        path = sorites_path(C, x, y)
        if path is None:
            body = {"chain": None}
            return Output(json=body, csv="step,label\n", table=[("chain", "none")]), ctx
        labels = C.labels()
        chain = [labels[i] for i in path.chain]
        body = {
            "chain": chain,
            "hops": path.hops,
            "adjacent_indistinguishable": path.adjacent_indistinguishable,
            "endpoints_distinguishable": path.endpoints_distinguishable,
        }
        csv = "step,label\n" + "".join(f"{k},{lab}\n" for k, lab in enumerate(chain))
        rows = [("hops", str(path.hops)), ("ok", str(path.ok).lower()), ("from", chain[0]), ("to", chain[-1])]
        out = Output(json=body, csv=csv, table=rows)
        if not path.ok:
            out.failures.append("chain does not verify")
        return out, ctx
    if args.accumulation:
        rep = accumulation_report(C)
        s = rep.summary()
        csv = "label,neighbors\n" + "".join(
            f"{lab},{int(c)}\n" for lab, c in zip(C.labels(), rep.neighbor_counts)
        )
        return Output(json=s, csv=csv, table=[(k, str(v)) for k, v in s.items()]), ctx
    prof = compactness_profile(C, args.ladder or [])
    rows = [(f"radius {format_rational(r)}", f"cover {c}  pack {p}")
            for r, c, p in zip(prof.ladder, prof.covering_counts, prof.packing_counts)]
    rows += [("cover at 1/A", str(prof.covering_at_threshold)), ("pack at 1/A", str(prof.packing_at_threshold)),
             ("budget", str(prof.budget)), ("compact", str(prof.compact_verdict).lower())]
    return Output(json=prof.to_json(C if args.witnesses else None), csv=prof.to_csv(), table=rows), ctx


# ---- calc -----------------------------------------------------------------

def cmd_calc(args, ctx: ScaleContext) -> tuple[Output, ScaleContext]:
    d = args.digits
    op = args.op
    if op == "exp":
        v = exp_product(args.r, args.t) if args.product else exp_partial(args.r, args.t)
        return Output(json={"value": format_rational(v)}, table=_value_rows("value", v, d)), ctx
    if op == "log":
        v = log_search(args.r, args.t)
        return Output(json={"value": format_rational(v)}, table=_value_rows("value", v, d)), ctx
    if op == "root":
        v = root_search(args.x, args.k, args.eps)
        return Output(json={"value": format_rational(v)}, table=_value_rows("value", v, d)), ctx
    if op == "power":
        v = power_general(args.x, args.y, args.t, ctx)
        return Output(json={"value": format_rational(v)}, table=_value_rows("value", v, d)), ctx
    if op == "mvt":
        f = GridFn.from_function(args.lo, args.hi, args.eps, parse_function(args.f))
        x = mean_value_solve(f, args.c, ctx if args.at_scale else None)
        body = {"x": format_rational(x), "f(x)": format_rational(f(x))}
        return Output(json=body, table=_value_rows("x", x, d) + [("f(x)", format_rational(f(x)))]), ctx
    if op == "taylor":
        f = GridFn.from_function(args.lo, args.hi, args.eps, parse_function(args.f))
        rep = taylor_residual(f, args.at, args.coeffs, args.order, ctx, args.delta)
        rows = [("worst residual", format_rational(rep.worst_residual)),
                ("approx", _preview(rep.worst_residual, d)),
                ("worst at", format_rational(rep.worst_at)),
                ("window points", str(rep.window)),
                ("verdict", str(rep.verdict).lower())]
        return Output(json=rep.to_json(), csv=rep.to_csv(), table=rows), ctx
    if op == "ode":
        if args.rhs == "linear":
            rhs = Affine(args.slope, args.offset)
        elif args.rhs == "zero":
            rhs = Affine(0, 0)
        else:
            rhs = lambda x, y: y * (1 - y)  # noqa: E731
        phi = euler_ode(rhs, args.a, args.eps, args.K, args.L, args.b)
        end = phi.values[len(phi) - 1]
        body = {"end": format_rational(end), "steps": len(phi) - 1}
        rows = _value_rows(f"phi({format_rational(args.b)})", end, d) + [("steps", str(len(phi) - 1))]
        out = Output(json=body, csv=phi.to_csv(), table=rows)
        if args.full:
            body["phi"] = phi.to_json()
        if args.gap is not None:
            L = args.L if args.L is not None else Fraction(1)
            other = euler_ode(rhs, args.a + args.gap, args.eps, args.K, L, args.b)
            rep = gronwall_check(phi, other, L)
            body["gronwall"] = rep.to_json()
            rows.append(("gronwall holds", str(rep.holds).lower()))
            if rep.max_ratio is not None:
                rows.append(("max ratio", _preview(rep.max_ratio, 6)))
            if not rep.holds:
                out.failures.append(f"Gronwall bound fails at x={format_rational(rep.first_violation)}")
        return out, ctx
    raise UsageError(f"unknown calc operation {op!r}")


# ---- demo -----------------------------------------------------------------

def cmd_demo(args, ctx: ScaleContext) -> tuple[Output, ScaleContext]:
    checks = run_chapter(args.chapter, args.seed)
    rows = [("PASS" if c.passed else "FAIL", f"{c.name} | {c.measured}") for c in checks]
    csv = "chapter,name,passed,measured\n" + "".join(
        f"{c.chapter},\"{c.name}\",{str(c.passed).lower()},\"{c.measured}\"\n" for c in checks
    )
    out = Output(json={"checks": [c.to_json() for c in checks]}, csv=csv, table=rows)
    out.failures = [c.name for c in checks if not c.passed]
    return out, ctx


# ---- parser ---------------------------------------------------------------

def _globals(p: argparse.ArgumentParser, suppress: bool) -> None:
    dflt = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    g = p.add_argument_group("run configuration")
    g.add_argument("--horizon", type=int, default=dflt(None), help="accessibility horizon A (default 100)")
    g.add_argument("--mesh", type=rational, default=dflt(None), help="default mesh (default 1/A^2)")
    g.add_argument("--budget", type=int, default=dflt(None), help="compactness budget (default A^2)")
    g.add_argument("--seed", type=int, default=dflt(0), help="seed for randomized sweeps")
    g.add_argument("--format", choices=FORMATS, default=dflt(None), help="output format")
    g.add_argument("--out", default=dflt(None), help="write output to this file")
    g.add_argument("--digits", type=int, default=dflt(12), help="digits in decimal previews")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sorites", description="Exact finite models of scale-relative analysis.")
    parser.add_argument("--version", action="version", version=f"sorites {__version__}")
    _globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def leaf(parent, name: str, **kw) -> argparse.ArgumentParser:
        p = parent.add_parser(name, **kw)
        _globals(p, suppress=True)
        return p

    pc = sub.add_parser("continuum", help="build a continuum artifact")
    csub = pc.add_subparsers(dest="source", required=True, parser_class=_Parser)
    p = leaf(csub, "grid", help="interval mesh [a, b]_eps")
    p.add_argument("--a", type=rational, required=True)
    p.add_argument("--b", type=rational, required=True)
    p.add_argument("--eps", type=rational, required=True)
    p.add_argument("--table", action="store_true", help="include the distance table")
    p = leaf(csub, "graph", help="shortest-path metric of a weighted graph JSON")
    p.add_argument("--input", required=True)
    p.add_argument("--table", action="store_true")
    p = leaf(csub, "word", help="word, hypercube or Cayley-type continuum")
    p.add_argument("--kind", required=True, choices=TREE_KINDS + ("hypercube", "associahedron", "freegroup"))
    p.add_argument("--omega", type=int, help="word length for tree and hypercube kinds")
    p.add_argument("--n", type=int, default=4, help="size for associahedron / free group ball")
    p.add_argument("--carrier", choices=("leaves", "all"), default="leaves")
    p.add_argument("--weight", type=rational, default=Fraction(1), help="edge weight for the path metric")
    p.add_argument("--table", action="store_true")
    p = leaf(csub, "merge", help="disjoint union of grid artifacts inside the line")
    p.add_argument("--input", action="append", required=True)
    p.add_argument("--table", action="store_true")
    p = leaf(csub, "product", help="max-metric product of continuum artifacts")
    p.add_argument("--input", action="append", required=True)
    p.add_argument("--table", action="store_true")

    p = leaf(sub, "topology", help="diagnostics on a continuum artifact")
    p.add_argument("input", help="continuum JSON file, or - for stdin")
    p.add_argument("--ladder", type=rational_list, help="comma-separated radii")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--profile", action="store_true", help="covering/packing profile (default)")
    mode.add_argument("--components", action="store_true")
    mode.add_argument("--sorites", nargs=2, metavar=("X", "Y"), help="chain between two carrier labels")
    mode.add_argument("--accumulation", action="store_true")
    p.add_argument("--witnesses", action="store_true", help="include centers in the JSON profile")

    pk = sub.add_parser("calc", help="exact calculus experiments")
    ksub = pk.add_subparsers(dest="op", required=True, parser_class=_Parser)
    p = leaf(ksub, "exp", help="truncated exponential series")
    p.add_argument("--r", type=rational, required=True)
    p.add_argument("--t", type=int, default=100)
    p.add_argument("--product", action="store_true", help="use (1 + r/T)^T instead")
    p = leaf(ksub, "log", help="logarithm by bracketing search")
    p.add_argument("--r", type=rational, required=True)
    p.add_argument("--t", type=int, default=100)
    p = leaf(ksub, "root", help="k-th root on a mesh")
    p.add_argument("--x", type=rational, required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--eps", type=rational, required=True)
    p = leaf(ksub, "power", help="x^y through exp and log")
    p.add_argument("--x", type=rational, required=True)
    p.add_argument("--y", type=rational, required=True)
    p.add_argument("--t", type=int, default=100)
    p = leaf(ksub, "mvt", help="first mesh point where f reaches c")
    p.add_argument("--f", required=True)
    p.add_argument("--c", type=rational, required=True)
    p.add_argument("--eps", type=rational, required=True)
    p.add_argument("--lo", type=rational, default=Fraction(0))
    p.add_argument("--hi", type=rational, default=Fraction(1))
    p.add_argument("--at-scale", action="store_true", help="require visible bracketing at the horizon")
    p = leaf(ksub, "taylor", help="Taylor residual over the infinitesimal window")
    p.add_argument("--f", required=True)
    p.add_argument("--at", type=rational, required=True, help="center")
    p.add_argument("--coeffs", type=rational_list, required=True, help="derivatives c0,c1,...")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--eps", type=rational, required=True)
    p.add_argument("--delta", type=rational, help="exclusion radius (default: the mesh)")
    p.add_argument("--lo", type=rational, default=Fraction(0))
    p.add_argument("--hi", type=rational, default=Fraction(1))
    p = leaf(ksub, "ode", help="forward Euler on [0, b]")
    p.add_argument("--rhs", choices=("linear", "zero", "logistic"), default="linear")
    p.add_argument("--slope", type=rational, default=Fraction(1))
    p.add_argument("--offset", type=rational, default=Fraction(0))
    p.add_argument("--a", type=rational, required=True, help="initial value")
    p.add_argument("--eps", type=rational, required=True)
    p.add_argument("--b", type=rational, default=Fraction(1))
    p.add_argument("--K", type=rational, help="bound on the right-hand side")
    p.add_argument("--L", type=rational, help="Lipschitz constant")
    p.add_argument("--gap", type=rational, help="rerun from a + gap and check the Gronwall bound")
    p.add_argument("--full", action="store_true", help="include every value in JSON")

    p = leaf(sub, "demo", help="reproduce a chapter's experiments")
    p.add_argument("chapter", choices=tuple(CHAPTERS))
    return parser


DEFAULT_FORMAT = {"continuum": "json", "topology": "json", "calc": "table", "demo": "table"}
COMMANDS = {"continuum": cmd_continuum, "topology": cmd_topology, "calc": cmd_calc, "demo": cmd_demo}


def _command_name(args) -> str:
    parts = [args.command]
    for attr in ("source", "op", "chapter"):
        if getattr(args, attr, None):
            parts.append(str(getattr(args, attr)))
    return " ".join(parts)


def _default_format(args) -> str:
    if args.command == "continuum" and args.source == "word" and args.kind in ("associahedron", "freegroup"):
        return "dot"
    if args.command == "topology" and not (args.components or args.sorites or args.accumulation):
        return "csv"
    return DEFAULT_FORMAT[args.command]


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    fmt = args.format or _default_format(args)
    try:
        ctx = _ctx(args)
        out, ctx = COMMANDS[args.command](args, ctx)
        cfg = RunConfig.from_ctx(_command_name(args), ctx, args.seed, fmt, args.digits)
        text = out.render(cfg)
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        if out.failures:
            for name in out.failures:
                print(f"FAILED: {name}", file=sys.stderr)
            return EXIT_CHECK
        return EXIT_OK
    except UsageError as e:
        print(f"sorites: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"sorites: {e}", file=sys.stderr)
        return EXIT_IO
    except (OdeBoundError, ValueError, ArithmeticError) as e:
        print(f"sorites: {e}", file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
