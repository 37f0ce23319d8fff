"""Command line for reproducible batch runs.

Five subcommands: ``window`` builds and stores a finite ball, ``exact``
writes dense potential-theory output, ``sample`` writes occupation-field
draws, ``verify`` runs the statistical batteries, and ``asymptotics`` runs
the large-level Gaussian comparison.  Settings come from defaults, then an
optional sectioned config file, then flags; flags win.  Every run writes a
config snapshot next to its outputs, and identical (config, seed) pairs
produce byte-identical files at any worker count.

Exit codes: 0 all requested checks passed, 1 a check failed or a
computation error was reported, 2 usage or validation error.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import asdict, dataclass

import numpy as np

from . import io as iomod
from .graph import (
    GraphError,
    GraphGenerator,
    WeightedWindow,
    bary_tree,
    build_window,
    collapse,
    lattice,
    read_edge_list,
)
from .interlace import sample_field_batch
from .potential import (
    ConvergenceFailure,
    LaplaceConditionError,
    PotentialError,
    as_vector,
    equilibrium,
    green_killed,
    laplace_exact_finite,
    laplace_exact_limit,
    resolvent_check,
)
from .verify import (
    asymptotics_test,
    isomorphism_test,
    laplace_test,
    sampler_agreement_test,
    shifted_isomorphism_test,
    vacant_test,
)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

#: Environment variable consulted for the default output directory.
OUT_ENV = "INTERLACEMENTS_OUT"

_SAMPLER_ALIASES = {
    "collapse": "collapse",
    "excursion": "excursion-soup",
    "excursion-soup": "excursion-soup",
    "hitting": "hitting-soup",
    "hitting-soup": "hitting-soup",
}

_BATTERIES = ("isomorphism", "shifted", "laplace", "vacant", "agreement", "all")


class UsageError(Exception):
    """Bad flag, config value, or out-of-range parameter; exits 2."""


@dataclass(frozen=True)
class RunConfig:
    """Resolved settings that define a run; the snapshot these serialize to
    is deliberately independent of execution details like worker count."""

    command: str
    gen: str | None = None
    edge_list: str | None = None
    center: tuple | None = None
    radius: int = 4
    radii: tuple[int, ...] = ()
    u: float = 1.0
    u_schedule: tuple[float, ...] = ()
    a: float = 0.0
    v: tuple[tuple[tuple, float], ...] = ()
    k: tuple[tuple, ...] = ()
    x0: tuple | None = None
    sampler: str = "collapse"
    count: int = 1000
    seed: int = 0
    lam: float = 10.0
    tol: float = 1e-3
    out: str = "runs"

    def validate(self) -> None:
        if self.u < 0:
            raise UsageError(f"level must be nonnegative, got {self.u}")
        if self.radius < 0:
            raise UsageError(f"radius must be nonnegative, got {self.radius}")
        if self.count < 1:
            raise UsageError(f"sample count must be positive, got {self.count}")
        if any(val < 0 for _, val in self.v):
            raise UsageError("potential values must be nonnegative")
        if self.radii and list(self.radii) != sorted(set(self.radii)):
            raise UsageError(f"radius schedule must be strictly increasing, got {list(self.radii)}")
        sched = list(self.u_schedule)
        if sched and (sched != sorted(set(sched)) or sched[0] <= 0):
            raise UsageError(f"level schedule must be positive and strictly increasing, got {sched}")
        if self.lam <= 0:
            raise UsageError(f"resolvent rate must be positive, got {self.lam}")
        if self.tol <= 0:
            raise UsageError(f"tolerance must be positive, got {self.tol}")
        if self.sampler not in _SAMPLER_ALIASES.values():
            raise UsageError(f"unknown sampler {self.sampler!r}")

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d["schema"] = iomod.SCHEMA
        d["center"] = list(self.center) if self.center is not None else None
        d["x0"] = list(self.x0) if self.x0 is not None else None
        d["radii"] = list(self.radii)
        d["u_schedule"] = list(self.u_schedule)
        d["v"] = [[list(vert), val] for vert, val in self.v]
        d["k"] = [list(vert) for vert in self.k]
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        d.pop("schema", None)
        d["center"] = tuple(d["center"]) if d.get("center") is not None else None
        d["x0"] = tuple(d["x0"]) if d.get("x0") is not None else None
        d["radii"] = tuple(d.get("radii", ()))
        d["u_schedule"] = tuple(float(x) for x in d.get("u_schedule", ()))
        d["v"] = tuple((tuple(vert), float(val)) for vert, val in d.get("v", ()))
        d["k"] = tuple(tuple(vert) for vert in d.get("k", ()))
        return cls(**d)


def parse_vertex(text: str, gen: GraphGenerator) -> tuple:
    """Comma-separated integer coordinates, or ``origin`` for the root."""
    s = text.strip()
    if s == "origin":
        return gen.root
    try:
        return tuple(int(t) for t in s.split(","))
    except ValueError:
        raise UsageError(f"cannot parse vertex {text!r}: use comma-separated integers or 'origin'")


def parse_kset(text: str, gen: GraphGenerator) -> tuple[tuple, ...]:
    """Semicolon-separated vertex list; accepts an optional ``K={...}`` wrapper."""
    s = text.strip()
    if s.startswith("K="):
        s = s[2:]
    s = s.strip().strip("{}")
    parts = [p for p in s.split(";") if p.strip()]
    if not parts:
        raise UsageError(f"empty vertex set in {text!r}")
    return tuple(parse_vertex(p, gen) for p in parts)


def parse_vspec(text: str, gen: GraphGenerator) -> tuple[tuple[tuple, float], ...]:
    """Potential as ``vertex:value`` pairs joined by semicolons."""
    pairs = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        vert_text, sep, val_text = part.rpartition(":")
        if not sep:
            raise UsageError(f"potential entry {part!r} is missing ':VALUE'")
        try:
            val = float(val_text)
        except ValueError:
            raise UsageError(f"cannot parse potential value in {part!r}")
        pairs.append((parse_vertex(vert_text, gen), val))
    if not pairs:
        raise UsageError(f"empty potential specification {text!r}")
    return tuple(pairs)


def _parse_float_list(text: str, what: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise UsageError(f"cannot parse {what} {text!r}: use comma-separated numbers")


def _parse_int_list(text: str, what: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise UsageError(f"cannot parse {what} {text!r}: use comma-separated integers")


def make_generator(gen_name: str | None, edge_list: str | None) -> GraphGenerator:
    if edge_list is not None:
        return read_edge_list(edge_list)
    if not gen_name:
        raise UsageError("no graph given: pass --gen (e.g. z3, tree2) or --edge-list PATH")
    if gen_name.startswith("z") and gen_name[1:].isdigit():
        return lattice(int(gen_name[1:]))
    if gen_name.startswith("tree") and gen_name[4:].isdigit():
        return bary_tree(int(gen_name[4:]))
    raise UsageError(f"unknown generator {gen_name!r}: use zD, treeB, or --edge-list")


def _resolve(args: argparse.Namespace) -> tuple[RunConfig, GraphGenerator]:
    """Merge defaults, config file, and flags (flags win) into a RunConfig."""
    filecfg: dict[str, str] = {}
    if args.config:
        try:
            filecfg = iomod.read_config(args.config)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {args.config!r}: {exc}")

    def pick(key: str, flag_value):
        return flag_value if flag_value is not None else filecfg.get(key)

    gen_name = pick("gen", args.gen)
    edge_list = pick("edge_list", getattr(args, "edge_list", None))
    gen = make_generator(gen_name, edge_list)

    def picked(key, flag_value, conv, default):
        raw = pick(key, flag_value)
        if raw is None:
            return default
        return conv(raw) if isinstance(raw, str) else raw

    sampler_raw = pick("sampler", getattr(args, "sampler", None)) or "collapse"
    if sampler_raw not in _SAMPLER_ALIASES:
        raise UsageError(f"unknown sampler {sampler_raw!r}; use collapse, excursion, or hitting")

    out = pick("out", args.out)
    if out is None:
        out = os.environ.get(OUT_ENV, "runs")

    cfg = RunConfig(
        command=args.command,
        gen=gen_name if edge_list is None else None,
        edge_list=edge_list,
        center=picked("center", getattr(args, "center", None), lambda s: parse_vertex(s, gen), None),
        radius=picked("radius", getattr(args, "radius", None), int, 4),
        radii=picked("radii", getattr(args, "radii", None), lambda s: _parse_int_list(s, "radius schedule"), ()),
        u=picked("u", getattr(args, "u", None), float, 1.0),
        u_schedule=picked(
            "u_schedule",
            getattr(args, "u_schedule", None),
            lambda s: _parse_float_list(s, "level schedule"),
            (1.0, 10.0, 50.0, 200.0),
        ),
        a=picked("a", getattr(args, "a", None), float, 0.0),
        v=picked("v", getattr(args, "v", None), lambda s: parse_vspec(s, gen), ()),
        k=picked("k", getattr(args, "k", None), lambda s: parse_kset(s, gen), ()),
        x0=picked("x0", getattr(args, "x0", None), lambda s: parse_vertex(s, gen), None),
        sampler=_SAMPLER_ALIASES[sampler_raw],
        count=picked("count", getattr(args, "count", None), int, 1000),
        seed=picked("seed", args.seed, int, 0),
        lam=picked("lambda", getattr(args, "lam", None), float, 10.0),
        tol=picked("tol", getattr(args, "tol", None), float, 1e-3),
        out=out,
    )
    cfg.validate()
    return cfg, gen


def _window_for(cfg: RunConfig, gen: GraphGenerator) -> WeightedWindow:
    center = cfg.center if cfg.center is not None else gen.root
    try:
        return build_window(gen, center, cfg.radius)
    except (GraphError, ValueError) as exc:
        raise UsageError(str(exc))


def _require_in_window(window: WeightedWindow, vertices, what: str) -> None:
    for v in vertices:
        if v not in window.index:
            raise UsageError(f"{what} vertex {v} lies outside the window")


def _outdir(cfg: RunConfig) -> str:
    os.makedirs(cfg.out, exist_ok=True)
    return cfg.out


def _snapshot(cfg: RunConfig, outdir: str) -> None:
    iomod.dump_json(cfg.to_json_dict(), os.path.join(outdir, "config.json"))


def _emit(path: str) -> None:
    print(f"wrote {path}")


def _v_vector(cfg: RunConfig, window: WeightedWindow) -> np.ndarray:
    pairs = cfg.v if cfg.v else (((window.center or window.vertices[0]), 1.0),)
    _require_in_window(window, [vert for vert, _ in pairs], "potential")
    return as_vector(window, {vert: val for vert, val in pairs})


def _k_list(cfg: RunConfig, window: WeightedWindow, default_center: bool = True):
    if cfg.k:
        k = list(cfg.k)
    elif default_center:
        k = [window.center or window.vertices[0]]
    else:
        return []
    _require_in_window(window, k, "target-set")
    return k


def cmd_window(cfg: RunConfig, gen: GraphGenerator, workers: int) -> int:
    window = _window_for(cfg, gen)
    window.validate()
    outdir = _outdir(cfg)
    _snapshot(cfg, outdir)
    path = os.path.join(outdir, "window.json")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(window.to_json())
    _emit(path)
    print(
        f"window: {window.n} vertices, radius {cfg.radius}, "
        f"total boundary weight {iomod.format_float(window.total_boundary_weight())}"
    )
    return EXIT_PASS


def cmd_exact(cfg: RunConfig, gen: GraphGenerator, workers: int, args) -> int:
    window = _window_for(cfg, gen)
    outdir = _outdir(cfg)
    _snapshot(cfg, outdir)
    wants_green = args.green or not (args.cap is not None or args.laplace or args.resolvent_chk)
    failed = False

    if wants_green:
        green = green_killed(window)
        path = os.path.join(outdir, "green.csv")
        iomod.write_matrix_csv(path, window, green.values)
        _emit(path)

    if args.cap is not None:
        k = list(parse_kset(args.cap, gen)) if args.cap else _k_list(cfg, window)
        _require_in_window(window, k, "target-set")
        eq = equilibrium(k, window)
        path = os.path.join(outdir, "equilibrium.csv")
        iomod.write_vector_csv(path, window, eq.mass)
        _emit(path)
        cap_path = os.path.join(outdir, "capacity.json")
        iomod.dump_json(
            {
                "schema": iomod.SCHEMA,
                "K": [list(v) for v in k],
                "capacity": eq.capacity,
                "window_hash": iomod.window_hash(window),
            },
            cap_path,
        )
        _emit(cap_path)
        print(f"capacity: {iomod.format_float(eq.capacity)}")

    if args.laplace:
        v = _v_vector(cfg, window)
        value = laplace_exact_finite(v, window, cfg.u)
        blob = {
            "schema": iomod.SCHEMA,
            "u": cfg.u,
            "V": {iomod.vertex_label(window.vertices[i]): float(v[i]) for i in np.nonzero(v)[0]},
            "finite": value,
            "window_hash": iomod.window_hash(window),
        }
        if gen.transient:
            support = {window.vertices[i]: float(v[i]) for i in np.nonzero(v)[0]}
            radii = cfg.radii if cfg.radii else None
            try:
                if radii:
                    blob["limit"] = laplace_exact_limit(support, gen, cfg.u, radii=radii, tol=cfg.tol)
                else:
                    blob["limit"] = laplace_exact_limit(support, gen, cfg.u, tol=cfg.tol)
            except (ConvergenceFailure, LaplaceConditionError) as exc:
                blob["limit_error"] = str(exc)
        path = os.path.join(outdir, "laplace.json")
        iomod.dump_json(blob, path)
        _emit(path)
        print(f"laplace transform: {iomod.format_float(value)}")

    if args.resolvent_chk:
        v = _v_vector(cfg, window)
        report = resolvent_check(v, window, cfg.lam)
        path = os.path.join(outdir, "resolvent_check.json")
        iomod.dump_json(iomod.report_json_dict(report), path)
        _emit(path)
        print(report.summary())
        failed = failed or not report.passed

    return EXIT_FAIL if failed else EXIT_PASS


def cmd_sample(cfg: RunConfig, gen: GraphGenerator, workers: int) -> int:
    window = _window_for(cfg, gen)
    outdir = _outdir(cfg)
    _snapshot(cfg, outdir)
    k = _k_list(cfg, window) if cfg.sampler == "hitting-soup" else None
    batch = sample_field_batch(
        window, cfg.u, cfg.count, cfg.seed, sampler=cfg.sampler, workers=workers, K=k
    )
    csv_path = os.path.join(outdir, "field.csv")
    iomod.write_field_csv(csv_path, batch)
    _emit(csv_path)
    sidecar = iomod.field_sidecar(batch)
    if k is not None:
        sidecar["K"] = [list(v) for v in k]
    json_path = os.path.join(outdir, "field.json")
    iomod.dump_json(sidecar, json_path)
    _emit(json_path)
    return EXIT_PASS


def _verify_reports(cfg: RunConfig, window: WeightedWindow, battery: str, workers: int):
    names = ("isomorphism", "laplace", "vacant", "agreement") if battery == "all" else (battery,)
    for name in names:
        if name == "isomorphism":
            yield "isomorphism", isomorphism_test(
                window, cfg.u, count=cfg.count, seed=cfg.seed, workers=workers
            )
        elif name == "shifted":
            yield "shifted", shifted_isomorphism_test(
                window, cfg.u, cfg.a, count=cfg.count, seed=cfg.seed, workers=workers
            )
        elif name == "laplace":
            v = _v_vector(cfg, window)
            yield "laplace", laplace_test(
                window, cfg.u, v, count=cfg.count, seed=cfg.seed, workers=workers
            )
        elif name == "vacant":
            k = _k_list(cfg, window)
            yield "vacant", vacant_test(
                window, k, cfg.u, count=cfg.count, seed=cfg.seed, workers=workers
            )
        elif name == "agreement":
            k = _k_list(cfg, window, default_center=False) or None
            yield "agreement", sampler_agreement_test(
                window, cfg.u, count=cfg.count, K=k, seed=cfg.seed, workers=workers
            )


def cmd_verify(cfg: RunConfig, gen: GraphGenerator, workers: int, battery: str) -> int:
    window = _window_for(cfg, gen)
    outdir = _outdir(cfg)
    _snapshot(cfg, outdir)
    all_passed = True
    try:
        for name, report in _verify_reports(cfg, window, battery, workers):
            json_path = os.path.join(outdir, f"report_{name}.json")
            iomod.dump_json(iomod.report_json_dict(report), json_path)
            csv_path = os.path.join(outdir, f"report_{name}.csv")
            iomod.write_report_csv(csv_path, report)
            _emit(json_path)
            _emit(csv_path)
            print(report.summary())
            all_passed = all_passed and report.passed
    except (PotentialError, GraphError, np.linalg.LinAlgError) as exc:
        path = os.path.join(outdir, "report_error.json")
        iomod.dump_json({"schema": iomod.SCHEMA, "passed": False, "error": str(exc)}, path)
        _emit(path)
        print(f"verification error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_PASS if all_passed else EXIT_FAIL


def cmd_asymptotics(cfg: RunConfig, gen: GraphGenerator, workers: int) -> int:
    window = _window_for(cfg, gen)
    if cfg.x0 is not None:
        _require_in_window(window, [cfg.x0], "base")
    outdir = _outdir(cfg)
    _snapshot(cfg, outdir)
    try:
        report = asymptotics_test(
            window,
            u_schedule=cfg.u_schedule,
            count=cfg.count,
            x0=cfg.x0,
            seed=cfg.seed,
            workers=workers,
        )
    except (PotentialError, GraphError, np.linalg.LinAlgError) as exc:
        path = os.path.join(outdir, "report_error.json")
        iomod.dump_json({"schema": iomod.SCHEMA, "passed": False, "error": str(exc)}, path)
        _emit(path)
        print(f"verification error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    json_path = os.path.join(outdir, "report_asymptotics.json")
    iomod.dump_json(iomod.report_json_dict(report), json_path)
    csv_path = os.path.join(outdir, "report_asymptotics.csv")
    iomod.write_report_csv(csv_path, report)
    _emit(json_path)
    _emit(csv_path)
    print(report.summary())
    return EXIT_PASS if report.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("run settings (defaults < config file < flags)")
    g.add_argument("--config", help="sectioned key-value config file")
    g.add_argument("--gen", help="graph generator: zD (lattice) or treeB (rooted tree)")
    g.add_argument("--edge-list", dest="edge_list", help="path to 'x y weight' lines")
    g.add_argument("--center", help="window center vertex, e.g. 0,0,0 or origin")
    g.add_argument("--radius", type=int, help="window radius (default 4)")
    g.add_argument("--radii", help="window schedule for limit values, e.g. 2,4,6")
    g.add_argument("--u", type=float, help="interlacement level (default 1)")
    g.add_argument("--u-schedule", dest="u_schedule", help="increasing levels, e.g. 1,10,50,200")
    g.add_argument("--a", type=float, help="shift for the shifted battery (default 0)")
    g.add_argument("--V", dest="v", help="potential, e.g. 'origin:1;1,0,0:0.5'")
    g.add_argument("--K", dest="k", help="vertex set, e.g. 'origin;1,0,0'")
    g.add_argument("--x0", help="base vertex for pinned differences")
    g.add_argument("--sampler", help="collapse (default), excursion, or hitting")
    g.add_argument("--n", dest="count", type=int, help="sample count (default 1000)")
    g.add_argument("--seed", type=int, help="master seed (default 0)")
    g.add_argument("--lambda", dest="lam", type=float, help="resolvent rate (default 10)")
    g.add_argument("--tol", type=float, help="window-schedule tolerance (default 1e-3)")
    g.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./runs)")
    g.add_argument(
        "--workers",
        type=int,
        default=None,
        help="sampler threads (default: available parallelism); never changes output bytes",
    )

    parser = argparse.ArgumentParser(
        prog="interlacements",
        description="Occupation fields of random interlacements on finite windows: "
        "exact potential theory, Monte Carlo samplers, and statistical verification. "
        "CSV columns: green.csv row,col,value; equilibrium.csv vertex,value; "
        "field.csv sample,vertex,value; report CSVs check,observed,expected,se,tolerance,passed.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("window", parents=[common], help="build a window and store its JSON description")

    p_exact = sub.add_parser("exact", parents=[common], help="dense potential-theory computations")
    p_exact.add_argument("--green", action="store_true", help="write the killed Green matrix CSV (default)")
    p_exact.add_argument(
        "--cap",
        nargs="?",
        const="",
        default=None,
        metavar="KSPEC",
        help="write equilibrium measure and capacity for K (inline spec or --K)",
    )
    p_exact.add_argument("--laplace", action="store_true", help="write exact occupation Laplace values")
    p_exact.add_argument(
        "--resolvent-check",
        dest="resolvent_chk",
        action="store_true",
        help="cross-validate the collapsed resolvent against the window solve",
    )

    sub.add_parser("sample", parents=[common], help="write occupation-field samples")

    p_verify = sub.add_parser("verify", parents=[common], help="run statistical batteries")
    p_verify.add_argument("battery", choices=_BATTERIES, help="which battery to run")

    sub.add_parser("asymptotics", parents=[common], help="large-level Gaussian limit battery")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    workers = args.workers if args.workers is not None else (os.cpu_count() or 1)
    if workers < 1:
        print("error: --workers must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg, gen = _resolve(args)
        if args.command == "window":
            return cmd_window(cfg, gen, workers)
        if args.command == "exact":
            return cmd_exact(cfg, gen, workers, args)
        if args.command == "sample":
            return cmd_sample(cfg, gen, workers)
        if args.command == "verify":
            return cmd_verify(cfg, gen, workers, args.battery)
        if args.command == "asymptotics":
            return cmd_asymptotics(cfg, gen, workers)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def run() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    run()
