"""Command line: build, verify, render, generate, bench.

Exit codes: 0 success (verification passed), 1 input error, 2 verification failed.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench as B
from . import io as dio
from .divergence import from_config
from .errors import InputError
from .pipeline import RunConfig, from_grid, load_run_config, make_sites, parse_grid, run_config
from .render import parse_layers, render_svg
from .sites import save_sites

EXIT_OK, EXIT_INPUT, EXIT_FAIL = 0, 1, 2


def _config(args) -> RunConfig:
    cfg = load_run_config(args.config) if args.config else RunConfig()
    return cfg.with_overrides(
        dims=parse_grid(args.grid) if getattr(args, "grid", None) else None,
        seed=getattr(args, "seed", None),
        samples=getattr(args, "samples", None),
        parallel=True if getattr(args, "parallel", False) else None,
    )


def _outdir(args) -> Path:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_build(args) -> int:
    cfg = _config(args)
    run = run_config(cfg)
    out = _outdir(args)
    extra = {"orphan": run.orphan, "absorbed": run.absorbed, "seed": cfg.seed}
    dio.save_diagram(out / "diagram.json", run.d, run.sites, run.grid, run.elements, run.dag, extra)
    dio.save_dual(run.dual, out / "dual.json")
    run.dual.write_off(out / "dual.off")
    verdict = "orphan-free" if run.orphan["orphan_free"] else "ORPHANS"
    print(f"orphan\t{verdict}")
    print(f"sites\t{len(run.sites)}")
    print(f"edges\t{len(run.dual.edges)}")
    print(f"faces\t{len(run.dual.faces)}")
    print(f"chain\t{str(run.dual.chain).lower()}")
    for w in run.dual.warnings:
        print(f"warning\t{w}", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args) -> int:
    d, sites, grid, _ = dio.load_diagram(args.diagram)
    dual = dio.load_dual(args.dual)
    if dual.n_vertices != len(sites):
        raise InputError("dual and diagram have different site counts")
    run = from_grid(d, sites, grid)
    run.dual = dual
    rep = run.verify(samples=args.samples, seed=args.seed)
    text = rep.to_json()
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_render(args) -> int:
    _, sites, grid, raw = dio.load_diagram(args.diagram)
    dual = dio.load_dual(args.dual)
    if "elements" in raw:
        elements = raw["elements"]
    else:
        run = from_grid(from_config(raw["divergence"]), sites, grid)
        elements = [dio._element_record(el) for el in run.elements]
    try:
        layers = parse_layers(args.layers, args.no_primal)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    out = Path(args.out)
    try:
        render_svg(out, grid, dual, elements, layers)
    except OSError as exc:
        raise InputError(f"cannot write {out}: {exc}") from exc
    print(out)
    return EXIT_OK


def cmd_generate(args) -> int:
    cfg = _config(args)
    d = from_config(cfg.divergence, cfg.base_dir)
    sites = make_sites(cfg, d)
    header = json.dumps(sites.meta, sort_keys=True) if sites.meta else None
    if args.out:
        save_sites(sites, args.out, header)
        print(f"{len(sites)} sites -> {args.out}")
    else:
        for x, y in sites.points:
            print(f"{float(x)!r} {float(y)!r}")
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = _config(args)
    d = from_config(cfg.divergence, cfg.base_dir)
    sites = make_sites(cfg, d)
    sizes = [parse_grid(s) for s in args.sizes.split(",")]
    rows = B.bench(d, sites, sizes, cfg.rect, repeats=args.repeats, parallel=cfg.parallel)
    text = B.to_csv(rows)
    sys.stdout.write(text)
    if args.out:
        out = _outdir(args)
        (out / "bench.csv").write_text(text)
        B.plot(rows, out / "bench.svg")
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="divdelaunay", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, grid=True):
        sp.add_argument("--config", help="run config (JSON)")
        sp.add_argument("--seed", type=int)
        if grid:
            sp.add_argument("--grid", help="grid vertices, WxH")
            sp.add_argument("--parallel", action="store_true", help="banded parallel precompute")

    b = sub.add_parser("build", help="label grid, elements and dual")
    common(b)
    b.add_argument("--samples", type=int)
    b.add_argument("--out", help="output directory")
    b.set_defaults(func=cmd_build)

    v = sub.add_parser("verify", help="run all checks on a diagram and a dual")
    v.add_argument("diagram")
    v.add_argument("dual")
    v.add_argument("--samples", type=int, default=1000)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out", help="also write the report here")
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("render", help="SVG figure")
    r.add_argument("diagram")
    r.add_argument("dual")
    r.add_argument("--out", required=True)
    r.add_argument("--layers", help=f"comma list of {','.join(('regions', 'edges', 'vertices', 'dual'))}")
    r.add_argument("--no-primal", action="store_true", help="omit regions and primal edges")
    r.set_defaults(func=cmd_render)

    g = sub.add_parser("generate", help="write a site file")
    common(g, grid=False)
    g.add_argument("--out", help="site file (default: stdout)")
    g.set_defaults(func=cmd_generate)

    k = sub.add_parser("bench", help="propagation time and counters per grid size")
    common(k, grid=False)
    k.add_argument("--sizes", default="256x256,512x512")
    k.add_argument("--repeats", type=int, default=3)
    k.add_argument("--parallel", action="store_true")
    k.add_argument("--out", help="directory for bench.csv and bench.svg")
    k.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
