"""Command-line front end: abstract, solve, experiment.

Configuration comes from one YAML file; command-line flags override the
handful of knobs that vary between runs (seed, output directory,
iteration budget, coarsening threshold).  Every run writes `config.yaml`
— the fully resolved configuration plus the tool version — next to its
results, so an output directory is self-describing and a run can be
repeated byte-for-byte from it (timing columns excepted).

Exit codes: 0 success, 2 configuration or input error, 3 node store
exhausted or out of memory.
"""

import argparse
import json
import math
import os
import sys
import time

import yaml

from relsynth import __version__
from relsynth.abstraction import (DynamicsComponent, Exhaustive, RandomRects,
                                  ShiftedGrids, dubins_components, traverse)
from relsynth.bdd import BddError, CapacityError
from relsynth.games import Game, downsample_schedule, dump_cell_runs, solve
from relsynth.interfaces import comp, load_interface, save_interface
from relsynth.spaces import Dimension, Encoding, encode_set


class ConfigError(Exception):
    """Configuration that fails validation; exits with status 2."""


# -- configuration ----------------------------------------------------------

DEFAULTS = {
    "system": "dubins",
    "bits": 7,
    "length": 1.4,
    "view": None,
    "dims": None,
    "controls": None,
    "plan": {"kind": "exhaustive"},
    "objective": {"kind": "reach",
                  "box": {"px": [-0.5, 0.5], "py": [-0.5, 0.5]},
                  "encode": "inner"},
    "solver": {"max_iters": 1000000, "coarsen_threshold": None,
               "downsample": None},
    "seed": 0,
    "cap": None,
    "out": "relsynth-out",
    "images": True,
    "experiment": {},
}

_PLAN_KEYS = {"exhaustive": {"kind", "bits"},
              "random_rects": {"kind", "count", "seed"},
              "shifted_grids": {"kind", "sizes"}}


def _check_keys(mapping, allowed, where):
    unknown = set(mapping) - set(allowed)
    if unknown:
        raise ConfigError("unknown %s key(s): %s"
                          % (where, ", ".join(sorted(unknown))))


def _require(cond, msg):
    if not cond:
        raise ConfigError(msg)


def load_config(path, overrides=None):
    """Parse, validate and default-fill a run configuration."""
    if path is None:
        raw = {}
    else:
        try:
            with open(path) as fh:
                raw = yaml.safe_load(fh) or {}
        except OSError as e:
            raise ConfigError("cannot read config: %s" % e)
        except yaml.YAMLError as e:
            raise ConfigError("malformed config: %s" % e)
    _require(isinstance(raw, dict), "config root must be a mapping")
    _check_keys(raw, DEFAULTS, "config")
    cfg = {}
    for key, dflt in DEFAULTS.items():
        val = raw.get(key, dflt)
        if isinstance(dflt, dict) and isinstance(val, dict) and key != "experiment":
            merged = dict(dflt)
            merged.update(val)
            val = merged
        cfg[key] = val
    for key, val in (overrides or {}).items():
        if val is not None:
            if key in ("max_iters", "coarsen_threshold"):
                cfg["solver"] = dict(cfg["solver"])
                cfg["solver"][key] = val
            else:
                cfg[key] = val
    _validate(cfg)
    return cfg


def _validate(cfg):
    _require(cfg["system"] in ("dubins", "toy1d", "custom"),
             "system must be dubins, toy1d or custom")
    bits = cfg["bits"]
    if isinstance(bits, dict):
        for name, b in bits.items():
            _require(isinstance(b, int) and 1 <= b <= 24,
                     "bits for %s must be an integer in 1..24" % name)
    else:
        _require(isinstance(bits, int) and 1 <= bits <= 24,
                 "bits must be an integer in 1..24")
    plan = cfg["plan"]
    _require(isinstance(plan, dict) and "kind" in plan,
             "plan must be a mapping with a kind")
    _require(plan["kind"] in _PLAN_KEYS,
             "plan kind must be one of %s" % sorted(_PLAN_KEYS))
    _check_keys(plan, _PLAN_KEYS[plan["kind"]], "plan")
    obj = cfg["objective"]
    _check_keys(obj, {"kind", "box", "encode"}, "objective")
    _require(obj.get("kind") in ("reach", "safe"),
             "objective kind must be reach or safe")
    _require(obj.get("encode", "inner") in ("inner", "outer"),
             "objective encode must be inner or outer")
    _require(isinstance(obj.get("box", {}), dict),
             "objective box must map dimension names to [lo, hi]")
    sol = cfg["solver"]
    _check_keys(sol, {"max_iters", "coarsen_threshold", "downsample"},
                "solver")
    _require(isinstance(sol["max_iters"], int) and sol["max_iters"] >= 0,
             "solver max_iters must be a nonnegative integer")
    thr = sol["coarsen_threshold"]
    _require(thr is None or (isinstance(thr, int) and thr > 0),
             "solver coarsen_threshold must be a positive integer")
    ds = sol["downsample"]
    if ds is not None:
        _require(isinstance(ds, (list, tuple)) and ds,
                 "solver downsample must be a nonempty list of levels")
        for level in ds:
            if isinstance(level, dict):
                for name, b in level.items():
                    _require(isinstance(b, int) and b >= 0,
                             "downsample bits for %s must be a "
                             "nonnegative integer" % name)
            else:
                _require(isinstance(level, int) and level >= 0,
                         "downsample level must be an integer or a "
                         "name->bits mapping")
        _require(cfg["objective"].get("kind") == "reach",
                 "solver downsample applies to reach objectives only")
        _require(thr is None,
                 "downsample and coarsen_threshold cannot be combined")
    _require(isinstance(cfg["seed"], int), "seed must be an integer")
    cap = cfg["cap"]
    _require(cap is None or (isinstance(cap, int) and cap > 0),
             "cap must be a positive integer node budget")
    if cfg["system"] == "custom":
        _require(cfg["dims"], "custom system needs a dims list")


def _dim_bits(cfg, name, default=None):
    bits = cfg["bits"]
    if isinstance(bits, dict):
        return bits.get(name, default if default is not None else 7)
    return bits


def build_system(cfg):
    """Encoding and dynamics components for the configured system.

    Custom systems carry no evaluators; their abstractions must come
    from saved interface files, so the component list is None.
    """
    if cfg["system"] == "dubins":
        dims = [
            Dimension.continuous("px", -2.0, 2.0, _dim_bits(cfg, "px")),
            Dimension.continuous("py", -2.0, 2.0, _dim_bits(cfg, "py")),
            Dimension.continuous("theta", -math.pi, math.pi,
                                 _dim_bits(cfg, "theta"), periodic=True),
        ]
        ctrl = [Dimension.discrete("v", (0.25, 0.5)),
                Dimension.discrete("omega", (-1.5, 0.0, 1.5))]
        enc = Encoding(dims, ctrl, cap=cfg["cap"])
        comps = dubins_components(length=cfg["length"], view=cfg["view"])
        return enc, comps
    if cfg["system"] == "toy1d":
        enc = Encoding([Dimension.continuous("x", 0.0, 1.0,
                                             _dim_bits(cfg, "x", 3))],
                       [Dimension.discrete("u", (0.0, 1.0))],
                       cap=cfg["cap"])
        hold = DynamicsComponent("hold", ("x",), (), "x",
                                 lambda box: box["x"])
        return enc, [hold]
    dims = []
    for spec in cfg["dims"]:
        _check_keys(spec, {"name", "lo", "hi", "bits", "periodic"}, "dim")
        try:
            dims.append(Dimension.continuous(
                spec["name"], float(spec["lo"]), float(spec["hi"]),
                int(spec["bits"]), bool(spec.get("periodic", False))))
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError("bad dim entry %r: %s" % (spec, e))
    ctrl = []
    for spec in cfg["controls"] or ():
        _check_keys(spec, {"name", "values"}, "control")
        try:
            ctrl.append(Dimension.discrete(spec["name"],
                                           tuple(spec["values"])))
        except (KeyError, TypeError) as e:
            raise ConfigError("bad control entry %r: %s" % (spec, e))
    try:
        return Encoding(dims, ctrl, cap=cfg["cap"]), None
    except CapacityError:
        raise
    except BddError as e:
        raise ConfigError(str(e))


def build_plan(cfg):
    plan = cfg["plan"]
    if plan["kind"] == "exhaustive":
        return Exhaustive(bits=plan.get("bits"))
    if plan["kind"] == "random_rects":
        count = plan.get("count", 1000)
        _require(isinstance(count, int) and count >= 0,
                 "plan count must be a nonnegative integer")
        return RandomRects(count, seed=plan.get("seed", cfg["seed"]))
    sizes = plan.get("sizes", [4, 5])
    _require(isinstance(sizes, (list, tuple)) and sizes,
             "plan sizes must be a nonempty list")
    return ShiftedGrids(tuple(sizes))


def build_goal(cfg, enc):
    """State predicate for the objective box (unnamed dims stay free)."""
    obj = cfg["objective"]
    m = enc.m
    goal = m.true
    for name, iv in sorted(obj.get("box", {}).items()):
        if name not in enc.dims or enc.dims[name].is_discrete \
                or name not in {d.name for d in enc.state_dims}:
            raise ConfigError("objective box names no state dim: %r" % name)
        _require(isinstance(iv, (list, tuple)) and len(iv) == 2,
                 "objective box for %s must be [lo, hi]" % name)
        try:
            cells = encode_set(m, enc.dims[name], (float(iv[0]), float(iv[1])),
                               enc.state_vars(name),
                               obj.get("encode", "inner"))
        except CapacityError:
            raise
        except BddError as e:
            raise ConfigError(str(e))
        goal = m.apply("and", goal, cells)
    return goal


def _out_dir(cfg):
    path = cfg["out"]
    os.makedirs(path, exist_ok=True)
    return path


def write_resolved_config(cfg, out):
    resolved = dict(cfg)
    resolved["version"] = __version__
    with open(os.path.join(out, "config.yaml"), "w") as fh:
        yaml.safe_dump(resolved, fh, sort_keys=True,
                       default_flow_style=False)


# -- subcommands ------------------------------------------------------------

def cmd_abstract(cfg):
    """Build one interface file per dynamics component."""
    enc, comps = build_system(cfg)
    if comps is None:
        raise ConfigError(
            "custom systems have no evaluator; supply interface files "
            "to `solve` instead")
    plan = build_plan(cfg)
    out = _out_dir(cfg)
    write_resolved_config(cfg, out)
    m = enc.m
    paths = []
    for c in comps:
        t0 = time.time()
        f = traverse(c, plan, enc)
        build_s = time.time() - t0
        if f.pred == m.false:
            print("warning: component %s abstracted to bottom "
                  "(no samples accepted)" % c.name, file=sys.stderr)
        meta = {
            "component": c.name,
            "output": c.output,
            "system": cfg["system"],
            "bits": cfg["bits"],
            "plan": cfg["plan"],
            "seed": cfg["seed"],
            "view": cfg["view"],
            "build_seconds": round(build_s, 6),
            "version": __version__,
        }
        path = os.path.join(out, "interface_%s.txt" % c.name)
        with open(path, "w") as fh:
            save_interface(f, fh, meta=meta)
        paths.append(path)
        print("wrote %s (%d nodes, %.2fs)"
              % (path, m.node_count(f.pred), build_s))
    return paths


def _load_components(enc, paths, cfg):
    m = enc.m
    comps = []
    known = set(m.var_names)
    for path in paths:
        try:
            with open(path) as fh:
                f, meta = load_interface(m, fh)
        except OSError as e:
            raise ConfigError("cannot read interface file: %s" % e)
        except CapacityError:
            raise
        except BddError as e:
            raise ConfigError("%s: %s" % (path, e))
        if not set(f.inputs) | set(f.outputs) <= known:
            raise ConfigError("%s uses variables outside this system's "
                              "encoding" % path)
        if meta.get("system") == cfg["system"] \
                and meta.get("bits") not in (None, cfg["bits"]):
            raise ConfigError(
                "%s was built at bits=%r but the config says bits=%r"
                % (path, meta.get("bits"), cfg["bits"]))
        comps.append(f)
    return comps


def _write_slices(enc, pred, out):
    """One PGM per heading bin: white = winning (px across, py up)."""
    m = enc.m
    state_names = [d.name for d in enc.state_dims]
    if state_names != ["px", "py", "theta"]:
        return 0
    nx = enc.dims["px"].cells
    ny = enc.dims["py"].cells
    nt = enc.dims["theta"].cells
    rasters = [bytearray(nx * ny) for _ in range(nt)]
    # state variables in manager order: px block, py block, theta block
    for start, length in m.sat_runs(pred, enc.all_state_vars):
        for idx in range(start, start + length):
            x, rem = divmod(idx, ny * nt)
            y, t = divmod(rem, nt)
            rasters[t][(ny - 1 - y) * nx + x] = 1
    for t, raster in enumerate(rasters):
        path = os.path.join(out, "slice_theta_%03d.pgm" % t)
        with open(path, "w") as fh:
            fh.write("P2\n# heading bin %d of %d\n%d %d\n255\n"
                     % (t, nt, nx, ny))
            for row in range(ny):
                line = raster[row * nx:(row + 1) * nx]
                fh.write(" ".join("255" if v else "0" for v in line))
                fh.write("\n")
    return nt


def cmd_solve(cfg, files=()):
    """Solve the configured game; write winning set, controller, trace."""
    enc, comps = build_system(cfg)
    m = enc.m
    if files:
        interfaces = _load_components(enc, files, cfg)
    elif comps is not None:
        plan = build_plan(cfg)
        interfaces = [traverse(c, plan, enc) for c in comps]
    else:
        raise ConfigError("custom systems need interface files to solve")
    goal = build_goal(cfg, enc)
    game = Game(enc, interfaces, cfg["objective"]["kind"], goal)
    out = _out_dir(cfg)
    write_resolved_config(cfg, out)
    sol = cfg["solver"]
    if sol["downsample"]:
        state_names = {d.name for d in enc.state_dims}
        for level in sol["downsample"]:
            if isinstance(level, dict) and set(level) - state_names:
                raise ConfigError("downsample names no state dim: %s"
                                  % sorted(set(level) - state_names))
        res = downsample_schedule(game, sol["downsample"],
                                  max_iters=sol["max_iters"])
    else:
        res = solve(game, max_iters=sol["max_iters"],
                    coarsen_threshold=sol["coarsen_threshold"])
    xs = enc.all_state_vars
    basin = m.sat_count(res.winning.pred, xs)
    goal_states = m.sat_count(goal, xs)
    with open(os.path.join(out, "trace.csv"), "w") as fh:
        res.trace.write_csv(fh)
    with open(os.path.join(out, "winning_cells.csv"), "w") as fh:
        dump_cell_runs(enc, res.winning.pred, fh)
    run_meta = {"objective": cfg["objective"]["kind"],
                "basin_states": basin, "goal_states": goal_states,
                "iterations": res.iterations,
                "stop": res.trace.stop_reason, "version": __version__}
    with open(os.path.join(out, "winning.txt"), "w") as fh:
        save_interface(res.winning, fh, meta=run_meta)
    with open(os.path.join(out, "controller.txt"), "w") as fh:
        save_interface(res.controller, fh, meta=run_meta)
    if cfg["images"]:
        _write_slices(enc, res.winning.pred, out)
    print("%s: basin %d states (goal %d), %d iterations, stop=%s"
          % (cfg["objective"]["kind"], basin, goal_states,
             res.iterations, res.trace.stop_reason))
    return res


# -- experiments ------------------------------------------------------------

def _solve_basin(enc, interfaces, goal, max_iters=1000000,
                 coarsen_threshold=None):
    game = Game(enc, interfaces, "reach", goal)
    t0 = time.time()
    res = solve(game, max_iters=max_iters,
                coarsen_threshold=coarsen_threshold)
    seconds = time.time() - t0
    m = enc.m
    return res, m.sat_count(res.winning.pred, enc.all_state_vars), seconds


def experiment_basin_vs_samples(cfg):
    """Basin growth with random sample count, against the exhaustive
    reference (the rising curve with its upper bound)."""
    exp = cfg["experiment"]
    _check_keys(exp, {"counts"}, "experiment")
    counts = exp.get("counts",
                     [500, 1000, 2000, 4000, 8000, 16000, 32000])
    enc, comps = build_system(cfg)
    if comps is None:
        raise ConfigError("basin_vs_samples needs a built-in system")
    goal = build_goal(cfg, enc)
    rows = []
    results = {}
    m = enc.m
    for count in counts:
        _require(isinstance(count, int) and count >= 0,
                 "experiment counts must be nonnegative integers")
        interfaces = [traverse(c, RandomRects(count, seed=cfg["seed"] + i),
                               enc)
                      for i, c in enumerate(comps)]
        res, basin, seconds = _solve_basin(
            enc, interfaces, goal, cfg["solver"]["max_iters"],
            cfg["solver"]["coarsen_threshold"])
        rows.append(("random", count, basin,
                     m.node_count(res.winning.pred), seconds))
        results[count] = res
    interfaces = [traverse(c, Exhaustive(), enc) for c in comps]
    res, basin, seconds = _solve_basin(
        enc, interfaces, goal, cfg["solver"]["max_iters"],
        cfg["solver"]["coarsen_threshold"])
    rows.append(("exhaustive", "", basin,
                 m.node_count(res.winning.pred), seconds))
    results["exhaustive"] = res
    return rows, results


_VARIANTS = (
    ("monolithic", (("px", "py", "theta"),)),
    ("fyt_fx", (("py", "theta"), ("px",))),
    ("fxt_fy", (("px", "theta"), ("py",))),
    ("fxy_ft", (("px", "py"), ("theta",))),
    ("decomposed", (("px",), ("py",), ("theta",))),
)


def experiment_decomp_vs_mono(cfg):
    """Solve the same game under every grouping of the components, from
    one monolithic relation to the fully decomposed set."""
    enc, comps = build_system(cfg)
    if comps is None or {c.name for c in comps} != {"px", "py", "theta"}:
        raise ConfigError("decomp_vs_mono needs the dubins system")
    goal = build_goal(cfg, enc)
    plan = build_plan(cfg)
    parts = {c.name: traverse(c, plan, enc) for c in comps}
    m = enc.m
    rows = []
    results = {}
    for variant, groups in _VARIANTS:
        t0 = time.time()
        interfaces = []
        for group in groups:
            f = parts[group[0]]
            for name in group[1:]:
                f = comp(f, parts[name])
            interfaces.append(f)
        compose_s = time.time() - t0
        res, basin, solve_s = _solve_basin(
            enc, interfaces, goal, cfg["solver"]["max_iters"],
            cfg["solver"]["coarsen_threshold"])
        rows.append((variant, basin, m.node_count(res.winning.pred),
                     solve_s, compose_s, res.iterations))
        results[variant] = res
    return rows, results


def experiment_greedy_cap(cfg):
    """Reach solves with and without the node-count cap; the capped
    basin must stay under the exact one."""
    exp = cfg["experiment"]
    _check_keys(exp, {"threshold"}, "experiment")
    threshold = exp.get("threshold",
                        cfg["solver"]["coarsen_threshold"] or 3000)
    _require(isinstance(threshold, int) and threshold > 0,
             "experiment threshold must be a positive integer")
    enc, comps = build_system(cfg)
    if comps is None:
        raise ConfigError("greedy_cap needs a built-in system")
    goal = build_goal(cfg, enc)
    plan = build_plan(cfg)
    interfaces = [traverse(c, plan, enc) for c in comps]
    rows = []
    results = {}
    for variant, thr in (("exact", None), ("capped", threshold)):
        res, basin, seconds = _solve_basin(
            enc, interfaces, goal, cfg["solver"]["max_iters"], thr)
        results[variant] = res
        for row in res.trace.rows:
            rows.append((variant, row.iteration, row.nodes, row.states,
                         row.seconds, row.coarsen_events))
    return rows, results, threshold


EXPERIMENTS = {
    "basin_vs_samples": (experiment_basin_vs_samples,
                         "plan,samples,basin,nodes,seconds"),
    "decomp_vs_mono": (experiment_decomp_vs_mono,
                       "variant,basin,nodes,seconds,compose_seconds,"
                       "iterations"),
    "greedy_cap": (experiment_greedy_cap,
                   "variant,iter,nodes,states,seconds,coarsen_events"),
}


def _fmt_cell(v):
    if isinstance(v, float):
        return "%.6f" % v
    return str(v)


def cmd_experiment(name, cfg):
    if name not in EXPERIMENTS:
        raise ConfigError("unknown experiment %r (have: %s)"
                          % (name, ", ".join(sorted(EXPERIMENTS))))
    fn, header = EXPERIMENTS[name]
    out = _out_dir(cfg)
    write_resolved_config(cfg, out)
    outcome = fn(cfg)
    rows = outcome[0]
    path = os.path.join(out, "%s.csv" % name)
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt_cell(v) for v in row) + "\n")
    print("wrote %s (%d rows)" % (path, len(rows)))
    return outcome


# -- entry point ------------------------------------------------------------

def _parser():
    p = argparse.ArgumentParser(
        prog="relsynth",
        description="Symbolic controller synthesis from sampled "
                    "finite abstractions.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        help="YAML run configuration")
    common.add_argument("--out", metavar="DIR",
                        help="output directory (default from config)")
    common.add_argument("--seed", type=int, metavar="N")

    pa = sub.add_parser("abstract", parents=[common],
                        help="sample dynamics into interface files")
    ps = sub.add_parser("solve", parents=[common],
                        help="solve the configured game")
    ps.add_argument("files", nargs="*", metavar="INTERFACE",
                    help="abstraction files (default: build per config)")
    ps.add_argument("--max-iters", type=int, metavar="N")
    ps.add_argument("--coarsen-threshold", type=int, metavar="N")
    pe = sub.add_parser("experiment", parents=[common],
                        help="run a named experiment")
    pe.add_argument("name", choices=sorted(EXPERIMENTS))
    pe.add_argument("--max-iters", type=int, metavar="N")
    pe.add_argument("--coarsen-threshold", type=int, metavar="N")
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    overrides = {"out": args.out, "seed": args.seed,
                 "max_iters": getattr(args, "max_iters", None),
                 "coarsen_threshold": getattr(args, "coarsen_threshold",
                                              None)}
    try:
        cfg = load_config(args.config, overrides)
        if args.command == "abstract":
            cmd_abstract(cfg)
        elif args.command == "solve":
            cmd_solve(cfg, tuple(args.files))
        else:
            cmd_experiment(args.name, cfg)
    except ConfigError as e:
        print("config error: %s" % e, file=sys.stderr)
        return 2
    except (CapacityError, MemoryError, RecursionError) as e:
        print("resource limit: %s" % e, file=sys.stderr)
        return 3
    except BddError as e:
        print("error: %s" % e, file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
