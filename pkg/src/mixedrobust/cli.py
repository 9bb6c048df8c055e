"""Command line front end: ``analyze``, ``region`` and ``repro``.

Exit codes: 0 success, 1 internal error, 2 configuration error, 3 method
not applicable, 4 a reproduction check failed.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import math
import os
import sys
import time
from importlib import resources
from typing import Optional

import jsonschema
import numpy as np

from . import __version__
from .errors import ConfigError, DivisionByZero, MethodError, MethodInapplicable
from .expr import Expression, parse
from .mixed import (AutoStrategy, Problem, ProblemSpec, Scenario, TwoStep,
                    bounds_q_of_delta, scenario_estimate, solve_delta_of_q, solve_discrete,
                    stability_set, two_step)
from .param import (AxisEllipsoid, Box, DiscretePMF, DiscreteSet, DistributionSpec, Laplace,
                    Normal, ParamBox, Uniform)
from .poly import StabilityKind
from .region import IntervalUnion, measure, region_csv
from .robust import Auto, CoefficientMap, GridFallback, Kharitonov, ZeroExclusion

DEFAULT_SEED = 0
SEED_ENV = "MIXEDROBUST_SEED"
REPRO_IDS = ("5.1", "5.2", "5.3.1", "5.3.2", "5.3.3", "5.3.4")

EXIT_OK, EXIT_INTERNAL, EXIT_CONFIG, EXIT_METHOD, EXIT_REPRO = 0, 1, 2, 3, 4


def _data(name: str) -> str:
    return resources.files("mixedrobust").joinpath("data", name).read_text(encoding="utf-8")


def _schema(name: str) -> dict:
    return json.loads(_data(name))


# -- config ------------------------------------------------------------------

def validate_config(config: dict) -> None:
    try:
        jsonschema.validate(config, _schema("config.schema.json"))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {exc.message}") from None


def validate_report(report: dict) -> None:
    jsonschema.validate(report, _schema("report.schema.json"))


def load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            config = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from None
    validate_config(config)
    return config


def config_digest(config: dict) -> str:
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def _param(value, n: int):
    return parse(value, n, 0) if isinstance(value, str) else float(value)


def _marginal(entry: dict, n: int):
    kind = entry["type"]
    if kind == "uniform":
        return Uniform(_param(entry["lo"], n), _param(entry["hi"], n))
    if kind == "normal":
        return Normal(_param(entry["mean"], n), _param(entry["std"], n))
    if kind == "laplace":
        return Laplace(_param(entry["location"], n), _param(entry["scale"], n))
    return DiscretePMF(tuple(entry["values"]), tuple(entry["probs"]))


def _q_set(entry: dict, n: int, m: int):
    kind = entry["type"]
    if kind == "box":
        Q = Box(entry["lo"], entry["hi"])
    elif kind == "ellipsoid":
        Q = AxisEllipsoid(entry["weights"], entry["center"], entry["bound"])
    elif kind == "discrete":
        Q = DiscreteSet(entry["points"])
    else:
        Q = ParamBox(tuple(parse(t, 0, m) for t in entry["lo"]),
                     tuple(parse(t, 0, m) for t in entry["hi"]))
    if Q.n != n:
        raise ConfigError(f"q_set has dimension {Q.n}, dims.n is {n}")
    return Q


def build_spec(config: dict) -> ProblemSpec:
    n, m = config["dims"]["n"], config["dims"]["m"]
    kind = StabilityKind(config["stability"])
    cmap = CoefficientMap.from_strings(config["polynomial"], n, m, kind)
    if len(config["delta_dist"]) != m:
        raise ConfigError(f"delta_dist lists {len(config['delta_dist'])} laws, dims.m is {m}")
    dist = DistributionSpec(tuple(_marginal(e, n) for e in config["delta_dist"]))
    for mg in dist.marginals:
        if not any(isinstance(v, Expression) for v in mg.params()):
            mg.resolve(None)  # reject bad constant parameters early
    return ProblemSpec(cmap, _q_set(config["q_set"], n, m), dist, Problem(config["problem"]))


def _robust_method(opts: dict):
    name = opts.get("robust", "auto")
    grid = opts.get("grid_resolution", 21)
    if name == "kharitonov":
        return Kharitonov()
    if name == "zero_exclusion":
        return ZeroExclusion(opts.get("omega_max"), opts.get("omega_points", 1024))
    if name == "grid":
        return GridFallback(grid)
    return Auto(grid)


def _two_step_opts(opts: dict) -> TwoStep:
    search = opts.get("search")
    return TwoStep(resolution=opts.get("resolution", 400),
                   refine_depth=opts.get("refine_depth", 2),
                   h=opts.get("h"), tol=opts.get("tol", 1e-6),
                   search=tuple(search) if search is not None else None,
                   truncation=opts.get("truncation", 1e-12),
                   method=_robust_method(opts))


def _scenario_opts(opts: dict, seed: int) -> Scenario:
    return Scenario(epsilon=opts.get("epsilon", 0.01), theta=opts.get("theta", 1e-7),
                    seed=seed, samples=opts.get("samples"),
                    indicator=opts.get("indicator", "exact"), method=_robust_method(opts))


def resolve_seed(flag: Optional[int], opts: dict) -> int:
    if flag is not None:
        return int(flag)
    if "seed" in opts:
        return int(opts["seed"])
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip():
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return DEFAULT_SEED


# -- running -----------------------------------------------------------------

def _clean(x):
    """Plain Python numbers for JSON output."""
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    return x


def run_config(config: dict, seed_flag: Optional[int] = None, want_region: bool = False):
    """Solve a validated config; returns (report dict, region or None)."""
    spec = build_spec(config)
    opts = config.get("method", {})
    seed = resolve_seed(seed_flag, opts)
    strategy = opts.get("strategy", "auto")
    region = None
    extra: dict = {}

    if strategy == "discrete":
        est = solve_discrete(spec, _robust_method(opts))
    elif spec.problem is Problem.DELTA_OF_Q:
        if strategy == "scenario":
            raise MethodInapplicable("delta_of_q is solved on a q grid, not by sampling")
        est = solve_delta_of_q(spec, opts.get("q_grid", 21), opts.get("refine", 2),
                               _two_step_opts(opts))
    else:
        use_scenario = strategy == "scenario" or (strategy == "auto" and spec.map.m > 2)
        if use_scenario:
            est = scenario_estimate(spec, _scenario_opts(opts, seed))
        else:
            est, region = two_step(spec, _two_step_opts(opts))
        if opts.get("bounds") and spec.problem is Problem.Q_OF_DELTA:
            lower, upper = bounds_q_of_delta(spec, AutoStrategy(_two_step_opts(opts),
                                                                _scenario_opts(opts, seed)))
            extra["bounds"] = {"lower": lower.value, "upper": upper.value}
    if want_region and region is None:
        if spec.problem is Problem.DELTA_OF_Q:
            raise MethodInapplicable("region export needs a q_delta or q_of_delta problem")
        region = stability_set(spec, _two_step_opts(opts))

    report = {
        "probability": est.value,
        "method": est.method,
        "guarantee": est.guarantee,
        "problem": spec.problem.value,
        "exact": est.exact,
        "config_digest": config_digest(config),
        "seed": seed,
        "notes": list(est.notes) + list(config.get("notes", [])),
        "meta": {"tool_version": __version__},
    }
    if est.bracket is not None:
        report["bracket"] = list(est.bracket)
    if est.samples is not None:
        report.update(epsilon=est.epsilon, theta=est.theta, samples=est.samples,
                      successes=est.successes)
    if est.worst_q is not None:
        report["worst_q"] = list(est.worst_q)
        report["probes"] = [{"q": list(q), "p": p} for q, p in est.probes]
    if isinstance(region, IntervalUnion):
        report["intervals"] = [list(iv) for iv in region]
    report.update(extra)
    return _clean(report), region


def dump_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


# -- svg -----------------------------------------------------------------------

def write_svg(region, spec: ProblemSpec, path: str, nominal=None) -> None:
    """800 x 600 picture of the stable set over the support of d."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from matplotlib.patches import PathPatch, Rectangle
    from matplotlib.path import Path

    plt.rcParams["svg.hashsalt"] = "mixedrobust"
    fig, ax = plt.subplots(figsize=(800 / 72, 600 / 72), dpi=72)
    slo, shi = spec.delta_dist.search_box()
    if isinstance(region, IntervalUnion):
        lo, hi = region.search if region.search else (slo[0], shi[0])
        xs = np.linspace(lo, hi, 801)
        dist = spec.delta_dist.resolve(None) if not spec.delta_dist.depends_on_q else None
        if dist is not None:
            ax.plot(xs, dist.marginals[0].cdf(xs), color="black", lw=1, label="CDF of d")
        for k, (a, b) in enumerate(region):
            ax.axvspan(a, b, color="0.75", label="stable set" if k == 0 else None)
        ax.set_xlim(lo, hi)
        ax.set_ylim(0, 1.05)
        ax.set_xlabel(r"$\delta$")
    else:
        (x0, x1), (y0, y1) = region.bounds
        verts, codes = [], []
        for poly in region.polygons:
            verts.extend(poly.tolist() + [poly[0].tolist()])
            codes.extend([Path.MOVETO] + [Path.LINETO] * (len(poly) - 1) + [Path.CLOSEPOLY])
        if verts:
            ax.add_patch(PathPatch(Path(verts, codes), facecolor="0.8", edgecolor="black",
                                   lw=1.2, label="stable set"))
        if nominal is not None:
            for k, poly in enumerate(nominal.polygons):
                closed = np.vstack([poly, poly[:1]])
                ax.plot(closed[:, 0], closed[:, 1], "k--", lw=1,
                        label="nominal boundary" if k == 0 else None)
        if np.all(np.isfinite(slo)) and np.all(np.isfinite(shi)):
            ax.add_patch(Rectangle((slo[0], slo[1]), shi[0] - slo[0], shi[1] - slo[1],
                                   fill=False, edgecolor="tab:blue", lw=1.5, label="support of d"))
        pad_x, pad_y = 0.05 * (x1 - x0), 0.05 * (y1 - y0)
        ax.set_xlim(x0 - pad_x, x1 + pad_x)
        ax.set_ylim(y0 - pad_y, y1 + pad_y)
        ax.set_xlabel(r"$\delta_1$")
        ax.set_ylabel(r"$\delta_2$")
    ax.legend(loc="best")
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    # 1 pt == 1 user unit here; state the size as plain 800 x 600
    text = buf.getvalue().replace('width="800pt" height="600pt"', 'width="800" height="600"', 1)
    _write(path, text)


# -- commands ------------------------------------------------------------------

def cmd_analyze(args) -> int:
    config = load_config(args.config)
    want_region = bool(args.region_csv or args.svg)
    report, region = run_config(config, args.seed, want_region)
    if args.region_csv:
        _write(args.region_csv, region_csv(region))
        report["region_file"] = args.region_csv
    if args.svg:
        write_svg(region, build_spec(config), args.svg)
    validate_report(report)
    _write(args.out, dump_report(report))
    return EXIT_OK


def cmd_region(args) -> int:
    config = load_config(args.config)
    spec = build_spec(config)
    if spec.problem is Problem.DELTA_OF_Q:
        raise MethodInapplicable("region export needs a q_delta or q_of_delta problem")
    opts = _two_step_opts(config.get("method", {}))
    region = stability_set(spec, opts)
    _write(args.out, region_csv(region))
    if args.svg:
        nominal = None
        if args.nominal and spec.map.m == 2 and not isinstance(spec.q_set, ParamBox):
            center = _nominal_point(spec.q_set)
            nominal = stability_set(
                ProblemSpec(spec.map, DiscreteSet(center[None, :]), spec.delta_dist,
                            Problem.Q_DELTA), opts)
        write_svg(region, spec, args.svg, nominal)
    est = measure(region, spec.delta_dist)
    print(f"probability {est.value!r} ({est.method}, {est.guarantee})", file=sys.stderr)
    return EXIT_OK


def _nominal_point(Q) -> np.ndarray:
    if isinstance(Q, (Box, AxisEllipsoid)):
        return np.asarray(Q.center, float)
    return np.asarray(Q.points[0], float)


def _check(target: dict, report: dict, elapsed: float) -> list[str]:
    """Failure messages for one reproduction target (empty when it passes)."""
    fails = []
    p = report["probability"]
    want = target["probability"]
    if not abs(p - want["value"]) <= want["tol"]:
        fails.append(f"probability {p:.6g} vs {want['value']} (tol {want['tol']:g})")
    if "intervals" in target:
        got = report.get("intervals", [])
        iv = target["intervals"]
        ok = len(got) == len(iv["value"]) and all(
            abs(a - wa) <= iv["tol"] and abs(b - wb) <= iv["tol"]
            for (a, b), (wa, wb) in zip(got, iv["value"]))
        if not ok:
            shown = ", ".join(f"[{a:.6g}, {b:.6g}]" for a, b in got) or "empty"
            fails.append(f"stable set {shown} vs {iv['value']} (tol {iv['tol']:g})")
    if "worst_q" in target:
        wq = target["worst_q"]
        got = report.get("worst_q", [math.nan])
        if not all(abs(a - b) <= wq["tol"] for a, b in zip(got, wq["value"])):
            fails.append(f"worst q {got} vs {wq['value']} (tol {wq['tol']:g})")
    if "max_bracket_width" in target:
        lo, hi = report.get("bracket", [0.0, 1.0])
        if not hi - lo < target["max_bracket_width"]:
            fails.append(f"bracket width {hi - lo:.3g} >= {target['max_bracket_width']:g}")
    if "max_seconds" in target and elapsed >= target["max_seconds"]:
        fails.append(f"took {elapsed:.1f} s >= {target['max_seconds']} s")
    return fails


def repro_config(example_id: str) -> dict:
    config = json.loads(_data(f"repro/{example_id}.json"))
    validate_config(config)
    return config


def run_repro(example_id: str):
    """(passed, report, failure messages, seconds) for one built-in example."""
    targets = json.loads(_data("repro/targets.json"))
    config = repro_config(example_id)
    t0 = time.perf_counter()
    report, _ = run_config(config)
    elapsed = time.perf_counter() - t0
    fails = _check(targets[example_id], report, elapsed)
    return not fails, report, fails, elapsed


def cmd_repro(args) -> int:
    ids = list(REPRO_IDS) if args.all else list(args.ids)
    if not ids:
        raise ConfigError("name at least one example id or pass --all")
    unknown = [i for i in ids if i not in REPRO_IDS]
    if unknown:
        raise ConfigError(f"unknown example id(s) {', '.join(unknown)}; "
                          f"known: {', '.join(REPRO_IDS)}")
    all_ok = True
    for example_id in ids:
        ok, report, fails, elapsed = run_repro(example_id)
        all_ok &= ok
        status = "PASS" if ok else "FAIL"
        detail = f"p={report['probability']:.6g} in {elapsed:.2f} s"
        if fails:
            detail += "; " + "; ".join(fails)
        print(f"{status} {example_id}: {detail}")
    return EXIT_OK if all_ok else EXIT_REPRO


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mixedrobust",
                                     description="Mixed robust/probabilistic stability analysis.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="solve a problem config and write a JSON report")
    p.add_argument("config")
    p.add_argument("--out", help="report path (default: stdout)")
    p.add_argument("--region-csv", help="also write the stable set as CSV")
    p.add_argument("--svg", help="also draw the stable set")
    p.add_argument("--seed", type=int, help=f"sampling seed (default: config, ${SEED_ENV}, 0)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("region", help="export the stable set of the random parameter")
    p.add_argument("config")
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.add_argument("--svg", help="draw the region as an 800x600 SVG")
    p.add_argument("--nominal", action="store_true",
                   help="overlay the stable set of the nominal system (dashed)")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("repro", help="rerun the built-in worked examples")
    p.add_argument("ids", nargs="*", metavar="ID", help=f"one of {', '.join(REPRO_IDS)}")
    p.add_argument("--all", action="store_true", help="run every example")
    p.set_defaults(func=cmd_repro)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DivisionByZero) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MethodError as exc:
        print(f"method error: {exc}", file=sys.stderr)
        return EXIT_METHOD
    except Exception as exc:  # noqa: BLE001 - last-resort exit code
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
