"""Command line front end.

Subcommands mirror the pipeline: sample draws a snowball sample from a
population file, resample turns an observed sample into inclusion
frequencies, estimate runs the estimators, simulate runs the Monte Carlo
harness, spatial converts a count grid into population files. simulate also
accepts a flat key=value config file; flags override file values.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import design as dz
from . import estimators as ez
from . import graph as gz
from . import harness as hz
from . import resampler as rz
from . import spatial as sz


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "on", "1"):
        return True
    if t in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected true/false, got {text!r}")


def _threads(text: str) -> int:
    if text.strip().lower() == "auto":
        return os.cpu_count() or 1
    return int(text)


def _variables(text: str):
    return tuple(ez.parse_variable(v) for v in text.split(",") if v.strip())


def _estimators(text: str):
    tags = []
    for t in text.split(","):
        t = t.strip()
        if not t:
            continue
        try:
            tags.append(ez.EstimatorTag(t))
        except ValueError:
            raise ValueError(f"unknown estimator {t!r}") from None
    return tuple(tags)


def _bernoulli(text: str):
    cols = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        name, _, p = part.partition(":")
        if not _:
            raise ValueError(f"expected name:p, got {part!r}")
        cols.append((name.strip(), float(p)))
    return tuple(cols)


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed))


def _design_from(ns) -> dz.DesignConfig:
    return dz.DesignConfig(
        kind=dz.DesignKind(ns.design),
        seed_count=ns.seeds,
        q=ns.q,
        target_size=ns.n,
        max_waves=ns.max_waves,
        reseed_on_exhaustion=ns.reseed,
    )


def _resample_from(ns, inner=None) -> rz.ResampleConfig:
    return rz.ResampleConfig(
        mode=rz.ResampleMode(ns.mode),
        T=ns.T,
        resample_size=ns.resample_size,
        burn_in=ns.burn_in,
        reseed_rate=ns.reseed_rate,
        frequency_floor=ns.freq_floor,
        inner_design=inner,
    )


# ---------------------------------------------------------------------------
# subcommands


def cmd_sample(ns) -> int:
    net = gz.load_edge_list(ns.edges, directed=ns.directed)
    attrs = None
    if ns.attrs:
        attrs = gz.load_attributes(ns.attrs, net, gz.MissingPolicy(ns.missing))
    cfg = _design_from(ns)
    rec = dz.draw_sample(net, cfg, _rng(ns.seed))
    obs = dz.observe(net, attrs, rec)
    os.makedirs(ns.out_dir, exist_ok=True)
    dz.write_events_csv(rec, net, os.path.join(ns.out_dir, "events.csv"))
    paths = dz.write_observed(obs, ns.out_dir)
    waves = max((ev.wave for ev in rec.events), default=0)
    print(f"sampled {rec.unit_count} units in {len(rec.events)} events "
          f"(max wave {waves}, {len(rec.reseed_points)} reseeds"
          f"{', short' if rec.short else ''})")
    for name in ("edges", "attrs", "degrees"):
        print(f"  {paths[name]}")
    print(f"  {os.path.join(ns.out_dir, 'events.csv')}")
    return 0


def _read_observed(ns) -> dz.ObservedData:
    missing = gz.MissingPolicy(ns.missing) if ns.attrs else None
    return dz.read_observed(ns.edges, ns.degrees, ns.attrs or None, missing)


def cmd_resample(ns) -> int:
    obs = _read_observed(ns)
    inner = None
    if rz.ResampleMode(ns.mode) is rz.ResampleMode.REPEATED:
        field = dz.DesignConfig(kind=dz.DesignKind(ns.design), seed_count=1,
                                q=ns.q, target_size=ns.resample_size)
        inner = rz.default_inner_design(field, ns.resample_size)
    cfg = _resample_from(ns, inner)
    table = rz.estimate_frequencies(obs, cfg, _rng(ns.seed))
    rz.write_frequencies_csv(table, ns.out)
    print(f"wrote {ns.out}: {len(table.labels)} units, T={table.T_used}, "
          f"{int(table.floored.sum())} floored")
    return 0


def cmd_estimate(ns) -> int:
    obs = _read_observed(ns)
    variables = ns.variables
    estimators = ns.estimators
    freqs = None
    if ns.freqs:
        labels, f, floored = rz.read_frequencies_csv(ns.freqs)
        by_label = dict(zip(labels, f))
        missing = [lab for lab in obs.labels if lab not in by_label]
        if missing:
            raise ez.EstimatorError(
                f"{ns.freqs}: no frequency for unit {missing[0]!r}")
        aligned = np.asarray([by_label[lab] for lab in obs.labels])
        freqs = rz.FrequencyTable(labels=obs.labels, f=aligned, raw=aligned,
                                  floored=np.zeros(len(aligned), dtype=bool),
                                  T_used=0, mode=None)
    elif any(t is ez.EstimatorTag.NEW for t in estimators):
        if ns.resample_size is None:
            raise ez.EstimatorError(
                "NEW estimator needs --freqs or --resample-size to resample here")
        inner = None
        if rz.ResampleMode(ns.mode) is rz.ResampleMode.REPEATED:
            field = dz.DesignConfig(kind=dz.DesignKind(ns.design), seed_count=1,
                                    q=ns.q, target_size=ns.resample_size)
            inner = rz.default_inner_design(field, ns.resample_size)
        freqs = rz.estimate_frequencies(obs, _resample_from(ns, inner), _rng(ns.seed))

    results = []
    for var in variables:
        y = ez.extract_variable(obs, var)
        for tag in estimators:
            results.append(ez.evaluate(tag, y, obs, freqs, ns.alpha,
                                       variable=var.key))
    ez.write_estimates_csv(results, ns.out)
    for r in results:
        print(f"{r.estimator:>5s}  {r.variable:<16s} {r.estimate: .6f} "
              f"(se {r.se:.6f}, {int((1 - r.alpha) * 100)}% CI "
              f"[{r.ci_low:.6f}, {r.ci_high:.6f}])")
    print(f"wrote {ns.out}")
    return 0


def cmd_spatial(ns) -> int:
    grid = sz.load_grid(ns.grid)
    rule = sz.SpatialRule(threshold=ns.threshold,
                          adjacency=sz.Adjacency(ns.adjacency))
    net, attrs = sz.grid_to_network(grid, rule)
    os.makedirs(ns.out_dir, exist_ok=True)
    edges_path = os.path.join(ns.out_dir, "edges.txt")
    attrs_path = os.path.join(ns.out_dir, "attrs.csv")
    with open(edges_path, "w", encoding="utf-8") as fh:
        fh.write(net.to_edge_list_text())
    gz.write_attributes_csv(attrs, net.labels, attrs_path)
    print(f"grid {grid.rows}x{grid.cols} -> {net.node_count} nodes, "
          f"{net.link_count} ordered pairs")
    print(f"  {edges_path}\n  {attrs_path}")
    return 0


def cmd_simulate(ns) -> int:
    merged = _merge_config(ns)
    cfg = _sim_config(merged)
    report = hz.run(cfg)
    os.makedirs(merged["out-dir"], exist_ok=True)
    paths = hz.write_all(report, merged["out-dir"])
    _print_summary(report)
    for p in paths.values():
        print(f"  {p}")
    return 0


def _print_summary(report: hz.SimulationReport):
    print(f"{report.n_reps} replicates, master seed {report.master_seed}, "
          f"alpha {report.alpha}")
    head = (f"{'variable':<18s} {'estimator':<9s} {'truth':>9s} {'mean':>9s} "
            f"{'bias':>9s} {'mse':>11s} {'re_vs_new':>9s} {'coverage':>8s}")
    print(head)
    for row in report.rows:
        re = f"{row.re_vs_new:9.2f}" if row.re_vs_new is not None else "        -"
        print(f"{row.variable:<18s} {row.estimator:<9s} {row.truth:9.4f} "
              f"{row.mean_estimate:9.4f} {row.bias:9.4f} {row.mse:11.6f} "
              f"{re} {row.coverage:8.3f}")
    for ekey, a in report.parabola_a.items():
        print(f"parabola a[{ekey}] = {a:.8f}")


# ---------------------------------------------------------------------------
# simulate config handling

# key -> (parser, default); config file keys and flag names coincide.
SIM_OPTIONS = {
    "pop-edges": (str, None),
    "pop-attrs": (str, None),
    "pop-directed": (_bool, False),
    "pop-missing": (str, "zero"),
    "synth-nodes": (int, None),
    "synth-model": (str, "config"),
    "synth-mean-degree": (float, 8.0),
    "synth-exponent": (float, 2.5),
    "synth-max-degree": (int, None),
    "synth-bernoulli": (_bernoulli, ()),
    "synth-degree-column": (str, None),
    "design": (str, "regular"),
    "seeds": (int, 10),
    "q": (float, 0.5),
    "n": (int, 200),
    "max-waves": (int, None),
    "reseed": (_bool, True),
    "mode": (str, "process"),
    "T": (int, 5000),
    "resample-size": (int, 70),
    "burn-in": (int, None),
    "reseed-rate": (float, 0.05),
    "freq-floor": (float, None),
    "variables": (_variables, None),
    "estimators": (_estimators, (ez.EstimatorTag.NEW, ez.EstimatorTag.YBAR,
                                 ez.EstimatorTag.VH)),
    "reps": (int, 200),
    "alpha": (float, 0.05),
    "seed": (int, 0),
    "threads": (_threads, 1),
    "out-dir": (str, "."),
}


def _merge_config(ns) -> dict:
    from_file: dict = {}
    if ns.config:
        with open(ns.config, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                text = line.strip()
                if not text or text.startswith("#"):
                    continue
                key, sep, value = text.partition("=")
                key, value = key.strip(), value.strip()
                if not sep or not key:
                    raise ValueError(f"{ns.config}:{lineno}: expected key=value")
                if key not in SIM_OPTIONS:
                    raise ValueError(f"{ns.config}:{lineno}: unknown key {key!r}")
                parse, _ = SIM_OPTIONS[key]
                try:
                    from_file[key] = parse(value)
                except ValueError as exc:
                    raise ValueError(f"{ns.config}:{lineno}: {exc}") from None

    merged = {}
    for key, (_, default) in SIM_OPTIONS.items():
        flag_val = getattr(ns, key.replace("-", "_"))
        if flag_val is not None:
            merged[key] = flag_val
        elif key in from_file:
            merged[key] = from_file[key]
        else:
            merged[key] = default
    return merged


def _sim_config(m: dict) -> hz.SimConfig:
    if m["pop-edges"]:
        population = hz.PopulationPaths(
            edges=m["pop-edges"], attrs=m["pop-attrs"],
            directed=m["pop-directed"],
            missing=gz.MissingPolicy(m["pop-missing"]))
    elif m["synth-nodes"]:
        population = hz.GeneratorSpec(
            n_nodes=m["synth-nodes"], model=m["synth-model"],
            mean_degree=m["synth-mean-degree"],
            power_exponent=m["synth-exponent"],
            max_degree=m["synth-max-degree"],
            bernoulli=m["synth-bernoulli"],
            degree_column=m["synth-degree-column"])
    else:
        raise ValueError("no population: set pop-edges or synth-nodes")
    if not m["variables"]:
        raise ValueError("no variables configured")
    design = dz.DesignConfig(
        kind=dz.DesignKind(m["design"]), seed_count=m["seeds"], q=m["q"],
        target_size=m["n"], max_waves=m["max-waves"], reseed_on_exhaustion=m["reseed"])
    resample = rz.ResampleConfig(
        mode=rz.ResampleMode(m["mode"]), T=m["T"],
        resample_size=m["resample-size"], burn_in=m["burn-in"],
        reseed_rate=m["reseed-rate"], frequency_floor=m["freq-floor"])
    return hz.SimConfig(
        population=population, design=design, resample=resample,
        variables=m["variables"], estimators=m["estimators"],
        n_reps=m["reps"], alpha=m["alpha"], master_seed=m["seed"],
        workers=m["threads"])


# ---------------------------------------------------------------------------
# parser


def _add_observed_flags(p):
    p.add_argument("--edges", required=True, help="sample edge list")
    p.add_argument("--degrees", required=True, help="sample degree CSV")
    p.add_argument("--attrs", default=None, help="sample attribute CSV")
    p.add_argument("--missing", choices=("zero", "error"), default="zero")


def _add_resample_flags(p, required_size=True):
    p.add_argument("--mode", choices=("process", "repeated"), default="process")
    p.add_argument("--T", type=int, default=10000)
    p.add_argument("--resample-size", type=int, required=required_size,
                   default=None)
    p.add_argument("--burn-in", type=int, default=None)
    p.add_argument("--reseed-rate", type=float, default=0.05)
    p.add_argument("--freq-floor", type=float, default=None)
    p.add_argument("--design", choices=("regular", "re_recruit"),
                   default="regular", help="field design mirrored by REPEATED mode")
    p.add_argument("--q", type=float, default=0.5)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="linktrace",
        description="Snowball sampling designs, resampled inclusion "
                    "frequencies, and unequal-probability estimation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw one snowball sample")
    p.add_argument("--edges", required=True, help="population edge list")
    p.add_argument("--attrs", default=None, help="population attribute CSV")
    p.add_argument("--missing", choices=("zero", "error"), default="zero")
    p.add_argument("--directed", type=_bool, default=False)
    p.add_argument("--design", choices=("regular", "re_recruit"), default="regular")
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--q", type=float, default=0.5)
    p.add_argument("--n", type=int, required=True, help="target sample size")
    p.add_argument("--max-waves", type=int, default=None)
    p.add_argument("--reseed", type=_bool, default=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("resample", help="estimate inclusion frequencies")
    _add_observed_flags(p)
    _add_resample_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="freqs.csv")
    p.set_defaults(func=cmd_resample)

    p = sub.add_parser("estimate", help="run estimators on an observed sample")
    _add_observed_flags(p)
    p.add_argument("--freqs", default=None, help="frequency CSV from resample")
    _add_resample_flags(p, required_size=False)
    p.add_argument("--variables", type=_variables, required=True,
                   help="comma list: attr:NAME, degree, concurrency[:K]")
    p.add_argument("--estimators", type=_estimators, default=(
        ez.EstimatorTag.NEW, ez.EstimatorTag.YBAR, ez.EstimatorTag.VH))
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="estimates.csv")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("simulate", help="run the Monte Carlo harness")
    p.add_argument("--config", default=None, help="flat key=value file")
    for key, (parse, _) in SIM_OPTIONS.items():
        p.add_argument(f"--{key}", type=parse, default=None, dest=key.replace("-", "_"))
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("spatial", help="convert a count grid to network files")
    p.add_argument("--grid", required=True)
    p.add_argument("--threshold", type=float, default=1.0)
    p.add_argument("--adjacency", choices=("rook", "queen"), default="rook")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_spatial)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        return ns.func(ns)
    except (ValueError, OSError, hz.HarnessError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
