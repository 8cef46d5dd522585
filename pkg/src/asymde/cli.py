"""Command-line front end.

Every subcommand reads a strict JSON run-config (unknown keys rejected),
writes its tables to an output directory together with a manifest that
embeds the config, its hash, library versions, the seed, and wall time,
so any output directory can be reproduced from the manifest alone.
Exit status is 0 only when every requested point completed unflagged.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

import numpy as np
import scipy

from . import __version__, analysis, de_bp_mc, de_gallager_b, de_minsum, optimize, sim
from .channels import snr_db_to_sigma2
from .codes import DegreeDistribution, TannerGraph, build_encoder, girth, peg_construct
from .deviations import AdditiveDeviation, BitFlipModel, build_pi_sign_magnitude


class ConfigError(ValueError):
    pass


_SECTION_KEYS = {
    "code": {"type", "dv", "dc", "lambda", "rho", "path", "n", "seed"},
    "channel": {"type", "p", "snr_db", "sigma2"},
    "decoder": {
        "family", "L", "b0", "b1", "optimize", "q", "step",
        "gamma0", "gamma1", "lambda_plus", "lambda_minus", "n_pop",
    },
    "deviation": {"type", "eps01", "eps10", "mean", "var", "dof", "scale", "shift"},
    "task": {
        "name", "epsilon", "lo", "hi", "resolution", "all_zero", "dump_densities",
        "n", "points", "quantity", "curve_points", "p0", "mode", "snr_eval",
        "gammas", "lambdas", "symmetric", "max_frames", "target_frame_errors",
        "q", "eps01", "eps10",
    },
}
_TASKS = {
    "threshold", "de-run", "fl-ber", "optimize-gb", "optimize-ms",
    "simulate", "peg", "inspect-pi",
}


def _check_keys(section: str, doc: dict) -> None:
    unknown = set(doc) - _SECTION_KEYS[section]
    if unknown:
        raise ConfigError(f"unknown keys in '{section}': {sorted(unknown)}")


def load_config(path: str, expected_task: str) -> dict:
    with open(path) as fh:
        doc = json.load(fh)
    unknown = set(doc) - set(_SECTION_KEYS)
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    for section, content in doc.items():
        if not isinstance(content, dict):
            raise ConfigError(f"section '{section}' must be an object")
        _check_keys(section, content)
    task = doc.get("task", {})
    name = task.get("name")
    if name not in _TASKS:
        raise ConfigError(f"task name {name!r} is not a registered subcommand")
    if name != expected_task:
        raise ConfigError(f"config task {name!r} does not match subcommand {expected_task!r}")
    return doc


def config_hash(doc: dict) -> str:
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()


def parse_deviation(sec: dict):
    kind = sec.get("type", "none")
    if kind == "none":
        return BitFlipModel(0.0, 0.0)
    if kind == "bitflip":
        return BitFlipModel(float(sec["eps01"]), float(sec["eps10"]))
    if kind == "additive_gaussian":
        return AdditiveDeviation("gaussian", mean=float(sec.get("mean", 0.0)),
                                 var=float(sec.get("var", 0.0)))
    if kind == "additive_chi_square":
        return AdditiveDeviation("chi_square", dof=int(sec.get("dof", 1)),
                                 scale=float(sec.get("scale", 1.0)),
                                 shift=float(sec.get("shift", 0.0)))
    raise ConfigError(f"unknown deviation type {kind!r}")


def parse_degrees(sec: dict) -> DegreeDistribution:
    kind = sec.get("type", "regular")
    if kind == "regular":
        return DegreeDistribution.regular(int(sec["dv"]), int(sec["dc"]))
    if kind == "irregular":
        lam = {int(d): float(w) for d, w in sec["lambda"].items()}
        rho = {int(d): float(w) for d, w in sec["rho"].items()}
        return DegreeDistribution(lam, rho)
    raise ConfigError(f"code type {kind!r} has no degree distribution")


def build_graph(sec: dict, cache_dir: str | None):
    kind = sec.get("type", "regular")
    if kind == "alist":
        graph = TannerGraph.load_alist(sec["path"])
        return graph
    dd = parse_degrees(sec)
    if "n" not in sec:
        raise ConfigError("code section needs 'n' to construct a graph")
    return peg_construct(int(sec["n"]), dd, int(sec.get("seed", 0)))


def parse_ms_params(sec: dict) -> de_minsum.MinSumParams:
    return de_minsum.MinSumParams(
        q=int(sec["q"]),
        step=float(sec["step"]),
        gamma0=float(sec.get("gamma0", 1.0)),
        gamma1=float(sec.get("gamma1", 1.0)),
        lambda_plus=int(sec.get("lambda_plus", 0)),
        lambda_minus=int(sec.get("lambda_minus", 0)),
        L=int(sec["L"]),
    )


def parse_gb_params(sec: dict, dv: int, dc: int) -> de_gallager_b.GallagerBParams:
    thresholds = None
    if "b0" in sec or "b1" in sec:
        b0 = int(sec["b0"])
        b1 = int(sec.get("b1", b0))
        thresholds = (b0, b1)
    return de_gallager_b.GallagerBParams(dv=dv, dc=dc, L=int(sec["L"]),
                                         thresholds=thresholds)


def _write(outdir: str, name: str, text: str) -> str:
    path = os.path.join(outdir, name)
    with open(path, "w") as fh:
        fh.write(text)
    return name


class Runner:
    """Shared manifest/bookkeeping across subcommands."""

    def __init__(self, args, task_name):
        self.args = args
        self.task = task_name
        self.outdir = args.out
        os.makedirs(self.outdir, exist_ok=True)
        self.cache_dir = args.cache_dir or os.environ.get("ASYMDE_CACHE_DIR")
        if self.cache_dir:
            os.makedirs(self.cache_dir, exist_ok=True)
        self.flags: list[str] = []
        self.outputs: list[str] = []
        self.extra: dict = {}
        self.t0 = time.time()

    def finish(self, config: dict | None) -> int:
        manifest = {
            "command": self.task,
            "config": config,
            "config_hash": config_hash(config) if config is not None else None,
            "seed": self.args.seed,
            "versions": {
                "asymde": __version__,
                "python": sys.version.split()[0],
                "numpy": np.__version__,
                "scipy": scipy.__version__,
            },
            "wall_time_s": round(time.time() - self.t0, 3),
            "flags": self.flags,
            "outputs": self.outputs,
        }
        manifest.update(self.extra)
        with open(os.path.join(self.outdir, "manifest.json"), "w") as fh:
            json.dump(manifest, fh, indent=2)
        return 0 if not self.flags else 1

    def ledger(self, row: dict) -> None:
        if self.cache_dir:
            analysis.append_result_row(os.path.join(self.cache_dir, "results.csv"), row)


def _de_runner(doc: dict, runner: Runner):
    """(pe_fn over native channel parameter, metadata) for threshold/fl tasks."""
    code = doc["code"]
    decoder = doc["decoder"]
    deviation = parse_deviation(doc.get("deviation", {}))
    channel_type = doc["channel"]["type"]
    task = doc["task"]
    all_zero = bool(task.get("all_zero", False))
    quantity = task.get("quantity", "pe")
    family = decoder["family"]
    dd = parse_degrees(code)
    rate = dd.design_rate

    def pick(result):
        return result.app_pe[-1] if quantity == "app_pe" else result.final_pe

    if family == "gallager_b":
        if channel_type != "bsc":
            raise ConfigError("gallager_b runs on the BSC")
        (dv,) = dd.vn_edge
        (dc,) = dd.cn_edge
        mode = decoder.get("optimize")
        if mode in ("sym", "asym"):
            def pe_fn(p):
                return pick(optimize.run_optimized_gb(
                    p, dv, dc, int(decoder["L"]), deviation,
                    symmetric=(mode == "sym"), all_zero=all_zero))
        else:
            params = parse_gb_params(decoder, dv, dc)
            def pe_fn(p):
                return pick(de_gallager_b.run(p, params, deviation, all_zero=all_zero))
        return pe_fn, {"rate": rate, "sense": "increasing", "family": family}

    if family == "minsum":
        if channel_type != "awgn":
            raise ConfigError("minsum runs on the AWGN channel")
        params = parse_ms_params(decoder)
        if dd.is_regular:
            (dv,) = dd.vn_edge
            (dc,) = dd.cn_edge
            def pe_fn(snr_db):
                sigma2 = snr_db_to_sigma2(snr_db, rate)
                return pick(de_minsum.run(sigma2, dv, dc, params, deviation,
                                          all_zero=all_zero))
        else:
            def pe_fn(snr_db):
                sigma2 = snr_db_to_sigma2(snr_db, rate)
                return pick(analysis.run_irregular_minsum(
                    sigma2, dd.vn_edge, dd.cn_edge, params, deviation,
                    all_zero=all_zero))
        return pe_fn, {"rate": rate, "sense": "decreasing", "family": family}

    raise ConfigError(f"unknown decoder family {family!r}")


def cmd_threshold(args) -> int:
    runner = Runner(args, "threshold")
    doc = load_config(args.config, "threshold")
    task = doc["task"]
    pe_fn, meta = _de_runner(doc, runner)
    if meta["sense"] == "increasing":
        lo, hi = task.get("lo", 1e-4), task.get("hi", 0.2)
        resolution = task.get("resolution", analysis.DEFAULT_BSC_RESOLUTION)
    else:
        lo, hi = task.get("lo", 0.5), task.get("hi", 12.0)
        resolution = task.get("resolution", analysis.DEFAULT_SNR_RESOLUTION_DB)
    query = analysis.ThresholdQuery(
        runner=pe_fn, lo=lo, hi=hi,
        epsilon=task.get("epsilon", analysis.DEFAULT_EPSILON),
        resolution=resolution, sense=meta["sense"],
    )
    res = analysis.threshold_search(query)
    runner.flags.extend(res.flags)
    dev = doc.get("deviation", {})
    row = {
        "config_hash": config_hash(doc),
        "task": "threshold",
        "threshold": "" if res.value is None else res.value,
        "epsilon": query.epsilon,
        "L": doc["decoder"]["L"],
        "eps01": dev.get("eps01", 0.0),
        "eps10": dev.get("eps10", 0.0),
        "evals": res.evals,
        "crossed": res.crossed,
    }
    header = ",".join(row)
    body = ",".join(str(v) for v in row.values())
    runner.outputs.append(_write(runner.outdir, "threshold.csv", header + "\n" + body + "\n"))
    runner.ledger(row)
    return runner.finish(doc)


def cmd_de_run(args) -> int:
    runner = Runner(args, "de-run")
    doc = load_config(args.config, "de-run")
    chan = doc["channel"]
    deviation = parse_deviation(doc.get("deviation", {}))
    decoder = doc["decoder"]
    family = decoder["family"]
    all_zero = bool(doc["task"].get("all_zero", False))
    dd = parse_degrees(doc["code"])
    if family == "gallager_b":
        (dv,) = dd.vn_edge
        (dc,) = dd.cn_edge
        params = parse_gb_params(decoder, dv, dc)
        result = de_gallager_b.run(float(chan["p"]), params, deviation, all_zero=all_zero)
    elif family == "minsum":
        params = parse_ms_params(decoder)
        sigma2 = (float(chan["sigma2"]) if "sigma2" in chan
                  else snr_db_to_sigma2(float(chan["snr_db"]), dd.design_rate))
        if dd.is_regular:
            (dv,) = dd.vn_edge
            (dc,) = dd.cn_edge
            result = de_minsum.run(sigma2, dv, dc, params, deviation, all_zero=all_zero)
        else:
            result = analysis.run_irregular_minsum(
                sigma2, dd.vn_edge, dd.cn_edge, params, deviation, all_zero=all_zero)
    elif family == "bp":
        (dv,) = dd.vn_edge
        (dc,) = dd.cn_edge
        sigma2 = (float(chan["sigma2"]) if "sigma2" in chan
                  else snr_db_to_sigma2(float(chan["snr_db"]), dd.design_rate))
        result = de_bp_mc.population_de_run(
            sigma2, dv, dc, int(decoder["L"]), deviation,
            n_pop=int(decoder.get("n_pop", 100_000)), seed=args.seed)
    else:
        raise ConfigError(f"unknown decoder family {family!r}")
    runner.outputs.append(_write(runner.outdir, "trace.csv", result.to_csv()))
    runner.outputs.append(_write(runner.outdir, "trace.json", result.to_json()))
    if doc["task"].get("dump_densities") and result.final_pair is not None:
        if hasattr(result.final_pair, "to_json"):
            runner.outputs.append(
                _write(runner.outdir, "final_densities.json", result.final_pair.to_json()))
    return runner.finish(doc)


def _curve_cache_key(doc: dict) -> str:
    subset = {
        "code": doc["code"],
        "decoder": doc["decoder"],
        "deviation": doc.get("deviation", {}),
        "channel_family": doc["channel"]["type"],
        "quantity": doc["task"].get("quantity", "app_pe"),
        "n": doc["task"]["n"],
        "points": doc["task"]["points"],
        "curve_points": doc["task"].get("curve_points", 33),
    }
    return hashlib.sha256(json.dumps(subset, sort_keys=True).encode()).hexdigest()


def cmd_fl_ber(args) -> int:
    runner = Runner(args, "fl-ber")
    doc = load_config(args.config, "fl-ber")
    task = doc["task"]
    doc["task"] = dict(task, quantity=task.get("quantity", "app_pe"))
    n = int(task["n"])
    points = [float(p) for p in task["points"]]
    pe_fn, meta = _de_runner(doc, runner)
    if meta["sense"] == "increasing":
        p0s = points
        pe_of_z = pe_fn
    else:
        from .channels import sigma2_to_snr_db

        p0s = [analysis.awgn_observed_p0(snr_db_to_sigma2(s, meta["rate"]))
               for s in points]

        def pe_of_z(z):
            # The engine runs at the variance whose hard-decision error is z.
            sigma2 = float(analysis.awgn_sigma2_of_z(z))
            return pe_fn(sigma2_to_snr_db(sigma2, meta["rate"]))

    cache_path = None
    cache_state = "off"
    if runner.cache_dir:
        cache_path = os.path.join(runner.cache_dir, f"curve_{_curve_cache_key(doc)}.json")
        cache_state = "hit" if os.path.exists(cache_path) else "miss"
    if cache_state == "hit":
        with open(cache_path) as fh:
            curve = analysis.PeCurve.from_json_dict(json.load(fh))
    else:
        grid = analysis.fl_z_grid(p0s, n, task.get("curve_points", 33))
        curve = analysis.build_pe_curve(pe_of_z, grid)
        if cache_path:
            with open(cache_path, "w") as fh:
                json.dump(curve.to_json_dict(), fh)
    runner.extra["curve_cache"] = cache_state

    lines = ["point,p0,n,predicted_ber"]
    for point, p0 in zip(points, p0s):
        pred = analysis.finite_length_pe(curve, n, p0)
        lines.append(f"{point!r},{p0!r},{n},{pred!r}")
        runner.ledger({"config_hash": config_hash(doc), "task": "fl-ber",
                       "point": point, "n": n, "predicted_ber": pred})
    if curve.clamped_queries:
        runner.flags.append(f"curve clamped on {curve.clamped_queries} queries")
    runner.outputs.append(_write(runner.outdir, "fl_ber.csv", "\n".join(lines) + "\n"))
    return runner.finish(doc)


def cmd_optimize_gb(args) -> int:
    runner = Runner(args, "optimize-gb")
    doc = load_config(args.config, "optimize-gb")
    task = doc["task"]
    deviation = parse_deviation(doc.get("deviation", {}))
    dd = parse_degrees(doc["code"])
    (dv,) = dd.vn_edge
    (dc,) = dd.cn_edge
    L = int(doc["decoder"]["L"])
    lines = ["p0,mode,final_pe,final_app_pe,fallbacks,schedule"]
    for p0 in task["p0"]:
        for mode in ("sym", "asym"):
            res = optimize.run_optimized_gb(float(p0), dv, dc, L, deviation,
                                            symmetric=(mode == "sym"))
            sched = json.dumps(res.schedule[1:])
            lines.append(f"{p0!r},{mode},{res.final_pe!r},{res.app_pe[-1]!r},"
                         f"{res.meta['fallbacks']},\"{sched}\"")
    runner.outputs.append(_write(runner.outdir, "optimize_gb.csv", "\n".join(lines) + "\n"))
    return runner.finish(doc)


def cmd_optimize_ms(args) -> int:
    runner = Runner(args, "optimize-ms")
    doc = load_config(args.config, "optimize-ms")
    task = doc["task"]
    deviation = parse_deviation(doc.get("deviation", {}))
    dd = parse_degrees(doc["code"])
    (dv,) = dd.vn_edge
    (dc,) = dd.cn_edge
    decoder = doc["decoder"]
    grid_kwargs = {}
    if "gammas" in task:
        grid_kwargs["gammas"] = tuple(task["gammas"])
    if "lambdas" in task:
        grid_kwargs["lambdas"] = tuple(task["lambdas"])
    grid = optimize.MsGrid(**grid_kwargs)
    res = optimize.grid_search_ms(
        grid, dv, dc, deviation,
        q=int(decoder["q"]), step=float(decoder["step"]), L=int(decoder["L"]),
        epsilon=task.get("epsilon", analysis.DEFAULT_EPSILON),
        snr_lo=task.get("lo", 0.5), snr_hi=task.get("hi", 12.0),
        resolution=task.get("resolution", analysis.DEFAULT_SNR_RESOLUTION_DB),
        symmetric=bool(task.get("symmetric", False)),
        mode=task.get("mode", "threshold"),
        snr_eval=task.get("snr_eval"),
    )
    lines = ["gamma0,gamma1,lambda_plus,lambda_minus,threshold,pe,mode"]
    for row in res.rows:
        g0, g1, lp, lm = row["tuple"]
        lines.append(f"{g0},{g1},{lp},{lm},{row.get('threshold', '')},"
                     f"{row.get('pe', '')},{row['mode']}")
    runner.outputs.append(_write(runner.outdir, "grid.csv", "\n".join(lines) + "\n"))
    best = {
        "gamma0": res.gamma0, "gamma1": res.gamma1,
        "lambda_plus": res.lambda_plus, "lambda_minus": res.lambda_minus,
        "threshold": res.threshold, "objective": res.objective, "mode": res.mode,
    }
    runner.outputs.append(_write(runner.outdir, "best.json", json.dumps(best, indent=2)))
    if res.threshold is None and res.objective is None:
        runner.flags.append("no tuple crossed the target")
    return runner.finish(doc)


def cmd_simulate(args) -> int:
    runner = Runner(args, "simulate")
    doc = load_config(args.config, "simulate")
    task = doc["task"]
    deviation = parse_deviation(doc.get("deviation", {}))
    graph = build_graph(doc["code"], runner.cache_dir)
    encoder = build_encoder(graph, cache_dir=runner.cache_dir)
    decoder_sec = doc["decoder"]
    dd = parse_degrees(doc["code"]) if doc["code"].get("type") != "alist" else None
    if decoder_sec["family"] == "minsum":
        decoder = parse_ms_params(decoder_sec)
        rate = dd.design_rate if dd else encoder.rate
        points = [snr_db_to_sigma2(float(s), rate) for s in task["points"]]
    else:
        dv = int(graph.vn_degrees.max())
        dc = int(graph.cn_degrees.max())
        decoder = parse_gb_params(decoder_sec, dv, dc)
        points = [float(p) for p in task["points"]]
    config = sim.SimConfig(
        graph=graph, encoder=encoder, channel_points=points, decoder=decoder,
        deviation=deviation, seed=args.seed,
        max_frames=int(task.get("max_frames", 10_000_000)),
        target_frame_errors=int(task.get("target_frame_errors", 100)),
    )
    results = sim.ber_experiment(config, workers=args.workers)
    for point, r in zip(task["points"], results):
        r.channel_param = float(point)
        runner.flags.extend(r.flags)
    runner.outputs.append(_write(runner.outdir, "ber.csv", sim.ber_rows_csv(results)))
    return runner.finish(doc)


def cmd_peg(args) -> int:
    runner = Runner(args, "peg")
    doc = load_config(args.config, "peg")
    code = doc["code"]
    dd = parse_degrees(code)
    graph = peg_construct(int(code["n"]), dd, int(code.get("seed", args.seed)))
    runner.outputs.append(_write(runner.outdir, "graph.alist", graph.to_alist()))
    g = girth(graph)
    report = {
        "n": graph.n, "m": graph.m, "edges": graph.n_edges,
        "girth": None if g == float("inf") else g,
        "design_rate": dd.design_rate,
    }
    runner.outputs.append(_write(runner.outdir, "peg.json", json.dumps(report, indent=2)))
    return runner.finish(doc)


def cmd_inspect_pi(args) -> int:
    runner = Runner(args, "inspect-pi")
    pi = build_pi_sign_magnitude(args.q, BitFlipModel(args.eps01, args.eps10))
    idx = pi.alphabet.indices()
    lines = ["clean\\noisy," + ",".join(str(k) for k in idx)]
    for i, row in zip(idx, pi.matrix):
        lines.append(f"{i}," + ",".join(repr(float(v)) for v in row))
    runner.outputs.append(_write(runner.outdir, "pi.csv", "\n".join(lines) + "\n"))
    doc = {"task": {"name": "inspect-pi", "q": args.q,
                    "eps01": args.eps01, "eps10": args.eps10}}
    return runner.finish(doc)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="asymde",
        description="Density evolution and simulation for LDPC decoders "
                    "with asymmetric hardware deviations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True, help="JSON run-config")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--cache-dir", default=None,
                       help="cache directory (env ASYMDE_CACHE_DIR)")

    handlers = {}
    for name, fn in [
        ("threshold", cmd_threshold), ("de-run", cmd_de_run), ("fl-ber", cmd_fl_ber),
        ("optimize-gb", cmd_optimize_gb), ("optimize-ms", cmd_optimize_ms),
        ("simulate", cmd_simulate), ("peg", cmd_peg),
    ]:
        p = sub.add_parser(name)
        common(p)
        handlers[name] = fn
    p = sub.add_parser("inspect-pi")
    common(p, needs_config=False)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--eps01", type=float, required=True)
    p.add_argument("--eps10", type=float, required=True)
    handlers["inspect-pi"] = cmd_inspect_pi

    args = parser.parse_args(argv)
    try:
        return handlers[args.command](args)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
