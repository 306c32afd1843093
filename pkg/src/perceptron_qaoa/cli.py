"""Command-line orchestration: instance generation and filtering, step-size
scans, QAOA pipelines, spectral-gap analysis, and a `repro` driver that
chains the full plot-ready datasets from a config file.

Every command writes one JSON manifest capturing the resolved
configuration, inputs, outputs, and seeds; all emitted data files are
deterministic given the manifest.
"""

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__, instance, optimize, schedules, spectrum, statevec


def _write_json(doc, path):
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    os.replace(tmp, path)


def _manifest(out_dir, command, tag, config, inputs, outputs, started):
    config = {k: v for k, v in config.items() if k != "func"}
    doc = {
        "command": command,
        "tag": tag,
        "config": config,
        "inputs": inputs,
        "outputs": outputs,
        "version": __version__,
        "duration_s": time.time() - started,
    }
    _write_json(doc, os.path.join(out_dir, f"manifest_{command}_{tag}.json"))


def _load_table_for(args):
    """Build (and maybe randomize) the cost table referenced by CLI flags."""
    ts = instance.load_instance(args.instance)
    table = instance.build_energy_table(ts, args.nc)
    if getattr(args, "randomize_seed", None) is not None:
        table = instance.randomize_table(table, args.randomize_seed)
    return ts, table


def _default_tag(args, *parts):
    if args.tag:
        return args.tag
    bits = [str(p) for p in parts if p is not None]
    if getattr(args, "randomize_seed", None) is not None:
        bits.append(f"rand{args.randomize_seed}")
    return "_".join(bits)


def cmd_gen(args):
    started = time.time()
    os.makedirs(args.out, exist_ok=True)
    rows = ["seed,n_solutions,sa_best_energy,accepted"]
    written = []
    n_accepted = 0
    for i in range(args.count):
        seed = args.seed + i
        ts = instance.generate_instance(args.n, args.m, seed)
        if args.filter:
            dec = instance.filter_instance(
                ts, instance.SaConfig(n_sweeps=args.sa_sweeps,
                                      temp_initial=args.sa_t0,
                                      temp_final=args.sa_t1, seed=seed),
                min_solutions=args.min_solutions, sa_trials=args.sa_trials)
            rows.append(f"{seed},{dec.n_solutions},{dec.sa_best_energy!r},"
                        f"{int(dec.accepted)}")
            accept = dec.accepted
        else:
            accept = True
            table = instance.build_energy_table(ts, 0)
            rows.append(f"{seed},{instance.count_solutions(table)},nan,1")
        if accept and n_accepted < args.max_accepted:
            path = os.path.join(args.out, f"instance_{seed}.json")
            instance.save_instance(ts, path)
            written.append(path)
            n_accepted += 1
    summary = os.path.join(args.out, "summary.csv")
    with open(summary, "w") as fh:
        fh.write("\n".join(rows) + "\n")
    written.append(summary)
    _manifest(args.out, "gen", str(args.seed), vars(args), [], written, started)
    print(f"gen: {args.count} candidates, {n_accepted} instance files -> {args.out}")
    return 0


def cmd_scan_dt(args):
    started = time.time()
    os.makedirs(args.out, exist_ok=True)
    _, table = _load_table_for(args)
    scape = schedules.scan_dt(table, args.p, args.dt_min, args.dt_max,
                              args.points)
    tag = _default_tag(args, f"nc{args.nc}", f"P{args.p}")
    csv_path = os.path.join(args.out, f"landscape_{tag}.csv")
    schedules.save_landscape(scape, csv_path)
    opt_path = os.path.join(args.out, f"optimum_{tag}.json")
    _write_json({"dt": scape.argmin_dt, "energy_density": scape.argmin_energy,
                 "P": args.p, "nc": args.nc,
                 "provenance": table.provenance,
                 "randomize_seed": table.randomize_seed}, opt_path)
    _manifest(args.out, "scan-dt", tag, vars(args), [args.instance],
              [csv_path, opt_path], started)
    print(f"scan-dt[{tag}]: argmin dt={scape.argmin_dt:.6g} "
          f"eps={scape.argmin_energy:.6g}")
    return 0


def _load_ansatz(path):
    if path.endswith(".json"):
        return optimize.load_result(path).params
    return schedules.load_schedule(path)


def _save_effective_s(params, path):
    s = schedules.effective_s(params)
    lines = ["m,s"]
    for m, val in enumerate(s):
        lines.append(f"{m + 1},{float(val)!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def cmd_qaoa(args):
    started = time.time()
    os.makedirs(args.out, exist_ok=True)
    ts, table = _load_table_for(args)
    bfgs = optimize.BfgsConfig(grad_tol=args.grad_tol, max_iters=args.max_iters)
    if args.stage == "qaoa1":
        result = optimize.qaoa1(table, args.p, bfgs=bfgs, dqa_dt=args.dt)
    elif args.stage == "qaoa2":
        base = optimize.load_result(args.base) if args.base else None
        q1 = optimize.load_result(args.qaoa1_result) if args.qaoa1_result else None
        result = optimize.qaoa2(table, args.p, strategy=args.strategy,
                                base=base, qaoa1_result=q1,
                                window=args.window, bfgs=bfgs)
    elif args.stage == "transfer":
        if not args.ansatz:
            raise SystemExit("transfer stage needs --ansatz")
        result = optimize.transfer(_load_ansatz(args.ansatz), table, bfgs=bfgs)
    else:
        raise SystemExit(f"unknown stage {args.stage}")
    tag = _default_tag(args, args.stage, f"nc{args.nc}", f"P{args.p}")
    paths = {
        "result": os.path.join(args.out, f"result_{tag}.json"),
        "schedule": os.path.join(args.out, f"schedule_{tag}.csv"),
        "trace": os.path.join(args.out, f"trace_{tag}.csv"),
        "effective_s": os.path.join(args.out, f"effective_s_{tag}.csv"),
    }
    optimize.save_result(result, paths["result"], table=table,
                         seeds={"instance": ts.seed,
                                "randomize": table.randomize_seed})
    schedules.save_schedule(result.params, paths["schedule"])
    optimize.save_trace(result, paths["trace"])
    _save_effective_s(result.params, paths["effective_s"])
    _manifest(args.out, "qaoa", tag, vars(args), [args.instance],
              list(paths.values()), started)
    print(f"qaoa[{tag}]: eps={result.energy_density:.6g} "
          f"overlap={result.ground_overlap:.4g} iters={result.n_iters}")
    return 0


def cmd_gap(args):
    started = time.time()
    os.makedirs(args.out, exist_ok=True)
    _, table = _load_table_for(args)
    grid = np.linspace(0.0, args.s_max, args.grid)
    curve = spectrum.gap_curve(table, s_grid=grid, tol=args.tol)
    tag = _default_tag(args, f"nc{args.nc}")
    csv_path = os.path.join(args.out, f"gap_{tag}.csv")
    summary_path = os.path.join(args.out, f"gap_summary_{tag}.json")
    spectrum.save_gap_curve(curve, csv_path, summary_path,
                            provenance=table.provenance)
    _manifest(args.out, "gap", tag, vars(args), [args.instance],
              [csv_path, summary_path], started)
    print(f"gap[{tag}]: min={curve.min_gap:.6g} at s={curve.s_at_min:.4g}")
    return 0


def run_repro(config, resume=True, echo=print):
    """Chain the full plot-ready datasets described by a repro config.

    Stages: instance generation, dt scans (original and randomized),
    the qaoa1/qaoa2 pipelines, ansatz transfers, and gap curves. Existing
    output files are skipped when ``resume`` so long runs can restart.
    """
    started = time.time()
    out = config["out"]
    os.makedirs(out, exist_ok=True)
    n, m = config["n"], config["m"]
    seeds = config["instance_seeds"]
    ncs = config.get("nc", [0, 1])
    p_values = config.get("p_values", [4, 8, 16, 32, 64])
    scan_cfg = config.get("scan", {})
    bfgs = optimize.BfgsConfig(**config.get("bfgs", {}))
    window = config.get("smooth_window", 3)
    chain_from = config.get("chain_from", 16)
    rand_base = config.get("randomize_seed_base")
    stages = config.get("stages", ["scans", "qaoa", "transfers", "gaps"])
    outputs = []

    def is_done(path):
        return resume and os.path.exists(path)

    def result_path(kind, sample, nc, p, randomized):
        suffix = "_rand" if randomized else ""
        return os.path.join(out, f"{kind}_s{sample}_nc{nc}_P{p}{suffix}.json")

    tables = {}

    def table_for(sample_idx, nc, randomized):
        key = (sample_idx, nc, randomized)
        if key not in tables:
            ts = instance.generate_instance(n, m, seeds[sample_idx])
            tab = instance.build_energy_table(ts, nc)
            if randomized:
                tab = instance.randomize_table(tab, rand_base + sample_idx)
            tables[key] = tab
        return tables[key]

    for i, seed in enumerate(seeds):
        path = os.path.join(out, f"instance_{seed}.json")
        if not is_done(path):
            instance.save_instance(instance.generate_instance(n, m, seed), path)
        outputs.append(path)

    def run_scan(i, nc, p, randomized):
        suffix = "_rand" if randomized else ""
        opt_path = os.path.join(out, f"optimum_s{i}_nc{nc}_P{p}{suffix}.json")
        if is_done(opt_path):
            return json.load(open(opt_path))
        tab = table_for(i, nc, randomized)
        t0 = time.time()
        scape = schedules.scan_dt(tab, p, **scan_cfg)
        schedules.save_landscape(
            scape, os.path.join(out, f"landscape_s{i}_nc{nc}_P{p}{suffix}.csv"))
        doc = {"dt": scape.argmin_dt, "energy_density": scape.argmin_energy,
               "P": p, "nc": nc, "sample": i,
               "provenance": tab.provenance,
               "wall_s": time.time() - t0,
               "interior": bool(scape.dt_grid[0] < scape.argmin_dt < scape.dt_grid[-1])}
        _write_json(doc, opt_path)
        echo(f"scan s{i} nc{nc} P{p}{suffix}: dt*={scape.argmin_dt:.4g} "
             f"eps={scape.argmin_energy:.6g}")
        return doc

    def save_stage(result, kind, i, nc, p, tab, randomized=False):
        rp = result_path(kind, i, nc, p, randomized)
        optimize.save_result(result, rp, table=tab,
                             seeds={"instance": seeds[i]})
        optimize.save_trace(result, rp.replace(".json", "_trace.csv"))
        schedules.save_schedule(result.params, rp.replace(".json", "_sched.csv"))
        _save_effective_s(result.params, rp.replace(".json", "_seff.csv"))
        outputs.append(rp)

    if "scans" in stages:
        for i in range(len(seeds)):
            for nc in ncs:
                for p in p_values:
                    run_scan(i, nc, p, False)
                    if rand_base is not None:
                        run_scan(i, nc, p, True)

    if "qaoa" in stages:
        for i in range(len(seeds)):
            for nc in ncs:
                q1 = {}
                for p in p_values:
                    rp = result_path("qaoa1", i, nc, p, False)
                    if is_done(rp):
                        q1[p] = optimize.load_result(rp)
                        continue
                    tab = table_for(i, nc, False)
                    opt = run_scan(i, nc, p, False)
                    res = optimize.qaoa1(tab, p, bfgs=bfgs, dqa_dt=opt["dt"])
                    save_stage(res, "qaoa1", i, nc, p, tab)
                    q1[p] = res
                    echo(f"qaoa1 s{i} nc{nc} P{p}: eps={res.energy_density:.6g} "
                         f"iters={res.n_iters}")
                chained = None
                for p in p_values:
                    rp = result_path("qaoa2", i, nc, p, False)
                    if is_done(rp):
                        chained = optimize.load_result(rp)
                        continue
                    tab = table_for(i, nc, False)
                    if nc == 1 and p > chain_from and chained is not None:
                        res = optimize.qaoa2(tab, p, strategy="interpolate",
                                             base=chained, bfgs=bfgs)
                    else:
                        res = optimize.qaoa2(tab, p, strategy="smooth_restart",
                                             qaoa1_result=q1[p], window=window,
                                             bfgs=bfgs)
                    save_stage(res, "qaoa2", i, nc, p, tab)
                    chained = res
                    echo(f"qaoa2 s{i} nc{nc} P{p}: eps={res.energy_density:.6g} "
                         f"iters={res.n_iters}")

    if "transfers" in stages:
        p = config.get("p_transfer", max(p_values))
        for nc in ncs:
            src = result_path("qaoa2", 0, nc, p, False)
            ansatz = optimize.load_result(src).params
            for i in range(1, len(seeds)):
                rp = result_path("transfer", i, nc, p, False)
                if is_done(rp):
                    continue
                tab = table_for(i, nc, False)
                res = optimize.transfer(ansatz, tab, bfgs=bfgs)
                save_stage(res, "transfer", i, nc, p, tab)
                echo(f"transfer s0->s{i} nc{nc} P{p}: eps={res.energy_density:.6g} "
                     f"iters={res.n_iters}")

    if "gaps" in stages:
        grid_cfg = config.get("gap_grid", {})
        npts = grid_cfg.get("points", 49)
        s_max = grid_cfg.get("s_max", 0.96)
        tol = grid_cfg.get("tol", 1e-8)
        nc = grid_cfg.get("nc", 0)
        grid = np.linspace(0.0, s_max, npts)
        for i in range(len(seeds)):
            for randomized in (False, True) if rand_base is not None else (False,):
                suffix = "_rand" if randomized else ""
                csv_path = os.path.join(out, f"gap_s{i}_nc{nc}{suffix}.csv")
                if is_done(csv_path.replace(".csv", "_summary.json")):
                    continue
                tab = table_for(i, nc, randomized)
                curve = spectrum.gap_curve(
                    tab, s_grid=grid, tol=tol,
                    progress=lambda s, g: echo(f"  gap point s={s:.4f} gap={g:.5g}"))
                spectrum.save_gap_curve(curve, csv_path,
                                        csv_path.replace(".csv", "_summary.json"),
                                        provenance=tab.provenance)
                outputs.append(csv_path)
                echo(f"gap s{i} nc{nc}{suffix}: min={curve.min_gap:.4g} "
                     f"at s={curve.s_at_min:.4g}")

    _manifest(out, "repro", "run", config, [], outputs, started)
    return 0


def cmd_repro(args):
    with open(args.config) as fh:
        config = json.load(fh)
    if args.out:
        config["out"] = args.out
    if args.stages:
        config["stages"] = args.stages.split(",")
    return run_repro(config, resume=not args.no_resume)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="perceptron-qaoa",
        description="Digitized-annealing and QAOA toolkit for binary "
                    "perceptron training (exact simulation)")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate (and filter) training sets")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--seed", type=int, default=1)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--filter", action=argparse.BooleanOptionalAction, default=False)
    g.add_argument("--min-solutions", type=int, default=21)
    g.add_argument("--sa-trials", type=int, default=20)
    g.add_argument("--sa-sweeps", type=int, default=1000)
    g.add_argument("--sa-t0", type=float, default=2.0)
    g.add_argument("--sa-t1", type=float, default=0.01)
    g.add_argument("--max-accepted", type=int, default=10 ** 9)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("scan-dt", help="one-dimensional step-size landscape")
    s.add_argument("--instance", required=True)
    s.add_argument("--nc", type=int, choices=(0, 1), default=0)
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--dt-min", type=float, default=0.02)
    s.add_argument("--dt-max", type=float, default=3.0)
    s.add_argument("--points", type=int, default=60)
    s.add_argument("--randomize-seed", type=int, default=None)
    s.add_argument("--tag", default=None)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_scan_dt)

    q = sub.add_parser("qaoa", help="run a QAOA pipeline stage")
    q.add_argument("--instance", required=True)
    q.add_argument("--nc", type=int, choices=(0, 1), default=0)
    q.add_argument("--p", type=int, required=True)
    q.add_argument("--stage", choices=("qaoa1", "qaoa2", "transfer"),
                   default="qaoa1")
    q.add_argument("--strategy", choices=("smooth_restart", "interpolate"),
                   default="smooth_restart")
    q.add_argument("--base", default=None,
                   help="lower-P result JSON for --strategy interpolate")
    q.add_argument("--qaoa1-result", default=None,
                   help="existing first-stage result JSON to restart from")
    q.add_argument("--ansatz", default=None,
                   help="schedule CSV or result JSON for --stage transfer")
    q.add_argument("--dt", type=float, default=None,
                   help="skip the scan and start from this step size")
    q.add_argument("--window", type=int, default=3)
    q.add_argument("--grad-tol", type=float, default=1e-8)
    q.add_argument("--max-iters", type=int, default=2000)
    q.add_argument("--randomize-seed", type=int, default=None)
    q.add_argument("--tag", default=None)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_qaoa)

    p = sub.add_parser("gap", help="instantaneous spectral gap along s")
    p.add_argument("--instance", required=True)
    p.add_argument("--nc", type=int, choices=(0, 1), default=0)
    p.add_argument("--grid", type=int, default=97)
    p.add_argument("--s-max", type=float, default=0.96)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--randomize-seed", type=int, default=None)
    p.add_argument("--tag", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gap)

    r = sub.add_parser("repro", help="chain full figure datasets from a config")
    r.add_argument("--config", required=True)
    r.add_argument("--out", default=None)
    r.add_argument("--stages", default=None,
                   help="comma-separated subset of scans,qaoa,transfers,gaps")
    r.add_argument("--no-resume", action="store_true")
    r.set_defaults(func=cmd_repro)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
