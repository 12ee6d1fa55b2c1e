"""Command-line entry point: verify | langevin | gibbs | couple | measure.

Every experiment reads one TOML config (overridable seed/output on the
command line), writes line-delimited records, and is deterministic:
running the same config and seed twice produces byte-identical record
streams.  Exit codes: 0 success, 1 check failure, 2 configuration
error.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from .action import identity_configuration
from .gibbs import MetropolisParams, sample_chain
from .langevin import (
    IntegratorParams,
    contraction_experiment,
    default_step_size,
    run,
)
from .observables import wilson_loop
from .records import (
    append_record,
    checkpoint_record,
    configuration_from_record,
    latest_checkpoint,
    make_record,
    read_records,
)
from .runconfig import (
    ConfigError,
    RunConfig,
    default_config_text,
    load_config,
    parse_config,
)
from .stats import covariance_decay, estimate, susceptibility_sums, variance_bound_check
from . import action as _action
from . import verify as _verify

__all__ = ["main"]

EXIT_OK = 0
EXIT_CHECK_FAILURE = 1
EXIT_CONFIG_ERROR = 2


def _experiment_id(rc: RunConfig) -> str:
    m = rc.raw["model"]
    return (
        f"{rc.kind}-{m['group']}{m['n']}-d{m['d']}L{m['L']}"
        f"-beta{m['beta']}-seed{rc.seed}"
    )


def _loop_name(desc) -> str:
    base = ",".join(str(c) for c in desc[1])
    axes = "".join(str(a) for a in desc[2])
    if desc[0] == "plaquette":
        return f"plaquette[{base}]ax{axes}"
    shape = "x".join(str(s) for s in desc[3])
    return f"rectangle[{base}]ax{axes}_{shape}"


def _integrator(rc: RunConfig) -> IntegratorParams:
    h = rc.integrator["step_size"]
    if h == 0.0:
        h = default_step_size(rc.params)
    return IntegratorParams(
        step_size=h,
        n_steps=rc.integrator["n_steps"],
        reunitarize_every=rc.integrator["reunitarize_every"],
        seed=rc.seed,
    )


def _open_output(rc: RunConfig, resume: bool):
    if not rc.output:
        return sys.stdout, None
    mode = "a" if resume else "w"
    os.makedirs(os.path.dirname(os.path.abspath(rc.output)), exist_ok=True)
    fh = open(rc.output, mode, encoding="utf-8")
    return fh, fh


def _emit_estimates(fh, rc: RunConfig, eid: str, series_by_name: dict, timings: bool, t0: float, extra=None):
    for name, values in series_by_name.items():
        arr = np.asarray(values, dtype=float)
        append_record(
            fh,
            make_record("series", eid, _jsonable_config(rc), observable=name, values=arr),
        )
        ### batch estimator needs a minimum length; short runs still record the series
        if arr.size >= 100:
            est = estimate(arr)
            fields = {
                "mean": est.mean,
                "stderr": est.stderr,
                "tau_int": est.tau_int,
                "n_effective": est.n_effective,
            }
        else:
            fields = {
                "mean": float(arr.mean()) if arr.size else None,
                "stderr": None,
                "tau_int": None,
                "n_effective": None,
            }
        append_record(
            fh,
            make_record(
                "estimate",
                eid,
                _jsonable_config(rc),
                observable=name,
                n_samples=int(arr.size),
                wall_clock=(time.time() - t0) if timings else None,
                **fields,
                **(extra or {}),
            ),
        )


def _observer_functions(rc: RunConfig):
    n = rc.group.n
    obs = {}
    for desc, loop in rc.observables:
        word = list(loop)
        obs[_loop_name(desc)] = lambda c, w=word: float(
            np.real(wilson_loop(c, w, rc.lattice)) / n
        )
    return obs


def _cmd_langevin(rc: RunConfig, timings: bool) -> int:
    t0 = time.time()
    eid = _experiment_id(rc)
    integ = _integrator(rc)
    start_step = 0
    cfg = identity_configuration(rc.group, rc.lattice)
    resume = False
    saved_series: dict = {}
    if rc.output and rc.checkpoint_every > 0 and os.path.exists(rc.output):
        ckpt = latest_checkpoint(read_records(rc.output))
        if ckpt is not None and ckpt["config"] == _jsonable_config(rc):
            start_step = ckpt["step"]
            cfg = configuration_from_record(ckpt, rc.group.kind == "SU")
            saved_series = ckpt.get("series", {})
            resume = True
            print(f"resuming from checkpoint at step {start_step}", file=sys.stderr)
    fh, closeable = _open_output(rc, resume)
    try:
        observers = _observer_functions(rc)
        series: dict = {k: list(saved_series.get(k, [])) for k in observers}
        remaining = integ.n_steps - start_step
        if remaining <= 0:
            print("nothing to do: checkpoint is at or past n_steps", file=sys.stderr)
            return EXIT_OK
        seg = rc.checkpoint_every if rc.checkpoint_every > 0 else remaining
        s = start_step
        while s < integ.n_steps:
            this = min(seg, integ.n_steps - s)
            part = IntegratorParams(
                step_size=integ.step_size,
                n_steps=this,
                reunitarize_every=integ.reunitarize_every,
                seed=integ.seed,
            )
            res = run(
                cfg,
                rc.params,
                rc.lattice,
                part,
                observers=observers,
                burn_in=rc.integrator["burn_in"],
                thin=rc.integrator["thin"],
                start_step=s,
            )
            cfg = res.final
            for k in observers:
                series[k].extend(res.series[k].tolist() if res.series[k].size else [])
            s += this
            if rc.checkpoint_every > 0 and s < integ.n_steps:
                append_record(
                    fh,
                    checkpoint_record(
                        eid, _jsonable_config(rc), s, cfg, rc.seed, series=series
                    ),
                )
        _emit_estimates(
            fh, rc, eid, series, timings, t0, extra={"step_size": integ.step_size}
        )
    finally:
        if closeable:
            closeable.close()
    print(f"langevin run complete in {time.time() - t0:.1f}s", file=sys.stderr)
    return EXIT_OK


def _jsonable_config(rc: RunConfig) -> dict:
    ### echo omits the output path so record streams are
    ### byte-identical regardless of where they are written
    from .records import jsonable

    echo = jsonable(rc.raw)
    echo["experiment"] = dict(echo["experiment"])
    echo["experiment"]["output"] = ""
    return echo


def _cmd_gibbs(rc: RunConfig, timings: bool) -> int:
    t0 = time.time()
    eid = _experiment_id(rc)
    mp = MetropolisParams(
        proposal_scale=rc.mcmc["proposal_scale"],
        sweeps=rc.mcmc["sweeps"],
        burn_in=rc.mcmc["burn_in"],
        thin=rc.mcmc["thin"],
        seed=rc.seed,
    )
    res = sample_chain(rc.lattice, rc.params, mp)
    fh, closeable = _open_output(rc, resume=False)
    try:
        n = rc.group.n
        series = {
            _loop_name(desc): np.real(wilson_loop(res.samples, list(loop), rc.lattice)) / n
            for desc, loop in rc.observables
        }
        _emit_estimates(
            fh, rc, eid, series, timings, t0,
            extra={"acceptance_rate": res.acceptance_rate},
        )
    finally:
        if closeable:
            closeable.close()
    print(f"gibbs run complete in {time.time() - t0:.1f}s", file=sys.stderr)
    return EXIT_OK


def _cmd_couple(rc: RunConfig, timings: bool) -> int:
    t0 = time.time()
    kt = _action.tilde_k(rc.params, rc.weight_a)
    if not rc.params.admissible or kt <= 0:
        print(
            f"refusing: coupling experiment requires an admissible coupling; "
            f"beta = {rc.params.beta} with threshold {rc.params.beta_threshold:.8g} "
            f"and weighted constant tilde_k = {kt:.8g} (must be > 0) at a = {rc.weight_a}",
            file=sys.stderr,
        )
        return EXIT_CONFIG_ERROR
    eid = _experiment_id(rc)
    integ = _integrator(rc)
    res = contraction_experiment(
        rc.params,
        rc.lattice,
        rc.weight_a,
        integ,
        n_pairs=rc.n_pairs,
        measure_every=rc.integrator["measure_every"],
        fit_start=rc.fit_start,
    )
    fh, closeable = _open_output(rc, resume=False)
    try:
        append_record(
            fh,
            make_record(
                "contraction",
                eid,
                _jsonable_config(rc),
                rate=res.rate,
                ci_low=res.ci_low,
                ci_high=res.ci_high,
                analytic_rate=res.analytic_rate,
                n_pairs=res.n_pairs,
                times=res.times,
                mean_log_rho_sq=res.mean_log_rho_sq,
                wall_clock=(time.time() - t0) if timings else None,
            ),
        )
    finally:
        if closeable:
            closeable.close()
    print(f"couple run complete in {time.time() - t0:.1f}s", file=sys.stderr)
    return EXIT_OK


def _cmd_measure(rc: RunConfig, timings: bool) -> int:
    t0 = time.time()
    eid = _experiment_id(rc)
    integ = _integrator(rc)
    res = run(
        identity_configuration(rc.group, rc.lattice),
        rc.params,
        rc.lattice,
        integ,
        observers={"cfg": lambda c: c.copy()},
        burn_in=rc.integrator["burn_in"],
        thin=rc.integrator["thin"],
    )
    samples = res.series["cfg"]
    failures = 0
    fh, closeable = _open_output(rc, resume=False)
    try:
        n = rc.group.n
        series = {
            _loop_name(desc): np.real(wilson_loop(samples, list(loop), rc.lattice)) / n
            for desc, loop in rc.observables
        }
        _emit_estimates(fh, rc, eid, series, timings, t0)
        if rc.params.admissible:
            for desc, loop in rc.observables:
                word = list(loop)
                if len(word) < 4:
                    continue
                rep = variance_bound_check(samples, word, rc.lattice, rc.params)
                failures += rep.verdict == "FAIL"
                append_record(
                    fh,
                    make_record(
                        "bound_check", eid, _jsonable_config(rc), loop=_loop_name(desc), report=rep,
                        wall_clock=(time.time() - t0) if timings else None,
                    ),
                )
            for rep in susceptibility_sums(samples, rc.lattice, rc.params):
                failures += rep.verdict == "FAIL"
                append_record(
                    fh,
                    make_record(
                        "bound_check", eid, _jsonable_config(rc), loop=None, report=rep,
                        wall_clock=(time.time() - t0) if timings else None,
                    ),
                )
            if rc.lattice.L >= 4:
                dec = covariance_decay(samples, rc.lattice)
                failures += dec.verdict == "FAIL"
                append_record(
                    fh,
                    make_record(
                        "decay_check", eid, _jsonable_config(rc), report=dec,
                        wall_clock=(time.time() - t0) if timings else None,
                    ),
                )
        else:
            append_record(
                fh,
                make_record(
                    "note",
                    eid,
                    _jsonable_config(rc),
                    message=(
                        f"bound checks skipped: beta = {rc.params.beta} is not "
                        f"admissible (threshold {rc.params.beta_threshold:.8g})"
                    ),
                    wall_clock=None,
                ),
            )
    finally:
        if closeable:
            closeable.close()
    print(f"measure run complete in {time.time() - t0:.1f}s", file=sys.stderr)
    return EXIT_CHECK_FAILURE if failures else EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latticeym",
        description="Lattice gauge Langevin simulator and verification suite",
    )
    parser.add_argument(
        "--print-config",
        action="store_true",
        help="print the full default configuration and exit",
    )
    sub = parser.add_subparsers(dest="command")
    for name, help_text in (
        ("verify", "run the deterministic self-check suite"),
        ("langevin", "integrate the Langevin dynamics and record observables"),
        ("gibbs", "sample the Gibbs measure by Metropolis and record observables"),
        ("couple", "run the synchronous-coupling contraction experiment"),
        ("measure", "sample, estimate observables, and test quantitative bounds"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="TOML configuration file")
        p.add_argument("--seed", type=int, help="override experiment.seed")
        p.add_argument("--output", help="override experiment.output")
        p.add_argument("--threads", type=int, help="cap BLAS thread count")
        p.add_argument(
            "--timings",
            action="store_true",
            help="embed wall-clock in records (breaks byte-identical reruns)",
        )
        p.add_argument(
            "--print-config",
            action="store_true",
            help="print the full default configuration and exit",
        )
    return parser


def _load(args) -> RunConfig:
    rc = load_config(args.config) if args.config else parse_config({})
    overrides: dict = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.output is not None:
        overrides["output"] = args.output
    overrides["kind"] = args.command
    raw = dict(rc.raw)
    raw["experiment"] = {
        k: v
        for k, v in {**rc.raw["experiment"], **overrides}.items()
        if k not in ("admissible", "beta_threshold")
    }
    return parse_config(raw)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.print_config:
        sys.stdout.write(default_config_text())
        return EXIT_OK
    if args.command is None:
        _build_parser().print_help()
        return EXIT_CONFIG_ERROR
    if args.command != "verify" and args.threads:
        for var in (
            "OMP_NUM_THREADS",
            "OPENBLAS_NUM_THREADS",
            "MKL_NUM_THREADS",
        ):
            os.environ[var] = str(args.threads)
    try:
        rc = _load(args)
    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    if args.command == "verify":
        return _verify.run_checks()
    handler = {
        "langevin": _cmd_langevin,
        "gibbs": _cmd_gibbs,
        "couple": _cmd_couple,
        "measure": _cmd_measure,
    }[args.command]
    return handler(rc, args.timings)


if __name__ == "__main__":
    sys.exit(main())
