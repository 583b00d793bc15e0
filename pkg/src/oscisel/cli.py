"""Command-line entry point.

Subcommands: derive, run, probe, verify, gen-data, report. Exit status is 0
on success, 1 on usage errors (bad flags, missing files, invalid configs),
2 on runtime errors. All randomness comes from the config seed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import data as data_mod
from .config import SCHEMA_VERSION, LoadedConfig, load_config
from .errors import (
    ConfigError,
    FormatError,
    InfeasibleScheduleError,
    ParameterDomainError,
)
from .regprobe import estimate_r, full_batch, verify_one_step_expansion
from .schedule import RatioTrajectory, derive_params
from .trainer import build_datasets, build_model, make_trajectory, run_training


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); we want exit 1
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="oscisel", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("derive", help="derive oscillation parameters")
    p.add_argument("--target-ratio", type=float, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--epochs", type=int, default=None)

    p = sub.add_parser("run", help="train under a budgeted schedule")
    p.add_argument("--config", required=True)

    p = sub.add_parser("probe", help="estimate R over saved training snapshots")
    p.add_argument("--config", required=True)
    p.add_argument("--p", required=True, help="comma-separated ratios")

    p = sub.add_parser("verify", help="Monte-Carlo check of the one-step expansion")
    p.add_argument("--config", required=True)
    p.add_argument("--p", required=True, help="comma-separated ratios")
    p.add_argument("--trials", type=int, default=10000)

    p = sub.add_parser("gen-data", help="write a generated dataset to disk")
    p.add_argument("--kind", required=True,
                   choices=["two_moons", "blobs", "gauss_linear"])
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-train", type=int, default=1000)
    p.add_argument("--n-test", type=int, default=500)
    p.add_argument("--noise", type=float, default=0.2)
    p.add_argument("--label-noise", type=float, default=0.0)
    p.add_argument("--classes", type=int, default=2)
    p.add_argument("--per-class", type=int, default=100)
    p.add_argument("--d-in", type=int, default=2)
    p.add_argument("--spread", type=float, default=0.2)

    p = sub.add_parser("report", help="aggregate completed runs into a CSV table")
    p.add_argument("--in", dest="in_dirs", nargs="+", required=True)

    return parser


def _parse_ratio_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise _UsageError(f"bad ratio list {text!r}") from exc


def _json_line(record: dict) -> str:
    return json.dumps(record, sort_keys=False) + "\n"


def _cmd_derive(args) -> int:
    params = derive_params(args.target_ratio, args.epsilon)
    print(
        f"target_ratio={params.target_ratio} margin={params.margin} "
        f"p_low={params.p_low} p_high={params.p_high} "
        f"k={params.k} period={params.period}"
    )
    if args.epochs is not None:
        traj = RatioTrajectory(params=params, total_epochs=args.epochs)
        print(",".join(repr(r) for r in traj.ratios()))
    return 0


def _write_run_outputs(loaded: LoadedConfig, result, wall_time: float) -> None:
    out = loaded.out_dir
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "metrics.jsonl", "w") as f:
        for m in result.metrics:
            f.write(_json_line(m.to_record()))
    summary = dict(result.ledger.summary())
    summary.update(
        {
            "schema_version": SCHEMA_VERSION,
            "name": loaded.name,
            "seed": loaded.run.seed,
            "wall_time_s": wall_time,
        }
    )
    with open(out / "summary.json", "w") as f:
        json.dump(summary, f, indent=2)
        f.write("\n")
    np.save(out / "final_theta.npy", result.final_state.theta)


def _cmd_run(args) -> int:
    loaded = load_config(args.config)
    start = time.monotonic()
    result = run_training(loaded.run)
    _write_run_outputs(loaded, result, time.monotonic() - start)
    final = result.metrics[-1]
    print(
        f"run complete: {loaded.out_dir} "
        f"realized_ratio={result.ledger.summary()['realized_ratio']:.4f} "
        f"test_accuracy={final.test_accuracy}"
    )
    return 0


def _cmd_probe(args) -> int:
    loaded = load_config(args.config)
    ratios = _parse_ratio_list(args.p)
    cfg = loaded.run
    if cfg.probe_every == 0:
        from dataclasses import replace

        cfg = replace(cfg, probe_every=1)
    result = run_training(cfg)
    train, _ = build_datasets(cfg)
    batch = full_batch(train)
    from .models import ModelState

    loaded.out_dir.mkdir(parents=True, exist_ok=True)
    with open(loaded.out_dir / "regprobe.jsonl", "w") as f:
        for p in ratios:
            for epoch, theta in result.snapshots:
                est = estimate_r(
                    ModelState(result.final_state.arch, theta),
                    batch, p, cfg.learning_rate, seed=cfg.seed,
                )
                f.write(
                    _json_line(
                        {
                            "p": p, "epoch": epoch, "trace_HC": est.trace_hc,
                            "lambda": est.lam, "R": est.value,
                            "probes": est.probes, "seed": est.seed,
                        }
                    )
                )
    print(f"probe complete: {loaded.out_dir / 'regprobe.jsonl'}")
    return 0


def _cmd_verify(args) -> int:
    loaded = load_config(args.config)
    ratios = _parse_ratio_list(args.p)
    cfg = loaded.run
    train, _ = build_datasets(cfg)
    state = build_model(cfg, train)
    batch = full_batch(train)
    loaded.out_dir.mkdir(parents=True, exist_ok=True)
    with open(loaded.out_dir / "regprobe.jsonl", "w") as f:
        for p in ratios:
            report = verify_one_step_expansion(
                state, batch, p, cfg.learning_rate, args.trials, seed=cfg.seed
            )
            report.pop("trial_losses")
            f.write(_json_line({"epoch": 0, **report}))
            print(
                f"p={p}: mc_mean={report['mc_mean']:.8g} "
                f"prediction={report['prediction']:.8g} "
                f"gap_in_se={report['gap_in_se']:.2f}"
            )
    return 0


def _cmd_gen_data(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    from .rng import subseed

    if args.kind == "two_moons":
        train = data_mod.gen_two_moons(
            args.n_train, args.noise, subseed(args.seed, "data.train"), "train"
        )
        test = data_mod.gen_two_moons(
            args.n_test, args.noise, subseed(args.seed, "data.test"), "test"
        )
    elif args.kind == "blobs":
        train = data_mod.gen_blobs(
            args.classes, args.per_class, args.d_in, args.spread,
            subseed(args.seed, "data.train"), "train",
        )
        test = data_mod.gen_blobs(
            args.classes, args.per_class, args.d_in, args.spread,
            subseed(args.seed, "data.test"), "test",
        )
    else:
        train = data_mod.gen_gauss_linear(
            args.n_train, args.d_in, args.noise,
            subseed(args.seed, "data.train"), "train",
        )
        test = data_mod.gen_gauss_linear(
            args.n_test, args.d_in, args.noise,
            subseed(args.seed, "data.test"), "test",
        )
    if args.label_noise > 0.0:
        train = data_mod.inject_label_noise(
            train, args.label_noise, subseed(args.seed, "data.noise")
        )
    data_mod.save_osds(train, out / "train.osds")
    data_mod.save_osds(test, out / "test.osds")
    print(f"wrote {out / 'train.osds'} ({train.n} rows), "
          f"{out / 'test.osds'} ({test.n} rows)")
    return 0


def _load_run_dir(run_dir: Path) -> dict:
    with open(run_dir / "summary.json") as f:
        summary = json.load(f)
    if summary.get("schema_version") != SCHEMA_VERSION:
        raise FormatError(
            f"{run_dir}: schema_version {summary.get('schema_version')!r} "
            f"does not match {SCHEMA_VERSION!r}"
        )
    final_acc = None
    with open(run_dir / "metrics.jsonl") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(
                    f"{run_dir / 'metrics.jsonl'}:{lineno}: parse error: {exc}"
                ) from exc
            if record.get("test_accuracy") is not None:
                final_acc = record["test_accuracy"]
    return {
        "name": summary.get("name", run_dir.name),
        "final_accuracy": final_acc,
        "realized_ratio": summary["realized_ratio"],
        "wall_time_s": summary.get("wall_time_s", 0.0),
    }


def _cmd_report(args) -> int:
    run_dirs = []
    for d in args.in_dirs:
        d = Path(d)
        if (d / "summary.json").exists():
            run_dirs.append(d)
        else:
            run_dirs.extend(
                sorted(p.parent for p in d.glob("*/summary.json"))
            )
    if not run_dirs:
        raise _UsageError(f"no completed runs under {args.in_dirs}")
    groups: dict[str, list[dict]] = {}
    for run_dir in run_dirs:
        row = _load_run_dir(run_dir)
        groups.setdefault(row["name"], []).append(row)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(
        ["name", "runs", "test_accuracy_mean", "test_accuracy_std",
         "realized_ratio_mean", "wall_time_s_mean"]
    )
    for name in sorted(groups):
        rows = groups[name]
        accs = [r["final_accuracy"] for r in rows if r["final_accuracy"] is not None]
        acc_mean = float(np.mean(accs)) if accs else float("nan")
        acc_std = float(np.std(accs, ddof=1)) if len(accs) > 1 else 0.0
        writer.writerow(
            [
                name, len(rows), f"{acc_mean:.6f}", f"{acc_std:.6f}",
                f"{float(np.mean([r['realized_ratio'] for r in rows])):.6f}",
                f"{float(np.mean([r['wall_time_s'] for r in rows])):.3f}",
            ]
        )
    sys.stdout.write(buf.getvalue())
    return 0


_COMMANDS = {
    "derive": _cmd_derive,
    "run": _cmd_run,
    "probe": _cmd_probe,
    "verify": _cmd_verify,
    "gen-data": _cmd_gen_data,
    "report": _cmd_report,
}

_USAGE_ERRORS = (
    _UsageError,
    FileNotFoundError,
    ConfigError,
    ParameterDomainError,
    InfeasibleScheduleError,
)


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
