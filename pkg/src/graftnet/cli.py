"""Command-line surface.

Subcommands: ``train`` (run a full experiment from a config file),
``graft-checkpoints`` (one-shot offline blend of two snapshot files),
``analyze`` (diagnostics JSON for a snapshot), ``report`` (aggregate a
training run's outputs into plot-ready CSV). All failures exit nonzero
with a single ``error:<category>: <message>`` line on stderr.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from .configfile import CIFAR10, DataConfig, parse_config
from .coordinator import THREADED, SEQUENTIAL, run_experiment
from .criteria import BinningConfig
from .data import load_cifar10, make_synthetic
from .diagnostics import DEFAULT_THRESHOLDS, build_report, invalid_location_iou, invalid_ratio
from .errors import GraftnetError
from .grafting import graft_external_pair
from .model import ArchSpec
from .snapshot_io import read_snapshot, write_snapshot

HISTORY_CSV = "history.csv"
ALPHAS_JSON = "alphas.json"
HISTORY_HEADER = "epoch,worker,loss,accuracy,network_information"


def _datasets(arch: ArchSpec, data_cfg: DataConfig):
    if data_cfg.source == CIFAR10:
        train = load_cifar10(list(data_cfg.cifar_train_files), seed=data_cfg.seed)
        test = load_cifar10(list(data_cfg.cifar_test_files), seed=data_cfg.seed)
        return train, test
    train = make_synthetic(
        arch.class_count,
        data_cfg.n_per_class,
        data_cfg.height,
        data_cfg.width,
        data_cfg.seed,
        noise_level=data_cfg.noise_level,
    )
    test = make_synthetic(
        arch.class_count,
        data_cfg.test_n_per_class,
        data_cfg.height,
        data_cfg.width,
        data_cfg.seed + 1,
        noise_level=data_cfg.noise_level,
    )
    return train, test


def _config_hash(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _cmd_train(args) -> int:
    cfg_path = Path(args.config)
    run = parse_config(cfg_path.read_text())
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    train_data, test_data = _datasets(run.experiment.arch, run.data)
    snapshots, history = run_experiment(run.experiment, train_data, test_data, mode=args.mode)

    lines = [HISTORY_HEADER]
    for rec in history:
        lines.append(
            f"{rec.epoch},{rec.worker_id},{rec.train_loss!r},"
            f"{rec.test_accuracy!r},{rec.network_information!r}"
        )
    (out_dir / HISTORY_CSV).write_text("\n".join(lines) + "\n")

    decisions = [
        {
            "epoch": rec.epoch,
            "worker": rec.worker_id,
            "layer": d.layer_name,
            "h_self": d.h_self,
            "h_peer": d.h_peer,
            "alpha": d.alpha,
        }
        for rec in history
        for d in rec.alphas
    ]
    (out_dir / ALPHAS_JSON).write_text(
        json.dumps({"config_hash": _config_hash(cfg_path), "decisions": decisions},
                   sort_keys=True, indent=2)
        + "\n"
    )
    for i, snap in enumerate(snapshots):
        write_snapshot(snap, out_dir / f"worker{i}.gsnap")
    print(f"wrote {len(snapshots)} snapshots and {HISTORY_CSV} to {out_dir}")
    return 0


def _cmd_graft_checkpoints(args) -> int:
    run = parse_config(Path(args.config).read_text())
    own = read_snapshot(args.self_snapshot)
    peer = read_snapshot(args.peer)
    grafted, decisions = graft_external_pair(
        own, peer, run.experiment.graft, run.experiment.binning
    )
    write_snapshot(grafted, args.out)
    for d in decisions:
        print(f"{d.layer_name}: h_self={d.h_self!r} h_peer={d.h_peer!r} alpha={d.alpha!r}")
    return 0


def _cmd_analyze(args) -> int:
    model = read_snapshot(args.snapshot)
    if args.config is not None:
        run = parse_config(Path(args.config).read_text())
        binning = run.experiment.binning
        metadata = {"config_hash": _config_hash(Path(args.config))}
    else:
        binning = BinningConfig()
        metadata = {}
    report = build_report(model, binning, DEFAULT_THRESHOLDS, metadata=metadata)
    doc = report.to_json_dict()
    if args.peer is not None:
        peer = read_snapshot(args.peer)
        doc["iou_invalid_locations"] = {
            "fraction": args.fraction,
            "per_conv_layer": invalid_location_iou(model, peer, args.fraction),
        }
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if args.out is not None:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_report(args) -> int:
    history_dir = Path(args.history)
    out_dir = Path(args.out_dir) if args.out_dir else history_dir
    out_dir.mkdir(parents=True, exist_ok=True)

    history_file = history_dir / HISTORY_CSV
    if not history_file.exists():
        raise GraftnetError(f"no {HISTORY_CSV} in {history_dir}")
    rows = history_file.read_text().splitlines()
    if not rows or rows[0] != HISTORY_HEADER:
        raise GraftnetError(f"{history_file}: unexpected header")
    info_lines = ["epoch,worker,network_information"]
    for row in rows[1:]:
        epoch, worker, _, _, info = row.split(",")
        info_lines.append(f"{epoch},{worker},{info}")
    (out_dir / "information.csv").write_text("\n".join(info_lines) + "\n")

    ratio_lines = ["threshold,worker,ratio"]
    snapshot_paths = sorted(history_dir.glob("worker*.gsnap"))
    ratios = []
    for path in snapshot_paths:
        model = read_snapshot(path)
        for t, r in invalid_ratio(model, DEFAULT_THRESHOLDS).items():
            ratios.append((t, model.worker_id, r))
    for t, worker, r in sorted(ratios):
        ratio_lines.append(f"{t!r},{worker},{r!r}")
    (out_dir / "invalid_ratio.csv").write_text("\n".join(ratio_lines) + "\n")
    print(f"wrote information.csv and invalid_ratio.csv to {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graftnet",
        description="Train parallel networks with filter grafting and analyze the results.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="run an experiment from a config file")
    p_train.add_argument("--config", required=True)
    p_train.add_argument("--out-dir", required=True)
    p_train.add_argument("--mode", choices=[THREADED, SEQUENTIAL], default=THREADED)
    p_train.set_defaults(func=_cmd_train)

    p_graft = sub.add_parser(
        "graft-checkpoints", help="blend one snapshot file with a peer (offline)"
    )
    p_graft.add_argument("--self", dest="self_snapshot", required=True)
    p_graft.add_argument("--peer", required=True)
    p_graft.add_argument("--config", required=True)
    p_graft.add_argument("--out", required=True)
    p_graft.set_defaults(func=_cmd_graft_checkpoints)

    p_analyze = sub.add_parser("analyze", help="emit diagnostics JSON for a snapshot")
    p_analyze.add_argument("--snapshot", required=True)
    p_analyze.add_argument("--peer", default=None)
    p_analyze.add_argument("--config", default=None)
    p_analyze.add_argument("--fraction", type=float, default=0.2)
    p_analyze.add_argument("--out", default=None)
    p_analyze.set_defaults(func=_cmd_analyze)

    p_report = sub.add_parser("report", help="aggregate a run directory into plot-ready CSV")
    p_report.add_argument("--history", required=True)
    p_report.add_argument("--out-dir", default=None)
    p_report.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GraftnetError as exc:
        print(f"error:{exc.category}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error:io: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
