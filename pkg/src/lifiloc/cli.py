"""Command-line pipeline: gen / train / eval / ber / bench.

Every command writes its artifacts plus a run manifest (JSON) under --out.
Exit codes: 2 = configuration/usage, 3 = IO or file format, 4 = numeric
failure.  Timestamps appear only in manifests, so artifact files are
byte-reproducible for identical inputs and seeds.  The environment variable
LIFI_THREADS caps dataset-generation worker parallelism.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .channel import FULL, LOS
from .config import load_config
from .dataset import load_dataset, generate_dataset, save_dataset, split
from .errors import ConfigError, DataFormatError, NumericsError
from .estimator import AnnEstimator, KnnEstimator, load_estimator
from .evaluation import (ber_curve, evaluate_estimator, format_report_grid,
                         timing_benchmark, write_ber_csv, write_cdf_csv)
from .nn.network import cnn_spec, mlp_spec
from .nn.training import TrainConfig, save_loss_curve

_FLAGS = {"los": LOS, "full": FULL}


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


class _Manifest:
    def __init__(self, command: str, args: argparse.Namespace, out_dir: str):
        self.data = {
            "command": command,
            "args": {k: v for k, v in vars(args).items() if k != "func"},
            "tool_version": __version__,
            "started_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            "artifacts": [],
            "inputs": {},
        }
        self.out_dir = out_dir
        os.makedirs(out_dir, exist_ok=True)

    def add_input(self, name: str, path: str):
        self.data["inputs"][name] = {"path": path, "sha256": _sha256(path)}

    def artifact(self, name: str) -> str:
        path = os.path.join(self.out_dir, name)
        self.data["artifacts"].append(name)
        return path

    def write(self):
        self.data["finished_utc"] = time.strftime("%Y-%m-%dT%H:%M:%SZ",
                                                  time.gmtime())
        with open(os.path.join(self.out_dir, "manifest.json"), "w") as fh:
            json.dump(self.data, fh, indent=2, sort_keys=True)
            fh.write("\n")


def cmd_gen(args):
    cfg = load_config(args.config)
    manifest = _Manifest("gen", args, args.out)
    manifest.add_input("config", args.config)
    ds = generate_dataset(cfg, args.n, _FLAGS[args.channel], seed=args.seed)
    save_dataset(ds, manifest.artifact("dataset.csv"))
    manifest.write()
    print(f"wrote {ds.meta['n']} records ({ds.meta['channel_flag']}) "
          f"to {args.out}/dataset.csv")


def _train_ann(arch, train_ds, val_ds, args):
    spec_fn = {"mlp": mlp_spec, "cnn": cnn_spec}[arch]
    spec = spec_fn(train_ds.n_aps, dropout=args.dropout)
    cfg = TrainConfig(epochs=args.epochs, batch_size=args.batch_size,
                      learning_rate=args.learning_rate, dropout=args.dropout,
                      seed=args.seed, dtype=args.dtype)
    return AnnEstimator.fit(spec, train_ds, val_ds, cfg)


def cmd_train(args):
    ds = load_dataset(args.dataset)
    manifest = _Manifest("train", args, args.out)
    manifest.add_input("dataset", args.dataset)
    if args.seed is None:
        args.seed = ds.meta.get("seed", 0)
    train_ds, val_ds, _ = split(ds)
    if args.model == "knn":
        if args.k is not None:
            model = KnnEstimator.fit(train_ds, k=args.k)
        else:
            model = KnnEstimator.fit_with_selection(train_ds, val_ds)
        history = []
    else:
        model, history = _train_ann(args.model, train_ds, val_ds, args)
    model.save(manifest.artifact("model.lifim"))
    if history:
        save_loss_curve(history, manifest.artifact("loss.csv"))
    manifest.write()
    note = f"k={model.k}" if args.model == "knn" else \
        f"final val loss {history[-1][2]:.4g}"
    print(f"trained {args.model} on {len(train_ds)} records ({note}); "
          f"model at {args.out}/model.lifim")


def _check_same_room(model, ds):
    m_hash, d_hash = model.extra.get("room_hash"), ds.meta.get("room_hash")
    if m_hash and d_hash and m_hash != d_hash:
        raise DataFormatError(
            f"model was trained in room {m_hash} but the dataset belongs to "
            f"room {d_hash}")


def cmd_eval(args):
    model = load_estimator(args.model)
    ds = load_dataset(args.dataset)
    _check_same_room(model, ds)
    manifest = _Manifest("eval", args, args.out)
    manifest.add_input("model", args.model)
    manifest.add_input("dataset", args.dataset)
    _, _, test_ds = split(ds)
    report = evaluate_estimator(model, test_ds)
    key = (model.kind, ds.meta.get("channel_flag", "?"))
    with open(manifest.artifact("report.txt"), "w") as fh:
        fh.write(format_report_grid({key: report}))
    write_cdf_csv(report.position_cm.errors,
                  manifest.artifact("cdf_position.csv"), "error_cm")
    for name in ("yaw", "pitch", "roll"):
        errors = getattr(report, f"{name}_deg").errors
        write_cdf_csv(errors, manifest.artifact(f"cdf_{name}.csv"), "error_deg")
    manifest.write()
    print(format_report_grid({key: report}), end="")


def _parse_grid(text: str) -> np.ndarray:
    if ":" in text:
        start, stop, count = text.split(":")
        return np.linspace(float(start), float(stop), int(count))
    return np.array([float(v) for v in text.split(",")])


def cmd_ber(args):
    model = load_estimator(args.model)
    ds = load_dataset(args.dataset)
    cfg = load_config(args.config)
    _check_same_room(model, ds)
    if ds.meta.get("room_hash") not in (None, cfg.room_hash()):
        raise DataFormatError("config room differs from the dataset's room")
    manifest = _Manifest("ber", args, args.out)
    for name, path in (("model", args.model), ("dataset", args.dataset),
                       ("config", args.config)):
        manifest.add_input(name, path)
    _, _, test_ds = split(ds)
    rows = ber_curve(model, test_ds, cfg, _parse_grid(args.snr_grid))
    write_ber_csv(rows, manifest.artifact("ber.csv"))
    manifest.write()
    print(f"BER curve over {len(rows)} SNR points -> {args.out}/ber.csv")


def cmd_bench(args):
    model = load_estimator(args.model)
    ds = load_dataset(args.dataset)
    _check_same_room(model, ds)
    manifest = _Manifest("bench", args, args.out)
    manifest.add_input("model", args.model)
    manifest.add_input("dataset", args.dataset)
    queries = ds.features[:args.queries]
    if len(queries) < 1000:
        raise ConfigError("need at least 1000 queries for stable timing")
    offline_ms, online_ms = timing_benchmark(model, queries)
    text = (f"kind = {model.kind}\n"
            f"stored/trained points = {model.extra.get('n_train', '?')}\n"
            f"offline ms/point = {offline_ms:.6g}\n"
            f"online ms/point = {online_ms:.6g}\n")
    with open(manifest.artifact("timing.txt"), "w") as fh:
        fh.write(text)
    manifest.write()
    print(text, end="")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lifiloc",
        description="Indoor LiFi SNR-fingerprint localization pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a fingerprint dataset")
    p.add_argument("--config", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--channel", choices=sorted(_FLAGS), default="full")
    p.add_argument("--seed", type=int, default=None,
                   help="override the config seed")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", help="fit an estimator on a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--model", choices=("mlp", "cnn", "knn"), required=True)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--batch-size", type=int, default=128)
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--dropout", type=float, default=0.2)
    p.add_argument("--dtype", choices=("float32", "float64"), default="float32")
    p.add_argument("--seed", type=int, default=None,
                   help="training seed (defaults to the dataset seed)")
    p.add_argument("--k", type=int, default=None,
                   help="fix k for knn instead of validation selection")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="error report + CDFs on the held-out split")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ber", help="downlink OOK BER vs average received SNR")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--snr-grid", default="0:30:16",
                   help="dB grid: 'start:stop:count' or comma list")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ber)

    p = sub.add_parser("bench", help="offline/online latency per data point")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--queries", type=int, default=2000)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (OSError, DataFormatError) as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3
    except NumericsError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
