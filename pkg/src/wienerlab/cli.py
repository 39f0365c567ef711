"""Command-line surface: five experiment subcommands plus pairwise tools.

    wienerlab <filter|loss|recover|diffuse|knn|train> [--config <ini>]
              [--out <dir>] [--seed <int>] [--threads <n>] ...

Outputs land in --out (used verbatim) or a timestamped directory under
./runs. Every run directory receives the effective config; re-running with
the same config and seed reproduces all numeric outputs bit for bit (the
directory name is the only thing that varies). Exit codes: 0 ok, 2 config
error, 3 data/format error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig, load_config
from .dataio import ingest_idx, read_idx_images, read_pgm, save_model, write_csv, write_pgm
from .datasets import make_digit_set, two_cluster_latents
from .diffusion import EnergyModel, Schedule, cosine_schedule, nearest_defining_sample, run_diffusion
from .errors import ConfigError, FormatError, NumericalError, ShapeError, WienerlabError
from .gradients import grad_wiener_loss
from .knn import DistanceSpec, LabeledSet, evaluate_accuracy, make_translated_set
from .metrics import compute_metrics, psnr
from .spectral import LagGrid, Signal, WindowSpec, make_window
from .trainer import DenseAutoencoder, TrainConfig, TrainingDivergedError, train
from .wiener import WienerConfig, concentration, ti_distance, wiener_filter, wiener_loss

__all__ = ["main"]


def _jsonable(obj):
    if isinstance(obj, float):
        return "inf" if obj == float("inf") else obj
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return _jsonable(float(obj))
    return obj


def _write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


def _make_run_dir(args, name: str) -> Path:
    if args.out:
        run_dir = Path(args.out)
    else:
        stamp = time.strftime("%Y%m%d-%H%M%S")
        run_dir = Path("runs") / f"{name}-{stamp}"
        n = 1
        while run_dir.exists():
            run_dir = Path("runs") / f"{name}-{stamp}-{n}"
            n += 1
    run_dir.mkdir(parents=True, exist_ok=True)
    return run_dir


def _echo_config(run_dir: Path, cfg: ExperimentConfig) -> None:
    (run_dir / "config.ini").write_text(cfg.to_ini())


def _whitening(cfg: ExperimentConfig, shape) -> tuple:
    grid = LagGrid(tuple(2 * n for n in shape))
    return make_window(cfg.window.spec(), grid), grid


# ---------------------------------------------------------------- filter


def _cmd_filter(args, cfg: ExperimentConfig) -> int:
    target = read_pgm(args.image_a)
    source = read_pgm(args.image_b)
    wcfg = WienerConfig(lam=cfg.wiener.lam, direction=cfg.wiener.direction)
    v = wiener_filter(target, source, wcfg)

    run_dir = _make_run_dir(args, "filter")
    _echo_config(run_dir, cfg)
    plane = v.data[0]
    lo, hi = float(plane.min()), float(plane.max())
    scale = hi - lo if hi > lo else 1.0
    write_pgm(run_dir / "filter.pgm", Signal.from_array((plane - lo) / scale))

    center = v.grid.zero_lag_index
    argmax = np.unravel_index(int(np.argmax(plane)), plane.shape)
    report = {
        "zero_lag_value": float(v.zero_lag_values()[0]),
        "concentration": concentration(v),
        "argmax_lag": [int(a - c) for a, c in zip(argmax, center)],
        "normalization": {"min": lo, "max": hi},
        "lambda": cfg.wiener.lam,
    }
    _write_json(run_dir / "filter.json", report)
    print(f"filter written to {run_dir} (concentration {report['concentration']:.4f})")
    return 0


# ---------------------------------------------------------------- loss


def _cmd_loss(args, cfg: ExperimentConfig) -> int:
    prediction = read_pgm(args.image_a)
    target = read_pgm(args.image_b)
    wcfg = WienerConfig(lam=cfg.wiener.lam, direction=cfg.wiener.direction)
    whitening, _ = _whitening(cfg, prediction.shape)

    run_dir = _make_run_dir(args, "loss")
    _echo_config(run_dir, cfg)
    v = wiener_filter(prediction, target, wcfg)
    report = {
        "wiener_loss": wiener_loss(prediction, target, whitening, wcfg),
        "ti_distance": ti_distance(prediction, target, wcfg),
        "filter_concentration": concentration(v),
        "metrics": compute_metrics(prediction, target).to_jsonable()["aggregate"],
    }
    _write_json(run_dir / "loss.json", report)
    print(f"loss report written to {run_dir} (wiener_loss {report['wiener_loss']:.6g})")
    return 0


# ---------------------------------------------------------------- recover


def _stride_mask(shape, stride: int) -> np.ndarray:
    if stride < 1:
        raise ConfigError(f"mask stride must be >= 1, got {stride}")
    rows = np.arange(shape[0]) % stride == 0
    cols = np.arange(shape[1]) % stride == 0
    return np.outer(rows, cols).astype(float)


def _mask_aware_mean_fill(masked: np.ndarray, mask: np.ndarray, stride: int) -> np.ndarray:
    """Fill unobserved pixels with the mean of kept pixels in a local window."""
    h, w = masked.shape
    r = stride
    filled = masked.copy()
    for i in range(h):
        for j in range(w):
            if mask[i, j]:
                continue
            i0, i1 = max(0, i - r), min(h, i + r + 1)
            j0, j1 = max(0, j - r), min(w, j + r + 1)
            block = masked[i0:i1, j0:j1]
            weights = mask[i0:i1, j0:j1]
            total = weights.sum()
            filled[i, j] = (block * weights).sum() / total if total > 0 else 0.0
    return filled


def _cmd_recover(args, cfg: ExperimentConfig) -> int:
    target = read_pgm(args.image)
    if len(target.shape) != 2:
        raise ShapeError("recover expects a 2-d image")
    plane = target.plane()
    if plane.max() > plane.min():  # min-max rescale so the target spans [0, 1]
        target = Signal.from_array((plane - plane.min()) / (plane.max() - plane.min()))
    rc = cfg.recover
    wcfg = WienerConfig(lam=cfg.wiener.lam)
    whitening, _ = _whitening(cfg, target.shape)

    mask = _stride_mask(target.shape, rc.stride)
    masked_plane = target.plane() * mask
    masked = Signal.from_array(masked_plane)
    baseline = Signal.from_array(_mask_aware_mean_fill(masked_plane, mask, rc.stride))

    step = rc.step_size
    if step <= 0:
        step = 0.5 if rc.loss == "mse" else 2.0

    run_dir = _make_run_dir(args, "recover")
    _echo_config(run_dir, cfg)

    x = masked_plane.copy()
    curve = []
    for it in range(rc.iterations):
        sig = Signal.from_array(x)
        if rc.loss == "mse":
            diff = x - target.plane()
            loss_val = 0.5 * float(np.sum(diff**2))
            grad = diff
        else:
            res = grad_wiener_loss(sig, target, whitening, wcfg)
            loss_val = res.value
            grad = res.grad.plane()
        if not np.isfinite(loss_val):
            write_pgm(run_dir / "recovered.pgm", Signal.from_array(np.clip(x, 0, 1)))
            raise NumericalError(f"recovery diverged at iteration {it} (last iterate saved)")
        if it % rc.log_every == 0:
            curve.append((it, loss_val))
        x = x - step * grad
    recovered = Signal.from_array(np.clip(x, 0.0, 1.0))

    write_csv(run_dir / "loss_curve.csv", ["iteration", "loss"], curve)
    write_pgm(run_dir / "masked.pgm", masked)
    write_pgm(run_dir / "baseline.pgm", baseline)
    write_pgm(run_dir / "recovered.pgm", recovered)
    report = {
        "loss": rc.loss,
        "stride": rc.stride,
        "iterations": rc.iterations,
        "step_size": step,
        "psnr_masked": psnr(masked, target),
        "psnr_baseline": psnr(baseline, target),
        "psnr_recovered": psnr(recovered, target),
        "final_loss": curve[-1][1] if curve else None,
    }
    _write_json(run_dir / "recover.json", report)
    print(
        f"recover: psnr masked {report['psnr_masked']:.2f} -> recovered "
        f"{report['psnr_recovered']:.2f} ({run_dir})"
    )
    return 0


# ---------------------------------------------------------------- diffuse


def _defining_set(cfg: ExperimentConfig) -> tuple[list[Signal], list[int] | None]:
    d = cfg.diffusion
    if d.dataset == "toy":
        samples, ids = two_cluster_latents(
            d.n_defining, dim=d.dim, separation=d.separation, spread=d.spread, seed=d.data_seed
        )
        return samples, ids
    if d.dataset == "digits":
        base = make_digit_set(d.n_defining, size=8, seed=d.data_seed)
        return base.signals, None
    images = read_idx_images(d.dataset)
    return [Signal.from_array(img) for img in images[: d.n_defining]], None


def _cmd_diffuse(args, cfg: ExperimentConfig) -> int:
    d = cfg.diffusion
    samples, _ = _defining_set(cfg)
    padded = tuple(2 * n for n in samples[0].shape)
    penalty = make_window(WindowSpec(d.penalty_family, d.penalty_b), LagGrid(padded))
    model = EnergyModel(samples, penalty, d.gamma, WienerConfig(lam=cfg.wiener.lam))
    schedule = Schedule(
        cosine_schedule(d.T, d.alpha_start, d.alpha_end),
        cosine_schedule(d.T, d.beta_start, d.beta_end),
    )

    run_dir = _make_run_dir(args, "diffuse")
    _echo_config(run_dir, cfg)
    trajectories = run_diffusion(
        model,
        schedule,
        d.n_samples,
        d.init_variance,
        d.seed,
        snapshot_stride=d.snapshot_stride,
        k_nearest=d.k_nearest,
    )

    rows = []
    for c, traj in enumerate(trajectories):
        for t, (e, conc) in enumerate(zip(traj.energies, traj.concentrations)):
            rows.append((c, t, float(e), float(conc)))
    write_csv(run_dir / "trajectory.csv", ["chain", "step", "energy", "concentration"], rows)

    if len(samples[0].shape) == 2:
        _write_sample_grids(run_dir, trajectories)
    else:
        sample_rows = []
        for c, traj in enumerate(trajectories):
            for step, sig in zip(traj.snapshot_steps, traj.samples):
                sample_rows.append((c, step) + tuple(float(v) for v in sig.data))
        dim = samples[0].data.size
        write_csv(
            run_dir / "samples.csv",
            ["chain", "step"] + [f"x{i}" for i in range(dim)],
            sample_rows,
        )

    e0 = float(np.mean([t.energies[0] for t in trajectories]))
    eT = float(np.mean([t.energies[-1] for t in trajectories]))
    c0 = float(np.mean([t.concentrations[0] for t in trajectories]))
    cT = float(np.mean([t.concentrations[-1] for t in trajectories]))
    nearest = [nearest_defining_sample(t.final, model) for t in trajectories]
    report = {
        "n_chains": d.n_samples,
        "steps": d.T,
        "mean_energy_initial": e0,
        "mean_energy_final": eT,
        "mean_concentration_initial": c0,
        "mean_concentration_final": cT,
        "nearest_sample_counts": np.bincount(
            [i for i, _ in nearest], minlength=len(samples)
        ).tolist(),
        "mean_distance_to_nearest": float(np.mean([dist for _, dist in nearest])),
    }
    _write_json(run_dir / "diffuse.json", report)
    print(
        f"diffuse: energy {e0:.3f} -> {eT:.3f}, concentration {c0:.3f} -> {cT:.3f} ({run_dir})"
    )
    return 0


def _write_sample_grids(run_dir: Path, trajectories) -> None:
    """One tiled image per snapshot step: chains left to right, row-major."""
    n = len(trajectories)
    cols = int(np.ceil(np.sqrt(n)))
    rows = int(np.ceil(n / cols))
    steps = trajectories[0].snapshot_steps
    h, w = trajectories[0].samples[0].shape
    for si, step in enumerate(steps):
        grid = np.zeros((rows * (h + 1) - 1, cols * (w + 1) - 1))
        for c, traj in enumerate(trajectories):
            r, q = divmod(c, cols)
            plane = np.clip(traj.samples[si].plane(), 0.0, 1.0)
            grid[r * (h + 1) : r * (h + 1) + h, q * (w + 1) : q * (w + 1) + w] = plane
        write_pgm(run_dir / f"samples_step{step:05d}.pgm", Signal.from_array(grid))


# ---------------------------------------------------------------- knn


def _knn_sets(cfg: ExperimentConfig) -> tuple[LabeledSet, LabeledSet]:
    k = cfg.knn
    if k.data_images:
        full = ingest_idx(k.data_images, k.data_labels or None)
        if len(full) < k.n_train + k.n_test:
            raise ConfigError(
                f"dataset has {len(full)} samples, need n_train+n_test = {k.n_train + k.n_test}"
            )
        base_train = LabeledSet(full.signals[: k.n_train], full.labels[: k.n_train])
        base_test = LabeledSet(
            full.signals[k.n_train : k.n_train + k.n_test],
            full.labels[k.n_train : k.n_train + k.n_test],
        )
    else:
        base_train = make_digit_set(k.n_train, size=k.digit_size, seed=k.train_seed)
        base_test = make_digit_set(k.n_test, size=k.digit_size, seed=k.test_seed)
    train_set = make_translated_set(base_train, 0, k.pad, seed=1)
    test_set = make_translated_set(base_test, k.max_shift, k.pad, seed=k.shift_seed)
    return train_set, test_set


def _cmd_knn(args, cfg: ExperimentConfig) -> int:
    k = cfg.knn
    train_set, test_set = _knn_sets(cfg)
    run_dir = _make_run_dir(args, "knn")
    _echo_config(run_dir, cfg)

    baseline = evaluate_accuracy(train_set, test_set, k.baseline_k, DistanceSpec("manhattan"))
    ti = evaluate_accuracy(
        train_set, test_set, k.k, DistanceSpec("wiener_ti", WienerConfig(lam=k.lam))
    )
    report = {
        "n_train": len(train_set),
        "n_test": len(test_set),
        "max_shift": k.max_shift,
        "pad": k.pad,
        "baseline": {
            "distance": "manhattan",
            "k": k.baseline_k,
            "accuracy": baseline.accuracy,
            "confusion": baseline.confusion,
        },
        "wiener_ti": {
            "distance": "wiener_ti",
            "k": k.k,
            "lambda": k.lam,
            "accuracy": ti.accuracy,
            "confusion": ti.confusion,
        },
        "gap": ti.accuracy - baseline.accuracy,
    }
    _write_json(run_dir / "knn.json", report)
    print(
        f"knn: manhattan {baseline.accuracy:.3f} vs translation-invariant {ti.accuracy:.3f} "
        f"(gap {report['gap']:+.3f}) ({run_dir})"
    )
    return 0


# ---------------------------------------------------------------- train


def _train_data(cfg: ExperimentConfig) -> list[Signal]:
    t = cfg.train
    if t.data_images:
        base = ingest_idx(t.data_images, t.data_labels or None)
        return base.signals[: t.n_train]
    return make_digit_set(t.n_train, size=t.digit_size, seed=t.data_seed).signals


def _cmd_train(args, cfg: ExperimentConfig) -> int:
    t = cfg.train
    if args.loss:
        t = replace(t, loss=args.loss)
    if args.epochs is not None:
        t = replace(t, epochs=args.epochs)
    cfg = replace(cfg, train=t)

    data = _train_data(cfg)
    model = DenseAutoencoder.initialize(t.width_tuple(), activation=t.activation, seed=t.seed)
    tcfg = TrainConfig(
        loss=t.loss,
        batch_size=t.batch_size,
        learning_rate=t.learning_rate,
        epochs=t.epochs,
        beta1=t.beta1,
        beta2=t.beta2,
        eps=t.eps,
        whitening=cfg.window.spec(),
        lam=t.lam,
        seed=t.seed,
    )
    run_dir = _make_run_dir(args, "train")
    _echo_config(run_dir, cfg)
    try:
        log = train(model, data, tcfg)
    except TrainingDivergedError as exc:
        write_csv(
            run_dir / "train_log.csv",
            ["epoch", "loss", "concentration"],
            [(i, l, c) for i, (l, c) in enumerate(zip(exc.log.losses, exc.log.concentrations))],
        )
        raise
    save_model(run_dir / "model.wnae", model)
    write_csv(
        run_dir / "train_log.csv",
        ["epoch", "loss", "concentration"],
        [(i, l, c) for i, (l, c) in enumerate(zip(log.losses, log.concentrations))],
    )
    report = {
        "loss": t.loss,
        "epochs": t.epochs,
        "n_train": len(data),
        "final_loss": log.losses[-1] if log.losses else None,
        "initial_concentration": log.initial_concentration,
        "final_concentration": log.concentrations[-1] if log.concentrations else None,
    }
    _write_json(run_dir / "train.json", report)
    final = f"{log.losses[-1]:.6g}" if log.losses else "n/a"
    print(f"train[{t.loss}]: final loss {final} ({run_dir})")
    return 0


# ---------------------------------------------------------------- main


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wienerlab",
        description="Full-lag matching-filter experiments: filters, losses, recovery, "
        "generation, classification, training.",
    )
    parser.add_argument("--version", action="version", version=f"wienerlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="INI config file")
        p.add_argument("--out", default=None, help="output directory (default: runs/<cmd>-<stamp>)")
        p.add_argument("--seed", type=int, default=None, help="override the experiment seed")
        p.add_argument(
            "--threads",
            type=int,
            default=None,
            help="worker cap (falls back to WIENERLAB_THREADS; compute is sequential either way)",
        )

    p = sub.add_parser("filter", help="matching filter between two images")
    p.add_argument("image_a", help="target image (PGM)")
    p.add_argument("image_b", help="source image (PGM)")
    common(p)

    p = sub.add_parser("loss", help="loss and distance report between two images")
    p.add_argument("image_a", help="prediction image (PGM)")
    p.add_argument("image_b", help="target image (PGM)")
    common(p)

    p = sub.add_parser("recover", help="masked-image recovery by loss descent")
    p.add_argument("image", help="target image (PGM)")
    common(p)

    p = sub.add_parser("diffuse", help="Langevin generation from the dataset energy")
    common(p)

    p = sub.add_parser("knn", help="translated-digit classification experiment")
    common(p)

    p = sub.add_parser("train", help="autoencoder training under mse or the filter loss")
    p.add_argument("--loss", choices=("mse", "wiener"), default=None, help="override train.loss")
    p.add_argument("--epochs", type=int, default=None, help="override train.epochs")
    common(p)

    return parser


_COMMANDS = {
    "filter": _cmd_filter,
    "loss": _cmd_loss,
    "recover": _cmd_recover,
    "diffuse": _cmd_diffuse,
    "knn": _cmd_knn,
    "train": _cmd_train,
}


def _resolve_threads(args) -> int:
    raw = args.threads
    if raw is None:
        env = os.environ.get("WIENERLAB_THREADS")
        if env is not None:
            try:
                raw = int(env)
            except ValueError as exc:
                raise ConfigError(f"WIENERLAB_THREADS={env!r} is not an integer") from exc
    if raw is None:
        return 1
    if raw < 1:
        raise ConfigError(f"thread count must be >= 1, got {raw}")
    return raw


def _apply_seed(cfg: ExperimentConfig, command: str, seed: int | None) -> ExperimentConfig:
    if seed is None:
        return cfg
    if command == "diffuse":
        return replace(cfg, diffusion=replace(cfg.diffusion, seed=seed))
    if command == "train":
        return replace(cfg, train=replace(cfg.train, seed=seed))
    if command == "knn":
        return replace(cfg, knn=replace(cfg.knn, shift_seed=seed))
    return cfg


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        _resolve_threads(args)  # validated, recorded nowhere: execution is sequential
        cfg = load_config(args.config)
        cfg = _apply_seed(cfg, args.command, args.seed)
        return _COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (FormatError, ShapeError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4
    except WienerlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
