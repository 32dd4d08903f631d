"""Command-line entry point and the experiment commands.

Configuration comes from an optional JSON file (RunConfig field names)
with CLI flags overriding file values; HDCDIAG_OUT sets the default
output directory. Exit codes: 0 success, 2 validation error, 3 I/O
error, 4 training diverged.
"""

import json
import os
import sys
from pathlib import Path

import click

from . import analysis, modelfile
from .corruptions import write_images
from .errors import TrainingDivergedError, ValidationError
from .experiments import (
    METHODS,
    RunConfig,
    build_cid,
    build_scenario,
    load_corpus,
    monitor_simulation,
    run_method,
    ssim_analysis,
    sweep_hyper_d,
)


def _build_config(config_path, **overrides) -> RunConfig:
    data = {}
    if config_path:
        with open(config_path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ValidationError("config file must hold a JSON object")
    for key, value in overrides.items():
        if value is not None:
            data[key] = value
    if "out_dir" not in data and os.environ.get("HDCDIAG_OUT"):
        data["out_dir"] = os.environ["HDCDIAG_OUT"]
    return RunConfig.from_dict(data)


def _out_dir(cfg: RunConfig) -> Path:
    path = Path(cfg.out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _common_options(fn):
    fn = click.option("--config", "config_path", type=click.Path(exists=True), default=None,
                      help="JSON config file with RunConfig fields.")(fn)
    fn = click.option("--seed", "master_seed", type=int, default=None, help="Master seed.")(fn)
    fn = click.option("--out-dir", type=str, default=None, help="Output directory.")(fn)
    fn = click.option("--hyper-d", type=int, default=None, help="Hypervector dimension.")(fn)
    fn = click.option("--corpus-size", type=int, default=None)(fn)
    fn = click.option("--severity", type=int, default=None)(fn)
    fn = click.option("--kinds", type=str, default=None,
                      help="Comma-separated corruption kinds.")(fn)
    return fn


def _config_from(kwargs) -> RunConfig:
    kinds = kwargs.pop("kinds", None)
    if kinds is not None:
        kwargs["kinds"] = [k.strip() for k in kinds.split(",") if k.strip()]
    return _build_config(kwargs.pop("config_path"), **kwargs)


@click.group()
def cli():
    """Corruption-diagnosis toolkit: binary HDC with MLP-learned encodings."""


@cli.command("gen-data")
@_common_options
def cmd_gen_data(**kwargs):
    """Synthesize the ID corpus and its corrupted variants; write image dumps."""
    cfg = _config_from(kwargs)
    out = _out_dir(cfg)
    corpus = load_corpus(cfg)
    cid = build_cid(cfg, corpus)
    write_images(out / "id_images.imgs", [img for img, _ in corpus], [cls for _, cls in corpus])
    write_images(out / "cid_images.imgs", cid.images, cid.labels)
    click.echo(f"wrote {len(corpus)} ID images and {cid.n} corrupted images to {out}")


def _report(cfg: RunConfig, scenario, result) -> dict:
    return {
        "method": result.method,
        "hyper_d": cfg.hyper_d,
        "top1": result.top1,
        "top2": result.top2,
        "top3": result.top3,
        "label_names": scenario.train.label_names,
        "confusion": result.confusion.tolist(),
        "tap_layer": scenario.tap.selected,
        "surrogate_id_accuracy": scenario.surrogate.history["train_accuracy"],
        "train_samples": scenario.train.n,
        "test_samples": scenario.test.n,
    }


def _write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


@cli.command("train")
@_common_options
@click.option("--method", type=click.Choice(METHODS), default=None)
def cmd_train(**kwargs):
    """Run the full pipeline with one method; write model file and metrics."""
    cfg = _config_from(kwargs)
    out = _out_dir(cfg)
    scenario = build_scenario(cfg)
    result = run_method(cfg, scenario, cfg.method)
    _write_json(out / "metrics.json", _report(cfg, scenario, result))
    if result.bank is not None:
        modelfile.save_model(out / "model.hdbg", result.bank, scenario.surrogate)
        click.echo(f"model written to {out / 'model.hdbg'}")
    click.echo(
        f"{cfg.method}: top1={result.top1:.4f} top2={result.top2:.4f} top3={result.top3:.4f}"
    )


@cli.command("sweep-hyperd")
@_common_options
@click.option("--dims", type=str, default="200,400,800,1600,3200",
              help="Comma-separated hyper-d values.")
def cmd_sweep_hyperd(dims, **kwargs):
    """Vanilla HDC accuracy at each hyper-dimension; emits CSV."""
    cfg = _config_from(kwargs)
    out = _out_dir(cfg)
    dim_list = [int(d) for d in dims.split(",") if d.strip()]
    rows = sweep_hyper_d(cfg, dim_list)
    lines = ["hyper_d,top1_accuracy"] + [f"{d},{a:.6f}" for d, a in rows]
    (out / "hyperd_sweep.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    for d, a in rows:
        click.echo(f"hyper_d={d}: top1={a:.4f}")


@cli.command("ssim")
@_common_options
@click.option("--prune-threshold", type=float, default=0.75)
def cmd_ssim(prune_threshold, **kwargs):
    """Corruption-similarity matrix (CSV + banded CSV) and pruning suggestion."""
    cfg = _config_from(kwargs)
    out = _out_dir(cfg)
    matrix = ssim_analysis(cfg)
    (out / "ssim_matrix.csv").write_text(analysis.matrix_to_csv(matrix), encoding="utf-8")
    (out / "ssim_bands.csv").write_text(
        analysis.matrix_to_csv(matrix, bands=True), encoding="utf-8"
    )
    kept = analysis.suggest_pruned_set(matrix, prune_threshold)
    (out / "pruned_kinds.txt").write_text("\n".join(kept) + "\n", encoding="utf-8")
    click.echo(f"ssim matrix over {len(matrix.labels)} kinds; kept after pruning: {kept}")


@cli.command("monitor-sim")
@_common_options
def cmd_monitor_sim(**kwargs):
    """Stream ID then corrupted traffic through the trigger; emits a CSV trace."""
    cfg = _config_from(kwargs)
    out = _out_dir(cfg)
    state, trace = monitor_simulation(cfg)
    lines = ["step,window_accuracy,triggered"]
    lines += [f"{r.step},{r.window_accuracy:.6f},{int(r.triggered)}" for r in trace]
    (out / "monitor_trace.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    fired = [r.step for r in trace if r.triggered]
    click.echo(
        f"threshold={state.threshold:.4f} (mu={state.mu_id:.4f}, sigma={state.sigma_id:.4f}); "
        + (f"first trigger at step {fired[0]}" if fired else "never triggered")
    )


@cli.command("compare")
@_common_options
def cmd_compare(**kwargs):
    """All four methods on one scenario; emits a combined CSV report."""
    cfg = _config_from(kwargs)
    out = _out_dir(cfg)
    scenario = build_scenario(cfg)
    lines = ["method,top1,top2,top3"]
    for method in METHODS:
        result = run_method(cfg, scenario, method)
        lines.append(f"{method},{result.top1:.6f},{result.top2:.6f},{result.top3:.6f}")
        click.echo(f"{method}: top1={result.top1:.4f} top2={result.top2:.4f} top3={result.top3:.4f}")
    (out / "compare.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")


def main():
    try:
        cli.main(standalone_mode=False)
    except (ValidationError, click.UsageError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except click.Abort:
        sys.exit(2)
    except TrainingDivergedError as exc:
        click.echo(f"training diverged: {exc}", err=True)
        sys.exit(4)
    except OSError as exc:
        click.echo(f"io error: {exc}", err=True)
        sys.exit(3)


if __name__ == "__main__":
    main()
