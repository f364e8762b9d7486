"""Command-line entry point: synth, extract, evaluate, report.

Options resolve in three layers: built-in defaults, then a JSON config file
(--config), then explicit flags. The resolved configuration is written into
the output directory of every run so results stay reproducible. EMOFUSE_LOG
sets the log level.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import dataset, evaluation, extraction, synth
from .eeg_features import EegFeatureConfig
from .errors import EmofuseError
from .music_features import FrameConfig

log = logging.getLogger("emofuse")

PROTOCOL_NAMES = {
    "sd": evaluation.PROTOCOL_SD,
    "si": evaluation.PROTOCOL_SI,
    evaluation.PROTOCOL_SD: evaluation.PROTOCOL_SD,
    evaluation.PROTOCOL_SI: evaluation.PROTOCOL_SI,
}

DEFAULTS = {
    "seed": 0,
    "protocol": "sd",
    "modality": "DLF",
    "alpha": 0.5,
    "window": None,  # resolved per protocol when not set
    "windows": list(evaluation.WINDOW_SIZES_S),
    "folds": 10,
    "repetitions": 5,
    "normalization": "split",
    "group_by_song": False,
    "k_max": 32,
    "frame_len": 2048,
    "hop": 1024,
    "jobs": None,
    "subjects": 2,
    "trials": 4,
}


def _setup_logging() -> None:
    level = os.environ.get("EMOFUSE_LOG", "INFO").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(levelname)s %(name)s: %(message)s",
    )


def _resolve(args: argparse.Namespace) -> dict:
    """defaults < config file < explicit flags."""
    resolved = dict(DEFAULTS)
    config_path = getattr(args, "config", None)
    if config_path:
        with open(config_path) as fh:
            file_values = json.load(fh)
        unknown = set(file_values) - set(DEFAULTS)
        if unknown:
            raise SystemExit(f"unknown config keys: {sorted(unknown)}")
        resolved.update(file_values)
    for key in DEFAULTS:
        flag = getattr(args, key, None)
        if flag is not None:
            resolved[key] = flag
    return resolved


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n")


def _snapshot(out_dir: Path, resolved: dict, command: str) -> None:
    _write_json(out_dir / "resolved_config.json", {"command": command, **resolved})


def _extraction_configs(resolved: dict) -> tuple[EegFeatureConfig, FrameConfig]:
    return (
        EegFeatureConfig(k_max=resolved["k_max"]),
        FrameConfig(frame_len=resolved["frame_len"], hop=resolved["hop"]),
    )


def _jobs(resolved: dict) -> int:
    if resolved["jobs"] is not None:
        return max(1, int(resolved["jobs"]))
    return max(1, os.cpu_count() or 1)


def _default_window(resolved: dict) -> float:
    if resolved["window"] is not None:
        return float(resolved["window"])
    # alpha sweeps in the reference layout fix 2 s (sd) and 9 s (si)
    return 2.0 if PROTOCOL_NAMES[resolved["protocol"]] == evaluation.PROTOCOL_SD else 9.0


def cmd_synth(args: argparse.Namespace) -> int:
    resolved = _resolve(args)
    out = Path(args.out)
    cfg = synth.SynthConfig(
        subjects=int(resolved["subjects"]),
        trials_per_subject=int(resolved["trials"]),
        seed=int(resolved["seed"]),
    )
    manifest_path = synth.generate_dataset(out, cfg)
    _snapshot(out, resolved, "synth")
    print(f"wrote {manifest_path}")
    return 0


def _ensure_all(manifest, out: Path, sizes, resolved: dict) -> int:
    eeg_cfg, frame_cfg = _extraction_configs(resolved)
    for window_s in sizes:
        for ref in manifest.all_trials():
            trial_name = f"{ref.subject_id}/{ref.song_id}"
            try:
                cached = extraction.ensure_trial_features(
                    ref, out, window_s, eeg_cfg, frame_cfg)
            except EmofuseError as exc:
                log.error("trial %s (window %ss): %s", trial_name, window_s, exc)
                print(f"error: trial {trial_name}: {exc}", file=sys.stderr)
                return 1
            status = "skipped (cached)" if cached else "extracted"
            print(f"{status}: {trial_name} window={window_s}s")
    return 0


def cmd_extract(args: argparse.Namespace) -> int:
    if args.window is not None and args.windows is not None:
        print("error: --window conflicts with --windows", file=sys.stderr)
        return 2
    resolved = _resolve(args)
    manifest = dataset.load_manifest(args.data)
    out = Path(args.out)
    sizes = [float(w) for w in (
        [resolved["window"]] if resolved["window"] is not None else resolved["windows"]
    )]
    _snapshot(out, resolved, "extract")
    return _ensure_all(manifest, out, sizes, resolved)


def _cv_config(resolved: dict, window_s: float, target: str = evaluation.TARGET_AROUSAL,
               ) -> evaluation.CvConfig:
    return evaluation.CvConfig(
        protocol=PROTOCOL_NAMES[resolved["protocol"]],
        folds=int(resolved["folds"]),
        repetitions=int(resolved["repetitions"]),
        seed=int(resolved["seed"]),
        window_s=window_s,
        alpha=float(resolved["alpha"]),
        modality=resolved["modality"],
        target=target,
        normalization=resolved["normalization"],
        group_by_song=bool(resolved["group_by_song"]),
    )


def cmd_evaluate(args: argparse.Namespace) -> int:
    if args.sweep_alpha and args.alpha is not None:
        print("error: --alpha conflicts with --sweep-alpha", file=sys.stderr)
        return 2
    if args.sweep_windows and args.window is not None:
        print("error: --window conflicts with --sweep-windows", file=sys.stderr)
        return 2
    resolved = _resolve(args)
    manifest = dataset.load_manifest(args.data)
    out = Path(args.out)
    jobs = _jobs(resolved)
    _snapshot(out, resolved, "evaluate")

    if args.sweep_windows:
        sizes = [int(w) for w in resolved["windows"]]
        code = _ensure_all(manifest, out, [float(w) for w in sizes], resolved)
        if code:
            return code
        by_size = {
            w: extraction.load_windowed(manifest, out, float(w)) for w in sizes
        }
        cfg = _cv_config(resolved, window_s=2.0)
        table = evaluation.sweep_windows(by_size, cfg, jobs=jobs, sizes=tuple(sizes))
        _write_json(out / "sweep_windows.json", table.to_dict())
        for target in table.targets:
            text = evaluation.render_window_table(table, target)
            (out / f"table_windows_{target}.txt").write_text(text)
            print(text)
        return 0

    window_s = _default_window(resolved)
    code = _ensure_all(manifest, out, [window_s], resolved)
    if code:
        return code
    windows = extraction.load_windowed(manifest, out, window_s)

    if args.sweep_alpha:
        cfg = _cv_config(resolved, window_s)
        table = evaluation.sweep_alpha(windows, cfg, jobs=jobs)
        _write_json(out / "sweep_alpha.json", table.to_dict())
        for target in table.targets:
            text = evaluation.render_alpha_series(table, target)
            (out / f"series_alpha_{target}.txt").write_text(text)
            print(text)
        return 0

    reports = {}
    for target in evaluation.TARGETS:
        cfg = _cv_config(resolved, window_s, target)
        report = evaluation.run_protocol(windows, cfg, jobs=jobs)
        reports[target] = report.to_dict()
        print(
            f"{target}: accuracy {report.accuracy_mean:.2f} ({report.accuracy_std:.2f})"
            f"  mcc {report.mcc_mean:.4f}  chance {report.chance_level_mean:.2f}"
            + (f"  flags={','.join(report.flags)}" if report.flags else "")
        )
    _write_json(out / "report.json", reports)
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    payload = json.loads(Path(args.input).read_text())
    if "cells" in payload:
        table = evaluation.sweep_table_from_dict(payload)
        render = (evaluation.render_window_table if table.kind == "windows"
                  else evaluation.render_alpha_series)
        for target in table.targets:
            print(render(table, target))
    else:
        for target, rd in payload.items():
            report = evaluation.report_from_dict(rd)
            print(
                f"{target}: {report.modality} window={report.window_s}s "
                f"accuracy {report.accuracy_mean:.2f} ({report.accuracy_std:.2f}) "
                f"mcc {report.mcc_mean:.4f}"
            )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emofuse",
        description="Continuous music-emotion recognition pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON config file; flags override it")
        p.add_argument("--seed", type=int, help="global random seed")

    p_synth = sub.add_parser("synth", help="generate a synthetic demo dataset")
    common(p_synth)
    p_synth.add_argument("--out", required=True, help="dataset directory")
    p_synth.add_argument("--subjects", type=int)
    p_synth.add_argument("--trials", type=int, help="trials per subject")
    p_synth.set_defaults(func=cmd_synth)

    p_extract = sub.add_parser("extract", help="compute windowed feature tables")
    common(p_extract)
    p_extract.add_argument("--data", required=True, help="manifest path")
    p_extract.add_argument("--out", required=True, help="run directory")
    p_extract.add_argument("--window", type=float, help="single window size in seconds")
    p_extract.add_argument("--windows", type=int, nargs="+",
                           help="window sizes in seconds")
    p_extract.add_argument("--k-max", dest="k_max", type=int)
    p_extract.add_argument("--frame-len", dest="frame_len", type=int)
    p_extract.add_argument("--hop", type=int)
    p_extract.set_defaults(func=cmd_extract)

    p_eval = sub.add_parser("evaluate", help="run a protocol or a sweep")
    common(p_eval)
    p_eval.add_argument("--data", required=True)
    p_eval.add_argument("--out", required=True)
    p_eval.add_argument("--protocol", choices=sorted(PROTOCOL_NAMES))
    p_eval.add_argument("--modality", choices=evaluation.MODALITIES)
    p_eval.add_argument("--alpha", type=float)
    p_eval.add_argument("--window", type=float)
    p_eval.add_argument("--folds", type=int)
    p_eval.add_argument("--repetitions", type=int)
    p_eval.add_argument("--normalization", choices=evaluation.NORMALIZATION_MODES)
    p_eval.add_argument("--group-by-song", dest="group_by_song", action="store_const",
                        const=True)
    p_eval.add_argument("--jobs", type=int, help="worker pool size")
    p_eval.add_argument("--k-max", dest="k_max", type=int)
    p_eval.add_argument("--frame-len", dest="frame_len", type=int)
    p_eval.add_argument("--hop", type=int)
    mode = p_eval.add_mutually_exclusive_group()
    mode.add_argument("--sweep-windows", action="store_true")
    mode.add_argument("--sweep-alpha", action="store_true")
    p_eval.set_defaults(func=cmd_evaluate)

    p_report = sub.add_parser("report", help="render a stored report or sweep")
    p_report.add_argument("--input", required=True, help="report JSON path")
    p_report.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except EmofuseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
