"""Command-line entry points.

Subcommands:

* ``synth``  — generate a synthetic dataset plus its manifest
* ``train``  — train one indicator's models on a manifest, save checkpoints
* ``eval``   — leave-one-subject-out evaluation, one experiment kind
* ``report`` — re-render roc.csv / roc.svg from an existing report.json
* ``repro``  — run the whole suite end to end into one directory

Exit codes: 0 on success, 2 on usage errors (argparse), 1 on any data or
contract error, printed to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from neopain.config import RunConfig
from neopain.errors import (ContractError, DataError, NoDecisionError,
                            NumericsError, StateError)
from neopain.evaluate import run_experiment, run_loso, train_approach
from neopain.features import FeatureStore
from neopain.manifest import load_manifest
from neopain.models import save_net
from neopain.nn.checkpoint import save_checkpoint
from neopain.repro import (format_summary, repro_all, roc_curves_from_payload,
                           StageFailure)
from neopain.plots import render_roc_svg, write_roc_csv
from neopain.synthetic import generate_synthetic

HANDLED_ERRORS = (ContractError, DataError, NoDecisionError, NumericsError,
                  StateError, StageFailure, OSError)


def _config_from_args(args) -> RunConfig:
    if getattr(args, "config", None):
        cfg = RunConfig.from_file(args.config)
    elif getattr(args, "full_scale", False):
        cfg = RunConfig()
    else:
        cfg = RunConfig.desk()
    for name in ("seed", "subjects", "segments"):
        value = getattr(args, name, None)
        if value is not None:
            field = {"seed": "master_seed",
                     "segments": "segments_per_subject"}.get(name, name)
            cfg = cfg.replace(**{field: value})
    return cfg


def _load_store(args, cfg: RunConfig) -> FeatureStore:
    manifest_path = Path(args.data)
    if manifest_path.is_dir():
        manifest_path = manifest_path / "manifest.csv"
    manifest = load_manifest(manifest_path)
    return FeatureStore(manifest, cfg)


def cmd_synth(args) -> int:
    cfg = _config_from_args(args)
    manifest = generate_synthetic(args.out, cfg)
    print(f"wrote {len(manifest.records)} samples over "
          f"{len(manifest.subjects)} subjects to {args.out}")
    return 0


def cmd_train(args) -> int:
    cfg = _config_from_args(args)
    store = _load_store(args, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    net, clf, curves = train_approach(
        store, store.manifest.records, args.indicator, cfg,
        cfg.master_seed, "all"
    )
    save_net(out / f"{args.indicator}_spatial.ckpt", net)
    saved = [f"{args.indicator}_spatial.ckpt"]
    if clf is not None:
        save_checkpoint(out / f"{args.indicator}_temporal.ckpt",
                        clf.state_dict())
        saved.append(f"{args.indicator}_temporal.ckpt")
    for fc in curves:
        name = f"{args.indicator}_{fc.stage}_curve.csv"
        fc.result.write_curve(out / name)
        saved.append(name)
    print(f"trained {args.indicator}: " + ", ".join(saved))
    return 0


def cmd_eval(args) -> int:
    cfg = _config_from_args(args)
    store = _load_store(args, cfg)
    progress = None if args.quiet else lambda s: print(s, flush=True)
    result = run_loso(store, cfg, progress=progress)
    report = run_experiment(args.experiment, result, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    payload = {"experiment": args.experiment, "seed": cfg.master_seed,
               "report": report}
    (out / "report.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n")
    written = ["report.json"]
    if args.experiment in ("unimodal", "multimodal", "all-present"):
        curves = {}
        if args.experiment == "multimodal":
            roc = multimodal_points(result)
            curves["fused"] = roc
        else:
            from neopain.evaluate import INDICATORS, unimodal_report
            base = (result.all_present() if args.experiment == "all-present"
                    else result.predictions)
            for i in INDICATORS:
                curves[i] = unimodal_report(base, i).roc_points
            if args.experiment == "all-present":
                curves["fused"] = multimodal_points(result, base)
        write_roc_csv(out / "roc.csv", curves)
        render_roc_svg(out / "roc.svg", curves)
        written += ["roc.csv", "roc.svg"]
    print(f"{args.experiment}: wrote " + ", ".join(written) + f" to {out}")
    return 0


def multimodal_points(result, subset=None):
    from neopain.evaluate import multimodal_report
    return multimodal_report(subset if subset is not None
                             else result.predictions).roc_points


def cmd_report(args) -> int:
    report = json.loads(Path(args.report).read_text())
    if "roc" not in report:
        raise DataError(f"{args.report}: no ROC payload to render")
    curves = roc_curves_from_payload(report["roc"])
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_roc_csv(out / "roc.csv", curves)
    render_roc_svg(out / "roc.svg", curves)
    if "summary" in report:
        print(format_summary(report))
    print(f"rendered roc.csv, roc.svg to {out}")
    return 0


def cmd_repro(args) -> int:
    cfg = _config_from_args(args)
    progress = None if args.quiet else lambda s: print(s, flush=True)
    report = repro_all(args.out, cfg, progress=progress)
    print(format_summary(report))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="neopain",
        description="Multimodal neonatal postoperative pain assessment "
                    "pipeline (synthetic desk-scale edition)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, data=False):
        p.add_argument("--seed", type=int, default=None,
                       help="master seed (default: from config)")
        p.add_argument("--config", default=None,
                       help="key = value config file")
        p.add_argument("--full-scale", action="store_true",
                       help="use full-size defaults instead of desk scale")
        if data:
            p.add_argument("--data", required=True,
                           help="dataset directory or manifest path")

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--subjects", type=int, default=None)
    p.add_argument("--segments", type=int, default=None,
                   help="segments per subject")
    common(p)
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("train", help="train one indicator on a manifest")
    p.add_argument("--indicator", required=True,
                   choices=("face", "body", "sound"))
    p.add_argument("--out", required=True)
    common(p, data=True)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("eval", help="leave-one-subject-out evaluation")
    p.add_argument("--experiment", required=True,
                   choices=("unimodal", "multimodal", "all-present",
                            "random-drop"))
    p.add_argument("--out", required=True)
    p.add_argument("--quiet", action="store_true")
    common(p, data=True)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("report", help="render plots from a report.json")
    p.add_argument("--report", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_report)

    p = sub.add_parser("repro", help="full experiment suite, one command")
    p.add_argument("--out", required=True)
    p.add_argument("--quiet", action="store_true")
    common(p)
    p.set_defaults(fn=cmd_repro)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except HANDLED_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
