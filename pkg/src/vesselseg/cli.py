"""Command-line interface: enhance, segment, evaluate.

Flag values win over an optional key=value config file, which wins over
the built-in defaults. Intensity-like values (--d) are given on the
familiar 0-255 scale and converted internally. Exit codes: 0 success,
1 runtime/data failure, 2 usage or parameter failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
import time
from pathlib import Path

from .colorspace import LabWeights
from .dataset_io import load_image, save_artifacts, save_image
from .enhancement import (
    METHODS,
    ClaheParams,
    LocalNormParams,
    SuaceParams,
    UnsharpParams,
    apply_enhancer,
)
from .errors import ParameterError, PipelineError
from .evaluation import comparison_table
from .pipeline import (
    DEFAULT_BACKGROUND_RADIUS,
    DEFAULT_SEED,
    RunConfig,
    evaluate_dataset,
    segment_image,
    to_grayscale,
    write_reports,
)
from .reconstruction import ReconstructionParams

log = logging.getLogger("vesselseg")


def _add_enhancer_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=METHODS, default=None, help="enhancer (default suace)")
    p.add_argument("--sigma", type=float, default=None, help="illumination-estimate scale in pixels")
    p.add_argument("--d", type=float, default=None, help="stretch window width, 0-255 scale")
    p.add_argument("--tiles", default=None, help="CLAHE tile grid, e.g. 8x8")
    p.add_argument("--clip-limit", type=float, default=None, help="CLAHE clip fraction in (0,1]")
    p.add_argument("--ln-sigma-mean", type=float, default=None, help="local-normalize mean scale")
    p.add_argument("--ln-sigma-std", type=float, default=None, help="local-normalize std scale")
    p.add_argument("--ln-gain", type=float, default=None, help="local-normalize output gain")
    p.add_argument("--lum-radius", type=int, default=None, help="unsharp-mask blur radius")
    p.add_argument("--lum-amount", type=float, default=None, help="unsharp-mask strength")


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    _add_enhancer_flags(p)
    p.add_argument("--background-radius", type=int, default=None, help="background box radius")
    p.add_argument("--a1", type=int, default=None, help="pre-bridge minimum component area")
    p.add_argument("--h", type=int, default=None, help="endpoint pairing radius")
    p.add_argument("--v", type=int, default=None, help="Hough vote count a bridge must exceed")
    p.add_argument("--a2", type=int, default=None, help="post-bridge minimum component area")
    p.add_argument("--lab-weights", default=None, help="grayscale projection weights, e.g. 1,0.25,0.25")
    p.add_argument("--seed", type=int, default=None, help="random seed (default 42)")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="key=value file; flags override it")
    common.add_argument("--verbose", action="store_true", help="per-image progress on stderr")

    parser = argparse.ArgumentParser(
        prog="vesselseg",
        description="Retinal vessel segmentation with adaptive contrast enhancement.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_enh = sub.add_parser("enhance", parents=[common], help="write the contrast-enhanced grayscale image")
    _add_enhancer_flags(p_enh)
    p_enh.add_argument("input", help="input image")
    p_enh.add_argument("output", help="output PNG")
    p_enh.set_defaults(func=cmd_enhance)

    p_seg = sub.add_parser("segment", parents=[common], help="segment one image into a vessel mask")
    _add_pipeline_flags(p_seg)
    p_seg.add_argument("--stages", action="store_true", default=None, help="also write every intermediate stage")
    p_seg.add_argument("input", help="input image")
    p_seg.add_argument("output", help="output mask PNG")
    p_seg.set_defaults(func=cmd_segment)

    p_eval = sub.add_parser("evaluate", parents=[common], help="score a dataset and write CSV/JSON reports")
    _add_pipeline_flags(p_eval)
    p_eval.add_argument("--kind", choices=("drive", "stare", "custom"), default=None)
    p_eval.add_argument("--root", default=None, help="dataset root directory")
    p_eval.add_argument("--methods", default=None, help="comma-separated enhancer list")
    p_eval.add_argument("--out-dir", default=None, help="report directory (default reports)")
    p_eval.add_argument("--stages", action="store_true", default=None, help="also write per-image stages")
    p_eval.set_defaults(func=cmd_evaluate)
    return parser


def read_config_file(path) -> dict[str, str]:
    """Flat key=value lines; '#' starts a comment; keys match flag names."""
    text = Path(path).read_text()
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _pick(args, cfg: dict[str, str], name: str, default, cast):
    """Flag > config file > default."""
    flag = getattr(args, name, None)
    if flag is not None:
        return flag
    if name in cfg:
        try:
            return cast(cfg[name])
        except (TypeError, ValueError) as exc:
            raise ParameterError(f"config key {name}: {exc}") from exc
    return default


def _parse_tiles(text) -> tuple[int, int]:
    if isinstance(text, tuple):
        return text
    parts = str(text).replace("x", ",").split(",")
    if len(parts) != 2:
        raise ParameterError(f"tiles must look like 8x8, got {text!r}")
    return int(parts[0]), int(parts[1])


def _parse_weights(text) -> LabWeights:
    if text is None:
        return LabWeights()
    parts = str(text).split(",")
    if len(parts) != 3:
        raise ParameterError(f"lab-weights must be three comma-separated numbers, got {text!r}")
    return LabWeights(l=float(parts[0]), a=float(parts[1]), b=float(parts[2]))


def _parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    return str(text).strip().lower() in ("1", "true", "yes", "on")


def build_config(args) -> RunConfig:
    """Resolve flags + optional config file into a frozen RunConfig."""
    cfg = read_config_file(args.config) if getattr(args, "config", None) else {}

    d255 = float(_pick(args, cfg, "d", 16.0, float))
    suace = SuaceParams(
        sigma=float(_pick(args, cfg, "sigma", 7.0, float)),
        d=d255 / 255.0,
    )
    clahe = ClaheParams(
        tiles=_parse_tiles(_pick(args, cfg, "tiles", (8, 8), _parse_tiles)),
        clip_limit=float(_pick(args, cfg, "clip_limit", 0.01, float)),
    )
    ln = LocalNormParams(
        sigma_mean=float(_pick(args, cfg, "ln_sigma_mean", 15.0, float)),
        sigma_std=float(_pick(args, cfg, "ln_sigma_std", 15.0, float)),
        out_gain=float(_pick(args, cfg, "ln_gain", 0.2, float)),
    )
    lum = UnsharpParams(
        radius=int(_pick(args, cfg, "lum_radius", 9, int)),
        amount=float(_pick(args, cfg, "lum_amount", 1.5, float)),
    )
    recon = ReconstructionParams(
        a1=int(_pick(args, cfg, "a1", 10, int)),
        h=int(_pick(args, cfg, "h", 5, int)),
        v=int(_pick(args, cfg, "v", 3, int)),
        a2=int(_pick(args, cfg, "a2", 50, int)),
    )
    return RunConfig(
        enhancer=_pick(args, cfg, "method", "suace", str),
        suace=suace,
        clahe=clahe,
        ln=ln,
        lum=lum,
        recon=recon,
        background_radius=int(_pick(args, cfg, "background_radius", DEFAULT_BACKGROUND_RADIUS, int)),
        lab_weights=_parse_weights(_pick(args, cfg, "lab_weights", None, str)),
        seed=int(_pick(args, cfg, "seed", DEFAULT_SEED, int)),
        dataset_kind=_pick(args, cfg, "kind", None, str),
        dataset_root=_pick(args, cfg, "root", None, str),
        output_dir=_pick(args, cfg, "out_dir", None, str),
        save_stages=_parse_bool(_pick(args, cfg, "stages", False, _parse_bool)),
    )


def cmd_enhance(args) -> int:
    config = build_config(args)
    image = load_image(args.input)
    gray = to_grayscale(image, config)
    start = time.perf_counter()
    enhanced = apply_enhancer(gray, config.choice())
    elapsed = time.perf_counter() - start
    save_image(args.output, enhanced)
    print(f"{config.enhancer}: {args.output} written in {elapsed * 1000.0:.1f} ms")
    return 0


def cmd_segment(args) -> int:
    config = build_config(args)
    image = load_image(args.input)
    arts = segment_image(image, config, image_id=Path(args.input).stem)
    save_image(args.output, arts.mask.astype(float))
    if config.save_stages:
        written = save_artifacts(arts, Path(args.output).parent)
        print(f"{len(written)} stage images written next to {args.output}")
    print(f"mask written to {args.output}")
    return 0


def cmd_evaluate(args) -> int:
    config = build_config(args)
    if config.dataset_kind is None or config.dataset_root is None:
        raise ParameterError("evaluate needs --kind and --root")
    cfg_file = read_config_file(args.config) if getattr(args, "config", None) else {}
    methods_text = _pick(args, cfg_file, "methods", "suace", str)
    methods = tuple(m.strip() for m in str(methods_text).split(",") if m.strip())
    for m in methods:
        if m not in METHODS:
            raise ParameterError(f"unknown method {m!r}; expected from {METHODS}")
    out_dir = config.output_dir or "reports"
    config = dataclasses.replace(config, output_dir=out_dir)
    reports = evaluate_dataset(config, methods)
    written = write_reports(reports, out_dir)
    print(comparison_table(reports))
    for path in written:
        log.info("wrote %s", path)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
