"""Command-line access to every pipeline operation.

Exit codes: 0 success, 1 operational error (any domain failure), 2 usage
error.  Query commands accept ``--json`` for machine-readable output.
State lives under ``--home`` (or VIDFACTORY_HOME); the trained denoiser
checkpoint comes from ``--ckpt`` (or VIDFACTORY_CKPT).
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import VidFactoryError

# CLI stage names are the user-facing curriculum vocabulary; internal
# stage identifiers describe what each stage trains.
STAGE_NAMES = {
    "image": "image_pretrain",
    "adapters": "spatial_adapt",
    "temporal": "temporal",
    "vertical": "vertical_adapt",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vidfactory",
        description="text to short vertical video: diffusion, audio retrieval, overlays",
    )
    parser.add_argument("--home", default=None, help="state directory (default: $VIDFACTORY_HOME)")
    parser.add_argument("--ckpt", default=None, help="denoiser checkpoint (default: $VIDFACTORY_CKPT)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dataset", help="build the audio bank, encoders, and retrieval index")
    p.add_argument("--count", type=int, default=48, help="number of bank clips")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=50, help="retrieval encoder training epochs")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("train", help="run one curriculum stage and save the checkpoint")
    p.add_argument("--stage", required=True, choices=sorted(STAGE_NAMES))
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--landscape", type=int, default=64, help="landscape training clips")
    p.add_argument("--portrait", type=int, default=16, help="portrait training clips")
    p.add_argument("--frames", type=int, default=8, help="frames per training clip")
    p.add_argument("--out", default=None, help="checkpoint output path (default: --ckpt)")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("gen", help="generate a clip for a new or existing project")
    p.add_argument("--prompt", default=None, help="creates a project when --project is absent")
    p.add_argument("--project", default=None, help="existing project id")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", type=int, default=None, help="DDIM steps override")
    p.add_argument("--guidance", type=float, default=None)
    p.add_argument("--frames", type=int, default=None)
    p.add_argument("--orientation", choices=("portrait", "landscape"), default=None)
    p.add_argument("--interpolate", action="store_true")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("retrieve", help="rank bank audio against text")
    p.add_argument("--text", default=None)
    p.add_argument("--project", default=None, help="cache the result on this project")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("compose", help="apply a composition patch to a project")
    p.add_argument("--project", required=True)
    p.add_argument("--patch", required=True, help="JSON file with the patch, or - for stdin")
    p.add_argument("--expected-revision", type=int, default=None)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("export", help="render a project to video and audio files")
    p.add_argument("--project", required=True)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--workers", type=int, default=1, help="job worker threads")

    p = sub.add_parser("check", help="run gradient and identity-at-init suites")
    p.add_argument("--probes", type=int, default=20)
    p.add_argument("--json", action="store_true")

    return parser


def _context(args, workers: int = 1):
    from .service.context import ServiceContext

    return ServiceContext(home=args.home, ckpt=args.ckpt, workers=workers)


def _emit(args, doc: dict, human: str) -> None:
    if getattr(args, "json", False):
        print(json.dumps(doc, sort_keys=True, indent=2))
    else:
        print(human)


def _cmd_dataset(args) -> int:
    ctx = _context(args)
    try:
        summary = ctx.build_assets(count=args.count, seed=args.seed, epochs=args.epochs)
    finally:
        ctx.close()
    _emit(
        args,
        summary,
        f"bank: {summary['assets']} assets across {summary['classes']} classes; "
        f"recall@1 {summary['recall_at_1']:.3f}, recall@3 {summary['recall_at_3']:.3f}",
    )
    return 0


def _cmd_train(args) -> int:
    import numpy as np

    from .diffusion.training import StageSpec, prepare_datasets, train_stage
    from .diffusion.unet import DenoiserModel
    from .service.context import resolve_ckpt
    from .toygen.video import ToyVideoConfig, make_video_dataset

    ckpt = resolve_ckpt(args.out or args.ckpt)
    if ckpt is None:
        raise VidFactoryError("no checkpoint path; pass --out/--ckpt or set VIDFACTORY_CKPT")
    stage = STAGE_NAMES[args.stage]
    if ckpt.exists():
        model, sched = DenoiserModel.load(ckpt)
    else:
        model, sched = DenoiserModel.build(seed=args.seed), None
    land = make_video_dataset(
        ToyVideoConfig(count=args.landscape, frames_per_clip=args.frames, orientation="landscape", seed=args.seed)
    )
    port = make_video_dataset(
        ToyVideoConfig(count=args.portrait, frames_per_clip=args.frames, orientation="portrait", seed=args.seed + 1)
    )
    datasets = prepare_datasets(land, port, model.vocab)
    spec = StageSpec(
        stage=stage, steps=args.steps, learning_rate=args.lr, batch_size=args.batch_size, seed=args.seed
    )

    def progress(step: int, total: int, loss: float) -> None:
        if not args.json and (step % 50 == 0 or step == total):
            print(f"  {stage} step {step}/{total} loss {loss:.4f}", file=sys.stderr)

    report = train_stage(model, datasets, spec, sched, progress=progress)
    model.save(ckpt, sched)
    doc = {
        "stage": report.stage,
        "steps": report.steps,
        "first_loss": report.losses[0],
        "last_loss": report.losses[-1],
        "wall_time_s": report.wall_time_s,
        "trainable_parameters": report.trainable_parameters,
        "checkpoint": str(ckpt),
        "stage_history": list(model.stage_history),
    }
    _emit(
        args,
        doc,
        f"{report.stage}: {report.steps} steps, loss {report.losses[0]:.4f} -> "
        f"{report.losses[-1]:.4f}, {report.wall_time_s:.1f}s, saved {ckpt}",
    )
    return 0


def _cmd_gen(args) -> int:
    ctx = _context(args)
    try:
        if args.project is None:
            if args.prompt is None:
                raise VidFactoryError("gen needs --prompt or --project")
            record = ctx.create_project(args.prompt, args.seed)
        else:
            record = ctx.get_project(args.project)
        overrides = {}
        if args.steps is not None:
            overrides["ddim_steps"] = args.steps
        if args.guidance is not None:
            overrides["guidance_scale"] = args.guidance
        if args.frames is not None:
            overrides["n_frames"] = args.frames
        if args.orientation is not None:
            overrides["orientation"] = args.orientation
        if args.interpolate:
            overrides["interpolate"] = True
        if overrides:
            def apply(rec):
                for key, value in overrides.items():
                    setattr(rec.project.generation, key, value)

            ctx.store.mutate(record.project_id, apply)

        def report(fraction: float) -> None:
            if not args.json:
                print(f"  sampling {fraction:5.1%}", file=sys.stderr, end="\r")

        result = ctx.run_generate(record.project_id, report)
        if not args.json:
            print(file=sys.stderr)
    finally:
        ctx.close()
    doc = {"project_id": record.project_id, **result}
    clip = result["clip"]
    _emit(
        args,
        doc,
        f"project {record.project_id}: {clip['n_frames']} frames "
        f"{clip['width']}x{clip['height']} {clip['orientation']} @ {clip['fps']} fps",
    )
    return 0


def _cmd_retrieve(args) -> int:
    ctx = _context(args)
    try:
        result = ctx.query_retrieve(project_id=args.project, text=args.text, k=args.k)
    finally:
        ctx.close()
    lines = [f"query: {result['query']}"] + [
        f"  {row['asset_id']}: {row['score']:.4f}" for row in result["ranked"]
    ]
    _emit(args, result, "\n".join(lines))
    return 0


def _cmd_compose(args) -> int:
    raw = sys.stdin.read() if args.patch == "-" else open(args.patch, encoding="utf-8").read()
    try:
        patch = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise VidFactoryError(f"patch is not valid JSON: {exc}") from exc
    ctx = _context(args)
    try:
        record = ctx.update_composition(args.project, patch, args.expected_revision)
    finally:
        ctx.close()
    doc = {"id": record.project_id, "revision": record.revision}
    _emit(args, doc, f"project {record.project_id} now at revision {record.revision}")
    return 0


def _cmd_export(args) -> int:
    ctx = _context(args)
    try:
        result = ctx.run_export(args.project)
    finally:
        ctx.close()
    _emit(
        args,
        result,
        f"exported revision {result['revision']}:\n  video {result['video']}\n  audio {result['audio']}",
    )
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app

    app = create_app(home=args.home, ckpt=args.ckpt, workers=args.workers)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def _cmd_check(args) -> int:
    from .diffusion.training import check_gradients, check_identity

    identity = check_identity()
    worst = check_gradients(n_probes=args.probes)
    grads_ok = worst < 1e-4
    ok = grads_ok and all(identity.values())
    doc = {**identity, "gradient_worst_rel_err": worst, "gradient_ok": grads_ok, "ok": ok}
    lines = [
        f"adapters identity at init: {'pass' if identity['adapters_identity'] else 'FAIL'}",
        f"temporal identity at init: {'pass' if identity['temporal_identity'] else 'FAIL'}",
        f"zero baseline at init:     {'pass' if identity['zero_baseline'] else 'FAIL'}",
        f"gradient check:            {'pass' if grads_ok else 'FAIL'} (worst rel err {worst:.2e})",
    ]
    _emit(args, doc, "\n".join(lines))
    return 0 if ok else 1


_COMMANDS = {
    "dataset": _cmd_dataset,
    "train": _cmd_train,
    "gen": _cmd_gen,
    "retrieve": _cmd_retrieve,
    "compose": _cmd_compose,
    "export": _cmd_export,
    "serve": _cmd_serve,
    "check": _cmd_check,
}


def cli_main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses 2 for usage errors, 0 for --help
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except VidFactoryError as exc:
        print(f"error ({exc.code}): {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error (io_error): {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    entry()
