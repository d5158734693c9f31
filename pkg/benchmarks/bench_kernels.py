"""Compare the compiled patch kernels against the pure-numpy fallback.

Times im2col/col2im on the convolution shapes the denoiser actually runs,
checks both backends produce bit-identical arrays, and measures one full
training step per backend in a subprocess (backend choice is made at
import time, so a fresh interpreter is the only honest comparison).

Run:  python3 benchmarks/bench_kernels.py [--repeats N] [--skip-step]
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from vidfactory.engine import kernels_py  # noqa: E402

try:
    from vidfactory.engine import _kernels
except ImportError:
    _kernels = None

# (label, channels, height, width, kh, kw, stride) for every distinct conv
# the default model runs on a landscape latent, padded as conv2d pads.
SHAPES = [
    ("stem 48ch 14x22", 48, 14, 22, 3, 3, 1),
    ("level0 32ch 14x22", 32, 14, 22, 3, 3, 1),
    ("down 32ch 14x22 s2", 32, 14, 22, 3, 3, 2),
    ("level1 64ch 8x12", 64, 8, 12, 3, 3, 1),
    ("adapter 16ch 12x20", 16, 12, 20, 3, 3, 1),
    ("skip 1x1 64ch 6x10", 64, 6, 10, 1, 1, 1),
]

STEP_SNIPPET = """
import time
import numpy as np
from vidfactory.diffusion import DenoiserModel, NoiseSchedule, StageSpec, UNetConfig, grammar_vocab, prepare_datasets, train_stage
from vidfactory.engine.backend import backend_name
from vidfactory.toygen.video import ToyVideoConfig, make_video_dataset

land = make_video_dataset(ToyVideoConfig(count=4, frames_per_clip=4, orientation="landscape", seed=0))
datasets = prepare_datasets(land, [], grammar_vocab())
model = DenoiserModel.build(UNetConfig(), seed=0)
spec = StageSpec("image_pretrain", steps=%(steps)d, batch_size=8, seed=0)
t0 = time.monotonic()
report = train_stage(model, datasets, spec, NoiseSchedule())
per_step = (time.monotonic() - t0) / spec.steps
print(f"{backend_name()} {per_step:.4f}")
"""


def _time(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(repeats: int) -> None:
    rng = np.random.default_rng(0)
    header = f"{'shape':<22} {'pure im2col':>12} {'fast im2col':>12} {'pure col2im':>12} {'fast col2im':>12} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for label, c, h, w, kh, kw, stride in SHAPES:
        xp = rng.standard_normal((c, h, w)).astype(np.float32)
        cols_pure = kernels_py.im2col2d(xp, kh, kw, stride)
        t_pure_i = _time(lambda: kernels_py.im2col2d(xp, kh, kw, stride), repeats)
        t_pure_c = _time(
            lambda: kernels_py.col2im2d(cols_pure, c, h, w, kh, kw, stride), repeats
        )
        if _kernels is None:
            print(f"{label:<22} {t_pure_i*1e6:>10.1f}us {'n/a':>12} {t_pure_c*1e6:>10.1f}us {'n/a':>12} {'n/a':>8}")
            continue
        cols_fast = _kernels.im2col2d(xp, kh, kw, stride)
        back_pure = kernels_py.col2im2d(cols_pure, c, h, w, kh, kw, stride)
        back_fast = _kernels.col2im2d(cols_pure, c, h, w, kh, kw, stride)
        if not np.array_equal(cols_pure, cols_fast) or not np.array_equal(back_pure, back_fast):
            raise SystemExit(f"backend mismatch on {label}: outputs must be bit-identical")
        t_fast_i = _time(lambda: _kernels.im2col2d(xp, kh, kw, stride), repeats)
        t_fast_c = _time(
            lambda: _kernels.col2im2d(cols_pure, c, h, w, kh, kw, stride), repeats
        )
        speedup = (t_pure_i + t_pure_c) / max(t_fast_i + t_fast_c, 1e-12)
        print(
            f"{label:<22} {t_pure_i*1e6:>10.1f}us {t_fast_i*1e6:>10.1f}us "
            f"{t_pure_c*1e6:>10.1f}us {t_fast_c*1e6:>10.1f}us {speedup:>7.2f}x"
        )
    if _kernels is not None:
        print("bit-identical outputs: yes")


def bench_train_step(steps: int) -> None:
    print()
    print(f"full training step, default model, batch 8 (mean of {steps} steps):")
    for pure in ("0", "1"):
        env = dict(os.environ, VIDFACTORY_PURE=pure)
        env["PYTHONPATH"] = os.path.join(os.path.dirname(__file__), "..", "src")
        out = subprocess.run(
            [sys.executable, "-c", STEP_SNIPPET % {"steps": steps}],
            env=env, capture_output=True, text=True, check=True,
        ).stdout.strip()
        backend, per_step = out.split()
        print(f"  {backend:<9} {float(per_step)*1e3:8.1f} ms/step")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=200, help="timing repeats per shape")
    parser.add_argument("--steps", type=int, default=10, help="training steps per backend")
    parser.add_argument("--skip-step", action="store_true", help="kernel micro-benchmarks only")
    args = parser.parse_args()

    if _kernels is None:
        print("compiled extension not importable; timing the pure backend only")
    bench_kernels(args.repeats)
    if not args.skip_step:
        bench_train_step(args.steps)


if __name__ == "__main__":
    main()
