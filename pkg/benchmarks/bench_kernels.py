#!/usr/bin/env python3
"""Benchmark the numba-compiled kernels against the pure-Python/NumPy path.

Usage: python benchmarks/bench_kernels.py

Covers the two hot spots: the sequential closed-loop kernel (compiled loop
vs the same loop under CPython) and connected-component labeling (union-find
kernel vs the vectorized min-propagation fallback).  Run with
GAITLAB_NO_NUMBA=1 to confirm the fallback path alone.
"""

import time

import numpy as np

from gaitlab import _kernels
from gaitlab._accel import NUMBA_ENABLED
from gaitlab.cpg import CpgParams
from gaitlab.feedback import FeedbackGains, FilterParams
from gaitlab.heatmap import _label_numpy, _label_unionfind
from gaitlab.plant import DT, PlantParams, default_effectiveness
from gaitlab.pose import LegGeometry


def time_call(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def closed_loop_args(n_steps):
    rng = np.random.default_rng(0)
    cmds = np.tile([0.6, 0.1, -0.2], (n_steps, 1))
    noise = rng.normal(0.0, 0.06, (n_steps, 2))
    geom = LegGeometry()
    return (
        cmds,
        noise,
        np.array([n_steps // 2], dtype=np.int64),
        np.array([[0.6, -0.2]]),
        CpgParams().to_array(),
        FeedbackGains().to_array(),
        FilterParams().to_array(),
        PlantParams(seed=0).to_array(),
        default_effectiveness(),
        np.array([geom.thigh, geom.shank, 0.1]),
        DT,
        0.0,
        np.zeros(4),
    )


def bench_closed_loop():
    print("closed-loop kernel (steps/s):")
    for n_steps in (2_000, 20_000):
        args = closed_loop_args(n_steps)
        if NUMBA_ENABLED:
            _kernels.run_closed_loop(*args)  # compile before timing
            t_jit = time_call(_kernels.run_closed_loop, *args)
            t_py = time_call(_kernels.run_closed_loop.py_func, *args, repeat=2)
            print(
                f"  n={n_steps:6d}: numba {n_steps / t_jit:12.0f}   "
                f"python {n_steps / t_py:10.0f}   speedup {t_py / t_jit:6.1f}x"
            )
        else:
            t_py = time_call(_kernels.run_closed_loop, *args, repeat=2)
            print(f"  n={n_steps:6d}: python {n_steps / t_py:10.0f} (numba disabled)")


def bench_labeling():
    rng = np.random.default_rng(1)
    print("connected-component labeling (masks/s):")
    for size, count in ((32, 20), (128, 8), (512, 2)):
        masks = [(rng.random((size, size)) < 0.45).astype(np.uint8) for _ in range(count)]

        def run(label_fn):
            for m in masks:
                label_fn(m)

        if NUMBA_ENABLED:
            _label_unionfind(masks[0])  # compile before timing
            t_uf = time_call(run, _label_unionfind) / len(masks)
            t_np = time_call(run, _label_numpy, repeat=1) / len(masks)
            print(
                f"  {size:4d}x{size}: union-find {1 / t_uf:10.0f}   "
                f"numpy {1 / t_np:8.1f}   speedup {t_np / t_uf:6.1f}x"
            )
        else:
            t_np = time_call(run, _label_numpy, repeat=1) / len(masks)
            print(f"  {size:4d}x{size}: numpy {1 / t_np:8.1f} (numba disabled)")


if __name__ == "__main__":
    print(f"numba enabled: {NUMBA_ENABLED}")
    bench_closed_loop()
    bench_labeling()
