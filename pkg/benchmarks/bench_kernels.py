#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times the three hot paths on realistic sizes: component labeling on a full
synthetic page, contour feature histograms over a batch of normalized
glyphs, and nearest-center assignment at training scale.

Usage:
    python3 benchmarks/bench_kernels.py [--pages N] [--glyphs N] [--repeat N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from glyphforge.features import normalize_glyph
from glyphforge.kernels import get_backend
from glyphforge.raster import connected_components
from glyphforge.synth import KNOWN_WRITERS, render_page


def _time(fn, repeat: int) -> float:
    fn()  # warmup (jit compile / cache priming)
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def make_inputs(pages: int, glyphs: int):
    rng = np.random.default_rng(0)
    page_bitmaps = []
    for i in range(pages):
        bitmap, _ = render_page(
            "".join(str(int(d)) for d in rng.integers(0, 10, size=120)),
            KNOWN_WRITERS[i % len(KNOWN_WRITERS)],
            rng,
        )
        page_bitmaps.append(bitmap)

    grids = []
    for bitmap in page_bitmaps:
        for blob in connected_components(bitmap):
            grids.append(normalize_glyph(blob).grid)
            if len(grids) >= glyphs:
                break
        if len(grids) >= glyphs:
            break

    points = rng.random((glyphs, 128))
    centers = rng.random((80, 128))
    return page_bitmaps, grids, points, centers


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--pages", type=int, default=8)
    parser.add_argument("--glyphs", type=int, default=800)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    backends = {}
    backends["numpy"] = get_backend("numpy")
    try:
        backends["numba"] = get_backend("numba")
    except ImportError:
        print("numba unavailable; benchmarking the numpy fallback only")

    pages, grids, points, centers = make_inputs(args.pages, args.glyphs)
    total_px = sum(b.pixels.size for b in pages)
    print(
        f"inputs: {len(pages)} pages ({total_px / 1e6:.1f} Mpx), "
        f"{len(grids)} glyph grids, {len(points)}x128 vectors vs 80 centers"
    )

    cases = {
        "label_image (pages)": lambda impl: [
            impl.label_image(b.pixels, True) for b in pages
        ],
        "contour_histogram (glyphs)": lambda impl: [
            impl.contour_histogram(g, 8, 4) for g in grids
        ],
        "assign_nearest": lambda impl: impl.assign_nearest(points, centers),
    }

    results: dict[str, dict[str, float]] = {name: {} for name in cases}
    for backend_name, impl in backends.items():
        for case_name, fn in cases.items():
            results[case_name][backend_name] = _time(lambda: fn(impl), args.repeat)

    width = max(map(len, cases)) + 2
    header = f"{'kernel':<{width}} " + " ".join(f"{b:>12}" for b in backends)
    if len(backends) == 2:
        header += f" {'speedup':>9}"
    print()
    print(header)
    print("-" * len(header))
    for case_name in cases:
        row = f"{case_name:<{width}} "
        row += " ".join(f"{results[case_name][b] * 1e3:>10.2f}ms" for b in backends)
        if len(backends) == 2:
            ratio = results[case_name]["numpy"] / results[case_name]["numba"]
            row += f" {ratio:>8.1f}x"
        print(row)


if __name__ == "__main__":
    main()
