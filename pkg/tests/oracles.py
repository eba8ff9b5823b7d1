"""Independent reference computations used by the tests.

Nothing here imports the package's numeric code.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


_trapezoid = getattr(np, "trapezoid", None) or np.trapz


def trap_degree(x, a, b, c, d):
    """Trapezoid membership written as a clipped minimum of the two edge lines."""
    x = np.asarray(x, dtype=float)
    left = np.ones_like(x) if b == a else (x - a) / (b - a)
    right = np.ones_like(x) if d == c else (d - x) / (d - c)
    y = np.clip(np.minimum(left, right), 0.0, 1.0)
    return np.where((x < a) | (x > d), 0.0, y)


def _lines(corners, strength):
    a, b, c, d = corners
    lines = [(0.0, strength)]
    if b > a:
        lines.append((1 / (b - a), -a / (b - a)))
    if d > c:
        lines.append((-1 / (d - c), d / (d - c)))
    return lines


def centroid_oracle(shapes, strengths, lo, hi, uniform=2001):
    """Centroid of max_k min(shape_k, s_k), evaluated pointwise.

    Nodes are a uniform grid plus every point where the clipped-and-maxed
    function can bend (breakpoints and pairwise intersections of the
    linear pieces), so it is linear between nodes: the trapezoid rule gives
    the area exactly and each segment's first moment is integrated in closed
    form.
    """
    nodes = set(np.linspace(lo, hi, uniform).tolist())
    lines = []
    for corners, s in zip(shapes, strengths):
        if s <= 0:
            continue
        nodes.update(corners)
        lines.extend(_lines(corners, s))
    lines.append((0.0, 0.0))
    for (m1, q1), (m2, q2) in itertools.combinations(lines, 2):
        if m1 != m2:
            nodes.add((q2 - q1) / (m1 - m2))
    xs = np.array(sorted(x for x in nodes if lo <= x <= hi and math.isfinite(x)))
    mu = np.zeros_like(xs)
    for corners, s in zip(shapes, strengths):
        if s > 0:
            mu = np.maximum(mu, np.minimum(trap_degree(xs, *corners), s))
    x0, x1, m0, m1 = xs[:-1], xs[1:], mu[:-1], mu[1:]
    area = _trapezoid(mu, xs)
    moment = np.sum((x1 - x0) * (2 * x0 * m0 + x0 * m1 + x1 * m0 + 2 * x1 * m1) / 6)
    return moment / area


def triangle_centroid(a, b, c):
    return (a + b + c) / 3
