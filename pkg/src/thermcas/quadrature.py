"""Composite Gauss-Legendre rules on graded panels.

The integrands met here have three kinds of structure: an integrable
endpoint singularity or a narrow feature next to the lower limit (ideal
metals, the Drude TE channel near zero frequency), a smooth exponential
decay further out, and nothing beyond that.  ``graded_edges`` builds panel
boundaries that are geometric near the origin and uniform afterwards.
"""

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def gauss_legendre(order):
    """Nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def composite_rule(edges, order):
    """Nodes and weights of the composite rule over consecutive ``edges``."""
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(order)
    a = edges[:-1, None]
    b = edges[1:, None]
    half = 0.5 * (b - a)
    nodes = (a + half * (x[None, :] + 1.0)).ravel()
    weights = (half * w[None, :]).ravel()
    return nodes, weights


@lru_cache(maxsize=None)
def graded_edges(span, first=1e-10, ratio=4.0, unit=1.0, steps=((8.0, 1.0), (16.0, 2.0), (None, 4.0))):
    """Panel edges on [0, span]: geometric from ``first`` up to ``unit``, then
    uniform with the widths listed in ``steps`` as (up_to, width) pairs."""
    edges = [0.0]
    e = first
    while e < unit:
        edges.append(e)
        e *= ratio
    edges.append(unit)
    pos = unit
    for upto, width in steps:
        upto = span if upto is None else min(upto, span)
        while pos + 0.5 * width < upto:
            pos += width
            edges.append(pos)
        if upto == span:
            break
    if edges[-1] < span:
        edges.append(span)
    else:
        edges[-1] = span
    out = np.array(edges)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def graded_rule(span, order, first=1e-10):
    nodes, weights = composite_rule(graded_edges(span, first), order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


@lru_cache(maxsize=None)
def two_sided_rule(lo, hi, order, first):
    """Rule on [lo, hi] graded towards both endpoints (width ``first`` at each)."""
    half = 0.5 * (hi - lo)
    edges = graded_edges(half, first, 4.0, min(1.0, half / 2), ((None, half / 4),))
    left = lo + edges
    right = hi - edges[::-1]
    nodes, weights = composite_rule(np.concatenate([left, right[1:]]), order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def log_rule(lo, hi, order, per_panel=np.log(2.0)):
    """Rule for int_lo^hi g(x) dx on panels uniform in log x; weights include x."""
    s_lo, s_hi = np.log(lo), np.log(hi)
    n = max(1, int(np.ceil((s_hi - s_lo) / per_panel)))
    s, w = composite_rule(np.linspace(s_lo, s_hi, n + 1), order)
    x = np.exp(s)
    return x, w * x
