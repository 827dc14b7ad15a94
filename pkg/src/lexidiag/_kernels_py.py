"""Pure-Python fallback for the hot per-generation kernels.

The compiled module (lexidiag._kernels) implements the same loops in C. Both
must consume random draws in exactly this order so that runs are bit-identical
regardless of engine:

  selection event: Fisher-Yates shuffle of all case indices (C - 1 randbelow
  draws), then the filter cascade (no draws), then one randbelow(pool size)
  draw only if more than one candidate survives every case.

  mutation: genes visited row-major; one uniform per gene, and if it falls
  below the rate, one Gaussian draw (two uniforms via Box-Muller).
"""

from __future__ import annotations

import numpy as np

ENGINE = "python"


def select_event(traits, case_to_trait, rng, want_trace: bool = False):
    """One lexicase selection event over a trait matrix.

    Returns (selected index, shuffle, trace) where trace is a list of
    (case_index, pool size after filtering) or None.
    """
    n = traits.shape[0]
    order = list(range(len(case_to_trait)))
    rng.shuffle(order)
    pool = list(range(n))
    trace = [] if want_trace else None
    for case in order:
        if len(pool) == 1:
            break
        t = case_to_trait[case]
        best = traits[pool[0], t]
        for i in pool:
            v = traits[i, t]
            if v > best:
                best = v
        pool = [i for i in pool if traits[i, t] == best]
        if want_trace:
            trace.append((case, len(pool)))
    if len(pool) > 1:
        selected = pool[rng.randbelow(len(pool))]
    else:
        selected = pool[0]
    return selected, order, trace


def select_parents(traits, case_to_trait, count, rng):
    """count independent selection events; returns an intp index array."""
    out = np.empty(count, dtype=np.intp)
    for k in range(count):
        out[k], _, _ = select_event(traits, case_to_trait, rng)
    return out


def mutate_batch(genes, rate, mean, sd, upper, rng):
    """Point-mutate a gene matrix; unmutated genes are copied bit-exactly.

    Out-of-range values are folded back by abs-value below zero and reflection
    off the upper threshold, repeated until in [0, upper].
    """
    out = np.array(genes, dtype=np.float64, copy=True)
    n, d = out.shape
    for r in range(n):
        for c in range(d):
            if rng.random() < rate:
                z = rng.gauss()
                v = out[r, c] + (mean + sd * z)
                while v < 0.0 or v > upper:
                    if v < 0.0:
                        v = -v
                    else:
                        v = upper - (v - upper)
                out[r, c] = v
    return out
