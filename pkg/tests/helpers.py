"""Exhaustive expectation of the round-2 correction, shared by unit and acceptance tests."""

import itertools

import numpy as np

from fgrdp.triangle import ObfuscatedMatrix, round2_tables, rr_retention_split


def third_edge_slots(g2, d_tilde):
    slots = set()
    for i in range(g2.node_count):
        up = [x for x in g2.neighbors(i)[:d_tilde] if x > i]
        slots.update((k, j) for j, k in itertools.combinations(up, 2))
    return sorted(slots)


def exhaustive_expectation(g2, pol2, d_tilde, alpha):
    """E[w_tilde_i] per node over every outcome of the bits round 2 reads."""
    a = g2.dense()
    n = g2.node_count
    slots = third_edge_slots(g2, d_tilde)
    p_level = rr_retention_split(alpha, np.asarray(pol2.budgets))
    keep = np.array([p_level[pol2.node_level[k] - 1] for k, _ in slots])
    truth = np.array([a[k, j] for k, j in slots], dtype=np.uint8)
    pos = np.array([k * (k - 1) // 2 + j for k, j in slots], dtype=np.int64)
    row_p = p_level[pol2.node_level - 1]
    expect_total = 0.0
    expect_node = np.zeros(n)
    mass = 0.0
    for outcome in itertools.product((0, 1), repeat=len(slots)):
        b = np.array(outcome, dtype=np.uint8)
        prob = float(np.prod(np.where(b == truth, keep, 1 - keep)))
        bits = np.zeros(n * (n - 1) // 2, dtype=np.uint8)
        bits[pos] = b
        _, _, w = round2_tables(g2, ObfuscatedMatrix(n, bits, row_p), pol2, d_tilde, alpha)
        expect_node += prob * w.sum(axis=1)
        mass += prob
    return len(slots), mass, expect_node
