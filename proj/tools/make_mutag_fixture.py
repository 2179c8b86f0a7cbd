#!/usr/bin/env python3
"""Writes the MUTAG-style test fixture in TU text format.

Molecule-like graphs: one to three carbon rings (node label 0), chain carbons
and heteroatom substituents (labels 1-6). Class 1 graphs carry a nitro-like
motif (a label-1 atom bound to a ring carbon and two label-2 atoms); class -1
graphs carry decoy groups that share the atom types but not the motif. A small
fraction of labels is flipped so the task is not perfectly separable.

Usage: make_mutag_fixture.py OUT_DIR [--seed N] [--graphs N]
"""

import argparse
import os
import random

NAME = "MUTAG_FIXTURE"


class Molecule:
    def __init__(self):
        self.labels = []
        self.edges = set()

    def add(self, label, attach=None):
        v = len(self.labels)
        self.labels.append(label)
        if attach is not None:
            self.bond(v, attach)
        return v

    def bond(self, a, b):
        if a != b:
            self.edges.add((min(a, b), max(a, b)))

    def ring(self, size, fuse_with=None):
        nodes = []
        start = 0
        if fuse_with is not None:
            nodes = list(fuse_with)
            start = len(nodes)
        for _ in range(start, size):
            nodes.append(self.add(0))
        for i in range(size):
            self.bond(nodes[i], nodes[(i + 1) % size])
        return nodes


def build(rng, mutagenic):
    m = Molecule()
    rings = [m.ring(6)]
    for _ in range(rng.choice([0, 1, 1, 2])):
        base = rng.choice(rings)
        i = rng.randrange(6)
        if rng.random() < 0.6:
            rings.append(m.ring(6, fuse_with=[base[i], base[(i + 1) % 6]]))
        else:
            bridge = m.add(0, base[i])
            rings.append(m.ring(6))
            m.bond(bridge, rings[-1][0])
    ring_atoms = [v for r in rings for v in r]

    def free_ring_atom():
        degree = {}
        for a, b in m.edges:
            degree[a] = degree.get(a, 0) + 1
            degree[b] = degree.get(b, 0) + 1
        options = [v for v in ring_atoms if degree.get(v, 0) <= 2]
        return rng.choice(options or ring_atoms)

    if mutagenic:
        for _ in range(rng.choice([1, 1, 2])):
            n = m.add(1, free_ring_atom())
            m.add(2, n)
            m.add(2, n)
    else:
        for _ in range(rng.choice([1, 2])):
            kind = rng.random()
            anchor = free_ring_atom()
            if kind < 0.4:
                m.add(1, anchor)  # amine
            elif kind < 0.7:
                c = m.add(0, anchor)
                m.add(2, c)
                m.add(2, c)  # carboxyl-like
            else:
                m.add(2, anchor)  # hydroxyl
    for _ in range(rng.choice([0, 0, 1, 2])):
        m.add(rng.choice([3, 4, 5, 6]), free_ring_atom())
    if rng.random() < 0.3:
        c = m.add(0, free_ring_atom())
        m.add(0, c)
    return m


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("out_dir")
    parser.add_argument("--seed", type=int, default=188)
    parser.add_argument("--graphs", type=int, default=188)
    parser.add_argument("--noise", type=float, default=0.08)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    os.makedirs(args.out_dir, exist_ok=True)
    adj_lines, indicator, node_labels, graph_labels = [], [], [], []
    offset = 0
    for gid in range(args.graphs):
        mutagenic = rng.random() < 125 / 188
        m = build(rng, mutagenic)
        label = 1 if mutagenic else -1
        if rng.random() < args.noise:
            label = -label
        for a, b in sorted(m.edges):
            adj_lines.append(f"{a + 1 + offset}, {b + 1 + offset}")
            adj_lines.append(f"{b + 1 + offset}, {a + 1 + offset}")
        indicator.extend([gid + 1] * len(m.labels))
        node_labels.extend(m.labels)
        graph_labels.append(label)
        offset += len(m.labels)

    def write(suffix, rows):
        with open(os.path.join(args.out_dir, f"{NAME}_{suffix}.txt"), "w") as f:
            for r in rows:
                f.write(f"{r}\n")

    write("A", adj_lines)
    write("graph_indicator", indicator)
    write("node_labels", node_labels)
    write("graph_labels", graph_labels)


if __name__ == "__main__":
    main()
