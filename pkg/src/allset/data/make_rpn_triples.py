"""Regenerate ``rpn_triples.json``: six lines through the origin of R^3.

Points 0-2 are coplanar lines at angles 0, pi/3 and 2pi/3. Points 3-5 are
lines spanned by (1,1,0), (1,0,1), (0,1,1), turned by a fixed rotation.
Both triples have all pairwise angles pi/3 under the projective distance
``arccos |<u, v>|``, but the first spans a plane and the second does not,
so no orthogonal map carries one onto the other.

Run ``python -m allset.data.make_rpn_triples`` to rewrite the file.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

OUT = Path(__file__).with_name("rpn_triples.json")


def rotation(axis, angle):
    a = np.asarray(axis, float)
    a /= np.linalg.norm(a)
    k = np.array([[0, -a[2], a[1]], [a[2], 0, -a[0]], [-a[1], a[0], 0]])
    return np.eye(3) + np.sin(angle) * k + (1 - np.cos(angle)) * k @ k


def lines():
    planar = [[np.cos(t), np.sin(t), 0.0] for t in (0.0, np.pi / 3, 2 * np.pi / 3)]
    spread = np.array([[1, 1, 0], [1, 0, 1], [0, 1, 1]], float) / np.sqrt(2)
    spread = spread @ rotation([0.3, -0.5, 0.8], 0.7).T
    u = np.vstack([planar, spread])
    return u / np.linalg.norm(u, axis=1, keepdims=True)


def distances(u):
    return np.arccos(np.clip(np.abs(u @ u.T), 0.0, 1.0))


def build():
    u = lines()
    d = distances(u)
    np.fill_diagonal(d, 0.0)
    d = (d + d.T) / 2
    return {
        "description": "six lines in RP^2 with distance arccos|<u,v>|; two triples with all distances pi/3",
        "vectors": u.tolist(),
        "matrix": {"n": 6, "kind": "metric", "d": d.tolist()},
        "triple_a": [0, 1, 2],
        "triple_b": [3, 4, 5],
    }


if __name__ == "__main__":
    OUT.write_text(json.dumps(build(), indent=2) + "\n")
    print(f"wrote {OUT}")
