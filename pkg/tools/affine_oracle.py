"""Derive cell identifications of affine fractals with exact arithmetic.

Evaluates the contraction maps at rational vertex coordinates so that two
cell/slot pairs are identified exactly when they land on the same point.
Running the script prints the derived level-1 tables; the test-suite uses
``check_schema`` and ``level_segments`` to audit the shipped schemas and the
level-n gluing.

    python tools/affine_oracle.py
"""

from __future__ import annotations

import json
from fractions import Fraction as Fr
from itertools import product

Point = tuple


def _half(p, q):
    return ((p[0] + q[0]) / 2, (p[1] + q[1]) / 2)


P1, P2, P3 = (Fr(0), Fr(0)), (Fr(4), Fr(0)), (Fr(2), Fr(4))

GASKET_MAPS = [
    lambda z: _half(z, P1),
    lambda z: _half(z, P2),
    lambda z: _half(z, P3),
]

# third map rotates by 180 degrees about P3: z -> (3 P3 - z) / 2
FRACTALINA_MAPS = [
    lambda z: _half(z, P1),
    lambda z: _half(z, P2),
    lambda z: ((3 * P3[0] - z[0]) / 2, (3 * P3[1] - z[1]) / 2),
]

GASKET_COORDS = {
    "p1": P1,
    "p2": P2,
    "p3": P3,
    "m12": _half(P1, P2),
    "m13": _half(P1, P3),
    "m23": _half(P2, P3),
}

FRACTALINA_COORDS = {
    "P1": P1,
    "P2": P2,
    "P3": P3,
    "Q1": FRACTALINA_MAPS[2](P1),
    "Q2": FRACTALINA_MAPS[2](P2),
    "m": (Fr(2), Fr(0)),
    "s1": (Fr(1), Fr(2)),
    "s2": (Fr(3), Fr(2)),
    "a": (Fr(3, 2), Fr(3)),
    "b": (Fr(5, 2), Fr(3)),
    "t1": (Fr(1, 2), Fr(3)),
    "t2": (Fr(7, 2), Fr(3)),
}


def compose(maps, word):
    def f(z):
        for i in reversed(word):
            z = maps[i](z)
        return z

    return f


def level_points(maps, boundary_points, n):
    """The set V_n = union over words w of length n of F_w(V_0)."""
    pts = set()
    for word in product(range(len(maps)), repeat=n):
        f = compose(maps, word)
        pts.update(f(p) for p in boundary_points)
    return pts


def level_segments(maps, coords, v0, base_pairs, n):
    """Multiset of point pairs {F_w(u), F_w(v)} for every word and base edge."""
    out = []
    for word in product(range(len(maps)), repeat=n):
        f = compose(maps, word)
        for u, v in base_pairs:
            out.append(frozenset((f(coords[u]), f(coords[v]))))
    return sorted(out, key=lambda s: sorted(s))


def derive_tables(maps, coords, v0):
    """Level-1 cell tables as label maps, naming points via ``coords``."""
    by_point = {p: label for label, p in coords.items()}
    cells = []
    for f in maps:
        cells.append({a: by_point.get(f(coords[a]), str(f(coords[a]))) for a in v0})
    return cells


def check_schema(schema, maps, coords):
    """List every disagreement between a schema's cell maps and the affine maps."""
    problems = []
    if len(set(coords[x] for x in schema.v1)) != len(schema.v1):
        problems.append("level-1 labels do not name distinct points")
    for i, (f, cmap) in enumerate(zip(maps, schema.cell_maps), 1):
        for a in schema.v0:
            if f(coords[a]) != coords[cmap[a]]:
                problems.append(f"cell {i}: F({a}) = {f(coords[a])} but table says {cmap[a]}")
    image = {f(coords[a]) for f in maps for a in schema.v0}
    if image != {coords[x] for x in schema.v1}:
        problems.append("level-1 labels differ from the union of cell images")
    return problems


def main():
    tables = {
        "gasket": derive_tables(GASKET_MAPS, GASKET_COORDS, ["p1", "p2", "p3"]),
        "fractalina": derive_tables(FRACTALINA_MAPS, FRACTALINA_COORDS, ["P1", "P2", "P3", "Q1", "Q2"]),
    }
    print(json.dumps(tables, indent=2))


if __name__ == "__main__":
    main()
