"""Self-similar cell structures and their level graphs.

A :class:`CellSchema` describes a post-critically finite structure
combinatorially: ``N`` cell maps send the boundary labels ``v0`` into the
level-1 labels ``v1``. Everything else (replication, renormalization, level-n
gluing) is derived from those maps.
"""

from __future__ import annotations

import json
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product

import numpy as np

from .network import QuadraticForm, ResistorNetwork, laplacian_of, trace_to


class SchemaError(ValueError):
    def __init__(self, problems: Sequence[str]):
        self.problems = list(problems)
        super().__init__("invalid schema: " + "; ".join(self.problems))


@dataclass(frozen=True)
class CellSchema:
    name: str
    v0: tuple
    v1: tuple
    cell_maps: tuple  # one {v0 label: v1 label} dict per cell
    base_edges: tuple  # (u, v, class label); the first edge is the default normalization
    class_values: dict  # class label -> conductance
    weights: tuple = ()
    symmetries: tuple = ()  # permutations of v0 the form is meant to respect

    def __post_init__(self):
        object.__setattr__(self, "v0", tuple(self.v0))
        object.__setattr__(self, "v1", tuple(self.v1))
        object.__setattr__(self, "cell_maps", tuple(dict(m) for m in self.cell_maps))
        object.__setattr__(self, "base_edges", tuple(tuple(e) for e in self.base_edges))
        object.__setattr__(self, "class_values", {k: float(v) for k, v in self.class_values.items()})
        weights = tuple(float(w) for w in self.weights) or (1.0,) * len(self.cell_maps)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "symmetries", tuple(dict(s) for s in self.symmetries))

    @property
    def n_cells(self) -> int:
        return len(self.cell_maps)

    @cached_property
    def boundary_embedding(self) -> dict:
        """``a -> (cell, slot)`` with ``cell_maps[cell][slot] == a`` (first preimage found)."""
        emb = {}
        for a in self.v0:
            for i, cmap in enumerate(self.cell_maps):
                hits = [s for s in self.v0 if cmap.get(s) == a]
                if hits:
                    emb[a] = (i, hits[0])
                    break
        return emb

    @property
    def edge_classes(self) -> dict:
        """Class label -> list of base edges, in first-appearance order."""
        out: dict = {}
        for u, v, cls in self.base_edges:
            out.setdefault(cls, []).append((u, v))
        return out

    def base_network(self, class_values: Mapping | None = None) -> ResistorNetwork:
        values = {**self.class_values, **(class_values or {})}
        return ResistorNetwork(self.v0, [(u, v, values[cls]) for u, v, cls in self.base_edges])

    def base_form(self, class_values: Mapping | None = None) -> QuadraticForm:
        return laplacian_of(self.base_network(class_values))

    def with_class_values(self, class_values: Mapping) -> CellSchema:
        return CellSchema(
            self.name, self.v0, self.v1, self.cell_maps, self.base_edges,
            {**self.class_values, **class_values}, self.weights, self.symmetries,
        )

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "boundary": list(self.v0),
            "level1_nodes": list(self.v1),
            "cells": [dict(m) for m in self.cell_maps],
            "edges": [{"u": u, "v": v, "class": cls} for u, v, cls in self.base_edges],
            "class_values": dict(self.class_values),
            "weights": list(self.weights),
            "symmetries": [dict(s) for s in self.symmetries],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, doc: Mapping) -> CellSchema:
        try:
            schema = cls(
                name=doc["name"],
                v0=doc["boundary"],
                v1=doc["level1_nodes"],
                cell_maps=doc["cells"],
                base_edges=[(e["u"], e["v"], e["class"]) for e in doc["edges"]],
                class_values=doc["class_values"],
                weights=doc.get("weights") or (),
                symmetries=doc.get("symmetries") or (),
            )
        except (KeyError, TypeError) as exc:
            raise SchemaError([f"malformed schema document: {exc!r}"]) from None
        validate(schema)
        return schema

    @classmethod
    def from_json(cls, text: str) -> CellSchema:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError([f"not JSON: {exc}"]) from None
        return cls.from_dict(doc)


def validate(schema: CellSchema) -> None:
    """Check every structural invariant; raise :class:`SchemaError` listing all failures."""
    problems = []
    v0, v1 = schema.v0, schema.v1
    if len(set(v0)) != len(v0):
        problems.append("duplicate boundary labels")
    if len(set(v1)) != len(v1):
        problems.append("duplicate level-1 labels")
    missing = [a for a in v0 if a not in v1]
    if missing:
        problems.append(f"boundary labels {missing} are not level-1 nodes")
    if not schema.cell_maps:
        problems.append("no cells")
    covered = set()
    for i, cmap in enumerate(schema.cell_maps, 1):
        if set(cmap) != set(v0):
            problems.append(f"cell {i} does not map exactly the boundary labels")
        targets = list(cmap.values())
        dup = sorted({t for t in targets if targets.count(t) > 1}, key=str)
        if dup:
            problems.append(f"cell {i} maps several slots to {dup} (not injective)")
        stray = [t for t in targets if t not in v1]
        if stray:
            problems.append(f"cell {i} maps into unknown nodes {stray}")
        covered.update(targets)
    uncovered = [x for x in v1 if x not in covered]
    if uncovered:
        problems.append(f"level-1 nodes {uncovered} are not covered by any cell")
    emb = schema.boundary_embedding
    for a in v0:
        if a not in emb:
            problems.append(f"boundary node {a!r} has no preimage in any cell")
    if len(schema.weights) != len(schema.cell_maps):
        problems.append("weights length differs from the number of cells")
    elif any(not w > 0 for w in schema.weights):
        problems.append("weights must be positive")
    for u, v, cls in schema.base_edges:
        if u not in v0 or v not in v0 or u == v:
            problems.append(f"base edge ({u!r}, {v!r}) is not between distinct boundary nodes")
        if cls not in schema.class_values:
            problems.append(f"edge class {cls!r} has no value")
    for cls, val in schema.class_values.items():
        if not val > 0:
            problems.append(f"class {cls!r} has nonpositive conductance {val}")
    edge_set = {(frozenset((u, v)), cls) for u, v, cls in schema.base_edges}
    for k, perm in enumerate(schema.symmetries, 1):
        if set(perm) != set(v0) or set(perm.values()) != set(v0):
            problems.append(f"symmetry {k} is not a permutation of the boundary")
            continue
        image = {(frozenset((perm[u], perm[v])), cls) for u, v, cls in schema.base_edges}
        if image != edge_set:
            problems.append(f"base edges are not closed under symmetry {k}")
    if problems:
        raise SchemaError(problems)


def _check_weights(schema: CellSchema, rho) -> np.ndarray:
    rho = np.broadcast_to(np.asarray(rho, dtype=float), (schema.n_cells,))
    if np.any(rho <= 0):
        raise ValueError("weights must be positive")
    return rho


def _on_v0(schema: CellSchema, form: QuadraticForm) -> np.ndarray:
    if set(form.nodes) != set(schema.v0) or len(form) != len(schema.v0):
        raise ValueError(f"form nodes {form.nodes} do not match the boundary {schema.v0}")
    return form.reorder(schema.v0).matrix


def replicate(schema: CellSchema, rho, form: QuadraticForm) -> QuadraticForm:
    """``sum_i rho_i psi_i M psi_i^T`` as a form on ``v1``."""
    rho = _check_weights(schema, rho)
    mat = _on_v0(schema, form)
    pos = {x: k for k, x in enumerate(schema.v1)}
    out = np.zeros((len(schema.v1), len(schema.v1)))
    for w, cmap in zip(rho, schema.cell_maps):
        idx = np.array([pos[cmap[a]] for a in schema.v0])
        out[np.ix_(idx, idx)] += w * mat
    return QuadraticForm(schema.v1, out, check=False)


def renormalize(schema: CellSchema, rho, form: QuadraticForm) -> QuadraticForm:
    """The renormalization map: trace of the replicated form back onto ``v0``."""
    return trace_to(replicate(schema, rho, form), schema.v0)


@dataclass(frozen=True)
class LevelGraph:
    level: int
    network: ResistorNetwork
    boundary: dict  # v0 label -> node label
    address_index: dict = field(repr=False)  # node label -> (word, slot), word 1-based

    def form(self) -> QuadraticForm:
        return laplacian_of(self.network)


def address_label(word: Sequence[int], slot) -> str:
    return ".".join([*(str(c) for c in word), str(slot)])


def build_level(schema: CellSchema, class_values: Mapping | None, n: int) -> LevelGraph:
    """Glue ``N**n`` copies of the base network along the cell identifications."""
    if n < 0:
        raise ValueError("level must be nonnegative")
    validate(schema)
    emb = schema.boundary_embedding
    slot_rank = {a: k for k, a in enumerate(schema.v0)}
    values = {**schema.class_values, **(class_values or {})}

    def expand(word: tuple, slot) -> tuple:
        while len(word) < n:
            cell, slot = emb[slot]
            word = word + (cell,)
        return word, slot

    def key(addr):
        return addr[0], slot_rank[addr[1]]

    parent: dict = {}

    def find(x):
        root = x
        while parent.get(root, root) != root:
            root = parent[root]
        while parent.get(x, x) != root:
            parent[x], x = root, parent[x]
        return root

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            lo, hi = sorted((rx, ry), key=key)
            parent[hi] = lo

    # same v1 target from two different (cell, slot) pairs => glue, at every depth
    preimages: dict = {}
    for i, cmap in enumerate(schema.cell_maps):
        for a in schema.v0:
            preimages.setdefault(cmap[a], []).append((i, a))
    glue = [pairs for pairs in preimages.values() if len(pairs) > 1]
    for depth in range(n):
        for prefix in product(range(schema.n_cells), repeat=depth):
            for pairs in glue:
                (i0, a0), rest = pairs[0], pairs[1:]
                for i, a in rest:
                    union(expand(prefix + (i0,), a0), expand(prefix + (i,), a))

    words = list(product(range(schema.n_cells), repeat=n))
    canon = {}
    for word in words:
        for a in schema.v0:
            canon[(word, a)] = find((word, a))
    reps = sorted(set(canon.values()), key=key)

    def label(addr):
        word, slot = addr
        return address_label([c + 1 for c in word], slot) if n else slot

    labels = {r: label(r) for r in reps}
    edges = []
    for word in words:
        for u, v, cls in schema.base_edges:
            edges.append((labels[canon[(word, u)]], labels[canon[(word, v)]], values[cls]))
    network = ResistorNetwork([labels[r] for r in reps], edges)
    boundary = {a: labels[find(expand((), a))] for a in schema.v0}
    address_index = {labels[r]: (tuple(c + 1 for c in r[0]), r[1]) for r in reps}
    return LevelGraph(n, network, boundary, address_index)


def level1_labels(schema: CellSchema, graph: LevelGraph) -> dict:
    """Map level-1 node labels of ``graph`` to the schema's ``v1`` labels."""
    if graph.level != 1:
        raise ValueError("only meaningful for level 1")
    out = {}
    for node, (word, slot) in graph.address_index.items():
        out[node] = schema.cell_maps[word[0] - 1][slot]
    return out
