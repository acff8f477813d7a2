"""Finite resistor networks and their energy forms.

Two representations live here:

* :class:`ResistorNetwork` keeps an explicit multiset of conductance edges and
  is what the Kirchhoff and delta-wye reductions operate on.
* :class:`QuadraticForm` is the dense graph Laplacian ``L = D - C`` with
  ``E(u) = u^T L u = 1/2 sum_pq (u_p - u_q)^2 C_pq``.

Conductances are recovered from a form as the negated off-diagonal entries.
"""

from __future__ import annotations

import json
from collections.abc import Hashable, Iterable, Mapping, Sequence
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

Node = Hashable

# Relative tolerance for symmetry / zero row sums of a stored form.
FORM_RTOL = 1e-12
# Pivots below this fraction of the largest diagonal entry are singular.
PIVOT_RTOL = 1e-12
# Negative round-off conductances down to -CLAMP_RTOL * scale are set to zero.
CLAMP_RTOL = 1e-9


class NetworkError(ValueError):
    pass


class SingularInteriorError(NetworkError):
    """Raised when some interior component is not attached to the boundary."""


class InfiniteResistanceError(NetworkError):
    pass


class ReductionError(NetworkError):
    """A Kirchhoff or delta-wye step was requested where it does not apply."""


@dataclass(frozen=True)
class ResistorNetwork:
    nodes: tuple
    edges: tuple  # of (u, v, conductance); parallel edges allowed

    def __init__(self, nodes: Iterable[Node], edges: Iterable[tuple] = ()):
        nodes = tuple(nodes)
        edges = tuple((u, v, float(c)) for u, v, c in edges)
        if len(set(nodes)) != len(nodes):
            raise NetworkError("duplicate node labels")
        known = set(nodes)
        for u, v, c in edges:
            if u == v:
                raise NetworkError(f"self-loop at {u!r}")
            if u not in known or v not in known:
                raise NetworkError(f"edge ({u!r}, {v!r}) has an unknown endpoint")
            if not (c > 0 and np.isfinite(c)):
                raise NetworkError(f"edge ({u!r}, {v!r}) has conductance {c}")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edges)

    def neighbors(self, node: Node) -> dict:
        """Total conductance from ``node`` to each adjacent node."""
        out: dict = {}
        for u, v, c in self.edges:
            if u == node:
                out[v] = out.get(v, 0.0) + c
            elif v == node:
                out[u] = out.get(u, 0.0) + c
        return out

    def conductance(self, u: Node, v: Node) -> float:
        return sum(c for a, b, c in self.edges if {a, b} == {u, v})

    def resistance(self, u: Node, v: Node) -> float:
        c = self.conductance(u, v)
        return 1.0 / c if c > 0 else float("inf")


@dataclass(frozen=True, eq=False)
class QuadraticForm:
    """Symmetric matrix with zero row sums and nonpositive off-diagonals."""

    nodes: tuple
    matrix: np.ndarray

    def __init__(self, nodes: Iterable[Node], matrix, *, check: bool = True):
        nodes = tuple(nodes)
        mat = np.array(matrix, dtype=float, copy=True)
        if mat.shape != (len(nodes), len(nodes)):
            raise NetworkError(f"matrix shape {mat.shape} does not match {len(nodes)} nodes")
        if len(set(nodes)) != len(nodes):
            raise NetworkError("duplicate node labels")
        if check:
            _check_form(mat)
        mat.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def from_conductances(cls, nodes: Iterable[Node], conductances: Mapping) -> QuadraticForm:
        """Build from ``{(u, v): c}``; repeated pairs are summed."""
        nodes = tuple(nodes)
        return laplacian_of(ResistorNetwork(nodes, [(u, v, c) for (u, v), c in conductances.items() if c != 0]))

    def __len__(self) -> int:
        return len(self.nodes)

    def index(self, node: Node) -> int:
        try:
            return self.nodes.index(node)
        except ValueError:
            raise NetworkError(f"unknown node {node!r}") from None

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.matrix))) if self.matrix.size else 0.0

    def conductance(self, u: Node, v: Node) -> float:
        return -float(self.matrix[self.index(u), self.index(v)])

    def conductances(self, tol: float = 0.0) -> dict:
        """``{(u, v): c}`` for node pairs with ``c > tol`` in node order."""
        out = {}
        n = len(self.nodes)
        for i in range(n):
            for j in range(i + 1, n):
                c = -self.matrix[i, j]
                if c > tol:
                    out[(self.nodes[i], self.nodes[j])] = float(c)
        return out

    def to_network(self) -> ResistorNetwork:
        return ResistorNetwork(self.nodes, [(u, v, c) for (u, v), c in self.conductances().items()])

    def vector(self, values: Mapping) -> np.ndarray:
        missing = [p for p in self.nodes if p not in values]
        if missing:
            raise NetworkError(f"no value for nodes {missing}")
        return np.array([float(values[p]) for p in self.nodes])

    def reorder(self, nodes: Sequence[Node]) -> QuadraticForm:
        nodes = tuple(nodes)
        if set(nodes) != set(self.nodes) or len(nodes) != len(self.nodes):
            raise NetworkError("reorder needs a permutation of the node list")
        idx = [self.index(p) for p in nodes]
        return QuadraticForm(nodes, self.matrix[np.ix_(idx, idx)], check=False)

    def scaled(self, factor: float) -> QuadraticForm:
        return QuadraticForm(self.nodes, factor * self.matrix, check=False)

    def relabel(self, mapping: Mapping) -> QuadraticForm:
        return QuadraticForm([mapping.get(p, p) for p in self.nodes], self.matrix, check=False)


@dataclass(frozen=True)
class BoundaryValues:
    assignments: dict

    def __init__(self, assignments: Mapping):
        object.__setattr__(self, "assignments", {k: float(v) for k, v in assignments.items()})


def _check_form(mat: np.ndarray) -> None:
    if mat.size == 0:
        return
    if not np.all(np.isfinite(mat)):
        raise NetworkError("form has non-finite entries")
    tol = FORM_RTOL * max(float(np.max(np.abs(mat))), 1.0e-300)
    if np.max(np.abs(mat - mat.T)) > tol:
        raise NetworkError("form is not symmetric")
    if np.max(np.abs(mat.sum(axis=1))) > tol * len(mat):
        raise NetworkError("form rows do not sum to zero")
    off = mat - np.diag(np.diag(mat))
    if np.max(off) > tol:
        raise NetworkError("form has a negative conductance (positive off-diagonal entry)")


def _canonical(mat: np.ndarray) -> np.ndarray:
    """Symmetrize, clamp round-off conductances, and reset the diagonal."""
    mat = 0.5 * (mat + mat.T)
    np.fill_diagonal(mat, 0.0)
    scale = float(np.max(np.abs(mat))) if mat.size else 0.0
    if mat.size and np.max(mat) > CLAMP_RTOL * scale:
        raise NetworkError(
            f"negative conductance {-np.max(mat):.3e} after reduction; input is not a network"
        )
    mat[mat > 0] = 0.0
    np.fill_diagonal(mat, -mat.sum(axis=1))
    return mat


def _as_values(values, form: QuadraticForm) -> np.ndarray:
    if isinstance(values, BoundaryValues):
        values = values.assignments
    return form.vector(values)


def laplacian_of(net: ResistorNetwork) -> QuadraticForm:
    n = len(net.nodes)
    pos = {p: i for i, p in enumerate(net.nodes)}
    mat = np.zeros((n, n))
    for u, v, c in net.edges:
        i, j = pos[u], pos[v]
        mat[i, j] -= c
        mat[j, i] -= c
        mat[i, i] += c
        mat[j, j] += c
    return QuadraticForm(net.nodes, mat, check=False)


def parallel_reduce(net: ResistorNetwork) -> ResistorNetwork:
    merged: dict = {}
    for u, v, c in net.edges:
        key = (u, v) if (v, u) not in merged else (v, u)
        merged[key] = merged.get(key, 0.0) + c
    return ResistorNetwork(net.nodes, [(u, v, c) for (u, v), c in merged.items()])


def eliminate_series_node(net: ResistorNetwork, r: Node) -> ResistorNetwork:
    """Replace ``p - r - q`` by a single ``p - q`` resistor ``R_pr + R_rq``."""
    nbrs = net.neighbors(r)
    if r not in net.nodes or len(nbrs) != 2:
        raise ReductionError(f"{r!r} is not a series node (it has {len(nbrs)} neighbors)")
    (p, c_p), (q, c_q) = nbrs.items()
    c_new = 1.0 / (1.0 / c_p + 1.0 / c_q)
    edges = [e for e in net.edges if r not in (e[0], e[1])]
    edges.append((p, q, c_new))
    return parallel_reduce(ResistorNetwork([x for x in net.nodes if x != r], edges))


def delta_to_y(net: ResistorNetwork, tri: Sequence[Node], center_label: Node) -> ResistorNetwork:
    """Replace the triangle on ``tri`` by a star centred at ``center_label``.

    Leg resistances follow ``r_a = R_ab R_ac / (R_ab + R_bc + R_ac)``.
    """
    a, b, c = tri
    if center_label in net.nodes:
        raise ReductionError(f"center label {center_label!r} already used")
    r_ab, r_bc, r_ac = net.resistance(a, b), net.resistance(b, c), net.resistance(a, c)
    if not all(np.isfinite([r_ab, r_bc, r_ac])):
        raise ReductionError(f"triangle {a!r}, {b!r}, {c!r} is missing an edge")
    total = r_ab + r_bc + r_ac
    legs = {a: r_ab * r_ac / total, b: r_ab * r_bc / total, c: r_ac * r_bc / total}
    side = {frozenset(p) for p in ((a, b), (b, c), (a, c))}
    edges = [e for e in net.edges if frozenset(e[:2]) not in side]
    edges += [(center_label, x, 1.0 / r) for x, r in legs.items()]
    return ResistorNetwork(net.nodes + (center_label,), edges)


def y_to_delta(net: ResistorNetwork, center: Node) -> ResistorNetwork:
    """Inverse of :func:`delta_to_y`: ``R_ab = (r_a r_b + r_b r_c + r_a r_c) / r_c``."""
    nbrs = net.neighbors(center)
    if center not in net.nodes or len(nbrs) != 3:
        raise ReductionError(f"{center!r} is not a star center (it has {len(nbrs)} neighbors)")
    (a, ca), (b, cb), (c, cc) = nbrs.items()
    ra, rb, rc = 1.0 / ca, 1.0 / cb, 1.0 / cc
    num = ra * rb + rb * rc + ra * rc
    edges = [e for e in net.edges if center not in (e[0], e[1])]
    edges += [(a, b, rc / num), (b, c, ra / num), (a, c, rb / num)]
    return ResistorNetwork([x for x in net.nodes if x != center], edges)


def _factor_interior(lap: np.ndarray, interior: np.ndarray, scale: float) -> np.ndarray:
    """Cholesky factor of the interior block with an explicit pivot check.

    The squared diagonal of the factor are exactly the pivots of symmetric
    Gaussian elimination in node order.
    """
    block = lap[np.ix_(interior, interior)]
    try:
        chol = np.linalg.cholesky(block)
    except np.linalg.LinAlgError:
        raise SingularInteriorError("floating interior component (singular interior block)") from None
    pivots = np.diag(chol) ** 2
    if pivots.size and pivots.min() < PIVOT_RTOL * scale:
        raise SingularInteriorError("floating interior component (singular interior block)")
    return chol


def _split(form: QuadraticForm, boundary: Sequence[Node]):
    bidx = np.array([form.index(p) for p in boundary], dtype=int)
    if len(set(bidx.tolist())) != len(bidx):
        raise NetworkError("boundary lists a node twice")
    mask = np.ones(len(form), dtype=bool)
    mask[bidx] = False
    iidx = np.flatnonzero(mask)
    return bidx, iidx


def trace_to(form: QuadraticForm, boundary: Sequence[Node]) -> QuadraticForm:
    """Schur complement ``A - B D^-1 B^T`` onto ``boundary`` (in the given order)."""
    boundary = tuple(boundary)
    bidx, iidx = _split(form, boundary)
    lap = form.matrix
    a_block = lap[np.ix_(bidx, bidx)]
    if iidx.size == 0:
        return QuadraticForm(boundary, _canonical(a_block.copy()), check=False)
    scale = float(np.max(np.diag(lap)))
    chol = _factor_interior(lap, iidx, scale)
    b_block = lap[np.ix_(bidx, iidx)]
    half = solve_triangular(chol, b_block.T, lower=True)
    return QuadraticForm(boundary, _canonical(a_block - half.T @ half), check=False)


def harmonic_extension(form: QuadraticForm, bv) -> dict:
    """Energy-minimizing extension of boundary values to every node.

    Interior values satisfy the weighted mean-value property
    ``u(p) = sum_q C_pq u(q) / sum_q C_pq``.
    """
    if isinstance(bv, BoundaryValues):
        bv = bv.assignments
    boundary = tuple(p for p in form.nodes if p in bv)
    unknown = set(bv) - set(form.nodes)
    if unknown:
        raise NetworkError(f"boundary values for unknown nodes {sorted(map(str, unknown))}")
    bidx, iidx = _split(form, boundary)
    out = {p: float(bv[p]) for p in boundary}
    if iidx.size == 0:
        return {p: out[p] for p in form.nodes}
    lap = form.matrix
    scale = float(np.max(np.diag(lap)))
    chol = _factor_interior(lap, iidx, scale)
    ub = np.array([out[p] for p in boundary])
    rhs = -lap[np.ix_(iidx, bidx)] @ ub
    y = solve_triangular(chol, rhs, lower=True)
    ui = solve_triangular(chol.T, y, lower=False)
    for i, val in zip(iidx, ui):
        out[form.nodes[i]] = float(val)
    return {p: out[p] for p in form.nodes}


def energy(form: QuadraticForm, u) -> float:
    """``u^T L u`` summed edge by edge, so constants give exactly 0."""
    x = _as_values(u, form)
    i, j = np.triu_indices(len(x), 1)
    return float(np.sum(-form.matrix[i, j] * (x[i] - x[j]) ** 2))


def components(form: QuadraticForm) -> list[list[Node]]:
    """Connected components of the conductance graph, in node order."""
    adj = form.matrix != 0
    seen = np.zeros(len(form), dtype=bool)
    comps = []
    for start in range(len(form)):
        if seen[start]:
            continue
        stack, comp = [start], []
        seen[start] = True
        while stack:
            i = stack.pop()
            comp.append(i)
            for j in np.flatnonzero(adj[i]):
                if not seen[j]:
                    seen[j] = True
                    stack.append(j)
        comps.append([form.nodes[i] for i in sorted(comp)])
    return comps


def effective_resistance(form: QuadraticForm, p: Node, q: Node) -> float:
    form.index(p)
    form.index(q)
    if p == q:
        return 0.0
    comp = next(c for c in components(form) if p in c)
    if q not in comp:
        raise InfiniteResistanceError(f"infinite resistance: {p!r} and {q!r} are disconnected")
    sub = form.reorder(comp + [x for x in form.nodes if x not in comp])
    n = len(comp)
    sub = QuadraticForm(comp, sub.matrix[:n, :n], check=False)
    c = trace_to(sub, (p, q)).conductance(p, q)
    return 1.0 / c


def resistance_matrix(form: QuadraticForm, nodes: Sequence[Node] | None = None) -> np.ndarray:
    nodes = form.nodes if nodes is None else tuple(nodes)
    n = len(nodes)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = effective_resistance(form, nodes[i], nodes[j])
    return out


# --- interchange -----------------------------------------------------------


def read_edgelist(text: str) -> ResistorNetwork:
    """Parse ``u v conductance`` lines; ``#`` starts a comment."""
    nodes: list = []
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise NetworkError(f"line {lineno}: expected 'u v conductance', got {raw!r}")
        u, v, c = parts
        for x in (u, v):
            if x not in nodes:
                nodes.append(x)
        try:
            edges.append((u, v, float(c)))
        except ValueError:
            raise NetworkError(f"line {lineno}: conductance {c!r} is not a number") from None
    return ResistorNetwork(nodes, edges)


def to_edgelist(net: ResistorNetwork) -> str:
    return "".join(f"{u} {v} {c!r}\n" for u, v, c in net.edges)


def to_dot(net: ResistorNetwork) -> str:
    lines = ["graph {"]
    lines += [f'  "{p}";' for p in net.nodes]
    lines += [f'  "{u}" -- "{v}" [label="{c!r}"];' for u, v, c in net.edges]
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_json(net: ResistorNetwork) -> str:
    doc = {
        "nodes": list(net.nodes),
        "edges": [{"u": u, "v": v, "c": c} for u, v, c in net.edges],
    }
    return json.dumps(doc, indent=2) + "\n"


def from_json(text: str) -> ResistorNetwork:
    doc = json.loads(text)
    return ResistorNetwork(doc["nodes"], [(e["u"], e["v"], e["c"]) for e in doc["edges"]])
