"""Built-in structures and the closed-form solution routes.

The gasket and fractalina cell tables come from evaluating their affine maps
at rational vertex coordinates (see ``tools/affine_oracle.py``). The pillow
tables are read off its level-1 conductance picture.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .network import (
    QuadraticForm,
    ResistorNetwork,
    delta_to_y,
    effective_resistance,
    eliminate_series_node,
    trace_to,
)
from .solver import scalar_bisect
from .structure import CellSchema, replicate, validate

FRACTALINA_K = (3.0 + math.sqrt(41.0)) / 16.0
FRACTALINA_R1 = (-1.0 + math.sqrt(41.0)) / 4.0
PILLOW_RHO = 2.0 ** (1.0 / 3.0)
PILLOW_C2 = 2.0 ** (-1.0 / 3.0) + 2.0 ** (1.0 / 3.0)
PILLOW_C3 = 2.0 ** (-1.0 / 3.0)

FRACTALINA_BRACKET = (0.51, 0.63)
# The two equal-ratio equations are singular at rho = 1 and C3 < 0 past sqrt(2).
PILLOW_BRACKET = (1.05, 1.4)


# --- gasket ------------------------------------------------------------------


def gasket_schema() -> CellSchema:
    schema = CellSchema(
        name="gasket",
        v0=("p1", "p2", "p3"),
        v1=("p1", "p2", "p3", "m12", "m13", "m23"),
        cell_maps=(
            {"p1": "p1", "p2": "m12", "p3": "m13"},
            {"p1": "m12", "p2": "p2", "p3": "m23"},
            {"p1": "m13", "p2": "m23", "p3": "p3"},
        ),
        base_edges=(("p1", "p2", "c"), ("p2", "p3", "c"), ("p1", "p3", "c")),
        class_values={"c": 1.0},
        symmetries=(
            {"p1": "p2", "p2": "p1", "p3": "p3"},
            {"p1": "p1", "p2": "p3", "p3": "p2"},
        ),
    )
    validate(schema)
    return schema


# --- fractalina ----------------------------------------------------------------


@dataclass(frozen=True)
class FractalinaParams:
    k: float
    R1: float
    R2: float = 1.0

    def __post_init__(self):
        if not (self.k > 0 and self.R1 > 0 and self.R2 > 0):
            raise ValueError(f"nonpositive resistance in {self}")


FRACTALINA_SOLUTION = FractalinaParams(FRACTALINA_K, FRACTALINA_R1)


def fractalina_class_values(p: FractalinaParams) -> dict:
    return {
        "side": 1.0 / p.R2,
        "base": 1.0 / p.R1,
        "top": 1.0 / (p.k * p.R1),
        "top_side": 1.0 / (p.k * p.R2),
    }


def fractalina_schema(params: FractalinaParams = FRACTALINA_SOLUTION) -> CellSchema:
    """Hourglass boundary P1, P2, P3, Q1 = F3(P1), Q2 = F3(P2).

    Level-1 extras: m = F1(P2) = F2(P1), s1/s2 = F1(P3)/F2(P3),
    a = F1(Q1) = F3(Q1), b = F2(Q2) = F3(Q2), t1 = F1(Q2), t2 = F2(Q1).
    """
    schema = CellSchema(
        name="fractalina",
        v0=("P1", "P2", "P3", "Q1", "Q2"),
        v1=("P1", "P2", "P3", "Q1", "Q2", "m", "s1", "s2", "a", "b", "t1", "t2"),
        cell_maps=(
            {"P1": "P1", "P2": "m", "P3": "s1", "Q1": "a", "Q2": "t1"},
            {"P1": "m", "P2": "P2", "P3": "s2", "Q1": "t2", "Q2": "b"},
            {"P1": "Q1", "P2": "Q2", "P3": "P3", "Q1": "a", "Q2": "b"},
        ),
        base_edges=(
            ("P1", "P3", "side"),
            ("P2", "P3", "side"),
            ("P1", "P2", "base"),
            ("Q1", "Q2", "top"),
            ("Q1", "P3", "top_side"),
            ("Q2", "P3", "top_side"),
        ),
        class_values=fractalina_class_values(params),
        symmetries=({"P1": "P2", "P2": "P1", "P3": "P3", "Q1": "Q2", "Q2": "Q1"},),
    )
    validate(schema)
    return schema


def fractalina_form(p: FractalinaParams) -> QuadraticForm:
    return fractalina_schema(p).base_form()


def fractalina_level1_y(p: FractalinaParams) -> tuple[float, float, float]:
    """Star legs after delta-wye on both hourglass triangles.

    ``alpha`` is a Q leg, ``beta`` the two P3 legs in series, ``gamma`` a
    bottom P leg.
    """
    k, r1, r2 = p.k, p.R1, p.R2
    d = 2.0 * r2 + r1
    return k * r1 * r2 / d, (k + 1.0) * r2 * r2 / d, r1 * r2 / d


def fractalina_level1_y_by_reduction(p: FractalinaParams) -> tuple[float, float, float]:
    net = fractalina_form(p).to_network()
    net = delta_to_y(net, ("P1", "P2", "P3"), "yP")
    net = delta_to_y(net, ("Q1", "Q2", "P3"), "yQ")
    return net.resistance("yQ", "Q1"), net.resistance("yQ", "P3") + net.resistance("yP", "P3"), net.resistance("yP", "P1")


def fractalina_r1_of_k(k: float) -> float:
    """R1 solving the P1-P2 ratio equation for given k (with R2 = 1)."""
    return (1.0 - k - 2.0 * k * k) / (4.0 * k * k - k - 1.0)


def fractalina_fine_form(p: FractalinaParams) -> QuadraticForm:
    """The 12-node network of three unscaled copies."""
    schema = fractalina_schema(p)
    return replicate(schema, np.ones(3), schema.base_form())


def fractalina_primed(p: FractalinaParams) -> tuple[float, float, float]:
    """Double-star legs of the refined network, read off its Schur trace.

    The reduced refined network is a tree on P1, P2, Q1, Q2, so the legs
    follow from the pairwise effective resistances.
    """
    fine = trace_to(fractalina_fine_form(p), ("P1", "P2", "Q1", "Q2"))
    alpha_p = effective_resistance(fine, "Q1", "Q2") / 2.0
    gamma_p = effective_resistance(fine, "P1", "P2") / 2.0
    beta_p = effective_resistance(fine, "P1", "Q1") - alpha_p - gamma_p
    return alpha_p, beta_p, gamma_p


def fractalina_primed_displayed(p: FractalinaParams) -> tuple[float, float]:
    """Hand-derived (beta', gamma'), with the R1*R1 term read as R1*R2."""
    k, r1, r2 = p.k, p.R1, p.R2
    kappa_num = 2 * k * r1 * r2 + k * r2**2 + r2**2
    e = 4 * k * r1 * r2 + 2 * k * r2**2 + 2 * r2**2 + 2 * r1 * r2
    den = (2 * r2 + r1) * e
    beta_p = (kappa_num**2 + (k * r2**2 + r2**2) * e) / den
    gamma_p = (kappa_num * (2 * r2 * r1) + (r1 * r2) * e) / den
    return beta_p, gamma_p


def fractalina_ratio_mismatch(p: FractalinaParams) -> tuple[float, float]:
    """Residuals of ``k = gamma/gamma'`` and ``k = (alpha+beta+gamma)/(alpha'+beta'+gamma')``."""
    alpha, beta, gamma = fractalina_level1_y(p)
    ap, bp, gp = fractalina_primed(p)
    return p.k - gamma / gp, p.k - (alpha + beta + gamma) / (ap + bp + gp)


def fractalina_mismatch(k: float) -> float:
    return fractalina_ratio_mismatch(FractalinaParams(k, fractalina_r1_of_k(k)))[1]


def fractalina_solve(tol: float = 1e-13) -> tuple[float, float]:
    k = scalar_bisect(fractalina_mismatch, FRACTALINA_BRACKET, tol)
    return k, fractalina_r1_of_k(k)


def fractalina_reduction(p: FractalinaParams) -> tuple[dict, ResistorNetwork]:
    """Reduce the refined network by Kirchhoff and delta-wye steps.

    Returns the named intermediate resistances and the final network, the
    double star ``Q1, Q2 -alpha'- c0 -beta'- c -gamma'- P1, P2``. The dead-end
    nodes t1 and t2 (legs zeta) are dropped once recorded.
    """
    net = fractalina_fine_form(p).to_network()
    net = delta_to_y(net, ("Q1", "Q2", "P3"), "c0")
    net = delta_to_y(net, ("a", "b", "P3"), "c1")
    net = eliminate_series_node(net, "P3")
    net = delta_to_y(net, ("s1", "a", "t1"), "cL")
    net = delta_to_y(net, ("s2", "b", "t2"), "cR")
    net = eliminate_series_node(net, "a")
    net = eliminate_series_node(net, "b")
    net = delta_to_y(net, ("P1", "m", "s1"), "bL")
    net = delta_to_y(net, ("P2", "m", "s2"), "bR")
    net = eliminate_series_node(net, "s1")
    net = eliminate_series_node(net, "s2")
    net = eliminate_series_node(net, "m")
    q = {
        "alpha'": net.resistance("c0", "Q1"),
        "delta": net.resistance("c0", "c1"),
        "epsilon": net.resistance("c1", "cL"),
        "zeta": net.resistance("cL", "t1"),
        "eta": net.resistance("cL", "bL"),
        "theta": net.resistance("bL", "P1"),
        "iota": net.resistance("bL", "bR"),
    }
    net = ResistorNetwork(
        [x for x in net.nodes if x not in ("t1", "t2")],
        [e for e in net.edges if "t1" not in e[:2] and "t2" not in e[:2]],
    )
    net = eliminate_series_node(net, "cL")
    net = eliminate_series_node(net, "cR")
    q["kappa"] = net.resistance("c1", "bL")
    net = delta_to_y(net, ("c1", "bL", "bR"), "c")
    net = eliminate_series_node(net, "c1")
    net = eliminate_series_node(net, "bL")
    net = eliminate_series_node(net, "bR")
    q["beta'"] = net.resistance("c0", "c")
    q["gamma'"] = net.resistance("c", "P1")
    return q, net


# --- pillow ------------------------------------------------------------------


@dataclass(frozen=True)
class PillowParams:
    C1: float
    C2: float
    C3: float
    x: float
    y: float

    @classmethod
    def from_conductances(cls, c1: float, c2: float, c3: float) -> PillowParams:
        x, y = pillow_potentials(c1, c2, c3)
        return cls(c1, c2, c3, x, y)


def pillow_potentials(c1: float, c2: float, c3: float) -> tuple[float, float]:
    """Interior potentials (u1, u2) for the state that is 1 at v4 and 0 elsewhere."""
    s = 2.0 * (c1 + c2 + c3)
    mat = np.array([[s, -2.0 * c1], [-2.0 * c1, s]])
    x, y = np.linalg.solve(mat, [c2, c3])
    return float(x), float(y)


PILLOW_SOLUTION = PillowParams.from_conductances(1.0, PILLOW_C2, PILLOW_C3)

PILLOW_CONFIGS = {
    "f1": {"v1": 0.0, "v2": 0.0, "v3": 0.0, "v4": 1.0},
    "f2": {"v1": 1.0, "v2": 0.0, "v3": 0.0, "v4": 1.0},
    "f3": {"v1": 0.0, "v2": 0.0, "v3": 1.0, "v4": 1.0},
}


def pillow_schema(params: PillowParams = PILLOW_SOLUTION) -> CellSchema:
    """Two half-rectangle cells glued along the u1-u2 edge.

    v1, v2 are the left corners (bottom, top), v3, v4 the right ones; u1 and
    u2 are the top and bottom midpoints.
    """
    schema = CellSchema(
        name="pillow",
        v0=("v1", "v2", "v3", "v4"),
        v1=("v1", "v2", "v3", "v4", "u1", "u2"),
        cell_maps=(
            {"v1": "v1", "v2": "u2", "v3": "v2", "v4": "u1"},
            {"v1": "u2", "v2": "v3", "v3": "u1", "v4": "v4"},
        ),
        base_edges=(
            ("v1", "v3", "C1"),
            ("v2", "v4", "C1"),
            ("v1", "v2", "C2"),
            ("v3", "v4", "C2"),
            ("v1", "v4", "C3"),
            ("v2", "v3", "C3"),
        ),
        class_values={"C1": params.C1, "C2": params.C2, "C3": params.C3},
        symmetries=(
            {"v1": "v2", "v2": "v1", "v3": "v4", "v4": "v3"},
            {"v1": "v3", "v3": "v1", "v2": "v4", "v4": "v2"},
            {"v1": "v4", "v4": "v1", "v2": "v3", "v3": "v2"},
        ),
    )
    validate(schema)
    return schema


def pillow_config_ratios(p: PillowParams) -> tuple[float, float, float]:
    c1, c2, c3 = p.C1, p.C2, p.C3
    x, y = pillow_potentials(c1, c2, c3)
    fine = (
        c1 * (1 + 2 * (x - y) ** 2)
        + c2 * (x * x + 2 * y * y + (x - 1) ** 2)
        + c3 * (2 * x * x + y * y + (y - 1) ** 2)
    )
    r1 = (c1 + c2 + c3) / fine
    r2 = (2 * c1 + 2 * c2) / (2 * c1 + c2 + c3)
    r3 = (2 * c1 + 2 * c3) / (c2 + c3)
    return r1, r2, r3


def pillow_conductances_for(rho: float) -> tuple[float, float]:
    """(C2, C3) making configurations 2 and 3 scale by ``rho`` when C1 = 1."""
    mat = np.array([[rho - 2.0, rho], [rho, rho - 2.0]])
    c2, c3 = np.linalg.solve(mat, [2.0 - 2.0 * rho, 2.0])
    return float(c2), float(c3)


def pillow_mismatch(rho: float) -> float:
    c2, c3 = pillow_conductances_for(rho)
    return pillow_config_ratios(PillowParams.from_conductances(1.0, c2, c3))[0] - rho


def pillow_solve(tol: float = 1e-13) -> tuple[PillowParams, float]:
    rho = scalar_bisect(pillow_mismatch, PILLOW_BRACKET, tol)
    c2, c3 = pillow_conductances_for(rho)
    return PillowParams.from_conductances(1.0, c2, c3), rho


BUILTINS = {
    "gasket": gasket_schema,
    "fractalina": fractalina_schema,
    "pillow": pillow_schema,
}


def builtin(name: str) -> CellSchema:
    try:
        return BUILTINS[name]()
    except KeyError:
        raise KeyError(f"unknown built-in {name!r}; choose from {sorted(BUILTINS)}") from None
