import dataclasses
import itertools
import json

import numpy as np
import pytest

import affine_oracle as oracle
from fractal_forms import catalog
from fractal_forms.network import effective_resistance, trace_to
from fractal_forms.structure import (
    CellSchema,
    SchemaError,
    build_level,
    level1_labels,
    renormalize,
    replicate,
    validate,
)

AFFINE = {
    "gasket": (catalog.gasket_schema, oracle.GASKET_MAPS, oracle.GASKET_COORDS),
    "fractalina": (catalog.fractalina_schema, oracle.FRACTALINA_MAPS, oracle.FRACTALINA_COORDS),
}


# --- validation -------------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(catalog.BUILTINS))
def test_builtins_validate(name):
    validate(catalog.builtin(name))


@pytest.mark.parametrize("name", sorted(AFFINE))
def test_schema_agrees_with_affine_maps(name):
    make, maps, coords = AFFINE[name]
    assert oracle.check_schema(make(), maps, coords) == []


def test_non_injective_cell_is_rejected(pillow):
    # both cells read v2 -> u2 and v4 -> u2
    prose = {"v1": "v1", "v2": "u2", "v3": "v2", "v4": "u2"}
    bad = dataclasses.replace(pillow, cell_maps=(prose, prose))
    with pytest.raises(SchemaError) as err:
        validate(bad)
    assert any("not injective" in p for p in err.value.problems)


def test_alternative_pillow_cell_gives_same_network(pillow):
    alt = dataclasses.replace(
        pillow, cell_maps=(pillow.cell_maps[0], {"v1": "v4", "v2": "u1", "v3": "v3", "v4": "u2"})
    )
    validate(alt)
    m = pillow.base_form()
    assert np.allclose(replicate(alt, 1.0, m).matrix, replicate(pillow, 1.0, m).matrix, rtol=0, atol=0)
    a = build_level(alt, None, 2).form()
    b = build_level(pillow, None, 2).form()
    assert np.allclose(np.sort(np.linalg.eigvalsh(a.matrix)), np.sort(np.linalg.eigvalsh(b.matrix)), atol=1e-12)


def test_validate_collects_every_problem(gasket):
    bad = dataclasses.replace(
        gasket,
        cell_maps=gasket.cell_maps[:2],
        weights=(1.0, 1.0, 1.0),
        class_values={"c": -1.0},
    )
    with pytest.raises(SchemaError) as err:
        validate(bad)
    text = " ".join(err.value.problems)
    assert "not covered" in text
    assert "weights length" in text
    assert "nonpositive" in text


def test_symmetry_closure_is_checked(pillow):
    edges = tuple((u, v, "C1" if cls == "C2" and u == "v1" else cls) for u, v, cls in pillow.base_edges)
    with pytest.raises(SchemaError, match="symmetry"):
        validate(dataclasses.replace(pillow, base_edges=edges))


@pytest.mark.parametrize("name", sorted(catalog.BUILTINS))
def test_schema_json_roundtrip(name):
    schema = catalog.builtin(name)
    doc = json.loads(schema.to_json())
    assert {"boundary", "level1_nodes", "cells", "edges", "class_values"} <= set(doc)
    back = CellSchema.from_json(schema.to_json())
    assert back.to_json() == schema.to_json()


def test_from_dict_validates(gasket):
    doc = gasket.to_dict()
    doc["cells"][0]["p2"] = "nowhere"
    with pytest.raises(SchemaError):
        CellSchema.from_dict(doc)


# --- replicate / renormalize -----------------------------------------------------------


def test_replicate_pillow_matches_figure(pillow):
    c = pillow.class_values
    fine = replicate(pillow, [1.0, 1.0], pillow.base_form())
    assert fine.nodes == pillow.v1
    assert fine.conductance("u1", "u2") == pytest.approx(2 * c["C1"])
    assert fine.conductance("v1", "u2") == pytest.approx(c["C2"])
    assert fine.conductance("v1", "v2") == pytest.approx(c["C1"])
    # corners of different halves share no edge
    assert fine.conductance("v1", "v3") == 0.0


def test_replicate_is_linear_in_weights(fractalina):
    m = fractalina.base_form()
    half = replicate(fractalina, 0.5, m).matrix
    assert np.allclose(half, 0.5 * replicate(fractalina, 1.0, m).matrix, rtol=0, atol=1e-15)


def test_replicate_gasket_unit(gasket):
    fine = replicate(gasket, [1, 1, 1], gasket.base_form())
    assert len(fine) == 6
    assert sorted(fine.conductances().values()) == [1.0] * 9


def test_renormalize_gasket(gasket):
    coarse = renormalize(gasket, 1.0, gasket.base_form())
    assert coarse.conductances() == pytest.approx(
        {(u, v): 0.6 for u, v in itertools.combinations(gasket.v0, 2)}, abs=1e-15
    )


def test_renormalize_homogeneity(pillow):
    rng = np.random.default_rng(1)
    m = catalog.pillow_schema(catalog.PillowParams.from_conductances(*rng.uniform(0.5, 2, 3))).base_form()
    lam = renormalize(pillow, 1.0, m).matrix
    assert np.allclose(renormalize(pillow, 2.0, m).matrix, 2 * lam, rtol=1e-12, atol=0)
    assert np.allclose(renormalize(pillow, 1.0, m.scaled(3.0)).matrix, 3 * lam, rtol=1e-12, atol=0)


def test_renormalize_fractalina_fixed_point(fractalina):
    m = fractalina.base_form()
    image = renormalize(fractalina, 1.0, m)
    assert np.allclose(image.matrix, catalog.FRACTALINA_K * m.matrix, rtol=0, atol=1e-9 * m.scale)


def test_fractalina_trace_stays_on_base_edges(fractalina):
    image = renormalize(fractalina, 1.0, fractalina.base_form())
    support = {frozenset((u, v)) for u, v, _ in fractalina.base_edges}
    extra = {e: c for e, c in image.conductances().items() if frozenset(e) not in support}
    assert all(abs(c) < 1e-12 for c in extra.values())


# --- build_level -----------------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(catalog.BUILTINS))
def test_level0_is_base_network(name):
    schema = catalog.builtin(name)
    graph = build_level(schema, None, 0)
    assert graph.network == schema.base_network()
    assert graph.boundary == {a: a for a in schema.v0}


@pytest.mark.parametrize(
    "name, n, count", [("fractalina", 1, 12), ("gasket", 1, 6), ("gasket", 2, 15), ("pillow", 1, 6), ("pillow", 2, 10)]
)
def test_node_counts(name, n, count):
    graph = build_level(catalog.builtin(name), None, n)
    assert len(graph.network.nodes) == count
    assert len(graph.network.edges) == len(catalog.builtin(name).base_edges) * catalog.builtin(name).n_cells**n


def point_of(maps, coords, address):
    word, slot = address
    return oracle.compose(maps, [c - 1 for c in word])(coords[slot])


@pytest.mark.parametrize("name", sorted(AFFINE))
@pytest.mark.parametrize("n", [1, 2, 3])
def test_level_graph_matches_affine_geometry(name, n):
    make, maps, coords = AFFINE[name]
    schema = make()
    graph = build_level(schema, None, n)
    points = {node: point_of(maps, coords, addr) for node, addr in graph.address_index.items()}
    assert len(set(points.values())) == len(points)  # no missed gluing
    assert set(points.values()) == oracle.level_points(maps, [coords[a] for a in schema.v0], n)
    segments = sorted(
        (frozenset((points[u], points[v])) for u, v, _ in graph.network.edges), key=lambda s: sorted(s)
    )
    pairs = [(u, v) for u, v, _ in schema.base_edges]
    assert segments == oracle.level_segments(maps, coords, schema.v0, pairs, n)
    for a in schema.v0:
        assert points[graph.boundary[a]] == coords[a]


@pytest.mark.parametrize("name", sorted(catalog.BUILTINS))
def test_level1_is_replicate(name):
    schema = catalog.builtin(name)
    graph = build_level(schema, None, 1)
    names = level1_labels(schema, graph)
    assert sorted(names.values()) == sorted(schema.v1)
    form = graph.form().relabel(names).reorder(schema.v1)
    assert np.allclose(form.matrix, replicate(schema, 1.0, schema.base_form()).matrix, rtol=0, atol=1e-14)


@pytest.mark.parametrize("name", sorted(catalog.BUILTINS))
def test_level2_trace_is_twice_renormalized(name):
    schema = catalog.builtin(name)
    graph = build_level(schema, None, 2)
    traced = trace_to(graph.form(), [graph.boundary[a] for a in schema.v0]).relabel(
        {v: k for k, v in graph.boundary.items()}
    )
    twice = renormalize(schema, 1.0, renormalize(schema, 1.0, schema.base_form()))
    assert np.allclose(traced.reorder(schema.v0).matrix, twice.matrix, rtol=0, atol=1e-12)


@pytest.mark.parametrize("n", range(5))
def test_gasket_growth_law(gasket, n):
    graph = build_level(gasket, None, n)
    r = effective_resistance(graph.form(), graph.boundary["p1"], graph.boundary["p2"])
    assert r == pytest.approx(2 / 3 * (5 / 3) ** n, rel=1e-10)


def test_build_level_class_value_override(gasket):
    graph = build_level(gasket, {"c": 2.0}, 1)
    assert {c for *_, c in graph.network.edges} == {2.0}


def test_negative_level_rejected(gasket):
    with pytest.raises(ValueError):
        build_level(gasket, None, -1)
