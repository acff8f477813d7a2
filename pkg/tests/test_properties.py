import itertools

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from fractal_forms.network import (
    ResistorNetwork,
    delta_to_y,
    effective_resistance,
    laplacian_of,
    trace_to,
    y_to_delta,
)

conductance = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(st.tuples(conductance, conductance, conductance))
def test_delta_y_is_invertible(cs):
    tri = ResistorNetwork("abc", [("a", "b", cs[0]), ("b", "c", cs[1]), ("a", "c", cs[2])])
    back = y_to_delta(delta_to_y(tri, "abc", "o"), "o")
    got = {frozenset((u, v)): c for u, v, c in back.edges}
    for (u, v, c) in tri.edges:
        assert np.isclose(got[frozenset((u, v))], c, rtol=1e-10)


@st.composite
def connected_networks(draw):
    n = draw(st.integers(3, 7))
    nodes = [f"n{i}" for i in range(n)]
    edges = [(nodes[i], nodes[draw(st.integers(0, i - 1))], draw(conductance)) for i in range(1, n)]
    for u, v in itertools.combinations(nodes, 2):
        if draw(st.booleans()):
            edges.append((u, v, draw(conductance)))
    return ResistorNetwork(nodes, edges)


@settings(max_examples=100, deadline=None)
@given(connected_networks(), st.floats(min_value=0.1, max_value=10))
def test_resistance_scales_inversely_with_conductance(net, c):
    form = laplacian_of(net)
    p, q = net.nodes[0], net.nodes[-1]
    assert np.isclose(effective_resistance(form.scaled(c), p, q), effective_resistance(form, p, q) / c, rtol=1e-9)


@settings(max_examples=100, deadline=None)
@given(connected_networks())
def test_trace_preserves_boundary_resistance(net):
    form = laplacian_of(net)
    keep = list(net.nodes[:3])
    small = trace_to(form, keep)
    for p, q in itertools.combinations(keep, 2):
        assert np.isclose(effective_resistance(small, p, q), effective_resistance(form, p, q), rtol=1e-9)
