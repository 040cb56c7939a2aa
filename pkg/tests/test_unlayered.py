import random

import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from abpkit.abp import PreconditionError, UnlayeredAbp, apply_ledger, chain, computed_polynomial, depth
from abpkit.field import FieldConfig
from abpkit.generators import random_dag, random_unlayered_abp
from abpkit.graphs import Dag
from abpkit.poly import Ring
from abpkit.unlayered import (
    cut_vertex,
    cut_vertices,
    depth_reduce_full,
    depth_reduce_once,
    drop_bits,
    levels,
    middle_band_vertex_set,
    msb_class,
    valiant_edge_set,
)

F101 = FieldConfig.prime(101)
R = Ring(F101, 4)
x, y, z, w = R.variables()


def unlayered_chain(labels):
    return UnlayeredAbp.from_layered(chain(R, labels))


def path_dag(k):
    return Dag(list(range(k + 1)), [(i, i + 1) for i in range(k)])


def nx_longest(dag):
    g = nx.DiGraph()
    g.add_nodes_from(dag.vertices)
    g.add_edges_from(dag.edges)
    return nx.dag_longest_path_length(g)


# cut_vertex


def test_cut_vertex_without_constants():
    A = unlayered_chain([x, y])
    out, led, _ = cut_vertex(A, 1)
    assert computed_polynomial(out).is_zero
    assert led.pairs == ((x, y),) and led.delta == 0


def test_cut_vertex_hand_example():
    A = unlayered_chain([x + 1, y + 2])
    out, led, info = cut_vertex(A, 1)
    assert computed_polynomial(out) == 2 * x + y + 4
    assert led.delta == F101.coerce(-2)
    assert apply_ledger(computed_polynomial(out), led) == computed_polynomial(A)
    assert out.num_vertices == 4 and out.num_edges == 4
    assert info["twin"] == 3


def test_cut_endpoints_rejected():
    A = unlayered_chain([x, y])
    for v in (A.s, A.t):
        with pytest.raises(PreconditionError):
            cut_vertex(A, v)


def test_cut_order_does_not_matter():
    rng = random.Random(11)
    A = random_unlayered_abp(R, rng, 12, extra_edges=8)
    vs = [3, 5, 8]
    a, la = cut_vertices(A, vs)
    b, lb = cut_vertices(A, list(reversed(vs)))
    assert a == b and la == lb


def test_empty_cut_set_is_identity():
    A = unlayered_chain([x, y, z])
    out, led = cut_vertices(A, [])
    assert out == A and led.r == 0 and led.delta == 0


@given(st.integers(0, 10**6))
def test_random_cut_vertex(seed):
    rng = random.Random(seed)
    A = random_unlayered_abp(R, rng, rng.randint(3, 12), extra_edges=rng.randint(0, 10))
    v = rng.choice([u for u in A.vertices if u not in (A.s, A.t)])
    out, led, info = cut_vertex(A, v)
    assert out.num_vertices == A.num_vertices + 1
    assert out.num_edges == A.num_edges + 2
    assert depth(out) <= info["depth_bound"]
    assert apply_ledger(computed_polynomial(out), led) == computed_polynomial(A)
    assert led.violations() == []


# Valiant edge removal


def test_msb_class_and_drop_bits():
    assert msb_class(0b0101, 0b0111) == 1
    assert msb_class(3, 4) == 2
    assert drop_bits(0b1011, {1}) == 0b101
    assert drop_bits(0b1011, {0, 3}) == 0b01


def test_valiant_halves_power_of_two_chain():
    for k in (8, 16, 32):
        g = path_dag(k)
        rem = valiant_edge_set(g, 16)
        assert 2 * rem.depth_after <= k
        assert nx_longest(g.without_edges(rem.edges)) == rem.depth_after


def test_valiant_depth_precondition():
    with pytest.raises(PreconditionError):
        valiant_edge_set(path_dag(1), 49)


def test_valiant_random_dag():
    rng = random.Random(5)
    for _ in range(20):
        g = random_dag(rng, 40, rng.randint(10, 60))
        if nx_longest(g) < 7:
            continue
        rem = valiant_edge_set(g, 49)
        assert len(rem.edges) <= rem.edge_bound
        assert 2 * nx_longest(g.without_edges(rem.edges)) <= rem.depth


def test_levels_are_a_valid_labeling():
    g = random_dag(random.Random(2), 30, 40)
    lvl = levels(g)
    assert all(lvl[u] < lvl[v] for u, v in g.edges)
    assert max(lvl.values()) == nx_longest(g)


def test_middle_band_on_chain_of_81():
    band = middle_band_vertex_set(path_dag(81), 49)
    assert band.vertices
    assert all(9 <= u <= 72 for u in band)
    assert band.residual_depth <= 3 * 81 / 4


# depth reduction


def test_depth_reduce_once_on_chain_of_chains():
    rng = random.Random(1)
    A = random_unlayered_abp(R, rng, 60, extra_edges=30, variable_edges=4, chain=True)
    d = depth(A)
    out, led, rep = depth_reduce_once(A, 49)
    assert depth(out) < d
    step = rep.steps[0]
    assert step["vertices_after"] <= step["vertices_before"] + step["edge_bound"]
    assert apply_ledger(computed_polynomial(out), led) == computed_polynomial(A)


def test_depth_reduce_once_rejects_shallow():
    with pytest.raises(PreconditionError):
        depth_reduce_once(unlayered_chain([x, y]), 49)


def test_depth_reduce_full_identity_when_shallow():
    A = unlayered_chain([x, y, z])
    out, led, rep = depth_reduce_full(A, 16, 1)
    assert out == A and led.r == 0 and rep.steps == []


def test_depth_reduce_full_deep_instance():
    rng = random.Random(4)
    A = random_unlayered_abp(R, rng, 130, extra_edges=40, variable_edges=5, chain=True)
    out, led, rep = depth_reduce_full(A, 49, 1)
    assert rep.steps
    first = rep.steps[0]
    assert 10 * first["depth_after"] <= 9 * first["depth_before"]
    for i, s in enumerate(rep.steps, start=1):
        assert s["edges_after"] <= s["edge_growth_cap"]
    assert apply_ledger(computed_polynomial(out), led) == computed_polynomial(A)
    assert depth(out) <= 49 or depth(out) ** 2 <= 49
