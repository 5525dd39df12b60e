import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grraf.graphs import (
    DIALECT_JSON,
    DIALECT_PROSE,
    Edge,
    GraphParseError,
    GraphStore,
    GraphValidationError,
    PropertyGraph,
    extract_schema,
    graph_from_edges,
    load_graph_file,
    parse_graph_text,
    serialize,
)

from conftest import random_graph


class TestProseParsing:
    def test_basic_undirected(self):
        g = parse_graph_text("undirected; nodes: 3; edges: (0,1) (1,2)")
        assert not g.directed
        assert g.node_count == 3
        assert g.edge_count == 2
        assert g.has_edge(0, 1) and g.has_edge(1, 0)

    def test_directed_weighted(self):
        g = parse_graph_text("directed; nodes: 2; edges: (0,1)[w=4]")
        assert g.directed
        assert g.edge_between(0, 1).weight == 4
        assert not g.has_edge(1, 0)

    def test_endpoint_out_of_range(self):
        with pytest.raises(GraphValidationError):
            parse_graph_text("undirected; nodes: 2; edges: (0,5)")

    def test_duplicate_edge_rejected(self):
        with pytest.raises(GraphValidationError):
            parse_graph_text("directed; nodes: 2; edges: (0,1) (0,1)")

    def test_undirected_reversed_duplicate_rejected(self):
        with pytest.raises(GraphValidationError):
            parse_graph_text("undirected; nodes: 2; edges: (0,1) (1,0)")

    def test_malformed_syntax_reports_location(self):
        with pytest.raises(GraphParseError) as exc:
            parse_graph_text("undirected; nodes: 2; edges: (0,1")
        assert exc.value.line == 1
        assert exc.value.column > 1

    def test_parse_error_on_second_line(self):
        with pytest.raises(GraphParseError) as exc:
            parse_graph_text("undirected; nodes: 2;\nedgs: (0,1)")
        assert exc.value.line == 2

    def test_node_weights_and_annotations(self):
        g = parse_graph_text(
            "directed; nodes: 3; node-weights: 0=1 2=7/2; "
            "edges: (0,1)[w=2.5][c=3] (1,2)"
        )
        assert g.node_weight(0) == 1
        assert g.node_weight(1) is None
        assert g.node_weight(2) == Fraction(7, 2)
        e = g.edge_between(0, 1)
        assert e.weight == Fraction(5, 2)
        assert e.capacity == 3

    def test_newline_insensitive(self):
        g = parse_graph_text("undirected;\nnodes: 3;\nedges:\n(0,1)\n(1,2)")
        assert g.edge_count == 2

    def test_negative_edge_weight_rejected(self):
        with pytest.raises(GraphValidationError):
            parse_graph_text("directed; nodes: 2; edges: (0,1)[w=-3]")

    def test_self_loop_allowed_and_flagged(self):
        g = parse_graph_text("directed; nodes: 2; edges: (0,0) (0,1)")
        assert g.has_self_loops


class TestSerialization:
    def test_empty_graph(self):
        g = graph_from_edges(False, 0, [])
        assert serialize(g, DIALECT_PROSE) == "undirected; nodes: 0; edges:"

    def test_path_round_trip(self):
        text = "undirected; nodes: 3; edges: (0,1) (1,2)"
        g = parse_graph_text(text)
        assert parse_graph_text(serialize(g, DIALECT_PROSE)) == g

    def test_json_round_trip_weighted_directed(self):
        g = graph_from_edges(
            True,
            4,
            [(0, 1, 3, None), (1, 2, Fraction(5, 2), 7), (2, 3, None, 1)],
            {0: 4, 3: Fraction(9, 4)},
        )
        blob = serialize(g, DIALECT_JSON)
        assert parse_graph_text(blob, DIALECT_JSON) == g

    def test_prose_round_trip_exact_rationals(self):
        g = graph_from_edges(
            False, 3, [(0, 1, Fraction(1, 3), None)], {1: Fraction(2, 7)}
        )
        assert parse_graph_text(serialize(g, DIALECT_PROSE)) == g

    def test_unknown_dialect(self):
        g = graph_from_edges(False, 1, [])
        with pytest.raises(ValueError):
            serialize(g, "yaml")
        with pytest.raises(ValueError):
            parse_graph_text("x", "yaml")


@st.composite
def graphs(draw):
    directed = draw(st.booleans())
    n = draw(st.integers(min_value=0, max_value=8))
    candidates = [
        (u, v)
        for u in range(n)
        for v in range(n)
        if (u < v or (directed and u != v))
    ]
    chosen = draw(st.lists(st.sampled_from(candidates), unique=True)) if candidates else []
    weight_strategy = st.one_of(
        st.none(),
        st.integers(min_value=0, max_value=50),
        st.fractions(min_value=0, max_value=20),
    )
    edges = [
        (u, v, draw(weight_strategy), draw(weight_strategy)) for u, v in chosen
    ]
    node_weights = {
        i: draw(st.fractions(min_value=-10, max_value=10))
        for i in range(n)
        if draw(st.booleans())
    }
    return graph_from_edges(directed, n, edges, node_weights)


class TestRoundTripProperty:
    @settings(max_examples=80, deadline=None)
    @given(graphs())
    def test_prose_round_trip(self, g):
        assert parse_graph_text(serialize(g, DIALECT_PROSE), DIALECT_PROSE) == g

    @settings(max_examples=80, deadline=None)
    @given(graphs())
    def test_schema_is_sound_and_witnessed(self, g):
        schema = extract_schema(g)
        node_names = {p.name for p in schema.node_properties}
        edge_names = {p.name for p in schema.edge_properties}
        if any(w is not None for w in g.node_weights):
            assert "weight" in node_names
        else:
            assert not node_names
        assert ("weight" in edge_names) == any(
            e.weight is not None for e in g.edges
        )
        assert ("capacity" in edge_names) == any(
            e.capacity is not None for e in g.edges
        )

    @settings(max_examples=60, deadline=None)
    @given(graphs())
    def test_adjacency_symmetry_undirected(self, g):
        if g.directed:
            return
        for u in range(g.node_count):
            for v in g.neighbors(u):
                assert u in g.neighbors(v)


class TestJsonRoundTripRandom:
    def test_many_random_graphs(self):
        rng = random.Random(7)
        for _ in range(60):
            g = random_graph(
                rng,
                rng.randint(0, 10),
                rng.random(),
                directed=rng.random() < 0.5,
                weighted=rng.random() < 0.5,
                capacities=rng.random() < 0.5,
                node_weighted=rng.random() < 0.5,
            )
            assert parse_graph_text(serialize(g, DIALECT_JSON), DIALECT_JSON) == g
            assert parse_graph_text(serialize(g, DIALECT_PROSE), DIALECT_PROSE) == g


class TestSchema:
    def test_unweighted_graph_has_empty_schema(self):
        g = parse_graph_text("undirected; nodes: 3; edges: (0,1)")
        schema = extract_schema(g)
        assert schema.node_properties == ()
        assert schema.edge_properties == ()

    def test_edge_weights_only(self):
        g = parse_graph_text("undirected; nodes: 2; edges: (0,1)[w=3]")
        schema = extract_schema(g)
        assert [(p.name, p.kind) for p in schema.edge_properties] == [
            ("weight", "rational")
        ]
        assert schema.node_properties == ()

    def test_node_weights_and_capacities(self):
        g = parse_graph_text(
            "directed; nodes: 2; node-weights: 0=1 1=2; edges: (0,1)[c=5]"
        )
        schema = extract_schema(g)
        assert [(p.name, p.kind) for p in schema.node_properties] == [
            ("weight", "rational")
        ]
        assert [(p.name, p.kind) for p in schema.edge_properties] == [
            ("capacity", "rational")
        ]

    def test_describe_mentions_properties(self):
        g = parse_graph_text("directed; nodes: 2; edges: (0,1)[c=5]")
        text = extract_schema(g).describe()
        assert "capacity" in text
        assert "directed" in text


class TestValidation:
    def test_contiguous_ids_enforced_in_json(self):
        blob = '{"directed": false, "nodes": [{"id": 0}, {"id": 2}], "edges": []}'
        with pytest.raises(GraphValidationError):
            parse_graph_text(blob, DIALECT_JSON)

    def test_json_syntax_error_reports_location(self):
        with pytest.raises(GraphParseError) as exc:
            parse_graph_text('{"directed": false', DIALECT_JSON)
        assert exc.value.line >= 1

    def test_immutable(self):
        g = parse_graph_text("undirected; nodes: 2; edges: (0,1)")
        with pytest.raises(Exception):
            g.node_count = 5

    def test_negative_node_weight_allowed(self):
        g = graph_from_edges(False, 2, [(0, 1)], {0: -3})
        assert g.node_weight(0) == -3


class TestGraphStore:
    def test_memory_and_file_resolution(self, tmp_path):
        g = parse_graph_text("undirected; nodes: 3; edges: (0,1)")
        path = tmp_path / "disk.json"
        path.write_text(serialize(g, DIALECT_JSON), encoding="utf-8")
        store = GraphStore(root=tmp_path)
        store.add("mem", g)
        assert store.load("mem") == g
        assert store.load("disk.json") == g
        assert store.load(str(path)) == g
        with pytest.raises(FileNotFoundError):
            store.load("missing.json")

    def test_path_for_spools_memory_graphs(self):
        g = parse_graph_text("directed; nodes: 2; edges: (0,1)[w=2]")
        store = GraphStore()
        store.add("mem", g)
        p = store.path_for("mem")
        assert p.is_file()
        assert load_graph_file(p) == g
        # stable across calls
        assert store.path_for("mem") == p

    def test_load_graph_file_prose(self, tmp_path):
        path = tmp_path / "g.txt"
        path.write_text("undirected; nodes: 2; edges: (0,1)", encoding="utf-8")
        assert load_graph_file(path).edge_count == 1
