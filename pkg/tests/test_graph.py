import numpy as np
import pytest

from linktrace.graph import (
    AttributeTable,
    GraphError,
    MissingPolicy,
    Network,
    induced_subgraph,
    load_attributes,
    load_edge_list,
    read_edge_pairs,
    write_attributes_csv,
)


def path_net(labels=("a", "b", "c")):
    pairs = [(i, i + 1) for i in range(len(labels) - 1)]
    return Network.from_undirected(list(labels), pairs)


def triangle():
    return Network.from_undirected(["a", "b", "c"], [(0, 1), (1, 2), (0, 2)])


# ---------------------------------------------------------------- construction


def test_undirected_pairs_stored_both_ways():
    net = triangle()
    assert net.node_count == 3
    assert net.link_count == 6
    for i in range(3):
        for j in net.out_neighbors(i):
            assert net.has_link(j, i)


def test_two_undirected_lines_make_four_ordered_pairs(tmp_path):
    p = tmp_path / "edges.txt"
    p.write_text("a b\nb c\n")
    net = load_edge_list(p, directed=False)
    assert net.node_count == 3
    assert net.link_count == 4


def test_duplicate_lines_collapse(tmp_path):
    p = tmp_path / "edges.txt"
    p.write_text("a b\na b\n")
    net = load_edge_list(p, directed=False)
    assert net.link_count == 2
    assert net.degree(net.id_of("a")) == 1


def test_self_loop_rejected_with_line_number(tmp_path):
    p = tmp_path / "edges.txt"
    p.write_text("a a\n")
    with pytest.raises(GraphError, match=r":1:"):
        load_edge_list(p, directed=False)


def test_malformed_line_reports_line_number(tmp_path):
    p = tmp_path / "edges.txt"
    p.write_text("a b\nlonely\n")
    with pytest.raises(GraphError, match=r":2:"):
        load_edge_list(p, directed=False)


def test_empty_file_rejected(tmp_path):
    p = tmp_path / "edges.txt"
    p.write_text("# only a comment\n")
    with pytest.raises(GraphError, match="empty"):
        load_edge_list(p, directed=False)


def test_directed_marker_requires_flag(tmp_path):
    p = tmp_path / "edges.txt"
    p.write_text("a b ->\n")
    with pytest.raises(GraphError, match=r":1:"):
        load_edge_list(p, directed=False)
    net = load_edge_list(p, directed=True)
    assert net.out_neighbors(net.id_of("a")).tolist() == [net.id_of("b")]
    assert len(net.out_neighbors(net.id_of("b"))) == 0


def test_comments_and_blank_lines_skipped(tmp_path):
    p = tmp_path / "edges.txt"
    p.write_text("# header\n\na b\n  # indented comment\nb c\n")
    net = load_edge_list(p, directed=False)
    assert net.node_count == 3


def test_duplicate_labels_rejected():
    with pytest.raises(GraphError):
        Network(["a", "a"], np.zeros((0, 2), dtype=np.int64))


# -------------------------------------------------------------------- queries


def test_degree_examples():
    tri = triangle()
    for i in range(3):
        assert tri.degree(i) == 2
    star = Network.from_undirected(["c", "l1", "l2", "l3"], [(0, 1), (0, 2), (0, 3)])
    assert star.degree(0) == 3
    assert star.degree(1) == 1
    lonely = Network(["x"], np.zeros((0, 2), dtype=np.int64))
    assert lonely.degree(0) == 0


def test_out_neighbors_ascending_and_distinct():
    net = path_net()
    b = net.id_of("b")
    nbrs = net.out_neighbors(b)
    assert nbrs.tolist() == sorted(set(nbrs.tolist()))
    assert set(nbrs.tolist()) == {net.id_of("a"), net.id_of("c")}


def test_degree_matches_out_neighbors_everywhere():
    rng = np.random.default_rng(7)
    n = 40
    pairs = {tuple(sorted(rng.integers(0, n, size=2))) for _ in range(120)}
    pairs = [(i, j) for i, j in pairs if i != j]
    net = Network.from_undirected([f"n{i}" for i in range(n)], pairs)
    for i in range(n):
        assert net.degree(i) == len(net.out_neighbors(i))
    assert np.array_equal(net.degrees(), [net.degree(i) for i in range(n)])


def test_invalid_node_id_rejected():
    net = triangle()
    with pytest.raises(GraphError):
        net.degree(3)
    with pytest.raises(GraphError):
        net.out_neighbors(-1)


def test_neighbors_of_many_matches_per_node_concat():
    rng = np.random.default_rng(11)
    n = 30
    pairs = {tuple(sorted(rng.integers(0, n, size=2))) for _ in range(90)}
    pairs = [(i, j) for i, j in pairs if i != j]
    net = Network.from_undirected([f"n{i}" for i in range(n)], pairs)
    nodes = rng.integers(0, n, size=12)
    srcs, dsts = net.neighbors_of_many(nodes)
    want_src, want_dst = [], []
    for u in nodes:
        for v in net.out_neighbors(int(u)):
            want_src.append(int(u))
            want_dst.append(int(v))
    assert srcs.tolist() == want_src
    assert dsts.tolist() == want_dst


# ------------------------------------------------------------------- subgraph


def test_induced_subgraph_triangle_pair():
    tri = triangle()
    sub = induced_subgraph(tri, np.array([tri.id_of("a"), tri.id_of("b")]))
    assert sub.node_count == 2
    assert sub.link_count == 2
    assert sub.labels == ("a", "b")


def test_induced_subgraph_empty_and_identity():
    tri = triangle()
    empty = induced_subgraph(tri, np.array([], dtype=np.int64))
    assert empty.node_count == 0 and empty.link_count == 0
    full = induced_subgraph(tri, np.arange(3))
    assert full == tri
    assert full.link_count == tri.link_count


def test_induced_subgraph_rejects_outside_node():
    with pytest.raises(GraphError):
        induced_subgraph(triangle(), np.array([0, 5]))


def test_induced_subgraph_keeps_back_map():
    net = path_net(("a", "b", "c", "d"))
    sub = induced_subgraph(net, np.array([1, 3]))
    assert sub.back_map.tolist() == [1, 3]
    assert sub.labels == ("b", "d")


# -------------------------------------------------------------- serialization


def test_reload_is_byte_identical(tmp_path):
    src = tmp_path / "edges.txt"
    src.write_text("b a\nc b\nd a\n")
    net1 = load_edge_list(src, directed=False)
    out1 = tmp_path / "round1.txt"
    out1.write_text(net1.to_edge_list_text())
    net2 = load_edge_list(out1, directed=False)
    assert net2.to_edge_list_text() == net1.to_edge_list_text()
    assert net1 == net2


def test_one_way_links_serialize_with_marker(tmp_path):
    net = Network(["a", "b"], np.array([[0, 1]], dtype=np.int64))
    text = net.to_edge_list_text()
    assert text == "a b ->\n"
    p = tmp_path / "d.txt"
    p.write_text(text)
    assert load_edge_list(p, directed=True) == net


def test_read_edge_pairs_first_appearance_order(tmp_path):
    p = tmp_path / "edges.txt"
    p.write_text("z y\ny x\n")
    labels, pairs = read_edge_pairs(p, directed=False)
    assert labels == ["z", "y", "x"]
    assert (0, 1) in pairs


# ----------------------------------------------------------------- attributes


def test_load_attributes_binary_column(tmp_path):
    net = triangle()
    p = tmp_path / "attrs.csv"
    p.write_text("id,female\na,1\nb,0\nc,1\n")
    table = load_attributes(p, net, MissingPolicy.ZERO)
    assert table.column("female").tolist() == [1.0, 0.0, 1.0]
    assert table.kind("female") == "binary"
    assert not table.columns["female"].missing.any()


def test_missing_cell_zero_policy_sets_mask(tmp_path):
    net = triangle()
    p = tmp_path / "attrs.csv"
    p.write_text("id,x\na,1\nb,\nc,2\n")
    table = load_attributes(p, net, MissingPolicy.ZERO)
    assert table.column("x")[net.id_of("b")] == 0.0
    assert table.columns["x"].missing[net.id_of("b")]
    assert not table.columns["x"].missing[net.id_of("a")]


def test_missing_cell_error_policy_names_row_and_column(tmp_path):
    net = triangle()
    p = tmp_path / "attrs.csv"
    p.write_text("id,x\na,1\nb,\nc,2\n")
    with pytest.raises(GraphError, match="b.*x|x.*b"):
        load_attributes(p, net, MissingPolicy.ERROR)


def test_missing_row_follows_policy(tmp_path):
    net = triangle()
    p = tmp_path / "attrs.csv"
    p.write_text("id,x\na,1\nb,0\n")
    table = load_attributes(p, net, MissingPolicy.ZERO)
    assert table.column("x")[net.id_of("c")] == 0.0
    assert table.columns["x"].missing[net.id_of("c")]
    with pytest.raises(GraphError):
        load_attributes(p, net, MissingPolicy.ERROR)


def test_unknown_label_rejected(tmp_path):
    net = triangle()
    p = tmp_path / "attrs.csv"
    p.write_text("id,x\na,1\nq,2\n")
    with pytest.raises(GraphError, match="q"):
        load_attributes(p, net, MissingPolicy.ZERO)


def test_non_numeric_cell_rejected_with_line(tmp_path):
    net = triangle()
    p = tmp_path / "attrs.csv"
    p.write_text("id,x\na,1\nb,oops\n")
    with pytest.raises(GraphError, match=r":3:"):
        load_attributes(p, net, MissingPolicy.ZERO)


def test_attribute_round_trip(tmp_path):
    net = triangle()
    table = AttributeTable.empty(3)
    table.add("x", np.array([0.25, 1.5, 3.0]))
    table.add("flag", np.array([0.0, 1.0, 1.0]))
    p = tmp_path / "attrs.csv"
    write_attributes_csv(table, net.labels, p)
    back = load_attributes(p, net, MissingPolicy.ERROR)
    assert back.column("x").tolist() == [0.25, 1.5, 3.0]
    assert back.kind("flag") == "binary"


def test_binary_kind_inferred_from_values():
    table = AttributeTable.empty(3)
    table.add("b", np.array([0.0, 1.0, 0.0]))
    table.add("n", np.array([0.0, 2.0, 0.0]))
    assert table.kind("b") == "binary"
    assert table.kind("n") == "numeric"
