"""Snowball draws: recorded histories must obey the design rules exactly."""

import numpy as np
import pytest

from linktrace.design import (
    SEED,
    DesignConfig,
    DesignError,
    DesignKind,
    draw_sample,
    observe,
    read_observed,
    write_events_csv,
    write_observed,
)
from linktrace.graph import AttributeTable, Network


def reachable_from(net, seed):
    # plain BFS, independent of the sampler's own traversal
    seen = {seed}
    frontier = [seed]
    while frontier:
        nxt = []
        for u in frontier:
            for v in net.out_neighbors(u):
                v = int(v)
                if v not in seen:
                    seen.add(v)
                    nxt.append(v)
        frontier = nxt
    return seen


def cfg(kind=DesignKind.REGULAR, seeds=1, q=1.0, n=4, max_waves=None, reseed=True):
    return DesignConfig(
        kind=kind,
        seed_count=seeds,
        q=q,
        target_size=n,
        max_waves=max_waves,
        reseed_on_exhaustion=reseed,
    )


def path_net(k=3):
    return Network.from_undirected(
        [chr(ord("a") + i) for i in range(k)], [(i, i + 1) for i in range(k - 1)]
    )


def star_net():
    # center node 0, leaves 1..3
    return Network.from_undirected(["c", "x", "y", "z"], [(0, 1), (0, 2), (0, 3)])


def triangle():
    return Network.from_undirected(["a", "b", "c"], [(0, 1), (1, 2), (0, 2)])


def test_q_zero_returns_seeds_only():
    net = path_net(3)
    rec = draw_sample(net, cfg(seeds=3, q=0.0, n=3), np.random.default_rng(0))
    assert set(rec.distinct_units) == {0, 1, 2}
    assert all(e.recruiter == SEED and e.wave == 0 for e in rec.events)
    assert len(rec.events) == 3


def test_star_from_leaf_reaches_depth_two():
    """Leaf seed, q = 1: wave 1 is the center, wave 2 the other two leaves."""
    net = star_net()
    rng = np.random.default_rng(3)
    for _ in range(20):
        rec = draw_sample(net, cfg(seeds=1, q=1.0, n=4), rng)
        seed = rec.seeds[0]
        waves = {e.recruitee: e.wave for e in rec.events}
        if seed == 0:
            continue  # center seed gives depth 1, not this case
        assert waves[0] == 1
        others = [u for u in (1, 2, 3) if u != seed]
        assert all(waves[u] == 2 for u in others)
        assert rec.unit_count == 4


def test_triangle_truncation_is_symmetric():
    # n = 2 admits exactly one of the two wave-1 traces, each about half the time
    net = triangle()
    rng = np.random.default_rng(12345)
    trials = 24_000
    seen = {s: {u: 0 for u in (0, 1, 2) if u != s} for s in (0, 1, 2)}
    totals = {0: 0, 1: 0, 2: 0}
    for _ in range(trials):
        rec = draw_sample(net, cfg(seeds=1, q=1.0, n=2), rng)
        assert rec.unit_count == 2
        seed = rec.seeds[0]
        (other,) = set(rec.distinct_units) - {seed}
        seen[seed][other] += 1
        totals[seed] += 1
    for s in (0, 1, 2):
        sigma = np.sqrt(0.25 / totals[s])
        for u, k in seen[s].items():
            assert abs(k / totals[s] - 0.5) <= 4 * sigma, (s, u)


def test_regular_is_forest_and_event_count_matches():
    rng = np.random.default_rng(99)
    n_nodes = 60
    pairs = {tuple(sorted(rng.integers(0, n_nodes, size=2))) for _ in range(150)}
    pairs = [(i, j) for i, j in pairs if i != j]
    net = Network.from_undirected([f"n{i}" for i in range(n_nodes)], pairs)
    for _ in range(60):
        rec = draw_sample(
            net, cfg(seeds=3, q=0.6, n=30, max_waves=4), np.random.default_rng(rng.integers(2**32))
        )
        recruitees = [e.recruitee for e in rec.events]
        assert len(recruitees) == len(set(recruitees)) == rec.unit_count
        for e in rec.events:
            if e.recruiter == SEED:
                assert e.wave == 0
            else:
                assert net.has_link(e.recruiter, e.recruitee)
                assert e.wave >= 1


def test_re_recruit_rules_hold_over_random_draws():
    rng = np.random.default_rng(2024)
    n_nodes = 50
    pairs = {tuple(sorted(rng.integers(0, n_nodes, size=2))) for _ in range(200)}
    pairs = [(i, j) for i, j in pairs if i != j]
    net = Network.from_undirected([f"n{i}" for i in range(n_nodes)], pairs)
    for _ in range(60):
        rec = draw_sample(
            net,
            cfg(kind=DesignKind.RE_RECRUIT, seeds=3, q=0.7, n=25),
            np.random.default_rng(rng.integers(2**32)),
        )
        ordered = [(e.recruiter, e.recruitee) for e in rec.events if e.recruiter != SEED]
        assert len(ordered) == len(set(ordered))
        first_rec = {}
        for e in rec.events:
            if e.recruitee not in first_rec:
                first_rec[e.recruitee] = e.recruiter
        for r, v in ordered:
            assert first_rec[r] != v, "recruited back by own recruiter"
            assert net.has_link(r, v)
        assert rec.unit_count <= len(rec.events)


def test_wave_is_recruiter_wave_plus_one():
    rng = np.random.default_rng(5)
    net = path_net(8)
    rec = draw_sample(net, cfg(seeds=1, q=1.0, n=8), rng)
    wave_of = {}
    for e in rec.events:
        if e.recruiter == SEED:
            wave_of[e.recruitee] = 0
        else:
            assert e.wave == wave_of[e.recruiter] + 1
            wave_of.setdefault(e.recruitee, e.wave)


def test_max_waves_caps_depth():
    net = path_net(10)
    rec = draw_sample(
        net, cfg(seeds=1, q=1.0, n=10, max_waves=2, reseed=False), np.random.default_rng(8)
    )
    assert max(e.wave for e in rec.events) <= 2
    assert rec.short


def test_reachability_closure_with_q_one():
    # q = 1, REGULAR, one seed, no reseeding: exactly the seed's component
    rng = np.random.default_rng(77)
    n_nodes = 40
    pairs = {tuple(sorted(rng.integers(0, n_nodes, size=2))) for _ in range(60)}
    pairs = [(i, j) for i, j in pairs if i != j]
    net = Network.from_undirected([f"n{i}" for i in range(n_nodes)], pairs)
    for trial in range(25):
        rec = draw_sample(
            net, cfg(seeds=1, q=1.0, n=n_nodes, reseed=False), np.random.default_rng(trial)
        )
        assert set(rec.distinct_units) == reachable_from(net, rec.seeds[0])


def test_reseed_on_exhaustion_reaches_target():
    # two components of size 2, target 4: needs at least one reseed
    net = Network.from_undirected(["a", "b", "c", "d"], [(0, 1), (2, 3)])
    rec = draw_sample(net, cfg(seeds=1, q=1.0, n=4, reseed=True), np.random.default_rng(1))
    assert rec.unit_count == 4
    assert len(rec.reseed_points) >= 1
    assert not rec.short
    for idx in rec.reseed_points:
        assert rec.events[idx].recruiter == SEED
        assert rec.events[idx].wave == 0


def test_no_reseed_terminates_short():
    net = Network.from_undirected(["a", "b", "c", "d"], [(0, 1), (2, 3)])
    rec = draw_sample(net, cfg(seeds=1, q=1.0, n=4, reseed=False), np.random.default_rng(1))
    assert rec.unit_count == 2
    assert rec.short
    assert rec.reseed_points == ()


def test_determinism_same_seed_same_record():
    net = triangle()
    r1 = draw_sample(net, cfg(seeds=1, q=0.5, n=3), np.random.default_rng(42))
    r2 = draw_sample(net, cfg(seeds=1, q=0.5, n=3), np.random.default_rng(42))
    assert r1 == r2


def test_config_validation():
    with pytest.raises(DesignError):
        cfg(seeds=0, n=3).validate(3)
    with pytest.raises(DesignError):
        cfg(seeds=4, n=3).validate(3)
    with pytest.raises(DesignError):
        cfg(n=5).validate(3)
    with pytest.raises(DesignError):
        cfg(q=1.5, n=3).validate(3)
    with pytest.raises(DesignError):
        cfg(max_waves=0, n=3).validate(3)
    cfg(q=0.0, n=3).validate(3)  # boundary allowed


# -------------------------------------------------------------------- observe


def test_observe_slices_sample():
    net = path_net(4)
    attrs = AttributeTable.empty(4)
    attrs.add("y", np.array([1.0, 0.0, 1.0, 1.0]))
    rec = draw_sample(net, cfg(seeds=1, q=1.0, n=2), np.random.default_rng(2))
    obs = observe(net, attrs, rec)
    assert obs.unit_count == 2
    for i, unit in enumerate(sorted(rec.distinct_units)):
        assert obs.reported_degree[i] == net.degree(unit)
        assert obs.values.column("y")[i] == attrs.column("y")[unit]
        assert obs.reported_degree[i] >= obs.sample_net.degree(i)


def test_observe_full_census_is_identity():
    net = triangle()
    attrs = AttributeTable.empty(3)
    rec = draw_sample(net, cfg(seeds=1, q=1.0, n=3), np.random.default_rng(0))
    obs = observe(net, attrs, rec)
    assert obs.sample_net.link_count == net.link_count
    assert list(obs.reported_degree) == [2.0, 2.0, 2.0]


def test_observe_nonadjacent_seeds_have_no_links():
    net = path_net(5)
    rec = draw_sample(net, cfg(seeds=2, q=0.0, n=2), np.random.default_rng(6))
    a, b = sorted(rec.distinct_units)
    if not net.has_link(a, b):
        obs = observe(net, AttributeTable.empty(5), rec)
        assert obs.sample_net.link_count == 0
        assert (obs.reported_degree > 0).all()


# -------------------------------------------------------------- serialization


def test_events_csv_marks_seeds(tmp_path):
    net = path_net(3)
    rec = draw_sample(net, cfg(seeds=1, q=1.0, n=3), np.random.default_rng(4))
    p = tmp_path / "events.csv"
    write_events_csv(rec, net, p)
    lines = p.read_text().strip().splitlines()
    assert lines[0] == "recruiter,recruitee,wave"
    assert sum(1 for ln in lines[1:] if ln.startswith("SEED,")) == 1


def test_observed_round_trip(tmp_path):
    net = path_net(6)
    attrs = AttributeTable.empty(6)
    attrs.add("y", np.arange(6, dtype=float))
    rec = draw_sample(net, cfg(seeds=2, q=1.0, n=4), np.random.default_rng(9))
    obs = observe(net, attrs, rec)
    paths = write_observed(obs, tmp_path)
    back = read_observed(paths["edges"], paths["degrees"], paths["attrs"])
    assert back.labels == obs.labels
    assert np.array_equal(back.reported_degree, obs.reported_degree)
    assert back.sample_net == obs.sample_net
    assert np.array_equal(back.values.column("y"), obs.values.column("y"))


def test_observed_round_trip_with_isolated_units(tmp_path):
    # q = 0 sample: no in-sample links, round trip must keep every unit
    net = path_net(5)
    rec = draw_sample(net, cfg(seeds=3, q=0.0, n=3), np.random.default_rng(13))
    obs = observe(net, AttributeTable.empty(5), rec)
    paths = write_observed(obs, tmp_path)
    back = read_observed(paths["edges"], paths["degrees"])
    assert back.unit_count == 3
    assert back.labels == obs.labels


def test_read_observed_rejects_edge_label_missing_from_degrees(tmp_path):
    (tmp_path / "e.txt").write_text("a b\n")
    (tmp_path / "d.csv").write_text("node,degree\na,1\n")
    with pytest.raises(DesignError, match="b"):
        read_observed(tmp_path / "e.txt", tmp_path / "d.csv")
