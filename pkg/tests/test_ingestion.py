"""Parsing, propagation DAGs, followup sets, and their brute-force oracle."""
from __future__ import annotations

import io
import random

import pytest

from followups.errors import NotFoundError, ParseError
from followups.ingestion import (
    ActionLog,
    Cell,
    SocialGraph,
    build_propagation_graph,
    compute_followup_set,
    followup_histogram,
    global_followup_stats,
    parse_action_log,
    parse_social_graph,
    rank_influencers,
)


def graph_of(text: str) -> SocialGraph:
    return parse_social_graph(io.StringIO(text))


def log_of(text: str) -> ActionLog:
    return parse_action_log(io.StringIO(text))


CHAIN_GRAPH = "1\t2\n2\t3\n"
CHAIN_LOG = "1\ta\t1\n2\ta\t2\n3\ta\t3\n"


# --- parsing -------------------------------------------------------------

def test_parse_graph_basic():
    g = graph_of("1\t2\n1\t3")
    assert g.users == {1, 2, 3}
    assert g.n_arcs == 2
    assert g.followers(1) == (2, 3)


def test_parse_graph_deduplicates():
    assert graph_of("1\t2\n1\t2").n_arcs == 1


def test_parse_graph_self_arc_rejected():
    with pytest.raises(ParseError, match="line 1"):
        graph_of("1\t1")


def test_parse_graph_bad_columns_and_ids():
    with pytest.raises(ParseError, match="line 2"):
        graph_of("1\t2\n1\t2\t3")
    with pytest.raises(ParseError, match="non-integer"):
        graph_of("1\tbob")


def test_parse_graph_comments_and_blanks():
    g = graph_of("# a comment\n\n1\t2\n")
    assert g.n_arcs == 1


def test_parse_log_basic():
    log = log_of("1\ta\t5\n2\ta\t9")
    assert len(log) == 2
    assert log.performers("a") == ((1, 5), (2, 9))


def test_parse_log_keeps_earliest_duplicate():
    log = log_of("1\ta\t5\n1\ta\t3")
    assert len(log) == 1
    assert log.performers("a") == ((1, 3),)


def test_parse_log_empty():
    assert len(log_of("")) == 0


def test_parse_log_errors():
    with pytest.raises(ParseError, match="line 1"):
        log_of("1\ta")
    with pytest.raises(ParseError, match="timestamp"):
        log_of("1\ta\tx")
    with pytest.raises(ParseError, match="negative"):
        log_of("1\ta\t-3")


# --- propagation graphs --------------------------------------------------

def test_propagation_respects_time_order():
    g = graph_of("1\t2")
    pg = build_propagation_graph(g, log_of("1\ta\t5\n2\ta\t9"), "a")
    assert pg.successors(1) == (2,)

    pg = build_propagation_graph(g, log_of("1\ta\t9\n2\ta\t5"), "a")
    assert pg.n_arcs == 0


def test_propagation_tie_excluded():
    g = graph_of("1\t2")
    pg = build_propagation_graph(g, log_of("1\ta\t5\n2\ta\t5"), "a")
    assert pg.n_arcs == 0


def test_propagation_unknown_action():
    with pytest.raises(NotFoundError):
        build_propagation_graph(graph_of("1\t2"), log_of("1\ta\t5"), "zzz")


def test_propagation_max_delay():
    g = graph_of("1\t2")
    log = log_of("1\ta\t0\n2\ta\t10")
    assert build_propagation_graph(g, log, "a", max_delay=5).n_arcs == 0
    assert build_propagation_graph(g, log, "a", max_delay=10).n_arcs == 1


def test_propagation_graph_is_acyclic():
    rng = random.Random(7)
    graph, log = random_instance(rng, users=20, actions=6)
    for action in log.actions:
        pg = build_propagation_graph(graph, log, action)
        seen = set()
        for u in pg.nodes:  # nodes are in time order, a topological order
            for v in pg.successors(u):
                assert v not in seen
            seen.add(u)


# --- followup sets vs. the transitive-closure oracle ----------------------

def oracle_followups(graph: SocialGraph, log: ActionLog) -> dict[int, set[Cell]]:
    """Per-action transitive closure computed by repeated DFS, straight from
    the definitions."""
    result: dict[int, set[Cell]] = {}
    for action in log.actions:
        performers = {u: t for u, t in log.performers(action)}
        adj = {
            u: [
                v
                for v in graph.followers(u)
                if v in performers and performers[u] < performers[v]
            ]
            for u in performers
        }
        for source in performers:
            stack = [source]
            seen = {source}
            while stack:
                u = stack.pop()
                for v in adj[u]:
                    if v not in seen:
                        seen.add(v)
                        stack.append(v)
            for v in seen - {source}:
                result.setdefault(source, set()).add(Cell(action, v))
    return result


def random_instance(rng: random.Random, users: int = 50, actions: int = 20):
    ids = list(range(1, users + 1))
    arcs = set()
    for _ in range(users * 3):
        u, v = rng.sample(ids, 2)
        arcs.add((u, v))
    graph = SocialGraph.from_arcs(arcs, ids)
    lines = []
    for i in range(actions):
        for u in rng.sample(ids, rng.randint(1, max(2, users // 3))):
            lines.append(f"{u}\ta{i:02d}\t{rng.randint(0, 30)}")
    log = log_of("\n".join(lines))
    return graph, log


def test_followups_chain_transitive():
    g = graph_of(CHAIN_GRAPH)
    log = log_of(CHAIN_LOG)
    fset = compute_followup_set(g, log, 1)
    assert set(fset.cells) == {Cell("a", 2), Cell("a", 3)}


def test_followups_no_performing_followers():
    g = graph_of("1\t2\n1\t3")
    fset = compute_followup_set(g, log_of("1\ta\t1"), 1)
    assert len(fset) == 0


def test_followups_user_without_actions():
    g = graph_of(CHAIN_GRAPH)
    assert len(compute_followup_set(g, log_of(CHAIN_LOG), 99)) == 0


def test_followups_cell_ids_contiguous():
    g = graph_of(CHAIN_GRAPH)
    fset = compute_followup_set(g, log_of(CHAIN_LOG), 1)
    assert [fset.cell_id[c] for c in fset.cells] == list(range(len(fset)))


def test_followups_back_ordered_edge_matches_oracle():
    # 4 users, 2 actions; the 3->4 arc is only time-respecting for action b.
    g = graph_of("1\t2\n2\t3\n3\t4\n")
    log = log_of(
        "1\ta\t1\n2\ta\t2\n3\ta\t5\n4\ta\t4\n"
        "1\tb\t1\n2\tb\t2\n3\tb\t3\n4\tb\t9\n"
    )
    expected = oracle_followups(g, log)
    for user in (1, 2, 3, 4):
        fset = compute_followup_set(g, log, user)
        assert set(fset.cells) == expected.get(user, set())


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_followups_random_instances_match_oracle(seed):
    rng = random.Random(seed)
    graph, log = random_instance(rng)
    expected = oracle_followups(graph, log)
    for user in sorted(graph.users):
        fset = compute_followup_set(graph, log, user)
        assert set(fset.cells) == expected.get(user, set())


def test_global_stats_consistent_with_per_user():
    rng = random.Random(11)
    graph, log = random_instance(rng, users=30, actions=10)
    stats = global_followup_stats(graph, log)
    for user in sorted(graph.users):
        n = len(compute_followup_set(graph, log, user))
        assert stats.influencer_counts.get(user, 0) == n
    # conservation: every cell counted once per influencer, action and follower
    total = sum(stats.influencer_counts.values())
    assert total == sum(stats.action_cells.values()) == sum(stats.follower_cells.values())


# --- ranking and histogram ------------------------------------------------

def test_rank_chain():
    g = graph_of(CHAIN_GRAPH)
    assert rank_influencers(g, log_of(CHAIN_LOG), 2) == [(1, 2), (2, 1)]


def test_rank_empty_when_no_propagation():
    g = graph_of("1\t2")
    assert rank_influencers(g, log_of("1\ta\t5"), 10) == []


def test_rank_matches_oracle_counts():
    rng = random.Random(4)
    graph, log = random_instance(rng)
    expected = oracle_followups(graph, log)
    ranked = rank_influencers(graph, log, 1000)
    assert dict(ranked) == {u: len(cells) for u, cells in expected.items()}
    # ties break by ascending user id; rerunning gives the identical list
    counts = [c for _, c in ranked]
    assert counts == sorted(counts, reverse=True)
    for (u1, c1), (u2, c2) in zip(ranked, ranked[1:]):
        if c1 == c2:
            assert u1 < u2
    assert ranked == rank_influencers(graph, log, 1000)


def test_rank_top_n_validation():
    with pytest.raises(ValueError):
        rank_influencers(graph_of(CHAIN_GRAPH), log_of(CHAIN_LOG), 0)


def test_histogram_chain():
    g = graph_of(CHAIN_GRAPH)
    assert followup_histogram(g, log_of(CHAIN_LOG)) == [(1, 1), (2, 1)]


def test_histogram_empty_log():
    assert followup_histogram(graph_of(CHAIN_GRAPH), log_of("")) == []


def test_histogram_consistent_with_ranking():
    rng = random.Random(5)
    graph, log = random_instance(rng)
    ranked = dict(rank_influencers(graph, log, 10_000))
    hist = followup_histogram(graph, log)
    assert sum(n for _, n in hist) == len(ranked)
    assert sum(c * n for c, n in hist) == sum(ranked.values())
    assert [c for c, _ in hist] == sorted({c for c in ranked.values()})
