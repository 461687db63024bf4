"""Shared helpers: hand-buildable indexes and seeded random instances."""
from __future__ import annotations

import random

import pytest

from followups.featurization import (
    ACTION,
    USER,
    AttributeTable,
    PredicateIndex,
    build_predicate_index,
)
from followups.ingestion import Cell, FollowupSet


def index_from_postings(postings: list[list[int]], n_cells: int | None = None) -> PredicateIndex:
    """Index whose predicate i has exactly the given posting list.

    Cells become actions c000.. of one influencer with a single follower;
    predicate i is the action attribute p{i:03d}=1, so predicate ids follow
    the input order.
    """
    if n_cells is None:
        n_cells = max((c for pl in postings for c in pl), default=-1) + 1
    actions = [f"c{c:03d}" for c in range(n_cells)]
    fset = FollowupSet(1, (Cell(a, 2) for a in actions), actions)
    action_attrs = AttributeTable(ACTION)
    for i, posting in enumerate(postings):
        if not posting:
            raise ValueError("empty posting lists never enter a catalog; drop them")
        for c in posting:
            action_attrs.add(actions[c], f"p{i:03d}", "1")
    return build_predicate_index(fset, AttributeTable(USER), action_attrs)


def random_attribute_instance(rng: random.Random, max_cells: int = 300, max_predicates: int = 40):
    """A random followup set plus attribute tables sized to stay under the
    given cell/predicate budgets."""
    n_followers = rng.randint(2, 14)
    n_actions = rng.randint(2, 18)
    followers = list(range(2, 2 + n_followers))
    actions = [f"a{i:02d}" for i in range(n_actions)]
    density = rng.uniform(0.2, 0.9)
    cells = [
        Cell(a, v)
        for a in actions
        for v in followers
        if rng.random() < density
    ]
    cells = cells[:max_cells]
    if not cells:
        cells = [Cell(actions[0], followers[0])]
    fset = FollowupSet(1, cells, actions)

    user_attrs = AttributeTable(USER)
    action_attrs = AttributeTable(ACTION)
    budget = max_predicates
    n_user_attrs = rng.randint(1, 3)
    n_action_attrs = rng.randint(1, 3)
    for i in range(n_user_attrs):
        card = rng.randint(2, 4)
        budget -= card
        for v in followers:
            if rng.random() < 0.9:
                user_attrs.add(v, f"u{i}", f"v{rng.randint(0, card - 1)}")
    for i in range(n_action_attrs):
        card = max(2, min(rng.randint(2, 6), budget // max(1, n_action_attrs - i)))
        budget -= card
        multi = rng.random() < 0.3
        for a in actions:
            if rng.random() < 0.9:
                action_attrs.add(a, f"g{i}", f"v{rng.randint(0, card - 1)}")
                if multi and rng.random() < 0.4:
                    action_attrs.add(a, f"g{i}", f"v{rng.randint(0, card - 1)}")
    index = build_predicate_index(fset, user_attrs, action_attrs)
    return index


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240811)
