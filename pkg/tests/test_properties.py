"""Hypothesis property tests over randomized goal graphs."""

import random
from dataclasses import replace
from decimal import Decimal

import pytest
from hypothesis import given, settings, strategies as st

from galign.dsl import parse_model, serialize_model
from galign.engine import evaluate
from galign.model import ContributionLink, ModelError, Quantity, build_graph, render_label

from .support import random_graph

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@given(seeds)
@settings(max_examples=100, deadline=None)
def test_serialize_parse_roundtrip(seed):
    graph = random_graph(random.Random(seed), with_or=True, rich_text=True)
    assert parse_model(serialize_model(graph)) == graph


@given(seeds)
@settings(max_examples=100, deadline=None)
def test_adjusted_never_exceeds_raw(seed):
    graph = random_graph(random.Random(seed), with_or=True)
    for outcome in evaluate(graph).outcomes.values():
        assert outcome.adjusted_sum <= outcome.raw_sum
        assert outcome.adjusted_fraction <= outcome.raw_fraction


@given(seeds)
@settings(max_examples=100, deadline=None)
def test_lowering_one_confidence_is_monotone(seed):
    rng = random.Random(seed)
    graph = random_graph(rng)
    if not graph.contributions:
        return
    victim = rng.choice(graph.contributions)
    lowered = Decimal(rng.randint(1, 99)) / 100 * victim.confidence
    varied = graph.replace_links(
        [replace(l, confidence=lowered) if l.id == victim.id else l for l in graph.links]
    )
    before = evaluate(graph).outcomes
    after = evaluate(varied).outcomes
    for oid in before:
        assert after[oid].adjusted_sum <= before[oid].adjusted_sum
        assert after[oid].adjusted_fraction <= before[oid].adjusted_fraction


@given(seeds)
@settings(max_examples=100, deadline=None)
def test_unit_mutation_always_caught(seed):
    rng = random.Random(seed)
    graph = random_graph(rng)
    if not graph.contributions:
        return
    victim = rng.choice(graph.contributions)
    wrong_unit = "weeks" if victim.amount.unit != "weeks" else "%"
    if victim.amount.unit == "%":
        wrong_unit = "weeks"
    broken_amount = Quantity(victim.amount.value, wrong_unit)
    links = [
        replace(l, amount=broken_amount) if l.id == victim.id else l for l in graph.links
    ]
    with pytest.raises(ModelError) as exc:
        build_graph(graph.nodes, graph.authors, links, name=graph.name)
    assert any(d.code == "unit-mismatch" for d in exc.value.diagnostics)


@given(seeds)
@settings(max_examples=100, deadline=None)
def test_cycle_insertion_always_rejected(seed):
    rng = random.Random(seed)
    graph = random_graph(rng)
    between_objectives = [
        l
        for l in graph.contributions
        if l.source in {o.id for o in graph.objectives}
    ]
    if not between_objectives:
        return
    link = rng.choice(between_objectives)
    source_obj = graph.node_by_id[link.source]
    back_edge = ContributionLink(
        id="Zback",
        source=link.target,
        target=link.source,
        amount=Quantity(Decimal(1), source_obj.magnitude.unit),
        confidence=Decimal(1),
    )
    with pytest.raises(ModelError) as exc:
        build_graph(graph.nodes, graph.authors, [*graph.links, back_edge], name=graph.name)
    assert any(d.code == "cycle" for d in exc.value.diagnostics)


@given(seeds)
@settings(max_examples=100, deadline=None)
def test_labels_stable_and_magnitude_sensitive(seed):
    graph = random_graph(random.Random(seed), rich_text=True)
    for obj in graph.objectives:
        assert render_label(obj) == render_label(obj)
        doubled = replace(
            obj, magnitude=Quantity(obj.magnitude.value * 2, obj.magnitude.unit)
        )
        assert render_label(doubled) != render_label(obj)


@given(seeds)
@settings(max_examples=60, deadline=None)
def test_evaluate_deterministic(seed):
    graph = random_graph(random.Random(seed), with_or=True)
    first = evaluate(graph)
    second = evaluate(graph)
    assert first.outcomes == second.outcomes
    assert first.warnings == second.warnings
