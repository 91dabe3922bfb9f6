"""Evaluation, attribution, chains, prioritisation and what-if arithmetic.

Expected numbers for the reference model are frozen from the hand-derived
link arithmetic: O6 receives 20*1 + 13*0.75 = 29.75 adjusted against a
33% magnitude, R1 delivers 3 * (80/80) * (20/33) = 20/11 months toward O7
at compound confidence 0.75.
"""

import random
from decimal import Decimal
from fractions import Fraction

import pytest

from galign.engine import (
    EvalOptions,
    OrPolicy,
    Status,
    attribute,
    enumerate_paths,
    evaluate,
    prioritize,
    summarize_chain,
)
from galign.model import (
    Combinator,
    ContributionLink,
    Objective,
    Quantity,
    Requirement,
    RequirementKind,
    build_graph,
)
from galign.scenario import (
    IncludeRequirement,
    Scenario,
    SelectOr,
    SetAmount,
    SetConfidence,
    apply_scenario,
    compare,
    run_whatif,
)

from .support import oracle_attribution, oracle_evaluate, random_graph


def F(value) -> Fraction:
    return Fraction(Decimal(str(value)))


class TestEvaluateReference:
    def test_paper_worked_example(self, reference_graph):
        result = evaluate(reference_graph)
        o4 = result.outcomes["O4"]
        assert (o4.raw_sum, o4.adjusted_sum, o4.status) == (F(80), F(80), Status.SATISFIED)
        assert o4.raw_fraction == 1 and o4.adjusted_fraction == 1
        o6 = result.outcomes["O6"]
        assert (o6.raw_sum, o6.adjusted_sum, o6.status) == (F(33), F("29.75"), Status.IN_DOUBT)

    def test_intermediate_objectives(self, reference_graph):
        result = evaluate(reference_graph)
        o5 = result.outcomes["O5"]
        assert (o5.raw_sum, o5.adjusted_sum, o5.status) == (F(50), F("37.5"), Status.IN_DOUBT)
        assert o5.adjusted_fraction == F("0.75")
        o7 = result.outcomes["O7"]
        assert (o7.raw_sum, o7.adjusted_sum, o7.status) == (F(3), F("2.25"), Status.IN_DOUBT)

    def test_confidence_toggle_satisfies_o6(self, reference_graph):
        result = evaluate(reference_graph, EvalOptions(use_confidence=False))
        o6 = result.outcomes["O6"]
        assert o6.adjusted_sum == F(33)
        assert o6.status is Status.SATISFIED
        assert result.outcomes["O5"].status is Status.SATISFIED
        assert result.outcomes["O7"].status is Status.SATISFIED

    def test_no_warnings_on_reference(self, reference_graph):
        assert evaluate(reference_graph).warnings == ()

    def test_one_outcome_per_objective(self, reference_graph):
        result = evaluate(reference_graph)
        assert sorted(result.outcomes) == ["O4", "O5", "O6", "O7"]


class TestEvaluateEdges:
    def test_objective_without_links_unsatisfied(self):
        graph = build_graph([_objective("O", "10")])
        outcome = evaluate(graph).outcomes["O"]
        assert outcome.raw_sum == 0
        assert outcome.status is Status.UNSATISFIED

    def test_invalid_graph_refused(self):
        from galign.model import GoalGraph, ModelError, validate

        graph = GoalGraph("", (_objective("O", "0"),), (), ())
        assert any(d.code == "zero-magnitude" for d in validate(graph))
        with pytest.raises(ModelError):
            evaluate(graph)

    def test_and_gate_overrides_arithmetic(self):
        # the AND source is excluded, so the target sinks even though the
        # independent link alone exceeds the magnitude
        graph = build_graph(
            [
                _requirement("R1", included=False),
                _requirement("R2"),
                _objective("O", "50"),
            ],
            links=[
                _link("La", "R1", "O", "10", combinator=Combinator.AND),
                _link("Lb", "R2", "O", "100"),
            ],
        )
        outcome = evaluate(graph).outcomes["O"]
        assert outcome.raw_sum == F(100)
        assert outcome.status is Status.UNSATISFIED

    def test_excluded_requirement_contributes_nothing(self, reference_graph):
        scenario = Scenario(overrides=(IncludeRequirement("R1", False),))
        varied = evaluate(apply_scenario(reference_graph, scenario))
        assert varied.outcomes["O4"].raw_sum == 0
        assert varied.outcomes["O4"].status is Status.UNSATISFIED
        assert varied.outcomes["O6"].raw_sum == F(13)
        assert varied.outcomes["O6"].status is Status.UNSATISFIED

    def test_author_calibration_discounts(self):
        from galign.model import Author

        graph = build_graph(
            [_requirement("R"), _objective("O", "10")],
            authors=[Author("A", "Alex", calibration=Decimal("0.5"))],
            links=[_link("L", "R", "O", "10", author="A")],
        )
        assert evaluate(graph).outcomes["O"].adjusted_sum == F(5)
        no_cal = evaluate(graph, EvalOptions(use_calibration=False))
        assert no_cal.outcomes["O"].adjusted_sum == F(10)


class TestOrPolicies:
    def _graph(self, amount_b="40", conf_b="0.5"):
        return build_graph(
            [_requirement("R1"), _requirement("R2"), _objective("O", "30")],
            links=[
                _link("La", "R1", "O", "30", combinator=Combinator.OR, or_group="g1"),
                _link("Lb", "R2", "O", amount_b, conf=conf_b, combinator=Combinator.OR, or_group="g1"),
            ],
        )

    def test_explicit_unselected_is_undetermined(self):
        outcome = evaluate(self._graph()).outcomes["O"]
        assert outcome.status is Status.UNDETERMINED
        assert outcome.raw_sum == 0

    def test_explicit_selection_counts(self):
        options = EvalOptions(or_selection={"g1": "La"})
        outcome = evaluate(self._graph(), options).outcomes["O"]
        assert outcome.raw_sum == F(30)
        assert outcome.status is Status.SATISFIED

    def test_best_picks_highest_adjusted(self):
        options = EvalOptions(or_policy=OrPolicy.BEST_ADJUSTED)
        outcome = evaluate(self._graph(), options).outcomes["O"]
        # La: 30*1 = 30 beats Lb: 40*0.5 = 20
        assert outcome.raw_sum == F(30)

    def test_best_tie_breaks_on_link_id(self):
        options = EvalOptions(or_policy=OrPolicy.BEST_ADJUSTED)
        graph = self._graph(amount_b="30", conf_b="1")
        outcome = evaluate(graph, options).outcomes["O"]
        assert outcome.status is Status.SATISFIED
        assert outcome.raw_sum == F(30)

    def test_pessimistic_ignores_selection(self):
        options = EvalOptions(or_policy=OrPolicy.PESSIMISTIC, or_selection={"g1": "La"})
        outcome = evaluate(self._graph(), options).outcomes["O"]
        assert outcome.status is Status.UNDETERMINED
        assert outcome.raw_sum == 0

    def test_unknown_group_rejected(self):
        with pytest.raises(ValueError):
            evaluate(self._graph(), EvalOptions(or_selection={"nope": "La"}))

    def test_non_member_selection_rejected(self):
        with pytest.raises(ValueError):
            evaluate(self._graph(), EvalOptions(or_selection={"g1": "nope"}))


class TestEnumeratePaths:
    def test_reference_r1_to_o7(self, reference_graph):
        assert enumerate_paths(reference_graph, "R1", "O7") == [("C", "E", "G")]

    def test_node_to_itself(self, reference_graph):
        assert enumerate_paths(reference_graph, "O6", "O6") == []

    def test_diamond_yields_two_paths(self):
        graph = build_graph(
            [_requirement("R"), _objective("Oa", "10"), _objective("Ob", "10"), _objective("Oz", "10")],
            links=[
                _link("L1", "R", "Oa", "10"),
                _link("L2", "R", "Ob", "10"),
                _link("L3", "Oa", "Oz", "5"),
                _link("L4", "Ob", "Oz", "5"),
            ],
        )
        assert enumerate_paths(graph, "R", "Oz") == [("L1", "L3"), ("L2", "L4")]

    def test_decomposition_prefix(self, reference_graph):
        assert enumerate_paths(reference_graph, "R3", "O6") == [
            ("dec_R3_R1", "C", "E"),
            ("dec_R3_R2", "D", "F"),
        ]

    def test_unknown_node_rejected(self, reference_graph):
        with pytest.raises(ValueError):
            enumerate_paths(reference_graph, "NOPE", "O7")


class TestSummarizeChain:
    def test_three_link_chain(self, reference_graph):
        summary = summarize_chain(reference_graph, ["C", "E", "G"])
        assert summary.delivered_amount == Fraction(20, 11)
        assert summary.compound_confidence == F("0.75")

    def test_single_links(self, reference_graph):
        g = summarize_chain(reference_graph, ["G"])
        assert (g.delivered_amount, g.compound_confidence) == (F(3), F("0.75"))
        c = summarize_chain(reference_graph, ["C"])
        assert (c.delivered_amount, c.compound_confidence) == (F(80), F(1))

    def test_decomposition_prefix_passes_through(self, reference_graph):
        summary = summarize_chain(reference_graph, ["dec_R3_R1", "C", "E"])
        assert summary.delivered_amount == F(20)
        assert summary.compound_confidence == F(1)

    def test_disconnected_chain_rejected(self, reference_graph):
        with pytest.raises(ValueError):
            summarize_chain(reference_graph, ["C", "G"])

    def test_wrong_direction_rejected(self, reference_graph):
        with pytest.raises(ValueError):
            summarize_chain(reference_graph, ["G", "E"])

    def test_trace_link_rejected(self, reference_graph):
        with pytest.raises(ValueError):
            summarize_chain(reference_graph, ["trace_O7_SG1"])


class TestAttribute:
    def test_direct_link(self, reference_graph):
        result = attribute(reference_graph, "R1", "O4")
        assert result.raw_amount == F(80)
        assert result.adjusted_amount == F(80)
        assert result.compound_confidence == F(1)
        assert [p.links for p in result.paths] == [("C",)]

    def test_three_hop_chain(self, reference_graph):
        result = attribute(reference_graph, "R1", "O7")
        assert result.raw_amount == Fraction(20, 11)  # 3 * (80/80) * (20/33)
        assert result.compound_confidence == F("0.75")
        assert result.adjusted_amount == Fraction(15, 11)

    def test_matches_bruteforce_oracle(self, reference_graph):
        raw, adjusted, chains = oracle_attribution(reference_graph, "R1", "O7")
        result = attribute(reference_graph, "R1", "O7")
        assert (result.raw_amount, result.adjusted_amount) == (raw, adjusted)
        assert sorted(p.links for p in result.paths) == chains

    def test_decomposition_lift_adds_children(self, reference_graph):
        lifted = attribute(reference_graph, "R3", "O6")
        r1 = attribute(reference_graph, "R1", "O6")
        r2 = attribute(reference_graph, "R2", "O6")
        assert lifted.raw_amount == r1.raw_amount + r2.raw_amount == F(33)
        assert lifted.adjusted_amount == r1.adjusted_amount + r2.adjusted_amount
        assert lifted.adjusted_amount == F(20) + F(13) * F("0.5625")

    def test_no_path(self, reference_graph):
        result = attribute(reference_graph, "R2", "O4")
        assert result.raw_amount == 0
        assert result.adjusted_amount == 0
        assert result.paths == ()
        assert result.compound_confidence == F(1)

    def test_excluded_requirement_still_computed(self, reference_graph):
        scenario = Scenario(overrides=(IncludeRequirement("R1", False),))
        varied = apply_scenario(reference_graph, scenario)
        result = attribute(varied, "R1", "O4")
        assert result.raw_amount == F(80)
        assert any(w.code == "excluded-requirement" for w in result.warnings)

    def test_unknown_ids_rejected(self, reference_graph):
        with pytest.raises(ValueError):
            attribute(reference_graph, "NOPE", "O7")
        with pytest.raises(ValueError):
            attribute(reference_graph, "R1", "NOPE")


class TestPrioritize:
    def test_reference_against_top_level(self, reference_graph):
        rows = prioritize(reference_graph)
        assert [r.requirement for r in rows] == ["R3", "R1", "R2"]
        r1 = rows[1]
        assert r1.per_objective["O7"] == Fraction(5, 11)  # 1.3636.. / 3
        assert r1.score == Fraction(5, 11)
        assert r1.value_density == Fraction(5, 11) / 320

    def test_requirement_without_path_ranks_last(self):
        graph = build_graph(
            [
                _requirement("Ra"),
                _requirement("Rb"),
                _objective("O", "10", top_level=True),
            ],
            links=[_link("L", "Ra", "O", "10")],
        )
        rows = prioritize(graph)
        assert rows[-1].requirement == "Rb"
        assert rows[-1].score == 0

    def test_ties_break_by_requirement_id(self):
        graph = build_graph(
            [
                _requirement("Rb"),
                _requirement("Ra"),
                _objective("O", "10", top_level=True),
            ],
            links=[
                _link("L1", "Ra", "O", "5"),
                _link("L2", "Rb", "O", "5"),
            ],
        )
        rows = prioritize(graph)
        assert [r.requirement for r in rows] == ["Ra", "Rb"]

    def test_no_targets_rejected(self):
        graph = build_graph([_requirement("R"), _objective("O", "10")])
        with pytest.raises(ValueError, match="nothing to prioritise"):
            prioritize(graph)

    def test_explicit_targets(self, reference_graph):
        rows = prioritize(reference_graph, ["O4", "O7"])
        by_id = {r.requirement: r for r in rows}
        assert by_id["R1"].per_objective["O4"] == F(1)
        assert by_id["R1"].score == (F(1) + Fraction(5, 11)) / 2


class TestScenarios:
    def test_confidence_flip_satisfies_o6(self, reference_graph):
        report = run_whatif(
            reference_graph, Scenario(overrides=(SetConfidence("F", Decimal(1)),))
        )
        row = next(r for r in report.rows if r.objective == "O6")
        assert row.scenario.status is Status.SATISFIED
        assert row.delta_adjusted == F("3.25")
        assert report.transitions == {"in_doubt->satisfied": 1}
        assert len(report.changed) == 1

    def test_empty_scenario_equals_baseline(self, reference_graph):
        assert apply_scenario(reference_graph, Scenario()) == reference_graph
        report = run_whatif(reference_graph, Scenario())
        assert report.transitions == {}
        assert all(r.delta_raw == 0 and r.delta_adjusted == 0 for r in report.rows)

    def test_exclusion_cascades(self, reference_graph):
        report = run_whatif(
            reference_graph, Scenario(overrides=(IncludeRequirement("R1", False),))
        )
        by_id = {r.objective: r for r in report.rows}
        assert by_id["O4"].baseline.status is Status.SATISFIED
        assert by_id["O4"].scenario.status is Status.UNSATISFIED
        assert by_id["O6"].scenario.status is Status.UNSATISFIED

    def test_set_amount_checks_units(self, reference_graph):
        from galign.model import ModelError

        scenario = Scenario(overrides=(SetAmount("G", Quantity(Decimal(3), "weeks")),))
        with pytest.raises(ModelError):
            apply_scenario(reference_graph, scenario)

    def test_dangling_override_rejected(self, reference_graph):
        with pytest.raises(ValueError):
            apply_scenario(reference_graph, Scenario(overrides=(SetConfidence("ZZ", Decimal(1)),)))

    def test_select_or_flows_into_options(self):
        graph = build_graph(
            [_requirement("R1"), _requirement("R2"), _objective("O", "30")],
            links=[
                _link("La", "R1", "O", "30", combinator=Combinator.OR, or_group="g1"),
                _link("Lb", "R2", "O", "40", combinator=Combinator.OR, or_group="g1"),
            ],
        )
        report = run_whatif(graph, Scenario(overrides=(SelectOr("g1", "Lb"),)))
        row = report.rows[0]
        assert row.baseline.status is Status.UNDETERMINED
        assert row.scenario.status is Status.SATISFIED
        assert row.scenario.raw_sum == F(40)

    def test_compare_mismatched_sets_rejected(self, reference_graph):
        baseline = evaluate(reference_graph)
        smaller = build_graph([_objective("O", "10")])
        with pytest.raises(ValueError):
            compare(baseline, evaluate(smaller))

    def test_compare_same_result_is_silent(self, reference_graph):
        result = evaluate(reference_graph)
        report = compare(result, result)
        assert report.transitions == {}
        assert not report.changed


class TestOracleAgreement:
    def test_random_graphs_match_recursive_oracle(self):
        rng = random.Random(20260810)
        for _ in range(150):
            graph = random_graph(rng, with_or=rng.random() < 0.4)
            options = EvalOptions(
                use_confidence=rng.random() < 0.8,
                or_policy=rng.choice(list(OrPolicy)),
            )
            expected = oracle_evaluate(graph, options)
            result = evaluate(graph, options)
            for oid, (raw, adjusted, status) in expected.items():
                outcome = result.outcomes[oid]
                assert outcome.raw_sum == raw, (oid, graph)
                assert outcome.adjusted_sum == adjusted
                assert outcome.status is status

    def test_random_attribution_matches_path_oracle(self):
        rng = random.Random(77)
        for _ in range(120):
            graph = random_graph(rng)
            req = rng.choice(graph.requirements)
            obj = rng.choice(graph.objectives)
            raw, adjusted, chains = oracle_attribution(graph, req.id, obj.id)
            result = attribute(graph, req.id, obj.id)
            assert result.raw_amount == raw
            assert result.adjusted_amount == adjusted
            assert sorted(p.links for p in result.paths) == chains

    def test_status_partition_and_satisfied_fractions(self):
        rng = random.Random(5)
        for _ in range(100):
            graph = random_graph(rng, with_or=True)
            result = evaluate(graph)
            for outcome in result.outcomes.values():
                assert outcome.status in tuple(Status)
                if outcome.status is Status.SATISFIED:
                    assert outcome.raw_fraction == 1
                    assert outcome.adjusted_fraction == 1


def _objective(oid, value, unit="%", top_level=False):
    return Objective(
        id=oid,
        activity="Reduced",
        focus="Cost",
        magnitude=Quantity(Decimal(value), unit),
        scale="cost scale",
        top_level=top_level,
    )


def _requirement(rid, included=True):
    return Requirement(
        id=rid,
        kind=RequirementKind.FUNCTIONAL,
        headline=f"do {rid}",
        fit_criterion="done",
        included=included,
        effort_hours=Decimal(320) if rid == "R1" else None,
    )


def _link(lid, source, target, value, unit="%", conf="1", combinator=Combinator.INDEPENDENT, or_group=None, author=None):
    return ContributionLink(
        id=lid,
        source=source,
        target=target,
        amount=Quantity(Decimal(value), unit),
        confidence=Decimal(conf),
        combinator=combinator,
        or_group=or_group,
        author=author,
    )
