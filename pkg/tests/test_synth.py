import os
import sys
from itertools import count

import pytest

sys.path.append(os.path.join(os.path.dirname(__file__), '..'))
from turtle_tasksyn.emulator import execute, is_solution
from turtle_tasksyn.lang import parse
from turtle_tasksyn.synth import COUNTER_NAMES, InvalidReferenceError, SynthRequest, synthesize
from turtle_tasksyn.task_model import ConstraintKind, Difficulty, GoalKind, Repeat, code_length
from helpers import load_reference

SMALL_BUDGET = dict(
    max_instantiations=120,
    max_worlds_per_instantiation=1,
    restart_every=40,
    pool_factor=1,
    world_attempts=10,
)
DEV_BUDGET = dict(
    max_instantiations=500,
    max_worlds_per_instantiation=3,
    restart_every=25,
    pool_factor=2,
    world_attempts=30,
)


def _request(name, difficulty, k=2, seed=0, **overrides):
    budget = {**SMALL_BUDGET, **overrides}
    return SynthRequest(reference=load_reference(name), difficulty=difficulty, k=k, seed=seed, **budget)


@pytest.fixture(scope="module")
def easy_report():
    return synthesize(_request("find_strawberry", Difficulty.EASY))


def test_easy_outputs_are_valid(easy_report):
    ref_task, ref_code = load_reference("find_strawberry")
    assert 1 <= len(easy_report.outputs) <= 2
    for candidate in easy_report.outputs:
        assert is_solution(candidate.task, candidate.code)
        assert code_length(candidate.code) == code_length(ref_code)
        assert len(candidate.task.constraints) == len(ref_task.constraints)
        assert candidate.task.goal.kind == GoalKind.FIND
        assert candidate.total >= 0.6
        assert candidate.components["validity"] == 1
        assert candidate.components["minimality"] == 1
        final_cell = execute(candidate.code, candidate.task.world).trajectory.final_cell
        assert candidate.task.world.item_at(final_cell) == candidate.task.goal.item
        assert (candidate.task.world.rows, candidate.task.world.cols) == (5, 5)


def test_outputs_are_ranked_and_distinct(easy_report):
    totals = [c.total for c in easy_report.outputs]
    assert totals == sorted(totals, reverse=True)
    digests = [c.digest for c in easy_report.outputs]
    assert len(digests) == len(set(digests))


def test_counters_are_reported(easy_report):
    assert set(easy_report.counters) == set(COUNTER_NAMES)
    assert 0 < easy_report.counters["instantiations_tried"] <= SMALL_BUDGET["max_instantiations"]
    assert easy_report.counters["worlds_built"] >= len(easy_report.outputs)


def test_same_seed_same_outputs(easy_report):
    again = synthesize(_request("find_strawberry", Difficulty.EASY))
    assert [c.digest for c in again.outputs] == [c.digest for c in easy_report.outputs]
    assert again.to_dict() == easy_report.to_dict()


def test_report_dict_has_no_timing(easy_report):
    data = easy_report.to_dict()
    assert set(data) == {"counters", "outputs"}
    for entry in data["outputs"]:
        assert set(entry) == {"digest", "total", "components", "flags"}


def test_medium_conformance():
    ref_task, ref_code = load_reference("collect_bananas_repeat")
    report = synthesize(_request("collect_bananas_repeat", Difficulty.MEDIUM, **DEV_BUDGET))
    assert len(report.outputs) == 2
    for candidate in report.outputs:
        length = code_length(candidate.code)
        assert code_length(ref_code) < length <= code_length(ref_code) + 2
        assert len(candidate.task.constraints) == len(ref_task.constraints)
        assert candidate.task.goal.kind == GoalKind.COLLECT_ALL
        assert any(isinstance(stmt, Repeat) for stmt in candidate.code.statements)
        assert is_solution(candidate.task, candidate.code)


def test_hard_conformance():
    ref_task, ref_code = load_reference("draw_corner")
    report = synthesize(_request("draw_corner", Difficulty.HARD, **DEV_BUDGET))
    assert len(report.outputs) == 2
    menu = {ConstraintKind.MUST_USE, ConstraintKind.MAX_OCCURRENCES, ConstraintKind.FORBID}
    for candidate in report.outputs:
        assert code_length(candidate.code) == code_length(ref_code) + 2
        assert len(candidate.task.constraints) == len(ref_task.constraints) + 1
        extra = candidate.task.constraints - ref_task.constraints
        assert any(c.kind in menu for c in extra)
        assert candidate.task.goal.kind == GoalKind.DRAW
        assert is_solution(candidate.task, candidate.code)


def test_time_budget_stops_synthesis():
    ticks = count(0, 100)
    report = synthesize(_request("find_strawberry", Difficulty.EASY, time_budget_seconds=1), clock=lambda: next(ticks))
    assert report.outputs == []
    assert report.counters["instantiations_tried"] == 0


def test_instantiation_budget_is_respected():
    report = synthesize(_request("find_strawberry", Difficulty.MEDIUM, max_instantiations=5))
    assert report.counters["instantiations_tried"] <= 5


def test_invalid_reference_is_rejected():
    task, _ = load_reference("find_strawberry")
    request = SynthRequest(reference=(task, parse("forward")), difficulty=Difficulty.EASY)
    with pytest.raises(InvalidReferenceError):
        synthesize(request)


@pytest.mark.parametrize("field,value", [("k", 0), ("max_instantiations", 0), ("time_budget_seconds", -1)])
def test_request_validation(field, value):
    with pytest.raises(ValueError):
        SynthRequest(reference=load_reference("find_strawberry"), difficulty=Difficulty.EASY, **{field: value})


if __name__ == "__main__":
    pytest.main(args=[__file__])
