import json
import os
import sys
import pytest

sys.path.append(os.path.join(os.path.dirname(__file__), '..'))
from turtle_tasksyn.task_io import (
    TaskFormatError,
    dump_task,
    dumps_task,
    load_task,
    loads_task,
    task_from_dict,
    task_to_dict,
)
from turtle_tasksyn.task_model import CodeConstraint
from helpers import REFERENCES_DIR, REFERENCE_NAMES, load_reference, random_task, seeded_rng


def test_random_tasks_survive_json():
    rng = seeded_rng(71)
    for _ in range(200):
        task = random_task(rng)
        assert task.problems() == []
        assert loads_task(dumps_task(task)) == task


@pytest.mark.parametrize("name", REFERENCE_NAMES)
def test_reference_files_are_canonical(name):
    path = os.path.join(REFERENCES_DIR, f"{name}.task.json")
    with open(path, encoding="utf-8") as f:
        text = f.read()
    assert dumps_task(load_task(path)) == text


def test_file_round_trip(tmp_path):
    task, _ = load_reference("draw_red_square")
    path = str(tmp_path / "square.task.json")
    dump_task(task, path)
    assert load_task(path) == task


def test_max_occurrences_uses_k():
    data = task_to_dict(load_reference("find_strawberry")[0])
    data["constraints"].append({"type": "max_occurrences", "block": "forward", "k": 3})
    task = task_from_dict(data)
    assert CodeConstraint.max_occurrences("forward", 3) in task.constraints
    assert {"type": "max_occurrences", "block": "forward", "k": 3} in task_to_dict(task)["constraints"]


def test_invalid_json_reports_line():
    with pytest.raises(TaskFormatError) as excinfo:
        loads_task('{\n  "grid": {\n  oops\n}', path="broken.task.json")
    assert excinfo.value.path == "broken.task.json"
    assert excinfo.value.line == 3
    assert str(excinfo.value).startswith("broken.task.json:3:")


@pytest.mark.parametrize("mutate,fragment", [
    (lambda d: d.pop("goal"), "missing key 'goal'"),
    (lambda d: d["turtle"].update(dir="up"), "'up'"),
    (lambda d: d["goal"].update(item="cherry"), "'cherry'"),
    (lambda d: d["walls"].append({"row": 4, "col": 0}), "blocked"),
    (lambda d: d["grid"].update(rows=12), "outside 2..8"),
    (lambda d: d["constraints"].append({"type": "sometimes"}), "'sometimes'"),
])
def test_invalid_tasks_are_rejected(mutate, fragment):
    data = task_to_dict(load_reference("find_strawberry")[0])
    mutate(data)
    with pytest.raises(TaskFormatError) as excinfo:
        loads_task(json.dumps(data), path="bad.task.json")
    assert fragment in str(excinfo.value)
    assert str(excinfo.value).startswith("bad.task.json:")


@pytest.mark.parametrize("endpoint", [[0, 0, 0], [0.5, 1], "0,1", [True, 1]])
def test_pattern_endpoints_must_be_integer_pairs(endpoint):
    data = task_to_dict(load_reference("draw_red_square")[0])
    data["pattern"][0]["from"] = endpoint
    with pytest.raises(TaskFormatError, match="pattern endpoint"):
        loads_task(json.dumps(data), path="square.task.json")


def test_top_level_must_be_object():
    with pytest.raises(TaskFormatError, match="object"):
        loads_task("[1, 2]")


if __name__ == "__main__":
    pytest.main(args=[__file__])
