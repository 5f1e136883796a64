#------------------------------------------------------------------------------
# Module:       task_io.py
# Purpose:      Task JSON file format (read / write / canonical dict form)
#------------------------------------------------------------------------------
"""
Task files are JSON objects with the keys ``grid``, ``turtle``, ``items``,
``walls``, ``forbidden``, ``pattern``, ``goal`` and ``constraints``.
Cell arrays are sorted by (row, col) and written with sorted keys so that a
load/dump cycle reproduces the file byte for byte.
"""
import json
import logging
from typing import Any, Optional

from .task_model import (
    CodeConstraint,
    ConstraintKind,
    Direction,
    Goal,
    GoalKind,
    GridWorld,
    ItemKind,
    InvalidTaskError,
    PenColor,
    Pose,
    Segment,
    Task,
    validate_task,
)

logger = logging.getLogger(__name__)


class TaskFormatError(ValueError):
    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.message = message
        self.path = path
        self.line = line
        location = path or "<task>"
        if line is not None:
            location = f"{location}:{line}"
        super().__init__(f"{location}: {message}")


def _cell(row: int, col: int) -> dict:
    return {"row": row, "col": col}


def constraint_to_dict(constraint: CodeConstraint) -> dict:
    kind = constraint.kind
    if kind in (ConstraintKind.AT_MOST_COMMANDS, ConstraintKind.EXACTLY_COMMANDS):
        return {"type": kind.value, "n": constraint.n}
    if kind == ConstraintKind.ALLOWED_BLOCKS:
        return {"type": kind.value, "blocks": sorted(constraint.blocks)}
    if kind == ConstraintKind.MAX_OCCURRENCES:
        return {"type": kind.value, "block": constraint.block, "k": constraint.n}
    return {"type": kind.value, "block": constraint.block}


def constraint_from_dict(data: dict) -> CodeConstraint:
    kind = ConstraintKind(data["type"])
    if kind == ConstraintKind.AT_MOST_COMMANDS:
        return CodeConstraint.at_most_commands(int(data["n"]))
    if kind == ConstraintKind.EXACTLY_COMMANDS:
        return CodeConstraint.exactly_commands(int(data["n"]))
    if kind == ConstraintKind.ALLOWED_BLOCKS:
        return CodeConstraint.allowed_blocks(data["blocks"])
    if kind == ConstraintKind.MUST_USE:
        return CodeConstraint.must_use(data["block"])
    if kind == ConstraintKind.FORBID:
        return CodeConstraint.forbid(data["block"])
    return CodeConstraint.max_occurrences(data["block"], int(data["k"]))


def _endpoint(value) -> tuple[int, int]:
    if not isinstance(value, list) or len(value) != 2 or not all(type(v) is int for v in value):
        raise ValueError(f"pattern endpoint {value!r} is not a [row, col] pair of integers")
    return (value[0], value[1])


def task_to_dict(task: Task) -> dict:
    """Canonical JSON-ready form of a task."""
    world = task.world
    goal: dict[str, Any] = {"type": task.goal.kind.value}
    if task.goal.item is not None:
        goal["item"] = task.goal.item.value

    pattern = sorted(world.pattern, key=lambda s: (s.a, s.b, s.color.value))
    return {
        "grid": {"rows": world.rows, "cols": world.cols},
        "turtle": {"row": world.start.row, "col": world.start.col, "dir": world.start.dir.value},
        "items": [{**_cell(*cell), "kind": kind.value} for cell, kind in world.items],
        "walls": [_cell(*cell) for cell in sorted(world.walls)],
        "forbidden": [_cell(*cell) for cell in sorted(world.forbidden)],
        "pattern": [{"from": list(s.a), "to": list(s.b), "color": s.color.value} for s in pattern],
        "goal": goal,
        "constraints": [constraint_to_dict(c) for c in task.sorted_constraints()],
    }


def task_from_dict(data: dict) -> Task:
    """Build and validate a task from its dict form.

    Raises:
        TaskFormatError: missing keys, unknown enum values or broken invariants.
    """
    try:
        turtle = data["turtle"]
        world = GridWorld(
            rows=int(data["grid"]["rows"]),
            cols=int(data["grid"]["cols"]),
            start=Pose(int(turtle["row"]), int(turtle["col"]), Direction(turtle["dir"])),
            items=[((int(i["row"]), int(i["col"])), ItemKind(i["kind"])) for i in data.get("items", [])],
            walls=[(int(w["row"]), int(w["col"])) for w in data.get("walls", [])],
            forbidden=[(int(f["row"]), int(f["col"])) for f in data.get("forbidden", [])],
            pattern=[
                Segment(_endpoint(p["from"]), _endpoint(p["to"]), PenColor(p["color"]))
                for p in data.get("pattern", [])
            ],
        )
        goal_data = data["goal"]
        item = ItemKind(goal_data["item"]) if goal_data.get("item") is not None else None
        goal = Goal(GoalKind(goal_data["type"]), item)
        constraints = frozenset(constraint_from_dict(c) for c in data.get("constraints", []))
    except KeyError as e:
        raise TaskFormatError(f"missing key {e.args[0]!r}")
    except (TypeError, ValueError) as e:
        raise TaskFormatError(str(e))

    try:
        return validate_task(Task(goal, constraints, world))
    except InvalidTaskError as e:
        raise TaskFormatError(str(e))


def dumps_task(task: Task) -> str:
    return json.dumps(task_to_dict(task), indent=2, sort_keys=True) + "\n"


def loads_task(text: str, path: Optional[str] = None) -> Task:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise TaskFormatError(e.msg, path=path, line=e.lineno)
    if not isinstance(data, dict):
        raise TaskFormatError("top-level value must be an object", path=path, line=1)
    try:
        return task_from_dict(data)
    except TaskFormatError as e:
        raise TaskFormatError(e.message, path=path)


def load_task(path: str) -> Task:
    with open(path, "r", encoding="utf-8") as f:
        return loads_task(f.read(), path=path)


def dump_task(task: Task, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(dumps_task(task))
    logger.debug(f"Wrote task file {path}")
