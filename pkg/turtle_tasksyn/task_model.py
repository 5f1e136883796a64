#------------------------------------------------------------------------------
# Module:       task_model.py
# Purpose:      Value types shared by every stage of the synthesis pipeline
#------------------------------------------------------------------------------
"""
Domain types for turtle grid tasks.

All types are frozen values: worlds, tasks, programs and trajectories can be
hashed, compared and handed to worker processes without copying.
Invariant checks are explicit (``problems()`` / ``validate_task``) so that
intermediate values, such as the element-free grids used for tracing, can be
built without tripping them.
"""
from __future__ import annotations

import hashlib
import json
import logging
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Optional, Union

logger = logging.getLogger(__name__)

MIN_GRID_SIDE = 2
MAX_GRID_SIDE = 8
MIN_REPEAT = 2
MAX_REPEAT = 5

Cell = tuple[int, int]


class Direction(Enum):
    NORTH = "N"
    EAST = "E"
    SOUTH = "S"
    WEST = "W"

    def right(self) -> "Direction":
        return _CLOCKWISE[(_CLOCKWISE.index(self) + 1) % 4]

    def left(self) -> "Direction":
        return _CLOCKWISE[(_CLOCKWISE.index(self) - 1) % 4]

    @property
    def delta(self) -> tuple[int, int]:
        """(row, col) offset of one step forward; row 0 is the top of the grid."""
        return _DELTAS[self]


_CLOCKWISE = (Direction.NORTH, Direction.EAST, Direction.SOUTH, Direction.WEST)
_DELTAS = {
    Direction.NORTH: (-1, 0),
    Direction.EAST: (0, 1),
    Direction.SOUTH: (1, 0),
    Direction.WEST: (0, -1),
}


class ItemKind(Enum):
    STRAWBERRY = "strawberry"
    LEMON = "lemon"
    APPLE = "apple"
    BANANA = "banana"


class PenColor(Enum):
    BLACK = "black"
    RED = "red"
    GREEN = "green"
    BLUE = "blue"
    YELLOW = "yellow"
    WHITE = "white"


class Command(Enum):
    FORWARD = "forward"
    BACK = "back"
    LEFT = "left"
    RIGHT = "right"


class CrashReason(Enum):
    OFF_GRID = "off_grid"
    WALL = "wall"
    FORBIDDEN = "forbidden"


class Difficulty(Enum):
    EASY = "easy"
    MEDIUM = "medium"
    HARD = "hard"


BASIC_BLOCKS = tuple(command.value for command in Command)
BLOCK_NAMES = BASIC_BLOCKS + ("setpencolor", "repeat")


class InvalidTaskError(ValueError):
    """Raised when a task, world or program breaks its type invariants."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems) or "invalid task")


def are_adjacent(a: Cell, b: Cell) -> bool:
    return abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1


def neighbors4(cell: Cell) -> list[Cell]:
    row, col = cell
    return [(row - 1, col), (row, col + 1), (row + 1, col), (row, col - 1)]


@dataclass(frozen=True)
class Pose:
    row: int
    col: int
    dir: Direction

    @property
    def cell(self) -> Cell:
        return (self.row, self.col)


@dataclass(frozen=True)
class Segment:
    """A drawn edge between two 4-neighbour cells; endpoints are stored sorted."""

    a: Cell
    b: Cell
    color: PenColor

    def __post_init__(self):
        first, second = sorted((tuple(self.a), tuple(self.b)))
        object.__setattr__(self, "a", first)
        object.__setattr__(self, "b", second)

    @property
    def edge(self) -> tuple[Cell, Cell]:
        return (self.a, self.b)


@dataclass(frozen=True)
class GridWorld:
    rows: int
    cols: int
    start: Pose
    items: tuple[tuple[Cell, ItemKind], ...] = ()
    walls: frozenset[Cell] = frozenset()
    forbidden: frozenset[Cell] = frozenset()
    pattern: frozenset[Segment] = frozenset()

    def __post_init__(self):
        # Accept dicts and plain iterables, store one canonical form.
        pairs = self.items.items() if isinstance(self.items, Mapping) else self.items
        items = tuple(sorted(((tuple(cell), ItemKind(kind)) for cell, kind in pairs), key=lambda pair: pair[0]))
        object.__setattr__(self, "items", items)
        object.__setattr__(self, "walls", frozenset(tuple(cell) for cell in self.walls))
        object.__setattr__(self, "forbidden", frozenset(tuple(cell) for cell in self.forbidden))
        object.__setattr__(self, "pattern", frozenset(self.pattern))

    @cached_property
    def item_map(self) -> dict[Cell, ItemKind]:
        return dict(self.items)

    def item_at(self, cell: Cell) -> Optional[ItemKind]:
        return self.item_map.get(tuple(cell))

    def cells_with(self, kind: ItemKind) -> frozenset[Cell]:
        return frozenset(cell for cell, item in self.items if item == kind)

    def in_bounds(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.rows and 0 <= cell[1] < self.cols

    def blocked(self, cell: Cell) -> Optional[CrashReason]:
        """Crash reason for entering ``cell``, or None when the move is legal."""
        if not self.in_bounds(cell):
            return CrashReason.OFF_GRID
        if cell in self.walls:
            return CrashReason.WALL
        if cell in self.forbidden:
            return CrashReason.FORBIDDEN
        return None

    def all_cells(self) -> list[Cell]:
        return [(row, col) for row in range(self.rows) for col in range(self.cols)]

    def element_count(self) -> int:
        return len(self.items) + len(self.walls) + len(self.forbidden)

    def problems(self) -> list[str]:
        problems = []
        if not (MIN_GRID_SIDE <= self.rows <= MAX_GRID_SIDE and MIN_GRID_SIDE <= self.cols <= MAX_GRID_SIDE):
            problems.append(f"grid {self.rows}x{self.cols} outside {MIN_GRID_SIDE}..{MAX_GRID_SIDE} per side")
        if not self.in_bounds(self.start.cell):
            problems.append(f"start {self.start.cell} outside the grid")
        if self.start.cell in self.walls or self.start.cell in self.forbidden:
            problems.append(f"start {self.start.cell} is blocked")

        item_cells = [cell for cell, _ in self.items]
        if len(set(item_cells)) != len(item_cells):
            problems.append("more than one item on a cell")
        for label, cells in (("item", item_cells), ("wall", self.walls), ("forbidden", self.forbidden)):
            outside = sorted(cell for cell in cells if not self.in_bounds(cell))
            if outside:
                problems.append(f"{label} cells outside the grid: {outside}")
        if set(item_cells) & self.walls or set(item_cells) & self.forbidden or self.walls & self.forbidden:
            problems.append("items, walls and forbidden cells overlap")

        edges = Counter(segment.edge for segment in self.pattern)
        if any(count > 1 for count in edges.values()):
            problems.append("pattern has more than one color on an edge")
        for segment in self.pattern:
            if not are_adjacent(segment.a, segment.b):
                problems.append(f"pattern segment {segment.edge} does not join 4-neighbours")
            elif not (self.in_bounds(segment.a) and self.in_bounds(segment.b)):
                problems.append(f"pattern segment {segment.edge} outside the grid")
        return problems


class GoalKind(Enum):
    FIND = "find"
    COLLECT_ALL = "collect_all"
    DRAW = "draw"


NAVIGATION_GOALS = (GoalKind.FIND, GoalKind.COLLECT_ALL)


@dataclass(frozen=True)
class Goal:
    kind: GoalKind
    item: Optional[ItemKind] = None

    @classmethod
    def find(cls, item: ItemKind) -> "Goal":
        return cls(GoalKind.FIND, item)

    @classmethod
    def collect_all(cls, item: ItemKind) -> "Goal":
        return cls(GoalKind.COLLECT_ALL, item)

    @classmethod
    def draw(cls) -> "Goal":
        return cls(GoalKind.DRAW)

    def describe(self) -> str:
        if self.kind == GoalKind.FIND:
            return f"Find the {self.item.value}"
        if self.kind == GoalKind.COLLECT_ALL:
            return f"Collect all the {self.item.value}s"
        return "Draw the pattern"


class ConstraintKind(Enum):
    AT_MOST_COMMANDS = "at_most_commands"
    EXACTLY_COMMANDS = "exactly_commands"
    ALLOWED_BLOCKS = "allowed_blocks"
    MUST_USE = "must_use"
    FORBID = "forbid"
    MAX_OCCURRENCES = "max_occurrences"


@dataclass(frozen=True)
class CodeConstraint:
    """One member of a task's constraint set.

    ``n`` holds the command count for the two length constraints and the cap
    ``k`` for MaxOccurrences; ``block`` names the block for MustUse, Forbid and
    MaxOccurrences; ``blocks`` is the AllowedBlocks set.
    """

    kind: ConstraintKind
    n: Optional[int] = None
    block: Optional[str] = None
    blocks: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "blocks", frozenset(self.blocks))

    @classmethod
    def at_most_commands(cls, n: int) -> "CodeConstraint":
        return cls(ConstraintKind.AT_MOST_COMMANDS, n=n)

    @classmethod
    def exactly_commands(cls, n: int) -> "CodeConstraint":
        return cls(ConstraintKind.EXACTLY_COMMANDS, n=n)

    @classmethod
    def allowed_blocks(cls, blocks: Iterable[str]) -> "CodeConstraint":
        return cls(ConstraintKind.ALLOWED_BLOCKS, blocks=frozenset(blocks))

    @classmethod
    def must_use(cls, block: str) -> "CodeConstraint":
        return cls(ConstraintKind.MUST_USE, block=block)

    @classmethod
    def forbid(cls, block: str) -> "CodeConstraint":
        return cls(ConstraintKind.FORBID, block=block)

    @classmethod
    def max_occurrences(cls, block: str, k: int) -> "CodeConstraint":
        return cls(ConstraintKind.MAX_OCCURRENCES, n=k, block=block)

    @property
    def sort_key(self) -> tuple:
        return (self.kind.value, self.block or "", self.n or 0, tuple(sorted(self.blocks)))

    def describe(self) -> str:
        if self.kind == ConstraintKind.AT_MOST_COMMANDS:
            return f"at most {self.n} commands"
        if self.kind == ConstraintKind.EXACTLY_COMMANDS:
            return f"exactly {self.n} commands"
        if self.kind == ConstraintKind.ALLOWED_BLOCKS:
            return f"only blocks {', '.join(sorted(self.blocks))}"
        if self.kind == ConstraintKind.MUST_USE:
            return f"must use {self.block}"
        if self.kind == ConstraintKind.FORBID:
            return f"no {self.block}"
        return f"{self.block} at most {self.n} times"

    def problems(self) -> list[str]:
        problems = []
        if self.kind in (ConstraintKind.AT_MOST_COMMANDS, ConstraintKind.EXACTLY_COMMANDS, ConstraintKind.MAX_OCCURRENCES):
            if self.n is None or self.n < 1:
                problems.append(f"{self.kind.value} needs a count >= 1")
        if self.kind in (ConstraintKind.MUST_USE, ConstraintKind.FORBID, ConstraintKind.MAX_OCCURRENCES):
            if self.block not in BLOCK_NAMES:
                problems.append(f"{self.kind.value} names unknown block {self.block!r}")
        if self.kind == ConstraintKind.ALLOWED_BLOCKS:
            if not self.blocks:
                problems.append("allowed_blocks is empty")
            unknown = sorted(self.blocks - set(BLOCK_NAMES))
            if unknown:
                problems.append(f"allowed_blocks names unknown blocks {unknown}")
        return problems


def constraint_set_problems(constraints: Iterable[CodeConstraint]) -> list[str]:
    constraints = list(constraints)
    problems = [problem for constraint in constraints for problem in constraint.problems()]
    required = {c.block for c in constraints if c.kind == ConstraintKind.MUST_USE}
    forbidden = {c.block for c in constraints if c.kind == ConstraintKind.FORBID}
    for block in sorted(required & forbidden):
        problems.append(f"block {block!r} is both required and forbidden")
    return problems


# --- programs -----------------------------------------------------------------

@dataclass(frozen=True)
class Basic:
    command: Command

    @property
    def block(self) -> str:
        return self.command.value


@dataclass(frozen=True)
class SetPenColor:
    color: PenColor

    @property
    def block(self) -> str:
        return "setpencolor"


Token = Union[Basic, SetPenColor]


@dataclass(frozen=True)
class Repeat:
    count: int
    body: tuple[Token, ...]

    def __post_init__(self):
        object.__setattr__(self, "body", tuple(self.body))

    @property
    def block(self) -> str:
        return "repeat"


Stmt = Union[Basic, SetPenColor, Repeat]


@dataclass(frozen=True)
class Program:
    statements: tuple[Stmt, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "statements", tuple(self.statements))

    def __add__(self, other: "Program") -> "Program":
        return Program(self.statements + other.statements)

    def tokens(self) -> Iterator[Token]:
        """Written tokens in source order; a repeat body is listed once."""
        for stmt in self.statements:
            if isinstance(stmt, Repeat):
                yield from stmt.body
            else:
                yield stmt

    def unrolled(self) -> Iterator[Token]:
        """Tokens in execution order."""
        for stmt in self.statements:
            if isinstance(stmt, Repeat):
                for _ in range(stmt.count):
                    yield from stmt.body
            else:
                yield stmt

    def block_counts(self) -> Counter:
        """Written occurrences per block name, ``repeat`` headers included."""
        counts = Counter(token.block for token in self.tokens())
        repeats = sum(1 for stmt in self.statements if isinstance(stmt, Repeat))
        if repeats:
            counts["repeat"] = repeats
        return counts

    def has_repeat(self) -> bool:
        return any(isinstance(stmt, Repeat) for stmt in self.statements)

    def problems(self) -> list[str]:
        problems = []
        for stmt in self.statements:
            if not isinstance(stmt, Repeat):
                continue
            if not MIN_REPEAT <= stmt.count <= MAX_REPEAT:
                problems.append(f"repeat count {stmt.count} outside {MIN_REPEAT}..{MAX_REPEAT}")
            if not stmt.body:
                problems.append("repeat with an empty body")
            if any(isinstance(inner, Repeat) for inner in stmt.body):
                problems.append("nested repeat")
        return problems


def code_length(code: Program) -> int:
    """Count of written Basic and SetPenColor tokens; repeat headers count 0."""
    return sum(1 for _ in code.tokens())


@dataclass(frozen=True)
class Task:
    goal: Goal
    constraints: frozenset[CodeConstraint]
    world: GridWorld

    def __post_init__(self):
        object.__setattr__(self, "constraints", frozenset(self.constraints))

    def sorted_constraints(self) -> list[CodeConstraint]:
        return sorted(self.constraints, key=lambda c: c.sort_key)

    def problems(self) -> list[str]:
        problems = self.world.problems() + constraint_set_problems(self.constraints)
        goal, world = self.goal, self.world
        if goal.kind == GoalKind.DRAW:
            if not world.pattern:
                problems.append("draw goal needs a nonempty pattern")
            if goal.item is not None:
                problems.append("draw goal takes no item")
        else:
            if world.pattern:
                problems.append(f"{goal.kind.value} goal needs an empty pattern")
            if goal.item is None:
                problems.append(f"{goal.kind.value} goal needs an item")
        if goal.kind == GoalKind.FIND and world.item_at(world.start.cell) is not None:
            problems.append("find task has an item on the start cell")
        return problems


def validate_task(task: Task) -> Task:
    problems = task.problems()
    if problems:
        raise InvalidTaskError(problems)
    return task


@dataclass(frozen=True)
class Trajectory:
    poses: tuple[Pose, ...]
    visited: tuple[Cell, ...]
    segments: frozenset[Segment]
    crashed: bool = False
    crash_reason: Optional[CrashReason] = None

    @property
    def final_pose(self) -> Pose:
        return self.poses[-1]

    @property
    def final_cell(self) -> Cell:
        return self.visited[-1]

    @property
    def moves(self) -> int:
        return len(self.poses) - 1


def canonical_hash(task: Task, code: Program) -> str:
    """Field-order independent SHA-256 digest of a (task, code) pair."""
    # serialization lives next to the file formats
    from .lang import print_program
    from .task_io import task_to_dict

    payload = json.dumps(
        {"task": task_to_dict(task), "code": print_program(code)},
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()
