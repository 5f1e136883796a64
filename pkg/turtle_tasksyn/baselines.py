"""
RotateFlip comparison baseline: new tasks from geometric transforms of the
reference grid.

* easy    rotate the grid 90 degrees counterclockwise, code unchanged
* medium  mirror the grid left-right, swap left/right in code and constraints
* hard    rotate, then mirror
"""
import logging
from typing import Callable

from .task_model import (
    Basic,
    Cell,
    CodeConstraint,
    Command,
    Difficulty,
    Direction,
    GridWorld,
    Pose,
    Program,
    Repeat,
    Segment,
    Task,
)

logger = logging.getLogger(__name__)

_TURN_SWAP = {"left": "right", "right": "left"}
_MIRROR_DIR = {
    Direction.NORTH: Direction.NORTH,
    Direction.SOUTH: Direction.SOUTH,
    Direction.EAST: Direction.WEST,
    Direction.WEST: Direction.EAST,
}


def _map_world(world: GridWorld, rows: int, cols: int, cell_map: Callable[[Cell], Cell], dir_map) -> GridWorld:
    start = world.start
    new_row, new_col = cell_map(start.cell)
    return GridWorld(
        rows=rows,
        cols=cols,
        start=Pose(new_row, new_col, dir_map(start.dir)),
        items=[(cell_map(cell), kind) for cell, kind in world.items],
        walls=frozenset(cell_map(cell) for cell in world.walls),
        forbidden=frozenset(cell_map(cell) for cell in world.forbidden),
        pattern=frozenset(Segment(cell_map(s.a), cell_map(s.b), s.color) for s in world.pattern),
    )


def rotate_ccw(world: GridWorld) -> GridWorld:
    """Rotate 90 degrees counterclockwise: (r, c) -> (cols - 1 - c, r)."""
    cols = world.cols
    return _map_world(world, world.cols, world.rows, lambda cell: (cols - 1 - cell[1], cell[0]), Direction.left)


def mirror(world: GridWorld) -> GridWorld:
    """Left-right mirror: (r, c) -> (r, cols - 1 - c)."""
    cols = world.cols
    return _map_world(world, world.rows, world.cols, lambda cell: (cell[0], cols - 1 - cell[1]), _MIRROR_DIR.get)


def _swap_token(token):
    if isinstance(token, Basic) and token.command.value in _TURN_SWAP:
        return Basic(Command(_TURN_SWAP[token.command.value]))
    return token


def swap_turns(code: Program) -> Program:
    statements = []
    for stmt in code.statements:
        if isinstance(stmt, Repeat):
            statements.append(Repeat(stmt.count, tuple(_swap_token(t) for t in stmt.body)))
        else:
            statements.append(_swap_token(stmt))
    return Program(tuple(statements))


def _swap_block(block):
    return _TURN_SWAP.get(block, block)


def swap_constraint_turns(constraint: CodeConstraint) -> CodeConstraint:
    return CodeConstraint(
        constraint.kind,
        n=constraint.n,
        block=_swap_block(constraint.block),
        blocks=frozenset(_swap_block(block) for block in constraint.blocks),
    )


def _mirror_pair(task: Task, code: Program) -> tuple[Task, Program]:
    constraints = frozenset(swap_constraint_turns(c) for c in task.constraints)
    return Task(task.goal, constraints, mirror(task.world)), swap_turns(code)


def rotate_flip(reference: tuple, difficulty: Difficulty) -> tuple[Task, Program]:
    task, code = reference
    if difficulty == Difficulty.EASY:
        result = (Task(task.goal, task.constraints, rotate_ccw(task.world)), code)
    elif difficulty == Difficulty.MEDIUM:
        result = _mirror_pair(task, code)
    else:
        rotated = Task(task.goal, task.constraints, rotate_ccw(task.world))
        result = _mirror_pair(rotated, code)
    logger.debug(f"RotateFlip {difficulty.value}: start {task.world.start} -> {result[0].world.start}")
    return result
