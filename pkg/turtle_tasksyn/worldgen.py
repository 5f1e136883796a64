#------------------------------------------------------------------------------
# Module:       worldgen.py
# Purpose:      Build grid worlds around a generated code's trajectory
#------------------------------------------------------------------------------
"""
Stage 2 of synthesis.

A start pose is sampled, the code is traced on an empty grid, and element
placement is posed as a CSP over cell groups:

* targets    CollectAll only: extra target cells on the trajectory
* walls      off the trajectory, one of them next to it when possible
* forbidden  off the trajectory, only when the reference had forbidden cells
* distractors off the trajectory, kinds other than the goal item

Each group is a count variable followed by cell variables; the first
``count`` cell variables hold distinct cells and the rest hold ``EMPTY``.

``block_shortcut`` repairs a world after scoring: when a shorter program
solves the task, a wall on that program's path can restore minimality.
"""
import logging
from dataclasses import replace
from itertools import islice
from typing import Iterable, Optional

from .emulator import execute, is_solution
from .fdsolver import CSP, solve_stream
from .scoring import shorter_solution
from .seeds import STAGE_PLACEMENT, STAGE_POSE, derive_seed, seeded_random
from .symexec import sample_valid_pose, trace_on_empty
from .task_model import (
    CodeConstraint,
    Goal,
    GoalKind,
    GridWorld,
    ItemKind,
    Program,
    Task,
    code_length,
    neighbors4,
)

logger = logging.getLogger(__name__)

EMPTY = None
MAX_ATTEMPTS = 50
SOLUTIONS_PER_ATTEMPT = 5
TARGET_RANGE = (2, 4)
MAX_DISTRACTORS = 3
WALL_DENSITY_DIVISOR = 5


class WorldGenerationError(RuntimeError):
    """No world could be assembled for the candidate within the attempt budget."""


def _group(csp: CSP, name: str, counts: Iterable[int], cells: list, slots: int) -> list[str]:
    """Declare one cell group and its prefix rule; returns the cell variable names."""
    counts = list(counts)
    count_id = f"{name}.count"
    cell_ids = [f"{name}.{i + 1}" for i in range(slots)]
    csp.add_variable(count_id, counts)
    for cell_id in cell_ids:
        csp.add_variable(cell_id, list(cells) + [EMPTY])

    def prefix(view, count_id=count_id, cell_ids=cell_ids):
        count = view.get(count_id)
        if count is None:
            return True
        for i, cell_id in enumerate(cell_ids):
            if cell_id in view and (view[cell_id] is EMPTY) != (i >= count):
                return False
        return True

    csp.add_constraint(f"{name}:prefix", [count_id] + cell_ids, prefix, partial=True)
    return cell_ids


def placement_csp(rows: int, cols: int, goal: Goal, visited, forbidden_hint: int = 0) -> tuple[CSP, dict]:
    """Placement CSP for one trajectory.

    Returns:
        The CSP and a mapping of group name to its cell variable names.
    """
    path = set(visited)
    start, final = visited[0], visited[-1]
    off_path = [(r, c) for r in range(rows) for c in range(cols) if (r, c) not in path]
    csp = CSP()
    groups: dict[str, list[str]] = {}

    if goal.kind == GoalKind.COLLECT_ALL:
        extra_targets = sorted(path - {start, final})
        top = min(TARGET_RANGE[1] - 1, len(extra_targets))
        counts = range(TARGET_RANGE[0] - 1, top + 1)
        groups["targets"] = _group(csp, "targets", counts, extra_targets, max(top, 0))

    wall_cap = min((rows * cols) // WALL_DENSITY_DIVISOR, len(off_path))
    groups["walls"] = _group(csp, "walls", range(min(1, wall_cap), wall_cap + 1), off_path, wall_cap)
    touching = {cell for cell in off_path if any(n in path for n in neighbors4(cell))}
    if touching and wall_cap:
        csp.add_constraint(
            "walls:touch",
            groups["walls"],
            lambda view: any(view[cell_id] in touching for cell_id in groups["walls"]),
        )

    if forbidden_hint > 0:
        top = min(forbidden_hint + 1, len(off_path))
        low = min(max(1, forbidden_hint - 1), top)
        groups["forbidden"] = _group(csp, "forbidden", range(low, top + 1), off_path, top)

    if goal.kind != GoalKind.DRAW:
        top = min(MAX_DISTRACTORS, len(off_path))
        groups["distractors"] = _group(csp, "distractors", range(0, top + 1), off_path, top)

    cell_ids = [cell_id for ids in groups.values() for cell_id in ids]

    def distinct(view):
        cells = [view[cell_id] for cell_id in cell_ids if cell_id in view and view[cell_id] is not EMPTY]
        return len(cells) == len(set(cells))

    csp.add_constraint("cells:distinct", cell_ids, distinct, partial=True)
    return csp, groups


def _assemble(rows, cols, start, goal, trajectory, assignment, groups, rng) -> GridWorld:
    def cells(name: str) -> list:
        return [assignment[cell_id] for cell_id in groups.get(name, []) if assignment[cell_id] is not EMPTY]

    items = {}
    pattern = frozenset()
    if goal.kind == GoalKind.FIND:
        items[trajectory.final_cell] = goal.item
    elif goal.kind == GoalKind.COLLECT_ALL:
        for cell in [trajectory.final_cell] + cells("targets"):
            items[cell] = goal.item
    else:
        pattern = trajectory.segments

    other_kinds = [kind for kind in ItemKind if kind != goal.item]
    for cell in sorted(cells("distractors")):
        items[cell] = rng.choice(other_kinds)

    return GridWorld(
        rows=rows,
        cols=cols,
        start=start,
        items=items,
        walls=frozenset(cells("walls")),
        forbidden=frozenset(cells("forbidden")),
        pattern=pattern,
    )


def generate_world(
    code: Program,
    goal: Goal,
    constraints: Iterable[CodeConstraint],
    rows: int,
    cols: int,
    seed: int,
    forbidden_hint: int = 0,
    max_attempts: int = MAX_ATTEMPTS,
) -> GridWorld:
    """Generate a world in which ``code`` solves (goal, constraints).

    Args:
        code: generated solution code
        goal: concrete goal
        constraints: concrete constraint set of the generated task
        rows: grid rows, inherited from the reference
        cols: grid columns, inherited from the reference
        seed: candidate seed; attempts derive their own seeds from it
        forbidden_hint: forbidden-cell count of the reference task
        max_attempts: start poses to try before giving up

    Returns:
        GridWorld passing ``is_solution`` for the assembled task.

    Raises:
        PoseExhaustedError: the code fits no start pose on this grid.
        WorldGenerationError: every attempt failed.
    """
    constraints = frozenset(constraints)
    for attempt in range(max_attempts):
        start = sample_valid_pose(code, rows, cols, derive_seed(seed, STAGE_POSE, attempt))
        trajectory = trace_on_empty(code, rows, cols, start)
        if goal.kind == GoalKind.DRAW and not trajectory.segments:
            raise WorldGenerationError("code draws nothing, no draw pattern can be built")
        if goal.kind != GoalKind.DRAW and trajectory.final_cell == start.cell:
            logger.debug(f"Attempt {attempt}: trajectory ends on the start cell")
            continue
        if goal.kind == GoalKind.COLLECT_ALL and len(set(trajectory.visited) - {start.cell}) < TARGET_RANGE[0]:
            logger.debug(f"Attempt {attempt}: trajectory too short for {TARGET_RANGE[0]} targets")
            continue

        placement_seed = derive_seed(seed, STAGE_PLACEMENT, attempt)
        csp, groups = placement_csp(rows, cols, goal, trajectory.visited, forbidden_hint)
        rng = seeded_random(placement_seed)
        for assignment in islice(solve_stream(csp, placement_seed), SOLUTIONS_PER_ATTEMPT):
            world = _assemble(rows, cols, start, goal, trajectory, assignment, groups, rng)
            task = Task(goal, constraints, world)
            if not task.problems() and is_solution(task, code):
                return world
        logger.debug(f"Attempt {attempt}: no placement solved the task")

    raise WorldGenerationError(f"no world found after {max_attempts} attempts")



def block_shortcut(task: Task, code: Program) -> Optional[Task]:
    """Wall off the path of a shorter solution so that ``code`` can become minimal.

    The oracle's witness is traced on the task's world and a wall goes on the
    first cell of its path that ``code`` never visits and that holds nothing.

    Returns:
        The task with one more wall, or None when the witness stays on the
        code's own cells, the wall cap is reached, or there is no witness.
    """
    world = task.world
    if len(world.walls) >= (world.rows * world.cols) // WALL_DENSITY_DIVISOR:
        return None
    witness = shorter_solution(task, code_length(code))
    if witness is None:
        return None
    occupied = set(execute(code, world).trajectory.visited) | set(world.walls) | set(world.forbidden)
    occupied |= {cell for cell, _ in world.items}
    for cell in execute(witness, world).trajectory.visited:
        if cell in occupied:
            continue
        blocked = replace(world, walls=world.walls | {cell})
        repaired = Task(task.goal, task.constraints, blocked)
        if not repaired.problems() and is_solution(repaired, code):
            logger.debug(f"Wall at {cell} blocks a {code_length(witness)}-command shortcut")
            return repaired
    return None
