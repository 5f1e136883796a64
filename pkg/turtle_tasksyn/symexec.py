"""
Trajectory tracing on element-free grids, used to anchor world generation.

The DSL has no conditionals, so running a program on an empty grid yields its
exact trajectory for any world that keeps that trajectory free of obstacles.
"""
import logging

from .emulator import Turtle
from .seeds import seeded_random
from .task_model import Direction, GridWorld, Pose, Program, Trajectory

logger = logging.getLogger(__name__)

SAMPLE_ATTEMPTS = 200


class PoseExhaustedError(RuntimeError):
    """No start pose keeps the program's trajectory on the grid."""


def empty_world(rows: int, cols: int, start: Pose) -> GridWorld:
    return GridWorld(rows=rows, cols=cols, start=start)


def trace_on_empty(code: Program, rows: int, cols: int, start: Pose) -> Trajectory:
    return Turtle(empty_world(rows, cols, start)).run(code.unrolled()).trajectory()


def all_poses(rows: int, cols: int) -> list[Pose]:
    return [Pose(row, col, direction) for row in range(rows) for col in range(cols) for direction in Direction]


def sample_valid_pose(code: Program, rows: int, cols: int, rng_seed: int) -> Pose:
    """Random start pose whose empty-grid trace never leaves the grid.

    Tries ``SAMPLE_ATTEMPTS`` uniform samples, then scans every pose in a
    seeded order.

    Raises:
        PoseExhaustedError: no pose fits the program on this grid.
    """
    rng = seeded_random(rng_seed)
    directions = list(Direction)
    for _ in range(SAMPLE_ATTEMPTS):
        pose = Pose(rng.randrange(rows), rng.randrange(cols), rng.choice(directions))
        if not trace_on_empty(code, rows, cols, pose).crashed:
            return pose

    candidates = all_poses(rows, cols)
    rng.shuffle(candidates)
    for pose in candidates:
        if not trace_on_empty(code, rows, cols, pose).crashed:
            return pose
    logger.debug(f"No start pose fits {sum(1 for _ in code.unrolled())} unrolled steps on {rows}x{cols}")
    raise PoseExhaustedError(f"no start pose keeps the trajectory inside a {rows}x{cols} grid")
