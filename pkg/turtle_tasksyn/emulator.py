#------------------------------------------------------------------------------
# Module:       emulator.py
# Purpose:      Concrete execution of turtle programs and the solution oracle
#------------------------------------------------------------------------------
"""
Concrete semantics of the turtle DSL.

``execute`` runs a program on a grid world and records the trajectory;
``is_solution`` is the validity oracle every other stage relies on.
"""
import logging
from dataclasses import dataclass
from typing import Iterable, Optional

from .task_model import (
    Basic,
    CodeConstraint,
    Command,
    ConstraintKind,
    CrashReason,
    Goal,
    GoalKind,
    GridWorld,
    PenColor,
    Pose,
    Program,
    Segment,
    SetPenColor,
    Task,
    Trajectory,
    code_length,
)

logger = logging.getLogger(__name__)

DEFAULT_PEN = PenColor.BLACK


def advance(world: GridWorld, pose: Pose, command: Command) -> tuple[Pose, Optional[CrashReason]]:
    """Apply one basic command.

    Returns:
        The pose after the command and None, or the unchanged pose and the
        crash reason when the move would enter an illegal cell.
    """
    if command == Command.LEFT:
        return Pose(pose.row, pose.col, pose.dir.left()), None
    if command == Command.RIGHT:
        return Pose(pose.row, pose.col, pose.dir.right()), None

    d_row, d_col = pose.dir.delta
    if command == Command.BACK:
        d_row, d_col = -d_row, -d_col
    target = (pose.row + d_row, pose.col + d_col)
    reason = world.blocked(target)
    if reason is not None:
        return pose, reason
    return Pose(target[0], target[1], pose.dir), None


@dataclass(frozen=True)
class ExecResult:
    trajectory: Trajectory
    collected: frozenset
    goal_met: bool


class Turtle:
    """Mutable run state; one instance per execution."""

    def __init__(self, world: GridWorld):
        self.world = world
        self.pose = world.start
        self.pen = DEFAULT_PEN
        self.poses = [world.start]
        self.visited = [world.start.cell]
        self.edges: dict = {}
        self.crash_reason: Optional[CrashReason] = None

    @property
    def crashed(self) -> bool:
        return self.crash_reason is not None

    def step(self, token) -> bool:
        """Execute one token; False once the turtle has crashed."""
        if self.crashed:
            return False
        if isinstance(token, SetPenColor):
            self.pen = token.color
            return True

        new_pose, reason = advance(self.world, self.pose, token.command)
        if reason is not None:
            self.crash_reason = reason
            return False
        if new_pose.cell != self.pose.cell:
            self.visited.append(new_pose.cell)
            self.edges[tuple(sorted((self.pose.cell, new_pose.cell)))] = self.pen
        self.pose = new_pose
        self.poses.append(new_pose)
        return True

    def run(self, tokens: Iterable) -> "Turtle":
        for token in tokens:
            if not self.step(token):
                break
        return self

    def trajectory(self) -> Trajectory:
        segments = frozenset(Segment(a, b, color) for (a, b), color in self.edges.items())
        return Trajectory(
            poses=tuple(self.poses),
            visited=tuple(self.visited),
            segments=segments,
            crashed=self.crashed,
            crash_reason=self.crash_reason,
        )


def _goal_met(goal: Goal, world: GridWorld, trajectory: Trajectory) -> bool:
    if trajectory.crashed:
        return False
    if goal.kind == GoalKind.FIND:
        return world.item_at(trajectory.final_cell) == goal.item
    if goal.kind == GoalKind.COLLECT_ALL:
        return world.cells_with(goal.item) <= set(trajectory.visited)
    return trajectory.segments == world.pattern


def execute(code: Program, world: GridWorld, goal: Optional[Goal] = None) -> ExecResult:
    trajectory = Turtle(world).run(code.unrolled()).trajectory()
    collected = frozenset(cell for cell in trajectory.visited if world.item_at(cell) is not None)
    goal_met = goal is not None and _goal_met(goal, world, trajectory)
    return ExecResult(trajectory, collected, goal_met)


def check_goal(goal: Goal, world: GridWorld, result: ExecResult) -> bool:
    return _goal_met(goal, world, result.trajectory)


def constraint_holds(constraint: CodeConstraint, code: Program) -> bool:
    counts = code.block_counts()
    kind = constraint.kind
    if kind == ConstraintKind.AT_MOST_COMMANDS:
        return code_length(code) <= constraint.n
    if kind == ConstraintKind.EXACTLY_COMMANDS:
        return code_length(code) == constraint.n
    if kind == ConstraintKind.ALLOWED_BLOCKS:
        return set(counts) <= constraint.blocks
    if kind == ConstraintKind.MUST_USE:
        return counts[constraint.block] > 0
    if kind == ConstraintKind.FORBID:
        return counts[constraint.block] == 0
    return counts[constraint.block] <= constraint.n


def failed_constraints(constraints: Iterable[CodeConstraint], code: Program) -> list[CodeConstraint]:
    return sorted((c for c in constraints if not constraint_holds(c, code)), key=lambda c: c.sort_key)


def check_constraints(constraints: Iterable[CodeConstraint], code: Program) -> bool:
    return all(constraint_holds(c, code) for c in constraints)


def is_solution(task: Task, code: Program) -> bool:
    if not check_constraints(task.constraints, code):
        return False
    return execute(code, task.world, task.goal).goal_met
