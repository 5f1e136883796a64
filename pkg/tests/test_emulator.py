import os
import sys
import pytest

sys.path.append(os.path.join(os.path.dirname(__file__), '..'))
from turtle_tasksyn.emulator import (
    Turtle,
    advance,
    check_constraints,
    execute,
    failed_constraints,
    is_solution,
)
from turtle_tasksyn.lang import parse
from turtle_tasksyn.task_model import (
    CodeConstraint,
    Command,
    CrashReason,
    Direction,
    Goal,
    GridWorld,
    ItemKind,
    PenColor,
    Pose,
    Program,
    Segment,
    Task,
)
from helpers import REFERENCE_NAMES, load_reference, random_program, random_world, seeded_rng


@pytest.fixture
def open_world():
    return GridWorld(rows=4, cols=4, start=Pose(3, 0, Direction.NORTH))


def test_forward_moves_along_heading(open_world):
    pose, reason = advance(open_world, open_world.start, Command.FORWARD)
    assert reason is None
    assert pose == Pose(2, 0, Direction.NORTH)


def test_back_keeps_heading(open_world):
    pose, reason = advance(open_world, Pose(1, 1, Direction.EAST), Command.BACK)
    assert reason is None
    assert pose == Pose(1, 0, Direction.EAST)


def test_turns_do_not_move(open_world):
    pose, _ = advance(open_world, open_world.start, Command.RIGHT)
    assert pose == Pose(3, 0, Direction.EAST)
    pose, _ = advance(open_world, open_world.start, Command.LEFT)
    assert pose == Pose(3, 0, Direction.WEST)


@pytest.mark.parametrize("world_kwargs,reason", [
    ({}, CrashReason.OFF_GRID),
    ({"walls": frozenset({(3, 1)})}, CrashReason.WALL),
    ({"forbidden": frozenset({(3, 1)})}, CrashReason.FORBIDDEN),
])
def test_crash_reasons(world_kwargs, reason):
    world = GridWorld(rows=4, cols=4, start=Pose(3, 0, Direction.EAST), **world_kwargs)
    code = parse("forward") if world_kwargs else parse("back")
    trajectory = execute(code, world).trajectory
    assert trajectory.crashed
    assert trajectory.crash_reason == reason
    assert trajectory.poses == (world.start,)


def test_crash_stops_execution_and_keeps_prefix(open_world):
    trajectory = execute(parse("forward forward forward forward forward right"), open_world).trajectory
    assert trajectory.crashed
    assert trajectory.visited == ((3, 0), (2, 0), (1, 0), (0, 0))
    assert trajectory.final_pose == Pose(0, 0, Direction.NORTH)


def test_segments_follow_pen_color(open_world):
    trajectory = execute(parse("forward setpencolor red right forward"), open_world).trajectory
    assert trajectory.segments == frozenset({
        Segment((2, 0), (3, 0), PenColor.BLACK),
        Segment((2, 0), (2, 1), PenColor.RED),
    })


def test_redrawn_edge_keeps_latest_color(open_world):
    trajectory = execute(parse("forward setpencolor blue back"), open_world).trajectory
    assert trajectory.segments == frozenset({Segment((2, 0), (3, 0), PenColor.BLUE)})
    assert trajectory.visited == ((3, 0), (2, 0), (3, 0))


def test_turns_add_poses_but_not_cells(open_world):
    trajectory = execute(parse("left right left"), open_world).trajectory
    assert trajectory.moves == 3
    assert trajectory.visited == ((3, 0),)


@pytest.mark.parametrize("name", REFERENCE_NAMES)
def test_reference_pairs_are_solutions(name):
    task, code = load_reference(name)
    assert is_solution(task, code)


def test_find_requires_item_at_final_cell():
    task, code = load_reference("find_strawberry")
    unconstrained = Task(task.goal, frozenset(), task.world)
    assert task.world.item_at((2, 2)) == ItemKind.STRAWBERRY
    assert is_solution(unconstrained, code + parse("right"))
    assert not is_solution(unconstrained, code + parse("right forward"))
    assert not is_solution(task, code + parse("right"))  # six commands
    assert not is_solution(task, parse("forward forward left forward"))


def test_collect_all_requires_every_item():
    task, _ = load_reference("collect_apples")
    assert not is_solution(task, parse("forward forward right forward"))
    assert is_solution(task, parse("forward forward right forward forward"))


def test_draw_requires_exact_pattern():
    task, code = load_reference("draw_corner")
    assert not is_solution(task, code + parse("forward"))
    assert not is_solution(task, parse("setpencolor red") + code)


def test_crashing_run_is_never_a_solution():
    task, code = load_reference("collect_apples")
    # picks both apples, then walks into the wall at (3, 2)
    assert not is_solution(Task(task.goal, frozenset(), task.world), code + parse("forward"))


@pytest.mark.parametrize("constraint,text,holds", [
    (CodeConstraint.at_most_commands(3), "repeat 5 { forward right } left", True),
    (CodeConstraint.at_most_commands(2), "forward forward left", False),
    (CodeConstraint.exactly_commands(2), "forward left", True),
    (CodeConstraint.exactly_commands(2), "forward", False),
    (CodeConstraint.allowed_blocks(["forward", "left"]), "forward left", True),
    (CodeConstraint.allowed_blocks(["forward", "left"]), "repeat 2 { forward }", False),
    (CodeConstraint.must_use("repeat"), "repeat 2 { forward }", True),
    (CodeConstraint.must_use("setpencolor"), "forward", False),
    (CodeConstraint.forbid("back"), "forward back", False),
    (CodeConstraint.max_occurrences("forward", 2), "repeat 4 { forward } forward", True),
    (CodeConstraint.max_occurrences("forward", 1), "repeat 4 { forward } forward", False),
])
def test_constraint_checks(constraint, text, holds):
    assert check_constraints({constraint}, parse(text)) == holds


def test_failed_constraints_are_sorted():
    failed = failed_constraints(
        {CodeConstraint.forbid("left"), CodeConstraint.at_most_commands(1), CodeConstraint.must_use("repeat")},
        parse("forward left"),
    )
    assert [c.kind.value for c in failed] == ["at_most_commands", "forbid", "must_use"]


def test_unrolling_preserves_semantics():
    rng = seeded_rng(21)
    for _ in range(500):
        code = random_program(rng)
        world = random_world(rng)
        flat = Program(tuple(code.unrolled()))
        assert execute(code, world).trajectory == execute(flat, world).trajectory


def test_crash_prefix_matches_turtle_steps():
    rng = seeded_rng(22)
    for _ in range(300):
        code = random_program(rng, allow_color=False)
        world = random_world(rng)
        trajectory = execute(code, world).trajectory
        turtle = Turtle(world)
        executed = 0
        for token in code.unrolled():
            if not turtle.step(token):
                break
            executed += 1
        assert trajectory.moves == executed
        assert trajectory.crashed == turtle.crashed


if __name__ == "__main__":
    pytest.main(args=[__file__])
