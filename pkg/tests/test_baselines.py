import os
import sys
import pytest

sys.path.append(os.path.join(os.path.dirname(__file__), '..'))
from turtle_tasksyn.baselines import mirror, rotate_ccw, rotate_flip, swap_constraint_turns, swap_turns
from turtle_tasksyn.emulator import is_solution
from turtle_tasksyn.lang import parse
from turtle_tasksyn.task_model import CodeConstraint, Difficulty, Direction, GridWorld, Pose
from helpers import REFERENCE_NAMES, load_reference, random_program, random_world, seeded_rng


@pytest.mark.parametrize("name", REFERENCE_NAMES)
@pytest.mark.parametrize("difficulty", list(Difficulty))
def test_transformed_reference_stays_solvable(name, difficulty):
    task, code = load_reference(name)
    new_task, new_code = rotate_flip((task, code), difficulty)
    assert new_task.problems() == []
    assert is_solution(new_task, new_code)


def test_easy_rotates_grid_and_keeps_code():
    task, code = load_reference("find_strawberry")
    new_task, new_code = rotate_flip((task, code), Difficulty.EASY)
    assert new_code == code
    assert new_task.constraints == task.constraints
    # (4, 0) facing east on a 5x5 grid
    assert new_task.world.start == Pose(4, 4, Direction.NORTH)


def test_medium_swaps_turns():
    task, code = load_reference("find_strawberry")
    new_task, new_code = rotate_flip((task, code), Difficulty.MEDIUM)
    assert new_code == parse("forward forward right forward forward")
    assert new_task.world.start == Pose(4, 4, Direction.WEST)


def test_rotation_of_rectangular_grid():
    world = GridWorld(2, 3, Pose(0, 2, Direction.SOUTH), walls=frozenset({(1, 0)}))
    rotated = rotate_ccw(world)
    assert (rotated.rows, rotated.cols) == (3, 2)
    assert rotated.start == Pose(0, 0, Direction.EAST)
    assert rotated.walls == frozenset({(2, 1)})


def test_four_rotations_are_identity():
    rng = seeded_rng(61)
    for _ in range(100):
        world = random_world(rng, draw=rng.random() < 0.5)
        turned = world
        for _ in range(4):
            turned = rotate_ccw(turned)
        assert turned == world


def test_mirror_is_an_involution():
    rng = seeded_rng(62)
    for _ in range(100):
        world = random_world(rng, draw=True)
        assert mirror(mirror(world)) == world
        code = random_program(rng)
        assert swap_turns(swap_turns(code)) == code


def test_swap_constraint_turns():
    assert swap_constraint_turns(CodeConstraint.forbid("left")) == CodeConstraint.forbid("right")
    assert swap_constraint_turns(CodeConstraint.max_occurrences("right", 2)) == CodeConstraint.max_occurrences("left", 2)
    allowed = CodeConstraint.allowed_blocks(["forward", "left"])
    assert swap_constraint_turns(allowed) == CodeConstraint.allowed_blocks(["forward", "right"])
    assert swap_constraint_turns(CodeConstraint.at_most_commands(4)) == CodeConstraint.at_most_commands(4)


if __name__ == "__main__":
    pytest.main(args=[__file__])
