"""
Shared generators and brute-force oracles for the test suite.
"""
import os
import random
import sys
from itertools import product

sys.path.append(os.path.join(os.path.dirname(__file__), '..'))
from turtle_tasksyn.emulator import is_solution
from turtle_tasksyn.lang import load_program
from turtle_tasksyn.task_io import load_task
from turtle_tasksyn.task_model import (
    BASIC_BLOCKS,
    MAX_REPEAT,
    MIN_REPEAT,
    Basic,
    CodeConstraint,
    Command,
    ConstraintKind,
    Direction,
    Goal,
    GridWorld,
    ItemKind,
    PenColor,
    Pose,
    Program,
    Repeat,
    Segment,
    SetPenColor,
    Task,
)

REFERENCES_DIR = os.path.join(os.path.dirname(__file__), '..', 'references')
REFERENCE_NAMES = [
    "collect_apples",
    "collect_bananas_repeat",
    "draw_corner",
    "draw_red_square",
    "find_apple_forbidden",
    "find_lemon_repeat",
    "find_strawberry",
]


def load_reference(name):
    task = load_task(os.path.join(REFERENCES_DIR, f"{name}.task.json"))
    code = load_program(os.path.join(REFERENCES_DIR, f"{name}.xlc"))
    return task, code


def random_token(rng, allow_color=True):
    if allow_color and rng.random() < 0.2:
        return SetPenColor(rng.choice(list(PenColor)))
    return Basic(rng.choice(list(Command)))


def random_program(rng, max_statements=6, allow_repeat=True, allow_color=True):
    statements = []
    for _ in range(rng.randint(0, max_statements)):
        if allow_repeat and rng.random() < 0.25:
            body = tuple(random_token(rng, allow_color) for _ in range(rng.randint(1, 3)))
            statements.append(Repeat(rng.randint(MIN_REPEAT, MAX_REPEAT), body))
        else:
            statements.append(random_token(rng, allow_color))
    return Program(tuple(statements))


def random_world(rng, draw=False):
    rows, cols = rng.randint(2, 8), rng.randint(2, 8)
    cells = [(r, c) for r in range(rows) for c in range(cols)]
    rng.shuffle(cells)
    start_cell = cells.pop()
    start = Pose(start_cell[0], start_cell[1], rng.choice(list(Direction)))

    def take(limit):
        count = rng.randint(0, min(limit, len(cells)))
        return [cells.pop() for _ in range(count)]

    items = [(cell, rng.choice(list(ItemKind))) for cell in take(4)]
    walls = take(4)
    forbidden = take(2)
    pattern = []
    if draw:
        edges = set()
        for r in range(rows):
            for c in range(cols):
                if c + 1 < cols:
                    edges.add(((r, c), (r, c + 1)))
                if r + 1 < rows:
                    edges.add(((r, c), (r + 1, c)))
        chosen = rng.sample(sorted(edges), rng.randint(1, min(4, len(edges))))
        pattern = [Segment(a, b, rng.choice(list(PenColor))) for a, b in chosen]
    return GridWorld(rows, cols, start, items, frozenset(walls), frozenset(forbidden), frozenset(pattern))


def random_constraints(rng):
    constraints = {CodeConstraint.at_most_commands(rng.randint(1, 8))}
    if rng.random() < 0.5:
        constraints.add(CodeConstraint.allowed_blocks(rng.sample(BASIC_BLOCKS, rng.randint(1, 4)) + ["repeat"]))
    if rng.random() < 0.3:
        constraints.add(CodeConstraint.max_occurrences(rng.choice(BASIC_BLOCKS), rng.randint(1, 3)))
    if rng.random() < 0.3:
        constraints.add(CodeConstraint.must_use("repeat"))
    return frozenset(constraints)


def random_task(rng):
    """A random task satisfying every type invariant (not necessarily solvable)."""
    kind = rng.choice(["find", "collect_all", "draw"])
    # random_world never puts an item on the start cell
    world = random_world(rng, draw=(kind == "draw"))
    if kind == "draw":
        goal = Goal.draw()
    else:
        item = rng.choice(list(ItemKind))
        goal = Goal.find(item) if kind == "find" else Goal.collect_all(item)
    return Task(goal, random_constraints(rng), world)


def _alphabet(task):
    blocks = set(BASIC_BLOCKS) | {"setpencolor", "repeat"}
    for constraint in task.constraints:
        if constraint.kind == ConstraintKind.ALLOWED_BLOCKS:
            blocks &= constraint.blocks
        elif constraint.kind == ConstraintKind.FORBID:
            blocks.discard(constraint.block)
    tokens = [Basic(Command(block)) for block in BASIC_BLOCKS if block in blocks]
    if "setpencolor" in blocks:
        tokens.extend(SetPenColor(color) for color in PenColor)
    return tokens, "repeat" in blocks


def all_programs(task, max_len):
    """Every flat and single-repeat program shorter than ``max_len`` over the task's blocks."""
    tokens, repeat_allowed = _alphabet(task)
    for length in range(max_len):
        for sequence in product(tokens, repeat=length):
            yield Program(sequence)
            if not repeat_allowed:
                continue
            for i in range(length):
                for j in range(i + 1, length + 1):
                    for count in range(MIN_REPEAT, MAX_REPEAT + 1):
                        yield Program(sequence[:i] + (Repeat(count, sequence[i:j]),) + sequence[j:])


def program_space(task, max_len):
    """Size of ``all_programs(task, max_len)`` without enumerating it."""
    tokens, repeat_allowed = _alphabet(task)
    counts = MAX_REPEAT - MIN_REPEAT + 1
    return sum(
        len(tokens) ** length * (1 + (counts * length * (length + 1) // 2 if repeat_allowed else 0))
        for length in range(max_len)
    )


def naive_minimal(task, max_len):
    return not any(is_solution(task, code) for code in all_programs(task, max_len))


def seeded_rng(seed):
    return random.Random(seed)
