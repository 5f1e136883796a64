#------------------------------------------------------------------------------
# Module:       scoring.py
# Purpose:      Candidate quality scores, minimality oracle and top-k ranking
#------------------------------------------------------------------------------
"""
Stage 3 of synthesis.

The score is an automated proxy for a human quality rubric. Two hard gates
(validity and minimality) zero the total; otherwise the total is a weighted
mean of three soft components in [0, 1]:

* trajectory_quality  turn ratio, no forward/back undo, 2D span
* visual_quality      element density, start cell differs from final cell
* dissimilarity       start pose and cell contents differ from the reference
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Optional

from .emulator import advance, execute, is_solution
from .task_model import (
    BASIC_BLOCKS,
    Basic,
    Command,
    ConstraintKind,
    GoalKind,
    GridWorld,
    MAX_REPEAT,
    MIN_REPEAT,
    PenColor,
    Program,
    Repeat,
    SetPenColor,
    Task,
    canonical_hash,
    code_length,
)

logger = logging.getLogger(__name__)

MAX_ORACLE_LENGTH = 8
MAX_ORACLE_PROGRAMS = 10**6
REPEAT_COUNTS = MAX_REPEAT - MIN_REPEAT + 1

TURN_RATIO_BAND = (0.25, 0.6)
DENSITY_BAND = (0.05, 0.35)

FLAG_MINIMALITY_UNKNOWN = "minimality_unknown"


class BudgetExceeded(RuntimeError):
    """The program space of the minimality search is over budget."""


@dataclass(frozen=True)
class ScoringConfig:
    trajectory_weight: float = 0.4
    visual_weight: float = 0.3
    dissimilarity_weight: float = 0.3
    threshold: float = 0.6

    @classmethod
    def from_mapping(cls, data: Optional[Mapping[str, Any]]) -> "ScoringConfig":
        """Build from the ``scoring`` section of a configuration profile."""
        data = data or {}
        weights = data.get("weights", {}) or {}
        defaults = cls()
        config = cls(
            trajectory_weight=float(weights.get("trajectory_quality", defaults.trajectory_weight)),
            visual_weight=float(weights.get("visual_quality", defaults.visual_weight)),
            dissimilarity_weight=float(weights.get("dissimilarity", defaults.dissimilarity_weight)),
            threshold=float(data.get("threshold", defaults.threshold)),
        )
        weights_sum = config.trajectory_weight + config.visual_weight + config.dissimilarity_weight
        if min(config.trajectory_weight, config.visual_weight, config.dissimilarity_weight) < 0 or weights_sum <= 0:
            raise ValueError("scoring weights must be non-negative with a positive sum")
        if not 0.0 <= config.threshold <= 1.0:
            raise ValueError(f"scoring threshold {config.threshold} outside [0, 1]")
        return config


@dataclass(frozen=True)
class ScoredCandidate:
    task: Task
    code: Program
    components: dict = field(hash=False)
    total: float
    digest: str
    flags: tuple = ()


# --- minimality oracle ----------------------------------------------------------

_PRE, _BODY, _POST = "pre", "body", "post"


class _Oracle:
    """Breadth-first search over flat and single-repeat programs, by code length."""

    def __init__(self, task: Task):
        self.task = task
        self.world: GridWorld = task.world
        self.goal = task.goal
        self.draw = task.goal.kind == GoalKind.DRAW

        blocks = set(BASIC_BLOCKS) | {"setpencolor", "repeat"}
        self.exact: Optional[int] = None
        self.at_most: Optional[int] = None
        self.must_use: list[str] = []
        self.caps: list[tuple[str, int]] = []
        for constraint in task.constraints:
            kind = constraint.kind
            if kind == ConstraintKind.ALLOWED_BLOCKS:
                blocks &= constraint.blocks
            elif kind == ConstraintKind.FORBID:
                blocks.discard(constraint.block)
            elif kind == ConstraintKind.EXACTLY_COMMANDS:
                self.exact = constraint.n if self.exact in (None, constraint.n) else -1
            elif kind == ConstraintKind.AT_MOST_COMMANDS:
                self.at_most = constraint.n if self.at_most is None else min(self.at_most, constraint.n)
            elif kind == ConstraintKind.MUST_USE:
                self.must_use.append(constraint.block)
            else:
                self.caps.append((constraint.block, constraint.n))
        self.must_use.sort()
        self.caps.sort()

        self.tokens: list = [Basic(Command(block)) for block in BASIC_BLOCKS if block in blocks]
        if "setpencolor" in blocks:
            # colors only matter for drawings
            colors = list(PenColor) if self.draw else [PenColor.BLACK]
            self.tokens.extend(SetPenColor(color) for color in colors)
        self.repeat_allowed = "repeat" in blocks

        self.pattern = {segment.edge: segment.color for segment in self.world.pattern}
        self.pattern_items = frozenset(self.pattern.items())
        self.targets = self.world.cells_with(self.goal.item) if self.goal.item is not None else frozenset()

    def program_count(self, max_len: int) -> int:
        alphabet = len(self.tokens)
        total = 0
        for length in range(max_len):
            shapes = 1 + (REPEAT_COUNTS * length * (length + 1) // 2 if self.repeat_allowed else 0)
            total += alphabet**length * shapes
        return total

    # exec state: (pose, pen, accumulator); None once crashed or off-pattern
    def initial(self) -> tuple:
        start = self.world.start
        if self.draw:
            return (start, PenColor.BLACK, frozenset())
        return (start, None, frozenset(self.targets & {start.cell}))

    def run_token(self, state: tuple, token) -> Optional[tuple]:
        pose, pen, acc = state
        if isinstance(token, SetPenColor):
            return (pose, token.color, acc) if self.draw else state
        new_pose, reason = advance(self.world, pose, token.command)
        if reason is not None:
            return None
        if new_pose.cell != pose.cell:
            if self.draw:
                edge = tuple(sorted((pose.cell, new_pose.cell)))
                if edge not in self.pattern:
                    return None
                acc = frozenset({(e, c) for e, c in acc if e != edge} | {(edge, pen)})
            elif new_pose.cell in self.targets:
                acc = acc | {new_pose.cell}
        return (new_pose, pen, acc)

    def run_body(self, state: tuple, body: tuple, times: int) -> Optional[tuple]:
        for _ in range(times):
            for token in body:
                state = self.run_token(state, token)
                if state is None:
                    return None
        return state

    def goal_met(self, state: tuple) -> bool:
        pose, _, acc = state
        if self.goal.kind == GoalKind.FIND:
            return self.world.item_at(pose.cell) == self.goal.item
        if self.goal.kind == GoalKind.COLLECT_ALL:
            return acc == self.targets
        return acc == self.pattern_items

    def counters_after(self, counters: tuple, block: str) -> Optional[tuple]:
        used, counts = counters
        if block in self.must_use:
            used = tuple(flag or name == block for flag, name in zip(used, self.must_use))
        if any(name == block for name, _ in self.caps):
            counts = tuple(
                count + 1 if name == block else count for count, (name, _) in zip(counts, self.caps)
            )
            if any(count > cap for count, (_, cap) in zip(counts, self.caps)):
                return None
        return (used, counts)

    def accepts(self, depth: int, counters: tuple) -> bool:
        if self.exact is not None and depth != self.exact:
            return False
        if self.at_most is not None and depth > self.at_most:
            return False
        return all(counters[0])

    def shorter_solution(self, max_len: int) -> Optional[Program]:
        """First program found with fewer than ``max_len`` commands, or None."""
        counters = (tuple(False for _ in self.must_use), tuple(0 for _ in self.caps))
        # node: (mode, state, counters, repeat count, open body, statements written so far)
        frontier = [(_PRE, self.initial(), counters, None, (), ())]
        seen = set()

        def key(node, depth):
            mode, state, counters, count, body, _ = node
            return (mode, state, counters, count, body, depth if self.exact is not None else None)

        for depth in range(max_len):
            # zero-cost transitions (opening and closing a repeat) stay on this level
            level, queue = [], list(frontier)
            while queue:
                node = queue.pop()
                node_key = key(node, depth)
                if node_key in seen:
                    continue
                seen.add(node_key)
                level.append(node)
                mode, state, counters, count, body, written = node
                if mode == _PRE and self.repeat_allowed:
                    opened = self.counters_after(counters, "repeat")
                    if opened is not None:
                        queue.extend((_BODY, state, opened, n, (), written) for n in range(MIN_REPEAT, MAX_REPEAT + 1))
                elif mode == _BODY and body:
                    closed = self.run_body(state, body, count)
                    if closed is not None:
                        queue.append((_POST, closed, counters, None, (), written + (Repeat(count, body),)))

            for mode, state, counters, count, body, written in level:
                if mode != _BODY and self.goal_met(state) and self.accepts(depth, counters):
                    logger.debug(f"Found a solution with {depth} commands")
                    return Program(written)

            if depth + 1 == max_len:
                break
            frontier = []
            for mode, state, counters, count, body, written in level:
                for token in self.tokens:
                    advanced = self.counters_after(counters, token.block)
                    if advanced is None:
                        continue
                    if mode == _BODY:
                        grown = body + (token,)
                        # the first pass of a repeat is a prefix of its execution
                        if self.run_body(state, grown, 1) is None:
                            continue
                        frontier.append((_BODY, state, advanced, count, grown, written))
                    else:
                        moved = self.run_token(state, token)
                        if moved is not None:
                            frontier.append((mode, moved, advanced, None, (), written + (token,)))
        return None


def shorter_solution(task: Task, max_len: int) -> Optional[Program]:
    """A program with fewer than ``max_len`` commands that solves ``task``, or None.

    Raises:
        BudgetExceeded: ``max_len`` above 8 or more than 10**6 candidate programs.
    """
    if max_len > MAX_ORACLE_LENGTH:
        raise BudgetExceeded(f"max_len {max_len} above {MAX_ORACLE_LENGTH}")
    oracle = _Oracle(task)
    programs = oracle.program_count(max_len)
    if programs > MAX_ORACLE_PROGRAMS:
        raise BudgetExceeded(f"{programs} candidate programs above {MAX_ORACLE_PROGRAMS}")
    if oracle.exact is not None and oracle.exact >= max_len:
        return None
    if max_len <= 0:
        return None
    return oracle.shorter_solution(max_len)


def minimality_oracle(task: Task, max_len: int) -> bool:
    """True iff no program shorter than ``max_len`` solves ``task``.

    Raises:
        BudgetExceeded: ``max_len`` above 8 or more than 10**6 candidate programs.
    """
    return shorter_solution(task, max_len) is None


# --- soft components -------------------------------------------------------------

def band_score(value: float, low: float, high: float) -> float:
    """1 inside [low, high], linear falloff to 0 at 0 and at 1."""
    if value < low:
        return max(0.0, value / low)
    if value > high:
        return max(0.0, (1.0 - value) / (1.0 - high))
    return 1.0


def trajectory_quality(task: Task, code: Program) -> float:
    trajectory = execute(code, task.world).trajectory
    commands = [token.command for token in code.unrolled() if isinstance(token, Basic)][: trajectory.moves]
    turns = sum(1 for command in commands if command in (Command.LEFT, Command.RIGHT))
    turn_term = band_score(turns / len(commands), *TURN_RATIO_BAND) if commands else 0.0

    undo = any(
        {first, second} == {Command.FORWARD, Command.BACK} for first, second in zip(commands, commands[1:])
    )
    rows = {cell[0] for cell in trajectory.visited}
    cols = {cell[1] for cell in trajectory.visited}
    span = 1.0 if len(rows) >= 2 and len(cols) >= 2 else 0.0
    return (turn_term + (0.0 if undo else 1.0) + span) / 3


def visual_quality(task: Task, code: Program) -> float:
    world = task.world
    density = world.element_count() / (world.rows * world.cols)
    trajectory = execute(code, world).trajectory
    moved = 1.0 if trajectory.final_cell != world.start.cell else 0.0
    return (band_score(density, *DENSITY_BAND) + moved) / 2


def _cell_labels(world: GridWorld) -> dict:
    labels = {cell: "empty" for cell in world.all_cells()}
    labels.update({cell: "wall" for cell in world.walls})
    labels.update({cell: "forbidden" for cell in world.forbidden})
    labels.update({cell: kind.value for cell, kind in world.items})
    return labels


def grid_edit_distance(a: GridWorld, b: GridWorld) -> float:
    """Share of cells whose contents differ; cells outside either grid count as different."""
    labels_a, labels_b = _cell_labels(a), _cell_labels(b)
    cells = set(labels_a) | set(labels_b)
    different = sum(1 for cell in cells if labels_a.get(cell) != labels_b.get(cell))
    return min(1.0, different / max(a.rows * a.cols, b.rows * b.cols))


def dissimilarity(task: Task, reference: Task) -> float:
    start_differs = 1.0 if task.world.start != reference.world.start else 0.0
    return (start_differs + grid_edit_distance(task.world, reference.world)) / 2


def score(candidate: tuple, reference: tuple, config: Optional[ScoringConfig] = None) -> ScoredCandidate:
    """Score a (task, code) pair against the reference pair."""
    config = config or ScoringConfig()
    task, code = candidate
    ref_task, _ = reference
    flags = []

    validity = 1 if is_solution(task, code) else 0
    minimality = 0
    if validity:
        try:
            minimality = 1 if minimality_oracle(task, code_length(code)) else 0
        except BudgetExceeded as e:
            logger.warning(f"Minimality unknown, scored as minimal: {e}")
            minimality = 1
            flags.append(FLAG_MINIMALITY_UNKNOWN)

    components = {
        "validity": validity,
        "minimality": minimality,
        "trajectory_quality": trajectory_quality(task, code),
        "visual_quality": visual_quality(task, code),
        "dissimilarity": dissimilarity(task, ref_task),
    }
    if validity and minimality:
        weights = (config.trajectory_weight, config.visual_weight, config.dissimilarity_weight)
        soft = (components["trajectory_quality"], components["visual_quality"], components["dissimilarity"])
        total = sum(w * value for w, value in zip(weights, soft)) / sum(weights)
        total = min(1.0, max(0.0, total))
    else:
        total = 0.0
    return ScoredCandidate(task, code, components, total, canonical_hash(task, code), tuple(flags))


def top_k(candidates: Iterable[ScoredCandidate], k: int, threshold: float) -> list[ScoredCandidate]:
    """Best ``k`` distinct candidates at or above ``threshold``, ties broken by digest."""
    if k < 1:
        raise ValueError("k must be at least 1")
    unique: dict[str, ScoredCandidate] = {}
    for candidate in candidates:
        if candidate.total >= threshold and candidate.digest not in unique:
            unique[candidate.digest] = candidate
    ranked = sorted(unique.values(), key=lambda c: (-c.total, c.digest))
    return ranked[:k]
