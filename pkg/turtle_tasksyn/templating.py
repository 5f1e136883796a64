#------------------------------------------------------------------------------
# Module:       templating.py
# Purpose:      Abstract a reference (code, constraints, goal) into templates
#               with typed placeholders, and turn solver assignments back into
#               concrete instantiations
#------------------------------------------------------------------------------
"""
Stage 1 of synthesis.

``templatize`` keeps the reference code's statement structure and replaces
every low-level choice with a placeholder:

* ``B<i>``      each basic command, domain {forward, back, left, right}
* ``color<i>``  each setpencolor argument, domain PenColor
* ``N<i>``      each repeat count, domain 2..5
* ``S1, S2``    extra command slots (Medium: optional, Hard: mandatory)
* ``L<i>``      numeric constraint parameters, tied to the generated code
* ``fruit_type`` / ``goal_type`` the goal item and (Hard only) goal kind
* ``X1``        the extra Hard constraint, picked from a fixed menu

``template_csp`` turns a TemplateSet into an fdsolver CSP whose solutions are
exactly the instantiations admitted by ``difficulty_constraints``.
"""
import logging
from dataclasses import dataclass
from typing import Any, Callable, Mapping, Optional, Union

from .emulator import check_constraints
from .fdsolver import CSP
from .seeds import seeded_random
from .task_model import (
    MAX_REPEAT,
    MIN_REPEAT,
    NAVIGATION_GOALS,
    Basic,
    CodeConstraint,
    Command,
    ConstraintKind,
    Difficulty,
    Goal,
    GoalKind,
    ItemKind,
    PenColor,
    Program,
    Repeat,
    SetPenColor,
    code_length,
)

logger = logging.getLogger(__name__)

ABSENT = "absent"
MAX_EXTRA_SLOTS = 2
NUMERIC_KINDS = (ConstraintKind.AT_MOST_COMMANDS, ConstraintKind.EXACTLY_COMMANDS, ConstraintKind.MAX_OCCURRENCES)


@dataclass(frozen=True)
class Placeholder:
    id: str
    domain: tuple
    optional: bool = False


@dataclass(frozen=True)
class CommandHole:
    id: str


@dataclass(frozen=True)
class ColorHole:
    id: str


@dataclass(frozen=True)
class RepeatHole:
    count_id: str
    body: tuple


SkeletonNode = Union[CommandHole, ColorHole, RepeatHole]


@dataclass(frozen=True)
class ConstraintTemplate:
    """A reference constraint; numeric ones carry a placeholder for their bound."""

    kind: ConstraintKind
    block: Optional[str] = None
    blocks: frozenset = frozenset()
    param_id: Optional[str] = None
    ref_value: Optional[int] = None


@dataclass(frozen=True)
class GoalTemplate:
    ref_kind: GoalKind
    type_id: Optional[str] = None
    item_id: Optional[str] = None


@dataclass(frozen=True)
class TemplateSet:
    code_template: tuple
    constraint_template: tuple
    goal_template: GoalTemplate
    difficulty: Difficulty
    ref_length: int
    placeholders: tuple
    slot_ids: tuple = ()
    slot_gaps: tuple = ()
    extra_id: Optional[str] = None

    def placeholder(self, placeholder_id: str) -> Placeholder:
        for placeholder in self.placeholders:
            if placeholder.id == placeholder_id:
                return placeholder
        raise KeyError(placeholder_id)

    @property
    def code_ids(self) -> list[str]:
        """Placeholders that appear in the code skeleton, in skeleton order."""
        ids = []
        for node in self.code_template:
            if isinstance(node, RepeatHole):
                ids.append(node.count_id)
                ids.extend(inner.id for inner in node.body)
            else:
                ids.append(node.id)
        return ids


@dataclass(frozen=True)
class Instantiation:
    code: Program
    constraints: frozenset
    goal: Goal
    extra_constraint: Optional[CodeConstraint] = None


# --- templatize ---------------------------------------------------------------

class _Builder:
    def __init__(self, difficulty: Difficulty):
        self.difficulty = difficulty
        self.placeholders: list[Placeholder] = []
        self.counters: dict[str, int] = {}

    def new(self, prefix: str, domain, optional: bool = False) -> str:
        self.counters[prefix] = self.counters.get(prefix, 0) + 1
        placeholder_id = f"{prefix}{self.counters[prefix]}"
        self.placeholders.append(Placeholder(placeholder_id, tuple(domain), optional))
        return placeholder_id

    def leaf(self, token) -> SkeletonNode:
        if isinstance(token, SetPenColor):
            return ColorHole(self.new("color", PenColor))
        return CommandHole(self.new("B", Command))

    def slot(self, slot_id: str) -> CommandHole:
        optional = self.difficulty == Difficulty.MEDIUM
        domain = tuple(Command) + ((ABSENT,) if optional else ())
        self.placeholders.append(Placeholder(slot_id, domain, optional))
        return CommandHole(slot_id)


def _gaps(code: Program) -> list[tuple]:
    gaps = [("top", i) for i in range(len(code.statements) + 1)]
    for index, stmt in enumerate(code.statements):
        if isinstance(stmt, Repeat):
            gaps.extend(("body", index, j) for j in range(len(stmt.body) + 1))
    return gaps


def templatize(ref_code: Program, ref_constraints, ref_goal: Goal, difficulty: Difficulty, seed: int = 0) -> TemplateSet:
    """Build the TemplateSet of a reference at the given difficulty.

    Args:
        ref_code: reference solution code
        ref_constraints: reference constraint set
        ref_goal: reference goal
        difficulty: target difficulty
        seed: chooses the insertion points of the extra slots

    Returns:
        TemplateSet whose placeholder ids are unique across code, constraints and goal.
    """
    rng = seeded_random(seed)
    builder = _Builder(difficulty)

    slot_count = 0 if difficulty == Difficulty.EASY else MAX_EXTRA_SLOTS
    gaps = _gaps(ref_code)
    slot_ids = tuple(f"S{i + 1}" for i in range(slot_count))
    slot_gaps = tuple(rng.choice(gaps) for _ in slot_ids)

    def slots_at(gap) -> list:
        return [builder.slot(slot_id) for slot_id, where in zip(slot_ids, slot_gaps) if where == gap]

    skeleton: list = []
    for index, stmt in enumerate(ref_code.statements):
        skeleton.extend(slots_at(("top", index)))
        if isinstance(stmt, Repeat):
            count_id = builder.new("N", range(MIN_REPEAT, MAX_REPEAT + 1))
            body: list = []
            for j, token in enumerate(stmt.body):
                body.extend(slots_at(("body", index, j)))
                body.append(builder.leaf(token))
            body.extend(slots_at(("body", index, len(stmt.body))))
            skeleton.append(RepeatHole(count_id, tuple(body)))
        else:
            skeleton.append(builder.leaf(stmt))
    skeleton.extend(slots_at(("top", len(ref_code.statements))))

    ref_length = code_length(ref_code)
    constraint_template = []
    for constraint in sorted(ref_constraints, key=lambda c: c.sort_key):
        if constraint.kind in NUMERIC_KINDS:
            if constraint.kind == ConstraintKind.MAX_OCCURRENCES:
                top = max(constraint.n, ref_length + MAX_EXTRA_SLOTS)
                domain = range(constraint.n, top + 1)
            else:
                domain = range(max(1, constraint.n), constraint.n + MAX_EXTRA_SLOTS + 1)
            param_id = builder.new("L", domain)
            constraint_template.append(
                ConstraintTemplate(constraint.kind, constraint.block, constraint.blocks, param_id, constraint.n)
            )
        else:
            constraint_template.append(ConstraintTemplate(constraint.kind, constraint.block, constraint.blocks))

    item_id = type_id = None
    if ref_goal.item is not None:
        builder.placeholders.append(Placeholder("fruit_type", tuple(ItemKind)))
        item_id = "fruit_type"
    if difficulty == Difficulty.HARD and ref_goal.kind in NAVIGATION_GOALS:
        builder.placeholders.append(Placeholder("goal_type", NAVIGATION_GOALS))
        type_id = "goal_type"

    extra_id = None
    if difficulty == Difficulty.HARD:
        builder.placeholders.append(Placeholder("X1", tuple(_extra_menu(ref_code, ref_constraints))))
        extra_id = "X1"

    ts = TemplateSet(
        code_template=tuple(skeleton),
        constraint_template=tuple(constraint_template),
        goal_template=GoalTemplate(ref_goal.kind, type_id, item_id),
        difficulty=difficulty,
        ref_length=ref_length,
        placeholders=tuple(builder.placeholders),
        slot_ids=slot_ids,
        slot_gaps=slot_gaps,
        extra_id=extra_id,
    )
    logger.debug(f"Templatized reference at {difficulty.value}: {len(ts.placeholders)} placeholders, slots at {slot_gaps}")
    return ts


def _extra_menu(ref_code: Program, ref_constraints) -> list[tuple]:
    """Candidate (kind, block) pairs for the extra Hard constraint."""
    taken = {(c.kind, c.block) for c in ref_constraints}
    menu = []
    if ref_code.has_repeat():
        menu.append((ConstraintKind.MUST_USE, "repeat"))
    for command in Command:
        menu.append((ConstraintKind.MAX_OCCURRENCES, command.value))
        menu.append((ConstraintKind.FORBID, command.value))
    return [entry for entry in menu if entry not in taken]


# --- instantiate --------------------------------------------------------------

def _token(node, assignment: Mapping[str, Any]):
    value = assignment[node.id]
    if isinstance(node, ColorHole):
        return SetPenColor(PenColor(value))
    if value == ABSENT:
        return None
    return Basic(Command(value))


def build_code(ts: TemplateSet, assignment: Mapping[str, Any]) -> Program:
    statements = []
    for node in ts.code_template:
        if isinstance(node, RepeatHole):
            body = tuple(t for t in (_token(inner, assignment) for inner in node.body) if t is not None)
            statements.append(Repeat(assignment[node.count_id], body))
        else:
            token = _token(node, assignment)
            if token is not None:
                statements.append(token)
    return Program(tuple(statements))


def _extra_constraint(entry: tuple, code: Program) -> CodeConstraint:
    kind, block = entry
    if kind == ConstraintKind.MUST_USE:
        return CodeConstraint.must_use(block)
    if kind == ConstraintKind.FORBID:
        return CodeConstraint.forbid(block)
    return CodeConstraint.max_occurrences(block, code.block_counts()[block])


def instantiate(ts: TemplateSet, assignment: Mapping[str, Any]) -> Instantiation:
    code = build_code(ts, assignment)

    constraints = set()
    for template in ts.constraint_template:
        n = assignment[template.param_id] if template.param_id else None
        constraints.add(CodeConstraint(template.kind, n=n, block=template.block, blocks=template.blocks))

    goal_template = ts.goal_template
    kind = GoalKind(assignment[goal_template.type_id]) if goal_template.type_id else goal_template.ref_kind
    item = ItemKind(assignment[goal_template.item_id]) if goal_template.item_id else None

    extra = None
    if ts.extra_id is not None:
        extra = _extra_constraint(assignment[ts.extra_id], code)
        constraints.add(extra)
    return Instantiation(code, frozenset(constraints), Goal(kind, item), extra)


# --- difficulty rules ---------------------------------------------------------

def length_admitted(difficulty: Difficulty, ref_length: int, length: int) -> bool:
    if difficulty == Difficulty.EASY:
        return length == ref_length
    if difficulty == Difficulty.MEDIUM:
        return ref_length < length <= ref_length + MAX_EXTRA_SLOTS
    return length == ref_length + MAX_EXTRA_SLOTS


def extra_admitted(entry: tuple, code: Program) -> bool:
    """Whether a menu entry may be added for this generated code."""
    kind, block = entry
    counts = code.block_counts()
    if kind == ConstraintKind.MUST_USE:
        return counts[block] > 0
    if kind == ConstraintKind.FORBID:
        return counts[block] == 0
    top = max(counts[command.value] for command in Command)
    return counts[block] >= 1 and counts[block] == top


def difficulty_constraints(ts: TemplateSet) -> Callable[[Instantiation], bool]:
    """Predicate admitting instantiations that match the template's difficulty."""
    ref_count = len(ts.constraint_template)
    ref_kind = ts.goal_template.ref_kind

    def admitted(inst: Instantiation) -> bool:
        if not length_admitted(ts.difficulty, ts.ref_length, code_length(inst.code)):
            return False
        if ts.difficulty != Difficulty.HARD:
            return len(inst.constraints) == ref_count and inst.goal.kind == ref_kind
        if len(inst.constraints) != ref_count + 1 or inst.extra_constraint is None:
            return False
        if ref_kind == GoalKind.DRAW and inst.goal.kind != GoalKind.DRAW:
            return False
        entry = (inst.extra_constraint.kind, inst.extra_constraint.block)
        if not extra_admitted(entry, inst.code):
            return False
        if inst.extra_constraint.kind == ConstraintKind.MAX_OCCURRENCES:
            return inst.extra_constraint.n == inst.code.block_counts()[inst.extra_constraint.block]
        return True

    return admitted


# --- CSP ----------------------------------------------------------------------

def _allowed_commands(constraints) -> set:
    allowed = {command.value for command in Command}
    for constraint in constraints:
        if constraint.kind == ConstraintKind.ALLOWED_BLOCKS:
            allowed &= set(constraint.blocks)
        elif constraint.kind == ConstraintKind.FORBID:
            allowed.discard(constraint.block)
    return allowed


_OPPOSITE_TURN = {Command.LEFT: Command.RIGHT, Command.RIGHT: Command.LEFT}
_REVERSAL = {Command.FORWARD, Command.BACK}


def has_redundant_commands(code: Program, allowed: Optional[set] = None) -> bool:
    """Whether the executed command stream undoes or repeats itself.

    Flags an immediate forward/back reversal, a left/right pair that cancels
    (pen changes in between do not matter), three equal turns in a row when
    the opposite turn is available to replace them, and a program that ends on
    a plain turn or pen change.
    """
    allowed = {command.value for command in Command} if allowed is None else allowed
    turn_run: list = []
    previous = None
    for token in code.unrolled():
        if isinstance(token, SetPenColor):
            previous = token
            continue
        command = token.command
        if command in _OPPOSITE_TURN:
            if turn_run and turn_run[-1] != command:
                return True
            turn_run.append(command)
            if len(turn_run) >= 3 and _OPPOSITE_TURN[command].value in allowed:
                return True
        else:
            turn_run = []
            if isinstance(previous, Basic) and {previous.command, command} == _REVERSAL:
                return True
        previous = token
    if not code.statements:
        return False
    last = code.statements[-1]
    return isinstance(last, SetPenColor) or (isinstance(last, Basic) and last.command in _OPPOSITE_TURN)


def _length_of(ts: TemplateSet, view: Mapping[str, Any]) -> int:
    return ts.ref_length + sum(1 for slot_id in ts.slot_ids if view[slot_id] != ABSENT)


def template_csp(ts: TemplateSet) -> CSP:
    """CSP over the template's placeholders.

    Solutions are the assignments whose instantiation passes
    ``difficulty_constraints`` and satisfies its own constraint set,
    and whose code has no redundant commands.
    """
    csp = CSP()
    code_ids = ts.code_ids
    others = [p.id for p in ts.placeholders if p.id not in code_ids]
    ordered = code_ids + sorted(others, key=lambda pid: (pid.startswith("L"), pid))
    for placeholder_id in ordered:
        csp.add_variable(placeholder_id, ts.placeholder(placeholder_id).domain)

    ref_constraints = [
        CodeConstraint(t.kind, n=t.ref_value, block=t.block, blocks=t.blocks) for t in ts.constraint_template
    ]
    allowed = _allowed_commands(ref_constraints)
    for placeholder_id in code_ids:
        if placeholder_id.startswith(("B", "S")):
            csp.add_constraint(
                f"allowed:{placeholder_id}",
                (placeholder_id,),
                lambda view, pid=placeholder_id: view[pid] == ABSENT or view[pid].value in allowed,
            )
    csp.add_constraint(
        "redundant",
        tuple(code_ids),
        lambda view: not has_redundant_commands(build_code(ts, view), allowed),
    )

    if ts.slot_ids:
        csp.add_constraint(
            "length",
            ts.slot_ids,
            lambda view: length_admitted(ts.difficulty, ts.ref_length, _length_of(ts, view)),
        )
    for i, first in enumerate(ts.slot_ids):
        for j in range(i + 1, len(ts.slot_ids)):
            if ts.slot_gaps[i] == ts.slot_gaps[j]:
                second = ts.slot_ids[j]
                csp.add_constraint(
                    f"symmetry:{first}<{second}",
                    (first, second),
                    lambda view, a=first, b=second: view[a] != ABSENT or view[b] == ABSENT,
                )

    for template in ts.constraint_template:
        if template.param_id is None:
            continue
        param = template.param_id
        if template.kind != ConstraintKind.MAX_OCCURRENCES:
            csp.add_constraint(
                f"tie:{param}",
                tuple(ts.slot_ids) + (param,),
                lambda view, p=param, ref=template.ref_value: view[p] == ref + _length_of(ts, view) - ts.ref_length,
            )
        elif ts.difficulty == Difficulty.EASY:
            csp.add_constraint(f"tie:{param}", (param,), lambda view, p=param, ref=template.ref_value: view[p] == ref)
        else:
            csp.add_constraint(
                f"tie:{param}",
                tuple(code_ids) + (param,),
                lambda view, p=param, ref=template.ref_value, block=template.block: view[p]
                == max(ref, build_code(ts, view).block_counts()[block]),
            )

    if ts.extra_id is not None:
        csp.add_constraint(
            "extra",
            tuple(code_ids) + (ts.extra_id,),
            lambda view: extra_admitted(view[ts.extra_id], build_code(ts, view)),
        )

    predicate = difficulty_constraints(ts)

    def consistent(view: Mapping[str, Any]) -> bool:
        inst = instantiate(ts, view)
        return check_constraints(inst.constraints, inst.code) and predicate(inst)

    csp.add_constraint("difficulty", tuple(ordered), consistent)
    return csp
