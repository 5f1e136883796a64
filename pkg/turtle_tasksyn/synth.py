#------------------------------------------------------------------------------
# Module:       synth.py
# Purpose:      End-to-end synthesis: templates -> instantiations -> worlds ->
#               scores -> top-k
#------------------------------------------------------------------------------
"""
Synthesis driver.

Seeds: every random choice derives from ``SynthRequest.seed`` through
``derive_seed(seed, stage, index)``:

* template slot positions   ``derive_seed(seed, STAGE_TEMPLATE, 0)``
* solve stream of restart r ``derive_seed(seed, STAGE_SOLVE, r)``
* world j of candidate i    ``derive_seed(seed, STAGE_WORLD, i * max_worlds + j)``
"""
import logging
import time
from collections import Counter
from dataclasses import dataclass, field
from itertools import islice
from typing import Callable, Iterator

from .emulator import is_solution
from .fdsolver import solve_stream
from .scoring import ScoredCandidate, ScoringConfig, score, top_k
from .seeds import STAGE_SOLVE, STAGE_TEMPLATE, STAGE_WORLD, derive_seed
from .symexec import PoseExhaustedError
from .task_model import Difficulty, Task
from .templating import Instantiation, TemplateSet, instantiate, template_csp, templatize
from .worldgen import MAX_ATTEMPTS, WorldGenerationError, block_shortcut, generate_world

logger = logging.getLogger(__name__)

COUNTER_NAMES = (
    "instantiations_tried",
    "worlds_built",
    "hard_gate_rejections",
    "dedup_hits",
    "world_failures",
    "pose_exhaustions",
    "shortcuts_blocked",
)
MAX_SHORTCUT_REPAIRS = 3


class InvalidReferenceError(ValueError):
    """The reference code does not solve the reference task."""


@dataclass(frozen=True)
class SynthRequest:
    reference: tuple
    difficulty: Difficulty
    k: int = 4
    seed: int = 0
    max_instantiations: int = 2000
    max_worlds_per_instantiation: int = 3
    time_budget_seconds: float = 60.0
    restart_every: int = 50
    pool_factor: int = 3
    world_attempts: int = MAX_ATTEMPTS
    scoring: ScoringConfig = field(default_factory=ScoringConfig)

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        budgets = (
            self.max_instantiations,
            self.max_worlds_per_instantiation,
            self.time_budget_seconds,
            self.restart_every,
            self.pool_factor,
            self.world_attempts,
        )
        if min(budgets) <= 0:
            raise ValueError("synthesis budgets must be positive")


@dataclass
class SynthReport:
    outputs: list
    counters: dict
    elapsed: float = 0.0

    def to_dict(self) -> dict:
        """Report contents written to ``report.json``; elapsed time is left out."""
        return {
            "counters": dict(sorted(self.counters.items())),
            "outputs": [
                {
                    "digest": candidate.digest,
                    "total": round(candidate.total, 6),
                    "components": {name: round(value, 6) for name, value in sorted(candidate.components.items())},
                    "flags": list(candidate.flags),
                }
                for candidate in self.outputs
            ],
        }


def instantiation_stream(ts: TemplateSet, seed: int, restart_every: int) -> Iterator[Instantiation]:
    """Instantiations from successive seeded solve streams.

    Each stream contributes at most ``restart_every`` assignments. A stream
    that ends early has enumerated the whole space, which ends the sequence.
    Duplicates across restarts are left to the caller.
    """
    csp = template_csp(ts)
    restart = 0
    while True:
        produced = 0
        for assignment in islice(solve_stream(csp, derive_seed(seed, STAGE_SOLVE, restart)), restart_every):
            produced += 1
            yield instantiate(ts, assignment)
        if produced < restart_every:
            return
        restart += 1


def synthesize(req: SynthRequest, clock: Callable[[], float] = time.monotonic) -> SynthReport:
    """
    Run all three stages for one reference and difficulty.

    Args:
        req: synthesis request
        clock: time source, replaceable in tests

    Returns:
        SynthReport with at most ``req.k`` outputs sorted by total descending.

    Raises:
        InvalidReferenceError: the reference pair is not a solution.
    """
    ref_task, ref_code = req.reference
    problems = ref_task.problems() + ref_code.problems()
    if problems or not is_solution(ref_task, ref_code):
        raise InvalidReferenceError("; ".join(problems) or "reference code does not solve the reference task")

    started = clock()
    counters = Counter({name: 0 for name in COUNTER_NAMES})
    ts = templatize(ref_code, ref_task.constraints, ref_task.goal, req.difficulty, derive_seed(req.seed, STAGE_TEMPLATE, 0))
    logger.info(
        f"Stage 1: {req.difficulty.value} template with {len(ts.placeholders)} placeholders "
        f"(reference length {ts.ref_length})"
    )

    world = ref_task.world
    seen_instantiations: set = set()
    digests: set = set()
    scored: list[ScoredCandidate] = []
    qualifying = 0
    target_pool = req.pool_factor * req.k
    candidate_index = 0

    for inst in instantiation_stream(ts, req.seed, req.restart_every):
        if counters["instantiations_tried"] >= req.max_instantiations:
            logger.warning(f"Instantiation budget of {req.max_instantiations} exhausted")
            break
        if clock() - started > req.time_budget_seconds:
            logger.warning(f"Time budget of {req.time_budget_seconds}s exhausted")
            break
        counters["instantiations_tried"] += 1
        inst_key = (inst.code, inst.constraints, inst.goal)
        if inst_key in seen_instantiations:
            counters["dedup_hits"] += 1
            continue
        seen_instantiations.add(inst_key)

        for attempt in range(req.max_worlds_per_instantiation):
            world_seed = derive_seed(req.seed, STAGE_WORLD, candidate_index * req.max_worlds_per_instantiation + attempt)
            try:
                new_world = generate_world(
                    inst.code,
                    inst.goal,
                    inst.constraints,
                    world.rows,
                    world.cols,
                    world_seed,
                    forbidden_hint=len(world.forbidden),
                    max_attempts=req.world_attempts,
                )
            except PoseExhaustedError:
                counters["pose_exhaustions"] += 1
                logger.debug(f"Candidate {candidate_index}: no start pose fits the code")
                break
            except WorldGenerationError as e:
                counters["world_failures"] += 1
                logger.debug(f"Candidate {candidate_index}: {e}")
                continue

            counters["worlds_built"] += 1
            candidate = score((Task(inst.goal, inst.constraints, new_world), inst.code), req.reference, req.scoring)
            for _ in range(MAX_SHORTCUT_REPAIRS):
                if candidate.components["validity"] == 0 or candidate.components["minimality"] == 1:
                    break
                repaired = block_shortcut(candidate.task, inst.code)
                if repaired is None:
                    break
                counters["shortcuts_blocked"] += 1
                candidate = score((repaired, inst.code), req.reference, req.scoring)
            if candidate.components["validity"] == 0 or candidate.components["minimality"] == 0:
                counters["hard_gate_rejections"] += 1
                logger.debug(f"Candidate {candidate_index}: rejected by a hard gate")
                continue
            if candidate.digest in digests:
                counters["dedup_hits"] += 1
                continue
            digests.add(candidate.digest)
            scored.append(candidate)
            if candidate.total >= req.scoring.threshold:
                qualifying += 1
        candidate_index += 1

        if qualifying >= target_pool:
            logger.info(f"Candidate pool of {target_pool} reached")
            break

    outputs = top_k(scored, req.k, req.scoring.threshold)
    elapsed = clock() - started
    logger.info(
        f"Stage 3: {len(outputs)}/{req.k} outputs from {len(scored)} scored candidates in {elapsed:.1f}s; "
        + ", ".join(f"{name}={counters[name]}" for name in COUNTER_NAMES)
    )
    return SynthReport(outputs=outputs, counters=dict(counters), elapsed=elapsed)

