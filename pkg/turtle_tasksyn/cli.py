#------------------------------------------------------------------------------
# Script:       cli.py
# Purpose:      Command-line surface: synth, check, baseline, render, batch
#
# Exit codes:   0 success, 1 input error, 2 empty synthesis, 3 check failure
#------------------------------------------------------------------------------
import argparse
import glob
import json
import logging
import os
import sys
from typing import Optional

from .baselines import rotate_flip
from .config import BASE_DIR, ConfigError, load_config, resolve_env
from .emulator import check_goal, execute, failed_constraints
from .lang import ParseError, dump_program, load_program
from .render import write_svg
from .scoring import ScoringConfig
from .synth import InvalidReferenceError, SynthReport, SynthRequest, synthesize
from .task_io import TaskFormatError, dump_task, load_task
from .task_model import Difficulty, Program, Task

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_EMPTY = 2
EXIT_CHECK_FAILED = 3

REFERENCES_DIR = os.path.join(BASE_DIR, "references")
TASK_SUFFIX = ".task.json"
CODE_SUFFIX = ".xlc"
DIFFICULTY_NAMES = [d.value for d in Difficulty]


class InputError(Exception):
    """Bad flags or unreadable input files; reported as a one-line diagnostic."""


def parse_difficulty(value: str) -> Difficulty:
    try:
        return Difficulty(value.lower())
    except ValueError:
        raise InputError(f"unknown difficulty {value!r}, expected one of: {', '.join(DIFFICULTY_NAMES)}")


def load_pair(task_path: str, code_path: Optional[str]) -> tuple[Task, Optional[Program]]:
    """Load a task file and an optional code file, converting failures to InputError."""
    try:
        task = load_task(task_path)
    except FileNotFoundError:
        raise InputError(f"{task_path}: file not found")
    except TaskFormatError as e:
        raise InputError(str(e))
    if code_path is None:
        return task, None
    try:
        code = load_program(code_path)
    except FileNotFoundError:
        raise InputError(f"{code_path}: file not found")
    except ParseError as e:
        raise InputError(f"{code_path}:{e.line}:{e.column}: {e.message}")
    return task, code


def write_pair(task: Task, code: Program, out_dir: str, index: int, render: bool = False) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    stem = os.path.join(out_dir, f"task_{index:03d}")
    dump_task(task, stem + TASK_SUFFIX)
    dump_program(code, stem + CODE_SUFFIX)
    written = [stem + TASK_SUFFIX, stem + CODE_SUFFIX]
    if render:
        write_svg(task, stem + ".svg", code)
        written.append(stem + ".svg")
    return written


def write_json(data: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(json.dumps(data, indent=2, sort_keys=True) + "\n")


def write_report(report: SynthReport, out_dir: str, render: bool) -> None:
    for index, candidate in enumerate(report.outputs, start=1):
        write_pair(candidate.task, candidate.code, out_dir, index, render)
    os.makedirs(out_dir, exist_ok=True)
    write_json(report.to_dict(), os.path.join(out_dir, "report.json"))
    logger.info(f"Wrote {len(report.outputs)} task(s) and report.json to {out_dir}")


def build_request(reference: tuple, difficulty: Difficulty, k: int, seed: int, config: dict) -> SynthRequest:
    budgets = config.get("synthesis", {}) or {}
    return SynthRequest(
        reference=reference,
        difficulty=difficulty,
        k=k,
        seed=seed,
        max_instantiations=int(budgets.get("max_instantiations", 2000)),
        max_worlds_per_instantiation=int(budgets.get("max_worlds_per_instantiation", 3)),
        time_budget_seconds=float(budgets.get("time_budget_seconds", 60)),
        restart_every=int(budgets.get("restart_every", 50)),
        pool_factor=int(budgets.get("pool_factor", 3)),
        world_attempts=int(budgets.get("world_attempts", 50)),
        scoring=ScoringConfig.from_mapping(config.get("scoring")),
    )


def _output_dir(args, config: dict) -> str:
    return args.out or (config.get("cli", {}) or {}).get("output_dir", "out")


def cmd_synth(args, config: dict) -> int:
    difficulty = parse_difficulty(args.difficulty)
    task, code = load_pair(args.task, args.code)
    k = args.k if args.k is not None else int((config.get("cli", {}) or {}).get("default_k", 4))
    if k < 1:
        raise InputError(f"--k must be at least 1, got {k}")
    try:
        report = synthesize(build_request((task, code), difficulty, k, args.seed, config))
    except InvalidReferenceError as e:
        raise InputError(f"{args.task}: invalid reference: {e}")
    write_report(report, _output_dir(args, config), args.render)
    return EXIT_OK if report.outputs else EXIT_EMPTY


def cmd_check(args, config: dict) -> int:
    task, code = load_pair(args.task, args.code)
    result = execute(code, task.world, task.goal)
    goal_ok = check_goal(task.goal, task.world, result)
    failed = failed_constraints(task.constraints, code)

    print(f"goal: {'pass' if goal_ok else 'fail'} ({task.goal.describe()})")
    if result.trajectory.crashed:
        print(f"crash: {result.trajectory.crash_reason.value}")
    print(f"constraints: {'pass' if not failed else 'fail'}")
    for constraint in failed:
        print(f"  violated: {constraint.describe()}")
    return EXIT_OK if goal_ok and not failed else EXIT_CHECK_FAILED


def cmd_baseline(args, config: dict) -> int:
    difficulty = parse_difficulty(args.difficulty)
    task, code = load_pair(args.task, args.code)
    new_task, new_code = rotate_flip((task, code), difficulty)
    written = write_pair(new_task, new_code, _output_dir(args, config), 1, args.render)
    logger.info(f"Wrote {', '.join(written)}")
    return EXIT_OK


def cmd_render(args, config: dict) -> int:
    task, code = load_pair(args.task, args.code)
    out_dir = os.path.dirname(args.out)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    write_svg(task, args.out, code)
    return EXIT_OK


def list_references(references_dir: str) -> list[tuple[str, str, str]]:
    """(name, task path, code path) for every ``<name>.task.json`` with a matching ``<name>.xlc``."""
    if not os.path.isdir(references_dir):
        raise InputError(f"{references_dir}: not a directory")
    pairs = []
    for task_path in sorted(glob.glob(os.path.join(references_dir, "*" + TASK_SUFFIX))):
        name = os.path.basename(task_path)[: -len(TASK_SUFFIX)]
        code_path = os.path.join(references_dir, name + CODE_SUFFIX)
        if not os.path.exists(code_path):
            raise InputError(f"{task_path}: no matching {name}{CODE_SUFFIX}")
        pairs.append((name, task_path, code_path))
    if not pairs:
        raise InputError(f"{references_dir}: no *{TASK_SUFFIX} files")
    return pairs


def cmd_batch(args, config: dict) -> int:
    profile = config.get("deployment_profile", {}) or {}
    out_root = _output_dir(args, config)
    references = list_references(args.references)
    loaded = [(name, load_pair(task_path, code_path)) for name, task_path, code_path in references]

    summary: dict = {}
    all_met = True
    for name, reference in loaded:
        summary[name] = {}
        for difficulty in Difficulty:
            quota = int(profile.get(difficulty.value, 0))
            if quota < 1:
                continue
            try:
                report = synthesize(build_request(reference, difficulty, quota, args.seed, config))
            except InvalidReferenceError as e:
                raise InputError(f"{name}: invalid reference: {e}")
            write_report(report, os.path.join(out_root, name, difficulty.value), args.render)
            produced = len(report.outputs)
            summary[name][difficulty.value] = {"requested": quota, "produced": produced}
            if produced < quota:
                all_met = False
                logger.warning(f"{name}/{difficulty.value}: {produced} of {quota} tasks")

    os.makedirs(out_root, exist_ok=True)
    write_json(summary, os.path.join(out_root, "summary.json"))
    return EXIT_OK if all_met else EXIT_EMPTY


class _ArgumentParser(argparse.ArgumentParser):
    """Usage errors are input errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _ArgumentParser(add_help=False)
    common.add_argument('--env', default=None, help='Config profile (default: $TASKSYN_ENV or dev)')
    common.add_argument('--config', default=None, help='TOML file merged over the profile')
    common.add_argument('--verbose', action='store_true', help='Debug logging')

    parser = _ArgumentParser(description='Synthesize turtle practice tasks from reference tasks')
    subparsers = parser.add_subparsers(dest='command', required=True)

    synth_parser = subparsers.add_parser('synth', parents=[common], help='Generate practice tasks')
    synth_parser.add_argument('--task', required=True, help='Reference task JSON file')
    synth_parser.add_argument('--code', required=True, help='Reference solution code (.xlc)')
    synth_parser.add_argument('--difficulty', required=True, help=f"One of: {', '.join(DIFFICULTY_NAMES)}")
    synth_parser.add_argument('--k', type=int, default=None, help='Number of tasks (default from config)')
    synth_parser.add_argument('--seed', type=int, default=0, help='Random seed (default: 0)')
    synth_parser.add_argument('--out', default=None, help='Output directory (default from config)')
    synth_parser.add_argument('--render', action='store_true', help='Also write an SVG per task')

    check_parser = subparsers.add_parser('check', parents=[common], help='Check a task/code pair')
    check_parser.add_argument('--task', required=True, help='Task JSON file')
    check_parser.add_argument('--code', required=True, help='Code file (.xlc)')

    baseline_parser = subparsers.add_parser('baseline', parents=[common], help='RotateFlip baseline task')
    baseline_parser.add_argument('--task', required=True, help='Reference task JSON file')
    baseline_parser.add_argument('--code', required=True, help='Reference solution code (.xlc)')
    baseline_parser.add_argument('--difficulty', required=True, help=f"One of: {', '.join(DIFFICULTY_NAMES)}")
    baseline_parser.add_argument('--out', default=None, help='Output directory (default from config)')
    baseline_parser.add_argument('--render', action='store_true', help='Also write an SVG')

    render_parser = subparsers.add_parser('render', parents=[common], help='Render a task as SVG')
    render_parser.add_argument('--task', required=True, help='Task JSON file')
    render_parser.add_argument('--code', default=None, help='Optional code whose trajectory is overlaid')
    render_parser.add_argument('--out', required=True, help='SVG file to write')

    batch_parser = subparsers.add_parser('batch', parents=[common], help='Deployment profile over a reference suite')
    batch_parser.add_argument('--references', default=REFERENCES_DIR, help='Directory of reference pairs')
    batch_parser.add_argument('--seed', type=int, default=0, help='Random seed (default: 0)')
    batch_parser.add_argument('--out', default=None, help='Output root directory (default from config)')
    batch_parser.add_argument('--render', action='store_true', help='Also write an SVG per task')
    return parser


COMMANDS = {
    'synth': cmd_synth,
    'check': cmd_check,
    'baseline': cmd_baseline,
    'render': cmd_render,
    'batch': cmd_batch,
}


def run(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(resolve_env(args.env), args.config)
    except ConfigError as e:
        logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')
        logger.error(str(e))
        return EXIT_INPUT_ERROR

    level = logging.DEBUG if args.verbose else getattr(logging, str(config.get("log_level", "INFO")).upper(), logging.INFO)
    logging.basicConfig(level=level, format='%(asctime)s - %(levelname)s - %(message)s')

    try:
        return COMMANDS[args.command](args, config)
    except (InputError, ValueError) as e:
        logger.error(str(e))
        return EXIT_INPUT_ERROR


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
