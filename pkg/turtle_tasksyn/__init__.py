"""Practice-task synthesis for a turtle-graphics grid language."""
from .emulator import execute, is_solution
from .lang import ParseError, parse, print_program
from .synth import SynthReport, SynthRequest, synthesize
from .task_model import Difficulty, Program, Task

__all__ = [
    "Difficulty",
    "ParseError",
    "Program",
    "SynthReport",
    "SynthRequest",
    "Task",
    "execute",
    "is_solution",
    "parse",
    "print_program",
    "synthesize",
]
