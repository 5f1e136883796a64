#------------------------------------------------------------------------------
# Module:       fdsolver.py
# Purpose:      Finite-domain constraint solver with seeded value ordering
#------------------------------------------------------------------------------
"""
Backtracking search with forward checking over small finite domains.

Usage::

    csp = CSP()
    csp.add_variable("x", [1, 2, 3])
    csp.add_variable("y", [1, 2, 3])
    csp.add_constraint("x<y", ("x", "y"), lambda a: a["x"] < a["y"])
    for solution in solve_stream(csp, seed=7):
        ...

Variables are assigned in declaration order; the value order of each
variable is shuffled once per stream from the seed, so one (csp, seed) pair
always produces the same sequence.

A constraint predicate receives a mapping restricted to its scope. Ordinary
constraints are only evaluated once every scope variable is assigned.
Constraints declared ``partial=True`` are also evaluated on incomplete
assignments and must return True whenever the missing values could still
satisfy them.
"""
import logging
from collections import defaultdict
from dataclasses import dataclass
from itertools import islice
from typing import Any, Callable, Hashable, Iterable, Iterator, Mapping, Sequence

from .seeds import seeded_random

logger = logging.getLogger(__name__)

Predicate = Callable[[Mapping[str, Any]], bool]


@dataclass(frozen=True)
class Variable:
    name: str
    domain: tuple


@dataclass(frozen=True)
class Constraint:
    name: str
    scope: tuple[str, ...]
    predicate: Predicate
    partial: bool = False


class CSP:
    def __init__(self):
        self.variables: dict[str, Variable] = {}
        self.constraints: list[Constraint] = []

    def add_variable(self, name: str, domain: Iterable[Hashable]) -> Variable:
        if name in self.variables:
            raise ValueError(f"variable {name!r} was already added")
        variable = Variable(name, tuple(domain))
        self.variables[name] = variable
        return variable

    def add_constraint(self, name: str, scope: Sequence[str], predicate: Predicate, partial: bool = False) -> Constraint:
        constraint = Constraint(name, tuple(scope), predicate, partial)
        self.constraints.append(constraint)
        return constraint

    def validate(self) -> list[str]:
        problems = [f"variable {v.name!r} has an empty domain" for v in self.variables.values() if not v.domain]
        for constraint in self.constraints:
            unknown = [name for name in constraint.scope if name not in self.variables]
            if unknown:
                problems.append(f"constraint {constraint.name!r} names unknown variables {unknown}")
        return problems

    def is_satisfied(self, assignment: Mapping[str, Any]) -> bool:
        """Re-evaluate every constraint against a complete assignment."""
        return all(c.predicate({name: assignment[name] for name in c.scope}) for c in self.constraints)


class _Search:
    def __init__(self, csp: CSP, seed: int):
        rng = seeded_random(seed)
        self.order = list(csp.variables)
        self.domains: dict[str, list] = {}
        for name in self.order:
            values = list(csp.variables[name].domain)
            rng.shuffle(values)
            self.domains[name] = values

        self.watchers: dict[str, list[Constraint]] = defaultdict(list)
        for constraint in csp.constraints:
            if len(set(constraint.scope)) == 1:
                name = constraint.scope[0]
                self.domains[name] = [v for v in self.domains[name] if constraint.predicate({name: v})]
            else:
                for name in set(constraint.scope):
                    self.watchers[name].append(constraint)
        self.assignment: dict[str, Any] = {}

    def _view(self, constraint: Constraint) -> dict:
        return {name: self.assignment[name] for name in constraint.scope if name in self.assignment}

    def _consistent(self, variable: str) -> bool:
        for constraint in self.watchers[variable]:
            view = self._view(constraint)
            if len(view) == len(set(constraint.scope)) or constraint.partial:
                if not constraint.predicate(view):
                    return False
        return True

    def _forward_check(self, variable: str, saved: dict) -> bool:
        for constraint in self.watchers[variable]:
            open_vars = {name for name in constraint.scope if name not in self.assignment}
            if len(open_vars) != 1:
                continue
            target = open_vars.pop()
            view = self._view(constraint)
            kept = [value for value in self.domains[target] if constraint.predicate({**view, target: value})]
            saved.setdefault(target, self.domains[target])
            self.domains[target] = kept
            if not kept:
                return False
        return True

    def run(self, index: int = 0) -> Iterator[dict]:
        if index == len(self.order):
            yield dict(self.assignment)
            return
        variable = self.order[index]
        for value in list(self.domains[variable]):
            self.assignment[variable] = value
            if self._consistent(variable):
                saved: dict = {}
                if self._forward_check(variable, saved):
                    yield from self.run(index + 1)
                self.domains.update(saved)
            del self.assignment[variable]


def solve_stream(csp: CSP, seed: int) -> Iterator[dict]:
    """Lazily yield every satisfying assignment exactly once.

    Raises:
        ValueError: the CSP is malformed (empty domain or unknown scope name).
    """
    problems = csp.validate()
    if problems:
        raise ValueError("; ".join(problems))
    return _Search(csp, seed).run()


def count_solutions(csp: CSP, cap: int) -> int:
    if cap < 1:
        raise ValueError("cap must be at least 1")
    return sum(1 for _ in islice(solve_stream(csp, 0), cap))
