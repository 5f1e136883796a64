#------------------------------------------------------------------------------
# Module:       render.py
# Purpose:      Static SVG rendering of tasks through a jinja2 template
#------------------------------------------------------------------------------
import logging
import os
from typing import Optional

from jinja2 import Environment, FileSystemLoader

from .emulator import execute
from .task_model import Direction, PenColor, Program, Task

logger = logging.getLogger(__name__)

CELL_SIZE = 100
TEMPLATES_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "templates")
TEMPLATE_NAME = "task.svg.j2"

ITEM_FILLS = {
    "strawberry": "#e53935",
    "lemon": "#fdd835",
    "apple": "#7cb342",
    "banana": "#ffb300",
}
PEN_STROKES = {
    PenColor.BLACK: "#000000",
    PenColor.RED: "#e53935",
    PenColor.GREEN: "#43a047",
    PenColor.BLUE: "#1e88e5",
    PenColor.YELLOW: "#fdd835",
    PenColor.WHITE: "#ffffff",
}


def _center(cell) -> tuple[int, int]:
    row, col = cell
    return col * CELL_SIZE + CELL_SIZE // 2, row * CELL_SIZE + CELL_SIZE // 2


def _turtle_points(row: int, col: int, direction: Direction) -> str:
    cx, cy = _center((row, col))
    d_row, d_col = direction.delta
    # tip ahead of the center, base corners behind it
    tip = (cx + 35 * d_col, cy + 35 * d_row)
    left = (cx - 25 * d_col + 25 * d_row, cy - 25 * d_row - 25 * d_col)
    right = (cx - 25 * d_col - 25 * d_row, cy - 25 * d_row + 25 * d_col)
    return " ".join(f"{x},{y}" for x, y in (tip, left, right))


def render_context(task: Task, code: Optional[Program] = None) -> dict:
    world = task.world
    width, height = world.cols * CELL_SIZE, world.rows * CELL_SIZE

    grid_lines = [{"x1": 0, "y1": r * CELL_SIZE, "x2": width, "y2": r * CELL_SIZE} for r in range(world.rows + 1)]
    grid_lines += [{"x1": c * CELL_SIZE, "y1": 0, "x2": c * CELL_SIZE, "y2": height} for c in range(world.cols + 1)]

    def cell_box(cell) -> dict:
        return {"x": cell[1] * CELL_SIZE, "y": cell[0] * CELL_SIZE}

    items = []
    for cell, kind in world.items:
        cx, cy = _center(cell)
        items.append({
            "kind": kind.value,
            "cx": cx,
            "cy": cy,
            "r": CELL_SIZE // 4,
            "fill": ITEM_FILLS[kind.value],
            "label": kind.value[0].upper(),
        })

    pattern = []
    for segment in sorted(world.pattern, key=lambda s: (s.a, s.b)):
        (x1, y1), (x2, y2) = _center(segment.a), _center(segment.b)
        pattern.append({"x1": x1, "y1": y1, "x2": x2, "y2": y2, "stroke": PEN_STROKES[segment.color]})

    trajectory = ""
    if code is not None:
        visited = execute(code, world).trajectory.visited
        trajectory = " ".join("{},{}".format(*_center(cell)) for cell in visited)

    start = world.start
    return {
        "width": width,
        "height": height,
        "cell_size": CELL_SIZE,
        "grid_lines": grid_lines,
        "walls": [cell_box(cell) for cell in sorted(world.walls)],
        "forbidden": [cell_box(cell) for cell in sorted(world.forbidden)],
        "items": items,
        "pattern": pattern,
        "trajectory": trajectory,
        "turtle": _turtle_points(start.row, start.col, start.dir),
    }


def render_svg(task: Task, code: Optional[Program] = None) -> str:
    """
    Render a task as SVG text.

    Args:
        task: task to draw
        code: optional code whose trajectory is overlaid

    Returns:
        SVG document; identical inputs give identical text.
    """
    jinja_env = Environment(loader=FileSystemLoader(TEMPLATES_DIR), keep_trailing_newline=True)
    template = jinja_env.get_template(TEMPLATE_NAME)
    return template.render(**render_context(task, code))


def write_svg(task: Task, path: str, code: Optional[Program] = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(render_svg(task, code))
    logger.info(f"Rendered {path}")
