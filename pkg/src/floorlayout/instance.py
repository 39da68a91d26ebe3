"""Floor layout instances: data types, width bounds, perturbation and text I/O.

Instance files are line oriented::

    # comment
    name toy3
    floor 10 10
    box 1 4.0 4.0
    box 2 4.0 4.0
    cost 1 2 1.0

``name`` is optional. Box ids must run 1..N and cost pairs need ``i < j``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Mapping

import numpy as np

AXES = ("x", "y")
FEAS_TOL = 1e-9
MIN_SCALE = 0.05


class InstanceError(ValueError):
    """Raised for invalid instance data."""


class InstanceParseError(InstanceError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class BoxSpec:
    id: int
    area: float
    aspect: float


@dataclass(frozen=True)
class FlpInstance:
    floor_x: float
    floor_y: float
    boxes: tuple[BoxSpec, ...]
    costs: Mapping[tuple[int, int], float] = field(default_factory=dict)
    name: str = "instance"

    def __post_init__(self):
        object.__setattr__(self, "boxes", tuple(self.boxes))
        object.__setattr__(self, "costs", MappingProxyType(dict(sorted(self.costs.items()))))
        self.validate()

    def validate(self) -> None:
        if not (self.floor_x > 0 and self.floor_y > 0):
            raise InstanceError("floor dimensions must be positive")
        for k, box in enumerate(self.boxes, start=1):
            if box.id != k:
                raise InstanceError(f"box ids must be consecutive 1..N, got {box.id} at position {k}")
            if not box.area > 0:
                raise InstanceError(f"box {box.id}: area must be positive")
            if not box.aspect >= 1:
                raise InstanceError(f"box {box.id}: aspect ratio must be >= 1")
        n = len(self.boxes)
        for (i, j), p in self.costs.items():
            if not 1 <= i < j <= n:
                raise InstanceError(f"cost pair ({i}, {j}) must satisfy 1 <= i < j <= {n}")
            if not p >= 0:
                raise InstanceError(f"cost ({i}, {j}) must be nonnegative")

    @property
    def n(self) -> int:
        return len(self.boxes)

    def floor(self, axis: str) -> float:
        return self.floor_x if axis == "x" else self.floor_y

    def cost(self, i: int, j: int) -> float:
        if i > j:
            i, j = j, i
        return self.costs.get((i, j), 0.0)

    def pairs(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(1, self.n + 1) for j in range(i + 1, self.n + 1)]

    def __eq__(self, other):
        if not isinstance(other, FlpInstance):
            return NotImplemented
        return (
            self.floor_x == other.floor_x
            and self.floor_y == other.floor_y
            and self.boxes == other.boxes
            and dict(self.costs) == dict(other.costs)
            and self.name == other.name
        )

    def __hash__(self):
        return hash((self.floor_x, self.floor_y, self.boxes, tuple(self.costs.items()), self.name))


@dataclass(frozen=True)
class BoxBounds:
    """Per-box, per-axis width bounds keyed by ``(box_id, axis)``."""

    lb: Mapping[tuple[int, str], float]
    ub: Mapping[tuple[int, str], float]

    def __post_init__(self):
        object.__setattr__(self, "lb", MappingProxyType(dict(self.lb)))
        object.__setattr__(self, "ub", MappingProxyType(dict(self.ub)))

    def lower(self, box: int, axis: str) -> float:
        return self.lb[box, axis]

    def upper(self, box: int, axis: str) -> float:
        return self.ub[box, axis]


@dataclass
class Layout:
    """Centers and widths per box, keyed by ``(box_id, axis)``."""

    center: dict[tuple[int, str], float]
    width: dict[tuple[int, str], float]
    dist: dict[tuple[int, int, str], float] = field(default_factory=dict)

    @property
    def boxes(self) -> list[int]:
        return sorted({b for b, _ in self.center})

    def edges(self, box: int, axis: str) -> tuple[float, float]:
        c, w = self.center[box, axis], self.width[box, axis]
        return c - w / 2, c + w / 2


def derive_bounds(instance: FlpInstance) -> BoxBounds:
    """Width bounds that, together with the area constraint, enforce the aspect ratio.

    ``ub = min(sqrt(area * aspect), L)`` and ``lb = area / ub``.
    """
    lb, ub = {}, {}
    for box in instance.boxes:
        for axis in AXES:
            upper = min(math.sqrt(box.area * box.aspect), instance.floor(axis))
            lower = box.area / upper
            if lower > upper * (1 + FEAS_TOL):
                raise InstanceError(
                    f"box {box.id} cannot fit along axis {axis}: area {box.area} "
                    f"needs width {lower} > {upper}"
                )
            ub[box.id, axis] = upper
            lb[box.id, axis] = min(lower, upper)
    return BoxBounds(lb, ub)


def _draw_scale(rng: np.random.Generator, gamma: float) -> float:
    while True:
        scale = 1.0 + gamma * rng.standard_normal()
        if scale >= MIN_SCALE:
            return scale


def perturb_instance(instance: FlpInstance, gamma: float, aspect: float, seed: int = 42) -> FlpInstance:
    """Random multiplicative noise ``x <- (1 + gamma t) x`` on areas and nonzero costs.

    Every aspect ratio is replaced by ``aspect``. Draws whose scale falls below
    0.05 are redrawn so data stays strictly positive. Areas are drawn first in box
    order, then costs in sorted pair order.
    """
    if gamma < 0:
        raise InstanceError("gamma must be nonnegative")
    rng = np.random.default_rng(seed)
    boxes = tuple(
        BoxSpec(b.id, b.area * _draw_scale(rng, gamma) if gamma else b.area, float(aspect))
        for b in instance.boxes
    )
    costs = {}
    for key, p in instance.costs.items():
        costs[key] = p * _draw_scale(rng, gamma) if (gamma and p != 0) else p
    return FlpInstance(
        instance.floor_x,
        instance.floor_y,
        boxes,
        costs,
        name=f"{instance.name}-{_fmt_gamma(gamma)}({_fmt_short(aspect)})",
    )


def _fmt_gamma(gamma: float) -> str:
    text = repr(float(gamma))
    return text


def _fmt_short(value: float) -> str:
    value = float(value)
    return str(int(value)) if value.is_integer() else repr(value)


def _num(token: str, lineno: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise InstanceParseError(lineno, f"not a number: {token!r}") from None
    if not math.isfinite(value):
        raise InstanceParseError(lineno, f"non-finite number: {token!r}")
    return value


def _int(token: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise InstanceParseError(lineno, f"not an integer: {token!r}") from None


def parse_instance(text: str, name: str | None = None) -> FlpInstance:
    floor = None
    boxes: dict[int, BoxSpec] = {}
    raw_costs: list[tuple[int, int, float, int]] = []
    file_name = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        if head == "name":
            if len(rest) != 1:
                raise InstanceParseError(lineno, "expected: name <text>")
            file_name = rest[0]
        elif head == "floor":
            if len(rest) != 2:
                raise InstanceParseError(lineno, "expected: floor <Lx> <Ly>")
            if floor is not None:
                raise InstanceParseError(lineno, "duplicate floor record")
            floor = (_num(rest[0], lineno), _num(rest[1], lineno))
        elif head == "box":
            if len(rest) != 3:
                raise InstanceParseError(lineno, "expected: box <id> <area> <aspect>")
            bid = _int(rest[0], lineno)
            if bid in boxes:
                raise InstanceParseError(lineno, f"duplicate box id {bid}")
            boxes[bid] = BoxSpec(bid, _num(rest[1], lineno), _num(rest[2], lineno))
        elif head == "cost":
            if len(rest) != 3:
                raise InstanceParseError(lineno, "expected: cost <i> <j> <p>")
            i, j = _int(rest[0], lineno), _int(rest[1], lineno)
            if not i < j:
                raise InstanceParseError(lineno, f"cost pair must satisfy i<j, got ({i}, {j})")
            raw_costs.append((i, j, _num(rest[2], lineno), lineno))
        else:
            raise InstanceParseError(lineno, f"unknown record {head!r}")
    if floor is None:
        raise InstanceParseError(0, "missing floor record")
    n = len(boxes)
    if sorted(boxes) != list(range(1, n + 1)):
        raise InstanceError(f"box ids must be consecutive 1..N, got {sorted(boxes)}")
    costs = {}
    for i, j, p, lineno in raw_costs:
        if j > n:
            raise InstanceParseError(lineno, f"cost references unknown box {j}")
        if (i, j) in costs:
            raise InstanceParseError(lineno, f"duplicate cost pair ({i}, {j})")
        costs[i, j] = p
    try:
        return FlpInstance(
            floor[0], floor[1], tuple(boxes[k] for k in range(1, n + 1)), costs,
            name=file_name or name or "instance",
        )
    except InstanceError as exc:
        raise InstanceError(str(exc)) from None


def write_instance(instance: FlpInstance) -> str:
    lines = [
        f"name {instance.name}",
        f"floor {instance.floor_x!r} {instance.floor_y!r}",
    ]
    lines += [f"box {b.id} {float(b.area)!r} {float(b.aspect)!r}" for b in instance.boxes]
    lines += [f"cost {i} {j} {float(p)!r}" for (i, j), p in instance.costs.items()]
    return "\n".join(lines) + "\n"


def load_instance(path) -> FlpInstance:
    from pathlib import Path

    path = Path(path)
    return parse_instance(path.read_text(encoding="utf-8"), name=path.stem)


def with_name(instance: FlpInstance, name: str) -> FlpInstance:
    return replace(instance, name=name)


def random_instance(
    n: int,
    seed: int,
    floor: tuple[float, float] = (10.0, 10.0),
    area_range: tuple[float, float] = (1.0, 9.0),
    aspect_range: tuple[float, float] = (1.0, 6.0),
    cost_range: tuple[float, float] = (0.5, 5.0),
    name: str | None = None,
) -> FlpInstance:
    """Seeded random instance with positive costs on every pair."""
    rng = np.random.default_rng(seed)
    boxes = tuple(
        BoxSpec(k, float(rng.uniform(*area_range)), float(rng.uniform(*aspect_range)))
        for k in range(1, n + 1)
    )
    costs = {
        (i, j): float(rng.uniform(*cost_range))
        for i in range(1, n + 1)
        for j in range(i + 1, n + 1)
    }
    return FlpInstance(floor[0], floor[1], boxes, costs, name=name or f"rand{n}-{seed}")


SHIPPED = ("toy2", "toy3", "toy4")


def shipped_instance(name: str) -> FlpInstance:
    """One of the small hand-made instances bundled with the package."""
    from importlib import resources

    if name not in SHIPPED:
        raise InstanceError(f"no shipped instance {name!r}; choose from {', '.join(SHIPPED)}")
    text = resources.files("floorlayout").joinpath("data", f"{name}.txt").read_text(encoding="utf-8")
    return parse_instance(text, name=name)


# ---------------------------------------------------------------------------
# layout files: ``center <id> <cx> <cy>`` and ``width <id> <lx> <ly>``


def parse_layout(text: str) -> Layout:
    center, width = {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        if head not in ("center", "width") or len(rest) != 3:
            raise InstanceParseError(lineno, "expected: center|width <id> <x> <y>")
        bid = _int(rest[0], lineno)
        target = center if head == "center" else width
        if (bid, "x") in target:
            raise InstanceParseError(lineno, f"duplicate {head} record for box {bid}")
        target[bid, "x"], target[bid, "y"] = _num(rest[1], lineno), _num(rest[2], lineno)
    if set(center) != set(width):
        raise InstanceParseError(0, "every box needs both a center and a width record")
    for (bid, axis), w in width.items():
        if not w > 0:
            raise InstanceError(f"box {bid}: width along {axis} must be positive")
    return Layout(center, width)


def write_layout(layout: Layout) -> str:
    lines = []
    for b in layout.boxes:
        lines.append(f"center {b} {layout.center[b, 'x']!r} {layout.center[b, 'y']!r}")
        lines.append(f"width {b} {layout.width[b, 'x']!r} {layout.width[b, 'y']!r}")
    return "\n".join(lines) + "\n"
