"""Iterate a cell-function until no element changes.

A run updates its private copy of the image in place, element by element, in
the order given by a schedule. It stops after a full pass with no updates
(or, for the worklist schedule, when the worklist drains). The fixpoint of a
monotone rule does not depend on the schedule; ``check_confluence`` tests
that claim for a given input.
"""

from __future__ import annotations

import enum
import json
from collections import deque
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import _kernels as K
from .grid import (
    BorderPolicy,
    DomainError,
    GrayImage,
    Neighborhood,
    neighborhood_at,
)

# (neighborhood, corresponding original element or None, marked) -> (level, marked)
UpdateFn = Callable[[Neighborhood, Optional[int], bool], "tuple[int, bool]"]


class NonConvergenceError(RuntimeError):
    def __init__(self, message, image: GrayImage, report: FixpointReport):
        super().__init__(message)
        self.image = image
        self.report = report


class ExtensivityError(RuntimeError):
    """A cell-function declared extensive lowered an element."""


class ScheduleKind(enum.Enum):
    FORWARD_RASTER = "forward"
    BACKWARD_RASTER = "backward"
    ALTERNATING = "alternating"
    FIFO_WORKLIST = "worklist"
    RANDOM = "random"


@dataclass(frozen=True)
class Schedule:
    kind: ScheduleKind
    seed: Optional[int] = None

    def __post_init__(self):
        if self.kind is ScheduleKind.RANDOM and self.seed is None:
            raise ValueError("RANDOM schedule needs a seed")

    @classmethod
    def random(cls, seed: int) -> Schedule:
        return cls(ScheduleKind.RANDOM, int(seed))

    @classmethod
    def parse(cls, name: str, seed: Optional[int] = None) -> Schedule:
        kind = ScheduleKind(name.lower().replace("_raster", "").replace("fifo_", ""))
        if kind is ScheduleKind.RANDOM:
            if seed is None:
                raise ValueError("the random schedule requires a seed")
            return cls(kind, seed)
        return cls(kind)

    def __str__(self):
        if self.kind is ScheduleKind.RANDOM:
            return f"random({self.seed})"
        return self.kind.value


FORWARD_RASTER = Schedule(ScheduleKind.FORWARD_RASTER)
BACKWARD_RASTER = Schedule(ScheduleKind.BACKWARD_RASTER)
ALTERNATING = Schedule(ScheduleKind.ALTERNATING)
FIFO_WORKLIST = Schedule(ScheduleKind.FIFO_WORKLIST)


def all_schedules(seeds: Sequence[int] = (1, 2, 3, 4, 5)) -> list[Schedule]:
    return [FORWARD_RASTER, BACKWARD_RASTER, ALTERNATING, FIFO_WORKLIST] + [
        Schedule.random(s) for s in seeds
    ]


@dataclass
class FixpointReport:
    sweeps: int
    element_updates: int
    converged: bool
    schedule: str = ""

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


@dataclass(frozen=True)
class CellFunction:
    """A local update rule.

    ``update`` is the plain-Python form of the rule. Built-in rules also carry
    ``kernel`` (a rule code and its neighbor-set table) so the engine can run
    them compiled; both forms must agree.
    """

    name: str
    update: Optional[UpdateFn] = None
    kernel: Optional[tuple[int, np.ndarray]] = field(default=None, compare=False)
    monotone_extensive: bool = False
    needs_reference: bool = False

    def __post_init__(self):
        if self.update is None and self.kernel is None:
            raise ValueError("a cell-function needs an update rule")


_BORDER_CODE = {
    BorderPolicy.NEUTRAL_LOW: K.BORDER_LOW,
    BorderPolicy.NEUTRAL_HIGH: K.BORDER_HIGH,
    BorderPolicy.CLAMP: K.BORDER_CLAMP,
}


def default_max_sweeps(img: GrayImage) -> int:
    return 4 * (img.width + img.height) * 257


def _orders(sched: Schedule, n: int):
    fwd = np.arange(n, dtype=np.int64)
    bwd = fwd[::-1].copy()
    if sched.kind is ScheduleKind.FORWARD_RASTER:
        while True:
            yield fwd
    elif sched.kind is ScheduleKind.BACKWARD_RASTER:
        while True:
            yield bwd
    elif sched.kind is ScheduleKind.ALTERNATING:
        while True:
            yield fwd
            yield bwd
    elif sched.kind is ScheduleKind.RANDOM:
        rng = np.random.default_rng(sched.seed)
        while True:
            yield rng.permutation(n)
    else:
        raise ValueError(f"{sched.kind} has no sweep order")


def _python_apply(lv, mk, ref, x, y, f: CellFunction, border: BorderPolicy):
    img = _View(lv, mk)
    nb = neighborhood_at(img, x, y, border)
    em = None if ref is None else int(ref[y, x])
    return f.update(nb, em, bool(mk[y, x]))


class _View:
    """Duck-typed image over mutable arrays, for ``neighborhood_at``."""

    __slots__ = ("levels", "marks")

    def __init__(self, lv, mk):
        self.levels = lv
        self.marks = mk

    @property
    def width(self):
        return self.levels.shape[1]

    @property
    def height(self):
        return self.levels.shape[0]


def _python_sweep(lv, mk, ref, order, f, border, verify):
    w = lv.shape[1]
    updates = 0
    for p in order:
        y, x = divmod(int(p), w)
        nv, nm = _python_apply(lv, mk, ref, x, y, f, border)
        if nv != lv[y, x] or nm != mk[y, x]:
            if verify and nv < lv[y, x]:
                raise ExtensivityError(f"{f.name} lowered ({x}, {y}) from {lv[y, x]} to {nv}")
            lv[y, x] = nv
            mk[y, x] = nm
            updates += 1
    return updates


def _python_worklist(lv, mk, ref, f, border, verify, max_rounds):
    h, w = lv.shape
    queue = deque(range(h * w))
    queued = np.ones(h * w, dtype=bool)
    rounds, left, updates = 1, h * w, 0
    while queue:
        if left == 0:
            if rounds >= max_rounds:
                return rounds, updates, False
            rounds += 1
            left = len(queue)
        p = queue.popleft()
        left -= 1
        queued[p] = False
        y, x = divmod(p, w)
        nv, nm = _python_apply(lv, mk, ref, x, y, f, border)
        if nv == lv[y, x] and nm == mk[y, x]:
            continue
        if verify and nv < lv[y, x]:
            raise ExtensivityError(f"{f.name} lowered ({x}, {y}) from {lv[y, x]} to {nv}")
        lv[y, x] = nv
        mk[y, x] = nm
        updates += 1
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                ny, nx = y + dy, x + dx
                if 0 <= ny < h and 0 <= nx < w and not queued[ny * w + nx]:
                    queued[ny * w + nx] = True
                    queue.append(ny * w + nx)
    return rounds, updates, True


def run_to_fixpoint(
    img: GrayImage,
    f: CellFunction,
    m: Optional[GrayImage] = None,
    sched: Schedule = FORWARD_RASTER,
    border: BorderPolicy = BorderPolicy.NEUTRAL_LOW,
    max_sweeps: Optional[int] = None,
    verify: bool = False,
    compiled: bool = True,
) -> tuple[GrayImage, FixpointReport]:
    """Run ``f`` to its fixpoint starting from ``img``.

    ``m`` is the reference image read as the corresponding original element.
    With ``verify`` set, a rule declared extensive is checked on every update.
    ``compiled=False`` forces the plain-Python rule even when a kernel exists.

    Raises NonConvergenceError (carrying the partial image) once
    ``max_sweeps`` passes have run without reaching a fixpoint.
    """
    if m is not None and m.shape != img.shape:
        raise DomainError("reference image dimensions differ from the working image")
    if f.needs_reference and m is None:
        raise DomainError(f"{f.name} needs a reference image")
    if max_sweeps is None:
        max_sweeps = default_max_sweeps(img)
    if max_sweeps < 1:
        raise ValueError("max_sweeps must be >= 1")
    verify = verify and f.monotone_extensive
    use_kernel = compiled and f.kernel is not None
    if not use_kernel and f.update is None:
        raise ValueError(f"{f.name} has no Python form")

    lv = np.array(img.levels, dtype=np.int32)
    mk = np.array(img.marks, dtype=np.bool_)
    ref = None if m is None else np.array(m.levels, dtype=np.int32)
    kref = ref if ref is not None else lv
    bcode = _BORDER_CODE[border]

    if sched.kind is ScheduleKind.FIFO_WORKLIST:
        if use_kernel:
            rule, sets = f.kernel
            sweeps, updates, converged, status = K.worklist(
                lv, mk, kref, rule, sets, bcode, verify, max_sweeps)
            if status == K.NOT_EXTENSIVE:
                raise ExtensivityError(f"{f.name} lowered an element")
        else:
            sweeps, updates, converged = _python_worklist(
                lv, mk, ref, f, border, verify, max_sweeps)
    else:
        sweeps = updates = 0
        converged = False
        dirty = np.ones(lv.size, dtype=np.bool_)
        for order in _orders(sched, lv.size):
            if sweeps >= max_sweeps:
                break
            sweeps += 1
            if use_kernel:
                rule, sets = f.kernel
                n, status = K.sweep(lv, mk, kref, order, rule, sets, bcode, verify, dirty)
                if status == K.NOT_EXTENSIVE:
                    raise ExtensivityError(f"{f.name} lowered an element")
            else:
                n = _python_sweep(lv, mk, ref, order, f, border, verify)
            updates += n
            if n == 0:
                converged = True
                break

    report = FixpointReport(int(sweeps), int(updates), bool(converged), str(sched))
    out = GrayImage(lv, mk)
    if not converged:
        raise NonConvergenceError(
            f"{f.name} did not converge within {max_sweeps} sweeps", out, report)
    return out, report


def is_fixpoint(img: GrayImage, f: CellFunction, m: Optional[GrayImage] = None,
                border: BorderPolicy = BorderPolicy.NEUTRAL_LOW) -> bool:
    """True when one more full pass changes nothing."""
    try:
        run_to_fixpoint(img, f, m, FORWARD_RASTER, border, max_sweeps=1)
    except NonConvergenceError:
        return False
    return True


def check_confluence(
    img: GrayImage,
    f: CellFunction,
    m: Optional[GrayImage] = None,
    schedules: Sequence[Schedule] = (),
    border: BorderPolicy = BorderPolicy.NEUTRAL_LOW,
) -> bool:
    """True iff every schedule reaches a bit-identical fixpoint."""
    schedules = list(schedules) or all_schedules()
    if len(schedules) < 2:
        raise ValueError("confluence needs at least two schedules")
    first, _ = run_to_fixpoint(img, f, m, schedules[0], border)
    for s in schedules[1:]:
        other, _ = run_to_fixpoint(img, f, m, s, border)
        if other != first:
            return False
    return True
