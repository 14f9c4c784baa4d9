"""Pick-n-place plans for the external-buffer setting."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

START_TO_GOAL = "s->g"
START_TO_BUFFER = "s->b"
BUFFER_TO_GOAL = "b->g"
KINDS = (START_TO_GOAL, START_TO_BUFFER, BUFFER_TO_GOAL)


@dataclass(frozen=True)
class Action:
    """One pick-n-place.

    ``slot`` numbers the external buffer used by buffer actions. ``goal`` is the
    goal vertex filled; it equals ``obj`` in labeled plans.
    """

    obj: int
    kind: str
    slot: Optional[int] = None
    goal: Optional[int] = None

    def __str__(self):
        dst = "b" if self.kind == START_TO_BUFFER else "g"
        return f"{self.obj}->{dst}"

    def to_dict(self):
        d = {"object": self.obj, "kind": self.kind}
        if self.slot is not None:
            d["slot"] = self.slot
        if self.goal is not None and self.goal != self.obj:
            d["goal"] = self.goal
        return d


@dataclass
class RearrangementPlan:
    actions: List[Action] = field(default_factory=list)

    def __len__(self):
        return len(self.actions)

    def __iter__(self):
        return iter(self.actions)

    def buffered_objects(self):
        return [a.obj for a in self.actions if a.kind == START_TO_BUFFER]

    def total_buffers(self) -> int:
        return len(self.buffered_objects())

    def peak_buffers(self) -> int:
        cur = peak = 0
        for a in self.actions:
            if a.kind == START_TO_BUFFER:
                cur += 1
                peak = max(peak, cur)
            elif a.kind == BUFFER_TO_GOAL:
                cur -= 1
        return peak

    def compact(self) -> List[str]:
        return [str(a) for a in self.actions]

    def to_list(self):
        return [a.to_dict() for a in self.actions]


class SlotPool:
    """Hands out the lowest free external buffer slot."""

    def __init__(self):
        self.free: List[int] = []
        self.next = 0
        self.held = {}

    def take(self, obj: int) -> int:
        if self.free:
            self.free.sort()
            s = self.free.pop(0)
        else:
            s = self.next
            self.next += 1
        self.held[obj] = s
        return s

    def release(self, obj: int) -> int:
        s = self.held.pop(obj)
        self.free.append(s)
        return s
