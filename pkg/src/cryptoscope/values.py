"""The constant-value lattice shared by constant propagation, the KB and assets.

A value is Bottom (not reached), a single Constant, a MultiValue of at most
``MAX_VALUES`` constants, or Unknown. Constants are ``(kind, value)`` pairs so
``"1"`` and ``1`` stay distinct; kinds are string, int, bool, null, bytes and
chars (bytes hold ``bytes``, chars hold ``str``).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Optional

from .frontend import Location

MAX_VALUES = 8


class State(str, Enum):
    BOTTOM = "Bottom"
    CONSTANT = "Constant"
    MULTI = "MultiValue"
    UNKNOWN = "Unknown"


# reasons attached to Unknown values
EXTERNAL_INPUT = "external-input"
NON_CONSTANT = "non-constant"
BUDGET = "budget"
TOO_MANY = "too-many-values"


@dataclass(frozen=True)
class ConstValue:
    state: State
    values: frozenset = frozenset()
    provenance: frozenset = frozenset()
    reason: Optional[str] = None

    # -- constructors --------------------------------------------------------

    @staticmethod
    def bottom() -> "ConstValue":
        return _BOTTOM

    @staticmethod
    def unknown(reason: str = NON_CONSTANT, provenance: Iterable[Location] = ()) -> "ConstValue":
        return ConstValue(State.UNKNOWN, frozenset(), frozenset(provenance), reason)

    @staticmethod
    def constant(kind: str, value: object, at: Location | Iterable[Location]) -> "ConstValue":
        prov = frozenset([at]) if isinstance(at, Location) else frozenset(at)
        return ConstValue(State.CONSTANT, frozenset([(kind, value)]), prov)

    @staticmethod
    def of(pairs: Iterable[tuple[str, object]], provenance: Iterable[Location]) -> "ConstValue":
        pairs = frozenset(pairs)
        prov = frozenset(provenance)
        if not pairs:
            return _BOTTOM
        if len(pairs) > MAX_VALUES:
            return ConstValue.unknown(TOO_MANY, prov)
        state = State.CONSTANT if len(pairs) == 1 else State.MULTI
        return ConstValue(state, pairs, prov)

    # -- queries -------------------------------------------------------------

    @property
    def is_bottom(self) -> bool:
        return self.state is State.BOTTOM

    @property
    def is_constant(self) -> bool:
        return self.state is State.CONSTANT

    @property
    def is_unknown(self) -> bool:
        return self.state is State.UNKNOWN

    @property
    def pair(self) -> tuple[str, object]:
        if not self.is_constant:
            raise ValueError(f"{self.state.value} has no single value")
        return next(iter(self.values))

    @property
    def kind(self) -> str:
        return self.pair[0]

    @property
    def value(self) -> object:
        return self.pair[1]

    def sorted_values(self) -> list[tuple[str, object]]:
        return sorted(self.values, key=lambda p: (p[0], repr(p[1])))

    # -- lattice -------------------------------------------------------------

    def join(self, other: "ConstValue") -> "ConstValue":
        if self.is_bottom:
            return other
        if other.is_bottom:
            return self
        prov = self.provenance | other.provenance
        if self.is_unknown or other.is_unknown:
            reason = self.reason if self.is_unknown else other.reason
            return ConstValue.unknown(reason or NON_CONSTANT, prov)
        return ConstValue.of(self.values | other.values, prov)

    def leq(self, other: "ConstValue") -> bool:
        """Lattice order ignoring provenance."""
        if self.is_bottom or other.is_unknown:
            return True
        if other.is_bottom or self.is_unknown:
            return False
        return self.values <= other.values

    def map(self, fn: Callable[[str, object], Optional[tuple[str, object]]], at: Iterable[Location] = ()) -> "ConstValue":
        """Apply ``fn`` to each member; ``None`` results make the whole value Unknown."""
        if self.is_bottom or self.is_unknown:
            return self
        out = []
        for kind, value in self.values:
            res = fn(kind, value)
            if res is None:
                return ConstValue.unknown(NON_CONSTANT, self.provenance | frozenset(at))
            out.append(res)
        return ConstValue.of(out, self.provenance | frozenset(at))

    def same_value(self, other: "ConstValue") -> bool:
        return self.state is other.state and self.values == other.values

    def to_json(self) -> dict:
        out: dict = {"state": self.state.value}
        if self.values:
            vals = [render_value(k, v) for k, v in self.sorted_values()]
            out["value" if self.is_constant else "values"] = vals[0] if self.is_constant else vals
        if self.reason:
            out["reason"] = self.reason
        return out


_BOTTOM = ConstValue(State.BOTTOM)


def render_value(kind: str, value: object) -> object:
    """JSON-friendly rendering of a constant."""
    if kind == "bytes":
        return "0x" + bytes(value).hex()
    return value


def join_all(values: Iterable[ConstValue]) -> ConstValue:
    out = ConstValue.bottom()
    for v in values:
        out = out.join(v)
    return out
