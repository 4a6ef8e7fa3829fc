"""Event-type vocabulary with a reserved padding type."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .exceptions import DataError

PAD_TYPE = "PAD"


@dataclass(frozen=True)
class EventOntology:
    """Closed vocabulary of event types plus the reserved PAD type.

    ``types`` holds every name including PAD, in a fixed order that defines
    the integer encoding used everywhere else. ``size`` is the padded
    vocabulary size, i.e. the number of rows in the embedding table.
    """

    types: tuple[str, ...]
    pad_index: int

    def __post_init__(self):
        object.__setattr__(self, "types", tuple(self.types))
        if len(set(self.types)) != len(self.types):
            raise DataError("event type names must be unique")
        if any(not isinstance(t, str) or not t for t in self.types):
            raise DataError("event type names must be non-empty strings")
        if not 0 <= self.pad_index < len(self.types):
            raise DataError(f"pad_index {self.pad_index} out of range")
        if self.types[self.pad_index] != PAD_TYPE or self.types.count(PAD_TYPE) != 1:
            raise DataError("exactly one PAD entry is required, at pad_index")
        if len(self.types) < 2:
            raise DataError("at least one real event type is required")

    @classmethod
    def from_event_types(cls, names: Iterable[str]) -> "EventOntology":
        """Build an ontology from real type names, appending PAD last."""
        names = tuple(names)
        if PAD_TYPE in names:
            raise DataError(f"{PAD_TYPE!r} is reserved and may not be a real event type")
        return cls(types=names + (PAD_TYPE,), pad_index=len(names))

    @property
    def size(self) -> int:
        return len(self.types)

    @property
    def event_types(self) -> tuple[str, ...]:
        """Real event types, excluding PAD."""
        return tuple(t for i, t in enumerate(self.types) if i != self.pad_index)

    def index_of(self, name: str) -> int:
        try:
            return self.types.index(name)
        except ValueError:
            raise DataError(f"unknown event type {name!r}") from None

    def name_of(self, index: int) -> str:
        if not 0 <= index < len(self.types):
            raise DataError(f"event type index {index} out of range")
        return self.types[index]

    def is_pad(self, index: int) -> bool:
        return index == self.pad_index
