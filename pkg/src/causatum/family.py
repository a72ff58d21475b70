"""Families of subsets of an ordered variable list, stored as bitmasks.

Bit ``i`` of a member is set iff the ``i``-th variable belongs to the
subset, so a member doubles as a truth-table index over ``n`` indicator
variables.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence, Tuple


def bits(mask: int) -> Tuple[int, ...]:
    """Indices of the set bits, ascending."""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def canonical_key(mask: int) -> Tuple[int, Tuple[int, ...]]:
    """(popcount, sorted member indices); matches itertools.combinations order."""
    idx = bits(mask)
    return (len(idx), idx)


@dataclass(frozen=True)
class CauseFamily:
    n: int
    members: frozenset

    def __post_init__(self) -> None:
        members = frozenset(self.members)
        limit = 1 << self.n
        for m in members:
            if not 0 <= m < limit:
                raise ValueError(f"member {m:#b} does not fit in {self.n} bits")
        object.__setattr__(self, "members", members)

    @classmethod
    def of(cls, n: int, members: Iterable[int] = ()) -> "CauseFamily":
        return cls(n, frozenset(members))

    @classmethod
    def from_sets(cls, v_res: Sequence[str], sets: Iterable[Iterable[str]]) -> "CauseFamily":
        index = {name: i for i, name in enumerate(v_res)}
        masks = []
        for s in sets:
            mask = 0
            for name in s:
                mask |= 1 << index[name]
            masks.append(mask)
        return cls(len(v_res), frozenset(masks))

    def to_sets(self, v_res: Sequence[str]) -> list:
        return [tuple(v_res[i] for i in bits(m)) for m in self]

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    @property
    def contains_empty(self) -> bool:
        return 0 in self.members

    def without_empty(self) -> "CauseFamily":
        return CauseFamily(self.n, self.members - {0})

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self.members, key=canonical_key))

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, mask: object) -> bool:
        return mask in self.members

    def __repr__(self) -> str:
        body = ", ".join(format(m, f"0{self.n}b")[::-1] if self.n else "" for m in self)
        return f"CauseFamily(n={self.n}, [{body}])"
