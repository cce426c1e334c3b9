"""Public predicates on subsets of ``[n] = {1, ..., n}``.

A predicate decides which index sets a sender may choose: the set ``B`` of
positions Alice learns in predicate OT, or the set ``T`` of collapsed
positions in a semi-collapsed state. Subsets are frozensets of 1-based
indices; on the wire they travel as little-endian bitmasks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable

from .errors import StructuralError

MAX_ENUMERATION = 16


def subset_to_mask(subset: Iterable[int]) -> int:
    mask = 0
    for i in subset:
        mask |= 1 << (i - 1)
    return mask


def mask_to_subset(mask: int, n: int) -> frozenset[int]:
    return frozenset(i + 1 for i in range(n) if (mask >> i) & 1)


def subset_bits(subset: Iterable[int], n: int) -> str:
    """``B`` as the string ``B[1] B[2] ... B[n]`` of membership bits."""
    s = set(subset)
    return "".join("1" if i in s else "0" for i in range(1, n + 1))


@dataclass(frozen=True)
class Predicate:
    """``kind`` plus integer ``params``; ``complemented`` evaluates on ``[n] \\ S``.

    kinds:
      ``singleton``   exactly one index.
      ``any``         every subset.
      ``string_ot``   params ``(m,)``, ``n = 2m``; the first half or the second half.
      ``k_out_of_n``  params ``(k, l, m)``, ``n = l*m``; each length-``l`` block is
                      all-in or all-out and exactly ``k`` blocks are in.
      ``custom``      params are the bitmasks of the accepted subsets (sorted).
    """

    kind: str
    n: int
    params: tuple[int, ...] = ()
    complemented: bool = False

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(int(p) for p in self.params))
        if self.n < 1:
            raise StructuralError("predicate needs n >= 1")
        if self.kind == "string_ot":
            if len(self.params) != 1 or 2 * self.params[0] != self.n or self.params[0] < 1:
                raise StructuralError("string_ot needs params (m,) with n = 2m")
        elif self.kind == "k_out_of_n":
            if len(self.params) != 3:
                raise StructuralError("k_out_of_n needs params (k, l, m)")
            k, l, m = self.params
            if l < 1 or m < 1 or l * m != self.n or not 0 <= k <= m:
                raise StructuralError("k_out_of_n needs n = l*m and 0 <= k <= m")
        elif self.kind == "custom":
            if list(self.params) != sorted(set(self.params)):
                raise StructuralError("custom predicate masks must be sorted and distinct")
            if any(p < 0 or p >> self.n for p in self.params):
                raise StructuralError("custom predicate mask outside [n]")
        elif self.kind in ("singleton", "any"):
            if self.params:
                raise StructuralError(f"{self.kind} takes no params")
        else:
            raise StructuralError(f"unknown predicate kind {self.kind!r}")

    def __call__(self, subset: Iterable[int] | None) -> bool:
        if subset is None:
            return False
        s = frozenset(subset)
        if any(not 1 <= i <= self.n for i in s):
            return False
        if self.complemented:
            s = frozenset(range(1, self.n + 1)) - s
        return self._base(s)

    def _base(self, s: frozenset[int]) -> bool:
        if self.kind == "singleton":
            return len(s) == 1
        if self.kind == "any":
            return True
        if self.kind == "string_ot":
            m = self.params[0]
            return s in (frozenset(range(1, m + 1)), frozenset(range(m + 1, 2 * m + 1)))
        if self.kind == "k_out_of_n":
            k, l, m = self.params
            full = 0
            for blk in range(m):
                members = {blk * l + j + 1 in s for j in range(l)}
                if len(members) != 1:
                    return False
                full += members.pop()
            return full == k
        return subset_to_mask(s) in self.params

    def complement(self) -> "Predicate":
        """``S -> Pred([n] \\ S)``."""
        return Predicate(self.kind, self.n, self.params, not self.complemented)

    def true_sets(self) -> list[frozenset[int]]:
        if self.n > MAX_ENUMERATION:
            raise StructuralError(f"refusing to enumerate 2^{self.n} subsets")
        return [mask_to_subset(m, self.n) for m in range(1 << self.n)
                if self(mask_to_subset(m, self.n))]

    def describe(self) -> dict:
        return {"kind": self.kind, "n": self.n, "params": list(self.params),
                "complemented": self.complemented}

    def to_bytes(self) -> bytes:
        return json.dumps(self.describe(), sort_keys=True, separators=(",", ":")).encode()

    @classmethod
    def from_description(cls, d: dict) -> "Predicate":
        try:
            return cls(str(d["kind"]), int(d["n"]), tuple(d.get("params", ())),
                       bool(d.get("complemented", False)))
        except (KeyError, TypeError, ValueError) as exc:
            raise StructuralError(f"malformed predicate description: {exc}") from exc


def singleton(n: int) -> Predicate:
    return Predicate("singleton", n)


def any_subset(n: int) -> Predicate:
    return Predicate("any", n)


def string_ot(m: int) -> Predicate:
    return Predicate("string_ot", 2 * m, (m,))


def k_out_of_n(k: int, l: int, m: int) -> Predicate:
    return Predicate("k_out_of_n", l * m, (k, l, m))


def custom(n: int, true_sets: Iterable[Iterable[int]]) -> Predicate:
    masks = sorted({subset_to_mask(s) for s in true_sets})
    return Predicate("custom", n, tuple(masks))


def k_out_of_n_choices(k: int, l: int, m: int) -> list[frozenset[int]]:
    """Every valid ``B`` for ``k_out_of_n(k, l, m)`` (used by tests and the CLI)."""
    out = []
    for blocks in combinations(range(m), k):
        out.append(frozenset(b * l + j + 1 for b in blocks for j in range(l)))
    return out


def parse_predicate(text: str) -> Predicate:
    """CLI syntax: ``singleton:N``, ``any:N``, ``string:M``, ``kn:K,L,M``."""
    name, _, arg = text.partition(":")
    try:
        nums = [int(a) for a in arg.split(",")] if arg else []
    except ValueError as exc:
        raise StructuralError(f"bad predicate parameters in {text!r}") from exc
    if name == "singleton" and len(nums) == 1:
        return singleton(nums[0])
    if name == "any" and len(nums) == 1:
        return any_subset(nums[0])
    if name in ("string", "string_ot") and len(nums) == 1:
        return string_ot(nums[0])
    if name in ("kn", "k_out_of_n") and len(nums) == 3:
        return k_out_of_n(*nums)
    raise StructuralError(f"unknown predicate {text!r}; use singleton:N, any:N, string:M or kn:K,L,M")
