"""Named register layouts and the bit addressing convention.

A basis element of the whole system is packed into one Python int. Registers
are laid out in declaration order, the first register holding the most
significant bits, and inside a register bit 1 is the most significant bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from ..errors import StructuralError


@dataclass(frozen=True)
class RegisterLayout:
    registers: tuple[tuple[str, int], ...]

    def __post_init__(self):
        regs = tuple((str(n), int(w)) for n, w in self.registers)
        object.__setattr__(self, "registers", regs)
        names = [n for n, _ in regs]
        if len(set(names)) != len(names):
            raise StructuralError(f"duplicate register names in {names}")
        for name, width in regs:
            if width < 1:
                raise StructuralError(f"register {name!r} has width {width} < 1")

    @classmethod
    def of(cls, *pairs: tuple[str, int]) -> "RegisterLayout":
        return cls(tuple(pairs))

    @property
    def names(self) -> list[str]:
        return [n for n, _ in self.registers]

    @property
    def total_width(self) -> int:
        return sum(w for _, w in self.registers)

    def __contains__(self, name: str) -> bool:
        return any(n == name for n, _ in self.registers)

    def width(self, name: str) -> int:
        for n, w in self.registers:
            if n == name:
                return w
        raise StructuralError(f"unknown register {name!r}")

    def offset(self, name: str) -> int:
        """Number of bits (from the top) preceding the register."""
        off = 0
        for n, w in self.registers:
            if n == name:
                return off
            off += w
        raise StructuralError(f"unknown register {name!r}")

    def low_shift(self, name: str) -> int:
        """Shift of the register's least significant bit inside the packed int."""
        return self.total_width - self.offset(name) - self.width(name)

    def bit_shift(self, name: str, bit_index: int) -> int:
        width = self.width(name)
        if not 1 <= bit_index <= width:
            raise StructuralError(
                f"bit index {bit_index} out of range 1..{width} for register {name!r}"
            )
        return self.low_shift(name) + (width - bit_index)

    def mask(self, name: str) -> int:
        return ((1 << self.width(name)) - 1) << self.low_shift(name)

    def get(self, basis: int, name: str) -> int:
        return (basis >> self.low_shift(name)) & ((1 << self.width(name)) - 1)

    def put(self, basis: int, name: str, value: int) -> int:
        width = self.width(name)
        if value < 0 or value >> width:
            raise StructuralError(f"value {value} does not fit register {name!r}")
        sh = self.low_shift(name)
        return (basis & ~(((1 << width) - 1) << sh)) | (value << sh)

    def pack(self, values: dict[str, int]) -> int:
        basis = 0
        for name, value in values.items():
            basis = self.put(basis, name, value)
        return basis

    def unpack(self, basis: int) -> dict[str, int]:
        return {n: self.get(basis, n) for n in self.names}

    def with_register(self, name: str, width: int) -> "RegisterLayout":
        return RegisterLayout(self.registers + ((name, width),))

    def without(self, names: Iterable[str]) -> "RegisterLayout":
        drop = set(names)
        for n in drop:
            self.width(n)
        return RegisterLayout(tuple(r for r in self.registers if r[0] not in drop))

    def renamed(self, mapping: dict[str, str]) -> "RegisterLayout":
        for n in mapping:
            self.width(n)
        return RegisterLayout(tuple((mapping.get(n, n), w) for n, w in self.registers))

    def to_json(self) -> list[list]:
        return [[n, w] for n, w in self.registers]
