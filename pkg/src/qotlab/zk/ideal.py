"""In-process trusted party for zero-knowledge.

The prover hands ``(statement, witness)`` (or an abort) to the functionality
and gets back a ticket. The ticket travels to the verifier in a ZKMSG frame;
redeeming it yields the statement if the witness satisfied the relation and
None otherwise. Every submission is recorded so games can read the witness
back, which is how the ideal world models witness extraction.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Optional

from ..errors import StructuralError
from .relations import ZkStatement, ZkWitness, relation_check


@dataclass(frozen=True)
class IdealRecord:
    ticket: int
    statement: Optional[ZkStatement]
    witness: Optional[ZkWitness]
    accepted: bool


class IdealZk:
    def __init__(self):
        self.records: list[IdealRecord] = []
        self._pending: dict[int, Optional[ZkStatement]] = {}
        self._next = 1
        self._lock = threading.Lock()

    def submit(self, statement: Optional[ZkStatement], witness: Optional[ZkWitness]) -> int:
        """Prover side. ``witness=None`` is the abort input."""
        accepted = False
        if statement is not None and witness is not None:
            try:
                accepted = relation_check(statement, witness)
            except StructuralError:
                accepted = False
        with self._lock:
            ticket = self._next
            self._next += 1
            self._pending[ticket] = statement if accepted else None
            self.records.append(IdealRecord(ticket, statement, witness, accepted))
        return ticket

    def deliver(self, ticket: int) -> Optional[ZkStatement]:
        """Verifier side; each ticket can be redeemed once."""
        with self._lock:
            return self._pending.pop(ticket, None)

    def witness_for(self, ticket: int) -> Optional[ZkWitness]:
        for rec in self.records:
            if rec.ticket == ticket:
                return rec.witness
        return None


def ideal_fzk(statement: Optional[ZkStatement], witness: Optional[ZkWitness],
              fzk: Optional[IdealZk] = None) -> Optional[ZkStatement]:
    """One-shot use of the functionality: what the verifier ends up with."""
    fzk = fzk or IdealZk()
    return fzk.deliver(fzk.submit(statement, witness))
