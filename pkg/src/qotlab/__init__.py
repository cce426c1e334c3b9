"""Oblivious transfer and zero-knowledge proofs on quantum states from hashed qubits.

Simulated end to end: a sparse state-vector engine carries the quantum
messages, classical frames travel over in-process or TCP channels.
"""

__version__ = "0.1.0"
