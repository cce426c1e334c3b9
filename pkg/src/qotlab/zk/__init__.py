"""Zero-knowledge: relations, the ideal trusted party and the MPC-in-the-head NIZK."""

from .backend import IdealBackend, NizkBackend, ZkBackend, make_backend
from .circuit import Circuit, RelationCircuit, decode_witness, encode_witness, relation_circuit
from .ideal import IdealRecord, IdealZk, ideal_fzk
from .mpcith import DEFAULT_REPETITIONS, NizkProof, Opening, nizk_extract, nizk_prove, nizk_verify
from .relations import StatementKind, ZkStatement, ZkWitness, relation_check
from .ro import RandomOracle

__all__ = [
    "Circuit", "DEFAULT_REPETITIONS", "IdealBackend", "IdealRecord", "IdealZk", "NizkBackend",
    "NizkProof", "Opening", "RandomOracle", "RelationCircuit", "StatementKind", "ZkBackend",
    "ZkStatement", "ZkWitness", "decode_witness", "encode_witness", "ideal_fzk", "make_backend",
    "nizk_extract", "nizk_prove", "nizk_verify", "relation_check", "relation_circuit",
]
