"""Ideal functionalities and the semi-collapsed language checks.

These are the reference behaviours the protocols are compared against:
oblivious transfer (bit and predicate), the generic proof-of-partial-
measurement functionality driven by a measurement operator, and its
semi-collapse instance. ``None`` plays the role of the abort symbol.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from .config import TOL
from .errors import CapacityError, StructuralError
from .predicates import Predicate
from .qsim import (
    DensityMatrix,
    RegisterLayout,
    SparseState,
    apply_h,
    apply_z,
    bell_distribution,
    bell_pair,
    computational_distribution,
    measure_computational,
    tensor,
    to_density_matrix,
    trace_distance,
)
from .qsim.sparse import SQRT1_2

TOP = "accept"  # the verifier's "use the default filter" reply
BOT = None


def qubit_name(i: int) -> str:
    return f"Q{i}"


def qubit_layout(n: int) -> RegisterLayout:
    return RegisterLayout(tuple((qubit_name(i), 1) for i in range(1, n + 1)))


# -- oblivious transfer -----------------------------------------------------


@dataclass(frozen=True)
class OtOutcome:
    alice: Any
    bob: Any


def f_ot(bob_input: Optional[tuple[int, int]], alice_input: Optional[int]) -> OtOutcome:
    if bob_input is None or alice_input is None:
        return OtOutcome(BOT, BOT)
    m0, m1 = bob_input
    return OtOutcome((m0, m1)[alice_input], "ack")


def f_ot_pred(bob_input: Optional[list[int]], alice_input, pred: Predicate) -> OtOutcome:
    if bob_input is None or alice_input is None or not pred(alice_input):
        return OtOutcome(BOT, BOT)
    return OtOutcome({i: bob_input[i - 1] for i in sorted(alice_input)}, "ack")


@dataclass
class IdealWorld:
    """Dummy parties forwarding their inputs to a functionality and its outputs back."""

    functionality: Callable[..., OtOutcome]
    params: dict = field(default_factory=dict)

    def run(self, alice_input, bob_input) -> OtOutcome:
        return self.functionality(bob_input, alice_input, **self.params)


# -- proof of partial measurement -----------------------------------------


@dataclass(frozen=True)
class MeasurementOperatorSpec:
    """A measurement ``M`` (sampled or enumerated) plus the default filter ``f0``.

    ``branches(state)`` lists ``(probability, outcome, post_state)`` exactly;
    ``apply`` samples one of them. ``kraus(n)`` gives the dense Kraus
    operators on ``n`` qubits for the completeness check.
    """

    id: str
    branches: Callable[[SparseState], list[tuple[float, Any, SparseState]]]
    f0: Callable[[Any], Any]
    kraus: Optional[Callable[[int], list[np.ndarray]]] = None

    def apply(self, state: SparseState, rng: np.random.Generator) -> tuple[Any, SparseState]:
        table = self.branches(state)
        probs = np.array([p for p, _, _ in table])
        idx = int(rng.choice(len(table), p=probs / probs.sum()))
        _, m, post = table[idx]
        return m, post

    def completeness_error(self, n: int) -> float:
        """``max |sum_m K_m^dag K_m - I|`` on ``n`` qubits."""
        if self.kraus is None:
            raise StructuralError(f"spec {self.id} has no dense Kraus form")
        ops = self.kraus(n)
        total = sum(k.conj().T @ k for k in ops)
        return float(np.max(np.abs(total - np.eye(1 << n))))


@dataclass(frozen=True)
class FpmResult:
    prover: Any
    verifier: Optional[SparseState]
    outcome: Any = None
    stopped_at: Optional[str] = None
    log: tuple[str, ...] = ()


def f_pm(spec: MeasurementOperatorSpec, rho: Optional[SparseState], abort: bool,
         verifier_reply: Callable[[SparseState], Any], rng: np.random.Generator) -> FpmResult:
    """The five steps: abort check, measure, hand over, wait for ``f``, answer the prover."""
    if abort or rho is None:
        return FpmResult(BOT, BOT, stopped_at="prover-abort")
    m, post = spec.apply(rho, rng)
    f = verifier_reply(post)
    if f is BOT:
        return FpmResult(BOT, post, m, stopped_at="verifier-abort")
    log: tuple[str, ...] = ()
    if f == TOP:
        f = spec.f0
    elif not callable(f):
        return FpmResult(BOT, post, m, stopped_at="malformed-reply",
                         log=(f"malformed verifier reply {f!r} treated as abort",))
    return FpmResult(f(m), post, m, log=log)


def identity_spec() -> MeasurementOperatorSpec:
    def branches(state):
        return [(1.0, "id", state)]

    return MeasurementOperatorSpec("identity", branches, lambda m: m,
                                   lambda n: [np.eye(1 << n)])


# -- semi-collapse ----------------------------------------------------------


@dataclass(frozen=True)
class SemicolOutcome:
    measured: frozenset[int]
    m: tuple[tuple[int, int], ...]  # (j, m_j) for j in T
    r: tuple[tuple[int, int], ...]  # (i, r_i) for i not in T

    def filtered(self) -> dict[int, int]:
        return dict(self.r)


def dummy_state() -> SparseState:
    """Stand-in for ``|bot>``: a single fresh qubit in ``|0>``."""
    return SparseState.basis_state(RegisterLayout.of(("BOT", 1)))


def semicol_branches(pred: Predicate, measured: frozenset[int], state: SparseState):
    n = pred.n
    if not pred(measured):
        return [(1.0, BOT, dummy_state())]
    out = [(1.0, (), (), state)]
    for c in range(1, n + 1):
        nxt = []
        for p, ms, rs, st in out:
            if c in measured:
                for v, q in computational_distribution(st, qubit_name(c)).items():
                    if q <= TOL.prune:
                        continue
                    _, post = measure_computational(st, qubit_name(c), None, outcome=v)
                    nxt.append((p * q, ms + ((c, v),), rs, post))
            else:
                for r in (0, 1):
                    nxt.append((p * 0.5, ms, rs + ((c, r),), apply_z(st, qubit_name(c), 1, r)))
        out = nxt
    return [(p, SemicolOutcome(frozenset(measured), ms, rs), st) for p, ms, rs, st in out]


def semicol_kraus(pred: Predicate, measured: frozenset[int], n: int) -> list[np.ndarray]:
    dim = 1 << n
    if not pred(measured):
        # everything goes to the dummy state: |0><k| for each basis k
        return [np.outer(np.eye(dim)[0], np.eye(dim)[k]) for k in range(dim)]
    proj = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
    z = [np.eye(2) * SQRT1_2, np.diag([1.0, -1.0]) * SQRT1_2]
    per_qubit = [proj if c in measured else z for c in range(1, n + 1)]
    ops = []
    for choice in itertools.product(*per_qubit):
        k = np.eye(1)
        for op in choice:
            k = np.kron(k, op)
        ops.append(k)
    return ops


def semicol_spec(pred: Predicate, measured) -> MeasurementOperatorSpec:
    measured = frozenset(measured)
    return MeasurementOperatorSpec(
        f"semicol:{sorted(measured)}",
        lambda st: semicol_branches(pred, measured, st),
        lambda m: BOT if m is BOT else m.filtered(),
        lambda n: semicol_kraus(pred, measured, n),
    )


def f_semicol(pred: Predicate, measured, rho: Optional[SparseState], abort: bool,
              rng: np.random.Generator,
              verifier_reply: Callable[[SparseState], Any] = lambda _st: TOP) -> FpmResult:
    """``f_pm`` with the semi-collapse measurement; ``rho`` lives on ``Q1..Qn``."""
    return f_pm(semicol_spec(pred, measured), rho, abort, verifier_reply, rng)


# -- language membership ----------------------------------------------------


@dataclass
class MembershipReport:
    in_language: bool
    in_subclass: Optional[bool]
    witness_sets: list[list[int]]
    collapsed: dict[int, Optional[int]]
    violations: list[str]

    def to_dict(self) -> dict:
        return {"in_language": self.in_language, "in_subclass": self.in_subclass,
                "witness_sets": self.witness_sets, "collapsed": self.collapsed,
                "violations": self.violations}


def _basis_value(rho1: np.ndarray, eps: float) -> Optional[int]:
    for v in (0, 1):
        target = np.zeros((2, 2))
        target[v, v] = 1.0
        if np.max(np.abs(rho1 - target)) <= eps:
            return v
    return None


def _hadamard_target(bit: int) -> np.ndarray:
    sign = -1.0 if bit else 1.0
    return 0.5 * np.array([[1.0, sign], [sign, 1.0]])


def check_semicollapsed_membership(rho: DensityMatrix, pred: Predicate,
                                   claimed: Optional[tuple[Any, dict[int, int]]] = None,
                                   eps: float = TOL.membership) -> MembershipReport:
    """Decide membership of an ``n``-qubit state (qubit ``i`` = position ``i-1``, MSB first).

    In the language iff some ``T`` with ``Pred(T)`` has every qubit of ``T``
    reduced to ``|0><0|`` or ``|1><1|`` (a pure reduced state cannot be
    entangled with the rest). With ``claimed = (T, omega)`` the sub-class
    check also needs qubit ``i`` outside ``T`` to be ``H|omega[i]>``.
    """
    n = rho.num_qubits
    if n != pred.n:
        raise StructuralError(f"state has {n} qubits, predicate expects {pred.n}")
    if n > 6:
        raise CapacityError("membership checks are limited to 6 qubits")
    reduced = {i: rho.reduced([i - 1]).entries for i in range(1, n + 1)}
    collapsed = {i: _basis_value(reduced[i], eps) for i in range(1, n + 1)}
    ok_sets = [sorted(t) for t in pred.true_sets() if all(collapsed[i] is not None for i in t)]
    violations = []
    if not ok_sets:
        violations.append("no predicate-valid T has all its qubits in a computational basis state")
    in_sub = None
    if claimed is not None:
        t, omega = claimed
        t = frozenset(t)
        in_sub = True
        if not pred(t):
            in_sub = False
            violations.append(f"claimed T={sorted(t)} fails the predicate")
        for i in range(1, n + 1):
            if i in t:
                if collapsed[i] is None:
                    in_sub = False
                    violations.append(f"qubit {i} in T is not a computational basis state")
            else:
                bit = omega.get(i)
                if bit is None or np.max(np.abs(reduced[i] - _hadamard_target(bit))) > eps:
                    in_sub = False
                    violations.append(f"qubit {i} outside T is not H|omega[{i}]>")
    return MembershipReport(bool(ok_sets), in_sub, ok_sets, collapsed, violations)


# -- postponability ---------------------------------------------------------


@dataclass
class PostponabilityReport:
    cases: list[dict]
    max_probability_gap: float
    max_trace_distance: float
    outcome_sets_equal: bool

    @property
    def passed(self) -> bool:
        return (self.outcome_sets_equal and self.max_probability_gap <= 1e-12
                and self.max_trace_distance <= 1e-9)

    def to_dict(self) -> dict:
        return {"cases": self.cases, "max_probability_gap": self.max_probability_gap,
                "max_trace_distance": self.max_trace_distance,
                "outcome_sets_equal": self.outcome_sets_equal, "passed": self.passed}


def semicol_generator(n: int, measured: frozenset[int], fixed: dict[int, int]):
    """Branches of ``G_omega``: ``(x)_i H^{[i not in T]}|a_i>`` with ``a`` uniform on ``T``
    and ``a_i = fixed[i]`` elsewhere."""
    t_list = sorted(measured)
    out = []
    for bits in itertools.product((0, 1), repeat=len(t_list)):
        a = dict(fixed)
        a.update(zip(t_list, bits))
        st = SparseState.basis_state(qubit_layout(n), {qubit_name(i): a[i] for i in range(1, n + 1)})
        for i in range(1, n + 1):
            if i not in measured:
                st = apply_h(st, qubit_name(i), 1)
        out.append((0.5 ** len(t_list), st))
    return out


def _accumulate(table: dict, key, p: float, rho: np.ndarray) -> None:
    if key in table:
        q, acc = table[key]
        table[key] = (q + p, acc + p * rho)
    else:
        table[key] = (p, p * rho)


def _direct_side(spec: MeasurementOperatorSpec, generator, n: int) -> dict:
    table: dict = {}
    for pg, st in generator:
        for p, m, post in spec.branches(st):
            key = _outcome_key(m, n)
            names = [qubit_name(i) for i in range(1, n + 1)] if m is not BOT else ["BOT"]
            _accumulate(table, key, pg * p, to_density_matrix(post, names).entries)
    return table


def _outcome_key(m, n: int):
    if m is BOT:
        return BOT
    vals = dict(m.m)
    vals.update(m.r)
    return tuple(vals[i] for i in range(1, n + 1))


def _teleported_side(pred: Predicate, measured: frozenset[int], generator, n: int,
                     relabel: bool = True) -> dict:
    """``M'``: Bell-measure each input qubit with the prover's half of a shared pair.

    The verifier's halves ``V1..Vn`` were fixed before the input existed. For
    ``j`` in ``T`` the prover first measures ``Q_j`` (outcome ``m``) and reports
    ``m xor x``; for ``i`` outside ``T`` she applies ``Z^r`` and reports ``r xor z``.
    """
    table: dict = {}
    if not pred(measured):
        for pg, _ in generator:
            _accumulate(table, BOT, pg, to_density_matrix(dummy_state(), ["BOT"]).entries)
        return table
    pairs = bell_pair("V1", "F1")
    for i in range(2, n + 1):
        pairs = tensor(pairs, bell_pair(f"V{i}", f"F{i}"))
    for pg, st in generator:
        branches = [(pg, (), tensor(pairs, st))]
        for c in range(1, n + 1):
            q = qubit_name(c)
            nxt = []
            for p, rep, cur in branches:
                if c in measured:
                    pre = [(pm, m, measure_computational(cur, q, None, outcome=m)[1])
                           for m, pm in computational_distribution(cur, q).items() if pm > TOL.prune]
                else:
                    pre = [(0.5, r, apply_z(cur, q, 1, r)) for r in (0, 1)]
                for pm, label, st2 in pre:
                    _, bell = bell_distribution(st2, (q, 1), (f"F{c}", 1))
                    for (x, z), (pb, amps) in bell.items():
                        if pb <= TOL.prune:
                            continue
                        new_layout = st2.layout.without([q, f"F{c}"])
                        scale = 1.0 / np.sqrt(pb)
                        post = SparseState(new_layout, {k: a * scale for k, a in amps.items()})
                        shown = label ^ (x if c in measured else z) if relabel else label
                        nxt.append((p * pm * pb, rep + (shown,), post))
            branches = nxt
        for p, rep, post in branches:
            rho = to_density_matrix(post, [f"V{i}" for i in range(1, n + 1)]).entries
            _accumulate(table, rep, p, rho)
    return table


def check_postponable(pred: Predicate, generators: Optional[list[tuple[Any, dict[int, int]]]] = None,
                      max_width: int = 3, relabel: bool = True) -> PostponabilityReport:
    """Compare the semi-collapse measurement with its teleportation-based postponement.

    ``generators`` is a list of ``(T, fixed)`` pairs (see ``semicol_generator``);
    by default every ``T`` and every assignment of the unmeasured ``a_i`` is
    enumerated. Outcome probabilities are compared exactly (within 1e-12) and
    the verifier's conditional states by trace distance. ``relabel=False``
    reports the raw pre-teleportation outcomes, which must fail the check.
    """
    n = pred.n
    if n > max_width:
        raise CapacityError(f"postponability is enumerated only up to {max_width} qubits")
    if generators is None:
        generators = []
        for mask in range(1 << n):
            t = frozenset(i for i in range(1, n + 1) if (mask >> (i - 1)) & 1)
            free = [i for i in range(1, n + 1) if i not in t]
            for bits in itertools.product((0, 1), repeat=len(free)):
                generators.append((t, dict(zip(free, bits))))
    cases = []
    gap = 0.0
    worst_td = 0.0
    same = True
    for t, fixed in generators:
        t = frozenset(t)
        gen = semicol_generator(n, t, fixed)
        lhs = _direct_side(semicol_spec(pred, t), gen, n)
        rhs = _teleported_side(pred, t, gen, n, relabel)
        keys_equal = set(lhs) == set(rhs)
        same &= keys_equal
        case_gap = 0.0
        case_td = 0.0
        for key in set(lhs) | set(rhs):
            pl, al = lhs.get(key, (0.0, None))
            pr, ar = rhs.get(key, (0.0, None))
            case_gap = max(case_gap, abs(pl - pr))
            if pl > 0 and pr > 0:
                td = trace_distance(DensityMatrix(al / pl), DensityMatrix(ar / pr))
                case_td = max(case_td, td)
        gap = max(gap, case_gap)
        worst_td = max(worst_td, case_td)
        cases.append({"T": sorted(t), "fixed": {str(k): v for k, v in fixed.items()},
                      "outcomes": len(lhs), "probability_gap": case_gap,
                      "trace_distance": case_td, "outcome_sets_equal": keys_equal})
    return PostponabilityReport(cases, gap, worst_td, same)
