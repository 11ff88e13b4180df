"""Noise modeling and fault analysis for prepared magic-state circuits.

The analyzer works on circuits whose measurement records split into two
groups: records consumed by classically controlled corrections (injection
measurements) and unconsumed records (detection measurements, postselected
on their noiseless outcomes). Faults are Paulis inserted at circuit
positions; the exact enumerators average over correction branches, the
Monte Carlo engine samples them.

Noise placement follows a round schedule derived from the circuit: round 0
prepares magic states (Z errors at rate p_T on each |T> preparation), and
every later round ends with single-qubit depolarizing noise at rate p_L on
each not-yet-measured qubit, with X, Y, Z each taken at p_L / 3. The
decode latency inserts idle rounds before the adaptive correction round.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ir import Circuit, Gate, MEAS_KINDS, PREP_KINDS, T_LIKE_KINDS
from .semantics import (
    SimulationError,
    _apply_unitary_gate,
    _measurement_probability,
    _PREP_AMPLITUDES,
    _axis_slice,
)

HARMFUL_INFIDELITY = 1e-9
DETECTED_ACCEPTANCE = 1e-12


class FaultAnalysisError(ValueError):
    pass


# ---------------------------------------------------------------------------
# noise model and the injected-T error channel
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NoiseModel:
    """Two-parameter logical noise: depolarizing p_l per qubit per round and
    Z rate p_t on each |T> preparation, with t_decode idle decode rounds."""

    p_l: float
    p_t: float
    t_decode: int = 0

    def __post_init__(self):
        for name, p in (("p_l", self.p_l), ("p_t", self.p_t)):
            if not 0.0 <= p <= 0.5:
                raise FaultAnalysisError(f"{name}={p} outside [0, 0.5]")
        if self.t_decode < 0:
            raise FaultAnalysisError("t_decode must be >= 0")

    @staticmethod
    def from_ratio(p_l: float, r: float, t_decode: int = 0) -> "NoiseModel":
        if r < 0:
            raise FaultAnalysisError("ratio r must be >= 0")
        return NoiseModel(p_l, r * p_l, t_decode)

    @property
    def r(self) -> float:
        return self.p_t / self.p_l if self.p_l > 0 else math.inf


@dataclass(frozen=True)
class TGadgetChannel:
    """Error channel of a teleported T gate: mixture of I, S, Sdag, Z."""

    p_i: float
    p_s: float
    p_sdag: float
    p_z: float

    def __post_init__(self):
        probs = (self.p_i, self.p_s, self.p_sdag, self.p_z)
        if any(p < -1e-15 for p in probs):
            raise FaultAnalysisError("channel probabilities must be non-negative")
        if abs(sum(probs) - 1.0) > 1e-12:
            raise FaultAnalysisError("channel probabilities must sum to 1")


def t_gadget_channel(p_x: float, p_y: float, p_z: float) -> TGadgetChannel:
    """Map Pauli error rates of a prepared |T> state onto the channel of the
    teleported T gate: X goes to Sdag, Y to S, Z stays Z."""
    if min(p_x, p_y, p_z) < 0:
        raise FaultAnalysisError("negative probability")
    if p_x + p_y + p_z > 1 + 1e-12:
        raise FaultAnalysisError("probabilities exceed 1")
    return TGadgetChannel(1.0 - p_x - p_y - p_z, p_y, p_x, p_z)


_S = np.diag([1.0, 1.0j]).astype(complex)
_Z = np.diag([1.0, -1.0]).astype(complex)
_I2 = np.eye(2, dtype=complex)


def channel_superoperator(channel: TGadgetChannel) -> np.ndarray:
    """4x4 superoperator (acting on vectorized density matrices)."""
    out = np.zeros((4, 4), dtype=complex)
    for p, k in (
        (channel.p_i, _I2),
        (channel.p_s, _S),
        (channel.p_sdag, _S.conj().T),
        (channel.p_z, _Z),
    ):
        out += p * np.kron(k, k.conj())
    return out


# ---------------------------------------------------------------------------
# gadgetized implementation and round schedule
# ---------------------------------------------------------------------------


def gadgetize(c: Circuit) -> Circuit:
    """Replace in-circuit T gates by teleportation gadgets on fresh |T>
    resources: CNOT from the data qubit onto the resource, Z measurement,
    and an S correction conditioned on the outcome.

    T gates forming one parallel layer share a single transversal CNOT round
    and a single correction round; single-qubit gates keep their per-qubit
    order around the gadget.
    """
    n_t = sum(1 for g in c.gates if g.kind == "T")
    if any(g.kind in ("Tdag", "PrepTdag") for g in c.gates):
        raise FaultAnalysisError("gadgetize expects the Tdag-free normal form")
    n = c.n + n_t
    preps = [g for g in c.gates if g.kind in PREP_KINDS]
    rest = [g for g in c.gates if g.kind not in PREP_KINDS]
    gates: list[Gate] = [Gate(g.kind, g.qubits) for g in preps]
    gates.extend(Gate("PrepT", (c.n + i,)) for i in range(n_t))

    aux = c.n
    buffer: list[Gate] = []

    def flush():
        nonlocal aux
        if not buffer:
            return
        t_qubits = [g.qubits[0] for g in buffer if g.kind == "T"]
        seen_t: set[int] = set()
        pre: list[Gate] = []
        post: list[Gate] = []
        for g in buffer:
            if g.kind == "T":
                seen_t.add(g.qubits[0])
            elif g.qubits[0] in seen_t:
                post.append(g)
            else:
                pre.append(g)
        gates.extend(pre)
        layer = []
        for q in t_qubits:
            gates.append(Gate("CNOT", (q, aux)))
            layer.append((q, aux, f"inj{aux - c.n}"))
            aux += 1
        gates.extend(Gate("MeasZ", (a,), rec) for _, a, rec in layer)
        gates.extend(Gate("CondS", (q,), rec) for q, _, rec in layer)
        gates.extend(post)
        buffer.clear()

    for g in rest:
        if g.kind == "T":
            if g.qubits[0] in {b.qubits[0] for b in buffer if b.kind == "T"}:
                flush()  # second T on a qubit starts a new layer
            buffer.append(g)
        elif len(g.qubits) == 1 and g.kind not in MEAS_KINDS and g.kind != "CondS":
            buffer.append(g)
        else:
            flush()
            gates.append(g)
    flush()
    return Circuit(n, tuple(gates))


@dataclass(frozen=True)
class Round:
    label: str
    gate_indices: tuple[int, ...]
    insert_pos: int          # faults/noise apply after this gate index
    noisy_qubits: tuple[int, ...]


def build_schedule(c: Circuit, t_decode: int = 0) -> tuple[Round, ...]:
    """Group gates into implementation rounds.

    Round 0 holds the preparations (plus leading single-qubit frame gates);
    each parallel CNOT layer is one round; measurements and single-qubit
    gates join the current round; classically controlled corrections get a
    dedicated round, preceded by t_decode idle decode rounds.
    """
    rounds: list[tuple[str, list[int]]] = [("prep", [])]
    used: set[int] = set()
    kind_of_round = "prep"
    for idx, g in enumerate(c.gates):
        if g.kind in PREP_KINDS:
            if kind_of_round != "prep":
                raise FaultAnalysisError("preparations must lead the circuit")
            rounds[-1][1].append(idx)
            continue
        if g.kind in ("CNOT", "SWAP"):
            conflict = any(q in used for q in g.qubits)
            if kind_of_round != "cnot" or conflict:
                rounds.append(("cnot", []))
                kind_of_round = "cnot"
                used = set()
            rounds[-1][1].append(idx)
            used |= set(g.qubits)
        elif g.kind == "CondS":
            if kind_of_round != "correct":
                for _ in range(t_decode):
                    rounds.append(("decode-idle", []))
                rounds.append(("correct", []))
                kind_of_round = "correct"
                used = set()
            rounds[-1][1].append(idx)
        else:
            # single-qubit gates and measurements ride along with the
            # current round; they do not consume a transversal time step
            if kind_of_round == "prep" and g.kind not in MEAS_KINDS:
                rounds[-1][1].append(idx)
            else:
                if len(rounds) == 1:
                    rounds.append(("cnot", []))
                    kind_of_round = "cnot"
                rounds[-1][1].append(idx)

    measured: set[int] = set()
    out: list[Round] = []
    last_pos = -1
    for label, idxs in rounds:
        if idxs:
            last_pos = max(idxs)
        for i in idxs:
            if c.gates[i].kind in MEAS_KINDS:
                measured.add(c.gates[i].qubits[0])
        noisy = tuple(q for q in range(c.n) if q not in measured)
        out.append(Round(label, tuple(idxs), last_pos, noisy))
    return tuple(out)


# ---------------------------------------------------------------------------
# trajectory execution with fault insertion
# ---------------------------------------------------------------------------


def _pauli_ops(pauli: str, qubit: int) -> tuple[Gate, ...]:
    if pauli == "X":
        return (Gate("X", (qubit,)),)
    if pauli == "Z":
        return (Gate("Z", (qubit,)),)
    if pauli == "Y":  # XZ, equal to Y up to a global phase
        return (Gate("Z", (qubit,)), Gate("X", (qubit,)))
    raise FaultAnalysisError(f"unknown Pauli {pauli!r}")


class _Harness:
    """Executable form of a circuit with designated outputs.

    Splits measurement records into injection records (consumed by CondS)
    and detection records (postselected on their noiseless outcomes), and
    freezes the noiseless reference: detection outcomes and the pure state
    on the output qubits.
    """

    def __init__(self, c: Circuit, outputs: list[int], t_decode: int = 0):
        if c.n > 12:
            raise SimulationError("dense fault analysis capped at 12 qubits")
        self.circuit = c
        self.n = c.n
        self.outputs = list(outputs)
        self.rounds = build_schedule(c, t_decode)
        consumed = {g.record for g in c.gates if g.kind == "CondS"}
        self.detection = [
            g.record for g in c.gates if g.kind in MEAS_KINDS and g.record not in consumed
        ]
        self.meas_order = [g.record for g in c.gates if g.kind in MEAS_KINDS]
        if not self.detection:
            raise FaultAnalysisError("circuit has no detection measurements")

        branches = self._branches({})
        ref = {r: branches[0][2][r] for r in self.detection}
        total = 0.0
        for prob, state, outcomes in branches:
            if any(outcomes[r] != ref[r] for r in self.detection):
                raise FaultAnalysisError("noiseless detection outcomes not deterministic")
            total += prob
        if abs(total - 1.0) > 1e-9:
            raise FaultAnalysisError("noiseless branches do not sum to unit probability")
        self.reference = ref
        self.ideal_out = self._reduced_pure(branches[0][1])
        for prob, state, _ in branches:
            if 1.0 - self._output_fidelity(state) > 1e-10:
                raise FaultAnalysisError("noiseless branches disagree on the output state")

    # -- state helpers ---------------------------------------------------

    def _reduced_pure(self, state: np.ndarray) -> np.ndarray:
        k = len(self.outputs)
        psi = state.reshape((2,) * self.n)
        rest = [q for q in range(self.n) if q not in self.outputs]
        mat = np.transpose(psi, axes=self.outputs + rest).reshape(1 << k, -1)
        rho = mat @ mat.conj().T
        vals, vecs = np.linalg.eigh(rho)
        if vals[-1] < 1.0 - 1e-9:
            raise FaultAnalysisError("output qubits are not in a pure state")
        return vecs[:, -1]

    def _output_fidelity(self, state: np.ndarray) -> float:
        k = len(self.outputs)
        psi = state.reshape((2,) * self.n)
        rest = [q for q in range(self.n) if q not in self.outputs]
        mat = np.transpose(psi, axes=self.outputs + rest).reshape(1 << k, -1)
        vec = self.ideal_out.conj() @ mat
        return float(np.vdot(vec, vec).real)

    # -- execution ---------------------------------------------------------

    def _branches(self, fault_map: dict[int, list[tuple[str, int]]]):
        """Exact branch enumeration: [(prob, state, outcomes)]."""
        n = self.n
        state0 = np.zeros((2,) * n, dtype=np.complex128)
        state0.flat[0] = 1.0
        branches = [(1.0, state0, {})]
        for pos in range(-1, len(self.circuit.gates)):
            if pos >= 0:
                g = self.circuit.gates[pos]
                new = []
                for prob, state, outcomes in branches:
                    if g.kind in PREP_KINDS:
                        a0, a1 = _PREP_AMPLITUDES[g.kind]
                        q = g.qubits[0]
                        sub = state[_axis_slice(n, q, 0)].copy()
                        state = state.copy()
                        state[_axis_slice(n, q, 0)] = a0 * sub
                        state[_axis_slice(n, q, 1)] = a1 * sub
                        new.append((prob, state, outcomes))
                    elif g.kind in MEAS_KINDS:
                        for outcome in (0, 1):
                            p, proj = _measurement_probability(state, g, n, outcome)
                            if p < 1e-14:
                                continue
                            new.append(
                                (prob * p, proj / math.sqrt(p), {**outcomes, g.record: outcome})
                            )
                    elif g.kind == "CondS":
                        if outcomes[g.record] == 1:
                            state = _apply_unitary_gate(state.copy(), Gate("S", g.qubits), n)
                        new.append((prob, state, outcomes))
                    else:
                        new.append(
                            (prob, _apply_unitary_gate(state.copy(), g, n), outcomes)
                        )
                branches = new
            for pauli, qubit in fault_map.get(pos, ()):
                branches = [
                    (
                        prob,
                        _apply_gates(state.copy(), _pauli_ops(pauli, qubit), n),
                        outcomes,
                    )
                    for prob, state, outcomes in branches
                ]
        return branches

    def run_exact(self, faults: list[tuple[int, str, int]]) -> tuple[float, float]:
        """(acceptance probability, mean infidelity over accepted branches)
        for Paulis inserted after given gate positions: (pos, pauli, qubit)."""
        fault_map: dict[int, list[tuple[str, int]]] = {}
        for pos, pauli, qubit in faults:
            fault_map.setdefault(pos, []).append((pauli, qubit))
        acc = 0.0
        bad = 0.0
        for prob, state, outcomes in self._branches(fault_map):
            if any(outcomes[r] != self.reference[r] for r in self.detection):
                continue
            acc += prob
            bad += prob * (1.0 - self._output_fidelity(state))
        if acc <= 0.0:
            return 0.0, 0.0
        return acc, bad / acc

    def run_sampled(
        self, fault_map: dict[int, list[tuple[str, int]]], uniforms: np.ndarray
    ) -> tuple[bool, float]:
        """Single trajectory with sampled measurements; returns (accepted,
        infidelity). Consumes one uniform per measurement, in circuit order."""
        n = self.n
        state = np.zeros((2,) * n, dtype=np.complex128)
        state.flat[0] = 1.0
        outcomes: dict[str, int] = {}
        meas_i = 0
        for pos in range(-1, len(self.circuit.gates)):
            if pos >= 0:
                g = self.circuit.gates[pos]
                if g.kind in PREP_KINDS:
                    a0, a1 = _PREP_AMPLITUDES[g.kind]
                    q = g.qubits[0]
                    sub = state[_axis_slice(n, q, 0)].copy()
                    state[_axis_slice(n, q, 0)] = a0 * sub
                    state[_axis_slice(n, q, 1)] = a1 * sub
                elif g.kind in MEAS_KINDS:
                    p1, proj1 = _measurement_probability(state, g, n, 1)
                    outcome = int(uniforms[meas_i] < p1)
                    meas_i += 1
                    if outcome:
                        state = proj1 / math.sqrt(p1)
                    else:
                        p0, proj0 = _measurement_probability(state, g, n, 0)
                        state = proj0 / math.sqrt(p0)
                    outcomes[g.record] = outcome
                    if (
                        g.record in self.reference
                        and outcome != self.reference[g.record]
                    ):
                        return False, 0.0
                elif g.kind == "CondS":
                    if outcomes[g.record] == 1:
                        state = _apply_unitary_gate(state, Gate("S", g.qubits), n)
                else:
                    state = _apply_unitary_gate(state, g, n)
            for pauli, qubit in fault_map.get(pos, ()):
                state = _apply_gates(state, _pauli_ops(pauli, qubit), n)
        return True, 1.0 - self._output_fidelity(state)

    # -- fault sites -------------------------------------------------------

    def tprep_sites(self) -> list[tuple[int, int]]:
        """(gate position, qubit) of each magic-resource site (T-type gate)."""
        return [
            (i, g.qubits[0])
            for i, g in enumerate(self.circuit.gates)
            if g.kind in T_LIKE_KINDS
        ]

    def depolarizing_sites(self) -> list[tuple[int, int, int]]:
        """(round index, insert position, qubit) for every end-of-round noise
        location on a live qubit, rounds 1 and later."""
        sites = []
        for r, rnd in enumerate(self.rounds):
            if r == 0:
                continue
            for q in rnd.noisy_qubits:
                sites.append((r, rnd.insert_pos, q))
        return sites


def _apply_gates(state: np.ndarray, gates: tuple[Gate, ...], n: int) -> np.ndarray:
    for g in gates:
        state = _apply_unitary_gate(state, g, n)
    return state


# ---------------------------------------------------------------------------
# enumeration reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FaultLocation:
    gate_index: int
    qubit: int
    pauli: str
    round_index: int


@dataclass(frozen=True)
class FaultRecord:
    location: FaultLocation
    acceptance: float
    infidelity: float

    @property
    def classification(self) -> str:
        if self.acceptance < DETECTED_ACCEPTANCE:
            return "detected"
        if self.infidelity < HARMFUL_INFIDELITY:
            return "harmless"
        return "harmful"


@dataclass
class DetectionTable:
    entries: list[FaultRecord]

    def count(self, klass: str) -> int:
        return sum(1 for e in self.entries if e.classification == klass)

    def to_dict(self) -> dict:
        return {
            "total": len(self.entries),
            "detected": self.count("detected"),
            "harmless": self.count("harmless"),
            "harmful": self.count("harmful"),
            "entries": [
                {
                    "gate_index": e.location.gate_index,
                    "qubit": e.location.qubit,
                    "pauli": e.location.pauli,
                    "round": e.location.round_index,
                    "acceptance": e.acceptance,
                    "infidelity": e.infidelity,
                    "class": e.classification,
                }
                for e in self.entries
            ],
        }


@dataclass
class PairSummary:
    total: int
    harmful: int
    detected: int
    harmless: int

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "harmful": self.harmful,
            "detected": self.detected,
            "harmless": self.harmless,
        }


def _round_of(harness: _Harness, pos: int) -> int:
    for r, rnd in enumerate(harness.rounds):
        if pos in rnd.gate_indices:
            return r
    return -1


def enumerate_single_faults(
    c: Circuit,
    outputs: list[int],
    sites: str = "tprep",
    paulis: tuple[str, ...] | None = None,
) -> DetectionTable:
    """Exhaustively classify single Pauli faults.

    sites="tprep" inserts faults right after each T-type gate (default
    Paulis: Z only, the phase noise of a faulty magic state); sites="all"
    inserts X, Y, Z after every gate.
    """
    if sites not in ("tprep", "all"):
        raise FaultAnalysisError(f"unknown site class {sites!r}")
    harness = _Harness(c, outputs)
    if sites == "tprep":
        locations = harness.tprep_sites()
        paulis = paulis or ("Z",)
    else:
        locations = [
            (i, q) for i, g in enumerate(c.gates) for q in g.qubits
            if g.kind not in MEAS_KINDS
        ]
        paulis = paulis or ("X", "Y", "Z")
    entries = []
    for pos, qubit in locations:
        for pauli in paulis:
            acc, infid = harness.run_exact([(pos, pauli, qubit)])
            entries.append(
                FaultRecord(
                    FaultLocation(pos, qubit, pauli, _round_of(harness, pos)),
                    acc,
                    infid,
                )
            )
    return DetectionTable(entries)


def enumerate_pair_faults(c: Circuit, outputs: list[int]) -> PairSummary:
    """Exhaustively classify all Z fault pairs on the T-type sites."""
    harness = _Harness(c, outputs)
    sites = harness.tprep_sites()
    harmful = detected = harmless = 0
    for a in range(len(sites)):
        for b in range(a + 1, len(sites)):
            faults = [
                (sites[a][0], "Z", sites[a][1]),
                (sites[b][0], "Z", sites[b][1]),
            ]
            acc, infid = harness.run_exact(faults)
            if acc < DETECTED_ACCEPTANCE:
                detected += 1
            elif infid < HARMFUL_INFIDELITY:
                harmless += 1
            else:
                harmful += 1
    total = len(sites) * (len(sites) - 1) // 2
    return PairSummary(total, harmful, detected, harmless)


# ---------------------------------------------------------------------------
# first-order oracle and Monte Carlo
# ---------------------------------------------------------------------------


@dataclass
class FirstOrderReport:
    coefficient: float
    table: DetectionTable
    idle_round_increment: float

    def to_dict(self) -> dict:
        return {
            "coefficient": self.coefficient,
            "idle_round_increment": self.idle_round_increment,
            "faults": self.table.to_dict(),
        }


def first_order_oracle(c: Circuit, outputs: list[int], nm: NoiseModel) -> FirstOrderReport:
    """Exact first-order coefficient of p_L in the postselected infidelity.

    Enumerates every end-of-round depolarizing fault (X, Y, Z at weight 1/3)
    and sums acceptance-weighted infidelities; this is the derivative of the
    Monte Carlo estimate at p_L -> 0 for fixed t_decode.
    """
    harness = _Harness(c, outputs, nm.t_decode)
    entries = []
    coeff = 0.0
    idle_increment = 0.0
    for rnd_idx, pos, qubit in harness.depolarizing_sites():
        for pauli in ("X", "Y", "Z"):
            acc, infid = harness.run_exact([(pos, pauli, qubit)])
            entries.append(
                FaultRecord(FaultLocation(pos, qubit, pauli, rnd_idx), acc, infid)
            )
            contribution = acc * infid / 3.0
            coeff += contribution
            if harness.rounds[rnd_idx].label == "decode-idle":
                idle_increment += contribution
    n_idle = sum(1 for rnd in harness.rounds if rnd.label == "decode-idle")
    per_idle = idle_increment / n_idle if n_idle else 0.0
    return FirstOrderReport(coeff, DetectionTable(entries), per_idle)


@dataclass
class AnalysisReport:
    shots: int
    accepted: int
    acceptance: float
    infidelity: float | None
    stderr: float | None
    p_l: float
    p_t: float
    t_decode: int
    seed: int
    undefined: bool = False
    rounds: tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "shots": self.shots,
            "accepted": self.accepted,
            "acceptance": self.acceptance,
            "infidelity": self.infidelity,
            "stderr": self.stderr,
            "p_l": self.p_l,
            "p_t": self.p_t,
            "t_decode": self.t_decode,
            "seed": self.seed,
            "undefined": self.undefined,
            "rounds": list(self.rounds),
        }


def monte_carlo_infidelity(
    c: Circuit,
    outputs: list[int],
    nm: NoiseModel,
    shots: int,
    seed: int = 0,
    batch: int = 1 << 16,
) -> AnalysisReport:
    """Monte Carlo estimate of the postselected output infidelity.

    Per shot: Z faults on each |T> preparation at p_t, then depolarizing
    faults at p_l on every live qubit at the end of every later round
    (decode idles included); trajectories whose detection outcomes differ
    from the noiseless reference are discarded.
    """
    if shots < 1:
        raise FaultAnalysisError("needs at least one shot")
    harness = _Harness(c, outputs, nm.t_decode)
    prep_sites = [
        (pos, q)
        for pos, q in harness.tprep_sites()
        if c.gates[pos].kind in ("PrepT", "PrepTdag")
    ]
    depol_sites = harness.depolarizing_sites()
    n_meas = len(harness.meas_order)
    rng = np.random.default_rng(seed)
    paulis = ("X", "Y", "Z")

    accepted = 0
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < shots:
        b = min(batch, shots - done)
        prep_mask = rng.random((b, len(prep_sites))) < nm.p_t
        depol_mask = rng.random((b, len(depol_sites))) < nm.p_l
        pauli_pick = rng.integers(0, 3, size=(b, len(depol_sites)))
        uniforms = rng.random((b, n_meas))
        faulty = np.nonzero(prep_mask.any(axis=1) | depol_mask.any(axis=1))[0]
        accepted += b - len(faulty)  # clean shots pass with zero infidelity
        for row in faulty:
            fault_map: dict[int, list[tuple[str, int]]] = {}
            for col in np.nonzero(prep_mask[row])[0]:
                pos, q = prep_sites[col]
                fault_map.setdefault(pos, []).append(("Z", q))
            for col in np.nonzero(depol_mask[row])[0]:
                _, pos, q = depol_sites[col]
                fault_map.setdefault(pos, []).append((paulis[pauli_pick[row, col]], q))
            ok, infid = harness.run_sampled(fault_map, uniforms[row])
            if ok:
                accepted += 1
                total += infid
                total_sq += infid * infid
        done += b

    if accepted == 0:
        return AnalysisReport(
            shots, 0, 0.0, None, None, nm.p_l, nm.p_t, nm.t_decode, seed,
            undefined=True, rounds=tuple(r.label for r in harness.rounds),
        )
    mean = total / accepted
    var = max(total_sq / accepted - mean * mean, 0.0)
    stderr = math.sqrt(var / accepted)
    return AnalysisReport(
        shots,
        accepted,
        accepted / shots,
        mean,
        stderr,
        nm.p_l,
        nm.p_t,
        nm.t_decode,
        seed,
        rounds=tuple(r.label for r in harness.rounds),
    )


# ---------------------------------------------------------------------------
# spacetime cost model
# ---------------------------------------------------------------------------


def spacetime_cost(
    d: int, rounds: int = 7, patches: int = 8, qubits_per_patch_factor: int = 3
) -> int:
    """Qubit-cycles for the transversal-CNOT implementation: rounds x patches
    x (factor d^2) physical qubits per logical patch."""
    if d < 1:
        raise FaultAnalysisError("distance must be >= 1")
    return rounds * patches * qubits_per_patch_factor * d * d


def surgery_baseline_cost(
    d: int, logical_qubits: int = 18, cycles_per_d: float = 8.5,
    qubits_per_patch_factor: int = 3,
) -> float:
    """Planar lattice-surgery reference: qubit-cycles for the same task."""
    return logical_qubits * qubits_per_patch_factor * d * d * cycles_per_d * d
