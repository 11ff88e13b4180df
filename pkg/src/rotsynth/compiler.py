"""Recompilation of rotation programs into minimal-T-depth circuits.

Pipeline: partition the rotations into invertible blocks, realize each block
as CX(U)^-1 (parallel phase layer) CX(U), synthesize every CNOT operator as
a qubit permutation followed by few CNOTs, merge adjacent CNOT operators,
hoist all permutations to time zero, and absorb the leading permutation and
CNOT operator into state preparation.

Matrix/gate conventions used throughout (exercised by the oracle tests):
  * CX(M) |e> = |M e> for invertible M over GF(2).
  * A CNOT gate with control c and target t is CX(I + E_{t,c}).
  * A permutation gate with wire map s (content of wire i moves to wire
    s(i)) is CX(P) with P e_i = e_{s(i)}.
"""

from __future__ import annotations

import random
import warnings
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations
from math import factorial

from .gf2 import BitVec, GF2Matrix, invert, is_invertible, is_permutation, rank
from .ir import (
    Circuit,
    CNOT_LIKE_KINDS,
    DIAG1_EXPONENT,
    Gate,
    PREP_KINDS,
    PhaseRotation,
    RotationProgram,
    phase_gates,
)

EXHAUSTIVE_LIMIT = 1_000_000

PLUS = "plus"
ZERO = "zero"


class PartitionError(ValueError):
    """No sampled ordering produced full-rank blocks."""


class SynthesisStallError(RuntimeError):
    """Greedy CNOT synthesis exceeded its iteration cap without converging."""


# ---------------------------------------------------------------------------
# CNOT synthesis (greedy row reduction to a permutation matrix)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SynthesisResult:
    """Permutation matrix plus row operations regenerating transpose(U).

    Applying `ops` in order as row operations (row j ^= row i) to `perm`
    reconstructs transpose(U) exactly.
    """

    perm: GF2Matrix
    ops: tuple[tuple[int, int], ...]


def cnot_synthesize(u: GF2Matrix) -> SynthesisResult:
    """Greedy synthesis of CX(u) into a permutation plus CNOT row operations.

    At each step every ordered pair (i, j), i != j, is scored by the sorted
    concatenation of column and row sums after row j ^= row i; the
    lexicographically smallest (score, i, j) wins. Terminates when the
    working matrix has exactly one 1 per row and column.
    """
    if not is_invertible(u):
        raise ValueError("CNOT synthesis needs an invertible matrix")
    n = u.n_rows
    rows = list(u.transpose().rows)
    ops: list[tuple[int, int]] = []
    cap = 4 * n * n

    while sum(r.bit_count() for r in rows) != n:
        if len(ops) >= cap:
            raise SynthesisStallError(
                f"no permutation reached within {cap} row operations"
            )
        row_sums = [r.bit_count() for r in rows]
        col_sums = [0] * n
        for r in rows:
            rr = r
            while rr:
                low = rr & -rr
                col_sums[low.bit_length() - 1] += 1
                rr ^= low
        best = None
        for i in range(n):
            ri = rows[i]
            for j in range(n):
                if i == j:
                    continue
                new_j = ri ^ rows[j]
                rs = list(row_sums)
                rs[j] = new_j.bit_count()
                cs = list(col_sums)
                gained = ri & ~rows[j]
                lost = ri & rows[j]
                while gained:
                    low = gained & -gained
                    cs[low.bit_length() - 1] += 1
                    gained ^= low
                while lost:
                    low = lost & -lost
                    cs[low.bit_length() - 1] -= 1
                    lost ^= low
                cand = (tuple(sorted(cs + rs)), i, j)
                if best is None or cand < best:
                    best = cand
        _, i, j = best
        rows[j] ^= rows[i]
        ops.append((i, j))

    return SynthesisResult(GF2Matrix(n, n, tuple(rows)), tuple(reversed(ops)))


def replay_row_ops(result: SynthesisResult) -> GF2Matrix:
    """Apply the returned ops to the permutation; recovers transpose(U)."""
    rows = list(result.perm.rows)
    for i, j in result.ops:
        rows[j] ^= rows[i]
    return GF2Matrix(result.perm.n_rows, result.perm.n_cols, tuple(rows))


def _perm_images(perm: GF2Matrix) -> list[int]:
    """Wire map s with s(i) = column of the 1 in row i."""
    if not is_permutation(perm):
        raise ValueError("not a permutation matrix")
    return [r.bit_length() - 1 for r in perm.rows]


def _transpositions(images: list[int]) -> list[tuple[int, int]]:
    """Transpositions t_1..t_m with t_m o ... o t_1 equal to the wire map."""
    n = len(images)
    swaps: list[tuple[int, int]] = []
    seen = [False] * n
    for start in range(n):
        if seen[start] or images[start] == start:
            seen[start] = True
            continue
        cycle = [start]
        seen[start] = True
        cur = images[start]
        while cur != start:
            cycle.append(cur)
            seen[cur] = True
            cur = images[cur]
        for node in cycle[1:]:
            swaps.append((cycle[0], node))
    return swaps


def _greedy_rows(u: GF2Matrix, score) -> tuple[list[int], list[tuple[int, int]]] | None:
    """Greedy row reduction of transpose(u) under a pluggable score function."""
    n = u.n_rows
    rows = list(u.transpose().rows)
    ops: list[tuple[int, int]] = []
    cap = 4 * n * n
    while sum(r.bit_count() for r in rows) != n:
        if len(ops) >= cap:
            return None
        row_sums = [r.bit_count() for r in rows]
        col_sums = [0] * n
        for r in rows:
            rr = r
            while rr:
                low = rr & -rr
                col_sums[low.bit_length() - 1] += 1
                rr ^= low
        best = None
        for i in range(n):
            ri = rows[i]
            for j in range(n):
                if i == j:
                    continue
                rs = list(row_sums)
                rs[j] = (ri ^ rows[j]).bit_count()
                cs = list(col_sums)
                delta = ri
                while delta:
                    low = delta & -delta
                    b = low.bit_length() - 1
                    cs[b] += -1 if (rows[j] >> b) & 1 else 1
                    delta ^= low
                cand = (score(cs, rs), i, j)
                if best is None or cand < best:
                    best = cand
        _, i, j = best
        rows[j] ^= rows[i]
        ops.append((i, j))
    return rows, ops


_SCORE_CONCAT = lambda cs, rs: tuple(sorted(cs + rs))  # noqa: E731
_SCORE_MAXSUM = lambda cs, rs: tuple(  # noqa: E731
    sorted((c + r for c, r in zip(cs, rs)), reverse=True)
)
_SCORE_TOTAL = lambda cs, rs: (sum(cs) + sum(rs),)  # noqa: E731
_EMISSION_SCORES = (_SCORE_CONCAT, _SCORE_MAXSUM, _SCORE_TOTAL)


@lru_cache(maxsize=65536)
def _synthesize_cached(u: GF2Matrix) -> tuple[tuple[int, ...], tuple[tuple[int, int], ...]]:
    """Memoized synthesis, reduced to (wire map, CNOT (control, target) list).

    The CNOT list is already conjugated through the leading permutation, so
    the circuit [perm gates for the wire map] + [CNOT gates in list order]
    realizes CX(u).
    """
    res = cnot_synthesize(u)
    images = _perm_images(res.perm)
    cnots = tuple((images[j], images[i]) for i, j in reversed(res.ops))
    return tuple(images), cnots


def _inverse_map(images: tuple[int, ...]) -> tuple[int, ...]:
    out = [0] * len(images)
    for i, img in enumerate(images):
        out[img] = i
    return tuple(out)


def _emission_variants(u: GF2Matrix):
    """Alternative (wire map, CNOT list) realizations of CX(u).

    Besides the direct greedy under several scores, the same operator can be
    realized from a synthesis of its inverse (run the circuit backwards) or
    of its transpose (reverse the gates with control/target flipped); both
    leave a trailing permutation that is folded back to the front.
    """
    for score in _EMISSION_SCORES:
        direct = _greedy_rows(u, score)
        if direct is not None:
            rows, ops = direct
            images = tuple(r.bit_length() - 1 for r in rows)
            yield images, tuple((images[j], images[i]) for i, j in ops)
    u_inv = invert(u)
    for score in _EMISSION_SCORES:
        r = _greedy_rows(u_inv, score)
        if r is not None:
            rows, ops = r
            images = tuple(rr.bit_length() - 1 for rr in rows)
            cn = [(images[j], images[i]) for i, j in ops]
            s_inv = _inverse_map(images)
            yield s_inv, tuple((s_inv[c], s_inv[t]) for c, t in reversed(cn))
    u_t = u.transpose()
    for score in _EMISSION_SCORES:
        r = _greedy_rows(u_t, score)
        if r is not None:
            rows, ops = r
            images = tuple(rr.bit_length() - 1 for rr in rows)
            cn = [(images[j], images[i]) for i, j in ops]
            s_inv = _inverse_map(images)
            yield s_inv, tuple((s_inv[t], s_inv[c]) for c, t in reversed(cn))


def _pack_cnots(pairs: tuple[tuple[int, int], ...]) -> tuple[tuple[int, int], ...]:
    """Reorder commuting CNOTs so greedy layering packs them tighter.

    Two CNOTs commute unless one's target is the other's control; gates move
    to the earliest layer compatible with every earlier non-commuting gate.
    """
    layer_of: list[int] = []
    used: list[set[int]] = []
    for idx, (c, t) in enumerate(pairs):
        lo = 0
        for j in range(idx):
            c2, t2 = pairs[j]
            if t == c2 or t2 == c:
                lo = max(lo, layer_of[j] + 1)
        level = lo
        while level < len(used) and (c in used[level] or t in used[level]):
            level += 1
        while len(used) <= level:
            used.append(set())
        used[level] |= {c, t}
        layer_of.append(level)
    order = sorted(range(len(pairs)), key=lambda i: (layer_of[i], i))
    return tuple(pairs[i] for i in order)


def _cnot_layers(pairs) -> int:
    free: dict[int, int] = {}
    depth = 0
    for c, t in pairs:
        layer = max(free.get(c, 0), free.get(t, 0))
        free[c] = free[t] = layer + 1
        depth = max(depth, layer + 1)
    return depth


def _layer_moves(n: int) -> list[tuple[tuple[int, int], ...]]:
    pairs = [(c, t) for c in range(n) for t in range(n) if c != t]
    moves: list[tuple[tuple[int, int], ...]] = [(p,) for p in pairs]
    for a in range(len(pairs)):
        for b in range(a + 1, len(pairs)):
            if not set(pairs[a]) & set(pairs[b]):
                moves.append((pairs[a], pairs[b]))
    return moves


_DEPTH_TABLES: dict[int, tuple[dict, dict]] = {}


def _depth_table(n: int) -> tuple[dict, dict]:
    """(depth, count)-optimal realizations of every CX operator on n qubits.

    Multi-source Dijkstra from all permutation matrices, moves = parallel
    CNOT layers. Feasible for n <= 4 (|GL(4,2)| = 20160).
    """
    if n in _DEPTH_TABLES:
        return _DEPTH_TABLES[n]
    import heapq

    moves = _layer_moves(n)
    best: dict[tuple[int, ...], tuple[int, int]] = {}
    prev: dict[tuple[int, ...], tuple[tuple[int, ...], tuple] | None] = {}
    heap = []
    counter = 0
    for images in permutations(range(n)):
        rows = [0] * n
        for col, row in enumerate(images):
            rows[row] |= 1 << col
        state = tuple(rows)
        best[state] = (0, 0)
        prev[state] = None
        heap.append((0, 0, counter, state))
        counter += 1
    heapq.heapify(heap)
    while heap:
        depth, count, _, state = heapq.heappop(heap)
        if best[state] < (depth, count):
            continue
        for move in moves:
            rows = list(state)
            for c, t in move:
                rows[t] ^= rows[c]
            nxt = tuple(rows)
            cand = (depth + 1, count + len(move))
            if nxt not in best or cand < best[nxt]:
                best[nxt] = cand
                prev[nxt] = (state, move)
                counter += 1
                heapq.heappush(heap, (cand[0], cand[1], counter, nxt))
    _DEPTH_TABLES[n] = (best, prev)
    return best, prev


def _table_realization(u: GF2Matrix) -> tuple[tuple[int, ...], tuple[tuple[int, int], ...]]:
    _, prev = _depth_table(u.n_rows)
    state = tuple(u.rows)
    layers = []
    while prev[state] is not None:
        state, move = prev[state]
        layers.append(move)
    layers.reverse()
    # start state is a permutation matrix P with P e_col = e_row
    images = [0] * u.n_rows
    for row, bits in enumerate(state):
        images[bits.bit_length() - 1] = row
    cnots = tuple(pair for move in layers for pair in move)
    return tuple(images), cnots


DEPTH_OPT_LIMIT = 4


@lru_cache(maxsize=65536)
def _realize_cx(u: GF2Matrix, depth_opt: bool) -> tuple[tuple[int, ...], tuple[tuple[int, int], ...]]:
    """Wire map + CNOT list realizing CX(u): permutation gates first.

    With depth_opt, operators on up to DEPTH_OPT_LIMIT qubits are realized
    depth-optimally from a precomputed table; larger ones take the best of
    several greedy emission variants. Without it, the canonical synthesis is
    used as is (commutation packing only, which never changes the count).
    """
    if not depth_opt:
        images, cnots = _synthesize_cached(u)
        return images, _pack_cnots(cnots)
    if u.n_rows <= DEPTH_OPT_LIMIT:
        return _table_realization(u)
    best = None
    for idx, (images, cnots) in enumerate(_emission_variants(u)):
        packed = _pack_cnots(cnots)
        key = (_cnot_layers(packed), len(packed), idx)
        if best is None or key < best[0]:
            best = (key, images, packed)
    if best is None:
        raise SynthesisStallError("all emission variants stalled")
    return best[1], best[2]


def synthesis_gates(u: GF2Matrix, depth_opt: bool = True) -> tuple[Gate, ...]:
    """Gate realization of CX(u): leading SWAPs then two-qubit CNOTs."""
    images, cnots = _realize_cx(u, depth_opt)
    gates = [Gate("SWAP", pair) for pair in _transpositions(list(images))]
    gates.extend(Gate("CNOT", pair) for pair in cnots)
    return tuple(gates)


def _inverse_gates(gates: tuple[Gate, ...]) -> tuple[Gate, ...]:
    # CNOT and SWAP are self-inverse; reversing the list inverts the block
    return tuple(reversed(gates))


# ---------------------------------------------------------------------------
# block parallelization and reference expansion
# ---------------------------------------------------------------------------


def parallelize_block(u: GF2Matrix, exponents: list[int], depth_opt: bool = True) -> Circuit:
    """Realize a block of independent rotations (supports = columns of u,
    exponent i routed to qubit i) as CX(u), parallel phases, CX(u)^-1."""
    if u.n_rows != u.n_cols:
        raise ValueError("parity matrix must be square")
    if not is_invertible(u):
        raise ValueError("parity matrix must be invertible")
    n = u.n_rows
    if len(exponents) != n:
        raise ValueError("need one exponent per qubit")
    # qubit i must hold the parity (column i of u) . e, i.e. bit i of u^T e
    forward = synthesis_gates(u.transpose(), depth_opt)
    gates = list(forward)
    for q, k in enumerate(exponents):
        gates.extend(phase_gates(k, q))
    gates.extend(_inverse_gates(forward))
    return Circuit(n, tuple(gates))


def expand_reference(p: RotationProgram) -> Circuit:
    """Baseline expansion of a program into CNOT-conjugated parity gadgets.

    Independent of the optimizing pipeline; used as the reference side of
    equivalence checks.
    """
    gates: list[Gate] = []
    for rot in p.rotations:
        if rot.k % 8 == 0:
            continue
        qs = rot.support.support()
        pivot = qs[-1]
        chain = [Gate("CNOT", (q, pivot)) for q in qs[:-1]]
        gates.extend(chain)
        gates.extend(phase_gates(rot.k, pivot))
        gates.extend(reversed(chain))
    return Circuit(p.n, tuple(gates))


# ---------------------------------------------------------------------------
# circuit passes: merge, hoist, absorb, normal form
# ---------------------------------------------------------------------------


def _linear_matrix(gates: list[Gate], n: int) -> GF2Matrix:
    """Basis action of a CNOT/SWAP run: returns M with run|e> = |M e>."""
    rows = list(GF2Matrix.identity(n).rows)
    for g in gates:
        if g.kind == "CNOT":
            c, t = g.qubits
            rows[t] ^= rows[c]
        else:  # SWAP
            a, b = g.qubits
            rows[a], rows[b] = rows[b], rows[a]
    return GF2Matrix(n, n, tuple(rows))


def merge_adjacent_blocks(c: Circuit, depth_opt: bool = True) -> Circuit:
    """Collapse each maximal CNOT/SWAP run into one synthesized CX operator."""
    out: list[Gate] = []
    run: list[Gate] = []

    def flush():
        if not run:
            return
        m = _linear_matrix(run, c.n)
        if m != GF2Matrix.identity(c.n):
            out.extend(synthesis_gates(m, depth_opt))
        run.clear()

    for g in c.gates:
        if g.kind in CNOT_LIKE_KINDS:
            run.append(g)
        else:
            flush()
            out.append(g)
    flush()
    return Circuit(c.n, tuple(out))


def _compose_maps(outer: list[int], inner: list[int]) -> list[int]:
    """Wire map of (inner first, then outer)."""
    return [outer[inner[i]] for i in range(len(inner))]


def hoist_permutations(c: Circuit) -> Circuit:
    """Move every SWAP to time zero, relabeling the gates they pass through."""
    n = c.n
    tau = list(range(n))
    emitted: list[Gate] = []
    for g in c.gates:
        if g.kind == "SWAP":
            a, b = g.qubits
            swap = list(range(n))
            swap[a], swap[b] = b, a
            emitted = [
                Gate(e.kind, tuple(swap[q] for q in e.qubits), e.record)
                for e in emitted
            ]
            tau = _compose_maps(swap, tau)
        else:
            emitted.append(g)
    lead = [Gate("SWAP", pair) for pair in _transpositions(tau)]
    return Circuit(n, tuple(lead) + tuple(emitted))


def absorb_into_prep(c: Circuit, prep: list[str] | None = None) -> Circuit:
    """Fold the leading permutation, CNOT operator and phase layer into state
    preparation.

    `prep` assigns each qubit "plus" or "zero" (default all "plus"). The
    leading SWAPs are deleted by permuting the preparation assignment; leading
    CNOTs that act trivially on the prepared product state are deleted; each
    qubit's leading run of single-qubit phases on |+> becomes a magic-state
    preparation (odd exponents) or an explicit phase gate (even exponents).
    """
    n = c.n
    prep = list(prep) if prep is not None else [PLUS] * n
    if len(prep) != n or set(prep) - {PLUS, ZERO}:
        raise ValueError(f"prep must assign '{PLUS}' or '{ZERO}' to each of {n} qubits")
    if any(g.kind in PREP_KINDS for g in c.gates):
        warnings.warn("circuit already contains preparations; absorb skipped")
        return c

    gates = list(c.gates)
    pos = 0
    # leading permutation: delete it and permute the preparation assignment
    tau = list(range(n))
    while pos < len(gates) and gates[pos].kind == "SWAP":
        a, b = gates[pos].qubits
        swap = list(range(n))
        swap[a], swap[b] = b, a
        tau = _compose_maps(swap, tau)
        pos += 1
    inv_tau = [0] * n
    for i, img in enumerate(tau):
        inv_tau[img] = i
    state = [prep[inv_tau[q]] for q in range(n)]

    # leading CNOTs: a control on |0> or a |+>,|+> pair acts trivially
    kept_cnots: list[Gate] = []
    while pos < len(gates) and gates[pos].kind == "CNOT":
        ctrl, tgt = gates[pos].qubits
        if state[ctrl] == ZERO or (state[ctrl] == PLUS and state[tgt] == PLUS):
            pass
        else:
            kept_cnots.append(gates[pos])
            state[ctrl] = state[tgt] = "dirty"
        pos += 1

    # per-qubit leading phase runs on still-product qubits
    absorbed_k = [0] * n
    started = [state[q] == "dirty" for q in range(n)]
    rest: list[Gate] = []
    for g in gates[pos:]:
        q = g.qubits[0]
        if (
            g.kind in DIAG1_EXPONENT
            and len(g.qubits) == 1
            and not started[q]
        ):
            absorbed_k[q] = (absorbed_k[q] + DIAG1_EXPONENT[g.kind]) % 8
        else:
            for q in g.qubits:
                started[q] = True
            rest.append(g)

    out: list[Gate] = []
    for q in range(n):
        if state[q] == "dirty":
            out.append(Gate("PrepPlus" if prep[inv_tau[q]] == PLUS else "PrepZero", (q,)))
            continue
        if state[q] == ZERO:
            out.append(Gate("PrepZero", (q,)))  # phases act trivially on |0>
            continue
        k = absorbed_k[q]
        if k % 2 == 1:
            out.append(Gate("PrepT", (q,)))
            correction = {1: (), 3: ("S",), 5: ("Z",), 7: ("X",)}[k]
            out.extend(Gate(kind, (q,)) for kind in correction)
        else:
            out.append(Gate("PrepPlus", (q,)))
            out.extend(phase_gates(k, q))
    out.extend(kept_cnots)
    out.extend(rest)
    return Circuit(n, tuple(out))


def eliminate_tdag(c: Circuit) -> Circuit:
    """Rewrite Tdag as X T X and PrepTdag as PrepT X (phases dropped)."""
    gates: list[Gate] = []
    for g in c.gates:
        if g.kind == "Tdag":
            q = g.qubits[0]
            gates += [Gate("X", (q,)), Gate("T", (q,)), Gate("X", (q,))]
        elif g.kind == "PrepTdag":
            q = g.qubits[0]
            gates += [Gate("PrepT", (q,)), Gate("X", (q,))]
        else:
            gates.append(g)
    return Circuit(c.n, tuple(gates))


# ---------------------------------------------------------------------------
# partitioning and the full pipeline
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Partition:
    """Rotations regrouped into invertible blocks plus a residual tail."""

    blocks: tuple[GF2Matrix, ...]
    exponent_maps: tuple[tuple[int, ...], ...]
    residual: tuple[PhaseRotation, ...]
    ordering: tuple[int, ...]
    orderings_tried: int


@dataclass(frozen=True)
class CompileReport:
    circuit: Circuit
    t_depth: int
    cnot_depth: int
    cnot_count: int
    t_count: int
    orderings_tried: int
    seed: int
    budget: int
    objective: str
    partition: Partition | None


def _pad_residual(residual: list[PhaseRotation], n: int) -> tuple[GF2Matrix, tuple[int, ...]] | None:
    """Extend independent residual supports to a basis with identity columns."""
    if not residual:
        return None
    cols = [r.support for r in residual]
    mat = GF2Matrix.from_cols(cols)
    if rank(mat) != len(cols):
        return None
    ks = [r.k for r in residual]
    for i in range(n):
        if len(cols) == n:
            break
        cand = cols + [BitVec.basis(n, i)]
        if rank(GF2Matrix.from_cols(cand)) == len(cand):
            cols = cand
            ks.append(0)
    if len(cols) != n:
        return None
    return GF2Matrix.from_cols(cols), tuple(ks)


def _split_ordering(
    p: RotationProgram, order: tuple[int, ...]
) -> tuple[list[GF2Matrix], list[tuple[int, ...]], list[PhaseRotation]] | None:
    """Cut an ordering into invertible n-blocks; None if any block is singular."""
    n, m = p.n, len(p.rotations)
    rots = [p.rotations[i] for i in order]
    blocks: list[GF2Matrix] = []
    exps: list[tuple[int, ...]] = []
    for start in range(0, m - m % n, n):
        group = rots[start : start + n]
        mat = GF2Matrix.from_cols([r.support for r in group])
        if not is_invertible(mat):
            return None
        blocks.append(mat)
        exps.append(tuple(r.k for r in group))
    residual = rots[m - m % n :]
    if residual and _pad_residual(residual, n) is None:
        return None
    return blocks, exps, residual


def _all_block_matrices(
    blocks: list[GF2Matrix],
    exps: list[tuple[int, ...]],
    residual: list[PhaseRotation],
    n: int,
) -> tuple[list[GF2Matrix], list[tuple[int, ...]]]:
    full = list(blocks)
    kmaps = list(exps)
    pad = _pad_residual(residual, n)
    if pad is not None:
        full.append(pad[0])
        kmaps.append(pad[1])
    return full, kmaps


def _fast_cnot_metrics(
    us: list[GF2Matrix],
    kmaps: list[tuple[int, ...]],
    all_plus: bool,
    depth_opt: bool,
) -> tuple[int, int]:
    """(cnot_depth, cnot_count) of the merged, hoisted, absorbed pipeline.

    Mirrors the circuit passes on plain tuples; valid when the preparation is
    all |+> so the leading CNOT operator is absorbed entirely.
    """
    n = us[0].n_rows
    # a block whose phase layer is empty contributes CX(M)^-1 CX(M) = identity
    live = [u for u, ks in zip(us, kmaps) if any(k % 8 for k in ks)]
    if not live:
        return 0, 0
    ms = [u.transpose() for u in live]  # circuit-level matrices (see parallelize_block)
    merged = [ms[0]]
    for b in range(1, len(ms)):
        merged.append(ms[b] @ invert(ms[b - 1]))
    merged.append(invert(ms[-1]))

    groups: list[tuple[tuple[int, int], ...]] = []
    for w in merged:
        images, cnots = _realize_cx(w, depth_opt)
        # hoisting this block's permutation relabels every earlier gate;
        # its own CNOTs are already conjugated through it
        groups = [
            tuple((images[c], images[t]) for c, t in grp) for grp in groups
        ]
        groups.append(cnots)
    start = 1 if all_plus else 0
    free = [0] * n
    depth = 0
    count = 0
    for grp in groups[start:]:
        for ctrl, tgt in grp:
            layer = max(free[ctrl], free[tgt])
            free[ctrl] = free[tgt] = layer + 1
            depth = max(depth, layer + 1)
            count += 1
    return depth, count


def _emit_pipeline(
    us: list[GF2Matrix],
    kmaps: list[tuple[int, ...]],
    n: int,
    prep: list[str] | None,
    absorb: bool,
    depth_opt: bool = True,
) -> Circuit:
    fragment = Circuit(n)
    for u, ks in zip(us, kmaps):
        fragment = fragment.concat(parallelize_block(u, list(ks), depth_opt))
    merged = merge_adjacent_blocks(fragment, depth_opt)
    hoisted = hoist_permutations(merged)
    if not absorb:
        return hoisted
    return eliminate_tdag(absorb_into_prep(hoisted, prep))


def _candidate_orderings(m: int, budget: int, seed: int):
    identity = tuple(range(m))
    yield identity
    if budget <= 1:
        return
    if m <= 8 and factorial(m) <= EXHAUSTIVE_LIMIT:
        for order in permutations(range(m)):
            if order != identity:
                yield order
        return
    rng = random.Random(seed)
    for _ in range(budget - 1):
        order = list(range(m))
        rng.shuffle(order)
        yield tuple(order)


def partition_rotations(
    p: RotationProgram,
    budget: int = 200,
    seed: int = 0,
    objective: str = "cnot-depth",
    prep: list[str] | None = None,
) -> Partition:
    """Search orderings of the rotations for the best valid block partition.

    budget=1 compiles the program order as given. Otherwise all orderings are
    enumerated when feasible (m <= 8), or `budget` seeded samples are drawn;
    each valid candidate is scored by the chosen objective of its fully
    compiled circuit and ties break toward the earlier candidate.
    """
    if p.n < 1:
        raise PartitionError("need at least one qubit")
    if objective not in ("cnot-depth", "cnot-count"):
        raise ValueError(f"unknown objective {objective!r}")
    m = len(p.rotations)
    if m == 0:
        return Partition((), (), (), (), 0)

    all_plus = prep is None or all(s == PLUS for s in prep)
    depth_opt = objective == "cnot-depth"
    best = None
    best_key = None
    tried = 0
    for order in _candidate_orderings(m, budget, seed):
        tried += 1
        split = _split_ordering(p, order)
        if split is None:
            continue
        blocks, exps, residual = split
        us, kmaps = _all_block_matrices(blocks, exps, residual, p.n)
        if all_plus:
            depth, count = _fast_cnot_metrics(us, kmaps, all_plus=True, depth_opt=depth_opt)
        else:
            circ = _emit_pipeline(us, kmaps, p.n, prep, absorb=True, depth_opt=depth_opt)
            depth, count = circ.cnot_depth(), circ.cnot_count()
        key = depth if objective == "cnot-depth" else count
        if best_key is None or key < best_key:
            best_key = key
            best = (blocks, exps, residual, order)
    if best is None:
        raise PartitionError(
            f"no valid block partition among {tried} sampled ordering(s) "
            f"(m={m}, n={p.n})"
        )
    blocks, exps, residual, order = best
    return Partition(tuple(blocks), tuple(exps), tuple(residual), order, tried)


def compile_program(
    p: RotationProgram,
    prep: list[str] | None = None,
    budget: int = 200,
    seed: int = 0,
    objective: str = "cnot-depth",
) -> CompileReport:
    """Full pipeline: partition, parallelize, synthesize, merge, hoist, absorb."""
    if not p.rotations:
        circuit = Circuit(p.n)
        return CompileReport(circuit, 0, 0, 0, 0, 0, seed, budget, objective, None)
    part = partition_rotations(p, budget=budget, seed=seed, objective=objective, prep=prep)
    us, kmaps = _all_block_matrices(
        list(part.blocks), list(part.exponent_maps), list(part.residual), p.n
    )
    circuit = _emit_pipeline(us, kmaps, p.n, prep, absorb=True,
                             depth_opt=objective == "cnot-depth")
    return CompileReport(
        circuit=circuit,
        t_depth=circuit.t_depth(),
        cnot_depth=circuit.cnot_depth(),
        cnot_count=circuit.cnot_count(),
        t_count=circuit.t_count(),
        orderings_tried=part.orderings_tried,
        seed=seed,
        budget=budget,
        objective=objective,
        partition=part,
    )


def compile_to_unitary(
    p: RotationProgram,
    budget: int = 200,
    seed: int = 0,
    objective: str = "cnot-depth",
) -> Circuit:
    """Pipeline output before preparation absorption: a pure unitary circuit
    operator-equal to the rotation product (useful for exact oracles)."""
    part = partition_rotations(p, budget=budget, seed=seed, objective=objective)
    if not part.blocks and not part.residual:
        return Circuit(p.n)
    us, kmaps = _all_block_matrices(
        list(part.blocks), list(part.exponent_maps), list(part.residual), p.n
    )
    return _emit_pipeline(us, kmaps, p.n, None, absorb=False,
                          depth_opt=objective == "cnot-depth")
