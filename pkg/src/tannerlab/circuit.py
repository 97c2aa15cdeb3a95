"""Noisy Clifford circuits: text format, validation, memory-experiment builder.

Circuits are flat instruction sequences in a stim-like dialect. The memory
builder lays out one syndrome-extraction cycle per code distance run,
inserting the four-rate depolarizing noise model between moments.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .codes import CodeError, StabilizerCode

GATE_NAMES = frozenset(
    ["R", "RX", "H", "CX", "M", "MR", "TICK", "X_ERROR", "Z_ERROR",
     "DEPOLARIZE1", "DEPOLARIZE2", "DETECTOR", "OBSERVABLE_INCLUDE"]
)
NOISE_NAMES = frozenset(["X_ERROR", "Z_ERROR", "DEPOLARIZE1", "DEPOLARIZE2"])
TWO_QUBIT = frozenset(["CX", "DEPOLARIZE2"])


class CircuitError(ValueError):
    """Syntax or consistency error, carrying a line number when parsing."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        prefix = ""
        if line is not None:
            prefix = f"line {line}"
            if column is not None:
                prefix += f", col {column}"
            prefix += ": "
        super().__init__(prefix + message)


@dataclass(frozen=True)
class Instruction:
    name: str
    targets: tuple[int, ...] = ()
    arg: float | None = None

    def __post_init__(self):
        if self.name not in GATE_NAMES:
            raise CircuitError(f"unknown instruction {self.name!r}")


@dataclass(frozen=True)
class NoiseProfile:
    """Four-rate circuit noise: idle/gate depolarizing, reset and readout flips."""

    p_idle: float = 0.0
    p_gate: float = 0.0
    p_reset: float = 0.0
    p_meas: float = 0.0

    def __post_init__(self):
        for name in ("p_idle", "p_gate", "p_reset", "p_meas"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise CircuitError(f"{name}={p} outside [0, 1]")

    @classmethod
    def uniform(cls, p: float, p_reset: float | None = None) -> "NoiseProfile":
        return cls(p_idle=p, p_gate=p, p_reset=p if p_reset is None else p_reset, p_meas=p)


@dataclass(frozen=True)
class MemoryLayout:
    """How a memory circuit's records map onto checks, labels, and cycles."""

    basis: str
    n_data: int
    n_checks: int
    k: int
    cycles: int
    check_supports: tuple[tuple[int, ...], ...]
    logical_supports: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class NoisyCircuit:
    instructions: tuple[Instruction, ...]
    qubit_count: int
    measurement_count: int
    cycle_boundaries: tuple[int, ...] = field(default=(), compare=False)
    layout: MemoryLayout | None = field(default=None, compare=False)

    def __post_init__(self):
        _validate_stream(self.instructions)

    @property
    def detector_count(self) -> int:
        return sum(1 for ins in self.instructions if ins.name == "DETECTOR")

    @property
    def observable_count(self) -> int:
        obs = [int(ins.arg) for ins in self.instructions if ins.name == "OBSERVABLE_INCLUDE"]
        return max(obs) + 1 if obs else 0

    def segments(self) -> list[tuple[int, int]]:
        """(start, end) instruction ranges: one per cycle plus the readout tail."""
        if not self.cycle_boundaries:
            return [(0, len(self.instructions))]
        spans = []
        start = 0
        for b in self.cycle_boundaries:
            spans.append((start, b))
            start = b
        spans.append((start, len(self.instructions)))
        return spans

    def detectors_per_segment(self) -> list[int]:
        counts = []
        for start, end in self.segments():
            counts.append(
                sum(1 for ins in self.instructions[start:end] if ins.name == "DETECTOR")
            )
        return counts


def _validate_stream(instructions: tuple[Instruction, ...]):
    n_meas = 0
    for idx, ins in enumerate(instructions):
        if ins.name in NOISE_NAMES:
            if ins.arg is None or not (0.0 <= ins.arg <= 1.0):
                raise CircuitError(f"instruction {idx}: probability {ins.arg} outside [0, 1]")
        if ins.name in TWO_QUBIT and len(ins.targets) % 2:
            raise CircuitError(f"instruction {idx}: {ins.name} needs an even target count")
        if ins.name in ("M", "MR"):
            n_meas += len(ins.targets)
        if ins.name in ("DETECTOR", "OBSERVABLE_INCLUDE"):
            if ins.name == "OBSERVABLE_INCLUDE" and (ins.arg is None or ins.arg < 0):
                raise CircuitError(f"instruction {idx}: observable index missing")
            for off in ins.targets:
                if off >= 0 or -off > n_meas:
                    raise CircuitError(
                        f"instruction {idx}: rec[{off}] references a nonexistent measurement"
                    )


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------


def emit_circuit_text(circuit: NoisyCircuit) -> str:
    lines = []
    for ins in circuit.instructions:
        if ins.name == "TICK":
            lines.append("TICK")
        elif ins.name == "DETECTOR":
            recs = " ".join(f"rec[{off}]" for off in ins.targets)
            lines.append(f"DETECTOR {recs}".rstrip())
        elif ins.name == "OBSERVABLE_INCLUDE":
            recs = " ".join(f"rec[{off}]" for off in ins.targets)
            lines.append(f"OBSERVABLE_INCLUDE({int(ins.arg)}) {recs}".rstrip())
        elif ins.name in NOISE_NAMES:
            tgts = " ".join(str(t) for t in ins.targets)
            lines.append(f"{ins.name}({ins.arg!r}) {tgts}")
        else:
            tgts = " ".join(str(t) for t in ins.targets)
            lines.append(f"{ins.name} {tgts}".rstrip())
    return "\n".join(lines) + "\n"


def parse_circuit_text(text: str) -> NoisyCircuit:
    instructions: list[Instruction] = []
    n_meas = 0
    max_qubit = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        name = head
        arg: float | None = None
        if "(" in head:
            name, _, argpart = head.partition("(")
            if not argpart.endswith(")"):
                raise CircuitError("unterminated argument", lineno, len(head))
            try:
                arg = float(argpart[:-1])
            except ValueError:
                raise CircuitError(f"bad argument {argpart[:-1]!r}", lineno, len(name) + 1)
        if name not in GATE_NAMES:
            raise CircuitError(f"unknown instruction {name!r}", lineno, 1)

        tokens = rest.split()
        if name in ("DETECTOR", "OBSERVABLE_INCLUDE"):
            offsets = []
            for tok in tokens:
                if not (tok.startswith("rec[") and tok.endswith("]")):
                    raise CircuitError(f"expected rec[-k], got {tok!r}", lineno)
                try:
                    off = int(tok[4:-1])
                except ValueError:
                    raise CircuitError(f"bad record offset in {tok!r}", lineno)
                if off >= 0:
                    raise CircuitError(f"record offset must be negative: {tok}", lineno)
                if -off > n_meas:
                    raise CircuitError(
                        f"rec[{off}] references a nonexistent measurement", lineno
                    )
                offsets.append(off)
            instructions.append(Instruction(name, tuple(offsets), arg))
            continue

        targets = []
        for tok in tokens:
            try:
                t = int(tok)
            except ValueError:
                raise CircuitError(f"bad qubit target {tok!r}", lineno)
            if t < 0:
                raise CircuitError(f"negative qubit target {t}", lineno)
            targets.append(t)
            max_qubit = max(max_qubit, t)
        if name in NOISE_NAMES and arg is None:
            raise CircuitError(f"{name} requires a probability argument", lineno)
        if name in NOISE_NAMES and not (0.0 <= arg <= 1.0):
            raise CircuitError(f"probability {arg} outside [0, 1]", lineno)
        if name in TWO_QUBIT and len(targets) % 2:
            raise CircuitError(f"{name} needs an even number of targets", lineno)
        if name in ("M", "MR"):
            n_meas += len(targets)
        instructions.append(Instruction(name, tuple(targets), arg))

    return NoisyCircuit(
        instructions=tuple(instructions),
        qubit_count=max_qubit + 1,
        measurement_count=n_meas,
    )


# ---------------------------------------------------------------------------
# Memory experiment builder
# ---------------------------------------------------------------------------


def _greedy_cx_layers(
    pairs: list[tuple[int, int]],
) -> list[list[tuple[int, int]]]:
    """Greedy conflict-free layering of CX gates (deterministic)."""
    layers: list[list[tuple[int, int]]] = []
    busy: list[set[int]] = []
    for c, t in pairs:
        placed = False
        for layer, used in zip(layers, busy):
            if c not in used and t not in used:
                layer.append((c, t))
                used.update((c, t))
                placed = True
                break
        if not placed:
            layers.append([(c, t)])
            busy.append({c, t})
    return layers


def _surface_zigzag_layers(
    code: StabilizerCode, supports, types, ancilla_of
) -> list[list[tuple[int, int]]] | None:
    """Hook-avoiding 4-layer schedule for the rotated surface code."""
    d = int(round(code.n ** 0.5))
    if d * d != code.n:
        return None

    def coord(q):
        return divmod(q, d)

    layers: list[list[tuple[int, int]]] = [[] for _ in range(4)]
    x_order = [(0, 0), (0, 1), (1, 0), (1, 1)]  # NW, NE, SW, SE
    z_order = [(0, 0), (1, 0), (0, 1), (1, 1)]  # NW, SW, NE, SE
    for ci, (sup, typ) in enumerate(zip(supports, types)):
        anc = ancilla_of[ci]
        coords = [coord(q) for q in sup]
        r0 = min(r for r, _ in coords)
        c0 = min(c for _, c in coords)
        if len(sup) == 2:
            # boundary pair: anchor the virtual plaquette off-grid
            (ra, ca), (rb, cb) = coords
            if ra == rb:  # horizontal pair, top or bottom boundary
                r0 = ra if ra == d - 1 else ra - 1
            else:  # vertical pair, left or right boundary
                c0 = ca if ca == d - 1 else ca - 1
        order = x_order if typ == "X" else z_order
        for layer_idx, (dr, dc) in enumerate(order):
            q = (r0 + dr) * d + (c0 + dc)
            if q // d == r0 + dr and q % d == c0 + dc and q in sup:
                if typ == "X":
                    layers[layer_idx].append((anc, q))
                else:
                    layers[layer_idx].append((q, anc))
    used_count = sum(len(layer) for layer in layers)
    if used_count != sum(len(s) for s in supports):
        return None
    for layer in layers:
        seen = set()
        for c, t in layer:
            if c in seen or t in seen:
                return None
            seen.update((c, t))
    return [sorted(layer) for layer in layers]


def build_memory_circuit(
    code: StabilizerCode,
    cycles: int,
    basis: str = "Z",
    noise: NoiseProfile | None = None,
) -> NoisyCircuit:
    """T-cycle quantum memory circuit with noiseless final data readout.

    Per cycle: ancilla reset, basis change on X-check ancillas, a
    conflict-free CX ladder, ancilla measurement; detectors compare
    consecutive rounds (round 1 against the deterministic reference).
    The final segment measures data qubits perfectly, recomputes every
    check classically, and declares the k logical observables.
    """
    if cycles < 1:
        raise CircuitError(f"cycles must be >= 1, got {cycles}")
    if basis not in ("X", "Z"):
        raise CircuitError("basis must be 'X' or 'Z'")
    if not code.is_css():
        raise CircuitError("memory circuits require a CSS code")
    noise = noise or NoiseProfile()

    z_checks = code.z_checks()
    x_checks = code.x_checks()
    supports = [p.support for p in z_checks] + [p.support for p in x_checks]
    types = ["Z"] * len(z_checks) + ["X"] * len(x_checks)
    n_checks = len(supports)
    n = code.n
    ancilla_of = [n + i for i in range(n_checks)]
    all_qubits = list(range(n + n_checks))
    x_ancillas = [ancilla_of[i] for i, t in enumerate(types) if t == "X"]

    logicals = code.logical_z if basis == "Z" else code.logical_x
    logical_supports = tuple(p.support for p in logicals)

    layers = None
    if code.family_tag == "surface":
        layers = _surface_zigzag_layers(code, supports, types, ancilla_of)
    if layers is None:
        pairs = []
        for ci, (sup, typ) in enumerate(zip(supports, types)):
            anc = ancilla_of[ci]
            for q in sup:
                pairs.append((q, anc) if typ == "Z" else (anc, q))
        layers = _greedy_cx_layers(pairs)

    ins: list[Instruction] = []
    boundaries: list[int] = []
    record_index = 0
    check_records: list[list[int]] = [[] for _ in range(n_checks)]

    def moment(gate_qubits: set[int], noisy: bool = True):
        if noisy and noise.p_idle > 0:
            idle = sorted(set(all_qubits) - gate_qubits)
            if idle:
                ins.append(Instruction("DEPOLARIZE1", tuple(idle), noise.p_idle))
        ins.append(Instruction("TICK"))

    for t in range(cycles):
        # reset moment (data qubits initialized in cycle 1)
        reset_targets = list(ancilla_of)
        if t == 0:
            reset_targets = list(range(n)) + reset_targets
        ins.append(Instruction("R", tuple(reset_targets)))
        if noise.p_reset > 0:
            ins.append(Instruction("X_ERROR", tuple(reset_targets), noise.p_reset))
        moment(set(reset_targets))

        # basis change moment (skipped entirely for Z-check-only codes)
        h_targets = list(x_ancillas)
        if t == 0 and basis == "X":
            h_targets = list(range(n)) + h_targets
        if h_targets:
            ins.append(Instruction("H", tuple(h_targets)))
            if noise.p_gate > 0:
                ins.append(Instruction("DEPOLARIZE1", tuple(h_targets), noise.p_gate))
            moment(set(h_targets))

        # CX ladder
        for layer in layers:
            flat = tuple(q for pair in layer for q in pair)
            ins.append(Instruction("CX", flat))
            if noise.p_gate > 0:
                ins.append(Instruction("DEPOLARIZE2", flat, noise.p_gate))
            moment(set(flat))

        # undo basis change
        if x_ancillas:
            ins.append(Instruction("H", tuple(x_ancillas)))
            if noise.p_gate > 0:
                ins.append(Instruction("DEPOLARIZE1", tuple(x_ancillas), noise.p_gate))
            moment(set(x_ancillas))

        # measurement moment
        if noise.p_meas > 0:
            ins.append(Instruction("X_ERROR", tuple(ancilla_of), noise.p_meas))
        ins.append(Instruction("M", tuple(ancilla_of)))
        for ci in range(n_checks):
            check_records[ci].append(record_index + ci)
        record_index += n_checks
        moment(set(ancilla_of))

        for ci in range(n_checks):
            recs = check_records[ci]
            if t == 0:
                offs = (recs[-1] - record_index,)
            else:
                offs = (recs[-1] - record_index, recs[-2] - record_index)
            ins.append(Instruction("DETECTOR", offs))
        boundaries.append(len(ins))

    # noiseless readout segment
    if basis == "X":
        ins.append(Instruction("H", tuple(range(n))))
    ins.append(Instruction("M", tuple(range(n))))
    data_record = {q: record_index + q for q in range(n)}
    record_index += n
    for ci, sup in enumerate(supports):
        offs = tuple(data_record[q] - record_index for q in sup)
        offs += (check_records[ci][-1] - record_index,)
        ins.append(Instruction("DETECTOR", offs))
    for li, sup in enumerate(logical_supports):
        offs = tuple(data_record[q] - record_index for q in sup)
        ins.append(Instruction("OBSERVABLE_INCLUDE", offs, float(li)))

    layout = MemoryLayout(
        basis=basis,
        n_data=n,
        n_checks=n_checks,
        k=len(logical_supports),
        cycles=cycles,
        check_supports=tuple(supports),
        logical_supports=logical_supports,
    )
    return NoisyCircuit(
        instructions=tuple(ins),
        qubit_count=n + n_checks,
        measurement_count=record_index,
        cycle_boundaries=tuple(boundaries),
        layout=layout,
    )
