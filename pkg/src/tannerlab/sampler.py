"""Pauli-frame Monte Carlo sampling and syndrome batch handling.

RNG contract: every noise channel owns a counter-based Philox stream keyed
by (seed, channel index) with a per-shot offset, so a shot's noise is
identical no matter how sampling is chunked or parallelized.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .circuit import CircuitError, NoiseProfile, NoisyCircuit, build_memory_circuit
from .codes import StabilizerCode
from .dem import DetectorErrorModel

_CHANNEL_STRIDE = 1 << 40  # max values one channel may consume per shot block


@dataclass(frozen=True)
class SyndromeBatch:
    """Detector slices plus logical-flip labels for a batch of shots.

    syndrome_bits holds the T per-cycle slices; the final readout-derived
    slice lives in readout_bits. Training batches add the per-cycle pseudo
    readout slices and labels (entry T equals the real readout).
    """

    shots: int
    cycles: int
    n_s: int
    k: int
    basis: str
    seed: int
    syndrome_bits: np.ndarray
    final_labels: np.ndarray
    readout_bits: np.ndarray | None = None
    pseudo_syndromes: np.ndarray | None = None
    pseudo_labels: np.ndarray | None = None
    raw_mode: bool = False

    def __post_init__(self):
        if self.syndrome_bits.shape != (self.shots, self.cycles, self.n_s):
            raise CircuitError(
                f"syndrome_bits shape {self.syndrome_bits.shape} != "
                f"{(self.shots, self.cycles, self.n_s)}"
            )
        if self.final_labels.shape != (self.shots, self.k):
            raise CircuitError("final_labels shape mismatch")
        if self.readout_bits is not None and self.readout_bits.shape != (self.shots, self.n_s):
            raise CircuitError("readout_bits shape mismatch")
        if self.pseudo_syndromes is not None and self.pseudo_syndromes.shape != (
            self.shots, self.cycles, self.n_s
        ):
            raise CircuitError("pseudo_syndromes shape mismatch")
        if self.pseudo_labels is not None and self.pseudo_labels.shape != (
            self.shots, self.cycles, self.k
        ):
            raise CircuitError("pseudo_labels shape mismatch")

    @property
    def is_training(self) -> bool:
        return self.pseudo_labels is not None

    def detector_matrix(self) -> np.ndarray:
        """All detector bits per shot: T*n_s cycle bits then the readout slice."""
        flat = self.syndrome_bits.reshape(self.shots, -1)
        if self.readout_bits is not None:
            flat = np.concatenate([flat, self.readout_bits], axis=1)
        return flat

    def subset(self, idx) -> "SyndromeBatch":
        pick = lambda a: None if a is None else a[idx]
        sub = pick(self.syndrome_bits)
        return replace(
            self,
            shots=sub.shape[0],
            syndrome_bits=sub,
            final_labels=pick(self.final_labels),
            readout_bits=pick(self.readout_bits),
            pseudo_syndromes=pick(self.pseudo_syndromes),
            pseudo_labels=pick(self.pseudo_labels),
        )


class _ChannelRng:
    """Counter-based per-channel uniform draws, chunk-invariant per shot.

    Philox.advance() moves the counter in 4-word blocks, so each shot is
    granted ceil(width/4) whole blocks; chunk offsets then always start
    block-aligned and shot s sees the same values in any chunking.
    """

    def __init__(self, seed: int, shot_offset: int = 0):
        self.seed = int(seed)
        self.shot_offset = int(shot_offset)
        self.channel = 0

    def uniforms(self, shots: int, width: int) -> np.ndarray:
        blocks = (width + 3) // 4
        bg = np.random.Philox(key=self.seed)
        bg.advance(self.channel * _CHANNEL_STRIDE + self.shot_offset * blocks)
        self.channel += 1
        gen = np.random.Generator(bg)
        return gen.random((shots, 4 * blocks))[:, :width]


class _FrameState:
    """Vectorized X/Z frame bits and the measurement record."""

    def __init__(self, shots: int, qubits: int, n_obs: int):
        self.x = np.zeros((shots, qubits), dtype=bool)
        self.z = np.zeros((shots, qubits), dtype=bool)
        self.records: list[np.ndarray] = []
        self.detectors: list[np.ndarray] = []
        self.observables = np.zeros((shots, n_obs), dtype=bool)


def _apply_instruction(ins, state: _FrameState, rng: _ChannelRng, shots: int):
    name = ins.name
    t = ins.targets
    if name in ("X_ERROR", "Z_ERROR", "DEPOLARIZE1", "DEPOLARIZE2") and ins.arg <= 0.0:
        return
    if name == "CX":
        for i in range(0, len(t), 2):
            c, q = t[i], t[i + 1]
            state.x[:, q] ^= state.x[:, c]
            state.z[:, c] ^= state.z[:, q]
    elif name == "H":
        cols = list(t)
        tmp = state.x[:, cols].copy()
        state.x[:, cols] = state.z[:, cols]
        state.z[:, cols] = tmp
    elif name in ("R", "RX"):
        cols = list(t)
        state.x[:, cols] = False
        state.z[:, cols] = False
    elif name in ("M", "MR"):
        for q in t:
            state.records.append(state.x[:, q].copy())
        if name == "MR":
            cols = list(t)
            state.x[:, cols] = False
            state.z[:, cols] = False
    elif name == "X_ERROR":
        flips = rng.uniforms(shots, len(t)) < ins.arg
        state.x[:, list(t)] ^= flips
    elif name == "Z_ERROR":
        flips = rng.uniforms(shots, len(t)) < ins.arg
        state.z[:, list(t)] ^= flips
    elif name == "DEPOLARIZE1":
        u = rng.uniforms(shots, len(t))
        err = u < ins.arg
        which = np.empty_like(u, dtype=np.int8)
        np.floor_divide(u, ins.arg / 3.0, out=u)
        which[:] = np.minimum(u, 2)
        cols = list(t)
        state.x[:, cols] ^= err & (which != 2)  # X or Y
        state.z[:, cols] ^= err & (which != 0)  # Y or Z
    elif name == "DEPOLARIZE2":
        pairs = [(t[i], t[i + 1]) for i in range(0, len(t), 2)]
        u = rng.uniforms(shots, len(pairs))
        err = u < ins.arg
        comp = np.minimum(np.floor_divide(u, ins.arg / 15.0), 14).astype(np.int8) + 1
        pa, pb = comp >> 2, comp & 3  # 0:I 1:X 2:Y 3:Z
        for j, (a, b) in enumerate(pairs):
            ej = err[:, j]
            state.x[:, a] ^= ej & ((pa[:, j] == 1) | (pa[:, j] == 2))
            state.z[:, a] ^= ej & ((pa[:, j] == 2) | (pa[:, j] == 3))
            state.x[:, b] ^= ej & ((pb[:, j] == 1) | (pb[:, j] == 2))
            state.z[:, b] ^= ej & ((pb[:, j] == 2) | (pb[:, j] == 3))
    elif name == "DETECTOR":
        val = np.zeros(shots, dtype=bool)
        for off in t:
            val ^= state.records[len(state.records) + off]
        state.detectors.append(val)
    elif name == "OBSERVABLE_INCLUDE":
        idx = int(ins.arg)
        for off in t:
            state.observables[:, idx] ^= state.records[len(state.records) + off]
    # TICK: no-op


def _readout_projection(circuit: NoisyCircuit, state: _FrameState) -> tuple[np.ndarray, np.ndarray]:
    """Noiseless readout-branch detectors and labels from the current frames.

    Both are pure functions of live data-qubit X frames (memory basis
    measurement flips) and the last ancilla round's records.
    """
    lay = circuit.layout
    shots = state.x.shape[0]
    n_s = lay.n_checks
    data_flip = state.z[:, : lay.n_data] if lay.basis == "X" else state.x[:, : lay.n_data]
    dets = np.zeros((shots, n_s), dtype=bool)
    for ci, sup in enumerate(lay.check_supports):
        val = np.zeros(shots, dtype=bool)
        for q in sup:
            val ^= data_flip[:, q]
        val ^= state.records[-n_s + ci]
        dets[:, ci] = val
    labels = np.zeros((shots, lay.k), dtype=bool)
    for li, sup in enumerate(lay.logical_supports):
        val = np.zeros(shots, dtype=bool)
        for q in sup:
            val ^= data_flip[:, q]
        labels[:, li] = val
    return dets, labels


def _run_circuit(
    circuit: NoisyCircuit,
    shots: int,
    seed: int,
    shot_offset: int = 0,
    fork: bool = False,
):
    state = _FrameState(shots, circuit.qubit_count, circuit.observable_count)
    rng = _ChannelRng(seed, shot_offset)
    pseudo_dets = []
    pseudo_labels = []
    segments = circuit.segments()
    cycle_ends = {end: i for i, (start, end) in enumerate(segments[:-1])}
    pos = 0
    for idx, ins in enumerate(circuit.instructions):
        _apply_instruction(ins, state, rng, shots)
        pos = idx + 1
        if fork and pos in cycle_ends:
            dets, labels = _readout_projection(circuit, state)
            pseudo_dets.append(dets)
            pseudo_labels.append(labels)
    return state, pseudo_dets, pseudo_labels


def _batch_from_state(
    circuit: NoisyCircuit,
    state: _FrameState,
    seed: int,
    basis: str,
    pseudo: tuple[list, list] | None = None,
) -> SyndromeBatch:
    shots = state.x.shape[0]
    det = (
        np.stack(state.detectors, axis=1).astype(np.uint8)
        if state.detectors
        else np.zeros((shots, 0), dtype=np.uint8)
    )
    labels = state.observables.astype(np.uint8)
    lay = circuit.layout
    if lay is not None:
        counts = circuit.detectors_per_segment()
        t_cycles = lay.cycles
        n_s = lay.n_checks
        if counts != [n_s] * t_cycles + [n_s]:
            raise CircuitError("memory circuit has non-uniform detector slices")
        syndrome = det[:, : t_cycles * n_s].reshape(shots, t_cycles, n_s)
        readout = det[:, t_cycles * n_s :]
        pseudo_syn = pseudo_lab = None
        if pseudo is not None:
            pseudo_syn = np.stack(pseudo[0], axis=1).astype(np.uint8)
            pseudo_lab = np.stack(pseudo[1], axis=1).astype(np.uint8)
        return SyndromeBatch(
            shots=shots, cycles=t_cycles, n_s=n_s, k=lay.k, basis=basis, seed=seed,
            syndrome_bits=syndrome, final_labels=labels, readout_bits=readout,
            pseudo_syndromes=pseudo_syn, pseudo_labels=pseudo_lab,
        )
    return SyndromeBatch(
        shots=shots, cycles=1, n_s=det.shape[1], k=labels.shape[1], basis=basis,
        seed=seed, syndrome_bits=det[:, None, :], final_labels=labels,
    )


def sample_pauli_frame(
    circuit: NoisyCircuit, shots: int, seed: int, shot_offset: int = 0
) -> SyndromeBatch:
    """Monte Carlo detector/observable sampling of a noisy circuit."""
    if shots < 1:
        raise CircuitError("shots must be >= 1")
    basis = circuit.layout.basis if circuit.layout else "Z"
    state, _, _ = _run_circuit(circuit, shots, seed, shot_offset)
    return _batch_from_state(circuit, state, seed, basis)


def sample_incremental(
    code: StabilizerCode,
    cycles: int,
    basis: str,
    noise: NoiseProfile,
    shots: int,
    seed: int,
    shot_offset: int = 0,
) -> SyndromeBatch:
    """Training-mode sampling: fork a noiseless readout at every cycle.

    The main branch is untouched (bit-identical to sample_pauli_frame);
    pseudo_labels[t] is the label a run stopped after cycle t would get,
    and the last fork coincides with the real readout.
    """
    circuit = build_memory_circuit(code, cycles, basis, noise)
    state, pdets, plabs = _run_circuit(circuit, shots, seed, shot_offset, fork=True)
    return _batch_from_state(circuit, state, seed, basis, pseudo=(pdets, plabs))


def sample_memory(
    code: StabilizerCode,
    cycles: int,
    basis: str,
    noise: NoiseProfile,
    shots: int,
    seed: int,
    incremental: bool = False,
    raw_syndromes: bool = False,
    shot_offset: int = 0,
) -> SyndromeBatch:
    """One-stop memory-experiment sampling used by the CLI and bench."""
    if incremental:
        batch = sample_incremental(code, cycles, basis, noise, shots, seed, shot_offset)
    else:
        circuit = build_memory_circuit(code, cycles, basis, noise)
        batch = sample_pauli_frame(circuit, shots, seed, shot_offset)
    if raw_syndromes:
        batch = to_raw_syndromes(batch)
    return batch


def to_raw_syndromes(batch: SyndromeBatch) -> SyndromeBatch:
    """Undo the temporal XOR: emit cumulative measurement values instead."""
    if batch.raw_mode:
        return batch
    raw = np.bitwise_xor.accumulate(batch.syndrome_bits, axis=1)
    readout = batch.readout_bits
    if readout is not None:
        readout = readout ^ raw[:, -1, :]
    return replace(batch, syndrome_bits=raw, readout_bits=readout, raw_mode=True)


def sample_dem(
    dem: DetectorErrorModel, shots: int, seed: int, shot_offset: int = 0
) -> SyndromeBatch:
    """Independent-Bernoulli sampling of a detector error model."""
    if shots < 1:
        raise CircuitError("shots must be >= 1")
    rng = _ChannelRng(seed, shot_offset)
    dets = np.zeros((shots, dem.detector_count), dtype=bool)
    obs = np.zeros((shots, max(dem.observable_count, 0)), dtype=bool)
    for mech in dem.mechanisms:
        fired = rng.uniforms(shots, 1)[:, 0] < mech.probability
        for d in mech.detectors:
            dets[:, d] ^= fired
        for o in mech.observables:
            obs[:, o] ^= fired
    lay = dem.layout
    det8 = dets.astype(np.uint8)
    if lay is not None and dem.detector_count == (lay.cycles + 1) * lay.n_checks:
        t, n_s = lay.cycles, lay.n_checks
        return SyndromeBatch(
            shots=shots, cycles=t, n_s=n_s, k=lay.k, basis=lay.basis, seed=seed,
            syndrome_bits=det8[:, : t * n_s].reshape(shots, t, n_s),
            final_labels=obs.astype(np.uint8), readout_bits=det8[:, t * n_s :],
        )
    return SyndromeBatch(
        shots=shots, cycles=1, n_s=dem.detector_count, k=dem.observable_count,
        basis="Z", seed=seed, syndrome_bits=det8[:, None, :],
        final_labels=obs.astype(np.uint8),
    )


# ---------------------------------------------------------------------------
# b01 batch files
# ---------------------------------------------------------------------------


def write_batch(batch: SyndromeBatch, path: str):
    """Header `b01 shots T n_s k`, then one 0/1 line per shot.

    Line layout: T*n_s cycle bits, n_s readout bits (when present),
    k label bits; training files append T*n_s pseudo-syndrome bits and
    T*k pseudo-label bits.
    """
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"b01 {batch.shots} {batch.cycles} {batch.n_s} {batch.k}\n")
        for s in range(batch.shots):
            parts = [_fmt_bits(batch.syndrome_bits[s].reshape(-1))]
            if batch.readout_bits is not None:
                parts.append(_fmt_bits(batch.readout_bits[s]))
            parts.append(_fmt_bits(batch.final_labels[s]))
            if batch.is_training:
                parts.append(_fmt_bits(batch.pseudo_syndromes[s].reshape(-1)))
                parts.append(_fmt_bits(batch.pseudo_labels[s].reshape(-1)))
            fh.write("".join(parts) + "\n")


def _fmt_bits(bits: np.ndarray) -> str:
    return "".join("1" if b else "0" for b in bits.reshape(-1))


def read_batch(path: str) -> SyndromeBatch:
    with open(path, encoding="ascii") as fh:
        header = fh.readline().split()
        if len(header) != 5 or header[0] != "b01":
            raise CircuitError(f"bad b01 header in {path}")
        shots, t, n_s, k = (int(x) for x in header[1:])
        body = t * n_s
        plain = body + k
        with_readout = body + n_s + k
        training = with_readout + body + t * k
        rows = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            if any(c not in "01" for c in line):
                raise CircuitError(f"non-bit character in {path}", lineno)
            rows.append(np.frombuffer(line.encode("ascii"), dtype=np.uint8) - ord("0"))
    if len(rows) != shots:
        raise CircuitError(f"{path}: expected {shots} shot lines, got {len(rows)}")
    mat = np.stack(rows) if rows else np.zeros((0, plain), dtype=np.uint8)
    width = mat.shape[1] if shots else plain
    if width == plain:
        readout = None
        pseudo_syn = pseudo_lab = None
        labels = mat[:, body : body + k]
    elif width == with_readout:
        readout = mat[:, body : body + n_s]
        labels = mat[:, body + n_s : body + n_s + k]
        pseudo_syn = pseudo_lab = None
    elif width == training:
        readout = mat[:, body : body + n_s]
        labels = mat[:, body + n_s : body + n_s + k]
        off = with_readout
        pseudo_syn = mat[:, off : off + body].reshape(shots, t, n_s)
        pseudo_lab = mat[:, off + body :].reshape(shots, t, k)
    else:
        raise CircuitError(f"{path}: line width {width} matches no b01 layout")
    return SyndromeBatch(
        shots=shots, cycles=t, n_s=n_s, k=k, basis="Z", seed=0,
        syndrome_bits=mat[:, :body].reshape(shots, t, n_s),
        final_labels=labels, readout_bits=readout,
        pseudo_syndromes=pseudo_syn, pseudo_labels=pseudo_lab,
    )
