"""Detector error models: symbolic fault propagation and flattening.

Every atomic Pauli component of every noise channel is pushed through the
remaining Clifford instructions; the detectors/observables it flips form a
mechanism. Components of one channel are mutually exclusive (probabilities
add); mechanisms from different channels combine with the odd-parity rule.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

from .circuit import CircuitError, MemoryLayout, NoisyCircuit


@dataclass(frozen=True)
class Mechanism:
    probability: float
    detectors: tuple[int, ...]
    observables: tuple[int, ...]


@dataclass(frozen=True)
class DetectorErrorModel:
    mechanisms: tuple[Mechanism, ...]
    detector_count: int
    observable_count: int
    layout: MemoryLayout | None = field(default=None, compare=False)

    def __post_init__(self):
        for m in self.mechanisms:
            if not 0.0 < m.probability <= 0.5:
                raise CircuitError(f"mechanism probability {m.probability} outside (0, 0.5]")
            if any(d >= self.detector_count or d < 0 for d in m.detectors):
                raise CircuitError("mechanism references a detector out of range")
            if any(o >= self.observable_count or o < 0 for o in m.observables):
                raise CircuitError("mechanism references an observable out of range")


def _bits_of(val: int) -> tuple[int, ...]:
    out = []
    i = 0
    while val:
        if val & 1:
            out.append(i)
        val >>= 1
        i += 1
    return tuple(out)


def merge_probability(p1: float, p2: float) -> float:
    """Odd-parity combination of two independent flip sources."""
    return p1 * (1.0 - p2) + p2 * (1.0 - p1)


_PAULI1 = ("X", "Y", "Z")
_PAULI2 = [
    (a, b)
    for a in ("I", "X", "Y", "Z")
    for b in ("I", "X", "Y", "Z")
    if not (a == "I" and b == "I")
]


def extract_dem(circuit: NoisyCircuit) -> DetectorErrorModel:
    """Flatten a noisy circuit into independent error mechanisms."""
    # Map each measurement record to the detectors/observables using it.
    n_det = 0
    rec_det: dict[int, int] = {}
    rec_obs: dict[int, int] = {}
    n_meas = 0
    for ins in circuit.instructions:
        if ins.name in ("M", "MR"):
            n_meas += len(ins.targets)
        elif ins.name == "DETECTOR":
            for off in ins.targets:
                r = n_meas + off
                rec_det[r] = rec_det.get(r, 0) ^ (1 << n_det)
            n_det += 1
        elif ins.name == "OBSERVABLE_INCLUDE":
            for off in ins.targets:
                r = n_meas + off
                rec_obs[r] = rec_obs.get(r, 0) ^ (1 << int(ins.arg))

    # Reverse walk: fx[q]/fz[q] = (detector mask, observable mask) that an
    # X/Z frame on q at the current position would flip.
    nq = circuit.qubit_count
    fx = [(0, 0)] * nq
    fz = [(0, 0)] * nq
    meas_cursor = n_meas
    channel_sigs: list[tuple[float, list[tuple[int, int]]]] = []

    def xor2(a, b):
        return (a[0] ^ b[0], a[1] ^ b[1])

    for ins in reversed(circuit.instructions):
        name = ins.name
        if name in ("M", "MR"):
            for t in reversed(ins.targets):
                meas_cursor -= 1
                if name == "MR":
                    fx[t] = (0, 0)
                    fz[t] = (0, 0)
                mask = (rec_det.get(meas_cursor, 0), rec_obs.get(meas_cursor, 0))
                fx[t] = xor2(fx[t], mask)
        elif name in ("R", "RX"):
            for t in ins.targets:
                fx[t] = (0, 0)
                fz[t] = (0, 0)
        elif name == "H":
            for t in ins.targets:
                fx[t], fz[t] = fz[t], fx[t]
        elif name == "CX":
            for i in range(0, len(ins.targets), 2):
                c, t = ins.targets[i], ins.targets[i + 1]
                fx[c] = xor2(fx[c], fx[t])
                fz[t] = xor2(fz[t], fz[c])
        elif name == "X_ERROR":
            for t in ins.targets:
                channel_sigs.append((ins.arg, [fx[t]]))
        elif name == "Z_ERROR":
            for t in ins.targets:
                channel_sigs.append((ins.arg, [fz[t]]))
        elif name == "DEPOLARIZE1":
            for t in ins.targets:
                sigs = {"X": fx[t], "Z": fz[t], "Y": xor2(fx[t], fz[t])}
                channel_sigs.append((ins.arg / 3.0, [sigs[p] for p in _PAULI1]))
        elif name == "DEPOLARIZE2":
            for i in range(0, len(ins.targets), 2):
                a, b = ins.targets[i], ins.targets[i + 1]
                single = {
                    ("X", a): fx[a], ("Z", a): fz[a], ("Y", a): xor2(fx[a], fz[a]),
                    ("X", b): fx[b], ("Z", b): fz[b], ("Y", b): xor2(fx[b], fz[b]),
                    ("I", a): (0, 0), ("I", b): (0, 0),
                }
                comps = [xor2(single[(pa, a)], single[(pb, b)]) for pa, pb in _PAULI2]
                channel_sigs.append((ins.arg / 15.0, comps))
        elif name not in ("TICK", "DETECTOR", "OBSERVABLE_INCLUDE"):
            raise CircuitError(f"unsupported instruction in DEM extraction: {name}")

    merged: dict[tuple[int, int], float] = {}
    for p_comp, comps in channel_sigs:
        if p_comp <= 0.0:
            continue
        # exclusive components of one channel with equal signature add up
        within: dict[tuple[int, int], float] = {}
        for sig in comps:
            if sig == (0, 0):
                continue
            within[sig] = within.get(sig, 0.0) + p_comp
        for sig, p in within.items():
            merged[sig] = merge_probability(merged.get(sig, 0.0), p)

    mechanisms = []
    for (dmask, omask) in sorted(merged):
        p = merged[(dmask, omask)]
        if p <= 0.0:
            continue
        if p > 0.5:
            warnings.warn(f"mechanism probability {p:.4f} > 0.5 stored as {1 - p:.4f}")
            p = 1.0 - p
            if p <= 0.0:
                continue
        mechanisms.append(Mechanism(p, _bits_of(dmask), _bits_of(omask)))

    return DetectorErrorModel(
        mechanisms=tuple(mechanisms),
        detector_count=n_det,
        observable_count=circuit.observable_count,
        layout=circuit.layout,
    )


def emit_dem_text(dem: DetectorErrorModel) -> str:
    lines = [f"# detectors {dem.detector_count} observables {dem.observable_count}"]
    for m in dem.mechanisms:
        parts = [f"error({m.probability!r})"]
        parts += [f"D{d}" for d in m.detectors]
        parts += [f"L{o}" for o in m.observables]
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def parse_dem_text(text: str) -> DetectorErrorModel:
    mechanisms = []
    max_det = -1
    max_obs = -1
    header_det = None
    header_obs = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if stripped.startswith("# detectors"):
            toks = stripped.split()
            header_det, header_obs = int(toks[2]), int(toks[4])
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not line.startswith("error("):
            raise CircuitError(f"expected error(p) line, got {line!r}", lineno)
        head, _, rest = line.partition(" ")
        try:
            p = float(head[6:-1])
        except ValueError:
            raise CircuitError(f"bad probability in {head!r}", lineno)
        dets, obs = [], []
        for tok in rest.split():
            if tok.startswith("D"):
                dets.append(int(tok[1:]))
            elif tok.startswith("L"):
                obs.append(int(tok[1:]))
            else:
                raise CircuitError(f"bad DEM target {tok!r}", lineno)
        max_det = max(max_det, *dets) if dets else max_det
        max_obs = max(max_obs, *obs) if obs else max_obs
        mechanisms.append(Mechanism(p, tuple(sorted(dets)), tuple(sorted(obs))))
    return DetectorErrorModel(
        mechanisms=tuple(mechanisms),
        detector_count=header_det if header_det is not None else max_det + 1,
        observable_count=header_obs if header_obs is not None else max_obs + 1,
    )
