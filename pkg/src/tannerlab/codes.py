"""Stabilizer code construction, validation, and extended Tanner graphs.

Covers the three code families used throughout: triangular 6.6.6 color
codes, bivariate-bicycle codes, and rotated surface codes. All binary
data is kept as numpy uint8 vectors; rank/span questions go through the
int-bitset helpers in gf2.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field

import numpy as np

from . import gf2


class CodeError(ValueError):
    """Invalid parameters or an internally inconsistent code."""


def _bits(vec) -> np.ndarray:
    arr = np.asarray(vec, dtype=np.uint8) & 1
    if arr.ndim != 1:
        raise CodeError("bit vector must be one-dimensional")
    return arr


@dataclass(frozen=True)
class PauliString:
    """n-qubit Pauli up to phase, as (x|z) symplectic bit vectors."""

    x_bits: np.ndarray
    z_bits: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x_bits", _bits(self.x_bits))
        object.__setattr__(self, "z_bits", _bits(self.z_bits))
        if self.x_bits.shape != self.z_bits.shape:
            raise CodeError("x_bits and z_bits must have equal length")

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        x = [c in "XY" for c in label]
        z = [c in "ZY" for c in label]
        if any(c not in "IXYZ" for c in label):
            raise CodeError(f"bad Pauli label {label!r}")
        return cls(np.array(x, dtype=np.uint8), np.array(z, dtype=np.uint8))

    @property
    def n(self) -> int:
        return self.x_bits.shape[0]

    @property
    def weight(self) -> int:
        return int(np.count_nonzero(self.x_bits | self.z_bits))

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.x_bits | self.z_bits))

    def symplectic(self, other: "PauliString") -> int:
        """Symplectic product: 0 if commuting, 1 if anticommuting."""
        if other.n != self.n:
            raise CodeError("length mismatch")
        return int((self.x_bits @ other.z_bits + self.z_bits @ other.x_bits) % 2)

    def commutes(self, other: "PauliString") -> bool:
        return self.symplectic(other) == 0

    def compose(self, other: "PauliString") -> "PauliString":
        return PauliString(self.x_bits ^ other.x_bits, self.z_bits ^ other.z_bits)

    def label(self) -> str:
        sym = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
        return "".join(sym[(int(x), int(z))] for x, z in zip(self.x_bits, self.z_bits))

    def is_x_type(self) -> bool:
        return not self.z_bits.any()

    def is_z_type(self) -> bool:
        return not self.x_bits.any()

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PauliString)
            and np.array_equal(self.x_bits, other.x_bits)
            and np.array_equal(self.z_bits, other.z_bits)
        )

    def __hash__(self):
        return hash((self.x_bits.tobytes(), self.z_bits.tobytes()))


def _sym_int(p: PauliString) -> int:
    """Pack (x|z) into one int: x bits low, z bits high."""
    val = 0
    for i in np.flatnonzero(p.x_bits):
        val |= 1 << int(i)
    for i in np.flatnonzero(p.z_bits):
        val |= 1 << (p.n + int(i))
    return val


def _vec_int(bits: np.ndarray) -> int:
    val = 0
    for i in np.flatnonzero(bits):
        val |= 1 << int(i)
    return val


def _int_vec(val: int, n: int) -> np.ndarray:
    out = np.zeros(n, dtype=np.uint8)
    i = 0
    while val:
        if val & 1:
            out[i] = 1
        val >>= 1
        i += 1
    return out


@dataclass(frozen=True)
class StabilizerCode:
    """[[n, k, d]] stabilizer code with logical operator representatives."""

    n: int
    k: int
    d: int | None
    stabilizers: tuple[PauliString, ...]
    logical_x: tuple[PauliString, ...]
    logical_z: tuple[PauliString, ...]
    family_tag: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "stabilizers", tuple(self.stabilizers))
        object.__setattr__(self, "logical_x", tuple(self.logical_x))
        object.__setattr__(self, "logical_z", tuple(self.logical_z))

    def is_css(self) -> bool:
        return all(p.is_x_type() or p.is_z_type() for p in self.stabilizers)

    def z_checks(self) -> list[PauliString]:
        return [p for p in self.stabilizers if p.weight and p.is_z_type()]

    def x_checks(self) -> list[PauliString]:
        return [p for p in self.stabilizers if p.weight and not p.is_z_type()]


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------


def _css_code(
    z_supports: list[tuple[int, ...]],
    x_supports: list[tuple[int, ...]],
    n: int,
    d: int | None,
    family: str,
    lz_hint: np.ndarray | None = None,
    lx_hint: np.ndarray | None = None,
    expect_k: int | None = None,
) -> StabilizerCode:
    """Assemble a CSS code from check supports; k from GF(2) rank."""
    hz = np.zeros((len(z_supports), n), dtype=np.uint8)
    for i, sup in enumerate(z_supports):
        hz[i, list(sup)] = 1
    hx = np.zeros((len(x_supports), n), dtype=np.uint8)
    for i, sup in enumerate(x_supports):
        hx[i, list(sup)] = 1

    comm = (hx @ hz.T) % 2
    if comm.any():
        raise CodeError(f"{family}: X/Z checks do not commute")

    z_rows = gf2.pack_rows(hz)
    x_rows = gf2.pack_rows(hx)
    # Z checks first, then X, dropping GF(2)-dependent rows. The X and Z
    # blocks sit in different symplectic halves, so total rank is additive.
    keep_z = gf2.independent_subset(z_rows)
    keep_x = gf2.independent_subset(x_rows)
    k = n - len(keep_z) - len(keep_x)
    if k <= 0:
        raise CodeError(f"{family}: degenerate code, k={k}")
    if expect_k is not None and k != expect_k:
        raise CodeError(f"{family}: computed k={k}, expected {expect_k}")

    zero = np.zeros(n, dtype=np.uint8)
    stabs = [PauliString(zero, hz[i]) for i in keep_z]
    stabs += [PauliString(hx[i], zero) for i in keep_x]

    lx_vecs, lz_vecs = _css_logicals(
        hx[keep_x], hz[keep_z], n, k, lx_hint=lx_hint, lz_hint=lz_hint
    )
    logical_x = tuple(PauliString(v, zero) for v in lx_vecs)
    logical_z = tuple(PauliString(zero, v) for v in lz_vecs)
    return StabilizerCode(n, k, d, tuple(stabs), logical_x, logical_z, family)


def _quotient_basis(null_basis: list[int], stab_reduced: list[int], k: int) -> list[int]:
    """k independent cosets reps: nullspace vectors mod a stabilizer span."""
    reps = []
    span = list(stab_reduced)
    for vec in sorted(null_basis, key=lambda v: (gf2.popcount(v), v)):
        work = vec
        for r in span:
            low = r & -r
            if work & low:
                work ^= r
        if work:
            reps.append(vec)
            # extend span with the reduced vector to enforce independence
            low = work & -work
            for i, r in enumerate(span):
                if r & low:
                    span[i] ^= work
            span.append(work)
            span.sort(key=lambda r: r & -r)
        if len(reps) == k:
            break
    if len(reps) != k:
        raise CodeError("failed to find a full logical basis")
    return reps


def _minimize_weight(vec: int, stab_rows: list[int]) -> int:
    """Greedy coset weight reduction to a fixpoint, deterministic order."""
    improved = True
    while improved:
        improved = False
        for s in stab_rows:
            cand = vec ^ s
            if gf2.popcount(cand) < gf2.popcount(vec):
                vec = cand
                improved = True
    return vec


def _min_weight_exhaustive(vec: int, stab_rows: list[int]) -> int:
    """Exact min-weight coset element, lexicographically smallest support."""
    best = vec
    best_key = (gf2.popcount(vec), _support_key(vec))
    for r in range(1, 1 << len(stab_rows)):
        cand = vec
        rr = r
        idx = 0
        while rr:
            if rr & 1:
                cand ^= stab_rows[idx]
            rr >>= 1
            idx += 1
        key = (gf2.popcount(cand), _support_key(cand))
        if key < best_key:
            best, best_key = cand, key
    return best


def _support_key(val: int) -> tuple[int, ...]:
    out = []
    i = 0
    while val:
        if val & 1:
            out.append(i)
        val >>= 1
        i += 1
    return tuple(out)


def _css_logicals(hx, hz, n, k, lx_hint=None, lz_hint=None):
    """(logical_x, logical_z) bit vectors with the symplectic pairing fixed."""
    x_rows = gf2.pack_rows(hx)
    z_rows = gf2.pack_rows(hz)
    x_red, _ = gf2.row_reduce(x_rows)
    z_red, _ = gf2.row_reduce(z_rows)

    # Z logicals commute with X checks: kernel of Hx, taken mod span(Hz).
    lz = _quotient_basis(gf2.nullspace(x_rows, n), z_red, k)
    lx = _quotient_basis(gf2.nullspace(z_rows, n), x_red, k)
    if lz_hint is not None:
        lz[0] = _vec_int(_bits(lz_hint))
    if lx_hint is not None:
        lx[0] = _vec_int(_bits(lx_hint))

    # Pairing: make <lx_i, lz_j> = delta_ij over GF(2).
    m_rows = []
    for i in range(k):
        row = 0
        for j in range(k):
            if gf2.popcount(lx[i] & lz[j]) & 1:
                row |= 1 << j
        m_rows.append(row)
    inv = _gf2_inverse(m_rows, k)
    if inv is None:
        raise CodeError("logical bases are not symplectically complete")
    paired = []
    for i in range(k):
        acc = 0
        for a in range(k):
            if (inv[i] >> a) & 1:
                acc ^= lx[a]
        paired.append(acc)
    lx = paired

    lz = [_minimize_weight(v, z_red) for v in lz]
    lx = [_minimize_weight(v, x_red) for v in lx]
    return [_int_vec(v, n) for v in lx], [_int_vec(v, n) for v in lz]


def _gf2_inverse(rows: list[int], k: int) -> list[int] | None:
    """Inverse of a k x k GF(2) matrix given as int rows, or None."""
    aug = [rows[i] | (1 << (k + i)) for i in range(k)]
    for col in range(k):
        piv = None
        for r in range(col, k):
            if (aug[r] >> col) & 1:
                piv = r
                break
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        for r in range(k):
            if r != col and ((aug[r] >> col) & 1):
                aug[r] ^= aug[col]
    mask = (1 << k) - 1
    return [(row >> k) & mask for row in aug]


def build_color_code(d: int) -> StabilizerCode:
    """Triangular 6.6.6 color code, n = (3d^2+1)/4, k = 1.

    Sites (r, c) with 0 <= c <= r <= 3(d-1)/2; sites with (r-2c) % 3 == 1
    are face centers, the rest are qubits. Each face acts as both an X and
    a Z check on the surrounding qubits; the logical is the bottom row.
    """
    if d < 3 or d % 2 == 0:
        raise CodeError("color code distance must be odd and >= 3")
    top = 3 * (d - 1) // 2
    qubit_index: dict[tuple[int, int], int] = {}
    centers: list[tuple[int, int]] = []
    for r in range(top + 1):
        for c in range(r + 1):
            if (r - 2 * c) % 3 == 1:
                centers.append((r, c))
            else:
                qubit_index[(r, c)] = len(qubit_index)
    n = len(qubit_index)
    if n != (3 * d * d + 1) // 4:
        raise CodeError(f"color code site count {n} != (3d^2+1)/4")

    faces = []
    for (r, c) in centers:
        ring = [(r - 1, c - 1), (r - 1, c), (r, c - 1), (r, c + 1), (r + 1, c), (r + 1, c + 1)]
        sup = tuple(sorted(qubit_index[s] for s in ring if s in qubit_index))
        faces.append(sup)

    logical = np.zeros(n, dtype=np.uint8)
    for c in range(top + 1):
        if (top, c) in qubit_index:
            logical[qubit_index[(top, c)]] = 1
    code = _css_code(faces, faces, n, d, "color", lz_hint=logical, lx_hint=logical, expect_k=1)
    return code


def build_surface_code(d: int) -> StabilizerCode:
    """Rotated surface code on a d x d grid, n = d^2, k = 1."""
    if d < 3 or d % 2 == 0:
        raise CodeError("surface code distance must be odd and >= 3")
    n = d * d

    def q(r, c):
        return r * d + c

    x_sup: list[tuple[int, ...]] = []
    z_sup: list[tuple[int, ...]] = []
    for r in range(d - 1):
        for c in range(d - 1):
            plaq = (q(r, c), q(r, c + 1), q(r + 1, c), q(r + 1, c + 1))
            if (r + c) % 2 == 0:
                x_sup.append(plaq)
            else:
                z_sup.append(plaq)
    for c in range(d - 1):
        if c % 2 == 0:
            z_sup.append((q(0, c), q(0, c + 1)))
        if (d - 1 + c) % 2 == 1:
            z_sup.append((q(d - 1, c), q(d - 1, c + 1)))
    for r in range(d - 1):
        if r % 2 == 1:
            x_sup.append((q(r, 0), q(r + 1, 0)))
        if (r + d - 1) % 2 == 0:
            x_sup.append((q(r, d - 1), q(r + 1, d - 1)))

    mid = d // 2
    col = np.zeros(n, dtype=np.uint8)
    row = np.zeros(n, dtype=np.uint8)
    for i in range(d):
        col[q(i, mid)] = 1
        row[q(mid, i)] = 1
    # One of row/column commutes with Hx (that one is the Z logical).
    hx = np.zeros((len(x_sup), n), dtype=np.uint8)
    for i, sup in enumerate(x_sup):
        hx[i, list(sup)] = 1
    lz, lx = (row, col) if not ((hx @ row) % 2).any() else (col, row)
    return _css_code(z_sup, x_sup, n, d, "surface", lz_hint=lz, lx_hint=lx, expect_k=1)


Monomial = tuple[str, int]

BB_PRESETS: dict[str, dict] = {
    "bb72": {
        "l": 6,
        "m": 6,
        "poly_a": (("x", 3), ("y", 1), ("y", 2)),
        "poly_b": (("y", 3), ("x", 1), ("x", 2)),
        "d": 6,
    },
    "bb144": {
        "l": 12,
        "m": 6,
        "poly_a": (("x", 3), ("y", 1), ("y", 2)),
        "poly_b": (("y", 3), ("x", 1), ("x", 2)),
        "d": 12,
    },
}


def _cyclic_shift(size: int, power: int) -> np.ndarray:
    return np.roll(np.eye(size, dtype=np.uint8), shift=power % size, axis=1)


def build_bb_code(
    l: int,
    m: int,
    poly_a: tuple[Monomial, ...],
    poly_b: tuple[Monomial, ...],
    d: int | None = None,
) -> StabilizerCode:
    """Bivariate-bicycle code on n = 2*l*m qubits.

    Monomials are (axis, exponent) pairs with axis 'x' (shift mod l) or
    'y' (shift mod m); A and B are the mod-2 sums of the monomial
    matrices, Hx = [A|B], Hz = [B^T|A^T]. k is recomputed from rank.
    """
    if l < 2 or m < 2:
        raise CodeError("BB code needs l, m >= 2")

    def term(axis: str, power: int) -> np.ndarray:
        if axis == "x":
            return np.kron(_cyclic_shift(l, power), np.eye(m, dtype=np.uint8))
        if axis == "y":
            return np.kron(np.eye(l, dtype=np.uint8), _cyclic_shift(m, power))
        raise CodeError(f"bad monomial axis {axis!r}")

    s = l * m
    a_mat = np.zeros((s, s), dtype=np.uint8)
    for axis, power in poly_a:
        a_mat ^= term(axis, power)
    b_mat = np.zeros((s, s), dtype=np.uint8)
    for axis, power in poly_b:
        b_mat ^= term(axis, power)

    hx = np.hstack([a_mat, b_mat])
    hz = np.hstack([b_mat.T, a_mat.T])
    z_sup = [tuple(int(j) for j in np.flatnonzero(r)) for r in hz]
    x_sup = [tuple(int(j) for j in np.flatnonzero(r)) for r in hx]
    return _css_code(z_sup, x_sup, 2 * s, d, "bb")


def build_bb_preset(name: str) -> StabilizerCode:
    cfg = BB_PRESETS[name]
    return build_bb_code(cfg["l"], cfg["m"], cfg["poly_a"], cfg["poly_b"], d=cfg["d"])


def build_single_check_code() -> StabilizerCode:
    """One qubit, one Z stabilizer, k = 0; the minimal test article."""
    stab = PauliString(np.array([0], dtype=np.uint8), np.array([1], dtype=np.uint8))
    return StabilizerCode(1, 0, None, (stab,), (), (), "custom")


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass
class ValidationCheck:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list[ValidationCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, ok: bool, detail: str = ""):
        self.checks.append(ValidationCheck(name, bool(ok), detail))

    def __str__(self) -> str:
        lines = []
        for c in self.checks:
            status = "pass" if c.passed else "FAIL"
            suffix = f" ({c.detail})" if c.detail else ""
            lines.append(f"{status}  {c.name}{suffix}")
        return "\n".join(lines)


def validate_code(code: StabilizerCode, check_distance: bool = True) -> ValidationReport:
    """Per-invariant validation report; failures are entries, not errors."""
    rep = ValidationReport()

    bad = [
        (i, j)
        for i in range(len(code.stabilizers))
        for j in range(i + 1, len(code.stabilizers))
        if code.stabilizers[i].symplectic(code.stabilizers[j])
    ]
    rep.add("stabilizers_commute", not bad, f"violations={bad[:4]}" if bad else "")

    bad = [
        (which, i, j)
        for which, group in (("X", code.logical_x), ("Z", code.logical_z))
        for i, logical in enumerate(group)
        for j, stab in enumerate(code.stabilizers)
        if logical.symplectic(stab)
    ]
    rep.add("logicals_commute_with_stabilizers", not bad, f"violations={bad[:4]}" if bad else "")

    pairing_ok = len(code.logical_x) == len(code.logical_z) == code.k
    for i, lx in enumerate(code.logical_x):
        for j, lz in enumerate(code.logical_z):
            want = 1 if i == j else 0
            if lx.symplectic(lz) != want:
                pairing_ok = False
    rep.add("logical_pairing_anticommutes_iff_equal", pairing_ok)

    rows = [_sym_int(p) for p in code.stabilizers]
    rk = gf2.rank(rows)
    rep.add(
        "stabilizer_rank_n_minus_k",
        rk == code.n - code.k == len(code.stabilizers),
        f"rank={rk}, n-k={code.n - code.k}",
    )

    if code.d is not None and check_distance:
        if code.n <= 25 and code.is_css():
            w = min_logical_weight(code)
            rep.add("declared_distance_exhaustive", w == code.d, f"min weight={w}")
        elif code.n <= 25:
            rep.add("declared_distance_exhaustive", False, "non-CSS exhaustive search unsupported")
        else:
            wx = min(p.weight for p in code.logical_x) if code.logical_x else 0
            wz = min(p.weight for p in code.logical_z) if code.logical_z else 0
            ok = (not code.logical_x) or min(wx, wz) >= code.d
            rep.add("declared_distance_upper_band", ok, f"rep weights x={wx} z={wz} (n>25: not exhaustive)")
    return rep


def min_logical_weight(code: StabilizerCode) -> int:
    """Exhaustive minimum weight of a logical-not-stabilizer Pauli (CSS, n<=25)."""
    if not code.is_css():
        raise CodeError("exhaustive distance implemented for CSS codes only")
    if code.n > 25:
        raise CodeError("exhaustive distance limited to n <= 25")
    hz_rows = [_vec_int(p.z_bits) for p in code.stabilizers if p.is_z_type() and p.weight]
    hx_rows = [_vec_int(p.x_bits) for p in code.stabilizers if p.is_x_type() and p.weight]
    best = None
    for checks, span_rows in ((hx_rows, hz_rows), (hz_rows, hx_rows)):
        # Z-type candidates must commute with X checks and avoid span(Hz).
        reduced, _ = gf2.row_reduce(span_rows)
        for w in range(1, code.n + 1):
            if best is not None and w >= best:
                break
            for sup in itertools.combinations(range(code.n), w):
                vec = 0
                for i in sup:
                    vec |= 1 << i
                if any(gf2.popcount(vec & c) & 1 for c in checks):
                    continue
                if not gf2.in_rowspan(vec, reduced):
                    best = w
                    break
            else:
                continue
            break
    if best is None:
        raise CodeError("no logical operator found")
    return best


# ---------------------------------------------------------------------------
# Extended Tanner graph
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExtendedTannerGraph:
    """Data/check/logical nodes with stabilizer and logical support edges.

    Node order is canonical: data nodes by qubit index, check nodes
    Z-type first then X-type in stabilizer order, logical nodes by
    logical index. This order is what positional encodings bind to.
    """

    n_data: int
    check_supports: tuple[tuple[int, ...], ...]
    check_types: tuple[str, ...]
    logical_supports: tuple[tuple[int, ...], ...]
    memory_basis: str

    @property
    def n_checks(self) -> int:
        return len(self.check_supports)

    @property
    def n_logical(self) -> int:
        return len(self.logical_supports)

    def data_neighbors(self) -> list[list[int]]:
        """For each data node, the check nodes touching it."""
        out: list[list[int]] = [[] for _ in range(self.n_data)]
        for ci, sup in enumerate(self.check_supports):
            for q in sup:
                out[q].append(ci)
        return out

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(f"{self.n_data};{self.memory_basis};".encode())
        for sup, t in zip(self.check_supports, self.check_types):
            h.update(f"{t}:{','.join(map(str, sup))};".encode())
        for sup in self.logical_supports:
            h.update(f"L:{','.join(map(str, sup))};".encode())
        return h.hexdigest()[:16]


def build_extended_tanner(code: StabilizerCode, memory_basis: str = "Z") -> ExtendedTannerGraph:
    """Extended Tanner graph with memory-basis logical nodes wired in."""
    if memory_basis not in ("X", "Z"):
        raise CodeError("memory_basis must be 'X' or 'Z'")
    report = validate_code(code, check_distance=False)
    if not report.passed:
        raise CodeError(f"code fails validation:\n{report}")

    supports: list[tuple[int, ...]] = []
    types: list[str] = []
    for p in code.stabilizers:
        if p.is_z_type() and p.weight:
            supports.append(p.support)
            types.append("Z")
    for p in code.stabilizers:
        if not (p.is_z_type() and p.weight):
            supports.append(p.support)
            types.append("X" if p.is_x_type() else "M")

    logicals = code.logical_z if memory_basis == "Z" else code.logical_x
    log_supports = []
    for logical in logicals:
        rep = _min_weight_representative(code, logical, memory_basis)
        if not rep:
            raise CodeError("no logical representative found")
        log_supports.append(rep)

    graph = ExtendedTannerGraph(
        n_data=code.n,
        check_supports=tuple(supports),
        check_types=tuple(types),
        logical_supports=tuple(log_supports),
        memory_basis=memory_basis,
    )
    touched = set()
    for sup in graph.check_supports:
        touched.update(sup)
    if touched != set(range(code.n)):
        raise CodeError("isolated data node in Tanner graph")
    return graph


def _min_weight_representative(
    code: StabilizerCode, logical: PauliString, basis: str
) -> tuple[int, ...]:
    """Support of the minimum-weight same-type coset representative.

    Exhaustive over the same-type stabilizer span when affordable
    (<= 2^14 cosets), greedy fixpoint otherwise; lexicographically
    smallest support breaks exhaustive ties.
    """
    vec = _vec_int(logical.z_bits if basis == "Z" else logical.x_bits)
    rows = [
        _vec_int(p.z_bits if basis == "Z" else p.x_bits)
        for p in code.stabilizers
        if (p.is_z_type() if basis == "Z" else p.is_x_type()) and p.weight
    ]
    if len(rows) <= 14:
        best = _min_weight_exhaustive(vec, rows)
    else:
        reduced, _ = gf2.row_reduce(rows)
        best = _minimize_weight(vec, reduced)
    return _support_key(best)


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------


def code_to_text(code: StabilizerCode) -> str:
    """Header `code n k d family`, then stabilizer and logical bit lines."""
    d = str(code.d) if code.d is not None else "-"
    lines = [f"code {code.n} {code.k} {d} {code.family_tag}"]

    def fmt(p: PauliString) -> str:
        x = "".join(str(int(b)) for b in p.x_bits)
        z = "".join(str(int(b)) for b in p.z_bits)
        return f"{x}|{z}"

    for p in code.stabilizers:
        lines.append(fmt(p))
    for p in code.logical_x:
        lines.append(fmt(p))
    for p in code.logical_z:
        lines.append(fmt(p))
    return "\n".join(lines) + "\n"


def code_from_text(text: str) -> StabilizerCode:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or not lines[0].startswith("code "):
        raise CodeError("missing `code n k d family` header")
    parts = lines[0].split()
    if len(parts) != 5:
        raise CodeError(f"bad header: {lines[0]!r}")
    n, k = int(parts[1]), int(parts[2])
    d = None if parts[3] == "-" else int(parts[3])
    family = parts[4]
    expected = (n - k) + 2 * k
    body = lines[1:]
    if len(body) != expected:
        raise CodeError(f"expected {expected} operator lines, got {len(body)}")

    def parse(line: str) -> PauliString:
        try:
            xs, zs = line.split("|")
        except ValueError as exc:
            raise CodeError(f"bad operator line {line!r}") from exc
        if len(xs) != n or len(zs) != n:
            raise CodeError(f"operator line length != n in {line!r}")
        return PauliString(
            np.array([int(c) for c in xs], dtype=np.uint8),
            np.array([int(c) for c in zs], dtype=np.uint8),
        )

    ops = [parse(ln) for ln in body]
    return StabilizerCode(
        n, k, d, tuple(ops[: n - k]), tuple(ops[n - k : n - k + k]), tuple(ops[n - k + k :]), family
    )


def get_code(family: str, distance: int | None = None, **kwargs) -> StabilizerCode:
    """Family dispatch used by the CLI layer."""
    family = family.lower()
    if family == "color":
        return build_color_code(int(distance))
    if family == "surface":
        return build_surface_code(int(distance))
    if family in BB_PRESETS:
        return build_bb_preset(family)
    if family == "bb":
        if distance == 6 or kwargs.get("l") == 6:
            return build_bb_preset("bb72")
        if distance == 12 or kwargs.get("l") == 12:
            return build_bb_preset("bb144")
        raise CodeError("bb family: use distance 6 or 12, or preset names bb72/bb144")
    raise CodeError(f"unknown code family {family!r}")
