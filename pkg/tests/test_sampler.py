import numpy as np
import pytest

from tannerlab.circuit import NoiseProfile, build_memory_circuit, parse_circuit_text
from tannerlab.codes import build_color_code, build_single_check_code, build_surface_code
from tannerlab.dem import extract_dem
from tannerlab.sampler import (
    read_batch,
    sample_dem,
    sample_incremental,
    sample_memory,
    sample_pauli_frame,
    to_raw_syndromes,
    write_batch,
)

UNIFORM = NoiseProfile.uniform(0.01)


class TestDeterminism:
    def test_bit_identical_repeats(self):
        circ = build_memory_circuit(build_surface_code(3), 3, "Z", UNIFORM)
        a = sample_pauli_frame(circ, 500, seed=9)
        b = sample_pauli_frame(circ, 500, seed=9)
        assert np.array_equal(a.detector_matrix(), b.detector_matrix())
        assert np.array_equal(a.final_labels, b.final_labels)

    def test_chunk_invariance(self):
        circ = build_memory_circuit(build_color_code(3), 2, "Z", UNIFORM)
        full = sample_pauli_frame(circ, 700, seed=4)
        head = sample_pauli_frame(circ, 300, seed=4)
        tail = sample_pauli_frame(circ, 400, seed=4, shot_offset=300)
        assert np.array_equal(
            full.detector_matrix(),
            np.concatenate([head.detector_matrix(), tail.detector_matrix()]),
        )

    def test_seed_changes_output(self):
        circ = build_memory_circuit(build_surface_code(3), 2, "Z", UNIFORM)
        a = sample_pauli_frame(circ, 200, seed=1)
        b = sample_pauli_frame(circ, 200, seed=2)
        assert not np.array_equal(a.detector_matrix(), b.detector_matrix())


class TestNoiseless:
    @pytest.mark.parametrize("seed", [0, 7])
    def test_all_zero(self, seed):
        circ = build_memory_circuit(build_surface_code(3), 3, "Z", NoiseProfile())
        batch = sample_pauli_frame(circ, 300, seed=seed)
        assert batch.syndrome_bits.sum() == 0
        assert batch.readout_bits.sum() == 0
        assert batch.final_labels.sum() == 0

    def test_x_basis_noiseless(self):
        circ = build_memory_circuit(build_color_code(3), 2, "X", NoiseProfile())
        batch = sample_pauli_frame(circ, 100, seed=0)
        assert batch.detector_matrix().sum() == 0


class TestBernoulliOracles:
    def test_single_qubit_flip_rate(self):
        # 1-qubit X_ERROR(0.1)+M: detector mean 0.1 within 4 sigma at 1e6 shots
        circ = parse_circuit_text("R 0\nX_ERROR(0.1) 0\nM 0\nDETECTOR rec[-1]")
        batch = sample_pauli_frame(circ, 10**6, seed=13)
        sigma = np.sqrt(0.1 * 0.9 / 10**6)
        assert abs(batch.syndrome_bits.mean() - 0.1) < 4 * sigma

    def test_measurement_flip_rate(self):
        circ = build_memory_circuit(build_single_check_code(), 1, "Z", NoiseProfile(p_meas=0.3))
        batch = sample_pauli_frame(circ, 10**6, seed=5)
        sigma = np.sqrt(0.3 * 0.7 / 10**6)
        assert abs(batch.syndrome_bits[:, 0, 0].mean() - 0.3) < 4 * sigma


class TestDemSampler:
    def test_empty_dem(self):
        from tannerlab.dem import DetectorErrorModel

        dem = DetectorErrorModel((), detector_count=3, observable_count=1)
        batch = sample_dem(dem, 50, seed=0)
        assert batch.syndrome_bits.sum() == 0 and batch.final_labels.sum() == 0

    def test_half_mechanism_couples_detector_and_observable(self):
        from tannerlab.dem import DetectorErrorModel, Mechanism

        dem = DetectorErrorModel(
            (Mechanism(0.5, (0,), (0,)),), detector_count=1, observable_count=1
        )
        batch = sample_dem(dem, 4000, seed=3)
        assert np.array_equal(batch.syndrome_bits[:, 0, 0], batch.final_labels[:, 0])
        assert 0.4 < batch.syndrome_bits.mean() < 0.6

    def test_marginals_match_frame_sampler(self):
        # detector marginals from the DEM path within 4 sigma of frame MC
        circ = build_memory_circuit(build_surface_code(3), 1, "Z", NoiseProfile.uniform(0.01))
        dem = extract_dem(circ)
        shots = 200_000
        frame = sample_pauli_frame(circ, shots, seed=21).detector_matrix()
        ind = sample_dem(dem, shots, seed=22).detector_matrix()
        pf, pd = frame.mean(axis=0), ind.mean(axis=0)
        sigma = np.sqrt(pf * (1 - pf) / shots + pd * (1 - pd) / shots) + 1e-12
        assert np.all(np.abs(pf - pd) < 4 * sigma + 1e-9)

    def test_layout_passthrough(self):
        circ = build_memory_circuit(build_surface_code(3), 2, "Z", UNIFORM)
        batch = sample_dem(extract_dem(circ), 100, seed=1)
        assert batch.cycles == 2 and batch.n_s == 8
        assert batch.readout_bits is not None


class TestIncremental:
    def test_fork_isolation(self):
        noise = NoiseProfile.uniform(0.02)
        main = sample_pauli_frame(build_memory_circuit(build_surface_code(3), 3, "Z", noise), 800, seed=17)
        inc = sample_incremental(build_surface_code(3), 3, "Z", noise, 800, seed=17)
        assert np.array_equal(main.syndrome_bits, inc.syndrome_bits)
        assert np.array_equal(main.readout_bits, inc.readout_bits)
        assert np.array_equal(main.final_labels, inc.final_labels)

    def test_last_fork_is_real_readout(self):
        inc = sample_incremental(build_color_code(3), 4, "Z", UNIFORM, 400, seed=2)
        assert np.array_equal(inc.pseudo_labels[:, -1], inc.final_labels)
        assert np.array_equal(inc.pseudo_syndromes[:, -1], inc.readout_bits)

    def test_noiseless_pseudo_labels_zero(self):
        inc = sample_incremental(build_surface_code(3), 3, "Z", NoiseProfile(), 100, seed=0)
        assert inc.pseudo_labels.sum() == 0
        assert inc.pseudo_syndromes.sum() == 0

    def test_injected_fault_flips_labels_from_cycle_on(self):
        """A deterministic data X fault before cycle t flips pseudo labels
        from t onward iff the qubit lies in the logical support."""
        from tannerlab.circuit import Instruction, NoisyCircuit
        from tannerlab.sampler import _batch_from_state, _run_circuit

        code = build_surface_code(3)
        logical = code.logical_z[0].support
        for qubit, t_inject in ((logical[0], 1), (logical[-1], 2)):
            circ = build_memory_circuit(code, 3, "Z", NoiseProfile())
            ins = list(circ.instructions)
            pos = circ.cycle_boundaries[t_inject - 1]
            ins.insert(pos, Instruction("X_ERROR", (qubit,), 1.0))
            forced = NoisyCircuit(
                tuple(ins), circ.qubit_count, circ.measurement_count,
                tuple(b + (1 if b >= pos else 0) for b in circ.cycle_boundaries),
                circ.layout,
            )
            state, pdets, plabs = _run_circuit(forced, 1, seed=0, fork=True)
            batch = _batch_from_state(forced, state, 0, "Z", pseudo=(pdets, plabs))
            flips = batch.pseudo_labels[0, :, 0]
            expected = np.array([1 if t >= t_inject else 0 for t in range(3)])
            assert np.array_equal(flips, expected)
        # a qubit outside the logical support never flips the label
        outside = [q for q in range(code.n) if q not in logical][0]
        circ = build_memory_circuit(code, 3, "Z", NoiseProfile())
        ins = list(circ.instructions)
        pos = circ.cycle_boundaries[0]
        ins.insert(pos, Instruction("X_ERROR", (outside,), 1.0))
        forced = NoisyCircuit(
            tuple(ins), circ.qubit_count, circ.measurement_count,
            tuple(b + (1 if b >= pos else 0) for b in circ.cycle_boundaries),
            circ.layout,
        )
        state, pdets, plabs = _run_circuit(forced, 1, seed=0, fork=True)
        batch = _batch_from_state(forced, state, 0, "Z", pseudo=(pdets, plabs))
        assert batch.pseudo_labels.sum() == 0


class TestRawMode:
    def test_raw_is_cumulative_xor(self):
        batch = sample_memory(build_surface_code(3), 3, "Z", UNIFORM, 200, seed=6)
        raw = to_raw_syndromes(batch)
        manual = np.bitwise_xor.accumulate(batch.syndrome_bits, axis=1)
        assert np.array_equal(raw.syndrome_bits, manual)
        # readout slice unXORed against the last round
        assert np.array_equal(raw.readout_bits, batch.readout_bits ^ manual[:, -1])

    def test_raw_mode_flag(self):
        batch = sample_memory(build_surface_code(3), 2, "Z", UNIFORM, 50, seed=6, raw_syndromes=True)
        assert batch.raw_mode


class TestBatchFiles:
    def test_plain_roundtrip(self, tmp_path):
        batch = sample_memory(build_surface_code(3), 3, "Z", UNIFORM, 120, seed=8)
        path = tmp_path / "batch.b01"
        write_batch(batch, str(path))
        again = read_batch(str(path))
        assert np.array_equal(again.syndrome_bits, batch.syndrome_bits)
        assert np.array_equal(again.readout_bits, batch.readout_bits)
        assert np.array_equal(again.final_labels, batch.final_labels)

    def test_training_roundtrip(self, tmp_path):
        batch = sample_memory(build_surface_code(3), 2, "Z", UNIFORM, 60, seed=8, incremental=True)
        path = tmp_path / "train.b01"
        write_batch(batch, str(path))
        again = read_batch(str(path))
        assert np.array_equal(again.pseudo_syndromes, batch.pseudo_syndromes)
        assert np.array_equal(again.pseudo_labels, batch.pseudo_labels)

    def test_header_mismatch_detected(self, tmp_path):
        path = tmp_path / "bad.b01"
        path.write_text("b01 2 1 3 1\n0101\n")
        with pytest.raises(Exception):
            read_batch(str(path))
