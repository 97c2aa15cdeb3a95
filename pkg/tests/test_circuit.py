import numpy as np
import pytest

from tannerlab.circuit import (
    CircuitError,
    Instruction,
    NoiseProfile,
    NoisyCircuit,
    build_memory_circuit,
    emit_circuit_text,
    parse_circuit_text,
)
from tannerlab.codes import build_color_code, build_single_check_code, build_surface_code


class TestParser:
    def test_smallest_program(self):
        c = parse_circuit_text("R 0\nX_ERROR(0.25) 0\nM 0\nDETECTOR rec[-1]")
        assert c.qubit_count == 1
        assert c.detector_count == 1
        assert c.measurement_count == 1

    def test_comments_and_blanks(self):
        c = parse_circuit_text("# header\n\nR 0  # reset\nM 0\n")
        assert len(c.instructions) == 2

    def test_unknown_instruction_with_position(self):
        with pytest.raises(CircuitError) as err:
            parse_circuit_text("R 0\nFROB 0\n")
        assert err.value.line == 2

    def test_missing_record_named(self):
        with pytest.raises(CircuitError) as err:
            parse_circuit_text("M 0\nDETECTOR rec[-2]")
        assert "rec[-2]" in str(err.value)

    def test_probability_range(self):
        with pytest.raises(CircuitError):
            parse_circuit_text("X_ERROR(1.5) 0")

    def test_odd_cx_targets(self):
        with pytest.raises(CircuitError):
            parse_circuit_text("CX 0 1 2")

    def test_observable_index(self):
        c = parse_circuit_text("M 0\nOBSERVABLE_INCLUDE(2) rec[-1]")
        assert c.observable_count == 3


class TestRoundTrip:
    @pytest.mark.parametrize("family,d", [("surface", 3), ("color", 3)])
    def test_memory_circuit_roundtrip(self, family, d):
        build = build_surface_code if family == "surface" else build_color_code
        circ = build_memory_circuit(build(d), 3, "Z", NoiseProfile.uniform(0.005))
        text = emit_circuit_text(circ)
        reparsed = parse_circuit_text(text)
        bare = NoisyCircuit(circ.instructions, circ.qubit_count, circ.measurement_count)
        assert reparsed == bare

    def test_float_precision_survives(self):
        circ = parse_circuit_text("X_ERROR(0.0123456789012345) 0")
        again = parse_circuit_text(emit_circuit_text(circ))
        assert again.instructions[0].arg == circ.instructions[0].arg


class TestMemoryBuilder:
    def test_surface933_detector_budget(self):
        circ = build_memory_circuit(build_surface_code(3), 3, "Z", NoiseProfile.uniform(0.005))
        per_segment = circ.detectors_per_segment()
        assert circ.layout.n_checks == 8
        assert per_segment == [8, 8, 8, 8]  # 24 cycle detectors + 8 readout
        assert circ.observable_count == 1

    def test_invalid_cycles(self):
        with pytest.raises(CircuitError):
            build_memory_circuit(build_surface_code(3), 0, "Z", NoiseProfile())

    def test_single_check_code_circuit(self):
        circ = build_memory_circuit(build_single_check_code(), 1, "Z", NoiseProfile(p_meas=0.3))
        assert circ.layout.n_checks == 1
        assert circ.observable_count == 0
        assert circ.detectors_per_segment() == [1, 1]

    def test_zero_noise_emits_no_noise_instructions(self):
        circ = build_memory_circuit(build_surface_code(3), 2, "Z", NoiseProfile())
        assert not any(
            ins.name in ("X_ERROR", "Z_ERROR", "DEPOLARIZE1", "DEPOLARIZE2")
            for ins in circ.instructions
        )

    def test_deterministic_build(self):
        a = build_memory_circuit(build_color_code(3), 3, "Z", NoiseProfile.uniform(0.01))
        b = build_memory_circuit(build_color_code(3), 3, "Z", NoiseProfile.uniform(0.01))
        assert a == b and a.instructions == b.instructions

    def test_surface_schedule_is_four_layers(self):
        circ = build_memory_circuit(build_surface_code(5), 1, "Z", NoiseProfile())
        cx_moments = sum(1 for ins in circ.instructions if ins.name == "CX")
        assert cx_moments == 4

    def test_cx_layers_conflict_free(self):
        for code in (build_color_code(5), build_surface_code(3)):
            circ = build_memory_circuit(code, 1, "Z", NoiseProfile())
            for ins in circ.instructions:
                if ins.name == "CX":
                    assert len(set(ins.targets)) == len(ins.targets)

    def test_x_basis_builds(self):
        circ = build_memory_circuit(build_surface_code(3), 2, "X", NoiseProfile.uniform(0.01))
        assert circ.layout.basis == "X"
        assert circ.detectors_per_segment() == [8, 8, 8]


class TestNoiseProfile:
    def test_uniform(self):
        p = NoiseProfile.uniform(0.005)
        assert p.p_idle == p.p_gate == p.p_meas == p.p_reset == 0.005

    def test_reset_override(self):
        p = NoiseProfile.uniform(0.005, p_reset=0.001)
        assert p.p_reset == 0.001

    def test_range_check(self):
        with pytest.raises(CircuitError):
            NoiseProfile(p_idle=-0.1)


def test_instruction_rejects_unknown_name():
    with pytest.raises(CircuitError):
        Instruction("BANANA", (0,))
