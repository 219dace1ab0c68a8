"""Unit tests for nested codes and coset indexing."""
import numpy as np
import pytest

from latticehide.coset import (
    GENERAL_PAYLOAD_CAP,
    NestedCode,
    build_general,
    build_self_similar,
    indices_of_fine_points,
    parse_code_spec,
    rep_to_index,
)
from latticehide.lattices import (
    checkerboard_d4,
    geometry,
    gosset_e8,
    hexagonal_a2,
    integer_lattice,
    nearest_points,
)


def test_scalar_code_structure():
    code = build_self_similar(integer_lattice(1), 2)
    assert code.payload == 2
    assert code.rate == pytest.approx(1.0)
    assert np.allclose(sorted(code.representatives.reshape(-1)), [0.0, 1.0])
    assert np.allclose(code.representatives[0], 0.0)


def test_a2_code_has_four_cosets_with_zero_first():
    code = build_self_similar(hexagonal_a2(), 2)
    assert code.payload == 4
    assert code.rate == pytest.approx(1.0)
    assert np.allclose(code.representatives[0], [0.0, 0.0])
    # representatives are distinct modulo the coarse lattice
    reduced = code.representatives - nearest_points(code.coarse,
                                                    code.representatives)
    d = np.linalg.norm(reduced[:, None, :] - reduced[None, :, :], axis=-1)
    off = d[~np.eye(4, dtype=bool)]
    assert off.min() > 0.4 * geometry(code.fine).min_distance


@pytest.mark.parametrize("lat,alpha", [
    (integer_lattice(1), 3),
    (integer_lattice(3), 2),
    (hexagonal_a2(), 2),
    (checkerboard_d4(), 2),
    (gosset_e8(), 2),
])
def test_representative_index_round_trip(lat, alpha):
    code = build_self_similar(lat, alpha)
    for i, d in enumerate(code.representatives):
        assert rep_to_index(code, d) == i


def test_index_invariant_under_coarse_shift():
    code = build_self_similar(hexagonal_a2(), 2)
    rng = np.random.default_rng(0)
    for i, d in enumerate(code.representatives):
        z = rng.integers(-3, 4, size=2)
        shifted = d + (z @ code.coarse.generator.T)
        assert rep_to_index(code, shifted) == i


def test_indices_of_fine_points_batch():
    code = build_self_similar(checkerboard_d4(), 2)
    rng = np.random.default_rng(1)
    idx = rng.integers(0, code.payload, size=100)
    shifts = rng.integers(-2, 3, size=(100, 4)) @ code.coarse.generator.T
    pts = code.representatives[idx] + shifts
    assert np.array_equal(indices_of_fine_points(code, pts), idx)


def test_non_lattice_point_rejected():
    code = build_self_similar(integer_lattice(1), 2)
    with pytest.raises(ValueError):
        rep_to_index(code, np.array([0.3]))


def test_alpha_validation():
    with pytest.raises(ValueError):
        build_self_similar(integer_lattice(1), 1)
    with pytest.raises(ValueError):
        build_self_similar(integer_lattice(1), 2.5)


def test_build_general_diagonal_matches_self_similar():
    fine = integer_lattice(2)
    gen = build_general(fine, [[2, 0], [0, 2]])
    self_sim = build_self_similar(fine, 2)
    assert gen.payload == self_sim.payload == 4
    assert gen.alpha is None
    assert np.allclose(gen.representatives[0], 0.0)
    # same coset partition: each general rep maps to a unique self-similar index
    seen = {rep_to_index(self_sim, d) for d in gen.representatives}
    assert seen == {0, 1, 2, 3}


def test_build_general_non_diagonal():
    code = build_general(integer_lattice(2), [[2, 1], [0, 3]])
    assert code.payload == 6
    assert code.rate == pytest.approx(np.log2(6) / 2)
    for i, d in enumerate(code.representatives):
        assert rep_to_index(code, d) == i


def test_build_general_validation():
    fine = integer_lattice(2)
    with pytest.raises(ValueError):
        build_general(fine, [[1, 0], [0, 1], [0, 0]])
    with pytest.raises(ValueError):
        build_general(fine, [[1.5, 0], [0, 2]])
    with pytest.raises(ValueError):
        build_general(fine, [[1, 2], [2, 4]])  # singular
    with pytest.raises(ValueError):
        build_general(fine, [[100, 0], [0, 100]])  # exceeds payload cap
    assert GENERAL_PAYLOAD_CAP >= 4096


def test_parse_code_spec():
    code = parse_code_spec("E8:2")
    assert code.fine.kind == "E8" and code.alpha == 2 and code.payload == 256
    unit = parse_code_spec("A2:2", unit_volume=True)
    assert geometry(unit.fine).cell_volume == pytest.approx(1.0)
    with pytest.raises(ValueError):
        parse_code_spec("E8")
    with pytest.raises(ValueError):
        parse_code_spec("E8:two")
    with pytest.raises(ValueError):
        parse_code_spec("Foo:2")


def test_parse_code_spec_matrix_file(tmp_path):
    path = tmp_path / "J.txt"
    path.write_text("2 0\n1 2\n")
    code = parse_code_spec("A2:J=" + str(path))
    assert code.payload == 4
    assert code.alpha is None
