"""Unit tests for QIM / MD-QIM embedding and decoding."""
import numpy as np
import pytest

from latticehide.coset import build_self_similar, parse_code_spec
from latticehide.embed import (
    KIND_QIM,
    KIND_TYPE1,
    KIND_TYPE2,
    decode,
    decode_blocks,
    default_epsilon,
    embed_blocks,
    embed_stream,
    extract_stream,
    mdqim_embed,
    qim_embed,
)
from latticehide.lattices import hexagonal_a2, integer_lattice, nearest_points


def test_qim_scalar_by_hand():
    code = build_self_similar(integer_lattice(1), 2)
    # coset 0 = even integers, coset 1 = odd integers
    out = qim_embed(code, [0.8], 0)
    assert out.embedded[0] == pytest.approx(0.0)
    out = qim_embed(code, [0.8], 1)
    assert out.embedded[0] == pytest.approx(1.0)
    assert out.kind == KIND_QIM
    assert out.distortion == pytest.approx(0.2)


def test_qim_output_is_a_coset_point():
    code = parse_code_spec("A2:2", unit_volume=True)
    rng = np.random.default_rng(0)
    hosts = rng.uniform(-4, 4, size=(200, 2))
    idx = rng.integers(0, code.payload, size=200)
    batch = embed_blocks(code, hosts, idx, "qim")
    shifted = batch.embedded - code.representatives[idx]
    q = nearest_points(code.coarse, shifted)
    assert np.allclose(shifted, q, atol=1e-9)
    assert np.array_equal(decode_blocks(code, batch.embedded), idx)


def test_mdqim_type1_leaves_host_untouched():
    code = build_self_similar(integer_lattice(1), 2)
    out = mdqim_embed(code, [0.3], 0)  # |p| = 0.3 < r_pack = 0.5
    assert out.kind == KIND_TYPE1
    assert out.embedded[0] == pytest.approx(0.3)
    assert out.distortion == 0.0


def test_mdqim_type2_moves_to_just_inside_boundary():
    code = build_self_similar(integer_lattice(1), 2)
    eps = 1e-3
    out = mdqim_embed(code, [0.9], 1, epsilon=eps)  # target 1, |p| = 0.1 < r
    assert out.kind == KIND_TYPE1
    out = mdqim_embed(code, [1.8], 0, epsilon=eps)  # target 2, |p| = 0.2 < r
    assert out.kind == KIND_TYPE1
    out = mdqim_embed(code, [0.9], 0, epsilon=eps)  # target 0, |p| = 0.9 >= r
    assert out.kind == KIND_TYPE2
    # final point sits at distance r - eps from the target, on the host side
    assert abs(out.embedded[0] - 0.0) == pytest.approx(0.5 - eps)
    assert out.embedded[0] > 0
    assert out.distortion == pytest.approx(0.9 - (0.5 - eps))
    assert decode(code, out.embedded).index == 0


def test_boundary_host_is_type2():
    code = build_self_similar(integer_lattice(1), 2)
    out = mdqim_embed(code, [0.5], 1, epsilon=1e-3)  # exactly r from target 1
    assert out.kind == KIND_TYPE2


def test_mdqim_never_worse_than_qim():
    code = parse_code_spec("D4:2", unit_volume=True)
    rng = np.random.default_rng(1)
    hosts = rng.uniform(-3, 3, size=(2000, 4))
    idx = rng.integers(0, code.payload, size=2000)
    q = embed_blocks(code, hosts, idx, "qim")
    m = embed_blocks(code, hosts, idx, "mdqim")
    assert np.all(m.distortion <= q.distortion + 1e-12)
    assert np.array_equal(decode_blocks(code, m.embedded), idx)


def test_default_epsilon_scale():
    code = parse_code_spec("E8:2", unit_volume=True)
    eps = default_epsilon(code)
    assert 0 < eps < code.fine_geometry.packing_radius
    assert eps == pytest.approx(1e-6 * code.fine_geometry.min_distance)


def test_epsilon_validation():
    code = build_self_similar(integer_lattice(1), 2)
    with pytest.raises(ValueError):
        embed_blocks(code, [[0.1]], [0], "mdqim", epsilon=0.0)
    with pytest.raises(ValueError):
        embed_blocks(code, [[0.1]], [0], "mdqim", epsilon=0.6)


def test_index_and_shape_validation():
    code = build_self_similar(integer_lattice(1), 2)
    with pytest.raises(ValueError):
        embed_blocks(code, [[0.1]], [2], "qim")
    with pytest.raises(ValueError):
        embed_blocks(code, [[0.1]], [-1], "qim")
    with pytest.raises(ValueError):
        embed_blocks(code, [[0.1, 0.2]], [0], "qim")
    with pytest.raises(ValueError):
        embed_blocks(code, [[0.1], [0.2]], [0], "qim")
    with pytest.raises(ValueError):
        embed_blocks(code, [[np.inf]], [0], "qim")
    with pytest.raises(ValueError):
        embed_blocks(code, [[0.1]], [0], "dither")


def test_stream_round_trip_preserves_order_and_kinds():
    code = parse_code_spec("A2:2", unit_volume=True)
    rng = np.random.default_rng(2)
    hosts = list(rng.uniform(-2, 2, size=(50, 2)))
    symbols = list(rng.integers(0, 4, size=50))
    outcomes = embed_stream(code, hosts, symbols, "mdqim")
    assert len(outcomes) == 50
    assert all(o.kind in (KIND_TYPE1, KIND_TYPE2) for o in outcomes)
    recovered = extract_stream(code, [o.embedded for o in outcomes])
    assert recovered == [int(s) for s in symbols]
    assert embed_stream(code, [], [], "qim") == []
    assert extract_stream(code, []) == []


def test_decode_nearest_coset_under_small_noise():
    code = parse_code_spec("E8:2", unit_volume=True)
    rng = np.random.default_rng(3)
    hosts = rng.uniform(-3, 3, size=(500, 8))
    idx = rng.integers(0, code.payload, size=500)
    batch = embed_blocks(code, hosts, idx, "qim")
    # perturb by less than half the fine minimum distance: still decodable
    noise = rng.standard_normal((500, 8))
    noise *= (0.4 * code.fine_geometry.packing_radius
              / np.linalg.norm(noise, axis=1, keepdims=True))
    assert np.array_equal(decode_blocks(code, batch.embedded + noise), idx)
