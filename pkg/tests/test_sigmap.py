import numpy as np
import pytest

from codiv.codes import build_code, scrs_generator, simplex_generator
from codiv.gf import default_field
from codiv.sigmap import (
    DegenerateChannelError,
    NodeRule,
    bits_to_gfvec,
    custom_constellation,
    detect_batch,
    hard_detect,
    make_constellation,
    quantize,
    symbol_codewords,
)


def test_builtin_points():
    q = make_constellation("QPSK", rho=2)
    assert np.allclose(q.points, [1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j])
    assert q.labels.tolist() == [[1, 1], [1, 0], [0, 1], [0, 0]]
    b = make_constellation("BPSK")
    assert np.allclose(b.points, [1, -1])
    qam = make_constellation("16QAM", rho=10)
    assert np.mean(np.abs(qam.points) ** 2) == pytest.approx(10)
    assert np.min(np.abs(qam.points) ** 2) == pytest.approx(2)
    psk = make_constellation("8psk", M=8, rho=3)
    assert np.allclose(np.abs(psk.points) ** 2, 3)


def test_bad_constellations():
    with pytest.raises(ValueError):
        make_constellation("64QAM")
    with pytest.raises(ValueError):
        make_constellation("QPSK", M=8)
    with pytest.raises(ValueError):
        custom_constellation([(0, 0, "0"), (0, 0, "1")])


def _adjacent_pairs(points):
    d = np.abs(points[:, None] - points[None, :])
    np.fill_diagonal(d, np.inf)
    dmin = d.min()
    return [(i, j) for i, j in zip(*np.nonzero(np.isclose(d, dmin))) if i < j]


@pytest.mark.parametrize("name", ["QPSK", "16QAM", "8PSK"])
def test_gray_adjacency(name):
    c = make_constellation(name)
    pairs = _adjacent_pairs(c.points)
    assert pairs
    for i, j in pairs:
        assert int((c.labels[i] != c.labels[j]).sum()) == 1


def test_bits_to_gfvec():
    F1, F2 = default_field(1), default_field(2)
    assert bits_to_gfvec([1, 0], F1).elements == (1, 0)
    assert bits_to_gfvec([1, 0, 1, 1], F2).elements == (2, 3)
    assert bits_to_gfvec([0, 0, 0, 0], F2).elements == (0, 0)
    with pytest.raises(ValueError):
        bits_to_gfvec([1, 0, 1], F2)


def test_hard_detect_examples():
    c = make_constellation("QPSK", rho=2)
    for m, s in enumerate(c.points):
        assert hard_detect(s, 1, c) == m
        assert hard_detect(1j * s, 1j, c) == m
        assert hard_detect(0.3 * np.exp(0.7j) * s, 0.3 * np.exp(0.7j), c) == m
    assert c.points[hard_detect(10 + 10j, 1, c)] == pytest.approx(1 + 1j)
    with pytest.raises(DegenerateChannelError):
        hard_detect(1.0, 0, c)
    # equidistant from all four points: lowest index wins
    assert hard_detect(0j, 1, c) == 0


def test_quantize_examples():
    c = make_constellation("QPSK")
    F = default_field(1)
    re_rule = NodeRule(F.vector([1, 0]))
    for s in c.points:
        assert quantize(s, 1, c, re_rule).value == int(s.real >= 0)


@pytest.mark.parametrize("name,B,N", [("QPSK", 1, 3), ("QPSK", 1, 10), ("16QAM", 2, 7),
                                      ("16QAM", 1, 15), ("8PSK", 1, 9)])
def test_noiseless_round_trip(name, B, N):
    c = make_constellation(name, rho=5)
    spec = default_field(B)
    K = c.bits // B
    code = build_code(scrs_generator(N, K, spec))
    table = symbol_codewords(code, c)
    h = 0.8 * np.exp(-1.1j)
    for m, s in enumerate(c.points):
        for i in range(N):
            rule = NodeRule.from_generator(code.generator, i)
            assert quantize(h * s, h, c, rule).value == table[m, i]
            assert rule.outputs(c)[m] == table[m, i]


def test_xor_rule_is_product_sign():
    c = make_constellation("QPSK", rho=4)
    rule = NodeRule(default_field(1).vector([1, 1]))
    rng = np.random.default_rng(11)
    n = 100_000
    h = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2)
    y = 3 * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    det = detect_batch(y, h, c.points)
    u = rule.outputs(c)[det]
    yt = y / h
    assert np.array_equal(u, (yt.real * yt.imag < 0).astype(int))
    for k in range(200):
        assert quantize(y[k], h[k], c, rule).value == u[k]


def test_custom_constellation():
    c = custom_constellation([(2, 0, "1"), (0, 0, 0)], rho=4)
    assert np.allclose(c.points, [2, -2])
    assert c.labels.tolist() == [[1], [0]]
    assert c.kind is None
    code = build_code(simplex_generator(1))
    assert symbol_codewords(code, c).tolist() == [[1], [0]]
