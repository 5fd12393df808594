from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hiddenshift.boolfn import (
    NotBent,
    QuadraticForm,
    TruthTable,
    apply_affine,
    convolve,
    correlation,
    dual_bent,
    evaluate,
    fit_quadratic,
    flip_noise,
    ip,
    is_bent,
    shift,
    to_table,
    wht,
)
from hiddenshift.gf2 import BitMatrix, BitVector, Singular, invert, random_invertible


def direct_wht(signs: np.ndarray) -> np.ndarray:
    """O(4^n) summation of (-1)^{w.x} t[x]."""
    size = len(signs)
    out = np.zeros(size, dtype=np.int64)
    for w in range(size):
        for x in range(size):
            out[w] += (-1) ** bin(w & x).count("1") * int(signs[x])
    return out


def termwise(qf: QuadraticForm, x: BitVector) -> int:
    n = qf.n
    total = qf.b
    for i in range(n):
        total += qf.l[i] * x[i]
        for j in range(i + 1, n):
            total += qf.q[i, j] * x[i] * x[j]
    return total % 2


tables = st.integers(1, 6).flatmap(
    lambda n: st.lists(st.sampled_from([1, -1]), min_size=1 << n, max_size=1 << n).map(
        lambda s: TruthTable(n, np.array(s, dtype=np.int8))
    )
)


def test_table_validation():
    with pytest.raises(ValueError):
        TruthTable(2, np.array([1, 1, 1], dtype=np.int8))
    with pytest.raises(ValueError):
        TruthTable(1, np.array([1, 0], dtype=np.int8))


def test_table_serialization_roundtrip(rng):
    t = TruthTable.random(5, rng)
    assert TruthTable.from_hex(t.to_hex(), 5) == t
    assert TruthTable.from_json(t.to_json()) == t
    assert t.to_dict()["signs"] == [int(v) for v in t.signs]


def test_hex_bit_convention():
    t = TruthTable(2, np.array([1, -1, 1, 1], dtype=np.int8))
    assert int(t.to_hex(), 16) == 0b0010


def test_evaluate_trivial():
    ip2 = ip(1, 2)
    assert evaluate(ip2, BitVector.from_bits([1, 1])) == 1
    qf = QuadraticForm(ip2.q, ip2.l, 1)
    assert evaluate(qf, BitVector.zeros(2)) == 1


def test_evaluate_termwise(rng):
    for _ in range(200):
        n = int(rng.integers(1, 9))
        qf = QuadraticForm.random(n, rng)
        x = BitVector.random(n, rng)
        assert evaluate(qf, x) == termwise(qf, x)


def test_to_table():
    assert to_table(QuadraticForm.zero(3)) == TruthTable.constant(3)
    assert to_table(ip(1, 2)).signs.tolist() == [1, 1, 1, -1]


def test_to_table_matches_evaluate(rng):
    for n in (3, 5, 7):
        qf = QuadraticForm.random(n, rng)
        t = to_table(qf)
        for x in range(1 << n):
            assert t[x] == (-1) ** evaluate(qf, BitVector(x, n))


def test_form_serialization(rng):
    qf = QuadraticForm.random(6, rng)
    d = qf.to_dict()
    assert set(d) == {"n", "q_rows", "l", "b"}
    assert QuadraticForm.from_dict(d) == qf
    assert QuadraticForm.from_json(qf.to_json()) == qf


def test_form_from_matrix_folds_diagonal():
    m = BitMatrix.from_rows([[1, 1], [1, 0]])
    qf = QuadraticForm.from_matrix(m)
    # x m x^t = x1 + 2 x1 x2 over GF(2) = x1
    for x in range(4):
        v = BitVector(x, 2)
        assert evaluate(qf, v) == (v @ m).dot(v)


def test_wht_small():
    assert wht(TruthTable.constant(1)).raw.tolist() == [2, 0]
    assert wht(to_table(ip(1, 2))).raw.tolist() == [2, 2, 2, -2]


@given(tables)
@settings(max_examples=100, deadline=None)
def test_wht_matches_direct_sum(t):
    assert np.array_equal(wht(t).raw, direct_wht(t.signs))


@given(tables)
@settings(max_examples=100, deadline=None)
def test_parseval_and_involution(t):
    w = wht(t).raw
    assert int((w.astype(np.int64) ** 2).sum()) == 1 << (2 * t.n)
    back = direct_wht(w) if t.n <= 3 else None
    if back is not None:
        assert np.array_equal(back, t.signs.astype(np.int64) << t.n)


def test_spectrum_normalizations(rng):
    t = TruthTable.random(4, rng)
    spectrum = wht(t)
    assert np.allclose(spectrum.normalized("expectation").coefficients, spectrum.raw / 16)
    assert np.allclose(spectrum.normalized("unitary").coefficients, spectrum.raw / 4)
    # H_{2^n} applied to the sign vector: squared coefficients sum to 2^n
    assert np.isclose((spectrum.normalized("unitary").coefficients ** 2).sum(), 16.0)


def test_is_bent():
    assert is_bent(to_table(ip(1, 2)))
    for n in (2, 4, 6, 8):
        assert is_bent(to_table(ip(n // 2, n)))
    for n in (1, 3, 5):
        for h in range(n // 2 + 1):
            assert not is_bent(to_table(ip(h, n)))
    assert not is_bent(TruthTable.linear(BitVector.from_bits([1, 0, 1, 1])))


def test_bent_iff_flat(rng):
    for _ in range(200):
        t = TruthTable.random(4, rng)
        w = np.abs(wht(t).raw)
        assert is_bent(t) == (w.max() == w.min())


def test_rank_controls_bentness_and_support(rng):
    for n in (4, 6):
        for h in range(n // 2 + 1):
            r = random_invertible(n, rng)
            qf = QuadraticForm.from_matrix(r @ ip(h, n).q @ r.transpose(), BitVector.random(n, rng))
            t = to_table(qf)
            assert is_bent(t) == (2 * h == n)
            assert int(np.count_nonzero(wht(t).raw)) == 1 << (2 * h)


def test_dual_of_ip2():
    t = to_table(ip(1, 2))
    assert dual_bent(t) == t


def test_dual_involution(rng):
    for _ in range(100):
        n = int(rng.choice([2, 4, 6]))
        r = random_invertible(n, rng)
        qf = QuadraticForm.from_matrix(r @ ip(n // 2, n).q @ r.transpose(), BitVector.random(n, rng), 1)
        t = to_table(qf)
        assert dual_bent(dual_bent(t)) == t


def test_dual_requires_bent():
    with pytest.raises(NotBent):
        dual_bent(TruthTable.constant(2))


def test_dual_is_quadratic():
    for n in (2, 4, 6, 8):
        _, exact = fit_quadratic(dual_bent(to_table(ip(n // 2, n))))
        assert exact


def test_ip_definition():
    assert ip(1, 2).q.tolist() == [[0, 1], [0, 0]]
    assert ip(1, 4).rank() == 2
    with pytest.raises(ValueError):
        ip(3, 4)


def test_affine_identity_and_singular(rng):
    t = TruthTable.random(4, rng)
    assert apply_affine(t, BitMatrix.identity(4), BitVector.zeros(4)) == t
    with pytest.raises(Singular):
        apply_affine(t, BitMatrix.zeros(4), BitVector.zeros(4))


def test_affine_definition(rng):
    t = TruthTable.random(5, rng)
    a = random_invertible(5, rng)
    b = BitVector.random(5, rng)
    g = apply_affine(t, a, b)
    for x in range(32):
        assert g[x] == t[(BitVector(x, 5) @ a) + b]


def test_affine_spectral_identity(rng):
    # g(x) = f(xA + b): substituting y = xA + b gives the phase (-1)^{w' b}
    # with w' = w (A^{-1})^t, which reduces to (-1)^{w b} when A = I.
    for _ in range(30):
        n = 6
        r = random_invertible(n, rng)
        t = to_table(QuadraticForm.from_matrix(r @ ip(3, n).q @ r.transpose(), BitVector.random(n, rng)))
        a = random_invertible(n, rng)
        b = BitVector.random(n, rng)
        g = apply_affine(t, a, b)
        assert is_bent(g)
        g_walsh = wht(g).raw
        f_walsh = wht(t).raw
        ainv_t = invert(a).transpose()
        for w in range(1 << n):
            wp = BitVector(w, n) @ ainv_t
            assert g_walsh[w] == (-1) ** wp.dot(b) * f_walsh[wp.value]


def test_dual_of_affine_image(rng):
    n = 4
    t = to_table(ip(2, n))
    a = random_invertible(n, rng)
    b = BitVector.random(n, rng)
    dual = dual_bent(apply_affine(t, a, b))
    base_dual = dual_bent(t)
    ainv_t = invert(a).transpose()
    for w in range(1 << n):
        wp = BitVector(w, n) @ ainv_t
        assert dual[w] == (-1) ** wp.dot(b) * base_dual[wp.value]


def test_shift_spectrum(rng):
    t = TruthTable.random(5, rng)
    s = BitVector.random(5, rng)
    g = wht(shift(t, s)).raw
    f = wht(t).raw
    for w in range(32):
        assert g[w] == (-1) ** BitVector(w, 5).dot(s) * f[w]


def test_convolution_definition_and_spectrum(rng):
    for _ in range(10):
        t1, t2 = TruthTable.random(4, rng), TruthTable.random(4, rng)
        conv = convolve(t1, t2)
        brute = np.array([
            sum(int(t1[x ^ y]) * int(t2[y]) for y in range(16)) / 16 for x in range(16)
        ])
        assert np.allclose(conv, brute, atol=1e-12)
        spec_conv = np.array([
            sum((-1) ** bin(w & x).count("1") * conv[x] for x in range(16)) / 16 for w in range(16)
        ])
        prod = (wht(t1).raw / 16) * (wht(t2).raw / 16)
        assert np.allclose(spec_conv, prod, atol=1e-12)


def test_convolution_with_characters(rng):
    l = BitVector.random(4, rng)
    chi = TruthTable.linear(l)
    t = TruthTable.random(4, rng)
    fhat = wht(t).raw[l.value] / 16
    assert np.allclose(convolve(t, chi), fhat * chi.signs)


def test_bent_autoconvolution():
    t = to_table(ip(2, 4))
    assert convolve(t, t)[0] == pytest.approx(1.0)


def test_correlation(rng):
    t = TruthTable.random(6, rng)
    assert correlation(t, t) == 1.0
    assert correlation(t, -t) == -1.0
    signs = t.signs.copy()
    signs[[3, 17, 40]] *= -1
    assert correlation(t, TruthTable(6, signs)) == 1 - 2 * 3 / 64


def test_flip_noise(rng):
    t = TruthTable.random(6, rng)
    assert flip_noise(t, 0.0, rng) == t
    assert flip_noise(t, 1.0, rng) == -t
    one = flip_noise(t, 1 / 64, rng)
    assert int((one.signs != t.signs).sum()) == 1
    assert correlation(one, t) == 31 / 32
    for delta in (0.01, 0.1, 0.37):
        noisy = flip_noise(t, delta, rng)
        flips = int(round(delta * 64 + 1e-9))
        assert int((noisy.signs != t.signs).sum()) == flips
        assert correlation(noisy, t) == 1 - 2 * flips / 64
    with pytest.raises(ValueError):
        flip_noise(t, 1.5, rng)


def test_fit_roundtrip(rng):
    for _ in range(200):
        n = int(rng.integers(1, 9))
        qf = QuadraticForm.random(n, rng)
        fitted, exact = fit_quadratic(to_table(qf))
        assert exact and fitted == qf


def test_fit_rejects_cubic():
    bits = [((x & 1) & (x >> 1 & 1) & (x >> 2 & 1)) for x in range(8)]
    _, exact = fit_quadratic(TruthTable.from_bits(bits))
    assert not exact


def test_exhaustive_n3_quadratic_count():
    quadratic = 0
    for bits in itertools.product([0, 1], repeat=8):
        _, exact = fit_quadratic(TruthTable.from_bits(bits))
        quadratic += exact
    # 1 + 3 + 3 coefficients: 2^7 quadratic functions on three variables
    assert quadratic == 128
