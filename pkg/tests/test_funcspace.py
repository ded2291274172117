"""Function representations, even/odd decomposition, translates, files."""

from __future__ import annotations

import subprocess
import sys

import numpy as np
import pytest

from jensen_stab import (
    FiniteTableFn,
    InvalidElementError,
    LatticeTableFn,
    OracleFn,
    ParityNoise,
    SeededUniformNoise,
    bundled_carrier,
    evaluate,
    even_part,
    function_from_dict,
    function_to_dict,
    left_translate,
    odd_part,
    right_translate,
    sup_norm_window,
)
from jensen_stab.errors import FormatError
from jensen_stab.funcspace import window_points


def test_evaluate_examples():
    s3 = bundled_carrier("s3")
    const = FiniteTableFn(s3, [5.0] * 6)
    assert evaluate(const, 2) == 5.0

    z1 = bundled_carrier("int1")
    affine = OracleFn(z1, [2.0], 5.0)
    assert evaluate(affine, 3) == 11.0

    noisy = OracleFn(z1, [2.0], 5.0, ParityNoise(0.1))
    assert evaluate(noisy, 4) == 2.0 * 4 + 5.0 + 0.1
    assert evaluate(noisy, 3) == 2.0 * 3 + 5.0 - 0.1


def test_oracle_evaluable_outside_window():
    z1 = bundled_carrier("int1")
    f = OracleFn(z1, [2.0], 5.0, SeededUniformNoise(0.1, 3))
    far = 2**40 * 3
    assert abs(f.eval(far) - (2.0 * far + 5.0)) <= 0.1


def test_even_odd_linear_and_constant():
    z1 = bundled_carrier("int1")
    f = OracleFn(z1, [1.0], 0.0)
    pts = z1.window_points()
    assert np.abs(even_part(f).eval_many(pts)).max() == 0.0
    assert np.array_equal(odd_part(f).eval_many(pts), f.eval_many(pts))

    g = OracleFn(z1, None, 7.25)
    assert np.abs(even_part(g).eval_many(pts) - 7.25).max() == 0.0
    assert np.abs(odd_part(g).eval_many(pts)).max() == 0.0


def test_even_odd_quadratic_table():
    lat = bundled_carrier("int1")
    pts = lat.window_points()
    vals = np.array([x * x + x for (x,) in pts], dtype=np.complex128)
    f = LatticeTableFn(lat, vals)
    fe = even_part(f).eval_many(pts)
    fo = odd_part(f).eval_many(pts)
    for i, (x,) in enumerate(pts):
        assert fe[i] == x * x
        assert fo[i] == x


@pytest.mark.parametrize(
    "noise", [None, ParityNoise(0.3), SeededUniformNoise(0.25, 11)]
)
def test_decomposition_is_bit_exact(noise):
    z1 = bundled_carrier("int1")
    f = OracleFn(z1, [2.0 + 1.0j], 5.0 - 3.0j, noise)
    pts = z1.window_points()
    vals = f.eval_many(pts)
    fe = even_part(f).eval_many(pts)
    fo = odd_part(f).eval_many(pts)
    # left-to-right: (f - f_even) - f_odd vanishes bit-exactly
    assert np.all((vals - fe) - fo == 0)
    # scalar path agrees with the vector path bit for bit
    for x in (-64, -3, 0, 7, 64):
        i = x + 64
        assert f.eval(x) == vals[i]
        assert even_part(f).eval(x) == fe[i]
        assert odd_part(f).eval(x) == fo[i]


def test_even_odd_symmetry():
    z1 = bundled_carrier("int1")
    f = OracleFn(z1, [2.0], 5.0, SeededUniformNoise(0.5, 4))
    pts = z1.window_points()
    neg = -pts
    fe = even_part(f)
    fo = odd_part(f)
    # evenness is exact: same two values, commuted addition
    assert np.all(fe.eval_many(pts) == fe.eval_many(neg))
    # oddness holds to rounding (odd part is the subtractive complement)
    assert np.abs(fo.eval_many(pts) + fo.eval_many(neg)).max() < 1e-13


def test_translates_on_lattice():
    z1 = bundled_carrier("int1")
    f = OracleFn(z1, [3.0], 1.0, SeededUniformNoise(0.2, 5))
    pts = z1.window_points()
    lt = left_translate(3, f)
    rt = right_translate(f, 3)
    assert np.array_equal(lt.eval_many(pts), f.eval_many(pts + 3))
    assert np.array_equal(rt.eval_many(pts), f.eval_many(pts + 3))
    ident = left_translate(z1.neutral, f)
    assert np.array_equal(ident.eval_many(pts), f.eval_many(pts))


def test_translates_on_s3_worked_example():
    s3 = bundled_carrier("s3")
    f = FiniteTableFn(s3, np.arange(6, dtype=float) + 1)
    y = s3.index_of("102")  # the transposition swapping 0 and 1
    x = s3.index_of("210")  # the transposition swapping 0 and 2
    # tuple composition, y acting first: p[q[i]]
    p = (1, 0, 2)
    q = (2, 1, 0)
    composed = "".join(str(p[q[i]]) for i in range(3))
    assert composed == "201"
    assert left_translate(y, f).eval(x) == f.eval(s3.index_of("201"))
    # right translate composes the other way round
    composed_r = "".join(str(q[p[i]]) for i in range(3))
    assert right_translate(f, y).eval(x) == f.eval(s3.index_of(composed_r))


def test_sup_norm_examples():
    s3 = bundled_carrier("s3")
    assert sup_norm_window(FiniteTableFn(s3, [5.0] * 6))[0] == 5.0
    assert sup_norm_window(FiniteTableFn(s3, [0.0] * 6))[0] == 0.0
    z1 = bundled_carrier("int1")
    pure_noise = OracleFn(z1, None, 0.0, ParityNoise(0.1))
    value, witness = sup_norm_window(pure_noise)
    assert value == 0.1
    assert abs(pure_noise.eval(witness)) == 0.1


def test_oracle_determinism_across_processes():
    code = (
        "from jensen_stab import OracleFn, SeededUniformNoise, bundled_carrier\n"
        "z1 = bundled_carrier('int1')\n"
        "f = OracleFn(z1, [2.0], 5.0, SeededUniformNoise(0.1, 42))\n"
        "vals = [f.eval(x) for x in (-3, 0, 12345, 2**40)]\n"
        "print(repr([(v.real, v.imag) for v in vals]))\n"
    )
    runs = [
        subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, check=True).stdout
        for _ in range(2)
    ]
    assert runs[0] == runs[1]
    z1 = bundled_carrier("int1")
    f = OracleFn(z1, [2.0], 5.0, SeededUniformNoise(0.1, 42))
    local = repr([(v.real, v.imag) for v in (f.eval(-3), f.eval(0), f.eval(12345), f.eval(2**40))])
    assert runs[0].strip() == local


def test_seeded_noise_is_deterministic_and_bounded():
    n1 = SeededUniformNoise(0.05, 42)
    n2 = SeededUniformNoise(0.05, 42)
    pts = [(i,) for i in range(-300, 301)] + [(2**40,), (-(2**50),)]
    for pt in pts:
        v1 = n1.value(pt)
        assert v1 == n2.value(pt)
        assert abs(v1) <= 0.05
    other = SeededUniformNoise(0.05, 43)
    assert any(n1.value(pt) != other.value(pt) for pt in pts)


def test_seeded_noise_dense_and_sparse_paths_agree():
    noise = SeededUniformNoise(0.1, 9)
    pts = np.arange(-50, 51, dtype=np.int64).reshape(-1, 1)
    dense = noise.values(pts)
    fresh = SeededUniformNoise(0.1, 9)
    pointwise = np.array([fresh.value((int(v),)) for v in pts[:, 0]])
    assert np.array_equal(dense, pointwise)
    # 2-d grid path
    g = SeededUniformNoise(0.1, 9)
    pts2 = np.array([[i, j] for i in range(-5, 6) for j in range(-5, 6)], dtype=np.int64)
    grid_vals = g.values(pts2)
    fresh2 = SeededUniformNoise(0.1, 9)
    assert np.array_equal(grid_vals, np.array([fresh2.value((int(a), int(b))) for a, b in pts2]))


def test_lattice_table_bounds():
    z1 = bundled_carrier("int1")
    vals = np.zeros(129, dtype=np.complex128)
    t = LatticeTableFn(z1, vals)
    assert t.eval(0) == 0
    with pytest.raises(InvalidElementError):
        t.eval(65)
    with pytest.raises(InvalidElementError):
        t.eval_many(np.array([[70]], dtype=np.int64))


def test_function_file_roundtrip():
    s3 = bundled_carrier("s3")
    f = FiniteTableFn(s3, np.arange(6) * (1 + 2j))
    d = function_to_dict(f)
    f2 = function_from_dict(d, s3)
    assert np.array_equal(f.values, f2.values)

    z1 = bundled_carrier("int1")
    o = OracleFn(z1, [2.0], 5.0, SeededUniformNoise(0.1, 42))
    d2 = function_to_dict(o)
    o2 = function_from_dict(d2, z1)
    pts = z1.window_points()
    assert np.array_equal(o.eval_many(pts), o2.eval_many(pts))

    t = LatticeTableFn(z1, np.arange(129, dtype=np.complex128))
    t2 = function_from_dict(function_to_dict(t), z1)
    assert np.array_equal(t.values, t2.values)


def test_oracle_file_accepts_bare_reals():
    z1 = bundled_carrier("int1")
    f = function_from_dict(
        {"kind": "oracle", "linear": [2.0], "constant": [5.0, 0.0], "noise": None}, z1
    )
    assert f.eval(3) == 11.0


def test_malformed_functions_rejected():
    s3 = bundled_carrier("s3")
    with pytest.raises(FormatError):
        function_from_dict({"kind": "table", "values": {"e": [0, 0]}}, s3)
    with pytest.raises(FormatError):
        function_from_dict({"kind": "oracle", "linear": [1.0]}, s3)
    with pytest.raises(FormatError):
        FiniteTableFn(s3, [float("nan")] * 6)
    z1 = bundled_carrier("int1")
    with pytest.raises(FormatError):
        OracleFn(z1, [float("inf")], 0.0)


def test_window_points_orders():
    z1 = bundled_carrier("int1")
    pts = window_points(z1)
    assert pts[0, 0] == -64 and pts[-1, 0] == 64
    s3 = bundled_carrier("s3")
    assert window_points(s3).tolist() == [0, 1, 2, 3, 4, 5]
