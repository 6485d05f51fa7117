import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import extvar as ev

small_dims = st.lists(st.integers(min_value=1, max_value=4), min_size=1, max_size=3).map(tuple)


def test_build_lattice_basic():
    lat = ev.build_lattice((2, 3))
    assert lat.ndim == 2
    assert lat.size == 6


def test_lattice_rejects_bad_dims():
    with pytest.raises(ev.InvalidLatticeError):
        ev.build_lattice(())
    with pytest.raises(ev.InvalidLatticeError):
        ev.build_lattice((2, 0))
    with pytest.raises(ev.InvalidLatticeError):
        ev.build_lattice((-1,))


def test_indices_are_lexicographic():
    lat = ev.build_lattice((2, 3))
    expected = [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2)]
    assert [tuple(row) for row in lat.indices] == expected


def test_indices_read_only():
    lat = ev.build_lattice((2, 2))
    with pytest.raises(ValueError):
        lat.indices[0, 0] = 5


@given(small_dims)
@settings(max_examples=40)
def test_site_rank_roundtrip(dims):
    lat = ev.build_lattice(dims)
    for r in range(lat.size):
        assert lat.rank(lat.site(r)) == r


def test_rank_rejects_outside_box():
    lat = ev.build_lattice((2, 2))
    with pytest.raises(ev.ValidationError):
        lat.rank((2, 0))
    with pytest.raises(ev.ValidationError):
        lat.rank((0, 0, 0))


def test_offsets_difference_set():
    lat = ev.build_lattice((2,))
    offs = set(lat.offsets())
    assert offs == {(-1,), (0,), (1,)}
    assert lat.contains_offset((1,))
    assert not lat.contains_offset((2,))


def test_kronecker_values():
    lat = ev.build_lattice((3,))
    k = ev.kronecker_kernel(lat)
    assert k.value((0,)) == 1.0
    assert k.value((1,)) == 0.0
    assert k.value((-2,)) == 0.0


def test_kronecker_matrix_is_identity():
    lat = ev.build_lattice((2, 2))
    k = ev.kronecker_kernel(lat)
    assert np.array_equal(k.matrix, np.eye(4))


def test_gaussian_values():
    lat = ev.build_lattice((3,))
    k = ev.gaussian_kernel(lat, 2.0)
    assert k.value((0,)) == 1.0
    assert k.value((1,)) == pytest.approx(math.exp(-1.0 / 8.0))
    assert k.value((-2,)) == pytest.approx(math.exp(-4.0 / 8.0))


def test_gaussian_rejects_bad_sigma():
    lat = ev.build_lattice((2,))
    with pytest.raises(ev.InvalidKernelError):
        ev.gaussian_kernel(lat, 0.0)
    with pytest.raises(ev.InvalidKernelError):
        ev.gaussian_kernel(lat, -1.0)


def test_rectangular_values():
    lat = ev.build_lattice((3, 3))
    k = ev.rectangular_kernel(lat, 1)
    assert k.value((1, -1)) == 1.0
    assert k.value((2, 0)) == 0.0
    with pytest.raises(ev.InvalidKernelError):
        ev.rectangular_kernel(lat, -1)


def test_table_kernel_requires_full_coverage():
    lat = ev.build_lattice((2,))
    with pytest.raises(ev.InvalidKernelError):
        ev.table_kernel(lat, {(0,): 1.0, (1,): 0.5})  # (-1,) missing


def test_table_kernel_validates_values():
    lat = ev.build_lattice((2,))
    with pytest.raises(ev.InvalidKernelError):
        ev.table_kernel(lat, {(0,): 0.9, (1,): 0.5, (-1,): 0.5})  # center must be 1
    with pytest.raises(ev.InvalidKernelError):
        ev.table_kernel(lat, {(0,): 1.0, (1,): 0.5, (-1,): 0.4})  # asymmetric
    with pytest.raises(ev.InvalidKernelError):
        ev.table_kernel(lat, {(0,): 1.0, (1,): 1.5, (-1,): 1.5})  # above 1
    with pytest.raises(ev.InvalidKernelError):
        ev.table_kernel(lat, {(0,): 1.0, (1,): math.nan, (-1,): math.nan})


def test_value_outside_difference_set():
    lat = ev.build_lattice((2,))
    k = ev.kronecker_kernel(lat)
    with pytest.raises(ev.ValidationError):
        k.value((2,))
    with pytest.raises(ev.ValidationError):
        k.value((0, 0))


def test_int_offset_for_one_axis():
    lat = ev.build_lattice((3,))
    k = ev.rectangular_kernel(lat, 1)
    assert k.value(1) == 1.0
    assert k.value(-2) == 0.0
    assert ev.neighborhood_value(k, 0) == 1.0


@given(small_dims, st.floats(min_value=0.1, max_value=5.0))
@settings(max_examples=30)
def test_kernel_symmetry_property(dims, sigma):
    lat = ev.build_lattice(dims)
    k = ev.gaussian_kernel(lat, sigma)
    for off in lat.offsets():
        neg = tuple(-o for o in off)
        assert k.value(off) == k.value(neg)
        assert 0.0 <= k.value(off) <= 1.0


def test_matrix_agrees_with_value():
    lat = ev.build_lattice((2, 3))
    k = ev.gaussian_kernel(lat, 1.3)
    m = k.matrix
    for a in range(lat.size):
        for b in range(lat.size):
            off = tuple(x - y for x, y in zip(lat.site(a), lat.site(b)))
            assert m[a, b] == k.value(off)


def test_kernel_from_spec_kinds():
    lat = ev.build_lattice((2,))
    assert ev.kernel_from_spec(lat, {"kind": "kronecker"}).value((1,)) == 0.0
    assert ev.kernel_from_spec(lat, {"kind": "gaussian", "sigma": 1.0}).value((1,)) == pytest.approx(
        math.exp(-0.5)
    )
    assert ev.kernel_from_spec(lat, {"kind": "rectangular", "radius": 1}).value((1,)) == 1.0
    tab = ev.kernel_from_spec(
        lat, {"kind": "table", "values": {"0": 1.0, "1": 0.5, "-1": 0.5}}
    )
    assert tab.value((1,)) == 0.5


def test_kernel_from_spec_rejects_garbage():
    lat = ev.build_lattice((2,))
    with pytest.raises(ev.InvalidKernelError):
        ev.kernel_from_spec(lat, {"kind": "sombrero"})
    with pytest.raises(ev.InvalidKernelError):
        ev.kernel_from_spec(lat, {"kind": "gaussian"})  # sigma missing
    with pytest.raises(ev.InvalidKernelError):
        ev.kernel_from_spec(lat, {"kind": "kronecker", "sigma": 1.0})  # stray key
    with pytest.raises(ev.InvalidKernelError):
        ev.kernel_from_spec(lat, {"kind": "table", "values": {"a,b": 1.0}})
    with pytest.raises(ev.InvalidKernelError):
        ev.kernel_from_spec(lat, {"kind": "rectangular", "radius": 0.5})


def test_two_axis_table_spec_keys():
    lat = ev.build_lattice((2, 2))
    values = {}
    for off in lat.offsets():
        values[",".join(str(o) for o in off)] = 1.0 if off == (0, 0) else 0.25
    k = ev.kernel_from_spec(lat, {"kind": "table", "values": values})
    assert k.value((1, -1)) == 0.25
