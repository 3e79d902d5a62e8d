import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quadspec.fixtures import (FIXTURES, harmonic_oscillator, q1, q3,
                               random_elliptic, rotated_oscillator)
from quadspec.spectrum import (hamilton_spectrum, spectrum_distance,
                               spectrum_lattice)
from quadspec.symbol import apply_symplectic, numerical_range, random_symplectic

ROT = np.pi / 4


def brute_lattice(gens, radius, kmax=40):
    """Oracle: all sums over a box of k-tuples, filtered by modulus."""
    import itertools

    out = []
    for ks in itertools.product(range(kmax), repeat=len(gens)):
        v = sum((r + 2 * k) * mu for (mu, r), k in zip(gens, ks))
        if abs(v) <= radius:
            out.append(v)
    return np.sort_complex(np.array(out))


def assert_same_points(a, b, rtol=1e-9):
    a, b = np.sort_complex(np.asarray(a)), np.sort_complex(np.asarray(b))
    assert len(a) == len(b)
    for v in a:
        assert np.min(np.abs(b - v)) <= rtol * max(abs(v), 1)


def test_hamilton_spectrum_examples():
    s = hamilton_spectrum(harmonic_oscillator())
    assert [r for _, r in s] == [1, 1]
    assert_same_points([l for l, _ in s], [1j, -1j])
    s = hamilton_spectrum(rotated_oscillator(ROT))
    w = 1j * np.exp(1j * ROT / 2)
    assert_same_points([l for l, _ in s], [w, -w])


def test_multiplicities_sum_to_dimension():
    for name, f in FIXTURES.items():
        q = f()
        assert sum(r for _, r in hamilton_spectrum(q)) == 2 * q.n
    s = hamilton_spectrum(harmonic_oscillator(2))
    assert sorted(r for _, r in s) == [2, 2]


def test_rotated_oscillator_lattice():
    lat = spectrum_lattice(rotated_oscillator(ROT), 10)
    ref = [np.exp(1j * np.pi / 8) * (2 * k + 1) for k in range(5)]
    assert_same_points(lat.eigenvalues, ref)


def test_q1_lattice():
    lat = spectrum_lattice(q1(), 12)
    ref = [(2 * a + 1) + (2 * b + 1) * np.sqrt(2) * np.exp(1j * np.pi / 4)
           for a in range(10) for b in range(10)]
    assert_same_points(lat.eigenvalues, [v for v in ref if abs(v) <= 12])


def test_q3_lattice():
    lat = spectrum_lattice(q3(), 15)
    mu2 = 3 ** 0.5 * 2 ** 0.25 * np.exp(1j * np.pi / 8)
    ref = [(2 * a + 1) * np.sqrt(2) + (2 * b + 1) * mu2 for a in range(10) for b in range(10)]
    assert_same_points(lat.eigenvalues, [v for v in ref if abs(v) <= 15])


@pytest.mark.parametrize("name", ["rotated", "q1", "q2", "q3", "harmonic"])
def test_lattice_against_brute_force(name):
    lat = spectrum_lattice(FIXTURES[name](), 20)
    assert_same_points(lat.eigenvalues, brute_lattice(lat.generators, 20))


@pytest.mark.parametrize("name", ["rotated", "q1", "q2", "q3"])
def test_lattice_inside_numerical_range(name):
    q = FIXTURES[name]()
    s = numerical_range(q)
    lat = spectrum_lattice(q, 25)
    assert all(s.contains(v, atol=1e-8) for v in lat.eigenvalues)


@pytest.mark.parametrize("name", ["rotated", "q1", "q2", "q3"])
def test_lattice_symplectic_invariance(name):
    q = FIXTURES[name]()
    ref = spectrum_lattice(q, 15)
    for seed in range(10):
        lat = spectrum_lattice(apply_symplectic(q, random_symplectic(q.n, seed=seed)), 15)
        assert_same_points([m for m, _ in lat.generators], [m for m, _ in ref.generators], rtol=1e-8)


def test_full_plane_rejected():
    q = random_elliptic(1, np.random.default_rng(0), full_plane=True)
    with pytest.raises(ValueError):
        spectrum_lattice(q, 10)


def test_spectrum_distance_examples():
    assert np.isclose(spectrum_distance(harmonic_oscillator(), 2), 1)
    assert np.isclose(spectrum_distance(harmonic_oscillator(), -1), 2)
    assert np.isclose(spectrum_distance(rotated_oscillator(ROT), 2 * np.exp(1j * np.pi / 8)), 1)


def test_spectrum_distance_radius_check():
    with pytest.raises(ValueError):
        spectrum_distance(harmonic_oscillator(), 10, radius=5)


@given(st.integers(0, 2**31 - 1), st.floats(-20, 20), st.floats(-20, 20))
@settings(max_examples=40, deadline=None)
def test_spectrum_distance_oracle(seed, re, im):
    q = random_elliptic(2, np.random.default_rng(seed))
    z = complex(re, im)
    far = spectrum_lattice(q, 4 * abs(z) + 50).eigenvalues
    assert np.isclose(spectrum_distance(q, z), np.min(np.abs(far - z)))


def test_ground_state_and_serialization():
    lat = spectrum_lattice(q1(), 5)
    assert np.isclose(lat.ground_state, 1 + np.sqrt(2) * np.exp(1j * np.pi / 4))
    d = lat.to_dict()
    assert d["radius"] == 5 and len(d["eigenvalues"]) == len(lat.eigenvalues)
    keys = [tuple(v) for v in d["eigenvalues"]]
    assert keys == sorted(keys)
