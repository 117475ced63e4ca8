import numpy as np
import pytest

from npspect.assembly import (CACHE_VERSION, AssemblyError, CacheError, MatrixKind, OperatorMatrix,
                              assemble_np, assemble_single_layer, build_hash, cache_header, cache_load,
                              cache_store, modified_np, oddness_audit, symmetrize)
from npspect.geometry import build_grid, make_sphere, two_spheres
from npspect.material import constant_field, modulated_field, per_component_field
from npspect.spectral import eigenvalues


@pytest.fixture(scope="module")
def sphere16():
    g = build_grid(make_sphere(), 16, 32)
    f = constant_field(1, 1)
    K, S = assemble_np(g, f), assemble_single_layer(g, f)
    return g, f, K, S


def test_single_layer_positive_and_converging(sphere16):
    g, f, K, S = sphere16
    assert np.array_equal(S.data, S.data.T)
    w = np.linalg.eigvalsh(S.data)
    assert w[0] > 0
    w24 = np.linalg.eigvalsh(assemble_single_layer(build_grid(make_sphere(), 24, 48), f).data)
    assert abs(w24[-1] - w[-1]) <= 0.02 * w[-1]


def test_dimensions(sphere16):
    g, f, K, S = sphere16
    L = g.harmonic_degree
    assert K.shape == S.shape == (3 * (L + 1) ** 2,) * 2
    assert K.basis == "harmonic" and K.kind is MatrixKind.NP


def test_symmetrized_spectrum_matches_np(sphere16):
    g, f, K, S = sphere16
    Kc = symmetrize(K, S)
    assert np.array_equal(Kc.data, Kc.data.T)
    assert Kc.provenance["clip_count"] == 0
    a, b = eigenvalues(K), eigenvalues(Kc)
    assert np.abs(a.values - b.values).max() < 1e-6
    assert a.imag_max < 1e-6 * a.spectral_radius
    assert abs(b.values[-1] - 0.5) < 0.05


def test_constant_field_forms_bit_identical():
    g = build_grid(make_sphere(), 8, 16)
    a = assemble_np(g, constant_field(1, 1)).data
    b = assemble_np(g, per_component_field([(1, 1)])).data
    c = assemble_np(g, modulated_field((1, 1), (1, 1))).data
    assert np.array_equal(a, b) and np.array_equal(a, c)


def test_worker_count_does_not_change_bits():
    g = build_grid(make_sphere(), 8, 16)
    f = modulated_field((1, 1), (1, 2))
    a = assemble_np(g, f, workers=1).data
    assert np.array_equal(a, assemble_np(g, f, workers=3).data)
    p = assemble_np(g, f, scheme="punctured", workers=1).data
    assert np.array_equal(p, assemble_np(g, f, scheme="punctured", workers=2).data)


def test_modified_constant_scaling(sphere16):
    g, f, K, S = sphere16
    B = modified_np(K)
    assert np.array_equal(B.data, K.data / (1 / 6))
    assert B.kind is MatrixKind.MODIFIED
    with pytest.raises(AssemblyError):
        modified_np(S)


def test_modified_variable_uses_local_kappa():
    g = build_grid(make_sphere(), 8, 16)
    f = modulated_field((1, 1), (1, 2))
    K = assemble_np(g, f)
    B = modified_np(K)
    # a constant density in the degree-0 slot is mapped to K applied then divided pointwise
    assert B.shape == K.shape and not np.allclose(B.data, K.data * 6)
    P = assemble_np(g, f, scheme="punctured")
    Bp = modified_np(P)
    k0 = np.repeat(f.kappa0(g.nodes), 3)
    assert np.allclose(Bp.data * k0[:, None], P.data, rtol=1e-14)


def test_symmetrize_errors(sphere16):
    g, f, K, S = sphere16
    with pytest.raises(AssemblyError):
        symmetrize(S, K)
    bad = OperatorMatrix(-np.eye(K.shape[0]), MatrixKind.SINGLE_LAYER, "harmonic")
    with pytest.raises(AssemblyError, match="clipped"):
        symmetrize(K, bad)


def test_geometry_field_mismatch():
    grids = [build_grid(s, 6, 12) for s in two_spheres()]
    with pytest.raises(AssemblyError):
        assemble_np(grids, per_component_field([(1, 1), (1, 2), (1, 3)]))
    with pytest.raises(AssemblyError):
        assemble_np(grids[0], constant_field(), scheme="bogus")


def test_build_hash_sensitivity():
    g = build_grid(make_sphere(), 8, 16)
    h = build_hash(g, constant_field(1, 1), MatrixKind.NP, "spectral")
    assert h == build_hash(g, constant_field(1, 1), MatrixKind.NP, "spectral")
    assert h != build_hash(g, constant_field(1, 2), MatrixKind.NP, "spectral")
    assert h != build_hash(build_grid(make_sphere(), 8, 18), constant_field(1, 1), MatrixKind.NP, "spectral")
    assert h != build_hash(g, constant_field(1, 1), MatrixKind.SINGLE_LAYER, "spectral")


def test_oddness_audit_small():
    g = build_grid(make_sphere(), 16, 32)
    assert oddness_audit(g, constant_field()) < 0.2


@pytest.fixture
def stored(tmp_path):
    g = build_grid(make_sphere(), 6, 12)
    K = assemble_np(g, constant_field())
    return K, cache_store(K, tmp_path / "k.npsm")


def test_cache_round_trip(stored):
    K, path = stored
    back = cache_load(path, K.build_hash)
    assert np.array_equal(back.data, K.data) and back.kind is K.kind and back.basis == K.basis
    assert cache_header(path)["version"] == CACHE_VERSION


def _rewrite(path, fn):
    raw = bytearray(path.read_bytes())
    path.write_bytes(bytes(fn(raw)))


def test_cache_corruption_detected(stored):
    K, path = stored

    def flip(raw):
        raw[100] ^= 0x01
        return raw
    _rewrite(path, flip)
    with pytest.raises(CacheError, match="checksum"):
        cache_load(path)


def test_cache_truncation_detected(stored):
    K, path = stored
    _rewrite(path, lambda raw: raw[:-20])
    with pytest.raises(CacheError, match="checksum"):
        cache_load(path)


def test_cache_version_and_magic(stored):
    K, path = stored

    def bump(raw):
        raw[4] += 1
        return raw
    _rewrite(path, bump)
    with pytest.raises(CacheError, match="version"):
        cache_load(path)
    _rewrite(path, lambda raw: b"XXXX" + raw[4:])
    with pytest.raises(CacheError, match="magic"):
        cache_load(path)


def test_cache_hash_mismatch(stored):
    K, path = stored
    with pytest.raises(CacheError, match="hash"):
        cache_load(path, K.build_hash ^ 1)
