"""Dense discretizations of the single layer, NP, symmetrized and modified
NP operators.

Two schemes are available.

``"spectral"`` (default)
    Galerkin-collocation in a basis of real spherical harmonics of degree
    ``<= L`` (times the three Cartesian directions) pulled back through each
    surface chart.  The action of an operator on every basis function is
    evaluated at the grid nodes with a product rule in polar coordinates
    centred on the target node, which integrates the principal-value
    singularity exactly (the odd leading part cancels between antipodal
    azimuths), and is then projected back on the harmonics.  The NP matrix is
    the operator matrix; the single-layer matrix is the symmetric Gram form
    ``<S phi_b, phi_a>`` on the surface.

``"punctured"``
    Plain Nyström on the grid nodes with zero NP diagonal blocks and a
    tangent-disk correction for the single-layer diagonal.  Kept as a
    reference; on Gauss-Legendre grids the clustered rings near the poles
    produce spurious eigenvalues that do not go away under refinement.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
import struct
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import harmonics
from .geometry import QuadratureGrid, unit_sphere_points
from .kernels import kelvin_array, traction_array
from .material import Classification, LameField, kappa0_array

__all__ = [
    "AssemblyError",
    "CacheError",
    "MatrixKind",
    "OperatorMatrix",
    "HarmonicBasis",
    "assemble_single_layer",
    "assemble_np",
    "symmetrize",
    "modified_np",
    "cache_store",
    "cache_load",
    "cache_header",
    "build_hash",
    "oddness_audit",
    "CACHE_MAGIC",
    "CACHE_VERSION",
]

CACHE_MAGIC = b"NPSM"
CACHE_VERSION = 1
CLIP_RELATIVE = 1e-12
CLIP_LIMIT = 0.01


class AssemblyError(RuntimeError):
    pass


class CacheError(IOError):
    pass


class MatrixKind(str, enum.Enum):
    SINGLE_LAYER = "single_layer"
    NP = "np"
    SYMMETRIZED = "symmetrized_np"
    MODIFIED = "modified_np"


_KIND_TAG = {MatrixKind.SINGLE_LAYER: 1, MatrixKind.NP: 2, MatrixKind.SYMMETRIZED: 3, MatrixKind.MODIFIED: 4}
_BASIS_TAG = {"harmonic": 1, "nodal": 2, "trigonometric": 3}


def _grids(grid) -> tuple[QuadratureGrid, ...]:
    if isinstance(grid, QuadratureGrid):
        return (grid,)
    grids = tuple(grid)
    if not grids or not all(isinstance(g, QuadratureGrid) for g in grids):
        raise AssemblyError("expected a quadrature grid or a sequence of them")
    return grids


@dataclass(eq=False)
class OperatorMatrix:
    data: np.ndarray
    kind: MatrixKind
    basis: str
    d: int = 3
    grids: tuple | None = None
    field: LameField | None = None
    provenance: dict = dc_field(default_factory=dict)
    # auxiliary arrays, e.g. the density map of a symmetrized matrix
    extras: dict = dc_field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.data.shape[0] // self.d

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def build_hash(self) -> int:
        return int(self.provenance.get("build_hash", 0))

    def descriptor(self) -> dict:
        out = {"kind": self.kind.value, "basis": self.basis, "d": self.d, "size": int(self.data.shape[0])}
        out.update({k: v for k, v in self.provenance.items() if k != "timings"})
        return out


class HarmonicBasis:
    """Harmonic coefficient layout over one or more components.

    Coefficient index for component ``c``, harmonic ``b`` and direction
    ``a`` is ``offset[c] + 3 b + a``.
    """

    def __init__(self, grids: Sequence[QuadratureGrid]):
        self.grids = tuple(grids)
        self.degrees = [g.harmonic_degree for g in self.grids]
        self.sizes = [harmonics.basis_size(L) for L in self.degrees]
        self.offsets = np.concatenate([[0], np.cumsum([3 * s for s in self.sizes])]).astype(int)
        self.dimension = int(self.offsets[-1])

    @cached_property
    def synthesis(self) -> list[np.ndarray]:
        """Harmonic values at the grid nodes, one ``(N, nb)`` array per component."""
        return [harmonics.real_sph_harm(L, g.sphere_points[:, 2], g.phi) for g, L in zip(self.grids, self.degrees)]

    @cached_property
    def analysis(self) -> list[np.ndarray]:
        return [(Y * g.sphere_weights[:, None]).T for Y, g in zip(self.synthesis, self.grids)]

    def nodal_values(self, coeffs: np.ndarray) -> list[np.ndarray]:
        """Densities at the nodes, ``(N_c, 3, ...)`` per component."""
        out = []
        for c, Y in enumerate(self.synthesis):
            block = coeffs[self.offsets[c]:self.offsets[c + 1]]
            block = block.reshape((self.sizes[c], 3) + coeffs.shape[1:])
            out.append(np.tensordot(Y, block, axes=(1, 0)))
        return out

    def multiplication(self, values: Sequence[np.ndarray]) -> np.ndarray:
        """Matrix of multiplication by a scalar given at the nodes."""
        M = np.zeros((self.dimension, self.dimension))
        for c, (A, Y) in enumerate(zip(self.analysis, self.synthesis)):
            m = (A * values[c][None, :]) @ Y
            lo, hi = self.offsets[c], self.offsets[c + 1]
            M[lo:hi, lo:hi] = np.kron(m, np.eye(3))
        return M


# ---------------------------------------------------------------- hashing

def build_hash(grids, field: LameField, kind: MatrixKind, scheme: str, extra=()) -> int:
    grids = _grids(grids)
    h = hashlib.blake2b(digest_size=8)
    h.update(json.dumps([kind.value, scheme, list(extra)], sort_keys=True).encode())
    for c, g in enumerate(grids):
        h.update(g.digest.to_bytes(8, "little"))
        lam, mu = field.evaluate(g.nodes, c)
        h.update(np.ascontiguousarray(lam, "<f8").tobytes())
        h.update(np.ascontiguousarray(mu, "<f8").tobytes())
    return int.from_bytes(h.digest(), "little")


# ------------------------------------------------------- spectral scheme

def _rot_y(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def _polar_rule(nq_theta: int, nq_phi: int):
    """Product rule on the sphere in polar angles about the north pole.

    Gauss-Legendre in the polar angle itself (not its cosine) and an even
    trapezoid rule in azimuth; weights include ``sin``.
    """
    if nq_phi % 2:
        raise AssemblyError("azimuthal quadrature count must be even")
    x, w = leggauss(nq_theta)
    t = 0.5 * math.pi * (x + 1.0)
    wt = 0.5 * math.pi * w * np.sin(t)
    p = 2.0 * math.pi * np.arange(nq_phi) / nq_phi
    T, P = np.meshgrid(t, p, indexing="ij")
    W = (wt[:, None] * np.full(nq_phi, 2.0 * math.pi / nq_phi)[None, :]).ravel()
    return unit_sphere_points(T.ravel(), P.ravel()), W


def _kernel_values(kind: MatrixKind, x, nu, y, lam, mu):
    """Kernel blocks for targets ``x`` (k, 3) against sources ``y`` (k, q, 3)."""
    r = x[:, None, :] - y
    lam = lam[:, None]
    mu = mu[:, None]
    if kind is MatrixKind.SINGLE_LAYER:
        return kelvin_array(r, lam, mu)
    return -traction_array(nu[:, None, :], r, lam, mu)


class _SpectralAssembler:
    def __init__(self, grids, field, kind, quadrature=None):
        self.grids = grids
        self.field = field
        self.kind = kind
        self.basis = HarmonicBasis(grids)
        self.quadrature = quadrature
        self.params = [field.evaluate(g.nodes, c) for c, g in enumerate(grids)]

    def rule_for(self, g: QuadratureGrid):
        if self.quadrature is None:
            return g.n_theta, 2 * g.n_theta
        return self.quadrature

    def ring_rows(self, tc: int, ring: int) -> np.ndarray:
        """Rows ``R[i, a, col]`` for the targets on one ring of component ``tc``."""
        g = self.grids[tc]
        nph = g.n_phi
        sl = slice(ring * nph, (ring + 1) * nph)
        x = g.nodes[sl]
        nu = g.normals[sl]
        lam, mu = self.params[tc][0][sl], self.params[tc][1][sl]
        phis = g.phi[sl]
        out = np.empty((nph, 3, self.basis.dimension))
        for sc, sg in enumerate(self.grids):
            L = self.basis.degrees[sc]
            nb = self.basis.sizes[sc]
            if sc == tc:
                pole, wq = _polar_rule(*self.rule_for(g))
                base = pole @ _rot_y(g.theta[ring * nph]).T
                Yb = harmonics.real_sph_harm(L, base[:, 2], np.arctan2(base[:, 1], base[:, 0]))
                c, s = np.cos(phis), np.sin(phis)
                # rotate base points to each target's azimuth
                p = np.empty((nph,) + base.shape)
                p[..., 0] = c[:, None] * base[None, :, 0] - s[:, None] * base[None, :, 1]
                p[..., 1] = s[:, None] * base[None, :, 0] + c[:, None] * base[None, :, 1]
                p[..., 2] = base[None, :, 2]
                y, _, J = sg.surface.geometry_at(p)
                K = _kernel_values(self.kind, x, nu, y, lam, mu) * (wq[None, :] * J)[..., None, None]
            else:
                Yb = self.basis.synthesis[sc]
                y = np.broadcast_to(sg.nodes, (nph,) + sg.nodes.shape)
                K = _kernel_values(self.kind, x, nu, y, lam, mu) * sg.weights[None, :, None, None]
            Q = K.shape[1]
            V = (K.transpose(0, 2, 3, 1).reshape(nph * 9, Q) @ Yb).reshape(nph, 3, 3, nb)
            if sc == tc:
                V = harmonics.rotate_azimuth(V, phis, L)
            lo, hi = self.basis.offsets[sc], self.basis.offsets[sc + 1]
            out[:, :, lo:hi] = V.transpose(0, 1, 3, 2).reshape(nph, 3, 3 * nb)
        return out

    def assemble(self, workers: int = 1) -> np.ndarray:
        M = np.empty((self.basis.dimension, self.basis.dimension))
        for tc, g in enumerate(self.grids):
            R = np.empty((g.size, 3, self.basis.dimension))

            def fill(ring, tc=tc, R=R, g=g):
                R[ring * g.n_phi:(ring + 1) * g.n_phi] = self.ring_rows(tc, ring)

            _run(fill, range(g.n_theta), workers)
            A = self.basis.analysis[tc]
            if self.kind is MatrixKind.SINGLE_LAYER:
                # Gram form <S phi_b, phi_a> on the surface
                A = A * g.area_factor[None, :]
            lo, hi = self.basis.offsets[tc], self.basis.offsets[tc + 1]
            M[lo:hi] = (A @ R.reshape(g.size, -1)).reshape(hi - lo, -1)
        if self.kind is MatrixKind.SINGLE_LAYER:
            M = 0.5 * (M + M.T)
        return M


def _run(fn, items, workers: int) -> None:
    items = list(items)
    if workers <= 1:
        for it in items:
            fn(it)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for _ in pool.map(fn, items):
            pass


# ----------------------------------------------------- punctured scheme

def _assemble_punctured(grids, field, kind, workers: int) -> np.ndarray:
    nodes = np.concatenate([g.nodes for g in grids])
    normals = np.concatenate([g.normals for g in grids])
    weights = np.concatenate([g.weights for g in grids])
    params = [field.evaluate(g.nodes, c) for c, g in enumerate(grids)]
    lam = np.concatenate([p[0] for p in params])
    mu = np.concatenate([p[1] for p in params])
    radius = np.concatenate([g.patch_radius for g in grids])
    N = len(weights)
    M = np.zeros((N, 3, N, 3))
    block = 64

    def fill(start):
        rows = slice(start, min(start + block, N))
        idx = np.arange(rows.start, rows.stop)
        r = nodes[rows, None, :] - nodes[None, :, :]
        r[np.arange(len(idx)), idx] = 1.0  # placeholder, overwritten below
        if kind is MatrixKind.SINGLE_LAYER:
            K = kelvin_array(r, lam[rows, None], mu[rows, None])
        else:
            K = -traction_array(normals[rows, None, :], r, lam[rows, None], mu[rows, None])
        K = K * weights[None, :, None, None]
        if kind is MatrixKind.SINGLE_LAYER:
            l, m = lam[rows], mu[rows]
            den = 4 * math.pi * m * (l + 2 * m)
            lp, mp = (l + m) / den, (l + 3 * m) / den
            nn = normals[rows, :, None] * normals[rows, None, :]
            D = math.pi * radius[rows, None, None] * (mp[:, None, None] * np.eye(3)
                                                     + 0.5 * lp[:, None, None] * (np.eye(3) - nn))
            K[np.arange(len(idx)), idx] = D
        else:
            K[np.arange(len(idx)), idx] = 0.0
        M[rows] = K.transpose(0, 2, 1, 3)

    _run(fill, range(0, N, block), workers)
    M = M.reshape(3 * N, 3 * N)
    if kind is MatrixKind.SINGLE_LAYER:
        M = 0.5 * (M + M.T)
    return M


# ------------------------------------------------------------ public API

def _assemble(grid, field: LameField, kind: MatrixKind, scheme: str, workers: int, quadrature) -> OperatorMatrix:
    grids = _grids(grid)
    if field.component_count not in (1, len(grids)):
        raise AssemblyError(f"field has {field.component_count} components, geometry has {len(grids)}")
    t0 = time.perf_counter()
    if scheme == "spectral":
        data = _SpectralAssembler(grids, field, kind, quadrature).assemble(workers)
        basis = "harmonic"
    elif scheme == "punctured":
        data = _assemble_punctured(grids, field, kind, workers)
        basis = "nodal"
    else:
        raise AssemblyError(f"unknown scheme {scheme!r}")
    elapsed = time.perf_counter() - t0
    if not np.all(np.isfinite(data)):
        raise AssemblyError("non-finite matrix entries")
    extra = [list(quadrature)] if quadrature else []
    prov = {
        "grids": [g.descriptor() for g in grids],
        "field": field.descriptor,
        "scheme": scheme,
        "build_hash": build_hash(grids, field, kind, scheme, extra),
        "timings": {"assembly_seconds": elapsed},
    }
    if quadrature:
        prov["quadrature"] = list(quadrature)
    return OperatorMatrix(data, kind, basis, 3, grids, field, prov)


def assemble_single_layer(grid, field: LameField, scheme: str = "spectral", workers: int = 1,
                          quadrature: tuple[int, int] | None = None) -> OperatorMatrix:
    return _assemble(grid, field, MatrixKind.SINGLE_LAYER, scheme, workers, quadrature)


def assemble_np(grid, field: LameField, scheme: str = "spectral", workers: int = 1,
                quadrature: tuple[int, int] | None = None) -> OperatorMatrix:
    return _assemble(grid, field, MatrixKind.NP, scheme, workers, quadrature)


def _derived(kind: MatrixKind, src: OperatorMatrix, tag: bytes) -> dict:
    prov = dict(src.provenance)
    h = hashlib.blake2b(digest_size=8)
    h.update(src.build_hash.to_bytes(8, "little"))
    h.update(kind.value.encode() + tag)
    prov["build_hash"] = int.from_bytes(h.digest(), "little")
    return prov


def symmetrize(K: OperatorMatrix, S: OperatorMatrix) -> OperatorMatrix:
    """``S^{1/2} K S^{-1/2}``, made exactly symmetric.

    ``S`` eigenvalues below ``1e-12`` times the largest are clipped; clipping
    more than one percent of them is an error.
    """
    if K.kind is not MatrixKind.NP or S.kind is not MatrixKind.SINGLE_LAYER:
        raise AssemblyError("symmetrize expects an NP matrix and a single-layer matrix")
    if K.shape != S.shape or K.basis != S.basis:
        raise AssemblyError("NP and single-layer matrices are not on the same discretization")
    B = 0.5 * (S.data + S.data.T)
    w, U = np.linalg.eigh(B)
    eps = CLIP_RELATIVE * w.max()
    clipped = int(np.count_nonzero(w < eps))
    if clipped > CLIP_LIMIT * len(w):
        raise AssemblyError(f"{clipped} of {len(w)} single-layer eigenvalues clipped; grid too coarse")
    w = np.maximum(w, eps)
    half = (U * np.sqrt(w)) @ U.T
    ihalf = (U / np.sqrt(w)) @ U.T
    M = half @ K.data @ ihalf
    M = 0.5 * (M + M.T)
    prov = _derived(MatrixKind.SYMMETRIZED, K, S.build_hash.to_bytes(8, "little"))
    prov["clip_count"] = clipped
    prov["single_layer_min_eig"] = float(np.linalg.eigvalsh(B)[0]) if clipped else float(w[0])
    # ihalf maps a K_c eigenvector to density coefficients
    return OperatorMatrix(M, MatrixKind.SYMMETRIZED, K.basis, K.d, K.grids, K.field, prov,
                          {"density_map": ihalf})


def modified_np(K: OperatorMatrix, grid=None, field: LameField | None = None) -> OperatorMatrix:
    """Left-multiply by ``1/kappa0(x)`` (block diagonal over directions)."""
    grids = _grids(grid) if grid is not None else K.grids
    field = field if field is not None else K.field
    if K.kind is not MatrixKind.NP:
        raise AssemblyError("modified_np expects an NP matrix")
    try:
        k0 = [field.kappa0(g.nodes, c) for c, g in enumerate(grids)]
    except Exception as exc:  # noqa: BLE001
        raise AssemblyError(f"kappa0 evaluation failed: {exc}") from exc
    if field.classification is not Classification.VARIABLE:
        # exact scaling, one constant per component
        rows = np.concatenate([np.full(n, k[0]) for n, k in zip(_block_sizes(K, grids), k0)])
        data = K.data / rows[:, None]
    elif K.basis == "harmonic":
        data = HarmonicBasis(grids).multiplication([1.0 / k for k in k0]) @ K.data
    else:
        data = np.repeat(1.0 / np.concatenate(k0), 3)[:, None] * K.data
    prov = _derived(MatrixKind.MODIFIED, K, b"")
    return OperatorMatrix(data, MatrixKind.MODIFIED, K.basis, K.d, grids, field, prov)


def _block_sizes(K: OperatorMatrix, grids) -> list[int]:
    if K.basis == "harmonic":
        return [3 * s for s in HarmonicBasis(grids).sizes]
    return [K.d * g.size for g in grids]


def oddness_audit(grid: QuadratureGrid, field: LameField, neighbours: int = 6) -> float:
    """Relative size of ``N(x,y) + N(y,x)`` for the antisymmetric leading part
    over near-neighbour node pairs; small when the odd part dominates."""
    x, nu = grid.nodes, grid.normals
    lam, mu = field.evaluate(x, grid.component_id)
    num = den = 0.0
    for i in range(grid.size):
        d = np.linalg.norm(x - x[i], axis=1)
        d[i] = np.inf
        js = np.argsort(d)[:neighbours]
        r = x[i] - x[js]
        c = 1.0 / (4 * math.pi * (lam[i] + 2 * mu[i]))
        a_ij = (nu[js][:, :, None] * r[:, None, :] - r[:, :, None] * nu[js][:, None, :]) / d[js, None, None] ** 3
        a_ji = (nu[i][None, :, None] * (-r)[:, None, :] - (-r)[:, :, None] * nu[i][None, None, :]) / d[js, None, None] ** 3
        num += float(np.sum((mu[i] * c * (a_ij + a_ji)) ** 2))
        den += float(np.sum((mu[i] * c * a_ij) ** 2))
    return math.sqrt(num / den)


# ----------------------------------------------------------------- cache

_HEADER = struct.Struct("<4sIIIQQ")


def cache_store(matrix: OperatorMatrix, path) -> Path:
    """Write the matrix in the NPSM format.

    The kind tag carries the operator kind in its low byte and the basis
    family in the next byte.
    """
    path = Path(path)
    data = np.ascontiguousarray(matrix.data, dtype="<f8")
    if data.ndim != 2 or data.shape[0] != data.shape[1] or data.shape[0] % matrix.d:
        raise CacheError("matrix must be square with size divisible by d")
    tag = _KIND_TAG[matrix.kind] | (_BASIS_TAG[matrix.basis] << 8)
    payload = data.tobytes()
    header = _HEADER.pack(CACHE_MAGIC, CACHE_VERSION, tag, matrix.d, data.shape[0] // matrix.d,
                          matrix.build_hash)
    checksum = hashlib.blake2b(payload, digest_size=8).digest()
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(payload)
        fh.write(checksum)
    tmp.replace(path)
    return path


def cache_header(path) -> dict:
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
    if len(raw) < _HEADER.size:
        raise CacheError(f"{path}: truncated header")
    magic, version, tag, d, n, ghash = _HEADER.unpack(raw)
    if magic != CACHE_MAGIC:
        raise CacheError(f"{path}: bad magic {magic!r}")
    if version != CACHE_VERSION:
        raise CacheError(f"{path}: unsupported cache version {version} (expected {CACHE_VERSION})")
    kinds = {v: k for k, v in _KIND_TAG.items()}
    bases = {v: k for k, v in _BASIS_TAG.items()}
    if tag & 0xFF not in kinds or tag >> 8 not in bases:
        raise CacheError(f"{path}: unknown kind tag {tag}")
    return {"kind": kinds[tag & 0xFF], "basis": bases[tag >> 8], "d": d, "n": n, "build_hash": ghash,
            "version": version}


def cache_load(path, expect_hash: int | None = None, grids=None, field=None) -> OperatorMatrix:
    path = Path(path)
    head = cache_header(path)
    size = head["d"] * head["n"]
    with open(path, "rb") as fh:
        fh.seek(_HEADER.size)
        payload = fh.read(size * size * 8)
        checksum = fh.read(8)
        trailing = fh.read(1)
    if len(payload) != size * size * 8 or len(checksum) != 8:
        raise CacheError(f"{path}: checksum error (file truncated)")
    if trailing:
        raise CacheError(f"{path}: dimension mismatch (trailing bytes)")
    if hashlib.blake2b(payload, digest_size=8).digest() != checksum:
        raise CacheError(f"{path}: checksum error")
    if expect_hash is not None and head["build_hash"] != expect_hash:
        raise CacheError(f"{path}: grid hash mismatch")
    data = np.frombuffer(payload, dtype="<f8").reshape(size, size).astype(float)
    prov = {"build_hash": head["build_hash"], "loaded_from": str(path)}
    return OperatorMatrix(data, head["kind"], head["basis"], head["d"],
                          tuple(grids) if grids is not None else None, field, prov)
