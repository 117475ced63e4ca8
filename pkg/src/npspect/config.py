"""Experiment configuration: an INI file with ``key = value`` sections.

Example::

    [run]
    output = results
    workers = 1
    seed = 0

    [geometry]
    kind = sphere          ; sphere | ellipsoid | two_spheres
    radius = 1.0

    [ladder]
    grids = 12x24, 16x32, 24x48

    [material]
    kind = constant        ; constant | per_component | modulated
    lambda = 1.0
    mu = 1.0

    [analysis]
    matrices = symmetrized, modified
    eps = 0.02
    oracle_jmax = 4

    [fit.zero]
    tip = 0
    side = above
    window = 5, 40
    family = tangential

Unknown sections or keys are rejected so that typos do not pass silently.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field
from pathlib import Path

from .assembly import MatrixKind
from .geometry import Surface, make_ellipsoid, make_sphere, two_spheres
from .material import LameField, constant_field, modulated_field, per_component_field

__all__ = ["ConfigError", "FitRequest", "ExperimentConfig", "load_config", "parse_config", "CACHE_ENV"]

CACHE_ENV = "NPSPECT_CACHE_DIR"
DEFAULT_CACHE = ".npspect-cache"

_KEYS = {
    "run": {"output", "workers", "seed", "cache_dir"},
    "geometry": {"kind", "radius", "axes", "distance"},
    "ladder": {"grids"},
    "material": {"kind", "lambda", "mu", "table", "lambda_range", "mu_range", "axis"},
    "analysis": {"matrices", "primary", "eps", "oracle_jmax", "classify_samples"},
}
_FIT_KEYS = {"tip", "side", "window", "mode", "family"}
_MATRICES = {"single_layer": MatrixKind.SINGLE_LAYER, "np": MatrixKind.NP,
             "symmetrized": MatrixKind.SYMMETRIZED, "modified": MatrixKind.MODIFIED}


class ConfigError(ValueError):
    """Raised with the offending ``section.key`` in the message."""


@dataclass(frozen=True)
class FitRequest:
    name: str
    tip: float
    side: str = "above"
    window: tuple[int, int] | None = None
    mode: str = "power"
    family: str = "all"


@dataclass
class ExperimentConfig:
    output: Path = Path("results")
    workers: int = 1
    seed: int = 0
    cache_dir: Path | None = None
    geometry: dict = field(default_factory=lambda: {"kind": "sphere", "radius": 1.0})
    ladder: tuple = ((12, 24), (16, 32), (24, 48))
    material: dict = field(default_factory=lambda: {"kind": "constant", "lambda": 1.0, "mu": 1.0})
    matrices: tuple = ("symmetrized",)
    primary: str = "symmetrized"
    eps: float = 0.02
    oracle_jmax: int = 0
    classify_samples: int = 200
    fits: list[FitRequest] = field(default_factory=list)

    def surfaces(self) -> list[Surface]:
        g = self.geometry
        if g["kind"] == "sphere":
            return [make_sphere(g.get("radius", 1.0))]
        if g["kind"] == "ellipsoid":
            return [make_ellipsoid(*g["axes"])]
        return two_spheres(g.get("radius", 1.0), g.get("distance", 4.0))

    def field(self) -> LameField:
        m = self.material
        if m["kind"] == "constant":
            return constant_field(m["lambda"], m["mu"], len(self.surfaces()))
        if m["kind"] == "per_component":
            return per_component_field(m["table"])
        return modulated_field(m["lambda_range"], m["mu_range"], m.get("axis", (0.0, 0.0, 1.0)))

    def matrix_kinds(self) -> list[MatrixKind]:
        return [_MATRICES[m] for m in self.matrices]

    def primary_kind(self) -> MatrixKind:
        return _MATRICES[self.primary]

    def to_ini(self) -> str:
        """Fully resolved configuration in the input format."""
        cp = configparser.ConfigParser()
        run = {"output": str(self.output), "workers": str(self.workers), "seed": str(self.seed)}
        if self.cache_dir is not None:
            run["cache_dir"] = str(self.cache_dir)
        cp["run"] = run
        cp["geometry"] = {k: _fmt(v) for k, v in self.geometry.items()}
        cp["ladder"] = {"grids": ", ".join(f"{a}x{b}" for a, b in self.ladder)}
        mat = dict(self.material)
        if "table" in mat:
            mat["table"] = ", ".join(f"{a!r}:{b!r}" for a, b in mat["table"])
        cp["material"] = {k: _fmt(v) for k, v in mat.items()}
        cp["analysis"] = {"matrices": ", ".join(self.matrices), "primary": self.primary, "eps": repr(self.eps),
                          "oracle_jmax": str(self.oracle_jmax), "classify_samples": str(self.classify_samples)}
        for f in self.fits:
            sec = {"tip": repr(f.tip), "side": f.side, "mode": f.mode, "family": f.family}
            if f.window:
                sec["window"] = f"{f.window[0]}, {f.window[1]}"
            cp[f"fit.{f.name}"] = sec
        lines = []
        for s in cp.sections():
            lines.append(f"[{s}]")
            lines.extend(f"{k} = {v}" for k, v in cp[s].items())
            lines.append("")
        return "\n".join(lines)


def _fmt(v) -> str:
    if isinstance(v, (list, tuple)):
        return ", ".join(repr(float(x)) if isinstance(x, float) else str(x) for x in v)
    return repr(v) if isinstance(v, float) else str(v)


def _floats(raw: str, where: str, n: int | None = None) -> tuple[float, ...]:
    try:
        vals = tuple(float(x) for x in raw.replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"{where}: expected numbers, got {raw!r}") from None
    if n is not None and len(vals) != n:
        raise ConfigError(f"{where}: expected {n} numbers, got {len(vals)}")
    return vals


def _number(raw: str, where: str, kind=float):
    try:
        return kind(raw)
    except ValueError:
        raise ConfigError(f"{where}: expected {kind.__name__}, got {raw!r}") from None


def _ladder(raw: str) -> tuple:
    out = []
    for item in raw.split(","):
        item = item.strip().lower()
        try:
            a, b = item.split("x")
            out.append((int(a), int(b)))
        except ValueError:
            raise ConfigError(f"ladder.grids: bad grid size {item!r}, expected NTxNP") from None
    if not out:
        raise ConfigError("ladder.grids: empty")
    return tuple(out)


def parse_config(text: str, base: Path | None = None) -> ExperimentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unreadable config: {exc}") from None
    cfg = ExperimentConfig()
    fits = []
    for sec in cp.sections():
        keys = set(cp[sec])
        if sec.startswith("fit."):
            allowed = _FIT_KEYS
        elif sec in _KEYS:
            allowed = _KEYS[sec]
        else:
            raise ConfigError(f"unknown section [{sec}]")
        for k in keys - allowed:
            raise ConfigError(f"{sec}.{k}: unknown key")
    if "run" in cp:
        r = cp["run"]
        cfg.output = Path(r.get("output", "results"))
        cfg.workers = _number(r.get("workers", "1"), "run.workers", int)
        cfg.seed = _number(r.get("seed", "0"), "run.seed", int)
        if "cache_dir" in r:
            cfg.cache_dir = Path(r["cache_dir"])
        if cfg.workers < 1:
            raise ConfigError("run.workers: must be at least 1")
    if "geometry" in cp:
        g = cp["geometry"]
        kind = g.get("kind", "sphere")
        if kind not in ("sphere", "ellipsoid", "two_spheres"):
            raise ConfigError(f"geometry.kind: unknown geometry {kind!r}")
        geo = {"kind": kind}
        if kind in ("sphere", "two_spheres"):
            geo["radius"] = _number(g.get("radius", "1.0"), "geometry.radius")
        if kind == "two_spheres":
            geo["distance"] = _number(g.get("distance", "4.0"), "geometry.distance")
        if kind == "ellipsoid":
            if "axes" not in g:
                raise ConfigError("geometry.axes: required for an ellipsoid")
            geo["axes"] = list(_floats(g["axes"], "geometry.axes", 3))
        cfg.geometry = geo
    if "ladder" in cp:
        cfg.ladder = _ladder(cp["ladder"].get("grids", ""))
    if "material" in cp:
        m = cp["material"]
        kind = m.get("kind", "constant")
        if kind == "constant":
            mat = {"kind": kind, "lambda": _number(m.get("lambda", "1.0"), "material.lambda"),
                   "mu": _number(m.get("mu", "1.0"), "material.mu")}
        elif kind == "per_component":
            if "table" not in m:
                raise ConfigError("material.table: required for per_component")
            table = []
            for item in m["table"].split(","):
                parts = item.strip().split(":")
                if len(parts) != 2:
                    raise ConfigError(f"material.table: bad entry {item.strip()!r}, expected lambda:mu")
                table.append(tuple(_number(p, "material.table") for p in parts))
            mat = {"kind": kind, "table": table}
        elif kind == "modulated":
            mat = {"kind": kind,
                   "lambda_range": list(_floats(m.get("lambda_range", "1, 1"), "material.lambda_range", 2)),
                   "mu_range": list(_floats(m.get("mu_range", "1, 2"), "material.mu_range", 2)),
                   "axis": list(_floats(m.get("axis", "0, 0, 1"), "material.axis", 3))}
        else:
            raise ConfigError(f"material.kind: unknown material {kind!r}")
        cfg.material = mat
    if "analysis" in cp:
        a = cp["analysis"]
        mats = tuple(x.strip() for x in a.get("matrices", "symmetrized").split(",") if x.strip())
        for x in mats:
            if x not in _MATRICES:
                raise ConfigError(f"analysis.matrices: unknown matrix {x!r}")
        cfg.primary = a.get("primary", mats[0] if mats else "symmetrized")
        if cfg.primary not in _MATRICES:
            raise ConfigError(f"analysis.primary: unknown matrix {cfg.primary!r}")
        cfg.matrices = mats if cfg.primary in mats else (cfg.primary,) + mats
        cfg.eps = _number(a.get("eps", "0.02"), "analysis.eps")
        if not cfg.eps > 0:
            raise ConfigError("analysis.eps: must be positive")
        cfg.oracle_jmax = _number(a.get("oracle_jmax", "0"), "analysis.oracle_jmax", int)
        cfg.classify_samples = _number(a.get("classify_samples", "200"), "analysis.classify_samples", int)
    for sec in cp.sections():
        if not sec.startswith("fit."):
            continue
        f = cp[sec]
        if "tip" not in f:
            raise ConfigError(f"{sec}.tip: required")
        side = f.get("side", "above")
        if side not in ("above", "below"):
            raise ConfigError(f"{sec}.side: expected above or below")
        mode = f.get("mode", "power")
        if mode not in ("power", "exponential"):
            raise ConfigError(f"{sec}.mode: expected power or exponential")
        family = f.get("family", "all")
        if family not in ("all", "tangential", "normal"):
            raise ConfigError(f"{sec}.family: expected all, tangential or normal")
        window = None
        if "window" in f:
            lo, hi = _floats(f["window"], f"{sec}.window", 2)
            window = (int(lo), int(hi))
        fits.append(FitRequest(sec[4:], _number(f["tip"], f"{sec}.tip"), side, window, mode, family))
    cfg.fits = fits
    if base is not None and not cfg.output.is_absolute():
        cfg.output = base / cfg.output
    try:
        cfg.surfaces()
        cfg.field()
    except ValueError as exc:
        raise ConfigError(f"material/geometry: {exc}") from None
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


def cache_directory(cfg: ExperimentConfig | None = None) -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    if cfg is not None and cfg.cache_dir is not None:
        return cfg.cache_dir
    return Path(DEFAULT_CACHE)
