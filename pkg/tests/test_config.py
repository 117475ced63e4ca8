import pytest

from npspect.assembly import MatrixKind
from npspect.config import ConfigError, ExperimentConfig, cache_directory, load_config, parse_config

FULL = """
[run]
output = out
workers = 2
seed = 7

[geometry]
kind = two_spheres
radius = 1.0
distance = 4.0

[ladder]
grids = 8x16, 12x24, 16x32

[material]
kind = per_component
table = 1:1, 1:2

[analysis]
matrices = symmetrized, modified   ; inline comment
eps = 0.02

[fit.zero]
tip = 0
side = above
window = 5, 40
family = tangential
"""


def test_parse_full():
    cfg = parse_config(FULL)
    assert cfg.workers == 2 and cfg.seed == 7
    assert cfg.ladder == ((8, 16), (12, 24), (16, 32))
    assert len(cfg.surfaces()) == 2 and cfg.field().component_count == 2
    assert cfg.matrix_kinds() == [MatrixKind.SYMMETRIZED, MatrixKind.MODIFIED]
    assert cfg.primary_kind() is MatrixKind.SYMMETRIZED
    assert cfg.fits[0].window == (5, 40) and cfg.fits[0].family == "tangential"


def test_resolved_round_trip():
    cfg = parse_config(FULL)
    again = parse_config(cfg.to_ini())
    assert again.to_ini() == cfg.to_ini()
    assert again.material == cfg.material and again.fits == cfg.fits


def test_defaults():
    cfg = parse_config("")
    assert isinstance(cfg, ExperimentConfig) and cfg.field().classification.name == "CONSTANT"


@pytest.mark.parametrize("text,where", [
    ("[material]\nmuu = 1", "material.muu"),
    ("[bogus]\nx = 1", "bogus"),
    ("[run]\nworkers = two", "run.workers"),
    ("[ladder]\ngrids = 8by16", "ladder.grids"),
    ("[material]\nkind = constant\nmu = -1", "material"),
    ("[geometry]\nkind = ellipsoid", "geometry.axes"),
    ("[analysis]\nmatrices = wrong", "analysis.matrices"),
    ("[analysis]\neps = 0", "analysis.eps"),
    ("[fit.a]\nside = above", "fit.a.tip"),
    ("[fit.a]\ntip = 0\nmode = cubic", "fit.a.mode"),
])
def test_errors_name_the_key(text, where):
    with pytest.raises(ConfigError, match=where.replace(".", r"\.")):
        parse_config(text)


def test_load_missing(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.cfg")


def test_cache_directory_precedence(monkeypatch, tmp_path):
    monkeypatch.delenv("NPSPECT_CACHE_DIR", raising=False)
    cfg = parse_config(f"[run]\ncache_dir = {tmp_path}")
    assert cache_directory(cfg) == tmp_path
    monkeypatch.setenv("NPSPECT_CACHE_DIR", str(tmp_path / "env"))
    assert cache_directory(cfg) == tmp_path / "env"
