"""
Tests for RunConfig loading: defaults, precedence, aliases and validation.
"""
import sys

import pytest

import settings
from core.config import RunConfig, load_config, resolve_workers
from core.errors import ConfigError
from core.limiters import LimiterConfig
from core.problems import get_problem


def _write(tmp_path, text):
    path = tmp_path / "run.cfg"
    path.write_text(text)
    return str(path)


def test_defaults():
    config = load_config(environ={})
    assert config.problem == "alfven1d"
    assert config.r == settings.DEFAULT_DEGREE
    assert config.cfl is None and config.signal_speed is None and config.entropy_guard is None
    assert config.flux == "es"
    assert config.limiter is True


def test_precedence(tmp_path):
    path = _write(tmp_path, "cfl=0.25\nproblem=riemann1\n")
    environ = {"RMHD_CFL": "0.3", "RMHD_SEED": "7"}
    assert load_config(environ=environ).cfl == 0.3
    from_file = load_config(path, environ=environ)
    assert from_file.cfl == 0.25 and from_file.problem == "riemann1" and from_file.seed == 7
    assert load_config(path, {"cfl": 0.1}, environ=environ).cfl == 0.1


def test_aliases_and_types(tmp_path):
    path = _write(tmp_path, "# comment\ntend=0.5\ndegree=3\ntvb_m=2\nlimiter=off\nladder=20,40\nout=results\n")
    config = load_config(path, environ={})
    assert config.t_end == 0.5
    assert config.r == 3
    assert config.tvb_M == 2.0
    assert config.limiter is False
    assert config.ladder == (20, 40)
    assert config.out_dir == "results"


def test_unknown_key(tmp_path):
    path = _write(tmp_path, "foo=1\n")
    with pytest.raises(ConfigError, match="Unknown config key: foo"):
        load_config(path, environ={})


def test_missing_file():
    with pytest.raises(ConfigError, match="not found"):
        load_config("/nonexistent/run.cfg", environ={})


@pytest.mark.parametrize("overrides", [
    {"cfl": "abc"}, {"cfl": -0.1}, {"flux": "upwind"}, {"nx": 0}, {"workers": 0},
    {"indicator": "shock"}, {"limiter": "maybe"}, {"samples": -1}, {"signal_speed": "sound"},
    {"entropy_guard": "maybe"},
])
def test_invalid_values(overrides):
    with pytest.raises(ConfigError):
        load_config(overrides=overrides, environ={})


def test_limiter_switch():
    preset = LimiterConfig(tvb_M=10.0)
    off = load_config(overrides={"limiter": "off"}, environ={}).limiter_config(preset)
    assert off.enabled is False and off.pcp is False

    on = load_config(overrides={"tvb_M": 0.5, "indicator": "all", "characteristic": "on"},
                     environ={}).limiter_config(preset)
    assert on.enabled and on.pcp
    assert on.tvb_M == 0.5 and on.indicator == "all" and on.characteristic is True

    smooth = RunConfig().limiter_config(LimiterConfig(enabled=False))
    assert smooth.enabled is False and smooth.pcp is True


def test_stepping_falls_back_to_the_preset():
    riemann = get_problem("riemann2")
    assert RunConfig().stepping(riemann) == {
        "cfl": riemann.cfl, "signal_speed": "light", "entropy_slack": settings.ENTROPY_SLACK,
    }
    alfven = get_problem("alfven1d")
    assert RunConfig().stepping(alfven) == {"cfl": settings.DEFAULT_CFL, "signal_speed": "fast", "entropy_slack": None}

    config = load_config(overrides={"cfl": "0.05", "signal_speed": "light", "entropy_guard": "off"}, environ={})
    assert config.stepping(riemann) == {"cfl": 0.05, "signal_speed": "light", "entropy_slack": None}


def test_cells():
    config = RunConfig(nx=10)
    assert config.cells((40,)) == (10,)
    assert config.cells((20, 20)) == (10, 10)
    assert config.cells((800, 2)) == (10, 2)
    assert RunConfig(nx=10, ny=4).cells((20, 20)) == (10, 4)
    assert RunConfig().cells((20, 20)) == (20, 20)


def test_workers():
    assert resolve_workers(RunConfig(workers=3)) == 3
    assert resolve_workers(RunConfig(workers=3, deterministic=True)) == 1
    assert resolve_workers(RunConfig()) >= 1


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
