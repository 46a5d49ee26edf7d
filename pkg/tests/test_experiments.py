import math

import numpy as np
import pytest

from asqg.errors import BoxTooSmall, ConfigError, IOFailure
from asqg.experiments import runners
from asqg.experiments.config import DEFAULTS, EXPERIMENTS, SCHEMA, ExperimentConfig, parse_text, parse_value
from asqg.experiments.report import ExperimentReport, PlotSpec, emit_report, read_csv, to_csv_text


# -- config ------------------------------------------------------------------------------


def test_every_default_key_is_documented():
    assert set(DEFAULTS) == set(EXPERIMENTS)
    for values in DEFAULTS.values():
        assert set(values) <= set(SCHEMA)


def test_parse_text_kinds():
    text = """
    # comment
    experiment = pseudo_error
    N_values = 8, 16,32   # trailing comment
    K = auto
    horizon = inf
    alpha = 0.3
    """
    out = parse_text(text)
    assert out == {"experiment": "pseudo_error", "N_values": [8, 16, 32], "K": "auto", "horizon": math.inf,
                   "alpha": 0.3}
    assert parse_value("K", "2") == 2.0
    assert parse_value("operators", "commutator") == ["commutator"]


@pytest.mark.parametrize("text", ["alpha 0.3", "alpha = 0.3\nalpha = 0.4", "bogus = 1", "N_values = 8, x",
                                  "N_values = ,", "J = 1.5"])
def test_parse_text_errors(text):
    with pytest.raises(ConfigError):
        parse_text(text)


def test_build_applies_defaults_and_overrides():
    cfg = ExperimentConfig.build("pseudo_error", {"alpha": 0.3}, {"N_values": "8,16", "lam": 2})
    assert cfg["alpha"] == 0.3 and cfg["N_values"] == [8, 16] and cfg["lam"] == 2
    assert cfg["beta"] == DEFAULTS["pseudo_error"]["beta"]
    with pytest.raises(ConfigError):
        cfg["J"]


@pytest.mark.parametrize("experiment,settings", [
    ("pseudo_error", {"J": 2}),
    ("nope", {}),
    ("constants", {"experiment": "radial_decay"}),
    ("constants", {"alpha_values": [0.5, 1.0]}),
    ("pseudo_error", {"alpha": 0.0}),
])
def test_build_rejects(experiment, settings):
    with pytest.raises(ConfigError):
        ExperimentConfig.build(experiment, settings)


def test_hash_is_stable_and_sensitive():
    a = ExperimentConfig.build("radial_decay")
    b = ExperimentConfig.build("radial_decay", {"r_min": 4})
    c = ExperimentConfig.build("radial_decay", {"r_min": 5.0})
    assert a.hash == b.hash != c.hash
    assert len(a.hash) == 16
    assert a.canonical().startswith("experiment = radial_decay\n")


def test_from_file(tmp_path):
    (tmp_path / "c.cfg").write_text("experiment = constants\nalpha_values = 0.5\n")
    cfg = ExperimentConfig.from_file(tmp_path / "c.cfg")
    assert cfg.experiment == "constants" and cfg["alpha_values"] == [0.5]
    (tmp_path / "d.cfg").write_text("alpha_values = 0.5\n")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_file(tmp_path / "d.cfg")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_file(tmp_path / "missing.cfg")


def test_bad_grid_is_a_config_error():
    cfg = ExperimentConfig.build("approx_rates", {"grid_n": 15})
    with pytest.raises(ConfigError):
        cfg.grid()


def test_output_directory_check(tmp_path):
    (tmp_path / "file").write_text("x")
    cfg = ExperimentConfig.build("constants", out=tmp_path / "file" / "sub")
    with pytest.raises(ConfigError):
        cfg.check_output()


# -- reports -----------------------------------------------------------------------------


def sample_report():
    rows = [{"N": n, "err": 1.0 / n, "ok": n > 8, "label": "a"} for n in (8, 16, 32)]
    rows.append({"N": 64, "err": math.nan, "ok": True, "label": "b"})
    return ExperimentReport("demo", "0123456789abcdef", ["N", "err", "ok", "label"], rows, {"alpha": "0.5"},
                            {"slope": -1.0, "flag": True}, 1.5, PlotSpec("N", ["err"], loglog=True))


def test_csv_round_trip():
    meta, columns, rows = read_csv(to_csv_text(sample_report()))
    assert meta["experiment"] == "demo" and meta["config_hash"] == "0123456789abcdef"
    assert meta["parameters"] == {"alpha": "0.5"}
    assert meta["summary"] == {"slope": -1.0, "flag": True}
    assert columns == ["N", "err", "ok", "label"]
    assert rows[1] == {"N": 16, "err": 1 / 16, "ok": True, "label": "a"}
    assert math.isnan(rows[3]["err"])


def test_rows_must_cover_columns():
    with pytest.raises(ValueError):
        ExperimentReport("demo", "x", ["a", "b"], [{"a": 1}])


def test_emitted_files_are_deterministic(tmp_path):
    rep = sample_report()
    paths = [emit_report(rep, tmp_path / d, fmt) for d in ("one", "two") for fmt in ("csv", "svg")]
    assert paths[0].name == "demo_0123456789abcdef.csv"
    assert paths[0].read_bytes() == paths[2].read_bytes()
    assert paths[1].read_bytes() == paths[3].read_bytes()
    assert "config_hash=0123456789abcdef" in paths[1].read_text()


def test_emit_failures(tmp_path):
    (tmp_path / "file").write_text("x")
    with pytest.raises(IOFailure):
        emit_report(sample_report(), tmp_path / "file", "csv")
    with pytest.raises(ValueError):
        emit_report(sample_report(), tmp_path, "png")


# -- drivers -------------------------------------------------------------------------------


def test_constants_driver():
    rep = runners.run_experiment(ExperimentConfig.build("constants", {"alpha_values": [0.5]}))
    assert rep.rows[0]["C0"] == pytest.approx(2 * math.pi, abs=1e-6)
    assert rep.rows[0]["K_alpha"] == pytest.approx(13.1450, abs=1e-3)
    assert rep.config_hash == ExperimentConfig.build("constants", {"alpha_values": [0.5]}).hash


def test_radial_decay_driver():
    cfg = ExperimentConfig.build("radial_decay", {"t_values": [0.5], "samples": 9})
    rep = runners.run_experiment(cfg)
    assert len(rep.rows) == 9
    assert rep.summary["exponent_alpha0.5"] <= runners.decay_bound(0.5) + 0.2
    with pytest.raises(ConfigError):
        runners.run_experiment(ExperimentConfig.build("radial_decay", {"grid_L": 8.0, "r_max": 8.0}))


def test_rate_sweep_needs_four_points():
    with pytest.raises(ConfigError):
        runners.run_experiment(ExperimentConfig.build("approx_rates", {"N_values": [8, 16, 32]}))
    with pytest.raises(ConfigError):
        runners.run_experiment(ExperimentConfig.build("approx_rates", {"operators": ["nope"]}))


def test_translates_geometry():
    c = runners.translate_centers(1.0, 3)
    assert np.allclose(c, 7 / 3 - np.array([1.0, 2.0, 4.0]))
    assert runners._periodic_gap(-3.0, 3.0, 7.0) == pytest.approx(1.0)
    with pytest.raises(ConfigError):
        runners.run_experiment(ExperimentConfig.build("compose_translates", {"J": 4}))
    with pytest.raises(BoxTooSmall):
        runners.run_experiment(ExperimentConfig.build("compose_translates", {"R_values": [0.3]}))
