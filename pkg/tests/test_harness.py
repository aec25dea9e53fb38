import csv
import io

import numpy as np
import numpy.testing as npt
import pytest
import yaml

from twophase_mlse.cli import main
from twophase_mlse.config import ConfigError, Scheme, SimConfig, config_from_dict, load_config
from twophase_mlse.harness import (draw_trials, received, run_sweep, run_trial, trial_rng,
                                   wilson_interval)
from twophase_mlse.metrics import Criterion, exhaustive_decode
from twophase_mlse.report import COLUMNS, emit_outputs, results_csv

BASE = dict(scenario="BLOCK_FADING", M=1, P=2, N=15, T=5,
            training_symbols=[-1, -1, -1, 1, -1], ebn0_grid_db=[4.0, 12.0],
            schemes=["TWO_PHASE_LS", "CONVENTIONAL_LS"], blocks_per_point=300, base_seed=7)


def make(**overrides):
    return config_from_dict({**BASE, **overrides})


def test_config_round_trip(tmp_path):
    cfg = make(alpha=None)
    path = tmp_path / "c.yaml"
    path.write_text(yaml.safe_dump(cfg.to_dict()))
    assert load_config(path) == cfg


@pytest.mark.parametrize("bad", [
    dict(colour="red"),
    dict(training_symbols=[-1, -1, 1]),
    dict(T=1, training_symbols=[1]),
    dict(N=5),
    dict(training_symbols=[1, 1, 1, 1, 0.5]),
    dict(training_symbols=[1, 1j, 1, 1, 1]),
    dict(schemes=["BOGUS"]),
    dict(scenario="GAUSS_MARKOV"),
    dict(N=40, schemes=["EXHAUSTIVE_NEAR_ML"]),
    dict(blocks_per_point=0),
])
def test_config_rejections(bad):
    with pytest.raises(ConfigError):
        make(**bad)


def test_config_missing_key():
    raw = dict(BASE)
    del raw["N"]
    with pytest.raises(ConfigError):
        config_from_dict(raw)


def test_unit_modulus_training_always_supports_ls():
    # the top P x P block of B_P is lower triangular with b_1 on the diagonal
    cfg = make(P=3, T=3, N=8, training_symbols=[1, 1, 1])
    assert cfg.T == cfg.P


def test_trial_streams_are_labeled_and_independent():
    a = trial_rng(1, 5, "noise").standard_normal(4)
    npt.assert_array_equal(a, trial_rng(1, 5, "noise").standard_normal(4))
    assert not np.array_equal(a, trial_rng(1, 5, "channel").standard_normal(4))
    assert not np.array_equal(a, trial_rng(1, 6, "noise").standard_normal(4))
    assert not np.array_equal(a, trial_rng(2, 5, "noise").standard_normal(4))


def test_batch_draws_match_single_draws():
    cfg = make()
    batch = draw_trials(cfg, [3, 4, 5])
    single = draw_trials(cfg, [4])
    npt.assert_array_equal(batch.data[1], single.data[0])
    npt.assert_array_equal(batch.taps[1], single.taps[0])
    npt.assert_array_equal(batch.noise[1], single.noise[0])


def test_run_trial_deterministic_and_common_numbers():
    cfg = make(schemes=["TWO_PHASE_LS", "CONVENTIONAL_LS", "CONVENTIONAL_PERFECT_CSI"])
    assert run_trial(cfg, 11, 6.0) == run_trial(cfg, 11, 6.0)
    # every scheme sees the same received vector: identical y drawn twice
    draws = draw_trials(cfg, [11])
    npt.assert_array_equal(received(cfg, draws, 0.25), received(cfg, draws, 0.25))


def test_perfect_csi_noiseless_trial_is_error_free():
    cfg = make(schemes=["CONVENTIONAL_PERFECT_CSI"])
    for k in range(50):
        rec = run_trial(cfg, k, 300.0)[Scheme.CONVENTIONAL_PERFECT_CSI]
        assert rec.bit_errors == 0 and not rec.word_error


def test_exhaustive_trial_matches_independent_enumeration():
    cfg = make(schemes=["EXHAUSTIVE_NEAR_ML"])
    draws = draw_trials(cfg, [2])
    y = received(cfg, draws, 10 ** (-0.6))[0]
    bp = np.array([[-1, 0], [-1, -1], [-1, -1], [1, -1], [-1, 1]], dtype=complex)
    h_hat = np.linalg.solve(bp.T @ bp, bp.T @ y[:5])
    idx, _ = exhaustive_decode(y, cfg.training, 1, 2, 15, h_hat, 10 ** (-0.6),
                               Criterion.NEAR_ML)
    rec = run_trial(cfg, 2, 6.0)[Scheme.EXHAUSTIVE_NEAR_ML]
    assert rec.decoded == tuple(idx)


def test_gauss_markov_trial_shapes():
    cfg = make(scenario="GAUSS_MARKOV", alpha=0.999,
               schemes=["TWO_PHASE_LS", "CONVENTIONAL_LMS", "CONVENTIONAL_PERFECT_CSI"])
    draws = draw_trials(cfg, [0, 1])
    assert draws.taps.shape == (2, cfg.L, 2)
    recs = run_trial(cfg, 0, 40.0)
    assert recs[Scheme.CONVENTIONAL_PERFECT_CSI].bit_errors == 0


def test_wilson_interval():
    lo, hi = wilson_interval(0, 100)
    assert lo == 0 and 0 < hi < 0.05
    lo, hi = wilson_interval(50, 100)
    assert lo == pytest.approx(0.4038, abs=1e-4) and hi == pytest.approx(0.5962, abs=1e-4)


def test_sweep_bookkeeping():
    cfg = make()
    result = run_sweep(cfg)
    assert len(result.points) == 4
    for p in result.points:
        assert p.blocks == 300
        assert p.ber == p.bit_errors / (300 * 10)
        assert p.wer == p.word_errors / 300
        lo, hi = p.wer_interval()
        assert lo <= p.wer <= hi


def test_sweep_worker_invariance():
    cfg = make(blocks_per_point=2500, ebn0_grid_db=[8.0])
    assert results_csv(run_sweep(cfg, workers=1)) == results_csv(run_sweep(cfg, workers=2))


def test_stop_rule_checks_chunk_boundaries():
    cfg = make(blocks_per_point=5000, ebn0_grid_db=[0.0], min_word_errors=200)
    result = run_sweep(cfg)
    assert {p.blocks for p in result.points} == {1000}


def test_wer_nonincreasing_within_ci():
    cfg = make(blocks_per_point=2000, ebn0_grid_db=[0.0, 5.0, 10.0, 15.0])
    result = run_sweep(cfg)
    for scheme in cfg.schemes:
        curve = result.curve(scheme)
        for a, b in zip(curve, curve[1:]):
            assert b.wer_interval()[0] <= a.wer_interval()[1]


def test_emit_outputs(tmp_path):
    cfg = make(blocks_per_point=200)
    result = run_sweep(cfg)
    paths = emit_outputs(result, tmp_path, render=False)
    names = {p.name for p in paths}
    assert {"results.csv", "config.yaml", "plot_results.py"} <= names
    text = (tmp_path / "results.csv").read_text()
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == COLUMNS
    assert len(rows) - 1 == len(cfg.schemes) * len(cfg.ebn0_grid_db)
    emit_outputs(result, tmp_path, render=False)
    assert (tmp_path / "results.csv").read_text() == text
    assert load_config(tmp_path / "config.yaml") == cfg


def test_empty_scheme_list_gives_header_only_csv():
    result = run_sweep(make(schemes=[]))
    assert results_csv(result).strip() == ",".join(COLUMNS)


def test_emit_outputs_renders_figures(tmp_path):
    result = run_sweep(make(blocks_per_point=100))
    emit_outputs(result, tmp_path)
    assert (tmp_path / "ber.png").stat().st_size > 0
    assert (tmp_path / "wer.png").stat().st_size > 0


def test_cli_complexity(capsys):
    assert main(["complexity", "--M", "1", "--P", "2", "--N", "15", "--T", "5"]) == 0
    out = capsys.readouterr().out
    assert "two-phase total=1200" in out
    assert "conventional MLSE=80" in out
    assert "exhaustive=1966080" in out


def test_cli_verify(capsys):
    assert main(["verify", "--instances", "30"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 3 and all(line.startswith("[PASS]") for line in lines)


def test_cli_simulate(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.yaml"
    cfg_path.write_text(yaml.safe_dump(make(blocks_per_point=100).to_dict()))
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(cfg_path), "--out", str(out), "--seed", "3",
                 "--no-plots"]) == 0
    rows = list(csv.DictReader((out / "results.csv").open()))
    assert {r["seed"] for r in rows} == {"3"}


def test_cli_simulate_bad_config(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.yaml"
    cfg_path.write_text(yaml.safe_dump({**BASE, "extra": 1}))
    assert main(["simulate", "--config", str(cfg_path), "--out", str(tmp_path)]) == 2
    assert "unknown config keys" in capsys.readouterr().err
