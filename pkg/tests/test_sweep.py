# tests/test_sweep.py
from fractions import Fraction

import pytest

from noisygt.condense import kautz_singleton_matrix
from noisygt.config import GridPoint, SweepConfig
from noisygt.errors import ParameterRangeError
from noisygt.serializer import SWEEP_COLUMNS, write_matrix
from noisygt.sweep import run_sweep


def _config(**overrides):
    settings = dict(sparsity=4, trials=30, seed=5, grid=(GridPoint(e0=0, e1=0),))
    settings.update(overrides)
    return SweepConfig(**settings)


def test_noiseless_sweep_always_succeeds():
    result = run_sweep(_config())
    assert len(result.rows) == 30
    assert result.success_rate == 1
    assert all(row["false_neg"] == 0 for row in result.rows)
    assert [row["trial"] for row in result.rows] == list(range(30))


def test_noisy_grid_point_budgets():
    cfg = _config(p=Fraction(1, 10), nu=Fraction(1, 1000), grid=(GridPoint(p=Fraction(1, 10), nu=Fraction(1, 1000)),))
    result = run_sweep(cfg)
    assert result.design.matrix.rows == 8192
    assert all((row["e0_applied"], row["e1_applied"]) == (819, 2) for row in result.rows)
    assert result.summaries[0].success_rate == 1


def test_sweep_is_reproducible(tmp_path):
    cfg = _config(grid=(GridPoint(e0=0, e1=0), GridPoint(e0=40, e1=3)))
    first = run_sweep(cfg.with_output(tmp_path / "a.csv"))
    second = run_sweep(cfg.with_output(tmp_path / "b.csv"))
    assert first.rows == second.rows
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    header = (tmp_path / "a.csv").read_text().splitlines()[0]
    assert header == ",".join(SWEEP_COLUMNS)


def test_threads_keep_trial_order():
    cfg = _config(grid=(GridPoint(e0=10, e1=2),))
    assert run_sweep(cfg).rows == run_sweep(_config(grid=cfg.grid, max_workers=4)).rows


def test_progress_callback_sees_every_trial():
    seen = []
    run_sweep(_config(trials=7), lambda done, total: seen.append((done, total)))
    assert seen[-1] == (7, 7)
    assert len(seen) == 7


def test_sweep_on_a_matrix_file(tmp_path):
    path = tmp_path / "ks.gtm"
    write_matrix(kautz_singleton_matrix(5, 2), path)
    cfg = SweepConfig(
        sparsity=2, trials=20, seed=1, grid=(GridPoint(e0=0, e1=0),), matrix_path=path, T=5, nu_over_gamma=Fraction(0)
    )
    result = run_sweep(cfg)
    # 4-disjunct, so two items decode exactly
    assert all(row["decoded_weight"] == 2 for row in result.rows)
    assert result.design.K == 25


def test_sparsity_larger_than_the_design(tmp_path):
    path = tmp_path / "ks.gtm"
    write_matrix(kautz_singleton_matrix(2, 1), path)
    cfg = SweepConfig(sparsity=3, trials=1, seed=0, grid=(GridPoint(e0=0, e1=0),), matrix_path=path, T=2, nu_over_gamma=0)
    with pytest.raises(ParameterRangeError):
        run_sweep(cfg)
