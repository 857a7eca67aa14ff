"""Records, aggregate CSV, config parsing and figures."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cheaptalk import (
    SweepConfig,
    aggregate,
    build_game,
    enumerate_equilibria,
    nash_deviation_metrics,
    run_sweep,
)
from cheaptalk.config import ConfigError, parse_config, parse_config_text
from cheaptalk.figures import FIGURE_KINDS, FigureError, FigureSpec, render_figure
from cheaptalk.game import LossKind
from cheaptalk.records import (
    AGGREGATE_COLUMNS,
    RunRecord,
    emit_aggregates,
    emit_records,
    parse_float,
    parse_hist,
    parse_matrix,
    read_aggregates,
    read_records,
)

finite = st.floats(-1, 1, allow_nan=False)


@st.composite
def records(draw):
    pol = draw(st.booleans())
    return RunRecord(
        seed=draw(st.integers(0, 2**64 - 1)), game={"n_types": 6, "prior": "uniform"}, fingerprint="abc",
        bias=draw(st.floats(0, 1)), alpha=0.1, lam=5e-6, bias_index=draw(st.integers(0, 100)), alpha_index=0,
        lambda_index=0, replication=draw(st.integers(0, 999)), converged=draw(st.booleans()),
        periods_elapsed=draw(st.integers(1, 10**7)), u_sender=draw(finite), u_receiver=draw(finite),
        mutual_info=draw(st.one_of(finite, st.just(math.nan))), max_subopt_sender=draw(finite),
        max_subopt_receiver=draw(finite), gain_sender=draw(finite), gain_receiver=draw(finite),
        is_eps_nash=draw(st.booleans()),
        policy_sender=np.eye(6)[::-1] / 1.0 if pol else None,
        policy_receiver=np.full((6, 11), 1 / 11) if pol else None,
    )


@given(records())
def test_record_json_round_trip(rec):
    back = RunRecord.from_json(rec.to_json(with_policies=True))
    assert back.same_values(rec)


def test_record_file_round_trip(tmp_path):
    rec = RunRecord(1, {"n_types": 6}, "f", 0.1, 0.1, 5e-6, 1, 0, 0, 2, True, 10, -0.1, -0.2, 0.3,
                    0.0, 0.0, 0.0, 0.0, True, np.eye(6), np.eye(6, 11))
    p = emit_records([rec, rec], tmp_path / "sub" / "r.jsonl", with_policies=True)
    got = read_records(p)
    assert len(got) == 2 and got[0].same_values(rec)
    emit_records([rec], p)
    assert read_records(p)[0].policy_sender is None
    assert '"lambda":5e-06' in p.read_text() and '"U_R":-0.2' in p.read_text()


def test_unwritable_output_raises(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        emit_records([], blocker / "r.jsonl")


@pytest.fixture(scope="module")
def tiny_sweep():
    return run_sweep(SweepConfig(bias_grid=(0.0, 0.25), n_replications=3, max_periods=50_000, window=500))


def test_aggregate_csv_round_trip(tmp_path, tiny_sweep):
    p = emit_aggregates(tiny_sweep.aggregates, tmp_path / "agg.csv")
    rows = read_aggregates(p)
    assert list(rows[0]) == list(AGGREGATE_COLUMNS) and len(rows) == 2
    for row, agg in zip(rows, tiny_sweep.aggregates):
        assert parse_float(row["bias"]) == agg.bias
        s = agg.summaries["mutual_info"]
        assert parse_float(row["mutual_info_median"]) == s.median or math.isnan(s.median)
        np.testing.assert_array_equal(parse_hist(row["u_receiver_hist"]), agg.summaries["u_receiver"].hist)
        if agg.modal_sender is not None:
            np.testing.assert_array_equal(parse_matrix(row["modal_sender"]), agg.modal_sender)
        assert row["complete"] == "true"


def test_empty_aggregate_csv_has_header(tmp_path):
    p = emit_aggregates([], tmp_path / "agg.csv")
    assert p.read_text().strip().split(",") == list(AGGREGATE_COLUMNS)


# ------------------------------------------------------------------- config


def test_empty_config_gives_defaults():
    cfg = parse_config_text("")
    assert cfg.alpha == 0.1 and cfg.lam == 5e-6 and cfg.sim.window == 10_000
    assert len(cfg.sweep.bias_grid) == 101 and cfg.sweep.n_replications == 1000


def test_config_values(tmp_path):
    text = """
game:
  n_types: 4
  loss: quartic
learner:
  alpha: 0.2
  lambda: 1.0e-5
sim:
  window: 50
  max_periods: 1000
sweep:
  bias_grid: {start: 0.0, stop: 0.1, step: 0.05}
  n_replications: 3
  base_seed: 9
"""
    p = tmp_path / "c.yaml"
    p.write_text(text)
    cfg = parse_config(p)
    assert cfg.game_spec().n_types == 4 and cfg.game_spec().loss_kind is LossKind.QUARTIC
    assert cfg.sweep.bias_grid == (0.0, 0.05, 0.1)
    assert cfg.sweep.alpha_grid == (0.2,) and cfg.sweep.lambda_grid == (1e-5,)
    assert cfg.sweep.window == 50 and cfg.sweep.base_seed == 9
    assert cfg.with_seed(4).sim.seed == 4 and cfg.with_seed(4).sweep.base_seed == 4


@pytest.mark.parametrize("text,line,fragment", [
    ("game:\n  n_types: 6\n  bias: -0.5\n", 3, "game.bias"),
    ("learner:\n  alpha: 2.0\n", 2, "alpha"),
    ("sim:\n  window: 10\n  rel_tol: 1e-3\n  colour: red\n", 4, "sim.colour"),
    ("extra:\n  x: 1\n", 1, "unknown block"),
    ("game:\n  prior: bimodal\n", 2, "prior"),
    ("sweep:\n  n_replications: 2.5\n", 2, "integer"),
    ("sweep:\n  bias_grid: 0.1\n", 2, "bias_grid"),
])
def test_config_errors_name_the_line(text, line, fragment):
    with pytest.raises(ConfigError) as exc:
        parse_config_text(text, "x.yaml")
    assert str(exc.value).startswith(f"x.yaml:{line}: ") and fragment in str(exc.value)


def test_config_syntax_error():
    with pytest.raises(ConfigError):
        parse_config_text("game: [1, 2\n", "bad.yaml")


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        parse_config(tmp_path / "nope.yaml")


# ------------------------------------------------------------------ figures


@pytest.fixture(scope="module")
def equilibrium_aggregates():
    """One cell per bias whose runs sit exactly on the enumerated equilibria."""
    out = []
    for i, b in enumerate((0.0, 0.1, 0.3)):
        spec = build_game(bias=b)
        recs = []
        for r, eq in enumerate(enumerate_equilibria(spec)):
            pi_s, pi_r = eq.policies(spec)
            m = nash_deviation_metrics(pi_s, pi_r, spec)
            recs.append(RunRecord(
                r, {}, "f", b, 0.1, 5e-6, i, 0, 0, r, True, 1, m.u_sender, m.u_receiver, m.mutual_info,
                m.max_subopt_sender, m.max_subopt_receiver, m.gain_sender, m.gain_receiver, m.is_eps_nash,
                pi_s, pi_r,
            ))
        out.append(aggregate(recs, spec))
    return out


@pytest.mark.parametrize("kind", FIGURE_KINDS)
def test_render_each_figure(tmp_path, equilibrium_aggregates, kind):
    agg = emit_aggregates(equilibrium_aggregates, tmp_path / "agg.csv")
    data, svg = render_figure(FigureSpec(kind, (str(agg),), str(tmp_path / "fig" / kind)))
    assert data.read_text().count("\n") > 1
    assert svg.read_text().lstrip().startswith("<?xml")


def test_ladder_data_lists_every_equilibrium(tmp_path, equilibrium_aggregates):
    agg = emit_aggregates(equilibrium_aggregates, tmp_path / "agg.csv")
    data, _ = render_figure(FigureSpec("equilibrium_ladder", (str(agg),), str(tmp_path / "ladder")))
    rows = read_aggregates(data)
    n_eq = sum(1 for r in rows if r["series"] == "equilibrium" and float(r["bias"]) == 0.1)
    assert n_eq == 11


def test_figure_from_empty_aggregate_fails_cleanly(tmp_path):
    agg = emit_aggregates([], tmp_path / "agg.csv")
    out = tmp_path / "fig"
    with pytest.raises(FigureError):
        render_figure(FigureSpec("mi_distribution", (str(agg),), str(out)))
    assert not (tmp_path / "fig.csv").exists() and not (tmp_path / "fig.svg").exists()


def test_figure_missing_columns(tmp_path):
    p = tmp_path / "agg.csv"
    p.write_text("bias,alpha\n0,0.1\n")
    with pytest.raises(FigureError, match="columns"):
        render_figure(FigureSpec("deviation_vs_bias", (str(p),), str(tmp_path / "f")))
    with pytest.raises(FigureError, match="unknown"):
        render_figure(FigureSpec("pie_chart", (str(p),), str(tmp_path / "f")))
