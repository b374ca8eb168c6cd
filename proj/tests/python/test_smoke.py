"""Smoke tests for the python bindings."""

import json
import math

import pytest

import wtlab


def chi01():
    return wtlab.StepFunction(["0", "1"], [1.0])


def test_rational3_arithmetic():
    third = wtlab.Rational3("1/3^1")
    ninth = third * third
    assert str(ninth) == "1/3^2"
    assert float(third) == pytest.approx(1.0 / 3.0)
    assert ninth < third
    assert wtlab.Rational3("6/3^2") == wtlab.Rational3("2/3^1")


def test_triadic_interval():
    unit = wtlab.TriadicInterval(0, 0)
    mid = unit.middle_third()
    assert str(mid.left()) == "1/3^1"
    left = unit.adjacent_scaled(wtlab.Side.LEFT, 2)
    assert str(left.left()) == "2/3^2"
    kids = unit.children()
    assert len(kids) == 3


def test_build_weight_and_mass():
    w, tail, tree_json = wtlab.build_weight(2, 3)
    assert w.nonzero_piece_count == 13
    assert tail == pytest.approx(27.0 / 64.0, abs=0)
    assert w.mass() + tail == pytest.approx(1.0, abs=1e-13)
    tree = json.loads(tree_json)
    assert tree["format"] == "rt-tree-v1"
    assert wtlab.exact_total_mass(2, 3) == "37/64"


def test_stepfn_json_roundtrip():
    w, _, _ = wtlab.build_weight(2, 2)
    back = wtlab.StepFunction.from_json(w.to_json())
    assert back.breakpoints == w.breakpoints
    assert back.values == w.values


def test_hilbert_and_singularity():
    f = chi01()
    assert wtlab.hilbert(f, 2.0) == pytest.approx(math.log(2.0), abs=1e-14)
    assert wtlab.hilbert(f, 0.5) == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(ValueError):
        wtlab.hilbert(f, 1.0)


def test_maximal_operators():
    f = chi01()
    assert wtlab.maximal(f, 2.0, 1.0) == pytest.approx(0.5, rel=1e-12)
    assert wtlab.maximal(f, 0.25, 1.0) == pytest.approx(1.0, rel=1e-12)
    assert wtlab.orlicz_maximal(f, 0.25, "power:2") == pytest.approx(1.0, rel=1e-9)
    psi = wtlab.YoungFunction.from_spec("psi")
    assert wtlab.orlicz_maximal(f, 0.25, "psi") == pytest.approx(
        1.0 / psi.inverse(1.0), rel=1e-9
    )
    assert wtlab.luxemburg_norm(f, 0.0, 1.0, "linear") == pytest.approx(1.0, rel=1e-10)


def test_growth_factor_and_bound_constant():
    assert wtlab.growth_factor("linear", 1.5) == pytest.approx(1.0, rel=1e-10)
    assert wtlab.mphi_mr_bound_constant("linear", 2.0) == pytest.approx(2.0, rel=1e-9)
    with pytest.raises(ValueError):
        wtlab.growth_factor("power:1.5", 1.2)
    rk = wtlab.r_k(3)
    assert rk == pytest.approx(1.0 + 1.0 / 163.0, rel=1e-15)


def test_superlevel_weight():
    f = chi01()
    assert wtlab.superlevel_weight(f, f, math.log(3.0), resolution=16) == pytest.approx(
        0.5, rel=1e-8
    )


def test_run_experiment_dict():
    rep = wtlab.run_experiment(
        {
            "experiment": "verify-lemma22",
            "k": 3,
            "depth": 3,
            "tail_threshold": 1.0,
        },
        threads=2,
    )
    assert rep["format"] == "wtlab-report-v1"
    summary = rep["payload"]["summary"]
    assert summary["max_ratio"] <= 21.0
    assert summary["min_ratio"] >= 1.0 - 1e-12


def test_tail_refusal_maps_to_python():
    with pytest.raises(RuntimeError):
        wtlab.run_experiment({"experiment": "verify-lemma22", "k": 3, "depth": 3})


def test_orientation_search_consistency():
    sides, score, policy = wtlab.orientation_search(2, 2)
    assert len(sides) == 4
    assert score > 0.0
    rep = wtlab.run_experiment(
        {
            "experiment": "hw-lowerbound",
            "k": 2,
            "depth": 2,
            "orientation": "explicit",
            "sides": sides,
            "tail_threshold": 1.0,
        }
    )
    assert rep["payload"]["summary"]["min_ratio"] == pytest.approx(score, rel=1e-12)
