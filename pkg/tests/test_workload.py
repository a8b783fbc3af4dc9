import json

import pytest
from hypothesis import given
import hypothesis.strategies as st

from qosrma.perf import IntervalStats, interval_time
from qosrma.platform import default_platform
from qosrma.workload import (AppProfile, DatabaseError, PhaseRecord, PhaseSpec, SyntheticAppSpec,
                             TruthModel, Workload, WorkloadError, app_from_dict, app_to_dict,
                             classify, generate_app, generate_pool, generate_workload_mix,
                             ground_truth, load_database, load_workload, measured_stats, mpki,
                             parse_pattern, phase_counts, save_database, save_workload)
from qosrma.energy import epi

PLAT = default_platform(4)


def flat_app(name="x", m=1.0, ic=1e8):
    curve = {w: m * ic / 1000 for w in range(2, 17)}
    s = IntervalStats(ic, ic, curve, {1: 1.0}, 0.0, 100e-9, 0.1)
    return AppProfile(name, (PhaseRecord(0, 1.0, s),), (0,))


def curve_app(name, mpki_of_w, ic=1e8):
    curve = {w: mpki_of_w(w) * ic / 1000 for w in range(2, 17)}
    s = IntervalStats(ic, ic, curve, {1: 1.0}, 0.0, 100e-9, 0.1)
    return AppProfile(name, (PhaseRecord(0, 1.0, s),), (0,))


# --- profiles -------------------------------------------------------------------

def test_profile_validation():
    s = flat_app().phases[0].stats
    with pytest.raises(WorkloadError, match="no phases"):
        AppProfile("a", (), (0,))
    with pytest.raises(WorkloadError, match="empty trace"):
        AppProfile("a", (PhaseRecord(0, 1.0, s),), ())
    with pytest.raises(WorkloadError, match="sum to 1"):
        AppProfile("a", (PhaseRecord(0, 0.5, s),), (0,))
    with pytest.raises(WorkloadError, match="unknown phases"):
        AppProfile("a", (PhaseRecord(0, 1.0, s),), (0, 3))
    with pytest.raises(WorkloadError, match="duplicate"):
        AppProfile("a", (PhaseRecord(0, 0.5, s), PhaseRecord(0, 0.5, s)), (0,))


def test_workload_alphas():
    a = flat_app()
    assert Workload((a, a)).alphas == (1.0, 1.0)
    assert Workload((a, a), (0.5,)).alphas == (0.5, 0.5)
    with pytest.raises(WorkloadError):
        Workload((a, a), (0.5, 0.5, 0.5))
    with pytest.raises(WorkloadError):
        Workload((a,), (0.0,))
    with pytest.raises(WorkloadError):
        Workload((a,), (1.2,))


# --- ground truth and measured counters ----------------------------------------

def test_ground_truth_defaults_to_model():
    app = generate_app(SyntheticAppSpec("g", (PhaseSpec(),), 3), 0, PLAT)
    p = app.phases[0]
    for w, f in [(2, 0), (8, 4), (16, 9)]:
        t = ground_truth(p, w, f, PLAT.vf, PLAT.energy)
        assert t.time == interval_time(p.stats, w, PLAT.vf[f].frequency)
        assert TruthModel(p, PLAT.vf, PLAT.energy).epi(w, f) == epi(p.stats, w, f, PLAT.vf, PLAT.energy)


def test_materialized_truth_matches_model():
    spec = SyntheticAppSpec("m", (PhaseSpec(),), 2, max_ways=10, materialize_truth=True)
    p = generate_app(spec, 1, PLAT).phases[0]
    assert len(p.truth) == 9 * len(PLAT.vf)
    tm = TruthModel(p, PLAT.vf, PLAT.energy)
    for w, f in [(2, 0), (8, 4), (10, 9)]:
        assert tm.epi(w, f) == pytest.approx(epi(p.stats, w, f, PLAT.vf, PLAT.energy), rel=1e-12)


def test_measured_stats_recover_model_without_noise():
    spec = SyntheticAppSpec("m", (PhaseSpec(mlp={1: 0.5, 3: 0.5}),), 2, max_ways=12,
                            materialize_truth=True)
    p = generate_app(spec, 1, PLAT).phases[0]
    for w, f in [(2, 0), (8, 4), (12, 9)]:
        s = measured_stats(p, w, f, PLAT.vf, PLAT.energy)
        assert s.c_base == pytest.approx(p.stats.c_base, rel=1e-9)
        assert s.core_dyn_energy_ref == pytest.approx(p.stats.core_dyn_energy_ref, rel=1e-9)


def test_noise_perturbs_truth_only():
    spec = SyntheticAppSpec("n", (PhaseSpec(),), 2, max_ways=8, noise=0.05)
    p = generate_app(spec, 3, PLAT).phases[0]
    exact = ground_truth(PhaseRecord(0, 1.0, p.stats), 8, 4, PLAT.vf, PLAT.energy)
    noisy = ground_truth(p, 8, 4, PLAT.vf, PLAT.energy)
    assert noisy.time != exact.time
    assert noisy.mem_accesses == exact.mem_accesses


# --- generation -------------------------------------------------------------------

def test_generation_is_deterministic():
    assert generate_pool(7) == generate_pool(7)
    assert generate_pool(7) != generate_pool(8)


@given(st.lists(st.floats(0.01, 10), min_size=1, max_size=6), st.integers(1, 50))
def test_phase_counts_largest_remainder(weights, length):
    counts = phase_counts(weights, length)
    assert sum(counts) == length
    total = sum(weights)
    for c, w in zip(counts, weights):
        assert abs(c - w / total * length) < 1 + 1e-9


@given(st.integers(0, 2**31 - 1))
def test_trace_respects_phase_counts(seed):
    spec = SyntheticAppSpec("t", (PhaseSpec(0.2), PhaseSpec(0.3), PhaseSpec(0.5)), 10)
    app = generate_app(spec, seed, PLAT)
    assert [app.phase_trace.count(i) for i in range(3)] == [2, 3, 5]


def test_bad_specs():
    with pytest.raises(WorkloadError):
        generate_app(SyntheticAppSpec("b", ()), 0)
    with pytest.raises(WorkloadError):
        generate_app(SyntheticAppSpec("b", (PhaseSpec(mpki_2=1.0, mpki_inf=2.0),)), 0)
    with pytest.raises(WorkloadError):
        generate_app(SyntheticAppSpec("b", (PhaseSpec(),), trace_length=0), 0)


@pytest.mark.parametrize("seed", range(5))
def test_pool_apps_classify_as_named(seed):
    for app in generate_pool(seed):
        assert classify(app) == app.name[0]


def test_pool_epi_grows_with_frequency():
    # the archetype ranges keep the race-to-idle point at the bottom of the table
    for app in generate_pool(0):
        for p in app.phases:
            tm = TruthModel(p, PLAT.vf, PLAT.energy)
            e = [tm.epi(8, f) for f in range(len(PLAT.vf))]
            assert e[-1] > e[0]


# --- classification ----------------------------------------------------------------

@pytest.mark.parametrize("fn, cat", [
    (lambda w: 20.0 - w, "A"),  # 8 ways: 12, swing 16 - 4
    (lambda w: 10.0, "B"),
    (lambda w: 4.0 if w < 8 else 1.0, "C"),
    (lambda w: 1.0, "D"),
])
def test_classify_hand_curves(fn, cat):
    assert classify(curve_app("h", fn)) == cat


def test_classify_thresholds_are_strict():
    assert classify(curve_app("h", lambda w: 5.0)) == "D"
    assert classify(curve_app("h", lambda w: 5.0 + 1e-6)) == "B"
    # swing of 19% vs 21% of baseline
    assert classify(curve_app("h", lambda w: 1.095 if w <= 4 else (0.905 if w >= 12 else 1.0))) == "D"
    assert classify(curve_app("h", lambda w: 1.105 if w <= 4 else (0.895 if w >= 12 else 1.0))) == "C"


def test_classify_odd_baseline_rounds_toward_baseline():
    app = curve_app("h", lambda w: 1.0)
    # 0.5 * 5 = 2.5 -> 3, 1.5 * 5 = 7.5 -> 7
    assert classify(app, 5) == "D"


def test_classify_missing_ways():
    s = IntervalStats(1e8, 1e8, {8: 1e5}, {1: 1.0}, 0.0, 100e-9, 0.1)
    with pytest.raises(WorkloadError):
        classify(AppProfile("h", (PhaseRecord(0, 1.0, s),), (0,)))


def test_mpki_aggregate_and_dominant():
    ic = 1e8
    s1 = IntervalStats(ic, ic, {8: 1e6}, {1: 1.0}, 0.0, 100e-9, 0.1)  # 10 MPKI
    s2 = IntervalStats(ic, ic, {8: 2e5}, {1: 1.0}, 0.0, 100e-9, 0.1)  # 2 MPKI
    app = AppProfile("m", (PhaseRecord(0, 0.25, s1), PhaseRecord(1, 0.75, s2)), (0, 1, 1, 1))
    assert mpki(app, 8) == pytest.approx(4.0)
    assert mpki(app, 8, "dominant") == pytest.approx(2.0)


# --- mixes --------------------------------------------------------------------------

def test_parse_pattern():
    assert parse_pattern("2A2B") == ["A", "A", "B", "B"]
    assert parse_pattern("1A1B1C1D") == list("ABCD")
    assert parse_pattern("A3d") == ["A", "D", "D", "D"]
    for bad in ("", "2E", "2A-", "x"):
        with pytest.raises(WorkloadError):
            parse_pattern(bad)


def test_mix_follows_pattern_and_seed():
    pool = generate_pool(0)
    w = generate_workload_mix("2A1C1D", pool, 5)
    assert [classify(a) for a in w.apps] == ["A", "A", "C", "D"]
    assert w == generate_workload_mix("2A1C1D", pool, 5)
    with pytest.raises(WorkloadError, match="category-B"):
        generate_workload_mix("1B", [a for a in pool if a.name[0] != "B"], 0)


# --- io ----------------------------------------------------------------------------

def test_database_round_trip(tmp_path):
    spec = SyntheticAppSpec("r", (PhaseSpec(0.4), PhaseSpec(0.6, mlp={1: 0.3, 2: 0.7})), 5,
                            max_ways=6, noise=0.02)
    apps = [generate_app(spec, 1, PLAT), flat_app("f")]
    path = tmp_path / "db.jsonl"
    save_database(apps, path)
    back = load_database(path)
    assert [app_to_dict(a) for a in back] == [app_to_dict(a) for a in apps]
    for a, b in zip(apps, back):
        for p, q in zip(a.phases, b.phases):
            assert q.stats.mem_latency == pytest.approx(p.stats.mem_latency, rel=1e-12)


def test_workload_round_trip(tmp_path):
    pool = generate_pool(0)
    save_database(pool, tmp_path / "apps.jsonl")
    w = generate_workload_mix("2A2D", pool, 3, alphas=(0.8, 0.8, 1.0, 1.0))
    save_workload(w, tmp_path / "workload.json", "apps.jsonl")
    back = load_workload(tmp_path / "workload.json")
    assert [a.name for a in back.apps] == [a.name for a in w.apps]
    assert back.alphas == w.alphas and back.pattern == "2A2D" and back.seed == 3


def test_database_errors_name_the_problem(tmp_path):
    with pytest.raises(DatabaseError, match="not found"):
        load_database(tmp_path / "missing.jsonl")
    bad = tmp_path / "bad.jsonl"
    bad.write_text("{not json\n")
    with pytest.raises(DatabaseError, match=":1: invalid JSON"):
        load_database(bad)
    doc = app_to_dict(flat_app())
    del doc["phases"][0]["c_base"]
    with pytest.raises(DatabaseError, match="c_base"):
        app_from_dict(doc)
    doc = app_to_dict(flat_app())
    doc["phases"][0]["mlp"] = {"1": 0.5}
    with pytest.raises(DatabaseError, match="sum to"):
        app_from_dict(doc)
    doc = app_to_dict(flat_app())
    doc["phases"][0]["c_base"] = "fast"
    with pytest.raises(DatabaseError, match="must be a number"):
        app_from_dict(doc)


def test_workload_errors(tmp_path):
    save_database([flat_app("f")], tmp_path / "db.jsonl")
    (tmp_path / "w.json").write_text(json.dumps({"apps": ["g"], "database": "db.jsonl"}))
    with pytest.raises(WorkloadError, match="'g'"):
        load_workload(tmp_path / "w.json")
    with pytest.raises(WorkloadError, match="not found"):
        load_workload(tmp_path / "nope.json")
