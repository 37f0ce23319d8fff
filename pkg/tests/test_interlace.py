import numpy as np
import pytest
from scipy import stats

from interlacements.graph import build_window, collapse, lattice
from interlacements.interlace import (
    ExcursionRecord,
    OccupationField,
    interlacement_set,
    sample_excursion_soup,
    sample_excursion_soup_batch,
    sample_field_batch,
    sample_hitting_soup_batch,
    simulate_collapse,
    simulate_collapse_batch,
    trace_excursions,
)
from interlacements.potential import equilibrium, green_killed

Z3 = lattice(3)
ORIGIN = (0, 0, 0)


def window(radius=2):
    return build_window(Z3, ORIGIN, radius)


def test_level_zero_fields_vanish():
    win = window()
    chain = collapse(win)
    for field in (
        simulate_collapse(chain, 0.0, seed=5),
        sample_excursion_soup(win, 0.0, seed=5),
    ):
        assert np.all(field.values == 0)
        assert interlacement_set(field) == ()
        field.validate()
    batch = sample_hitting_soup_batch([ORIGIN], win, 0.0, 50, seed=5)
    assert np.all(batch.samples == 0)
    assert np.all(batch.counts == 0)


def test_input_validation():
    win = window(1)
    chain = collapse(win)
    with pytest.raises(ValueError, match="nonnegative"):
        simulate_collapse_batch(chain, -1.0, 10, seed=1)
    with pytest.raises(ValueError, match="nonnegative"):
        sample_excursion_soup_batch(win, -0.5, 10, seed=1)
    with pytest.raises(ValueError, match="count"):
        simulate_collapse_batch(chain, 1.0, 0, seed=1)


def test_collapse_moments_match_exact_oracle():
    win = window()
    g = green_killed(win).values
    u = 1.0
    batch = simulate_collapse_batch(collapse(win), u, 20_000, seed=10)
    mean = batch.samples.mean(axis=0)
    se = batch.samples.std(axis=0, ddof=1) / np.sqrt(batch.count)
    assert np.all(np.abs(mean - u) <= 4 * se)
    i, j = win.index[ORIGIN], win.index[(1, 0, 0)]
    x, y = batch.samples[:, i], batch.samples[:, j]
    prods = (x - x.mean()) * (y - y.mean())
    cov_se = prods.std(ddof=1) / np.sqrt(batch.count)
    assert abs(np.cov(x, y)[0, 1] - 2 * u * g[i, j]) <= 4 * cov_se


def test_soup_moments_match_exact_oracle():
    win = window()
    g = green_killed(win).values
    u = 1.0
    batch = sample_excursion_soup_batch(win, u, 20_000, seed=11)
    mean = batch.samples.mean(axis=0)
    se = batch.samples.std(axis=0, ddof=1) / np.sqrt(batch.count)
    assert np.all(np.abs(mean - u) <= 4 * se)
    i = win.index[ORIGIN]
    x = batch.samples[:, i]
    sq = (x - x.mean()) ** 2
    var_se = sq.std(ddof=1) / np.sqrt(batch.count)
    assert abs(x.var(ddof=1) - 2 * u * g[i, i]) <= 4 * var_se


def test_excursion_counts_poissonian():
    win = window()
    u = 1.0
    lam_star = u * win.total_boundary_weight()
    for batch in (
        simulate_collapse_batch(collapse(win), u, 20_000, seed=13),
        sample_excursion_soup_batch(win, u, 20_000, seed=14),
    ):
        m = batch.counts.mean()
        se = batch.counts.std(ddof=1) / np.sqrt(batch.count)
        assert abs(m - lam_star) <= 4 * se
        # Poisson: variance equals mean
        sq = (batch.counts - m) ** 2
        var_se = sq.std(ddof=1) / np.sqrt(batch.count)
        assert abs(batch.counts.var(ddof=1) - lam_star) <= 4 * var_se


def test_single_vertex_window_mechanics():
    win = build_window(lattice(1), (0,), 0)
    u = 1.0
    batch = sample_excursion_soup_batch(win, u, 30_000, seed=15)
    m = batch.counts.mean()
    se = batch.counts.std(ddof=1) / np.sqrt(batch.count)
    assert abs(m - 2.0) <= 4 * se
    fmean = batch.samples[:, 0].mean()
    fse = batch.samples[:, 0].std(ddof=1) / np.sqrt(batch.count)
    assert abs(fmean - u) <= 4 * fse


def test_hitting_soup_supported_on_k():
    win = window()
    K = [ORIGIN, (1, 0, 0)]
    u = 1.0
    eq = equilibrium(K, win)
    batch = sample_hitting_soup_batch(K, win, u, 20_000, seed=12)
    kidx = [win.index[v] for v in K]
    off = [i for i in range(win.n) if i not in kidx]
    assert np.all(batch.samples[:, off] == 0)
    m = batch.counts.mean()
    se = batch.counts.std(ddof=1) / np.sqrt(batch.count)
    assert abs(m - u * eq.capacity) <= 4 * se
    for i in kidx:
        x = batch.samples[:, i]
        assert abs(x.mean() - u) <= 4 * x.std(ddof=1) / np.sqrt(x.size)


def test_samplers_agree_in_distribution():
    win = window()
    u = 0.5
    K = [ORIGIN, (0, 1, 0)]
    n = 8000
    a = simulate_collapse_batch(collapse(win), u, n, seed=21)
    b = sample_excursion_soup_batch(win, u, n, seed=22)
    c = sample_hitting_soup_batch(K, win, u, n, seed=23)
    coords = [win.index[ORIGIN], win.index[(0, 1, 0)]]
    for i in coords:
        assert stats.ks_2samp(a.samples[:, i], b.samples[:, i]).pvalue > 0.005
        assert stats.ks_2samp(a.samples[:, i], c.samples[:, i]).pvalue > 0.005


def test_interlacement_set_reads_positive_support():
    win = window(1)
    values = np.zeros(win.n)
    values[win.index[(1, 0, 0)]] = 0.3
    field = OccupationField(win, values, level=1.0, sampler="collapse", seed_record={})
    assert interlacement_set(field) == ((1, 0, 0),)
    sample = sample_excursion_soup(win, 1.0, seed=9)
    assert set(interlacement_set(sample)) == {
        win.vertices[i] for i in np.nonzero(sample.values > 0)[0]
    }


def test_determinism_and_stream_separation():
    win = window(1)
    chain = collapse(win)
    a = simulate_collapse_batch(chain, 1.0, 5000, seed=42, workers=1)
    b = simulate_collapse_batch(chain, 1.0, 5000, seed=42, workers=4)
    assert np.array_equal(a.samples, b.samples)
    assert np.array_equal(a.counts, b.counts)
    c = sample_excursion_soup_batch(win, 1.0, 5000, seed=42, workers=1)
    d = sample_excursion_soup_batch(win, 1.0, 5000, seed=42, workers=3)
    assert np.array_equal(c.samples, d.samples)
    assert not np.array_equal(
        simulate_collapse_batch(chain, 1.0, 100, seed=1).samples,
        simulate_collapse_batch(chain, 1.0, 100, seed=2).samples,
    )
    assert not np.array_equal(
        simulate_collapse_batch(chain, 1.0, 100, seed=1, stream=1).samples,
        simulate_collapse_batch(chain, 1.0, 100, seed=1, stream=7).samples,
    )


def test_field_accessors_and_validation():
    win = window(1)
    batch = sample_excursion_soup_batch(win, 1.0, 10, seed=3)
    f = batch.field(4)
    assert np.array_equal(f.values, batch.samples[4])
    assert f.seed_record["sample"] == 4
    assert f[ORIGIN] == batch.samples[4, win.index[ORIGIN]]
    bad = OccupationField(win, -np.ones(win.n), level=1.0, sampler="collapse", seed_record={})
    with pytest.raises(ValueError, match="negative"):
        bad.validate()
    tagless = OccupationField(win, np.zeros(win.n), level=1.0, sampler="mystery", seed_record={})
    with pytest.raises(ValueError, match="sampler tag"):
        tagless.validate()
    stray = OccupationField(win, np.ones(win.n), level=0.0, sampler="collapse", seed_record={})
    with pytest.raises(ValueError, match="level 0"):
        stray.validate()


def test_dispatch_by_tag():
    win = window(1)
    assert sample_field_batch(win, 0.5, 5, seed=1, sampler="collapse").sampler == "collapse"
    assert sample_field_batch(win, 0.5, 5, seed=1, sampler="excursion-soup").sampler == "excursion-soup"
    hit = sample_field_batch(win, 0.5, 5, seed=1, sampler="hitting-soup", K=[ORIGIN])
    assert hit.sampler == "hitting-soup"
    with pytest.raises(ValueError, match="needs K"):
        sample_field_batch(win, 0.5, 5, seed=1, sampler="hitting-soup")
    with pytest.raises(ValueError, match="unknown sampler"):
        sample_field_batch(win, 0.5, 5, seed=1, sampler="other")


def test_trace_excursions_structure():
    win = window(1)
    records = trace_excursions(win, 1.0, seed=8)
    assert records
    for rec in records:
        rec.validate(win)
        assert rec.termination == "exited-window"
        assert rec.start in win.index
    assert trace_excursions(win, 0.0, seed=8) == []
    # occupation reconstructed from traces has the right mean
    total = 0.0
    n_runs = 2000
    i = win.index[ORIGIN]
    for k in range(n_runs):
        for rec in trace_excursions(win, 1.0, seed=100, stream=10 + k):
            for v, hold in rec.path:
                if v == ORIGIN:
                    total += hold / win.lam[i]
    assert total / n_runs == pytest.approx(1.0, abs=0.08)


def test_excursion_record_validation():
    win = window(1)
    with pytest.raises(ValueError, match="termination"):
        ExcursionRecord(ORIGIN, ((ORIGIN, 1.0),), "lost").validate(win)
    with pytest.raises(ValueError, match="begin at the start"):
        ExcursionRecord(ORIGIN, (((1, 0, 0), 1.0),), "exited-window").validate(win)
    with pytest.raises(ValueError, match="positive"):
        ExcursionRecord(ORIGIN, ((ORIGIN, -1.0), ((1, 0, 0), 1.0)), "exited-window").validate(win)
    with pytest.raises(ValueError, match="no positive-weight edge"):
        ExcursionRecord(
            ORIGIN, ((ORIGIN, 1.0), ((1, 1, 0), 1.0)), "exited-window"
        ).validate(win)
