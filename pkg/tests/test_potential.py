import numpy as np
import pytest

from interlacements.graph import build_window, from_edges, lattice
from interlacements.potential import (
    ConvergenceFailure,
    GreenMatrix,
    LaplaceConditionError,
    PotentialError,
    equilibrium,
    feynman_kac,
    green_killed,
    green_limit,
    green_resolvent,
    hitting_probability,
    laplace_exact_finite,
    laplace_exact_limit,
    resolvent_check,
)
from mc_oracles import free_walk_visits, killed_exp_weights, killed_visit_counts, mean_se

Z3 = lattice(3)
ORIGIN = (0, 0, 0)


def window(radius):
    return build_window(Z3, ORIGIN, radius)


def test_green_single_vertex():
    g = green_killed(window(0))
    assert g.values.shape == (1, 1)
    assert g.values[0, 0] == pytest.approx(1 / 6, abs=1e-15)
    assert g.kind == "killed"


def test_green_symmetry_psd_positivity():
    g = green_killed(window(4))
    g.validate()
    assert g.asymmetry < 1e-9
    assert np.abs(g.values - g.values.T).max() == 0
    assert g.values.min() > 0


def test_green_pair_indexing():
    w = window(2)
    g = green_killed(w)
    assert g[((0, 0, 0), (0, 0, 0))] == g.values[0, 0]
    assert g[((0, 0, 0), (1, 0, 0))] == g[((1, 0, 0), (0, 0, 0))]
    with pytest.raises(KeyError):
        g[((9, 9, 9), (0, 0, 0))]


def test_green_monotone_in_window():
    small, big = window(2), window(4)
    gs, gb = green_killed(small).values, green_killed(big).values
    idx = [big.index[v] for v in small.vertices]
    np.testing.assert_array_less(gs, gb[np.ix_(idx, idx)] + 1e-12)


def test_green_requires_escape():
    win = build_window(from_edges([(0, 1, 1.0)]), (0,), 1)
    with pytest.raises(PotentialError, match="no escape"):
        green_killed(win)


def test_green_vs_visit_count_oracle():
    win = window(6)
    exact = green_killed(win).values[0, 0]
    visits = killed_visit_counts(win, ORIGIN, ORIGIN, 10**6, seed=1234)
    m, se = mean_se(visits)
    assert abs(m / 6 - exact) <= 4 * se / 6


def test_green_resolvent_kernel():
    win = window(2)
    base = green_killed(win).values
    res = green_resolvent(win, 10.0)
    assert res.kind == "resolvent"
    n = win.n
    np.testing.assert_array_equal(res.values[n, :], 0.1)
    np.testing.assert_array_equal(res.values[:, n], 0.1)
    np.testing.assert_allclose(res.values[:n, :n], base + 0.1)
    res.validate()
    with pytest.raises(ValueError, match="positive"):
        green_resolvent(win, 0.0)


def test_green_limit_monotone_convergence():
    val, r = green_limit(Z3, ORIGIN, tol=1e-3)
    assert r <= 12
    assert 0.24 < val < 0.252731
    iterates = [green_killed(window(rr)).values[0, 0] for rr in (2, 6, 10)]
    assert iterates[0] < iterates[1] < iterates[2] <= val


def test_green_limit_vs_long_run_oracle():
    val, _ = green_limit(Z3, ORIGIN, tol=1e-3)
    visits = free_walk_visits(20_000, 10_000, seed=999)
    m, se = mean_se(visits)
    mc = m / 6
    # finite horizon misses at most ~1.2e-3 of the mean visit count
    assert abs(mc - 0.252731) <= 4 * se / 6 + 1.2e-3
    assert mc >= val - 4 * se / 6


def test_green_limit_off_diagonal():
    diag, _ = green_limit(Z3, ORIGIN, tol=1e-3)
    off, _ = green_limit(Z3, ORIGIN, (1, 0, 0), tol=1e-3)
    assert 0.06 < off < diag


def test_green_limit_schedule_exhaustion():
    with pytest.raises(ConvergenceFailure) as exc:
        green_limit(Z3, ORIGIN, tol=1e-9, radii=(2, 3))
    assert exc.value.radii == (2, 3)
    np.testing.assert_allclose(exc.value.iterates, (0.214286, 0.222920), atol=1e-5)


def test_green_limit_requires_transience():
    with pytest.raises(PotentialError, match="transient"):
        green_limit(lattice(2), (0, 0), tol=1e-3)


def test_green_validate_catches_corruption():
    win = window(0)
    bad = GreenMatrix(window=win, values=np.array([[1.0, 2.0], [2.0, 1.0]]), kind="killed")
    with pytest.raises(PotentialError, match="semi-definite"):
        bad.validate()
    asym = GreenMatrix(window=win, values=np.array([[1.0, 0.5], [0.1, 1.0]]), kind="killed")
    with pytest.raises(PotentialError, match="asymmetric"):
        asym.validate()


def test_equilibrium_single_vertex_window():
    e = equilibrium([ORIGIN], window(0))
    assert e.mass[0] == 6.0
    assert e.capacity == 6.0
    assert e.support == (ORIGIN,)


def test_equilibrium_of_full_window():
    win = window(2)
    e = equilibrium(win.vertices, win)
    np.testing.assert_allclose(e.mass, win.boundary_weight)


def test_capacity_decreases_with_window():
    caps = [equilibrium([ORIGIN], window(r)).capacity for r in (2, 4, 6, 8)]
    assert all(a > b for a, b in zip(caps, caps[1:]))
    # for a single vertex the capacity is the reciprocal Green value
    assert caps[0] == pytest.approx(1 / green_killed(window(2)).values[0, 0], abs=1e-12)


def test_equilibrium_mass_decreases_pointwise():
    K = [ORIGIN, (1, 0, 0)]
    small, big = window(3), window(5)
    es, eb = equilibrium(K, small), equilibrium(K, big)
    for v in K:
        assert eb.mass[big.index[v]] <= es.mass[small.index[v]] + 1e-12


def test_capacity_vs_escape_oracle():
    win = window(8)
    cap = equilibrium([ORIGIN], win).capacity
    visits = killed_visit_counts(win, ORIGIN, ORIGIN, 10**6, seed=77)
    p_escape = float(np.mean(visits == 1))
    se = float(np.sqrt(p_escape * (1 - p_escape) / visits.size))
    assert abs(6 * p_escape - cap) <= 4 * 6 * se


def test_equilibrium_input_validation():
    win = window(2)
    with pytest.raises(ValueError, match="empty"):
        equilibrium([], win)
    with pytest.raises(ValueError, match="outside"):
        equilibrium([(9, 9, 9)], win)


def test_hitting_inside_k():
    win = window(2)
    assert hitting_probability(ORIGIN, [ORIGIN, (1, 0, 0)], win) == 1.0
    assert hitting_probability((0, 0, 0), [ORIGIN], window(0)) == 1.0


def test_hitting_dual_route_and_oracle():
    win = window(4)
    x = (2, 0, 0)
    p = hitting_probability(x, [ORIGIN], win)
    assert 0 < p < 1
    visits = killed_visit_counts(win, x, ORIGIN, 2 * 10**5, seed=4242)
    hit = float(np.mean(visits >= 1))
    se = float(np.sqrt(hit * (1 - hit) / visits.size))
    assert abs(hit - p) <= 4 * se


def test_feynman_kac_zero_potential():
    win = window(2)
    f = feynman_kac(np.zeros(win.n), win)
    np.testing.assert_allclose(f.values, 1.0, atol=1e-12)


def test_feynman_kac_single_vertex_closed_form():
    f = feynman_kac({ORIGIN: 2.0}, window(0))
    assert f[ORIGIN] == pytest.approx(1 / (1 + 2 / 6), abs=1e-14)


def test_feynman_kac_rejects_negative():
    win = window(1)
    with pytest.raises(ValueError, match="nonnegative"):
        feynman_kac({ORIGIN: -1.0}, win)


def test_feynman_kac_vs_path_oracle():
    win = window(3)
    exact = feynman_kac({ORIGIN: 2.0}, win)[ORIGIN]
    weights = killed_exp_weights(win, ORIGIN, ORIGIN, 2.0 / 6.0, 10**5, seed=5150)
    m, se = mean_se(weights)
    assert abs(m - exact) <= 4 * se


def test_laplace_finite_trivial_cases():
    win = window(2)
    assert laplace_exact_finite({ORIGIN: 1.0}, win, 0.0) == 1.0
    assert laplace_exact_finite({}, win, 3.0) == 1.0
    with pytest.raises(ValueError, match="nonnegative"):
        laplace_exact_finite({ORIGIN: 1.0}, win, -1.0)
    with pytest.raises(ValueError, match="outside K"):
        laplace_exact_finite({ORIGIN: 1.0}, win, 1.0, K=[(1, 0, 0)])


def test_laplace_finite_converges_to_limit():
    V = {ORIGIN: 1.0}
    limit = laplace_exact_limit(V, Z3, 1.0, tol=1e-3)
    finite = [laplace_exact_finite(V, window(r), 1.0) for r in (3, 5, 8)]
    assert finite[0] < finite[1] < finite[2] < limit
    assert abs(finite[2] - limit) < abs(finite[0] - limit)
    assert abs(finite[2] - limit) < 1e-3


def test_laplace_limit_singleton_reduction():
    # on a fixed window the inner product solves one scalar equation exactly
    g6 = green_killed(window(6)).values[0, 0]
    v, u = 0.7, 1.3
    got = laplace_exact_limit({ORIGIN: v}, Z3, u, radii=(6, 6), tol=1e-12)
    assert got == pytest.approx(np.exp(-u * v / (1 + v * g6)), abs=1e-13)


def test_laplace_limit_closed_form():
    g, _ = green_limit(Z3, ORIGIN, tol=1e-3)
    got = laplace_exact_limit({ORIGIN: 1.0}, Z3, 1.0, tol=1e-3)
    assert abs(got - np.exp(-1.0 / (1 + g))) < 1e-3


def test_laplace_limit_level_derivative():
    v = 1e-6
    got = laplace_exact_limit({ORIGIN: v}, Z3, 1.0, tol=1e-3)
    assert -np.log(got) / v == pytest.approx(1.0, abs=1e-5)


def test_laplace_limit_trivials_and_errors():
    assert laplace_exact_limit({ORIGIN: 1.0}, Z3, 0.0) == 1.0
    assert laplace_exact_limit({}, Z3, 2.0) == 1.0
    assert laplace_exact_limit({ORIGIN: 0.0}, Z3, 2.0) == 1.0
    with pytest.raises(LaplaceConditionError, match="violated"):
        laplace_exact_limit({ORIGIN: 100.0}, Z3, 1.0)
    with pytest.raises(ValueError, match="nonnegative"):
        laplace_exact_limit({ORIGIN: -1.0}, Z3, 1.0)
    with pytest.raises(ValueError, match="level"):
        laplace_exact_limit({ORIGIN: 1.0}, Z3, -0.5)
    with pytest.raises(PotentialError, match="transient"):
        laplace_exact_limit({(0, 0): 1.0}, lattice(2), 1.0)
    with pytest.raises(ConvergenceFailure):
        laplace_exact_limit({ORIGIN: 1.0}, Z3, 1.0, radii=(2, 3, 4), tol=1e-9)


def test_resolvent_identity():
    win = window(3)
    report = resolvent_check({ORIGIN: 0.1}, win, 10.0)
    assert report.passed
    assert all(abs(c.observed - c.expected) < 1e-9 for c in report.checks)
    assert report.context["window_vertices"] == win.n


def test_resolvent_zero_potential_exact():
    report = resolvent_check({}, window(2), 5.0)
    assert report.passed
    for c in report.checks:
        assert c.observed == 1.0
        assert c.expected == 1.0


def test_resolvent_precondition():
    win = window(2)
    with pytest.raises(PotentialError, match="smallness"):
        resolvent_check(np.ones(win.n), win, 0.1)
    with pytest.raises(ValueError, match="positive"):
        resolvent_check({ORIGIN: 0.1}, win, -1.0)


def test_resolvent_report_serializes():
    report = resolvent_check({ORIGIN: 0.1}, window(2), 10.0)
    data = report.to_json_dict()
    assert data["passed"] is True
    assert len(data["checks"]) == 2
    assert "smallness" in data["context"]
