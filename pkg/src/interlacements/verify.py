"""Statistical verification of the occupation-field laws.

Every test here compares Monte Carlo output against exact values recomputed
from the potential module at run time: means are the level u itself,
covariances come from the window Green matrix, Laplace transforms and
vacancy probabilities from the dense solves.  Distributional identities are
checked by per-coordinate two-sample Kolmogorov-Smirnov batteries at family
level 0.01 with Bonferroni correction; moment comparisons use a four
standard error tolerance.  Reports record seeds and sample sizes, so every
verdict is reproducible.
"""

from __future__ import annotations

import math

import numpy as np

from .gff import sample_gff, shifted_square_field
from .graph import WeightedWindow, collapse, vertices_by_distance
from .interlace import (
    sample_excursion_soup_batch,
    sample_hitting_soup_batch,
    simulate_collapse_batch,
)
from .potential import (
    ConvergenceFailure,
    LaplaceConditionError,
    as_vector,
    equilibrium,
    green_killed,
    laplace_exact_finite,
    laplace_exact_limit,
)
from .reporting import Check, TestReport, check_pvalue, check_se

#: Family-wise level for every KS battery; split evenly across coordinates.
KS_FAMILY_LEVEL = 0.01

#: Moment comparisons pass within this many standard errors.
N_SE = 4.0

# Stream bases; each statistical test draws from its own block of streams so
# no two tests ever consume the same random numbers under a shared seed.
_STREAM_ISO = 0x10
_STREAM_SHIFTED = 0x20
_STREAM_LAPLACE = 0x30
_STREAM_VACANT = 0x40
_STREAM_ASYMPT = 0x50
_STREAM_AGREE = 0x60


def kolmogorov_sf(x: float) -> float:
    """Survival function of the Kolmogorov supremum distribution.

    Small arguments use the theta-function expansion of the CDF; larger ones
    the alternating exponential series of the tail.  Crossover near 1.18
    keeps both series at four terms for full double accuracy.
    """
    if x <= 0:
        return 1.0
    if x < 1.18:
        t = math.exp(-math.pi**2 / (8 * x * x))
        cdf = math.sqrt(2 * math.pi) / x * (t + t**9 + t**25 + t**49)
        return max(0.0, min(1.0, 1.0 - cdf))
    v = math.exp(-2 * x * x)
    sf = 2 * (v - v**4 + v**9 - v**16)
    return max(0.0, min(1.0, sf))


def two_sample_ks(a, b) -> tuple[float, float]:
    """Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be nonempty")
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / a.size
    cdf_b = np.searchsorted(b, grid, side="right") / b.size
    d = float(np.abs(cdf_a - cdf_b).max())
    en = math.sqrt(a.size * b.size / (a.size + b.size))
    p = kolmogorov_sf((en + 0.12 + 0.11 / en) * d)
    return d, p


def default_coords(window: WeightedWindow) -> list:
    """Default coordinate battery: center, a neighbor, a distance-2 vertex."""
    center = window.center if window.center is not None else window.vertices[0]
    return vertices_by_distance(window, center, [0, 1, 2])


def _mean_check(name, samples, expected):
    m = float(samples.mean())
    se = float(samples.std(ddof=1) / math.sqrt(samples.size))
    return check_se(name, m, expected, se, n_se=N_SE)


def _cov_check(name, x, y, expected):
    dx, dy = x - x.mean(), y - y.mean()
    prods = dx * dy
    cov = float(prods.sum() / (x.size - 1))
    se = float(prods.std(ddof=1) / math.sqrt(x.size))
    return check_se(name, cov, expected, se, n_se=N_SE)


def _var_check(name, x, expected):
    sq = (x - x.mean()) ** 2
    var = float(x.var(ddof=1))
    se = float(sq.std(ddof=1) / math.sqrt(x.size))
    return check_se(name, var, expected, se, n_se=N_SE)


def _coord_indices(window, coords):
    coords = default_coords(window) if coords is None else [tuple(c) for c in coords]
    return coords, [window.index[c] for c in coords]


def shifted_isomorphism_test(
    window: WeightedWindow,
    u: float,
    a: float,
    count: int = 10_000,
    coords=None,
    seed: int = 0,
    workers: int = 1,
    stream_base: int = _STREAM_SHIFTED,
    name: str | None = None,
) -> TestReport:
    """Check occupation + half shifted square against the recentered square.

    Left side: occupation field at level u plus half the square of an
    independent Gaussian field shifted by a.  Right side: half the square of
    a Gaussian field shifted by sqrt(2u + a^2).  The two agree in law on the
    window; the test runs a per-coordinate KS battery plus mean and mixed
    second-moment comparisons against the exact Gaussian oracles.
    """
    if u < 0:
        raise ValueError(f"level must be nonnegative, got {u}")
    green = green_killed(window)
    coords, idx = _coord_indices(window, coords)
    occ = simulate_collapse_batch(collapse(window), u, count, seed, stream=stream_base, workers=workers)
    phi = sample_gff(green, count, seed, stream=stream_base + 1, workers=workers)
    left = occ.samples + shifted_square_field(phi, a)
    shift = math.sqrt(2 * u + a * a)
    right = shifted_square_field(
        sample_gff(green, count, seed, stream=stream_base + 2, workers=workers), shift
    )

    report = TestReport(
        name=name if name is not None else f"shifted-isomorphism u={u} a={a}",
        tolerance_policy=f"KS family {KS_FAMILY_LEVEL} Bonferroni; moments {N_SE} SE",
        sample_sizes={"per_side": count},
        seeds={"seed": seed, "stream_base": stream_base},
        context={"u": u, "a": a, "coords": [list(c) for c in coords]},
    )
    alpha = KS_FAMILY_LEVEL / len(coords)
    for c, i in zip(coords, idx):
        stat, p = two_sample_ks(left[:, i], right[:, i])
        report.add(check_pvalue(f"KS at {c}", stat, p, alpha))
    for tag, side in (("occupation side", left), ("square side", right)):
        for c, i in zip(coords, idx):
            expected = u + (a * a + green.values[i, i]) / 2
            report.add(_mean_check(f"mean {tag} at {c}", side[:, i], expected))
    if len(idx) >= 2:
        i, j = idx[0], idx[1]
        gij = green.values[i, j]
        expected = 0.5 * gij * gij + (2 * u + a * a) * gij
        for tag, side in (("occupation side", left), ("square side", right)):
            report.add(
                _cov_check(f"cov {tag} at {coords[0]},{coords[1]}", side[:, i], side[:, j], expected)
            )
    return report


def isomorphism_test(
    window: WeightedWindow,
    u: float,
    count: int = 10_000,
    coords=None,
    seed: int = 0,
    workers: int = 1,
) -> TestReport:
    """Check occupation + half square of the field against the shifted square.

    The unshifted identity: occupation at level u plus half an independent
    squared Gaussian field has the law of half the square of the field
    shifted by sqrt(2u).
    """
    return shifted_isomorphism_test(
        window,
        u,
        a=0.0,
        count=count,
        coords=coords,
        seed=seed,
        workers=workers,
        stream_base=_STREAM_ISO,
        name=f"isomorphism u={u}",
    )


def laplace_test(
    window: WeightedWindow,
    u: float,
    V,
    count: int = 10**5,
    seed: int = 0,
    workers: int = 1,
) -> TestReport:
    """Compare empirical occupation Laplace transforms with the exact value.

    All three samplers are averaged through exp(-<V, field>) and held to
    four standard errors around the dense-solve value.  The infinite-volume
    transform is attached as context when the window's generator admits it.
    """
    v = as_vector(window, V)
    if float(v.min()) < 0:
        raise ValueError("potential must be nonnegative")
    exact = laplace_exact_finite(v, window, u)
    support = [window.vertices[i] for i in np.nonzero(v)[0]]
    K = support if support else [window.vertices[0]]

    report = TestReport(
        name=f"laplace u={u}",
        tolerance_policy=f"{N_SE} SE around the exact finite-volume transform",
        sample_sizes={"per_sampler": count},
        seeds={"seed": seed, "stream_base": _STREAM_LAPLACE},
        context={
            "u": u,
            "exact": exact,
            "support": [list(c) for c in K],
        },
    )

    half = laplace_exact_finite(v, window, u / 2)
    report.add(
        Check(
            name="exact transform nonincreasing in level",
            observed=exact,
            expected=half,
            tolerance=0.0,
            passed=exact <= half + 1e-15,
            detail="log-transform is linear in the level",
        )
    )

    batches = [
        simulate_collapse_batch(collapse(window), u, count, seed, stream=_STREAM_LAPLACE, workers=workers),
        sample_excursion_soup_batch(window, u, count, seed, stream=_STREAM_LAPLACE + 1, workers=workers),
        sample_hitting_soup_batch(K, window, u, count, seed, stream=_STREAM_LAPLACE + 2, workers=workers),
    ]
    for batch in batches:
        weights = np.exp(-batch.samples @ v)
        report.add(_mean_check(f"transform via {batch.sampler}", weights, exact))

    gen = window.generator
    if gen is not None and gen.transient and support:
        try:
            report.context["limit"] = laplace_exact_limit(
                {c: float(v[window.index[c]]) for c in support}, gen, u
            )
        except (ConvergenceFailure, LaplaceConditionError) as exc:
            report.context["limit"] = f"unavailable: {exc}"
    return report


def vacant_test(
    window: WeightedWindow,
    K,
    u: float,
    count: int = 10**5,
    seed: int = 0,
    workers: int = 1,
) -> TestReport:
    """Compare the empirical vacancy probability of K with its exact law.

    The chance that no trajectory touches K is exp(-u * capacity of K in
    the window); the empirical frequency comes from the collapse sampler
    and is held to four binomial standard errors at the exact probability.
    """
    K = [tuple(c) for c in K]
    report = TestReport(
        name=f"vacant u={u}",
        tolerance_policy=f"{N_SE} binomial SE at the exact probability",
        sample_sizes={"samples": count},
        seeds={"seed": seed, "stream": _STREAM_VACANT},
        context={"u": u, "K": [list(c) for c in K]},
    )
    if not K:
        report.add(
            Check(
                name="vacancy of the empty set",
                observed=1.0,
                expected=1.0,
                tolerance=0.0,
                passed=True,
                detail="empty intersection holds vacuously",
            )
        )
        return report
    cap = equilibrium(K, window).capacity
    exact = math.exp(-u * cap)
    report.context["capacity"] = cap
    batch = simulate_collapse_batch(collapse(window), u, count, seed, stream=_STREAM_VACANT, workers=workers)
    kidx = [window.index[c] for c in K]
    empirical = float(np.mean(np.all(batch.samples[:, kidx] == 0, axis=1)))
    se = math.sqrt(exact * (1 - exact) / count)
    report.add(check_se("vacancy probability", empirical, exact, se, n_se=N_SE))
    return report


def asymptotics_test(
    window: WeightedWindow,
    u_schedule=(1.0, 10.0, 50.0, 200.0),
    count: int = 4000,
    x0=None,
    coords=None,
    seed: int = 0,
    workers: int = 1,
) -> TestReport:
    """Check the Gaussian limit of the rescaled occupation field at large u.

    Along the increasing schedule the field over u concentrates at 1 with
    the exact variance law 2g/u; at the largest level the standardized
    field (field - u)/sqrt(2u) and its differences pinned at x0 are KS-
    compared against a Gaussian field with the window Green covariance.
    """
    if list(u_schedule) != sorted(u_schedule) or len(u_schedule) == 0:
        raise ValueError("u schedule must be nonempty and increasing")
    if any(u <= 0 for u in u_schedule):
        raise ValueError("u schedule must be positive")
    green = green_killed(window)
    coords, idx = _coord_indices(window, coords)
    x0 = coords[0] if x0 is None else tuple(x0)
    i0 = window.index[x0]

    report = TestReport(
        name="asymptotics",
        tolerance_policy=f"moments {N_SE} SE; KS family {KS_FAMILY_LEVEL} Bonferroni at the largest level",
        sample_sizes={"per_level": count},
        seeds={"seed": seed, "stream_base": _STREAM_ASYMPT},
        context={
            "u_schedule": list(u_schedule),
            "x0": list(x0),
            "coords": [list(c) for c in coords],
        },
    )

    chain = collapse(window)
    last_batch = None
    for k, u in enumerate(u_schedule):
        batch = simulate_collapse_batch(chain, u, count, seed, stream=_STREAM_ASYMPT + k, workers=workers)
        last_batch = batch
        scaled = batch.samples / u
        for c, i in zip(coords, idx):
            report.add(_mean_check(f"mean field/u at {c}, u={u}", scaled[:, i], 1.0))
        c0, i_first = coords[0], idx[0]
        report.add(
            _var_check(
                f"variance field/u at {c0}, u={u}", scaled[:, i_first], 2 * green.values[i_first, i_first] / u
            )
        )

    u_max = u_schedule[-1]
    std = (last_batch.samples - u_max) / math.sqrt(2 * u_max)
    phi = sample_gff(green, count, seed, stream=_STREAM_ASYMPT + 0x0F, workers=workers)
    alpha = KS_FAMILY_LEVEL / len(coords)
    for c, i in zip(coords, idx):
        stat, p = two_sample_ks(std[:, i], phi.samples[:, i])
        report.add(check_pvalue(f"KS standardized field at {c}, u={u_max}", stat, p, alpha))
    pinned = [(c, i) for c, i in zip(coords, idx) if i != i0]
    if pinned:
        alpha_p = KS_FAMILY_LEVEL / len(pinned)
        for c, i in pinned:
            stat, p = two_sample_ks(std[:, i] - std[:, i0], phi.samples[:, i] - phi.samples[:, i0])
            report.add(check_pvalue(f"KS pinned difference at {c}, u={u_max}", stat, p, alpha_p))
    return report


def sampler_agreement_test(
    window: WeightedWindow,
    u: float,
    count: int = 10_000,
    coords=None,
    K=None,
    seed: int = 0,
    workers: int = 1,
) -> TestReport:
    """Two-sample KS battery between the three samplers on one window.

    Collapse versus excursion soup at every battery coordinate, and
    collapse versus hitting soup on K; all p-values share one Bonferroni
    family.
    """
    coords, idx = _coord_indices(window, coords)
    K = coords[: min(2, len(coords))] if K is None else [tuple(c) for c in K]
    kidx = [window.index[c] for c in K]

    a = simulate_collapse_batch(collapse(window), u, count, seed, stream=_STREAM_AGREE, workers=workers)
    b = sample_excursion_soup_batch(window, u, count, seed, stream=_STREAM_AGREE + 1, workers=workers)
    c_batch = sample_hitting_soup_batch(K, window, u, count, seed, stream=_STREAM_AGREE + 2, workers=workers)

    report = TestReport(
        name=f"sampler-agreement u={u}",
        tolerance_policy=f"KS family {KS_FAMILY_LEVEL} Bonferroni across both comparisons",
        sample_sizes={"per_sampler": count},
        seeds={"seed": seed, "stream_base": _STREAM_AGREE},
        context={"u": u, "coords": [list(x) for x in coords], "K": [list(x) for x in K]},
    )
    alpha = KS_FAMILY_LEVEL / (len(coords) + len(K))
    for cc, i in zip(coords, idx):
        stat, p = two_sample_ks(a.samples[:, i], b.samples[:, i])
        report.add(check_pvalue(f"KS collapse vs excursion-soup at {cc}", stat, p, alpha))
    for cc, i in zip(K, kidx):
        stat, p = two_sample_ks(a.samples[:, i], c_batch.samples[:, i])
        report.add(check_pvalue(f"KS collapse vs hitting-soup at {cc}", stat, p, alpha))
    return report
