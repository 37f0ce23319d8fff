"""Exact potential theory on finite windows by dense linear algebra.

Everything here is deterministic: Green matrices of the killed walk,
equilibrium measures and capacities, hitting probabilities computed two
independent ways, killed-path Laplace functionals, and the exact occupation
Laplace transform at a given level, both at finite volume and as a window
limit.  These are the oracles the Monte Carlo samplers are judged against.

Windows stay small enough (a few thousand vertices) that LU solves are
exact to near machine precision, which is the point: no iterative solver,
no preconditioning, no approximation beyond the window itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import GraphGenerator, Vertex, WeightedWindow, build_window, transition_matrix

#: Window radii tried, in order, by the infinite-volume limit routines.
DEFAULT_RADII = tuple(range(2, 13))

#: Solver output must be symmetric to this much before averaging.
ASYMMETRY_TOL = 1e-9

#: The two hitting-probability routes must agree to this much.
HITTING_TOL = 1e-10


class PotentialError(Exception):
    """A linear solve failed or an exact identity broke."""


class ConvergenceFailure(PotentialError):
    """A window schedule was exhausted before increments fell under tolerance.

    Carries the last two iterates and the radii that produced them.
    """

    def __init__(self, message: str, iterates: tuple[float, float], radii: tuple[int, int]):
        super().__init__(message)
        self.iterates = iterates
        self.radii = radii


class LaplaceConditionError(PotentialError):
    """The smallness condition for the limit Laplace transform fails."""


@dataclass(frozen=True)
class GreenMatrix:
    """Dense symmetric Green matrix, in units of time per weight.

    ``kind`` is ``"killed"`` for the walk killed on exiting the window
    (indices follow ``window.vertices``) or ``"resolvent"`` for the
    collapsed-chain kernel with an extra uniform mass and the star state
    last (one more row and column than the window).
    """

    window: WeightedWindow
    values: np.ndarray
    kind: str
    asymmetry: float = 0.0

    def __getitem__(self, pair) -> float:
        x, y = pair
        return float(self.values[self.window.index[tuple(x)], self.window.index[tuple(y)]])

    def validate(self) -> None:
        g = self.values
        sym = float(np.abs(g - g.T).max())
        if sym > 1e-10:
            raise PotentialError(f"Green matrix asymmetric by {sym:.3e}")
        if float(g.min()) < -1e-12:
            raise PotentialError(f"negative Green entry {g.min():.3e}")
        eigs = np.linalg.eigvalsh(g)
        floor = -1e-8 * float(np.abs(eigs).max())
        if eigs[0] < floor:
            raise PotentialError(f"Green matrix not positive semi-definite: min eig {eigs[0]:.3e}")


@dataclass(frozen=True)
class EquilibriumMeasure:
    """Weighted no-return mass on a set K inside a window.

    ``mass`` is indexed like ``window.vertices`` and is zero off K;
    ``capacity`` is its total.
    """

    window: WeightedWindow
    support: tuple[Vertex, ...]
    mass: np.ndarray
    capacity: float

    def as_dict(self) -> dict[Vertex, float]:
        return {v: float(self.mass[self.window.index[v]]) for v in self.support}

    def validate(self) -> None:
        if float(self.mass.min()) < 0:
            raise PotentialError(f"negative equilibrium mass {self.mass.min():.3e}")
        on = {self.window.index[v] for v in self.support}
        off = [i for i in range(self.window.n) if i not in on]
        if off and np.any(self.mass[off] != 0):
            raise PotentialError("equilibrium mass leaked outside its support")
        if abs(self.capacity - self.mass.sum()) > 1e-12 * max(1.0, self.capacity):
            raise PotentialError("capacity does not match total mass")


@dataclass(frozen=True)
class PotentialFunction:
    """A vector on window vertices tagged by the operator that defined it."""

    window: WeightedWindow
    values: np.ndarray
    kind: str

    def __getitem__(self, v: Vertex) -> float:
        return float(self.values[self.window.index[v]])

    def as_dict(self) -> dict[Vertex, float]:
        return {v: float(self.values[i]) for i, v in enumerate(self.window.vertices)}


def as_vector(window: WeightedWindow, V) -> np.ndarray:
    """Coerce a dict keyed by vertex, or an array, to a window-indexed vector."""
    if isinstance(V, dict):
        vec = np.zeros(window.n)
        for v, val in V.items():
            v = tuple(v)
            if v not in window.index:
                raise ValueError(f"vertex {v} is outside the window")
            vec[window.index[v]] = float(val)
        return vec
    vec = np.asarray(V, dtype=float)
    if vec.shape != (window.n,):
        raise ValueError(f"expected a vector of length {window.n}, got shape {vec.shape}")
    return vec.copy()


def green_killed(window: WeightedWindow) -> GreenMatrix:
    """Green matrix of the walk killed when it first leaves the window.

    Solves (I - P) N = I for the expected visit counts N of the killed
    discrete walk, then divides column y by lambda_y to convert visits into
    time per weight.  The result is symmetrized by averaging; the solver
    asymmetry before averaging must be below ``ASYMMETRY_TOL``.
    """
    if window.total_boundary_weight() <= 0:
        raise PotentialError("killed Green matrix is infinite: window has no escape edges")
    p = transition_matrix(window)
    n = window.n
    try:
        visits = np.linalg.solve(np.eye(n) - p, np.eye(n))
    except np.linalg.LinAlgError as exc:
        raise PotentialError(f"killed-walk system is singular: {exc}") from None
    g = visits / window.lam[None, :]
    asym = float(np.abs(g - g.T).max())
    if asym > ASYMMETRY_TOL * max(1.0, float(np.abs(g).max())):
        raise PotentialError(f"solver asymmetry {asym:.3e} exceeds tolerance")
    return GreenMatrix(window=window, values=(g + g.T) / 2.0, kind="killed", asymmetry=asym)


def green_resolvent(window: WeightedWindow, lam_resolvent: float) -> GreenMatrix:
    """Collapsed-chain Green kernel with uniform extra mass 1/lam_resolvent.

    States are the window vertices followed by the star; the killed kernel
    is extended by zero on star rows and columns before the uniform mass is
    added, so every star entry equals exactly 1/lam_resolvent.
    """
    if lam_resolvent <= 0:
        raise ValueError(f"resolvent rate must be positive, got {lam_resolvent}")
    base = green_killed(window).values
    n = window.n
    g = np.full((n + 1, n + 1), 1.0 / lam_resolvent)
    g[:n, :n] += base
    return GreenMatrix(window=window, values=g, kind="resolvent")


def green_limit(
    gen: GraphGenerator,
    x: Vertex,
    y: Vertex | None = None,
    radii=DEFAULT_RADII,
    tol: float = 1e-3,
) -> tuple[float, int]:
    """Infinite-volume Green value as a monotone window limit.

    Windows are centered at ``x`` and grown through ``radii``; iterates are
    nondecreasing, and the first radius whose increment over the previous
    one falls below ``tol`` wins.  Returns ``(value, radius used)``.
    """
    if not gen.transient:
        raise PotentialError(f"generator {gen.name!r} is not transient; no infinite-volume limit")
    if not radii:
        raise ValueError("empty radii schedule")
    x = tuple(x)
    y = x if y is None else tuple(y)
    vals: list[tuple[int, float]] = []
    for r in radii:
        win = build_window(gen, x, r)
        if y not in win.index:
            raise ValueError(f"vertex {y} is outside the radius-{r} window around {x}")
        val = float(green_killed(win).values[win.index[x], win.index[y]])
        if vals:
            prev_r, prev = vals[-1]
            if val < prev - 1e-10:
                raise PotentialError(
                    f"Green iterates decreased from {prev!r} to {val!r} between radii {prev_r} and {r}"
                )
            if val - prev < tol:
                return val, r
        vals.append((r, val))
    (r1, v1), (r2, v2) = vals[-2] if len(vals) > 1 else (-1, float("nan")), vals[-1]
    raise ConvergenceFailure(
        f"Green limit not converged to {tol} by radius {r2}",
        iterates=(v1, v2),
        radii=(r1, r2),
    )


def _limit_schedule(values_by_radius: list[tuple[int, float]], tol: float, what: str) -> tuple[float, int]:
    prev_r, prev = values_by_radius[0]
    for r, val in values_by_radius[1:]:
        if abs(val - prev) < tol:
            return val, r
        prev_r, prev = r, val
    last = values_by_radius[-1]
    second = values_by_radius[-2] if len(values_by_radius) > 1 else (-1, float("nan"))
    raise ConvergenceFailure(
        f"{what} not converged to {tol} by radius {last[0]}",
        iterates=(second[1], last[1]),
        radii=(second[0], last[0]),
    )


def equilibrium(K, window: WeightedWindow) -> EquilibriumMeasure:
    """No-return measure of a vertex set K relative to the window.

    For x in K the mass is lambda_x times the probability that the walk
    started at x leaves the window before returning to K.  Computed by one
    linear solve for the escape probability off K: the mass at x is its
    direct boundary weight plus the weight into off-K neighbors times their
    escape probability.
    """
    kset = {tuple(v) for v in K}
    if not kset:
        raise ValueError("K is empty")
    missing = kset - set(window.index)
    if missing:
        raise ValueError(f"K vertices {sorted(missing)} are outside the window")
    kidx = sorted(window.index[v] for v in kset)
    rest = [i for i in range(window.n) if i not in set(kidx)]

    c = window.weight_matrix()
    mass = np.zeros(window.n)
    if rest:
        p = c / window.lam[:, None]
        p_rr = p[np.ix_(rest, rest)]
        exit_mass = window.boundary_weight[rest] / window.lam[rest]
        escape = np.linalg.solve(np.eye(len(rest)) - p_rr, exit_mass)
        mass[kidx] = window.boundary_weight[kidx] + c[np.ix_(kidx, rest)] @ escape
    else:
        mass[kidx] = window.boundary_weight[kidx]

    out = EquilibriumMeasure(
        window=window,
        support=tuple(window.vertices[i] for i in kidx),
        mass=mass,
        capacity=float(mass.sum()),
    )
    out.validate()
    return out


def _hitting_vector(K, window: WeightedWindow) -> np.ndarray:
    """P[enter K before leaving the window], by direct linear solve, at every vertex."""
    kidx = sorted(window.index[tuple(v)] for v in K)
    rest = [i for i in range(window.n) if i not in set(kidx)]
    h = np.zeros(window.n)
    h[kidx] = 1.0
    if rest:
        p = transition_matrix(window)
        rhs = p[np.ix_(rest, kidx)].sum(axis=1)
        h[rest] = np.linalg.solve(np.eye(len(rest)) - p[np.ix_(rest, rest)], rhs)
    return h


def hitting_probability(x: Vertex, K, window: WeightedWindow) -> float:
    """Probability of entering K before leaving the window, from x.

    Computed twice: by direct linear solve, and as the Green matrix acting
    on the equilibrium mass of K.  The two routes must agree to
    ``HITTING_TOL`` at every window vertex; the direct value is returned.
    """
    x = tuple(x)
    if x not in window.index:
        raise ValueError(f"vertex {x} is outside the window")
    direct = _hitting_vector(K, window)
    via_green = green_killed(window).values @ equilibrium(K, window).mass
    gap = float(np.abs(direct - via_green).max())
    if gap > HITTING_TOL:
        raise PotentialError(
            f"hitting probability routes disagree by {gap:.3e} (tolerance {HITTING_TOL})"
        )
    return float(direct[window.index[x]])


def feynman_kac(V, window: WeightedWindow) -> PotentialFunction:
    """Expected killed-path weight exp(-integral of V/lambda along the walk).

    The potential acts through local time, so each unit-rate holding at x
    contributes a factor with mean lambda_x/(lambda_x + V(x)); the exact
    values solve (I - P + diag(V/lambda)) f = exit mass.  Values lie in
    (0, 1].
    """
    v = as_vector(window, V)
    if float(v.min()) < 0:
        raise ValueError(f"potential must be nonnegative, got minimum {v.min()}")
    p = transition_matrix(window)
    m = np.eye(window.n) - p + np.diag(v / window.lam)
    rhs = window.boundary_weight / window.lam
    f = np.linalg.solve(m, rhs)
    if float(f.min()) <= 0 or float(f.max()) > 1 + 1e-9:
        raise PotentialError(f"killed-path weights outside (0,1]: range [{f.min()}, {f.max()}]")
    return PotentialFunction(window=window, values=np.minimum(f, 1.0), kind="feynman-kac")


def laplace_exact_finite(V, window: WeightedWindow, u: float, K=None) -> float:
    """Exact occupation-time Laplace transform at level u on one window.

    Combines the no-return measure of the support K with the killed-path
    weight under V: exp(u * sum over K of mass(x) * (f(x) - 1)).  The value
    lies in (0, 1].
    """
    if u < 0:
        raise ValueError(f"level must be nonnegative, got {u}")
    v = as_vector(window, V)
    if K is None:
        support = np.nonzero(v)[0]
        if support.size == 0:
            return 1.0
        K = [window.vertices[i] for i in support]
    else:
        K = [tuple(kv) for kv in K]
        nz = np.nonzero(v)[0]
        if not set(window.vertices[i] for i in nz) <= set(K):
            raise ValueError("potential has mass outside K")
    e = equilibrium(K, window)
    f = feynman_kac(v, window)
    return float(np.exp(u * float(e.mass @ (f.values - 1.0))))


def laplace_exact_limit(
    V: dict,
    gen: GraphGenerator,
    u: float,
    radii=DEFAULT_RADII,
    tol: float = 1e-3,
) -> float:
    """Infinite-volume occupation Laplace transform for finitely supported V.

    On each window the inner product <V, h> with (I + GV) h = 1 reduces to a
    solve on support(V) alone; windows grow through ``radii`` until the
    inner product stabilizes to ``tol``, and the result is exp(-u * limit).
    The smallness condition sup(GV) < 1 is checked on every window used,
    the largest included; violation raises :class:`LaplaceConditionError`.
    """
    if u < 0:
        raise ValueError(f"level must be nonnegative, got {u}")
    if not gen.transient:
        raise PotentialError(f"generator {gen.name!r} is not transient; no infinite-volume limit")
    if not radii:
        raise ValueError("empty radii schedule")
    support = sorted(tuple(v) for v, val in V.items() if val != 0)
    if any(float(V[v]) < 0 for v in V):
        raise ValueError("potential must be nonnegative")
    if not support:
        return 1.0
    vs = np.array([float(V[v]) for v in support])

    iterates: list[tuple[int, float]] = []
    for r in radii:
        win = build_window(gen, gen.root, r)
        if not set(support) <= set(win.index):
            raise ValueError(f"support of V is outside the radius-{r} window; enlarge the schedule")
        g = green_killed(win).values
        sidx = [win.index[v] for v in support]
        sup_gv = float((g[:, sidx] @ vs).max())
        if sup_gv >= 1.0:
            raise LaplaceConditionError(
                f"Laplace condition violated: sup of Green potential is {sup_gv:.6g} >= 1 "
                f"on the radius-{r} window"
            )
        m = np.eye(len(support)) + g[np.ix_(sidx, sidx)] * vs[None, :]
        h = np.linalg.solve(m, np.ones(len(support)))
        iterates.append((r, float(vs @ h)))
        if len(iterates) > 1 and abs(iterates[-1][1] - iterates[-2][1]) < tol:
            break
    else:
        _limit_schedule(iterates, tol, "occupation Laplace inner product")
    return float(np.exp(-u * iterates[-1][1]))


def resolvent_check(V, window: WeightedWindow, lam_resolvent: float):
    """Cross-validate the collapsed-chain resolvent against the window solve.

    Two independent dense routes to the same number: the star-state value of
    (I + G_n V)^{-1} 1 on the collapsed chain with uniform extra Green mass
    1/lam, and 1/(1 + <V, (I + G V)^{-1} 1>/lam) from the window alone.
    Both must agree to 1e-9, as must the star value with 1 - b/lam for the
    chain-side mass b = <V, h>.  Requires the smallness precondition
    sup(GV) + sum(V)/lam < 1.
    """
    from .reporting import TestReport, check_abs

    if lam_resolvent <= 0:
        raise ValueError(f"resolvent rate must be positive, got {lam_resolvent}")
    v = as_vector(window, V)
    if float(v.min()) < 0:
        raise ValueError("potential must be nonnegative")
    g = green_killed(window).values
    small = float((g @ v).max()) + float(v.sum()) / lam_resolvent
    if small >= 1.0:
        raise PotentialError(
            f"smallness precondition violated: sup(GV) + sum(V)/lam = {small:.6g} >= 1"
        )

    n = window.n
    gn = green_resolvent(window, lam_resolvent).values
    vn = np.concatenate([v, [0.0]])
    h = np.linalg.solve(np.eye(n + 1) + gn * vn[None, :], np.ones(n + 1))
    star_direct = float(h[n])
    b_chain = float(vn @ h)

    w = np.linalg.solve(np.eye(n) + g * v[None, :], np.ones(n))
    star_window = 1.0 / (1.0 + float(v @ w) / lam_resolvent)

    report = TestReport(
        name="resolvent-identity",
        tolerance_policy="absolute 1e-9 between independent dense solves",
        context={
            "lambda": lam_resolvent,
            "smallness": small,
            "window_vertices": n,
        },
    )
    report.add(check_abs("star value, chain solve vs window solve", star_direct, star_window, 1e-9))
    report.add(check_abs("star value vs 1 - b/lambda", star_direct, 1.0 - b_chain / lam_resolvent, 1e-9))
    return report
