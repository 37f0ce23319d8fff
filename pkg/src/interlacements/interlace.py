"""Occupation-field samplers for the interlacement cloud at level u.

Three routes to the same law on a window, used to cross-validate each
other.  The collapse sampler runs one continuous-time chain on the window
plus star and stops when the star's local time reaches u exactly.  The
excursion soup draws a Poisson number of killed window walks started from
the normalized boundary-entry distribution.  The hitting soup thins the
cloud to the trajectories that meet a chosen set K, drawing starts from the
normalized no-return measure of K, and records occupation on K alone.

All samplers consume (seed, stream)-keyed generator blocks, so a batch is
byte-identical at any worker count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .graph import CollapsedChain, Vertex, WeightedWindow, collapse
from .potential import equilibrium
from .rng import block_counts, block_generator, map_blocks

SAMPLER_TAGS = ("collapse", "excursion-soup", "hitting-soup")


@dataclass(frozen=True)
class OccupationField:
    """One sampled occupation field: time at x over lambda_x, per window vertex."""

    window: WeightedWindow
    values: np.ndarray
    level: float
    sampler: str
    seed_record: dict

    def __getitem__(self, v: Vertex) -> float:
        return float(self.values[self.window.index[v]])

    def validate(self) -> None:
        if self.sampler not in SAMPLER_TAGS:
            raise ValueError(f"unknown sampler tag {self.sampler!r}")
        if float(self.values.min()) < 0:
            raise ValueError(f"negative occupation value {self.values.min()}")
        if self.level == 0 and np.any(self.values != 0):
            raise ValueError("nonzero occupation at level 0")


@dataclass(frozen=True)
class FieldBatch:
    """A batch of occupation fields (sample row per draw) plus excursion counts.

    ``counts[i]`` is the number of excursions (collapse, excursion soup) or
    retained trajectories (hitting soup) behind sample i.
    """

    window: WeightedWindow
    samples: np.ndarray
    counts: np.ndarray
    level: float
    sampler: str
    seed_record: dict

    @property
    def count(self) -> int:
        return self.samples.shape[0]

    def field(self, i: int) -> OccupationField:
        return OccupationField(
            window=self.window,
            values=self.samples[i],
            level=self.level,
            sampler=self.sampler,
            seed_record={**self.seed_record, "sample": i},
        )


def _chain_rows(chain: CollapsedChain):
    """Flatten the collapsed chain into cumulative-probability rows."""
    n = chain.n_states
    row_ptr = np.zeros(n + 1, dtype=np.int64)
    cols: list[np.ndarray] = []
    cums: list[np.ndarray] = []
    for i in range(n):
        nbrs = np.nonzero(chain.weights[i])[0]
        probs = chain.weights[i, nbrs] / chain.lam[i]
        cum = np.cumsum(probs)
        cum[-1] = 1.0
        row_ptr[i + 1] = row_ptr[i] + nbrs.size
        cols.append(nbrs.astype(np.int64))
        cums.append(cum)
    return row_ptr, np.concatenate(cols), np.concatenate(cums)


def _window_rows(window: WeightedWindow):
    """Killed-walk rows: internal moves then a kill slot (column -1) at 1.0."""
    n = window.n
    c = window.weight_matrix()
    row_ptr = np.zeros(n + 1, dtype=np.int64)
    cols: list[np.ndarray] = []
    cums: list[np.ndarray] = []
    for i in range(n):
        nbrs = np.nonzero(c[i])[0]
        probs = c[i, nbrs] / window.lam[i]
        cum = np.concatenate([np.cumsum(probs), [1.0]])
        row_ptr[i + 1] = row_ptr[i] + nbrs.size + 1
        cols.append(np.concatenate([nbrs, [-1]]).astype(np.int64))
        cums.append(cum)
    return row_ptr, np.concatenate(cols), np.concatenate(cums)


def _start_distribution(weights: np.ndarray):
    """Cumulative start distribution over the states carrying positive weight."""
    idx = np.nonzero(weights)[0].astype(np.int64)
    cum = np.cumsum(weights[idx])
    cum /= cum[-1]
    cum[-1] = 1.0
    return cum, idx


def _run_blocks(kernel, args, n_values, count, seed, stream, workers):
    """Run a sampler kernel over counter-offset blocks, rows in block order."""
    sizes = block_counts(count)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    out = np.zeros((count, n_values))
    counts = np.zeros(count, dtype=np.int64)

    if workers > 1:
        # compile outside the thread pool so threads only execute
        warm_out = np.zeros((1, n_values))
        warm_counts = np.zeros(1, dtype=np.int64)
        kernel(*args, warm_out, warm_counts, block_generator(seed, stream, 0))

    def fill(block: int, block_count: int):
        lo, hi = offsets[block], offsets[block] + block_count
        kernel(*args, out[lo:hi], counts[lo:hi], block_generator(seed, stream, block))

    map_blocks(fill, count, workers=workers)
    return out, counts


def simulate_collapse_batch(
    chain: CollapsedChain,
    u: float,
    count: int,
    seed: int,
    stream: int = 1,
    workers: int = 1,
) -> FieldBatch:
    """Sample occupation fields by running the collapsed chain to star local time u."""
    if u < 0:
        raise ValueError(f"level must be nonnegative, got {u}")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    row_ptr, col, cum = _chain_rows(chain)
    args = (row_ptr, col, cum, chain.lam, chain.star, float(u))
    samples, counts = _run_blocks(
        _kernels.collapse_block, args, chain.window.n, count, seed, stream, workers
    )
    return FieldBatch(
        window=chain.window,
        samples=samples,
        counts=counts,
        level=float(u),
        sampler="collapse",
        seed_record={"seed": int(seed), "stream": int(stream)},
    )


def simulate_collapse(chain: CollapsedChain, u: float, seed: int, stream: int = 1) -> OccupationField:
    """One occupation field from the collapsed-chain run."""
    return simulate_collapse_batch(chain, u, 1, seed, stream=stream).field(0)


def sample_excursion_soup_batch(
    window: WeightedWindow,
    u: float,
    count: int,
    seed: int,
    stream: int = 2,
    workers: int = 1,
) -> FieldBatch:
    """Sample occupation fields as Poisson soups of boundary-entry excursions.

    The excursion count per sample is Poisson with mean u times the total
    boundary weight; starts are drawn proportionally to each vertex's
    boundary weight; walks are killed on leaving the window.
    """
    if u < 0:
        raise ValueError(f"level must be nonnegative, got {u}")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    total = window.total_boundary_weight()
    if total <= 0:
        raise ValueError("window has no boundary to enter from")
    row_ptr, col, cum = _window_rows(window)
    start_cum, start_col = _start_distribution(window.boundary_weight)
    record = np.ones(window.n, dtype=np.bool_)
    args = (row_ptr, col, cum, window.lam, start_cum, start_col, record, float(u) * total)
    samples, counts = _run_blocks(
        _kernels.soup_block, args, window.n, count, seed, stream, workers
    )
    return FieldBatch(
        window=window,
        samples=samples,
        counts=counts,
        level=float(u),
        sampler="excursion-soup",
        seed_record={"seed": int(seed), "stream": int(stream)},
    )


def sample_excursion_soup(window: WeightedWindow, u: float, seed: int, stream: int = 2) -> OccupationField:
    """One occupation field from the excursion soup."""
    return sample_excursion_soup_batch(window, u, 1, seed, stream=stream).field(0)


def sample_hitting_soup_batch(
    K,
    window: WeightedWindow,
    u: float,
    count: int,
    seed: int,
    stream: int = 3,
    workers: int = 1,
) -> FieldBatch:
    """Sample the occupation field on K from the trajectories that meet K.

    The trajectory count is Poisson with mean u times the capacity of K in
    the window; starts are drawn from the normalized no-return measure, and
    occupation is recorded on K only, where it matches the other samplers
    in law.
    """
    if u < 0:
        raise ValueError(f"level must be nonnegative, got {u}")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    eq = equilibrium(K, window)
    row_ptr, col, cum = _window_rows(window)
    start_cum, start_col = _start_distribution(eq.mass)
    record = np.zeros(window.n, dtype=np.bool_)
    record[[window.index[v] for v in eq.support]] = True
    args = (row_ptr, col, cum, window.lam, start_cum, start_col, record, float(u) * eq.capacity)
    samples, counts = _run_blocks(
        _kernels.soup_block, args, window.n, count, seed, stream, workers
    )
    return FieldBatch(
        window=window,
        samples=samples,
        counts=counts,
        level=float(u),
        sampler="hitting-soup",
        seed_record={"seed": int(seed), "stream": int(stream)},
    )


def sample_hitting_soup(K, window: WeightedWindow, u: float, seed: int, stream: int = 3) -> OccupationField:
    """One occupation field on K from the hitting soup."""
    return sample_hitting_soup_batch(K, window, u, 1, seed, stream=stream).field(0)


def interlacement_set(field: OccupationField) -> tuple[Vertex, ...]:
    """Vertices carrying positive occupation, in window index order."""
    return tuple(field.window.vertices[i] for i in np.nonzero(field.values > 0)[0])


@dataclass(frozen=True)
class ExcursionRecord:
    """One excursion: where it entered, its timed path, and how it ended.

    ``path`` lists (vertex, holding time) pairs for the rate-1 chain; the
    trailing holding time at the exit step is included.  ``termination`` is
    always ``"exited-window"`` for soup excursions, which leave through the
    boundary by construction; a collapse-chain reading of the same event is
    ``"returned-to-star"``.
    """

    start: Vertex
    path: tuple[tuple[Vertex, float], ...]
    termination: str

    def validate(self, window: WeightedWindow) -> None:
        if self.termination not in ("exited-window", "returned-to-star"):
            raise ValueError(f"unknown termination {self.termination!r}")
        if not self.path or self.path[0][0] != self.start:
            raise ValueError("path must begin at the start vertex")
        for (v, hold), (w, _) in zip(self.path, self.path[1:]):
            if hold <= 0:
                raise ValueError("holding times must be positive")
            i, j = window.index.get(v), window.index.get(w)
            if i is None or j is None or (i, j) not in window.weights:
                raise ValueError(f"step {v} -> {w} crosses no positive-weight edge")
        if self.path[-1][1] <= 0:
            raise ValueError("holding times must be positive")


def trace_excursions(
    window: WeightedWindow, u: float, seed: int, stream: int = 4
) -> list[ExcursionRecord]:
    """Explicit excursion list behind one soup sample, for inspection.

    Same law as one :func:`sample_excursion_soup` draw, but keeping the
    full timed paths instead of aggregating occupation.  Pure Python; meant
    for small windows and demonstration, not batch statistics.
    """
    if u < 0:
        raise ValueError(f"level must be nonnegative, got {u}")
    total = window.total_boundary_weight()
    if total <= 0:
        raise ValueError("window has no boundary to enter from")
    gen = block_generator(seed, stream)
    row_ptr, col, cum = _window_rows(window)
    start_cum, start_col = _start_distribution(window.boundary_weight)
    records = []
    for _ in range(gen.poisson(u * total)):
        state = int(start_col[np.searchsorted(start_cum, gen.random(), side="right")])
        path = []
        while state >= 0:
            path.append((window.vertices[state], float(gen.exponential())))
            lo, hi = row_ptr[state], row_ptr[state + 1]
            state = int(col[lo + np.searchsorted(cum[lo:hi], gen.random(), side="right")])
        records.append(
            ExcursionRecord(start=path[0][0], path=tuple(path), termination="exited-window")
        )
    return records


def sample_field_batch(
    window: WeightedWindow,
    u: float,
    count: int,
    seed: int,
    sampler: str = "collapse",
    stream: int | None = None,
    workers: int = 1,
    K=None,
) -> FieldBatch:
    """Dispatch to one of the three samplers by tag."""
    if sampler == "collapse":
        stream = 1 if stream is None else stream
        return simulate_collapse_batch(collapse(window), u, count, seed, stream=stream, workers=workers)
    if sampler == "excursion-soup":
        stream = 2 if stream is None else stream
        return sample_excursion_soup_batch(window, u, count, seed, stream=stream, workers=workers)
    if sampler == "hitting-soup":
        if K is None:
            raise ValueError("hitting-soup sampler needs K")
        stream = 3 if stream is None else stream
        return sample_hitting_soup_batch(K, window, u, count, seed, stream=stream, workers=workers)
    raise ValueError(f"unknown sampler {sampler!r}; expected one of {SAMPLER_TAGS}")
