"""Jitted inner loops for the continuous-time samplers.

Chains are passed as flattened cumulative-probability rows: state i owns
``cum[row_ptr[i]:row_ptr[i+1]]`` and ``col`` of the same slice, with each
row's final entry exactly 1.0, so one uniform draw and a searchsorted pick
the next state.  A negative column index means the walk is killed.  All
kernels release the GIL and take a numpy Generator, so blocks of samples
can run on threads while staying deterministic per (seed, stream, block).
"""

import numba
import numpy as np


@numba.njit(inline="always")
def _step(row_ptr, col, cum, state, r):
    lo = row_ptr[state]
    hi = row_ptr[state + 1]
    return col[lo + np.searchsorted(cum[lo:hi], r, side="right")]


@numba.njit(cache=True, nogil=True)
def collapse_block(row_ptr, col, cum, lam, star, u, out, counts, rng):
    """Fill each output row with one occupation field from the collapsed chain.

    The chain starts at the star state; local time there grows by
    holding/lam[star] per stay, and the run stops the instant it reaches u,
    truncating the final holding interval.  Window states accumulate
    holding/lam into their field entries.  counts receives the number of
    departures from the star (completed excursion starts).
    """
    for s in range(out.shape[0]):
        state = star
        local = 0.0
        departures = 0
        while True:
            hold = rng.exponential()
            if state == star:
                if local + hold / lam[star] >= u:
                    break
                local += hold / lam[star]
                departures += 1
            else:
                out[s, state] += hold / lam[state]
            state = _step(row_ptr, col, cum, state, rng.random())
        counts[s] = departures


@numba.njit(cache=True, nogil=True)
def soup_block(row_ptr, col, cum, lam, start_cum, start_col, record, mean_count, out, counts, rng):
    """Fill each output row with one Poisson soup of killed-walk excursions.

    Draws a Poisson(mean_count) number of excursions, starts each at a
    vertex sampled from the cumulative start distribution, and runs the
    window walk until the kill slot (negative column) fires.  Only states
    flagged in ``record`` accumulate occupation; holding times elsewhere
    are independent of the path and never observed, so they are not drawn.
    """
    for s in range(out.shape[0]):
        m = rng.poisson(mean_count)
        counts[s] = m
        for _ in range(m):
            state = start_col[np.searchsorted(start_cum, rng.random(), side="right")]
            while state >= 0:
                if record[state]:
                    out[s, state] += rng.exponential() / lam[state]
                state = _step(row_ptr, col, cum, state, rng.random())
