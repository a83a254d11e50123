"""Random traffic generation."""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from ..netmodel import Network, Request, dbm_to_w

__all__ = ["ZIPF_RANKS", "zipf_mass", "rate_set", "rate_set_for_average", "gen_demands"]

ZIPF_RANKS = (1, 2, 3, 4, 5)


def zipf_mass(ranks: Sequence[int] = ZIPF_RANKS, exponent: float = 1.0) -> np.ndarray:
    w = np.asarray(ranks, dtype=float) ** -exponent
    return w / w.sum()


def rate_set(lo: float, hi: float, step: float = 250.0) -> tuple[float, ...]:
    if step <= 0 or hi < lo:
        raise ValueError("need step > 0 and hi >= lo")
    n = int(round((hi - lo) / step))
    return tuple(lo + k * step for k in range(n + 1))


def rate_set_for_average(average_gbps: float, step: float = 250.0) -> tuple[float, ...]:
    """{250, ..., 250 + 2n*250} for an average of 250 + n*250."""
    n = (average_gbps - step) / step
    if n < 0 or abs(n - round(n)) > 1e-9:
        raise ValueError(f"average {average_gbps} is not of the form {step:g}+n*{step:g}")
    return rate_set(step, step + 2 * round(n) * step, step)


def gen_demands(seed: int, n: int, rates: Sequence[float], network: Network, psd_dbm_per_ghz: float,
                revenue_map: Mapping[int, float] | None = None, zipf_exponent: float = 1.0,
                distinct_pairs: bool = False) -> list[Request]:
    """``n`` requests with uniform endpoints and rates and Zipf-ranked revenue.

    Endpoint pairs are drawn with replacement unless ``distinct_pairs``.
    Revenue is the rank itself unless ``revenue_map`` says otherwise.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not rates:
        raise ValueError("rate set is empty")
    nodes = network.nodes
    pairs = [(s, d) for s in nodes for d in nodes if s != d]
    if distinct_pairs and n > len(pairs):
        raise ValueError(f"{n} distinct pairs requested but only {len(pairs)} exist")
    rng = np.random.default_rng(seed)
    if distinct_pairs:
        picks = rng.choice(len(pairs), size=n, replace=False)
    else:
        picks = rng.integers(len(pairs), size=n)
    rate_idx = rng.integers(len(rates), size=n)
    ranks = rng.choice(ZIPF_RANKS, size=n, p=zipf_mass(ZIPF_RANKS, zipf_exponent))
    psd = dbm_to_w(psd_dbm_per_ghz)
    out = []
    for i in range(n):
        s, d = pairs[int(picks[i])]
        rank = int(ranks[i])
        rev = float(revenue_map[rank]) if revenue_map is not None else float(rank)
        out.append(Request(i, s, d, float(rates[int(rate_idx[i])]), rev, psd))
    return out
