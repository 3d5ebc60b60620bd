"""Exact per-element posteriors on a syndrome trellis (forward-backward).

This is a BCJR-style two-pass algorithm.  The forward metric alpha_l(s) sums
the prior mass of all length-l prefixes whose partial syndrome is s; the
backward metric beta_l(s) sums, over all suffixes starting at s, the prior
mass weighted by the observation likelihood Q(t | final syndrome).  The
product alpha * gamma * beta split by edge label yields, per element, the
unnormalised posterior masses

    U0_l = Pr{T = t, X_l = 0},    U1_l = Pr{T = t, X_l = 1},

whose log-ratio is the a-posteriori log-likelihood ratio reported as `lapp`.
U0_l + U1_l equals the model evidence Pr{T = t} at every section, which is
both a free consistency check and the normaliser turning the pair into a
posterior probability.

To stay in fast linear arithmetic without underflowing (prior mass shrinks
like delta^k (1-delta)^(n-k)), both passes renormalise each depth to sum to
one and accumulate the log of the discarded scale factors; all reported
quantities fold the accumulated logs back in.

The backward pass is batched: `posterior_table` stacks many outcome vectors
as columns of the final beta matrix and shares the (outcome-independent)
forward pass, which is what makes large Monte Carlo sweeps cheap.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .model import (
    CustomNoise,
    Noiseless,
    NotASyndromeError,
    Prior,
    SizeLimitError,
    as_bit_vector,
    bits_to_index,
)
from .trellis import Complete, Expurgated, Reduced, Trellis

#: Generic (callable) likelihoods are evaluated state by state in Python, so
#: trellis inference with them is restricted to small outcome spaces.
MAX_CUSTOM_NOISE_TESTS = 16


def branch_metric(label, prior: Prior) -> float:
    """Edge weight gamma: prior probability of one element's label."""
    if label not in (0, 1):
        raise ValueError(f"edge label must be 0 or 1, got {label}")
    return prior.delta if label == 1 else 1.0 - prior.delta


@dataclasses.dataclass(frozen=True, eq=False)
class MetricTable:
    """Scaled per-depth metrics plus the log scale factors to undo the scaling.

    True metrics are recovered as alpha[l] * exp(alpha_log_scale[l]) and
    beta[l] * exp(beta_log_scale[l]).  The scaled alphas sum to one at every
    depth by construction.
    """

    alpha: tuple
    beta: tuple
    alpha_log_scale: np.ndarray
    beta_log_scale: np.ndarray
    section_log_evidence: np.ndarray


@dataclasses.dataclass(frozen=True, eq=False)
class PosteriorResult:
    """Per-element posterior log-ratios plus evidence and inspection data.

    lapp[l] = log Pr{X_l = 0 | T = t} - log Pr{X_l = 1 | T = t}; +inf marks an
    element certainly non-defective, -inf certainly defective.  `zero_forced`
    lists elements a reduced trellis ruled out structurally (members of silent
    tests); their lapp is +inf.
    """

    lapp: np.ndarray
    log_evidence: float
    zero_forced: np.ndarray
    metrics: MetricTable


def _forward(trellis, g0, g1):
    """Scaled forward metrics per depth and cumulative log scales."""
    alpha = [np.ones(1)]
    log_scale = [0.0]
    for ell in range(trellis.n):
        sec = trellis.sections[ell]
        size = trellis.states[ell + 1].size
        cur = alpha[ell]
        nxt = np.bincount(
            sec.zero_dst, weights=g0 * cur[sec.zero_src], minlength=size
        ) + np.bincount(sec.one_dst, weights=g1 * cur[sec.one_src], minlength=size)
        c = float(nxt.sum())
        alpha.append(nxt / c)
        log_scale.append(log_scale[-1] + math.log(c))
    return alpha, np.array(log_scale)


def _backward(trellis, g0, g1, beta_final):
    """Scaled backward metrics (batched over columns) and cumulative log scales."""
    n = trellis.n
    beta = [None] * (n + 1)
    log_scale = [None] * (n + 1)
    d = beta_final.sum(axis=0)
    beta[n] = beta_final / d
    log_scale[n] = np.log(d)
    for ell in range(n - 1, -1, -1):
        sec = trellis.sections[ell]
        cur = np.zeros((trellis.states[ell].size, beta_final.shape[1]))
        # src positions are unique within each label array, so fancy += is safe
        cur[sec.zero_src] += g0 * beta[ell + 1][sec.zero_dst]
        cur[sec.one_src] += g1 * beta[ell + 1][sec.one_dst]
        c = cur.sum(axis=0)
        beta[ell] = cur / c
        log_scale[ell] = log_scale[ell + 1] + np.log(c)
    return beta, np.stack(log_scale)


def _engine(trellis, prior, beta_final):
    """Both passes plus per-section label sums; beta_final is (final states, K)."""
    g0 = branch_metric(0, prior)
    g1 = branch_metric(1, prior)
    n, k = trellis.n, beta_final.shape[1]
    alpha, a_log = _forward(trellis, g0, g1)
    beta, b_log = _backward(trellis, g0, g1, beta_final)
    u0 = np.empty((n, k))
    u1 = np.empty((n, k))
    for ell in range(n):
        sec = trellis.sections[ell]
        a, b = alpha[ell], beta[ell + 1]
        u0[ell] = g0 * (a[sec.zero_src] @ b[sec.zero_dst])
        u1[ell] = g1 * (a[sec.one_src] @ b[sec.one_dst])
    with np.errstate(divide="ignore"):
        lapp = np.log(u0) - np.log(u1)
        section_log_evidence = np.log(u0 + u1) + (a_log[:n, None] + b_log[1:])
    log_evidence = np.log(alpha[n] @ beta[n]) + a_log[n] + b_log[n]
    metrics = MetricTable(
        alpha=tuple(alpha),
        beta=tuple(b[:, 0] for b in beta) if k == 1 else tuple(beta),
        alpha_log_scale=a_log,
        beta_log_scale=b_log[:, 0] if k == 1 else b_log,
        section_log_evidence=section_log_evidence[:, 0] if k == 1 else section_log_evidence,
    )
    return lapp, log_evidence, metrics


def _check_custom_guard(noise, m):
    if isinstance(noise, CustomNoise) and m > MAX_CUSTOM_NOISE_TESTS:
        raise SizeLimitError(
            f"generic likelihoods are guarded to {MAX_CUSTOM_NOISE_TESTS} tests, got {m}"
        )


def run(trellis: Trellis, prior: Prior, noise, t) -> PosteriorResult:
    """Exact posteriors for one observed outcome vector `t`.

    Complete trellises accept any noise model; expurgated and reduced ones
    encode a specific noiseless outcome, so `t` must match it and `noise`
    must be Noiseless.  Raises NotASyndromeError when the outcome has zero
    probability under the model.
    """
    kind = trellis.kind
    if isinstance(kind, Complete):
        tv = as_bit_vector(t, trellis.m, "outcome vector")
        _check_custom_guard(noise, trellis.m)
        column = noise.likelihood_packed(tv, trellis.final_states, trellis.m)
        if not np.any(column > 0.0):
            raise NotASyndromeError(
                "outcome has zero probability at every reachable syndrome"
            )
        lapp, log_ev, metrics = _engine(trellis, prior, column[:, None])
        return PosteriorResult(
            lapp=lapp[:, 0],
            log_evidence=float(log_ev[0]),
            zero_forced=np.zeros(0, dtype=np.int64),
            metrics=metrics,
        )
    if isinstance(kind, Expurgated):
        if not isinstance(noise, Noiseless):
            raise ValueError("an expurgated trellis encodes a noiseless outcome")
        tv = as_bit_vector(t, trellis.m, "outcome vector")
        if bits_to_index(tv) != kind.final_state:
            raise ValueError(
                "outcome differs from the one this trellis was expurgated towards"
            )
        lapp, log_ev, metrics = _engine(trellis, prior, np.ones((1, 1)))
        return PosteriorResult(
            lapp=lapp[:, 0],
            log_evidence=float(log_ev[0]),
            zero_forced=np.zeros(0, dtype=np.int64),
            metrics=metrics,
        )
    if isinstance(kind, Reduced):
        if not isinstance(noise, Noiseless):
            raise ValueError("a reduced trellis encodes a noiseless outcome")
        tv = as_bit_vector(t, kind.full_m, "outcome vector")
        if not np.array_equal(np.flatnonzero(tv == 1), kind.test_rows):
            raise ValueError("outcome differs from the one this trellis was reduced for")
        lapp_sub, log_ev, metrics = _engine(trellis, prior, np.ones((1, 1)))
        lapp = np.full(kind.full_n, np.inf)
        lapp[kind.kept_elements] = lapp_sub[:, 0]
        # silent tests pin their members to zero; fold the prior mass of those
        # forced labels back into the evidence
        log_ev = float(log_ev[0]) + kind.zero_covered.size * math.log(1.0 - prior.delta)
        return PosteriorResult(
            lapp=lapp,
            log_evidence=log_ev,
            zero_forced=kind.zero_covered.copy(),
            metrics=metrics,
        )
    raise TypeError(f"unknown trellis kind {type(kind).__name__}")


def posterior_table(trellis: Trellis, prior: Prior, noise, outcomes) -> np.ndarray:
    """Lapp rows for a batch of outcome vectors, sharing one forward pass.

    `outcomes` is a (K, m) binary array; the result is (K, n).  Requires a
    complete trellis (the batch spans different final conditions).  With a
    noiseless channel every row must be a reachable syndrome.
    """
    if not isinstance(trellis.kind, Complete):
        raise ValueError("posterior tables require a complete trellis")
    rows = np.asarray(outcomes)
    if rows.ndim != 2 or rows.shape[1] != trellis.m:
        raise ValueError(f"expected a (K, {trellis.m}) outcome array, got shape {rows.shape}")
    if rows.shape[0] == 0:
        return np.zeros((0, trellis.n))
    if rows.dtype != np.uint8:
        rows = np.stack([as_bit_vector(r, trellis.m, "outcome vector") for r in rows])
    _check_custom_guard(noise, trellis.m)
    beta_final = noise.likelihood_table(rows, trellis.final_states, trellis.m)
    dead = np.flatnonzero(beta_final.sum(axis=0) == 0.0)
    if dead.size:
        raise NotASyndromeError(
            f"{dead.size} outcome rows have zero probability at every reachable "
            f"syndrome (first at row {int(dead[0])})"
        )
    lapp, _, _ = _engine(trellis, prior, beta_final)
    return lapp.T


def posterior_pairs(result) -> np.ndarray:
    """Posterior (clear, defective) probability pairs from lapp values.

    Accepts a PosteriorResult or a raw lapp array; rows are elements, column 0
    is Pr{X_l = 0 | t}, column 1 is Pr{X_l = 1 | t}.  Computed with the stable
    logistic form, so +-inf map to exact (1, 0) / (0, 1).
    """
    lapp = np.asarray(result.lapp if isinstance(result, PosteriorResult) else result, float)
    e = np.exp(-np.abs(lapp))
    p1 = np.where(lapp >= 0, e / (1.0 + e), 1.0 / (1.0 + e))
    return np.stack([1.0 - p1, p1], axis=1)
