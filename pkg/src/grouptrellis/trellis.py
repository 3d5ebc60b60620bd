"""Syndrome trellises for pooled-testing inference.

The trellis unrolls the population element by element.  A state at depth l is
the partial syndrome generated by the first l elements, packed into an integer
(test i contributes bit i).  An edge from depth l to l+1 carries label 0
(element l non-defective, a self-loop on the same partial syndrome) or label 1
(element l defective, ORing the element's pool column into the state).  Every
path from the root to a final state spells one defectivity vector, and the
packed final state is its noiseless outcome.

Three flavours are built here:

* complete      - all 2**n defectivity vectors appear as paths;
* expurgated    - only paths whose final state equals one observed noiseless
                  outcome survive;
* reduced       - the expurgated trellis of the sub-problem restricted to the
                  fired tests and the elements not ruled out by silent tests.

States are stored per depth as sorted arrays of packed syndromes; edges are
stored positionally (indices into the adjacent state arrays), which lets the
inference layer gather and scatter probability mass with pure numpy.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .model import (
    MAX_TESTS,
    NotASyndromeError,
    SizeLimitError,
    TestMatrix,
    as_bit_vector,
    bits_to_index,
)


@dataclasses.dataclass(frozen=True)
class Complete:
    """Trellis kind: every defectivity vector is a path."""


@dataclasses.dataclass(frozen=True)
class Expurgated:
    """Trellis kind: only paths ending in one packed outcome survive."""

    final_state: int


@dataclasses.dataclass(frozen=True, eq=False)
class Reduced:
    """Trellis kind: expurgated sub-trellis over fired tests and kept elements.

    `test_rows` are the original indices of the fired tests (the trellis packs
    only those bits), `kept_elements` the original element indices that the
    trellis still tracks, and `zero_covered` the elements forced non-defective
    because they sit in at least one silent test.
    """

    final_state: int
    test_rows: np.ndarray
    kept_elements: np.ndarray
    zero_covered: np.ndarray
    full_m: int
    full_n: int


@dataclasses.dataclass(frozen=True, eq=False)
class EdgeSection:
    """Edges between two adjacent depths, stored positionally.

    zero_src[k] -> zero_dst[k] is the k-th 0-labeled edge, as indices into the
    state arrays left and right of the section; likewise for the 1-labels.
    """

    zero_src: np.ndarray
    zero_dst: np.ndarray
    one_src: np.ndarray
    one_dst: np.ndarray

    @property
    def edge_count(self):
        return self.zero_src.size + self.one_src.size


@dataclasses.dataclass(frozen=True, eq=False)
class Trellis:
    """Immutable trellis: per-depth packed states plus positional edge sections."""

    kind: object
    m: int
    column_masks: np.ndarray
    states: tuple
    sections: tuple

    @property
    def n(self):
        """Number of element steps (sections)."""
        return len(self.sections)

    @property
    def final_states(self):
        return self.states[-1]

    @property
    def state_counts(self):
        return [s.size for s in self.states]

    def section_edges(self, depth):
        """Edges of one section as an (E, 3) array of (src, dst, label) packed states."""
        sec = self.sections[depth]
        left, right = self.states[depth], self.states[depth + 1]
        rows = np.concatenate(
            [
                np.stack(
                    [left[sec.zero_src], right[sec.zero_dst], np.zeros(sec.zero_src.size, np.int64)],
                    axis=1,
                ),
                np.stack(
                    [left[sec.one_src], right[sec.one_dst], np.ones(sec.one_src.size, np.int64)],
                    axis=1,
                ),
            ]
        )
        order = np.lexsort((rows[:, 1], rows[:, 2], rows[:, 0]))
        return rows[order]

    def dump(self):
        """Stable text listing, one line per edge: `depth src dst label`."""
        lines = []
        for depth in range(self.n):
            for src, dst, label in self.section_edges(depth):
                lines.append(f"{depth} {src} {dst} {label}")
        return "\n".join(lines) + ("\n" if lines else "")


def _section_between(left, masks_ell):
    """Grow one section from sorted state array `left` under column mask."""
    one_targets = left | masks_ell
    right = np.unique(np.concatenate([left, one_targets]))
    idx = np.arange(left.size, dtype=np.int64)
    return right, EdgeSection(
        zero_src=idx,
        zero_dst=np.searchsorted(right, left).astype(np.int64),
        one_src=idx,
        one_dst=np.searchsorted(right, one_targets).astype(np.int64),
    )


def build_complete(matrix: TestMatrix, max_tests: int = MAX_TESTS) -> Trellis:
    """Build the complete trellis of a test matrix.

    Guarded to `max_tests` pooled tests because the state space can reach
    2**m.  Only syndromes actually reachable are materialised, which for
    structured matrices is far fewer.
    """
    if matrix.m > max_tests:
        raise SizeLimitError(
            f"matrix has {matrix.m} tests; trellis construction is guarded to {max_tests}"
        )
    masks = matrix.column_masks
    states = [np.zeros(1, dtype=np.int64)]
    sections = []
    for ell in range(matrix.n):
        right, sec = _section_between(states[-1], masks[ell])
        states.append(right)
        sections.append(sec)
    return Trellis(
        kind=Complete(),
        m=matrix.m,
        column_masks=masks.copy(),
        states=tuple(states),
        sections=tuple(sections),
    )


def _prune_to_final(states, sections, final_pos):
    """Keep only states/edges on a root-to-final path; returns new arrays."""
    n = len(sections)
    keep = [np.zeros(s.size, dtype=bool) for s in states]
    keep[n][final_pos] = True
    # backward sweep: a state survives iff some edge reaches a surviving state
    for ell in range(n - 1, -1, -1):
        sec = sections[ell]
        keep[ell][sec.zero_src[keep[ell + 1][sec.zero_dst]]] = True
        keep[ell][sec.one_src[keep[ell + 1][sec.one_dst]]] = True
    # forward sweep over the surviving subgraph: drop states the root cannot reach
    reach = [np.zeros(s.size, dtype=bool) for s in states]
    reach[0][:] = keep[0]
    for ell in range(n):
        sec = sections[ell]
        for src, dst in ((sec.zero_src, sec.zero_dst), (sec.one_src, sec.one_dst)):
            live = keep[ell][src] & keep[ell + 1][dst] & reach[ell][src]
            reach[ell + 1][dst[live]] = True
    new_states = []
    remap = []
    for ell in range(n + 1):
        mask = keep[ell] & reach[ell]
        new_states.append(states[ell][mask])
        pos = np.full(states[ell].size, -1, dtype=np.int64)
        pos[mask] = np.arange(int(mask.sum()), dtype=np.int64)
        remap.append(pos)
    new_sections = []
    for ell in range(n):
        sec = sections[ell]
        parts = []
        for src, dst in ((sec.zero_src, sec.zero_dst), (sec.one_src, sec.one_dst)):
            ok = (remap[ell][src] >= 0) & (remap[ell + 1][dst] >= 0)
            parts.append((remap[ell][src[ok]], remap[ell + 1][dst[ok]]))
        (z_src, z_dst), (o_src, o_dst) = parts
        new_sections.append(EdgeSection(z_src, z_dst, o_src, o_dst))
    return tuple(new_states), tuple(new_sections)


def expurgate(trellis: Trellis, t) -> Trellis:
    """Restrict a complete trellis to paths whose outcome equals `t`.

    Raises NotASyndromeError when `t` is not a reachable noiseless outcome.
    """
    if not isinstance(trellis.kind, Complete):
        raise ValueError("expurgation starts from a complete trellis")
    tv = as_bit_vector(t, trellis.m, "outcome vector")
    target = bits_to_index(tv)
    final = trellis.states[-1]
    pos = int(np.searchsorted(final, target))
    if pos == final.size or final[pos] != target:
        raise NotASyndromeError(
            f"outcome {''.join(map(str, tv))} is not a reachable noiseless syndrome"
        )
    states, sections = _prune_to_final(trellis.states, trellis.sections, pos)
    return Trellis(
        kind=Expurgated(final_state=target),
        m=trellis.m,
        column_masks=trellis.column_masks.copy(),
        states=states,
        sections=sections,
    )


def build_reduced(matrix: TestMatrix, t, max_tests: int = MAX_TESTS) -> Trellis:
    """Build the reduced trellis for outcome `t`: fired tests, undetermined elements.

    Silent tests force every element in their pools to be non-defective; those
    elements and the silent rows are dropped before building.  The remaining
    sub-trellis is expurgated towards the all-ones outcome over the fired
    tests, so the packing guard applies to the number of fired tests only.
    """
    tv = as_bit_vector(t, matrix.m, "outcome vector")
    test_rows = np.flatnonzero(tv == 1).astype(np.int64)
    m0 = int(test_rows.size)
    if m0 > max_tests:
        raise SizeLimitError(
            f"outcome fires {m0} tests; reduced construction is guarded to {max_tests}"
        )
    silent = np.flatnonzero(tv == 0)
    covered_mask = matrix.entries[silent, :].sum(axis=0) > 0
    zero_covered = np.flatnonzero(covered_mask).astype(np.int64)
    kept = np.flatnonzero(~covered_mask).astype(np.int64)
    kind = Reduced(
        final_state=(1 << m0) - 1,
        test_rows=test_rows,
        kept_elements=kept,
        zero_covered=zero_covered,
        full_m=matrix.m,
        full_n=matrix.n,
    )
    if kept.size == 0:
        if m0 > 0:
            raise NotASyndromeError(
                "a fired test has no eligible elements left; outcome is not a syndrome"
            )
        return Trellis(
            kind=kind,
            m=0,
            column_masks=np.zeros(0, dtype=np.int64),
            states=(np.zeros(1, dtype=np.int64),),
            sections=(),
        )
    if m0 == 0:
        # no fired tests: kept elements are unconstrained, single-state chain
        idx = np.zeros(1, dtype=np.int64)
        sec = EdgeSection(idx, idx, idx.copy(), idx.copy())
        return Trellis(
            kind=kind,
            m=0,
            column_masks=np.zeros(kept.size, dtype=np.int64),
            states=tuple(np.zeros(1, dtype=np.int64) for _ in range(kept.size + 1)),
            sections=tuple(sec for _ in range(kept.size)),
        )
    sub = TestMatrix(matrix.entries[np.ix_(test_rows, kept)])
    complete = build_complete(sub, max_tests=max_tests)
    final = complete.states[-1]
    pos = int(np.searchsorted(final, kind.final_state))
    if pos == final.size or final[pos] != kind.final_state:
        raise NotASyndromeError(
            f"outcome {''.join(map(str, tv))} is not a reachable noiseless syndrome"
        )
    states, sections = _prune_to_final(complete.states, complete.sections, pos)
    return Trellis(
        kind=kind,
        m=m0,
        column_masks=complete.column_masks,
        states=states,
        sections=sections,
    )


def enumerate_paths(trellis: Trellis, max_paths: int = 1 << 20) -> np.ndarray:
    """List every root-to-final path as a row of edge labels.

    Returns a (paths, n) uint8 array in depth-first order.  Guarded by
    `max_paths` (counted exactly before materialising anything).  For reduced
    trellises the columns correspond to `kind.kept_elements`.
    """
    n = trellis.n
    # count paths into each state with a float DP; exact below 2**53, and any
    # overflow past the guard only makes the count larger
    counts = [np.zeros(s.size) for s in trellis.states]
    counts[0][:] = 1.0
    for ell in range(n):
        sec = trellis.sections[ell]
        np.add.at(counts[ell + 1], sec.zero_dst, counts[ell][sec.zero_src])
        np.add.at(counts[ell + 1], sec.one_dst, counts[ell][sec.one_src])
    total = float(counts[n].sum())
    if total > max_paths:
        raise SizeLimitError(f"trellis has about {total:.3g} paths; guard is {max_paths}")
    # adjacency per depth and source position: (label, dst) pairs
    adj = []
    for ell in range(n):
        sec = trellis.sections[ell]
        per_src = [[] for _ in range(trellis.states[ell].size)]
        for s, d in zip(sec.zero_src, sec.zero_dst):
            per_src[s].append((0, d))
        for s, d in zip(sec.one_src, sec.one_dst):
            per_src[s].append((1, d))
        adj.append(per_src)
    out = np.zeros((int(round(total)), n), dtype=np.uint8)
    row = 0
    labels = np.zeros(n, dtype=np.uint8)

    def walk(depth, state_pos):
        nonlocal row
        if depth == n:
            out[row] = labels
            row += 1
            return
        for label, dst in adj[depth][state_pos]:
            labels[depth] = label
            walk(depth + 1, dst)

    walk(0, 0)
    return out
