import re

import numpy as np
import pytest

from grouptrellis import (
    NotASyndromeError,
    SizeLimitError,
    TestMatrix,
    build_complete,
    build_reduced,
    enumerate_paths,
    expurgate,
)
from helpers import all_vectors, compatible_vectors, walk_partial_syndromes

T_101 = np.array([1, 0, 1], dtype=np.uint8)


def _edge_set_from_vectors(entries, vectors):
    """(depth, src, dst, label) tuples traversed by the given defectivity vectors."""
    edges = set()
    for x in vectors:
        states = walk_partial_syndromes(entries, x)
        for depth in range(len(x)):
            edges.add((depth, states[depth], states[depth + 1], int(x[depth])))
    return edges


def _trellis_edge_set(trellis):
    edges = set()
    for depth in range(trellis.n):
        for src, dst, label in trellis.section_edges(depth):
            edges.add((depth, int(src), int(dst), int(label)))
    return edges


class TestCompleteToy:
    def test_depth_one_states(self, toy_matrix):
        trellis = build_complete(toy_matrix)
        assert trellis.states[1].tolist() == [0, 5]

    def test_state_counts(self, toy_matrix):
        assert build_complete(toy_matrix).state_counts == [1, 2, 4, 5, 6, 7, 8]

    def test_census_matches_brute_force(self, toy_matrix):
        # independent route: walk all 64 defectivity vectors and collect the
        # states and edges they traverse; the complete trellis must match
        trellis = build_complete(toy_matrix)
        entries = toy_matrix.entries
        vectors = all_vectors(6)
        for depth in range(7):
            seen = sorted({walk_partial_syndromes(entries, x)[depth] for x in vectors})
            assert trellis.states[depth].tolist() == seen
        assert _trellis_edge_set(trellis) == _edge_set_from_vectors(entries, vectors)

    def test_paths_spell_all_vectors(self, toy_matrix):
        paths = enumerate_paths(build_complete(toy_matrix))
        assert paths.shape == (64, 6)
        got = {tuple(row) for row in paths}
        assert got == {tuple(x) for x in all_vectors(6)}


class TestEdgeStructure:
    def test_zero_edges_are_self_loops(self, toy_matrix):
        for trellis in (
            build_complete(toy_matrix),
            expurgate(build_complete(toy_matrix), T_101),
            build_reduced(toy_matrix, T_101),
        ):
            for depth in range(trellis.n):
                sec = trellis.sections[depth]
                left, right = trellis.states[depth], trellis.states[depth + 1]
                assert np.array_equal(left[sec.zero_src], right[sec.zero_dst])

    def test_one_edges_or_in_the_column_mask(self, toy_matrix):
        trellis = build_complete(toy_matrix)
        for depth in range(trellis.n):
            sec = trellis.sections[depth]
            left, right = trellis.states[depth], trellis.states[depth + 1]
            assert np.array_equal(
                left[sec.one_src] | trellis.column_masks[depth], right[sec.one_dst]
            )

    def test_parallel_edges_iff_mask_covered(self, toy_matrix):
        # a state carries both labels to the same successor exactly when it
        # already contains the element's pool column
        trellis = build_complete(toy_matrix)
        for depth in range(trellis.n):
            sec = trellis.sections[depth]
            left = trellis.states[depth]
            mask = trellis.column_masks[depth]
            assert np.array_equal(sec.zero_src, sec.one_src)
            same = sec.zero_dst == sec.one_dst
            covered = (left & mask) == mask
            assert np.array_equal(same, covered)


class TestExpurgatedToy:
    def test_silent_covered_sections_have_no_one_edges(self, toy_matrix):
        # elements 1, 2, 4 sit in a silent test, so their sections keep only
        # 0-labeled edges once paths are pinned to outcome 101
        trellis = expurgate(build_complete(toy_matrix), T_101)
        one_counts = [trellis.sections[d].one_src.size for d in range(6)]
        assert [c == 0 for c in one_counts] == [False, True, True, False, True, False]

    def test_paths_are_exactly_the_compatible_set(self, toy_matrix):
        trellis = expurgate(build_complete(toy_matrix), T_101)
        got = {tuple(row) for row in enumerate_paths(trellis)}
        want = {tuple(x) for x in compatible_vectors(toy_matrix.entries, T_101)}
        assert want == {
            (1, 0, 0, 0, 0, 0),
            (1, 0, 0, 1, 0, 0),
            (1, 0, 0, 0, 0, 1),
            (0, 0, 0, 1, 0, 1),
            (1, 0, 0, 1, 0, 1),
        }
        assert got == want

    def test_final_state_is_the_outcome(self, toy_matrix):
        trellis = expurgate(build_complete(toy_matrix), T_101)
        assert trellis.final_states.tolist() == [5]
        assert trellis.kind.final_state == 5

    def test_no_dead_ends(self, toy_matrix):
        trellis = expurgate(build_complete(toy_matrix), T_101)
        for depth in range(trellis.n):
            sec = trellis.sections[depth]
            out_deg = np.zeros(trellis.states[depth].size, dtype=int)
            np.add.at(out_deg, sec.zero_src, 1)
            np.add.at(out_deg, sec.one_src, 1)
            assert np.all(out_deg > 0)
            in_deg = np.zeros(trellis.states[depth + 1].size, dtype=int)
            np.add.at(in_deg, sec.zero_dst, 1)
            np.add.at(in_deg, sec.one_dst, 1)
            assert np.all(in_deg > 0)

    def test_unreachable_outcome_rejected(self):
        twin = TestMatrix(np.array([[1, 1], [1, 1]], dtype=np.uint8))
        with pytest.raises(NotASyndromeError):
            expurgate(build_complete(twin), [1, 0])

    def test_requires_complete_trellis(self, toy_matrix):
        trellis = expurgate(build_complete(toy_matrix), T_101)
        with pytest.raises(ValueError):
            expurgate(trellis, T_101)


class TestReducedToy:
    def test_shapes_and_bookkeeping(self, toy_matrix):
        trellis = build_reduced(toy_matrix, T_101)
        assert trellis.n == 3
        assert trellis.m == 2
        assert trellis.kind.test_rows.tolist() == [0, 2]
        assert trellis.kind.kept_elements.tolist() == [0, 3, 5]
        assert trellis.kind.zero_covered.tolist() == [1, 2, 4]
        assert trellis.kind.final_state == 3
        assert all(count <= 4 for count in trellis.state_counts)

    def test_paths_match_expurgated_on_kept_elements(self, toy_matrix):
        reduced = build_reduced(toy_matrix, T_101)
        kept = reduced.kind.kept_elements
        sub_paths = {tuple(row) for row in enumerate_paths(reduced)}
        full_paths = enumerate_paths(expurgate(build_complete(toy_matrix), T_101))
        assert sub_paths == {tuple(row[kept]) for row in full_paths}
        # dropped elements are identically zero on every full path
        dropped = reduced.kind.zero_covered
        assert not full_paths[:, dropped].any()

    def test_all_silent_outcome(self, toy_matrix):
        trellis = build_reduced(toy_matrix, [0, 0, 0])
        assert trellis.n == 0
        assert trellis.kind.zero_covered.tolist() == [0, 1, 2, 3, 4, 5]

    def test_zero_column_survives_silent_tests(self):
        mat = TestMatrix(np.array([[1, 0]], dtype=np.uint8))
        trellis = build_reduced(mat, [0])
        assert trellis.kind.kept_elements.tolist() == [1]
        assert trellis.n == 1 and trellis.m == 0

    def test_unsatisfiable_fired_test_rejected(self):
        mat = TestMatrix(np.array([[1, 1], [1, 0]], dtype=np.uint8))
        # t = (0, 1): test 0 silent clears both elements, test 1 cannot fire
        with pytest.raises(NotASyndromeError):
            build_reduced(mat, [0, 1])


class TestGuards:
    def test_complete_guard_on_test_count(self, toy_matrix):
        with pytest.raises(SizeLimitError):
            build_complete(toy_matrix, max_tests=2)

    def test_reduced_guard_counts_fired_tests_only(self, toy_matrix):
        trellis = build_reduced(toy_matrix, T_101, max_tests=2)
        assert trellis.m == 2
        with pytest.raises(SizeLimitError):
            build_reduced(toy_matrix, [1, 1, 1], max_tests=2)

    def test_enumerate_paths_guard(self, toy_matrix):
        with pytest.raises(SizeLimitError):
            enumerate_paths(build_complete(toy_matrix), max_paths=10)


class TestDump:
    def test_line_format_and_order(self, toy_matrix):
        trellis = expurgate(build_complete(toy_matrix), T_101)
        lines = trellis.dump().splitlines()
        assert all(re.fullmatch(r"\d+ \d+ \d+ [01]", line) for line in lines)
        keys = []
        for line in lines:
            depth, src, dst, label = map(int, line.split())
            keys.append((depth, src, label, dst))
        assert keys == sorted(keys)

    def test_edges_match_compatible_vector_walks(self, toy_matrix):
        # independent route: the union of edges used by compatible vectors
        trellis = expurgate(build_complete(toy_matrix), T_101)
        want = _edge_set_from_vectors(
            toy_matrix.entries, compatible_vectors(toy_matrix.entries, T_101)
        )
        got = set()
        for line in trellis.dump().splitlines():
            depth, src, dst, label = map(int, line.split())
            got.add((depth, src, dst, label))
        assert got == want
