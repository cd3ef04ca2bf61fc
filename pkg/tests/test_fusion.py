import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from botspotter.domain import PARTIES, UNKNOWN
from botspotter.errors import DataError
from botspotter.ensemble.fusion import (
    MATRIX_LABELS, affinity_matrix, classify_bots, decide_affinity, fuse, read_decisions,
    threshold, write_affinity_matrix, write_decisions,
)


def simplex(rng, n):
    return rng.dirichlet(np.ones(len(PARTIES)) * rng.uniform(0.1, 3), size=n)


class TestThreshold:
    def test_values(self):
        assert threshold(5) == 0.8
        assert threshold(2) == 0.5
        assert threshold() == 0.8

    def test_invalid(self):
        with pytest.raises(ValueError):
            threshold(0)


class TestFuse:
    def test_mean_of_two(self):
        a = np.array([1, 0, 0, 0, 0.0])
        b = np.array([0, 1, 0, 0, 0.0])
        assert np.array_equal(fuse([a, b]), [0.5, 0.5, 0, 0, 0])

    def test_empty(self):
        with pytest.raises(ValueError):
            fuse([])

    @settings(max_examples=200)
    @given(st.integers(0, 2**32 - 1))
    def test_arithmetic_mean_and_simplex(self, seed):
        rng = np.random.default_rng(seed)
        probas = [simplex(rng, 4) for _ in range(6)]
        out = fuse(probas)
        for r in range(4):
            for j in range(len(PARTIES)):
                assert out[r, j] == pytest.approx(sum(p[r, j] for p in probas) / 6, abs=1e-12)
        assert np.all(out >= 0) and np.allclose(out.sum(axis=1), 1, atol=1e-12)


class TestDecision:
    def test_worked_example(self):
        d = decide_affinity({"PSOE": 0.5, "UP": 0.45, "CS": 0.02, "PP": 0.02, "VOX": 0.01})
        assert d.kind == "pair" and d.parties == ("PSOE", "UP")
        assert d.prob("PSOE") + d.prob("UP") == pytest.approx(0.95)
        assert d.label == "PSOE-UP"

    def test_single(self):
        d = decide_affinity([0.05, 0.05, 0.0, 0.0, 0.9])
        assert d.kind == "single" and d.parties == ("VOX",) and d.accepted

    def test_rejected(self):
        d = decide_affinity([0.2] * 5)
        assert d.kind == "rejected" and d.label == UNKNOWN and not d.accepted

    def test_strictly_greater_than_delta(self):
        assert decide_affinity([0.8, 0.2, 0, 0, 0]).kind == "pair"
        assert decide_affinity([0.4, 0.4, 0.2, 0, 0]).kind == "rejected"

    def test_ties_follow_party_order(self):
        d = decide_affinity([0.0, 0.45, 0.0, 0.1, 0.45])
        assert d.parties == ("PSOE", "VOX")

    @pytest.mark.parametrize("bad", [[0.5] * 5, [1.2, -0.2, 0, 0, 0], [1, 0, 0], {"GREEN": 1.0}])
    def test_invalid_inputs(self, bad):
        with pytest.raises(ValueError):
            decide_affinity(bad)

    @settings(max_examples=300)
    @given(st.integers(0, 2**32 - 1), st.permutations(range(len(PARTIES))))
    def test_soundness_and_relabeling(self, seed, perm):
        v = simplex(np.random.default_rng(seed), 1)[0]
        d = decide_affinity(v)
        top = int(np.argmax(v))
        if d.kind == "single":
            assert d.parties == (PARTIES[top],) and v[top] > 0.8
        elif d.kind == "pair":
            assert v[top] <= 0.8 and sum(d.prob(p) for p in d.parties) > 0.8
            assert d.parties[0] == PARTIES[top]
        else:
            assert np.sort(v)[-2:].sum() <= 0.8
        # the decision kind depends on values only, not on which party holds them
        assert decide_affinity(v[list(perm)]).kind == d.kind


class TestMatrix:
    def test_recount_oracle(self):
        rng = np.random.default_rng(0)
        decisions = [decide_affinity(v) for v in simplex(rng, 500)]
        m = affinity_matrix(decisions)
        for i, a in enumerate(MATRIX_LABELS):
            for j, b in enumerate(MATRIX_LABELS):
                expect = sum(
                    (d.kind == "single" and a == b == d.parties[0])
                    or (d.kind == "pair" and (a, b) == d.parties)
                    or (d.kind == "rejected" and a == b == UNKNOWN)
                    for d in decisions)
                assert m[i, j] == expect
        assert m.sum() == 500

    def test_classify_bots(self):
        class Fixed:
            def __init__(self, row):
                self.row = np.asarray(row, dtype=float)

            def predict_proba(self, X):
                return np.tile(self.row, (len(X), 1))

        models = [Fixed([1, 0, 0, 0, 0])] * 5 + [Fixed([0, 1, 0, 0, 0])]
        decisions, m = classify_bots(models, ["a", "b"], np.zeros((2, 3)))
        assert decisions["a"].kind == "single" and decisions["a"].parties == ("UP",)
        assert m[0, 0] == 2
        assert classify_bots(models, [], np.zeros((0, 3)))[1].sum() == 0

    def test_files_roundtrip(self, tmp_path):
        rng = np.random.default_rng(1)
        decisions = {f"u{i}": decide_affinity(v) for i, v in enumerate(simplex(rng, 50))}
        write_decisions(tmp_path / "d.csv", decisions)
        assert read_decisions(tmp_path / "d.csv") == decisions
        write_affinity_matrix(tmp_path / "m.csv", affinity_matrix(list(decisions.values())))
        lines = (tmp_path / "m.csv").read_text().splitlines()
        assert lines[0] == "first," + ",".join(MATRIX_LABELS) and len(lines) == 7

    def test_bad_decisions_file(self, tmp_path):
        (tmp_path / "d.csv").write_text("uid,kind\n")
        with pytest.raises(DataError):
            read_decisions(tmp_path / "d.csv")
