"""SMOTE tests, anchored on a brute-force nearest-neighbor + segment
membership oracle recomputed independently with plain loops."""

import numpy as np
import pytest

from cyclonecast.smote import SMOTE


def brute_force_knn(members, k):
    """Loop-based k nearest same-class neighbors, nearest first."""
    n = members.shape[0]
    out = []
    for i in range(n):
        dists = []
        for j in range(n):
            if j == i:
                continue
            dists.append((float(np.sum((members[i] - members[j]) ** 2)), j))
        dists.sort()
        out.append([j for _, j in dists[:k]])
    return out


def on_segment(point, a, b, tol=1e-9):
    """Is point = a + lam*(b-a) for some lam in [0,1] (within tol)?"""
    ab = b - a
    ap = point - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return bool(np.linalg.norm(ap) <= tol)
    lam = float(ap @ ab) / denom
    if lam < -tol or lam > 1.0 + tol:
        return False
    return bool(np.linalg.norm(ap - lam * ab) <= tol)


class TestSegmentProperty:
    @pytest.mark.parametrize("seed", [0, 1, 2, 3])
    def test_every_synthetic_lies_on_a_neighbor_segment(self, seed):
        rng = np.random.default_rng(seed)
        X = np.vstack([
            rng.normal((0, 0), 1.0, size=(5, 2)),      # minority
            rng.normal((6, 6), 1.0, size=(40, 2)),     # majority
        ])
        y = np.array(["MIN"] * 5 + ["MAJ"] * 40)
        k = 3
        Xr, yr = SMOTE(k_neighbors=k, random_state=seed).fit_resample(X, y)
        synthetic = Xr[len(X):]
        assert np.array_equal(yr[len(X):], ["MIN"] * 35)
        members = X[:5]
        neighbor_sets = brute_force_knn(members, k)
        for s in synthetic:
            assert any(
                on_segment(s, members[i], members[j])
                for i in range(5)
                for j in neighbor_sets[i]
            ), f"synthetic point {s} is on no anchor-neighbor segment"

    def test_1d_two_sample_segment_containment(self):
        X = np.array([[0.0], [1.0], [5.0], [5.1], [5.2], [5.3], [5.4]])
        y = np.array(["m", "m", "M", "M", "M", "M", "M"])
        Xr, yr = SMOTE(k_neighbors=5, random_state=0).fit_resample(X, y)
        synth = Xr[len(X):].ravel()
        assert len(synth) == 3
        assert np.all((synth >= 0.0) & (synth <= 1.0))


class TestBalancing:
    def test_already_balanced_identity(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(20, 3))
        y = np.array(["A", "B"] * 10)
        Xr, yr = SMOTE(random_state=0).fit_resample(X, y)
        assert np.array_equal(Xr, X)
        assert np.array_equal(yr, y)

    def test_histogram_flat_at_target(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(70, 4))
        y = np.array(["A"] * 40 + ["B"] * 20 + ["C"] * 10)
        Xr, yr = SMOTE(k_neighbors=5, random_state=1).fit_resample(X, y)
        _, counts = np.unique(yr, return_counts=True)
        assert np.array_equal(counts, [40, 40, 40])

    def test_explicit_target_count(self):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(30, 2))
        y = np.array(["A"] * 20 + ["B"] * 10)
        Xr, yr = SMOTE(target_count=25, random_state=2).fit_resample(X, y)
        _, counts = np.unique(yr, return_counts=True)
        assert np.array_equal(counts, [25, 25])

    def test_target_below_majority_rejected(self):
        X = np.zeros((10, 2))
        y = np.array(["A"] * 8 + ["B"] * 2)
        with pytest.raises(ValueError, match="below the largest class"):
            SMOTE(target_count=5).fit_resample(X, y)

    def test_originals_preserved_verbatim(self):
        rng = np.random.default_rng(7)
        X = rng.normal(size=(25, 3))
        y = np.array(["A"] * 20 + ["B"] * 5)
        Xr, yr = SMOTE(random_state=3).fit_resample(X, y)
        assert np.array_equal(Xr[:25], X)
        assert np.array_equal(yr[:25], y)

    def test_labels_match_parents(self):
        rng = np.random.default_rng(8)
        X = rng.normal(size=(30, 2))
        y = np.array(["A"] * 24 + ["B"] * 6)
        Xr, yr = SMOTE(random_state=4).fit_resample(X, y)
        assert set(yr[30:]) == {"B"}


class TestSmallClasses:
    def test_tiny_class_shrinks_k(self):
        # class of 3 with k=5 must still work (k' = 2)
        rng = np.random.default_rng(9)
        X = np.vstack([rng.normal((0, 0), 1, (3, 2)), rng.normal((5, 5), 1, (20, 2))])
        y = np.array(["m"] * 3 + ["M"] * 20)
        Xr, yr = SMOTE(k_neighbors=5, random_state=5).fit_resample(X, y)
        assert (yr == "m").sum() == 20

    def test_singleton_class_duplicated_with_warning(self):
        X = np.vstack([[1.5, 2.5], np.random.default_rng(10).normal(size=(9, 2))])
        y = np.array(["solo"] + ["M"] * 9)
        with pytest.warns(UserWarning, match="single sample"):
            Xr, yr = SMOTE(random_state=6).fit_resample(X, y)
        dup = Xr[yr == "solo"]
        assert dup.shape == (9, 2)
        assert np.all(dup == [1.5, 2.5])

    def test_k_below_one_rejected(self):
        with pytest.raises(ValueError, match="k_neighbors"):
            SMOTE(k_neighbors=0).fit_resample(np.zeros((4, 2)), ["a", "a", "b", "b"])


class TestDeterminism:
    def test_same_seed_same_output(self):
        rng = np.random.default_rng(11)
        X = rng.normal(size=(40, 3))
        y = np.array(["A"] * 25 + ["B"] * 10 + ["C"] * 5)
        a = SMOTE(random_state=9).fit_resample(X, y)
        b = SMOTE(random_state=9).fit_resample(X, y)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
        c = SMOTE(random_state=10).fit_resample(X, y)
        assert not np.array_equal(a[0], c[0])
