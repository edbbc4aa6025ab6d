"""
Test classifiers, metrics and training
"""

import itertools
from fractions import Fraction

import numpy as np
import pytest
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent.parent / 'src'))

from honeyguard.core.errors import EmptyWindow, LengthMismatch, NoValidSplit, SchemaMismatch
from honeyguard.core.types import HostKey, Label, TimeWindow
from honeyguard.features.dataset import DatasetRow, LabeledDataset
from honeyguard.features.extract import N_FEATURES, FeatureVector
from honeyguard.ml.algorithms import AlgorithmKind, AlgorithmSpec
from honeyguard.ml.ensemble import GradientBoosting, RandomForest
from honeyguard.ml.knn import KNearestNeighbors
from honeyguard.ml.metrics import EvalMetrics, f1
from honeyguard.ml.model import predict, predict_many, train
from honeyguard.ml.tree import DecisionTree, best_split, gini
from honeyguard.utils.performance import PerformanceMonitor

B, M = Label.BENIGN, Label.MALICIOUS
WINDOW = TimeWindow(0.0, 3600.0)


def make_dataset(X, y, window=WINDOW):
    rows = []
    for i, (x, label) in enumerate(zip(X, y)):
        values = tuple(float(v) for v in x) + (0.0,) * (N_FEATURES - len(x))
        rows.append(DatasetRow(FeatureVector(values), Label(int(label)), HostKey(f'10.0.{i // 256}.{i % 256}')))
    return LabeledDataset(rows, window)


def vector(*values):
    return FeatureVector(tuple(float(v) for v in values) + (0.0,) * (N_FEATURES - len(values)))


def random_problem(seed, n=60):
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 6, size=(n, N_FEATURES)).astype(float)
    y = ((X[:, 0] + X[:, 3] > 5) ^ (rng.random(n) < 0.1)).astype(int)
    return X, y


def gini_split_oracle(X, y):
    """Exhaustive exact-arithmetic search; first best (feature, threshold) wins"""
    n = len(y)
    total_m = sum(y)
    parent = Fraction(2 * (n - total_m) * total_m, n * n)
    best = None
    for f in range(X.shape[1]):
        values = sorted(set(X[:, f].tolist()))
        for low, high in zip(values, values[1:]):
            threshold = Fraction(low + high) / 2
            left = [label for x, label in zip(X[:, f], y) if x <= threshold]
            right = [label for x, label in zip(X[:, f], y) if x > threshold]

            def impurity(part):
                m = sum(part)
                return Fraction(2 * (len(part) - m) * m, len(part) * len(part))

            gain = parent - (Fraction(len(left), n) * impurity(left)
                             + Fraction(len(right), n) * impurity(right))
            if best is None or gain > best[2]:
                best = (f, threshold, gain)
    return best


class TestBestSplit:
    """Gini split search"""

    def test_two_points(self):
        """Test the split between two points"""
        split = best_split([[0.0], [1.0]], [0, 1])
        assert split.threshold == 0.5
        assert split.gain == pytest.approx(0.5)

    def test_four_points(self):
        """Test the split on four points"""
        split = best_split([[0.0], [1.0], [2.0], [3.0]], [0, 0, 1, 1])
        assert split.threshold == 1.5
        assert split.gain == pytest.approx(0.5)

    def test_identical_values(self):
        """Test that constant features give no split"""
        with pytest.raises(NoValidSplit):
            best_split([[3.0], [3.0], [3.0]], [0, 1, 0])

    def test_gini(self):
        """Test Gini impurity values"""
        assert gini(1, 1) == 0.5
        assert gini(4, 0) == 0.0
        assert gini(0, 0) == 0.0

    @pytest.mark.parametrize('seed', range(25))
    def test_matches_exact_oracle(self, seed):
        """Test best_split against exact-arithmetic enumeration"""
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 13))
        X = rng.integers(0, 5, size=(n, 3)).astype(float)
        y = rng.integers(0, 2, size=n)
        expected = gini_split_oracle(X, y.tolist())
        if expected is None:
            with pytest.raises(NoValidSplit):
                best_split(X, y)
            return
        split = best_split(X, y)
        assert (split.feature, split.threshold) == (expected[0], float(expected[1]))
        assert split.gain == pytest.approx(float(expected[2]), abs=1e-12)

    def test_feature_subset(self):
        """Test splitting on a subset of features"""
        X = np.array([[0.0, 5.0], [1.0, 5.0], [2.0, 6.0], [3.0, 6.0]])
        split = best_split(X, [0, 0, 1, 1], features=[1])
        assert split.feature == 1
        assert split.threshold == 5.5


class TestDecisionTree:
    """Unpruned CART"""

    def test_two_separable_points(self):
        """Test a tree on two points"""
        tree = DecisionTree().fit([[0.0], [1.0]], [0, 1])
        assert tree.node_count == 3
        assert tree.threshold[0] == 0.5
        assert tree.predict_labels([[0.0], [1.0]]).tolist() == [False, True]

    def test_fits_distinct_training_rows(self):
        """Test that an unpruned tree fits its training rows"""
        X, y = random_problem(3)
        X = np.unique(X, axis=0)
        y = (X[:, 0] * 7 + X[:, 1] * 3 + X[:, 2]) % 2
        tree = DecisionTree().fit(X, y)
        assert tree.predict_labels(X).astype(int).tolist() == y.astype(int).tolist()

    def test_leaf_tie_is_benign(self):
        """Test that a tied leaf predicts benign"""
        tree = DecisionTree().fit([[1.0], [1.0]], [0, 1])
        assert tree.node_count == 1
        assert tree.predict_labels([[1.0]]).tolist() == [False]
        assert tree.predict_scores([[1.0]]).tolist() == [0.5]

    def test_max_depth(self):
        """Test the depth limit"""
        X, y = random_problem(5)
        tree = DecisionTree(max_depth=1).fit(X, y)
        assert tree.node_count == 3

    @pytest.mark.parametrize('seed', range(100))
    def test_root_split_matches_enumeration(self, seed):
        """Test root splits on random datasets against enumeration"""
        rng = np.random.default_rng(1000 + seed)
        n = int(rng.integers(2, 51))
        X = rng.integers(0, 8, size=(n, N_FEATURES)).astype(float)
        y = rng.integers(0, 2, size=n).tolist()
        tree = DecisionTree().fit(X, y)
        expected = gini_split_oracle(X, y) if 0 < sum(y) < n else None
        if expected is None:
            assert tree.node_count == 1
            return
        assert int(tree.feature[0]) == expected[0]
        assert float(tree.threshold[0]) == float(expected[1])


class TestKNearestNeighbors:
    """Euclidean majority vote"""

    POINTS = [[0.0], [1.0], [2.0], [10.0], [11.0]]
    LABELS = [0, 0, 1, 1, 1]

    def test_five_point_majority(self):
        """Test a k=3 majority vote"""
        knn = KNearestNeighbors(k=5).fit(self.POINTS, self.LABELS)
        queries = [[q] for q in (-50.0, 0.0, 5.0, 100.0)]
        assert knn.predict_labels(queries).tolist() == [True] * 4
        assert knn.predict_scores([[0.0]]).tolist() == [0.6]

    def test_k_larger_than_training_set(self):
        """Test k larger than the number of rows"""
        knn = KNearestNeighbors(k=7).fit(self.POINTS, self.LABELS)
        assert knn.k_effective == 5
        assert knn.predict_labels([[0.0]]).tolist() == [True]

    def test_distance_tie_prefers_earlier_row(self):
        """Test that distance ties go to the earlier row"""
        knn = KNearestNeighbors(k=1).fit([[-1.0], [1.0]], [1, 0])
        assert knn.neighbors([[0.0]]).tolist() == [[0]]
        assert knn.predict_labels([[0.0]]).tolist() == [True]

    @pytest.mark.parametrize('k', [1, 3, 5])
    def test_matches_brute_force(self, k):
        """Test k-NN against brute-force distances"""
        X, y = random_problem(11, n=40)
        queries = np.random.default_rng(12).uniform(0, 6, size=(30, N_FEATURES))
        knn = KNearestNeighbors(k=k).fit(X, y)
        for q, label in zip(queries, knn.predict_labels(queries)):
            distances = [float(np.sum((q - x) ** 2)) for x in X]
            nearest = sorted(range(len(X)), key=lambda i: (distances[i], i))[:k]
            assert label == (sum(y[i] for i in nearest) * 2 > k)

    def test_chunked_queries(self, monkeypatch):
        """Test that query chunking does not change predictions"""
        import honeyguard.ml.knn as knn_module
        X, y = random_problem(2, n=30)
        queries = np.random.default_rng(4).uniform(0, 6, size=(25, N_FEATURES))
        expected = KNearestNeighbors(k=3).fit(X, y).neighbors(queries)
        monkeypatch.setattr(knn_module, '_CHUNK_CELLS', 1)
        assert KNearestNeighbors(k=3).fit(X, y).neighbors(queries).tolist() == expected.tolist()

    @pytest.mark.parametrize('seed', range(100))
    def test_random_datasets_match_exhaustive_distances(self, seed):
        """Test k-NN on random datasets against exhaustive distances"""
        rng = np.random.default_rng(2000 + seed)
        n = int(rng.integers(1, 501))
        k = int(rng.choice([1, 3, 5, 7]))
        X = rng.integers(0, 20, size=(n, N_FEATURES)).astype(float)
        y = rng.integers(0, 2, size=n)
        queries = rng.integers(0, 20, size=(20, N_FEATURES)).astype(float)
        knn = KNearestNeighbors(k=k).fit(X, y)
        k_eff = min(k, n)
        for q, label in zip(queries, knn.predict_labels(queries)):
            distances = ((X - q) ** 2).sum(axis=1)
            nearest = np.lexsort((np.arange(n), distances))[:k_eff]
            assert bool(label) == (int(y[nearest].sum()) * 2 > k_eff)


class TestEnsembles:
    """Random forest and gradient boosting"""

    @staticmethod
    def separable(seed, n=200):
        rng = np.random.default_rng(seed)
        y = np.arange(n) % 2
        X = np.where(y[:, None] == 1,
                     rng.normal(2.0, 1.0, size=(n, N_FEATURES)),
                     rng.normal(40.0, 5.0, size=(n, N_FEATURES)))
        return X, y

    @pytest.mark.parametrize('seed', range(10))
    def test_one_tree_forest_is_a_tree(self, seed):
        """Test that a single unsampled forest tree predicts exactly like a plain tree"""
        X, y = self.separable(seed)
        queries, _ = self.separable(seed + 100)
        forest = RandomForest(n_trees=1, bootstrap=False, max_features=None, seed=seed).fit(X, y)
        tree = DecisionTree().fit(X, y)
        assert forest.trees[0].feature.tolist() == tree.feature.tolist()
        assert forest.trees[0].threshold.tolist() == tree.threshold.tolist()
        assert forest.predict_labels(queries).tolist() == tree.predict_labels(queries).tolist()
        assert forest.predict_scores(queries).tolist() == tree.predict_scores(queries).tolist()

    @pytest.mark.parametrize('seed', range(10))
    def test_one_tree_forest_separates(self, seed):
        """Test that one bootstrapped tree with feature sampling still separates clean clusters"""
        X, y = self.separable(seed)
        queries, truth = self.separable(seed + 100)
        forest = RandomForest(n_trees=1, seed=seed).fit(X, y)
        labels = forest.predict_labels(queries)
        assert labels.tolist() == forest.trees[0].predict_labels(queries).tolist()
        assert labels.astype(int).tolist() == truth.tolist()
        assert set(forest.predict_scores(queries).tolist()) <= {0.0, 1.0}

    @pytest.mark.parametrize('seed', range(10))
    def test_one_stage_boosting_is_its_tree(self, seed):
        """Test that a one-stage booster is its regression tree scaled by the learning rate"""
        X, y = self.separable(seed)
        queries, truth = self.separable(seed + 100)
        booster = GradientBoosting(n_stages=1).fit(X, y)
        assert len(booster.stages) == 1
        assert booster.init == pytest.approx(0.0)
        expected = booster.init + booster.learning_rate * booster.stages[0].predict(queries)
        np.testing.assert_allclose(booster.decision_function(queries), expected)
        labels = booster.predict_labels(queries)
        assert labels.astype(int).tolist() == truth.tolist()
        assert labels.tolist() == DecisionTree().fit(X, y).predict_labels(queries).tolist()

    def test_forest_is_seed_deterministic(self):
        """Test that a seed fixes every forest tree"""
        X, y = random_problem(7)
        a = RandomForest(n_trees=20, seed=42).fit(X, y)
        b = RandomForest(n_trees=20, seed=42).fit(X, y)
        for ta, tb in zip(a.trees, b.trees):
            assert ta.feature.tolist() == tb.feature.tolist()
            assert ta.threshold.tolist() == tb.threshold.tolist()

    def test_forest_independent_of_workers(self):
        """Test that worker count does not change the forest"""
        X, y = random_problem(8)
        serial = RandomForest(n_trees=16, seed=1, n_jobs=1).fit(X, y)
        threaded = RandomForest(n_trees=16, seed=1, n_jobs=4).fit(X, y)
        assert serial.votes(X).tolist() == threaded.votes(X).tolist()

    def test_forest_vote_tie_is_benign(self):
        """Test that a tied vote predicts benign"""
        forest = RandomForest(n_trees=2)
        forest.trees = [DecisionTree().fit([[0.0], [1.0]], [0, 1]),
                        DecisionTree().fit([[0.0], [1.0]], [1, 0])]
        assert forest.predict_labels([[0.0]]).tolist() == [False]
        assert forest.predict_scores([[0.0]]).tolist() == [0.5]

    def test_boosting_zero_margin_is_malicious(self):
        """Test that a zero margin predicts malicious"""
        booster = GradientBoosting(n_stages=5).fit([[1.0], [1.0]], [0, 1])
        assert booster.decision_function([[1.0]])[0] == pytest.approx(0.0)
        assert booster.predict_labels([[1.0]]).tolist() == [True]

    def test_boosting_learns_threshold(self):
        """Test boosting on a one-feature threshold"""
        X = np.array([[float(i)] for i in range(20)])
        y = (X[:, 0] >= 10).astype(int)
        booster = GradientBoosting(n_stages=50).fit(X, y)
        assert booster.predict_labels(X).astype(int).tolist() == y.tolist()
        scores = booster.predict_scores(X)
        assert np.all((scores > 0.0) & (scores < 1.0))


class TestMetrics:
    """F1 with Malicious as positive"""

    def test_perfect(self):
        """Test F1 for perfect predictions"""
        assert f1([M, B, M], [M, B, M]).f1 == 1.0

    def test_confusion_example(self):
        """Test F1 on a worked confusion example"""
        metrics = f1([M, M, M, B, B], [M, M, B, M, B])
        assert (metrics.tp, metrics.fp, metrics.fn, metrics.tn) == (2, 1, 1, 1)
        assert metrics.f1 == pytest.approx(4 / 6)

    def test_no_positives_is_degenerate(self):
        """Test the zero-denominator convention"""
        metrics = f1([B, B], [B, B])
        assert metrics.f1 == 0.0
        assert metrics.degenerate

    def test_length_mismatch(self):
        """Test rejection of unequal prediction and truth lengths"""
        with pytest.raises(LengthMismatch):
            f1([M], [M, B])

    @pytest.mark.parametrize('tp,fp,fn,tn', list(itertools.product(range(3), repeat=4)))
    def test_against_sklearn(self, tp, fp, fn, tn):
        """Test F1 against scikit-learn on small confusion matrices"""
        from sklearn.metrics import f1_score
        preds = [M] * tp + [M] * fp + [B] * fn + [B] * tn
        truths = [M] * tp + [B] * fp + [M] * fn + [B] * tn
        metrics = f1(preds, truths)
        assert (metrics.tp, metrics.fp, metrics.fn, metrics.tn) == (tp, fp, fn, tn)
        assert metrics.degenerate == (tp + fp + fn == 0)
        if preds:
            expected = f1_score([t.value for t in truths], [p.value for p in preds],
                                pos_label=1, average='binary', zero_division=0)
            assert metrics.f1 == pytest.approx(expected)

    def test_dict_round_trip(self):
        """Test metrics dictionary conversion"""
        metrics = EvalMetrics.from_counts(3, 1, 2, 10)
        assert EvalMetrics.from_dict(metrics.to_dict()) == metrics
        assert metrics.total == 16


class TestTrain:
    """train / predict over every algorithm"""

    @pytest.mark.parametrize('kind', list(AlgorithmKind))
    def test_separable_problem(self, kind):
        """Test every algorithm on a separable problem"""
        X = [[60.0, 23.0]] * 5 + [[1200.0, 443.0]] * 5
        X = [[x[0] + i, x[1]] for i, x in enumerate(X)]
        ds = make_dataset(X, [1] * 5 + [0] * 5)
        model = train(AlgorithmSpec(kind, n_trees=10, n_stages=20), ds)
        assert model.class_counts == (5, 5)
        assert model.trained_at == 3600.0
        assert predict(model, vector(62.0, 23.0))[0] is M
        assert predict(model, vector(1203.0, 443.0))[0] is B

    @pytest.mark.parametrize('kind', list(AlgorithmKind))
    def test_single_class_is_constant(self, kind):
        """Test that single-class training gives a constant model"""
        ds = make_dataset([[float(i)] for i in range(4)], [0] * 4)
        model = train(AlgorithmSpec(kind, n_trees=5, n_stages=5), ds)
        assert model.is_constant
        labels = {label for label, _ in predict_many(model, [vector(v) for v in (-9, 0, 3, 1e6)])}
        assert labels == {B}

    def test_empty_dataset(self):
        """Test that an empty dataset raises EmptyWindow"""
        with pytest.raises(EmptyWindow):
            train(AlgorithmSpec(AlgorithmKind.DECISION_TREE), LabeledDataset([], WINDOW))

    def test_schema_mismatch_on_predict(self):
        """Test that a foreign vector schema is refused"""
        model = train(AlgorithmSpec(AlgorithmKind.KNN), make_dataset([[0.0], [1.0]], [0, 1]))
        foreign = FeatureVector((0.0,) * N_FEATURES, schema_hash=model.schema_hash ^ 1)
        with pytest.raises(SchemaMismatch):
            predict(model, foreign)

    def test_training_time_recorded(self):
        """Test that training time reaches the performance monitor"""
        monitor = PerformanceMonitor()
        model = train(AlgorithmSpec(AlgorithmKind.DECISION_TREE),
                      make_dataset([[0.0], [1.0]], [0, 1]), monitor=monitor)
        assert model.train_seconds >= 0.0
        assert monitor.get_operation_stats('train.dt')['count'] == 1

    def test_explicit_trained_at(self):
        """Test overriding the training timestamp"""
        model = train(AlgorithmSpec(AlgorithmKind.DECISION_TREE),
                      make_dataset([[0.0], [1.0]], [0, 1]), trained_at=7200.0)
        assert model.trained_at == 7200.0

    def test_predict_many_empty(self):
        """Test batch prediction on no vectors"""
        model = train(AlgorithmSpec(AlgorithmKind.DECISION_TREE), make_dataset([[0.0], [1.0]], [0, 1]))
        assert predict_many(model, []) == []


class TestTrainingTime:
    """Training cost at realistic row counts"""

    SIZES = (1_000, 10_000, 70_000)

    @staticmethod
    def clustered(n, seed=0):
        rng = np.random.default_rng(seed)
        y = (rng.random(n) < 0.3).astype(int)
        X = np.where(y[:, None] == 1,
                     rng.normal(2.0, 1.0, size=(n, N_FEATURES)),
                     rng.normal(40.0, 5.0, size=(n, N_FEATURES)))
        return make_dataset(X, y)

    @pytest.fixture(scope='class')
    def datasets(self):
        return {n: self.clustered(n) for n in self.SIZES}

    @staticmethod
    def median_seconds(spec, dataset, repeats=5):
        return sorted(train(spec, dataset).train_seconds for _ in range(repeats))[repeats // 2]

    def test_large_window_trains_quickly(self, datasets):
        """Test that a 70k-row decision tree trains in under five seconds"""
        spec = AlgorithmSpec(AlgorithmKind.DECISION_TREE)
        assert self.median_seconds(spec, datasets[70_000]) < 5.0

    @pytest.mark.parametrize('kind', [AlgorithmKind.DECISION_TREE, AlgorithmKind.RANDOM_FOREST,
                                      AlgorithmKind.GBDT])
    def test_cost_grows_with_rows(self, kind, datasets):
        """Test that median training time does not shrink as the window grows"""
        spec = AlgorithmSpec(kind)
        medians = [self.median_seconds(spec, datasets[n]) for n in self.SIZES]
        for smaller, larger in zip(medians, medians[1:]):
            assert larger >= 0.9 * smaller



if __name__ == '__main__':
    pytest.main([__file__])
