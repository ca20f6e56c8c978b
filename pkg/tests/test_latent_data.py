import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qstylegan import latent_data as ld
from qstylegan.errors import ArgumentError, ConfigurationError, ParseError


class TestDataset:
    def test_non_finite_rejected(self):
        with pytest.raises(ArgumentError):
            ld.LatentDataset(np.array([[0.0, np.nan]]))

    def test_one_dimensional_rejected(self):
        with pytest.raises(ArgumentError):
            ld.LatentDataset(np.zeros(4))

    def test_rows_frozen(self):
        ds = ld.LatentDataset(np.zeros((2, 2)))
        with pytest.raises(ValueError):
            ds.rows[0, 0] = 1.0


class TestCsv:
    def test_round_trip(self, tmp_path):
        ds = ld.LatentDataset(np.random.default_rng(0).standard_normal((100, 10)))
        ld.save_csv(ds, tmp_path / "a.csv")
        np.testing.assert_array_equal(ld.load_csv(tmp_path / "a.csv").rows, ds.rows)

    def test_header_detected(self, tmp_path):
        (tmp_path / "h.csv").write_text("x0,x1\n1.5,2\n3,4\n")
        (tmp_path / "n.csv").write_text("1.5,2\n3,4\n")
        a = ld.load_csv(tmp_path / "h.csv")
        b = ld.load_csv(tmp_path / "n.csv")
        np.testing.assert_array_equal(a.rows, b.rows)
        assert a.rows.shape == (2, 2)

    def test_header_written(self, tmp_path):
        ld.save_csv(ld.LatentDataset(np.ones((1, 2))), tmp_path / "h.csv", header=["a", "b"])
        assert (tmp_path / "h.csv").read_text() == "a,b\n1.0,1.0\n"

    def test_empty(self, tmp_path):
        (tmp_path / "e.csv").write_text("")
        with pytest.raises(ParseError):
            ld.load_csv(tmp_path / "e.csv")

    def test_ragged_reports_line(self, tmp_path):
        (tmp_path / "r.csv").write_text("1,2\n3,4\n5\n")
        with pytest.raises(ParseError) as err:
            ld.load_csv(tmp_path / "r.csv")
        assert err.value.line == 3

    def test_non_numeric_reports_line(self, tmp_path):
        (tmp_path / "r.csv").write_text("1,2\n3,oops\n")
        with pytest.raises(ParseError) as err:
            ld.load_csv(tmp_path / "r.csv")
        assert err.value.line == 2 and "oops" in str(err.value)

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=1, max_size=12))
    def test_round_trip_exact_floats(self, tmp_path_factory, values):
        path = tmp_path_factory.mktemp("rt") / "v.csv"
        ds = ld.LatentDataset(np.array(values)[:, None])
        ld.save_csv(ds, path)
        np.testing.assert_array_equal(ld.load_csv(path).rows, ds.rows)


class TestBinary:
    def test_round_trip(self, tmp_path):
        ds = ld.LatentDataset(np.random.default_rng(1).standard_normal((7, 3)))
        ld.save_binary(ds, tmp_path / "a.bin")
        np.testing.assert_array_equal(ld.load_binary(tmp_path / "a.bin").rows, ds.rows)

    def test_bad_magic(self, tmp_path):
        (tmp_path / "x.bin").write_bytes(b"\0" * 40)
        with pytest.raises(ParseError):
            ld.load_binary(tmp_path / "x.bin")

    def test_truncated(self, tmp_path):
        ds = ld.LatentDataset(np.ones((4, 2)))
        ld.save_binary(ds, tmp_path / "a.bin")
        data = (tmp_path / "a.bin").read_bytes()
        (tmp_path / "a.bin").write_bytes(data[:-8])
        with pytest.raises(ParseError):
            ld.load_binary(tmp_path / "a.bin")


class TestSynthetic:
    def test_uniform(self):
        x = ld.sample_synthetic(ld.DistributionSpec("uniform", 1), 10_000, seed=0).rows
        assert x.min() >= 0 and x.max() <= 1 and abs(x.mean() - 0.5) < 0.02

    def test_normal_moments(self):
        x = ld.sample_synthetic(ld.DistributionSpec("normal", 3), 10_000, seed=0).rows
        assert x.shape == (10_000, 3)
        assert np.all(np.abs(x.mean(0)) < 0.05) and np.all(np.abs(x.std(0) - 1) < 0.05)

    def test_lognormal_median(self):
        x = ld.sample_synthetic(ld.DistributionSpec("lognormal", 1), 10_000, seed=0).rows
        assert abs(np.median(x) + 1.0) < 0.05
        assert x.min() > -2.0

    def test_sin_three_peaks(self):
        x = ld.sample_synthetic(ld.DistributionSpec("sin3", 1), 60_000, seed=0).rows.ravel()
        assert np.all(np.abs(x) <= 3)
        counts, edges = np.histogram(x, bins=60, range=(-3, 3))
        centers = 0.5 * (edges[1:] + edges[:-1])
        interior = [i for i in range(1, 59) if counts[i] >= counts[i - 1] and counts[i] >= counts[i + 1]
                    and counts[i] > 0.8 * counts.max()]
        peaks = sorted({round(centers[i]) for i in interior})
        assert peaks == [-2, 0, 2]
        for trough in (-3, -1, 1, 3):
            near = np.abs(x - trough) < 0.1
            assert near.mean() < 0.002

    def test_density_shape(self):
        f = ld.sin_three_peak_density(np.array([-2.0, 0.0, 2.0, 1.0, 3.5]))
        np.testing.assert_allclose(f, [1, 1, 1, 0, 0], atol=1e-15)

    def test_deterministic_and_seeded(self):
        spec = ld.DistributionSpec("normal", 2)
        a = ld.sample_synthetic(spec, 50, seed=4).rows
        np.testing.assert_array_equal(a, ld.sample_synthetic(spec, 50, seed=4).rows)
        assert not np.array_equal(a, ld.sample_synthetic(spec, 50, seed=5).rows)

    @pytest.mark.parametrize("kw", [dict(kind="gamma", dim=1), dict(kind="normal", dim=0),
                                    dict(kind="lognormal", dim=1, sigma=0.0)])
    def test_bad_spec(self, kw):
        with pytest.raises(ConfigurationError):
            ld.DistributionSpec(**kw)

    def test_n_zero(self):
        with pytest.raises(ArgumentError):
            ld.sample_synthetic(ld.DistributionSpec("normal", 1), 0, seed=0)


class TestBatches:
    def ds(self, n=10):
        return ld.LatentDataset(np.arange(2 * n, dtype=float).reshape(n, 2))

    def test_drop_last_count(self):
        assert len(ld.batches(self.ds(), 3, seed=0)) == 3

    def test_keep_last(self):
        out = ld.batches(self.ds(), 3, shuffle=False, drop_last=False)
        assert [len(b) for b in out] == [3, 3, 3, 1]
        np.testing.assert_array_equal(np.concatenate(out), self.ds().rows)

    def test_order_preserved(self):
        np.testing.assert_array_equal(np.concatenate(ld.batches(self.ds(), 5, shuffle=False)), self.ds().rows)

    def test_shuffle_is_permutation(self):
        out = np.concatenate(ld.batches(self.ds(), 5, seed=1))
        assert sorted(map(tuple, out)) == sorted(map(tuple, self.ds().rows))

    def test_same_seed_same_sequence(self):
        r1, r2 = ld.make_rng(3, "b"), ld.make_rng(3, "b")
        for _ in range(2):
            a = ld.batches(self.ds(), 2, rng=r1)
            b = ld.batches(self.ds(), 2, rng=r2)
            for x, y in zip(a, b):
                np.testing.assert_array_equal(x, y)

    def test_epochs_differ(self):
        rng = ld.make_rng(3, "b")
        first = np.concatenate(ld.batches(self.ds(), 2, rng=rng))
        second = np.concatenate(ld.batches(self.ds(), 2, rng=rng))
        assert not np.array_equal(first, second)

    @pytest.mark.parametrize("size", [0, 11])
    def test_bad_size(self, size):
        with pytest.raises(ArgumentError):
            ld.batches(self.ds(), size)


class TestRng:
    def test_reproducible(self):
        np.testing.assert_array_equal(ld.make_rng(7, "a").random(5), ld.make_rng(7, "a").random(5))

    def test_labels_independent(self):
        a = ld.make_rng(7, "a").standard_normal(20_000)
        b = ld.make_rng(7, "b").standard_normal(20_000)
        assert not np.array_equal(a, b)
        assert abs(np.corrcoef(a, b)[0, 1]) < 0.03

    def test_seed_matters(self):
        assert ld.make_rng(1, "a").random() != ld.make_rng(2, "a").random()

    def test_algorithm_pinned(self):
        assert ld.RNG_ALGORITHM == type(ld.make_rng(0).bit_generator).__name__
