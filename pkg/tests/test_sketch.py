"""Tests for sketch accumulation, the merge algebra, and CSV streaming."""

import numpy as np
import pytest

from sketch_learning.core import (
    IncompatibleSketchError,
    InvalidArgumentError,
    MapKind,
    PrivacyMechanism,
    PrivacyRecord,
    SealedSketchError,
    SketchFormatError,
)
from sketch_learning.core.random import stream
from sketch_learning.features import FeatureMapSpec, gaussian_atom
from sketch_learning.sketching import (
    CsvRowSource,
    Reservoir,
    Sketch,
    SketchBuilder,
    check_kind,
    delete,
    iter_blocks,
    merge,
    read_csv_matrix,
    sketch_dataset,
    sketch_distance,
    update,
    write_csv_matrix,
)


def _exact_mean(spec, data):
    return spec.evaluate(data).mean(axis=0)


class TestSketchModel:
    def test_empty(self, rff_spec):
        s = Sketch.empty(rff_spec)
        assert s.n == 0
        assert s.values.dtype == np.complex128
        assert not np.any(s.values)

    def test_values_are_copied_and_read_only(self, rff_spec):
        raw = np.ones(rff_spec.m, dtype=complex)
        s = Sketch(values=raw, n=1, spec=rff_spec)
        raw[0] = 5.0
        assert s.values[0] == 1.0
        with pytest.raises(ValueError):
            s.values[0] = 2.0

    def test_shape_checked(self, rff_spec):
        with pytest.raises(InvalidArgumentError):
            Sketch(values=np.ones(3), n=1, spec=rff_spec)

    def test_empty_must_be_zero(self, rff_spec):
        with pytest.raises(InvalidArgumentError):
            Sketch(values=np.ones(rff_spec.m, dtype=complex), n=0, spec=rff_spec)

    def test_sealed_flag(self, rff_spec):
        record = PrivacyRecord(mechanism=PrivacyMechanism.LAPLACE, epsilon=1.0)
        s = Sketch.empty(rff_spec).replace(privacy=record)
        assert s.is_sealed

    def test_equality_is_bitwise(self, rff_spec, small_data):
        a = sketch_dataset(small_data, rff_spec)
        b = sketch_dataset(small_data, rff_spec)
        assert a == b
        c = a.replace(values=a.values * (1 + 1e-15))
        assert a != c


class TestSketchDataset:
    @pytest.mark.parametrize("kind", ["rff_complex", "rff_quantized", "quadratic", "outer_product"])
    def test_matches_direct_mean(self, kind, small_data):
        spec = FeatureMapSpec.create(kind, d=3, m=None if kind == "outer_product" else 32, seed=1)
        s = sketch_dataset(small_data, spec, block_rows=37)
        assert s.n == 200
        np.testing.assert_allclose(s.values, _exact_mean(spec, small_data), atol=1e-12)

    def test_block_size_does_not_matter(self, rff_spec, small_data):
        a = sketch_dataset(small_data, rff_spec, block_rows=1)
        b = sketch_dataset(small_data, rff_spec, block_rows=4096)
        np.testing.assert_allclose(a.values, b.values, atol=1e-13)

    def test_parallel_matches_sequential(self, rff_spec, small_data):
        seq = sketch_dataset(small_data, rff_spec, block_rows=16)
        par = sketch_dataset(small_data, rff_spec, block_rows=16, workers=4)
        assert par.n == seq.n
        np.testing.assert_allclose(par.values, seq.values, atol=1e-12)

    def test_rows_iterable(self, rff_spec, small_data):
        s = sketch_dataset(iter(list(small_data)), rff_spec, block_rows=50)
        np.testing.assert_allclose(s.values, _exact_mean(rff_spec, small_data), atol=1e-12)

    def test_empty_input(self, rff_spec):
        s = sketch_dataset(np.empty((0, 3)), rff_spec)
        assert s.n == 0 and not np.any(s.values)

    def test_wrong_width_reports_row(self, rff_spec, small_data):
        rows = [*list(small_data[:5]), np.ones(2)]
        with pytest.raises(InvalidArgumentError, match="row 5"):
            sketch_dataset(iter(rows), rff_spec)

    def test_box_metadata(self, rff_spec, small_data):
        s = sketch_dataset(small_data, rff_spec, reservoir_size=5000)
        lower, upper = s.box
        np.testing.assert_allclose(lower, small_data.min(axis=0))
        np.testing.assert_allclose(upper, small_data.max(axis=0))

    def test_no_reservoir_no_box(self, rff_spec, small_data):
        assert sketch_dataset(small_data, rff_spec, reservoir_size=0).box is None

    def test_user_metadata_kept(self, rff_spec, small_data):
        s = sketch_dataset(small_data, rff_spec, metadata={"source": "unit"})
        assert s.metadata["source"] == "unit"


class TestBuilder:
    def test_add_and_merge(self, rff_spec, small_data):
        a = SketchBuilder(rff_spec)
        b = SketchBuilder(rff_spec)
        for x in small_data[:120]:
            a.add(x)
        b.add_block(small_data[120:])
        a.merge(b)
        s = a.snapshot()
        assert s.n == 200
        np.testing.assert_allclose(s.values, _exact_mean(rff_spec, small_data), atol=1e-12)

    def test_merge_rejects_other_map(self, rff_spec, quantized_spec):
        with pytest.raises(IncompatibleSketchError):
            SketchBuilder(rff_spec).merge(SketchBuilder(quantized_spec))

    def test_kahan_keeps_long_streams_accurate(self):
        spec = FeatureMapSpec.create(MapKind.QUADRATIC, d=1, m=1, sigma_w=1.0, seed=0)
        builder = SketchBuilder(spec, reservoir_size=0)
        x = np.full((1000, 1), 0.1)
        for _ in range(100):
            builder.add_block(x)
        expected = spec.evaluate(x[:1])[0]
        np.testing.assert_allclose(builder.snapshot().values, expected, rtol=1e-13)


class TestAlgebra:
    def test_merge_equals_concatenation(self, rff_spec, small_data):
        a = sketch_dataset(small_data[:70], rff_spec)
        b = sketch_dataset(small_data[70:], rff_spec)
        whole = sketch_dataset(small_data, rff_spec)
        merged = merge(a, b)
        assert merged.n == whole.n
        np.testing.assert_allclose(merged.values, whole.values, atol=1e-13)

    def test_merge_with_empty_is_identity(self, rff_spec, small_data):
        a = sketch_dataset(small_data, rff_spec, reservoir_size=0)
        merged = merge(a, Sketch.empty(rff_spec))
        np.testing.assert_array_equal(merged.values, a.values)
        assert merged.n == a.n

    def test_merge_is_commutative_numerically(self, rff_spec, small_data):
        a = sketch_dataset(small_data[:30], rff_spec)
        b = sketch_dataset(small_data[30:], rff_spec)
        np.testing.assert_allclose(merge(a, b).values, merge(b, a).values, atol=1e-14)

    def test_merge_unions_boxes(self, rff_spec):
        a = sketch_dataset(np.array([[0.0, 0.0, 0.0]]), rff_spec)
        b = sketch_dataset(np.array([[1.0, -1.0, 2.0]]), rff_spec)
        lower, upper = merge(a, b).box
        np.testing.assert_array_equal(lower, [0.0, -1.0, 0.0])
        np.testing.assert_array_equal(upper, [1.0, 0.0, 2.0])

    def test_merge_rejects_mismatched_maps(self, rff_spec, small_data):
        other = FeatureMapSpec.create(MapKind.RFF_COMPLEX, d=3, m=64, sigma_w=0.5, seed=8)
        with pytest.raises(IncompatibleSketchError):
            merge(sketch_dataset(small_data, rff_spec), sketch_dataset(small_data, other))

    def test_update_then_delete_restores(self, rff_spec, small_data):
        base = sketch_dataset(small_data, rff_spec)
        x = np.array([0.5, -1.0, 2.0])
        restored = delete(update(base, x), x)
        assert restored.n == base.n
        np.testing.assert_allclose(restored.values, base.values, atol=1e-13)

    def test_update_matches_rebuild(self, rff_spec, small_data):
        base = sketch_dataset(small_data[:-1], rff_spec)
        grown = update(base, small_data[-1])
        np.testing.assert_allclose(grown.values, _exact_mean(rff_spec, small_data), atol=1e-13)

    def test_update_widens_box(self, rff_spec, small_data):
        base = sketch_dataset(small_data, rff_spec, reservoir_size=5000)
        x = np.array([100.0, -100.0, 0.0])
        lower, upper = update(base, x).box
        np.testing.assert_array_equal(lower, [small_data[:, 0].min(), -100.0, small_data[:, 2].min()])
        np.testing.assert_array_equal(upper, [100.0, small_data[:, 1].max(), small_data[:, 2].max()])
        np.testing.assert_array_equal(base.box[1], small_data.max(axis=0))

    def test_update_without_box_adds_none(self, rff_spec):
        assert update(Sketch.empty(rff_spec), np.ones(3)).box is None

    def test_delete_last_sample_empties(self, rff_spec):
        x = np.ones(3)
        s = update(Sketch.empty(rff_spec), x)
        empty = delete(s, x)
        assert empty.n == 0 and not np.any(empty.values)

    def test_delete_from_empty(self, rff_spec):
        with pytest.raises(InvalidArgumentError):
            delete(Sketch.empty(rff_spec), np.zeros(3))

    def test_sealed_sketches_refuse_edits(self, rff_spec, small_data):
        sealed = sketch_dataset(small_data, rff_spec).replace(
            privacy=PrivacyRecord(mechanism=PrivacyMechanism.LAPLACE, epsilon=1.0)
        )
        with pytest.raises(SealedSketchError):
            update(sealed, np.zeros(3))
        with pytest.raises(SealedSketchError):
            delete(sealed, np.zeros(3))
        with pytest.raises(SealedSketchError):
            merge(sealed, Sketch.empty(rff_spec))

    def test_distance(self, rff_spec, small_data):
        a = sketch_dataset(0.2 * small_data, rff_spec)
        assert sketch_distance(a, a) == 0.0
        b = sketch_dataset(0.2 * small_data + 1.0, rff_spec)
        assert sketch_distance(a, b) > 0.1

    def test_check_kind(self, rff_spec):
        s = Sketch.empty(rff_spec)
        check_kind(s, MapKind.RFF_COMPLEX)
        with pytest.raises(IncompatibleSketchError):
            check_kind(s, MapKind.QUADRATIC)


class TestConvergence:
    def test_error_decays_like_inverse_root_n(self, rff_spec, rng):
        mu, var = np.array([0.5, -1.0, 0.0]), np.array([1.0, 0.25, 0.5])
        limit = gaussian_atom(rff_spec, mu, var)
        sizes = np.array([100, 400, 1600, 6400, 25600])
        errors = []
        for n in sizes:
            trials = [
                np.linalg.norm(sketch_dataset(mu + np.sqrt(var) * rng.standard_normal((n, 3)), rff_spec).values - limit)
                for _ in range(20)
            ]
            errors.append(np.mean(trials))
        slope = np.polyfit(np.log(sizes), np.log(errors), 1)[0]
        assert slope == pytest.approx(-0.5, abs=0.1)

    def test_row_order_does_not_matter(self, rff_spec, small_data, rng):
        shuffled = small_data[rng.permutation(len(small_data))]
        a = sketch_dataset(small_data, rff_spec, block_rows=17)
        b = sketch_dataset(shuffled, rff_spec, block_rows=17)
        assert a.n == b.n
        np.testing.assert_allclose(a.values, b.values, rtol=0, atol=1e-14)


class TestIterBlocks:
    def test_array_split(self):
        blocks = list(iter_blocks(np.zeros((10, 2)), 2, block_rows=4))
        assert [b.shape[0] for b in blocks] == [4, 4, 2]

    def test_array_wrong_width(self):
        with pytest.raises(InvalidArgumentError):
            list(iter_blocks(np.zeros((3, 4)), 2))

    def test_mixed_rows_and_blocks(self):
        items = [np.zeros(2), np.zeros(2), np.ones((3, 2)), np.zeros(2)]
        blocks = list(iter_blocks(items, 2, block_rows=10))
        assert sum(b.shape[0] for b in blocks) == 6


class TestReservoir:
    def test_keeps_everything_under_capacity(self):
        r = Reservoir(10, 2, stream(0, "reservoir"))
        r.add_block(np.arange(12.0).reshape(6, 2))
        assert r.rows.shape == (6, 2) and r.seen == 6

    def test_capacity_bound(self):
        r = Reservoir(5, 1, stream(0, "reservoir"))
        r.add_block(np.arange(100.0)[:, None])
        assert r.rows.shape == (5, 1) and r.seen == 100

    def test_uniform_inclusion(self):
        hits = np.zeros(20)
        for seed in range(400):
            r = Reservoir(5, 1, stream(seed, "reservoir"))
            r.add_block(np.arange(20.0)[:, None])
            hits[r.rows[:, 0].astype(int)] += 1
        # every row is kept with probability 1/4
        np.testing.assert_allclose(hits / 400, 0.25, atol=0.08)

    def test_merge_size(self):
        a = Reservoir(4, 1, stream(0, "reservoir"))
        b = Reservoir(4, 1, stream(1, "reservoir"))
        a.add_block(np.arange(10.0)[:, None])
        b.add_block(np.arange(10.0, 13.0)[:, None])
        merged = a.merge(b)
        assert merged.seen == 13 and merged.rows.shape == (4, 1)

    def test_median_distance(self):
        r = Reservoir(10, 1, stream(0, "reservoir"))
        r.add_block(np.array([[0.0], [1.0], [3.0]]))
        assert r.median_pairwise_distance() == pytest.approx(2.0)


class TestCsvSource:
    def test_stream_matches_in_memory(self, tmp_path, small_data, rff_spec):
        path = tmp_path / "data.csv"
        write_csv_matrix(path, small_data)
        source = CsvRowSource(path, block_rows=33)
        assert source.d == 3
        from_file = sketch_dataset(source, rff_spec)
        in_memory = sketch_dataset(small_data, rff_spec)
        np.testing.assert_allclose(read_csv_matrix(path), small_data, rtol=1e-15)
        np.testing.assert_allclose(from_file.values, in_memory.values, atol=1e-13)

    def test_malformed_row_reports_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n3,oops\n")
        with pytest.raises(SketchFormatError, match=r"bad\.csv:3"):
            list(CsvRowSource(path).blocks())

    def test_line_number_counts_blank_lines(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n\n3,4\n5,oops\n")
        with pytest.raises(SketchFormatError, match=r"bad\.csv:5:"):
            list(CsvRowSource(path).blocks())

    @pytest.mark.parametrize("block_rows", [1, 2, 100])
    def test_blank_lines_are_skipped(self, tmp_path, block_rows):
        path = tmp_path / "gaps.csv"
        path.write_text("a,b\n1,2\n\n\n3,4\n\n5,6\n")
        blocks = list(CsvRowSource(path, block_rows=block_rows).blocks())
        np.testing.assert_array_equal(np.vstack(blocks), [[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])

    def test_missing_field(self, tmp_path):
        path = tmp_path / "short.csv"
        path.write_text("a,b\n1,2\n3\n")
        with pytest.raises(SketchFormatError):
            list(CsvRowSource(path).blocks())

    def test_missing_file(self, tmp_path):
        with pytest.raises(SketchFormatError):
            CsvRowSource(tmp_path / "nope.csv")

    def test_zero_byte_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(SketchFormatError):
            CsvRowSource(path)

    def test_header_only_gives_empty_sketch(self, tmp_path, rff_spec):
        path = tmp_path / "header.csv"
        path.write_text("a,b,c\n")
        s = sketch_dataset(CsvRowSource(path), rff_spec)
        assert s.n == 0
