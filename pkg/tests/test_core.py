import numpy as np
import pytest

from seriesbench.core import (
    Attribute,
    AttributeSchema,
    ConditionRecord,
    ContractViolation,
    EmbeddingMatrix,
    MetricEntry,
    MetricReport,
    ReportContext,
    TimeSeriesTensor,
    validate_dataset,
)
from seriesbench.synthgen import build_synth_dataset


@pytest.fixture
def schema():
    return AttributeSchema(
        attributes=(
            Attribute("color", "surface color", ("red", "blue")),
            Attribute("size", "object size", ("small", "large", "other")),
        )
    )


def _record(i, attrs, label=0):
    return ConditionRecord(sample_id=f"s{i}", text=f"caption {i}", attrs=attrs, label=label)


def test_tensor_rejects_non_finite():
    with pytest.raises(ContractViolation):
        TimeSeriesTensor(data=np.array([[[1.0], [np.nan]]]))


def test_tensor_shape_metadata():
    t = TimeSeriesTensor(data=np.zeros((4, 6, 2)))
    assert (t.n_samples, t.length, t.n_features) == (4, 6, 2)


def test_tensor_is_immutable():
    t = TimeSeriesTensor(data=np.zeros((1, 3, 1)))
    with pytest.raises(ValueError):
        t.data[0, 0, 0] = 1.0


def test_embedding_rejects_wrong_rank():
    with pytest.raises(ContractViolation):
        EmbeddingMatrix(data=np.zeros((2, 3, 4)))


def test_schema_rejects_duplicate_names():
    with pytest.raises(ContractViolation):
        AttributeSchema(
            attributes=(
                Attribute("a", "", ("x", "y")),
                Attribute("a", "", ("u", "v")),
            )
        )


def test_attribute_needs_two_values():
    with pytest.raises(ContractViolation):
        Attribute("a", "", ("only",))


def test_report_rejects_duplicate_metric_names():
    ctx = ReportContext("d", "m", 0)
    with pytest.raises(ContractViolation):
        MetricReport(
            entries=(
                MetricEntry("fid", 1.0, "lower_better"),
                MetricEntry("fid", 2.0, "lower_better"),
            ),
            context=ctx,
        )


def test_validate_passes_generator_output():
    ds = build_synth_dataset("u", seed=3, n_per_combo=8, length=96)
    report = validate_dataset(ds.series, ds.conditions, ds.schema)
    assert report.ok, report.violations


def test_validate_count_mismatch(schema):
    series = TimeSeriesTensor(data=np.zeros((3, 4, 1)))
    conditions = [_record(0, {"color": 0, "size": 0})]
    report = validate_dataset(series, conditions, schema)
    assert any("count mismatch" in v for v in report.violations)


def test_validate_value_index_out_of_range(schema):
    series = TimeSeriesTensor(data=np.zeros((1, 4, 1)))
    conditions = [_record(0, {"color": 2, "size": 0})]  # |values| == 2
    report = validate_dataset(series, conditions, schema)
    assert any("out of range" in v for v in report.violations)


def test_validate_unknown_attribute(schema):
    series = TimeSeriesTensor(data=np.zeros((1, 4, 1)))
    report = validate_dataset(series, [_record(0, {"shape": 0})], schema)
    assert any("unknown attribute" in v for v in report.violations)


def test_validate_label_inconsistency(schema):
    series = TimeSeriesTensor(data=np.zeros((2, 4, 1)))
    conditions = [
        _record(0, {"color": 0, "size": 1}, label=0),
        _record(1, {"color": 0, "size": 1}, label=1),
    ]
    report = validate_dataset(series, conditions, schema)
    assert any("inconsistent" in v for v in report.violations)
