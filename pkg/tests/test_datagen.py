import numpy as np
import pytest

from mbgdt.core import ConfigError, Dataset
from mbgdt.datagen import (
    DEFAULT_CURVE,
    ContaminationSpec,
    Family,
    NonUniformCase,
    NonUniformSpec,
    TrueCurve,
    contaminate,
    gen_nonuniform,
    gen_test,
    gen_true,
)


def test_default_curve_bounded_on_domain():
    # direct dense evaluation pins the shipped truth curve inside |y| <= 10
    x = np.linspace(DEFAULT_CURVE.x_min, DEFAULT_CURVE.x_max, 200001)
    y = DEFAULT_CURVE.evaluate(x)
    assert np.abs(y).max() <= 10.0
    assert np.abs(y).max() == pytest.approx(0.67089, abs=1e-4)


def test_gen_true_basics():
    ds = gen_true(100, DEFAULT_CURVE, np.random.default_rng(0))
    assert len(ds) == 100
    assert ds.x.min() >= -1.0 and ds.x.max() <= 1.0


def test_gen_true_noiseless_exact():
    curve = TrueCurve(coeffs=(1.0, -2.0, 0.5), noise_sigma=0.0)
    ds = gen_true(50, curve, np.random.default_rng(1))
    assert np.array_equal(ds.y, curve.evaluate(ds.x))


def test_gen_true_deterministic():
    a = gen_true(64, DEFAULT_CURVE, np.random.default_rng(9))
    b = gen_true(64, DEFAULT_CURVE, np.random.default_rng(9))
    assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)


def test_generators_differ_across_seeds():
    seen = set()
    for seed in range(100):
        ds = gen_true(10, DEFAULT_CURVE, np.random.default_rng(seed))
        seen.add(ds.x.tobytes() + ds.y.tobytes())
    assert len(seen) == 100


def test_gen_test_noise_free():
    ds = gen_test(500, DEFAULT_CURVE, np.random.default_rng(2))
    assert len(ds) == 500
    assert np.array_equal(ds.y, DEFAULT_CURVE.evaluate(ds.x))


def test_train_test_seeds_share_no_x():
    train = gen_true(200, DEFAULT_CURVE, np.random.default_rng(10))
    test = gen_test(500, DEFAULT_CURVE, np.random.default_rng(11))
    assert not set(train.x.tolist()) & set(test.x.tolist())


def _clean(n=200, seed=0):
    return gen_true(n, DEFAULT_CURVE, np.random.default_rng(seed))


def test_contaminate_epsilon_zero_identity():
    clean = _clean()
    out = contaminate(clean, ContaminationSpec(family=Family.RANDOM, epsilon=0.0),
                      DEFAULT_CURVE, np.random.default_rng(1))
    assert np.array_equal(out.x, clean.x) and np.array_equal(out.y, clean.y)
    assert out.contaminated.sum() == 0


def test_contaminate_count_at_049():
    clean = _clean(200)
    out = contaminate(clean, ContaminationSpec(family=Family.RANDOM, epsilon=0.49),
                      DEFAULT_CURVE, np.random.default_rng(1))
    assert out.contaminated.sum() == 98
    assert len(out) == 200


@pytest.mark.parametrize("n,eps,expected", [(200, 0.49, 98), (100, 0.205, 21), (10, 0.45, 5), (7, 0.3, 2)])
def test_contaminate_round_rule(n, eps, expected):
    clean = _clean(n)
    out = contaminate(clean, ContaminationSpec(family=Family.RANDOM, epsilon=eps),
                      DEFAULT_CURVE, np.random.default_rng(5))
    assert out.contaminated.sum() == expected


def test_contaminate_untouched_rows_bitwise_equal():
    clean = _clean()
    for family in (Family.RANDOM, Family.PARALLEL_LINE, Family.EDGE_CORNER,
                   Family.BEGIN, Family.MIDDLE, Family.END):
        out = contaminate(clean, ContaminationSpec(family=family, epsilon=0.3),
                          DEFAULT_CURVE, np.random.default_rng(3))
        keep = ~out.contaminated
        assert np.array_equal(out.x[keep], clean.x[keep])
        assert np.array_equal(out.y[keep], clean.y[keep])
        assert len(out) == len(clean)


def test_parallel_line_exact_offset():
    clean = _clean()
    spec = ContaminationSpec(family=Family.PARALLEL_LINE, epsilon=0.4, offset_y_ratio=0.75)
    out = contaminate(clean, spec, DEFAULT_CURVE, np.random.default_rng(4))
    y_range = clean.y.max() - clean.y.min()
    idx = np.nonzero(out.contaminated)[0]
    assert np.array_equal(out.x[idx], clean.x[idx])  # x kept
    offsets = out.y[idx] - DEFAULT_CURVE.evaluate(out.x[idx])
    assert np.allclose(offsets, 0.75 * y_range, rtol=0, atol=1e-12)


def test_random_contamination_ranges():
    clean = _clean()
    out = contaminate(clean, ContaminationSpec(family=Family.RANDOM, epsilon=0.49),
                      DEFAULT_CURVE, np.random.default_rng(6))
    idx = out.contaminated
    assert out.x[idx].min() >= -1.0 and out.x[idx].max() <= 1.0
    assert out.y[idx].min() >= clean.y.min() and out.y[idx].max() <= clean.y.max()


def test_edge_corner_blob_placement():
    clean = _clean()
    spec = ContaminationSpec(family=Family.EDGE_CORNER, epsilon=0.49,
                             offset_x_ratio=0.2, offset_y_ratio=1.0, spread=0.05)
    out = contaminate(clean, spec, DEFAULT_CURVE, np.random.default_rng(7))
    idx = out.contaminated
    y_range = clean.y.max() - clean.y.min()
    cx = 1.0 - 0.2 * 2.0  # offset_x_ratio measures inward from the right corner
    cy = clean.y.min() - y_range
    std = 0.05 * y_range
    assert abs(out.x[idx].mean() - cx) < 5 * std / np.sqrt(idx.sum())
    assert abs(out.y[idx].mean() - cy) < 5 * std / np.sqrt(idx.sum())
    assert out.y[idx].max() < clean.y.min()  # blob sits below the data


@pytest.mark.parametrize("family", [Family.BEGIN, Family.MIDDLE, Family.END])
def test_block_families_contiguous_in_x_order(family):
    clean = _clean()
    out = contaminate(clean, ContaminationSpec(family=family, epsilon=0.3),
                      DEFAULT_CURVE, np.random.default_rng(8))
    order = np.argsort(out.x, kind="stable")
    flags = out.contaminated[order]
    ones = np.nonzero(flags)[0]
    assert ones.size == 60
    assert ones[-1] - ones[0] == ones.size - 1  # contiguous block
    if family is Family.BEGIN:
        assert ones[0] == 0
    elif family is Family.END:
        assert ones[-1] == len(clean) - 1
    else:
        start = (len(clean) - ones.size) // 2
        assert ones[0] == start
    # x kept, y shifted by exactly one clean y-range
    idx = np.nonzero(out.contaminated)[0]
    y_range = clean.y.max() - clean.y.min()
    assert np.array_equal(out.x[idx], clean.x[idx])
    assert np.allclose(out.y[idx] - clean.y[idx], y_range, rtol=0, atol=1e-12)


def test_block_shift_down_with_negative_ratio():
    clean = _clean()
    out = contaminate(clean, ContaminationSpec(family=Family.BEGIN, epsilon=0.3,
                                               offset_y_ratio=-1.0),
                      DEFAULT_CURVE, np.random.default_rng(8))
    idx = np.nonzero(out.contaminated)[0]
    y_range = clean.y.max() - clean.y.min()
    assert np.allclose(out.y[idx] - clean.y[idx], -y_range, rtol=0, atol=1e-12)


def test_contaminate_validation():
    clean = _clean(10)
    with pytest.raises(ConfigError):
        ContaminationSpec(family=Family.NONE, epsilon=0.1).validate()
    with pytest.raises(ConfigError):
        ContaminationSpec(family=Family.RANDOM, epsilon=0.5).validate()
    with pytest.raises(ValueError):
        contaminate(Dataset(np.empty(0), np.empty(0)),
                    ContaminationSpec(family=Family.RANDOM, epsilon=0.1),
                    DEFAULT_CURVE, np.random.default_rng(0))


def test_contaminate_deterministic():
    clean = _clean()
    spec = ContaminationSpec(family=Family.EDGE_CORNER, epsilon=0.25)
    a = contaminate(clean, spec, DEFAULT_CURVE, np.random.default_rng(11))
    b = contaminate(clean, spec, DEFAULT_CURVE, np.random.default_rng(11))
    assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)
    assert np.array_equal(a.contaminated, b.contaminated)


def test_dense_region_counts():
    spec = NonUniformSpec(case=NonUniformCase.DENSE_REGION, region_lo=-0.5,
                          region_hi=0.0, dense_fraction=0.6)
    ds = gen_nonuniform(100, DEFAULT_CURVE, spec, np.random.default_rng(3))
    inside = ((ds.x >= -0.5) & (ds.x <= 0.0)).sum()
    assert inside >= 60
    assert len(ds) == 100


def test_incomplete_region_has_gap():
    spec = NonUniformSpec(case=NonUniformCase.INCOMPLETE_REGION, region_lo=-0.1, region_hi=0.1)
    ds = gen_nonuniform(500, DEFAULT_CURVE, spec, np.random.default_rng(4))
    assert ((ds.x >= -0.1) & (ds.x <= 0.1)).sum() == 0
    assert ds.x.min() >= -1.0 and ds.x.max() <= 1.0
    assert len(ds) == 500


def test_nonuniform_deterministic():
    spec = NonUniformSpec(case=NonUniformCase.DENSE_REGION, region_lo=0.0, region_hi=0.5)
    a = gen_nonuniform(80, DEFAULT_CURVE, spec, np.random.default_rng(5))
    b = gen_nonuniform(80, DEFAULT_CURVE, spec, np.random.default_rng(5))
    assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)


def test_nonuniform_validation():
    with pytest.raises(ConfigError):
        NonUniformSpec(case=NonUniformCase.DENSE_REGION, region_lo=0.5,
                       region_hi=0.5).validate(DEFAULT_CURVE)
    with pytest.raises(ConfigError):
        NonUniformSpec(case=NonUniformCase.DENSE_REGION, region_lo=-2.0,
                       region_hi=0.0).validate(DEFAULT_CURVE)


def test_curve_validation():
    with pytest.raises(ConfigError):
        TrueCurve(coeffs=(), noise_sigma=0.1).validate()
    with pytest.raises(ConfigError):
        TrueCurve(coeffs=(1.0,), x_min=1.0, x_max=1.0).validate()
    with pytest.raises(ConfigError):
        TrueCurve(coeffs=(1.0,), noise_sigma=-0.1).validate()
