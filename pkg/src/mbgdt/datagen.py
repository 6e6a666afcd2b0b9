"""Synthetic ground truth, contamination families, and non-uniform sampling.

Every generator is a pure function of its parameters and the passed
generator, so a fixed seed reproduces a dataset exactly.  Training data may
be contaminated; test data is always noise-free truth so squared error
measures deviation from the true curve.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.polynomial import polynomial as npoly

from .core import ConfigError, Dataset


@dataclass(frozen=True)
class TrueCurve:
    """True polynomial, sampling domain, and observation noise level."""

    coeffs: tuple[float, ...]
    x_min: float = -1.0
    x_max: float = 1.0
    noise_sigma: float = 0.1

    def validate(self) -> None:
        if len(self.coeffs) == 0:
            raise ConfigError("curve coefficients must be non-empty")
        if not self.x_max > self.x_min:
            raise ConfigError("x_max must exceed x_min")
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be non-negative")

    def evaluate(self, x):
        return npoly.polyval(np.asarray(x, dtype=np.float64), np.asarray(self.coeffs))


# Degree-9 multi-bump default; bounded well inside |y| <= 10 on [-1, 1].
DEFAULT_CURVE = TrueCurve(coeffs=(0.0, 2.0, 0.0, -3.0, 0.0, 1.5, 0.0, -0.5, 0.0, 0.2))


class Family(str, Enum):
    NONE = "none"
    RANDOM = "random"
    PARALLEL_LINE = "parallel-line"
    EDGE_CORNER = "edge-corner"
    BEGIN = "begin"
    MIDDLE = "middle"
    END = "end"


@dataclass(frozen=True)
class ContaminationSpec:
    """Adversary family plus placement parameters.

    Offsets are relative: x displacement as a fraction of the x-domain
    length, y displacement and blob std as fractions of the clean y-range.
    """

    family: Family = Family.NONE
    epsilon: float = 0.0
    offset_x_ratio: float = 0.0
    offset_y_ratio: float = 1.0
    spread: float = 0.05

    def validate(self) -> None:
        if not isinstance(self.family, Family):
            raise ConfigError(f"unknown contamination family {self.family!r}")
        if not 0.0 <= self.epsilon < 0.5:
            raise ConfigError("epsilon must be in [0, 0.5)")
        if self.family is Family.NONE and self.epsilon != 0.0:
            raise ConfigError("family 'none' requires epsilon = 0")
        if self.spread < 0:
            raise ConfigError("spread must be non-negative")


class NonUniformCase(str, Enum):
    DENSE_REGION = "dense-region"
    INCOMPLETE_REGION = "incomplete-region"


@dataclass(frozen=True)
class NonUniformSpec:
    """A dense sub-interval, or a sub-interval with no samples at all."""

    case: NonUniformCase
    region_lo: float
    region_hi: float
    dense_fraction: float = 0.6

    def validate(self, curve: TrueCurve) -> None:
        if not isinstance(self.case, NonUniformCase):
            raise ConfigError(f"unknown non-uniform case {self.case!r}")
        if not self.region_lo < self.region_hi:
            raise ConfigError("region_lo must be below region_hi")
        if self.region_lo < curve.x_min or self.region_hi > curve.x_max:
            raise ConfigError("region must lie inside the x-domain")
        if not 0.0 < self.dense_fraction <= 1.0:
            raise ConfigError("dense_fraction must be in (0, 1]")


def _round_count(value: float) -> int:
    return int(np.floor(value + 0.5))


def gen_true(n: int, curve: TrueCurve, rng: np.random.Generator) -> Dataset:
    """n samples with x uniform on the domain and Gaussian observation noise."""
    if n < 1:
        raise ValueError("n must be positive")
    curve.validate()
    x = rng.uniform(curve.x_min, curve.x_max, n)
    y = curve.evaluate(x) + rng.normal(0.0, 1.0, n) * curve.noise_sigma
    return Dataset(x, y)


def gen_test(n: int, curve: TrueCurve, rng: np.random.Generator) -> Dataset:
    """n noise-free samples of the true curve."""
    if n < 1:
        raise ValueError("n must be positive")
    curve.validate()
    x = rng.uniform(curve.x_min, curve.x_max, n)
    return Dataset(x, curve.evaluate(x))


def contaminate(clean: Dataset, spec: ContaminationSpec, curve: TrueCurve,
                rng: np.random.Generator) -> Dataset:
    """Replace round(epsilon * n) samples with adversarial ones.

    Random, parallel-line, and edge-corner adversaries replace uniformly
    chosen samples; begin/middle/end replace the first, central, or last
    block in x-order and shift its y values up by offset_y_ratio times the
    clean y-range.  Untouched samples are copied bitwise; the returned
    ``contaminated`` mask records the replaced rows.
    """
    spec.validate()
    n = len(clean)
    if n == 0:
        raise ValueError("contaminate requires a non-empty dataset")
    m = _round_count(spec.epsilon * n)
    if m >= n:
        raise ValueError(f"contamination count {m} must be below dataset size {n}")
    x = clean.x.copy()
    y = clean.y.copy()
    mask = np.zeros(n, dtype=bool)
    if m == 0:
        return Dataset(x, y, mask)

    y_lo = float(clean.y.min())
    y_range = float(clean.y.max()) - y_lo

    if spec.family in (Family.RANDOM, Family.PARALLEL_LINE, Family.EDGE_CORNER):
        idx = rng.choice(n, size=m, replace=False)
    else:
        order = np.argsort(clean.x, kind="stable")
        if spec.family is Family.BEGIN:
            idx = order[:m]
        elif spec.family is Family.END:
            idx = order[n - m:]
        else:  # Family.MIDDLE
            start = (n - m) // 2
            idx = order[start:start + m]

    if spec.family is Family.RANDOM:
        x[idx] = rng.uniform(curve.x_min, curve.x_max, m)
        y[idx] = rng.uniform(y_lo, y_lo + y_range, m)
    elif spec.family is Family.PARALLEL_LINE:
        y[idx] = curve.evaluate(x[idx]) + spec.offset_y_ratio * y_range
    elif spec.family is Family.EDGE_CORNER:
        # isotropic blob below the data: offset_x_ratio measures inward from
        # the right corner (0 = the corner itself), offset_y_ratio downward
        # from the data's bottom
        center_x = curve.x_max - spec.offset_x_ratio * (curve.x_max - curve.x_min)
        center_y = y_lo - spec.offset_y_ratio * y_range
        offsets = rng.normal(0.0, 1.0, (m, 2)) * (spec.spread * y_range)
        x[idx] = center_x + offsets[:, 0]
        y[idx] = center_y + offsets[:, 1]
    else:  # Begin / Middle / End: keep x, push the block far from the data
        y[idx] = y[idx] + spec.offset_y_ratio * y_range
    mask[idx] = True
    return Dataset(x, y, mask)


def gen_nonuniform(n: int, curve: TrueCurve, spec: NonUniformSpec,
                   rng: np.random.Generator) -> Dataset:
    """Clean samples with a non-uniform x distribution.

    dense-region draws round(dense_fraction * n) samples from the region and
    the rest from the whole domain (region samples first); incomplete-region
    draws uniformly from the domain with the region cut out entirely.
    """
    if n < 1:
        raise ValueError("n must be positive")
    curve.validate()
    spec.validate(curve)
    if spec.case is NonUniformCase.DENSE_REGION:
        k = _round_count(spec.dense_fraction * n)
        x = np.concatenate([
            rng.uniform(spec.region_lo, spec.region_hi, k),
            rng.uniform(curve.x_min, curve.x_max, n - k),
        ])
    else:
        gap = spec.region_hi - spec.region_lo
        u = rng.uniform(0.0, (curve.x_max - curve.x_min) - gap, n)
        x = curve.x_min + u
        x = np.where(x < spec.region_lo, x, x + gap)
    y = curve.evaluate(x) + rng.normal(0.0, 1.0, n) * curve.noise_sigma
    return Dataset(x, y)
