import cmath
import math

import numpy as np
import pytest

from harmap.errors import (
    AtSingularity,
    DegenerateAnalyticPart,
    IndeterminateIndex,
)
from harmap.mapping import (
    HarmonicMap,
    catalog,
    classify_singularity,
    index_at_infinity,
    is_non_degenerate,
    inverted_map,
    pole_index,
    pole_records,
    zero_index,
)
from harmap.numerics import Poly, RationalFn

RNG = np.random.default_rng(7)


def _fd_wirtinger(f, z, h=1e-6):
    """Wirtinger derivatives from central differences in x and y."""
    fx = (f.evaluate(z + h) - f.evaluate(z - h)) / (2 * h)
    fy = (f.evaluate(z + 1j * h) - f.evaluate(z - 1j * h)) / (2 * h)
    dz = (fx - 1j * fy) / 2
    dzbar = (fx + 1j * fy) / 2
    return dz, dzbar


class TestEvaluate:
    def test_nexp_at_one(self):
        f = catalog("nexp")
        assert abs(f.evaluate(1.0) - (1 / 3 + 1 / 2)) < 1e-14

    def test_mpw_at_zero(self):
        f = catalog("mpw")
        assert abs(f.evaluate(0.0)) < 1e-14

    def test_log_example_at_one(self):
        f = catalog("log-example")
        assert abs(f.evaluate(1.0) - 2.5) < 1e-14

    def test_at_singularity_refused(self):
        f = catalog("mpw")
        with pytest.raises(AtSingularity):
            f.evaluate(0.6)
        g = catalog("log-example")
        with pytest.raises(AtSingularity):
            g.evaluate(0.0)

    def test_array_matches_scalar(self):
        f = catalog("log-example")
        zs = np.array([1.0, 2.0 + 1j, -0.5 + 0.5j])
        vals = f(zs)
        for z, v in zip(zs, vals):
            assert abs(v - f.evaluate(complex(z))) < 1e-13


class TestWirtinger:
    def test_nexp_monomials(self):
        f = catalog("nexp")
        for z in [0.7 + 0.2j, -1.1 + 0.4j]:
            dz, dzbar = f.wirtinger(z)
            assert abs(dz - z**2) < 1e-13
            assert abs(dzbar - z.conjugate()) < 1e-13

    def test_log_example_finite_difference(self):
        f = catalog("log-example")
        for z in [2.0, 1.3 - 0.7j, -2.0 + 0.8j]:
            dz, dzbar = f.wirtinger(z)
            fdz, fdzbar = _fd_wirtinger(f, z)
            assert abs(dz - fdz) <= 1e-7 * max(1.0, abs(dz))
            assert abs(dzbar - fdzbar) <= 1e-7 * max(1.0, abs(dzbar))

    def test_pure_log_term(self):
        f = HarmonicMap(Poly(), Poly(), [(0j, 2.0)])
        dz, dzbar = f.wirtinger(1.0)
        assert abs(dz - 1.0) < 1e-14
        assert abs(dzbar - 1.0) < 1e-14

    def test_log_anchor_at_two(self):
        # c log|z - s| with complex c: dz = c/(2(z-s)), dzbar = c/(2 conj(z-s))
        c = 1.0 - 2.0j
        s = 0.5j
        f = HarmonicMap(Poly(), Poly(), [(s, c)])
        z = 1.5 + 0.25j
        dz, dzbar = f.wirtinger(z)
        assert abs(dz - c / (2 * (z - s))) < 1e-14
        assert abs(dzbar - c / (2 * (z - s).conjugate())) < 1e-14
        fdz, fdzbar = _fd_wirtinger(f, z)
        assert abs(dz - fdz) < 1e-7
        assert abs(dzbar - fdzbar) < 1e-7


class TestJacobian:
    def test_nexp_values(self):
        f = catalog("nexp")
        z = 2.0 * cmath.exp(0.3j)
        assert abs(f.jacobian(z) - 12.0) < 1e-12
        z = cmath.exp(1.1j)
        assert abs(f.jacobian(z)) < 1e-13

    def test_identity_map(self):
        f = HarmonicMap(Poly([0, 1.0]), Poly())
        assert abs(f.jacobian(0.3 + 9j) - 1.0) < 1e-15

    def test_definitional_identity(self):
        f = catalog("mpw")
        for _ in range(5):
            z = complex(RNG.normal(scale=2), RNG.normal(scale=2))
            if min(abs(z - s) for s in f.singular_points()) < 0.2:
                continue
            dz, dzbar = f.wirtinger(z)
            assert f.jacobian(z) == abs(dz) ** 2 - abs(dzbar) ** 2

    def test_affine_transformation_law(self):
        f = catalog("log-example")
        for _ in range(5):
            a = complex(RNG.normal(), RNG.normal())
            b = complex(RNG.normal(), RNG.normal())
            if abs(a) < 0.1:
                continue
            fc = f.compose_linear(a, b)
            z = complex(RNG.normal(scale=1.5), RNG.normal(scale=1.5))
            w = a * z + b
            if min(abs(w - s) for s in f.singular_points()) < 0.3:
                continue
            assert abs(fc.jacobian(z) - f.jacobian(w) * abs(a) ** 2) <= 1e-7 * max(
                1.0, abs(f.jacobian(w) * abs(a) ** 2)
            )

    def test_affine_value_consistency(self):
        f = catalog("log-example")
        fc = f.compose_linear(2.0 - 1.0j, 0.5)
        z = 1.1 + 0.3j
        assert abs(fc.evaluate(z) - f.evaluate((2.0 - 1.0j) * z + 0.5)) < 1e-12


class TestDilatation:
    def test_nexp_is_reciprocal(self):
        omega = catalog("nexp").dilatation()
        for z in [0.5, 2.0 + 1.0j]:
            assert abs(omega.eval(z) - 1.0 / z) < 1e-13

    def test_unit_modulus_iff_zero_jacobian(self):
        f = catalog("mpw")
        omega = f.dilatation()
        # on-circle points of nexp have |omega| = 1 exactly
        g = catalog("nexp")
        og = g.dilatation()
        for t in np.linspace(0, 2 * np.pi, 7):
            z = cmath.exp(1j * t)
            assert abs(abs(og.eval(z)) - 1.0) < 1e-12
        # random points: sign of J agrees with |omega| vs 1
        for _ in range(10):
            z = complex(RNG.normal(), RNG.normal())
            if min(abs(z - s) for s in f.singular_points()) < 0.2:
                continue
            J = f.jacobian(z)
            w = abs(omega.eval(z))
            assert (J > 0) == (w < 1) or abs(J) < 1e-9

    def test_analytic_map_has_zero_dilatation(self):
        f = HarmonicMap(Poly([0, 0, 1.0]), Poly())
        assert f.dilatation().is_zero()

    def test_pure_coanalytic_degenerate(self):
        f = HarmonicMap(Poly(), Poly([0, 0, 1.0]))
        with pytest.raises(DegenerateAnalyticPart):
            f.dilatation()


class TestLocalExpansion:
    def test_nexp_at_origin(self):
        f = catalog("nexp")
        exp = f.local_expansion(0j, order=4)
        assert exp.lead == 2
        assert abs(exp.a.get(3) - 1 / 3) < 1e-14
        assert abs(exp.b.get(2) - 0.5) < 1e-14
        assert abs(exp.a.get(2, 0j)) < 1e-14

    def test_mpw_at_pole(self):
        f = catalog("mpw")
        exp = f.local_expansion(0.6, order=3)
        assert exp.lead == -1
        assert abs(exp.a.get(-1, 0j)) < 1e-12
        assert abs(exp.b.get(-1) + 1.0 / 3.0) < 1e-12

    def test_identity_map(self):
        f = HarmonicMap(Poly([0, 1.0]), Poly())
        exp = f.local_expansion(0.3 + 0.4j, order=2)
        assert abs(exp.a.get(1) - 1.0) < 1e-14
        assert abs(exp.a.get(0) - (0.3 + 0.4j)) < 1e-14
        assert abs(exp.b.get(1, 0j)) < 1e-14

    def test_log_anchor_merges_at_center(self):
        f = catalog("log-example")
        exp = f.local_expansion(0j, order=2)
        assert abs(exp.c - 2.0) < 1e-14
        assert exp.lead == -1
        assert abs(exp.b.get(-1) - 1.0) < 1e-12

    def test_remote_log_taylor_surrogate(self):
        # expansion away from the anchor reproduces values of f
        c = 2.0 + 0j
        f = HarmonicMap(Poly(), Poly(), [(0j, c)])
        z0 = 1.0 + 0.5j
        exp = f.local_expansion(z0, order=12)
        for dz in [0.05, 0.04j, -0.03 + 0.02j]:
            z = z0 + dz
            series = sum(exp.a[k] * dz**k for k in range(13)) + sum(
                exp.b[k] * dz**k for k in range(13)
            ).conjugate()
            assert abs(series - f.evaluate(z)) < 1e-10


class TestIndices:
    def test_nexp_zero_index(self):
        f = catalog("nexp")
        assert zero_index(f.local_expansion(0j, order=3)) == -2

    def test_sense_preserving_zero(self):
        # (z-1) + conj((z-1)/4): non-singular sense-preserving zero at 1
        f = HarmonicMap(Poly([-1.0, 1.0]), Poly([-0.25, 0.25]))
        assert zero_index(f.local_expansion(1.0, order=2)) == 1

    def test_pure_coanalytic_cube(self):
        f = HarmonicMap(Poly(), Poly([0, 0, 0, 1.0]))
        assert zero_index(f.local_expansion(0j, order=3)) == -3

    def test_mpw_pole_indices(self):
        f = catalog("mpw")
        recs = pole_records(f)
        assert len(recs) == 3
        assert all(r.index == 1 for r in recs)
        assert sum(abs(r.index) for r in recs) == 3

    def test_log_example_pole_indices(self):
        f = catalog("log-example")
        recs = pole_records(f)
        assert sorted(round(r.location.real) for r in recs) == [-1, 0]
        assert all(r.index == 1 for r in recs)

    def test_pure_log_pole_index_zero(self):
        f = HarmonicMap(Poly([0, 1.0]), Poly(), [(0j, 2.0)])
        recs = pole_records(f)
        assert len(recs) == 1
        assert recs[0].kind == "log_pole"
        assert recs[0].index == 0

    def test_tie_raises(self):
        f = HarmonicMap(
            RationalFn(Poly([1.0]), Poly([0, 1.0])),
            RationalFn(Poly([1.0]), Poly([0, 1.0])),
        )
        with pytest.raises(IndeterminateIndex):
            pole_index(f.local_expansion(0j, order=2))


class TestIndexAtInfinity:
    def test_mpw(self):
        assert index_at_infinity(catalog("mpw"), 0j) == -1
        assert index_at_infinity(catalog("mpw"), 10 + 10j) == -1

    def test_log_example(self):
        assert index_at_infinity(catalog("log-example"), 0.5j) == -2

    def test_nexp(self):
        assert index_at_infinity(catalog("nexp"), 0.9) == -3

    def test_finite_limit(self):
        # f = 1/z + conj(z/(2 z^2 + 1)) tends to 0 at infinity
        f = HarmonicMap(
            RationalFn(Poly([1.0]), Poly([0, 1.0])),
            RationalFn(Poly([0, 1.0]), Poly([1.0, 0, 2.0])),
        )
        assert index_at_infinity(f, 1.0) == 0


class TestClassify:
    def test_tied_pole_is_indeterminate(self):
        # z^2 + z^-1 + z^-2 + conj(z)^-2: |a_-2| = |b_-2| = 1
        h = RationalFn(Poly([1.0, 1.0, 0, 0, 1.0]), Poly([0, 0, 1.0]))
        g = RationalFn(Poly([1.0]), Poly([0, 0, 1.0]))
        f = HarmonicMap(h, g)
        assert classify_singularity(f, 0j) == "indeterminate"

    def test_untied_double_pole(self):
        # z^2 + z^-1 + conj(z)^-2: co-analytic order 2 dominates cleanly
        h = RationalFn(Poly([1.0, 0, 0, 1.0]), Poly([0, 1.0]))
        g = RationalFn(Poly([1.0]), Poly([0, 0, 1.0]))
        f = HarmonicMap(h, g)
        assert classify_singularity(f, 0j) == "pole"
        assert pole_index(f.local_expansion(0j, order=3)) == 2

    def test_log_example_pole(self):
        assert classify_singularity(catalog("log-example"), 0j) == "pole"

    def test_pure_log(self):
        f = HarmonicMap(Poly([0, 1.0]), Poly(), [(0j, 2.0)])
        assert classify_singularity(f, 0j) == "log_pole"


class TestNonDegeneracy:
    def test_catalog_maps(self):
        for key in ("mpw", "log-example", "wilmshurst:3", "nexp"):
            ok, notes = is_non_degenerate(catalog(key))
            assert ok, (key, notes)

    def test_coanalytic_dominance_rejected(self):
        f = HarmonicMap(Poly([0, 1.0]), Poly([0, 0, 1.0]))  # z + conj(z^2)
        ok, notes = is_non_degenerate(f)
        assert not ok
        assert any("infinity" in n for n in notes)
        ok2, _ = is_non_degenerate(f.conjugate())
        assert ok2

    def test_tied_pole_rejected(self):
        f = HarmonicMap(
            RationalFn(Poly([1.0]), Poly([0, 1.0])),
            RationalFn(Poly([1.0]), Poly([0, 1.0])),
        )
        ok, notes = is_non_degenerate(f)
        assert not ok
        assert any("tied" in n for n in notes)


class TestSerialization:
    def test_round_trip(self):
        f = catalog("log-example")
        f2 = HarmonicMap.from_json(f.to_json())
        for z in [1.0, 2.0 - 1.0j]:
            assert abs(f.evaluate(z) - f2.evaluate(z)) < 1e-14

    def test_catalog_keys_resolve(self):
        for key in ("mpw", "log-example", "wilmshurst:3", "wilmshurst:4", "nexp"):
            assert catalog(key) is not None

    def test_inverted_map_values(self):
        f = catalog("log-example")
        inv = inverted_map(f)
        for z in [0.2, 0.3 - 0.1j]:
            assert abs(inv.evaluate(z) - f.evaluate(1.0 / z)) < 1e-11
