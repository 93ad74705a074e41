"""Planar harmonic mappings f = h + conj(g) + sum c_j log|z - s_j|.

h and g are rational; g is stored unconjugated.  The module provides
evaluation, Wirtinger derivatives, the Jacobian, the second complex
dilatation, local series expansions about finite points and infinity, and
the topological index at zeros, poles and infinity.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AtSingularity,
    DegenerateAnalyticPart,
    IndeterminateIndex,
)
from .numerics import Poly, RationalFn, _as_rational, cluster_roots, laurent_coeffs

SINGULARITY_ATOL = 1e-12   # evaluation refused this close to a pole / log anchor
INDEX_TIE_RTOL = 1e-9      # |a_n| vs |b_n| closer than this is an undecidable tie
COEFF_SIGNIFICANT = 1e-10  # relative floor for "nonzero" expansion coefficients


def _fmt_complex(z):
    return f"{z.real:.15g}{z.imag:+.15g}i"


class HarmonicMap:
    """Immutable harmonic mapping with rational analytic/co-analytic parts."""

    __slots__ = ("h", "g", "log_terms", "_cache")

    def __init__(self, h, g=None, log_terms=()):
        self.h = _as_rational(h if h is not None else Poly())
        self.g = _as_rational(g if g is not None else Poly())
        terms = tuple((complex(s), complex(c)) for s, c in log_terms if c != 0)
        for i, (s, _) in enumerate(terms):
            for s2, _ in terms[i + 1 :]:
                if abs(s - s2) <= SINGULARITY_ATOL:
                    raise ValueError("log anchors must be pairwise distinct")
        self.log_terms = terms
        self._cache = {}

    # -- construction helpers --------------------------------------------

    @classmethod
    def from_polynomials(cls, p, q):
        """Harmonic polynomial p(z) + conj(q(z))."""
        return cls(RationalFn(Poly(p)), RationalFn(Poly(q)))

    def conjugate(self):
        """Return conj(f): swaps the roles of h and g."""

        def conj_rat(r):
            return RationalFn(
                Poly(np.conj(r.num.coeffs)), Poly(np.conj(r.den.coeffs))
            )

        return HarmonicMap(
            conj_rat(self.g),
            conj_rat(self.h),
            [(s.conjugate(), c.conjugate()) for s, c in self.log_terms],
        )

    def compose_linear(self, a, b):
        """Return f(a*z + b), again a harmonic mapping of the same class."""
        a = complex(a)
        b = complex(b)
        if a == 0:
            raise ValueError("affine composition requires a != 0")
        h2 = self.h.compose_linear(a, b)
        g2 = self.g.compose_linear(a, b)
        # c log|a z + b - s| = c log|a| + c log|z - (s - b)/a|
        const = sum(c * math.log(abs(a)) for _, c in self.log_terms)
        logs = [((s - b) / a, c) for s, c in self.log_terms]
        if const != 0:
            h2 = h2 + RationalFn(Poly([const]))
        return HarmonicMap(h2, g2, logs)

    def __add__(self, other):
        """Add an analytic rational/polynomial term to the analytic part."""
        return HarmonicMap(self.h + _as_rational(other), self.g, self.log_terms)

    # -- singular points ----------------------------------------------------

    def singular_points(self):
        """Poles of h or g and log anchors, clustered; list of complex."""
        key = "singular_points"
        if key not in self._cache:
            pts = [z for z, _ in self.h.poles()] + [z for z, _ in self.g.poles()]
            pts += [s for s, _ in self.log_terms]
            merged = []
            for z in pts:
                if not any(abs(z - w) <= 1e-9 * max(1.0, abs(w)) for w in merged):
                    merged.append(z)
            self._cache[key] = merged
        return self._cache[key]

    def _check_regular(self, z):
        for s in self.singular_points():
            if abs(z - s) <= SINGULARITY_ATOL * max(1.0, abs(s)) + SINGULARITY_ATOL:
                raise AtSingularity(f"z = {z} coincides with the singularity at {s}")

    # -- evaluation -----------------------------------------------------------

    def __call__(self, z):
        """Vectorized evaluation with numpy semantics at singularities."""
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.h(z) + np.conj(self.g(z))
            for s, c in self.log_terms:
                out = out + c * np.log(np.abs(z - s))
        return out

    def evaluate(self, z):
        """Checked scalar evaluation; raises AtSingularity near poles/anchors."""
        z = complex(z)
        self._check_regular(z)
        val = self.h.eval(z) + self.g.eval(z).conjugate()
        for s, c in self.log_terms:
            val += c * math.log(abs(z - s))
        return val

    # -- Wirtinger calculus ---------------------------------------------------

    def analytic_derivative(self):
        """d/dz of f as a rational function: h' + sum c_j / (2 (z - s_j))."""
        key = "hd"
        if key not in self._cache:
            hd = self.h.derivative()
            for s, c in self.log_terms:
                hd = hd + RationalFn(Poly([c / 2.0]), Poly([-s, 1.0]))
            self._cache[key] = hd
        return self._cache[key]

    def coanalytic_derivative(self):
        """Analytic function whose conjugate is d/dzbar of f."""
        key = "gd"
        if key not in self._cache:
            gd = self.g.derivative()
            for s, c in self.log_terms:
                gd = gd + RationalFn(Poly([c.conjugate() / 2.0]), Poly([-s, 1.0]))
            self._cache[key] = gd
        return self._cache[key]

    def wirtinger(self, z):
        """Checked scalar (df/dz, df/dzbar) at z."""
        z = complex(z)
        self._check_regular(z)
        dz = self.analytic_derivative().eval(z)
        dzbar = self.coanalytic_derivative().eval(z).conjugate()
        return dz, dzbar

    def wirtinger_array(self, z):
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            dz = self.analytic_derivative()(z)
            dzbar = np.conj(self.coanalytic_derivative()(z))
        return dz, dzbar

    def jacobian(self, z):
        dz, dzbar = self.wirtinger(z)
        return abs(dz) ** 2 - abs(dzbar) ** 2

    def jacobian_array(self, z):
        dz, dzbar = self.wirtinger_array(z)
        return np.abs(dz) ** 2 - np.abs(dzbar) ** 2

    def dilatation(self):
        """Second complex dilatation omega as a normalized rational function."""
        key = "omega"
        if key not in self._cache:
            hd = self.analytic_derivative()
            if hd.is_zero():
                raise DegenerateAnalyticPart(
                    "analytic derivative vanishes identically"
                )
            self._cache[key] = self.coanalytic_derivative() / hd
        return self._cache[key]

    # -- local expansions ----------------------------------------------------

    def local_expansion(self, z0, order=3):
        """Series data of f about z0, including log-term contributions.

        Log terms anchored at z0 populate the log coefficient c; log terms
        anchored elsewhere contribute their analytic Taylor surrogate
        (c/2) log(z - s) to the a-side and (conj c / 2) log(z - s) to the
        b-side.
        """
        z0 = complex(z0)
        a = laurent_coeffs(self.h, z0, -order, order)
        b = laurent_coeffs(self.g, z0, -order, order)
        c = 0j
        for s, cj in self.log_terms:
            if abs(z0 - s) <= SINGULARITY_ATOL * max(1.0, abs(s)) + SINGULARITY_ATOL:
                c += cj
            else:
                w = z0 - s
                a[0] += cj / 2.0 * cmath.log(w)
                b[0] += cj.conjugate() / 2.0 * cmath.log(w)
                for k in range(1, order + 1):
                    term = (-1.0) ** (k + 1) / (k * w**k)
                    a[k] += cj / 2.0 * term
                    b[k] += cj.conjugate() / 2.0 * term
        return LocalExpansion(center=z0, a=a, b=b, c=c)

    # -- serialization ---------------------------------------------------------

    def to_json_dict(self):
        def enc_poly(p):
            return [[z.real, z.imag] for z in p.coeffs] or [[0.0, 0.0]]

        def enc_rat(r):
            return {"num": enc_poly(r.num), "den": enc_poly(r.den)}

        return {
            "h": enc_rat(self.h),
            "g": enc_rat(self.g),
            "log": [
                {"s": [s.real, s.imag], "c": [c.real, c.imag]}
                for s, c in self.log_terms
            ],
        }

    @classmethod
    def from_json_dict(cls, d):
        def dec_poly(lst):
            return Poly([complex(re, im) for re, im in lst])

        def dec_rat(dd):
            return RationalFn(dec_poly(dd["num"]), dec_poly(dd.get("den", [[1.0, 0.0]])))

        logs = [
            (complex(*t["s"]), complex(*t["c"])) for t in d.get("log", [])
        ]
        return cls(dec_rat(d["h"]), dec_rat(d["g"]), logs)

    @classmethod
    def from_json(cls, text):
        return cls.from_json_dict(json.loads(text))

    def to_json(self):
        return json.dumps(self.to_json_dict(), indent=2)


@dataclass(frozen=True)
class LocalExpansion:
    """Two-sided series data of a harmonic mapping about a finite point.

    a holds the analytic coefficients, b the (unconjugated) co-analytic
    coefficients, c the coefficient of log|z - center|.
    """

    center: complex
    a: dict
    b: dict
    c: complex

    def _floor(self):
        mags = [abs(v) for v in self.a.values()] + [abs(v) for v in self.b.values()]
        top = max(mags, default=0.0)
        return COEFF_SIGNIFICANT * top

    @property
    def lead(self):
        """Smallest k with a_k or b_k significantly nonzero; None if all vanish."""
        floor = self._floor()
        if floor == 0.0:
            return None
        ks = sorted(set(self.a) | set(self.b))
        for k in ks:
            if abs(self.a.get(k, 0j)) > floor or abs(self.b.get(k, 0j)) > floor:
                return k
        return None

    def pair(self, k):
        return self.a.get(k, 0j), self.b.get(k, 0j)


@dataclass(frozen=True)
class IndexRecord:
    """An exceptional point with its topological index and supporting data."""

    location: complex | None        # None encodes the point at infinity
    kind: str                       # "zero" | "pole" | "log_pole" | "infinity"
    index: int
    basis: LocalExpansion | None = None

    @property
    def at_infinity(self):
        return self.location is None


def _dominance(an, bn):
    """+1 if |an| > |bn|, -1 if |an| < |bn|, raises on a relative tie."""
    ma, mb = abs(an), abs(bn)
    if abs(ma - mb) <= INDEX_TIE_RTOL * max(ma, mb):
        raise IndeterminateIndex(
            f"|a| = {ma:.6g} and |b| = {mb:.6g} are tied within 1e-9"
        )
    return 1 if ma > mb else -1


def zero_index(exp):
    """Index of a zero from its leading coefficients: +n or -n."""
    n = exp.lead
    if n is None or n < 1:
        raise ValueError("expansion does not describe a zero (lead < 1)")
    an, bn = exp.pair(n)
    return n * _dominance(an, bn)


def pole_index(exp):
    """Index of a pole: -n / +n by dominance, 0 for a pure log pole."""
    n = exp.lead
    if n is not None and n < 0:
        an, bn = exp.pair(n)
        return n * _dominance(an, bn)
    if abs(exp.c) > 0:
        return 0
    raise ValueError("expansion describes neither a pole nor a log pole")


def classify_singularity(fmap, z0, order=None):
    """Classify an isolated singularity: removable / pole / log_pole / indeterminate.

    A tie in the leading coefficient magnitudes is reported as indeterminate
    (pole or essential singularity; undecidable from the leading data).
    """
    if order is None:
        order = _pole_order_bound(fmap, z0) + 2
    exp = fmap.local_expansion(z0, order=order)
    n = exp.lead
    if n is not None and n < 0:
        an, bn = exp.pair(n)
        try:
            _dominance(an, bn)
        except IndeterminateIndex:
            return "indeterminate"
        return "pole"
    if abs(exp.c) > 0:
        return "log_pole"
    return "removable"


def _pole_order_bound(fmap, z0):
    b = 1
    for r in (fmap.h, fmap.g):
        for z, mult in r.poles():
            if abs(z - z0) <= 1e-6 * max(1.0, abs(z0)):
                b = max(b, mult)
    return b


def pole_records(fmap):
    """IndexRecord for every finite singularity that survives normalization."""
    records = []
    for z0 in fmap.singular_points():
        order = _pole_order_bound(fmap, z0) + 2
        exp = fmap.local_expansion(z0, order=order)
        n = exp.lead
        if n is not None and n < 0:
            records.append(
                IndexRecord(location=z0, kind="pole", index=pole_index(exp), basis=exp)
            )
        elif abs(exp.c) > 0:
            records.append(
                IndexRecord(location=z0, kind="log_pole", index=0, basis=exp)
            )
        # else removable: drop
    return records


def inverted_map(fmap):
    """The harmonic mapping z -> f(1/z); singularity at 0 encodes infinity."""
    h2 = fmap.h.at_inverse()
    g2 = fmap.g.at_inverse()
    total_c = sum((c for _, c in fmap.log_terms), 0j)
    logs = []
    if abs(total_c) > 0:
        logs.append((0j, -total_c))
    const = 0j
    for s, c in fmap.log_terms:
        if abs(s) > SINGULARITY_ATOL:
            logs.append((1.0 / s, c))
            const += c * math.log(abs(s))
    if const != 0:
        h2 = h2 + RationalFn(Poly([const]))
    return HarmonicMap(h2, g2, logs)


def _infinity_expansion(fmap, extra=2):
    growth = max(
        fmap.h.growth_at_infinity(),
        fmap.g.growth_at_infinity(),
        1,
    )
    inv = inverted_map(fmap)
    return inv.local_expansion(0j, order=growth + extra)


def index_at_infinity(fmap, eta=0j):
    """ind(f - eta; infinity), from the expansion of f(1/z) - eta at 0."""
    key = "exp_infinity"
    if key not in fmap._cache:
        fmap._cache[key] = _infinity_expansion(fmap)
    exp = fmap._cache[key]
    n = exp.lead
    if n is not None and n < 0:
        # polynomial growth at infinity: eta-independent
        an, bn = exp.pair(n)
        return n * _dominance(an, bn)
    if abs(exp.c) > 0:
        return 0
    value = exp.a.get(0, 0j) + exp.b.get(0, 0j).conjugate()
    eta = complex(eta)
    if abs(value - eta) > 1e-9 * max(1.0, abs(value), abs(eta)):
        return 0
    # f(infinity) = eta: infinity is a zero of f - eta
    floor = exp._floor()
    ks = sorted(k for k in set(exp.a) | set(exp.b) if k >= 1)
    for k in ks:
        ak, bk = exp.pair(k)
        if abs(ak) > floor or abs(bk) > floor:
            return k * _dominance(ak, bk)
    raise IndeterminateIndex("f - eta vanishes identically at infinity")


def is_non_degenerate(fmap):
    """Structural admissibility check; returns (ok, notes).

    Notes flag both genuine violations (which set ok = False) and accepted
    extensions such as pure logarithmic poles.
    """
    ok = True
    notes = []
    for z0 in fmap.singular_points():
        order = _pole_order_bound(fmap, z0) + 2
        exp = fmap.local_expansion(z0, order=order)
        n = exp.lead
        if n is not None and n < 0:
            an, bn = exp.pair(n)
            try:
                _dominance(an, bn)
            except IndeterminateIndex:
                ok = False
                notes.append(
                    f"pole at {_fmt_complex(z0)}: tied leading coefficients "
                    f"(pole order {-n})"
                )
        elif abs(exp.c) > 0:
            notes.append(
                f"pure logarithmic pole at {_fmt_complex(z0)} accepted with "
                f"index 0 (critical set accumulates there)"
            )
        else:
            notes.append(f"removable singularity at {_fmt_complex(z0)}")
    try:
        exp = _infinity_expansion(fmap)
    except Exception as e:  # noqa: BLE001 - report, do not mask, any failure
        return False, notes + [f"expansion at infinity failed: {e}"]
    n = exp.lead
    if n is not None and n < 0:
        an, bn = exp.pair(n)
        try:
            if _dominance(an, bn) < 0:
                ok = False
                notes.append("co-analytic dominance at infinity (sense-reversing)")
        except IndeterminateIndex:
            ok = False
            notes.append("tied leading growth at infinity")
    elif abs(exp.c) > 0:
        ok = False
        notes.append("logarithmic growth at infinity without polynomial dominance")
    else:
        floor = exp._floor()
        decided = False
        for k in sorted(kk for kk in set(exp.a) | set(exp.b) if kk >= 1):
            ak, bk = exp.pair(k)
            if abs(ak) > floor or abs(bk) > floor:
                decided = True
                try:
                    if _dominance(ak, bk) < 0:
                        ok = False
                        notes.append("sense-reversing in a neighborhood of infinity")
                except IndeterminateIndex:
                    ok = False
                    notes.append("tied leading coefficients at infinity")
                break
        if not decided:
            ok = False
            notes.append("f is constant")
    return ok, notes


# -- builtin catalog -----------------------------------------------------------


def catalog(key):
    """Resolve a builtin example mapping by key.

    Keys: "mpw", "log-example", "wilmshurst:n" (n >= 2), "nexp".
    """
    key = key.strip()
    if key == "mpw":
        # z - conj(z^2 / (z^3 - 0.6^3))
        return HarmonicMap(
            RationalFn(Poly([0, 1.0])),
            RationalFn(Poly([0, 0, -1.0]), Poly([-(0.6**3), 0, 0, 1.0])),
        )
    if key == "log-example":
        # z^2 + 1/conj(z) + 1/(conj(z) + 1) + 2 log|z|
        g = RationalFn(Poly([1.0]), Poly([0, 1.0])) + RationalFn(
            Poly([1.0]), Poly([1.0, 1.0])
        )
        return HarmonicMap(RationalFn(Poly([0, 0, 1.0])), g, [(0j, 2.0 + 0j)])
    if key.startswith("wilmshurst"):
        n = 3
        if ":" in key:
            n = int(key.split(":", 1)[1])
        if n < 1:
            raise ValueError("wilmshurst requires n >= 1")
        zn = Poly([0] * n + [1.0])
        zm1n = Poly([-1.0, 1.0])
        pw = Poly([1.0])
        for _ in range(n):
            pw = pw * zm1n
        p = zn + pw
        q = 1j * zn + (-1j) * pw
        return HarmonicMap.from_polynomials(p, q)
    if key == "nexp":
        # z^3/3 + conj(z)^2/2
        return HarmonicMap.from_polynomials(Poly([0, 0, 0, 1.0 / 3.0]), Poly([0, 0, 0.5]))
    raise KeyError(f"unknown catalog key: {key!r}")


CATALOG_KEYS = ("mpw", "log-example", "wilmshurst:3", "nexp")
