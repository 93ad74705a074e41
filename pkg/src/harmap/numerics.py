"""Complex polynomial / rational arithmetic and global root finding.

Polynomials are stored as ascending coefficient arrays.  All tolerances are
relative: the coefficient floor separates structural zeros from round-off,
the clustering tolerance groups nearby roots into multiplicities.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from .errors import IndeterminateValue, NonConvergence, NotIsolated, PoleEvaluation

COEFF_FLOOR = 1e-13      # relative floor below which a coefficient is structurally zero
CLUSTER_RTOL = 1e-8      # relative tolerance for root clustering / coprime cancellation
MAX_DEGREE = 64          # conditioning of double-precision root finding degrades beyond this
ROOT_MAX_ITER = 1000


def _as_coeff_array(coeffs):
    if isinstance(coeffs, Poly):
        return coeffs.coeffs.copy()
    a = np.atleast_1d(np.asarray(coeffs, dtype=complex)).ravel()
    return a


class Poly:
    """Polynomial with complex coefficients, ascending powers.

    The zero polynomial is represented by an empty coefficient array and has
    degree -1.  Trailing coefficients below the relative floor are trimmed on
    construction.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        a = _as_coeff_array(coeffs)
        if a.size:
            top = np.max(np.abs(a))
            if top == 0.0:
                a = a[:0]
            else:
                keep = np.abs(a) > COEFF_FLOOR * top
                last = np.max(np.nonzero(keep)[0]) if keep.any() else -1
                a = a[: last + 1]
        if a.size - 1 > MAX_DEGREE:
            raise ValueError(f"polynomial degree {a.size - 1} exceeds cap {MAX_DEGREE}")
        self.coeffs = a

    # -- basic structure -------------------------------------------------

    @property
    def degree(self):
        return self.coeffs.size - 1

    def is_zero(self):
        return self.coeffs.size == 0

    def __repr__(self):
        return f"Poly({list(self.coeffs)})"

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.coeffs.shape == other.coeffs.shape and np.array_equal(
            self.coeffs, other.coeffs
        )

    # -- evaluation -------------------------------------------------------

    def __call__(self, z):
        """Horner evaluation; accepts scalars or numpy arrays."""
        if isinstance(z, (complex, float, int)):
            acc = 0j
            for c in self.coeffs[::-1]:
                acc = acc * z + c
            return acc
        z = np.asarray(z, dtype=complex)
        acc = np.zeros_like(z)
        for c in self.coeffs[::-1]:
            acc = acc * z + c
        return acc

    def magnitude_bound(self, z):
        """Sum |c_k| |z|^k, the natural residual scale at z."""
        r = abs(z)
        acc = 0.0
        for c in self.coeffs[::-1]:
            acc = acc * r + abs(c)
        return acc

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other):
        other = other if isinstance(other, Poly) else Poly([other])
        n = max(self.coeffs.size, other.coeffs.size)
        a = np.zeros(n, dtype=complex)
        a[: self.coeffs.size] += self.coeffs
        a[: other.coeffs.size] += other.coeffs
        return Poly(a)

    def __neg__(self):
        return Poly(-self.coeffs)

    def __sub__(self, other):
        other = other if isinstance(other, Poly) else Poly([other])
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (complex, float, int)):
            return Poly(self.coeffs * other)
        if self.is_zero() or other.is_zero():
            return Poly()
        return Poly(np.convolve(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def derivative(self):
        if self.coeffs.size <= 1:
            return Poly()
        k = np.arange(1, self.coeffs.size)
        return Poly(self.coeffs[1:] * k)

    def compose_linear(self, a, b):
        """Return p(a*z + b)."""
        lin = Poly([b, a])
        acc = Poly()
        for c in self.coeffs[::-1]:
            acc = acc * lin + Poly([c])
        return acc

    def shifted(self, z0):
        """Return q with q(u) = p(u + z0), by repeated synthetic division."""
        b = self.coeffs.astype(complex).copy()
        n = b.size
        for i in range(n - 1):
            for j in range(n - 2, i - 1, -1):
                b[j] += z0 * b[j + 1]
        return b  # raw array: callers need untrimmed leading zeros

    def reversed_coeffs(self):
        """Coefficients of z^deg * p(1/z)."""
        return self.coeffs[::-1].copy()


def poly_roots(p, rng=None, max_iter=ROOT_MAX_ITER):
    """All complex roots with multiplicity, by Aberth-Ehrlich simultaneous iteration.

    Converged roots r satisfy |p(r)| <= ~1e-12 * sum(|c_k| |r|^k).  Raises
    NonConvergence if the iteration stagnates past its restart budget.
    """
    if isinstance(p, Poly):
        c = p.coeffs
    else:
        c = Poly(p).coeffs
    n = c.size - 1
    if n < 1:
        raise ValueError("poly_roots requires degree >= 1")
    rng = np.random.default_rng(0) if rng is None else rng

    # deflate exact zero roots for conditioning
    nz = 0
    while nz < n and abs(c[nz]) <= COEFF_FLOOR * np.max(np.abs(c)):
        nz += 1
    zero_roots = np.zeros(nz, dtype=complex)
    c = c[nz:]
    n = c.size - 1
    if n == 0:
        return zero_roots

    c = c / c[-1]
    # initial guesses on a circle inside the Cauchy root bound
    bound = 1.0 + float(np.max(np.abs(c[:-1]))) if n > 0 else 1.0
    radius = 0.5 * bound if bound > 0 else 1.0
    angles = 2.0 * np.pi * (np.arange(n) + 0.35) / n + 0.4
    z = radius * np.exp(1j * angles)

    dcoeffs = c[1:] * np.arange(1, n + 1)

    def _eval(zz, coeffs):
        acc = np.zeros_like(zz)
        for ck in coeffs[::-1]:
            acc = acc * zz + ck
        return acc

    def _scale(zz):
        acc = np.zeros(zz.shape, dtype=float)
        r = np.abs(zz)
        for ck in c[::-1]:
            acc = acc * r + abs(ck)
        return acc

    stall = 0
    prev_res = np.inf
    for _ in range(max_iter):
        pv = _eval(z, c)
        res = np.abs(pv) / np.maximum(_scale(z), 1e-300)
        worst = float(np.max(res))
        if worst <= 5e-14:
            break
        dv = _eval(z, dcoeffs)
        bad = np.abs(dv) < 1e-300
        if bad.any():
            z = z + bad * (1e-8 * radius * np.exp(1j * rng.uniform(0, 2 * np.pi, n)))
            continue
        w = pv / dv
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, np.inf)
        s = np.sum(1.0 / diff, axis=1)
        denom = 1.0 - w * s
        small = np.abs(denom) < 1e-12
        denom = np.where(small, 1.0, denom)
        step = w / denom
        z = z - step
        # multiple roots converge linearly at rate (m-1)/m; only count
        # genuine stagnation toward the restart budget
        if worst > 0.985 * prev_res:
            stall += 1
        else:
            stall = 0
        prev_res = worst
        if stall >= 60:
            # restart stagnated components with a random perturbation
            z = z + 0.05 * radius * np.exp(1j * rng.uniform(0, 2 * np.pi, n)) * (
                res > 1e-13
            )
            stall = 0
            prev_res = np.inf
    else:
        raise NonConvergence(
            f"Aberth iteration did not converge in {max_iter} iterations"
        )
    return np.concatenate([zero_roots, z])


def cluster_roots(roots, rtol=CLUSTER_RTOL):
    """Group nearby roots into (center, multiplicity) pairs.

    The grouping radius is widened by a multiplicity-safety factor: an
    m-fold root is only located to ~residual^(1/m), but the cluster mean
    recovers most of the lost accuracy.
    """
    remaining = list(roots)
    clusters = []
    while remaining:
        seed = remaining.pop(0)
        group = [seed]
        scale = max(1.0, abs(seed))
        changed = True
        while changed:
            changed = False
            center = sum(group) / len(group)
            keep = []
            for r in remaining:
                if abs(r - center) <= rtol * scale * 100:
                    group.append(r)
                    changed = True
                else:
                    keep.append(r)
            remaining = keep
        clusters.append((sum(group) / len(group), len(group)))
    return clusters


def poly_from_roots(roots, leading=1.0):
    p = Poly([leading])
    for r in roots:
        p = p * Poly([-r, 1.0])
    return p


def _polish_multiple_root(p, z, m, iters=25):
    """Newton-polish an m-fold root of p as a simple root of p^(m-1)."""
    q = p
    for _ in range(m - 1):
        q = q.derivative()
    dq = q.derivative()
    for _ in range(iters):
        dv = dq(z)
        if abs(dv) < 1e-300:
            break
        step = q(z) / dv
        z = z - step
        if abs(step) <= 1e-15 * max(1.0, abs(z)):
            break
    return z


def polished_clusters(p, merge_radius=1e-3):
    """Roots of p grouped into (root, multiplicity) with polished centers.

    An m-fold root is only located to ~residual^(1/m) by the simultaneous
    iteration, so clusters are merged on a generous radius and each candidate
    is re-polished on the (m-1)-th derivative, where the root is simple.  A
    residual check rejects accidental merges of distinct roots, which are
    then re-grouped on a tighter radius.
    """
    if not isinstance(p, Poly):
        p = Poly(p)
    clusters = cluster_roots(poly_roots(p))
    return _merge_and_polish(p, clusters, merge_radius)


def _merge_and_polish(p, clusters, merge_radius):
    groups = []  # list of lists of (z, m)
    for z, m in sorted(clusters, key=lambda c: (c[0].real, c[0].imag)):
        for g in groups:
            w = sum(zz * mm for zz, mm in g) / sum(mm for _, mm in g)
            if abs(z - w) <= merge_radius * max(1.0, abs(w)):
                g.append((z, m))
                break
        else:
            groups.append([(z, m)])
    out = []
    for g in groups:
        m = sum(mm for _, mm in g)
        center = sum(zz * mm for zz, mm in g) / m
        if m == 1:
            out.append((center, 1))
            continue
        zp = _polish_multiple_root(p, center, m)
        if abs(p(zp)) <= 1e-11 * max(1.0, p.magnitude_bound(zp)):
            out.append((zp, m))
        elif merge_radius > 1e-6:
            out.extend(_merge_and_polish(p, g, merge_radius / 8.0))
        else:
            out.extend(g)
    return out


def _deflate_at_root(p, r):
    """Synthetic division of p by (z - r); the remainder is discarded."""
    a = p.coeffs
    n = a.size
    if n <= 1:
        return Poly()
    b = np.zeros(n - 1, dtype=complex)
    acc = a[-1]
    for k in range(n - 2, -1, -1):
        b[k] = acc
        acc = a[k] + r * acc
    return Poly(b)


class RationalFn:
    """Quotient of two polynomials, normalized to coprime numerator/denominator.

    Common roots (within the clustering tolerance) are cancelled on
    construction and the denominator is rescaled to unit max coefficient.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=Poly([1.0]), *, _normalized=False):
        num = num if isinstance(num, Poly) else Poly(num)
        den = den if isinstance(den, Poly) else Poly(den)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if not _normalized:
            num, den = _cancel_common_roots(num, den)
            scale = np.max(np.abs(den.coeffs))
            num = Poly(num.coeffs / scale)
            den = Poly(den.coeffs / scale)
        self.num = num
        self.den = den

    def __repr__(self):
        return f"RationalFn({self.num!r}, {self.den!r})"

    def is_zero(self):
        return self.num.is_zero()

    def is_constant(self):
        return self.num.degree <= 0 and self.den.degree <= 0

    def constant_value(self):
        if not self.is_constant():
            raise ValueError("not constant")
        if self.num.is_zero():
            return 0j
        return self.num.coeffs[0] / self.den.coeffs[0]

    # -- evaluation -------------------------------------------------------

    def __call__(self, z):
        """Raw evaluation; at poles this yields inf/nan (numpy semantics)."""
        if isinstance(z, (complex, float, int)):
            dv = self.den(z)
            nv = self.num(z)
            if dv == 0:
                return complex(math.inf, math.inf)
            return nv / dv
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.num(z) / self.den(z)

    def eval(self, z):
        """Checked evaluation: raises PoleEvaluation / IndeterminateValue."""
        nv = self.num(z)
        dv = self.den(z)
        nscale = max(self.num.magnitude_bound(z), 1e-300)
        dscale = max(self.den.magnitude_bound(z), 1e-300)
        den_small = abs(dv) <= 1e-12 * dscale
        num_small = abs(nv) <= 1e-12 * nscale
        if den_small and num_small:
            raise IndeterminateValue(f"0/0 at z = {z}")
        if den_small:
            raise PoleEvaluation(z)
        return nv / dv

    # -- calculus / algebra -------------------------------------------------

    def derivative(self):
        """Quotient rule in lowest terms.

        A pole of order m becomes a pole of order m + 1, so the numerator
        n'd - nd' always carries the factor prod (z - r_i)^(m_i - 1); it is
        deflated at the known denominator roots instead of re-matching roots
        of the (possibly high-degree) raw numerator.
        """
        n, d = self.num, self.den
        raw = n.derivative() * d - n * d.derivative()
        if d.degree < 1 or raw.is_zero():
            return RationalFn(raw, d * d)
        den = d * d
        for r, m in cluster_roots(poly_roots(d)):
            for _ in range(m - 1):
                raw = _deflate_at_root(raw, r)
                den = _deflate_at_root(den, r)
        scale = np.max(np.abs(den.coeffs))
        return RationalFn(
            Poly(raw.coeffs / scale), Poly(den.coeffs / scale), _normalized=True
        )

    def __add__(self, other):
        other = _as_rational(other)
        return RationalFn(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    __radd__ = __add__

    def __neg__(self):
        return RationalFn(-self.num, self.den, _normalized=True)

    def __sub__(self, other):
        return self + (-_as_rational(other))

    def __mul__(self, other):
        other = _as_rational(other)
        return RationalFn(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_rational(other)
        if other.num.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFn(self.num * other.den, self.den * other.num)

    def compose_linear(self, a, b):
        """Return r(a*z + b)."""
        return RationalFn(self.num.compose_linear(a, b), self.den.compose_linear(a, b))

    def at_inverse(self):
        """Return r(1/z) as a rational function of z."""
        dn, dd = self.num.degree, self.den.degree
        if dn < 0:
            return RationalFn(Poly(), Poly([1.0]), _normalized=True)
        num = self.num.reversed_coeffs()
        den = self.den.reversed_coeffs()
        if dd > dn:
            num = np.concatenate([np.zeros(dd - dn, dtype=complex), num])
        elif dn > dd:
            den = np.concatenate([np.zeros(dn - dd, dtype=complex), den])
        return RationalFn(Poly(num), Poly(den))

    def poles(self):
        """Clustered poles of the normalized function: list of (z, order)."""
        if self.den.degree < 1:
            return []
        return polished_clusters(self.den)

    def growth_at_infinity(self):
        """deg(num) - deg(den); large-|z| behavior ~ z^growth."""
        if self.num.is_zero():
            return -10**9
        return self.num.degree - self.den.degree

    def leading_ratio(self):
        """Coefficient of the z^growth term at infinity."""
        if self.num.is_zero():
            return 0j
        return self.num.coeffs[-1] / self.den.coeffs[-1]


def _as_rational(x):
    if isinstance(x, RationalFn):
        return x
    if isinstance(x, Poly):
        return RationalFn(x, Poly([1.0]), _normalized=True)
    return RationalFn(Poly([complex(x)]), Poly([1.0]), _normalized=True)


def _cancel_common_roots(num, den):
    """Cancel numerator/denominator roots that agree within the cluster tolerance."""
    if num.is_zero():
        return Poly(), Poly([1.0])
    if num.degree < 1 or den.degree < 1:
        return num, den
    nroots = list(poly_roots(num))
    droots = list(poly_roots(den))
    kept_n = []
    cancelled = False
    for r in nroots:
        hit = None
        for i, s in enumerate(droots):
            if abs(r - s) <= CLUSTER_RTOL * max(1.0, abs(r)):
                hit = i
                break
        if hit is None:
            kept_n.append(r)
        else:
            droots.pop(hit)
            cancelled = True
    if not cancelled:
        return num, den
    lead_n = num.coeffs[-1]
    lead_d = den.coeffs[-1]
    return poly_from_roots(kept_n, lead_n), poly_from_roots(droots, lead_d)


def laurent_coeffs(r, z0, k_min, k_max):
    """Laurent coefficients of a rational function about z0.

    Computed from exact Taylor recentering of numerator and denominator
    followed by truncated power-series division; no contour integration.
    Raises NotIsolated when z0 is ambiguously close to a distinct
    denominator root.
    """
    if not isinstance(r, RationalFn):
        r = _as_rational(r)
    out = {k: 0j for k in range(k_min, k_max + 1)}
    if r.num.is_zero():
        return out
    z0 = complex(z0)
    dsh = r.den.shifted(z0)
    dtop = np.max(np.abs(dsh))
    m = 0
    while m < dsh.size and abs(dsh[m]) <= COEFF_FLOOR * dtop * 10:
        m += 1
    if m >= dsh.size:
        raise IndeterminateValue("denominator vanished identically after shift")
    rest = dsh[m:]
    # a distinct denominator root at distance ~|rest[0]/rest[1]| makes the
    # multiplicity ambiguous
    if rest.size > 1 and abs(rest[1]) > 0:
        nearest = abs(rest[0]) / abs(rest[1])
        if nearest <= CLUSTER_RTOL * max(1.0, abs(z0)) and abs(rest[0]) > 0:
            raise NotIsolated(
                f"z0 = {z0} is within clustering tolerance of a distinct pole"
            )
    nsh = r.num.shifted(z0)
    # phi = num / den_rest as a power series; laurent coeff k = phi_{k+m}
    length = k_max + m + 1
    if length <= 0:
        return out
    nser = np.zeros(length, dtype=complex)
    take = min(length, nsh.size)
    nser[:take] = nsh[:take]
    dser = np.zeros(length, dtype=complex)
    take = min(length, rest.size)
    dser[:take] = rest[:take]
    phi = np.zeros(length, dtype=complex)
    for k in range(length):
        acc = nser[k]
        for j in range(1, k + 1):
            acc -= dser[j] * phi[k - j]
        phi[k] = acc / dser[0]
    for k in range(k_min, k_max + 1):
        idx = k + m
        if 0 <= idx < length:
            out[k] = phi[idx]
    return out
