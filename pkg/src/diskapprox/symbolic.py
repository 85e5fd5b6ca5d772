"""Sparse polynomials in (zeta1, zeta2) and finite z/conj(z) symbols.

Three value types live here:

* :class:`BiPoly`  -- analytic polynomial ``sum c[j, k] zeta1**j zeta2**k``.
* :class:`HomogeneousSymbol` -- ``sum a[k] conj(z)**k z**(d - k)``, ``k`` any
  integer, homogeneous of degree ``d >= 2``.
* :class:`MixedPoly` -- ``sum c[p, q] z**p conj(z)**q`` with ``p, q >= 0``.

All of them are immutable; zero coefficients are dropped on construction so
structural predicates never see explicit zeros.  Evaluation accepts Python
scalars or numpy arrays.
"""
from __future__ import annotations

import cmath
import math
from typing import Mapping

import numpy as np

# |w3 - w2| <= DQ_SWITCH * (1 + |w2|) selects the derivative branch
DQ_SWITCH = 1e-8


def _clean(terms: Mapping, what: str) -> dict:
    out = {}
    for key, c in terms.items():
        c = complex(c)
        if not (math.isfinite(c.real) and math.isfinite(c.imag)):
            raise ValueError(f"non-finite coefficient {c!r} at {key!r} in {what}")
        if c != 0:
            out[key] = out.get(key, 0j) + c
            if out[key] == 0:
                del out[key]
    return out


def _fmt_complex(c: complex) -> str:
    if c.imag == 0:
        return f"{c.real:g}"
    if c.real == 0:
        return f"{c.imag:g}i"
    return f"({c.real:g}{c.imag:+g}i)"


class BiPoly:
    """Sparse analytic polynomial in two complex variables.

    ``BiPoly({(3, 0): -1j, (0, 3): 1j})`` is ``-i*zeta1**3 + i*zeta2**3``.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[tuple[int, int], complex] | None = None):
        terms = {} if terms is None else terms
        for key in terms:
            j, k = key
            if int(j) != j or int(k) != k or j < 0 or k < 0:
                raise ValueError(f"exponents must be non-negative integers, got {key!r}")
        self._terms = _clean({(int(j), int(k)): c for (j, k), c in terms.items()}, "BiPoly")

    @classmethod
    def monomial(cls, j: int, k: int, c: complex = 1.0) -> "BiPoly":
        return cls({(j, k): c})

    @property
    def terms(self) -> dict[tuple[int, int], complex]:
        return dict(self._terms)

    def __iter__(self):
        return iter(sorted(self._terms.items()))

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((j + k for j, k in self._terms), default=-1)

    @property
    def min_degree(self) -> int:
        """Lowest total degree present; -1 for the zero polynomial."""
        return min((j + k for j, k in self._terms), default=-1)

    def coefficient(self, j: int, k: int) -> complex:
        return self._terms.get((j, k), 0j)

    def __eq__(self, other) -> bool:
        if isinstance(other, BiPoly):
            return self._terms == other._terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __repr__(self) -> str:
        if not self._terms:
            return "BiPoly(0)"
        parts = [f"{_fmt_complex(c)}*z1^{j}*z2^{k}" for (j, k), c in self]
        return "BiPoly(" + " + ".join(parts) + ")"

    # arithmetic
    def __add__(self, other: "BiPoly") -> "BiPoly":
        if not isinstance(other, BiPoly):
            return NotImplemented
        out = dict(self._terms)
        for key, c in other._terms.items():
            out[key] = out.get(key, 0j) + c
        return BiPoly(out)

    def __neg__(self) -> "BiPoly":
        return BiPoly({key: -c for key, c in self._terms.items()})

    def __sub__(self, other: "BiPoly") -> "BiPoly":
        if not isinstance(other, BiPoly):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other) -> "BiPoly":
        if isinstance(other, BiPoly):
            out: dict = {}
            for (j1, k1), c1 in self._terms.items():
                for (j2, k2), c2 in other._terms.items():
                    key = (j1 + j2, k1 + k2)
                    out[key] = out.get(key, 0j) + c1 * c2
            return BiPoly(out)
        if isinstance(other, (int, float, complex, np.number)):
            return BiPoly({key: c * other for key, c in self._terms.items()})
        return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "BiPoly":
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        out = BiPoly({(0, 0): 1.0})
        for _ in range(n):
            out = out * self
        return out

    def __call__(self, z1, z2):
        return eval_bipoly(self, z1, z2)

    def substitute(self, u: "BiPoly", v: "BiPoly") -> "BiPoly":
        """Composition ``self(u, v)`` with polynomial arguments."""
        out = BiPoly()
        for (j, k), c in self._terms.items():
            out = out + c * (u ** j) * (v ** k)
        return out


def eval_bipoly(p: BiPoly, z1, z2):
    """Term-sum evaluation of ``p`` at ``(z1, z2)`` (scalars or arrays)."""
    scalar = np.ndim(z1) == 0 and np.ndim(z2) == 0
    if scalar:
        z1, z2 = complex(z1), complex(z2)
        total = 0j
        for (j, k), c in p:
            total += c * z1 ** j * z2 ** k
        return total
    z1 = np.asarray(z1, dtype=complex)
    z2 = np.asarray(z2, dtype=complex)
    total = np.zeros(np.broadcast(z1, z2).shape, dtype=complex)
    for (j, k), c in p:
        total = total + c * z1 ** j * z2 ** k
    return total


def homogeneous_parts(p: BiPoly) -> list[tuple[int, BiPoly]]:
    """Split ``p`` into homogeneous pieces, sorted by increasing degree."""
    groups: dict[int, dict] = {}
    for (j, k), c in p:
        groups.setdefault(j + k, {})[(j, k)] = c
    return [(deg, BiPoly(groups[deg])) for deg in sorted(groups)]


def odd_part(p: BiPoly) -> BiPoly:
    return BiPoly({(j, k): c for (j, k), c in p if (j + k) % 2 == 1})


def even_part(p: BiPoly) -> BiPoly:
    return BiPoly({(j, k): c for (j, k), c in p if (j + k) % 2 == 0})


def is_odd(p: BiPoly) -> bool:
    return all((j + k) % 2 == 1 for (j, k), _ in p)


def is_complex_symmetric(p: BiPoly) -> tuple[bool, float]:
    """Check ``a[k] == conj(a[n - k])`` for ``p = sum a[k] zeta1**k zeta2**(n-k)``.

    Returns ``(flag, deviation)`` with ``deviation = max_k |a[k] - conj(a[n-k])|``.
    Equivalent to ``p(z, conj(z))`` being real for every ``z``.
    """
    parts = homogeneous_parts(p)
    if len(parts) != 1 or parts[0][0] % 2 == 0:
        raise ValueError("not an odd homogeneous polynomial")
    n = parts[0][0]
    dev = 0.0
    for k in range(n + 1):
        a = p.coefficient(k, n - k)
        b = p.coefficient(n - k, k)
        dev = max(dev, abs(a - b.conjugate()))
    return dev == 0.0, dev


def d_zeta2(p: BiPoly) -> BiPoly:
    """Formal partial derivative with respect to the second variable."""
    return BiPoly({(j, k - 1): k * c for (j, k), c in p if k > 0})


def d_zeta1(p: BiPoly) -> BiPoly:
    return BiPoly({(j - 1, k): j * c for (j, k), c in p if j > 0})


def difference_quotient(F: BiPoly, w1, w2, w3) -> complex:
    """``(F(w1, w3) - F(w1, w2)) / (w3 - w2)``, or ``dF/dzeta2(w1, w2)`` near the diagonal.

    This is the holomorphic function ``H`` with
    ``F(w1, w2 + z) = F(w1, w2) + z * H(w1, w2, w2 + z)``.
    """
    w1, w2, w3 = complex(w1), complex(w2), complex(w3)
    if abs(w3 - w2) <= DQ_SWITCH * (1.0 + abs(w2)):
        return eval_bipoly(d_zeta2(F), w1, w2)
    return (eval_bipoly(F, w1, w3) - eval_bipoly(F, w1, w2)) / (w3 - w2)


class HomogeneousSymbol:
    """``g(z) = sum_k a[k] conj(z)**k z**(d - k)`` for ``z != 0``, ``g(0) = 0``.

    ``k`` may be negative or exceed ``d``; on the unit circle each term is
    ``a[k] exp(i (d - 2k) theta)``, so ``g(r e^{i theta}) = r**d * trig(theta)``.
    """

    __slots__ = ("_degree", "_terms")

    def __init__(self, degree: int, terms: Mapping[int, complex] | None = None):
        if int(degree) != degree or degree < 2:
            raise ValueError(f"symbol degree must be an integer >= 2, got {degree!r}")
        terms = {} if terms is None else terms
        self._degree = int(degree)
        self._terms = _clean({int(k): c for k, c in terms.items()}, "HomogeneousSymbol")

    @property
    def degree(self) -> int:
        return self._degree

    @property
    def m(self) -> float:
        """Half the degree; an integer for the even symbols of the coefficient tests."""
        return self._degree // 2 if self._degree % 2 == 0 else self._degree / 2

    @property
    def terms(self) -> dict[int, complex]:
        return dict(self._terms)

    def coefficient(self, k: int) -> complex:
        return self._terms.get(k, 0j)

    def __iter__(self):
        return iter(sorted(self._terms.items()))

    def __len__(self):
        return len(self._terms)

    @property
    def is_even(self) -> bool:
        return self._degree % 2 == 0

    def coefficient_sum(self) -> float:
        return sum(abs(c) for c in self._terms.values())

    def __eq__(self, other):
        if isinstance(other, HomogeneousSymbol):
            return self._degree == other._degree and self._terms == other._terms
        return NotImplemented

    def __hash__(self):
        return hash((self._degree, frozenset(self._terms.items())))

    def __repr__(self):
        parts = [f"{_fmt_complex(c)}*zbar^{k}*z^{self._degree - k}" for k, c in self]
        return f"HomogeneousSymbol(d={self._degree}: " + (" + ".join(parts) or "0") + ")"

    def scaled(self, factor: complex) -> "HomogeneousSymbol":
        return HomogeneousSymbol(self._degree, {k: factor * c for k, c in self._terms.items()})

    def circle_coefficients(self) -> dict[int, complex]:
        """Fourier coefficients on the unit circle: frequency ``d - 2k`` -> ``a[k]``."""
        return {self._degree - 2 * k: c for k, c in self._terms.items()}

    def __call__(self, z):
        return eval_symbol(self, z)


def eval_symbol(g: HomogeneousSymbol, z):
    """Evaluate ``g`` in polar form, ``r**d * sum a[k] exp(i (d - 2k) theta)``."""
    d = g.degree
    if np.ndim(z) == 0:
        z = complex(z)
        if z == 0:
            return 0j
        r, theta = abs(z), cmath.phase(z)
        return r ** d * sum(c * cmath.exp(1j * (d - 2 * k) * theta) for k, c in g)
    z = np.asarray(z, dtype=complex)
    r = np.abs(z)
    theta = np.angle(z)
    total = np.zeros(z.shape, dtype=complex)
    for k, c in g:
        total = total + c * np.exp(1j * (d - 2 * k) * theta)
    return np.where(r == 0, 0j, r ** d * total)


PARITIES = ("odd", "even", None)


class MixedPoly:
    """``sum c[p, q] z**p conj(z)**q`` with an optional, validated parity tag."""

    __slots__ = ("_terms", "_parity")

    def __init__(self, terms: Mapping[tuple[int, int], complex] | None = None,
                 parity: str | None = None):
        terms = {} if terms is None else terms
        for key in terms:
            p, q = key
            if int(p) != p or int(q) != q or p < 0 or q < 0:
                raise ValueError(f"exponents must be non-negative integers, got {key!r}")
        if parity not in PARITIES:
            raise ValueError(f"parity must be 'odd', 'even' or None, got {parity!r}")
        self._terms = _clean({(int(p), int(q)): c for (p, q), c in terms.items()}, "MixedPoly")
        want = {"odd": 1, "even": 0}.get(parity)
        if want is not None:
            bad = [key for key in self._terms if sum(key) % 2 != want]
            if bad:
                raise ValueError(f"terms {bad} violate declared parity {parity!r}")
        self._parity = parity

    @property
    def terms(self) -> dict[tuple[int, int], complex]:
        return dict(self._terms)

    @property
    def parity(self) -> str | None:
        return self._parity

    def __iter__(self):
        return iter(sorted(self._terms.items()))

    def __len__(self):
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def min_degree(self) -> int:
        return min((p + q for p, q in self._terms), default=-1)

    def odd_part(self) -> "MixedPoly":
        return MixedPoly({k: c for k, c in self._terms.items() if sum(k) % 2 == 1}, "odd")

    def even_part(self) -> "MixedPoly":
        return MixedPoly({k: c for k, c in self._terms.items() if sum(k) % 2 == 0}, "even")

    def __eq__(self, other):
        if isinstance(other, MixedPoly):
            return self._terms == other._terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __repr__(self):
        parts = [f"{_fmt_complex(c)}*z^{p}*zbar^{q}" for (p, q), c in self]
        return "MixedPoly(" + (" + ".join(parts) or "0") + ")"

    def __call__(self, z):
        return eval_mixed(self, z)

    @classmethod
    def from_bipoly(cls, F: BiPoly) -> "MixedPoly":
        """The function ``z -> F(z, conj(z))``."""
        parity = "odd" if is_odd(F) and not F.is_zero() else None
        return cls(F.terms, parity)


def eval_mixed(f: MixedPoly, z):
    if np.ndim(z) == 0:
        z = complex(z)
        zb = z.conjugate()
        return sum((c * z ** p * zb ** q for (p, q), c in f), 0j)
    z = np.asarray(z, dtype=complex)
    zb = np.conj(z)
    total = np.zeros(z.shape, dtype=complex)
    for (p, q), c in f:
        total = total + c * z ** p * zb ** q
    return total


def trig_coefficients_on_circle(p: BiPoly) -> dict[int, complex]:
    """Fourier coefficients of ``theta -> p(e^{i theta}, e^{-i theta})``."""
    out: dict[int, complex] = {}
    for (j, k), c in p:
        out[j - k] = out.get(j - k, 0j) + c
    return out


def multiply_fourier(a: Mapping[int, complex], b: Mapping[int, complex]) -> dict[int, complex]:
    out: dict[int, complex] = {}
    for n1, c1 in a.items():
        for n2, c2 in b.items():
            out[n1 + n2] = out.get(n1 + n2, 0j) + c1 * c2
    return out

