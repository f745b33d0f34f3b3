"""Sparse multivariate polynomial algebra.

A polynomial ring here is nothing more than a fixed variable count: every
``Polynomial`` stores ``num_vars`` and a sparse map from exponent tuples to
float coefficients.  All higher layers (symbolic poses, containment
certificates, moment programs) are built from four primitives defined in this
module:

  * graded-lexicographic monomial bases (``monomial_basis``),
  * exact sparse arithmetic (``add`` / ``mul`` / ``scale`` / ``substitute``),
  * Riesz functionals of truncated moment sequences (``riesz``),
  * moment and localizing matrices (``moment_matrix`` / ``localizing_matrix``).

The graded-lex order is: lower total degree first; within a degree block,
larger exponent tuple first under plain tuple comparison (so for two
variables: 1, x1, x2, x1^2, x1*x2, x2^2, ...).  The basis of degree d is a
prefix of the basis of degree d+1, which is what makes moment-matrix
truncations principal submatrices of each other.

Coefficients with magnitude below ``DROP_TOL`` are dropped on construction so
term maps stay canonical and ``==`` is reliable.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

import numpy as np

# Coefficients below this magnitude are dropped when a Polynomial is built.
DROP_TOL = 1e-14

Exponents = Tuple[int, ...]


@dataclass(frozen=True)
class Monomial:
    """A monomial x^alpha, stored as its exponent tuple (one entry per variable)."""

    exponents: Exponents

    def __post_init__(self):
        if any(e < 0 for e in self.exponents):
            raise ValueError(f"negative exponent in {self.exponents}")
        object.__setattr__(self, "exponents", tuple(int(e) for e in self.exponents))

    @property
    def num_vars(self) -> int:
        return len(self.exponents)

    @property
    def degree(self) -> int:
        return sum(self.exponents)

    def __mul__(self, other: "Monomial") -> "Monomial":
        if len(self.exponents) != len(other.exponents):
            raise ValueError("monomial variable counts differ")
        return Monomial(tuple(a + b for a, b in zip(self.exponents, other.exponents)))

    def evaluate(self, point: Sequence[float]) -> float:
        v = 1.0
        for e, x in zip(self.exponents, point):
            if e:
                v *= float(x) ** e
        return v


def _degree_block(num_vars: int, total: int) -> Iterable[Exponents]:
    """Exponent tuples of exact total degree, largest tuple first (x1 before x2)."""
    if num_vars == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _degree_block(num_vars - 1, total - first):
            yield (first,) + rest


def basis_size(num_vars: int, degree: int) -> int:
    """Number of monomials of degree <= degree in num_vars variables: C(n+d, d)."""
    return math.comb(num_vars + degree, degree)


def monomial_basis(num_vars: int, degree: int) -> List[Monomial]:
    """All monomials of total degree <= degree, in graded-lex order.

    The order is deterministic and fixes the layout of every coefficient
    vector, moment matrix and Gram matrix in the package.  The length is
    C(num_vars + degree, degree), and the basis of degree d is a prefix of
    the basis of degree d+1.
    """
    if num_vars < 1:
        raise ValueError("num_vars must be >= 1")
    if degree < 0:
        raise ValueError("degree must be >= 0")
    out: List[Monomial] = []
    for total in range(degree + 1):
        out.extend(Monomial(e) for e in _degree_block(num_vars, total))
    return out


class Polynomial:
    """Real polynomial in a fixed number of variables, stored sparsely.

    ``terms`` maps exponent tuples to coefficients; the zero polynomial has an
    empty map.  Instances are immutable: all arithmetic returns new objects.
    """

    __slots__ = ("num_vars", "terms")

    def __init__(self, num_vars: int, terms: Mapping[Exponents, float] | None = None):
        if num_vars < 1:
            raise ValueError("num_vars must be >= 1")
        clean: Dict[Exponents, float] = {}
        for exps, coef in (terms or {}).items():
            key = tuple(int(e) for e in exps)
            if len(key) != num_vars:
                raise ValueError(f"exponent tuple {key} does not match num_vars={num_vars}")
            if any(e < 0 for e in key):
                raise ValueError(f"negative exponent in {key}")
            c = float(coef)
            if abs(c) >= DROP_TOL:
                clean[key] = c
        object.__setattr__(self, "num_vars", num_vars)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, num_vars: int) -> "Polynomial":
        return cls(num_vars, {})

    @classmethod
    def constant(cls, num_vars: int, value: float) -> "Polynomial":
        return cls(num_vars, {(0,) * num_vars: value})

    @classmethod
    def variable(cls, num_vars: int, index: int) -> "Polynomial":
        """The polynomial x_index (0-based index)."""
        if not 0 <= index < num_vars:
            raise ValueError(f"variable index {index} out of range for {num_vars} vars")
        exps = [0] * num_vars
        exps[index] = 1
        return cls(num_vars, {tuple(exps): 1.0})

    @classmethod
    def from_coefficients(cls, basis: Sequence[Monomial], coefficients: Sequence[float]) -> "Polynomial":
        """Rebuild a polynomial from its dense coefficient vector over a basis."""
        if len(basis) != len(coefficients):
            raise ValueError("basis and coefficient vector lengths differ")
        if not basis:
            raise ValueError("empty basis")
        n = basis[0].num_vars
        terms: Dict[Exponents, float] = {}
        for mono, c in zip(basis, coefficients):
            if mono.num_vars != n:
                raise ValueError("mixed variable counts in basis")
            if c:
                terms[mono.exponents] = terms.get(mono.exponents, 0.0) + float(c)
        return cls(n, terms)

    # -- basic queries -------------------------------------------------------

    @property
    def degree(self) -> int:
        """Total degree; the zero polynomial has degree 0."""
        if not self.terms:
            return 0
        return max(sum(e) for e in self.terms)

    def coefficient(self, mono: Monomial | Exponents) -> float:
        exps = mono.exponents if isinstance(mono, Monomial) else tuple(mono)
        return self.terms.get(exps, 0.0)

    def coefficients(self, basis: Sequence[Monomial]) -> np.ndarray:
        """Dense coefficient vector over a basis (missing monomials give 0)."""
        vec = np.array([self.terms.get(m.exponents, 0.0) for m in basis])
        covered = {m.exponents for m in basis}
        missing = [e for e in self.terms if e not in covered]
        if missing:
            raise ValueError(f"basis does not cover monomials {missing[:3]}")
        return vec

    def monomials(self) -> List[Monomial]:
        return [Monomial(e) for e in self.terms]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.num_vars == other.num_vars and self.terms == other.terms

    def __hash__(self):
        return hash((self.num_vars, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        return f"Polynomial({self.num_vars}, '{poly_to_string(self)}')"

    # -- arithmetic ----------------------------------------------------------

    def _check_ring(self, other: "Polynomial"):
        if self.num_vars != other.num_vars:
            raise ValueError(
                f"ring mismatch: {self.num_vars} vs {other.num_vars} variables")

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = Polynomial.constant(self.num_vars, other)
        self._check_ring(other)
        out = dict(self.terms)
        for exps, c in other.terms.items():
            out[exps] = out.get(exps, 0.0) + c
        return Polynomial(self.num_vars, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.num_vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            other = Polynomial.constant(self.num_vars, other)
        return self.__add__(other.__neg__())

    def __rsub__(self, other):
        return (-self).__add__(Polynomial.constant(self.num_vars, other))

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Polynomial(self.num_vars, {e: c * other for e, c in self.terms.items()})
        self._check_ring(other)
        out: Dict[Exponents, float] = {}
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                key = tuple(x + y for x, y in zip(ea, eb))
                out[key] = out.get(key, 0.0) + ca * cb
        return Polynomial(self.num_vars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result = Polynomial.constant(self.num_vars, 1.0)
        for _ in range(k):
            result = result * self
        return result

    # -- evaluation ----------------------------------------------------------

    def evaluate(self, point: Sequence[float]) -> float:
        if len(point) != self.num_vars:
            raise ValueError("point dimension mismatch")
        total = 0.0
        for exps, c in self.terms.items():
            v = c
            for e, x in zip(exps, point):
                if e:
                    v *= float(x) ** e
            total += v
        return total

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at many points at once; points has shape (N, num_vars)."""
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] != self.num_vars:
            raise ValueError("points must have shape (N, num_vars)")
        out = np.zeros(points.shape[0])
        for exps, c in self.terms.items():
            term = np.full(points.shape[0], c)
            for j, e in enumerate(exps):
                if e:
                    term = term * points[:, j] ** e
            out += term
        return out


# -- module-level arithmetic (named per the public API) ----------------------


def add(p: Polynomial, q: Polynomial) -> Polynomial:
    return p + q


def mul(p: Polynomial, q: Polynomial) -> Polynomial:
    return p * q


def scale(p: Polynomial, c: float) -> Polynomial:
    return p * c


def substitute(p: Polynomial, var_index: int, q: Polynomial) -> Polynomial:
    """Substitute polynomial q (same ring) for variable var_index (0-based)."""
    if p.num_vars != q.num_vars:
        raise ValueError("ring mismatch in substitute")
    if not 0 <= var_index < p.num_vars:
        raise ValueError("variable index out of range")
    out = Polynomial.zero(p.num_vars)
    for exps, c in p.terms.items():
        rest = list(exps)
        power = rest[var_index]
        rest[var_index] = 0
        term = Polynomial(p.num_vars, {tuple(rest): c})
        out = out + term * (q ** power)
    return out


# -- textual serialization ----------------------------------------------------

_TERM_RE = re.compile(r"^\s*([+-]?[0-9.eE+-]+)((?:\*x[0-9]+(?:\^[0-9]+)?)*)\s*$")
_VAR_RE = re.compile(r"x([0-9]+)(?:\^([0-9]+))?")


def poly_to_string(p: Polynomial) -> str:
    """Canonical text form ``c*x1^a*x2^b + ...``.

    Terms appear highest degree first (reverse graded-lex); coefficients use
    repr so the round trip through ``poly_from_string`` is exact.  Variables
    are 1-based in the text form.
    """
    if not p.terms:
        return "0"
    def sort_key(exps):
        return (sum(exps), exps)
    parts = []
    for exps in sorted(p.terms, key=sort_key, reverse=True):
        c = p.terms[exps]
        factors = [repr(c)]
        for i, e in enumerate(exps):
            if e == 1:
                factors.append(f"x{i + 1}")
            elif e > 1:
                factors.append(f"x{i + 1}^{e}")
        parts.append("*".join(factors))
    return " + ".join(parts)


def poly_from_string(text: str, num_vars: int) -> Polynomial:
    """Parse the output of ``poly_to_string`` back into a Polynomial."""
    text = text.strip()
    if text == "0":
        return Polynomial.zero(num_vars)
    terms: Dict[Exponents, float] = {}
    for chunk in text.split(" + "):
        m = _TERM_RE.match(chunk)
        if not m:
            raise ValueError(f"cannot parse term {chunk!r}")
        coef = float(m.group(1))
        exps = [0] * num_vars
        for vm in _VAR_RE.finditer(m.group(2)):
            idx = int(vm.group(1)) - 1
            if not 0 <= idx < num_vars:
                raise ValueError(f"variable x{idx + 1} out of range in {chunk!r}")
            exps[idx] += int(vm.group(2) or 1)
        key = tuple(exps)
        terms[key] = terms.get(key, 0.0) + coef
    return Polynomial(num_vars, terms)


# -- truncated moment sequences ------------------------------------------------


class TruncatedMomentSequence:
    """Pseudo-moment values y_alpha for every |alpha| <= degree.

    The map must be total on the degree-bounded monomial set; construction
    checks this.  ``from_point`` builds the sequence of an atomic measure at a
    single point u, i.e. y_alpha = u^alpha.
    """

    __slots__ = ("num_vars", "degree", "values")

    def __init__(self, num_vars: int, degree: int, values: Mapping[Exponents, float]):
        required = monomial_basis(num_vars, degree)
        vals: Dict[Exponents, float] = {}
        for mono in required:
            if mono.exponents not in values:
                raise ValueError(f"moment sequence missing value for {mono.exponents}")
            vals[mono.exponents] = float(values[mono.exponents])
        extra = set(values) - set(vals)
        if extra:
            raise ValueError(f"moment values beyond degree {degree}: {sorted(extra)[:3]}")
        object.__setattr__(self, "num_vars", num_vars)
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "values", vals)

    def __setattr__(self, name, value):
        raise AttributeError("TruncatedMomentSequence is immutable")

    @classmethod
    def from_point(cls, point: Sequence[float], degree: int) -> "TruncatedMomentSequence":
        point = [float(x) for x in point]
        n = len(point)
        values = {m.exponents: m.evaluate(point) for m in monomial_basis(n, degree)}
        return cls(n, degree, values)

    @classmethod
    def from_vector(cls, num_vars: int, degree: int, vec: Sequence[float]) -> "TruncatedMomentSequence":
        basis = monomial_basis(num_vars, degree)
        if len(vec) != len(basis):
            raise ValueError("vector length does not match basis size")
        return cls(num_vars, degree, {m.exponents: v for m, v in zip(basis, vec)})

    def value(self, mono: Monomial | Exponents) -> float:
        exps = mono.exponents if isinstance(mono, Monomial) else tuple(mono)
        try:
            return self.values[exps]
        except KeyError:
            raise ValueError(f"degree overflow: no moment stored for {exps}") from None


def riesz(y: TruncatedMomentSequence, p: Polynomial) -> float:
    """Riesz functional: sum of p_alpha * y_alpha over the terms of p."""
    if p.num_vars != y.num_vars:
        raise ValueError("ring mismatch between polynomial and moment sequence")
    if p.degree > y.degree:
        raise ValueError(f"degree overflow: deg(p)={p.degree} > {y.degree}")
    return sum(c * y.values[exps] for exps, c in p.terms.items())


def moment_matrix(y: TruncatedMomentSequence, ell: int) -> np.ndarray:
    """The order-ell moment matrix M[i,j] = y_{alpha_i + alpha_j}."""
    if 2 * ell > y.degree:
        raise ValueError(f"degree overflow: 2*{ell} > {y.degree}")
    basis = monomial_basis(y.num_vars, ell)
    d = len(basis)
    M = np.empty((d, d))
    for i in range(d):
        for j in range(i, d):
            v = y.value(basis[i] * basis[j])
            M[i, j] = v
            M[j, i] = v
    return M


def localizing_basis_degree(ell: int, g_degree: int) -> int:
    """Basis degree for the order-ell localizing matrix of a degree-g generator.

    For even generator degrees this is (2*ell - deg g)/2; an odd generator
    rounds down so the product g * [x]_d [x]_d^T stays within degree 2*ell.
    """
    if 2 * ell < g_degree:
        raise ValueError(f"2*ell = {2 * ell} < deg(g) = {g_degree}")
    return (2 * ell - g_degree) // 2


def localizing_matrix(y: TruncatedMomentSequence, g: Polynomial, ell: int) -> np.ndarray:
    """The order-ell localizing matrix of g: riesz applied to g*[x]_d [x]_d^T."""
    if g.num_vars != y.num_vars:
        raise ValueError("ring mismatch between generator and moment sequence")
    if 2 * ell > y.degree:
        raise ValueError(f"degree overflow: 2*{ell} > {y.degree}")
    d_basis = localizing_basis_degree(ell, g.degree)
    basis = monomial_basis(y.num_vars, d_basis)
    d = len(basis)
    L = np.empty((d, d))
    for i in range(d):
        for j in range(i, d):
            pair = basis[i] * basis[j]
            v = 0.0
            for exps, c in g.terms.items():
                v += c * y.value(Monomial(exps) * pair)
            L[i, j] = v
            L[j, i] = v
    return L
