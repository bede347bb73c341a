"""Sparse multivariate (Laurent) polynomials over exact rationals.

A monomial is a tuple of signed integer exponents, one slot per variable.
A polynomial is a finite map monomial -> Fraction with no explicit zero
entries.  Two ring modes exist: ``"poly"`` restricts exponents to be
nonnegative, ``"laurent"`` allows negative exponents.

The text grammar accepted by :func:`parse_polynomial`:

    expr   :=  ['-'] term (('+'|'-') term)*
    term   :=  factor (('*'|'/') factor)*
    factor :=  rational | name ['^' int]

Rationals are ``p`` or ``p/q`` in lowest or any terms; a ``/`` inside a
term must be followed by a rational (``z^2/2`` is half of z^2, ``x/y``
is rejected).  Adjacency like ``3x`` is tolerated and means ``3*x``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

Monomial = tuple[int, ...]


class PolyError(ValueError):
    """Malformed input or an operation outside the declared ring mode."""


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x + y for x, y in zip(a, b))


def _mono_div(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x - y for x, y in zip(a, b))


def _mono_divides(a: Monomial, b: Monomial) -> bool:
    """a | b in the ordinary (non-Laurent) sense."""
    return all(x <= y for x, y in zip(a, b))


class Polynomial:
    """Immutable-by-convention sparse polynomial over Fraction."""

    __slots__ = ("coeffs", "names", "mode")

    def __init__(self, coeffs: Mapping[Monomial, Fraction], names: tuple[str, ...],
                 mode: str = "poly"):
        if mode not in ("poly", "laurent"):
            raise PolyError(f"unknown ring mode {mode!r}")
        clean: dict[Monomial, Fraction] = {}
        for m, c in coeffs.items():
            c = Fraction(c)
            if c == 0:
                continue
            m = tuple(int(e) for e in m)
            if len(m) != len(names):
                raise PolyError("exponent tuple length does not match variable count")
            if mode == "poly" and any(e < 0 for e in m):
                raise PolyError(f"negative exponent {m} in polynomial mode")
            clean[m] = clean.get(m, Fraction(0)) + c
        self.coeffs = {m: c for m, c in clean.items() if c != 0}
        self.names = tuple(names)
        self.mode = mode

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, names: tuple[str, ...], mode: str = "poly") -> "Polynomial":
        return cls({}, names, mode)

    @classmethod
    def constant(cls, c, names: tuple[str, ...], mode: str = "poly") -> "Polynomial":
        z = tuple(0 for _ in names)
        return cls({z: Fraction(c)}, names, mode)

    @classmethod
    def variable(cls, i: int, names: tuple[str, ...], mode: str = "poly") -> "Polynomial":
        m = tuple(1 if j == i else 0 for j in range(len(names)))
        return cls({m: Fraction(1)}, names, mode)

    @classmethod
    def monomial(cls, m: Monomial, c, names: tuple[str, ...], mode: str = "poly") -> "Polynomial":
        return cls({tuple(m): Fraction(c)}, names, mode)

    # -- ring structure ----------------------------------------------------

    @property
    def nvars(self) -> int:
        return len(self.names)

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return all(all(e == 0 for e in m) for m in self.coeffs)

    def constant_term(self) -> Fraction:
        return self.coeffs.get(tuple(0 for _ in self.names), Fraction(0))

    def _like(self, coeffs) -> "Polynomial":
        return Polynomial(coeffs, self.names, self.mode)

    def _check_compat(self, other: "Polynomial") -> str:
        if self.names != other.names:
            raise PolyError("mixing polynomials over different variable tuples")
        return "laurent" if "laurent" in (self.mode, other.mode) else "poly"

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(other, self.names, self.mode)
        mode = self._check_compat(other)
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, Fraction(0)) + c
        return Polynomial(out, self.names, mode)

    def __radd__(self, other):
        return self.__add__(other)

    def __neg__(self):
        return self._like({m: -c for m, c in self.coeffs.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(other, self.names, self.mode)
        return self.__add__(other.__neg__())

    def __rsub__(self, other):
        return (self.__neg__()).__add__(other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = Fraction(other)
            return self._like({m: c * v for m, v in self.coeffs.items()})
        mode = self._check_compat(other)
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self.coeffs.items():
            for m2, c2 in other.coeffs.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, Fraction(0)) + c1 * c2
        return Polynomial(out, self.names, mode)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __pow__(self, k: int):
        if k < 0:
            raise PolyError("negative powers of polynomials are not defined; "
                            "use explicit Laurent monomials")
        out = Polynomial.constant(1, self.names, self.mode)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(other, self.names, self.mode)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.names == other.names and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.names, tuple(sorted(self.coeffs.items()))))

    # -- calculus ----------------------------------------------------------

    def diff(self, i: int) -> "Polynomial":
        """Partial derivative with respect to variable i."""
        out: dict[Monomial, Fraction] = {}
        for m, c in self.coeffs.items():
            e = m[i]
            if e == 0:
                continue
            mm = tuple(x - 1 if j == i else x for j, x in enumerate(m))
            out[mm] = out.get(mm, Fraction(0)) + c * e
        mode = self.mode if all(e >= 0 for mm in out for e in mm) or self.mode == "laurent" else "laurent"
        return Polynomial(out, self.names, mode)

    def theta(self, i: int) -> "Polynomial":
        """Logarithmic derivative z_i * d/dz_i (exponent-preserving)."""
        return self._like({m: c * m[i] for m, c in self.coeffs.items() if m[i] != 0})

    def gradient(self) -> list["Polynomial"]:
        return [self.diff(i) for i in range(self.nvars)]

    def total_degree(self) -> int:
        if not self.coeffs:
            return 0
        return max(sum(m) for m in self.coeffs)

    def weighted_degrees(self, weights: "WeightSystem") -> set[Fraction]:
        return {sum(Fraction(e) * q for e, q in zip(m, weights.q)) for m in self.coeffs}

    def support(self) -> list[Monomial]:
        return sorted(self.coeffs)

    def eval_complex(self, point) -> complex:
        """Evaluate at a tuple of complex numbers (Laurent-safe off the axes)."""
        total = 0j
        for m, c in self.coeffs.items():
            term = complex(c)
            for z, e in zip(point, m):
                if e:
                    term *= z ** e
            total += term
        return total

    def subs(self, values: list["Polynomial"]) -> "Polynomial":
        """Substitute a polynomial for each variable (polynomial mode only)."""
        if self.mode != "poly":
            raise PolyError("substitution requires polynomial mode")
        names = values[0].names
        out = Polynomial.zero(names, values[0].mode)
        for m, c in self.coeffs.items():
            term = Polynomial.constant(c, names, values[0].mode)
            for v, e in zip(values, m):
                if e:
                    term = term * v ** e
            out = out + term
        return out

    # -- printing ----------------------------------------------------------

    def _mono_str(self, m: Monomial) -> str:
        parts = []
        for name, e in zip(self.names, m):
            if e == 0:
                continue
            parts.append(name if e == 1 else f"{name}^{e}")
        return "*".join(parts)

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        def key(item):
            m, _ = item
            return (-sum(m), tuple(-e for e in m))
        chunks = []
        for m, c in sorted(self.coeffs.items(), key=key):
            ms = self._mono_str(m)
            if not ms:
                body = str(c if c > 0 else -c)
            else:
                a = c if c > 0 else -c
                body = ms if a == 1 else f"{a}*{ms}"
            if not chunks:
                chunks.append(body if c > 0 else f"-{body}")
            else:
                chunks.append(f"+ {body}" if c > 0 else f"- {body}")
        return " ".join(chunks)

    def __repr__(self) -> str:
        return f"Polynomial({self}, names={self.names}, mode={self.mode})"


# -- parsing ---------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[\^*/+-]))")


def _tokenize(text: str) -> list[tuple[str, str]]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            tail = text[pos:].strip()
            if not tail:
                break
            raise PolyError(f"unexpected character at {tail[:10]!r}")
        pos = m.end()
        for kind in ("num", "name", "op"):
            val = m.group(kind)
            if val is not None:
                toks.append((kind, val))
                break
    return toks


def parse_polynomial(text: str, names: Iterable[str] | None = None,
                     laurent: bool = False) -> Polynomial:
    """Parse the grammar above into a Polynomial.

    When ``names`` is None the variables are inferred in order of first
    appearance.  Unknown variables are an error when ``names`` is given.
    """
    toks = _tokenize(text)
    if not toks:
        raise PolyError("empty polynomial text")
    mode = "laurent" if laurent else "poly"
    inferred: list[str] = []
    fixed = None if names is None else tuple(names)

    def var_index(nm: str) -> int:
        if fixed is not None:
            try:
                return fixed.index(nm)
            except ValueError:
                raise PolyError(f"unknown variable {nm!r}; declared: {fixed}") from None
        if nm not in inferred:
            inferred.append(nm)
        return inferred.index(nm)

    # first pass when inferring: collect all names so exponent tuples have final width
    if fixed is None:
        for kind, val in toks:
            if kind == "name":
                var_index(val)
    final_names = fixed if fixed is not None else tuple(inferred)
    if not final_names:
        final_names = ("z",)
    nv = len(final_names)

    terms: list[tuple[Fraction, list[int]]] = []
    i = 0

    def parse_factor(idx, coeff, expo, dividing):
        kind, val = toks[idx]
        if kind == "num":
            num = int(val)
            # a '/' directly after a number inside a term is a rational
            if idx + 1 < len(toks) and toks[idx + 1] == ("op", "/") and \
               idx + 2 < len(toks) and toks[idx + 2][0] == "num":
                den = int(toks[idx + 2][1])
                if den == 0:
                    raise PolyError("zero denominator in rational")
                value = Fraction(num, den)
                idx += 3
            else:
                value = Fraction(num)
                idx += 1
            coeff = coeff / value if dividing else coeff * value
            return idx, coeff, expo
        if kind == "name":
            if dividing:
                raise PolyError("division by a variable is not part of the grammar")
            j = var_index(val)
            e = 1
            idx += 1
            if idx < len(toks) and toks[idx] == ("op", "^"):
                idx += 1
                sign = 1
                if idx < len(toks) and toks[idx] == ("op", "-"):
                    sign = -1
                    idx += 1
                if idx >= len(toks) or toks[idx][0] != "num":
                    raise PolyError("expected integer exponent after '^'")
                e = sign * int(toks[idx][1])
                idx += 1
            if e < 0 and mode == "poly":
                raise PolyError(f"negative exponent on {val!r} requires laurent mode")
            expo = list(expo)
            expo[j] += e
            return idx, coeff, expo
        raise PolyError(f"unexpected token {val!r}")

    sign = Fraction(1)
    expect_term = True
    coeff = Fraction(1)
    expo = [0] * nv
    started = False

    def flush():
        nonlocal coeff, expo, started, sign
        if started:
            terms.append((sign * coeff, expo))
        coeff = Fraction(1)
        expo = [0] * nv
        started = False

    while i < len(toks):
        kind, val = toks[i]
        if kind == "op" and val in "+-" and not expect_term:
            flush()
            sign = Fraction(1 if val == "+" else -1)
            expect_term = True
            i += 1
            continue
        if kind == "op" and val == "-" and expect_term:
            sign = -sign
            i += 1
            continue
        if kind == "op" and val in "*/":
            if not started:
                raise PolyError(f"term begins with {val!r}")
            i2, coeff, expo = parse_factor(i + 1, coeff, expo, dividing=(val == "/"))
            i = i2
            continue
        if kind in ("num", "name"):
            i, coeff, expo = parse_factor(i, coeff, expo, dividing=False)
            started = True
            expect_term = False
            continue
        raise PolyError(f"unexpected token {val!r}")
    if expect_term and not started:
        raise PolyError("dangling sign with no term")
    flush()

    out: dict[Monomial, Fraction] = {}
    for c, e in terms:
        m = tuple(e)
        out[m] = out.get(m, Fraction(0)) + c
    return Polynomial(out, final_names, mode)


# -- quasi-homogeneous weights ----------------------------------------------

@dataclass(frozen=True)
class WeightSystem:
    """Rational weights q with 0 < q_i < 1, one per variable."""
    q: tuple[Fraction, ...]

    def __post_init__(self):
        for qi in self.q:
            if not (0 < qi < 1):
                raise PolyError(f"weight {qi} outside (0,1)")

    def degree(self, m: Monomial) -> Fraction:
        return sum(Fraction(e) * q for e, q in zip(m, self.q))


def infer_weights(f: Polynomial) -> WeightSystem | None:
    """Solve <alpha, q> = 1 over all monomials alpha of f.

    Returns the unique solution with every q_i in (0,1), or None when the
    linear system is inconsistent, underdetermined, or lands outside that
    range.  Exact Gaussian elimination over Fraction.
    """
    rows = [list(map(Fraction, m)) + [Fraction(1)] for m in f.coeffs]
    if not rows:
        return None
    n = f.nvars
    # eliminate
    pivots = []
    r = 0
    for col in range(n):
        piv = None
        for k in range(r, len(rows)):
            if rows[k][col] != 0:
                piv = k
                break
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        pr = rows[r]
        inv = Fraction(1) / pr[col]
        rows[r] = [x * inv for x in pr]
        for k in range(len(rows)):
            if k != r and rows[k][col] != 0:
                fac = rows[k][col]
                rows[k] = [a - fac * b for a, b in zip(rows[k], rows[r])]
        pivots.append(col)
        r += 1
    # inconsistency: zero row with nonzero rhs
    for row in rows[r:]:
        if any(x != 0 for x in row[:-1]):
            continue
        if row[-1] != 0:
            return None
    if len(pivots) < n:
        return None  # not unique
    q = [Fraction(0)] * n
    for i, col in enumerate(pivots):
        q[col] = rows[i][-1]
    try:
        return WeightSystem(tuple(q))
    except PolyError:
        return None


def hessian_det(f: Polynomial) -> Polynomial:
    """Determinant of the matrix of second partials, by cofactor expansion."""
    n = f.nvars
    H = [[f.diff(i).diff(j) for j in range(n)] for i in range(n)]

    def det(rows, cols):
        if len(rows) == 1:
            return H[rows[0]][cols[0]]
        total = Polynomial.zero(f.names, f.mode)
        r0 = rows[0]
        for k, c in enumerate(cols):
            minor = det(rows[1:], cols[:k] + cols[k + 1:])
            term = H[r0][c] * minor
            total = total + (term if k % 2 == 0 else -term)
        return total

    return det(list(range(n)), list(range(n)))
