"""Exact arithmetic over Q(i): scalars, multivariate polynomials and matrices.

Everything here is immutable after construction.  Polynomials are stored as a
dense map from exponent vectors to nonzero coefficients over a fixed, ordered
variable universe; two polynomials over the same universe are equal iff their
term maps are equal.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

__all__ = [
    "GaussianRational",
    "Polynomial",
    "ExactMatrix",
    "VariableMismatchError",
    "UnboundVariableError",
    "conj",
    "poly_mul",
    "poly_eval",
    "jacobian_at",
    "hessian_at",
    "rank",
    "nullspace",
    "quad_form_rank",
    "check_certificate",
    "laurent_substitute",
]

RationalLike = Union[int, Fraction]
Scalar = Union["GaussianRational", int, Fraction]


class VariableMismatchError(ValueError):
    """Two polynomials live over different variable universes."""


class UnboundVariableError(KeyError):
    """Evaluation was asked for a variable that has no binding."""


class GaussianRational:
    """An element ``re + im*i`` of Q(i) with exact rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re: RationalLike | str = 0, im: RationalLike = 0):
        if isinstance(re, str):
            parsed = GaussianRational.parse(re)
            re, im = parsed.re, parsed.im
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    @staticmethod
    def coerce(x: Scalar) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, (int, Fraction)):
            return GaussianRational(x)
        if isinstance(x, complex):
            raise TypeError("floating-point complex values are not exact")
        raise TypeError(f"cannot coerce {type(x).__name__} to GaussianRational")

    _PATTERN = re.compile(
        r"^\s*(?P<re>[+-]?\d+(?:/\d+)?)"
        r"(?:(?P<im>[+-]\d+(?:/\d+)?)\*i)?\s*$"
    )
    _PURE_IM = re.compile(r"^\s*(?P<im>[+-]?\d+(?:/\d+)?)\*i\s*$")

    @classmethod
    def parse(cls, text: str) -> "GaussianRational":
        """Parse ``p/q``, ``p``, ``p/q+r/s*i`` or ``r/s*i``."""
        m = cls._PATTERN.match(text)
        if m:
            im = Fraction(m.group("im")) if m.group("im") else Fraction(0)
            return cls(Fraction(m.group("re")), im)
        m = cls._PURE_IM.match(text)
        if m:
            return cls(0, Fraction(m.group("im")))
        raise ValueError(f"not a Gaussian rational: {text!r}")

    def __str__(self) -> str:
        if self.im == 0:
            return str(self.re)
        sign = "+" if self.im >= 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}*i"

    def __repr__(self) -> str:
        return f"GaussianRational({self})"

    def is_real(self) -> bool:
        return self.im == 0

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __bool__(self) -> bool:
        return not self.is_zero()

    def conj(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def norm(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __eq__(self, other) -> bool:
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        return NotImplemented

    def __hash__(self) -> int:
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __neg__(self) -> "GaussianRational":
        return GaussianRational(-self.re, -self.im)

    def __add__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(
            self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(i)")
        num = self * o.conj()
        return GaussianRational(num.re / n, num.im / n)

    def __rtruediv__(self, other):
        return GaussianRational.coerce(other) / self

    def __pow__(self, k: int) -> "GaussianRational":
        if k < 0:
            return (GaussianRational(1) / self) ** (-k)
        result = GaussianRational(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result


ZERO = GaussianRational(0)
ONE = GaussianRational(1)


def conj(q: Scalar) -> GaussianRational:
    """Complex conjugate; fixes Q and is an involutive field automorphism."""
    return GaussianRational.coerce(q).conj()


Exponent = tuple[int, ...]


class Polynomial:
    """Multivariate polynomial with Gaussian-rational coefficients.

    ``variables`` fixes the order of exponent vectors.  ``terms`` never holds a
    zero coefficient.
    """

    __slots__ = ("variables", "terms", "_hash")

    def __init__(self, variables: Sequence[str], terms: Mapping[Exponent, Scalar] | None = None):
        self.variables = tuple(variables)
        if len(set(self.variables)) != len(self.variables):
            raise ValueError(f"duplicate variable names in {self.variables}")
        n = len(self.variables)
        clean: dict[Exponent, GaussianRational] = {}
        for exp, c in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != n or any(e < 0 for e in exp):
                raise ValueError(f"bad exponent vector {exp} for {n} variables")
            c = GaussianRational.coerce(c)
            if not c.is_zero():
                clean[exp] = c
        self.terms = clean
        self._hash = None

    # construction helpers
    @classmethod
    def zero(cls, variables: Sequence[str]) -> "Polynomial":
        return cls(variables)

    @classmethod
    def const(cls, c: Scalar, variables: Sequence[str]) -> "Polynomial":
        return cls(variables, {(0,) * len(tuple(variables)): c})

    @classmethod
    def var(cls, name: str, variables: Sequence[str]) -> "Polynomial":
        variables = tuple(variables)
        exp = tuple(1 if v == name else 0 for v in variables)
        if sum(exp) != 1:
            raise UnboundVariableError(name)
        return cls(variables, {exp: 1})

    @classmethod
    def monomial(cls, c: Scalar, exps: Mapping[str, int], variables: Sequence[str]) -> "Polynomial":
        variables = tuple(variables)
        unknown = set(exps) - set(variables)
        if unknown:
            raise UnboundVariableError(", ".join(sorted(unknown)))
        return cls(variables, {tuple(exps.get(v, 0) for v in variables): c})

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.variables != self.variables:
                raise VariableMismatchError(
                    f"variable universes differ: {self.variables} vs {other.variables}"
                )
            return other
        return Polynomial.const(GaussianRational.coerce(other), self.variables)

    # arithmetic
    def __add__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        out = dict(self.terms)
        for e, c in o.terms.items():
            out[e] = out.get(e, ZERO) + c
        return Polynomial(self.variables, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        out: dict[Exponent, GaussianRational] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in o.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, ZERO) + c1 * c2
        return Polynomial(self.variables, out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Polynomial":
        if k < 0:
            raise ValueError("negative powers are not polynomials")
        result = Polynomial.const(1, self.variables)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            return self.variables == other.variables and self.terms == other.terms
        if isinstance(other, (int, Fraction, GaussianRational)):
            return self == Polynomial.const(other, self.variables)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.variables, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    # structure
    def sorted_terms(self) -> list[tuple[Exponent, GaussianRational]]:
        """Terms in descending graded-lexicographic order."""
        return sorted(self.terms.items(), key=lambda t: (sum(t[0]), t[0]), reverse=True)

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def degree_in(self, names: Iterable[str]) -> int:
        idx = [self.variables.index(n) for n in names]
        return max((sum(e[i] for i in idx) for e in self.terms), default=-1)

    def is_homogeneous(self, degree: int | None = None) -> bool:
        degs = {sum(e) for e in self.terms}
        if degree is not None:
            return degs <= {degree}
        return len(degs) <= 1

    def coefficient(self, exps: Mapping[str, int]) -> GaussianRational:
        key = tuple(exps.get(v, 0) for v in self.variables)
        return self.terms.get(key, ZERO)

    def conj(self) -> "Polynomial":
        """Conjugate every coefficient (variables untouched)."""
        return Polynomial(self.variables, {e: c.conj() for e, c in self.terms.items()})

    def permute(self, mapping: Mapping[str, str]) -> "Polynomial":
        """Rename variables by a permutation of the universe (x -> mapping[x])."""
        perm = [self.variables.index(mapping.get(v, v)) for v in self.variables]
        if sorted(perm) != list(range(len(perm))):
            raise ValueError("mapping is not a permutation of the variables")
        out = {}
        for e, c in self.terms.items():
            ne = [0] * len(e)
            for i, k in enumerate(e):
                ne[perm[i]] += k
            out[tuple(ne)] = c
        return Polynomial(self.variables, out)

    def derivative(self, name: str) -> "Polynomial":
        try:
            i = self.variables.index(name)
        except ValueError:
            raise UnboundVariableError(name) from None
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                ne = list(e)
                ne[i] -= 1
                out[tuple(ne)] = c * e[i]
        return Polynomial(self.variables, out)

    def specialize(self, bindings: Mapping[str, Scalar]) -> "Polynomial":
        """Substitute values for some variables; the universe is kept."""
        idx = {self.variables.index(v): GaussianRational.coerce(x) for v, x in bindings.items()
               if v in self.variables}
        out: dict[Exponent, GaussianRational] = {}
        for e, c in self.terms.items():
            ne = list(e)
            for i, x in idx.items():
                if ne[i]:
                    c = c * x ** ne[i]
                    ne[i] = 0
            key = tuple(ne)
            out[key] = out.get(key, ZERO) + c
        return Polynomial(self.variables, out)

    def eval(self, bindings: Mapping[str, Scalar]) -> GaussianRational:
        used = {i for e in self.terms for i, k in enumerate(e) if k}
        missing = [v for i, v in enumerate(self.variables) if i in used and v not in bindings]
        if missing:
            raise UnboundVariableError(", ".join(missing))
        vals = [GaussianRational.coerce(bindings[v]) if v in bindings else ZERO
                for v in self.variables]
        total = ZERO
        for e, c in self.terms.items():
            term = c
            for x, k in zip(vals, e):
                if k:
                    term = term * x ** k
            total = total + term
        return total

    def homogeneous_part(self, degree: int) -> "Polynomial":
        return Polynomial(self.variables, {e: c for e, c in self.terms.items() if sum(e) == degree})

    def monomials(self) -> list[Exponent]:
        return [e for e, _ in self.sorted_terms()]

    # text format
    def to_text(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            factors = []
            for v, k in zip(self.variables, e):
                if k == 1:
                    factors.append(v)
                elif k > 1:
                    factors.append(f"{v}^{k}")
            parts.append(f"{c} * {' '.join(factors)}" if factors else str(c))
        return " + ".join(parts)

    __str__ = to_text

    def __repr__(self) -> str:
        return f"Polynomial({self.to_text()!r})"

    @classmethod
    def parse(cls, text: str, variables: Sequence[str]) -> "Polynomial":
        """Inverse of :meth:`to_text`; accepts ``v`` or ``v^k`` factors."""
        variables = tuple(variables)
        text = text.strip()
        if text == "0":
            return cls(variables)
        out: dict[Exponent, GaussianRational] = {}
        for chunk in text.split(" + "):
            coef_text, _, mono = chunk.partition(" * ")
            coef = GaussianRational.parse(coef_text)
            exp = [0] * len(variables)
            for factor in mono.split():
                name, _, power = factor.partition("^")
                if name not in variables:
                    raise UnboundVariableError(name)
                exp[variables.index(name)] += int(power) if power else 1
            key = tuple(exp)
            out[key] = out.get(key, ZERO) + coef
        return cls(variables, out)


def poly_mul(p: Polynomial, q: Polynomial) -> Polynomial:
    if p.variables != q.variables:
        raise VariableMismatchError(f"{p.variables} vs {q.variables}")
    return p * q


def poly_eval(p: Polynomial, bindings: Mapping[str, Scalar]) -> GaussianRational:
    return p.eval(bindings)


def laurent_substitute(
    p: Polynomial,
    images: Mapping[str, tuple[Scalar, Sequence[int]]],
) -> dict[tuple[int, ...], GaussianRational]:
    """Substitute a monomial ``c * s^a u^b ...`` for every variable of ``p``.

    ``images[v] = (c, (a, b, ...))``; exponents may be negative, so the result
    is a Laurent polynomial returned as a map exponent -> nonzero coefficient.
    An empty map means ``p`` vanishes identically on the monomial map.
    """
    missing = [v for v in p.variables if v not in images]
    if missing:
        raise UnboundVariableError(", ".join(missing))
    imgs = [(GaussianRational.coerce(images[v][0]), tuple(images[v][1])) for v in p.variables]
    width = len(imgs[0][1]) if imgs else 0
    out: dict[tuple[int, ...], GaussianRational] = {}
    for e, c in p.terms.items():
        coef = c
        exp = [0] * width
        for (ic, iexp), k in zip(imgs, e):
            if k:
                coef = coef * ic ** k
                for j in range(width):
                    exp[j] += iexp[j] * k
        if coef.is_zero():
            continue
        key = tuple(exp)
        out[key] = out.get(key, ZERO) + coef
    return {k: v for k, v in out.items() if not v.is_zero()}


# ---------------------------------------------------------------- matrices


class ExactMatrix:
    """Dense matrix over Q(i)."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries: Sequence[Sequence[Scalar]], cols: int | None = None):
        grid = tuple(tuple(GaussianRational.coerce(x) for x in row) for row in entries)
        self.rows = len(grid)
        if cols is None:
            cols = len(grid[0]) if grid else 0
        if any(len(r) != cols for r in grid):
            raise ValueError("ragged matrix")
        self.cols = cols
        self.entries = grid

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "ExactMatrix":
        return cls([[0] * cols for _ in range(rows)], cols)

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)], n)

    def __getitem__(self, ij: tuple[int, int]) -> GaussianRational:
        i, j = ij
        return self.entries[i][j]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return (self.rows, self.cols, self.entries) == (other.rows, other.cols, other.entries)

    def __hash__(self):
        return hash((self.rows, self.cols, self.entries))

    def __repr__(self) -> str:
        body = "; ".join(" ".join(str(x) for x in row) for row in self.entries)
        return f"ExactMatrix({self.rows}x{self.cols}: {body})"

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix([[self.entries[i][j] for i in range(self.rows)] for j in range(self.cols)],
                           self.rows)

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = ZERO
                for k in range(self.cols):
                    a = self.entries[i][k]
                    if a:
                        acc = acc + a * other.entries[k][j]
                row.append(acc)
            out.append(row)
        return ExactMatrix(out, other.cols)

    def __add__(self, other: "ExactMatrix") -> "ExactMatrix":
        return ExactMatrix([[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)],
                           self.cols)

    def scale(self, c: Scalar) -> "ExactMatrix":
        c = GaussianRational.coerce(c)
        return ExactMatrix([[c * a for a in row] for row in self.entries], self.cols)

    def column(self, j: int) -> tuple[GaussianRational, ...]:
        return tuple(row[j] for row in self.entries)

    def conj(self) -> "ExactMatrix":
        return ExactMatrix([[a.conj() for a in row] for row in self.entries], self.cols)


def _to_gaussian_integer_rows(m: ExactMatrix) -> list[list[tuple[int, int]]]:
    """Scale each row by the lcm of its denominators (rank is unchanged)."""
    out = []
    for row in m.entries:
        den = 1
        for x in row:
            den = math.lcm(den, x.re.denominator, x.im.denominator)
        out.append([(int(x.re * den), int(x.im * den)) for x in row])
    return out


def _gi_mul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _gi_exact_div(a, b):
    n = b[0] * b[0] + b[1] * b[1]
    re = a[0] * b[0] + a[1] * b[1]
    im = a[1] * b[0] - a[0] * b[1]
    assert re % n == 0 and im % n == 0, "Bareiss division must be exact"
    return (re // n, im // n)


def rank(m: ExactMatrix) -> int:
    """Exact rank by fraction-free (Bareiss) elimination over Z[i]."""
    a = _to_gaussian_integer_rows(m)
    rows, cols = m.rows, m.cols
    prev = (1, 0)
    r = 0
    for c in range(cols):
        if r == rows:
            break
        pivot = next((i for i in range(r, rows) if a[i][c] != (0, 0)), None)
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        p = a[r][c]
        for i in range(r + 1, rows):
            f = a[i][c]
            for j in range(c + 1, cols):
                t1 = _gi_mul(p, a[i][j])
                t2 = _gi_mul(f, a[r][j])
                a[i][j] = _gi_exact_div((t1[0] - t2[0], t1[1] - t2[1]), prev)
            a[i][c] = (0, 0)
        prev = p
        r += 1
    return r


def nullspace(m: ExactMatrix) -> list[tuple[GaussianRational, ...]]:
    """Basis of {v : m v = 0}, via reduced row echelon form over Q(i)."""
    a = [list(row) for row in m.entries]
    rows, cols = m.rows, m.cols
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        pivot = next((i for i in range(r, rows) if a[i][c]), None)
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        inv = ONE / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(rows):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for fcol in free:
        v = [ZERO] * cols
        v[fcol] = ONE
        for i, pc in enumerate(pivots):
            v[pc] = -a[i][fcol]
        basis.append(tuple(v))
    return basis


def jacobian_at(
    system: Sequence[Polynomial],
    point: Mapping[str, Scalar],
    variables: Sequence[str] | None = None,
) -> ExactMatrix:
    """Matrix of first partials (rows: equations, columns: ``variables``)."""
    if not system:
        return ExactMatrix([], 0)
    variables = tuple(variables) if variables is not None else system[0].variables
    return ExactMatrix([[g.derivative(v).eval(point) for v in variables] for g in system],
                       len(variables))


def hessian_at(p: Polynomial, point: Mapping[str, Scalar], variables: Sequence[str]) -> ExactMatrix:
    firsts = [p.derivative(v) for v in variables]
    return ExactMatrix([[d.derivative(w).eval(point) for w in variables] for d in firsts],
                       len(variables))


def quad_form_rank(q: Polynomial) -> int:
    """Rank of the symmetric Gram matrix of a quadratic form."""
    if q.is_zero():
        return 0
    if not q.is_homogeneous(2):
        raise ValueError("quad_form_rank needs a nonzero form homogeneous of degree 2")
    n = len(q.variables)
    gram = [[ZERO] * n for _ in range(n)]
    half = Fraction(1, 2)
    for e, c in q.terms.items():
        idx = [i for i, k in enumerate(e) for _ in range(k)]
        i, j = idx
        if i == j:
            gram[i][i] = gram[i][i] + c
        else:
            gram[i][j] = gram[i][j] + c * half
            gram[j][i] = gram[j][i] + c * half
    return rank(ExactMatrix(gram, n))


def check_certificate(
    target: Polynomial,
    combination: Sequence[tuple[Polynomial | Scalar, int]],
    generators: Sequence[Polynomial],
) -> bool:
    """True iff ``target == sum(mult * generators[idx - 1])`` exactly.

    Generator indices are 1-based (``g1`` is index 1).  A ``False`` result only
    means this particular certificate is invalid.
    """
    total = Polynomial.zero(target.variables)
    for mult, idx in combination:
        if not 1 <= idx <= len(generators):
            raise IndexError(f"generator index {idx} out of range 1..{len(generators)}")
        total = total + generators[idx - 1] * mult
    return total == target
