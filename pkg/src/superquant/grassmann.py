"""Exact complex Grassmann algebra on k pairs of anticommuting generators.

The 2k generator slots are numbered 1..2k.  Slots 1..k hold the holomorphic
generators (printed ``zeta1..zetak``, alias ``xi1..xik``), slots k+1..2k the
conjugate partners (printed ``zbar1..zbark``, alias ``eta1..etak``).
Coefficients are Gaussian rationals, so every identity built on top of this
module is checked exactly, never up to rounding.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

KERNEL_PAIR_LIMIT = 6


class DimensionError(ValueError):
    """Operands live over different generator counts."""


class ResourceError(RuntimeError):
    """Exhaustive computation exceeds the configured generator bound."""


class GrassmannParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (offset {position})")
        self.position = position


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)  # floats are binary rationals, conversion is exact
    raise TypeError(f"cannot coerce {type(x).__name__} to an exact rational")


@dataclass(frozen=True)
class ExactComplex:
    """Complex number with exact rational real and imaginary parts."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    @staticmethod
    def of(x) -> "ExactComplex":
        if isinstance(x, ExactComplex):
            return x
        if isinstance(x, complex):
            return ExactComplex(_as_fraction(x.real), _as_fraction(x.imag))
        return ExactComplex(_as_fraction(x))

    @staticmethod
    def i() -> "ExactComplex":
        return ExactComplex(Fraction(0), Fraction(1))

    def __add__(self, other) -> "ExactComplex":
        if not isinstance(other, (ExactComplex, int, float, complex, Fraction)):
            return NotImplemented
        o = ExactComplex.of(other)
        return ExactComplex(self.re + o.re, self.im + o.im)

    def __sub__(self, other) -> "ExactComplex":
        if not isinstance(other, (ExactComplex, int, float, complex, Fraction)):
            return NotImplemented
        o = ExactComplex.of(other)
        return ExactComplex(self.re - o.re, self.im - o.im)

    def __mul__(self, other) -> "ExactComplex":
        if not isinstance(other, (ExactComplex, int, float, complex, Fraction)):
            return NotImplemented
        o = ExactComplex.of(other)
        return ExactComplex(self.re * o.re - self.im * o.im,
                            self.re * o.im + self.im * o.re)

    __radd__ = __add__
    __rmul__ = __mul__

    def __neg__(self) -> "ExactComplex":
        return ExactComplex(-self.re, -self.im)

    def conjugate(self) -> "ExactComplex":
        return ExactComplex(self.re, -self.im)

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __str__(self) -> str:
        if not self.im:
            return str(self.re)
        im = "i" if self.im == 1 else ("-i" if self.im == -1 else f"{self.im}*i")
        if not self.re:
            return im
        sign = "+" if self.im > 0 else "-"
        mag = abs(self.im)
        imtxt = "i" if mag == 1 else f"{mag}*i"
        return f"{self.re}{sign}{imtxt}"


EC_ZERO = ExactComplex()
EC_ONE = ExactComplex(Fraction(1))


class Parity(enum.Enum):
    EVEN = 0
    ODD = 1
    MIXED = 2

    def combine(self, other: "Parity") -> "Parity":
        if Parity.MIXED in (self, other):
            return Parity.MIXED
        return Parity((self.value + other.value) % 2)

    @property
    def sign(self) -> int:
        """+1 for even, -1 for odd."""
        if self is Parity.MIXED:
            raise ValueError("mixed parity carries no sign")
        return 1 if self is Parity.EVEN else -1


@dataclass(frozen=True)
class Blade:
    """Product of distinct generators, kept with strictly ascending slots."""

    indices: tuple[int, ...] = ()

    def __post_init__(self):
        idx = tuple(self.indices)
        object.__setattr__(self, "indices", idx)
        if any(i < 1 for i in idx):
            raise ValueError(f"generator slots are 1-based, got {idx}")
        if any(a >= b for a, b in zip(idx, idx[1:])):
            raise ValueError(f"blade slots must be strictly ascending, got {idx}")

    @staticmethod
    def unit() -> "Blade":
        return Blade(())

    @staticmethod
    def top(k: int) -> "Blade":
        return Blade(tuple(range(1, 2 * k + 1)))

    @property
    def degree(self) -> int:
        return len(self.indices)

    @property
    def parity(self) -> Parity:
        return Parity(self.degree % 2)


def blade_product(a: Blade, b: Blade) -> tuple[int, Blade] | None:
    """Multiply two blades; ``None`` when a generator repeats.

    The sign is (-1)**(number of inversions in the concatenation a+b),
    which realizes the anticommutation of the generators.
    """
    merged: list[int] = []
    inversions = 0
    i = j = 0
    ai, bi = a.indices, b.indices
    while i < len(ai) and j < len(bi):
        if ai[i] < bi[j]:
            merged.append(ai[i])
            i += 1
        elif ai[i] > bi[j]:
            merged.append(bi[j])
            # bi[j] jumps over every remaining entry of a
            inversions += len(ai) - i
            j += 1
        else:
            return None
    merged.extend(ai[i:])
    merged.extend(bi[j:])
    sign = -1 if inversions % 2 else 1
    return sign, Blade(tuple(merged))


class GrassmannElement:
    """Finite exact-coefficient combination of blades over 2k slots.

    Treat instances as immutable; all operations return new elements.
    """

    __slots__ = ("k", "_terms")

    def __init__(self, k: int, terms: Mapping[Blade, object] = ()):
        if k < 0:
            raise ValueError("generator pair count must be >= 0")
        self.k = k
        clean: dict[Blade, ExactComplex] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for blade, coeff in items:
            if blade.indices and blade.indices[-1] > 2 * k:
                raise DimensionError(
                    f"blade {blade.indices} does not fit in {2 * k} slots")
            c = clean.get(blade, EC_ZERO) + ExactComplex.of(coeff)
            if c:
                clean[blade] = c
            else:
                clean.pop(blade, None)
        self._terms = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, k: int) -> "GrassmannElement":
        return cls(k)

    @classmethod
    def scalar(cls, value, k: int) -> "GrassmannElement":
        return cls(k, {Blade.unit(): ExactComplex.of(value)})

    @classmethod
    def from_blade(cls, blade: Blade, k: int, coeff=1) -> "GrassmannElement":
        return cls(k, {blade: ExactComplex.of(coeff)})

    @classmethod
    def generator(cls, slot: int, k: int) -> "GrassmannElement":
        return cls.from_blade(Blade((slot,)), k)

    # -- views -------------------------------------------------------------

    @property
    def terms(self) -> dict[Blade, ExactComplex]:
        return dict(self._terms)

    def coefficient(self, blade: Blade) -> ExactComplex:
        return self._terms.get(blade, EC_ZERO)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GrassmannElement):
            return NotImplemented
        return self.k == other.k and self._terms == other._terms

    @property
    def parity(self) -> Parity:
        """EVEN/ODD when all blades share degree mod 2 (zero counts as even)."""
        degrees = {b.degree % 2 for b in self._terms}
        if len(degrees) > 1:
            return Parity.MIXED
        return Parity(degrees.pop()) if degrees else Parity.EVEN

    # -- algebra -----------------------------------------------------------

    def _check_same_k(self, other: "GrassmannElement") -> None:
        if self.k != other.k:
            raise DimensionError(
                f"mixing elements over {self.k} and {other.k} generator pairs")

    def __add__(self, other: "GrassmannElement") -> "GrassmannElement":
        self._check_same_k(other)
        terms = dict(self._terms)
        for blade, coeff in other._terms.items():
            c = terms.get(blade, EC_ZERO) + coeff
            if c:
                terms[blade] = c
            else:
                terms.pop(blade, None)
        return GrassmannElement(self.k, terms)

    def __sub__(self, other: "GrassmannElement") -> "GrassmannElement":
        return self + (-other)

    def __neg__(self) -> "GrassmannElement":
        return GrassmannElement(self.k, {b: -c for b, c in self._terms.items()})

    def __mul__(self, other) -> "GrassmannElement":
        if isinstance(other, GrassmannElement):
            self._check_same_k(other)
            acc: dict[Blade, ExactComplex] = {}
            for ba, ca in self._terms.items():
                for bb, cb in other._terms.items():
                    prod = blade_product(ba, bb)
                    if prod is None:
                        continue
                    sign, blade = prod
                    c = acc.get(blade, EC_ZERO) + ca * cb * sign
                    if c:
                        acc[blade] = c
                    else:
                        acc.pop(blade, None)
            return GrassmannElement(self.k, acc)
        scal = ExactComplex.of(other)
        return GrassmannElement(
            self.k, {b: c * scal for b, c in self._terms.items()})

    def __rmul__(self, other) -> "GrassmannElement":
        # scalars commute with everything
        return self * other

    def __repr__(self) -> str:
        return f"GrassmannElement(k={self.k}, {format_element(self)!r})"

    def __str__(self) -> str:
        return format_element(self)


def multiply(a: GrassmannElement, b: GrassmannElement) -> GrassmannElement:
    return a * b


def star(blade: Blade, k: int) -> GrassmannElement:
    """Complementary blade scaled so that blade * star(blade) = i**(deg mod 2) * top.

    The i-power is reduced mod 2, i.e. it is always 1 or i.
    """
    if blade.indices and blade.indices[-1] > 2 * k:
        raise DimensionError(f"blade {blade.indices} does not fit in {2 * k} slots")
    present = set(blade.indices)
    complement = Blade(tuple(s for s in range(1, 2 * k + 1) if s not in present))
    prod = blade_product(blade, complement)
    assert prod is not None  # complement is disjoint by construction
    sign, top = prod
    assert top == Blade.top(k)
    scale = ExactComplex.i() if blade.degree % 2 else EC_ONE
    return GrassmannElement.from_blade(complement, k, scale * sign)


def star_element(f: GrassmannElement) -> GrassmannElement:
    """Term-by-term star: conjugate each scalar, star each blade."""
    out = GrassmannElement.zero(f.k)
    for blade, coeff in f.terms.items():
        out = out + coeff.conjugate() * star(blade, f.k)
    return out


def berezin_top(f: GrassmannElement) -> ExactComplex:
    """Coefficient of the full top blade (zero when absent).

    The full integral over a supermanifold multiplies this by the base
    integral over the even coordinates; that part lives in `bergman`.
    """
    return f.coefficient(Blade.top(f.k))


def derivation(i: int, f: GrassmannElement) -> GrassmannElement:
    """Left odd derivation with respect to generator slot i.

    Kills blades lacking i, otherwise removes i with the Koszul sign
    (-1)**(number of indices before i in the blade).
    """
    if not 1 <= i <= 2 * f.k:
        raise IndexError(f"generator slot {i} out of range 1..{2 * f.k}")
    terms: dict[Blade, ExactComplex] = {}
    for blade, coeff in f.terms.items():
        if i not in blade.indices:
            continue
        pos = blade.indices.index(i)
        rest = Blade(blade.indices[:pos] + blade.indices[pos + 1:])
        sign = -1 if pos % 2 else 1
        c = terms.get(rest, EC_ZERO) + coeff * sign
        if c:
            terms[rest] = c
        else:
            terms.pop(rest, None)
    return GrassmannElement(f.k, terms)


def filtration_degree(f: GrassmannElement) -> int:
    """Largest blade degree present; -1 for the zero element."""
    if not f:
        return -1
    return max(b.degree for b in f.terms)


def _all_blades(slots: Sequence[int]) -> list[Blade]:
    """All blades over the given slots in (degree, lex) order."""
    blades: list[Blade] = [Blade(())]
    for s in slots:
        blades = blades + [Blade(tuple(sorted(b.indices + (s,)))) for b in blades]
    return sorted(blades, key=lambda b: (b.degree, b.indices))


def _exact_nullspace(rows: list[dict[int, Fraction]],
                     ncols: int) -> list[dict[int, Fraction]]:
    """Nullspace basis of a sparse rational matrix via Gaussian elimination."""
    pivots: dict[int, dict[int, Fraction]] = {}
    for raw in rows:
        row = dict(raw)
        while row:
            col = min(row)
            if col not in pivots:
                pivots[col] = row
                break
            piv = pivots[col]
            factor = row[col] / piv[col]
            for c, v in piv.items():
                nv = row.get(c, Fraction(0)) - factor * v
                if nv:
                    row[c] = nv
                else:
                    row.pop(c, None)
    basis: list[dict[int, Fraction]] = []
    for free_col in range(ncols):
        if free_col in pivots:
            continue
        vec = {free_col: Fraction(1)}
        for pc in sorted(pivots, reverse=True):
            piv = pivots[pc]
            s = sum((vec[c] * v for c, v in piv.items()
                     if c != pc and c in vec), Fraction(0))
            if s:
                vec[pc] = -s / piv[pc]
        basis.append(vec)
    return basis


def joint_derivation_kernel(k: int,
                            slots: Sequence[int] | None = None
                            ) -> list[GrassmannElement]:
    """Exact basis of the joint kernel of the derivations on the given slots.

    Defaults to all 2k slots over the full 2**(2k)-dimensional blade basis.
    Restricting ``slots`` confines both the blade basis and the derivations
    to the subalgebra generated by those slots.
    """
    if k > KERNEL_PAIR_LIMIT:
        raise ResourceError(
            f"kernel computation limited to k <= {KERNEL_PAIR_LIMIT}, got {k}")
    used = tuple(slots) if slots is not None else tuple(range(1, 2 * k + 1))
    blades = _all_blades(used)
    col = {b: j for j, b in enumerate(blades)}
    rows: list[dict[int, Fraction]] = []
    for i in used:
        # row per (i, target blade): sum of signed sources must vanish
        by_target: dict[Blade, dict[int, Fraction]] = {}
        for b in blades:
            if i not in b.indices:
                continue
            pos = b.indices.index(i)
            target = Blade(b.indices[:pos] + b.indices[pos + 1:])
            sign = Fraction(-1 if pos % 2 else 1)
            by_target.setdefault(target, {})[col[b]] = sign
        rows.extend(by_target.values())
    basis = []
    for vec in _exact_nullspace(rows, len(blades)):
        basis.append(GrassmannElement(
            k, {blades[j]: ExactComplex(v) for j, v in vec.items()}))
    return basis


# -- textual serialization -------------------------------------------------

_SLOT_RE = re.compile(r"(zeta|zbar|xi|eta)(\d+)")
_BLADE_RE = re.compile(r"(?:(?:zeta|zbar|xi|eta)\d+)+$|ztop$")
_TOKEN_RE = re.compile(r"\s*(?:(\d+(?:\.\d+)?)|([A-Za-z]\w*)|([+\-*/()]))")


def _slot_of(name: str, number: int, k: int, position: int) -> int:
    if not 1 <= number <= k:
        raise GrassmannParseError(
            f"generator {name}{number} out of range for k={k}", position)
    return number if name in ("zeta", "xi") else k + number


def format_element(f: GrassmannElement, style: str = "zeta") -> str:
    """Canonical text form, e.g. ``3/2*zeta1zbar2 + i``; parses back exactly."""
    if style not in ("zeta", "xi"):
        raise ValueError("style must be 'zeta' or 'xi'")
    lo, hi = ("zeta", "zbar") if style == "zeta" else ("xi", "eta")

    def blade_text(blade: Blade) -> str:
        return "".join(
            f"{lo}{s}" if s <= f.k else f"{hi}{s - f.k}" for s in blade.indices)

    def coeff_text(c: ExactComplex) -> str:
        if c.im and c.re:
            return f"({c})"
        return str(c)

    parts: list[str] = []
    ordered = sorted(f.terms.items(), key=lambda kv: (kv[0].degree, kv[0].indices))
    for blade, coeff in ordered:
        if not blade.indices:
            parts.append(coeff_text(coeff))
        elif coeff == EC_ONE:
            parts.append(blade_text(blade))
        elif coeff == -EC_ONE:
            parts.append(f"-{blade_text(blade)}")
        else:
            parts.append(f"{coeff_text(coeff)}*{blade_text(blade)}")
    if not parts:
        return "0"
    out = parts[0]
    for p in parts[1:]:
        out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
    return out


class _ElementParser:
    """Recursive-descent parser for the element grammar.

    element := ['-'] term (('+'|'-') term)*
    term    := factor ('*' factor)*
    factor  := NUMBER ['/' NUMBER] | 'i' | BLADE | 'ztop' | '(' element ')'
    """

    def __init__(self, text: str, k: int):
        self.text = text
        self.k = k
        self.pos = 0

    def error(self, message: str) -> GrassmannParseError:
        return GrassmannParseError(message, self.pos)

    def peek(self) -> tuple[str, str] | None:
        m = _TOKEN_RE.match(self.text, self.pos)
        if m is None:
            rest = self.text[self.pos:].strip()
            if rest:
                raise self.error(f"unexpected character {rest[0]!r}")
            return None
        if m.group(1):
            return "number", m.group(1)
        if m.group(2):
            return "name", m.group(2)
        return "op", m.group(3)

    def take(self) -> tuple[str, str] | None:
        tok = self.peek()
        if tok is not None:
            m = _TOKEN_RE.match(self.text, self.pos)
            self.pos = m.end()
        return tok

    def parse(self) -> GrassmannElement:
        el = self.element()
        if self.peek() is not None:
            raise self.error("trailing input")
        return el

    def element(self) -> GrassmannElement:
        negate = False
        tok = self.peek()
        if tok == ("op", "-"):
            self.take()
            negate = True
        acc = self.term()
        if negate:
            acc = -acc
        while True:
            tok = self.peek()
            if tok == ("op", "+"):
                self.take()
                acc = acc + self.term()
            elif tok == ("op", "-"):
                self.take()
                acc = acc - self.term()
            else:
                return acc

    def term(self) -> GrassmannElement:
        acc = self.factor()
        while self.peek() == ("op", "*"):
            self.take()
            acc = acc * self.factor()
        return acc

    def factor(self) -> GrassmannElement:
        tok = self.take()
        if tok is None:
            raise self.error("unexpected end of input")
        kind, text = tok
        if kind == "number":
            value = Fraction(text)
            if self.peek() == ("op", "/"):
                self.take()
                den = self.take()
                if den is None or den[0] != "number":
                    raise self.error("expected denominator")
                value = value / Fraction(den[1])
            return GrassmannElement.scalar(value, self.k)
        if kind == "name":
            if text == "i":
                return GrassmannElement.scalar(ExactComplex.i(), self.k)
            if text == "ztop":
                return GrassmannElement.from_blade(Blade.top(self.k), self.k)
            if _BLADE_RE.fullmatch(text):
                el = GrassmannElement.scalar(1, self.k)
                at = self.pos - len(text)
                for m in _SLOT_RE.finditer(text):
                    slot = _slot_of(m.group(1), int(m.group(2)), self.k, at)
                    el = el * GrassmannElement.generator(slot, self.k)
                return el
            raise self.error(f"unknown name {text!r}")
        if tok == ("op", "("):
            el = self.element()
            if self.take() != ("op", ")"):
                raise self.error("expected ')'")
            return el
        raise self.error(f"unexpected token {text!r}")


def parse_element(text: str, k: int) -> GrassmannElement:
    return _ElementParser(text, k).parse()
