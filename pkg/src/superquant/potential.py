"""Expression DSL and second-order forward-mode AD for convex potentials.

Grammar (infix, ``^`` binds tightest, unary minus allowed)::

    expr   := term (('+'|'-') term)*
    term   := unary (('*'|'/') unary)*
    unary  := '-' unary | power
    power  := atom ['^' ['-'] INTEGER]
    atom   := NUMBER | 'x'N | 'sqrt' '(' expr ')' | 'exp' '(' expr ')'
            | '(' expr ')'

Variables are ``x1 .. x{n+m}``.  Evaluation produces value, gradient and
Hessian in one forward sweep; the Hessian is symmetric entry-for-entry by
construction of the jet rules.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (offset {position})")
        self.position = position


class DomainError(ValueError):
    """Evaluation left the domain (sqrt of a nonpositive value, division by 0)."""


class EvaluationError(ValueError):
    """Evaluation produced a non-finite result."""


# -- AST --------------------------------------------------------------------

class Expr:
    __slots__ = ()


@dataclass(frozen=True)
class Const(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    index: int  # 1-based


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr


@dataclass(frozen=True)
class Sqrt(Expr):
    operand: Expr


@dataclass(frozen=True)
class Exp(Expr):
    operand: Expr


def max_variable(node: Expr) -> int:
    match node:
        case Const():
            return 0
        case Var(index=i):
            return i
        case Add(left=a, right=b) | Sub(left=a, right=b) | Mul(left=a, right=b) \
                | Div(left=a, right=b):
            return max(max_variable(a), max_variable(b))
        case Pow(base=a):
            return max_variable(a)
        case Neg(operand=a) | Sqrt(operand=a) | Exp(operand=a):
            return max_variable(a)
    raise TypeError(f"not an expression node: {node!r}")


# -- parser -----------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+\.\d*|\.\d+|\d+)|([A-Za-z_]\w*)|([-+*/^(),]))")
_VAR = re.compile(r"x(\d+)$")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str, at: int | None = None) -> ParseError:
        return ParseError(message, self.pos if at is None else at)

    def peek(self):
        m = _TOKEN.match(self.text, self.pos)
        if m is None:
            rest = self.text[self.pos:].strip()
            if rest:
                raise self.error(f"unexpected character {rest[0]!r}")
            return None
        kind = "number" if m.group(1) else ("name" if m.group(2) else "op")
        return kind, m.group(m.lastindex), m.end()

    def take(self):
        tok = self.peek()
        if tok is not None:
            self.pos = tok[2]
        return tok

    def expect_op(self, symbol: str):
        tok = self.take()
        if tok is None or tok[0] != "op" or tok[1] != symbol:
            raise self.error(f"expected {symbol!r}")

    def parse(self) -> Expr:
        node = self.expr()
        if self.peek() is not None:
            raise self.error("trailing input")
        return node

    def expr(self) -> Expr:
        node = self.term()
        while True:
            tok = self.peek()
            if tok is not None and tok[0] == "op" and tok[1] in "+-":
                self.take()
                rhs = self.term()
                node = Add(node, rhs) if tok[1] == "+" else Sub(node, rhs)
            else:
                return node

    def term(self) -> Expr:
        node = self.unary()
        while True:
            tok = self.peek()
            if tok is not None and tok[0] == "op" and tok[1] in "*/":
                self.take()
                rhs = self.unary()
                node = Mul(node, rhs) if tok[1] == "*" else Div(node, rhs)
            else:
                return node

    def unary(self) -> Expr:
        tok = self.peek()
        if tok is not None and tok[0] == "op" and tok[1] == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        node = self.atom()
        tok = self.peek()
        if tok is not None and tok[0] == "op" and tok[1] == "^":
            self.take()
            negative = False
            tok = self.take()
            if tok is not None and tok[0] == "op" and tok[1] == "-":
                negative = True
                tok = self.take()
            if tok is None or tok[0] != "number" or "." in tok[1]:
                raise self.error("exponent must be an integer")
            exponent = int(tok[1])
            return Pow(node, -exponent if negative else exponent)
        return node

    def atom(self) -> Expr:
        tok = self.take()
        if tok is None:
            raise self.error("unexpected end of input")
        kind, text, _ = tok
        if kind == "number":
            return Const(float(text))
        if kind == "name":
            at = self.pos - len(text)
            m = _VAR.match(text)
            if m:
                index = int(m.group(1))
                if index < 1:
                    raise self.error("variables are numbered from x1", at)
                return Var(index)
            if text in ("sqrt", "exp"):
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Sqrt(arg) if text == "sqrt" else Exp(arg)
            raise self.error(f"unknown identifier {text!r}", at)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise self.error(f"unexpected token {text!r}")


def parse(text: str) -> Expr:
    return _Parser(text).parse()


# -- second-order jets ------------------------------------------------------

@dataclass
class Jet2:
    """Value, gradient and Hessian of a scalar function at a point."""

    value: float
    gradient: np.ndarray
    hessian: np.ndarray

    @property
    def dim(self) -> int:
        return self.gradient.shape[0]

    @staticmethod
    def constant(value: float, dim: int) -> "Jet2":
        return Jet2(float(value), np.zeros(dim), np.zeros((dim, dim)))

    @staticmethod
    def variable(value: float, index: int, dim: int) -> "Jet2":
        g = np.zeros(dim)
        g[index] = 1.0
        return Jet2(float(value), g, np.zeros((dim, dim)))

    def _coerce(self, other) -> "Jet2":
        if isinstance(other, Jet2):
            return other
        return Jet2.constant(other, self.dim)

    def __add__(self, other) -> "Jet2":
        o = self._coerce(other)
        return Jet2(self.value + o.value, self.gradient + o.gradient,
                    self.hessian + o.hessian)

    __radd__ = __add__

    def __sub__(self, other) -> "Jet2":
        o = self._coerce(other)
        return Jet2(self.value - o.value, self.gradient - o.gradient,
                    self.hessian - o.hessian)

    def __rsub__(self, other) -> "Jet2":
        return self._coerce(other) - self

    def __neg__(self) -> "Jet2":
        return Jet2(-self.value, -self.gradient, -self.hessian)

    def __mul__(self, other) -> "Jet2":
        o = self._coerce(other)
        cross = np.outer(self.gradient, o.gradient)
        return Jet2(self.value * o.value,
                    self.gradient * o.value + self.value * o.gradient,
                    self.hessian * o.value + self.value * o.hessian
                    + cross + cross.T)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet2":
        if self.value == 0.0:
            raise DomainError("division by zero")
        inv = 1.0 / self.value
        outer = np.outer(self.gradient, self.gradient)
        return Jet2(inv, -self.gradient * inv * inv,
                    2.0 * inv ** 3 * outer - inv * inv * self.hessian)

    def __truediv__(self, other) -> "Jet2":
        return self * self._coerce(other).reciprocal()

    def __rtruediv__(self, other) -> "Jet2":
        return self._coerce(other) * self.reciprocal()

    def __pow__(self, exponent: int) -> "Jet2":
        if not isinstance(exponent, int):
            raise TypeError("exponent must be an integer")
        if exponent < 0:
            return (self ** (-exponent)).reciprocal()
        if exponent == 0:
            return Jet2.constant(1.0, self.dim)
        v, g, h = self.value, self.gradient, self.hessian
        vp1 = v ** (exponent - 1)
        vp2 = v ** (exponent - 2) if exponent >= 2 else 0.0
        outer = np.outer(g, g)
        return Jet2(v ** exponent, exponent * vp1 * g,
                    exponent * (exponent - 1) * vp2 * outer
                    + exponent * vp1 * h)

    def sqrt(self) -> "Jet2":
        if self.value <= 0.0:
            raise DomainError(f"sqrt of nonpositive value {self.value}")
        s = math.sqrt(self.value)
        outer = np.outer(self.gradient, self.gradient)
        return Jet2(s, self.gradient / (2.0 * s),
                    self.hessian / (2.0 * s) - outer / (4.0 * s ** 3))

    def exp(self) -> "Jet2":
        e = math.exp(self.value)
        outer = np.outer(self.gradient, self.gradient)
        return Jet2(e, e * self.gradient, e * (outer + self.hessian))


def _eval_jet(node: Expr, leaves: list[Jet2], dim: int) -> Jet2:
    match node:
        case Const(value=v):
            return Jet2.constant(v, dim)
        case Var(index=i):
            return leaves[i - 1]
        case Add(left=a, right=b):
            return _eval_jet(a, leaves, dim) + _eval_jet(b, leaves, dim)
        case Sub(left=a, right=b):
            return _eval_jet(a, leaves, dim) - _eval_jet(b, leaves, dim)
        case Mul(left=a, right=b):
            return _eval_jet(a, leaves, dim) * _eval_jet(b, leaves, dim)
        case Div(left=a, right=b):
            return _eval_jet(a, leaves, dim) / _eval_jet(b, leaves, dim)
        case Pow(base=a, exponent=n):
            return _eval_jet(a, leaves, dim) ** n
        case Neg(operand=a):
            return -_eval_jet(a, leaves, dim)
        case Sqrt(operand=a):
            return _eval_jet(a, leaves, dim).sqrt()
        case Exp(operand=a):
            return _eval_jet(a, leaves, dim).exp()
    raise TypeError(f"not an expression node: {node!r}")


def _eval_array(node: Expr, columns: np.ndarray) -> np.ndarray:
    """Value-only evaluation over an array of points, columns shape (d, N)."""
    match node:
        case Const(value=v):
            return np.full(columns.shape[1], v)
        case Var(index=i):
            return columns[i - 1]
        case Add(left=a, right=b):
            return _eval_array(a, columns) + _eval_array(b, columns)
        case Sub(left=a, right=b):
            return _eval_array(a, columns) - _eval_array(b, columns)
        case Mul(left=a, right=b):
            return _eval_array(a, columns) * _eval_array(b, columns)
        case Div(left=a, right=b):
            return _eval_array(a, columns) / _eval_array(b, columns)
        case Pow(base=a, exponent=n):
            return _eval_array(a, columns) ** n
        case Neg(operand=a):
            return -_eval_array(a, columns)
        case Sqrt(operand=a):
            return np.sqrt(_eval_array(a, columns))
        case Exp(operand=a):
            return np.exp(_eval_array(a, columns))
    raise TypeError(f"not an expression node: {node!r}")


# -- convex potentials ------------------------------------------------------

@dataclass(frozen=True)
class ClosedFormCertificate:
    """Positive-definiteness established in closed form at construction."""

    reason: str

    kind = "closed-form"


@dataclass(frozen=True)
class GridCertificate:
    """Sampled certificate: min Hessian eigenvalue > tau on the whole grid."""

    box: tuple[tuple[float, float], ...]
    grid_density: int
    tau: float
    min_eigenvalue_seen: float

    kind = "grid-sampled"


@dataclass(frozen=True)
class ConvexityRefutation:
    """Witness point where the Hessian fails to clear tau."""

    point: tuple[float, ...]
    min_eigenvalue: float
    tau: float


Certificate = ClosedFormCertificate | GridCertificate


@dataclass(frozen=True)
class ConvexPotential:
    """Parsed potential on R^(n+m) plus its convexity certificate."""

    ast: Expr
    dims: tuple[int, int]  # (torus dims n, flat dims m)
    certificate: Certificate | None = None
    source: str | None = None

    def __post_init__(self):
        n, m = self.dims
        if n < 0 or m < 0:
            raise ValueError("dimensions must be nonnegative")
        if n + m < 1:
            raise ValueError("a potential needs at least one even variable")
        used = max_variable(self.ast)
        if used > n + m:
            raise ValueError(
                f"expression uses x{used} but only {n + m} variables exist")

    @property
    def dim(self) -> int:
        return self.dims[0] + self.dims[1]

    @property
    def is_certified(self) -> bool:
        return self.certificate is not None

    def with_certificate(self, certificate: Certificate) -> "ConvexPotential":
        return ConvexPotential(self.ast, self.dims, certificate, self.source)


def eval_jet2(potential: ConvexPotential, x: Sequence[float]) -> Jet2:
    """Value, gradient and Hessian at x by one forward-AD sweep."""
    pt = np.asarray(x, dtype=float)
    d = potential.dim
    if pt.shape != (d,):
        raise ValueError(f"expected a point of dimension {d}, got {pt.shape}")
    leaves = [Jet2.variable(pt[j], j, d) for j in range(d)]
    jet = _eval_jet(potential.ast, leaves, d)
    if not (math.isfinite(jet.value) and np.isfinite(jet.gradient).all()
            and np.isfinite(jet.hessian).all()):
        raise EvaluationError(f"non-finite result at {pt.tolist()}")
    return jet


def eval_values(potential: ConvexPotential, points: np.ndarray) -> np.ndarray:
    """Values only, vectorized; ``points`` has shape (dim, N).

    Out-of-domain samples surface as nan/inf for the caller to handle.
    """
    if points.ndim != 2 or points.shape[0] != potential.dim:
        raise ValueError(f"expected shape ({potential.dim}, N)")
    with np.errstate(all="ignore"):
        return _eval_array(potential.ast, points)


def certify_strict_convexity(potential: ConvexPotential,
                             box: Sequence[tuple[float, float]],
                             grid_density: int,
                             tau: float = 1e-8
                             ) -> GridCertificate | ConvexityRefutation:
    """Check min Hessian eigenvalue > tau on a sampled grid over the box.

    A sampled certificate, not a proof; the box, density and tau travel with
    the verdict.
    """
    box = tuple((float(lo), float(hi)) for lo, hi in box)
    if len(box) != potential.dim:
        raise ValueError("box dimension mismatch")
    if any(lo > hi for lo, hi in box):
        raise ValueError("box bounds must be ordered")
    axes = [np.linspace(lo, hi, grid_density) for lo, hi in box]
    worst = math.inf
    grids = np.meshgrid(*axes, indexing="ij") if axes else []
    points = np.stack([g.ravel() for g in grids])
    for idx in range(points.shape[1]):
        pt = points[:, idx]
        eigmin = float(np.linalg.eigvalsh(eval_jet2(potential, pt).hessian)[0])
        if eigmin <= tau:
            return ConvexityRefutation(tuple(pt.tolist()), eigmin, tau)
        worst = min(worst, eigmin)
    return GridCertificate(box, grid_density, tau, worst)


def quadratic_potential(dims: tuple[int, int] | int) -> ConvexPotential:
    """Sum of squares of all even variables; Hessian is constantly 2*I."""
    if isinstance(dims, int):
        dims = (dims, 0)
    d = dims[0] + dims[1]
    node: Expr = Pow(Var(1), 2)
    for j in range(2, d + 1):
        node = Add(node, Pow(Var(j), 2))
    return ConvexPotential(
        node, dims,
        ClosedFormCertificate("constant Hessian 2*I is positive definite"),
        source=" + ".join(f"x{j}^2" for j in range(1, d + 1)))


def tilted_hyperbolic_potential(shift: Sequence[float], eps: float,
                                dims: tuple[int, int] | None = None
                                ) -> ConvexPotential:
    """Sum of -shift_j*x_j + eps*sqrt(x_j^2+1); gradient image is the open
    cube of radius eps centered at -shift."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    shift = tuple(float(s) for s in shift)
    d = len(shift)
    if dims is None:
        dims = (d, 0)
    if dims[0] + dims[1] != d:
        raise ValueError("shift length must equal n+m")

    def summand(j: int) -> Expr:
        hyper = Mul(Const(eps), Sqrt(Add(Pow(Var(j), 2), Const(1.0))))
        return Sub(hyper, Mul(Const(shift[j - 1]), Var(j)))

    node: Expr = summand(1)
    for j in range(2, d + 1):
        node = Add(node, summand(j))
    return ConvexPotential(
        node, dims,
        ClosedFormCertificate(
            "diagonal Hessian entries eps*(x_j^2+1)^(-3/2) are positive"),
        source=" + ".join(
            f"-{shift[j - 1]}*x{j} + {eps}*sqrt(x{j}^2+1)" for j in range(1, d + 1)))


def gradient_oracle(potential: ConvexPotential,
                    step: float = 1e-5) -> Callable[[np.ndarray], np.ndarray]:
    """Central finite-difference gradient, independent of the AD sweep."""

    def grad(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for j in range(x.size):
            e = np.zeros_like(x)
            e[j] = step
            fp = eval_jet2(potential, x + e).value
            fm = eval_jet2(potential, x - e).value
            out[j] = (fp - fm) / (2.0 * step)
        return out

    return grad
