"""Weight functions phi: parsing, evaluation and derivatives.

Two variants share one interface.  ``PolynomialWeight`` keeps an exact term
map and differentiates symbolically; ``ExpressionWeight`` keeps a parsed tree
and differentiates by central differences with one Richardson level.

All evaluation methods are vectorized over an ``(N, n)`` array of points.
The module-level helpers ``evaluate``, ``gradient`` and ``laplacian`` also
accept a single point of shape ``(n,)``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Union

import numpy as np

MAX_TERMS = 10_000

# Richardson-extrapolated central differences.  The first-derivative step
# follows the cbrt(eps) rule; second differences need a larger step because
# their rounding error scales like eps/h^2.
FD_STEP_GRAD = np.finfo(float).eps ** (1.0 / 3.0)
FD_STEP_LAP = np.finfo(float).eps ** (1.0 / 6.0)


class WeightSyntaxError(ValueError):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class WeightDomainError(ArithmeticError):
    def __init__(self, message, point=None):
        if point is not None:
            message = f"{message} at x={np.asarray(point).tolist()}"
        super().__init__(message)
        self.point = point


# --------------------------------------------------------------------------
# expression tree

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    index: int  # 1-based, as written


@dataclass(frozen=True)
class Norm:
    pass


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


@dataclass(frozen=True)
class Func:
    name: str
    arg: "Node"


Node = Union[Num, Var, Norm, Neg, BinOp, Pow, Func]

FUNCTIONS = ("exp", "log", "sqrt")

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<norm>\|x\|)"
    r"|(?P<var>x\d+)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(source):
    tokens = []
    pos = 0
    while pos < len(source):
        if source[pos:].strip() == "":
            break
        match = _TOKEN.match(source, pos)
        if match is None:
            raise WeightSyntaxError(f"unexpected character {source[pos]!r}", pos)
        kind = match.lastgroup
        start = match.start(kind)
        tokens.append((kind, match.group(kind), start))
        pos = match.end()
    tokens.append(("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, source, n):
        self.tokens = _tokenize(source)
        self.i = 0
        self.n = n

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.take()
        if text != value:
            found = text or "end of input"
            raise WeightSyntaxError(f"expected {value!r}, found {found!r}", pos)

    def parse(self):
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise WeightSyntaxError(f"unexpected {text!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self):
        # unary minus is accepted as an extension of the grammar
        if self.peek()[1] == "-":
            self.take()
            return Neg(self.factor())
        base = self.base()
        if self.peek()[1] == "^":
            self.take()
            sign = 1
            if self.peek()[1] == "-":
                self.take()
                sign = -1
            kind, text, pos = self.take()
            if kind != "num" or not text.isdigit():
                raise WeightSyntaxError("exponent must be an integer", pos)
            return Pow(base, sign * int(text))
        return base

    def base(self):
        kind, text, pos = self.take()
        if kind == "num":
            return Num(float(text))
        if kind == "norm":
            return Norm()
        if kind == "var":
            index = int(text[1:])
            if index < 1 or index > self.n:
                raise WeightSyntaxError(
                    f"variable {text} exceeds dimension n={self.n}", pos)
            return Var(index)
        if kind == "name":
            if text not in FUNCTIONS:
                raise WeightSyntaxError(f"unknown identifier {text!r}", pos)
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            return Func(text, arg)
        if text == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise WeightSyntaxError(f"unexpected {text or 'end of input'!r}", pos)


def parse_tree(source, n):
    if n < 1:
        raise ValueError("dimension n must be >= 1")
    return _Parser(source, n).parse()


def pretty(node):
    """Fully parenthesized text form; ``parse_tree(pretty(t))`` returns ``t``."""
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, Var):
        return f"x{node.index}"
    if isinstance(node, Norm):
        return "|x|"
    if isinstance(node, Neg):
        return f"(-{pretty(node.arg)})"
    if isinstance(node, BinOp):
        return f"({pretty(node.left)} {node.op} {pretty(node.right)})"
    if isinstance(node, Pow):
        return f"({pretty(node.base)}^{node.exponent})"
    if isinstance(node, Func):
        return f"{node.name}({pretty(node.arg)})"
    raise TypeError(node)


def _domain_fail(message, mask, x):
    row = int(np.flatnonzero(np.broadcast_to(mask, x.shape[:1]))[0])
    raise WeightDomainError(message, x[row])


def eval_tree(node, x):
    """Evaluate a tree on points ``x`` of shape ``(N, n)``."""
    if isinstance(node, Num):
        return np.full(x.shape[0], node.value)
    if isinstance(node, Var):
        return x[:, node.index - 1].astype(float, copy=True)
    if isinstance(node, Norm):
        return np.sqrt(np.einsum("ij,ij->i", x, x))
    if isinstance(node, Neg):
        return -eval_tree(node.arg, x)
    if isinstance(node, BinOp):
        a = eval_tree(node.left, x)
        b = eval_tree(node.right, x)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if np.any(b == 0.0):
            _domain_fail("division by zero", b == 0.0, x)
        return a / b
    if isinstance(node, Pow):
        a = eval_tree(node.base, x)
        if node.exponent < 0 and np.any(a == 0.0):
            _domain_fail("negative power of zero", a == 0.0, x)
        return a ** float(node.exponent)
    if isinstance(node, Func):
        a = eval_tree(node.arg, x)
        if node.name == "exp":
            return np.exp(a)
        if node.name == "log":
            if np.any(a <= 0.0):
                _domain_fail("log of non-positive value", a <= 0.0, x)
            return np.log(a)
        if np.any(a < 0.0):
            _domain_fail("sqrt of negative value", a < 0.0, x)
        return np.sqrt(a)
    raise TypeError(node)


# --------------------------------------------------------------------------
# exact polynomial arithmetic on {exponent tuple: coefficient}

class _TooManyTerms(Exception):
    pass


def _clean(terms):
    return {k: v for k, v in terms.items() if v != 0.0}


def poly_add(a, b, sign=1.0):
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0.0) + sign * v
    return _clean(out)


def poly_mul(a, b):
    out = {}
    for ka, va in a.items():
        for kb, vb in b.items():
            k = tuple(i + j for i, j in zip(ka, kb))
            out[k] = out.get(k, 0.0) + va * vb
        if len(out) > MAX_TERMS:
            raise _TooManyTerms
    return _clean(out)


def poly_pow(a, e, n):
    out = {(0,) * n: 1.0}
    for _ in range(e):
        out = poly_mul(out, a)
    return out


def poly_diff(terms, j):
    out = {}
    for k, v in terms.items():
        if k[j] == 0:
            continue
        kk = k[:j] + (k[j] - 1,) + k[j + 1:]
        out[kk] = out.get(kk, 0.0) + v * k[j]
    return _clean(out)


def poly_degree(terms):
    return max((sum(k) for k in terms), default=0)


def _constant_of(terms, n):
    if not terms:
        return 0.0
    if set(terms) == {(0,) * n}:
        return terms[(0,) * n]
    return None


def to_polynomial(node, n):
    """Expand a tree into a term map, or return None if it is not polynomial."""
    try:
        return _expand(node, n)
    except _TooManyTerms:
        return None


def _expand(node, n):
    zero = (0,) * n
    if isinstance(node, Num):
        return _clean({zero: node.value})
    if isinstance(node, Var):
        k = [0] * n
        k[node.index - 1] = 1
        return {tuple(k): 1.0}
    if isinstance(node, Norm):
        return None
    if isinstance(node, Neg):
        a = _expand(node.arg, n)
        return None if a is None else {k: -v for k, v in a.items()}
    if isinstance(node, BinOp):
        a = _expand(node.left, n)
        b = _expand(node.right, n)
        if a is None or b is None:
            return None
        if node.op == "+":
            return poly_add(a, b)
        if node.op == "-":
            return poly_add(a, b, -1.0)
        if node.op == "*":
            return poly_mul(a, b)
        c = _constant_of(b, n)
        if c is None or c == 0.0:
            return None
        return _clean({k: v / c for k, v in a.items()})
    if isinstance(node, Pow):
        e = node.exponent
        if isinstance(node.base, Norm):
            if e < 0 or e % 2:
                return None
            sq = {tuple(2 if i == j else 0 for i in range(n)): 1.0 for j in range(n)}
            return poly_pow(sq, e // 2, n)
        a = _expand(node.base, n)
        if a is None:
            return None
        if e < 0:
            c = _constant_of(a, n)
            if c is None or c == 0.0:
                return None
            return _clean({zero: c ** e})
        return poly_pow(a, e, n)
    if isinstance(node, Func):
        a = _expand(node.arg, n)
        c = None if a is None else _constant_of(a, n)
        if c is None:
            return None
        if (node.name == "log" and c <= 0.0) or (node.name == "sqrt" and c < 0.0):
            return None  # left to raise at evaluation time
        return _clean({zero: float(getattr(math, node.name)(c))})
    raise TypeError(node)


# --------------------------------------------------------------------------
# weight variants

def _as_points(x, n):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[1] != n:
        raise ValueError(f"points have dimension {x.shape[1]}, weight has n={n}")
    return x, single


@dataclass(frozen=True, eq=False)
class PolynomialWeight:
    """Polynomial phi with exact term map ``{exponents: coefficient}``."""

    dimension: int
    terms: dict

    def __post_init__(self):
        for k in self.terms:
            if len(k) != self.dimension or min(k, default=0) < 0:
                raise ValueError(f"bad multi-index {k} for n={self.dimension}")
        object.__setattr__(self, "terms", _clean(dict(self.terms)))

    @property
    def degree(self):
        return poly_degree(self.terms)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[0])
        powers = {}
        for k, c in sorted(self.terms.items()):
            term = np.full(x.shape[0], c)
            for j, e in enumerate(k):
                if e:
                    if (j, e) not in powers:
                        powers[j, e] = x[:, j] ** e
                    term = term * powers[j, e]
            out += term
        return out

    @cached_property
    def partials(self):
        return tuple(PolynomialWeight(self.dimension, poly_diff(self.terms, j))
                     for j in range(self.dimension))

    @cached_property
    def laplacian_poly(self):
        terms = {}
        for j, p in enumerate(self.partials):
            terms = poly_add(terms, poly_diff(p.terms, j))
        return PolynomialWeight(self.dimension, terms)

    @cached_property
    def grad_sq_poly(self):
        """The polynomial |grad phi|^2."""
        terms = {}
        for p in self.partials:
            terms = poly_add(terms, poly_mul(p.terms, p.terms))
        return PolynomialWeight(self.dimension, terms)

    def grad(self, x):
        x = np.asarray(x, dtype=float)
        return np.stack([p.value(x) for p in self.partials], axis=1)

    def lap(self, x):
        return self.laplacian_poly.value(np.asarray(x, dtype=float))

    def __add__(self, other):
        return PolynomialWeight(self.dimension, poly_add(self.terms, other.terms))

    def __repr__(self):
        return f"PolynomialWeight(n={self.dimension}, terms={self.terms})"


def _is_constant(node):
    return isinstance(node, Num) or (isinstance(node, Neg) and _is_constant(node.arg))


def strip_additive_constants(node):
    """Drop constant summands from the top-level sum chain of ``node``.

    phi and phi + c then differentiate through the same tree, so their
    finite-difference derivatives agree bit for bit.
    """
    if _is_constant(node):
        return Num(0.0)
    if isinstance(node, BinOp) and node.op in "+-":
        left = strip_additive_constants(node.left)
        right = strip_additive_constants(node.right)
        if right == Num(0.0):
            return left
        if left == Num(0.0):
            return right if node.op == "+" else Neg(right)
        return BinOp(node.op, left, right)
    return node


@dataclass(frozen=True, eq=False)
class ExpressionWeight:
    """General phi as an expression tree; derivatives by finite differences."""

    dimension: int
    tree: Node

    def value(self, x):
        return self._eval(self.tree, x)

    def _eval(self, tree, x):
        out = eval_tree(tree, np.asarray(x, dtype=float))
        bad = ~np.isfinite(out)
        if np.any(bad):
            _domain_fail("non-finite weight value", bad, np.asarray(x))
        return out

    @cached_property
    def _varying(self):
        return strip_additive_constants(self.tree)

    def _shifted(self, x, j, step):
        xp = x.copy()
        xm = x.copy()
        xp[:, j] += step
        xm[:, j] -= step
        return self._eval(self._varying, xp), self._eval(self._varying, xm)

    def grad(self, x):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        for j in range(self.dimension):
            h = FD_STEP_GRAD * np.maximum(1.0, np.abs(x[:, j]))
            fp, fm = self._shifted(x, j, h)
            d1 = (fp - fm) / (2 * h)
            fp, fm = self._shifted(x, j, h / 2)
            d2 = (fp - fm) / h
            out[:, j] = (4 * d2 - d1) / 3
        return out

    def lap(self, x):
        x = np.asarray(x, dtype=float)
        f0 = self._eval(self._varying, x)
        out = np.zeros(x.shape[0])
        for j in range(self.dimension):
            h = FD_STEP_LAP * np.maximum(1.0, np.abs(x[:, j]))
            fp, fm = self._shifted(x, j, h)
            s1 = (fp - 2 * f0 + fm) / h**2
            fp, fm = self._shifted(x, j, h / 2)
            s2 = (fp - 2 * f0 + fm) / (h / 2) ** 2
            out += (4 * s2 - s1) / 3
        return out

    def __repr__(self):
        return f"ExpressionWeight(n={self.dimension}, {pretty(self.tree)})"


WeightFunction = Union[PolynomialWeight, ExpressionWeight]


def parse_weight(source: str, n: int) -> WeightFunction:
    """Parse weight text; polynomial inputs come back as ``PolynomialWeight``.

    >>> parse_weight("x1^2 * x2 - 3", 2).terms == {(2, 1): 1.0, (0, 0): -3.0}
    True
    """
    tree = parse_tree(source, n)
    terms = to_polynomial(tree, n)
    if terms is not None:
        return PolynomialWeight(n, terms)
    return ExpressionWeight(n, tree)


def evaluate(w: WeightFunction, x):
    pts, single = _as_points(x, w.dimension)
    out = w.value(pts)
    return float(out[0]) if single else out


def gradient(w: WeightFunction, x):
    pts, single = _as_points(x, w.dimension)
    out = w.grad(pts)
    return out[0] if single else out


def laplacian(w: WeightFunction, x):
    pts, single = _as_points(x, w.dimension)
    out = w.lap(pts)
    return float(out[0]) if single else out
