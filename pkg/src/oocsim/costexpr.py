"""Tiny expression language for scalar costs with forward-mode derivatives.

Grammar (recursive descent, ``^`` binds tightest and is right associative)::

    expr   := term (("+" | "-") term)*
    term   := factor (("*" | "/") factor)*
    factor := ("+" | "-") factor | power
    power  := atom ("^" factor)?
    atom   := number | "y" | "pi" | "e" | name "(" expr ")" | "(" expr ")"

Available functions: sin, cos, ln, sqrt.  Each parsed node compiles to a
closure mapping ``y`` to a ``(value, derivative)`` pair, so evaluation
propagates dual numbers without any object dispatch in the hot path.
"""

import math
from dataclasses import dataclass, field

from .errors import DomainError, ParseError

_CONSTANTS = {"pi": math.pi, "e": math.e}
_FUNCTIONS = ("sin", "cos", "ln", "sqrt")


# -- tokenizer ----------------------------------------------------------------

def _tokenize(text):
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in "+-*/^()":
            tokens.append((ch, ch, i))
            i += 1
            continue
        if ch.isdigit() or ch == ".":
            j = i
            while j < n and (text[j].isdigit() or text[j] == "."):
                j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            lit = text[i:j]
            try:
                value = float(lit)
            except ValueError:
                raise ParseError(f"bad number literal {lit!r}", position=i) from None
            tokens.append(("num", value, i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("name", text[i:j], i))
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r}", position=i)
    tokens.append(("end", None, n))
    return tokens


# -- compiled node constructors ------------------------------------------------
# Each compiles to (fn, uses_y) where fn(y) -> (value, derivative).

def _c_const(v):
    return (lambda y: (v, 0.0)), False


def _c_var():
    return (lambda y: (y, 1.0)), True


def _c_neg(a):
    fa, ua = a

    def fn(y):
        v, d = fa(y)
        return -v, -d

    return fn, ua


def _c_add(a, b):
    fa, ua = a
    fb, ub = b

    def fn(y):
        va, da = fa(y)
        vb, db = fb(y)
        return va + vb, da + db

    return fn, ua or ub


def _c_sub(a, b):
    fa, ua = a
    fb, ub = b

    def fn(y):
        va, da = fa(y)
        vb, db = fb(y)
        return va - vb, da - db

    return fn, ua or ub


def _c_mul(a, b):
    fa, ua = a
    fb, ub = b

    def fn(y):
        va, da = fa(y)
        vb, db = fb(y)
        return va * vb, da * vb + va * db

    return fn, ua or ub


def _c_div(a, b):
    fa, ua = a
    fb, ub = b

    def fn(y):
        va, da = fa(y)
        vb, db = fb(y)
        if vb == 0.0:
            raise DomainError(f"division by zero at y = {y!r}")
        return va / vb, (da * vb - va * db) / (vb * vb)

    return fn, ua or ub


def _c_pow(a, b):
    fa, ua = a
    fb, ub = b
    if not ub:
        # constant exponent: real power rule, integer exponents keep sign
        c = fb(0.0)[0]
        ci = round(c)
        if abs(c - ci) < 1e-12:
            ci = int(ci)

            def fn(y):
                v, d = fa(y)
                if v == 0.0 and ci < 0:
                    raise DomainError(f"zero raised to negative power at y = {y!r}")
                if ci == 0:
                    return 1.0, 0.0
                return v ** ci, ci * v ** (ci - 1) * d

            return fn, ua

        def fn(y):
            v, d = fa(y)
            if v < 0.0:
                raise DomainError(
                    f"negative base {v!r} with non-integer exponent {c!r}"
                )
            if v == 0.0:
                if c < 0.0:
                    raise DomainError(f"zero raised to negative power at y = {y!r}")
                if c > 1.0 or d == 0.0:
                    return 0.0, 0.0
                raise DomainError(f"power rule derivative blows up at zero base, exponent {c!r}")
            return v ** c, c * v ** (c - 1.0) * d

        return fn, ua

    def fn(y):
        v, d = fa(y)
        w, dw = fb(y)
        if v <= 0.0:
            raise DomainError(f"base must be positive for variable exponent, got {v!r}")
        value = v ** w
        return value, value * (dw * math.log(v) + w * d / v)

    return fn, True


def _c_sin(a):
    fa, ua = a

    def fn(y):
        v, d = fa(y)
        return math.sin(v), math.cos(v) * d

    return fn, ua


def _c_cos(a):
    fa, ua = a

    def fn(y):
        v, d = fa(y)
        return math.cos(v), -math.sin(v) * d

    return fn, ua


def _c_ln(a):
    fa, ua = a

    def fn(y):
        v, d = fa(y)
        if v <= 0.0:
            raise DomainError(f"ln of non-positive value {v!r}")
        return math.log(v), d / v

    return fn, ua


def _c_sqrt(a):
    fa, ua = a

    def fn(y):
        v, d = fa(y)
        if v < 0.0:
            raise DomainError(f"sqrt of negative value {v!r}")
        if v == 0.0:
            if d == 0.0:
                return 0.0, 0.0
            raise DomainError("sqrt derivative blows up at zero")
        root = math.sqrt(v)
        return root, d / (2.0 * root)

    return fn, ua


_FUNC_COMPILERS = {"sin": _c_sin, "cos": _c_cos, "ln": _c_ln, "sqrt": _c_sqrt}


# -- parser --------------------------------------------------------------------

class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind):
        tok = self.advance()
        if tok[0] != kind:
            raise ParseError(
                f"unexpected token {tok[1]!r}", position=tok[2], expected=kind
            )
        return tok

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(
                f"trailing input {tok[1]!r}", position=tok[2], expected="end of expression"
            )
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.advance()[0]
            rhs = self.term()
            node = _c_add(node, rhs) if op == "+" else _c_sub(node, rhs)
        return node

    def term(self):
        node = self.factor()
        while self.peek()[0] in ("*", "/"):
            op = self.advance()[0]
            rhs = self.factor()
            node = _c_mul(node, rhs) if op == "*" else _c_div(node, rhs)
        return node

    def factor(self):
        tok = self.peek()
        if tok[0] == "+":
            self.advance()
            return self.factor()
        if tok[0] == "-":
            self.advance()
            return _c_neg(self.factor())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "^":
            self.advance()
            exponent = self.factor()
            return _c_pow(base, exponent)
        return base

    def atom(self):
        tok = self.advance()
        kind, value, pos = tok
        if kind == "num":
            return _c_const(value)
        if kind == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "name":
            if value == "y":
                return _c_var()
            if value in _CONSTANTS:
                return _c_const(_CONSTANTS[value])
            if value in _FUNC_COMPILERS:
                self.expect("(")
                inner = self.expr()
                self.expect(")")
                return _FUNC_COMPILERS[value](inner)
            raise ParseError(
                f"unknown name {value!r}",
                position=pos,
                expected="y, pi, e, or one of " + ", ".join(_FUNCTIONS),
            )
        raise ParseError(
            f"unexpected token {value!r}", position=pos, expected="number, name or '('"
        )


@dataclass(frozen=True)
class CostExpr:
    """A parsed scalar cost expression over the variable ``y``."""

    text: str
    _fn: callable = field(repr=False)

    def value(self, y):
        return self._fn(float(y))[0]

    def derivative(self, y):
        return self._fn(float(y))[1]

    def value_and_derivative(self, y):
        """Evaluate ``(f(y), f'(y))`` by forward dual-number propagation."""
        return self._fn(float(y))


def parse_cost_expression(text, q=1):
    """Parse ``text`` into a :class:`CostExpr`.

    The expression language is scalar only, so ``q`` must be 1; vector costs
    are built from parametric families instead.

    Raises
    ------
    ParseError
        On malformed input, with the character position and the expected
        token class.
    """
    if q != 1:
        raise ValueError("expression costs are scalar only (q = 1)")
    fn, _ = _Parser(text).parse()
    return CostExpr(text=text, _fn=fn)
