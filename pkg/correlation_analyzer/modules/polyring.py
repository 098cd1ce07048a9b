"""Sparse exact polynomials in edge variables ``x_<id>`` and the coupling ``q``.

Exponent vectors hold one entry per registered edge variable followed by the
exponent of ``q``. Terms are ordered graded-lexicographically over that
vector; the leading term is the largest one, printing goes smallest first.
"""

from __future__ import annotations

import logging
import re
from fractions import Fraction
from types import MappingProxyType
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from correlation_analyzer.utils.rationals import parse_rational, rational_sqrt

logger = logging.getLogger(__name__)

Exponent = Tuple[int, ...]
Scalar = Union[int, Fraction]
Q = "q"


class RegistryMismatchError(ValueError):
    pass


class NonDivisibleError(ArithmeticError):
    """Exact division failed; ``remainder`` is what the reduction left over."""

    def __init__(self, remainder: "MPoly", message: str = "polynomial is not divisible") -> None:
        self.remainder = remainder
        super().__init__(f"{message}; remainder = {remainder}")


class MissingWeightError(KeyError):
    pass


def order_key(exp: Exponent) -> Tuple[int, Exponent]:
    return sum(exp), exp


def _divides(small: Exponent, big: Exponent) -> bool:
    return all(a <= b for a, b in zip(small, big))


# ----------------------------------------------------------------------
# Univariate slices
# ----------------------------------------------------------------------
class QPoly:
    """Univariate polynomial in ``q``; coefficients stored constant term first."""

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Iterable[Scalar] = ()) -> None:
        values = [Fraction(c) for c in coeffs]
        while values and values[-1] == 0:
            values.pop()
        self._coeffs: Tuple[Fraction, ...] = tuple(values)

    @classmethod
    def from_strings(cls, items: Sequence[str]) -> "QPoly":
        return cls(parse_rational(item) for item in items)

    def to_strings(self) -> List[str]:
        return [str(c) for c in self._coeffs]

    @property
    def coeffs(self) -> Tuple[Fraction, ...]:
        return self._coeffs

    @property
    def degree(self) -> Union[int, float]:
        return len(self._coeffs) - 1 if self._coeffs else float("-inf")

    def is_zero(self) -> bool:
        return not self._coeffs

    def __bool__(self) -> bool:
        return bool(self._coeffs)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = QPoly([other])
        return isinstance(other, QPoly) and self._coeffs == other._coeffs

    def __hash__(self) -> int:
        return hash(self._coeffs)

    def __add__(self, other: Union["QPoly", Scalar]) -> "QPoly":
        other = _as_qpoly(other)
        width = max(len(self._coeffs), len(other._coeffs))
        a = self._coeffs + (Fraction(0),) * (width - len(self._coeffs))
        b = other._coeffs + (Fraction(0),) * (width - len(other._coeffs))
        return QPoly(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __neg__(self) -> "QPoly":
        return QPoly(-c for c in self._coeffs)

    def __sub__(self, other: Union["QPoly", Scalar]) -> "QPoly":
        return self + (-_as_qpoly(other))

    def __rsub__(self, other: Scalar) -> "QPoly":
        return _as_qpoly(other) - self

    def __mul__(self, other: Union["QPoly", Scalar]) -> "QPoly":
        other = _as_qpoly(other)
        if not self._coeffs or not other._coeffs:
            return QPoly()
        out = [Fraction(0)] * (len(self._coeffs) + len(other._coeffs) - 1)
        for i, a in enumerate(self._coeffs):
            for j, b in enumerate(other._coeffs):
                out[i + j] += a * b
        return QPoly(out)

    __rmul__ = __mul__

    def __call__(self, value: Scalar) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self._coeffs):
            acc = acc * value + c
        return acc

    def to_mpoly(self, registry: Sequence[str]) -> "MPoly":
        width = len(registry)
        return MPoly(registry, {(0,) * width + (i,): c for i, c in enumerate(self._coeffs) if c})

    def __str__(self) -> str:
        return str(self.to_mpoly(()))

    def __repr__(self) -> str:
        return f"QPoly({self.to_strings()})"


def _as_qpoly(value: Union[QPoly, Scalar]) -> QPoly:
    return value if isinstance(value, QPoly) else QPoly([value])


# ----------------------------------------------------------------------
# Multivariate polynomials
# ----------------------------------------------------------------------
class MPoly:
    __slots__ = ("_registry", "_terms", "__weakref__")

    def __init__(
        self,
        registry: Sequence[str],
        terms: Optional[Mapping[Sequence[int], Scalar]] = None,
    ) -> None:
        reg = tuple(registry)
        if Q in reg:
            raise ValueError("'q' cannot be an edge variable")
        if len(set(reg)) != len(reg):
            raise ValueError(f"duplicate variable in registry {reg}")
        width = len(reg) + 1
        clean: Dict[Exponent, Fraction] = {}
        for exp, coeff in (terms or {}).items():
            key = tuple(int(x) for x in exp)
            if len(key) != width or min(key) < 0:
                raise ValueError(f"bad exponent vector {exp} for registry {reg}")
            value = clean.get(key, Fraction(0)) + Fraction(coeff)
            if value:
                clean[key] = value
            else:
                clean.pop(key, None)
        self._registry = reg
        self._terms = clean

    @classmethod
    def _raw(cls, registry: Tuple[str, ...], terms: Dict[Exponent, Fraction]) -> "MPoly":
        obj = cls.__new__(cls)
        obj._registry = registry
        obj._terms = terms
        return obj

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, registry: Sequence[str]) -> "MPoly":
        return cls(registry)

    @classmethod
    def constant(cls, registry: Sequence[str], value: Scalar) -> "MPoly":
        reg = tuple(registry)
        return cls(reg, {(0,) * (len(reg) + 1): value})

    @classmethod
    def variable(cls, registry: Sequence[str], name: str) -> "MPoly":
        return cls.monomial(registry, {name: 1})

    @classmethod
    def monomial(
        cls, registry: Sequence[str], powers: Mapping[str, int], coeff: Scalar = 1
    ) -> "MPoly":
        reg = tuple(registry)
        exp = [0] * (len(reg) + 1)
        for name, power in powers.items():
            if name == Q:
                exp[-1] = power
            elif name in reg:
                exp[reg.index(name)] = power
            else:
                raise RegistryMismatchError(f"{name!r} is not registered in {reg}")
        return cls(reg, {tuple(exp): coeff})

    # -- accessors --------------------------------------------------------
    @property
    def registry(self) -> Tuple[str, ...]:
        return self._registry

    @property
    def terms(self) -> Mapping[Exponent, Fraction]:
        return MappingProxyType(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MPoly):
            return NotImplemented
        return self._registry == other._registry and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self._registry, frozenset(self._terms.items())))

    def sorted_terms(self, descending: bool = False) -> List[Tuple[Exponent, Fraction]]:
        return sorted(self._terms.items(), key=lambda t: order_key(t[0]), reverse=descending)

    def leading_term(self) -> Tuple[Exponent, Fraction]:
        if not self._terms:
            raise ValueError("zero polynomial has no leading term")
        exp = max(self._terms, key=order_key)
        return exp, self._terms[exp]

    def coefficient(self, exp: Sequence[int]) -> Fraction:
        return self._terms.get(tuple(exp), Fraction(0))

    def total_degree(self) -> int:
        return max((sum(e) for e in self._terms), default=-1)

    def min_total_degree(self) -> int:
        return min((sum(e) for e in self._terms), default=-1)

    def max_exponent(self, name: str) -> int:
        pos = self._position(name)
        return max((e[pos] for e in self._terms), default=0)

    def variables_present(self) -> Tuple[str, ...]:
        names = self._registry + (Q,)
        used = {i for exp in self._terms for i, x in enumerate(exp) if x}
        return tuple(names[i] for i in sorted(used))

    def _position(self, name: str) -> int:
        if name == Q:
            return len(self._registry)
        try:
            return self._registry.index(name)
        except ValueError:
            raise RegistryMismatchError(f"{name!r} is not registered") from None

    # -- ring operations --------------------------------------------------
    def _coerce(self, other: Union["MPoly", Scalar]) -> "MPoly":
        if isinstance(other, MPoly):
            if other._registry != self._registry:
                raise RegistryMismatchError(
                    f"registries differ: {self._registry} vs {other._registry}"
                )
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return MPoly.constant(self._registry, other)
        raise TypeError(f"cannot combine MPoly with {type(other).__name__}")

    def __add__(self, other: Union["MPoly", Scalar]) -> "MPoly":
        other = self._coerce(other)
        out = dict(self._terms)
        for exp, c in other._terms.items():
            value = out.get(exp, 0) + c
            if value:
                out[exp] = value
            else:
                out.pop(exp, None)
        return MPoly._raw(self._registry, out)

    __radd__ = __add__

    def __neg__(self) -> "MPoly":
        return MPoly._raw(self._registry, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other: Union["MPoly", Scalar]) -> "MPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Scalar) -> "MPoly":
        return self._coerce(other) - self

    def __mul__(self, other: Union["MPoly", Scalar]) -> "MPoly":
        other = self._coerce(other)
        out: Dict[Exponent, Fraction] = {}
        for ea, ca in self._terms.items():
            for eb, cb in other._terms.items():
                exp = tuple(x + y for x, y in zip(ea, eb))
                out[exp] = out.get(exp, 0) + ca * cb
        return MPoly._raw(self._registry, {e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, power: int) -> "MPoly":
        if power < 0:
            raise ValueError("negative powers are not polynomials")
        result = MPoly.constant(self._registry, 1)
        for _ in range(power):
            result = result * self
        return result

    # -- restructuring ----------------------------------------------------
    def with_registry(self, registry: Sequence[str]) -> "MPoly":
        """Re-express over another registry; dropped variables must be absent."""
        reg = tuple(registry)
        positions = []
        for name in reg:
            positions.append(self._registry.index(name) if name in self._registry else None)
        kept = {i for i in positions if i is not None}
        out: Dict[Exponent, Fraction] = {}
        for exp, c in self._terms.items():
            if any(x for i, x in enumerate(exp[:-1]) if i not in kept):
                raise RegistryMismatchError(
                    f"term {_format_monomial(self._registry, exp)} uses a dropped variable"
                )
            new = tuple(exp[i] if i is not None else 0 for i in positions) + (exp[-1],)
            out[new] = c
        return MPoly._raw(reg, out)

    def drop_variables(self, names: Sequence[str]) -> "MPoly":
        """Remove absent variables from the registry."""
        drop = set(names)
        return self.with_registry([n for n in self._registry if n not in drop])

    def q_power_parts(self) -> Dict[int, "MPoly"]:
        """Split by the exponent of ``q``; each part is q-free."""
        parts: Dict[int, Dict[Exponent, Fraction]] = {}
        for exp, c in self._terms.items():
            parts.setdefault(exp[-1], {})[exp[:-1] + (0,)] = c
        return {k: MPoly._raw(self._registry, v) for k, v in sorted(parts.items())}

    def lowest_degree_part(self) -> "MPoly":
        """Homogeneous component of minimal total degree."""
        low = self.min_total_degree()
        return MPoly._raw(
            self._registry, {e: c for e, c in self._terms.items() if sum(e) == low}
        )

    def substitute_q(self, value: Scalar) -> "MPoly":
        value = Fraction(value)
        out: Dict[Exponent, Fraction] = {}
        for exp, c in self._terms.items():
            key = exp[:-1] + (0,)
            out[key] = out.get(key, 0) + c * value ** exp[-1]
        return MPoly._raw(self._registry, {e: c for e, c in out.items() if c})

    def evaluate(self, q_value: Scalar, weights: Mapping[str, Scalar]) -> Fraction:
        present = set(self.variables_present()) - {Q}
        missing = sorted(present - set(weights))
        if missing:
            raise MissingWeightError(f"no weight for {', '.join(missing)}")
        values = [Fraction(weights.get(name, 0)) for name in self._registry]
        values.append(Fraction(q_value))
        total = Fraction(0)
        for exp, c in self._terms.items():
            term = c
            for value, power in zip(values, exp):
                if power:
                    term *= value ** power
            total += term
        return total

    # -- text / json ------------------------------------------------------
    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts: List[str] = []
        for exp, c in self.sorted_terms():
            mono = _format_monomial(self._registry, exp)
            mag = abs(c)
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{mag}*{mono}"
            if not parts:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(f"{'+' if c > 0 else '-'} {body}")
        return " ".join(parts)

    def __repr__(self) -> str:
        return f"MPoly({self._registry}, {str(self)!r})"

    def to_json(self) -> Dict[str, Any]:
        names = self._registry + (Q,)
        terms = []
        for exp, c in self.sorted_terms():
            terms.append(
                {
                    "exp": {names[i]: x for i, x in enumerate(exp) if x},
                    "num": str(c.numerator),
                    "den": str(c.denominator),
                }
            )
        return {"terms": terms}

    @classmethod
    def from_json(cls, data: Mapping[str, Any], registry: Sequence[str]) -> "MPoly":
        reg = tuple(registry)
        poly = cls.zero(reg)
        for term in data.get("terms", []):
            coeff = Fraction(int(term["num"]), int(term["den"]))
            poly = poly + cls.monomial(reg, term["exp"], coeff)
        return poly


def _format_monomial(registry: Sequence[str], exp: Exponent) -> str:
    factors = []
    for name, power in zip(registry, exp):
        if power:
            factors.append(f"x_{name}" if power == 1 else f"x_{name}^{power}")
    if exp[-1]:
        factors.append(Q if exp[-1] == 1 else f"{Q}^{exp[-1]}")
    return "*".join(factors)


_TERM = re.compile(r"\s*([+-])?\s*([^+-]+)")


def parse_mpoly(text: str, registry: Sequence[str]) -> MPoly:
    """Inverse of ``str(MPoly)``: sums of ``coeff*x_a^k*q^j`` products."""
    reg = tuple(registry)
    poly = MPoly.zero(reg)
    text = text.strip()
    if text == "0":
        return poly
    pos = 0
    while pos < len(text):
        match = _TERM.match(text, pos)
        if not match or match.end() == pos:
            raise ValueError(f"cannot parse polynomial at {text[pos:]!r}")
        sign = -1 if match.group(1) == "-" else 1
        coeff = Fraction(sign)
        powers: Dict[str, int] = {}
        for factor in match.group(2).strip().split("*"):
            factor = factor.strip()
            base, _, power = factor.partition("^")
            if base.startswith("x_"):
                name = base[2:]
            elif base == Q:
                name = Q
            else:
                coeff *= parse_rational(factor)
                continue
            powers[name] = powers.get(name, 0) + (int(power) if power else 1)
        poly = poly + MPoly.monomial(reg, powers, coeff)
        pos = match.end()
    return poly


# ----------------------------------------------------------------------
# Operations
# ----------------------------------------------------------------------
def mpoly_arith(op: str, a: MPoly, b: MPoly) -> MPoly:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown operation {op!r}")


def mpoly_exact_div(a: MPoly, b: MPoly) -> MPoly:
    """Quotient ``c`` with ``a == b * c`` by leading-term reduction."""
    if b.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    a._coerce(b)
    lead_exp, lead_coeff = b.leading_term()
    remainder: Dict[Exponent, Fraction] = dict(a.terms)
    leftover: Dict[Exponent, Fraction] = {}
    quotient: Dict[Exponent, Fraction] = {}
    b_terms = list(b.terms.items())
    while remainder:
        exp = max(remainder, key=order_key)
        coeff = remainder[exp]
        if not _divides(lead_exp, exp):
            leftover[exp] = coeff
            del remainder[exp]
            continue
        q_exp = tuple(x - y for x, y in zip(exp, lead_exp))
        q_coeff = coeff / lead_coeff
        quotient[q_exp] = quotient.get(q_exp, 0) + q_coeff
        for bexp, bc in b_terms:
            key = tuple(x + y for x, y in zip(q_exp, bexp))
            value = remainder.get(key, 0) - q_coeff * bc
            if value:
                remainder[key] = value
            else:
                remainder.pop(key, None)
    if leftover:
        raise NonDivisibleError(MPoly._raw(a.registry, leftover))
    return MPoly._raw(a.registry, {e: c for e, c in quotient.items() if c})


def mpoly_coeff_extract(a: MPoly, pattern: Union[Mapping[str, int], Sequence[int]]) -> QPoly:
    """Univariate-in-q coefficient of the edge monomial ``pattern``."""
    if isinstance(pattern, Mapping):
        vector = [0] * len(a.registry)
        for name, power in pattern.items():
            if name == Q:
                raise ValueError("pattern covers edge variables only")
            vector[a._position(name)] = power
        edge_exp = tuple(vector)
    else:
        edge_exp = tuple(pattern)
        if len(edge_exp) != len(a.registry):
            raise ValueError("pattern length differs from the registry")
    coeffs: Dict[int, Fraction] = {}
    for exp, c in a.terms.items():
        if exp[:-1] == edge_exp:
            coeffs[exp[-1]] = c
    top = max(coeffs, default=-1)
    return QPoly(coeffs.get(i, 0) for i in range(top + 1))


def mpoly_eval(
    a: MPoly, q_value: Scalar, weights: Optional[Mapping[str, Scalar]] = None
) -> Union[Fraction, MPoly]:
    if weights is None:
        return a.substitute_q(q_value)
    return a.evaluate(q_value, weights)


def mpoly_sqrt(a: MPoly) -> Optional[MPoly]:
    """Square root with positive leading coefficient, or None if ``a`` is no square."""
    if a.is_zero():
        return a
    lead_exp, lead_coeff = a.leading_term()
    if any(x % 2 for x in lead_exp):
        return None
    root_coeff = rational_sqrt(lead_coeff)
    if root_coeff is None:
        return None
    low_bound = a.min_total_degree()
    top_exp = tuple(x // 2 for x in lead_exp)
    twice_top = 2 * root_coeff
    root = MPoly._raw(a.registry, {top_exp: root_coeff})
    last = top_exp
    while True:
        rest = a - root * root
        if rest.is_zero():
            return root
        exp, coeff = rest.leading_term()
        if not _divides(top_exp, exp):
            return None
        nxt = tuple(x - y for x, y in zip(exp, top_exp))
        # new terms strictly decrease and cannot go below half the lowest degree
        if order_key(nxt) >= order_key(last) or 2 * sum(nxt) < low_bound:
            return None
        root = root + MPoly._raw(a.registry, {nxt: coeff / twice_top})
        last = nxt


__all__ = [
    "Exponent",
    "MPoly",
    "MissingWeightError",
    "NonDivisibleError",
    "QPoly",
    "RegistryMismatchError",
    "mpoly_arith",
    "mpoly_coeff_extract",
    "mpoly_eval",
    "mpoly_exact_div",
    "mpoly_sqrt",
    "order_key",
    "parse_mpoly",
]
