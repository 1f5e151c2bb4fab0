"""Token attributes: exact dates with +infinity, and structured values.

Dates are nonnegative exact rationals extended with +infinity.  Race
outcomes flip on strict comparisons, so no floating point is allowed
anywhere; every date is a ``fractions.Fraction`` or the infinity sentinel.

Values are the payloads carried by tokens: atoms, exact numbers, or tuples
of values.  They only need structural equality, hashing, and a canonical
serialization; no ordering is defined between values of different shapes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import total_ordering

from .errors import EvaluationError


@total_ordering
@dataclass(frozen=True)
class ExtendedDate:
    """A nonnegative exact rational or +infinity.

    ``finite`` is None exactly when the date is infinite.  Addition is
    absorbing in infinity; comparison places infinity above every finite
    date and makes it equal only to itself.
    """

    finite: Fraction | None

    def __post_init__(self) -> None:
        if self.finite is not None:
            if not isinstance(self.finite, Fraction):
                object.__setattr__(self, "finite", Fraction(self.finite))
            if self.finite < 0:
                raise EvaluationError(f"negative date {self.finite!s} is not allowed")

    @property
    def is_finite(self) -> bool:
        return self.finite is not None

    def __add__(self, other: ExtendedDate) -> ExtendedDate:
        if self.finite is None or other.finite is None:
            return DATE_INF
        return ExtendedDate(self.finite + other.finite)

    def __lt__(self, other: ExtendedDate) -> bool:
        if self.finite is None:
            return False
        if other.finite is None:
            return True
        return self.finite < other.finite

    def __str__(self) -> str:
        return format_date(self)

    def __repr__(self) -> str:
        return f"ExtendedDate({format_date(self)!r})"


DATE_ZERO = ExtendedDate(Fraction(0))
DATE_INF = ExtendedDate(None)


def date_of(value: int | str | Fraction) -> ExtendedDate:
    """Coerce a literal into an ExtendedDate (strings go through the parser)."""
    if isinstance(value, ExtendedDate):
        return value
    if isinstance(value, str):
        return parse_date(value)
    return ExtendedDate(Fraction(value))


def date_max(dates) -> ExtendedDate:
    """Max of an iterable of dates; empty input yields 0 by convention."""
    best = DATE_ZERO
    for d in dates:
        if best < d:
            best = d
    return best


def parse_rational(text: str) -> Fraction:
    """Parse "3", "3.5", or "7/2" into an exact Fraction."""
    text = text.strip()
    if not text:
        raise EvaluationError("empty number")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise EvaluationError(f"bad number {text!r}: {exc}") from exc


def parse_date(text: str) -> ExtendedDate:
    """Parse a date string: "inf", a decimal, or "p/q"."""
    if text.strip() == "inf":
        return DATE_INF
    return ExtendedDate(parse_rational(text))


def format_rational(q: Fraction) -> str:
    """Exact string form: integer, terminating decimal, or "p/q"."""
    if q.denominator == 1:
        return str(q.numerator)
    den = q.denominator
    twos = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    fives = 0
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{q.numerator}/{q.denominator}"
    digits = max(twos, fives)
    scaled = q.numerator * 10**digits // q.denominator
    sign = "-" if scaled < 0 else ""
    scaled = abs(scaled)
    whole, frac = divmod(scaled, 10**digits)
    return f"{sign}{whole}.{str(frac).rjust(digits, '0')}"


def format_date(d: ExtendedDate) -> str:
    if d.finite is None:
        return "inf"
    return format_rational(d.finite)


@dataclass(frozen=True)
class Value:
    """A token value: an atom, an exact number, or a tuple of values."""

    kind: str  # "atom" | "num" | "tuple"
    atom: str | None = None
    num: Fraction | None = None
    items: tuple["Value", ...] = field(default=())

    def __post_init__(self) -> None:
        if self.kind not in ("atom", "num", "tuple"):
            raise EvaluationError(f"unknown value kind {self.kind!r}")
        if self.kind == "num" and self.num is not None and not isinstance(self.num, Fraction):
            object.__setattr__(self, "num", Fraction(self.num))

    def __str__(self) -> str:
        if self.kind == "atom":
            return str(self.atom)
        if self.kind == "num":
            return format_rational(self.num)
        return "(" + ", ".join(str(v) for v in self.items) + ")"


def atom(name: str) -> Value:
    return Value(kind="atom", atom=name)


def num(value: int | str | Fraction) -> Value:
    if isinstance(value, str):
        value = parse_rational(value)
    return Value(kind="num", num=Fraction(value))


def tup(*items: Value) -> Value:
    return Value(kind="tuple", items=tuple(items))


def value_to_json(v: Value) -> object:
    if v.kind == "atom":
        return {"kind": "atom", "value": v.atom}
    if v.kind == "num":
        return {"kind": "num", "value": format_rational(v.num)}
    return {"kind": "tuple", "items": [value_to_json(i) for i in v.items]}


def value_from_json(node: object, path: str, problems: list[str]) -> Value | None:
    """Parse a value literal, appending schema problems instead of raising."""
    if not isinstance(node, dict) or "kind" not in node:
        problems.append(f"{path}: value must be an object with a 'kind'")
        return None
    kind = node["kind"]
    if kind == "atom":
        name = node.get("value")
        if not isinstance(name, str):
            problems.append(f"{path}.value: atom value must be a string")
            return None
        return atom(name)
    if kind == "num":
        raw = node.get("value")
        if not isinstance(raw, str):
            problems.append(f"{path}.value: number must be a decimal string")
            return None
        try:
            return num(raw)
        except EvaluationError as exc:
            problems.append(f"{path}.value: {exc}")
            return None
    if kind == "tuple":
        items = node.get("items")
        if not isinstance(items, list):
            problems.append(f"{path}.items: tuple items must be a list")
            return None
        parsed = []
        for i, raw in enumerate(items):
            item = value_from_json(raw, f"{path}.items[{i}]", problems)
            if item is None:
                return None
            parsed.append(item)
        return Value(kind="tuple", items=tuple(parsed))
    problems.append(f"{path}.kind: unknown value kind {kind!r}")
    return None


def value_sort_key(v: Value) -> str:
    """Deterministic ordering key for reporting sets of values."""
    import json as _json

    return _json.dumps(value_to_json(v), sort_keys=True)
