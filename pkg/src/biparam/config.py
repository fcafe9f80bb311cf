"""Run configuration: a JSON document describing a chain and what to compute.

Example::

    {
      "states": ["repair", "working"],
      "generator": [[-2, 2], [0.6, -0.6]],
      "initial": [0, 1],
      "queries": [[0.2, 0.6], [2, 2]],
      "method": "laplace2d",
      "inversion": {"eulerTerms": 35, "targetDecimalDigits": 8, "innerOuterOrder": "s2_first"},
      "pdeGrid": [200, 200],
      "waitingRates": {"repair": [2, 0.6]},
      "policy": {"fromState": "working", "baseCost": 1,
                 "regions": [{"tLimit": 0.5, "uLimit": 0.2, "cost": 1},
                             {"tLimit": 1, "uLimit": 0.3, "cost": 0.1}]},
      "output": "json",
      "compare": false
    }
"""

from __future__ import annotations

import json
import re
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Literal, Optional, Union

import pydantic
from pydantic import BaseModel, ConfigDict, Field, field_validator
from pydantic.alias_generators import to_camel

from .chain import GeneratorMatrix, ProbabilityVector, QueryPoint, validate_generator
from .errors import BiparamError, InvalidConfigError
from .inversion import InversionConfig
from .waiting import WaitingRegionRates
from .warranty import WarrantyPolicy, validate_policy


class _Model(BaseModel):
    model_config = ConfigDict(alias_generator=to_camel, populate_by_name=True, extra="forbid")


class InversionFields(_Model):
    euler_terms: int = 35
    target_decimal_digits: int = 8
    inner_outer_order: Literal["s2_first", "s1_first"] = "s2_first"


class RegionFields(_Model):
    t_limit: float
    u_limit: float
    cost: float


class PolicyFields(_Model):
    from_state: Union[int, str] = 1
    base_cost: float = 1.0
    regions: list[RegionFields]


class RunConfig(_Model):
    states: Optional[list[str]] = None
    generator: list[list[float]]
    initial: Optional[list[float]] = None
    queries: list[tuple[float, float]] = Field(default_factory=list)
    method: Literal["series", "laplace2d", "pde"] = "laplace2d"
    inversion: Optional[InversionFields] = None
    pde_grid: Optional[tuple[int, int]] = None
    waiting_rates: Optional[Union[dict[str, tuple[float, float]], list[Optional[tuple[float, float]]]]] = None
    policy: Optional[PolicyFields] = None
    output: Literal["csv", "json"] = "json"
    compare: bool = False

    @field_validator("pde_grid", mode="before")
    @classmethod
    def _grid_mapping(cls, v):
        if isinstance(v, dict) and set(v) == {"nt", "nu"}:
            return (v["nt"], v["nu"])
        return v


@dataclass(frozen=True)
class Job:
    """A validated configuration, ready to compute."""

    raw: RunConfig
    labels: tuple[str, ...]
    generator: GeneratorMatrix
    initial: Optional[ProbabilityVector]
    queries: tuple[QueryPoint, ...]
    method: str
    inversion: InversionConfig
    pde_steps: tuple[int, int]
    rates: tuple[WaitingRegionRates, ...]
    policy: Optional[WarrantyPolicy]
    output: str
    compare: bool


class ConfigError(InvalidConfigError):
    """Configuration problem, with the line of the offending field if known."""

    def __init__(self, message: str, line: Optional[int] = None, field: Optional[str] = None):
        self.line, self.field = line, field
        where = f"line {line}: " if line else ""
        what = f"{field}: " if field else ""
        super().__init__(f"config {where}{what}{message}")


def _line_of(text: Optional[str], key: str) -> Optional[int]:
    if not text:
        return None
    pattern = re.compile(r'"' + re.escape(key) + r'"\s*:')
    for no, line in enumerate(text.splitlines(), start=1):
        if pattern.search(line):
            return no
    return None


def _fail(text, field: str, message: str):
    top = field.split(".")[0]
    raise ConfigError(message, _line_of(text, field.split(".")[-1]) or _line_of(text, top), field)


def _state_index(ref, labels: tuple[str, ...], text, field: str) -> int:
    if isinstance(ref, int) and not isinstance(ref, bool):
        if 0 <= ref < len(labels):
            return ref
    elif ref in labels:
        return labels.index(ref)
    _fail(text, field, f"unknown state {ref!r}; states are {list(labels)}")


def parse_config(source, digits: Optional[int] = None, output: Optional[str] = None) -> Job:
    """Parse and validate a configuration given as JSON text or a mapping.

    All problems raise :class:`ConfigError`.
    """
    text = source if isinstance(source, str) else None
    if text is not None:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(exc.msg, exc.lineno) from None
    else:
        data = source
    if not isinstance(data, dict):
        raise ConfigError("top level must be a JSON object", 1 if text else None)
    try:
        raw = RunConfig.model_validate(data)
    except pydantic.ValidationError as exc:
        err = exc.errors()[0]
        loc = [str(p) for p in err["loc"]]
        keys = [p for p in loc if not p.isdigit()] or ["config"]
        raise ConfigError(err["msg"], _line_of(text, keys[-1]) or _line_of(text, keys[0]),
                          ".".join(loc)) from None

    return _build(raw, text, digits, output)


@contextmanager
def _field(text, name: str):
    try:
        yield
    except ConfigError:
        raise
    except BiparamError as exc:
        _fail(text, name, str(exc))


def _build(raw: RunConfig, text, digits, output) -> Job:
    n = len(raw.generator)
    labels = tuple(raw.states) if raw.states is not None else tuple(str(i) for i in range(n))
    with _field(text, "generator"):
        A = validate_generator(raw.generator)
    if len(labels) != A.n or len(set(labels)) != A.n:
        _fail(text, "states", f"expected {A.n} distinct labels, got {list(labels)}")
    A = validate_generator(A.a, labels)

    initial = None
    if raw.initial is not None:
        if len(raw.initial) != A.n:
            _fail(text, "initial", f"expected {A.n} entries, got {len(raw.initial)}")
        with _field(text, "initial"):
            initial = ProbabilityVector(raw.initial)

    with _field(text, "queries"):
        queries = tuple(QueryPoint(t, u) for t, u in raw.queries)

    inv = raw.inversion or InversionFields()
    target = digits if digits is not None else inv.target_decimal_digits
    with _field(text, "inversion"):
        cfg = InversionConfig(inv.euler_terms, target, inv.inner_outer_order)

    nt, nu = raw.pde_grid or (200, 200)
    if not (2 <= nt <= 100_000 and 2 <= nu <= 100_000):
        _fail(text, "pdeGrid", f"grid steps must lie in [2, 100000], got {(nt, nu)}")

    rates = []
    if raw.waiting_rates is not None:
        wr = raw.waiting_rates
        items = wr.items() if isinstance(wr, dict) else enumerate(wr)
        for ref, pair in items:
            if pair is None:
                continue
            idx = _state_index(ref, labels, text, "waitingRates")
            with _field(text, "waitingRates"):
                rates.append(WaitingRegionRates(idx, *pair))

    policy = None
    if raw.policy is not None:
        p = raw.policy
        idx = _state_index(p.from_state, labels, text, "fromState")
        with _field(text, "policy"):
            policy = validate_policy(
                [(r.t_limit, r.u_limit, r.cost) for r in p.regions], idx, p.base_cost
            )

    return Job(raw, labels, A, initial, queries, raw.method, cfg, (nt, nu),
               tuple(rates), policy, output or raw.output, raw.compare)
