"""Input validation shared by the estimators and the command line."""
from __future__ import annotations

import math
import numbers

from . import geometry
from .errors import InvalidDomainError


def check_domain(d):
    """Return ``d`` as a domain object; dicts are parsed as domain JSON."""
    if isinstance(d, dict):
        return geometry.domain_from_dict(d)
    if isinstance(d, str):
        return geometry.loads_domain(d)
    if not isinstance(d, geometry.DOMAIN_TYPES):
        raise InvalidDomainError(f"expected a domain, got {type(d).__name__}")
    return d


def check_domains(X) -> list:
    """Accept a single domain or an iterable of domains; always return a list."""
    if isinstance(X, (dict, str, *geometry.DOMAIN_TYPES)):
        return [check_domain(X)]
    try:
        items = list(X)
    except TypeError as exc:
        raise InvalidDomainError(f"expected domains, got {type(X).__name__}") from exc
    if not items:
        raise ValueError("no domains given")
    return [check_domain(d) for d in items]


def check_scalar(value, name, *, min_val=None, include_min=False, allow_none=False, integer=False):
    if value is None and allow_none:
        return value
    kind = numbers.Integral if integer else numbers.Real
    if isinstance(value, bool) or not isinstance(value, kind):
        raise TypeError(f"{name} must be {'an integer' if integer else 'a real number'}, got {value!r}")
    if not integer and not math.isfinite(value):
        raise ValueError(f"{name} must be finite")
    if min_val is not None:
        bad = value < min_val if include_min else value <= min_val
        if bad:
            op = ">=" if include_min else ">"
            raise ValueError(f"{name} must be {op} {min_val}, got {value}")
    return value
