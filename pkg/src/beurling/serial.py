"""Deterministic serialization helpers.

All artifacts serialize through canonical JSON (sorted keys, fixed
separators, trailing newline) so that reruns are byte-comparable.
High-precision reals travel as decimal strings; exact dyadic rationals
get their finite decimal expansion, everything else a stated-precision
enclosure.
"""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction
from typing import Any

from .certreal import CertReal


def dyadic_decimal(fr: Fraction) -> str:
    """Exact finite decimal expansion of a dyadic rational."""
    num, den = fr.numerator, fr.denominator
    k = den.bit_length() - 1
    if den != 1 << k:
        raise ValueError("not a dyadic rational")
    if k == 0:
        return str(num)
    scaled = num * 5 ** k  # num/2^k == scaled/10^k
    sign = "-" if scaled < 0 else ""
    digits = str(abs(scaled)).rjust(k + 1, "0")
    head, tail = digits[:-k], digits[-k:]
    tail = tail.rstrip("0")
    return f"{sign}{head}.{tail}" if tail else f"{sign}{head}"


def certreal_payload(x: CertReal, dps: int = 36) -> dict:
    """JSON payload for a certified real: exact decimal when possible."""
    if x.is_exact:
        return {"exact": dyadic_decimal(x.to_fraction())}
    return x.serialize(dps)


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ": "), indent=1) + "\n"


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()
