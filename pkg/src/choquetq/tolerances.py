"""Numerical tolerances shared across the package.

The defaults can be overridden through the ``CHOQUETQ_TOL`` environment
variable, either with a bare number (which sets the ``match`` tolerance used
for tabulated reference cells, replacing each table's own default) or with a comma
separated list of ``name=value`` pairs, e.g. ``CHOQUETQ_TOL="match=0.01,tie=1e-10"``.
"""
from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass

ENV_VAR = "CHOQUETQ_TOL"


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-10    # max |θ - θ†| entry, relative to max(1, |θ|)
    psd: float = 1e-8           # smallest eigenvalue >= -psd * ||θ||
    tie: float = 1e-12          # Q values closer than this are tied
    chain_zero: float = 1e-10   # Tr[Π⊥ Π(i)] below this marks a dependent state
    rank: float = 1e-8          # relative singular-value cutoff for spans
    condition: float = 1e12     # largest acceptable P-function kernel condition number
    match: float | None = None  # reference-table cell tolerance; None = per-table default


def parse_override(text: str, base: Tolerances | None = None) -> Tolerances:
    base = base or Tolerances()
    text = text.strip()
    if not text:
        return base
    try:
        return dataclasses.replace(base, match=float(text))
    except ValueError:
        pass
    known = {f.name for f in dataclasses.fields(Tolerances)}
    updates = {}
    for item in text.split(","):
        name, sep, value = item.partition("=")
        name = name.strip()
        if not sep or name not in known:
            raise ValueError(f"bad {ENV_VAR} entry {item!r}; expected name=value with name in {sorted(known)}")
        updates[name] = float(value)
    return dataclasses.replace(base, **updates)


def default_tolerances() -> Tolerances:
    return parse_override(os.environ.get(ENV_VAR, ""))
