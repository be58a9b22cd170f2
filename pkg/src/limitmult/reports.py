"""One verified inequality per BoundReport."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

from .certified import CertifiedReal

OK = "ok"
OUT_OF_DOMAIN = "out_of_domain"
VACUOUS = "vacuous"
BOUND_ONLY = "bound_only"


@dataclass(frozen=True)
class BoundReport:
    label: str
    computed: CertifiedReal
    bound: CertifiedReal
    field_disc: int
    group: str = ""
    status: str = OK
    experimental: bool = False
    notes: dict[str, Any] = field(default_factory=dict, compare=False)
    # side conditions asserted together with the main inequality
    conditions: tuple[tuple[str, bool], ...] = ()

    @property
    def passed(self) -> bool | None:
        """computed.lo <= bound.hi and all side conditions; None when out of domain."""
        if self.status == OUT_OF_DOMAIN:
            return None
        return self.computed.lo <= self.bound.hi and all(ok for _, ok in self.conditions)

    @property
    def ratio(self) -> float:
        if self.bound.value == 0:
            return 0.0 if self.computed.value == 0 else math.inf
        return self.computed.value / self.bound.value

    @property
    def counts_for_exit(self) -> bool:
        return not self.experimental and self.status != OUT_OF_DOMAIN


def make_report(label: str, computed, bound, field_disc: int, group="", **kw) -> BoundReport:
    return BoundReport(label, CertifiedReal.coerce(computed), CertifiedReal.coerce(bound),
                       field_disc, str(group), **kw)


def out_of_domain(label: str, field_disc: int, group="", reason: str = "") -> BoundReport:
    return BoundReport(label, CertifiedReal(0.0), CertifiedReal(0.0), field_disc, str(group),
                       status=OUT_OF_DOMAIN, notes={"reason": reason})
