"""Core value types shared by every other module.

All masses are kilograms internally; tonnes are converted at the IO
boundary (x1000). Every type here is an immutable value object, safe to
share across threads.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

KG_PER_TONNE = 1000.0

#: Default simulation horizon in weeks.
DEFAULT_HORIZON = 52

#: Week 0 anchors at April 1 (spring wheat harvest) unless configured.
DEFAULT_ANCHOR = dt.date(2019, 4, 1)


class Stage(Enum):
    """Provenance of a cardholder estimate within the estimation pipeline."""

    RAW = "Raw"
    IMPUTED = "Imputed"
    SCALED = "Scaled"
    CAPPED = "Capped"


@dataclass(frozen=True)
class DistrictRecord:
    """Static attributes of one district."""

    id: int
    name: str
    total_population: int
    rural_population: int
    urban_population: int
    avg_family_size: float


@dataclass(frozen=True)
class CardholderEstimate:
    """Per-district AAY (households) and Priority (persons) cardholder figures."""

    district_id: int
    aay_households: float
    priority_persons: float
    stage: Stage

    def covered_persons(self, avg_family_size: float) -> float:
        return self.aay_households * avg_family_size + self.priority_persons


@dataclass(frozen=True)
class DistrictStockState:
    """The node model's wheat stocks, in kg, plus the weekly consumption rate.

    ``surplus_wheat`` is an earmark within ``procured_storage`` (the share
    above the reserve that is offered for transport), not additional mass;
    mass accounting therefore sums the other eight stocks only.
    """

    produced_wheat: float = 0.0
    farm_storage: float = 0.0
    farm_waste: float = 0.0
    market_purchased: float = 0.0
    procured_storage: float = 0.0
    surplus_wheat: float = 0.0
    imported_procured: float = 0.0
    consumer_purchased: float = 0.0
    consumed: float = 0.0
    weekly_consumption: float = 0.0

    MASS_STOCKS = (
        "produced_wheat",
        "farm_storage",
        "farm_waste",
        "market_purchased",
        "procured_storage",
        "imported_procured",
        "consumer_purchased",
        "consumed",
    )

    def total_mass(self) -> float:
        """Sum of all mass-bearing stocks (excludes the surplus earmark)."""
        return sum(getattr(self, name) for name in self.MASS_STOCKS)

    def check(self) -> None:
        for name in self.MASS_STOCKS + ("surplus_wheat", "weekly_consumption"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"stock {name} = {v} violates non-negativity")


@dataclass(frozen=True)
class PriceContext:
    """Exogenous MSP and open-market wheat prices, this year and last."""

    msp: float
    msp_last_year: float
    market_price: float
    market_price_last_year: float

    def __post_init__(self):
        for name in ("msp", "msp_last_year", "market_price", "market_price_last_year"):
            if getattr(self, name) <= 0:
                raise ValueError(f"price {name} must be > 0")


@dataclass(frozen=True)
class HarvestRecord:
    """Prior-year harvest context for the market/procurement split."""

    last_year_nonwasted_harvest: float
    last_year_procured: float

    def __post_init__(self):
        if not 0 <= self.last_year_procured <= self.last_year_nonwasted_harvest:
            raise ValueError(
                "need 0 <= last_year_procured <= last_year_nonwasted_harvest"
            )


@dataclass(frozen=True)
class WeekIndex:
    """A simulated week plus the calendar date of week 0."""

    value: int
    calendar_anchor: dt.date = DEFAULT_ANCHOR

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("week index must be >= 0")

    @property
    def date(self) -> dt.date:
        """First calendar day of this week."""
        return self.calendar_anchor + dt.timedelta(weeks=self.value)

    @property
    def month_key(self) -> str:
        d = self.date
        return f"{d.year:04d}-{d.month:02d}"


@dataclass(frozen=True)
class DriveTimeMatrix:
    """Symmetric matrix of drive minutes between district population centers."""

    district_ids: tuple[int, ...]
    minutes: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.minutes, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "minutes", arr)
        object.__setattr__(self, "_index", {d: i for i, d in enumerate(self.district_ids)})

    def between(self, a: int, b: int) -> float:
        idx = self._index
        return float(self.minutes[idx[a], idx[b]])

    @property
    def size(self) -> int:
        return len(self.district_ids)


@dataclass(frozen=True)
class Violation:
    """One broken invariant, pointing at the district and field concerned."""

    district_id: int | None
    field: str
    message: str

    def __str__(self) -> str:
        where = f"district {self.district_id}" if self.district_id is not None else "dataset"
        return f"{where} [{self.field}]: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.ok:
            return "dataset valid"
        return "\n".join(str(v) for v in self.violations)


def validate_dataset(
    districts: list[DistrictRecord], matrix: DriveTimeMatrix
) -> ValidationReport:
    """Check every structural invariant of the static dataset.

    Pure report-style check: nothing raises, the report lists each broken
    invariant with the district id and field so callers can print or fail.
    """
    out: list[Violation] = []

    seen: set[int] = set()
    for d in districts:
        if d.id in seen:
            out.append(Violation(d.id, "id", "duplicate district id"))
        seen.add(d.id)
        if d.total_population != d.rural_population + d.urban_population:
            out.append(
                Violation(
                    d.id,
                    "total_population",
                    f"total {d.total_population} != rural {d.rural_population}"
                    f" + urban {d.urban_population}",
                )
            )
        for fname in ("total_population", "rural_population", "urban_population"):
            if getattr(d, fname) < 0:
                out.append(Violation(d.id, fname, "population must be >= 0"))
        if not d.avg_family_size > 0:
            out.append(Violation(d.id, "avg_family_size", "must be > 0"))

    m = matrix.minutes
    n = matrix.size
    if m.shape != (n, n):
        out.append(
            Violation(None, "drive_times", f"matrix shape {m.shape} is not ({n}, {n})")
        )
    else:
        if set(matrix.district_ids) != seen:
            out.append(
                Violation(None, "drive_times", "matrix ids do not match district ids")
            )
        for i in range(n):
            if m[i, i] != 0:
                out.append(
                    Violation(
                        matrix.district_ids[i], "drive_times", "nonzero diagonal entry"
                    )
                )
            for j in range(i + 1, n):
                if not (math.isfinite(m[i, j]) and math.isfinite(m[j, i])):
                    out.append(
                        Violation(
                            matrix.district_ids[i],
                            "drive_times",
                            f"non-finite entry at ({i},{j})",
                        )
                    )
                elif m[i, j] != m[j, i]:
                    out.append(
                        Violation(
                            matrix.district_ids[i],
                            "drive_times",
                            f"asymmetry at ({i},{j}): {m[i, j]} != {m[j, i]}",
                        )
                    )
                if m[i, j] < 0 or m[j, i] < 0:
                    out.append(
                        Violation(
                            matrix.district_ids[i],
                            "drive_times",
                            f"negative entry at ({i},{j})",
                        )
                    )

    return ValidationReport(tuple(out))
