"""District-level AAY/Priority cardholder estimation.

Pipeline: census fractions x populations -> neighbor imputation of gaps ->
raking against state control totals -> population-cap enforcement with
uniform redistribution of the excess. AAY is counted in households,
Priority in persons, throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import CardholderEstimate, DistrictRecord, Stage
from .errors import Infeasible, NonConvergent, ZeroAggregate

#: The four estimate series carried through steps 1-6.
SERIES = ("rural_aay", "urban_aay", "rural_priority", "urban_priority")

#: district id -> value; None marks a missing entry.
SeriesMap = dict[int, "float | None"]


@dataclass(frozen=True)
class FractionRow:
    """Census-derived cardholder fractions for one district; None = missing."""

    rural_aay: float | None = None
    urban_aay: float | None = None
    rural_priority: float | None = None
    urban_priority: float | None = None

    def __post_init__(self):
        for name in SERIES:
            v = getattr(self, name)
            if v is not None and not 0 <= v <= 1:
                raise ValueError(f"fraction {name}={v} outside [0, 1]")


@dataclass(frozen=True)
class CensusFractionTable:
    rows: dict[int, FractionRow]


@dataclass(frozen=True)
class AdjacencyList:
    """Symmetric district neighborhood graph used for gap imputation."""

    neighbors: dict[int, frozenset[int]]

    def __post_init__(self):
        for d, nbs in self.neighbors.items():
            if d in nbs:
                raise ValueError(f"district {d} has a self-loop")
            for n in nbs:
                if d not in self.neighbors.get(n, frozenset()):
                    raise ValueError(f"edge {d}->{n} is not symmetric")

    def is_connected(self) -> bool:
        if not self.neighbors:
            return True
        seen: set[int] = set()
        stack = [next(iter(self.neighbors))]
        while stack:
            d = stack.pop()
            if d in seen:
                continue
            seen.add(d)
            stack.extend(self.neighbors[d] - seen)
        return seen == set(self.neighbors)


@dataclass(frozen=True)
class StateTotals:
    """State-level cardholder control totals (Food Grain Bulletin style)."""

    rural_aay_households: float
    rural_priority_persons: float
    urban_aay_households: float
    urban_priority_persons: float

    def __post_init__(self):
        for name in (
            "rural_aay_households",
            "rural_priority_persons",
            "urban_aay_households",
            "urban_priority_persons",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"state total {name} must be >= 0")

    def for_series(self, series: str) -> float:
        return {
            "rural_aay": self.rural_aay_households,
            "urban_aay": self.urban_aay_households,
            "rural_priority": self.rural_priority_persons,
            "urban_priority": self.urban_priority_persons,
        }[series]


def estimate_raw(
    fractions: CensusFractionTable, districts: list[DistrictRecord]
) -> dict[str, SeriesMap]:
    """Steps 1-3: fraction x (rural|urban) population; missing propagates."""
    out: dict[str, SeriesMap] = {s: {} for s in SERIES}
    for d in districts:
        row = fractions.rows.get(d.id, FractionRow())
        pops = {
            "rural_aay": d.rural_population,
            "urban_aay": d.urban_population,
            "rural_priority": d.rural_population,
            "urban_priority": d.urban_population,
        }
        for s in SERIES:
            frac = getattr(row, s)
            out[s][d.id] = None if frac is None else frac * pops[s]
    return out


def _impute_series(values: SeriesMap, adjacency: AdjacencyList) -> dict[int, float]:
    """Fill missing entries with the mean of non-missing neighbors.

    Runs repeated passes in ascending district id; values imputed earlier
    in a pass are visible to later districts (Gauss-Seidel). Raises
    NonConvergent when a full pass fills nothing but gaps remain.
    """
    vals = dict(values)
    missing = sorted(d for d, v in vals.items() if v is None)
    while missing:
        still: list[int] = []
        for d in missing:
            known = [
                vals[n]
                for n in sorted(adjacency.neighbors.get(d, frozenset()))
                if vals.get(n) is not None
            ]
            if known:
                vals[d] = sum(known) / len(known)
            else:
                still.append(d)
        if len(still) == len(missing):
            raise NonConvergent(
                f"imputation stalled: districts {still} have no known neighbors"
            )
        missing = still
    return vals  # type: ignore[return-value]


def impute_neighbors(
    estimates: dict[str, SeriesMap], adjacency: AdjacencyList
) -> dict[str, dict[int, float]]:
    """Step 4 applied to each of the four series independently."""
    return {s: _impute_series(estimates[s], adjacency) for s in SERIES}


def _scale_series(
    complete: dict[str, dict[int, float]],
    totals: StateTotals,
    scale_urban: bool = True,
) -> dict[str, dict[int, float]]:
    scaled: dict[str, dict[int, float]] = {}
    for s in SERIES:
        values = complete[s]
        if s.startswith("urban") and not scale_urban:
            scaled[s] = dict(values)
            continue
        total = totals.for_series(s)
        agg = sum(values.values())
        if agg <= 0:
            if total > 0:
                raise ZeroAggregate(f"series {s} sums to 0 but state total is {total}")
            scaled[s] = {d: 0.0 for d in values}
            continue
        factor = total / agg
        scaled[s] = {d: v * factor for d, v in values.items()}
    return scaled


def scale_to_state(
    estimates: dict[str, dict[int, float]],
    totals: StateTotals,
    scale_urban: bool = True,
) -> list[CardholderEstimate]:
    """Steps 5-7: rake each series to its state total, then sum rural+urban.

    With ``scale_urban=False`` the urban series pass through unscaled
    (sensitivity switch; the bulletin totals are rural-anchored).
    """
    scaled = _scale_series(estimates, totals, scale_urban)
    ids = sorted(scaled["rural_aay"])
    return [
        CardholderEstimate(
            district_id=d,
            aay_households=scaled["rural_aay"][d] + scaled["urban_aay"][d],
            priority_persons=scaled["rural_priority"][d] + scaled["urban_priority"][d],
            stage=Stage.SCALED,
        )
        for d in ids
    ]


def cap_and_redistribute(
    estimates: list[CardholderEstimate],
    districts: list[DistrictRecord],
    max_passes: int = 1000,
) -> list[CardholderEstimate]:
    """Steps 8-9: clip districts whose covered persons exceed population.

    Each overflowing district is scaled down to its population cap (AAY and
    Priority shrink by the same factor, i.e. proportionally to their covered
    shares); the removed households/persons are pooled and added in equal
    absolute amounts to every district that did not overflow in that pass.
    Repeats until no district overflows. Series sums are preserved.
    """
    by_id = {d.id: d for d in districts}
    ids = sorted(e.district_id for e in estimates)
    est = {e.district_id: e for e in estimates}
    aay = np.array([est[d].aay_households for d in ids], dtype=float)
    pri = np.array([est[d].priority_persons for d in ids], dtype=float)
    fam = np.array([by_id[d].avg_family_size for d in ids], dtype=float)
    pop = np.array([by_id[d].total_population for d in ids], dtype=float)

    covered_total = float(np.sum(aay * fam + pri))
    pop_total = float(np.sum(pop))
    if covered_total > pop_total * (1 + 1e-12):
        raise Infeasible(
            f"covered persons {covered_total:.0f} exceed state population "
            f"{pop_total:.0f}; no capped allocation exists"
        )

    for _ in range(max_passes):
        covered = aay * fam + pri
        over = covered > pop
        if not over.any():
            break
        rest = ~over
        if not rest.any():
            raise Infeasible("every district overflows its population cap")
        shrink = pop[over] / covered[over]
        pool_aay = float(np.sum(aay[over] * (1 - shrink)))
        pool_pri = float(np.sum(pri[over] * (1 - shrink)))
        aay[over] *= shrink
        pri[over] *= shrink
        n_rest = int(rest.sum())
        aay[rest] += pool_aay / n_rest
        pri[rest] += pool_pri / n_rest

    covered = aay * fam + pri
    excess = covered - pop
    worst = float(np.max(excess / np.maximum(pop, 1.0)))
    if worst > 1e-9:
        raise Infeasible("cap redistribution did not reach a fixpoint")
    # shave float crumbs so the <= cap holds exactly
    for i in np.flatnonzero(excess > 0):
        pri[i] = max(0.0, pri[i] - excess[i])
        while aay[i] * fam[i] + pri[i] > pop[i]:
            if pri[i] > 0:
                pri[i] = np.nextafter(pri[i], 0.0)
            else:
                aay[i] = np.nextafter(aay[i], 0.0)

    return [
        CardholderEstimate(d, float(aay[i]), float(pri[i]), Stage.CAPPED)
        for i, d in enumerate(ids)
    ]


@dataclass(frozen=True)
class PipelineResult:
    raw: dict[str, SeriesMap]
    imputed: dict[str, dict[int, float]]
    scaled: list[CardholderEstimate]
    capped: list[CardholderEstimate]


def estimate_pipeline(
    fractions: CensusFractionTable,
    districts: list[DistrictRecord],
    adjacency: AdjacencyList,
    totals: StateTotals,
    scale_urban: bool = True,
) -> PipelineResult:
    """Run the full estimation pipeline, keeping every stage for inspection."""
    raw = estimate_raw(fractions, districts)
    imputed = impute_neighbors(raw, adjacency)
    scaled = scale_to_state(imputed, totals, scale_urban)
    capped = cap_and_redistribute(scaled, districts)
    return PipelineResult(raw, imputed, scaled, capped)
