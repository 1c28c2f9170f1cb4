"""Panel ingestion, energy taxonomy, deflation, and assembly of model inputs.

The canonical on-disk layout is long format with a header::

    region,year,indicator,value,unit

Wide tables (a year column followed by one column per
region) are converted with :func:`wide_to_long`.
"""
from __future__ import annotations

import csv
import enum
import io
import logging
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from deagrey.dea import DeaInstance
from deagrey.errors import (DuplicateKeyError, MissingDataError,
                            UnclassifiedIndicatorError, ValidationError)
from deagrey.grey import Series

log = logging.getLogger(__name__)

COLUMNS = ("region", "year", "indicator", "value", "unit")
BBTU = "billion BTU"
BASE_YEAR = 2009


@dataclass(frozen=True)
class Observation:
    region: str
    year: int
    indicator: str
    value: float
    unit: str = ""

    def __post_init__(self):
        if not 1900 <= self.year <= 2100:
            raise ValidationError(f"year {self.year} outside [1900, 2100]")
        if not math.isfinite(self.value):
            raise ValidationError(
                f"non-finite value for ({self.region}, {self.indicator}, {self.year})")

    @property
    def key(self):
        return (self.region, self.indicator, self.year)


class Panel:
    """Immutable set of observations keyed by ``(region, indicator, year)``."""

    def __init__(self, observations: Iterable[Observation]):
        data = {}
        dupes = []
        units = {}
        for ob in observations:
            if ob.key in data:
                dupes.append(ob.key)
                continue
            data[ob.key] = ob
            prev = units.setdefault(ob.indicator, ob.unit)
            if prev != ob.unit:
                raise ValidationError(
                    f"indicator {ob.indicator!r} mixes units {prev!r} and {ob.unit!r}")
        if dupes:
            raise DuplicateKeyError(dupes)
        self._data = data
        self._units = units
        self.load_stats = {}

    def __len__(self):
        return len(self._data)

    def __iter__(self):
        return iter(self._data.values())

    def __eq__(self, other):
        return isinstance(other, Panel) and self._data == other._data

    def __contains__(self, key):
        return key in self._data

    def __repr__(self):
        return (f"Panel({len(self)} observations, {len(self.regions)} regions, "
                f"{len(self.indicators)} indicators)")

    def get(self, region, indicator, year) -> Observation:
        try:
            return self._data[(region, indicator, int(year))]
        except KeyError:
            raise MissingDataError(
                f"no observation for ({region}, {indicator}, {year})",
                [(region, indicator, int(year))]) from None

    def value(self, region, indicator, year) -> float:
        return self.get(region, indicator, year).value

    def unit_of(self, indicator):
        try:
            return self._units[indicator]
        except KeyError:
            raise MissingDataError(f"indicator {indicator!r} not in panel",
                                   [indicator]) from None

    @property
    def regions(self):
        return list(dict.fromkeys(k[0] for k in self._data))

    @property
    def indicators(self):
        return list(self._units)

    @property
    def years(self):
        return sorted({k[2] for k in self._data})

    def select(self, regions=None, indicators=None, years=None):
        regions = None if regions is None else set(regions)
        indicators = None if indicators is None else set(indicators)
        years = None if years is None else {int(y) for y in years}
        return Panel(ob for ob in self
                     if (regions is None or ob.region in regions)
                     and (indicators is None or ob.indicator in indicators)
                     and (years is None or ob.year in years))

    def merge(self, other):
        return Panel([*self, *other])


def format_number(x) -> str:
    """Shortest round-tripping decimal text; integral values lose the trailing ``.0``."""
    x = float(x)
    if x.is_integer() and abs(x) < 1e16:
        return str(int(x))
    return repr(x)


def _open_text(source):
    if isinstance(source, (str, Path)):
        return open(source, newline="", encoding="utf-8")
    return source


def _sniff_delimiter(header_line, delimiter):
    if delimiter:
        return delimiter
    return "\t" if header_line.count("\t") > header_line.count(",") else ","


def _read_rows(source, delimiter=None):
    fh = _open_text(source)
    try:
        text = fh.read()
    finally:
        if fh is not source:
            fh.close()
    if text.startswith("\ufeff"):
        text = text[1:]
    first = text.split("\n", 1)[0]
    if not first.strip():
        raise ValidationError("input has no header row")
    reader = csv.reader(io.StringIO(text), delimiter=_sniff_delimiter(first, delimiter))
    rows = [r for r in reader if any(cell.strip() for cell in r)]
    header = [h.strip() for h in rows[0]]
    return header, rows[1:]


def _parse_float(text, where):
    try:
        return float(text)
    except ValueError:
        raise ValidationError(f"malformed number {text!r} at {where}") from None


def _parse_int(text, where):
    try:
        return int(text)
    except ValueError:
        try:
            f = float(text)
        except ValueError:
            f = math.nan
        if not f.is_integer():
            raise ValidationError(f"malformed year {text!r} at {where}") from None
        return int(f)


def load_panel(source, schema: Mapping[str, str] | None = None,
               delimiter: str | None = None) -> Panel:
    """Read a long-format delimited file into a :class:`Panel`.

    Parameters
    ----------
    source : path or text stream
    schema : mapping, optional
        Logical column name (``region``, ``year``, ``indicator``, ``value``,
        ``unit``) to header name. Defaults to the identity mapping.
    delimiter : str, optional
        Comma or tab; sniffed from the header when omitted.
    """
    schema = {c: c for c in COLUMNS} | dict(schema or {})
    unknown = set(schema) - set(COLUMNS)
    if unknown:
        raise ValidationError(f"unknown schema keys: {sorted(unknown)}")
    header, rows = _read_rows(source, delimiter)
    idx = {}
    for logical, col in schema.items():
        if col not in header:
            if logical == "unit":
                continue
            raise ValidationError(f"column {col!r} not found in header {header}")
        idx[logical] = header.index(col)
    obs = []
    for lineno, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise ValidationError(
                f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        where = f"line {lineno}"
        obs.append(Observation(
            region=row[idx["region"]].strip(),
            year=_parse_int(row[idx["year"]].strip(), where),
            indicator=row[idx["indicator"]].strip(),
            value=_parse_float(row[idx["value"]].strip(), where),
            unit=row[idx["unit"]].strip() if "unit" in idx else ""))
    panel = Panel(obs)
    panel.load_stats = {"rows": len(rows), "columns": len(header)}
    log.info("loaded %d rows x %d columns", len(rows), len(header))
    return panel


def emit_panel(panel: Panel, dest=None, delimiter=",") -> str | None:
    """Write ``panel`` in long format; returns the text when ``dest`` is None."""
    buf = io.StringIO()
    w = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    w.writerow(COLUMNS)
    for ob in panel:
        w.writerow([ob.region, ob.year, ob.indicator, format_number(ob.value), ob.unit])
    text = buf.getvalue()
    if dest is None:
        return text
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(text, encoding="utf-8")
    else:
        dest.write(text)
    return None


def wide_to_long(source, indicator: str, unit: str = "", year_column: str = "year",
                 year_offset: int = 0, delimiter: str | None = None) -> Panel:
    """Convert a ``year, region1, region2, ...`` matrix into a long :class:`Panel`.

    ``year_offset`` is added to every year cell (1900 for two-digit years).
    """
    header, rows = _read_rows(source, delimiter)
    if year_column not in header:
        raise ValidationError(f"year column {year_column!r} not in header {header}")
    yi = header.index(year_column)
    obs = []
    for lineno, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise ValidationError(
                f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        year = _parse_int(row[yi].strip(), f"line {lineno}") + year_offset
        for j, region in enumerate(header):
            if j == yi or not row[j].strip():
                continue
            obs.append(Observation(region, year, indicator,
                                   _parse_float(row[j].strip(), f"line {lineno}"), unit))
    panel = Panel(obs)
    panel.load_stats = {"rows": len(rows), "columns": len(header)}
    return panel


# ---------------------------------------------------------------- deflation

@dataclass(frozen=True)
class DeflatorTable:
    """Year to multiplier converting nominal dollars into base-year dollars."""

    multipliers: Mapping[int, float]
    base_year: int = BASE_YEAR

    def __post_init__(self):
        m = {int(y): float(v) for y, v in dict(self.multipliers).items()}
        if any(not (v > 0 and math.isfinite(v)) for v in m.values()):
            raise ValidationError("deflator multipliers must be positive")
        if m.get(self.base_year) != 1.0:
            raise ValidationError(f"base year {self.base_year} must map to exactly 1")
        object.__setattr__(self, "multipliers", m)

    def multiplier(self, year) -> float:
        try:
            return self.multipliers[int(year)]
        except KeyError:
            raise MissingDataError(f"no deflator for year {year}", [int(year)]) from None

    @property
    def years(self):
        return sorted(self.multipliers)


def deflate(value, year, table: DeflatorTable) -> float:
    """Nominal dollars in ``year`` expressed in base-year dollars."""
    return value * table.multiplier(year)


def is_dollar_unit(unit: str) -> bool:
    return "dollar" in unit.lower()


def deflate_panel(panel: Panel, table: DeflatorTable) -> Panel:
    """Deflate every observation whose unit is denominated in dollars."""
    return Panel(
        Observation(ob.region, ob.year, ob.indicator, deflate(ob.value, ob.year, table), ob.unit)
        if is_dollar_unit(ob.unit) else ob
        for ob in panel)


# ---------------------------------------------------------------- shipped data

def _data_path(name):
    return resources.files("deagrey").joinpath("data", name)


def load_deflators() -> DeflatorTable:
    with _data_path("deflator_1960_2009.csv").open("r", encoding="utf-8") as fh:
        header, rows = _read_rows(fh)
    return DeflatorTable({int(r[0]): float(r[1]) for r in rows})


def load_prices() -> Panel:
    """Average end-use energy price per state, 1970-2009."""
    with _data_path("price_1970_2009.csv").open("r", encoding="utf-8") as fh:
        return wide_to_long(fh, "AVG_PRICE", "million dollars per billion Btu")


def load_population() -> Panel:
    """State population in ten-thousand persons, 1960-1999."""
    with _data_path("population_1960_1999.csv").open("r", encoding="utf-8") as fh:
        return wide_to_long(fh, "POPULATION", "ten-thousand persons", year_offset=1900)


def load_states_2009() -> Panel:
    """2009 clean-renewable output and five input indicators for AZ, CA, NM, TX.

    Values are as printed; the last three columns look permuted relative to
    their headers and are kept that way.
    """
    with _data_path("states_2009.csv").open("r", encoding="utf-8") as fh:
        return load_panel(fh)


STATES_2009_OUTPUTS = ("CRN_USE",)
STATES_2009_INPUTS = ("REVENUE", "PRICE", "URBAN_POP_RATIO", "ADULT_HS_PCT", "UNEMPLOYMENT")


# ---------------------------------------------------------------- taxonomy

class EnergyClass(str, enum.Enum):
    CRN = "CRN"        # cleaner renewable
    CNRN = "CNRN"      # cleaner non-renewable
    NCNRN = "NCNRN"    # non-cleaner non-renewable
    NCRN = "NCRN"      # non-cleaner renewable


class ClassMapping(str, enum.Enum):
    PAPER = "paper"
    CORRECTED = "corrected"


class Sector(str, enum.Enum):
    INDUSTRIAL = "INDUSTRIAL"
    TRANSPORTATION = "TRANSPORTATION"
    COMMERCIAL = "COMMERCIAL"
    RESIDENTIAL = "RESIDENTIAL"


_CLEAN_RENEWABLE = ("ELECTRICITY", "GEOTHERMAL", "ETHANOL", "SOLAR", "WIND", "HYDROELECTRIC")
_CLEAN_NONRENEWABLE = ("NATURAL_GAS",)
_BIOMASS = ("WOOD", "WASTE", "WOOD_AND_WASTE")
_FOSSIL = ("COAL", "PETROLEUM", "ASPHALT", "GASOLINE", "LUBRICANTS", "DISTILLATE_FUEL",
           "JET_FUEL", "LPG", "RESIDUAL_FUEL", "KEROSENE")

# As printed: biomass is non-renewable and coal/oil renewable.
_PAPER_TABLE = {
    **{c: EnergyClass.CRN for c in _CLEAN_RENEWABLE},
    **{c: EnergyClass.CNRN for c in _CLEAN_NONRENEWABLE},
    **{c: EnergyClass.NCNRN for c in _BIOMASS},
    **{c: EnergyClass.NCRN for c in _FOSSIL},
}
_CORRECTED_TABLE = {
    **_PAPER_TABLE,
    **{c: EnergyClass.NCRN for c in _BIOMASS},
    **{c: EnergyClass.NCNRN for c in _FOSSIL},
}
ENERGY_CODES = tuple(_PAPER_TABLE)


def classify_energy(indicator: str,
                    mapping: ClassMapping = ClassMapping.PAPER) -> EnergyClass:
    table = _PAPER_TABLE if ClassMapping(mapping) is ClassMapping.PAPER else _CORRECTED_TABLE
    try:
        return table[indicator.upper()]
    except KeyError:
        raise UnclassifiedIndicatorError(indicator) from None


def sector_of(indicator: str) -> Sector:
    """Sector of a consumption indicator named ``SECTOR`` or ``SECTOR.<source>``."""
    head = indicator.upper().split(".", 1)[0]
    try:
        return Sector(head)
    except ValueError:
        raise ValidationError(f"indicator {indicator!r} does not name a sector") from None


def group_indicators(indicators: Iterable[str], grouping: str,
                     mapping: ClassMapping = ClassMapping.PAPER) -> dict:
    """Partition indicator codes by energy class (``"class"``) or sector (``"sector"``).

    Every group is present in the result, possibly empty. Codes that fall
    outside the grouping raise.
    """
    if grouping == "class":
        groups = {c.value: [] for c in EnergyClass}
        for code in indicators:
            groups[classify_energy(code, mapping).value].append(code)
    elif grouping == "sector":
        groups = {s.value: [] for s in Sector}
        for code in indicators:
            groups[sector_of(code).value].append(code)
    else:
        raise ValidationError(f"unknown grouping {grouping!r}")
    return groups


def aggregate(panel: Panel, region: str, indicators: Sequence[str],
              years: Iterable[int]) -> Series:
    """Yearly sum of ``indicators`` for one region as a :class:`Series`.

    Years must be consecutive; any missing (indicator, year) cell is an error
    listing every gap. An empty group sums to zero.
    """
    years = [int(y) for y in years]
    if not years:
        raise ValidationError("empty year range")
    if years != list(range(years[0], years[0] + len(years))):
        raise ValidationError("aggregation years must be consecutive")
    units = {panel.unit_of(code) for code in indicators}
    if len(units) > 1:
        raise ValidationError(f"group mixes units {sorted(units)}")
    gaps = [(region, code, y) for code in indicators for y in years
            if (region, code, y) not in panel]
    if gaps:
        raise MissingDataError(f"{len(gaps)} missing cells, e.g. {gaps[:5]}", gaps)
    values = np.zeros(len(years))
    for code in indicators:
        values += [panel.value(region, code, y) for y in years]
    return Series(years[0], values, units.pop() if units else BBTU)


def shares(group_series: Mapping[str, Series]) -> dict:
    """Per-year fraction of each group in the total (pie-chart data)."""
    arrays = {g: s.values for g, s in group_series.items()}
    total = np.sum(list(arrays.values()), axis=0)
    if np.any(total <= 0):
        raise ValidationError("share undefined for a year with zero total")
    return {g: v / total for g, v in arrays.items()}


# ---------------------------------------------------------------- DEA assembly

@dataclass(frozen=True)
class DeaSpec:
    """What to pull from a panel for one DEA instance.

    ``dmu_axis="region"`` scores ``regions`` in a single year (``years`` holds
    that one year); ``dmu_axis="year"`` scores the ``years`` of one region.
    """

    outputs: Sequence[str]
    inputs: Sequence[str]
    dmu_axis: str = "region"
    regions: Sequence[str] | None = None
    years: Sequence[int] | None = None
    deflate: bool = False
    zero_policy: str = "reject"


def states_2009_spec() -> DeaSpec:
    return DeaSpec(STATES_2009_OUTPUTS, STATES_2009_INPUTS, "region", ("AZ", "CA", "NM", "TX"), (2009,))


def build_dea_instance(panel: Panel, spec: DeaSpec,
                       deflators: DeflatorTable | None = None) -> DeaInstance:
    """Assemble input/output matrices, one column per DMU, from ``panel``."""
    if not spec.outputs or not spec.inputs:
        raise ValidationError("DEA needs at least one output and one input indicator")
    if spec.dmu_axis == "region":
        regions = list(spec.regions) if spec.regions is not None else panel.regions
        years = list(spec.years or [])
        if len(years) != 1:
            raise ValidationError("regions-as-DMUs needs exactly one year")
        cells = [(r, years[0], r) for r in regions]
    elif spec.dmu_axis == "year":
        regions = list(spec.regions or [])
        if len(regions) != 1:
            raise ValidationError("years-as-DMUs needs exactly one region")
        years = sorted(spec.years) if spec.years is not None else panel.years
        cells = [(regions[0], int(y), str(y)) for y in years]
    else:
        raise ValidationError(f"unknown dmu_axis {spec.dmu_axis!r}")
    if not cells:
        raise ValidationError("empty DMU list")
    if spec.deflate and deflators is None:
        deflators = load_deflators()

    missing = [(name, code) for region, year, name in cells
               for code in (*spec.outputs, *spec.inputs)
               if (region, code, year) not in panel]
    if missing:
        raise MissingDataError(f"missing (DMU, indicator) cells: {missing[:10]}", missing)

    provenance = {}

    def matrix(kind, codes):
        M = np.empty((len(codes), len(cells)))
        for i, code in enumerate(codes):
            unit = panel.unit_of(code)
            for j, (region, year, name) in enumerate(cells):
                raw = panel.value(region, code, year)
                mult = deflators.multiplier(year) if spec.deflate and is_dollar_unit(unit) else 1.0
                M[i, j] = raw * mult
                provenance[(kind, code, name)] = {
                    "region": region, "year": year, "raw": raw, "multiplier": mult}
        return M

    Y = matrix("output", list(spec.outputs))
    X = matrix("input", list(spec.inputs))
    return DeaInstance(
        tuple(name for _, _, name in cells), X, Y,
        tuple(spec.inputs), tuple(spec.outputs),
        tuple(panel.unit_of(c) for c in spec.inputs),
        tuple(panel.unit_of(c) for c in spec.outputs),
        provenance=provenance, zero_policy=spec.zero_policy)
