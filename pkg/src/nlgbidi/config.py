"""Runtime configuration: unit synonyms and repetition thresholds.

The built-in defaults can be extended with a JSON file named by the
``NLGBIDI_CONFIG`` environment variable::

    {"units": {"gram": ["g", "grams"]},
     "repetition": {"max_period": 10, "min_repeats": 3}}
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .errors import IoFailure, NlgBidiError

ENV_VAR = "NLGBIDI_CONFIG"

# canonical unit -> spellings (all lowercase)
DEFAULT_UNITS: dict[str, tuple[str, ...]] = {
    "gram": ("g", "gr", "gram", "grams", "gramme", "grammes"),
    "kilogram": ("kg", "kilogram", "kilograms", "kilo", "kilos"),
    "milligram": ("mg", "milligram", "milligrams"),
    "metre": ("m", "metre", "metres", "meter", "meters"),
    "kilometre": ("km", "kilometre", "kilometres", "kilometer", "kilometers"),
    "centimetre": ("cm", "centimetre", "centimetres", "centimeter", "centimeters"),
    "millimetre": ("mm", "millimetre", "millimetres", "millimeter", "millimeters"),
    "foot": ("ft", "foot", "feet"),
    "inch": ("in", "inch", "inches"),
    "mile": ("mi", "mile", "miles"),
    "square kilometre": ("km2", "sq km", "square kilometre", "square kilometres", "square kilometer", "square kilometers"),
    "litre": ("l", "litre", "litres", "liter", "liters"),
    "millilitre": ("ml", "millilitre", "millilitres", "milliliter", "milliliters"),
    "second": ("s", "sec", "secs", "second", "seconds"),
    "minute": ("min", "mins", "minute", "minutes"),
    "hour": ("h", "hr", "hrs", "hour", "hours"),
    "day": ("d", "day", "days"),
    "year": ("yr", "yrs", "year", "years"),
    "kelvin": ("k", "kelvin", "kelvins"),
    "degree celsius": ("c", "celsius", "degrees celsius", "degree celsius"),
    "kilocalorie": ("kcal", "kilocalorie", "kilocalories", "calories"),
    "percent": ("%", "percent", "per cent"),
}


@dataclass(frozen=True)
class Config:
    units: dict[str, tuple[str, ...]] = field(default_factory=lambda: dict(DEFAULT_UNITS))
    max_period: int = 10
    min_repeats: int = 3

    def unit_table(self) -> dict[str, str]:
        """Spelling -> canonical unit."""
        table = {}
        for canonical, spellings in self.units.items():
            table[canonical] = canonical
            for s in spellings:
                table[s.lower()] = canonical
        return table


def load_config(path: str | os.PathLike | None = None) -> Config:
    if path is None:
        path = os.environ.get(ENV_VAR)
    if not path:
        return Config()
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoFailure(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise NlgBidiError(f"config {path} is not valid JSON: {exc}") from exc
    units = dict(DEFAULT_UNITS)
    for canonical, spellings in data.get("units", {}).items():
        units[canonical.lower()] = tuple(units.get(canonical.lower(), ())) + tuple(s.lower() for s in spellings)
    rep = data.get("repetition", {})
    return Config(
        units=units,
        max_period=int(rep.get("max_period", 10)),
        min_repeats=int(rep.get("min_repeats", 3)),
    )
