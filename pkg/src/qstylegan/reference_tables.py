"""Published metric tables shipped as scenario CSVs (``name,mean,std,direction[,z0]``)."""
from importlib import resources

from .metrics import load_scenario_table

_PACKAGE = "qstylegan.data.tables"


def available() -> list:
    return sorted(p.name[:-4] for p in resources.files(_PACKAGE).iterdir() if p.name.endswith(".csv"))


def table_path(name: str):
    path = resources.files(_PACKAGE) / f"{name}.csv"
    if not path.is_file():
        raise KeyError(f"no packaged table {name!r}; available: {', '.join(available())}")
    return path


def load(name: str):
    with resources.as_file(table_path(name)) as p:
        return load_scenario_table(p, scenario=name)
