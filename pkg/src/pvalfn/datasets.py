"""CSV ingestion and the bundled example datasets."""

from __future__ import annotations

import csv
import hashlib
import io
from importlib import resources
from pathlib import Path

import numpy as np

from pvalfn.models import DataSet, ModelError

BUNDLED = {
    "eight-schools": "eight_schools.csv",
    "overfeeding": "overfeeding.csv",
}


def _read_table(text: str) -> tuple[list[str], list[list[str]]]:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ModelError("data file has no header row")
    rows = list(csv.reader(io.StringIO("\n".join(lines))))
    header = [h.strip() for h in rows[0]]
    body = [[c.strip() for c in r] for r in rows[1:]]
    if not body:
        raise ModelError("data file has no observations")
    if any(len(r) != len(header) for r in body):
        raise ModelError("ragged rows in data file")
    return header, body


def bundled_text(name: str) -> str:
    try:
        fname = BUNDLED[name]
    except KeyError:
        raise ModelError(f"no bundled dataset '{name}' (have: {', '.join(BUNDLED)})") from None
    return resources.files("pvalfn.data").joinpath(fname).read_text()


def parse_csv(text: str, model_name: str) -> tuple[DataSet, dict]:
    """Dataset plus any model constants carried by the file.

    Random-effects files need an ``se`` (or ``sigma``) column, which becomes
    the known sigma_i. Other models use every numeric column, in order,
    ignoring a leading non-numeric label column.
    """
    header, body = _read_table(text)
    columns = list(zip(*body))
    numeric, names = [], []
    for h, col in zip(header, columns):
        try:
            numeric.append(np.array([float(v) for v in col]))
            names.append(h)
        except ValueError:
            continue
    if not numeric:
        raise ModelError("data file has no numeric column")
    constants: dict = {}
    if model_name == "normal-random-effects":
        se_name = next((h for h in ("se", "sigma") if h in names), None)
        if se_name is None:
            raise ModelError("random-effects data needs an 'se' column of known standard errors")
        sigma = numeric[names.index(se_name)]
        rest = [a for h, a in zip(names, numeric) if h != se_name]
        if len(rest) != 1:
            raise ModelError("random-effects data needs exactly one effect column besides 'se'")
        constants["sigma"] = sigma
        return DataSet(rest[0][:, None], {"sigma": sigma}), constants
    return DataSet(np.column_stack(numeric)), constants


def parse_inline(text: str, model_name: str) -> tuple[DataSet, dict]:
    """Inline values: ``"1.2, 3.4, ..."``; rows separated by ``;`` for 2-column data.

    Binomial takes ``"y/n_trials"`` (or ``"y,n_trials"``).
    """
    text = text.strip()
    if model_name == "binomial":
        parts = [p for p in text.replace("/", ",").split(",") if p.strip()]
        if len(parts) != 2:
            raise ModelError("binomial inline data is 'y/n_trials'")
        try:
            y, nt = (float(p) for p in parts)
        except ValueError:
            raise ModelError(f"bad binomial data '{text}'") from None
        if nt != int(nt) or y != int(y):
            raise ModelError("binomial counts must be integers")
        return DataSet(np.array([[y]]), {"n_trials": int(nt)}), {"n_trials": int(nt)}
    rows = [r for r in text.split(";") if r.strip()]
    try:
        arr = np.array([[float(v) for v in r.replace(",", " ").split()] for r in rows])
    except ValueError:
        raise ModelError(f"bad inline data '{text}'") from None
    if len(rows) == 1:
        arr = arr.reshape(-1, 1)
    return DataSet(arr), {}


def load_data(model_name: str, path: str | None = None, inline: str | None = None) -> tuple[DataSet, dict, str]:
    """Returns (data, constants, sha256 of the source bytes)."""
    if (path is None) == (inline is None):
        raise ModelError("give exactly one of a data path or inline values")
    if inline is not None:
        data, const = parse_inline(inline, model_name)
        digest = hashlib.sha256(inline.encode()).hexdigest()
        return data, const, digest
    if path in BUNDLED:
        text = bundled_text(path)
    else:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ModelError(f"cannot read data file: {exc}") from None
    data, const = parse_csv(text, model_name)
    return data, const, hashlib.sha256(text.encode()).hexdigest()


def eight_schools() -> tuple[np.ndarray, np.ndarray]:
    """(effects, standard errors) of the eight-schools data."""
    data, const = parse_csv(bundled_text("eight-schools"), "normal-random-effects")
    return data.obs[:, 0], const["sigma"]


def overfeeding() -> DataSet:
    return parse_csv(bundled_text("overfeeding"), "bivariate-normal-corr")[0]
