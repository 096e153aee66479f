"""Flat CSV schema shared by every mode and by the plotting frontend.

One header, one row per evaluated operating point.  Numeric cells are
written with ``repr(float(x))`` so a parsed value is bit-identical to the
one computed; nothing is rounded on the way to disk.
"""

from __future__ import annotations

import csv

from .errors import ConfigError

__all__ = ["COLUMNS", "write_rows", "read_rows", "breakdown_row"]

COLUMNS = [
    "mode", "L_km", "delta_km", "l_a_km", "l_b_km", "mu_a", "mu_b",
    "test_fraction", "N", "eta_d", "p_d", "alpha", "e_d", "f_e",
    "eps_rs", "eps_bar", "eps_ec", "eps_pa",
    "Q_mu", "E_mu", "E_mu_upper", "P_co",
    "leak_internal", "leak_external",
    "pen_smooth", "pen_ec", "pen_pa", "rate", "flag",
]

_TEXT_COLUMNS = {"mode", "flag"}


def _format(column: str, value) -> str:
    if column in _TEXT_COLUMNS:
        return str(value)
    return repr(float(value))


def write_rows(path: str, rows: list[dict]) -> None:
    """Write rows in schema order; every row must carry exactly COLUMNS."""
    for row in rows:
        missing = set(COLUMNS) - row.keys()
        extra = row.keys() - set(COLUMNS)
        if missing or extra:
            raise ConfigError(
                f"row does not match CSV schema (missing {sorted(missing)}, "
                f"extra {sorted(extra)})")
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(COLUMNS)
        for row in rows:
            writer.writerow([_format(c, row[c]) for c in COLUMNS])


def read_rows(path: str) -> list[dict]:
    """Read a schema CSV back; numeric columns are parsed to float."""
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError(f"{path}: empty file, expected a CSV header")
        for column in COLUMNS:
            if column not in header:
                raise ConfigError(f"{path}: missing column {column}")
        if header != COLUMNS:
            raise ConfigError(f"{path}: header does not match the CSV schema")
        rows = []
        for line in reader:
            if not line:
                continue
            row = {}
            for column, cell in zip(COLUMNS, line):
                row[column] = cell if column in _TEXT_COLUMNS else float(cell)
            rows.append(row)
    return rows


def breakdown_row(mode: str, channel, source, security, test_fraction,
                  breakdown) -> dict:
    """Assemble one analytic row from the building blocks."""
    return {
        "mode": mode,
        "L_km": channel.l_a + channel.l_b,
        "delta_km": channel.l_b - channel.l_a,
        "l_a_km": channel.l_a,
        "l_b_km": channel.l_b,
        "mu_a": source.mu_a,
        "mu_b": source.mu_b,
        "test_fraction": test_fraction,
        "N": security.n_pulses,
        "eta_d": channel.eta_d,
        "p_d": channel.p_d,
        "alpha": channel.alpha,
        "e_d": channel.e_d,
        "f_e": security.f_e,
        "eps_rs": security.eps_rs,
        "eps_bar": security.eps_bar,
        "eps_ec": security.eps_ec,
        "eps_pa": security.eps_pa,
        "Q_mu": breakdown.q_mu,
        "E_mu": breakdown.e_mu,
        "E_mu_upper": breakdown.e_mu_upper,
        "P_co": breakdown.p_co,
        "leak_internal": breakdown.leak_internal,
        "leak_external": breakdown.leak_external,
        "pen_smooth": breakdown.pen_smooth,
        "pen_ec": breakdown.pen_ec,
        "pen_pa": breakdown.pen_pa,
        "rate": breakdown.rate,
        "flag": breakdown.flag,
    }
