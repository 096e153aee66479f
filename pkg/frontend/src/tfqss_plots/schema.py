"""Reader for the flat sweep CSV schema.

This package talks to the rate-modeling tool only through its CSV files,
so the schema is restated here on the consumer side; a producer-side
change must fail loudly rather than plot garbage.  Header order does not
matter, the column set does.
"""

import csv

COLUMNS = [
    "mode", "L_km", "delta_km", "l_a_km", "l_b_km", "mu_a", "mu_b",
    "test_fraction", "N", "eta_d", "p_d", "alpha", "e_d", "f_e",
    "eps_rs", "eps_bar", "eps_ec", "eps_pa",
    "Q_mu", "E_mu", "E_mu_upper", "P_co",
    "leak_internal", "leak_external",
    "pen_smooth", "pen_ec", "pen_pa", "rate", "flag",
]

_TEXT_COLUMNS = {"mode", "flag"}


class SchemaError(ValueError):
    pass


def read_curve(path):
    """Read one CSV into a dict of per-column lists.

    Numeric columns come back as floats, exactly as written (the producer
    uses repr, so nothing is lost).  Raises SchemaError naming the
    missing column when the header does not carry the full schema.
    """
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: empty file, no header")
        have = set(reader.fieldnames)
        missing = [c for c in COLUMNS if c not in have]
        if missing:
            raise SchemaError(f"{path}: missing column {', '.join(missing)}")
        extra = sorted(have - set(COLUMNS))
        if extra:
            raise SchemaError(f"{path}: unknown column {', '.join(extra)}")
        data = {c: [] for c in COLUMNS}
        for row in reader:
            for c in COLUMNS:
                data[c].append(row[c] if c in _TEXT_COLUMNS
                               else float(row[c]))
    return data
