import csv

import pytest

from tfqss_plots.schema import COLUMNS

# A realistic producer row; tests override what they care about.
_DEFAULTS = {
    "mode": "sweep", "L_km": 100.0, "delta_km": 0.0, "l_a_km": 50.0,
    "l_b_km": 50.0, "mu_a": 0.05, "mu_b": 0.05, "test_fraction": 0.1,
    "N": 1e12, "eta_d": 0.55, "p_d": 1e-08, "alpha": 0.165, "e_d": 0.02,
    "f_e": 1.15, "eps_rs": 1e-10, "eps_bar": 1e-10, "eps_ec": 1e-10,
    "eps_pa": 1e-10, "Q_mu": 0.004, "E_mu": 0.02, "E_mu_upper": 0.0201,
    "P_co": 0.61, "leak_internal": 0.1, "leak_external": float("nan"),
    "pen_smooth": 2.6e-06, "pen_ec": 3.4e-11, "pen_pa": 6.6e-11,
    "rate": 0.0019, "flag": "ok",
}


def make_row(l_km, rate, **overrides):
    row = dict(_DEFAULTS)
    row["L_km"] = l_km
    row["rate"] = rate
    if rate == 0.0:
        row["flag"] = "zero"
    row.update(overrides)
    return row


def write_curve_csv(path, rows, columns=COLUMNS):
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([
                str(row[c]) if c in ("mode", "flag") else repr(float(row[c]))
                for c in columns])
    return str(path)


@pytest.fixture
def curve_factory(tmp_path):
    def make(name, points, **overrides):
        rows = [make_row(l, r, **overrides) for l, r in points]
        return write_curve_csv(tmp_path / name, rows)
    return make
