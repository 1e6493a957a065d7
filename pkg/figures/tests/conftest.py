import numpy as np
import pytest

from weakmeas_figures.schema import (ENSEMBLE_ME2_COLUMNS, GOALPROG_COLUMNS,
                                     SWEEP_COLUMNS, TRAJECTORY_COLUMNS)

COMMENT = "# weakmeas 0.1.0 scenario=test config=0123456789abcdef seed=1 format_version=1"


def write_csv(path, columns, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(COMMENT + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(str(c) for c in row) + "\n")
    return str(path)


@pytest.fixture()
def trajectory_csv(tmp_path):
    rng = np.random.default_rng(1)
    rows = []
    for i in range(40):
        t = 0.2 * i
        base = [t, 0.5 + 0.4 * np.cos(t), 0.5 + 0.3 * np.cos(t - 0.3),
                0.5 + 0.5 * np.cos(t), 0.4, 0.1, 0.6, 0.9,
                0.5 * np.exp(-0.05 * t), 0.05 * t, 0.3]
        # an infinite entry exercises the gap path
        if i == 20:
            base[9] = "inf"
        rows.append(base)
    return write_csv(tmp_path / "trajectory.csv", TRAJECTORY_COLUMNS, rows)


@pytest.fixture()
def ensemble_me2_csv(tmp_path):
    rows = []
    for i in range(30):
        t = 0.3 * i
        rows.append([t, 0.5 + 0.4 * np.cos(t), 0.5 + 0.3 * np.cos(t - 0.2),
                     0.5 + 0.5 * np.cos(t), 0.4, 0.1, 0.6, 0.9, 0.5, 0.1, 0.3,
                     0.01, 0.01, 0.005, 0.005, 0.01, "inf", 0.01,
                     0.35, 0.08, 0.45, 0.09, 0.28,
                     0.5 + 0.29 * np.cos(t - 0.2)])
    return write_csv(tmp_path / "ensemble.csv", ENSEMBLE_ME2_COLUMNS, rows)


@pytest.fixture()
def sweep_csv(tmp_path):
    rows = []
    t_vals = np.linspace(0.0, 10.0, 12)
    k_vals = np.linspace(0.002, 0.02, 5)
    for k in k_vals:
        cross_at = int(3 + 100 * k)
        for i, t in enumerate(t_vals):
            c = 0.7 * np.exp(-40.0 * k * t)
            b = 2.0 * k * t
            e = 0.69 - 0.4 * np.exp(-30.0 * k * t) * (1 - np.exp(-20.0 * k * t))
            rows.append([t, k, c, b, e, 1 if i == cross_at else 0])
    return write_csv(tmp_path / "sweep.csv", SWEEP_COLUMNS, rows)


@pytest.fixture()
def goalprog_csv(tmp_path):
    rows = []
    for k in np.linspace(0.002, 0.02, 5):
        for t in np.linspace(0.0, 10.0, 12):
            c = 0.7 * np.exp(-40.0 * k * t)
            b = 2.0 * k * t
            d1p, d1m = max(c - 0.1, 0.0), max(0.1 - c, 0.0)
            d2p, d2m = max(b - 0.1, 0.0), max(0.1 - b, 0.0)
            rows.append([t, k, d1p + d2p, d1p, d1m, d2p, d2m])
    return write_csv(tmp_path / "goalprog_a.csv", GOALPROG_COLUMNS, rows)
