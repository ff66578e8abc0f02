"""CSV and JSON writers for experiment results."""

import csv
import json
import math

import numpy as np

from .experiment import cdf_grid


def fmt(x):
    """Fixed 9-significant-digit formatting; non-finite values become ``inf``/``-inf``."""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return format(x, ".9g")


def _write_rows(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) if not isinstance(v, str) else v for v in row])


def write_cdf_csv(path, result, config):
    grid = cdf_grid(config.cdf_min_db, config.cdf_max_db, config.cdf_step_db)
    sc = result.scenario
    columns, header = [], ["sinr_db"]
    for antennas in sc.antennas:
        for strategy in sc.strategies:
            header.append(f"{strategy}_m{antennas}")
            columns.append(result.cdf(strategy, antennas, grid))
    _write_rows(path, header, zip(grid, *columns))


def write_capacity_csv(path, result):
    sc = result.scenario
    rows = [
        [antennas] + [result.capacity(s, antennas) for s in sc.strategies]
        for antennas in sc.antennas
    ]
    _write_rows(path, ["m"] + list(sc.strategies), rows)


def _key_label(key):
    return f"m{key}" if key != "inf" else "minf"


def write_convergence_csv(path, result):
    cells = result.scenario.cells
    keys = list(result.scenario.antennas) + ["inf"]
    header, columns = ["sweep"], []
    for key in keys:
        avg = result.average_trace(key)
        for c in range(cells):
            header.append(f"cell{c}_{_key_label(key)}")
            columns.append(avg[:, c])
    sweeps = np.arange(len(columns[0]))
    _write_rows(path, header, ([s] + [col[s] for col in columns] for s in sweeps))


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else fmt(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def scenario_echo(scenario):
    cfg = scenario.cfg
    return {
        "cells": scenario.cells,
        "users_per_cell": scenario.users,
        "antennas": list(scenario.antennas),
        "cell_radius": scenario.radius,
        "trials": scenario.trials,
        "seed": scenario.seed,
        "strategies": list(scenario.strategies),
        "target_cell": scenario.target_cell,
        "max_sweeps": scenario.max_sweeps,
        "k_max_exhaustive": scenario.k_max_exhaustive,
        "min_distance_ratio": scenario.min_distance_ratio,
        "pilot_power": cfg.pilot_power,
        "data_power": cfg.data_power,
        "pilot_noise_var": cfg.pilot_noise_var,
        "data_noise_var": cfg.data_noise_var,
        "path_loss_exponent": cfg.path_loss_exponent,
        "shadow_sigma_db": cfg.shadow_sigma_db,
        "cell_edge_snr_db": cfg.cell_edge_snr_db,
    }


def experiment_summary(command, result):
    sc = result.scenario
    stats = {
        strategy: {f"m{m}": result.statistics(strategy, m) for m in sc.antennas}
        for strategy in sc.strategies
    }
    return {"command": command, "scenario": scenario_echo(sc), "strategies": stats}


def convergence_summary(result):
    sc = result.scenario
    sweeps = result.sweeps_to_converge[result.converged]
    histogram = np.bincount(sweeps, minlength=sc.max_sweeps + 1) if sweeps.size else []
    return {
        "command": "convergence",
        "scenario": scenario_echo(sc),
        "converged_fraction": result.converged_fraction(),
        "median_sweeps_to_converge": result.median_sweeps(),
        "sweeps_to_converge_histogram": [int(v) for v in histogram],
        "final_average_min_sinr_db": {
            _key_label(key): result.average_trace(key)[-1].tolist()
            for key in list(sc.antennas) + ["inf"]
        },
    }


def write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")
