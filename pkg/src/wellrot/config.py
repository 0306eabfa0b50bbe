"""Experiment configuration: strict JSON schema and unit conversion.

Config files carry energies in plain GHz (as quoted on a spectrum analyzer);
this module is the single place where they are converted to the angular GHz
(rad/ns) used by the library. Unknown keys anywhere in the document are
rejected, so a typo cannot silently fall back to a default. All pipelines are
deterministic; there is no random seed.
"""

from __future__ import annotations

import copy
import json
import math
from pathlib import Path
from typing import Any

from .basis import ModeSpec
from .errors import ConfigError
from .hamiltonians import CircuitParams
from .junctions import JunctionSpec

TWO_PI = 2.0 * math.pi

DEFAULTS: dict[str, Any] = {
    "circuit": {
        "alpha_ghz": 20.0,
        "beta_ghz": 20.0,
        "zeta_ghz": 20.0,
        "ec_theta_ghz": 0.1,
        "ec_phi_ghz": 0.1,
        "g_ghz": 0.0,
        "alpha_g_ghz": None,
        "beta_g_ghz": 0.0,
        "epsilon_g_ghz": 0.0,
        "epsilon_theta_ghz": 0.0,
        "epsilon_phi_ghz": 0.0,
    },
    "modes": {"n_cut": 15, "n_offset": 0.0},
    "phi_grid": {"points": 33, "start_over_pi": 0.0, "stop_over_pi": 1.0},
    "angles_over_pi": [0.0, 0.1875, 0.25, 0.3125, 0.5, 0.6875, 0.75, 0.8125, 1.0],
    "levels": 6,
    "grid_points": 101,
    "models": ["circuit", "sinsin"],
    "basis": "phase",
    "schedule": {
        "bound_factor": 1e-3,
        "resolution": 129,
        "m_count": 12,
        "rate_ceiling": 100.0,
    },
    "evolution": {"step_tol": 1e-7, "norm_tol": 1e-8, "snapshots": 9},
    "junction": {
        "gap_ghz": 40.0,
        "left_transmissions": [1.0],
        "swept_transmissions": [0.2, 0.4, 0.6, 0.8, 0.9, 1.0],
        "flux_over_pi": 1.0,
        "m_max": 8,
        "n_max": 200,
    },
    "sweep": {"zeta_over_ej": [0.25, 0.5, 1.0], "ec_ghz": [0.1, 0.4]},
    "output_dir": None,
}

_KNOWN_MODELS = ("circuit", "sinsin", "sinsin-cos", "ideal", "lowenergy", "lowenergy-corrected")


def _merge_strict(defaults: dict, given: dict, path: str = "") -> dict:
    merged = copy.deepcopy(defaults)
    for key, value in given.items():
        where = f"{path}.{key}" if path else key
        if key not in defaults:
            raise ConfigError(f"unknown config key: {where}")
        if isinstance(defaults[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{where} must be an object")
            merged[key] = _merge_strict(defaults[key], value, where)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ConfigError(message)


class ExperimentConfig:
    """Validated experiment configuration with unit-converting accessors."""

    def __init__(self, document: dict | None = None) -> None:
        self.raw = _merge_strict(DEFAULTS, document or {})
        self._validate()

    @classmethod
    def load(cls, path: str | Path | None, overrides: list[str] | None = None) -> "ExperimentConfig":
        document: dict = {}
        if path is not None:
            try:
                document = json.loads(Path(path).read_text())
            except FileNotFoundError as exc:
                raise ConfigError(f"config file not found: {path}") from exc
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file is not valid JSON: {exc}") from exc
            if not isinstance(document, dict):
                raise ConfigError("config document must be a JSON object")
        config = cls(document)
        for override in overrides or []:
            config = config.with_override(override)
        return config

    def with_override(self, assignment: str) -> "ExperimentConfig":
        """Apply one 'dotted.path=value' override and re-validate."""
        key, sep, raw_value = assignment.partition("=")
        if not sep:
            raise ConfigError(f"override must look like key=value, got {assignment!r}")
        try:
            value = json.loads(raw_value)
        except json.JSONDecodeError:
            value = raw_value
        document = copy.deepcopy(self.raw)
        node = document
        parts = key.strip().split(".")
        for part in parts[:-1]:
            if part not in node or not isinstance(node[part], dict):
                raise ConfigError(f"unknown config key: {key}")
            node = node[part]
        if parts[-1] not in node:
            raise ConfigError(f"unknown config key: {key}")
        node[parts[-1]] = value
        return ExperimentConfig(document)

    def _validate(self) -> None:
        raw = self.raw
        circuit = raw["circuit"]
        for key in ("alpha_ghz", "beta_ghz", "ec_theta_ghz", "ec_phi_ghz"):
            _require(
                isinstance(circuit[key], (int, float)) and circuit[key] > 0,
                f"circuit.{key} must be positive",
            )
        modes = raw["modes"]
        _require(isinstance(modes["n_cut"], int) and modes["n_cut"] >= 1, "modes.n_cut must be >= 1")
        grid = raw["phi_grid"]
        _require(grid["points"] >= 2, "phi_grid.points must be >= 2")
        _require(
            0.0 <= grid["start_over_pi"] < grid["stop_over_pi"] <= 1.0,
            "phi_grid must satisfy 0 <= start < stop <= 1 (units of pi)",
        )
        _require(
            all(0.0 <= a <= 1.0 for a in raw["angles_over_pi"]),
            "angles_over_pi entries must lie in [0, 1]",
        )
        _require(raw["levels"] >= 2, "levels must be >= 2")
        _require(raw["grid_points"] >= 64, "grid_points must be >= 64 for figure output")
        _require(raw["basis"] in ("phase", "charge"), "basis must be 'phase' or 'charge'")
        for model in raw["models"]:
            _require(model in _KNOWN_MODELS, f"unknown model {model!r}")
        schedule = raw["schedule"]
        _require(schedule["bound_factor"] > 0, "schedule.bound_factor must be positive")
        _require(schedule["resolution"] >= 64, "schedule.resolution must be >= 64")
        _require(schedule["m_count"] >= 3, "schedule.m_count must be >= 3")
        _require(schedule["rate_ceiling"] > 0, "schedule.rate_ceiling must be positive")
        evolution = raw["evolution"]
        _require(evolution["step_tol"] > 0, "evolution.step_tol must be positive")
        _require(evolution["norm_tol"] > 0, "evolution.norm_tol must be positive")
        _require(
            isinstance(evolution["snapshots"], int) and evolution["snapshots"] >= 0,
            "evolution.snapshots must be a non-negative integer",
        )
        junction = raw["junction"]
        _require(junction["gap_ghz"] > 0, "junction.gap_ghz must be positive")
        for name in ("left_transmissions", "swept_transmissions"):
            values = junction[name]
            _require(
                len(values) > 0 and all(0.0 <= t <= 1.0 for t in values),
                f"junction.{name} must be probabilities in [0, 1]",
            )
        _require(junction["m_max"] >= 2, "junction.m_max must be >= 2")
        _require(junction["n_max"] >= junction["m_max"], "junction.n_max must be >= m_max")
        sweep = raw["sweep"]
        _require(
            len(sweep["zeta_over_ej"]) > 0 and all(z > 0 for z in sweep["zeta_over_ej"]),
            "sweep.zeta_over_ej must be positive ratios",
        )
        _require(
            len(sweep["ec_ghz"]) > 0 and all(e > 0 for e in sweep["ec_ghz"]),
            "sweep.ec_ghz must be positive",
        )

    # unit-converting accessors -------------------------------------------

    def circuit_params(
        self, zeta_ghz: float | None = None, ec_ghz: float | None = None
    ) -> CircuitParams:
        c = self.raw["circuit"]
        ec_theta = ec_ghz if ec_ghz is not None else c["ec_theta_ghz"]
        ec_phi = ec_ghz if ec_ghz is not None else c["ec_phi_ghz"]
        zeta = zeta_ghz if zeta_ghz is not None else c["zeta_ghz"]
        alpha_g = c["alpha_g_ghz"]
        return CircuitParams(
            alpha=TWO_PI * c["alpha_ghz"],
            beta=TWO_PI * c["beta_ghz"],
            zeta=TWO_PI * zeta,
            E_C_theta=TWO_PI * ec_theta,
            E_C_phi=TWO_PI * ec_phi,
            g=TWO_PI * c["g_ghz"],
            alpha_g=None if alpha_g is None else TWO_PI * alpha_g,
            beta_g=TWO_PI * c["beta_g_ghz"],
            epsilon_g=TWO_PI * c["epsilon_g_ghz"],
            epsilon_theta=TWO_PI * c["epsilon_theta_ghz"],
            epsilon_phi=TWO_PI * c["epsilon_phi_ghz"],
        )

    def mode_pair(self, ec_ghz: float | None = None) -> tuple[ModeSpec, ModeSpec]:
        m = self.raw["modes"]
        c = self.raw["circuit"]
        ec_theta = ec_ghz if ec_ghz is not None else c["ec_theta_ghz"]
        ec_phi = ec_ghz if ec_ghz is not None else c["ec_phi_ghz"]
        return (
            ModeSpec(n_cut=m["n_cut"], E_C=TWO_PI * ec_theta, n_offset=m["n_offset"]),
            ModeSpec(n_cut=m["n_cut"], E_C=TWO_PI * ec_phi, n_offset=m["n_offset"]),
        )

    def phi_grid(self):
        import numpy as np

        g = self.raw["phi_grid"]
        return np.linspace(
            g["start_over_pi"] * math.pi, g["stop_over_pi"] * math.pi, g["points"]
        )

    def angle_list(self):
        return [a * math.pi for a in self.raw["angles_over_pi"]]

    def junction_pair(self, swept_value: float) -> tuple[JunctionSpec, JunctionSpec]:
        j = self.raw["junction"]
        gap = TWO_PI * j["gap_ghz"]
        left = JunctionSpec(
            gap=gap,
            transmissions=tuple(j["left_transmissions"]),
            m_max=j["m_max"],
            n_max=j["n_max"],
        )
        right = JunctionSpec(
            gap=gap, transmissions=(swept_value,), m_max=j["m_max"], n_max=j["n_max"]
        )
        return left, right

    def flux(self) -> float:
        return self.raw["junction"]["flux_over_pi"] * math.pi
