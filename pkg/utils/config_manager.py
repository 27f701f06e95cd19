#!/usr/bin/env python3
"""
ConfigManager - Gestión de configuración persistente
Tolerancias, presupuestos y semillas de los motores de análisis
"""

import json
import logging
import os
from typing import Any, Dict, Optional

logger = logging.getLogger(__name__)

THREADS_ENV = "RELU_IDENT_THREADS"


def thread_count(configured: Optional[int] = None) -> int:
    """Hilos de trabajo: RELU_IDENT_THREADS si está definida, si no `configured`, si no 1."""
    raw = os.environ.get(THREADS_ENV)
    if raw is not None and raw.strip():
        try:
            value = int(raw)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} debe ser un entero positivo, no {raw!r}")
        if value < 1:
            raise ValueError(f"{THREADS_ENV} debe ser un entero positivo, no {raw!r}")
        return value
    if configured:
        return max(1, int(configured))
    return 1


class ConfigManager:
    """Gestor de configuración con persistencia en JSON."""

    def __init__(self, config_file: str = "relu_ident_config.json"):
        self.config_file = config_file
        self.default_config = {
            "path_budget": 10 ** 7,
            "subset_cap": 22,
            "collinearity_rtol": 1e-9,
            "float_atol": 0.0,
            "rank_rtol": 1e-9,
            "margin": 1e-6,
            "seed": 0,
            "samples": 64,
            "radius_sweep": [0.25, 1.0, 4.0],
            "max_resample_factor": 100,
            "identset_max_halvings": 30,
            "validation_trials": 500,
            "validation_epsilon": 1e-3,
            "ps_search_budget": 100000,
            "box_radius": 3.0,
            "grid_points": 64,
            "kink_tol": 1e-6,
            "fit_residual": 1e-7,
            "ransac_trials": 2000,
            "jacobian_step": 1e-5,
            "rank_one_rtol": 1e-6,
            "query_budget_per_unit": 2000,
            "max_units": 8,
            "verify_points": 1000,
            "threads": None,
        }
        self.config = self.load_config()

    def load_config(self) -> Dict[str, Any]:
        """Carga la configuración desde el archivo."""
        try:
            if os.path.exists(self.config_file):
                with open(self.config_file, 'r', encoding='utf-8') as f:
                    loaded_config = json.load(f)
                if not isinstance(loaded_config, dict):
                    raise ValueError("el archivo no contiene un objeto JSON")

                migrated_config = self._migrate_config(loaded_config)

                # Combinar con valores por defecto para claves nuevas
                config = self.default_config.copy()
                config.update(migrated_config)
                return config
            return self.default_config.copy()

        except Exception as e:
            logger.warning("Error cargando configuración %s: %s", self.config_file, e)
            return self.default_config.copy()

    def save_config(self) -> bool:
        """Guarda la configuración actual al archivo."""
        try:
            with open(self.config_file, 'w', encoding='utf-8') as f:
                json.dump(self.config, f, indent=2, ensure_ascii=False, sort_keys=True)
            return True
        except Exception as e:
            logger.warning("Error guardando configuración: %s", e)
            return False

    def get(self, key: str, default: Any = None) -> Any:
        return self.config.get(key, default)

    def set(self, key: str, value: Any) -> None:
        self.config[key] = value
        self.save_config()

    def get_all(self) -> Dict[str, Any]:
        return self.config.copy()

    def reset_to_defaults(self) -> None:
        self.config = self.default_config.copy()
        self.save_config()

    def update_multiple(self, updates: Dict[str, Any]) -> None:
        """Actualiza varios valores; los None se ignoran (flags de CLI no dados)."""
        self.config.update({k: v for k, v in updates.items() if v is not None})

    def _migrate_config(self, old_config: Dict[str, Any]) -> Dict[str, Any]:
        """Migra configuraciones de versiones anteriores."""
        migrated = old_config.copy()

        # Nombres antiguos
        if "budget" in migrated and "path_budget" not in migrated:
            migrated["path_budget"] = migrated.pop("budget")
        if "tol" in migrated and "collinearity_rtol" not in migrated:
            migrated["collinearity_rtol"] = migrated.pop("tol")
        if isinstance(migrated.get("radius_sweep"), (int, float)):
            migrated["radius_sweep"] = [float(migrated["radius_sweep"])]

        for key, default_value in self.default_config.items():
            if key not in migrated:
                migrated[key] = default_value

        return migrated

    def thread_count(self) -> int:
        return thread_count(self.get("threads"))

    def get_path_settings(self) -> Dict[str, Any]:
        return {
            "budget": self.get("path_budget"),
            "subset_cap": self.get("subset_cap"),
            "collinearity_rtol": self.get("collinearity_rtol"),
            "atol": self.get("float_atol"),
            "ps_search_budget": self.get("ps_search_budget"),
        }

    def get_sampling_settings(self) -> Dict[str, Any]:
        return {
            "n_samples": self.get("samples"),
            "seed": self.get("seed"),
            "margin": self.get("margin"),
            "radius_sweep": tuple(self.get("radius_sweep")),
            "max_resample_factor": self.get("max_resample_factor"),
            "rank_rtol": self.get("rank_rtol"),
        }

    def get_validation_settings(self) -> Dict[str, Any]:
        return {
            "trials": self.get("validation_trials"),
            "epsilon": self.get("validation_epsilon"),
            "seed": self.get("seed"),
            "max_halvings": self.get("identset_max_halvings"),
        }

    def get_recovery_settings(self) -> Dict[str, Any]:
        """Parámetros de la reconstrucción por caja negra."""
        return {
            "box_radius": self.get("box_radius"),
            "grid_points": self.get("grid_points"),
            "kink_tol": self.get("kink_tol"),
            "fit_residual": self.get("fit_residual"),
            "ransac_trials": self.get("ransac_trials"),
            "jacobian_step": self.get("jacobian_step"),
            "rank_one_rtol": self.get("rank_one_rtol"),
            "query_budget_per_unit": self.get("query_budget_per_unit"),
            "max_units": self.get("max_units"),
            "verify_points": self.get("verify_points"),
            "seed": self.get("seed"),
        }
