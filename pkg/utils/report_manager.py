#!/usr/bin/env python3
"""
ReportManager - Informes deterministas e historial de ejecuciones
Serialización canónica en JSON, huellas SHA-256 de las entradas y exportación del historial
"""

import csv
import hashlib
import json
import logging
import os
from datetime import datetime
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional

import numpy as np

logger = logging.getLogger(__name__)


def to_jsonable(value: Any) -> Any:
    """Convierte Fraction, arrays de numpy, enums y tuplas a tipos JSON."""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def document_hash(document: Any) -> str:
    canonical = json.dumps(to_jsonable(document), sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class ReportManager:
    """Gestor de informes con historial opcional y persistente."""

    def __init__(self, history_file: str = "relu_ident_history.json", max_items: int = 100):
        self.history_file = history_file
        self.max_items = max_items
        self.history = self.load_history()

    @staticmethod
    def build_report(command: str, inputs: Dict[str, Any], seed: Optional[int], verdicts: Dict[str, Any],
                     witnesses: Optional[Dict[str, Any]] = None,
                     timings: Optional[Dict[str, float]] = None) -> Dict[str, Any]:
        """Informe con huellas de las entradas; los tiempos solo si se piden."""
        report = {
            "command": command,
            "inputs": {name: document_hash(doc) for name, doc in inputs.items()},
            "seed": seed,
            "verdicts": to_jsonable(verdicts),
            "witnesses": to_jsonable(witnesses or {}),
        }
        if timings is not None:
            report["timings"] = {k: round(v, 6) for k, v in timings.items()}
        return report

    @staticmethod
    def dumps(report: Dict[str, Any]) -> str:
        return json.dumps(to_jsonable(report), sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    def load_history(self) -> List[Dict[str, Any]]:
        """Carga el historial desde el archivo."""
        try:
            if os.path.exists(self.history_file):
                with open(self.history_file, 'r', encoding='utf-8') as f:
                    history = json.load(f)
                if isinstance(history, list):
                    return history[-self.max_items:]
            return []
        except Exception as e:
            logger.warning("Error cargando historial: %s", e)
            return []

    def save_history(self) -> bool:
        try:
            self.history = self.history[-self.max_items:]
            with open(self.history_file, 'w', encoding='utf-8') as f:
                json.dump(self.history, f, indent=2, ensure_ascii=False)
            return True
        except Exception as e:
            logger.warning("Error guardando historial: %s", e)
            return False

    def add_entry(self, report: Dict[str, Any], success: bool = True, message: str = "") -> None:
        entry = {
            "timestamp": datetime.now().isoformat(),
            "command": report.get("command", ""),
            "inputs": report.get("inputs", {}),
            "seed": report.get("seed"),
            "verdicts": report.get("verdicts", {}),
            "success": success,
            "message": message,
        }
        self.history.append(entry)
        self.save_history()

    def get_history(self, limit: Optional[int] = None) -> List[Dict[str, Any]]:
        if limit:
            return self.history[-limit:]
        return self.history.copy()

    def clear_history(self) -> bool:
        self.history = []
        return self.save_history()

    def export_to_csv(self, export_path: str) -> bool:
        """Exporta el historial a un archivo CSV."""
        try:
            with open(export_path, 'w', newline='', encoding='utf-8') as csvfile:
                fieldnames = ['Fecha y Hora', 'Comando', 'Entradas', 'Semilla', 'Veredictos', 'Estado', 'Mensaje']
                writer = csv.DictWriter(csvfile, fieldnames=fieldnames)
                writer.writeheader()
                for entry in self.history:
                    writer.writerow({
                        'Fecha y Hora': entry.get('timestamp', ''),
                        'Comando': entry.get('command', ''),
                        'Entradas': ";".join(f"{k}={v[:12]}" for k, v in entry.get('inputs', {}).items()),
                        'Semilla': entry.get('seed', ''),
                        'Veredictos': json.dumps(entry.get('verdicts', {}), sort_keys=True, ensure_ascii=False),
                        'Estado': 'Éxito' if entry.get('success') else 'Error',
                        'Mensaje': entry.get('message', ''),
                    })
            return True
        except Exception as e:
            logger.warning("Error exportando historial a CSV: %s", e)
            return False

    def get_statistics(self) -> Dict[str, Any]:
        if not self.history:
            return {"total_runs": 0, "successful_runs": 0, "failed_runs": 0,
                    "most_used_command": "", "success_rate": 0}
        successful = [e for e in self.history if e.get('success')]
        commands = [e.get('command', '') for e in self.history]
        return {
            "total_runs": len(self.history),
            "successful_runs": len(successful),
            "failed_runs": len(self.history) - len(successful),
            "most_used_command": max(sorted(set(commands)), key=commands.count),
            "success_rate": round(len(successful) / len(self.history) * 100, 1),
        }
