#!/usr/bin/env python3
"""
ReLU Ident - Identificabilidad de redes ReLU
Punto de entrada de la línea de comandos: verifica dependencias, configura el registro y ejecuta el subcomando
"""

import logging
import os
import sys

# Añadir el directorio actual al path para imports
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))


def check_dependencies() -> bool:
    """Verifica que numpy y scipy estén disponibles."""
    missing = []
    for module in ("numpy", "scipy"):
        try:
            __import__(module)
        except ImportError:
            missing.append(module)
    if missing:
        print(f"Faltan dependencias: {', '.join(missing)}. Instalar con: pip install -r requirements.txt",
              file=sys.stderr)
        return False
    return True


def setup_logging(verbose: bool = False, debug: bool = False) -> None:
    level = logging.DEBUG if debug else logging.INFO if verbose else logging.WARNING
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def main() -> None:
    """Función principal de la aplicación."""
    if not check_dependencies():
        sys.exit(1)
    try:
        from cli.app import ReluIdentApp
    except ImportError as e:
        print(f"Error importando módulos: {e}\n\nAsegúrate de que todos los archivos estén en el mismo directorio.",
              file=sys.stderr)
        sys.exit(1)

    app = ReluIdentApp()
    args = app.parse_args(sys.argv[1:])
    setup_logging(getattr(args, "verbose", False), getattr(args, "debug", False))
    sys.exit(app.execute(args))


if __name__ == "__main__":
    main()
