# Módulo cli - Interfaz de línea de comandos
