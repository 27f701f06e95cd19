# Módulo utils - Configuración, E/S de redes, informes y utilidades numéricas
