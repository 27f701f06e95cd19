# Módulo core - Motores de análisis de redes ReLU
