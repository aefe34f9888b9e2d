# respirad/dsp/__init__.py
# Módulos numéricos: simulación, rango, respiración, asociación y espectro.
