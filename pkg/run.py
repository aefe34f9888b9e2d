# run.py
# Punto de entrada: python run.py run --config configs/dos_sujetos.conf --out salida

from respirad.cli import cli

if __name__ == '__main__':
    cli()
