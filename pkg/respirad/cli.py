# respirad/cli.py
# Interfaz de línea de comandos: simulate, process, run, eval.

import json
import logging
import sys

import click

from . import create_runtime
from .config_parser import config_help
from .constants import EXIT_OK, EXIT_USAGE
from .errors import RespiradError
from .pipeline import cmd_eval, cmd_process, cmd_run, cmd_simulate, load_run_config

logger = logging.getLogger(__name__)


class RespiradGroup(click.Group):
    """Grupo click cuyos errores de uso salen con código 1 (no el 2 de click, reservado a configuración)."""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            rv = super().main(
                args=args, prog_name=prog_name, complete_var=complete_var,
                standalone_mode=False, **extra,
            )
            code = rv if isinstance(rv, int) else EXIT_OK
        except click.UsageError as e:
            e.show()
            code = EXIT_USAGE
        except click.ClickException as e:
            e.show()
            code = e.exit_code
        except click.Abort:
            click.echo("Abortado.", err=True)
            code = EXIT_USAGE
        if standalone_mode:
            sys.exit(code)
        return code


def _load_config(ctx: click.Context, path: str):
    settings = ctx.obj
    try:
        return load_run_config(path, {"profile_oversample": settings.profile_oversample})
    except RespiradError as e:
        click.echo(f"Error de configuración: {e}", err=True)
        ctx.exit(e.exit_code)


def _finish(ctx: click.Context, payload, code: int, quiet: bool = False) -> None:
    if code != EXIT_OK:
        click.echo(f"Error: {payload.get('error')}", err=True)
    elif not quiet:
        click.echo(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False))
    ctx.exit(code)


@click.group(cls=RespiradGroup)
@click.option("--log-level", default=None, help="Nivel de logging (DEBUG, INFO, WARNING...). Por defecto RESPIRAD_LOG_LEVEL.")
@click.pass_context
def cli(ctx: click.Context, log_level):
    """Simulador y pipeline de monitorización respiratoria con dos radares FMCW no coherentes."""
    ctx.obj = create_runtime(log_level)


@cli.command(epilog=config_help())
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.pass_context
def simulate(ctx: click.Context, config_path: str, out_dir: str):
    """Sintetiza un cubo MSRC por radar y un manifest.json."""
    config = _load_config(ctx, config_path)
    payload, code = cmd_simulate(config, out_dir, ctx.obj.workers)
    _finish(ctx, payload, code)


@cli.command(epilog=config_help())
@click.option("--in", "in_dir", required=True, type=click.Path(file_okay=False))
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--emit-intermediates", is_flag=True, default=False, help="Escribe también los CSV intermedios.")
@click.pass_context
def process(ctx: click.Context, in_dir: str, config_path: str, out_dir: str, emit_intermediates: bool):
    """Localiza a los sujetos y estima su tasa respiratoria a partir de los cubos."""
    config = _load_config(ctx, config_path)
    payload, code = cmd_process(in_dir, config, out_dir, emit_intermediates, ctx.obj.workers)
    _finish(ctx, payload, code)


@cli.command(epilog=config_help())
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--emit-intermediates", is_flag=True, default=False, help="Escribe también los CSV intermedios.")
@click.pass_context
def run(ctx: click.Context, config_path: str, out_dir: str, emit_intermediates: bool):
    """simulate + process sobre el mismo directorio."""
    config = _load_config(ctx, config_path)
    payload, code = cmd_run(config, out_dir, emit_intermediates, ctx.obj.workers)
    _finish(ctx, payload, code)


@cli.command(name="eval")
@click.option("--estimates", "estimates_path", required=True, type=click.Path(dir_okay=False))
@click.option("--reference", "reference_path", required=True, type=click.Path(dir_okay=False))
@click.pass_context
def eval_command(ctx: click.Context, estimates_path: str, reference_path: str):
    """Compara tasas estimadas con referencias (CSV target_id, rate_bpm) e imprime el RMSE."""
    payload, code = cmd_eval(estimates_path, reference_path)
    if code == EXIT_OK:
        for row in payload["targets"]:
            click.echo(
                f"blanco {row['target_id']}: estimado {row['estimate_bpm']:.2f} rpm, "
                f"referencia {row['reference_bpm']:.2f} rpm, error {row['error_bpm']:+.2f} rpm"
            )
        click.echo(f"RMSE: {payload['rmse_bpm']:.4f} rpm")
    _finish(ctx, payload, code, quiet=True)
