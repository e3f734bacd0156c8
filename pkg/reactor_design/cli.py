"""
Punto de entrada de línea de comandos: lee una configuración JSON y ejecuta
el modo pedido (solve, optimize, relaxed-map, validate1d o sweep).

Códigos de salida: 0 éxito, 2 sin convergencia o verificación no superada,
1 error.
"""
import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from .analyzer import ReactorDesigner
from .config import MAPAS_RELAJADOS, MODOS, ModelParams, RunConfig, params_barrido
from .core import metrics, relaxed, validation1d
from .types import Region
from .utils.helpers import escribir_csv, escribir_json

logger = logging.getLogger(__name__)

EXITO = 0
ERROR = 1
SIN_CONVERGENCIA = 2

MUESTRAS_IDENTIDADES = 1000


def cmd_solve(config: RunConfig) -> int:
    """Resuelve el estado para el diseño de entrada y escribe state.vtk y report.json."""
    designer = ReactorDesigner(config)
    chi = designer.diseno_de_entrada()
    estado, reporte = designer.resolver(chi)
    designer.exportar_estado(chi, estado, reporte)
    return EXITO


def cmd_optimize(config: RunConfig) -> int:
    """Optimiza el diseño; los archivos se escriben aunque no haya convergencia."""
    designer = ReactorDesigner(config)
    resultado = designer.optimizar()
    designer.exportar_resultado(resultado)
    return EXITO if resultado.converged else SIN_CONVERGENCIA


def _puntos_aleatorios(rng: np.random.Generator, cantidad: int) -> List[relaxed.RelaxedPoint]:
    """Puntos relajados con k_v > 0 para verificar identidades."""
    puntos = []
    for _ in range(cantidad):
        k = rng.uniform(0.05, 5.0, 4)
        params = ModelParams(k11=k[0], k12=k[1], k21=k[2], k22=k[3], k_s=rng.uniform(0.1, 5.0))
        v1 = rng.uniform(-2.0, 2.0)
        v2 = v1 + rng.choice([-1.0, 1.0]) * rng.uniform(0.1, 2.0)
        puntos.append(relaxed.RelaxedPoint(
            v=(v1, v2), xi=rng.normal(size=(2, 2)), lam=rng.uniform(-2.0, 2.0), params=params,
        ))
    return puntos


def cmd_relaxed_map(config: RunConfig) -> int:
    """Escribe las cuatro grillas de W barra y el resumen de identidades."""
    carpeta = Path(config.output_dir)
    resumen: Dict[str, dict] = {'maps': {}}
    for nombre, (params, v_pair, lam) in MAPAS_RELAJADOS.items():
        mapa = relaxed.wbar_map(params, v_pair, lam)
        escribir_csv(carpeta / f'wbar_{nombre}.csv', mapa)
        conteo = mapa['region'].value_counts()
        resumen['maps'][nombre] = {
            'lambda': lam,
            'v': list(v_pair),
            'k_v': params.k_s * (v_pair[0] - v_pair[1]) ** 2,
            'points': {r.value: int(conteo.get(r.value, 0)) for r in Region},
        }

    rng = np.random.default_rng(config.seed)
    residuos = pd.DataFrame(
        [asdict(relaxed.verify_identities(p)) for p in _puntos_aleatorios(rng, MUESTRAS_IDENTIDADES)]
    )
    resumen['identities'] = {
        'samples': MUESTRAS_IDENTIDADES,
        'max_abs': {col: float(residuos[col].abs().max()) for col in residuos.columns},
    }
    escribir_json(carpeta / 'identities.json', resumen)
    return EXITO


def _verificaciones_1d() -> pd.DataFrame:
    """Casos de referencia unidimensionales con valor, referencia y tolerancia."""
    filas = []

    def agregar(nombre, valor, referencia, tolerancia):
        error = abs(valor - referencia) / max(abs(referencia), 1e-300) if referencia else abs(valor)
        filas.append({
            'check': nombre, 'value': valor, 'reference': referencia,
            'tolerance': tolerancia, 'error': error, 'passed': bool(error <= tolerancia),
        })

    agregar('sharp_limit_ks_1e12', validation1d.sharp_flux_analytic(1.0, 1.0, 1e12, 0.5), 1.0, 1e-6)
    agregar('sharp_unit', validation1d.sharp_flux_analytic(1.0, 1.0, 1.0, 0.5), 0.5, 1e-12)
    agregar(
        'sharp_fd_vs_analytic',
        validation1d.sharp_flux_fd(2.0, 1.0, 2.0, 0.25),
        validation1d.sharp_flux_analytic(2.0, 1.0, 2.0, 0.25),
        1e-3,
    )
    escalon = validation1d.Profile1D(n=1024, s=0.5, w=0.0)
    agregar('step_zero_flux', validation1d.diffuse_flux_1d(escalon)[0], 0.0, 1e-12)

    rampa = validation1d.Profile1D.rampa(n=1024, w=0.02, kappa=1.0)
    j_fem = validation1d.diffuse_flux_1d(rampa)[0]
    agregar('ramp_w002_ks300', j_fem, 0.5, 0.05)
    agregar('ramp_fem_vs_oracle', j_fem, validation1d.diffuse_flux_fd(rampa)[0], 5e-3)

    entrada, salida = validation1d.diffuse_flux_ends(validation1d.Profile1D.rampa(n=4096, w=0.02, kappa=1.0))
    agregar('flux_ends_n4096', salida, entrada, 1e-3)
    return pd.DataFrame(filas)


def cmd_validate1d(config: RunConfig) -> int:
    """Escribe checks.csv, convergence.csv y summary.json de las verificaciones 1D."""
    carpeta = Path(config.output_dir)
    verificaciones = _verificaciones_1d()
    tabla = validation1d.convergence_table(ns=(4096,))
    monotono = bool(np.all(np.diff(tabla['residual'].to_numpy()) < 0))
    escribir_csv(carpeta / 'checks.csv', verificaciones)
    escribir_csv(carpeta / 'convergence.csv', tabla)
    aprobado = bool(verificaciones['passed'].all()) and monotono
    escribir_json(carpeta / 'summary.json', {
        'checks': {f['check']: bool(f['passed']) for f in verificaciones.to_dict('records')},
        'residual_monotone': monotono,
        'passed': aprobado,
    })
    if not aprobado:
        logger.warning("Hay verificaciones 1D no superadas; ver %s", carpeta / 'checks.csv')
    return EXITO if aprobado else SIN_CONVERGENCIA


def _ejecutar_celda(datos: dict) -> dict:
    """Una celda del barrido; recibe diccionarios para poder serializarse entre procesos."""
    config = RunConfig.from_dict(datos['config'])
    designer = ReactorDesigner(config)
    resultado = designer.optimizar()
    designer.exportar_resultado(resultado)
    reporte = resultado.report
    fila = metrics.fila_tabla({'k11': datos['k11'], 'k22': datos['k22']}, reporte, resultado.chi, designer.mesh)
    discrepancia = metrics.discrepancia_flujos(reporte)
    fila.update({
        'converged': resultado.converged,
        'steps': resultado.steps,
        'lambda': reporte.lam,
        'sink_discrepancy': discrepancia['sink'],
        'reaction_discrepancy': discrepancia['reaction'],
    })
    return fila


def cmd_sweep(config: RunConfig) -> int:
    """
    Barrido k11 x k22 con una carpeta por celda y una tabla combinada sweep.csv.

    Las celdas son independientes y se reparten entre sweep.workers procesos.
    """
    barrido = config.sweep
    carpeta = Path(config.output_dir)
    tareas = []
    for k11 in barrido.k11:
        for k22 in barrido.k22:
            celda = config.replace(
                mode='optimize',
                model=params_barrido(k11, k22, barrido.offdiag_ratio, config.model.k_s),
                output_dir=str(carpeta / f'k11_{k11:g}_k22_{k22:g}'),
            )
            tareas.append({'config': celda.to_dict(), 'k11': k11, 'k22': k22})
    logger.info("Barrido de %d celdas con %d procesos", len(tareas), barrido.workers)

    if barrido.workers == 1:
        filas = [_ejecutar_celda(t) for t in tareas]
    else:
        with ProcessPoolExecutor(max_workers=barrido.workers) as pool:
            filas = list(pool.map(_ejecutar_celda, tareas))

    tabla = pd.DataFrame(filas)
    escribir_csv(carpeta / 'sweep.csv', tabla)
    return EXITO if tabla['converged'].all() else SIN_CONVERGENCIA


COMANDOS = {
    'solve': cmd_solve,
    'optimize': cmd_optimize,
    'relaxed-map': cmd_relaxed_map,
    'validate1d': cmd_validate1d,
    'sweep': cmd_sweep,
}


def construir_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='reactor-design',
        description='Diseño de reactores multimaterial por campo de fase',
    )
    parser.add_argument('config', type=str, help='Configuración JSON de la corrida')
    parser.add_argument('--mode', choices=MODOS, default=None,
                        help='Modo a ejecutar (por defecto el de la configuración)')
    parser.add_argument('--output-dir', type=str, default=None,
                        help='Carpeta de salida (por defecto la de la configuración)')
    nivel = parser.add_mutually_exclusive_group()
    nivel.add_argument('-v', '--verbose', action='store_true', help='Mensajes de depuración')
    nivel.add_argument('-q', '--quiet', action='store_true', help='Solo advertencias y errores')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Ejecuta la CLI y devuelve el código de salida."""
    args = construir_parser().parse_args(argv)
    nivel = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=nivel, format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    try:
        config = RunConfig.from_json(args.config)
        cambios = {}
        if args.mode:
            cambios['mode'] = args.mode
        if args.output_dir:
            cambios['output_dir'] = args.output_dir
        if cambios:
            config = config.replace(**cambios)
        codigo = COMANDOS[config.mode](config)
    except Exception as exc:
        logger.error("%s: %s", type(exc).__name__, exc, exc_info=args.verbose)
        return ERROR
    if codigo == SIN_CONVERGENCIA:
        logger.warning("La corrida terminó sin convergencia o con verificaciones no superadas")
    return codigo


if __name__ == '__main__':
    sys.exit(main())
