"""
Ejemplo de uso del módulo Reactor Design.
Recorre los escenarios principales: resolución directa, optimización en el
cuadrado, reactor anular, funcional relajado y verificación 1D.
"""

# ==============================================================================
# 1. INSTALACIÓN
# ==============================================================================
"""
pip install -e .
"""

# ==============================================================================
# 2. IMPORTS
# ==============================================================================
import logging

import numpy as np

from reactor_design import (
    MAPAS_RELAJADOS,
    PARAMS_ANULAR,
    PARAMS_CUADRADO,
    PHASE_FIELD_CUADRADO,
    MeshConfig,
    ReactorDesigner,
    RunConfig,
)
from reactor_design.core import metrics, relaxed, validation1d

logging.basicConfig(level=logging.INFO, format='%(levelname)s %(name)s: %(message)s')

# ==============================================================================
# 3. CONFIGURACIÓN DEL REACTOR CUADRADO
# ==============================================================================
config = RunConfig(
    scenario='square',
    mode='optimize',
    mesh=MeshConfig(nx=64, ny=64),
    model=PARAMS_CUADRADO,
    phase_field=PHASE_FIELD_CUADRADO.replace(max_steps=2000),
    output_dir='resultados/cuadrado',
    snapshot_every=200,
)

# O desde un archivo JSON:
# config = RunConfig.from_json('config.json')

designer = ReactorDesigner(config)

# ==============================================================================
# 4. RESOLVER UN DISEÑO FIJO
# ==============================================================================
chi_uniforme = designer.diseno_de_entrada(0.5)
estado, reporte = designer.resolver(chi_uniforme)

print("=" * 60)
print("DISEÑO UNIFORME chi = 0.5")
print("=" * 60)
print(f"J1 entrante:     {reporte.j1_in:.6f}")
print(f"J2 saliente:     {reporte.j2_out:.6f}")
print(f"Reacción total:  {reporte.total_reaction:.6f}")
print(f"Balance O - 2E:  {reporte.energy_balance:.2e}")

# ==============================================================================
# 5. OPTIMIZAR EL DISEÑO
# ==============================================================================
resultado = designer.optimizar()
archivos = designer.exportar_resultado(resultado)

print("\n" + "=" * 60)
print("DISEÑO OPTIMIZADO")
print("=" * 60)
print(f"Convergió: {resultado.converged} en {resultado.steps} pasos")
print(f"J1 entrante: {resultado.report.j1_in:.6f} (uniforme: {reporte.j1_in:.6f})")
print(f"Contraste izquierda/derecha: {metrics.contraste_lateral(designer.mesh, resultado.chi):.3f}")
print(f"Archivos: {', '.join(str(p) for p in archivos.values())}")

# ==============================================================================
# 6. REACTOR ANULAR CON COEFICIENTES DE CAMPO DE FASE ESCALADOS
# ==============================================================================
for escala in (0.1, 1.0, 10.0):
    anular = RunConfig(
        scenario='annulus',
        mode='optimize',
        mesh=MeshConfig(nr=16, ntheta=64),
        model=PARAMS_ANULAR,
        phase_field=PHASE_FIELD_CUADRADO.replace(
            alpha=escala * PHASE_FIELD_CUADRADO.alpha,
            beta=escala * PHASE_FIELD_CUADRADO.beta,
            max_steps=500,
        ),
        output_dir=f'resultados/anillo_{escala:g}',
    )
    disenador = ReactorDesigner(anular)
    res = disenador.optimizar()
    disenador.exportar_resultado(res)
    print(f"Anillo escala {escala:g}: J1={res.report.j1_in:.4f}, "
          f"área de mezcla={metrics.area_mezcla(disenador.mesh, res.chi):.4f}")

# ==============================================================================
# 7. FUNCIONAL RELAJADO
# ==============================================================================
params, v_pair, lam = MAPAS_RELAJADOS['a']
punto = relaxed.RelaxedPoint(v=v_pair, xi=np.array([[1.0, 0.0], [0.0, 0.0]]), lam=lam, params=params)
valor, region = relaxed.w_bar(punto)
print("\n" + "=" * 60)
print("FUNCIONAL RELAJADO")
print("=" * 60)
print(f"chi* = {relaxed.chi_star(punto):.3f}, W barra = {valor:.4f}, región {region.value}")

mapa = relaxed.wbar_map(params, v_pair, lam)
print(mapa['region'].value_counts())

# ==============================================================================
# 8. VERIFICACIÓN 1D
# ==============================================================================
perfil = validation1d.Profile1D.rampa(n=1024, w=0.02, kappa=1.0)
j, u1_bar, u2_bar = validation1d.diffuse_flux_1d(perfil)
print("\n" + "=" * 60)
print("VERIFICACIÓN 1D")
print("=" * 60)
print(f"J difuso = {j:.5f}, J nítido = {validation1d.sharp_flux_analytic(1.0, 1.0, 1.0, 0.5):.5f}")
print(f"Residuo de la condición de flujo: {validation1d.flux_condition_residual(perfil):.3e}")
print(validation1d.convergence_table(ns=(4096,)))

print("\n✅ Ejemplo completado exitosamente!")
