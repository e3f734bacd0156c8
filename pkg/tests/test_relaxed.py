import numpy as np
import pytest

from reactor_design.config import MAPAS_RELAJADOS, ModelParams
from reactor_design.core.relaxed import (
    RelaxedPoint,
    chi_star,
    region_classify,
    verify_identities,
    w_bar,
    w_bar_closed_form,
    w_pointwise,
    wbar_map,
)
from reactor_design.exceptions import DegenerateReactionError
from reactor_design.types import Region

MAPA_A = MAPAS_RELAJADOS['a'][0]
CERO = np.zeros((2, 2))
GRILLA_CHI = np.linspace(0.0, 1.0, 10001)


def punto(xi=CERO, lam=0.0, v=(1.0, 0.0), params=MAPA_A):
    return RelaxedPoint(v=v, xi=np.asarray(xi, dtype=float), lam=lam, params=params)


def puntos_aleatorios(cantidad, seed=7):
    rng = np.random.default_rng(seed)
    puntos = []
    for _ in range(cantidad):
        k = rng.uniform(0.05, 5.0, 4)
        params = ModelParams(k11=k[0], k12=k[1], k21=k[2], k22=k[3], k_s=rng.uniform(0.1, 5.0))
        v1 = rng.uniform(-2.0, 2.0)
        v2 = v1 + rng.choice([-1.0, 1.0]) * rng.uniform(0.1, 2.0)
        puntos.append(punto(rng.normal(size=(2, 2)), rng.uniform(-2.0, 2.0), (v1, v2), params))
    return puntos


def escala(p):
    valores = w_pointwise(p, np.array([0.0, 1.0, float(np.clip(chi_star(p), 0, 1))]))
    return max(1.0, p.k_v, float(np.abs(valores).max()))


class TestPointwise:
    def test_pure_phase_limits(self):
        p = punto(xi=[[1.0, 2.0], [0.5, 0.0]], lam=0.3)
        a1, a2 = 5.0, 0.25
        prm = p.params
        assert w_pointwise(p, 0.0) == pytest.approx(0.5 * (prm.k12 * a1 + prm.k22 * a2))
        assert w_pointwise(p, 1.0) == pytest.approx(0.5 * (prm.k11 * a1 + prm.k21 * a2) - 0.3)

    def test_pure_reaction_term(self):
        p = punto(v=(3.0, 1.0))
        assert w_pointwise(p, 0.5) == pytest.approx(p.k_v / 8)

    def test_accepts_arrays(self):
        valores = w_pointwise(punto(), np.array([0.0, 0.5, 1.0]))
        assert valores.shape == (3,)


class TestChiStar:
    def test_symmetric_stationary_point(self):
        assert chi_star(punto()) == pytest.approx(0.5)

    def test_map_a_gradient(self):
        p = punto(xi=[[1.0, 0.0], [0.0, 0.0]])
        assert chi_star(p) == pytest.approx(0.95)
        oraculo = GRILLA_CHI[np.argmax(w_pointwise(p, GRILLA_CHI))]
        assert oraculo == pytest.approx(0.95, abs=1e-4)

    def test_negative_with_large_multiplier(self):
        p = punto(lam=1.0)
        assert chi_star(p) == pytest.approx(-0.5)
        assert np.argmax(w_pointwise(p, GRILLA_CHI)) == 0

    def test_degenerate_reaction(self):
        with pytest.raises(DegenerateReactionError):
            chi_star(punto(v=(1.0, 1.0)))


class TestRegions:
    def test_zero_gradient_is_mixed(self):
        assert region_classify(punto()) == Region.R

    def test_boundary_belongs_to_pure_phase(self):
        # dk1 = 1, |xi1|^2 = 1, k_v = 1: S - 2 lambda = k_v exactamente
        prm = ModelParams(k11=2.0, k12=1.0, k21=1.0, k22=1.0, k_s=1.0)
        assert region_classify(punto(xi=[[1.0, 0.0], [0.0, 0.0]], params=prm)) == Region.R1
        assert region_classify(punto(xi=[[0.0, 0.0], [0.0, 0.0]], lam=0.5, params=prm)) == Region.R0

    def test_map_c_origin_is_r0(self):
        params, v, lam = MAPAS_RELAJADOS['c']
        assert region_classify(punto(v=v, lam=lam, params=params)) == Region.R0

    def test_degenerate_by_sign(self):
        assert region_classify(punto(xi=[[1.0, 0.0], [0.0, 0.0]], v=(2.0, 2.0))) == Region.R1
        assert region_classify(punto(xi=[[0.0, 0.0], [1.0, 0.0]], v=(2.0, 2.0))) == Region.R0
        assert region_classify(punto(v=(2.0, 2.0))) == Region.R0


class TestWBar:
    def test_pure_reaction(self):
        valor, region = w_bar(punto())
        assert valor == pytest.approx(0.125)
        assert region == Region.R

    def test_large_positive_multiplier_forces_pure_phase_0(self):
        valor, region = w_bar(punto(lam=10.0))
        assert valor == 0.0
        assert region == Region.R0

    def test_large_negative_multiplier_forces_pure_phase_1(self):
        p = punto(lam=-10.0)
        valor, region = w_bar(p)
        assert valor == pytest.approx(w_pointwise(p, 1.0))
        assert valor == pytest.approx(10.0)
        assert region == Region.R1

    def test_degenerate_falls_to_boundary_values(self):
        p = punto(xi=[[1.0, 0.0], [0.0, 0.0]], v=(1.0, 1.0))
        valor, _ = w_bar(p)
        assert valor == max(w_pointwise(p, 0.0), w_pointwise(p, 1.0))

    def test_same_arithmetic_path_and_grid_oracle(self):
        for p in puntos_aleatorios(1000):
            valor, _ = w_bar(p)
            c = float(np.clip(chi_star(p), 0.0, 1.0))
            assert valor == max(w_pointwise(p, 0.0), w_pointwise(p, 1.0), w_pointwise(p, c))
            bruto = w_pointwise(p, GRILLA_CHI).max()
            # error de grilla de una cuadrática cóncava: k_v h^2 / 8
            assert valor >= bruto - 1e-12 * escala(p)
            assert valor - bruto <= 1.3e-9 * escala(p)

    def test_envelope_property(self, rng):
        for p in puntos_aleatorios(1000, seed=11):
            valor, _ = w_bar(p)
            muestras = w_pointwise(p, rng.uniform(0.0, 1.0, 1000))
            assert np.all(muestras <= valor + 1e-12 * escala(p))

    def test_closed_form_matches_in_mixed_region(self):
        for p in puntos_aleatorios(300, seed=3):
            if region_classify(p) == Region.R:
                assert w_bar_closed_form(p) == pytest.approx(w_pointwise(p, chi_star(p)), abs=1e-10 * escala(p))
                assert w_bar(p)[0] == pytest.approx(w_bar_closed_form(p), abs=1e-10 * escala(p))

    def test_continuity_across_boundaries(self):
        prm = ModelParams(k11=2.0, k12=1.0, k21=1.0, k22=1.0, k_s=1.0)
        en_r1 = punto(xi=[[1.0, 0.0], [0.0, 0.0]], params=prm)
        assert w_bar_closed_form(en_r1) == pytest.approx(w_pointwise(en_r1, 1.0), abs=1e-12)
        en_r0 = punto(lam=0.5, params=prm)
        assert w_bar_closed_form(en_r0) == pytest.approx(w_pointwise(en_r0, 0.0), abs=1e-12)

    def test_concave_in_chi(self):
        for p in puntos_aleatorios(50, seed=5):
            valores = w_pointwise(p, GRILLA_CHI)
            segunda = valores[2:] - 2 * valores[1:-1] + valores[:-2]
            assert segunda.max() <= 1e-12 * escala(p)

    def test_clamped_maximizer(self):
        for p in puntos_aleatorios(100, seed=9):
            c = float(np.clip(chi_star(p), 0.0, 1.0))
            oraculo = GRILLA_CHI[np.argmax(w_pointwise(p, GRILLA_CHI))]
            assert oraculo == pytest.approx(c, abs=1e-4 + 1e-12)


class TestIdentities:
    def test_random_points(self):
        for p in puntos_aleatorios(1000, seed=13):
            residuos = verify_identities(p)
            escala_id = max(escala(p), p.k_v * chi_star(p) ** 2)
            assert abs(residuos.first) <= 1e-12 * escala_id
            assert abs(residuos.second) <= 1e-12 * escala_id
            assert abs(residuos.third) <= 1e-12 * escala_id

    def test_second_identity_coefficient(self):
        p = punto(v=(np.sqrt(2.0), 0.0), params=MAPA_A)
        assert p.k_v == pytest.approx(2.0)
        diferencia = w_pointwise(p, chi_star(p)) - w_pointwise(p, 1.0)
        assert diferencia == pytest.approx(0.25)
        residuos = verify_identities(p)
        assert residuos.second == pytest.approx(0.0, abs=1e-14)
        assert residuos.second_printed == pytest.approx(0.25 - 0.25 * 0.25)

    def test_third_identity_at_origin(self):
        p = punto()
        assert w_pointwise(p, 1.0) - w_pointwise(p, 0.0) == 0.0
        assert verify_identities(p).max_abs <= 1e-15


class TestMap:
    def test_columns_and_size(self):
        params, v, lam = MAPAS_RELAJADOS['a']
        mapa = wbar_map(params, v, lam, xi_max=2.0, resolution=21)
        assert list(mapa.columns) == ['xi1', 'xi2', 'wbar', 'region']
        assert len(mapa) == 21 * 21

    def test_map_a_diagonal_band(self):
        params, v, lam = MAPAS_RELAJADOS['a']
        mapa = wbar_map(params, v, lam)
        diagonal = mapa[np.isclose(mapa['xi1'], mapa['xi2'])]
        assert (diagonal['region'] == Region.R.value).all()
        lejos = mapa[(mapa['xi1'] > 2.5) & (mapa['xi2'] < 0.5)]
        assert (lejos['region'] == Region.R1.value).all()

    def test_map_d_band_is_wider(self):
        mapas = {}
        for nombre in ('a', 'd'):
            params, v, lam = MAPAS_RELAJADOS[nombre]
            mapa = wbar_map(params, v, lam)
            mapas[nombre] = mapa[mapa['region'] == Region.R.value].groupby('xi2').size()
        anchos = mapas['d'].reindex(mapas['a'].index, fill_value=0)
        assert (anchos > mapas['a']).all()

    def test_r_r1_boundary_on_xi2_zero_slice(self):
        params, v, lam = MAPAS_RELAJADOS['a']
        mapa = wbar_map(params, v, lam)
        corte = mapa[mapa['xi2'] == 0.0]
        limite = np.sqrt(1.0 / params.delta_k1)
        assert (corte[corte['xi1'] < limite - 1e-9]['region'] == Region.R.value).all()
        assert (corte[corte['xi1'] > limite + 1e-9]['region'] == Region.R1.value).all()

    def test_map_b_boundary_shift(self):
        params, v, lam = MAPAS_RELAJADOS['b']
        mapa = wbar_map(params, v, lam)
        corte = mapa[mapa['xi2'] == 0.0]
        limite = np.sqrt((1.0 + 2 * lam) / params.delta_k1)
        assert (corte[corte['xi1'] > limite + 1e-9]['region'] == Region.R1.value).all()
        assert (corte[corte['xi1'] < limite - 1e-9]['region'] == Region.R.value).all()

    def test_invalid_grid(self):
        with pytest.raises(ValueError):
            wbar_map(MAPA_A, (1.0, 0.0), 0.0, resolution=1)
