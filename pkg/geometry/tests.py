from itertools import combinations

import numpy as np
from django.test import SimpleTestCase

from .boxes import (
    BoxSet,
    box_contains,
    box_diameter,
    box_product,
    box_relint_contains,
    box_shrink_around,
    box_translate,
    max_step_inside,
    project_box,
    support_min,
)
from .exceptions import (
    DimensionMismatch,
    EmptyPolytope,
    EmptySlice,
    InvalidBox,
    InvalidHalfspace,
    NotContained,
    ProjectionDidNotConverge,
    UnboundedPolytope,
)
from .polytopes import (
    Halfspace,
    Polytope,
    dist_box_boundary,
    dist_point_boundary,
    project_polytope,
    ray_step_box,
    slice_constraint,
)


def politopo_quadrado_cortado():
    """{-1 <= x <= 8, -1 <= y <= 8, x + y <= 10}"""
    return Polytope([
        ([-1, 0], 1), ([1, 0], 8), ([0, -1], 1), ([0, 1], 8), ([1, 1], 10),
    ])


def politopo_triangulo():
    """{y >= -2, 4x + y <= 0, -4x + y <= 0}"""
    return Polytope([([0, -1], 2), ([4, 1], 0), ([-4, 1], 0)])


def politopo_quadrilatero():
    """{x >= -5, y <= 5, x - y/3 <= 5, y - x/3 >= -5}"""
    return Polytope([([-1, 0], 5), ([0, 1], 5), ([1, -1 / 3], 5), ([1 / 3, -1], 5)])


def caixa_aleatoria_dentro(C, rng):
    """Caixa pequena em torno de um ponto viável, inscrita na bola até a fronteira."""
    while True:
        p = C.sample(rng, 1)[0]
        r = dist_point_boundary(p, C)
        if r > 1e-3:
            meia = rng.uniform(0.1, 0.9) * r / np.sqrt(C.dim)
            return BoxSet(p - meia, p + meia)


def projecao_por_enumeracao(x, C):
    """QP de projeção resolvido enumerando conjuntos ativos (só serve para 2-D)."""
    if C.contains(x):
        return x
    melhor, melhor_dist = None, np.inf
    for k in (1, 2):
        for ativos in combinations(range(len(C)), k):
            A = C.A[list(ativos)]
            M = A @ A.T
            if abs(np.linalg.det(M)) < 1e-12:
                continue
            lam = np.linalg.solve(M, A @ x - C.h[list(ativos)])
            p = x - A.T @ lam
            if np.all(lam >= -1e-12) and C.contains(p, 1e-12):
                d = np.linalg.norm(p - x)
                if d < melhor_dist:
                    melhor, melhor_dist = p, d
    return melhor


class BoxSetTests(SimpleTestCase):

    def test_lower_maior_que_upper_falha(self):
        with self.assertRaises(InvalidBox):
            BoxSet([2.0], [1.0])

    def test_caixa_degenerada_e_valida(self):
        S = BoxSet([2, 5], [2, 7])
        self.assertEqual(S.dim, 2)
        np.testing.assert_array_equal(S.widths, [0, 2])

    def test_dimensoes_diferentes(self):
        with self.assertRaises(DimensionMismatch):
            BoxSet([0, 0], [1])

    def test_caixa_e_imutavel(self):
        S = BoxSet([0], [1])
        with self.assertRaises(ValueError):
            S.lower[0] = 5

    def test_produto(self):
        P = box_product([BoxSet([1], [3]), BoxSet([5], [7])])
        self.assertEqual(P, BoxSet([1, 5], [3, 7]))


class TranslacaoDiametroTests(SimpleTestCase):

    def test_exemplos_translacao(self):
        self.assertEqual(box_translate(BoxSet([1], [3]), [0]), BoxSet([1], [3]))
        self.assertEqual(box_translate(BoxSet([1], [3]), [-1]), BoxSet([0], [2]))
        self.assertEqual(
            box_translate(BoxSet([1, 5], [3, 7]), [-0.5, -0.5]),
            BoxSet([0.5, 4.5], [2.5, 6.5]),
        )

    def test_translacao_dimensao_errada(self):
        with self.assertRaises(DimensionMismatch):
            box_translate(BoxSet([1, 5], [3, 7]), [1.0])

    def test_translacao_preserva_diametro(self):
        S = BoxSet([1, 5], [3, 7])
        self.assertAlmostEqual(box_diameter(box_translate(S, [0.3, -2.1])), box_diameter(S), places=12)

    def test_exemplos_diametro(self):
        self.assertEqual(box_diameter(BoxSet([1], [3])), 2.0)
        self.assertAlmostEqual(box_diameter(BoxSet([1, 5], [3, 7])), 2 * np.sqrt(2), places=12)
        self.assertEqual(box_diameter(BoxSet([2, 5], [2, 7])), 2.0)


class SupportMinTests(SimpleTestCase):

    def test_exemplos(self):
        S = BoxSet([1, 5], [3, 7])
        self.assertEqual(support_min(S, [2, -1]), BoxSet([1, 7], [1, 7]))
        self.assertEqual(support_min(S, [0, 1]), BoxSet([1, 5], [3, 5]))
        self.assertEqual(support_min(BoxSet([1], [3]), [0]), BoxSet([1], [3]))

    def test_valor_constante_e_menor_que_amostras(self):
        rng = np.random.default_rng(11)
        S = BoxSet([-1, 0, 2], [1, 3, 2.5])
        for _ in range(20):
            g = rng.normal(size=3)
            g[rng.integers(3)] = 0.0
            Z = support_min(S, g)
            cantos = rng.uniform(Z.lower, Z.upper, size=(50, 3))
            valores = cantos @ g
            self.assertAlmostEqual(valores.max(), valores.min(), places=12)
            amostras = rng.uniform(S.lower, S.upper, size=(10**5, 3))
            self.assertLessEqual(valores.min(), (amostras @ g).min() + 1e-12)


class MaxStepInsideTests(SimpleTestCase):

    def test_exemplos(self):
        self.assertEqual(max_step_inside(BoxSet([1], [3]), [2], [1]), 1.0)
        self.assertEqual(max_step_inside(BoxSet([1], [3]), [1], [1]), 0.0)
        self.assertEqual(max_step_inside(BoxSet([1, 5], [3, 7]), [2, 6], [1, 0]), 1.0)

    def test_gradiente_nulo_devolve_infinito(self):
        self.assertEqual(max_step_inside(BoxSet([1], [3]), [2], [0]), np.inf)

    def test_ponto_fora_falha(self):
        with self.assertRaises(NotContained):
            max_step_inside(BoxSet([1], [3]), [4], [1])

    def test_passo_maximo_e_justo(self):
        rng = np.random.default_rng(3)
        S = BoxSet([-2, 0], [1, 4])
        for _ in range(200):
            x = rng.uniform(S.lower, S.upper)
            g = rng.normal(size=2)
            alfa = max_step_inside(S, x, g)
            for frac in (0.0, 0.25, 0.5, 1.0):
                self.assertTrue(box_contains(S, x - frac * alfa * g, 1e-12))
            self.assertFalse(box_contains(S, x - (alfa + 1e-9) * g))


class DistanciaFronteiraTests(SimpleTestCase):

    def test_exemplos_ponto(self):
        C = politopo_quadrado_cortado()
        self.assertAlmostEqual(dist_point_boundary([0, 0], C), 1.0, places=12)
        self.assertEqual(dist_point_boundary([3, 7], C), 0.0)
        quadrado = Polytope([([1, 0], 1), ([-1, 0], 0), ([0, 1], 1), ([0, -1], 0)])
        self.assertAlmostEqual(dist_point_boundary([0.5, 0.5], quadrado), 0.5, places=12)

    def test_ponto_fora_falha(self):
        with self.assertRaises(NotContained):
            dist_point_boundary([3, 8], politopo_quadrado_cortado())

    def test_exemplos_caixa(self):
        C = politopo_quadrado_cortado()
        self.assertAlmostEqual(dist_box_boundary(BoxSet([1, 5], [1, 7]), C), 1.0, places=12)
        self.assertAlmostEqual(dist_box_boundary(BoxSet([0, 0], [1, 1]), C), 1.0, places=12)
        self.assertEqual(dist_box_boundary(BoxSet([1, 5], [3, 7]), C), 0.0)

    def test_caixa_fora_falha(self):
        with self.assertRaises(NotContained):
            dist_box_boundary(BoxSet([7, 2], [9, 3]), politopo_quadrado_cortado())

    def test_forma_fechada_igual_a_grade(self):
        rng = np.random.default_rng(5)
        for C in (politopo_quadrado_cortado(), politopo_triangulo(), politopo_quadrilatero()):
            caixa = C.bounding_box
            diam = box_diameter(caixa)
            for _ in range(3):
                S = caixa_aleatoria_dentro(C, rng)
                eixos = [np.linspace(lo, hi, 1000) for lo, hi in zip(S.lower, S.upper)]
                grade = np.stack(np.meshgrid(*eixos), axis=-1).reshape(-1, 2)
                dist_grade = np.min((C.h - grade @ C.A.T) / C.norms, axis=1).min()
                self.assertAlmostEqual(dist_box_boundary(S, C), dist_grade, delta=1e-6 * diam)

    def test_translacao_com_folga_continua_dentro(self):
        rng = np.random.default_rng(8)
        C = politopo_quadrilatero()
        for _ in range(300):
            S = caixa_aleatoria_dentro(C, rng)
            v = rng.normal(size=2) * rng.uniform(0, 3)
            folga = C.h - C.box_support_max(S)
            if np.max(C.A @ v - folga) <= 0:
                self.assertTrue(C.contains_box(box_translate(S, v), 1e-12))

    def test_passo_em_raio(self):
        rng = np.random.default_rng(9)
        C = politopo_triangulo()
        for _ in range(100):
            S = caixa_aleatoria_dentro(C, rng)
            d = rng.normal(size=2)
            alfa = ray_step_box(S, C, d)
            self.assertTrue(np.isfinite(alfa))
            self.assertTrue(C.contains_box(box_translate(S, alfa * d), 1e-9))
            self.assertFalse(C.contains_box(box_translate(S, (alfa + 1e-7) * d)))


class ProjecaoTests(SimpleTestCase):

    def test_exemplos_caixa(self):
        S = BoxSet([1, 5], [3, 7])
        np.testing.assert_array_equal(project_box([5, 6], S), [3, 6])
        np.testing.assert_array_equal(project_box([2, 6], S), [2, 6])
        np.testing.assert_array_equal(project_box([0, 9], S), [1, 7])
        p = project_box([0, 9], S)
        np.testing.assert_array_equal(project_box(p, S), p)

    def test_exemplos_politopo(self):
        C = politopo_quadrado_cortado()
        np.testing.assert_allclose(project_polytope([5, 6], C), [4.5, 5.5], atol=1e-10)
        np.testing.assert_array_equal(project_polytope([1, 2], C), [1, 2])
        np.testing.assert_allclose(project_polytope([-5, -5], C), [-1, -1], atol=1e-10)

    def test_concorda_com_enumeracao_de_ativos(self):
        rng = np.random.default_rng(13)
        for C in (politopo_quadrado_cortado(), politopo_triangulo(), politopo_quadrilatero()):
            caixa = C.bounding_box
            centro, raio = caixa.center, box_diameter(caixa)
            for _ in range(100):
                x = centro + rng.normal(size=2) * raio
                p = project_polytope(x, C)
                np.testing.assert_allclose(p, projecao_por_enumeracao(x, C), atol=1e-8)

    def test_limite_de_varreduras_guarda_melhor_iterado(self):
        C = politopo_quadrado_cortado()
        with self.assertRaises(ProjectionDidNotConverge) as ctx:
            project_polytope([5, 6], C, max_sweeps=1)
        self.assertEqual(ctx.exception.sweeps, 1)
        self.assertEqual(ctx.exception.best.shape, (2,))


class EncolhimentoTests(SimpleTestCase):

    def test_exemplos(self):
        self.assertEqual(box_shrink_around(BoxSet([0], [4]), [2], 0.5), BoxSet([1], [3]))
        self.assertEqual(box_shrink_around(BoxSet([0], [4]), [0.1], 0.5), BoxSet([0], [2]))
        self.assertEqual(
            box_shrink_around(BoxSet([0, 0], [4, 4]), [2, 0.1], 0.5),
            BoxSet([1, 0], [3, 2]),
        )

    def test_fator_invalido(self):
        with self.assertRaises(InvalidBox):
            box_shrink_around(BoxSet([0], [4]), [2], 1.0)

    def test_ponto_fora(self):
        with self.assertRaises(NotContained):
            box_shrink_around(BoxSet([0], [4]), [5], 0.5)

    def test_propriedades(self):
        rng = np.random.default_rng(17)
        for _ in range(500):
            lower = rng.uniform(-5, 5, size=3)
            S = BoxSet(lower, lower + rng.uniform(0, 4, size=3) * (rng.random(3) > 0.2))
            x = rng.uniform(S.lower, S.upper)
            x = np.where(S.widths > 0, x, S.lower)
            fator = rng.uniform(0.1, 0.9)
            R = box_shrink_around(S, x, fator)
            self.assertTrue(np.all(R.lower >= S.lower) and np.all(R.upper <= S.upper))
            self.assertTrue(box_relint_contains(R, x))
            self.assertAlmostEqual(box_diameter(R), fator * box_diameter(S), delta=1e-12 * (1 + box_diameter(S)))


class PolytopeTests(SimpleTestCase):

    def test_caixa_envolvente(self):
        C = politopo_triangulo()
        caixa = C.bounding_box
        np.testing.assert_allclose(caixa.lower, [-0.5, -2], atol=1e-9)
        np.testing.assert_allclose(caixa.upper, [0.5, 0], atol=1e-9)

    def test_vazio_falha(self):
        with self.assertRaises(EmptyPolytope):
            Polytope([([1], 0), ([-1], -1)])

    def test_ilimitado_falha(self):
        with self.assertRaises(UnboundedPolytope):
            Polytope([([1, 0], 1), ([0, 1], 1)])

    def test_normal_nula_falha(self):
        with self.assertRaises(InvalidHalfspace):
            Halfspace([0, 0], 1)

    def test_amostras_viaveis_e_prefixo(self):
        C = politopo_triangulo()
        poucos = C.sample(np.random.default_rng(21), 100)
        muitos = C.sample(np.random.default_rng(21), 3000)
        self.assertTrue(all(C.contains(p) for p in muitos))
        np.testing.assert_array_equal(muitos[:100], poucos)


class FatiaTests(SimpleTestCase):

    dims = [1, 1]

    def test_exemplos(self):
        C = politopo_quadrado_cortado()
        fatia = slice_constraint(C, 0, [6], self.dims)
        np.testing.assert_allclose(fatia.bounding_box.lower, [-1], atol=1e-9)
        np.testing.assert_allclose(fatia.bounding_box.upper, [4], atol=1e-9)
        fatia = slice_constraint(C, 0, [0], self.dims)
        np.testing.assert_allclose(fatia.bounding_box.upper, [8], atol=1e-9)

    def test_desacoplado_independe_dos_oponentes(self):
        C = Polytope([([1, 0], 1), ([-1, 0], 0), ([0, 1], 2), ([0, -1], 2)])
        for y in (-2.0, 0.0, 1.5):
            caixa = slice_constraint(C, 0, [y], self.dims).bounding_box
            np.testing.assert_allclose([caixa.lower[0], caixa.upper[0]], [0, 1], atol=1e-9)

    def test_fatia_vazia(self):
        with self.assertRaises(EmptySlice):
            slice_constraint(politopo_quadrado_cortado(), 0, [12], self.dims)

    def test_testemunha_dispensa_validacao(self):
        C = politopo_quadrado_cortado()
        fatia = slice_constraint(C, 1, [2], self.dims, witness=[6])
        self.assertTrue(fatia.contains([8]))
        self.assertFalse(fatia.contains([8.5]))
