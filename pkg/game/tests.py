import json
from pathlib import Path

import numpy as np
from django.conf import settings
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from geometry.boxes import box_product, box_relint_contains

from .bilinear import BilinearAffineGame
from .builtins import BUILTINS, DEFAULT_INITS, default_init, load_builtin, simplex_product_problem
from .exceptions import InvalidProblem, PlayerIndexError, UnknownProblem
from .losses import CustomLoss, QuadraticBilinearLoss, SaddleQuarticLoss
from .problem_files import dump_problem, load_problem_file, problem_from_dict
from .problems import (
    GnepProblem,
    approximate_gne_gap,
    estimate_G,
    feasible,
    gradient,
    is_approximate_gne,
    joint_value,
    random_init,
    split,
)

ARQUIVO_EXEMPLO = Path(settings.BASE_DIR) / "problemas" / "mercado_compartilhado.json"


def diferenca_central(problem, i, x, passo=1e-6):
    bloco = problem.block(i)
    g = np.zeros(bloco.stop - bloco.start)
    for k in range(g.size):
        mais, menos = x.copy(), x.copy()
        mais[bloco.start + k] += passo
        menos[bloco.start + k] -= passo
        g[k] = (joint_value(problem, i, mais) - joint_value(problem, i, menos)) / (2 * passo)
    return g


class GradienteTests(SimpleTestCase):
    def test_exemplo_fortemente_benigno(self):
        problem = load_builtin("example_sb")
        assert_allclose(gradient(problem, 0, [2.0, 6.0]), [4.0])
        assert_allclose(gradient(problem, 1, [2.0, 6.0]), [12.0])
        assert_allclose(gradient(problem, 0, [0.0, 0.0]), [0.0])
        assert_allclose(gradient(problem, 1, [0.0, 0.0]), [0.0])

    def test_bilinear_unidimensional(self):
        problem = load_builtin("bilinear_affine", {"a": 2.0})
        assert_allclose(gradient(problem, 0, [1.0, 1.0]), [3.0])
        assert_allclose(gradient(problem, 1, [1.0, 1.0]), [-1.0])
        jogo = BilinearAffineGame(A=2.0, c_x=1.0, c_y=1.0, B=1.0)
        gx, gy = jogo.gradients(np.array([1.0]), np.array([1.0]))
        assert_allclose(gx, [3.0])
        assert_allclose(gy, [-1.0])

    def test_indice_de_jogador_invalido(self):
        problem = load_builtin("example_sb")
        with self.assertRaises(PlayerIndexError):
            gradient(problem, 2, [0.0, 0.0])
        with self.assertRaises(InvalidProblem):
            gradient(problem, 0, [0.0, 0.0, 0.0])

    def test_diferencas_finitas_em_todos_os_embutidos(self):
        rng = np.random.default_rng(3)
        for nome in BUILTINS:
            problem = load_builtin(nome)
            for x in problem.constraint.sample(rng, 1000):
                for i in range(problem.n):
                    g = gradient(problem, i, x)
                    aprox = diferenca_central(problem, i, x)
                    assert_allclose(aprox, g, rtol=1e-6, atol=1e-6 * (1 + np.linalg.norm(g)), err_msg=nome)

    def test_convexidade_forte_no_proprio_argumento(self):
        rng = np.random.default_rng(4)
        for nome in BUILTINS:
            problem = load_builtin(nome)
            pontos = problem.constraint.sample(rng, 400)
            for x, outro in zip(pontos[::2], pontos[1::2]):
                for i in range(problem.n):
                    bloco = problem.block(i)
                    z = x.copy()
                    z[bloco] = outro[bloco]
                    dif = x[bloco] - z[bloco]
                    if np.linalg.norm(dif) < 1e-9:
                        continue
                    quociente = (gradient(problem, i, x) - gradient(problem, i, z)) @ dif / (dif @ dif)
                    self.assertGreaterEqual(quociente, problem.mu - 1e-9, nome)

    def test_G_declarado_limita_os_gradientes(self):
        rng = np.random.default_rng(5)
        for nome in BUILTINS:
            problem = load_builtin(nome)
            for x in problem.constraint.sample(rng, 10**4):
                for i in range(problem.n):
                    self.assertLessEqual(np.linalg.norm(gradient(problem, i, x)), problem.G + 1e-12, nome)

    def test_estimativa_de_G(self):
        problem = load_builtin("example_sb")
        estimado = estimate_G(problem, samples=4000, seed=0)
        self.assertLessEqual(estimado, problem.G * 1.05)
        self.assertGreater(estimado, 14.0)
        self.assertEqual(estimado, estimate_G(problem, samples=4000, seed=0))


class ViabilidadeTests(SimpleTestCase):
    def test_pontos_do_primeiro_exemplo(self):
        problem = load_builtin("example_sb")
        self.assertTrue(feasible(problem, [2.0, 6.0]))
        self.assertFalse(feasible(problem, [3.0, 8.0]))
        self.assertTrue(feasible(problem, [2.0, 8.0]))

    def test_tolerancia_relativa(self):
        problem = load_builtin("example_sb")
        self.assertFalse(feasible(problem, [2.0, 8.0 + 1e-6]))
        self.assertTrue(feasible(problem, [2.0, 8.0 + 1e-6], tol=1e-6))


class EmbutidosTests(SimpleTestCase):
    def test_exemplo_fortemente_benigno(self):
        problem = load_builtin("example_sb")
        self.assertEqual(problem.n, 2)
        self.assertEqual(problem.dims, (1, 1))
        self.assertEqual(problem.delta, 1.0)
        assert_allclose(problem.u, [0.0, 0.0])
        assert_allclose(problem.constraint.h, [1, 8, 1, 8, 10])

    def test_gne_na_fronteira(self):
        problem = load_builtin("example_nb1")
        assert_allclose(problem.u, [0.0, 0.0])
        self.assertAlmostEqual(float(np.min(problem.constraint.slacks(problem.u))), 0.0)

    def test_bilinear_com_a_pequeno(self):
        problem = load_builtin("bilinear_affine", {"a": 0.1, "cx": 1.0, "cy": 1.0, "B": 1.0})
        self.assertEqual(problem.params["a"], 0.1)
        with self.assertRaises(InvalidProblem):
            load_builtin("bilinear_affine", {"B": 0.0})

    def test_nome_desconhecido(self):
        with self.assertRaises(UnknownProblem):
            load_builtin("example_xyz")
        with self.assertRaises(UnknownProblem):
            default_init("example_sb", 7)

    def test_parametros_recusados(self):
        with self.assertRaises(InvalidProblem):
            load_builtin("example_sb", {"p_scale": 0.3})
        with self.assertRaises(InvalidProblem):
            load_builtin("example_sb2", {"p_scale": 0.8})

    def test_parametros_do_sela_quartica(self):
        problem = load_builtin("example_sb2", {"p_scale": 0.25, "eps": 0.1})
        self.assertEqual(problem.params, {"p_scale": 0.25, "eps": 0.1})
        self.assertAlmostEqual(problem.mu, 2.0 - 0.25)

    def test_diametro_declarado_cobre_a_caixa_envolvente(self):
        for nome in BUILTINS:
            problem = load_builtin(nome)
            lados = problem.constraint.bounding_box.widths
            self.assertGreaterEqual(problem.D, np.linalg.norm(lados) * (1 - 1e-6), nome)

    def test_D_pequeno_demais_e_recusado(self):
        problem = load_builtin("example_sb")
        with self.assertRaises(InvalidProblem):
            GnepProblem(
                name="x", dims=(1, 1), losses=problem.losses,
                constraint=problem.constraint, D=1.0,
            )

    def test_inicializacoes_documentadas_sao_viaveis(self):
        for (nome, variante), inicio in DEFAULT_INITS.items():
            problem = load_builtin(nome)
            produto = box_product([p.box for p in inicio])
            self.assertTrue(problem.constraint.contains_box(produto), (nome, variante))
            for p in inicio:
                self.assertTrue(box_relint_contains(p.box, p.x), (nome, variante))

    def test_inicializacao_do_primeiro_exemplo(self):
        inicio = default_init("example_sb")
        assert_allclose(inicio[0].x, [2.0])
        assert_allclose(inicio[1].x, [6.0])
        assert_allclose(inicio[0].box.lower, [1.0])
        assert_allclose(inicio[1].box.upper, [7.0])

    def test_inicializacao_sorteada(self):
        rng = np.random.default_rng(11)
        for nome in BUILTINS:
            problem = load_builtin(nome)
            for _ in range(5):
                inicio = random_init(problem, rng)
                produto = box_product([p.box for p in inicio])
                self.assertTrue(problem.constraint.contains_box(produto, 1e-12), nome)
                for p in inicio:
                    self.assertTrue(box_relint_contains(p.box, p.x), nome)

    def test_produto_de_simplexos(self):
        problem = simplex_product_problem(4, 2)
        self.assertEqual(problem.dims, (2, 2, 2, 2))
        self.assertTrue(feasible(problem, problem.u))
        for i in range(problem.n):
            assert_allclose(gradient(problem, i, problem.u), np.zeros(2), atol=1e-15)
        with self.assertRaises(InvalidProblem):
            simplex_product_problem(1, 2)


class PerdasTests(SimpleTestCase):
    def test_quadratica_exige_definida_positiva(self):
        with self.assertRaises(InvalidProblem):
            QuadraticBilinearLoss([[0.0]], [[1.0]])
        with self.assertRaises(InvalidProblem):
            QuadraticBilinearLoss([[1.0, 2.0], [0.0, 1.0]], np.zeros((2, 1)))

    def test_formato_conferido_contra_o_jogo(self):
        problem = load_builtin("example_sb")
        with self.assertRaises(InvalidProblem):
            GnepProblem(
                name="x", dims=(1, 1),
                losses=(QuadraticBilinearLoss(np.eye(1), np.zeros((1, 2))), problem.losses[1]),
                constraint=problem.constraint,
            )

    def test_sela_quartica_papel_invalido(self):
        with self.assertRaises(InvalidProblem):
            SaddleQuarticLoss(np.eye(2), "meio")

    def test_perda_customizada(self):
        perda = CustomLoss(lambda x, o: float(x @ x + o @ o), lambda x, o: 2 * x, mu=2.0)
        self.assertEqual(perda.value([1.0], [2.0]), 5.0)
        assert_allclose(perda.gradient([1.0], [2.0]), [2.0])
        with self.assertRaises(InvalidProblem):
            perda.to_dict()


class ArquivosDeProblemaTests(SimpleTestCase):
    def test_ida_e_volta_exata_para_embutidos(self):
        for nome in BUILTINS:
            problem = load_builtin(nome)
            dados = dump_problem(problem)
            reconstruido = problem_from_dict(json.loads(json.dumps(dados)))
            self.assertEqual(dump_problem(reconstruido), dados, nome)
            x = problem.constraint.sample(np.random.default_rng(0), 1)[0]
            for i in range(problem.n):
                self.assertEqual(joint_value(problem, i, x), joint_value(reconstruido, i, x))

    def test_arquivo_de_exemplo(self):
        problem = load_problem_file(ARQUIVO_EXEMPLO)
        self.assertEqual(problem.name, "mercado_compartilhado")
        self.assertTrue(feasible(problem, problem.u))
        for i in range(problem.n):
            assert_allclose(gradient(problem, i, problem.u), [0.0], atol=1e-15)

    def test_campos_faltando(self):
        with self.assertRaises(InvalidProblem):
            problem_from_dict({"players": []})
        dados = dump_problem(load_builtin("example_sb"))
        dados["constants"]["zeta"] = 1.0
        with self.assertRaises(InvalidProblem):
            problem_from_dict(dados)


class EquilibrioAproximadoTests(SimpleTestCase):
    def test_gne_interior(self):
        problem = load_builtin("example_sb")
        self.assertTrue(is_approximate_gne(problem, [0.0, 0.0], 1e-8))
        ganhos = approximate_gne_gap(problem, [2.0, 6.0])
        self.assertAlmostEqual(ganhos[0], 4.0, places=6)
        self.assertAlmostEqual(ganhos[1], 36.0, places=6)
        self.assertFalse(is_approximate_gne(problem, [2.0, 6.0], 1e-3))

    def test_gne_na_fronteira(self):
        problem = load_builtin("example_nb1")
        self.assertLessEqual(max(approximate_gne_gap(problem, [0.0, 0.0])), 1e-8)

    def test_divisao_em_blocos(self):
        problem = simplex_product_problem(3, 2)
        partes = split(problem, np.arange(6.0))
        assert_allclose(partes[1], [2.0, 3.0])
