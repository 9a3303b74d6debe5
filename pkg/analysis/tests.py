import math

import numpy as np
from django.test import SimpleTestCase, tag
from numpy.testing import assert_allclose
from scipy.optimize import minimize_scalar

from fpm.baselines import ogd_side_info_run, shrinking_box_instance
from fpm.engine import EngineConfig, fpm_run
from fpm.trace import IDLE, PlayerRound, RoundLog, RunTrace
from game.bilinear import BilinearAffineGame
from game.builtins import BUILTINS, default_init, load_builtin, simplex_product_problem
from game.exceptions import InvalidProblem
from game.losses import CustomLoss, QuadraticBilinearLoss
from game.problems import GnepProblem
from geometry.polytopes import Polytope

from .benign import (
    benign_report,
    check_angular,
    check_monotonicity,
    check_relations,
    dmin_at_point,
    estimate_dmin,
)
from .bounds import (
    BENIGN,
    convergence_bound,
    inexact_gd_bound,
    inexact_gd_rate,
    ogd_general_bound,
    ogd_regret_bound,
    ogd_strongly_convex_bound,
)
from .equilibria import (
    EMPTY,
    HALF_LINE,
    bilinear_boundary_equilibria,
    boundary_coefficients,
    kkt_residual,
)
from .exceptions import InvalidParameter, MissingConstants, NoValidSamples
from .moreau import moreau_norm, moreau_norm_grad
from .regret import regret


def quadrado_unitario():
    return Polytope([([1, 0], 1), ([-1, 0], 1), ([0, 1], 1), ([0, -1], 1)])


def jogo_customizado(valor_x, grad_x, valor_y, grad_y, u=(0.0, 0.0)):
    return GnepProblem(
        name="customizado",
        dims=(1, 1),
        losses=(CustomLoss(valor_x, grad_x), CustomLoss(valor_y, grad_y)),
        constraint=quadrado_unitario(),
        u=None if u is None else np.array(u),
    )


def trace_manual(problem, pontos):
    trace = RunTrace(algorithm="manual", problem_name=problem.name, dims=problem.dims, u=problem.u)
    for t, x in enumerate(pontos, start=1):
        x = np.asarray(x, dtype=float)
        jogadores = tuple(
            PlayerRound(x=x[problem.block(i)], lower=x[problem.block(i)], upper=x[problem.block(i)], step_kind=IDLE)
            for i in range(problem.n)
        )
        trace.rounds.append(RoundLog(t=t, phase_k=1, players=jogadores, feasible=True))
    return trace


def envelope_numerico(a, gamma, u, x):
    # o minimizador de a|y - u| + |y - x|^2/(2 gamma) fica no segmento [u, x]
    r = float(np.linalg.norm(x - u))
    if r == 0:
        return 0.0
    res = minimize_scalar(
        lambda s: a * s + (r - s) ** 2 / (2 * gamma),
        bounds=(0.0, r), method="bounded", options={"xatol": 1e-12},
    )
    return min(res.fun, r * r / (2 * gamma), a * r)


class MoreauTests(SimpleTestCase):
    def test_exemplos(self):
        self.assertAlmostEqual(moreau_norm(2.0, 1.0, [0.0], [3.0]), 4.0)
        self.assertAlmostEqual(moreau_norm(2.0, 1.0, [0.0], [1.0]), 0.5)
        self.assertEqual(moreau_norm(2.0, 1.0, [1.0, 2.0], [1.0, 2.0]), 0.0)

    def test_parametros_invalidos(self):
        with self.assertRaises(InvalidParameter):
            moreau_norm(0.0, 1.0, [0.0], [1.0])
        with self.assertRaises(InvalidParameter):
            moreau_norm_grad(1.0, -1.0, [0.0], [1.0])
        with self.assertRaises(InvalidParameter):
            moreau_norm(1.0, 1.0, [0.0, 0.0], [1.0])

    def test_concorda_com_minimizacao_numerica(self):
        rng = np.random.default_rng(11)
        for _ in range(10**4):
            a, gamma = rng.uniform(0.1, 3.0, size=2)
            d = int(rng.integers(1, 4))
            u, x = rng.normal(0, 2, size=d), rng.normal(0, 2, size=d)
            esperado = envelope_numerico(a, gamma, u, x)
            self.assertAlmostEqual(moreau_norm(a, gamma, u, x), esperado, delta=1e-8 * max(1.0, abs(esperado)))

    def test_sanduiche(self):
        rng = np.random.default_rng(12)
        for _ in range(10**4):
            a, gamma = rng.uniform(0.01, 5.0, size=2)
            u, x = rng.normal(0, 3, size=(2, 3))
            f = a * np.linalg.norm(x - u)
            diferenca = moreau_norm(a, gamma, u, x) - f
            folga = 1e-12 * (1.0 + f)
            self.assertLessEqual(diferenca, folga)
            self.assertGreaterEqual(diferenca, -gamma * a * a / 2 - folga)

    def test_gradiente_lipschitz(self):
        rng = np.random.default_rng(13)
        for _ in range(2000):
            a, gamma = rng.uniform(0.1, 3.0, size=2)
            u, x, y = rng.normal(0, 2, size=(3, 2))
            salto = np.linalg.norm(moreau_norm_grad(a, gamma, u, x) - moreau_norm_grad(a, gamma, u, y))
            self.assertLessEqual(salto, np.linalg.norm(x - y) / gamma + 1e-6)

    def test_gradiente_por_diferencas_finitas(self):
        x = np.array([0.3, -1.2])
        for a, gamma in ((2.0, 1.0), (0.5, 0.1)):
            passo = 1e-6
            numerico = [
                (moreau_norm(a, gamma, [0, 0], x + passo * e) - moreau_norm(a, gamma, [0, 0], x - passo * e)) / (2 * passo)
                for e in np.eye(2)
            ]
            assert_allclose(moreau_norm_grad(a, gamma, [0, 0], x), numerico, atol=1e-6)


class CondicaoAngularTests(SimpleTestCase):
    def test_exemplo_fortemente_benigno_tem_delta_um(self):
        problem = load_builtin("example_sb")
        for seed in (0, 1, 2):
            self.assertAlmostEqual(check_angular(problem, samples=2000, seed=seed), 1.0, delta=1e-12)

    def test_exemplo_que_viola_a_condicao(self):
        self.assertLessEqual(check_angular(load_builtin("example_nb2"), samples=2000, seed=0), 0.0)

    def test_sem_equilibrio_declarado(self):
        problem = jogo_customizado(
            lambda x, o: float(x @ x), lambda x, o: 2 * x,
            lambda y, o: float(y @ y), lambda y, o: 2 * y,
            u=None,
        )
        with self.assertRaises(MissingConstants) as ctx:
            check_angular(problem, samples=10, seed=0)
        self.assertEqual(ctx.exception.missing, ["u"])

    def test_gradiente_nulo_nao_conta(self):
        problem = jogo_customizado(
            lambda x, o: 0.0, lambda x, o: np.zeros(1),
            lambda y, o: 0.0, lambda y, o: np.zeros(1),
        )
        with self.assertRaises(NoValidSamples):
            check_angular(problem, samples=50, seed=0)
        with self.assertRaises(NoValidSamples):
            estimate_dmin(problem, 0.5, samples=50, seed=0)

    def test_amostras_invalidas(self):
        with self.assertRaises(InvalidParameter):
            check_angular(load_builtin("example_sb"), samples=0, seed=0)


class DminTests(SimpleTestCase):
    def test_exemplo_fortemente_benigno(self):
        # D_min(phi) = 1 - phi; a estimativa é uma cota superior
        estimativa = estimate_dmin(load_builtin("example_sb"), 0.9, samples=2000, seed=0)
        self.assertGreater(estimativa, 0.0)
        self.assertGreaterEqual(estimativa, 0.1 - 1e-12)
        self.assertLess(estimativa, 0.2)

    def test_mais_amostras_nunca_aumentam(self):
        problem = load_builtin("example_nb2")
        valores = [estimate_dmin(problem, 0.5, samples=s, seed=3) for s in (100, 1000, 5000)]
        self.assertEqual(valores, sorted(valores, reverse=True))
        self.assertLessEqual(valores[-1], 1e-9)

    def test_restricao_desacoplada(self):
        # [0, 1] por jogador e alvo 1/2: desloca-se para o lado oposto à parede próxima
        estimativa = estimate_dmin(simplex_product_problem(2, 1), 0.1, samples=2000, seed=0)
        self.assertGreaterEqual(estimativa, 0.4 - 1e-12)

    def test_phi_invalido(self):
        with self.assertRaises(InvalidParameter):
            estimate_dmin(load_builtin("example_sb"), 0.0, samples=10, seed=0)

    def test_jogador_no_plano_com_maximizador_livre(self):
        # a bola em volta de (0.1, 0.1) não encosta em z1 + z2 = 1
        problem = simplex_product_problem(2, 2)
        x = np.array([0.1, 0.1, 0.2, 0.2])
        esperado = 0.8 / math.sqrt(2) - 0.2
        self.assertAlmostEqual(dmin_at_point(problem, x, 0, 0.2), esperado, places=12)

    def test_jogador_no_plano_com_segunda_restricao_ativa(self):
        # z2 <= 0.5 corta a bola antes de z1 + z2 atingir o máximo livre
        problem = GnepProblem(
            name="dois_cortes",
            dims=(2, 1),
            losses=(
                QuadraticBilinearLoss(np.eye(2), np.zeros((2, 1)), b=[-1.2, -0.45]),
                QuadraticBilinearLoss([[1.0]], np.zeros((1, 2))),
            ),
            constraint=Polytope([
                ([1, 1, 0], 1), ([0, 1, 0], 0.5), ([-1, 0, 0], 0), ([0, -1, 0], 0),
                ([0, 0, 1], 1), ([0, 0, -1], 1),
            ]),
        )
        x = np.array([0.2, 0.45, 0.0])
        valor = dmin_at_point(problem, x, 0, 0.2, np.random.default_rng(7))
        self.assertAlmostEqual(valor, 0.3 - math.sqrt(0.0375), places=12)
        # o máximo da bola inteira (sem a fatia) daria um deslocamento menor
        self.assertGreater(valor, 1 - (0.65 + 0.2 * math.sqrt(2)))


class MonotoniaTests(SimpleTestCase):
    def test_exemplo_fortemente_benigno(self):
        self.assertGreaterEqual(check_monotonicity(load_builtin("example_sb"), samples=2000, seed=0), 2.0 - 1e-9)

    def test_operador_antissimetrico(self):
        problem = jogo_customizado(
            lambda x, o: float(x[0] * o[0]), lambda x, o: np.array([o[0]]),
            lambda y, o: float(-y[0] * o[0]), lambda y, o: np.array([-o[0]]),
        )
        self.assertAlmostEqual(check_monotonicity(problem, samples=500, seed=0), 0.0, delta=1e-12)


class RelacoesTests(SimpleTestCase):
    def test_exemplo_fortemente_benigno(self):
        relacoes = check_relations(load_builtin("example_sb"), samples=1000, seed=0)
        self.assertTrue(relacoes.angular_ok)
        self.assertTrue(relacoes.benign_ok)
        self.assertTrue(relacoes.monotone_ok)
        self.assertAlmostEqual(relacoes.growth_hat, 2.0)

    def test_simplexos(self):
        relacoes = check_relations(simplex_product_problem(2, 2), samples=1000, seed=0)
        self.assertTrue(relacoes.angular_ok)
        self.assertTrue(relacoes.benign_ok)

    def test_relatorio(self):
        relatorio = benign_report(load_builtin("example_sb"), phis=(0.5, 0.9), samples=500, seed=4)
        self.assertAlmostEqual(relatorio.delta_hat, 1.0, delta=1e-12)
        self.assertEqual(set(relatorio.dmin_hat), {0.5, 0.9})
        self.assertTrue(all(v > 0 for v in relatorio.dmin_hat.values()))
        dados = relatorio.as_dict()
        self.assertEqual(set(dados["dmin_hat"]), {"0.5", "0.9"})
        self.assertEqual(dados["samples"], 500)
        self.assertTrue(dados["relations"]["angular_ok"])


class RegretTests(SimpleTestCase):
    def test_trace_parado_em_u(self):
        problem = load_builtin("example_sb")
        relatorio = regret(trace_manual(problem, [[0.0, 0.0]] * 5), problem)
        self.assertEqual(relatorio.reg_f, (0.0, 0.0))
        self.assertEqual(relatorio.reg_c, (0.0, 0.0))
        self.assertTrue(relatorio.feasible)

    def test_valores_do_primeiro_exemplo(self):
        # nu_x(x, y) - nu_x(0, y) = x^2
        problem = load_builtin("example_sb")
        relatorio = regret(trace_manual(problem, [[2.0, 6.0], [1.0, 3.0]]), problem)
        assert_allclose(relatorio.reg_f, [5.0, 45.0])

    def test_violacao_registra_primeira_rodada(self):
        problem = load_builtin("example_sb")
        relatorio = regret(trace_manual(problem, [[0, 0], [1, 1], [-2, 0], [9, 9]]), problem)
        self.assertEqual(relatorio.reg_c, (math.inf, math.inf))
        self.assertEqual(relatorio.first_violation, (3, 3))
        self.assertFalse(relatorio.feasible)

    def test_dimensoes_erradas(self):
        problem = load_builtin("example_sb")
        with self.assertRaises(InvalidParameter):
            regret(trace_manual(problem, [[0, 0]]), problem, u=[0.0])
        with self.assertRaises(InvalidParameter):
            regret(trace_manual(simplex_product_problem(2, 2), [[0.2] * 4]), problem)

    def test_fpm_nunca_viola(self):
        for nome in BUILTINS:
            problem = load_builtin(nome)
            trace = fpm_run(problem, default_init(nome), EngineConfig(T=300, seed=0))
            self.assertEqual(regret(trace, problem).reg_c, (0.0,) * problem.n, nome)

    @tag("lento")
    def test_regret_sublinear_abaixo_da_cota(self):
        problem = load_builtin("example_sb")
        razoes = []
        for T in (10**2, 10**3, 10**4):
            trace = fpm_run(problem, default_init("example_sb"), EngineConfig(T=T, eta_rule="theorem"))
            relatorio = regret(trace, problem)
            cota = convergence_bound(problem, T, x1=trace.rounds[0].joint_x).regret_bound
            self.assertEqual(relatorio.reg_c, (0.0, 0.0))
            for reg in relatorio.reg_f:
                self.assertLessEqual(reg, cota)
            razoes.append(max(relatorio.reg_f) / math.sqrt(T))
        # cota / sqrt(T) decresce com T
        limite = convergence_bound(problem, 10**2).regret_bound / 10.0
        self.assertTrue(all(r <= limite for r in razoes), razoes)


class CotaDeConvergenciaTests(SimpleTestCase):
    def test_exemplo_fortemente_benigno(self):
        problem = load_builtin("example_sb")
        D = 9 * math.sqrt(2)
        cota = convergence_bound(problem, 10**4)
        self.assertEqual(cota.t0, 162)
        rho = 1 - 2.0 * 1.0 * D / (4 * 16.0 * 100)
        self.assertAlmostEqual(cota.rho, rho)
        self.assertAlmostEqual(cota.Xi, rho ** (-81))
        self.assertAlmostEqual(cota.tail, 2 * D / 100)
        valores = cota.values
        self.assertEqual(len(valores), 10**4 - 162 + 1)
        self.assertTrue(np.all(np.diff(valores) <= 0))
        self.assertGreater(valores[-1], cota.tail)

    def test_limite_em_T(self):
        problem = load_builtin("example_sb")
        cota = convergence_bound(problem, 10**12)
        self.assertAlmostEqual(cota.rho, 1.0, places=6)
        self.assertLess(cota.tail, 1e-4)

    def test_constantes_ausentes(self):
        with self.assertRaises(MissingConstants) as ctx:
            convergence_bound(load_builtin("example_nb1"), 100)
        self.assertEqual(ctx.exception.missing, ["delta", "phi", "dmin"])

    def test_regime_benigno(self):
        problem = load_builtin("example_sb")
        D, T = 9 * math.sqrt(2), 10**4
        cota = convergence_bound(problem, T, regime=BENIGN, eps=0.01)
        self.assertAlmostEqual(cota.tail, 2 * D / 100 + 0.02)
        self.assertAlmostEqual(cota.proof_tail, 4 * 16 * D / 100 + 0.02)
        self.assertAlmostEqual(cota.rho, 1 - 2.0 * D / (2 * 16 * 100))
        padrao = convergence_bound(problem, T, regime=BENIGN)
        self.assertAlmostEqual(padrao.eps, D / 100)
        with self.assertRaises(InvalidParameter):
            convergence_bound(problem, T, regime=BENIGN, eps=0.0)

    def test_regime_desconhecido(self):
        with self.assertRaises(InvalidParameter):
            convergence_bound(load_builtin("example_sb"), 100, regime="monotone")

    @tag("lento")
    def test_distancias_medidas_abaixo_da_cota(self):
        problem = load_builtin("example_sb")
        T = 10**4
        trace = fpm_run(problem, default_init("example_sb"), EngineConfig(T=T, eta_rule="theorem"))
        cota = convergence_bound(problem, T, x1=trace.rounds[0].joint_x)
        medidas = trace.distances()[cota.rounds - 1]
        self.assertTrue(np.all(medidas <= cota.values + 1e-9))
        D = problem.diameter
        self.assertLessEqual(np.linalg.norm(trace.final_x), 2 * D / math.sqrt(T) + 1e-3 * D)


class OgdConjuntosMoveisTests(SimpleTestCase):
    def test_exemplos_da_cota(self):
        self.assertAlmostEqual(ogd_regret_bound(1.0, 1.0, 0.0, 0.0, 100), 15.0)
        self.assertAlmostEqual(ogd_regret_bound(2.0, 3.0, 0.0, 5.0, 16), 3 * 2 / 2 * 3 * 4)
        self.assertAlmostEqual(ogd_regret_bound(1.0, 1.0, 1.0, 0.5, 4), (3 + 8) / 2 * 2)

    def test_parametros_invalidos(self):
        for args in ((0, 1, 0, 0, 10), (1, 0, 0, 0, 10), (1, 1, -1, 0, 10), (1, 1, 0, -1, 10), (1, 1, 0, 0, 0)):
            with self.assertRaises(InvalidParameter):
                ogd_regret_bound(*args)

    def test_instancias_conformes(self):
        for k in range(50):
            instancia = shrinking_box_instance(T=200, d=1 + k % 3, D=1.0, c=1.0, seed=k)
            resumo = ogd_side_info_run(instancia).summary
            self.assertEqual(resumo["violations"], 0)
            cota = ogd_regret_bound(instancia.D, instancia.G, instancia.c, instancia.c_prime, instancia.T)
            self.assertLessEqual(resumo["reg_f"], cota, k)
            self.assertLessEqual(resumo["reg_f"], ogd_general_bound(instancia), k)

    def test_variante_fortemente_convexa(self):
        for k in range(10):
            instancia = shrinking_box_instance(T=200, d=2, D=1.0, c=1.0, lam=1.0, seed=100 + k)
            resumo = ogd_side_info_run(instancia, strongly_convex=True).summary
            self.assertEqual(resumo["violations"], 0)
            self.assertLessEqual(resumo["reg_f"], ogd_strongly_convex_bound(instancia), k)

    def test_cota_logaritmica_exige_T_3(self):
        instancia = shrinking_box_instance(T=2, lam=1.0)
        with self.assertRaises(InvalidParameter):
            ogd_strongly_convex_bound(instancia)
        with self.assertRaises(MissingConstants):
            ogd_strongly_convex_bound(shrinking_box_instance(T=10))

    def test_passos_invalidos(self):
        instancia = shrinking_box_instance(T=10)
        with self.assertRaises(InvalidParameter):
            ogd_general_bound(instancia, etas=np.ones(3))


class DescidaInexataTests(SimpleTestCase):
    def test_taxas(self):
        self.assertAlmostEqual(
            inexact_gd_rate("strongly-benign", delta=1.0, C=1.0, G=16.0, T=100, mu_tilde=2.0, L=2.0),
            2.0 / 320,
        )
        self.assertAlmostEqual(
            inexact_gd_rate("benign", delta=0.5, C=100.0, G=1.0, T=1, Delta=1.0, eps=0.1),
            0.25 * 0.1,
        )

    def test_constantes_ausentes(self):
        with self.assertRaises(MissingConstants):
            inexact_gd_rate("benign", delta=1.0, C=1.0, G=1.0, T=10, Delta=1.0)
        with self.assertRaises(InvalidParameter):
            inexact_gd_rate("outro", delta=1.0, C=1.0, G=1.0, T=10)

    def test_cota(self):
        self.assertAlmostEqual(inexact_gd_bound(0.5, 3, 8.0, C=1.0, delta=1.0, T=100), 2.0 + 0.1)
        self.assertAlmostEqual(inexact_gd_bound(0.5, 1, 8.0, C=1.0, delta=0.5, T=100, eps=0.1), 8.0 + 0.4 + 0.4)


# ---------------------------------------------------------------------
# Jogo bilinear
# ---------------------------------------------------------------------

def _melhor_resposta(k, c, b):
    """argmin 1/2 z^2 + k z sujeito a c z <= b (c != 0)."""
    z = -k
    return z if c * z <= b else b / c


def equilibrio_de_fronteira_por_grade(a, cx, cy, B, R=100.0, m=400):
    """
    Procura, na grade m x m de [-R, R]^2, pontos em que cada coordenada é a
    melhor resposta à outra. A origem não pertence à grade.
    """
    grade = np.linspace(-R, R, m)
    tol = 1e-9 * (1 + R)
    for y in grade:
        x = _melhor_resposta(a * y, cx, B - cy * y)
        if abs(_melhor_resposta(-a * x, cy, B - cx * x) - y) <= tol:
            return True
    for x in grade:
        y = _melhor_resposta(-a * x, cy, B - cx * x)
        if abs(_melhor_resposta(a * y, cx, B - cy * y) - x) <= tol:
            return True
    return False


def jogos_aleatorios(rng, quantidade, d=1):
    jogos = []
    while len(jogos) < quantidade:
        game = BilinearAffineGame(
            A=rng.uniform(-3, 3, size=(d, d)),
            c_x=rng.choice([-1, 1], size=d) * rng.uniform(0.5, 1.5, size=d),
            c_y=rng.choice([-1, 1], size=d) * rng.uniform(0.5, 1.5, size=d),
            B=rng.uniform(0.5, 1.5),
        )
        if min(abs(u) for u in boundary_coefficients(game)) >= 0.05:
            jogos.append(game)
    return jogos


def residuo_relativo(eq):
    escala = max(1.0, np.linalg.norm(np.concatenate([eq.x, eq.y])), eq.alpha, eq.beta)
    return float(np.max(eq.residual)) / escala


class EquilibriosDeFronteiraTests(SimpleTestCase):
    def test_a_pequeno_nao_tem_equilibrio_na_fronteira(self):
        relatorio = bilinear_boundary_equilibria(BilinearAffineGame(0.1, 1.0, 1.0, 1.0))
        self.assertAlmostEqual(relatorio.u1, -1.1 / 1.01)
        self.assertAlmostEqual(relatorio.u2, -0.9 / 1.01)
        self.assertEqual(relatorio.classification, EMPTY)
        self.assertEqual(relatorio.equilibria, [])
        self.assertFalse(equilibrio_de_fronteira_por_grade(0.1, 1.0, 1.0, 1.0))

    def test_a_grande_tem_semirreta(self):
        game = BilinearAffineGame(2.0, 1.0, 1.0, 1.0)
        relatorio = bilinear_boundary_equilibria(game)
        self.assertAlmostEqual(relatorio.u1, -3 / 5)
        self.assertAlmostEqual(relatorio.u2, 1 / 5)
        self.assertEqual(relatorio.classification, HALF_LINE)
        self.assertEqual(len(relatorio.equilibria), 16)
        for eq in relatorio.equilibria:
            self.assertGreaterEqual(eq.alpha, 0.0)
            self.assertGreaterEqual(eq.beta, 0.0)
            self.assertLessEqual(abs(eq.alpha * relatorio.u1 + eq.beta * relatorio.u2 - 1.0), 1e-10 * (1 + eq.beta))
            self.assertLessEqual(residuo_relativo(eq), 1e-10)
            # reavaliado de forma independente
            self.assertLessEqual(np.max(kkt_residual(game, eq.x, eq.y, eq.alpha, eq.beta)), 1e-10 * (1 + eq.beta))
        self.assertTrue(equilibrio_de_fronteira_por_grade(2.0, 1.0, 1.0, 1.0))

    def test_residuo_na_origem(self):
        game = BilinearAffineGame(0.5, 1.0, 2.0, 3.0)
        assert_allclose(kkt_residual(game, [0.0], [0.0], 0.0, 0.0), [0, 0, 3.0, 0, 0])

    def test_perturbacao_aparece_no_residuo(self):
        game = BilinearAffineGame(2.0, 1.0, 1.0, 1.0)
        eq = bilinear_boundary_equilibria(game).equilibria[3]
        residuo = kkt_residual(game, eq.x + 1e-3, eq.y, eq.alpha, eq.beta)
        self.assertAlmostEqual(residuo[0], 1e-3, delta=1e-9)

    def test_multiplicador_negativo(self):
        game = BilinearAffineGame(2.0, 1.0, 1.0, 1.0)
        self.assertEqual(kkt_residual(game, [0.0], [0.0], -2.0, 1.0)[3], 2.0)

    def test_B_nao_positivo(self):
        with self.assertRaises(InvalidProblem):
            BilinearAffineGame(1.0, 1.0, 1.0, 0.0)

    def test_classificacao_igual_a_grade_em_1d(self):
        rng = np.random.default_rng(5)
        for game in jogos_aleatorios(rng, 20):
            relatorio = bilinear_boundary_equilibria(game)
            pela_grade = equilibrio_de_fronteira_por_grade(
                float(game.A[0, 0]), float(game.c_x[0]), float(game.c_y[0]), game.B,
            )
            self.assertEqual(relatorio.classification == HALF_LINE, pela_grade, relatorio)
            for eq in relatorio.equilibria:
                self.assertLessEqual(residuo_relativo(eq), 1e-10)

    def test_jogos_em_2d(self):
        rng = np.random.default_rng(6)
        for game in jogos_aleatorios(rng, 20, d=2):
            relatorio = bilinear_boundary_equilibria(game)
            self.assertEqual(relatorio.classification == HALF_LINE, max(relatorio.u1, relatorio.u2) > 0)
            for eq in relatorio.equilibria:
                self.assertLessEqual(residuo_relativo(eq), 1e-10)

    def test_acoplamento_fraco_em_2d_e_vazio(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            M = rng.normal(size=(2, 2))
            game = BilinearAffineGame(0.05 * (M - M.T), rng.uniform(0.5, 1.5, 2), rng.uniform(0.5, 1.5, 2), 1.0)
            self.assertEqual(bilinear_boundary_equilibria(game).classification, EMPTY)

    def test_u1_e_u2_nunca_ambos_positivos(self):
        rng = np.random.default_rng(8)
        for _ in range(10**4):
            d = int(rng.integers(1, 4))
            game = BilinearAffineGame(
                rng.normal(0, 3, size=(d, d)), rng.normal(size=d), rng.normal(size=d), rng.uniform(0.1, 2.0),
            )
            u1, u2 = boundary_coefficients(game)
            self.assertFalse(u1 > 0 and u2 > 0)

    @tag("lento")
    def test_u1_e_u2_nunca_ambos_positivos_em_escala(self):
        rng = np.random.default_rng(9)
        for _ in range(10**5):
            game = BilinearAffineGame(rng.normal(0, 3), rng.normal(), rng.normal(), rng.uniform(0.1, 2.0))
            u1, u2 = boundary_coefficients(game)
            self.assertFalse(u1 > 0 and u2 > 0)


class EmbutidoBilinearTests(SimpleTestCase):
    def test_parametros_do_embutido(self):
        problem = load_builtin("bilinear_affine", {"a": 2.0})
        self.assertEqual(problem.params["a"], 2.0)
        self.assertIsInstance(problem.losses[0], QuadraticBilinearLoss)
