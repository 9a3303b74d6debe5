from collections import deque
from unittest import mock

import numpy as np
from django.test import SimpleTestCase, tag
from numpy.testing import assert_allclose, assert_array_equal

from game.builtins import BUILTINS, default_init, load_builtin, simplex_product_problem
from game.problems import PlayerStart, gradient, random_init
from geometry.boxes import BoxSet, box_contains, box_relint_contains

from .baselines import (
    MovingSetInstance,
    altgd_run,
    naive_wait_run,
    ogd_side_info_run,
    shrinking_box_instance,
)
from .engine import (
    EngineConfig,
    ProtocolState,
    fpm_run,
    on_termination,
    step_interior,
    step_set_mover,
    step_size,
    tc_check,
)
from .exceptions import EmptyMovingSet, FeasibilityAuditFailed, InvalidEngineConfig, InvalidInitialization
from .trace import FROZEN, IDLE, INTERIOR, PROJECTED, SET_MOVER


def estado(x, caixas, D=1.0, **kwargs):
    return ProtocolState(
        x=[np.array(v, dtype=float, ndmin=1) for v in x],
        sets=list(caixas),
        diameter=D,
        **kwargs,
    )


def estado_inicial_sb():
    inicio = default_init("example_sb")
    return estado([p.x for p in inicio], [p.box for p in inicio], D=9 * np.sqrt(2))


class EngineConfigTests(SimpleTestCase):
    def test_padroes_vem_das_settings(self):
        config = EngineConfig(T=10)
        self.assertEqual(config.eta_rule, "sqrtT")
        self.assertEqual(config.iota_mode, "euclidean")
        self.assertEqual(config.audit_tol, 1e-9)

    def test_valores_invalidos(self):
        with self.assertRaises(InvalidEngineConfig):
            EngineConfig(T=0)
        with self.assertRaises(InvalidEngineConfig):
            EngineConfig(T=10, eta_rule="adagrad")
        with self.assertRaises(InvalidEngineConfig):
            EngineConfig(T=10, eta_rule="fixed")
        with self.assertRaises(InvalidEngineConfig):
            EngineConfig(T=10, eta_rule="fixed", eta=-1.0)
        with self.assertRaises(InvalidEngineConfig):
            EngineConfig(T=10, iota_mode="manhattan")

    def test_regras_de_passo(self):
        problem = load_builtin("example_sb")
        esperado = 9 * np.sqrt(2) / (16 * np.sqrt(24))
        self.assertAlmostEqual(step_size(problem, EngineConfig(T=24)), esperado)
        self.assertAlmostEqual(step_size(problem, EngineConfig(T=24, eta_rule="theorem")), esperado)
        self.assertAlmostEqual(step_size(problem, EngineConfig(T=1, eta_rule="theorem")), 0.5)
        self.assertEqual(step_size(problem, EngineConfig(T=24, eta_rule="fixed", eta=0.3)), 0.3)

    def test_regra_do_teorema_exige_constantes(self):
        with self.assertRaises(InvalidEngineConfig):
            step_size(load_builtin("example_nb1"), EngineConfig(T=10, eta_rule="theorem"))


class PassosTests(SimpleTestCase):
    def test_primeira_rodada_do_primeiro_exemplo(self):
        problem = load_builtin("example_sb")
        config = EngineConfig(T=24)
        eta = step_size(problem, config)
        passo = step_set_mover(estado_inicial_sb(), problem, 0, config)
        self.assertEqual(passo.step_kind, SET_MOVER)
        self.assertAlmostEqual(passo.iota, 1.0)
        # min(η, ι/|g|) = η, já que η < 1/4
        assert_allclose(passo.x, [2.0 - 4 * eta])
        assert_allclose(passo.box.lower, [1.0 - 4 * eta])
        assert_allclose(passo.box.upper, [3.0 - 4 * eta])

    def test_iterado_e_conjunto_andam_juntos(self):
        problem = load_builtin("example_sb2")
        inicio = default_init("example_sb2")
        state = estado([p.x for p in inicio], [p.box for p in inicio], D=problem.D)
        for modo in ("euclidean", "directional"):
            passo = step_set_mover(state, problem, 1, EngineConfig(T=50, iota_mode=modo))
            deslocamento = passo.x - state.x[1]
            self.assertGreater(np.linalg.norm(deslocamento), 0.0)
            assert_allclose(passo.box.lower - state.sets[1].lower, deslocamento, rtol=0, atol=1e-15)
            assert_allclose(passo.box.upper - state.sets[1].upper, deslocamento, rtol=0, atol=1e-15)

    def test_gradiente_nulo_nao_move(self):
        problem = simplex_product_problem(2, 1)
        caixa = BoxSet([0.4], [0.6])
        state = estado([[0.5], [0.5]], [caixa, caixa])
        config = EngineConfig(T=10)
        passo = step_set_mover(state, problem, 0, config)
        assert_array_equal(passo.x, [0.5])
        self.assertEqual(passo.box, caixa)
        passo = step_interior(state, problem, 1, config)
        assert_array_equal(passo.x, [0.5])

    def test_iota_nulo_nao_move(self):
        problem = load_builtin("example_sb")
        # S^(x) encosta em x >= -1 justamente no lado que o gradiente aponta
        state = estado([[0.5], [0.0]], [BoxSet([-1.0], [1.0]), BoxSet([-0.5], [0.5])], D=problem.D)
        passo = step_set_mover(state, problem, 0, EngineConfig(T=10))
        self.assertEqual(passo.iota, 0.0)
        assert_array_equal(passo.x, [0.5])
        self.assertEqual(passo.box, BoxSet([-1.0], [1.0]))

    def test_passo_interior_vai_ate_metade(self):
        problem = load_builtin("example_sb")
        config = EngineConfig(T=10, eta_rule="fixed", eta=10.0)
        state = estado([[2.0], [0.0]], [BoxSet([1.0], [3.0]), BoxSet([-0.5], [0.5])], D=problem.D)
        passo = step_interior(state, problem, 0, config)
        self.assertEqual(passo.step_kind, INTERIOR)
        self.assertAlmostEqual(passo.eta_bar, 0.25)
        assert_allclose(passo.x, [1.5])
        self.assertTrue(box_relint_contains(passo.box, passo.x))

    def test_passo_interior_na_face(self):
        problem = load_builtin("example_sb")
        state = estado([[1.0], [0.0]], [BoxSet([1.0], [3.0]), BoxSet([-0.5], [0.5])], D=problem.D)
        passo = step_interior(state, problem, 0, EngineConfig(T=10))
        self.assertEqual(passo.eta_bar, 0.0)
        assert_array_equal(passo.x, [1.0])


class CriterioDeTerminoTests(SimpleTestCase):
    def setUp(self):
        self.caixas = [BoxSet([0.0], [4.0]), BoxSet([0.0], [4.0])]

    def test_sem_movimento_com_janela_completa(self):
        state = estado([[2.0], [2.0]], self.caixas, D=1.0, t=3, k=5, window=deque([0.0, 0.0], maxlen=2))
        self.assertTrue(tc_check(state, EngineConfig(T=100)))

    def test_fase_longa_demais(self):
        state = estado([[2.0], [2.0]], self.caixas, D=1.0, t=3, k=1, window=deque([100.0, 100.0], maxlen=2))
        self.assertTrue(tc_check(state, EngineConfig(T=100)))

    def test_janela_incompleta(self):
        state = estado([[2.0], [2.0]], self.caixas, D=1.0, t=2, k=3, window=deque([100.0], maxlen=2))
        self.assertFalse(tc_check(state, EngineConfig(T=100)))
        state = estado([[2.0], [2.0]], self.caixas, D=1.0, t=2, k=3, window=deque([0.0], maxlen=2))
        self.assertFalse(tc_check(state, EngineConfig(T=100)))

    def test_movimento_acima_do_limiar(self):
        state = estado([[2.0], [2.0]], self.caixas, D=1.0, t=3, k=5, window=deque([0.0, 0.2], maxlen=2))
        self.assertFalse(tc_check(state, EngineConfig(T=100)))
        self.assertTrue(tc_check(state, EngineConfig(T=16)))

    def test_encolhimento(self):
        state = estado([[2.0], [0.1]], self.caixas, D=10.0, t=7, k=2, window=deque([0.0, 0.0], maxlen=2))
        on_termination(state, EngineConfig(T=100))
        self.assertEqual(state.sets[0], BoxSet([1.0], [3.0]))
        self.assertEqual(state.sets[1], BoxSet([0.0], [2.0]))
        assert_array_equal(state.x[0], [2.0])
        self.assertEqual(state.k, 3)
        self.assertEqual(state.phase_start, 8)
        self.assertEqual(state.phase_ends, [7])
        self.assertEqual(len(state.window), 0)

    def test_quase_ponto_nao_encolhe(self):
        quase = BoxSet([1.0], [1.0 + 1e-14])
        state = estado([[1.0 + 5e-15], [2.0]], [quase, self.caixas[1]], D=1.0)
        on_termination(state, EngineConfig(T=100))
        self.assertEqual(state.sets[0], quase)
        self.assertEqual(state.sets[1], BoxSet([1.0], [3.0]))


class FpmRunTests(SimpleTestCase):
    def test_primeiras_24_rodadas_de_example_sb(self):
        problem = load_builtin("example_sb")
        trace = fpm_run(problem, default_init("example_sb"), EngineConfig(T=24, seed=7))
        self.assertEqual([r.t for r in trace.rounds], list(range(1, 25)))
        self.assertTrue(trace.all_feasible)
        inicial = trace.rounds[0].joint_x
        self.assertTrue(np.all(np.abs(trace.final_x) < np.abs(inicial)))
        self.assertTrue(np.all(np.abs(trace.rounds[-1].joint_x) < np.abs(inicial)))

    def test_invariantes_por_rodada(self):
        problem = load_builtin("example_sb")
        trace = fpm_run(problem, default_init("example_sb"), EngineConfig(T=300))
        for atual, seguinte in zip(trace.rounds, trace.rounds[1:]):
            for p in atual.players:
                self.assertTrue(box_relint_contains(BoxSet(p.lower, p.upper), p.x))
            kinds = [p.step_kind for p in atual.players]
            if atual.tc_fired:
                self.assertEqual(kinds, [FROZEN, FROZEN])
                self.assertEqual(seguinte.phase_k, atual.phase_k + 1)
                assert_array_equal(seguinte.joint_x, atual.joint_x)
                for p, q in zip(atual.players, seguinte.players):
                    diam_antes = np.linalg.norm(p.upper - p.lower)
                    diam_depois = np.linalg.norm(q.upper - q.lower)
                    if diam_antes >= 1e-12 * problem.D:
                        self.assertAlmostEqual(diam_depois / diam_antes, 0.5, delta=1e-6)
                continue
            self.assertEqual(seguinte.phase_k, atual.phase_k)
            mover = (atual.t - 1) % 2
            self.assertEqual(kinds.count(SET_MOVER), 1)
            self.assertEqual(kinds[mover], SET_MOVER)
            p, q = atual.players[mover], seguinte.players[mover]
            assert_allclose(q.lower - p.lower, q.x - p.x, rtol=0, atol=1e-12)
            assert_allclose(q.upper - p.upper, q.x - p.x, rtol=0, atol=1e-12)
            outro = atual.players[1 - mover]
            assert_array_equal(seguinte.players[1 - mover].lower, outro.lower)

    def test_diametro_abaixo_de_phi(self):
        problem = load_builtin("example_sb")
        trace = fpm_run(problem, default_init("example_sb"), EngineConfig(T=200))
        fases = int(np.ceil(np.log2(problem.D / problem.phi)))
        depois = [r for r in trace.rounds if r.phase_k > fases]
        self.assertTrue(depois)
        for r in depois:
            for p in r.players:
                self.assertLessEqual(np.linalg.norm(p.upper - p.lower), problem.phi)

    def test_determinismo(self):
        problem = load_builtin("example_sb2")
        config = EngineConfig(T=200, iota_mode="directional")
        a = fpm_run(problem, default_init("example_sb2"), config)
        b = fpm_run(problem, default_init("example_sb2"), config)
        assert_array_equal(a.iterates(), b.iterates())
        assert_array_equal(a.final_x, b.final_x)
        self.assertEqual(a.phase_ends, b.phase_ends)

    def test_ponto_fixo_com_gradiente_nulo(self):
        problem = simplex_product_problem(2, 2)
        inicio = [
            PlayerStart(problem.u[:2], BoxSet(problem.u[:2] - 0.05, problem.u[:2] + 0.05)),
            PlayerStart(problem.u[2:], BoxSet(problem.u[2:] - 0.05, problem.u[2:] + 0.05)),
        ]
        trace = fpm_run(problem, inicio, EngineConfig(T=60))
        for r in trace.rounds:
            assert_array_equal(r.joint_x, problem.u)
            self.assertEqual(r.movement, 0.0)
        self.assertTrue(any(r.shrink_applied for r in trace.rounds))

    def test_inicializacao_invalida(self):
        problem = load_builtin("example_sb")
        config = EngineConfig(T=10)
        with self.assertRaises(InvalidInitialization):
            fpm_run(problem, [PlayerStart([3.0], BoxSet([1.0], [3.0])), default_init("example_sb")[1]], config)
        with self.assertRaises(InvalidInitialization):
            fpm_run(problem, [PlayerStart([2.0], BoxSet([1.0], [3.0])), PlayerStart([7.5], BoxSet([7.0], [8.0]))], config)
        with self.assertRaises(InvalidInitialization):
            fpm_run(problem, default_init("example_sb")[:1], config)

    def test_gne_na_fronteira(self):
        problem = load_builtin("example_nb1")
        trace = fpm_run(problem, default_init("example_nb1"), EngineConfig(T=1000))
        self.assertTrue(trace.all_feasible)
        self.assertLess(np.linalg.norm(trace.final_x), 1e-2)

    def test_parada_longe_do_equilibrio(self):
        problem = load_builtin("example_nb2")
        trace = fpm_run(problem, default_init("example_nb2", 1), EngineConfig(T=30))
        self.assertTrue(trace.all_feasible)
        normas = [np.linalg.norm(gradient(problem, i, trace.final_x)) for i in range(problem.n)]
        self.assertGreaterEqual(max(normas), 0.1)

    def test_falha_de_interior_relativo_leva_o_trace_parcial(self):
        problem = load_builtin("example_sb")
        chamadas = []

        def relint(S, x):
            chamadas.append(1)
            # 2 chamadas na inicialização e 2 por rodada; a auditoria da rodada 6 falha
            return len(chamadas) <= 2 + 2 * 5

        with mock.patch("fpm.engine.box_relint_contains", side_effect=relint):
            with self.assertRaises(FeasibilityAuditFailed) as ctx:
                fpm_run(problem, default_init("example_sb"), EngineConfig(T=50))
        exc = ctx.exception
        self.assertEqual(exc.round, 6)
        self.assertIsNotNone(exc.trace)
        self.assertEqual([r.t for r in exc.trace.rounds], [1, 2, 3, 4, 5])

    def test_inicializacoes_sorteadas(self):
        for nome in BUILTINS:
            problem = load_builtin(nome)
            rng = np.random.default_rng(2024)
            for _ in range(5):
                for modo in ("euclidean", "directional"):
                    trace = fpm_run(problem, random_init(problem, rng), EngineConfig(T=200, iota_mode=modo))
                    self.assertTrue(trace.all_feasible, nome)
                    self.assertTrue(problem.constraint.contains(trace.final_x, 1e-9), nome)

    @tag("lento")
    def test_viabilidade_em_escala(self):
        for nome in BUILTINS:
            problem = load_builtin(nome)
            rng = np.random.default_rng(0)
            for _ in range(100):
                trace = fpm_run(problem, random_init(problem, rng), EngineConfig(T=10**4))
                self.assertTrue(trace.all_feasible, nome)


class BaselinesTests(SimpleTestCase):
    def test_altgd_converge_e_fica_viavel(self):
        problem = load_builtin("example_sb")
        trace = altgd_run(problem, default_init("example_sb"), EngineConfig(T=10**4))
        self.assertTrue(trace.all_feasible)
        for x in trace.iterates():
            self.assertTrue(problem.constraint.contains(x, 1e-9))
        self.assertLess(np.linalg.norm(trace.final_x), 1e-3)

    def test_agenda_alternada(self):
        problem = load_builtin("example_sb")
        trace = altgd_run(problem, default_init("example_sb"), EngineConfig(T=40))
        for r in trace.rounds:
            kinds = [p.step_kind for p in r.players]
            if r.t % 2 == 1:
                self.assertEqual(kinds, [PROJECTED, IDLE])
            else:
                self.assertEqual(kinds, [IDLE, PROJECTED])
            self.assertTrue(np.all(np.isnan(r.players[0].lower)))

    def test_espera_igual_ao_altgd(self):
        for nome in BUILTINS:
            problem = load_builtin(nome)
            config = EngineConfig(T=300)
            a = altgd_run(problem, default_init(nome), config)
            b = naive_wait_run(problem, default_init(nome), config)
            assert_array_equal(a.iterates(), b.iterates())
            assert_array_equal(a.final_x, b.final_x)
            for r in b.rounds:
                for p in r.players:
                    assert_array_equal(p.lower, p.x)
                    assert_array_equal(p.upper, p.x)

    def test_baselines_viaveis_em_todos_os_embutidos(self):
        for nome in BUILTINS:
            problem = load_builtin(nome)
            trace = naive_wait_run(problem, default_init(nome), EngineConfig(T=300))
            for x in trace.iterates():
                self.assertTrue(problem.constraint.contains(x, 1e-9), nome)

    def test_gradiente_nulo_trajetoria_constante(self):
        problem = simplex_product_problem(3, 2)
        trace = altgd_run(problem, [problem.u[:2], problem.u[2:4], problem.u[4:]], EngineConfig(T=30))
        for x in trace.iterates():
            assert_array_equal(x, problem.u)


class ConjuntosMoveisTests(SimpleTestCase):
    def test_iterados_sempre_no_conjunto(self):
        instancia = shrinking_box_instance(T=300, d=2, D=1.0, c=2.0, seed=1)
        trace = ogd_side_info_run(instancia)
        self.assertEqual(trace.T, 300)
        self.assertEqual(trace.summary["violations"], 0)
        for r in trace.rounds:
            p = r.players[0]
            self.assertTrue(box_contains(BoxSet(p.lower, p.upper), p.x, 1e-12))

    def test_constantes_da_instancia(self):
        instancia = shrinking_box_instance(T=100, d=3, D=2.0, c=1.5, seed=4)
        self.assertAlmostEqual(instancia.c, 1.5)
        self.assertAlmostEqual(instancia.D, 2.0)
        t = np.arange(1, 101)
        assert_allclose(instancia.omegas, 1.5 * (1 / np.sqrt(t) - 1 / np.sqrt(t + 1)), rtol=1e-9)
        assert_allclose(instancia.dists, 1.5 / np.sqrt(np.arange(1, 102)), rtol=1e-9)

    def test_conjuntos_fixos_com_u_dentro(self):
        u = np.array([0.3, 0.6])
        caixa = BoxSet([0.0, 0.0], [1.0, 1.0])
        instancia = MovingSetInstance(
            sets=[caixa] * 101,
            value_fn=lambda t, x: 0.5 * float((x - u) @ (x - u)),
            gradient_fn=lambda t, x: x - u,
            u=u,
            G=np.sqrt(2.0),
        )
        self.assertEqual(instancia.c, 0.0)
        self.assertEqual(instancia.c_prime, 0.0)
        trace = ogd_side_info_run(instancia)
        self.assertGreaterEqual(trace.summary["reg_f"], 0.0)
        self.assertLessEqual(trace.summary["reg_f"], 1.5 * np.sqrt(2.0) * np.sqrt(2.0) * 10)

    def test_instancia_vazia(self):
        with self.assertRaises(EmptyMovingSet):
            MovingSetInstance(sets=[BoxSet([0.0], [1.0])], value_fn=None, gradient_fn=None, u=[0.0], G=1.0)

    def test_passo_fortemente_convexo_exige_mu(self):
        instancia = shrinking_box_instance(T=10, lam=0.0)
        with self.assertRaises(InvalidEngineConfig):
            ogd_side_info_run(instancia, strongly_convex=True)
