import csv
import json
import math
import xml.etree.ElementTree as ET
from io import StringIO
from pathlib import Path
from tempfile import TemporaryDirectory
from unittest import mock

import numpy as np
from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, tag

from fpm.engine import EngineConfig, fpm_run
from fpm.exceptions import FeasibilityAuditFailed
from game.builtins import default_init, load_builtin, simplex_product_problem
from game.problem_files import write_problem_file

from .exceptions import ConfigurationError
from .forms import ExperimentConfigForm
from .reports import jsonable
from .runner import merge_options, moves_per_player, resolve_init, rounds_to_tolerance, validate

SVG = "{http://www.w3.org/2000/svg}"


def gnep(*args):
    out, err = StringIO(), StringIO()
    call_command("gnep", *args, stdout=out, stderr=err)
    return out.getvalue(), err.getvalue()


def ler_csv(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def ler_json(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


class ExperimentConfigFormTests(SimpleTestCase):
    def erro(self, dados, campo, code):
        form = ExperimentConfigForm(data=dados)
        self.assertFalse(form.is_valid())
        self.assertTrue(form.has_error(campo, code=code), form.errors.as_json())

    def test_configuracao_minima(self):
        form = ExperimentConfigForm(data={"problem": "example_sb", "T": 10})
        self.assertTrue(form.is_valid(), form.errors)
        self.assertEqual(form.cleaned_data["algorithm"], "fpm")
        self.assertEqual(form.cleaned_data["params"], {})
        self.assertIsNone(form.cleaned_data["u"])

    def test_problema_obrigatorio(self):
        self.erro({"T": 10}, "problem", "required")

    def test_problema_desconhecido(self):
        self.erro({"problem": "nao_existe.json", "T": 10}, "problem", "problema_desconhecido")

    def test_T_obrigatorio(self):
        self.erro({"problem": "example_sb"}, "T", "required")

    def test_regra_fixa_exige_eta(self):
        self.erro({"problem": "example_sb", "T": 10, "eta_rule": "fixed"}, "eta", "eta_obrigatorio")
        form = ExperimentConfigForm(data={"problem": "example_sb", "T": 10, "eta_rule": "fixed", "eta": 0.01})
        self.assertTrue(form.is_valid(), form.errors)

    def test_presets(self):
        self.erro({"problem": "example_sb", "T": 10, "init": "xx-padrao"}, "init", "preset_desconhecido")
        self.erro({"problem": "example_sb", "T": 10, "init": "nb1-padrao"}, "init", "preset_incompativel")
        form = ExperimentConfigForm(data={"problem": "example_nb2", "T": 10, "init": "nb2-canto"})
        self.assertTrue(form.is_valid(), form.errors)

    def test_init_e_init_file_juntos(self):
        self.erro(
            {"problem": "example_sb", "T": 10, "init": "random", "init_file": "x.json"},
            "__all__", "inicializacao_ambigua",
        )

    def test_arquivo_de_inicializacao_inexistente(self):
        self.erro({"problem": "example_sb", "T": 10, "init_file": "nao_existe.json"}, "init_file", "arquivo_inexistente")

    def test_diretorio_de_saida(self):
        self.erro({"problem": "example_sb", "T": 10, "trace": "/nao/existe/trace.csv"}, "trace", "diretorio_inexistente")

    def test_u_e_params(self):
        self.erro({"problem": "example_sb", "T": 10, "u": '["a", 1]'}, "u", "u_invalido")
        self.erro({"problem": "example_sb", "T": 10, "params": "[1, 2]"}, "params", "params_invalidos")
        form = ExperimentConfigForm(data={"problem": "example_sb", "T": 10, "u": "[0, 1]"})
        self.assertTrue(form.is_valid(), form.errors)
        self.assertEqual(form.cleaned_data["u"], [0.0, 1.0])

    def test_ogd_sideinfo(self):
        form = ExperimentConfigForm(data={"algorithm": "ogd-sideinfo", "T": 10, "params": '{"d": 3}'})
        self.assertTrue(form.is_valid(), form.errors)
        self.erro({"algorithm": "ogd-sideinfo", "T": 10, "params": '{"raio": 3}'}, "__all__", "parametro_desconhecido")
        self.erro({"algorithm": "ogd-sideinfo", "T": 10, "strongly_convex": True}, "__all__", "mu_obrigatorio")


class RunnerTests(SimpleTestCase):
    def test_flags_tem_prioridade(self):
        dados = merge_options({"T": 10, "seed": 1, "init": "sb-padrao"}, {"T": 20, "seed": None, "init": None})
        self.assertEqual(dados, {"T": 20, "seed": 1, "init": "sb-padrao"})

    def test_validate_levanta_erro_de_configuracao(self):
        with self.assertRaises(ConfigurationError) as ctx:
            validate({"problem": "example_sb"})
        self.assertIn("T", ctx.exception.errors)

    def test_resolve_init_sorteia_para_problema_sem_padrao(self):
        problem = simplex_product_problem(3)
        inicio = resolve_init(problem, seed=4)
        self.assertEqual(len(inicio), 3)
        x = np.concatenate([p.x for p in inicio])
        self.assertTrue(problem.constraint.contains(x, 1e-9))

    def test_rodadas_ate_tolerancia(self):
        problem = load_builtin("example_sb")
        trace = fpm_run(problem, default_init("example_sb"), EngineConfig(T=200))
        distancias = trace.distances()
        t = rounds_to_tolerance(trace, 3.0)
        self.assertIsNotNone(t)
        self.assertLessEqual(distancias[t - 1], 3.0)
        self.assertTrue(np.all(distancias[:t - 1] > 3.0))
        self.assertIsNone(rounds_to_tolerance(trace, -1.0))
        self.assertEqual(len(moves_per_player(trace)), 2)


class JsonableTests(SimpleTestCase):
    def test_infinitos_e_numpy(self):
        dados = jsonable({
            1.5: float("inf"),
            "b": [-math.inf, math.nan, np.float64(2.0)],
            "c": np.array([1, 2]),
            "d": (np.int64(3), None),
        })
        self.assertEqual(dados, {"1.5": "inf", "b": ["-inf", "nan", 2.0], "c": [1, 2], "d": [3, None]})
        json.dumps(dados, allow_nan=False)


class RunCommandTests(SimpleTestCase):
    def setUp(self):
        self.tmp = TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_sb_padrao_gera_csv_relatorio_e_svg(self):
        trace, report, plot = self.dir / "t.csv", self.dir / "r.json", self.dir / "p.svg"
        out, _ = gnep(
            "run", "--problem", "example_sb", "--init", "sb-padrao", "--T", "60",
            "--trace", str(trace), "--report", str(report), "--plot", str(plot), "--plot-sets",
        )
        self.assertIn("todas viáveis", out)

        linhas = ler_csv(trace)
        self.assertEqual(len(linhas), 60 * 2)
        self.assertTrue(all(linha["feasible"] == "true" for linha in linhas))
        self.assertEqual([linha["player"] for linha in linhas[:4]], ["1", "2", "1", "2"])
        self.assertEqual(float(linhas[0]["x_1"]), 2.0)
        self.assertEqual(float(linhas[1]["x_1"]), 6.0)
        self.assertEqual(linhas[0]["step_kind"], "set-mover")

        dados = ler_json(report)
        self.assertEqual(dados["algorithm"], "fpm")
        self.assertTrue(dados["all_feasible"])
        self.assertEqual(len(dados["regret"]["reg_f"]), 2)
        self.assertIn("t0", dados["bound"])

        raiz = ET.parse(plot).getroot()
        jogadores = raiz.findall(f".//{SVG}polyline[@class='jogador']")
        self.assertEqual(len(jogadores), 2)
        self.assertEqual(len(raiz.findall(f".//{SVG}rect[@class='conjunto-desejado']")), 2 * 60)
        self.assertEqual(len(raiz.findall(f".//{SVG}rect[@class='conjunto-produto']")), 60)
        self.assertEqual(len(raiz.findall(f".//{SVG}circle[@class='equilibrio']")), 1)

    def test_reexecucao_gera_csv_identico(self):
        a, b = self.dir / "a.csv", self.dir / "b.csv"
        for destino in (a, b):
            gnep("run", "--problem", "example_sb2", "--T", "40", "--seed", "7", "--trace", str(destino))
        self.assertEqual(a.read_bytes(), b.read_bytes())

    def test_config_em_arquivo_e_flags(self):
        config = self.dir / "config.json"
        config.write_text(json.dumps({"problem": "example_sb", "T": 500, "init": "sb-padrao"}), encoding="utf-8")
        trace = self.dir / "t.csv"
        gnep("run", "--config", str(config), "--T", "12", "--trace", str(trace))
        self.assertEqual(len(ler_csv(trace)), 12 * 2)

    def test_every_second(self):
        plot = self.dir / "p.svg"
        gnep("run", "--problem", "example_sb", "--T", "20", "--plot", str(plot), "--plot-sets", "--every-second")
        raiz = ET.parse(plot).getroot()
        # rodadas 1, 3, ..., 19 e a última
        self.assertEqual(len(raiz.findall(f".//{SVG}rect[@class='conjunto-desejado']")), 2 * 11)

    def test_u_da_configuracao_no_trace_e_no_regret(self):
        with open(settings.BASE_DIR / "problemas" / "mercado_compartilhado.json", encoding="utf-8") as f:
            dados = json.load(f)
        del dados["constants"]["u"]
        problema = self.dir / "mercado_sem_u.json"
        problema.write_text(json.dumps(dados), encoding="utf-8")
        trace, report = self.dir / "t.csv", self.dir / "r.json"
        gnep(
            "run", "--problem", str(problema), "--init", "random", "--seed", "5", "--T", "40",
            "--u", "[0.6, 0.6]", "--trace", str(trace), "--report", str(report),
        )
        for linha in ler_csv(trace):
            esperado = abs(float(linha["x_1"]) - 0.6)
            self.assertAlmostEqual(float(linha["dist_to_u"]), esperado, places=12)
        self.assertIsNotNone(ler_json(report)["regret"])

    def test_presets_de_nb1_e_nb2(self):
        for problema, preset in (("example_nb1", "nb1-padrao"), ("example_nb2", "nb2-canto")):
            report = self.dir / f"{preset}.json"
            gnep("run", "--problem", problema, "--init", preset, "--T", "200", "--report", str(report))
            dados = ler_json(report)
            self.assertTrue(dados["all_feasible"], preset)
            self.assertEqual(dados["problem"], problema)

    def test_baselines(self):
        for algoritmo in ("altgd", "naive"):
            trace = self.dir / f"{algoritmo}.csv"
            gnep("run", "--problem", "example_sb", "--algorithm", algoritmo, "--T", "30", "--trace", str(trace))
            linhas = ler_csv(trace)
            self.assertEqual(len(linhas), 60)
            tipos = {linha["step_kind"] for linha in linhas}
            self.assertEqual(tipos, {"projected", "idle"})

    def test_ogd_sideinfo(self):
        report = self.dir / "ogd.json"
        gnep("run", "--algorithm", "ogd-sideinfo", "--T", "50", "--params", '{"d": 3}', "--report", str(report))
        dados = ler_json(report)
        self.assertEqual(dados["algorithm"], "ogd-sideinfo")
        self.assertEqual(dados["T"], 50)
        self.assertLessEqual(dados["summary"]["reg_f"], dados["summary"]["regret_bound"])

    def test_erros_de_configuracao_saem_com_2(self):
        casos = [
            ("run", "--problem", "nao_existe", "--T", "10"),
            ("run", "--problem", "example_sb"),
            ("run", "--config", str(self.dir / "nao_existe.json"), "--T", "10"),
            ("run", "--problem", "example_sb", "--T", "10", "--params", '{"a": 1}'),
            ("check", "--problem", "example_sb", "--samples", "0"),
            ("equilibria",),
        ]
        for args in casos:
            with self.subTest(args=args), self.assertRaises(CommandError) as ctx:
                gnep(*args)
            self.assertEqual(ctx.exception.returncode, 2)

    def test_init_file_fora_de_C(self):
        init = self.dir / "init.json"
        init.write_text(json.dumps([
            {"x": [100.0], "lower": [99.0], "upper": [101.0]},
            {"x": [0.0], "lower": [-1.0], "upper": [1.0]},
        ]), encoding="utf-8")
        with self.assertRaises(CommandError) as ctx:
            gnep("run", "--problem", "example_sb", "--T", "10", "--init-file", str(init))
        self.assertEqual(ctx.exception.returncode, 2)

    def test_auditoria_sai_com_3_e_grava_trace_parcial(self):
        parcial = fpm_run(load_builtin("example_sb"), default_init("example_sb"), EngineConfig(T=5))
        falha = FeasibilityAuditFailed("Rodada 6: iterado fora de C.", round=6, trace=parcial)
        trace = self.dir / "parcial.csv"
        with mock.patch("harness.management.commands.gnep.execute", side_effect=falha):
            with self.assertRaises(CommandError) as ctx:
                gnep("run", "--problem", "example_sb", "--T", "10", "--trace", str(trace))
        self.assertEqual(ctx.exception.returncode, 3)
        self.assertEqual(len(ler_csv(trace)), 5 * 2)

    def test_erro_de_escrita_sai_com_4(self):
        # o destino é um diretório
        with self.assertRaises(CommandError) as ctx:
            gnep("run", "--problem", "example_sb", "--T", "5", "--trace", str(self.dir))
        self.assertEqual(ctx.exception.returncode, 4)


class CompareCommandTests(SimpleTestCase):
    def setUp(self):
        self.tmp = TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_mesmo_algoritmo_gera_colunas_iguais(self):
        trace, report = self.dir / "c.csv", self.dir / "c.json"
        gnep(
            "compare", "--problem", "example_sb", "--init", "sb-padrao", "--T", "80",
            "--algorithms", "fpm", "fpm", "--trace", str(trace), "--report", str(report),
        )
        linhas = ler_csv(trace)
        self.assertEqual(len(linhas), 80)
        self.assertEqual(list(linhas[0]), ["t", "dist_fpm_a", "dist_fpm_b"])
        self.assertTrue(all(linha["dist_fpm_a"] == linha["dist_fpm_b"] for linha in linhas))
        dados = ler_json(report)
        self.assertEqual(dados["runs"]["fpm_a"], dados["runs"]["fpm_b"])

    def test_fpm_contra_altgd(self):
        report = self.dir / "c.json"
        out, _ = gnep(
            "compare", "--problem", "example_sb", "--init", "sb-padrao", "--T", "300",
            "--tau", "1e-3", "--report", str(report),
        )
        self.assertIn("fpm:", out)
        self.assertIn("altgd:", out)
        runs = ler_json(report)["runs"]
        self.assertEqual(set(runs), {"fpm", "altgd"})
        self.assertTrue(runs["fpm"]["all_feasible"])
        self.assertTrue(runs["altgd"]["all_feasible"])
        self.assertLessEqual(sum(runs["altgd"]["moves_per_player"]), 300)

    def test_simplex_movimentos_por_jogador(self):
        problema = self.dir / "simplex.json"
        write_problem_file(simplex_product_problem(3), problema)
        report = self.dir / "c.json"
        gnep(
            "compare", "--problem", str(problema), "--init", "random", "--seed", "3", "--T", "30",
            "--report", str(report),
        )
        runs = ler_json(report)["runs"]
        self.assertEqual(len(runs["fpm"]["moves_per_player"]), 3)
        for movimentos in runs["altgd"]["moves_per_player"]:
            self.assertLessEqual(movimentos, 10)

        tipos = {}
        for algoritmo in ("fpm", "altgd"):
            trace = self.dir / f"{algoritmo}.csv"
            gnep(
                "run", "--problem", str(problema), "--algorithm", algoritmo, "--init", "random",
                "--seed", "3", "--T", "30", "--trace", str(trace),
            )
            tipos[algoritmo] = {(int(l["t"]), int(l["player"])): l["step_kind"] for l in ler_csv(trace)}
        self.assertEqual(len(tipos["fpm"]), 90)
        # fpm: todos os jogadores atualizam em toda rodada
        self.assertNotIn("idle", tipos["fpm"].values())
        # altgd: só o jogador da vez se move
        for (t, jogador), tipo in tipos["altgd"].items():
            esperado = "projected" if jogador == (t - 1) % 3 + 1 else "idle"
            self.assertEqual(tipo, esperado, (t, jogador))

    def _mercado_sem_u(self):
        with open(settings.BASE_DIR / "problemas" / "mercado_compartilhado.json", encoding="utf-8") as f:
            dados = json.load(f)
        del dados["constants"]["u"]
        caminho = self.dir / "mercado_sem_u.json"
        caminho.write_text(json.dumps(dados), encoding="utf-8")
        return caminho

    def test_u_da_configuracao_chega_as_distancias(self):
        problema = self._mercado_sem_u()
        trace, report = self.dir / "c.csv", self.dir / "c.json"
        gnep(
            "compare", "--problem", str(problema), "--init", "random", "--seed", "3", "--T", "50",
            "--u", "[0.6, 0.6]", "--tau", "1e-2", "--trace", str(trace), "--report", str(report),
        )
        linhas = ler_csv(trace)
        self.assertEqual(len(linhas), 50)
        for linha in linhas:
            self.assertTrue(math.isfinite(float(linha["dist_fpm"])))
            self.assertTrue(math.isfinite(float(linha["dist_altgd"])))
        for run in ler_json(report)["runs"].values():
            self.assertIsNotNone(run["final_distance"])
            self.assertLessEqual(run["final_distance"], math.sqrt(2))

    def test_sem_u_nao_ha_distancias(self):
        problema = self._mercado_sem_u()
        trace, report = self.dir / "c.csv", self.dir / "c.json"
        gnep(
            "compare", "--problem", str(problema), "--init", "random", "--seed", "3", "--T", "20",
            "--trace", str(trace), "--report", str(report),
        )
        self.assertEqual(ler_csv(trace), [])
        for run in ler_json(report)["runs"].values():
            self.assertIsNone(run["rounds_to_tau"])
            self.assertIsNone(run["final_distance"])

    def test_u_com_dimensao_errada(self):
        with self.assertRaises(CommandError) as ctx:
            gnep(
                "compare", "--problem", str(self._mercado_sem_u()), "--init", "random", "--T", "10",
                "--u", "[0.6, 0.6, 0.6]",
            )
        self.assertEqual(ctx.exception.returncode, 2)

    def test_config_por_execucao(self):
        config_b = self.dir / "b.json"
        config_b.write_text(json.dumps({"eta_rule": "fixed", "eta": 0.001}), encoding="utf-8")
        report = self.dir / "c.json"
        gnep(
            "compare", "--problem", "example_sb", "--T", "20", "--algorithms", "fpm", "fpm",
            "--config-b", str(config_b), "--report", str(report),
        )
        runs = ler_json(report)["runs"]
        self.assertNotEqual(runs["fpm_a"]["final_distance"], runs["fpm_b"]["final_distance"])


class CheckCommandTests(SimpleTestCase):
    def setUp(self):
        self.tmp = TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_example_sb(self):
        report = self.dir / "check.json"
        out, _ = gnep(
            "check", "--problem", "example_sb", "--phi", "0.5", "1", "--samples", "2000",
            "--seed", "1", "--report", str(report),
        )
        self.assertIn("delta estimado", out)
        dados = ler_json(report)
        self.assertGreater(dados["delta_hat"], 0)
        self.assertEqual(set(dados["dmin_hat"]), {"0.5", "1.0"})
        self.assertNotIn("equilibria", dados)

    def test_bilinear_embute_equilibrios(self):
        report = self.dir / "check.json"
        gnep(
            "check", "--problem", "bilinear_affine", "--params", '{"a": 2.0}', "--samples", "500",
            "--report", str(report),
        )
        dados = ler_json(report)
        self.assertEqual(dados["equilibria"]["classification"], "half-line")


class EquilibriaCommandTests(SimpleTestCase):
    def setUp(self):
        self.tmp = TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_a_pequeno(self):
        out, _ = gnep("equilibria", "--a", "0.1")
        self.assertIn("Classificação: empty", out)

    def test_a_grande_com_relatorio(self):
        report = self.dir / "eq.json"
        out, _ = gnep("equilibria", "--a", "2", "--report", str(report))
        self.assertIn("Semirreta", out)
        dados = ler_json(report)
        self.assertAlmostEqual(dados["u1"], -3 / 5)
        self.assertAlmostEqual(dados["u2"], 1 / 5)
        self.assertEqual(len(dados["equilibria"]), 16)

    def test_arquivo_de_jogo(self):
        jogo = self.dir / "jogo.json"
        jogo.write_text(json.dumps({
            "A": [[2.0, 0.0], [0.0, 1.0]], "c_x": [1.0, 0.5], "c_y": [1.0, -0.5], "B": 2.0,
        }), encoding="utf-8")
        out, _ = gnep("equilibria", "--game-file", str(jogo))
        self.assertIn("u1 =", out)

    def test_arquivo_sem_campo(self):
        jogo = self.dir / "jogo.json"
        jogo.write_text(json.dumps({"A": [[1.0]]}), encoding="utf-8")
        with self.assertRaises(CommandError) as ctx:
            gnep("equilibria", "--game-file", str(jogo))
        self.assertEqual(ctx.exception.returncode, 2)


class PlotCommandTests(SimpleTestCase):
    def setUp(self):
        self.tmp = TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_svg_a_partir_do_csv(self):
        trace, plot = self.dir / "t.csv", self.dir / "p.svg"
        gnep("run", "--problem", "example_nb2", "--init", "nb2-canto", "--T", "25", "--trace", str(trace))
        out, _ = gnep("plot", str(trace), "--plot", str(plot), "--plot-sets", "--problem", "example_nb2")
        self.assertIn("25 rodadas", out)
        raiz = ET.parse(plot).getroot()
        self.assertEqual(len(raiz.findall(f".//{SVG}polyline[@class='jogador']")), 2)
        self.assertEqual(len(raiz.findall(f".//{SVG}rect[@class='conjunto-desejado']")), 2 * 25)
        self.assertEqual(len(raiz.findall(f".//{SVG}circle[@class='equilibrio']")), 1)

    def test_csv_inexistente(self):
        with self.assertRaises(CommandError) as ctx:
            gnep("plot", str(self.dir / "nao_existe.csv"), "--plot", str(self.dir / "p.svg"))
        self.assertEqual(ctx.exception.returncode, 2)

    @tag("lento")
    def test_trajetoria_longa_de_example_sb(self):
        plot = self.dir / "p.svg"
        gnep("run", "--problem", "example_sb", "--init", "sb-padrao", "--T", "10000", "--plot", str(plot), "--every-second")
        raiz = ET.parse(plot).getroot()
        pontos = raiz.find(f".//{SVG}polyline[@class='jogador']").get("points").split()
        self.assertEqual(len(pontos), 5001)
