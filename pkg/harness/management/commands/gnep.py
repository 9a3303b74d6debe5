import json
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from analysis.benign import benign_report
from analysis.equilibria import HALF_LINE, bilinear_boundary_equilibria
from analysis.exceptions import AnalysisError, InvalidParameter, MissingConstants
from fpm.exceptions import EngineError, FeasibilityAuditFailed, InvalidEngineConfig, InvalidInitialization
from game.bilinear import BilinearAffineGame
from game.exceptions import GameError, InvalidProblem, UnknownProblem
from geometry.exceptions import GeometryError
from harness.exceptions import ConfigurationError
from harness.plots import write_svg
from harness.reports import run_report, write_report
from harness.runner import (
    execute,
    execute_many,
    load_config_file,
    merge_options,
    moves_per_player,
    resolve_problem,
    rounds_to_tolerance,
    validate,
)
from harness.tracefile import read_trace_csv, write_comparison_csv, write_trace_csv

# códigos de saída
ERRO_CONFIG = 2
ERRO_EXECUCAO = 3
ERRO_IO = 4

ERROS_DE_CONFIG = (
    ConfigurationError,
    UnknownProblem,
    InvalidProblem,
    InvalidInitialization,
    InvalidEngineConfig,
    InvalidParameter,
    MissingConstants,
)
ERROS_DE_EXECUCAO = (FeasibilityAuditFailed, EngineError, GeometryError, GameError, AnalysisError)

CAMPOS_DE_EXECUCAO = (
    "problem", "algorithm", "T", "seed", "eta_rule", "eta", "iota_mode", "tol", "init",
    "init_file", "params", "u", "strongly_convex", "trace", "report", "plot", "plot_sets",
    "every_second",
)


def _flags_de_execucao(parser, saidas=True):
    parser.add_argument("--config", help="Arquivo JSON com a configuração; as flags têm prioridade.")
    parser.add_argument("--problem", help="Nome de problema embutido ou caminho de arquivo JSON.")
    parser.add_argument("--T", type=int, help="Número de rodadas.")
    parser.add_argument("--seed", type=int, help="Semente (padrão: GNEP_FPM_SEED).")
    parser.add_argument("--eta-rule", help="sqrtT, theorem ou fixed.")
    parser.add_argument("--eta", type=float, help="Passo da regra fixed.")
    parser.add_argument("--iota-mode", help="euclidean ou directional.")
    parser.add_argument("--tol", type=float, help="Tolerância da auditoria de viabilidade.")
    parser.add_argument("--init", help="default, random ou um preset (sb-padrao, nb1-padrao, nb2-padrao, nb2-canto).")
    parser.add_argument("--init-file", help="JSON com x, lower e upper de cada jogador.")
    parser.add_argument("--params", help="Parâmetros do problema em JSON.")
    parser.add_argument("--u", help="Comparador u em JSON (lista).")
    parser.add_argument("--strongly-convex", action="store_true", default=None,
                        help="ogd-sideinfo com passos 1/(t mu).")
    if saidas:
        parser.add_argument("--trace", help="CSV do trace.")
        parser.add_argument("--report", help="Relatório JSON.")
        parser.add_argument("--plot", help="SVG da trajetória.")
        parser.add_argument("--plot-sets", action="store_true", default=None,
                            help="Desenha os conjuntos desejados.")
        parser.add_argument("--every-second", action="store_true", default=None,
                            help="Desenha só uma rodada a cada duas.")


class Command(BaseCommand):
    help = "Simulador de GNEP com o método de ponto viável online: run, compare, check, equilibria, plot."

    def add_arguments(self, parser):
        sub = parser.add_subparsers(dest="subcomando", required=True)

        run = sub.add_parser("run", help="Executa um algoritmo e grava trace, relatório e SVG.")
        _flags_de_execucao(run)
        run.add_argument("--algorithm", help="fpm, altgd, naive ou ogd-sideinfo.")

        compare = sub.add_parser("compare", help="Executa duas configurações e compara as distâncias a u.")
        _flags_de_execucao(compare, saidas=False)
        compare.add_argument("--algorithms", nargs=2, metavar=("A", "B"), help="Padrão: fpm altgd.")
        compare.add_argument("--config-a", help="JSON aplicado só à primeira execução.")
        compare.add_argument("--config-b", help="JSON aplicado só à segunda execução.")
        compare.add_argument("--tau", type=float, default=1e-3, help="Tolerância de distância a u.")
        compare.add_argument("--workers", type=int, help="Threads (padrão: GNEP_FPM['WORKERS']).")
        compare.add_argument("--trace", help="CSV conjunto com as distâncias por rodada.")
        compare.add_argument("--report", help="Resumo JSON.")

        check = sub.add_parser("check", help="Estima delta, D_min(phi) e monotonia por amostragem.")
        check.add_argument("--problem", required=True)
        check.add_argument("--params", help="Parâmetros do problema em JSON.")
        check.add_argument("--phi", type=float, nargs="+")
        check.add_argument("--samples", type=int)
        check.add_argument("--seed", type=int)
        check.add_argument("--report")

        equilibria = sub.add_parser("equilibria", help="Equilíbrios de fronteira do jogo bilinear.")
        equilibria.add_argument("--a", type=float)
        equilibria.add_argument("--cx", type=float, default=1.0)
        equilibria.add_argument("--cy", type=float, default=1.0)
        equilibria.add_argument("--B", type=float, default=1.0)
        equilibria.add_argument("--game-file", help="JSON com A, c_x, c_y e B.")
        equilibria.add_argument("--report")

        plot = sub.add_parser("plot", help="Gera o SVG a partir de um CSV de trace.")
        plot.add_argument("trace_csv")
        plot.add_argument("--plot", required=True, help="SVG de saída.")
        plot.add_argument("--problem", help="Problema, para marcar o equilíbrio u.")
        plot.add_argument("--plot-sets", action="store_true")
        plot.add_argument("--every-second", action="store_true")

    def handle(self, *args, **options):
        acao = getattr(self, f"_{options['subcomando']}")
        try:
            acao(options)
        except ERROS_DE_CONFIG as exc:
            raise CommandError(str(exc), returncode=ERRO_CONFIG) from exc
        except ERROS_DE_EXECUCAO as exc:
            raise CommandError(str(exc), returncode=ERRO_EXECUCAO) from exc
        except OSError as exc:
            raise CommandError(f"Erro de E/S: {exc}", returncode=ERRO_IO) from exc

    # -----------------------------------------------------------------
    # run
    # -----------------------------------------------------------------

    def _configuracao(self, options, extra=None):
        arquivo = load_config_file(options["config"]) if options.get("config") else {}
        if extra:
            arquivo = {**arquivo, **extra}
        flags = {campo: options.get(campo) for campo in CAMPOS_DE_EXECUCAO}
        return merge_options(arquivo, flags)

    def _run(self, options):
        cleaned = validate(self._configuracao(options))
        try:
            result = execute(cleaned)
        except FeasibilityAuditFailed as exc:
            if cleaned.get("trace") and exc.trace is not None:
                write_trace_csv(exc.trace, cleaned["trace"])
                self.stderr.write(self.style.WARNING(f"Trace parcial gravado em {cleaned['trace']}."))
            self.stderr.write(self.style.ERROR(f"Auditoria de viabilidade falhou na rodada {exc.round}."))
            raise

        trace = result.trace
        self.stdout.write(self.style.SUCCESS(
            f"{trace.algorithm} em {trace.problem_name}: {trace.T} rodadas, "
            f"{'todas viáveis' if trace.all_feasible else 'com violações'}."
        ))
        if trace.u is not None:
            distancias = trace.distances()
            if distancias.size:
                self.stdout.write(f"Distância a u na última rodada registrada: {distancias[-1]:.6g}")
        if result.regret is not None:
            self.stdout.write("Regret por jogador: " + ", ".join(f"{r:.6g}" for r in result.regret.reg_f))
            if not result.regret.feasible:
                self.stdout.write(self.style.WARNING(
                    f"Violação de C na rodada {result.regret.first_violation[0]}."
                ))

        if cleaned.get("trace"):
            linhas = write_trace_csv(trace, cleaned["trace"])
            self.stdout.write(f"Trace: {cleaned['trace']} ({linhas} linhas)")
        if cleaned.get("report"):
            write_report(run_report(result), cleaned["report"])
            self.stdout.write(f"Relatório: {cleaned['report']}")
        if cleaned.get("plot"):
            write_svg(trace, cleaned["plot"], plot_sets=cleaned.get("plot_sets"), every_second=cleaned.get("every_second"))
            self.stdout.write(f"SVG: {cleaned['plot']}")

    # -----------------------------------------------------------------
    # compare
    # -----------------------------------------------------------------

    def _compare(self, options):
        algoritmos = options.get("algorithms") or [None, None]
        configs = []
        for k, (chave, padrao) in enumerate((("config_a", "fpm"), ("config_b", "altgd"))):
            extra = load_config_file(options[chave]) if options.get(chave) else {}
            dados = self._configuracao({**options, "trace": None, "report": None, "plot": None}, extra)
            if algoritmos[k]:
                dados["algorithm"] = algoritmos[k]
            dados.setdefault("algorithm", padrao)
            configs.append(validate(dados))

        resultados = execute_many(configs, options.get("workers"))
        rotulos = [c["algorithm"] for c in configs]
        if rotulos[0] == rotulos[1]:
            rotulos = [f"{rotulos[0]}_a", f"{rotulos[1]}_b"]

        tau = options["tau"]
        resumo = {"tau": tau, "runs": {}}
        for rotulo, res in zip(rotulos, resultados):
            trace = res.trace
            distancias = trace.distances()
            resumo["runs"][rotulo] = {
                "algorithm": trace.algorithm,
                "problem": trace.problem_name,
                "T": trace.T,
                "all_feasible": trace.all_feasible,
                "rounds_to_tau": rounds_to_tolerance(trace, tau),
                "final_distance": float(distancias[-1]) if distancias.size else None,
                "moves_per_player": moves_per_player(trace),
            }
            linha = resumo["runs"][rotulo]
            alcance = "nunca" if linha["rounds_to_tau"] is None else f"rodada {linha['rounds_to_tau']}"
            estilo = self.style.SUCCESS if trace.all_feasible else self.style.WARNING
            self.stdout.write(estilo(f"{rotulo}: |x - u| <= {tau:g} em {alcance}; viável={trace.all_feasible}"))

        if options.get("trace"):
            write_comparison_csv(options["trace"], rotulos, [r.trace for r in resultados])
            self.stdout.write(f"CSV conjunto: {options['trace']}")
        if options.get("report"):
            write_report(resumo, options["report"])
            self.stdout.write(f"Resumo: {options['report']}")

    # -----------------------------------------------------------------
    # check
    # -----------------------------------------------------------------

    def _check(self, options):
        params = _json_da_flag(options.get("params"), "--params")
        problem = resolve_problem(options["problem"], params)
        relatorio = benign_report(problem, options.get("phi"), options.get("samples"), options.get("seed"))
        dados = relatorio.as_dict()

        if relatorio.delta_hat is None:
            self.stdout.write(self.style.WARNING("Sem u declarado: condição angular não verificada."))
        elif relatorio.delta_hat <= 0:
            self.stdout.write(self.style.WARNING(f"delta estimado = {relatorio.delta_hat:.6g}: condição angular violada."))
        else:
            self.stdout.write(self.style.SUCCESS(f"delta estimado = {relatorio.delta_hat:.6g}"))
        for phi, valor in relatorio.dmin_hat.items():
            self.stdout.write(f"D_min({phi:g}) estimado = {valor:.6g}")
        self.stdout.write(f"Monotonia estimada = {relatorio.monotonicity_hat:.6g}")

        if problem.name == "bilinear_affine" and {"a", "cx", "cy", "B"} <= set(problem.params):
            p = problem.params
            game = BilinearAffineGame(A=p["a"], c_x=[p["cx"]], c_y=[p["cy"]], B=p["B"])
            equilibrios = bilinear_boundary_equilibria(game)
            dados["equilibria"] = equilibrios.as_dict()
            self.stdout.write(f"Equilíbrios de fronteira: {equilibrios.classification}")

        if options.get("report"):
            write_report(dados, options["report"])
            self.stdout.write(f"Relatório: {options['report']}")

    # -----------------------------------------------------------------
    # equilibria
    # -----------------------------------------------------------------

    def _equilibria(self, options):
        if options.get("game_file"):
            dados = load_config_file(options["game_file"])
            try:
                game = BilinearAffineGame(A=dados["A"], c_x=dados["c_x"], c_y=dados["c_y"], B=dados["B"])
            except KeyError as exc:
                raise ConfigurationError(f"{options['game_file']}: campo {exc} ausente.") from exc
        elif options.get("a") is None:
            raise ConfigurationError("Informe --a (jogo 1-D) ou --game-file.")
        else:
            game = BilinearAffineGame(A=options["a"], c_x=[options["cx"]], c_y=[options["cy"]], B=options["B"])

        relatorio = bilinear_boundary_equilibria(game)
        self.stdout.write(f"u1 = {relatorio.u1:.12g}, u2 = {relatorio.u2:.12g}")
        if relatorio.classification == HALF_LINE:
            self.stdout.write(self.style.SUCCESS(
                f"Semirreta de equilíbrios na fronteira ({len(relatorio.equilibria)} amostrados, "
                f"resíduo máximo {relatorio.max_residual:.3g})."
            ))
        else:
            self.stdout.write(self.style.SUCCESS(f"Classificação: {relatorio.classification}; único GNE em (0, 0)."))
        if options.get("report"):
            write_report(relatorio, options["report"])
            self.stdout.write(f"Relatório: {options['report']}")

    # -----------------------------------------------------------------
    # plot
    # -----------------------------------------------------------------

    def _plot(self, options):
        origem = options["trace_csv"]
        if not Path(origem).is_file():
            raise ConfigurationError(f"Arquivo não encontrado: {origem}")
        try:
            trace = read_trace_csv(origem)
        except (KeyError, ValueError) as exc:
            raise ConfigurationError(f"{origem}: CSV de trace inválido ({exc}).") from exc
        if not trace.rounds:
            raise ConfigurationError(f"{origem}: CSV sem rodadas.")
        if options.get("problem"):
            trace.u = resolve_problem(options["problem"]).u
        write_svg(trace, options["plot"], plot_sets=options["plot_sets"], every_second=options["every_second"])
        self.stdout.write(self.style.SUCCESS(f"SVG: {options['plot']} ({trace.T} rodadas)"))


def _json_da_flag(texto, flag):
    if not texto:
        return None
    try:
        return json.loads(texto)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{flag}: JSON inválido ({exc}).") from exc
