"""
Orquestração das execuções: mescla configuração de arquivo e flags,
valida, resolve problema e inicialização, roda o algoritmo e calcula os
relatórios derivados.
"""
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from analysis.bounds import convergence_bound, ogd_regret_bound, ogd_strongly_convex_bound
from analysis.exceptions import AnalysisError
from analysis.regret import regret
from fpm.baselines import altgd_run, naive_wait_run, ogd_side_info_run, shrinking_box_instance
from fpm.engine import EngineConfig, fpm_run
from fpm.exceptions import InvalidInitialization
from game.builtins import BUILTINS, PRESETS, default_init, load_builtin
from game.exceptions import InvalidProblem, UnknownProblem
from game.problem_files import load_problem_file
from game.problems import PlayerStart, random_init
from geometry.boxes import BoxSet
from geometry.exceptions import GeometryError
from simulador_gnep.conf import gnep_setting

from .exceptions import ConfigurationError
from .forms import ExperimentConfigForm

logger = logging.getLogger(__name__)

ALGORITMOS = {
    "fpm": fpm_run,
    "altgd": altgd_run,
    "naive": naive_wait_run,
}


@dataclass
class ExperimentResult:
    config: dict
    trace: object
    problem: object = None
    regret: object = None
    bound: object = None


# ---------------------------------------------------------------------
# Configuração
# ---------------------------------------------------------------------

def load_config_file(path):
    if not Path(path).is_file():
        raise ConfigurationError(f"Arquivo de configuração não encontrado: {path}")
    try:
        with open(path, encoding="utf-8-sig") as f:
            dados = json.load(f)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: JSON inválido ({exc}).") from exc
    if not isinstance(dados, dict):
        raise ConfigurationError(f"{path}: a configuração deve ser um objeto JSON.")
    return dados


def merge_options(arquivo, flags):
    """Flags informadas (diferentes de None) têm prioridade sobre o arquivo."""
    return {**arquivo, **{chave: valor for chave, valor in flags.items() if valor is not None}}


def validate(dados):
    form = ExperimentConfigForm(data=dados)
    if not form.is_valid():
        erros = form.errors.get_json_data()
        mensagens = "; ".join(
            f"{campo}: {erro['message']}" if campo != "__all__" else erro["message"]
            for campo, lista in erros.items() for erro in lista
        )
        raise ConfigurationError(f"Configuração inválida: {mensagens}", errors=erros)
    return form.cleaned_data


# ---------------------------------------------------------------------
# Problema e inicialização
# ---------------------------------------------------------------------

def resolve_problem(nome, params=None):
    if nome in BUILTINS:
        return load_builtin(nome, params)
    if params:
        raise InvalidProblem("params só se aplicam a problemas embutidos.")
    return load_problem_file(nome)


def load_init_file(path):
    """[{"x": [...], "lower": [...], "upper": [...]}, ...] ou {"players": [...]}."""
    try:
        with open(path, encoding="utf-8-sig") as f:
            dados = json.load(f)
    except json.JSONDecodeError as exc:
        raise InvalidInitialization(f"{path}: JSON inválido ({exc}).") from exc
    jogadores = dados.get("players") if isinstance(dados, dict) else dados
    if not isinstance(jogadores, list):
        raise InvalidInitialization(f"{path}: esperada uma lista de jogadores.")
    try:
        return [PlayerStart(j["x"], BoxSet(j["lower"], j["upper"])) for j in jogadores]
    except (KeyError, TypeError) as exc:
        raise InvalidInitialization(f"{path}: jogador sem x, lower ou upper.") from exc
    except GeometryError as exc:
        raise InvalidInitialization(f"{path}: {exc}") from exc


def resolve_init(problem, init=None, init_file=None, seed=None):
    if init_file:
        return load_init_file(init_file)
    if init in PRESETS:
        nome, variante = PRESETS[init]
        if nome != problem.name:
            raise InvalidInitialization(f"O preset '{init}' é de {nome}, não de {problem.name}.")
        return default_init(nome, variante)
    if init == "random":
        seed = gnep_setting("SEED") if seed is None else seed
        return random_init(problem, np.random.default_rng(seed))
    try:
        return default_init(problem.name)
    except UnknownProblem:
        logger.info("%s sem inicialização documentada; sorteando uma.", problem.name)
        seed = gnep_setting("SEED") if seed is None else seed
        return random_init(problem, np.random.default_rng(seed))


# ---------------------------------------------------------------------
# Execução
# ---------------------------------------------------------------------

def _engine_config(cleaned):
    return EngineConfig(
        T=cleaned["T"],
        eta_rule=cleaned.get("eta_rule") or None,
        eta=cleaned.get("eta"),
        iota_mode=cleaned.get("iota_mode") or None,
        seed=cleaned.get("seed"),
        audit_tol=cleaned.get("tol"),
    )


def _cota(problem, trace):
    if trace.algorithm != "fpm" or problem.u is None:
        return None
    try:
        return convergence_bound(problem, trace.T, x1=trace.rounds[0].joint_x)
    except AnalysisError:
        return None


def _cota_ogd(instancia, trace):
    try:
        if trace.config["strongly_convex"]:
            return ogd_strongly_convex_bound(instancia)
        return ogd_regret_bound(instancia.D, instancia.G, instancia.c, instancia.c_prime, instancia.T)
    except AnalysisError:
        return None


def execute(cleaned):
    algorithm = cleaned.get("algorithm") or "fpm"
    if algorithm == "ogd-sideinfo":
        seed = gnep_setting("SEED") if cleaned.get("seed") is None else cleaned["seed"]
        instancia = shrinking_box_instance(T=cleaned["T"], seed=seed, **(cleaned.get("params") or {}))
        trace = ogd_side_info_run(instancia, strongly_convex=bool(cleaned.get("strongly_convex")))
        trace.summary["regret_bound"] = _cota_ogd(instancia, trace)
        return ExperimentResult(config=cleaned, trace=trace)

    problem = resolve_problem(cleaned["problem"], cleaned.get("params"))
    if cleaned.get("u") is not None:
        # comparador da configuração substitui o do problema em todo o trace
        problem = replace(problem, u=cleaned["u"])
    config = _engine_config(cleaned)
    init = resolve_init(problem, cleaned.get("init"), cleaned.get("init_file"), config.seed)
    trace = ALGORITMOS[algorithm](problem, init, config)

    relatorio = regret(trace, problem, problem.u) if problem.u is not None else None
    logger.info("%s em %s: %d rodadas, viável=%s.", algorithm, problem.name, trace.T, trace.all_feasible)
    return ExperimentResult(config=cleaned, trace=trace, problem=problem, regret=relatorio, bound=_cota(problem, trace))


def execute_many(configs, workers=None):
    """Execuções independentes em threads; resultados na ordem de entrada."""
    workers = gnep_setting("WORKERS") if workers is None else workers
    with ThreadPoolExecutor(max_workers=max(1, int(workers))) as pool:
        return list(pool.map(execute, configs))


def rounds_to_tolerance(trace, tau):
    """Primeira rodada com |x_t - u| <= tau (None se nunca)."""
    distancias = trace.distances()
    abaixo = np.flatnonzero(distancias <= tau)
    return int(abaixo[0]) + 1 if abaixo.size else None


def moves_per_player(trace):
    """Quantas rodadas cada jogador de fato mudou o próprio iterado."""
    return [sum(1 for r in trace.rounds if r.players[i].step_len > 0) for i in range(trace.n)]
