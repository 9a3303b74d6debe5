"""
Arquivos de definição de problema (JSON).

    {
      "name": "...",
      "players": [{"dim": 1, "loss": {"kind": "quadratic-bilinear", ...}}, ...],
      "halfspaces": [[[a_1, ..., a_d], h], ...],
      "constants": {"G": ..., "D": ..., "u": [...]},
      "params": {...}
    }

Só perdas quadratic-bilinear e saddle-quartic são serializáveis.
"""
import json

from geometry.polytopes import Polytope

from .exceptions import InvalidProblem
from .losses import loss_from_dict
from .problems import CONSTANTES, GnepProblem


def dump_problem(problem):
    constantes = {
        nome: getattr(problem, nome) for nome in CONSTANTES if getattr(problem, nome) is not None
    }
    if problem.u is not None:
        constantes["u"] = problem.u.tolist()
    return {
        "name": problem.name,
        "players": [
            {"dim": d, "loss": perda.to_dict()} for d, perda in zip(problem.dims, problem.losses)
        ],
        "halfspaces": [[hs.normal.tolist(), hs.offset] for hs in problem.constraint.halfspaces],
        "constants": constantes,
        "params": dict(problem.params),
    }


def problem_from_dict(dados):
    try:
        jogadores = dados["players"]
        semiespacos = dados["halfspaces"]
    except (KeyError, TypeError) as exc:
        raise InvalidProblem(f"Definição de problema sem o campo {exc}.") from None
    constantes = dict(dados.get("constants") or {})
    desconhecidas = set(constantes) - set(CONSTANTES) - {"u"}
    if desconhecidas:
        raise InvalidProblem(f"Constantes desconhecidas: {sorted(desconhecidas)}.")
    try:
        dims = [int(j["dim"]) for j in jogadores]
        perdas = [loss_from_dict(j["loss"]) for j in jogadores]
        hs = [(a, h) for a, h in semiespacos]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidProblem(f"Definição de problema malformada: {exc}") from exc
    return GnepProblem(
        name=dados.get("name", "arquivo"),
        dims=dims,
        losses=perdas,
        constraint=Polytope(hs),
        params=dict(dados.get("params") or {}),
        **constantes,
    )


def load_problem_file(path):
    with open(path, encoding="utf-8-sig") as f:
        try:
            dados = json.load(f)
        except json.JSONDecodeError as exc:
            raise InvalidProblem(f"JSON inválido em {path}: {exc}") from exc
    return problem_from_dict(dados)


def write_problem_file(problem, path):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(dump_problem(problem), f, indent=2, ensure_ascii=False)
        f.write("\n")
