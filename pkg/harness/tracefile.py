"""
Trace em CSV: uma linha por (rodada, jogador).

Colunas fixas: t, phase_k, player, step_kind, x_1..x_m, S_lower_1..m,
S_upper_1..m, step_len, iota, eta_bar, feasible, dist_to_u, com m a maior
dimensão entre os jogadores (colunas sobrando ficam vazias). Números com
17 dígitos significativos, separador decimal '.', jogadores numerados a
partir de 1.
"""
import csv

import numpy as np

from fpm.trace import PlayerRound, RoundLog, RunTrace


def _num(valor):
    return format(float(valor), ".17g")


def _cabecalho(largura):
    return (
        ["t", "phase_k", "player", "step_kind"]
        + [f"x_{k}" for k in range(1, largura + 1)]
        + [f"S_lower_{k}" for k in range(1, largura + 1)]
        + [f"S_upper_{k}" for k in range(1, largura + 1)]
        + ["step_len", "iota", "eta_bar", "feasible", "dist_to_u"]
    )


def _coluna(vetor, largura):
    return [_num(v) for v in vetor] + [""] * (largura - len(vetor))


def trace_rows(trace):
    largura = max(trace.dims)
    yield _cabecalho(largura)
    for log in trace.rounds:
        viavel = "true" if log.feasible and log.sets_feasible else "false"
        for i, jogador in enumerate(log.players, start=1):
            yield (
                [str(log.t), str(log.phase_k), str(i), jogador.step_kind]
                + _coluna(jogador.x, largura)
                + _coluna(jogador.lower, largura)
                + _coluna(jogador.upper, largura)
                + [_num(jogador.step_len), _num(jogador.iota), _num(jogador.eta_bar), viavel, _num(jogador.dist_to_u)]
            )


def write_trace_csv(trace, path):
    linhas = 0
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        for linha in trace_rows(trace):
            writer.writerow(linha)
            linhas += 1
    return linhas - 1


def write_comparison_csv(path, labels, traces):
    """Distância a u por rodada, uma coluna por execução."""
    distancias = [trace.distances() for trace in traces]
    total = max((len(d) for d in distancias), default=0)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["t"] + [f"dist_{label}" for label in labels])
        for t in range(1, total + 1):
            writer.writerow([str(t)] + [_num(d[t - 1]) if t <= len(d) else "" for d in distancias])


def _vetor(linha, prefixo, largura):
    valores = [linha[f"{prefixo}_{k}"] for k in range(1, largura + 1)]
    return np.array([float(v) for v in valores if v != ""])


def read_trace_csv(path, algorithm="csv"):
    """Reconstrói um RunTrace (sem config nem resumo) a partir do CSV."""
    with open(path, newline="", encoding="utf-8-sig") as f:
        reader = csv.DictReader(f)
        largura = sum(1 for nome in reader.fieldnames if nome.startswith("x_"))
        rodadas = {}
        for linha in reader:
            jogador = PlayerRound(
                x=_vetor(linha, "x", largura),
                lower=_vetor(linha, "S_lower", largura),
                upper=_vetor(linha, "S_upper", largura),
                step_kind=linha["step_kind"],
                step_len=float(linha["step_len"]),
                iota=float(linha["iota"]),
                eta_bar=float(linha["eta_bar"]),
                dist_to_u=float(linha["dist_to_u"]),
            )
            t = int(linha["t"])
            fase, viavel, jogadores = rodadas.setdefault(
                t, (int(linha["phase_k"]), linha["feasible"] == "true", []),
            )
            jogadores.append(jogador)

    logs = [
        RoundLog(t=t, phase_k=fase, players=tuple(jogadores), feasible=viavel)
        for t, (fase, viavel, jogadores) in sorted(rodadas.items())
    ]
    dims = tuple(p.x.size for p in logs[0].players) if logs else ()
    return RunTrace(algorithm=algorithm, problem_name=str(path), dims=dims, rounds=logs)
