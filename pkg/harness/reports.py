"""
Relatórios em JSON. Infinitos e NaN viram as strings "inf", "-inf" e
"nan" para o arquivo continuar sendo JSON válido.
"""
import json
import math

import numpy as np


def jsonable(valor):
    if hasattr(valor, "as_dict"):
        return jsonable(valor.as_dict())
    if isinstance(valor, dict):
        return {str(k): jsonable(v) for k, v in valor.items()}
    if isinstance(valor, (list, tuple)):
        return [jsonable(v) for v in valor]
    if isinstance(valor, np.ndarray):
        return jsonable(valor.tolist())
    if isinstance(valor, np.generic):
        return jsonable(valor.item())
    if isinstance(valor, float):
        if math.isnan(valor):
            return "nan"
        if math.isinf(valor):
            return "inf" if valor > 0 else "-inf"
    return valor


def write_report(dados, path):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(jsonable(dados), f, indent=2, ensure_ascii=False, allow_nan=False)
        f.write("\n")


def run_report(result):
    trace = result.trace
    dados = {
        "algorithm": trace.algorithm,
        "problem": trace.problem_name,
        "T": trace.T,
        "config": trace.config,
        "all_feasible": trace.all_feasible,
        "final_x": trace.final_x,
        "phase_ends": trace.phase_ends,
        "summary": trace.summary,
    }
    distancias = trace.distances()
    if distancias.size:
        dados["final_distance"] = float(np.linalg.norm(trace.final_x - trace.u))
    if result.regret is not None:
        dados["regret"] = result.regret
    if result.bound is not None:
        dados["bound"] = {
            "regime": result.bound.regime,
            "t0": result.bound.t0,
            "Xi": result.bound.Xi,
            "rho": result.bound.rho,
            "tail": result.bound.tail,
            "regret_bound": result.bound.regret_bound,
        }
    return dados
