"""
SVG das trajetórias, renderizado pelo motor de templates do Django.

Painel conjunto: primeira coordenada do jogador 1 contra a do jogador 2,
com o produto dos conjuntos desejados de cada rodada. Um painel por
jogador com a primeira coordenada ao longo das rodadas e o intervalo
anunciado em cada uma.
"""
import numpy as np
from django.template.loader import render_to_string

LARGURA = 640
LADO_CONJUNTO = 420
ALTURA_JOGADOR = 160
MARGEM = 36
CORES = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


class _Escala:
    def __init__(self, valores, inicio, fim, inverte=False):
        valores = np.asarray(valores, dtype=float)
        valores = valores[np.isfinite(valores)]
        lo, hi = (float(valores.min()), float(valores.max())) if valores.size else (0.0, 1.0)
        if hi - lo < 1e-12:
            lo, hi = lo - 0.5, hi + 0.5
        folga = 0.05 * (hi - lo)
        self.lo, self.hi = lo - folga, hi + folga
        self.inicio, self.fim, self.inverte = inicio, fim, inverte

    def __call__(self, v):
        frac = (v - self.lo) / (self.hi - self.lo)
        if self.inverte:
            frac = 1.0 - frac
        return self.inicio + frac * (self.fim - self.inicio)


def _fmt(v):
    return f"{v:.2f}"


def _pontos(xs, ys):
    return " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(xs, ys))


def _rodadas(trace, every_second):
    rodadas = list(trace.rounds)
    if every_second and rodadas:
        ultima = rodadas[-1]
        rodadas = rodadas[::2]
        if rodadas[-1] is not ultima:
            rodadas.append(ultima)
    return rodadas


def _conjunto_finito(jogador):
    return np.all(np.isfinite(jogador.lower)) and np.all(np.isfinite(jogador.upper))


def _painel_conjunto(trace, rodadas, plot_sets, u):
    a = np.array([r.players[0].x[0] for r in rodadas])
    b = np.array([r.players[1].x[0] for r in rodadas])
    extra_a, extra_b = [], []
    com_conjunto = [r for r in rodadas if plot_sets and _conjunto_finito(r.players[0]) and _conjunto_finito(r.players[1])]
    for r in com_conjunto:
        extra_a += [r.players[0].lower[0], r.players[0].upper[0]]
        extra_b += [r.players[1].lower[0], r.players[1].upper[0]]
    if u is not None:
        extra_a.append(u[0])
        extra_b.append(u[trace.dims[0]])
    ex = _Escala(np.concatenate([a, extra_a]), MARGEM, LADO_CONJUNTO - MARGEM)
    ey = _Escala(np.concatenate([b, extra_b]), MARGEM, LADO_CONJUNTO - MARGEM, inverte=True)

    retangulos = []
    for r in com_conjunto:
        x0, x1 = ex(r.players[0].lower[0]), ex(r.players[0].upper[0])
        y0, y1 = ey(r.players[1].upper[0]), ey(r.players[1].lower[0])
        retangulos.append({
            "classe": "conjunto-produto",
            "x": _fmt(x0), "y": _fmt(y0), "w": _fmt(max(x1 - x0, 0.5)), "h": _fmt(max(y1 - y0, 0.5)),
            "cor": "#555555",
        })
    pontos = [{"classe": "inicio", "cx": _fmt(ex(a[0])), "cy": _fmt(ey(b[0])), "cor": "#000000"}]
    if u is not None:
        pontos.append({"classe": "equilibrio", "cx": _fmt(ex(u[0])), "cy": _fmt(ey(u[trace.dims[0]])), "cor": "#2ca02c"})
    return {
        "titulo": "x(1) contra x(2)",
        "dx": 0, "dy": 0, "largura": LADO_CONJUNTO, "altura": LADO_CONJUNTO,
        "retangulos": retangulos,
        "linhas": [{"classe": "trajetoria-conjunta", "jogador": "", "pontos": _pontos(ex(a), ey(b)), "cor": "#000000"}],
        "pontos": pontos,
    }


def _painel_jogador(i, rodadas, plot_sets, dy):
    t = np.array([r.t for r in rodadas], dtype=float)
    x = np.array([r.players[i].x[0] for r in rodadas])
    com_conjunto = [r for r in rodadas if plot_sets and _conjunto_finito(r.players[i])]
    extremos = [v for r in com_conjunto for v in (r.players[i].lower[0], r.players[i].upper[0])]
    et = _Escala(np.concatenate([t - 0.5, t + 0.5]), MARGEM, LARGURA - MARGEM)
    ev = _Escala(np.concatenate([x, extremos]), 18, ALTURA_JOGADOR - 18, inverte=True)
    cor = CORES[i % len(CORES)]
    retangulos = []
    for r in com_conjunto:
        x0, x1 = et(r.t - 0.4), et(r.t + 0.4)
        y0, y1 = ev(r.players[i].upper[0]), ev(r.players[i].lower[0])
        retangulos.append({
            "classe": "conjunto-desejado",
            "x": _fmt(x0), "y": _fmt(y0), "w": _fmt(max(x1 - x0, 0.5)), "h": _fmt(max(y1 - y0, 0.5)),
            "cor": cor,
        })
    return {
        "titulo": f"jogador {i + 1}: primeira coordenada por rodada",
        "dx": 0, "dy": dy, "largura": LARGURA, "altura": ALTURA_JOGADOR,
        "retangulos": retangulos,
        "linhas": [{"classe": "jogador", "jogador": str(i + 1), "pontos": _pontos(et(t), ev(x)), "cor": cor}],
        "pontos": [],
    }


def render_svg(trace, plot_sets=False, every_second=False, title=None):
    rodadas = _rodadas(trace, every_second)
    if not rodadas:
        raise ValueError("Trace sem rodadas para desenhar.")
    paineis = []
    topo = 0
    if trace.n >= 2:
        paineis.append(_painel_conjunto(trace, rodadas, plot_sets, trace.u))
        topo = LADO_CONJUNTO
    for i in range(trace.n):
        paineis.append(_painel_jogador(i, rodadas, plot_sets, topo))
        topo += ALTURA_JOGADOR
    return render_to_string("harness/trajetoria.svg", {
        "titulo": title or f"{trace.algorithm} em {trace.problem_name}, T={trace.T}",
        "largura": LARGURA,
        "altura": topo,
        "paineis": paineis,
    })


def write_svg(trace, path, **kwargs):
    with open(path, "w", encoding="utf-8") as f:
        f.write(render_svg(trace, **kwargs))
