from pathlib import Path

from django import forms

from fpm.engine import ETA_RULES, IOTA_MODES
from game.builtins import BUILTINS, PRESETS

ALGORITMOS = ("fpm", "altgd", "naive", "ogd-sideinfo")
INICIALIZACOES = ("default", "random")
# parâmetros aceitos pelo gerador de instâncias de conjuntos móveis
PARAMETROS_OGD = ("d", "D", "c", "theta_max", "lam")


def _escolhas(valores):
    return [("", "---------")] + [(v, v) for v in valores]


class ExperimentConfigForm(forms.Form):
    """
    Configuração de uma execução: valores do arquivo --config já
    sobrepostos pelas flags da linha de comando.
    """

    problem = forms.CharField(label="Problema", required=False)
    algorithm = forms.ChoiceField(label="Algoritmo", choices=_escolhas(ALGORITMOS), required=False)
    T = forms.IntegerField(label="Rodadas", min_value=1)
    seed = forms.IntegerField(label="Semente", required=False)
    eta_rule = forms.ChoiceField(label="Regra de passo", choices=_escolhas(ETA_RULES), required=False)
    eta = forms.FloatField(label="Passo fixo", required=False)
    iota_mode = forms.ChoiceField(label="Modo de ι", choices=_escolhas(IOTA_MODES), required=False)
    tol = forms.FloatField(label="Tolerância da auditoria", min_value=0.0, required=False)
    init = forms.CharField(label="Inicialização", required=False)
    init_file = forms.CharField(label="Arquivo de inicialização", required=False)
    params = forms.JSONField(label="Parâmetros do problema", required=False)
    u = forms.JSONField(label="Comparador u", required=False)
    strongly_convex = forms.BooleanField(required=False)
    trace = forms.CharField(label="CSV do trace", required=False)
    report = forms.CharField(label="Relatório JSON", required=False)
    plot = forms.CharField(label="SVG", required=False)
    plot_sets = forms.BooleanField(required=False)
    every_second = forms.BooleanField(required=False)

    def clean_algorithm(self):
        return self.cleaned_data.get("algorithm") or "fpm"

    def clean_params(self):
        params = self.cleaned_data.get("params") or {}
        if not isinstance(params, dict):
            raise forms.ValidationError("params deve ser um objeto JSON.", code="params_invalidos")
        return params

    def clean_u(self):
        u = self.cleaned_data.get("u")
        if u is None:
            return None
        if not isinstance(u, list) or not all(isinstance(v, (int, float)) for v in u):
            raise forms.ValidationError("u deve ser uma lista de números.", code="u_invalido")
        return [float(v) for v in u]

    def clean(self):
        cleaned_data = super().clean()
        algorithm = cleaned_data.get("algorithm") or "fpm"
        problem = cleaned_data.get("problem")
        init = cleaned_data.get("init")
        init_file = cleaned_data.get("init_file")

        if algorithm == "ogd-sideinfo":
            params = cleaned_data.get("params") or {}
            desconhecidos = sorted(set(params) - set(PARAMETROS_OGD))
            if desconhecidos:
                raise forms.ValidationError(
                    f"Parâmetros desconhecidos para ogd-sideinfo: {', '.join(desconhecidos)}.",
                    code="parametro_desconhecido",
                )
            if cleaned_data.get("strongly_convex") and not params.get("lam"):
                raise forms.ValidationError(
                    "A variante fortemente convexa exige params.lam > 0.", code="mu_obrigatorio",
                )
        elif not problem:
            self.add_error("problem", forms.ValidationError("Informe o problema.", code="required"))
        elif problem not in BUILTINS and not Path(problem).is_file():
            self.add_error("problem", forms.ValidationError(
                f"'{problem}' não é um problema embutido nem um arquivo existente.",
                code="problema_desconhecido",
            ))

        if cleaned_data.get("eta_rule") == "fixed":
            eta = cleaned_data.get("eta")
            if eta is None or eta <= 0:
                self.add_error("eta", forms.ValidationError(
                    "A regra 'fixed' exige --eta positivo.", code="eta_obrigatorio",
                ))

        if init and init_file:
            raise forms.ValidationError(
                "Use --init ou --init-file, não os dois.", code="inicializacao_ambigua",
            )
        if init and init not in INICIALIZACOES:
            if init not in PRESETS:
                opcoes = ", ".join(list(INICIALIZACOES) + sorted(PRESETS))
                self.add_error("init", forms.ValidationError(
                    f"Inicialização '{init}' desconhecida. Use {opcoes}.", code="preset_desconhecido",
                ))
            elif problem in BUILTINS and PRESETS[init][0] != problem:
                self.add_error("init", forms.ValidationError(
                    f"O preset '{init}' é de {PRESETS[init][0]}, não de {problem}.",
                    code="preset_incompativel",
                ))
        if init_file and not Path(init_file).is_file():
            self.add_error("init_file", forms.ValidationError(
                f"Arquivo não encontrado: {init_file}", code="arquivo_inexistente",
            ))

        for campo in ("trace", "report", "plot"):
            destino = cleaned_data.get(campo)
            if destino and not Path(destino).resolve().parent.is_dir():
                self.add_error(campo, forms.ValidationError(
                    f"Diretório de saída não existe: {Path(destino).parent}", code="diretorio_inexistente",
                ))
        return cleaned_data
