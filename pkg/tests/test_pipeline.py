# -*- coding: utf-8 -*-
import json
import logging

import pytest

import pipeline_principal
from src.config import ENV_SNAPSHOT, PERCENTILES
from src.erros import ConfigError, InputIOError, NothingRetainedError
from src.ingestao import ingest_file
from src.pipeline import (
    cmd_analyze, cmd_report_convert, cmd_synth, cmd_validate, parse_percentiles,
    resolve_run_config,
)
from tests.conftest import escrever_csv, escrever_json, linha_bruta


@pytest.fixture
def corpus(tmp_path, config_pequena):
    """Corpus sintético pequeno já gravado, com gabarito e snapshot."""
    cfg = escrever_json(tmp_path / "synth.json", config_pequena)
    return cmd_synth(cfg, tmp_path / "sintetico")


@pytest.fixture
def log_restaurado():
    """``main`` reconfigura o logging raiz; devolve o estado anterior ao final."""
    raiz = logging.getLogger()
    handlers, nivel = raiz.handlers[:], raiz.level
    yield
    for h in raiz.handlers:
        if h not in handlers:
            h.close()
    raiz.handlers[:] = handlers
    raiz.setLevel(nivel)


def _sem_metadados(report) -> dict:
    d = report.to_dict()
    d.pop("run_metadata")
    return d


# ── configuração ─────────────────────────────────────────────────────────────

def test_padroes_materializados():
    cfg = resolve_run_config({}, env={})
    assert cfg.scan_threshold == 5
    assert cfg.percentiles == PERCENTILES
    assert cfg.enrich_policy == "fill"
    assert cfg.snapshot is None


def test_precedencia_flags_arquivo_ambiente(tmp_path):
    arq = escrever_json(tmp_path / "run.json", {"scan-threshold": 7, "snapshot": "arquivo.csv",
                                                "percentiles": "1%,2%"})
    env = {ENV_SNAPSHOT: "ambiente.csv"}
    assert resolve_run_config({}, env=env).snapshot == "ambiente.csv"
    cfg = resolve_run_config({"scan_threshold": None}, arq, env)
    assert (cfg.scan_threshold, cfg.snapshot) == (7, "arquivo.csv")
    assert cfg.percentiles == (0.01, 0.02)
    cfg = resolve_run_config({"scan_threshold": 3, "snapshot": "flag.csv"}, arq, env)
    assert (cfg.scan_threshold, cfg.snapshot) == (3, "flag.csv")


def test_chave_desconhecida_no_arquivo(tmp_path):
    arq = escrever_json(tmp_path / "run.json", {"limiar": 3})
    with pytest.raises(ConfigError):
        resolve_run_config({}, arq, env={})


@pytest.mark.parametrize("flags", [
    {"scan_threshold": 0},
    {"burst_activity": 1.5},
    {"percentiles": "0,5%"},
    {"format": "xml"},
    {"enrich_policy": "merge"},
    {"workers": 0},
])
def test_valores_invalidos(flags):
    with pytest.raises(ConfigError):
        resolve_run_config(flags, env={})


def test_percentis_em_texto():
    assert parse_percentiles("0.01, 5%,10%") == (0.01, 0.05, 0.10)
    with pytest.raises(ConfigError):
        parse_percentiles("um")


# ── analyze ──────────────────────────────────────────────────────────────────

def test_analise_com_gabarito(corpus, tmp_path):
    cfg = resolve_run_config({
        "inputs": [str(corpus["corpus"])], "snapshot": str(corpus["snapshot"]),
        "truth": str(corpus["ground_truth"]), "burst_volume": 1000,
        "out": str(tmp_path / "saida"),
    }, env={})
    status, report = cmd_analyze(cfg)
    assert status == 0
    avaliacao = report.truth_evaluation
    assert avaliacao["scanners"]["recall"] == 1.0
    assert avaliacao["scanners"]["precision"] == 1.0
    assert avaliacao["backscatter"]["recall"] == 1.0
    assert avaliacao["asn_misclassified"] == 0
    assert report.enrichment["applied"] is True
    assert report.run_metadata["snapshot"]["snapshot_date"]
    assert (tmp_path / "saida" / "report.json").exists()
    assert json.loads((tmp_path / "saida" / "run_config.json").read_text())["burst_volume"] == 1000


def test_relatorio_identico_em_execucoes_repetidas(corpus, tmp_path):
    cfg = resolve_run_config({"inputs": [str(corpus["corpus"])],
                              "out": str(tmp_path / "saida")}, env={})
    cmd_analyze(cfg)
    primeiro = (tmp_path / "saida" / "report.json").read_bytes()
    cmd_analyze(cfg)
    assert (tmp_path / "saida" / "report.json").read_bytes() == primeiro


def test_limiar_de_scanner_configuravel(csv_valido, tmp_path):
    base = {"inputs": [str(csv_valido)], "out": str(tmp_path)}
    _, cinco = cmd_analyze(resolve_run_config(base, env={}))
    _, seis = cmd_analyze(resolve_run_config({**base, "scan_threshold": 6}, env={}))
    assert cinco.detection["scanner_sources"] == 1
    assert seis.detection["scanner_sources"] == 0
    assert seis.detection["scan_threshold_used"] == 6


@pytest.mark.parametrize("lote,workers", [(37, 1), (37, 3), (500, 4)])
def test_resultado_independe_de_lote_e_workers(corpus, tmp_path, lote, workers):
    base = {"inputs": [str(corpus["corpus"])], "snapshot": str(corpus["snapshot"]),
            "out": str(tmp_path / "a")}
    _, inteiro = cmd_analyze(resolve_run_config(base, env={}))
    _, em_lotes = cmd_analyze(resolve_run_config(
        {**base, "out": str(tmp_path / "b"), "chunk_size": lote, "workers": workers}, env={}))
    assert _sem_metadados(em_lotes) == _sem_metadados(inteiro)


def test_varios_arquivos_somam(csv_valido, csv_com_rejeitos, tmp_path):
    cfg = resolve_run_config({"inputs": [str(csv_valido), str(csv_com_rejeitos)],
                              "out": str(tmp_path), "chunk_size": 4}, env={})
    _, report = cmd_analyze(cfg)
    assert report.cleaning["rows_read"] == 12
    assert report.cleaning["rows_retained"] == 10
    assert report.summary["record_count"] == 10
    assert len(report.run_metadata["inputs"]) == 2


def test_rejeitos_gravados_ao_lado(csv_com_rejeitos, tmp_path):
    cfg = resolve_run_config({"inputs": [str(csv_com_rejeitos)], "out": str(tmp_path / "o"),
                              "spool_rejects": True}, env={})
    cmd_analyze(cfg)
    linhas = (tmp_path / "o" / "rejects_rejeitos.csv").read_text(encoding="utf-8").splitlines()
    assert len(linhas) == 3
    assert linhas[0].endswith("RejectReason")


def test_nada_retido_e_erro_de_formato(tmp_path):
    path = escrever_csv(tmp_path / "ruim.csv", [linha_bruta(Packets="0")])
    cfg = resolve_run_config({"inputs": [str(path)], "out": str(tmp_path)}, env={})
    with pytest.raises(NothingRetainedError) as exc:
        cmd_analyze(cfg)
    assert exc.value.exit_code == 2


def test_sem_entradas(tmp_path):
    with pytest.raises(ConfigError):
        cmd_analyze(resolve_run_config({"out": str(tmp_path)}, env={}))


def test_arquivo_inexistente(tmp_path):
    cfg = resolve_run_config({"inputs": [str(tmp_path / "nada.csv")], "out": str(tmp_path)},
                             env={})
    with pytest.raises(InputIOError) as exc:
        cmd_analyze(cfg)
    assert exc.value.exit_code == 3


# ── validate ─────────────────────────────────────────────────────────────────

def test_validate_imprime_relatorio(csv_com_rejeitos, capsys):
    rep = cmd_validate([csv_com_rejeitos])
    impresso = json.loads(capsys.readouterr().out)
    assert impresso == rep.to_dict()
    assert impresso["rows_read"] == 6
    assert impresso["rows_retained"] == 4
    assert impresso["rejected_by_reason"] == {"invalid_port": 1, "zero_packets": 1}


def test_validate_so_cabecalho(tmp_path, capsys):
    path = escrever_csv(tmp_path / "vazio.csv", [])
    with pytest.raises(NothingRetainedError):
        cmd_validate([path])
    assert json.loads(capsys.readouterr().out)["rows_read"] == 0


# ── synth ────────────────────────────────────────────────────────────────────

def test_synth_grava_corpus_legivel(corpus):
    registros, rep = ingest_file(corpus["corpus"])
    assert rep.rows_retained == rep.rows_read == corpus["records"] == len(registros)
    assert corpus["ground_truth"].exists() and corpus["snapshot"].exists()
    assert json.loads(corpus["config"].read_text(encoding="utf-8"))["seed"] == 7


def test_synth_sem_semente(tmp_path, config_pequena):
    del config_pequena["seed"]
    with pytest.raises(ConfigError):
        cmd_synth(escrever_json(tmp_path / "c.json", config_pequena), tmp_path / "s")


# ── report-convert ───────────────────────────────────────────────────────────

def test_conversao_de_formato_invalido(tmp_path):
    with pytest.raises(ConfigError):
        cmd_report_convert(tmp_path / "report.json", "xlsx", tmp_path)


# ── linha de comando ─────────────────────────────────────────────────────────

GLOBAIS = ["--sem-log-arquivo", "--sem-progresso"]


def test_main_analyze_e_conversao(csv_valido, tmp_path, log_restaurado):
    out = tmp_path / "saida"
    assert pipeline_principal.main(GLOBAIS + ["analyze", "--input", str(csv_valido),
                                              "--out", str(out)]) == 0
    assert (out / "report.json").exists()
    assert pipeline_principal.main(GLOBAIS + ["report-convert", "--report",
                                              str(out / "report.json"), "--format", "csv"]) == 0
    assert (out / "summary.csv").exists()


def test_main_pacote_csv_com_word(csv_valido, tmp_path, log_restaurado):
    out = tmp_path / "saida"
    assert pipeline_principal.main(GLOBAIS + ["analyze", "--input", str(csv_valido),
                                              "--out", str(out), "--format", "csv",
                                              "--word"]) == 0
    assert (out / "word" / "tabelas.docx").exists()


def test_main_erro_de_uso_sai_com_1(csv_valido, log_restaurado):
    with pytest.raises(SystemExit) as exc:
        pipeline_principal.main(GLOBAIS + ["analyze", "--input", str(csv_valido),
                                           "--scan-threshold", "cinco"])
    assert exc.value.code == 1


def test_main_configuracao_invalida_sai_com_1(csv_valido, tmp_path, log_restaurado):
    assert pipeline_principal.main(GLOBAIS + ["analyze", "--input", str(csv_valido),
                                              "--out", str(tmp_path),
                                              "--scan-threshold", "0"]) == 1


def test_main_coluna_critica_ausente_sai_com_2(tmp_path, log_restaurado):
    colunas = ("SourceIP", "Traffic", "Packets")
    path = escrever_csv(tmp_path / "sem_porta.csv", [linha_bruta()], colunas)
    assert pipeline_principal.main(GLOBAIS + ["validate", "--input", str(path)]) == 2


def test_main_arquivo_ausente_sai_com_3(tmp_path, log_restaurado):
    assert pipeline_principal.main(GLOBAIS + ["analyze", "--input", str(tmp_path / "nada.csv"),
                                              "--out", str(tmp_path)]) == 3


def test_main_synth(tmp_path, config_pequena, log_restaurado):
    cfg = escrever_json(tmp_path / "c.json", config_pequena)
    assert pipeline_principal.main(GLOBAIS + ["synth", "--config", str(cfg),
                                              "--out", str(tmp_path / "s"), "--seed", "3"]) == 0
    gabarito = json.loads((tmp_path / "s" / "ground_truth.json").read_text(encoding="utf-8"))
    assert gabarito["generator"]["seed"] == 3
