# -*- coding: utf-8 -*-
import json

import pandas as pd
import pytest
from docx import Document

from src.config import CSV_BUNDLE_EXTRA, CSV_BUNDLE_FILES, PLOT_SERIES
from src.erros import ConfigError, UnknownSeriesError
from src.pipeline import cmd_analyze, resolve_run_config
from src.relatorio import (
    AnalysisReport, PortRiskRegistry, compare_port_risk, emit_report,
    executar_conversao, load_registry, load_report, plot_series, to_json,
    write_docx,
)
from tests.conftest import registro


@pytest.fixture
def relatorio(csv_valido, tmp_path) -> AnalysisReport:
    cfg = resolve_run_config({"inputs": [str(csv_valido)], "out": str(tmp_path / "base")}, env={})
    _, report = cmd_analyze(cfg)
    return report


# ── risco de portas ──────────────────────────────────────────────────────────

def test_registro_padrao_e_quartil_inferior():
    regs = [registro(port=23, packets=100), registro(port=80, packets=50),
            registro(port=1000, packets=1), registro(port=2000, packets=2),
            registro(port=3000, packets=3), registro(port=4000, packets=4),
            registro(port=5000, packets=5)]
    cmp = compare_port_risk(regs)
    assert cmp.policy == "bottom_quartile_by_volume"
    baixos = [r.port for r in cmp.rows if r.risk == "low"]
    # ceil(5 / 4) = 2 portas não-alto-risco de menor volume
    assert baixos == [1000, 2000]
    assert cmp.low_packets == 3
    assert cmp.high_packets == 150
    assert cmp.ratio == pytest.approx(50.0)
    # portas do registro ausentes no tráfego aparecem zeradas
    linhas = {r.port: r for r in cmp.rows}
    assert linhas[445].packets == 0 and linhas[445].risk == "high"


def test_registro_explicito(tmp_path):
    path = tmp_path / "risco.csv"
    path.write_text("Port,Label,Risk\n23,Telnet,high\n9999,Obscura,low\n", encoding="utf-8")
    reg = load_registry(path)
    assert reg.policy == "explicit"
    cmp = compare_port_risk([registro(port=23, packets=8), registro(port=9999, packets=2)], reg)
    assert (cmp.high_packets, cmp.low_packets) == (8, 2)
    assert cmp.to_dict()["high_low_ratio"] == pytest.approx(4.0)


def test_razao_indefinida_sem_trafego_baixo():
    reg = PortRiskRegistry(high_risk={23: "Telnet"}, low_risk={9999: "x"})
    assert compare_port_risk([registro(port=23)], reg).ratio is None


def test_portas_em_alto_e_baixo_risco():
    with pytest.raises(ConfigError):
        PortRiskRegistry(high_risk={23: "Telnet"}, low_risk={23: "Telnet"})


@pytest.mark.parametrize("conteudo", [
    "Port,Label\n23,Telnet\n",
    "Port,Label,Risk\n23,Telnet,medium\n",
    "Port,Label,Risk\n70000,X,high\n",
])
def test_registro_invalido(tmp_path, conteudo):
    path = tmp_path / "risco.csv"
    path.write_text(conteudo, encoding="utf-8")
    with pytest.raises(ConfigError):
        load_registry(path)


# ── relatório ────────────────────────────────────────────────────────────────

def test_json_ida_e_volta(relatorio, tmp_path):
    [path] = emit_report(relatorio, "json", tmp_path)
    texto = path.read_text(encoding="utf-8")
    assert texto == to_json(relatorio)
    assert to_json(load_report(path)) == texto
    assert list(json.loads(texto)) == sorted(json.loads(texto))


def test_campos_do_relatorio(relatorio):
    assert relatorio.summary["record_count"] == 6
    assert relatorio.summary["total_packets"] == 53
    assert relatorio.detection["scanner_sources"] == 1
    assert relatorio.cleaning["rows_read"] == 6
    assert [r["country"] for r in relatorio.top_countries] == ["US", "DE"]
    assert relatorio.top_asns[0] == {"asn": 64500, "org": "Example Net", "packets": 50}
    assert relatorio.run_metadata["config"]["scan_threshold"] == 5
    assert len(relatorio.run_metadata["inputs"][0]["sha256"]) == 64
    assert relatorio.truth_evaluation is None


def test_pacote_csv(relatorio, tmp_path):
    saidas = emit_report(relatorio, "csv", tmp_path)
    nomes = [p.name for p in saidas]
    assert set(CSV_BUNDLE_FILES) <= set(nomes)
    assert set(CSV_BUNDLE_EXTRA) <= set(nomes)
    pct = pd.read_csv(tmp_path / "percentile_table.csv")
    assert list(pct.columns) == ["percentile", "ip_count", "packet_volume", "cumulative_share"]
    assert len(pct) == 3
    limpeza = pd.read_csv(tmp_path / "cleaning.csv")
    assert dict(zip(limpeza["metric"], limpeza["value"]))["rows_retained"] == 6


def test_formato_desconhecido(relatorio, tmp_path):
    with pytest.raises(ConfigError):
        emit_report(relatorio, "xml", tmp_path)


def test_relatorio_incompleto(tmp_path):
    path = tmp_path / "r.json"
    path.write_text('{"summary": {}}', encoding="utf-8")
    with pytest.raises(ConfigError):
        load_report(path)


# ── séries para gráfico ──────────────────────────────────────────────────────

@pytest.mark.parametrize("nome", PLOT_SERIES)
def test_series_para_grafico(relatorio, nome):
    df = plot_series(relatorio, nome)
    if nome in ("lorenz", "top_countries"):
        assert list(df.columns) == ["x", "y"]
    else:
        assert list(df.columns) == ["series", "x", "y"]
    assert not df.empty


def test_serie_de_lorenz_termina_em_um(relatorio):
    df = plot_series(relatorio, "lorenz")
    assert tuple(df.iloc[-1]) == (1.0, 1.0)


def test_serie_desconhecida(relatorio):
    with pytest.raises(UnknownSeriesError):
        plot_series(relatorio, "pizza")


# ── conversão ────────────────────────────────────────────────────────────────

def test_word_com_todas_as_tabelas(relatorio, tmp_path):
    path = write_docx(relatorio, tmp_path / "r.docx")
    doc = Document(str(path))
    assert len(doc.tables) == len(CSV_BUNDLE_FILES) + len(CSV_BUNDLE_EXTRA)


def test_conversao_de_relatorio_gravado(relatorio, tmp_path):
    [json_path] = emit_report(relatorio, "json", tmp_path / "json")
    csvs = executar_conversao(json_path, "csv", tmp_path / "csv")
    assert (tmp_path / "csv" / "summary.csv") in csvs
    [docx] = executar_conversao(json_path, "docx", tmp_path / "docx")
    assert docx.name == "report.docx" and docx.exists()
