# -*- coding: utf-8 -*-
"""
Fase 5 — Relatório da análise.

  • Comparação de volume entre portas de alto e de baixo risco
  • Montagem do ``AnalysisReport`` a partir das saídas das fases 1–4
  • Serialização determinística: JSON único ou pacote de CSVs (uma tabela por
    campo do relatório)
  • Tabelas prontas para gráfico (nenhuma figura é desenhada aqui)
  • Conversão de um relatório JSON já gravado para CSV ou Word (.docx)
"""

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import pandas as pd
from docx import Document

from src import documento
from src.config import (
    CSV_ENCODING, DOCX_MAX_LINHAS, HIGH_RISK_PORTS,
    LOW_RISK_QUARTILE, PLOT_SERIES, REPORT_DOCX_NAME, REPORT_FORMATS,
    REPORT_JSON_NAME, RISK_LABELS, TITULO_PROJETO, TOP_ASN_SERIES,
)
from src.erros import ConfigError, InputIOError, UnknownSeriesError
from src.metricas import AgregadoParcial
from src.registro import ConnectionRecord

logger = logging.getLogger(__name__)


# ==============================================================================
# REGISTRO DE RISCO DE PORTAS
# ==============================================================================

@dataclass(frozen=True)
class PortRiskRegistry:
    """
    Portas de alto risco (com rótulo) e política de baixo risco: lista
    explícita, ou ``None`` para o quartil inferior das portas observadas.
    """
    high_risk: dict[int, str] = field(default_factory=lambda: dict(HIGH_RISK_PORTS))
    low_risk: dict[int, str] | None = None

    def __post_init__(self):
        if self.low_risk:
            comuns = set(self.high_risk) & set(self.low_risk)
            if comuns:
                raise ConfigError(f"portas em alto e baixo risco ao mesmo tempo: {sorted(comuns)}")

    @property
    def policy(self) -> str:
        return "explicit" if self.low_risk is not None else "bottom_quartile_by_volume"


def load_registry(path) -> PortRiskRegistry:
    """Lê um CSV ``Port,Label,Risk`` (Risk ∈ {high, low})."""
    path = Path(path)
    altos: dict[int, str] = {}
    baixos: dict[int, str] = {}
    try:
        with open(path, "r", encoding=CSV_ENCODING, newline="") as fh:
            reader = csv.DictReader(fh)
            faltando = {"Port", "Label", "Risk"} - set(reader.fieldnames or [])
            if faltando:
                raise ConfigError(f"{path}: registro sem coluna(s) {sorted(faltando)}")
            for n, row in enumerate(reader, start=2):
                risco = (row["Risk"] or "").strip().lower()
                if risco not in RISK_LABELS:
                    raise ConfigError(f"{path}:{n}: risco inválido {row['Risk']!r}")
                try:
                    porta = int((row["Port"] or "").strip())
                except ValueError:
                    raise ConfigError(f"{path}:{n}: porta inválida {row['Port']!r}")
                if not 1 <= porta <= 65535:
                    raise ConfigError(f"{path}:{n}: porta fora de 1..65535")
                destino = altos if risco == "high" else baixos
                destino[porta] = (row["Label"] or "").strip()
    except OSError as exc:
        raise InputIOError(path, exc)
    return PortRiskRegistry(high_risk=altos, low_risk=baixos or None)


@dataclass(frozen=True)
class PortRiskRow:
    port: int
    label: str
    risk: str
    packets: int
    records: int


@dataclass(frozen=True)
class PortRiskComparison:
    rows: tuple[PortRiskRow, ...]
    high_packets: int
    low_packets: int
    high_records: int
    low_records: int
    policy: str

    @property
    def ratio(self) -> float | None:
        return self.high_packets / self.low_packets if self.low_packets else None

    def to_dict(self) -> dict:
        return {
            "policy": self.policy,
            "high_packets": self.high_packets,
            "low_packets": self.low_packets,
            "high_records": self.high_records,
            "low_records": self.low_records,
            "high_low_ratio": self.ratio,
            "ports": [asdict(r) for r in self.rows],
        }


def _portas_baixo_risco(pacotes: Mapping[int, int], altos: Iterable[int]) -> list[int]:
    candidatas = sorted((p for p in pacotes if p not in set(altos)),
                        key=lambda p: (pacotes[p], p))
    k = math.ceil(len(candidatas) * LOW_RISK_QUARTILE)
    return candidatas[:k]


def compare_port_risk_from(pacotes: Mapping[int, int], registros: Mapping[int, int],
                           registry: PortRiskRegistry) -> PortRiskComparison:
    if registry.low_risk is not None:
        baixos = dict(registry.low_risk)
    else:
        baixos = {p: "" for p in _portas_baixo_risco(pacotes, registry.high_risk)}
    linhas = [PortRiskRow(p, registry.high_risk[p], "high", pacotes.get(p, 0), registros.get(p, 0))
              for p in sorted(registry.high_risk)]
    linhas += [PortRiskRow(p, baixos[p], "low", pacotes.get(p, 0), registros.get(p, 0))
               for p in sorted(baixos)]
    alto = [r for r in linhas if r.risk == "high"]
    baixo = [r for r in linhas if r.risk == "low"]
    return PortRiskComparison(
        rows=tuple(linhas),
        high_packets=sum(r.packets for r in alto),
        low_packets=sum(r.packets for r in baixo),
        high_records=sum(r.records for r in alto),
        low_records=sum(r.records for r in baixo),
        policy=registry.policy,
    )


def compare_port_risk(records: Iterable[ConnectionRecord],
                      registry: PortRiskRegistry | None = None) -> PortRiskComparison:
    """
    Totais por porta do registro (zerados quando ausentes do tráfego) e
    agregados alto × baixo risco. Valores lineares; escala log é de quem plota.
    """
    agregado = AgregadoParcial.from_records(records)
    return compare_port_risk_from(agregado.porta_pacotes(), agregado.porta_registros(),
                                  registry or PortRiskRegistry())


# ==============================================================================
# RELATÓRIO
# ==============================================================================

@dataclass
class AnalysisReport:
    summary: dict
    cleaning: dict
    detection: dict
    enrichment: dict
    lorenz: dict
    percentile_table: list[dict]
    entropy_series: list[dict]
    entropy_weight: str
    burstiness: list[dict]
    hourly_asn_series: list[dict]
    top_countries: list[dict]
    top_asns: list[dict]
    top_ports: list[dict]
    port_risk: dict
    run_metadata: dict
    truth_evaluation: dict | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "AnalysisReport":
        nomes = cls.__dataclass_fields__
        faltando = [n for n in nomes if n not in d and n != "truth_evaluation"]
        if faltando:
            raise ConfigError(f"relatório sem campo(s): {faltando}")
        return cls(**{n: d[n] for n in nomes if n in d})


def load_report(path) -> AnalysisReport:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            dados = json.load(fh)
    except OSError as exc:
        raise InputIOError(path, exc)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: relatório não é JSON válido: {exc}")
    return AnalysisReport.from_dict(dados)


def to_json(report: AnalysisReport) -> str:
    """Documento único, chaves ordenadas, sem carimbo de data."""
    return json.dumps(report.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# ── tabelas ──────────────────────────────────────────────────────────────────

def _chave_valor(secoes: Mapping[str, Mapping]) -> pd.DataFrame:
    linhas = []
    for secao, valores in secoes.items():
        for chave, valor in valores.items():
            if isinstance(valor, (dict, list)):
                continue
            linhas.append((secao, chave, valor))
    return pd.DataFrame(linhas, columns=["section", "metric", "value"])


def _tabelas(report: AnalysisReport) -> dict[str, pd.DataFrame]:
    """Uma tabela por campo do relatório, na ordem do pacote CSV."""
    resumo = dict(report.summary)
    inicio_fim = resumo.pop("time_span", None) or (None, None)
    resumo["time_span_start"], resumo["time_span_end"] = inicio_fim
    limpeza = {"rows_read": report.cleaning["rows_read"],
               "rows_retained": report.cleaning["rows_retained"]}
    limpeza.update({f"rejected_{m}": n
                    for m, n in sorted(report.cleaning["rejected_by_reason"].items())})
    impressoes = report.detection.get("fingerprints", {})
    return {
        "summary.csv": _chave_valor({
            "dataset": resumo,
            "detection": report.detection,
            "enrichment": report.enrichment,
            "concentration": {"gini": report.lorenz["gini"]},
        }),
        "cleaning.csv": pd.DataFrame(list(limpeza.items()), columns=["metric", "value"]),
        "percentile_table.csv": pd.DataFrame(
            report.percentile_table,
            columns=["percentile", "ip_count", "packet_volume", "cumulative_share"]),
        "entropy_series.csv": pd.DataFrame(report.entropy_series),
        "burstiness.csv": pd.DataFrame(
            report.burstiness,
            columns=["asn", "total_packets", "active_hours", "activity_ratio", "burst_class"]),
        "top_countries.csv": pd.DataFrame(report.top_countries, columns=["country", "packets"]),
        "top_asns.csv": pd.DataFrame(report.top_asns, columns=["asn", "org", "packets"]),
        "top_ports.csv": pd.DataFrame(report.top_ports, columns=["port", "packets", "records"]),
        "port_risk.csv": pd.DataFrame(
            report.port_risk["ports"], columns=["port", "label", "risk", "packets", "records"]),
        "lorenz.csv": pd.DataFrame(report.lorenz["lorenz_points"], columns=["x", "y"]),
        "hourly_asn_series.csv": pd.DataFrame(report.hourly_asn_series,
                                              columns=["hour", "series", "packets"]),
        "fingerprints.csv": pd.DataFrame(
            [(t, v["records"], v["packets"]) for t, v in sorted(impressoes.items())],
            columns=["tool", "records", "packets"]),
    }


def write_csv_bundle(report: AnalysisReport, out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    saidas = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for nome, df in _tabelas(report).items():
            destino = out_dir / nome
            df.to_csv(destino, index=False, encoding=CSV_ENCODING, lineterminator="\n")
            saidas.append(destino)
    except OSError as exc:
        raise InputIOError(out_dir, exc)
    return saidas


def emit_report(report: AnalysisReport, format: str, out_dir) -> list[Path]:
    """Grava ``report.json`` ou o pacote de CSVs em ``out_dir``."""
    if format not in REPORT_FORMATS:
        raise ConfigError(f"formato de relatório desconhecido: {format!r}")
    out_dir = Path(out_dir)
    if format == "csv":
        return write_csv_bundle(report, out_dir)
    destino = out_dir / REPORT_JSON_NAME
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(destino, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(to_json(report))
    except OSError as exc:
        raise InputIOError(destino, exc)
    return [destino]


# ==============================================================================
# SÉRIES PARA GRÁFICO
# ==============================================================================

def _serie_asn(report: AnalysisReport, n: int) -> pd.DataFrame:
    df = pd.DataFrame(report.hourly_asn_series, columns=["hour", "series", "packets"])
    nomes = [s for s in dict.fromkeys(df["series"]) if s != "total"][:n] + ["total"]
    df = df[df["series"].isin(nomes)]
    return df.rename(columns={"hour": "x", "packets": "y"})[["series", "x", "y"]] \
             .reset_index(drop=True)


def _serie_entropia(report: AnalysisReport, prefixo: str) -> pd.DataFrame:
    df = pd.DataFrame(report.entropy_series)
    if df.empty:
        return pd.DataFrame(columns=["series", "x", "y"])
    partes = [pd.DataFrame({"series": alvo, "x": df["hour"], "y": df[f"{prefixo}_{alvo}_entropy"]})
              for alvo in ("port", "asn")]
    return pd.concat(partes, ignore_index=True)


def plot_series(report: AnalysisReport, which: str, n: int = TOP_ASN_SERIES) -> pd.DataFrame:
    """
    Tabela pronta para plotagem. Séries únicas saem com colunas ``x, y``;
    séries múltiplas com ``series, x, y``.
    """
    if which not in PLOT_SERIES:
        raise UnknownSeriesError(f"série desconhecida: {which!r} (opções: {', '.join(PLOT_SERIES)})")
    if which == "hourly_volume_by_asn_topN":
        return _serie_asn(report, n)
    if which == "entropy_raw":
        return _serie_entropia(report, "raw")
    if which == "entropy_normalized":
        return _serie_entropia(report, "norm")
    if which == "lorenz":
        return pd.DataFrame(report.lorenz["lorenz_points"], columns=["x", "y"])
    if which == "top_countries":
        return pd.DataFrame([(r["country"], r["packets"]) for r in report.top_countries],
                            columns=["x", "y"])
    return pd.DataFrame([(r["risk"], r["port"], r["packets"]) for r in report.port_risk["ports"]],
                        columns=["series", "x", "y"])


# ==============================================================================
# WORD (.docx)
# ==============================================================================

TITULOS_TABELAS = {
    "summary.csv":           "Resumo do conjunto e das heurísticas",
    "cleaning.csv":          "Relatório de limpeza",
    "percentile_table.csv":  "Concentração nos percentis superiores de fontes",
    "entropy_series.csv":    "Entropia horária de portas e ASNs",
    "burstiness.csv":        "Volume × burstiness por ASN",
    "top_countries.csv":     "Países com maior volume",
    "top_asns.csv":          "ASNs com maior volume",
    "top_ports.csv":         "Portas com maior volume",
    "port_risk.csv":         "Portas de alto × baixo risco",
    "lorenz.csv":            "Curva de Lorenz",
    "hourly_asn_series.csv": "Volume horário dos maiores ASNs",
    "fingerprints.csv":      "Impressões digitais de ferramentas",
}


def write_docx(report: AnalysisReport, path) -> Path:
    """Documento Word com todas as tabelas do relatório."""
    path = Path(path)
    doc = documento.preparar(Document())
    documento.titulo(doc, TITULO_PROJETO, 0)
    for i, (nome, df) in enumerate(_tabelas(report).items(), start=1):
        documento.titulo(doc, f"Tabela {i}: {TITULOS_TABELAS.get(nome, nome)}", 1)
        documento.nota(doc, f"{len(df)} linha(s) × {len(df.columns)} coluna(s) · {nome}")
        documento.tabela(doc, df, DOCX_MAX_LINHAS)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        doc.save(str(path))
    except OSError as exc:
        raise InputIOError(path, exc)
    return path


def executar_conversao(report_path, formato: str, out_dir) -> list[Path]:
    """Converte um ``report.json`` gravado para o pacote CSV ou para .docx."""
    logger.info("=" * 60)
    logger.info("FASE 5 — Conversão de Relatório")
    logger.info("=" * 60)
    report = load_report(report_path)
    if formato == "docx":
        saidas = [write_docx(report, Path(out_dir) / REPORT_DOCX_NAME)]
    else:
        saidas = emit_report(report, formato, out_dir)
    for s in saidas:
        logger.info(f"  ✓ {s}")
    return saidas
