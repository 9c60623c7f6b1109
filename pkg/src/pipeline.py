# -*- coding: utf-8 -*-
"""
Comandos do pipeline: analyze, synth, validate e report-convert.

``cmd_analyze`` encadeia carga → limpeza → enriquecimento → detecção →
métricas → relatório. A leitura anda em lotes; cada lote vira um estado
parcial (``ParcialAnalise``) e os parciais são fundidos na ordem dos lotes,
de modo que o resultado não depende do tamanho do lote nem do número de
workers.
"""

import json
import logging
import os
import platform
from dataclasses import asdict, dataclass, field, fields
from itertools import islice
from multiprocessing.dummy import Pool
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
import pandas as pd
import scipy

from src import __version__
from src.config import (
    BURST_ACTIVITY_HIGH, BURST_VOLUME_HIGH, CHUNK_SIZE, DEFAULT_SCHEMA,
    ENTROPY_WEIGHT, ENTROPY_WEIGHTS, ENV_SNAPSHOT, PERCENTILES,
    REPORT_FORMATS, RESULTS_DIR, SCAN_THRESHOLD, SYNTH_DEMO_CONFIG, SYNTH_DIR,
    TOP_ASN_SERIES, TOP_ASNS, TOP_COUNTRIES, TOP_PORTS,
)
from src.deteccao import (
    BackscatterParcial, build_profiles, label, merge_fingerprints,
    merge_profiles, tally_fingerprints,
)
from src.enriquecimento import (
    EnrichmentSnapshot, EnrichmentTally, EnrichPolicy, enrich_records,
    load_snapshot,
)
from src.erros import ConfigError, InputIOError, NothingRetainedError
from src.ingestao import (
    CleaningReport, Lote, executar_validacao, file_digest, iter_chunks,
    rejects_sidecar,
)
from src.metricas import (
    AgregadoParcial, classify_burstiness_from, entropy_series_from,
    hourly_asn_series, lorenz_gini, percentile_table, top_n,
)
from src.registro import ResumoParcial
from src.relatorio import (
    AnalysisReport, PortRiskRegistry, compare_port_risk_from, emit_report,
    executar_conversao, load_registry,
)
from src.sintetico import (
    evaluate_against_truth, executar_sintese, load_ground_truth,
    load_synth_config,
)

logger = logging.getLogger(__name__)

RUN_CONFIG_NAME = "run_config.json"


# ==============================================================================
# CONFIGURAÇÃO DA EXECUÇÃO
# ==============================================================================

@dataclass(frozen=True)
class RunConfig:
    """Configuração efetiva, com todos os padrões materializados."""
    inputs: tuple[str, ...] = ()
    snapshot: str | None = None
    enrich_policy: str = EnrichPolicy.FILL_MISSING.value
    scan_threshold: int = SCAN_THRESHOLD
    burst_volume: int = BURST_VOLUME_HIGH
    burst_activity: float = BURST_ACTIVITY_HIGH
    percentiles: tuple[float, ...] = PERCENTILES
    risk_registry: str | None = None
    out: str = str(RESULTS_DIR)
    format: str = "json"
    seed: int | None = None
    chunk_size: int = CHUNK_SIZE
    workers: int = 1
    entropy_weight: str = ENTROPY_WEIGHT
    spool_rejects: bool = False
    truth: str | None = None
    top_asn_series: int = TOP_ASN_SERIES

    def validate(self) -> "RunConfig":
        if self.scan_threshold < 1:
            raise ConfigError(f"--scan-threshold deve ser >= 1 (recebido {self.scan_threshold})")
        if self.burst_volume <= 0:
            raise ConfigError("--burst-volume deve ser positivo")
        if not 0 < self.burst_activity <= 1:
            raise ConfigError("--burst-activity deve estar em (0, 1]")
        if not self.percentiles or any(not 0 < p <= 1 for p in self.percentiles):
            raise ConfigError(f"percentis devem estar em (0, 1]: {self.percentiles}")
        if self.format not in REPORT_FORMATS:
            raise ConfigError(f"--format deve ser um de {REPORT_FORMATS}")
        if self.enrich_policy not in {p.value for p in EnrichPolicy}:
            raise ConfigError(f"--enrich-policy inválida: {self.enrich_policy!r}")
        if self.entropy_weight not in ENTROPY_WEIGHTS:
            raise ConfigError(f"--entropy-weight deve ser um de {ENTROPY_WEIGHTS}")
        if self.chunk_size < 1 or self.workers < 1 or self.top_asn_series < 1:
            raise ConfigError("--chunk-size, --workers e o top de ASNs devem ser >= 1")
        return self

    def to_dict(self) -> dict:
        d = asdict(self)
        d["inputs"] = list(self.inputs)
        d["percentiles"] = list(self.percentiles)
        return d


def _ler_config_arquivo(path) -> dict:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            dados = json.load(fh)
    except OSError as exc:
        raise InputIOError(path, exc)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: configuração não é JSON válido: {exc}")
    if not isinstance(dados, dict):
        raise ConfigError(f"{path}: configuração deve ser um objeto JSON")
    dados = {k.replace("-", "_"): v for k, v in dados.items()}
    extras = set(dados) - {f.name for f in fields(RunConfig)}
    if extras:
        raise ConfigError(f"{path}: chave(s) desconhecida(s): {sorted(extras)}")
    return dados


def parse_percentiles(texto: str) -> tuple[float, ...]:
    """``"0.01,0.05,0.10"`` ou ``"1%,5%,10%"`` → tupla de frações."""
    saida = []
    for parte in str(texto).split(","):
        parte = parte.strip()
        if not parte:
            continue
        try:
            saida.append(float(parte[:-1]) / 100 if parte.endswith("%") else float(parte))
        except ValueError:
            raise ConfigError(f"percentil inválido: {parte!r}")
    return tuple(saida)


def resolve_run_config(flags: Mapping, config_file=None,
                       env: Mapping[str, str] | None = None) -> RunConfig:
    """
    Precedência: flags > arquivo de configuração > ambiente (só o snapshot)
    > padrões. Flags com valor ``None`` são tratadas como ausentes.
    """
    env = os.environ if env is None else env
    efetiva: dict = {}
    if env.get(ENV_SNAPSHOT):
        efetiva["snapshot"] = env[ENV_SNAPSHOT]
    if config_file is not None:
        efetiva.update(_ler_config_arquivo(config_file))
    efetiva.update({k: v for k, v in flags.items() if v is not None})

    if isinstance(efetiva.get("percentiles"), str):
        efetiva["percentiles"] = parse_percentiles(efetiva["percentiles"])
    for chave in ("inputs", "percentiles"):
        if chave in efetiva:
            valor = efetiva[chave]
            efetiva[chave] = tuple([valor] if isinstance(valor, str) else valor)
    efetiva["inputs"] = tuple(str(p) for p in efetiva.get("inputs", ()))
    efetiva["percentiles"] = tuple(float(p) for p in efetiva.get("percentiles", PERCENTILES))
    for chave in ("snapshot", "risk_registry", "truth", "out"):
        if efetiva.get(chave) is not None:
            efetiva[chave] = str(efetiva[chave])
    try:
        return RunConfig(**efetiva).validate()
    except TypeError as exc:
        raise ConfigError(f"configuração inválida: {exc}")


# ==============================================================================
# ESTADO PARCIAL POR LOTE
# ==============================================================================

@dataclass
class ParcialAnalise:
    resumo: ResumoParcial = field(default_factory=ResumoParcial)
    limpeza: CleaningReport = field(default_factory=CleaningReport)
    enriquecimento: EnrichmentTally = field(default_factory=EnrichmentTally)
    agregado: AgregadoParcial = field(default_factory=AgregadoParcial.vazio)
    perfis: dict = field(default_factory=dict)
    backscatter: BackscatterParcial = field(default_factory=BackscatterParcial)
    impressoes: dict = field(default_factory=dict)

    def merge(self, outro: "ParcialAnalise") -> "ParcialAnalise":
        return ParcialAnalise(
            resumo=self.resumo.merge(outro.resumo),
            limpeza=self.limpeza.merge(outro.limpeza),
            enriquecimento=self.enriquecimento.merge(outro.enriquecimento),
            agregado=self.agregado.merge(outro.agregado),
            perfis=merge_profiles(self.perfis, outro.perfis),
            backscatter=self.backscatter.merge(outro.backscatter),
            impressoes=merge_fingerprints(self.impressoes, outro.impressoes),
        )


def _processar_lote(lote: Lote, offset: int, snapshot: EnrichmentSnapshot | None,
                    policy: str) -> ParcialAnalise:
    registros = lote.records
    tally = EnrichmentTally()
    if snapshot is not None:
        registros, tally = enrich_records(registros, snapshot, policy)
    return ParcialAnalise(
        resumo=ResumoParcial().add(registros),
        limpeza=lote.report,
        enriquecimento=tally,
        agregado=AgregadoParcial.from_records(registros),
        perfis=build_profiles(registros),
        backscatter=BackscatterParcial.from_records(registros, offset),
        impressoes=tally_fingerprints(registros),
    )


def _lotes_com_offset(cfg: RunConfig, progresso: bool) -> Iterable[tuple[Lote, int]]:
    """Lotes de todos os arquivos, com o índice global do primeiro registro."""
    base = 0
    for path in cfg.inputs:
        rejeitos = rejects_sidecar(path, cfg.out) if cfg.spool_rejects else None
        ultimo = 0
        for lote in iter_chunks(path, DEFAULT_SCHEMA, cfg.chunk_size, rejeitos, progresso):
            ultimo = lote.offset + len(lote.records)
            yield lote, base + lote.offset
        base += ultimo


def acumular(cfg: RunConfig, snapshot: EnrichmentSnapshot | None,
             progresso: bool = False) -> ParcialAnalise:
    """Processa todos os lotes (em paralelo se ``workers > 1``) e funde em ordem."""
    total = ParcialAnalise()
    lotes = iter(_lotes_com_offset(cfg, progresso))

    def _tarefa(item):
        lote, offset = item
        return _processar_lote(lote, offset, snapshot, cfg.enrich_policy)

    if cfg.workers == 1:
        for item in lotes:
            total = total.merge(_tarefa(item))
        return total
    with Pool(cfg.workers) as pool:
        while True:
            janela = list(islice(lotes, cfg.workers))
            if not janela:
                break
            for parcial in pool.map(_tarefa, janela):
                total = total.merge(parcial)
    return total


# ==============================================================================
# MONTAGEM DO RELATÓRIO
# ==============================================================================

def _versoes() -> dict:
    return {
        "telescopio": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "pandas": pd.__version__,
        "scipy": scipy.__version__,
    }


def _metadados(cfg: RunConfig, snapshot: EnrichmentSnapshot | None,
               registry: PortRiskRegistry) -> dict:
    entradas = [{"path": p, "sha256": file_digest(p)} for p in cfg.inputs]
    snap = None
    if cfg.snapshot:
        snap = {"path": cfg.snapshot, "sha256": file_digest(cfg.snapshot),
                "snapshot_date": snapshot.snapshot_date if snapshot else "",
                "prefixes": len(snapshot) if snapshot else 0}
    return {
        "config": cfg.to_dict(),
        "inputs": entradas,
        "snapshot": snap,
        "risk_registry_policy": registry.policy,
        "versions": _versoes(),
    }


def build_report(cfg: RunConfig, parcial: ParcialAnalise, snapshot: EnrichmentSnapshot | None,
                 registry: PortRiskRegistry, truth=None) -> AnalysisReport:
    """Calcula as estatísticas finais sobre o estado consolidado."""
    agregado = parcial.agregado
    resumo = parcial.resumo.finalize()
    rotulos = label(parcial.perfis, parcial.backscatter, parcial.impressoes, cfg.scan_threshold)

    janela = agregado.janela()
    fontes = agregado.fonte_dict()
    lorenz = lorenz_gini(list(fontes.values()))
    tabela = percentile_table(fontes, cfg.percentiles)
    serie = entropy_series_from(agregado, janela, cfg.entropy_weight)
    classes = classify_burstiness_from(agregado, janela, cfg.burst_volume, cfg.burst_activity)
    horaria = hourly_asn_series(agregado, cfg.top_asn_series, janela)
    portas = agregado.porta_pacotes()
    registros_porta = agregado.porta_registros()
    risco = compare_port_risk_from(portas, registros_porta, registry)

    avaliacao = None
    if truth is not None:
        avaliacao = evaluate_against_truth(rotulos, classes, truth)

    resumo_dict = asdict(resumo)
    resumo_dict["time_span"] = list(resumo.time_span) if resumo.time_span else None
    resumo_dict["window_hours"] = janela.hours

    return AnalysisReport(
        summary=resumo_dict,
        cleaning=parcial.limpeza.to_dict(),
        detection=rotulos.summary(),
        enrichment={"applied": snapshot is not None, "policy": cfg.enrich_policy,
                    **parcial.enriquecimento.to_dict()},
        lorenz={"gini": lorenz.gini, "lorenz_points": [list(p) for p in lorenz.lorenz_points]},
        percentile_table=[asdict(r) for r in tabela.rows],
        entropy_series=[asdict(r) for r in serie.rows],
        entropy_weight=serie.weight,
        burstiness=[asdict(b) for b in classes],
        hourly_asn_series=[{"hour": int(h), "series": str(s), "packets": int(p)}
                           for h, s, p in horaria.itertuples(index=False)],
        top_countries=[{"country": c, "packets": n}
                       for c, n in top_n(agregado.pais_dict(), TOP_COUNTRIES)],
        top_asns=[{"asn": a, "org": agregado.asn_org.get(a, ""), "packets": n}
                  for a, n in top_n(agregado.asn_pacotes(), TOP_ASNS)],
        top_ports=[{"port": p, "packets": n, "records": registros_porta.get(p, 0)}
                   for p, n in top_n(portas, TOP_PORTS)],
        port_risk=risco.to_dict(),
        run_metadata=_metadados(cfg, snapshot, registry),
        truth_evaluation=avaliacao,
    )


def _gravar_run_config(cfg: RunConfig, out_dir: Path) -> Path:
    destino = out_dir / RUN_CONFIG_NAME
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(destino, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(cfg.to_dict(), fh, sort_keys=True, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise InputIOError(destino, exc)
    return destino


def _resumo_execucao(report: AnalysisReport) -> None:
    s, d = report.summary, report.detection
    logger.info("-" * 60)
    logger.info(f"  Registros: {s['record_count']}  Pacotes: {s['total_packets']}  "
                f"Fontes: {s['unique_source_ips']}  Portas: {s['unique_ports']}  "
                f"ASNs: {s['unique_asns']}")
    logger.info(f"  Gini: {report.lorenz['gini']:.4f}")
    for linha in report.percentile_table:
        logger.info(f"  Top {linha['percentile']:.0%}: {linha['ip_count']} IPs, "
                    f"{linha['cumulative_share']:.2%} dos pacotes")
    logger.info(f"  Scanners: {d['scanner_sources']} ({d['scanner_packet_share']:.2%} dos pacotes)  "
                f"Backscatter: {d['backscatter_records']} registros")
    if report.truth_evaluation:
        t = report.truth_evaluation
        logger.info(f"  Gabarito: scanners P={t['scanners']['precision']:.3f} "
                    f"R={t['scanners']['recall']:.3f}; backscatter "
                    f"P={t['backscatter']['precision']:.3f} R={t['backscatter']['recall']:.3f}; "
                    f"ASNs mal classificados: {t['asn_misclassified']}")
    logger.info("-" * 60)


# ==============================================================================
# COMANDOS
# ==============================================================================

def cmd_analyze(cfg: RunConfig, progresso: bool = False) -> tuple[int, AnalysisReport]:
    logger.info("=" * 60)
    logger.info("ANÁLISE — carga → limpeza → enriquecimento → detecção → métricas")
    logger.info("=" * 60)
    if not cfg.inputs:
        raise ConfigError("nenhum arquivo de entrada (--input)")
    out_dir = Path(cfg.out)
    snapshot = load_snapshot(cfg.snapshot) if cfg.snapshot else None
    registry = load_registry(cfg.risk_registry) if cfg.risk_registry else PortRiskRegistry()
    truth = load_ground_truth(cfg.truth) if cfg.truth else None
    if cfg.spool_rejects:
        out_dir.mkdir(parents=True, exist_ok=True)

    parcial = acumular(cfg, snapshot, progresso)
    parcial.limpeza.check_conservation()
    logger.info(f"  Linhas: {parcial.limpeza.rows_read} lidas, "
                f"{parcial.limpeza.rows_retained} retidas")
    if parcial.limpeza.rows_retained == 0:
        raise NothingRetainedError("nenhum registro válido retido; nada a analisar")

    report = build_report(cfg, parcial, snapshot, registry, truth)
    saidas = emit_report(report, cfg.format, out_dir)
    _gravar_run_config(cfg, out_dir)
    _resumo_execucao(report)
    logger.info(f"  ✓ Relatório: {', '.join(s.name for s in saidas)} em {out_dir}")
    return 0, report


def cmd_synth(config_path=None, out_dir=None, seed: int | None = None,
              progresso: bool = False) -> dict:
    """Gera corpus + gabarito + snapshot; grava a configuração efetiva."""
    config = load_synth_config(config_path or SYNTH_DEMO_CONFIG, seed)
    out_dir = Path(out_dir) if out_dir else SYNTH_DIR
    resultado = executar_sintese(config, out_dir, progresso)
    destino = out_dir / "synth_config.json"
    try:
        with open(destino, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(config.to_dict(), fh, sort_keys=True, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise InputIOError(destino, exc)
    resultado["config"] = destino
    return resultado


def cmd_validate(paths: Iterable, chunk_size: int = CHUNK_SIZE, rejects_dir=None,
                 progresso: bool = False) -> CleaningReport:
    """Só a ingestão; imprime o relatório de limpeza em JSON na saída padrão."""
    paths = list(paths)
    if not paths:
        raise ConfigError("nenhum arquivo de entrada (--input)")
    if rejects_dir is not None:
        Path(rejects_dir).mkdir(parents=True, exist_ok=True)
    rep = executar_validacao(paths, DEFAULT_SCHEMA, chunk_size, rejects_dir, progresso)
    print(json.dumps(rep.to_dict(), sort_keys=True, indent=2))
    if rep.rows_retained == 0:
        raise NothingRetainedError(f"nenhuma linha retida de {rep.rows_read} lidas")
    return rep


def cmd_report_convert(report_path, formato: str, out_dir) -> list[Path]:
    if formato not in REPORT_FORMATS + ("docx",):
        raise ConfigError(f"formato de conversão desconhecido: {formato!r}")
    return executar_conversao(report_path, formato, out_dir)
